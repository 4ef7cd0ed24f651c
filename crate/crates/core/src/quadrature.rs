//! Globally adaptive Gauss-Kronrod (7, 15) quadrature on a real interval.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes (the last one is the center).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Values that can be integrated: a vector space with a magnitude.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Three complex components, the shape of a Weierstrass integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C3(pub [Complex64; 3]);

impl Add for C3 {
    type Output = C3;
    fn add(self, o: C3) -> C3 {
        C3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for C3 {
    type Output = C3;
    fn sub(self, o: C3) -> C3 {
        C3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for C3 {
    type Output = C3;
    fn mul(self, s: f64) -> C3 {
        C3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl QuadValue for C3 {
    fn zero() -> Self {
        C3([Complex64::new(0.0, 0.0); 3])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T, F>(f: &mut F, a: f64, b: f64) -> Result<Piece<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let x = h * XGK[k];
        let s = f(c - x)? + f(c + x)?;
        kron = kron + s * WGK[k];
        if k % 2 == 1 {
            gauss = gauss + s * WG[k / 2];
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).magnitude();
    Ok(Piece { a, b, value, error })
}

/// Integrates `f` over `[a, b]` until the summed error estimate is at most
/// `abs_tol`, bisecting the worst interval each step. Evaluation order only
/// depends on the inputs, so results are reproducible bit for bit.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, abs_tol: f64, max_pieces: usize) -> Result<T>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if a == b {
        return Ok(T::zero());
    }
    let mut pieces = vec![gk15(&mut f, a, b)?];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.error).sum();
        if total_err <= abs_tol {
            break;
        }
        if pieces.len() >= max_pieces {
            return Err(Error::Quadrature { tol: abs_tol, estimate: total_err });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc })
            .0;
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        pieces.push(gk15(&mut f, p.a, mid)?);
        pieces.push(gk15(&mut f, mid, p.b)?);
    }
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(pieces.iter().fold(T::zero(), |acc, p| acc + p.value))
}
