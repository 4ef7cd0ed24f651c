//! Linear algebra of Lorentz-Minkowski space with metric dx1² + dx2² − dt².

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when a point is required to lie on the hyperboloid
/// or on the light cone.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A point or vector `(x1, x2, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LorentzVec {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
}

impl LorentzVec {
    pub const ZERO: LorentzVec = LorentzVec::new(0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, t: f64) -> Self {
        LorentzVec { x1, x2, t }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.t]
    }

    /// Lorentzian squared norm.
    pub fn norm2(self) -> f64 {
        inner(self, self)
    }

    /// Euclidean length, used for scales and tolerances.
    pub fn euclid_norm(self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.t * self.t).sqrt()
    }

    /// Projection onto the horizontal plane `{t = 0}`.
    pub fn horizontal(self) -> [f64; 2] {
        [self.x1, self.x2]
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.t.is_finite()
    }

    /// Euclidean cross product.
    pub fn cross(self, o: LorentzVec) -> LorentzVec {
        LorentzVec::new(self.x2 * o.t - self.t * o.x2, self.t * o.x1 - self.x1 * o.t, self.x1 * o.x2 - self.x2 * o.x1)
    }

    /// Lorentzian cross product: the vector `n` with `inner(n, w) = det(a, b, w)`.
    /// It is Lorentz-orthogonal to both factors.
    pub fn lorentz_cross(self, o: LorentzVec) -> LorentzVec {
        let c = self.cross(o);
        LorentzVec::new(c.x1, c.x2, -c.t)
    }
}

impl Add for LorentzVec {
    type Output = LorentzVec;
    fn add(self, o: LorentzVec) -> LorentzVec {
        LorentzVec::new(self.x1 + o.x1, self.x2 + o.x2, self.t + o.t)
    }
}

impl AddAssign for LorentzVec {
    fn add_assign(&mut self, o: LorentzVec) {
        *self = *self + o;
    }
}

impl Sub for LorentzVec {
    type Output = LorentzVec;
    fn sub(self, o: LorentzVec) -> LorentzVec {
        LorentzVec::new(self.x1 - o.x1, self.x2 - o.x2, self.t - o.t)
    }
}

impl Neg for LorentzVec {
    type Output = LorentzVec;
    fn neg(self) -> LorentzVec {
        LorentzVec::new(-self.x1, -self.x2, -self.t)
    }
}

impl Mul<f64> for LorentzVec {
    type Output = LorentzVec;
    fn mul(self, s: f64) -> LorentzVec {
        LorentzVec::new(self.x1 * s, self.x2 * s, self.t * s)
    }
}

impl Mul<LorentzVec> for f64 {
    type Output = LorentzVec;
    fn mul(self, v: LorentzVec) -> LorentzVec {
        v * self
    }
}

impl Div<f64> for LorentzVec {
    type Output = LorentzVec;
    fn div(self, s: f64) -> LorentzVec {
        LorentzVec::new(self.x1 / s, self.x2 / s, self.t / s)
    }
}

/// Causal character of a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalClass {
    Spacelike,
    Timelike,
    Lightlike,
}

/// Minkowski inner product.
pub fn inner(a: LorentzVec, b: LorentzVec) -> f64 {
    a.x1 * b.x1 + a.x2 * b.x2 - a.t * b.t
}

/// `max(1, |v|)`: the scale that makes tolerances relative for large vectors.
fn scale(v: LorentzVec) -> f64 {
    v.euclid_norm().max(1.0)
}

/// Causal classification with a relative tolerance: `|norm2| <= tol * scale²`
/// counts as lightlike. The zero vector is spacelike by convention.
pub fn classify(v: LorentzVec, tol: f64) -> CausalClass {
    if v == LorentzVec::ZERO {
        return CausalClass::Spacelike;
    }
    let n = v.norm2();
    let s = scale(v);
    if n.abs() <= tol * s * s {
        CausalClass::Lightlike
    } else if n > 0.0 {
        CausalClass::Spacelike
    } else {
        CausalClass::Timelike
    }
}

/// Which part of the light cone a query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSign {
    Full,
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeQuery {
    pub vertex: LorentzVec,
    pub sign: ConeSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeRegion {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSheet {
    Upper,
    Lower,
    None,
}

/// Position of `p` relative to the light cone at `q.vertex`.
///
/// Points outside the cone carry no sheet. On or inside the cone the sheet is
/// given by the sign of the time difference; the vertex itself is on the
/// boundary with no sheet.
pub fn cone_side(q: &ConeQuery, p: LorentzVec, tol: f64) -> (ConeRegion, ConeSheet) {
    let d = p - q.vertex;
    let s = scale(d);
    let n = d.norm2();
    let region = if n < -tol * s * s {
        ConeRegion::Interior
    } else if n > tol * s * s {
        ConeRegion::Exterior
    } else {
        ConeRegion::Boundary
    };
    let sheet = if region == ConeRegion::Exterior || d.t == 0.0 {
        ConeSheet::None
    } else if d.t > 0.0 {
        ConeSheet::Upper
    } else {
        ConeSheet::Lower
    };
    (region, sheet)
}

impl ConeQuery {
    /// True when `p` lies in the closed solid cone selected by `sign`.
    pub fn contains(&self, p: LorentzVec, tol: f64) -> bool {
        let (region, sheet) = cone_side(self, p, tol);
        if region == ConeRegion::Exterior {
            return false;
        }
        match self.sign {
            ConeSign::Full => true,
            ConeSign::Upper => sheet != ConeSheet::Lower,
            ConeSign::Lower => sheet != ConeSheet::Upper,
        }
    }
}

/// Stereographic projection of the hyperboloid `<n,n> = -1` (minus its north
/// pole) onto the extended plane.
pub fn st(n: LorentzVec) -> Result<Complex64> {
    let s = scale(n);
    if (n.norm2() + 1.0).abs() > MEMBERSHIP_TOL * s * s {
        return Err(Error::Domain(format!("st: <n,n> = {} is not -1 for n = {:?}", n.norm2(), n)));
    }
    if n.t == 1.0 {
        return Err(Error::Domain("st: north pole t = 1 has no image".into()));
    }
    Ok(Complex64::new(n.x2 / (n.t - 1.0), n.x1 / (1.0 - n.t)))
}

/// Inverse of [`st`]. The open unit disc maps to the lower sheet `t < 0`.
pub fn st_inv(w: Complex64) -> Result<LorentzVec> {
    let r2 = w.norm_sqr();
    let d = r2 - 1.0;
    if d.abs() <= MEMBERSHIP_TOL || !r2.is_finite() {
        return Err(Error::Domain(format!("st_inv: |w| = {} lies on the unit circle", r2.sqrt())));
    }
    Ok(LorentzVec::new(-2.0 * w.im / d, 2.0 * w.re / d, (1.0 + r2) / d))
}

/// Stereographic projection of lightlike directions onto the unit circle.
pub fn st0(v: LorentzVec) -> Result<Complex64> {
    if v.t == 0.0 {
        return Err(Error::Domain("st0: vector has zero time component".into()));
    }
    if classify(v, MEMBERSHIP_TOL) != CausalClass::Lightlike {
        return Err(Error::Domain(format!("st0: {:?} is not lightlike", v)));
    }
    Ok(Complex64::new(v.x2 / v.t, -v.x1 / v.t))
}
