//! Conformal maximal immersions from Weierstrass data `(g, f)` with
//! `φ3 = f dz`, `φ1 = ½(1/g − g)φ3`, `φ2 = (i/2)(1/g + g)φ3` and
//! `X = Re ∫ (φ1, φ2, iφ3)`.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64};
use crate::lorentz::LorentzVec;
use crate::quadrature::{integrate, C3};

/// Per-segment absolute tolerance of the path integrals.
pub const QUAD_TOL: f64 = 1e-10;
const MAX_PIECES: usize = 4096;
/// `|g|` below this or above its inverse counts as a zero or pole.
pub const POLE_TOL: f64 = 1e-9;
/// Default tolerance on `||g| − 1|` for flagging singular nodes.
pub const SINGULAR_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

type CFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A holomorphic map given by an evaluator and optionally its derivative.
#[derive(Clone)]
pub struct ComplexMap {
    eval: CFn,
    derivative: Option<CFn>,
}

impl std::fmt::Debug for ComplexMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplexMap").field("has_derivative", &self.derivative.is_some()).finish()
    }
}

impl ComplexMap {
    pub fn new(eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        ComplexMap { eval: Arc::new(eval), derivative: None }
    }

    pub fn with_derivative(
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        derivative: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        ComplexMap { eval: Arc::new(eval), derivative: Some(Arc::new(derivative)) }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        self.derivative.as_ref().map(|d| d(z))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Largest relative mismatch between the stored derivative and a central
    /// difference of `eval` over `points`. `None` when no derivative is stored.
    pub fn derivative_mismatch(&self, points: &[Complex64], step: f64) -> Option<f64> {
        let d = self.derivative.as_ref()?;
        let mut worst: f64 = 0.0;
        for &z in points {
            let fd = (self.eval(z + step) - self.eval(z - step)) / (2.0 * step);
            let exact = d(z);
            worst = worst.max((fd - exact).norm() / exact.norm().max(1.0));
        }
        Some(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// `z = u + iv`.
    Rectangle,
    /// `z = u + iv` with `v ≥ 0`.
    UpperHalfRectangle,
    /// `z = m·e^{is}` with `(u, v) = (m, s)`, `m ≥ 0`.
    AnnulusSector,
}

/// A rectangle of parameters `[u0, u1] × [v0, v1]` sampled on an `nu × nv` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub kind: DomainKind,
    pub bounds: [f64; 4],
    pub nu: usize,
    pub nv: usize,
}

impl ParamDomain {
    pub fn new(kind: DomainKind, bounds: [f64; 4], nu: usize, nv: usize) -> Result<Self> {
        let [u0, u1, v0, v1] = bounds;
        if nu < 2 || nv < 2 {
            return Err(Error::Domain(format!("resolution {nu}x{nv} must be at least 2x2")));
        }
        if !(u0 < u1 && v0 < v1) || bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain(format!("bounds {bounds:?} are not ordered")));
        }
        match kind {
            DomainKind::UpperHalfRectangle if v0 < 0.0 => Err(Error::Domain("upper-half rectangle needs v ≥ 0".into())),
            DomainKind::AnnulusSector if u0 < 0.0 => Err(Error::Domain("annulus sector needs radius m ≥ 0".into())),
            _ => Ok(ParamDomain { kind, bounds, nu, nv }),
        }
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nu + i
    }

    pub fn param(&self, i: usize, j: usize) -> (f64, f64) {
        let [u0, u1, v0, v1] = self.bounds;
        let u = u0 + (u1 - u0) * (i as f64) / ((self.nu - 1) as f64);
        let v = v0 + (v1 - v0) * (j as f64) / ((self.nv - 1) as f64);
        (u, v)
    }

    pub fn params(&self) -> Vec<(f64, f64)> {
        (0..self.nv).flat_map(|j| (0..self.nu).map(move |i| (i, j))).map(|(i, j)| self.param(i, j)).collect()
    }

    /// The complex coordinate of a parameter point.
    pub fn z(&self, u: f64, v: f64) -> Complex64 {
        match self.kind {
            DomainKind::Rectangle | DomainKind::UpperHalfRectangle => Complex64::new(u, v),
            DomainKind::AnnulusSector => Complex64::from_polar(u, v),
        }
    }

    /// Partial derivatives `(∂z/∂u, ∂z/∂v)`.
    fn dz(&self, u: f64, v: f64) -> (Complex64, Complex64) {
        match self.kind {
            DomainKind::Rectangle | DomainKind::UpperHalfRectangle => (Complex64::new(1.0, 0.0), I),
            DomainKind::AnnulusSector => {
                let e = Complex64::from_polar(1.0, v);
                (e, I * u * e)
            }
        }
    }
}

/// Anti-holomorphic involution of the mirror symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mirror {
    /// `z ↦ z̄`
    Conjugate,
    /// `z ↦ 1/z̄`
    Inversion,
}

impl Mirror {
    pub fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Mirror::Conjugate => z.conj(),
            Mirror::Inversion => 1.0 / z.conj(),
        }
    }

    /// Coefficient `c(z)` with `J*(dz) = c(z) dz̄`.
    pub fn pullback_factor(self, z: Complex64) -> Complex64 {
        match self {
            Mirror::Conjugate => Complex64::new(1.0, 0.0),
            Mirror::Inversion => -1.0 / (z.conj() * z.conj()),
        }
    }
}

/// Weierstrass data on a parameter domain. The basepoint is given in
/// parameter coordinates and is mapped to `base_image`.
#[derive(Debug, Clone)]
pub struct WeierstrassData {
    pub g: ComplexMap,
    pub f: ComplexMap,
    pub domain: ParamDomain,
    pub basepoint: (f64, f64),
    pub base_image: LorentzVec,
    pub mirror: Option<Mirror>,
}

impl WeierstrassData {
    pub fn basepoint_z(&self) -> Complex64 {
        self.domain.z(self.basepoint.0, self.basepoint.1)
    }

    pub fn with_domain(&self, domain: ParamDomain) -> Self {
        WeierstrassData { domain, ..self.clone() }
    }

    fn checked_g(&self, z: Complex64) -> Result<Complex64> {
        let g = self.g.eval(z);
        let r = g.norm();
        if !r.is_finite() || !(POLE_TOL..=1.0 / POLE_TOL).contains(&r) {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        Ok(g)
    }
}

/// `(φ1, φ2, φ3)` divided by `dz` at `z`.
pub fn phi_components(data: &WeierstrassData, z: Complex64) -> Result<[Complex64; 3]> {
    let g = data.checked_g(z)?;
    let f = data.f.eval(z);
    let ginv = 1.0 / g;
    Ok([0.5 * (ginv - g) * f, 0.5 * I * (ginv + g) * f, f])
}

/// Intrinsic conformal factor `λ = ¼ (1/|g| − |g|)² |f|²`, so that
/// `ds² = λ |dz|²`.
pub fn conformal_factor(data: &WeierstrassData, z: Complex64) -> Result<f64> {
    let g = data.checked_g(z)?;
    let r = g.norm();
    let a = 1.0 / r - r;
    Ok(0.25 * a * a * data.f.eval(z).norm_sqr())
}

/// Which 1-form is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// `(φ1, φ2, iφ3)`: the maximal immersion itself.
    Immersion,
    /// `i(φ1, φ2, iφ3)`: the maximal conjugate, i.e. the data `(g, i f)`.
    MaximalConjugate,
    /// `(φ1, φ2, φ3)`: the Euclidean minimal conjugate.
    MinimalConjugate,
}

fn form(data: &WeierstrassData, kind: FormKind, z: Complex64) -> Result<C3> {
    let [p1, p2, p3] = phi_components(data, z)?;
    Ok(C3(match kind {
        FormKind::Immersion => [p1, p2, I * p3],
        FormKind::MaximalConjugate => [I * p1, I * p2, -p3],
        FormKind::MinimalConjugate => [p1, p2, p3],
    }))
}

/// Order of the two legs of an L-shaped integration path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    /// Move in `u` first, then in `v`.
    UThenV,
    /// Move in `v` first, then in `u`.
    VThenU,
}

fn segment(data: &WeierstrassData, kind: FormKind, from: (f64, f64), to: (f64, f64)) -> Result<C3> {
    let (du, dv) = (to.0 - from.0, to.1 - from.1);
    if du == 0.0 && dv == 0.0 {
        return Ok(C3([Complex64::new(0.0, 0.0); 3]));
    }
    let integrand = |tau: f64| -> Result<C3> {
        let (u, v) = (from.0 + tau * du, from.1 + tau * dv);
        let (zu, zv) = data.domain.dz(u, v);
        let w = zu * du + zv * dv;
        let c = form(data, kind, data.domain.z(u, v))?;
        Ok(C3([c.0[0] * w, c.0[1] * w, c.0[2] * w]))
    };
    integrate(integrand, 0.0, 1.0, QUAD_TOL, MAX_PIECES)
}

/// Integral of the chosen form from the basepoint to the parameter `(u, v)`.
pub fn integrate_form(
    data: &WeierstrassData,
    kind: FormKind,
    target: (f64, f64),
    order: PathOrder,
) -> Result<LorentzVec> {
    let b = data.basepoint;
    let corner = match order {
        PathOrder::UThenV => (target.0, b.1),
        PathOrder::VThenU => (b.0, target.1),
    };
    let total = segment(data, kind, b, corner)? + segment(data, kind, corner, target)?;
    Ok(LorentzVec::new(total.0[0].re, total.0[1].re, total.0[2].re))
}

/// Sampled image of a parameter grid with Gauss map and conformal factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledImmersion {
    pub domain: ParamDomain,
    pub params: Vec<(f64, f64)>,
    pub points: Vec<LorentzVec>,
    /// Gauss map values `g`; NaN where the data has none.
    pub gauss: Vec<Complex64>,
    pub conformal_factor: Vec<f64>,
}

impl SampledImmersion {
    pub fn nu(&self) -> usize {
        self.domain.nu
    }

    pub fn nv(&self) -> usize {
        self.domain.nv
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        self.domain.index(i, j)
    }

    /// Nodes on the singular set: `||g| − 1| ≤ tol` where `g` is known and a
    /// vanishing conformal factor otherwise.
    pub fn singular_mask(&self, tol: f64) -> Vec<bool> {
        self.gauss
            .iter()
            .zip(&self.conformal_factor)
            .map(|(g, &lam)| if g.re.is_nan() { lam <= tol } else { (g.norm() - 1.0).abs() <= tol })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "u,v,x1,x2,t,re_g,im_g,lambda,singular")?;
        let singular = self.singular_mask(SINGULAR_TOL);
        for (k, &flag) in singular.iter().enumerate() {
            let (u, v) = self.params[k];
            let p = self.points[k];
            let g = self.gauss[k];
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(u),
                fmt_f64(v),
                fmt_f64(p.x1),
                fmt_f64(p.x2),
                fmt_f64(p.t),
                fmt_f64(g.re),
                fmt_f64(g.im),
                fmt_f64(self.conformal_factor[k]),
                u8::from(flag)
            )?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). The grid shape
    /// is recovered from the row-major layout; the domain kind is recorded as a
    /// rectangle since only parameter values are stored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty immersion file".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 8 || cols[..8] != ["u", "v", "x1", "x2", "t", "re_g", "im_g", "lambda"] {
            return Err(Error::Parse(format!("unexpected header '{header}'")));
        }
        let (mut params, mut points, mut gauss, mut lam) = (vec![], vec![], vec![], vec![]);
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .take(8)
                .map(parse_f64)
                .collect::<Result<_>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", n + 2)))?;
            if f.len() != 8 {
                return Err(Error::Parse(format!("row {} has {} columns", n + 2, f.len())));
            }
            params.push((f[0], f[1]));
            points.push(LorentzVec::new(f[2], f[3], f[4]));
            gauss.push(Complex64::new(f[5], f[6]));
            lam.push(f[7]);
        }
        let v0 = params.first().ok_or_else(|| Error::Parse("no samples".into()))?.1;
        let nu = params.iter().take_while(|p| p.1 == v0).count();
        if nu < 2 || params.len() % nu != 0 || params.len() / nu < 2 {
            return Err(Error::Parse(format!("{} rows do not form a grid", params.len())));
        }
        let nv = params.len() / nu;
        let (first, last) = (params[0], params[params.len() - 1]);
        let domain = ParamDomain { kind: DomainKind::Rectangle, bounds: [first.0, last.0, first.1, last.1], nu, nv };
        Ok(SampledImmersion { domain, params, points, gauss, conformal_factor: lam })
    }

    /// Wavefront OBJ: one vertex per node, one quad per grid cell.
    pub fn write_obj<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.points {
            writeln!(w, "v {} {} {}", fmt_f64(p.x1), fmt_f64(p.x2), fmt_f64(p.t))?;
        }
        for j in 0..self.nv() - 1 {
            for i in 0..self.nu() - 1 {
                let a = self.idx(i, j) + 1;
                let b = self.idx(i + 1, j) + 1;
                let c = self.idx(i + 1, j + 1) + 1;
                let d = self.idx(i, j + 1) + 1;
                writeln!(w, "f {a} {b} {c} {d}")?;
            }
        }
        Ok(())
    }
}

fn sample_form(data: &WeierstrassData, kind: FormKind, base: LorentzVec) -> Result<SampledImmersion> {
    let domain = data.domain;
    let params = domain.params();
    let points: Vec<LorentzVec> = params
        .par_iter()
        .map(|&p| integrate_form(data, kind, p, PathOrder::UThenV).map(|x| base + x))
        .collect::<Result<_>>()?;
    let gauss_lam: Vec<(Complex64, f64)> = params
        .par_iter()
        .map(|&(u, v)| {
            let z = domain.z(u, v);
            Ok((data.checked_g(z)?, conformal_factor(data, z)?))
        })
        .collect::<Result<_>>()?;
    let (gauss, conformal_factor) = gauss_lam.into_iter().unzip();
    Ok(SampledImmersion { domain, params, points, gauss, conformal_factor })
}

/// Samples `X = base_image + Re ∫ (φ1, φ2, iφ3)` on the data's grid, each node
/// integrated along its own L-shaped path from the basepoint.
pub fn integrate_immersion(data: &WeierstrassData) -> Result<SampledImmersion> {
    sample_form(data, FormKind::Immersion, data.base_image)
}

/// Which conjugate surface to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugateKind {
    /// `Re ∫ i(φ1, φ2, iφ3)`, again a maximal surface with data `(g, i f)`.
    Maximal,
    /// `Re ∫ (φ1, φ2, φ3)`, a Euclidean minimal surface.
    Minimal,
}

/// Samples the conjugate immersion, normalized to vanish at the basepoint.
pub fn conjugate_immersion(data: &WeierstrassData, kind: ConjugateKind) -> Result<SampledImmersion> {
    let form = match kind {
        ConjugateKind::Maximal => FormKind::MaximalConjugate,
        ConjugateKind::Minimal => FormKind::MinimalConjugate,
    };
    sample_form(data, form, LorentzVec::ZERO)
}

/// Weierstrass data of the maximal conjugate: `(g, i f)`.
pub fn conjugate_data(data: &WeierstrassData) -> WeierstrassData {
    let f = data.f.clone();
    WeierstrassData { f: ComplexMap::new(move |z| I * f.eval(z)), base_image: LorentzVec::ZERO, ..data.clone() }
}

/// Residuals of the mirror-symmetry conditions `ḡ·(g∘J) = 1` and
/// `J*(φ3) = −φ̄3` over the grid nodes.
pub fn mirror_residual(data: &WeierstrassData) -> Result<(f64, f64)> {
    let mirror = data.mirror.ok_or_else(|| Error::Config("data has no mirror involution".into()))?;
    let mut res = (0.0f64, 0.0f64);
    for (u, v) in data.domain.params() {
        let z = data.domain.z(u, v);
        let jz = mirror.apply(z);
        let gz = data.g.eval(z);
        let gj = data.g.eval(jz);
        let r1 = (gz.conj() * gj - 1.0).norm();
        let r2 = (data.f.eval(jz) * mirror.pullback_factor(z) + data.f.eval(z).conj()).norm();
        res.0 = res.0.max(r1);
        res.1 = res.1.max(r2);
    }
    Ok(res)
}

/// Singular nodes of a sample grouped into 8-connected components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularScan {
    pub points: Vec<(f64, f64)>,
    pub nodes: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

/// Grid points with `||g| − 1| ≤ tol`, labeled by connected component.
pub fn singular_scan(imm: &SampledImmersion, tol: f64) -> SingularScan {
    let mask = imm.singular_mask(tol);
    let nodes: Vec<usize> = (0..mask.len()).filter(|&k| mask[k]).collect();
    let points = nodes.iter().map(|&k| imm.params[k]).collect();
    let components = components_8(&mask, imm.nu(), imm.nv());
    SingularScan { points, nodes, components }
}

/// 8-connected components of the `true` cells of a row-major grid, each sorted,
/// in order of their smallest index.
pub(crate) fn components_8(mask: &[bool], nx: usize, ny: usize) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; mask.len()];
    let mut out = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = vec![];
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        while let Some(k) = queue.pop_front() {
            comp.push(k);
            let (i, j) = ((k % nx) as isize, (k / nx) as isize);
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                        continue;
                    }
                    let n = b as usize * nx + a as usize;
                    if mask[n] && label[n] == usize::MAX {
                        label[n] = id;
                        queue.push_back(n);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn helicoid(domain: ParamDomain) -> WeierstrassData {
        WeierstrassData {
            g: ComplexMap::with_derivative(|z| (I * z).exp(), |z| I * (I * z).exp()),
            f: ComplexMap::new(|_| -I),
            domain,
            basepoint: (0.0, 0.0),
            base_image: LorentzVec::new(1.0, 0.0, 0.0),
            mirror: Some(Mirror::Conjugate),
        }
    }

    fn rect(nu: usize, nv: usize) -> ParamDomain {
        ParamDomain::new(DomainKind::UpperHalfRectangle, [-1.0, 1.0, 0.0, 1.0], nu, nv).unwrap()
    }

    #[test]
    fn phi_at_origin_by_hand() {
        // g(0) = 1: φ1 = ½(1 − 1)(−i) = 0, φ2 = (i/2)(2)(−i) = 1, φ3 = −i.
        let [p1, p2, p3] = phi_components(&helicoid(rect(2, 2)), Complex64::new(0.0, 0.0)).unwrap();
        assert!(p1.norm() < 1e-16);
        assert!((p2 - 1.0).norm() < 1e-16);
        assert!((p3 + I).norm() < 1e-16);
    }

    #[test]
    fn catenoid_phi_by_hand() {
        let data = WeierstrassData { g: ComplexMap::new(|z| z), f: ComplexMap::new(|z| I / z), ..helicoid(rect(2, 2)) };
        let [p1, p2, p3] = phi_components(&data, Complex64::new(1.0, 0.0)).unwrap();
        assert!(p1.norm() < 1e-16);
        assert!((p2 + 1.0).norm() < 1e-16);
        assert!((p3 - I).norm() < 1e-16);
    }

    #[test]
    fn pole_is_reported() {
        let data = WeierstrassData { g: ComplexMap::new(|z| z), ..helicoid(rect(2, 2)) };
        assert!(matches!(phi_components(&data, Complex64::new(0.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn helicoid_closed_form() {
        let imm = integrate_immersion(&helicoid(rect(9, 7))).unwrap();
        for (k, &(u, v)) in imm.params.iter().enumerate() {
            let exact = LorentzVec::new(v.cosh() * u.cos(), v.cosh() * u.sin(), u);
            assert!((imm.points[k] - exact).euclid_norm() < 1e-9, "{u} {v}");
        }
    }

    #[test]
    fn conformal_factor_matches_tangent_length() {
        // |X_u|² = sinh²v for the helicoid, which fixes the constant ¼.
        let data = helicoid(rect(2, 2));
        for v in [0.3, 1.0, 2.0] {
            let lam = conformal_factor(&data, Complex64::new(0.4, v)).unwrap();
            assert!((lam - v.sinh().powi(2)).abs() < 1e-12 * lam.max(1.0));
        }
        assert_eq!(conformal_factor(&data, Complex64::new(0.7, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn path_orders_agree() {
        let data = helicoid(rect(2, 2));
        for target in [(0.9, 0.8), (-0.7, 0.3)] {
            let a = integrate_form(&data, FormKind::Immersion, target, PathOrder::UThenV).unwrap();
            let b = integrate_form(&data, FormKind::Immersion, target, PathOrder::VThenU).unwrap();
            assert!((a - b).euclid_norm() < 1e-10);
        }
    }

    #[test]
    fn mirror_residuals() {
        let r = mirror_residual(&helicoid(rect(5, 5))).unwrap();
        assert!(r.0 < 1e-12 && r.1 < 1e-12);
        let bad = WeierstrassData { g: ComplexMap::new(|z| 1.1 * (I * z).exp()), ..helicoid(rect(5, 5)) };
        assert!(mirror_residual(&bad).unwrap().0 > 0.1);
        let none = WeierstrassData { mirror: None, ..helicoid(rect(5, 5)) };
        assert!(matches!(mirror_residual(&none), Err(Error::Config(_))));
    }

    #[test]
    fn inversion_mirror_for_catenoid_data() {
        let domain = ParamDomain::new(DomainKind::AnnulusSector, [0.5, 2.0, 0.0, 6.0], 6, 6).unwrap();
        let data = WeierstrassData {
            g: ComplexMap::new(|z| z),
            f: ComplexMap::new(|z| 1.0 / z),
            domain,
            basepoint: (1.0, 0.0),
            base_image: LorentzVec::ZERO,
            mirror: Some(Mirror::Inversion),
        };
        let r = mirror_residual(&data).unwrap();
        assert!(r.0 < 1e-12 && r.1 < 1e-12, "{r:?}");
        // Rotating φ3 by i breaks the second condition but not the first.
        let rotated = WeierstrassData { f: ComplexMap::new(|z| I / z), ..data };
        let r = mirror_residual(&rotated).unwrap();
        assert!(r.0 < 1e-12 && (r.1 - 4.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn singular_scan_finds_bottom_edge() {
        let imm = integrate_immersion(&helicoid(rect(6, 5))).unwrap();
        let scan = singular_scan(&imm, SINGULAR_TOL);
        assert_eq!(scan.nodes, (0..6).collect::<Vec<_>>());
        assert_eq!(scan.components.len(), 1);
    }

    #[test]
    fn derivative_mismatch_small() {
        let g = ComplexMap::with_derivative(|z| (I * z).exp(), |z| I * (I * z).exp());
        let pts = [Complex64::new(0.3, 0.2), Complex64::new(-1.0, 1.5)];
        assert!(g.derivative_mismatch(&pts, 1e-5).unwrap() < 1e-6);
        assert!(ComplexMap::new(|z| z).derivative_mismatch(&pts, 1e-5).is_none());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let imm = integrate_immersion(&helicoid(rect(4, 3))).unwrap();
        let mut buf = Vec::new();
        imm.write_csv(&mut buf).unwrap();
        let back = SampledImmersion::read_csv(&buf[..]).unwrap();
        assert_eq!(back.points, imm.points);
        assert_eq!(back.params, imm.params);
        assert_eq!(back.conformal_factor, imm.conformal_factor);
        assert_eq!((back.nu(), back.nv()), (4, 3));
    }

    #[test]
    fn obj_counts() {
        let imm = integrate_immersion(&helicoid(rect(4, 3))).unwrap();
        let mut buf = Vec::new();
        imm.write_obj(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 12);
        assert_eq!(s.lines().filter(|l| l.starts_with("f ")).count(), 6);
    }

    #[test]
    fn domain_validation() {
        assert!(ParamDomain::new(DomainKind::Rectangle, [0.0, 1.0, 0.0, 1.0], 1, 5).is_err());
        assert!(ParamDomain::new(DomainKind::Rectangle, [1.0, 0.0, 0.0, 1.0], 3, 5).is_err());
        assert!(ParamDomain::new(DomainKind::UpperHalfRectangle, [0.0, 1.0, -1.0, 1.0], 3, 5).is_err());
        assert!(ParamDomain::new(DomainKind::AnnulusSector, [-1.0, 1.0, 0.0, 1.0], 3, 5).is_err());
    }
}
