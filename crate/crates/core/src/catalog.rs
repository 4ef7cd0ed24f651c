//! Closed-form model surfaces with their Weierstrass data, implicit equations
//! and reference facts, plus entire graphs used as fixtures.
//!
//! Parameters follow the conventions of each model: the helicoid uses
//! `z = u + iv`, the catenoid and both Enneper surfaces use `z = m e^{is}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::LorentzVec;
use crate::maxgraph::GridGraph;
use crate::weierstrass::{
    conformal_factor, ComplexMap, DomainKind, Mirror, ParamDomain, SampledImmersion, WeierstrassData,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Constant Gauss map of the spacelike plane fixture.
pub const PLANE_G: f64 = 0.3;

/// Homothety relating the E1 parametrization to its implicit equation:
/// `implicit(λ·X(m, s)) = 0` with `λ = 1/8`, confirmed by [`fit_implicit_scale`].
pub const ENNEPER1_IMPLICIT_SCALE: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Helicoid,
    Catenoid,
    Enneper1,
    Enneper2,
    /// Spacelike plane with constant Gauss map [`PLANE_G`].
    Plane,
    /// Negative control: the timelike plane `(u, 0, v)`.
    TimelikePlane,
    /// Negative control: a cap of the Euclidean unit sphere, spacelike but not maximal.
    SphereCap,
}

impl Model {
    pub const ALL: [Model; 7] = [
        Model::Helicoid,
        Model::Catenoid,
        Model::Enneper1,
        Model::Enneper2,
        Model::Plane,
        Model::TimelikePlane,
        Model::SphereCap,
    ];

    /// The maximal surfaces of the catalog (fixtures excluded).
    pub const MAXIMAL: [Model; 5] = [Model::Helicoid, Model::Catenoid, Model::Enneper1, Model::Enneper2, Model::Plane];

    pub fn name(self) -> &'static str {
        match self {
            Model::Helicoid => "helicoid",
            Model::Catenoid => "catenoid",
            Model::Enneper1 => "enneper1",
            Model::Enneper2 => "enneper2",
            Model::Plane => "plane",
            Model::TimelikePlane => "timelike-plane",
            Model::SphereCap => "sphere-cap",
        }
    }

    /// Looks a model up by name; a `-fixture` suffix is accepted for the
    /// negative controls.
    pub fn from_name(name: &str) -> Result<Model> {
        let base = name.strip_suffix("-fixture").unwrap_or(name);
        Model::ALL
            .into_iter()
            .find(|m| m.name() == base)
            .ok_or_else(|| Error::Domain(format!("unknown model '{name}'")))
    }

    pub fn is_maximal(self) -> bool {
        Model::MAXIMAL.contains(&self)
    }
}

fn plane_coeffs() -> (f64, f64) {
    (0.5 * (1.0 / PLANE_G - PLANE_G), 0.5 * (1.0 / PLANE_G + PLANE_G))
}

fn helicoid_xy(u: f64, v: f64) -> LorentzVec {
    LorentzVec::new(v.cosh() * u.cos(), v.cosh() * u.sin(), u)
}

fn catenoid_ms(m: f64, s: f64) -> LorentzVec {
    let k = (1.0 - m * m) / (2.0 * m);
    LorentzVec::new(k * s.sin(), -k * s.cos(), m.ln())
}

fn enneper1_ms(m: f64, s: f64) -> LorentzVec {
    let m3 = m * m * m;
    LorentzVec::new(
        -m * m * (2.0 * s).cos(),
        (3.0 * m * s.cos() - m3 * (3.0 * s).cos()) / 3.0,
        -m * (3.0 * s.cos() + m * m * (3.0 * s).cos()) / 3.0,
    )
}

fn enneper2_ms(m: f64, s: f64) -> LorentzVec {
    let m3 = m * m * m;
    LorentzVec::new(
        m * m * (2.0 * s).sin(),
        (-3.0 * m * s.sin() + m3 * (3.0 * s).sin()) / 3.0,
        (3.0 * m * s.sin() + m3 * (3.0 * s).sin()) / 3.0,
    )
}

/// Closed-form parametrization in the model's own parameters.
pub fn eval_param(model: Model, u: f64, v: f64) -> Result<LorentzVec> {
    let out_of_range = |what: &str| Err(Error::Domain(format!("{}: {what} (got u = {u}, v = {v})", model.name())));
    match model {
        Model::Helicoid if v < 0.0 => out_of_range("needs v ≥ 0"),
        Model::Helicoid => Ok(helicoid_xy(u, v)),
        Model::Catenoid if u <= 0.0 => out_of_range("needs m > 0"),
        Model::Catenoid => Ok(catenoid_ms(u, v)),
        Model::Enneper1 | Model::Enneper2 if u < 0.0 => out_of_range("needs m ≥ 0"),
        Model::Enneper1 => Ok(enneper1_ms(u, v)),
        Model::Enneper2 => Ok(enneper2_ms(u, v)),
        Model::Plane => {
            let (a, b) = plane_coeffs();
            Ok(LorentzVec::new(a * u, -b * v, -v))
        }
        Model::TimelikePlane => Ok(LorentzVec::new(u, 0.0, v)),
        Model::SphereCap => Ok(LorentzVec::new(v.sin() * u.cos(), v.sin() * u.sin(), v.cos())),
    }
}

/// Closed form at the Weierstrass coordinate `z` of the model's data.
///
/// For the catenoid the integral of its data from `z = 1` reaches the point
/// with parameter `1/|z|`, so this returns `eval_param(1/|z|, arg z)`, the same
/// surface traversed with the inverted radius.
pub fn eval_z(model: Model, z: Complex64) -> Result<LorentzVec> {
    let (m, s) = (z.norm(), z.arg());
    match model {
        Model::Helicoid => Ok(helicoid_xy(z.re, z.im)),
        Model::Catenoid if m == 0.0 => Err(Error::Domain("catenoid: z = 0 is a pole".into())),
        Model::Catenoid => Ok(catenoid_ms(1.0 / m, s)),
        Model::Enneper1 => Ok(enneper1_ms(m, s)),
        Model::Enneper2 => Ok(enneper2_ms(m, s)),
        Model::Plane => eval_param(model, z.re, z.im),
        Model::TimelikePlane | Model::SphereCap => {
            Err(Error::Unsupported(format!("{} has no Weierstrass data", model.name())))
        }
    }
}

/// Residual of the model's implicit equation at `p`.
pub fn eval_implicit(model: Model, p: LorentzVec) -> Result<f64> {
    let LorentzVec { x1, x2, t } = p;
    match model {
        Model::Helicoid => Ok(x1 * t.sin() - x2 * t.cos()),
        Model::Catenoid => Ok(x1 * x1 + x2 * x2 - t.sinh().powi(2)),
        Model::Enneper1 => {
            let d = x2 - t;
            Ok(32.0 * d * d * d - 3.0 * (x2 + t) + 24.0 * d * x1)
        }
        Model::Enneper2 => {
            let d = x2 - t;
            Ok(3.0 * d * d - 0.25 * d.powi(4) + 3.0 * x1 * x1 + 6.0 * d * t)
        }
        _ => Err(Error::Unsupported(format!("{} has no implicit equation", model.name()))),
    }
}

/// Rotation number of the boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationFact {
    Finite(f64),
    Infinite,
}

/// Reference facts used as test fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownFacts {
    pub rotation_number: Option<RotationFact>,
    pub singular_set: &'static str,
    pub implicit_scale: f64,
}

pub fn known_facts(model: Model) -> KnownFacts {
    let (rotation_number, singular_set, implicit_scale) = match model {
        Model::Helicoid => (Some(RotationFact::Infinite), "lightlike helix X(u, 0) = (cos u, sin u, u)", 1.0),
        Model::Catenoid => (None, "circle |z| = 1, mapped to the origin", 1.0),
        Model::Enneper1 => (Some(RotationFact::Finite(TAU)), "real axis, a lightlike curve", ENNEPER1_IMPLICIT_SCALE),
        Model::Enneper2 => (
            Some(RotationFact::Finite(TAU)),
            "real axis mapped to the origin; the closure adds the ray x1 = 0, x2 = t ≥ 0",
            1.0,
        ),
        Model::Plane => (None, "empty", 1.0),
        Model::TimelikePlane => (None, "not spacelike", 1.0),
        Model::SphereCap => (None, "empty on the sampled cap", 1.0),
    };
    KnownFacts { rotation_number, singular_set, implicit_scale }
}

/// Parameter domain used when none is given.
pub fn default_domain(model: Model) -> ParamDomain {
    let (kind, bounds) = match model {
        Model::Helicoid => (DomainKind::UpperHalfRectangle, [-TAU, TAU, 0.0, 3.0]),
        Model::Catenoid => (DomainKind::AnnulusSector, [0.2, 3.0, 0.0, TAU]),
        Model::Enneper1 | Model::Enneper2 => (DomainKind::AnnulusSector, [0.0, 2.0, 0.0, PI]),
        Model::Plane | Model::TimelikePlane => (DomainKind::Rectangle, [-1.0, 1.0, -1.0, 1.0]),
        Model::SphereCap => (DomainKind::Rectangle, [0.0, TAU, 0.1, 0.6]),
    };
    ParamDomain { kind, bounds, nu: 128, nv: 128 }
}

/// Weierstrass data on `domain`, with the basepoint sent to its closed-form image.
pub fn weierstrass(model: Model, domain: ParamDomain) -> Option<WeierstrassData> {
    let (g, f, basepoint, mirror) = match model {
        Model::Helicoid => (
            ComplexMap::with_derivative(|z| (I * z).exp(), |z| I * (I * z).exp()),
            ComplexMap::with_derivative(|_| -I, |_| Complex64::new(0.0, 0.0)),
            (0.0, 0.0),
            Some(Mirror::Conjugate),
        ),
        Model::Catenoid => (
            ComplexMap::with_derivative(|z| z, |_| Complex64::new(1.0, 0.0)),
            ComplexMap::with_derivative(|z| I / z, |z| -I / (z * z)),
            (1.0, 0.0),
            // The unit circle is mapped to the vertex and the two halves are
            // exchanged by X ↦ −X, so there is no mirror symmetry.
            None,
        ),
        Model::Enneper1 | Model::Enneper2 => {
            let f = if model == Model::Enneper1 {
                ComplexMap::with_derivative(|z| I * (z * z + 1.0), |z| 2.0 * I * z)
            } else {
                ComplexMap::with_derivative(|z| -(z * z + 1.0), |z| -2.0 * z)
            };
            // Multiplying f by i flips the sign of the height-form condition,
            // so of the two only E1 has the conjugation as mirror symmetry.
            let mirror = (model == Model::Enneper1).then_some(Mirror::Conjugate);
            (
                ComplexMap::with_derivative(|z| (z - I) / (z + I), |z| 2.0 * I / ((z + I) * (z + I))),
                f,
                (0.0, 0.0),
                mirror,
            )
        }
        Model::Plane => (
            ComplexMap::with_derivative(|_| Complex64::new(PLANE_G, 0.0), |_| Complex64::new(0.0, 0.0)),
            ComplexMap::with_derivative(|_| Complex64::new(1.0, 0.0), |_| Complex64::new(0.0, 0.0)),
            (0.0, 0.0),
            None,
        ),
        Model::TimelikePlane | Model::SphereCap => return None,
    };
    let z0 = domain.z(basepoint.0, basepoint.1);
    let base_image = eval_z(model, z0).ok()?;
    Some(WeierstrassData { g, f, domain, basepoint, base_image, mirror })
}

/// Catalog surface whose closed form matches the maximal conjugate of a model:
/// the conjugate at `z` equals `sign · eval_z(model, reparam(z))` up to a translation.
#[derive(Debug, Clone, Copy)]
pub struct ConjugatePartner {
    pub model: Model,
    pub sign: f64,
    pub reparam: fn(Complex64) -> Complex64,
}

/// Known conjugate partners. The helicoid data pulled back by `w = e^{iz}`
/// is the negated catenoid data, and rotating the Enneper 1 data by `i`
/// gives the Enneper 2 data; rotating twice negates the surface.
pub fn conjugate_partner(model: Model) -> Option<ConjugatePartner> {
    fn exp_i(z: Complex64) -> Complex64 {
        (I * z).exp()
    }
    fn same(z: Complex64) -> Complex64 {
        z
    }
    match model {
        Model::Helicoid => Some(ConjugatePartner { model: Model::Catenoid, sign: -1.0, reparam: exp_i }),
        Model::Enneper1 => Some(ConjugatePartner { model: Model::Enneper2, sign: 1.0, reparam: same }),
        Model::Enneper2 => Some(ConjugatePartner { model: Model::Enneper1, sign: -1.0, reparam: same }),
        _ => None,
    }
}

/// Translation `c` minimizing the mean square of `a + c − b`, and the largest
/// Euclidean distance `|a + c − b|` that remains.
pub fn align_translation(a: &[LorentzVec], b: &[LorentzVec]) -> (LorentzVec, f64) {
    let n = a.len().min(b.len()).max(1) as f64;
    let c = a.iter().zip(b).fold(LorentzVec::ZERO, |s, (&p, &q)| s + (q - p)) / n;
    let err = a.iter().zip(b).map(|(&p, &q)| (p + c - q).euclid_norm()).fold(0.0, f64::max);
    (c, err)
}

/// Samples the closed form on `domain`. Models with Weierstrass data are
/// evaluated at `z(u, v)` and carry exact Gauss map and conformal factor;
/// fixtures use their own parameters with `λ = √|EG − F²|` from central
/// differences and no Gauss map.
pub fn sample_closed_form(model: Model, domain: ParamDomain) -> Result<SampledImmersion> {
    sample_closed_form_offset(model, domain, LorentzVec::ZERO)
}

/// As [`sample_closed_form`], translated by `offset`.
pub fn sample_closed_form_offset(model: Model, domain: ParamDomain, offset: LorentzVec) -> Result<SampledImmersion> {
    let params = domain.params();
    let n = params.len();
    let (mut points, mut gauss, mut lam) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    match weierstrass(model, domain) {
        Some(data) => {
            for &(u, v) in &params {
                let z = domain.z(u, v);
                points.push(eval_z(model, z)? + offset);
                gauss.push(data.g.eval(z));
                lam.push(conformal_factor(&data, z)?);
            }
        }
        None => {
            let step = 1e-6;
            for &(u, v) in &params {
                points.push(eval_param(model, u, v)? + offset);
                let xu = (eval_param(model, u + step, v)? - eval_param(model, u - step, v)?) / (2.0 * step);
                let xv = (eval_param(model, u, v + step)? - eval_param(model, u, v - step)?) / (2.0 * step);
                let (e, f, g) = (xu.norm2(), crate::lorentz::inner(xu, xv), xv.norm2());
                gauss.push(Complex64::new(f64::NAN, f64::NAN));
                lam.push((e * g - f * f).abs().sqrt());
            }
        }
    }
    Ok(SampledImmersion { domain, params, points, gauss, conformal_factor: lam })
}

/// Least-squares homothety `λ` minimizing `Σ implicit(λ p)² / λ²` over
/// `points`, returned with the largest residual at the fitted scale.
pub fn fit_implicit_scale(model: Model, points: &[LorentzVec]) -> Result<(f64, f64)> {
    let cost = |lam: f64| -> Result<f64> {
        let mut s = 0.0;
        for &p in points {
            let r = eval_implicit(model, p * lam)? / lam;
            s += r * r;
        }
        Ok(s)
    };
    // Coarse logarithmic scan, then golden-section refinement around the best bracket.
    let grid: Vec<f64> = (0..=400).map(|k| 10f64.powf(-3.0 + 5.0 * k as f64 / 400.0)).collect();
    let costs: Vec<f64> = grid.iter().map(|&l| cost(l)).collect::<Result<_>>()?;
    let best = (0..grid.len()).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap_or(0);
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if cost(c)? < cost(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let lam = 0.5 * (a + b);
    let worst = points
        .iter()
        .map(|&p| eval_implicit(model, p * lam).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((lam, worst))
}

/// Purposes for which a model provides a sampling patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchPurpose {
    /// Interior patch at step 1e-3 for second-order curvature checks.
    Curvature,
    /// Patch where `<X,X>` stays positive, for the superharmonicity witness.
    Superharmonic,
}

/// A parameter patch together with a translation of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckPatch {
    pub domain: ParamDomain,
    pub offset: LorentzVec,
}

/// The patch a model uses for a given check, if it has one.
pub fn check_patch(model: Model, purpose: PatchPurpose) -> Option<CheckPatch> {
    let n = 201;
    let patch = |kind, bounds| ParamDomain { kind, bounds, nu: n, nv: n };
    let zero = LorentzVec::ZERO;
    match purpose {
        PatchPurpose::Curvature => {
            let domain = match model {
                Model::Helicoid => patch(DomainKind::UpperHalfRectangle, [0.0, 0.2, 1.0, 1.2]),
                Model::Catenoid => patch(DomainKind::AnnulusSector, [1.6, 1.8, 0.0, 0.2]),
                Model::Enneper1 | Model::Enneper2 => patch(DomainKind::AnnulusSector, [1.5, 1.7, 1.0, 1.2]),
                Model::Plane | Model::TimelikePlane => patch(DomainKind::Rectangle, [0.0, 0.2, 0.0, 0.2]),
                Model::SphereCap => patch(DomainKind::Rectangle, [0.0, 0.2, 0.3, 0.5]),
            };
            Some(CheckPatch { domain, offset: zero })
        }
        PatchPurpose::Superharmonic => match model {
            Model::Helicoid => Some(CheckPatch {
                domain: ParamDomain {
                    kind: DomainKind::UpperHalfRectangle,
                    bounds: [0.5, 1.0, 0.8, 1.3],
                    nu: 101,
                    nv: 101,
                },
                offset: zero,
            }),
            Model::Plane => Some(CheckPatch {
                domain: ParamDomain { kind: DomainKind::Rectangle, bounds: [-0.2, 0.2, -0.2, 0.2], nu: 101, nv: 101 },
                offset: LorentzVec::new(2.0, 0.0, 0.0),
            }),
            Model::Catenoid => Some(CheckPatch {
                domain: ParamDomain { kind: DomainKind::AnnulusSector, bounds: [4.0, 4.5, 0.0, 0.5], nu: 101, nv: 101 },
                offset: zero,
            }),
            _ => None,
        },
    }
}

/// Entire graphs `t = u(x)` used as fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphFixture {
    /// `u = arcsinh |x − c|`
    Catenoid { center: [f64; 2] },
    /// The entire graph `E2`, singular along the ray `x1 = 0, x2 ≥ 0`.
    Enneper2,
    /// `u = |x − c|`
    LightCone { center: [f64; 2] },
    /// `u = a·x`; lightlike when `|a| = 1`.
    Plane { slope: [f64; 2] },
}

impl GraphFixture {
    /// Parses `catenoid`, `catenoid@x,y`, `enneper2`, `cone`, `cone@x,y`,
    /// `plane:a,b` and `zero`.
    pub fn parse(s: &str) -> Result<GraphFixture> {
        let pair = |t: &str| -> Result<[f64; 2]> {
            let v: Vec<f64> = t.split(',').map(crate::io::parse_f64).collect::<Result<_>>()?;
            match v[..] {
                [a, b] => Ok([a, b]),
                _ => Err(Error::Parse(format!("expected two numbers in '{t}'"))),
            }
        };
        let (head, tail) = match s.find(['@', ':']) {
            Some(k) => (&s[..k], Some(&s[k + 1..])),
            None => (s, None),
        };
        match (head, tail) {
            ("catenoid", None) => Ok(GraphFixture::Catenoid { center: [0.0, 0.0] }),
            ("catenoid", Some(c)) => Ok(GraphFixture::Catenoid { center: pair(c)? }),
            ("enneper2", None) => Ok(GraphFixture::Enneper2),
            ("cone", None) => Ok(GraphFixture::LightCone { center: [0.0, 0.0] }),
            ("cone", Some(c)) => Ok(GraphFixture::LightCone { center: pair(c)? }),
            ("plane", Some(c)) => Ok(GraphFixture::Plane { slope: pair(c)? }),
            ("zero", None) => Ok(GraphFixture::Plane { slope: [0.0, 0.0] }),
            _ => Err(Error::Parse(format!("unknown graph '{s}'"))),
        }
    }

    pub fn height(&self, x: [f64; 2]) -> f64 {
        match *self {
            GraphFixture::Catenoid { center } => (x[0] - center[0]).hypot(x[1] - center[1]).asinh(),
            GraphFixture::Enneper2 => enneper2_height(x),
            GraphFixture::LightCone { center } => (x[0] - center[0]).hypot(x[1] - center[1]),
            GraphFixture::Plane { slope } => slope[0] * x[0] + slope[1] * x[1],
        }
    }

    /// Height at `r (cos θ, sin θ)`. Radial fixtures centered at the origin are
    /// evaluated from `r` directly, so the cone returns `r` exactly.
    pub fn height_polar(&self, r: f64, theta: f64) -> f64 {
        match *self {
            GraphFixture::Catenoid { center: [0.0, 0.0] } => r.asinh(),
            GraphFixture::LightCone { center: [0.0, 0.0] } => r,
            _ => self.height([r * theta.cos(), r * theta.sin()]),
        }
    }

    /// Samples the fixture on a full `nx × ny` grid.
    pub fn sample_grid(&self, nx: usize, ny: usize, origin: [f64; 2], h: f64) -> GridGraph {
        GridGraph::from_fn(nx, ny, origin, h, |_| true, |x| self.height(x))
    }
}

/// Height of the entire graph E2 at `x`.
///
/// Writing `w = x2 − t`, points of E2 satisfy `w⁴/4 + 3w² − 6 x2 w − 3 x1² = 0`
/// and the graph is the smallest real root. The quartic is strictly convex,
/// so Newton's method started to the left of that root increases monotonically
/// onto it.
pub fn enneper2_height(x: [f64; 2]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let f = |w: f64| 0.25 * w.powi(4) + 3.0 * w * w - 6.0 * x2 * w - 3.0 * x1 * x1;
    let df = |w: f64| w.powi(3) + 6.0 * w - 6.0 * x2;
    let mut w = x2 - x1.hypot(x2) - 1.0;
    for _ in 0..200 {
        let step = f(w) / df(w);
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    x2 - w
}
