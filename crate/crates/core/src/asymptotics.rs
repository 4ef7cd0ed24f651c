//! Behaviour at infinity: rotation numbers of boundary curves, τ-measures of
//! closeness to the light cone, and blow-up / blow-down limits of graphs.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::GraphFixture;
use crate::error::{Error, Result};
use crate::lorentz::LorentzVec;
use crate::maxgraph::GridGraph;
use crate::quadrature::integrate;

/// One sample of a boundary curve `Γ(s) = (γ(s), s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub s: f64,
    pub theta: f64,
    pub gamma: Complex64,
    pub lift: LorentzVec,
}

/// Lightlike boundary curve sampled from its tangent angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub s_range: (f64, f64),
    pub samples: Vec<BoundarySample>,
}

/// Samples `γ(s) = 1 + i ∫₀ˢ e^{iθ(x)} dx` at `n` equally spaced points of
/// `s_range`, lifted to `Γ(s) = (γ(s), s)`.
pub fn gamma_from_theta(theta: impl Fn(f64) -> f64, s_range: (f64, f64), n: usize) -> Result<BoundaryCurve> {
    let (a, b) = s_range;
    if n < 2 || !(a < b) {
        return Err(Error::Domain(format!("need n ≥ 2 and an ordered range, got {n} on {s_range:?}")));
    }
    let ss: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
    let thetas: Vec<f64> = ss.iter().map(|&s| theta(s)).collect();
    if let Some(w) = thetas.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Monotonicity(ss[w + 1]));
    }
    let integrand = |x: f64| Ok(Complex64::new(0.0, theta(x)).exp());
    let mut acc: Complex64 = integrate(integrand, 0.0, ss[0], 1e-12, 4096)?;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            acc += integrate(integrand, ss[k - 1], ss[k], 1e-12, 4096)?;
        }
        let gamma = 1.0 + Complex64::new(0.0, 1.0) * acc;
        samples.push(BoundarySample {
            s: ss[k],
            theta: thetas[k],
            gamma,
            lift: LorentzVec::new(gamma.re, gamma.im, ss[k]),
        });
    }
    Ok(BoundaryCurve { s_range, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationConfig {
    /// A total change above this, still growing linearly, is reported as divergent.
    pub cap: f64,
    /// Largest accepted angle change between adjacent samples.
    pub max_jump: f64,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig { cap: 4.0 * TAU, max_jump: 0.5 * PI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// `value` is the extrapolated limit when one could be formed and the
    /// sampled change `partial` otherwise.
    Finite { value: f64, partial: f64, extrapolated: Option<f64> },
    /// Linear growth with `rate` radians per unit parameter.
    Divergent { rate: f64, partial: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub rotation: Rotation,
    pub range: (f64, f64),
    pub samples: usize,
}

/// Continuous branch of `arg` along a sequence of nonzero directions.
pub fn unwrap_angles(dirs: &[Complex64], max_jump: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(dirs.len());
    let Some(first) = dirs.first() else { return Ok(out) };
    out.push(first.arg());
    for k in 1..dirs.len() {
        let jump = (dirs[k] / dirs[k - 1]).arg();
        if !jump.is_finite() || jump.abs() > max_jump {
            return Err(Error::Unwrap { index: k - 1, jump, limit: max_jump });
        }
        out.push(out[k - 1] + jump);
    }
    Ok(out)
}

/// Rotation number of a direction field sampled along a parameter.
///
/// The sampled change `θ_last − θ_first` is reported as divergent when it
/// exceeds `cap` and doubles (within 20%) from the middle half of the range to
/// the full range. Otherwise the changes over the centred windows of half,
/// quarter and eighth widths feed an Aitken Δ² estimate of the limit, kept
/// when the three values converge geometrically.
pub fn rotation_number(params: &[f64], dirs: &[Complex64], cfg: &RotationConfig) -> Result<RotationReport> {
    let n = params.len();
    if n != dirs.len() || n < 2 {
        return Err(Error::Domain("rotation_number needs at least two matching samples".into()));
    }
    let ang = unwrap_angles(dirs, cfg.max_jump)?;
    let range = (params[0], params[n - 1]);
    let partial = ang[n - 1] - ang[0];
    let c = (n - 1) / 2;
    let half = (n - 1) / 2;
    let window = |w: usize| ang[(c + w).min(n - 1)] - ang[c.saturating_sub(w)];
    let inner = window(half / 2);
    let rotation = if partial.abs() > cfg.cap && inner != 0.0 && (partial / inner - 2.0).abs() <= 0.4 {
        Rotation::Divergent { rate: partial / (range.1 - range.0), partial }
    } else {
        let extrapolated = (half >= 8)
            .then(|| {
                let (t1, t2, t3) = (window(half / 4), window(half / 2), window(half));
                let (d1, d2) = (t2 - t1, t3 - t2);
                let ratio = d2 / d1;
                (d1 != 0.0 && ratio > 0.0 && ratio < 1.0).then(|| t3 - d2 * d2 / (d2 - d1))
            })
            .flatten();
        Rotation::Finite { value: extrapolated.unwrap_or(partial), partial, extrapolated }
    };
    Ok(RotationReport { rotation, range, samples: n })
}

/// Rotation of the Gauss map `g` traced at `n` equally spaced parameters.
pub fn rotation_of_gauss(
    g: impl Fn(f64) -> Complex64,
    range: (f64, f64),
    n: usize,
    cfg: &RotationConfig,
) -> Result<RotationReport> {
    if n < 2 || !(range.0 < range.1) {
        return Err(Error::Domain(format!("bad trace range {range:?} with {n} samples")));
    }
    let params: Vec<f64> = (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect();
    let dirs: Vec<Complex64> = params.iter().map(|&s| g(s)).collect();
    rotation_number(&params, &dirs, cfg)
}

/// Rotation of the tangent of a sampled boundary curve, using chords between
/// consecutive samples as tangent directions.
pub fn rotation_of_curve(curve: &BoundaryCurve, cfg: &RotationConfig) -> Result<RotationReport> {
    let s = &curve.samples;
    if s.len() < 3 {
        return Err(Error::Domain("curve needs at least three samples".into()));
    }
    let params: Vec<f64> = s.windows(2).map(|w| 0.5 * (w[0].s + w[1].s)).collect();
    let dirs: Vec<Complex64> = s.windows(2).map(|w| w[1].gamma - w[0].gamma).collect();
    rotation_number(&params, &dirs, cfg)
}

/// Height of a graph in polar coordinates, `None` outside its domain.
pub trait GraphSampler: Sync {
    fn height_polar(&self, r: f64, theta: f64) -> Option<f64>;
}

impl GraphSampler for GraphFixture {
    fn height_polar(&self, r: f64, theta: f64) -> Option<f64> {
        Some(GraphFixture::height_polar(self, r, theta))
    }
}

impl GraphSampler for GridGraph {
    fn height_polar(&self, r: f64, theta: f64) -> Option<f64> {
        self.bilinear([r * theta.cos(), r * theta.sin()])
    }
}

/// Adapter turning a closure into a sampler.
pub struct FnSampler<F>(pub F);

impl<F: Fn(f64, f64) -> Option<f64> + Sync> GraphSampler for FnSampler<F> {
    fn height_polar(&self, r: f64, theta: f64) -> Option<f64> {
        (self.0)(r, theta)
    }
}

/// Angular range of the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wedge {
    Full,
    /// Closed arc `start ≤ θ ≤ end`; `end − start` may exceed `2π` for multigraphs.
    Arc {
        start: f64,
        end: f64,
    },
}

impl Wedge {
    /// Sample angles: the multiples of `2π/n` inside the wedge. Every wedge uses
    /// the same lattice, so a sub-wedge sees a subset of the samples of its parent.
    pub fn angles(&self, n: usize) -> Vec<f64> {
        let step = TAU / n as f64;
        match *self {
            Wedge::Full => (0..n).map(|k| k as f64 * step).collect(),
            Wedge::Arc { start, end } => {
                let k0 = (start / step - 1e-9).ceil() as i64;
                let k1 = (end / step + 1e-9).floor() as i64;
                (k0..=k1).map(|k| k as f64 * step).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Rising,
    Falling,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub radii: Vec<f64>,
    pub tau_plus_r: Vec<f64>,
    pub tau_minus_r: Vec<f64>,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub tau0_plus: f64,
    pub tau0_minus: f64,
    pub tau: f64,
    pub tau0: f64,
    pub largest_radius: f64,
    pub samples_per_circle: usize,
    /// Direction of `τ⁺(r)` between the two largest radii.
    pub trend: Trend,
}

/// Log-spaced radii from `r0` to `r1`.
pub fn log_radii(r0: f64, r1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| r0 * (r1 / r0).powf(k as f64 / (n.max(2) - 1) as f64)).collect()
}

/// `τ⁺(r) = 1 − min u/r` and `τ⁻(r) = 1 + max u/r` on each circle, with the
/// limsup and liminf estimated by the max and min over the largest quartile
/// of radii.
pub fn tau_measures(sampler: &dyn GraphSampler, radii: &[f64], wedge: Wedge, n_circle: usize) -> Result<TauReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Domain("tau_measures needs positive radii".into()));
    }
    let angles = wedge.angles(n_circle);
    if angles.is_empty() {
        return Err(Error::Domain("wedge contains no sample angle".into()));
    }
    let mut plus = Vec::with_capacity(radii.len());
    let mut minus = Vec::with_capacity(radii.len());
    for &r in radii {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &th in &angles {
            let u = sampler
                .height_polar(r, th)
                .ok_or_else(|| Error::Domain(format!("sampler undefined at r = {r}, θ = {th}")))?;
            lo = lo.min(u / r);
            hi = hi.max(u / r);
        }
        plus.push(1.0 - lo);
        minus.push(1.0 + hi);
    }
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let tail = &order[order.len() - order.len().div_ceil(4)..];
    let tail_max = |v: &[f64]| tail.iter().map(|&k| v[k]).fold(f64::NEG_INFINITY, f64::max);
    let tail_min = |v: &[f64]| tail.iter().map(|&k| v[k]).fold(f64::INFINITY, f64::min);
    let (tau_plus, tau_minus) = (tail_max(&plus), tail_max(&minus));
    let (tau0_plus, tau0_minus) = (tail_min(&plus), tail_min(&minus));
    let trend = match order.len() {
        0 | 1 => Trend::Flat,
        m => {
            let d = plus[order[m - 1]] - plus[order[m - 2]];
            if d.abs() <= 1e-12 {
                Trend::Flat
            } else if d > 0.0 {
                Trend::Rising
            } else {
                Trend::Falling
            }
        }
    };
    Ok(TauReport {
        radii: radii.to_vec(),
        tau_plus_r: plus,
        tau_minus_r: minus,
        tau_plus,
        tau_minus,
        tau0_plus,
        tau0_minus,
        tau: tau_plus.min(tau_minus),
        tau0: tau0_plus.min(tau0_minus),
        largest_radius: radii[*order.last().expect("radii not empty")],
        samples_per_circle: n_circle,
        trend,
    })
}

/// Annulus `inner ≤ |y| ≤ outer` sampled on a polar grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Annulus {
    pub fn new(inner: f64, outer: f64) -> Self {
        Annulus { inner, outer, n_r: 16, n_theta: 64 }
    }

    fn polar_points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n_r * self.n_theta);
        for a in 0..self.n_r {
            let r = self.inner + (self.outer - self.inner) * a as f64 / (self.n_r.max(2) - 1) as f64;
            for b in 0..self.n_theta {
                out.push((r, TAU * b as f64 / self.n_theta as f64));
            }
        }
        out
    }
}

/// The rescaled graph `u_λ(y) = λ u(y/λ)` sampled on an annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledSample {
    pub scale: f64,
    /// `(y1, y2, u_λ(y))`
    pub points: Vec<[f64; 3]>,
}

impl ScaledSample {
    pub fn sup_abs(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p[2].abs()))
    }
}

/// Samples `λ·G` for each scale over the annulus.
pub fn blow_scale(sampler: &dyn GraphSampler, scales: &[f64], region: &Annulus) -> Result<Vec<ScaledSample>> {
    if scales.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Domain("scales must be positive".into()));
    }
    if !(0.0 <= region.inner && region.inner < region.outer) || region.n_r < 2 || region.n_theta < 3 {
        return Err(Error::Domain(format!("bad annulus {region:?}")));
    }
    let pts = region.polar_points();
    scales
        .par_iter()
        .map(|&lam| {
            let points = pts
                .iter()
                .map(|&(r, th)| {
                    let u = sampler.height_polar(r / lam, th).ok_or_else(|| {
                        Error::Domain(format!("sampler undefined at radius {} for scale {lam}", r / lam))
                    })?;
                    Ok([r * th.cos(), r * th.sin(), lam * u])
                })
                .collect::<Result<_>>()?;
            Ok(ScaledSample { scale: lam, points })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    SpacelikePlane,
    LightlikePlane,
    LightConeUpper,
    LightConeLower,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub kind: LimitKind,
    /// For planes `t = a·y`: the Lorentz normal `(a, 1)` scaled to Euclidean unit length.
    pub normal: Option<LorentzVec>,
    /// For cones: the vertex.
    pub vertex: Option<LorentzVec>,
    /// Sup of the vertical distance to the fitted limit over the annulus.
    pub residual: f64,
    /// Scale of the sample that was fitted.
    pub scale: f64,
}

/// Plane residual threshold as a fraction of the annulus outer radius.
pub const PLANE_THRESHOLD: f64 = 0.02;
/// Slopes within this distance of 1 make a lightlike plane.
pub const LIGHTLIKE_SLOPE_TOL: f64 = 1e-3;

/// Least-squares plane `t = a·y` through the origin and its sup residual.
pub fn fit_plane_through_origin(points: &[[f64; 3]]) -> ([f64; 2], f64) {
    let (mut sxx, mut sxy, mut syy, mut sxu, mut syu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        sxx += p[0] * p[0];
        sxy += p[0] * p[1];
        syy += p[1] * p[1];
        sxu += p[0] * p[2];
        syu += p[1] * p[2];
    }
    let det = sxx * syy - sxy * sxy;
    let a = if det.abs() > 0.0 { [(syy * sxu - sxy * syu) / det, (sxx * syu - sxy * sxu) / det] } else { [0.0, 0.0] };
    let res = points.iter().fold(0.0f64, |m, p| m.max((p[2] - a[0] * p[0] - a[1] * p[1]).abs()));
    (a, res)
}

/// Largest distance in `t` from the points to the light cone `t = sign·|y|`.
pub fn cone_residual(points: &[[f64; 3]], sign: f64) -> f64 {
    points.iter().fold(0.0f64, |m, p| m.max((p[2] - sign * p[0].hypot(p[1])).abs()))
}

/// Classifies the limit of a scale sequence from its last (most extreme) sample.
pub fn classify_limit(samples: &[ScaledSample], region: &Annulus) -> Result<LimitFit> {
    if samples.len() < 3 {
        return Err(Error::Domain(format!("need at least 3 scales, got {}", samples.len())));
    }
    let lo = samples.iter().map(|s| s.scale).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.scale).fold(0.0, f64::max);
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Domain(format!("scales span {:.3} decades, need 2", (hi / lo).log10())));
    }
    let finest = samples.last().expect("checked non-empty");
    let threshold = PLANE_THRESHOLD * region.outer;
    let (a, plane_res) = fit_plane_through_origin(&finest.points);
    let slope = a[0].hypot(a[1]);
    let n = LorentzVec::new(a[0], a[1], 1.0);
    let normal = n / n.euclid_norm();
    let plane_kind = if (slope - 1.0).abs() <= LIGHTLIKE_SLOPE_TOL {
        Some(LimitKind::LightlikePlane)
    } else if slope < 1.0 {
        Some(LimitKind::SpacelikePlane)
    } else {
        None
    };
    if let (true, Some(kind)) = (plane_res < threshold, plane_kind) {
        return Ok(LimitFit { kind, normal: Some(normal), vertex: None, residual: plane_res, scale: finest.scale });
    }
    let (up, down) = (cone_residual(&finest.points, 1.0), cone_residual(&finest.points, -1.0));
    let (kind, residual) = if up <= down { (LimitKind::LightConeUpper, up) } else { (LimitKind::LightConeLower, down) };
    if residual < threshold {
        return Ok(LimitFit { kind, normal: None, vertex: Some(LorentzVec::ZERO), residual, scale: finest.scale });
    }
    Ok(LimitFit {
        kind: LimitKind::Undetermined,
        normal: None,
        vertex: None,
        residual: plane_res.min(residual),
        scale: finest.scale,
    })
}

/// Tail-averaged unit tangent of an arc and its lightlike defect `|‖d‖²|`.
/// The tail is the last quarter of the samples.
pub fn lightlike_ray_direction(arc: &[LorentzVec]) -> Result<(LorentzVec, f64)> {
    if arc.len() < 16 {
        return Err(Error::ShortArc(arc.len()));
    }
    let start = arc.len() - arc.len() / 4 - 1;
    let mut sum = LorentzVec::ZERO;
    for w in arc[start..].windows(2) {
        let d = w[1] - w[0];
        let len = d.euclid_norm();
        if len > 0.0 {
            sum += d / len;
        }
    }
    let len = sum.euclid_norm();
    if len == 0.0 {
        return Err(Error::Domain("arc tail has no direction".into()));
    }
    let dir = sum / len;
    Ok((dir, dir.norm2().abs()))
}

/// JSON report of an asymptotics run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub model: String,
    pub mode: String,
    pub scales: Option<Vec<f64>>,
    pub region: Option<[f64; 2]>,
    pub tau: Option<TauReport>,
    pub limit: Option<LimitFit>,
    pub rotation: Option<RotationReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::GraphFixture;

    #[test]
    fn circle_from_identity_angle() {
        let c = gamma_from_theta(|s| s, (0.0, TAU), 65).unwrap();
        for smp in &c.samples {
            assert!((smp.gamma - Complex64::from_polar(1.0, smp.s)).norm() < 1e-11);
            assert_eq!(smp.lift.t, smp.s);
        }
        let rot = rotation_of_curve(&c, &RotationConfig::default()).unwrap();
        match rot.rotation {
            Rotation::Finite { partial, .. } => assert!((partial - (TAU - TAU / 64.0)).abs() < 1e-9),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn straight_boundary_is_lightlike() {
        let c = gamma_from_theta(|_| 0.0, (-2.0, 3.0), 11).unwrap();
        for w in c.samples.windows(2) {
            assert!((w[1].gamma - Complex64::new(1.0, w[1].s)).norm() < 1e-13);
            let d = w[1].lift - w[0].lift;
            assert!(d.norm2().abs() < 1e-12);
        }
        assert!(matches!(gamma_from_theta(|s| -s, (0.0, 1.0), 5), Err(Error::Monotonicity(_))));
    }

    #[test]
    fn unwrap_rejects_undersampling() {
        let dirs: Vec<Complex64> = (0..10).map(|k| Complex64::from_polar(1.0, 2.0 * k as f64)).collect();
        assert!(matches!(unwrap_angles(&dirs, 0.5 * PI), Err(Error::Unwrap { index: 0, .. })));
    }

    #[test]
    fn helicoid_trace_diverges_linearly() {
        let r = rotation_of_gauss(|s| Complex64::from_polar(1.0, s), (-50.0, 50.0), 10001, &RotationConfig::default())
            .unwrap();
        match r.rotation {
            Rotation::Divergent { rate, .. } => assert!((rate - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn enneper_trace_extrapolates_to_two_pi() {
        let i = Complex64::new(0.0, 1.0);
        let g = |x: f64| (Complex64::new(x, 0.0) - i) / (Complex64::new(x, 0.0) + i);
        let r = rotation_of_gauss(g, (-1000.0, 1000.0), 200_001, &RotationConfig::default()).unwrap();
        match r.rotation {
            Rotation::Finite { value, partial, extrapolated } => {
                // The sampled change misses 4 atan(1/R) of the limit.
                assert!((partial - (TAU - 4.0 * (1e-3f64).atan())).abs() < 1e-9);
                assert!(extrapolated.is_some());
                assert!((value - TAU).abs() < 1e-6, "{value}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotation_is_additive() {
        let g = |s: f64| Complex64::from_polar(1.0, s.sin() * 3.0 + s);
        let cfg = RotationConfig { cap: 1e9, ..Default::default() };
        let part = |a: f64, b: f64| match rotation_of_gauss(g, (a, b), 2001, &cfg).unwrap().rotation {
            Rotation::Finite { partial, .. } => partial,
            Rotation::Divergent { partial, .. } => partial,
        };
        let whole = part(-4.0, 6.0);
        assert!((part(-4.0, 1.0) + part(1.0, 6.0) - whole).abs() < 1e-12);
    }

    #[test]
    fn tau_of_cone_plane_catenoid() {
        let radii = log_radii(1.0, 1000.0, 13);
        let cone = tau_measures(&GraphFixture::LightCone { center: [0.0, 0.0] }, &radii, Wedge::Full, 720).unwrap();
        assert!(cone.tau_plus_r.iter().all(|&t| t == 0.0));
        let plane = tau_measures(&GraphFixture::Plane { slope: [0.0, 0.0] }, &radii, Wedge::Full, 720).unwrap();
        assert!(plane.tau_plus_r.iter().all(|&t| t == 1.0));
        let cat = tau_measures(&GraphFixture::Catenoid { center: [0.0, 0.0] }, &radii, Wedge::Full, 720).unwrap();
        assert!((cat.tau_plus - 1.0).abs() < 0.02);
        assert!(cat.tau_plus >= cat.tau0_plus && cat.tau_minus >= cat.tau0_minus);
        assert_eq!(cat.largest_radius, 1000.0);
    }

    #[test]
    fn sub_wedge_samples_are_a_subset() {
        let outer = Wedge::Arc { start: 0.3, end: 2.9 }.angles(720);
        let inner = Wedge::Arc { start: 1.0, end: 2.0 }.angles(720);
        assert!(inner.iter().all(|a| outer.contains(a)));
    }

    #[test]
    fn blow_down_and_up_of_catenoid() {
        let cat = GraphFixture::Catenoid { center: [0.0, 0.0] };
        let region = Annulus::new(1.0, 2.0);
        let down = blow_scale(&cat, &[1.0, 0.1, 0.01, 0.001], &region).unwrap();
        let fit = classify_limit(&down, &region).unwrap();
        assert_eq!(fit.kind, LimitKind::SpacelikePlane);
        assert!(fit.residual < 0.01);
        let up = blow_scale(&cat, &[1.0, 10.0, 100.0, 1000.0], &region).unwrap();
        let fit = classify_limit(&up, &region).unwrap();
        assert_eq!(fit.kind, LimitKind::LightConeUpper);
        assert!(fit.residual < 0.01);
    }

    #[test]
    fn classify_requires_two_decades() {
        let cat = GraphFixture::Catenoid { center: [0.0, 0.0] };
        let region = Annulus::new(1.0, 2.0);
        let s = blow_scale(&cat, &[1.0, 2.0, 4.0], &region).unwrap();
        assert!(classify_limit(&s, &region).is_err());
    }

    #[test]
    fn lightlike_plane_limit() {
        let p = GraphFixture::Plane { slope: [0.0, 1.0] };
        let region = Annulus::new(1.0, 2.0);
        let s = blow_scale(&p, &[1.0, 0.1, 0.01], &region).unwrap();
        let fit = classify_limit(&s, &region).unwrap();
        assert_eq!(fit.kind, LimitKind::LightlikePlane);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn grid_sampler_leaves_domain() {
        let g = GraphFixture::Plane { slope: [0.3, 0.0] }.sample_grid(21, 21, [-1.0, -1.0], 0.1);
        let region = Annulus::new(0.5, 0.9);
        assert!(blow_scale(&g, &[1.0], &region).is_ok());
        assert!(matches!(blow_scale(&g, &[0.1], &region), Err(Error::Domain(_))));
    }

    #[test]
    fn ray_directions() {
        let ray: Vec<LorentzVec> = (0..20).map(|k| LorentzVec::new(0.0, k as f64, k as f64)).collect();
        let (d, defect) = lightlike_ray_direction(&ray).unwrap();
        assert!((d - LorentzVec::new(0.0, 1.0, 1.0) / 2f64.sqrt()).euclid_norm() < 1e-15);
        assert!(defect < 1e-15);
        let line: Vec<LorentzVec> = (0..20).map(|k| LorentzVec::new(0.6, 0.8, 0.0) * k as f64).collect();
        let (d, defect) = lightlike_ray_direction(&line).unwrap();
        assert!((d - LorentzVec::new(0.6, 0.8, 0.0)).euclid_norm() < 1e-15);
        assert_eq!(defect, d.norm2().abs());
        assert!(matches!(lightlike_ray_direction(&line[..10]), Err(Error::ShortArc(10))));
    }
}
