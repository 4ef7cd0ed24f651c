//! Finite-difference certificates for sampled surfaces.
//!
//! All derivatives are taken in the stored parameters, so a surface read back
//! from CSV yields the same reports as the in-memory original. Mean curvature
//! uses the unit normal `N` with `⟨N,N⟩ = −1` pointing to the past (`N_t < 0`),
//! `L_ij = ⟨X_ij, N⟩` and `H = (E·L22 − 2F·L12 + G·L11) / (2(EG − F²))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{inner, LorentzVec};
use crate::maxgraph::GridGraph;
use crate::weierstrass::SampledImmersion;

/// Conformal factors below this mark a node as singular.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-9;
/// Nodes within this many cells of a singular node are left out of curvature checks.
pub const EXCLUSION_BAND: usize = 2;

/// Largest violation and the parameter point where it occurs.
pub type Worst = Option<(f64, [f64; 2])>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_violation: f64,
    /// Parameter point of the worst node; for pair checks, the pair index and 0.
    pub location: [f64; 2],
    pub passed: bool,
    pub tolerance_used: f64,
    /// Nodes skipped because they lie on or next to the singular set.
    pub excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub identity_residual: Option<f64>,
    /// Homothety applied before the check, when one was fitted.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<f64>,
}

impl CheckReport {
    pub fn new(name: &str, worst: Worst, tol: f64, excluded: usize) -> Self {
        let (max_violation, location) = worst.unwrap_or((f64::NEG_INFINITY, [f64::NAN, f64::NAN]));
        CheckReport {
            name: name.to_string(),
            max_violation,
            location,
            passed: max_violation <= tol,
            tolerance_used: tol,
            excluded,
            identity_residual: None,
            scale: None,
        }
    }
}

/// First and second derivatives at one node.
struct Jet {
    xu: LorentzVec,
    xv: LorentzVec,
    second: Option<[LorentzVec; 3]>,
}

impl Jet {
    fn metric(&self) -> (f64, f64, f64) {
        (self.xu.norm2(), inner(self.xu, self.xv), self.xv.norm2())
    }
}

fn jet(imm: &SampledImmersion, i: usize, j: usize) -> Jet {
    let (nu, nv) = (imm.nu(), imm.nv());
    let at = |i: usize, j: usize| imm.points[imm.idx(i, j)];
    let u = |i: usize| imm.params[imm.idx(i, j)].0;
    let v = |j: usize| imm.params[imm.idx(i, j)].1;
    let (il, ir) = (i.saturating_sub(1), (i + 1).min(nu - 1));
    let (jl, jr) = (j.saturating_sub(1), (j + 1).min(nv - 1));
    let xu = (at(ir, j) - at(il, j)) / (u(ir) - u(il));
    let xv = (at(i, jr) - at(i, jl)) / (v(jr) - v(jl));
    let second = (il < i && i < ir && jl < j && j < jr).then(|| {
        let (du, dv) = (0.5 * (u(ir) - u(il)), 0.5 * (v(jr) - v(jl)));
        let c = at(i, j);
        [
            (at(ir, j) - c * 2.0 + at(il, j)) / (du * du),
            (at(ir, jr) - at(ir, jl) - at(il, jr) + at(il, jl)) / (4.0 * du * dv),
            (at(i, jr) - c * 2.0 + at(i, jl)) / (dv * dv),
        ]
    });
    Jet { xu, xv, second }
}

/// Past-pointing unit timelike normal, if the tangent plane is spacelike.
fn unit_normal(xu: LorentzVec, xv: LorentzVec) -> Option<LorentzVec> {
    let n = xu.lorentz_cross(xv);
    let q = n.norm2();
    if !(q < 0.0) {
        return None;
    }
    let n = n / (-q).sqrt();
    Some(if n.t > 0.0 { -n } else { n })
}

/// Mask of nodes with conformal factor below `tol`, dilated by `band` cells.
fn exclusion_mask(imm: &SampledImmersion, tol: f64, band: usize) -> Vec<bool> {
    let (nu, nv) = (imm.nu(), imm.nv());
    let mut out = vec![false; nu * nv];
    for j in 0..nv {
        for i in 0..nu {
            if !(imm.conformal_factor[imm.idx(i, j)] >= tol) {
                for jj in j.saturating_sub(band)..=(j + band).min(nv - 1) {
                    for ii in i.saturating_sub(band)..=(i + band).min(nu - 1) {
                        out[imm.idx(ii, jj)] = true;
                    }
                }
            }
        }
    }
    out
}

/// Deterministic max-reduction: per-row results are combined in row order.
fn worst_of(rows: Vec<Result<Worst>>) -> Result<Worst> {
    let mut best: Worst = None;
    for r in rows {
        if let Some(c) = r? {
            if best.is_none_or(|b| c.0 > b.0) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}

fn check_sizes(imm: &SampledImmersion, min: usize) -> Result<()> {
    if imm.nu() < min || imm.nv() < min || imm.points.len() != imm.nu() * imm.nv() {
        return Err(Error::Domain(format!("grid {}×{} is too small for this check", imm.nu(), imm.nv())));
    }
    Ok(())
}

/// Mean curvature at one interior node.
fn mean_curvature_at(imm: &SampledImmersion, i: usize, j: usize) -> Result<f64> {
    let jt = jet(imm, i, j);
    let (e, f, g) = jt.metric();
    let d = e * g - f * f;
    let (u, v) = imm.params[imm.idx(i, j)];
    let n = match unit_normal(jt.xu, jt.xv) {
        Some(n) if d > 0.0 => n,
        _ => return Err(Error::Degenerate { u, v }),
    };
    let [xuu, xuv, xvv] = jt.second.expect("interior node");
    let (l11, l12, l22) = (inner(xuu, n), inner(xuv, n), inner(xvv, n));
    Ok((e * l22 - 2.0 * f * l12 + g * l11) / (2.0 * d))
}

/// Largest `|H|` over interior nodes away from the singular set.
pub fn mean_curvature(imm: &SampledImmersion, tol: f64) -> Result<CheckReport> {
    check_sizes(imm, 3)?;
    let (nu, nv) = (imm.nu(), imm.nv());
    let skip = exclusion_mask(imm, DEFAULT_SINGULAR_TOL, EXCLUSION_BAND);
    let excluded = skip.iter().filter(|&&s| s).count();
    let rows: Vec<_> = (1..nv - 1)
        .into_par_iter()
        .map(|j| {
            let mut best: Worst = None;
            for i in 1..nu - 1 {
                if skip[imm.idx(i, j)] {
                    continue;
                }
                let h = mean_curvature_at(imm, i, j)?.abs();
                if best.is_none_or(|b| h > b.0) {
                    let (u, v) = imm.params[imm.idx(i, j)];
                    best = Some((h, [u, v]));
                }
            }
            Ok(best)
        })
        .collect();
    Ok(CheckReport::new("mean_curvature", worst_of(rows)?, tol, excluded))
}

/// Checks `E > 0` and `EG − F² > 0` at every node whose conformal factor
/// exceeds `tol` and which is at least [`EXCLUSION_BAND`] cells away from
/// nodes that do not. Next to the singular set `EG − F²` vanishes to fourth
/// order and difference errors would dominate it. The violation is
/// `max(−E, −(EG − F²))`, so a spacelike surface reports a negative value.
pub fn spacelike_check(imm: &SampledImmersion, tol: f64) -> Result<CheckReport> {
    check_sizes(imm, 2)?;
    let (nu, nv) = (imm.nu(), imm.nv());
    let skip = exclusion_mask(imm, tol, EXCLUSION_BAND);
    let excluded = skip.iter().filter(|&&s| s).count();
    let rows: Vec<_> = (0..nv)
        .into_par_iter()
        .map(|j| {
            let mut best: Worst = None;
            for i in 0..nu {
                let k = imm.idx(i, j);
                if skip[k] {
                    continue;
                }
                let (e, f, g) = jet(imm, i, j).metric();
                let viol = (-e).max(f * f - e * g);
                if best.is_none_or(|b| viol > b.0) {
                    let (u, v) = imm.params[k];
                    best = Some((viol, [u, v]));
                }
            }
            Ok(best)
        })
        .collect();
    let mut report = CheckReport::new("spacelike", worst_of(rows)?, 0.0, excluded);
    report.tolerance_used = 0.0;
    Ok(report)
}

/// Laplace–Beltrami operator of the induced metric applied to nodal values,
/// in divergence form `(1/√D)[∂u(√D(G h_u − F h_v)/D) + ∂v(√D(E h_v − F h_u)/D)]`
/// with the fluxes evaluated at half nodes. NaN on the outer ring.
fn laplace_beltrami(imm: &SampledImmersion, h: &[f64]) -> Vec<f64> {
    let (nu, nv) = (imm.nu(), imm.nv());
    let x = |i: usize, j: usize| imm.points[imm.idx(i, j)];
    let hv = |i: usize, j: usize| h[imm.idx(i, j)];
    let u = |i: usize, j: usize| imm.params[imm.idx(i, j)].0;
    let v = |i: usize, j: usize| imm.params[imm.idx(i, j)].1;
    // Central derivatives of X and h along one axis at an interior node.
    let dv = |i: usize, j: usize| {
        let s = v(i, j + 1) - v(i, j - 1);
        ((x(i, j + 1) - x(i, j - 1)) / s, (hv(i, j + 1) - hv(i, j - 1)) / s)
    };
    let du = |i: usize, j: usize| {
        let s = u(i + 1, j) - u(i - 1, j);
        ((x(i + 1, j) - x(i - 1, j)) / s, (hv(i + 1, j) - hv(i - 1, j)) / s)
    };
    let flux = |xu: LorentzVec, xv: LorentzVec, hu: f64, hvv: f64| {
        let (e, f, g) = (xu.norm2(), inner(xu, xv), xv.norm2());
        let d = e * g - f * f;
        let s = d.sqrt();
        (s * (g * hu - f * hvv) / d, s * (e * hvv - f * hu) / d)
    };
    // Flux through the face between (i, j) and (i + 1, j).
    let p_face = |i: usize, j: usize| {
        let step = u(i + 1, j) - u(i, j);
        let (a, b) = (dv(i, j), dv(i + 1, j));
        flux((x(i + 1, j) - x(i, j)) / step, (a.0 + b.0) * 0.5, (hv(i + 1, j) - hv(i, j)) / step, 0.5 * (a.1 + b.1)).0
    };
    // Flux through the face between (i, j) and (i, j + 1).
    let q_face = |i: usize, j: usize| {
        let step = v(i, j + 1) - v(i, j);
        let (a, b) = (du(i, j), du(i, j + 1));
        flux((a.0 + b.0) * 0.5, (x(i, j + 1) - x(i, j)) / step, 0.5 * (a.1 + b.1), (hv(i, j + 1) - hv(i, j)) / step).1
    };
    let mut out = vec![f64::NAN; nu * nv];
    for j in 1..nv - 1 {
        for i in 1..nu - 1 {
            if i < 2 || j < 2 || i + 2 >= nu || j + 2 >= nv {
                // Face derivatives at the outer ring would need nodes off the grid.
                continue;
            }
            let (e, f, g) = jet(imm, i, j).metric();
            let s = (e * g - f * f).sqrt();
            let pu = (p_face(i, j) - p_face(i - 1, j)) / (0.5 * (u(i + 1, j) - u(i - 1, j)));
            let qv = (q_face(i, j) - q_face(i, j - 1)) / (0.5 * (v(i, j + 1) - v(i, j - 1)));
            out[imm.idx(i, j)] = (pu + qv) / s;
        }
    }
    out
}

/// Witness for `Δ log⟨X,X⟩ ≤ 0`: reports the largest discrete value of the
/// Laplacian and, as `identity_residual`, its largest deviation from
/// `−4⟨X,N⟩²/⟨X,X⟩²`.
pub fn superharmonicity_check(imm: &SampledImmersion, eps: f64, tol: f64) -> Result<CheckReport> {
    check_sizes(imm, 5)?;
    let (nu, nv) = (imm.nu(), imm.nv());
    for (k, p) in imm.points.iter().enumerate() {
        let value = p.norm2();
        if !(value >= eps) {
            let (u, v) = imm.params[k];
            return Err(Error::Hypothesis { u, v, value, eps });
        }
    }
    let h: Vec<f64> = imm.points.iter().map(|p| p.norm2().ln()).collect();
    let lap = laplace_beltrami(imm, &h);
    let skip = exclusion_mask(imm, DEFAULT_SINGULAR_TOL, EXCLUSION_BAND);
    let excluded = skip.iter().filter(|&&s| s).count();
    let mut worst: Worst = None;
    let mut identity = 0.0f64;
    for j in 2..nv - 2 {
        for i in 2..nu - 2 {
            let k = imm.idx(i, j);
            if skip[k] {
                continue;
            }
            let jt = jet(imm, i, j);
            let (u, v) = imm.params[k];
            let n = unit_normal(jt.xu, jt.xv).ok_or(Error::Degenerate { u, v })?;
            let x = imm.points[k];
            let xx = x.norm2();
            let rhs = -4.0 * inner(x, n).powi(2) / (xx * xx);
            identity = identity.max((lap[k] - rhs).abs());
            if worst.is_none_or(|b| lap[k] > b.0) {
                worst = Some((lap[k], [u, v]));
            }
        }
    }
    let mut report = CheckReport::new("superharmonicity", worst, tol, excluded);
    report.identity_residual = Some(identity);
    Ok(report)
}

/// Smallest `‖p − q‖²` over the pairs; passes when it is at least `−tol`.
/// The reported violation is the negated minimum.
pub fn ps_pair_check(pairs: &[(LorentzVec, LorentzVec)], tol: f64) -> CheckReport {
    let worst = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| (-(a - b).norm2(), [k as f64, 0.0]))
        .fold(None, |best: Worst, c| if best.is_none_or(|b| c.0 > b.0) { Some(c) } else { best });
    CheckReport::new("pseudo_spacelike_pairs", worst, tol, 0)
}

/// Conformal-factor threshold below which a node counts as unresolved:
/// the larger parameter step of the grid. A singular curve passing between
/// nodes leaves the neighbouring nodes with `λ` of the order of the step,
/// where difference quotients of size `h²` swamp `EG − F² ~ λ⁴`.
pub fn resolution_singular_tol(imm: &SampledImmersion) -> f64 {
    let nu = imm.nu();
    let du = (imm.params[1].0 - imm.params[0].0).abs();
    let dv = (imm.params[nu].1 - imm.params[0].1).abs();
    du.max(dv).max(DEFAULT_SINGULAR_TOL)
}

/// Pairs of images of nodes at Chebyshev distance at most `radius` cells,
/// anchored at every `stride`-th node in each direction. Nodes whose conformal
/// factor is at most `singular_tol`, and their neighbours, are left out:
/// chords through the singular set can be timelike (across the vertex of the
/// catenoid, or along a lightlike boundary curve), so they say nothing about
/// the spacelike part.
pub fn local_pairs(
    imm: &SampledImmersion,
    radius: usize,
    stride: usize,
    singular_tol: f64,
) -> Vec<(LorentzVec, LorentzVec)> {
    let (nu, nv) = (imm.nu(), imm.nv());
    let skip = exclusion_mask(imm, singular_tol, EXCLUSION_BAND);
    let stride = stride.max(1);
    let mut out = Vec::new();
    for j in (0..nv).step_by(stride) {
        for i in (0..nu).step_by(stride) {
            if skip[imm.idx(i, j)] {
                continue;
            }
            let a = imm.points[imm.idx(i, j)];
            for jj in j..=(j + radius).min(nv - 1) {
                for ii in i.saturating_sub(radius)..=(i + radius).min(nu - 1) {
                    if (jj, ii) > (j, i) && !skip[imm.idx(ii, jj)] {
                        out.push((a, imm.points[imm.idx(ii, jj)]));
                    }
                }
            }
        }
    }
    out
}

/// As [`local_pairs`] for the lifted nodes of a graph on a grid.
pub fn graph_local_pairs(g: &GridGraph, radius: usize, stride: usize) -> Vec<(LorentzVec, LorentzVec)> {
    let stride = stride.max(1);
    let mut out = Vec::new();
    for j in (0..g.ny).step_by(stride) {
        for i in (0..g.nx).step_by(stride) {
            let k = g.idx(i, j);
            if !g.mask[k] {
                continue;
            }
            let a = g.lift(k);
            for jj in j..=(j + radius).min(g.ny - 1) {
                for ii in i.saturating_sub(radius)..=(i + radius).min(g.nx - 1) {
                    let m = g.idx(ii, jj);
                    if (jj, ii) > (j, i) && g.mask[m] {
                        out.push((a, g.lift(m)));
                    }
                }
            }
        }
    }
    out
}
