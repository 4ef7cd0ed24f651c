use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use maxsurf::catalog::GraphFixture;
use maxsurf::maxgraph::{
    detect_singular, hull_violation, solve_plateau, BoundaryData, GridGraph, HullViolation, SolverConfig,
};
use maxsurf::Error;
use serde::{Deserialize, Serialize};

use crate::options::{create, emit, open, usage, write_json, CliError, CmdResult};

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PlateauArgs {
    /// `index,value` rows along the traced boundary of the mask.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Grid CSV whose non-NaN entries define the domain.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Output directory for graph.csv, singular.json and iterations.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Gradients are clamped at `1 - eps_reg` (default 1e-6).
    #[arg(long)]
    pub eps_reg: Option<f64>,
    /// Stop when the largest per-cell net flux is below this (default 1e-10).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Relaxation sweep budget (default 200 times the node count).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Over-relaxation factor in (0, 2); defaults to the grid-optimal value.
    #[arg(long)]
    pub relaxation: Option<f64>,
    /// Fixture graph (e.g. `catenoid@3,0`) to measure the error against.
    #[arg(long, allow_hyphen_values = true)]
    pub exact: Option<String>,
    /// Gradient tolerance for flagging singular nodes.
    #[arg(long)]
    pub singular_tol: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    nodes: usize,
    boundary_nodes: usize,
    iterations: usize,
    residual: f64,
    relaxation: f64,
    clamped_nodes: usize,
    degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_error: Option<f64>,
    hull: HullViolation,
    singular_nodes: usize,
    singular_segments: usize,
    singular_points: usize,
}

pub fn run(a: PlateauArgs) -> CmdResult {
    let mask_path = a.mask.as_ref().ok_or_else(|| usage("--mask is required"))?;
    let bd_path = a.boundary.as_ref().ok_or_else(|| usage("--boundary is required"))?;
    let out = a.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let domain = GridGraph::read_csv(open(mask_path)?)?;
    let bd = BoundaryData::read_csv(&domain, open(bd_path)?)?;
    let exact = a.exact.as_deref().map(GraphFixture::parse).transpose()?;
    let defaults = SolverConfig::default();
    let cfg = SolverConfig {
        eps_reg: a.eps_reg.unwrap_or(defaults.eps_reg),
        tol: a.tol.unwrap_or(defaults.tol),
        max_iters: a.max_iters.or(defaults.max_iters),
        relaxation: a.relaxation.or(defaults.relaxation),
    };

    let sol = match solve_plateau(&bd, &domain, &cfg) {
        Ok(sol) => sol,
        Err(e @ (Error::Admissibility { .. } | Error::Convergence { .. })) => {
            return Err(CliError::Failed(e.to_string()));
        }
        Err(e) => return Err(e.into()),
    };

    std::fs::create_dir_all(out).map_err(|e| usage(format!("cannot create {}: {e}", out.display())))?;
    let mut w = create(&out.join("graph.csv"))?;
    sol.graph.write_csv(&mut w)?;
    w.flush()?;
    let singular = detect_singular(&sol.graph, a.singular_tol.unwrap_or(maxsurf::verify::DEFAULT_SINGULAR_TOL));
    write_json(&out.join("singular.json"), &singular)?;
    let mut w = create(&out.join("iterations.csv"))?;
    writeln!(w, "iteration,residual")?;
    for (it, r) in &sol.stats.history {
        writeln!(w, "{it},{}", maxsurf::io::fmt_f64(*r))?;
    }
    w.flush()?;

    let g = &sol.graph;
    let max_error = exact
        .map(|f| (0..g.len()).filter(|&k| g.mask[k]).map(|k| (g.u[k] - f.height(g.xy(k))).abs()).fold(0.0, f64::max));
    emit(&Summary {
        nodes: g.mask.iter().filter(|&&m| m).count(),
        boundary_nodes: bd.nodes.len(),
        iterations: sol.stats.iterations,
        residual: sol.stats.residual,
        relaxation: sol.stats.relaxation,
        clamped_nodes: sol.stats.clamped_nodes,
        degenerate: sol.stats.degenerate,
        max_error,
        hull: hull_violation(g, &bd),
        singular_nodes: singular.nodes.len(),
        singular_segments: singular.segments.len(),
        singular_points: singular.points.len(),
    })?;
    Ok(true)
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DiscArgs {
    /// Fixture graph providing the boundary values, e.g. `catenoid@3,0`.
    #[arg(long, allow_hyphen_values = true)]
    pub fixture: Option<String>,
    /// Disc radius (default 1).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Output directory for mask.csv and boundary.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_disc(a: DiscArgs) -> CmdResult {
    let fixture = GraphFixture::parse(a.fixture.as_deref().ok_or_else(|| usage("--fixture is required"))?)?;
    let radius = a.radius.unwrap_or(1.0);
    let h = a.h.ok_or_else(|| usage("--h is required"))?;
    if !(radius > 0.0 && h > 0.0 && h < radius) {
        return Err(usage("need 0 < h < radius"));
    }
    let out = a.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let domain = GridGraph::disc(radius, h);
    let bd = BoundaryData::from_fn(&domain, |x| fixture.height(x));
    std::fs::create_dir_all(out).map_err(|e| usage(format!("cannot create {}: {e}", out.display())))?;
    let mask = GridGraph { u: domain.mask.iter().map(|&m| if m { 0.0 } else { f64::NAN }).collect(), ..domain };
    let mut w = create(&out.join("mask.csv"))?;
    mask.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join("boundary.csv"))?;
    bd.write_csv(&mut w)?;
    w.flush()?;
    Ok(true)
}
