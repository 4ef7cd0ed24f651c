use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use maxsurf::asymptotics::{
    blow_scale, classify_limit, cone_residual, fit_plane_through_origin, rotation_of_gauss, tau_measures,
    unwrap_angles, Annulus, AsymptoticsReport, GraphSampler, RotationConfig, Wedge,
};
use maxsurf::catalog::{GraphFixture, Model, PLANE_G};
use maxsurf::io::fmt_f64;
use maxsurf::maxgraph::GridGraph;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::options::{
    create, emit, open, parse_list, parse_radii, parse_range, usage, write_json, CliError, CmdResult,
};

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AsymptoticsArgs {
    /// Catalog model, fixture graph (`cone`, `plane:a,b`, `catenoid@x,y`, ...)
    /// or a grid CSV.
    pub target: Option<String>,
    /// blowdown, blowup, tau or rotation.
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma-separated scale factors.
    #[arg(long)]
    pub scales: Option<String>,
    /// Annulus `inner:outer` on which rescaled graphs are compared.
    #[arg(long)]
    pub annulus: Option<String>,
    /// `r0:r1:n` log-spaced radii for the τ-measures.
    #[arg(long)]
    pub radii: Option<String>,
    /// `full` or an angular range `a:b` in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub wedge: Option<String>,
    /// Sample angles per full circle.
    #[arg(long)]
    pub n_circle: Option<usize>,
    /// Trace range `a:b` for rotation numbers.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Trace samples for rotation numbers.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report file (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional table of per-scale, per-radius or per-sample values.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    BlowUp,
    BlowDown,
    Tau,
    Rotation,
}

/// Rows of the CSV side output, header first.
type Table = Vec<String>;

fn graph_sampler(target: &str) -> Result<Box<dyn GraphSampler>, CliError> {
    let path = Path::new(target);
    if target.ends_with(".csv") || path.is_file() {
        return Ok(Box::new(GridGraph::read_csv(open(path)?)?));
    }
    let fixture = match Model::from_name(target) {
        Ok(Model::Catenoid) => GraphFixture::Catenoid { center: [0.0, 0.0] },
        Ok(Model::Enneper2) => GraphFixture::Enneper2,
        Ok(Model::Plane) => GraphFixture::Plane { slope: [0.0, 0.0] },
        Ok(m) => return Err(usage(format!("{} is not an entire graph", m.name()))),
        Err(_) => GraphFixture::parse(target)?,
    };
    Ok(Box::new(fixture))
}

fn blow(
    sampler: &dyn GraphSampler,
    a: &AsymptoticsArgs,
    mode: Mode,
    report: &mut AsymptoticsReport,
) -> Result<Table, CliError> {
    let scales = match &a.scales {
        Some(s) => parse_list(s)?,
        None if mode == Mode::BlowUp => vec![1.0, 10.0, 100.0, 1000.0],
        None => vec![1.0, 0.1, 0.01, 0.001],
    };
    let (inner, outer) = match &a.annulus {
        Some(s) => parse_range(s)?,
        None => (1.0, 2.0),
    };
    let region = Annulus::new(inner, outer);
    let samples = blow_scale(sampler, &scales, &region)?;
    report.limit = Some(classify_limit(&samples, &region)?);
    report.scales = Some(scales);
    report.region = Some([inner, outer]);
    let mut rows = vec!["scale,sup_abs,plane_residual,cone_upper_residual,cone_lower_residual".to_string()];
    for s in &samples {
        let (_, plane) = fit_plane_through_origin(&s.points);
        rows.push(format!(
            "{},{},{},{},{}",
            fmt_f64(s.scale),
            fmt_f64(s.sup_abs()),
            fmt_f64(plane),
            fmt_f64(cone_residual(&s.points, 1.0)),
            fmt_f64(cone_residual(&s.points, -1.0))
        ));
    }
    Ok(rows)
}

fn tau(sampler: &dyn GraphSampler, a: &AsymptoticsArgs, report: &mut AsymptoticsReport) -> Result<Table, CliError> {
    let radii = parse_radii(a.radii.as_deref().unwrap_or("1:1000:16"))?;
    let wedge = match a.wedge.as_deref() {
        None | Some("full") => Wedge::Full,
        Some(s) => {
            let (start, end) = parse_range(s)?;
            Wedge::Arc { start, end }
        }
    };
    let n_circle = a.n_circle.unwrap_or(720);
    if n_circle < 3 {
        return Err(usage("--n-circle must be at least 3"));
    }
    let t = tau_measures(sampler, &radii, wedge, n_circle)?;
    let mut rows = vec!["radius,tau_plus,tau_minus".to_string()];
    for k in 0..t.radii.len() {
        rows.push(format!("{},{},{}", fmt_f64(t.radii[k]), fmt_f64(t.tau_plus_r[k]), fmt_f64(t.tau_minus_r[k])));
    }
    report.tau = Some(t);
    Ok(rows)
}

/// Gauss map traced along the boundary line of the parameter domain, or
/// along the unit circle for the catenoid.
type Trace = (fn(f64) -> Complex64, (f64, f64));

fn boundary_trace(model: Model) -> Result<Trace, CliError> {
    fn circle(s: f64) -> Complex64 {
        Complex64::new(0.0, s).exp()
    }
    fn enneper(x: f64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        (Complex64::new(x, 0.0) - i) / (Complex64::new(x, 0.0) + i)
    }
    fn constant(_: f64) -> Complex64 {
        Complex64::new(PLANE_G, 0.0)
    }
    match model {
        Model::Helicoid | Model::Catenoid => Ok((circle, (-50.0, 50.0))),
        Model::Enneper1 | Model::Enneper2 => Ok((enneper, (-1000.0, 1000.0))),
        Model::Plane => Ok((constant, (-1.0, 1.0))),
        _ => Err(usage(format!("{} has no Gauss map to trace", model.name()))),
    }
}

fn rotation(model: Model, a: &AsymptoticsArgs, report: &mut AsymptoticsReport) -> Result<Table, CliError> {
    let (g, default_range) = boundary_trace(model)?;
    let range = match &a.range {
        Some(r) => parse_range(r)?,
        None => default_range,
    };
    let n = a.samples.unwrap_or(200_001);
    if n < 3 {
        return Err(usage("--samples must be at least 3"));
    }
    let cfg = RotationConfig::default();
    let r = rotation_of_gauss(g, range, n, &cfg)?;
    report.rotation = Some(r);
    // The table is thinned to about a thousand rows.
    let params: Vec<f64> = (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect();
    let dirs: Vec<Complex64> = params.iter().map(|&s| g(s)).collect();
    let angles = unwrap_angles(&dirs, cfg.max_jump)?;
    let step = n.div_ceil(1000).max(1);
    let mut rows = vec!["s,angle".to_string()];
    for k in (0..n).step_by(step).chain(std::iter::once(n - 1)).collect::<std::collections::BTreeSet<_>>() {
        rows.push(format!("{},{}", fmt_f64(params[k]), fmt_f64(angles[k] - angles[0])));
    }
    Ok(rows)
}

pub fn run(a: AsymptoticsArgs) -> CmdResult {
    let target = a.target.clone().ok_or_else(|| usage("a model, fixture or grid file is required"))?;
    let mode = match a.mode.as_deref() {
        Some("blowup") => Mode::BlowUp,
        Some("blowdown") => Mode::BlowDown,
        Some("tau") => Mode::Tau,
        Some("rotation") => Mode::Rotation,
        Some(m) => return Err(usage(format!("unknown mode '{m}'"))),
        None => return Err(usage("--mode is required (blowdown, blowup, tau, rotation)")),
    };
    let out = a.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let mut report = AsymptoticsReport {
        model: target.clone(),
        mode: a.mode.clone().unwrap_or_default(),
        scales: None,
        region: None,
        tau: None,
        limit: None,
        rotation: None,
    };
    let table = match mode {
        Mode::Rotation => rotation(Model::from_name(&target)?, &a, &mut report)?,
        Mode::Tau => tau(graph_sampler(&target)?.as_ref(), &a, &mut report)?,
        Mode::BlowUp | Mode::BlowDown => blow(graph_sampler(&target)?.as_ref(), &a, mode, &mut report)?,
    };
    write_json(out, &report)?;
    if let Some(csv) = &a.csv {
        let mut w = create(csv)?;
        for row in table {
            writeln!(w, "{row}")?;
        }
        w.flush()?;
    }
    emit(&report)?;
    Ok(true)
}
