use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use maxsurf::catalog::{self, default_domain, Model};
use maxsurf::lorentz::LorentzVec;
use maxsurf::weierstrass::{integrate_immersion, ParamDomain, SampledImmersion, SINGULAR_TOL};
use serde::{Deserialize, Serialize};

use crate::options::{create, emit, parse_list, parse_range, parse_res, usage, CliError, CmdResult};

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SampleArgs {
    /// Catalog model (helicoid, catenoid, enneper1, enneper2, plane,
    /// timelike-plane, sphere-cap).
    pub model: Option<String>,
    /// First parameter range `a:b`.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Second parameter range `a:b`.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Grid size `NUxNV`.
    #[arg(long)]
    pub res: Option<String>,
    /// `obj` or `csv`.
    #[arg(long)]
    pub format: Option<String>,
    /// `closed` (closed form) or `weierstrass` (integrated data).
    #[arg(long)]
    pub source: Option<String>,
    /// Translation `x1,x2,t` added to every point.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<String>,
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parameter grid from optional range and resolution flags, falling back to
/// the model's default domain for anything left out.
pub fn build_domain(
    model: Model,
    u: Option<&str>,
    v: Option<&str>,
    res: Option<&str>,
) -> Result<ParamDomain, CliError> {
    let base = default_domain(model);
    let [mut u0, mut u1, mut v0, mut v1] = base.bounds;
    if let Some(u) = u {
        (u0, u1) = parse_range(u)?;
    }
    if let Some(v) = v {
        (v0, v1) = parse_range(v)?;
    }
    let (nu, nv) = match res {
        Some(r) => parse_res(r)?,
        None => (base.nu, base.nv),
    };
    Ok(ParamDomain::new(base.kind, [u0, u1, v0, v1], nu, nv)?)
}

pub fn parse_model(name: Option<&str>) -> Result<Model, CliError> {
    let name = name.ok_or_else(|| usage("a model name is required"))?;
    Ok(Model::from_name(name)?)
}

/// Samples a model either from its closed form or by integrating its
/// Weierstrass data.
pub fn sample_model(model: Model, domain: ParamDomain, source: Option<&str>) -> Result<SampledImmersion, CliError> {
    match source.unwrap_or("closed") {
        "closed" => Ok(catalog::sample_closed_form(model, domain)?),
        "weierstrass" => {
            let data = catalog::weierstrass(model, domain)
                .ok_or_else(|| usage(format!("{} has no Weierstrass data", model.name())))?;
            Ok(integrate_immersion(&data)?)
        }
        other => Err(usage(format!("unknown source '{other}', expected closed or weierstrass"))),
    }
}

#[derive(Serialize)]
struct Summary {
    model: &'static str,
    source: String,
    format: String,
    nodes: usize,
    min: [f64; 3],
    max: [f64; 3],
    singular_nodes: usize,
}

pub fn run(a: SampleArgs) -> CmdResult {
    let model = parse_model(a.model.as_deref())?;
    let domain = build_domain(model, a.u.as_deref(), a.v.as_deref(), a.res.as_deref())?;
    let format = a.format.clone().unwrap_or_else(|| "csv".into());
    if format != "csv" && format != "obj" {
        return Err(usage(format!("unknown format '{format}', expected obj or csv")));
    }
    let out = a.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let mut imm = sample_model(model, domain, a.source.as_deref())?;
    if let Some(off) = &a.offset {
        let &[x1, x2, t] = &parse_list(off)?[..] else {
            return Err(usage("--offset needs three numbers x1,x2,t"));
        };
        let shift = LorentzVec::new(x1, x2, t);
        imm.points.iter_mut().for_each(|p| *p += shift);
    }

    let mut w = create(out)?;
    if format == "obj" {
        imm.write_obj(&mut w)?;
    } else {
        imm.write_csv(&mut w)?;
    }
    w.flush()?;

    let (mut min, mut max) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    for p in &imm.points {
        for (c, x) in p.to_array().into_iter().enumerate() {
            min[c] = min[c].min(x);
            max[c] = max[c].max(x);
        }
    }
    emit(&Summary {
        model: model.name(),
        source: a.source.unwrap_or_else(|| "closed".into()),
        format,
        nodes: imm.points.len(),
        min,
        max,
        singular_nodes: imm.singular_mask(SINGULAR_TOL).iter().filter(|&&s| s).count(),
    })?;
    Ok(true)
}
