use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use maxsurf::catalog::{self, align_translation, conjugate_partner, eval_z};
use maxsurf::lorentz::LorentzVec;
use maxsurf::maxgraph::{conjugate_graph, maximal_from_minimal, ConjugateOptions, GridGraph};
use maxsurf::weierstrass::{conjugate_immersion, ConjugateKind};
use maxsurf::Error;
use serde::{Deserialize, Serialize};

use crate::options::{create, emit, open, usage, CliError, CmdResult};
use crate::sample::{build_domain, parse_model};

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConjugateArgs {
    /// Catalog model whose Weierstrass data is conjugated.
    pub model: Option<String>,
    /// `maximal` (data (g, i f)) or `minimal` (the associated Euclidean surface).
    #[arg(long)]
    pub kind: Option<String>,
    /// First parameter range `a:b`.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Second parameter range `a:b`.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Grid size `NUxNV`.
    #[arg(long)]
    pub res: Option<String>,
    /// Grid CSV of a graph to conjugate instead of a model.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// `maximal` (default) or `minimal`: the kind of graph given by `--graph`.
    #[arg(long)]
    pub from: Option<String>,
    /// Node index where the conjugate vanishes; defaults to the mask node
    /// closest to the grid centre.
    #[arg(long)]
    pub anchor: Option<usize>,
    /// Gradient tolerance below 1 for rejecting singular graphs.
    #[arg(long)]
    pub singular_tol: Option<f64>,
    /// Largest accepted distance to the catalog partner after alignment.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output CSV for the conjugate immersion or graph.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ImmersionSummary {
    model: &'static str,
    kind: String,
    nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    partner: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alignment_error: Option<f64>,
    passed: bool,
}

#[derive(Serialize)]
struct GraphSummary {
    from: String,
    anchor: usize,
    nodes: usize,
    loop_residual: f64,
}

fn centre_anchor(g: &GridGraph) -> Option<usize> {
    let c = [g.origin[0] + 0.5 * g.h * (g.nx - 1) as f64, g.origin[1] + 0.5 * g.h * (g.ny - 1) as f64];
    (0..g.len()).filter(|&k| g.mask[k]).min_by(|&a, &b| {
        let d = |k: usize| {
            let x = g.xy(k);
            (x[0] - c[0]).hypot(x[1] - c[1])
        };
        d(a).total_cmp(&d(b)).then(a.cmp(&b))
    })
}

fn run_graph(a: &ConjugateArgs, path: &Path) -> CmdResult {
    let out = a.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let g = GridGraph::read_csv(open(path)?)?;
    let anchor = match a.anchor {
        Some(k) => k,
        None => centre_anchor(&g).ok_or_else(|| usage("the graph has no mask nodes"))?,
    };
    let defaults = ConjugateOptions::default();
    let opts = ConjugateOptions { singular_tol: a.singular_tol.unwrap_or(defaults.singular_tol), ..defaults };
    let from = a.from.clone().unwrap_or_else(|| "maximal".into());
    let result = match from.as_str() {
        "maximal" => conjugate_graph(&g, anchor, &opts),
        "minimal" => maximal_from_minimal(&g, anchor, &opts),
        other => return Err(usage(format!("--from must be maximal or minimal, got '{other}'"))),
    };
    let conj = match result {
        Ok(c) => c,
        Err(e @ (Error::Singular { .. } | Error::Exactness { .. })) => return Err(CliError::Failed(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let mut w = create(out)?;
    conj.graph.write_csv(&mut w)?;
    w.flush()?;
    emit(&GraphSummary {
        from,
        anchor,
        nodes: conj.graph.mask.iter().filter(|&&m| m).count(),
        loop_residual: conj.loop_residual,
    })?;
    Ok(true)
}

pub fn run(a: ConjugateArgs) -> CmdResult {
    if let Some(path) = &a.graph {
        if a.model.is_some() || a.kind.is_some() {
            return Err(usage("--graph cannot be combined with a model or --kind"));
        }
        return run_graph(&a, path);
    }
    let model = parse_model(a.model.as_deref())?;
    let out = a.out.as_ref().ok_or_else(|| usage("--out is required"))?;
    let kind_name = a.kind.clone().unwrap_or_else(|| "maximal".into());
    let kind = match kind_name.as_str() {
        "maximal" => ConjugateKind::Maximal,
        "minimal" => ConjugateKind::Minimal,
        other => return Err(usage(format!("--kind must be maximal or minimal, got '{other}'"))),
    };
    let domain = build_domain(model, a.u.as_deref(), a.v.as_deref(), a.res.as_deref())?;
    let data = catalog::weierstrass(model, domain)
        .ok_or_else(|| usage(format!("{} has no Weierstrass data", model.name())))?;
    let conj = conjugate_immersion(&data, kind)?;
    let mut w = create(out)?;
    conj.write_csv(&mut w)?;
    w.flush()?;

    // Compare a maximal conjugate with the closed form of its catalog partner.
    let partner = conjugate_partner(model).filter(|_| kind == ConjugateKind::Maximal);
    let alignment_error = match partner {
        Some(p) => {
            let expected: Vec<LorentzVec> = conj
                .params
                .iter()
                .map(|&(u, v)| eval_z(p.model, (p.reparam)(domain.z(u, v))).map(|x| x * p.sign))
                .collect::<Result<_, _>>()?;
            Some(align_translation(&conj.points, &expected).1)
        }
        None => None,
    };
    let tol = a.tol.unwrap_or(1e-8);
    let passed = alignment_error.is_none_or(|e| e <= tol);
    emit(&ImmersionSummary {
        model: model.name(),
        kind: kind_name,
        nodes: conj.points.len(),
        partner: partner.map(|p| p.model.name()),
        alignment_error,
        passed,
    })?;
    Ok(passed)
}
