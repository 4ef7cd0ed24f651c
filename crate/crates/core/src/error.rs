use thiserror::Error;

/// Every failure mode reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of the Gauss map at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("inadmissible boundary data: nodes {p} and {q} differ by {dt} in height but are {dist} apart")]
    Admissibility { p: usize, q: usize, dt: f64, dist: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("graph is singular: gradient norm {grad} at node {node}")]
    Singular { node: usize, grad: f64 },
    #[error("conjugate form is not exact: loop residual {residual:e} exceeds {tol:e}")]
    Exactness { residual: f64, tol: f64 },
    #[error("supports of graphs {a} and {b} overlap")]
    Overlap { a: usize, b: usize },
    #[error("arc has {0} samples, at least 16 are required")]
    ShortArc(usize),
    #[error("tangent angle decreases at s = {0}")]
    Monotonicity(f64),
    #[error("angle jump {jump} between samples {index} and {next} exceeds {limit}", next = .index + 1)]
    Unwrap { index: usize, jump: f64, limit: f64 },
    #[error("first fundamental form degenerate at parameter ({u}, {v})")]
    Degenerate { u: f64, v: f64 },
    #[error("hypothesis violated: <X,X> = {value} < {eps} at parameter ({u}, {v})")]
    Hypothesis { u: f64, v: f64, value: f64, eps: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
