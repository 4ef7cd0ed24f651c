//! Maximal graphs `t = u(x)` over masked uniform grids.
//!
//! The maximal surface equation `div(∇u / √(1 − |∇u|²)) = 0` is discretized in
//! flux form. On the face between a node and its neighbour the normal
//! derivative is the plain difference quotient; the tangential derivative is
//! the mean of the one-sided differences at the two face endpoints. Gradients
//! are clamped at `1 − eps_reg` inside the flux.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64};
use crate::lorentz::LorentzVec;
use crate::weierstrass::components_8;

/// Scalar field on a masked grid. Node `(i, j)` sits at `origin + h (i, j)` and
/// has linear index `j nx + i`. Masked-out nodes hold NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridGraph {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub h: f64,
    pub mask: Vec<bool>,
    pub u: Vec<f64>,
}

/// East, north, west, south.
const DIRS4: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

impl GridGraph {
    /// A grid with every node masked out.
    pub fn empty(nx: usize, ny: usize, origin: [f64; 2], h: f64) -> Self {
        GridGraph { nx, ny, origin, h, mask: vec![false; nx * ny], u: vec![f64::NAN; nx * ny] }
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        h: f64,
        in_mask: impl Fn([f64; 2]) -> bool,
        u: impl Fn([f64; 2]) -> f64,
    ) -> Self {
        let mut g = GridGraph::empty(nx, ny, origin, h);
        for k in 0..nx * ny {
            let x = g.xy(k);
            if in_mask(x) {
                g.mask[k] = true;
                g.u[k] = u(x);
            }
        }
        g
    }

    /// Grid on `[−R, R]²` with `n = 2R/h + 1` nodes per side, masked to the
    /// closed disc of radius `R` centred at the origin, with `u = 0` inside.
    pub fn disc(radius: f64, h: f64) -> Self {
        let n = (2.0 * radius / h).round() as usize + 1;
        let r2 = radius * radius * (1.0 + 1e-12);
        GridGraph::from_fn(n, n, [-radius, -radius], h, |x| x[0] * x[0] + x[1] * x[1] <= r2, |_| 0.0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn xy(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.ij(k);
        [self.origin[0] + self.h * i as f64, self.origin[1] + self.h * j as f64]
    }

    /// Neighbour index at offset `(di, dj)` if it exists on the grid.
    pub fn offset(&self, k: usize, di: isize, dj: isize) -> Option<usize> {
        let (i, j) = self.ij(k);
        let (a, b) = (i as isize + di, j as isize + dj);
        (a >= 0 && b >= 0 && (a as usize) < self.nx && (b as usize) < self.ny)
            .then(|| b as usize * self.nx + a as usize)
    }

    fn masked_offset(&self, k: usize, di: isize, dj: isize) -> Option<usize> {
        self.offset(k, di, dj).filter(|&n| self.mask[n])
    }

    /// Mask nodes whose four neighbours are all in the mask.
    pub fn is_interior(&self, k: usize) -> bool {
        self.mask[k] && DIRS4.iter().all(|&(di, dj)| self.masked_offset(k, di, dj).is_some())
    }

    /// Mask nodes that are not interior.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.mask[k] && !self.is_interior(k)).collect()
    }

    pub fn lift(&self, k: usize) -> LorentzVec {
        let x = self.xy(k);
        LorentzVec::new(x[0], x[1], self.u[k])
    }

    fn axis_derivative(&self, k: usize, di: isize, dj: isize) -> f64 {
        let fwd = self.masked_offset(k, di, dj);
        let bwd = self.masked_offset(k, -di, -dj);
        // One-sided: second order when two nodes are available on that side.
        let one_sided = |a: usize, sign: f64| match self.masked_offset(a, sign as isize * di, sign as isize * dj) {
            Some(a2) => sign * (-3.0 * self.u[k] + 4.0 * self.u[a] - self.u[a2]) / (2.0 * self.h),
            None => sign * (self.u[a] - self.u[k]) / self.h,
        };
        match (fwd, bwd) {
            (Some(a), Some(b)) => (self.u[a] - self.u[b]) / (2.0 * self.h),
            (Some(a), None) => one_sided(a, 1.0),
            (None, Some(b)) => one_sided(b, -1.0),
            (None, None) => 0.0,
        }
    }

    /// Nodal gradient: central differences where both neighbours exist,
    /// second-order one-sided differences otherwise.
    pub fn gradient(&self, k: usize) -> [f64; 2] {
        [self.axis_derivative(k, 1, 0), self.axis_derivative(k, 0, 1)]
    }

    /// Central-difference gradient, `None` unless all four neighbours exist.
    pub fn central_gradient(&self, k: usize) -> Option<[f64; 2]> {
        self.is_interior(k).then(|| self.gradient(k))
    }

    /// Largest nodal gradient norm over the mask.
    pub fn max_gradient(&self) -> f64 {
        (0..self.len())
            .filter(|&k| self.mask[k])
            .map(|k| {
                let g = self.gradient(k);
                g[0].hypot(g[1])
            })
            .fold(0.0, f64::max)
    }

    /// Bilinear interpolation; `None` outside the grid or when a corner of the
    /// containing cell is masked out.
    pub fn bilinear(&self, x: [f64; 2]) -> Option<f64> {
        let fx = (x[0] - self.origin[0]) / self.h;
        let fy = (x[1] - self.origin[1]) / self.h;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (self.nx - 1) as f64 && fy <= (self.ny - 1) as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (a, b) = (fx - i as f64, fy - j as f64);
        let k = self.idx(i, j);
        let c = [k, k + 1, k + self.nx, k + self.nx + 1];
        if c.iter().any(|&n| !self.mask[n]) {
            return None;
        }
        Some(
            (1.0 - a) * (1.0 - b) * self.u[c[0]]
                + a * (1.0 - b) * self.u[c[1]]
                + (1.0 - a) * b * self.u[c[2]]
                + a * b * self.u[c[3]],
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{}",
            self.nx,
            self.ny,
            fmt_f64(self.origin[0]),
            fmt_f64(self.origin[1]),
            fmt_f64(self.h)
        )?;
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx)
                .map(|i| {
                    let k = self.idx(i, j);
                    if self.mask[k] {
                        fmt_f64(self.u[k])
                    } else {
                        "NaN".to_string()
                    }
                })
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().map(|l| l.map_err(|e| Error::Parse(e.to_string())));
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let f: Vec<&str> = header.trim().split(',').collect();
        if f.len() != 5 {
            return Err(Error::Parse(format!("grid header '{header}' needs nx,ny,x0,y0,h")));
        }
        let nx: usize = f[0].trim().parse().map_err(|_| Error::Parse(format!("bad nx '{}'", f[0])))?;
        let ny: usize = f[1].trim().parse().map_err(|_| Error::Parse(format!("bad ny '{}'", f[1])))?;
        let (x0, y0, h) = (parse_f64(f[2])?, parse_f64(f[3])?, parse_f64(f[4])?);
        if nx < 2 || ny < 2 || !(h > 0.0) {
            return Err(Error::Parse("grid needs nx, ny ≥ 2 and h > 0".into()));
        }
        let mut g = GridGraph::empty(nx, ny, [x0, y0], h);
        for j in 0..ny {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing grid row {j}")))??;
            let vals: Vec<f64> = line.trim().split(',').map(parse_f64).collect::<Result<_>>()?;
            if vals.len() != nx {
                return Err(Error::Parse(format!("grid row {j} has {} values, expected {nx}", vals.len())));
            }
            for (i, v) in vals.into_iter().enumerate() {
                let k = j * nx + i;
                g.mask[k] = !v.is_nan();
                g.u[k] = v;
            }
        }
        Ok(g)
    }
}

/// Face weight `1/√(1 − s)` with `s = |∇u|²` clamped at `(1 − eps)²`.
fn maximal_weight(s: f64, eps: f64) -> (f64, bool) {
    let cap = (1.0 - eps) * (1.0 - eps);
    (1.0 / (1.0 - s.min(cap)).sqrt(), s > cap)
}

fn minimal_weight(s: f64) -> f64 {
    1.0 / (1.0 + s).sqrt()
}

/// Outward normal derivative and mean tangential derivative on the face from
/// interior node `k` towards direction `d`.
fn face_derivatives(g: &GridGraph, u: &[f64], k: usize, d: usize) -> (usize, f64, f64) {
    let (di, dj) = DIRS4[d];
    let nb = g.offset(k, di, dj).expect("interior node has all neighbours");
    let p = (u[nb] - u[k]) / g.h;
    let (ti, tj) = (dj, di);
    let mut sum = 0.0;
    let mut cnt = 0;
    for node in [k, nb] {
        if let Some(a) = g.masked_offset(node, ti, tj) {
            sum += u[a] - u[node];
            cnt += 1;
        }
        if let Some(b) = g.masked_offset(node, -ti, -tj) {
            sum += u[node] - u[b];
            cnt += 1;
        }
    }
    let q = if cnt > 0 { sum / (cnt as f64 * g.h) } else { 0.0 };
    (nb, p, q)
}

/// Residual of the maximal surface equation on a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// Discrete divergence at interior nodes, NaN elsewhere.
    pub values: Vec<f64>,
    /// Interior nodes where some face gradient hit the clamp.
    pub clamped: Vec<usize>,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().filter(|v| !v.is_nan()).fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn flux_sum(g: &GridGraph, u: &[f64], k: usize, eps: f64) -> (f64, bool) {
    let mut total = 0.0;
    let mut clamped = false;
    for d in 0..4 {
        let (_, p, q) = face_derivatives(g, u, k, d);
        let (w, c) = maximal_weight(p * p + q * q, eps);
        clamped |= c;
        total += w * p;
    }
    (total, clamped)
}

/// Per-node divergence `div(∇u/√(1 − |∇u|²))` in face-flux form, with the
/// gradient clamped at `1 − eps_reg`.
pub fn residual_maximal(g: &GridGraph, eps_reg: f64) -> Residual {
    let out: Vec<(f64, bool)> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if !g.is_interior(k) {
                return (f64::NAN, false);
            }
            let (s, c) = flux_sum(g, &g.u, k, eps_reg);
            (s / g.h, c)
        })
        .collect();
    Residual { values: out.iter().map(|r| r.0).collect(), clamped: (0..g.len()).filter(|&k| out[k].1).collect() }
}

/// Per-node divergence `div(∇u/√(1 + |∇u|²))` of the minimal surface equation.
pub fn residual_minimal(g: &GridGraph) -> Vec<f64> {
    (0..g.len())
        .into_par_iter()
        .map(|k| {
            if !g.is_interior(k) {
                return f64::NAN;
            }
            let mut total = 0.0;
            for d in 0..4 {
                let (_, p, q) = face_derivatives(g, &g.u, k, d);
                total += minimal_weight(p * p + q * q) * p;
            }
            total / g.h
        })
        .collect()
}

/// Lorentzian area of the graph over the cells of the mask whose centre lies
/// in the disc of radius `R` about the origin, by the midpoint rule with the
/// cell-centred gradient.
pub fn area(g: &GridGraph, radius: f64) -> f64 {
    let h = g.h;
    let mut total = 0.0;
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let k = g.idx(i, j);
            let c = [k, k + 1, k + g.nx, k + g.nx + 1];
            if c.iter().any(|&n| !g.mask[n]) {
                continue;
            }
            let x = g.xy(k);
            let (cx, cy) = (x[0] + 0.5 * h, x[1] + 0.5 * h);
            if cx * cx + cy * cy > radius * radius {
                continue;
            }
            let gx = (g.u[c[1]] - g.u[c[0]] + g.u[c[3]] - g.u[c[2]]) / (2.0 * h);
            let gy = (g.u[c[2]] - g.u[c[0]] + g.u[c[3]] - g.u[c[1]]) / (2.0 * h);
            total += (1.0 - gx * gx - gy * gy).max(0.0).sqrt() * h * h;
        }
    }
    total
}

/// Minimum of `‖lift(p) − lift(center)‖²` over the other mask nodes.
pub fn acausality_check(g: &GridGraph, center: usize) -> f64 {
    let c = g.lift(center);
    (0..g.len()).filter(|&k| k != center && g.mask[k]).map(|k| (g.lift(k) - c).norm2()).fold(f64::INFINITY, f64::min)
}

/// The finiteness bound `8 / (ε(2 − ε))` for graphs with gradient at most `1 − ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiWangBound {
    pub value: f64,
    /// Set when `ε < 1e−6`, where the bound is numerically meaningless.
    pub divergent: bool,
}

pub fn li_wang_bound(eps: f64) -> Result<LiWangBound> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("li_wang_bound needs 0 < eps ≤ 1, got {eps}")));
    }
    Ok(LiWangBound { value: 8.0 / (eps * (2.0 - eps)), divergent: eps < 1e-6 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportCount {
    pub k: usize,
    pub within_bound: bool,
    /// Largest gradient norm among the graphs, for auditing the hypothesis.
    pub max_gradient: f64,
}

/// Counts graphs with pairwise disjoint supports and compares with the bound.
pub fn disjoint_support_count(graphs: &[GridGraph], eps: f64) -> Result<SupportCount> {
    let bound = li_wang_bound(eps)?;
    for a in 0..graphs.len() {
        for b in a + 1..graphs.len() {
            let (ga, gb) = (&graphs[a], &graphs[b]);
            let overlap = (0..ga.len()).filter(|&k| ga.mask[k]).any(|k| {
                let x = ga.xy(k);
                let i = ((x[0] - gb.origin[0]) / gb.h).round();
                let j = ((x[1] - gb.origin[1]) / gb.h).round();
                i >= 0.0
                    && j >= 0.0
                    && (i as usize) < gb.nx
                    && (j as usize) < gb.ny
                    && gb.mask[gb.idx(i as usize, j as usize)]
            });
            if overlap {
                return Err(Error::Overlap { a, b });
            }
        }
    }
    let k = graphs.len();
    Ok(SupportCount {
        k,
        within_bound: (k as f64) <= bound.value,
        max_gradient: graphs.iter().map(GridGraph::max_gradient).fold(0.0, f64::max),
    })
}

/// Boundary nodes of a mask in traversal order.
///
/// The walk starts at the lowest-index boundary node and repeatedly steps to
/// the first unvisited boundary node met when scanning the 8 neighbours
/// counter-clockwise, beginning a quarter turn clockwise of the last step. For
/// masks whose boundary is a simple 8-connected loop this visits every node
/// once in order; any node the walk misses is appended in index order.
pub fn trace_boundary(g: &GridGraph) -> Vec<usize> {
    const DIRS8: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    let nodes = g.boundary_nodes();
    let mut is_b = vec![false; g.len()];
    for &k in &nodes {
        is_b[k] = true;
    }
    let mut seen = vec![false; g.len()];
    let mut order = Vec::with_capacity(nodes.len());
    let Some(&start) = nodes.first() else { return order };
    let (mut cur, mut last_dir) = (start, 0usize);
    seen[cur] = true;
    order.push(cur);
    loop {
        let mut next = None;
        for s in 0..8 {
            let d = (last_dir + 6 + s) % 8;
            if let Some(n) = g.offset(cur, DIRS8[d].0, DIRS8[d].1) {
                if is_b[n] && !seen[n] {
                    next = Some((n, d));
                    break;
                }
            }
        }
        let Some((n, d)) = next else { break };
        seen[n] = true;
        order.push(n);
        cur = n;
        last_dir = d;
    }
    order.extend(nodes.into_iter().filter(|&k| !seen[k]));
    order
}

/// Dirichlet data on the traced boundary of a mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundaryData {
    pub fn from_fn(domain: &GridGraph, f: impl Fn([f64; 2]) -> f64) -> Self {
        let nodes = trace_boundary(domain);
        let values = nodes.iter().map(|&k| f(domain.xy(k))).collect();
        BoundaryData { nodes, values }
    }

    /// Writes `index,value` rows, the index being the position along the trace.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,value")?;
        for (n, v) in self.values.iter().enumerate() {
            writeln!(w, "{n},{}", fmt_f64(*v))?;
        }
        Ok(())
    }

    /// Reads `index,value` rows against the traced boundary of `domain`; every
    /// boundary position must be given exactly once.
    pub fn read_csv<R: BufRead>(domain: &GridGraph, r: R) -> Result<Self> {
        let nodes = trace_boundary(domain);
        let mut values = vec![f64::NAN; nodes.len()];
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("index")) {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad boundary row '{line}'")))?;
            let idx: usize = a.trim().parse().map_err(|_| Error::Parse(format!("bad index '{a}'")))?;
            if idx >= nodes.len() {
                return Err(Error::Parse(format!("index {idx} beyond {} boundary nodes", nodes.len())));
            }
            if !values[idx].is_nan() {
                return Err(Error::Parse(format!("index {idx} given twice")));
            }
            values[idx] = parse_f64(b)?;
        }
        if let Some(missing) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Parse(format!("no value for boundary index {missing}")));
        }
        Ok(BoundaryData { nodes, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Gradients are clamped at `1 − eps_reg` inside the flux.
    pub eps_reg: f64,
    /// Stop when the largest per-node flux imbalance `h·|div|` is at most `tol`.
    pub tol: f64,
    /// Iteration cap; `None` means `200·nx·ny`.
    pub max_iters: Option<usize>,
    /// Over-relaxation factor; `None` selects `2/(1 + sin(πh/D))` with `D` the
    /// larger side of the grid.
    pub relaxation: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { eps_reg: 1e-6, tol: 1e-10, max_iters: None, relaxation: None }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps_reg > 0.0 && self.eps_reg < 1.0) {
            return Err(Error::Config(format!("eps_reg {} must lie in (0, 1)", self.eps_reg)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol {} must be positive", self.tol)));
        }
        if let Some(w) = self.relaxation {
            if !(w > 0.0 && w < 2.0) {
                return Err(Error::Config(format!("relaxation {w} must lie in (0, 2)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `max h·|div|`.
    pub residual: f64,
    pub relaxation: f64,
    /// Nodes with a clamped face in the final state.
    pub clamped_nodes: usize,
    /// The data was fully lightlike and the interpolant was returned directly.
    pub degenerate: bool,
    /// `(iteration, residual)` at every convergence check.
    pub history: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauSolution {
    pub graph: GridGraph,
    pub stats: SolveStats,
}

/// Shortest 8-neighbour path lengths inside the mask from `src`.
fn dijkstra8(g: &GridGraph, src: usize) -> Vec<f64> {
    #[derive(PartialEq)]
    struct Key(f64);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Key {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&o.0)
        }
    }
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Key(0.0), src)));
    while let Some(Reverse((Key(d), k))) = heap.pop() {
        if d > dist[k] {
            continue;
        }
        for dj in -1..=1isize {
            for di in -1..=1isize {
                if di == 0 && dj == 0 {
                    continue;
                }
                if let Some(n) = g.masked_offset(k, di, dj) {
                    let nd = d + g.h * ((di * di + dj * dj) as f64).sqrt();
                    if nd < dist[n] {
                        dist[n] = nd;
                        heap.push(Reverse((Key(nd), n)));
                    }
                }
            }
        }
    }
    dist
}

/// True when every point of the segment between two nodes rounds to a mask node.
fn visible(g: &GridGraph, a: usize, b: usize) -> bool {
    let (pa, pb) = (g.xy(a), g.xy(b));
    let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
    let steps = (2.0 * len / g.h).ceil() as usize;
    (0..=steps).all(|s| {
        let t = if steps == 0 { 0.0 } else { s as f64 / steps as f64 };
        let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
        let i = ((x[0] - g.origin[0]) / g.h).round();
        let j = ((x[1] - g.origin[1]) / g.h).round();
        i >= 0.0 && j >= 0.0 && (i as usize) < g.nx && (j as usize) < g.ny && g.mask[g.idx(i as usize, j as usize)]
    })
}

/// Checks `|t(p) − t(q)| ≤ d_Ω(p, q) + 2h` for all boundary pairs. The inner
/// distance is the Euclidean one when the segment stays in the mask and the
/// 8-neighbour path length otherwise; since both bound it from above only
/// pairs failing the Euclidean test need the expensive distance.
pub fn check_admissible(domain: &GridGraph, bd: &BoundaryData) -> Result<()> {
    let slack = 2.0 * domain.h;
    let n = bd.nodes.len();
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; n];
    #[allow(clippy::needless_range_loop)]
    for a in 0..n {
        for b in a + 1..n {
            let (p, q) = (bd.nodes[a], bd.nodes[b]);
            let dt = (bd.values[a] - bd.values[b]).abs();
            let (xp, xq) = (domain.xy(p), domain.xy(q));
            let euclid = (xp[0] - xq[0]).hypot(xp[1] - xq[1]);
            if dt <= euclid + slack {
                continue;
            }
            let dist = if visible(domain, p, q) {
                euclid
            } else {
                let d = cache[a].get_or_insert_with(|| dijkstra8(domain, p))[q];
                d.max(euclid)
            };
            if dt > dist + slack {
                return Err(Error::Admissibility { p, q, dt, dist });
            }
        }
    }
    Ok(())
}

/// How far a solution leaves the bounds implied by its boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullViolation {
    /// Largest excess of an interior value over the boundary maximum, or
    /// deficit under the boundary minimum; zero or negative when respected.
    pub maximum_principle: f64,
    /// Largest excess of a support function of the lifted graph over that of
    /// the lifted boundary, over a fixed set of directions.
    pub convex_hull: f64,
}

/// Checks the maximum principle and the convex hull property of a graph
/// against its boundary data, using 256 directions spread over the sphere.
pub fn hull_violation(g: &GridGraph, bd: &BoundaryData) -> HullViolation {
    let (lo, hi) = bd.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let inside: Vec<usize> = (0..g.len()).filter(|&k| g.is_interior(k)).collect();
    let maximum_principle = inside.iter().map(|&k| (g.u[k] - hi).max(lo - g.u[k])).fold(f64::NEG_INFINITY, f64::max);
    let n = 256;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let boundary: Vec<LorentzVec> =
        bd.nodes.iter().zip(&bd.values).map(|(&k, &v)| LorentzVec::new(g.xy(k)[0], g.xy(k)[1], v)).collect();
    let convex_hull = (0..n)
        .into_par_iter()
        .map(|m| {
            let z = 1.0 - (2 * m + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let dir = LorentzVec::new(r * (golden * m as f64).cos(), r * (golden * m as f64).sin(), z);
            let dot = |p: LorentzVec| p.x1 * dir.x1 + p.x2 * dir.x2 + p.t * dir.t;
            let support = boundary.iter().map(|&p| dot(p)).fold(f64::NEG_INFINITY, f64::max);
            inside.iter().map(|&k| dot(g.lift(k)) - support).fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    HullViolation { maximum_principle, convex_hull }
}

/// Lower and upper 1-Lipschitz (McShane) extensions of the boundary data
/// with Euclidean distances, evaluated at every mask node.
fn mcshane_bounds(domain: &GridGraph, bd: &BoundaryData) -> Vec<(f64, f64)> {
    let pts: Vec<([f64; 2], f64)> = bd.nodes.iter().zip(&bd.values).map(|(&k, &v)| (domain.xy(k), v)).collect();
    (0..domain.len())
        .into_par_iter()
        .map(|k| {
            if !domain.mask[k] {
                return (f64::NAN, f64::NAN);
            }
            let x = domain.xy(k);
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for &(y, t) in &pts {
                let d = (x[0] - y[0]).hypot(x[1] - y[1]);
                lo = lo.max(t - d);
                hi = hi.min(t + d);
            }
            (lo, hi)
        })
        .collect()
}

/// Solves the Dirichlet problem for the maximal surface equation.
///
/// Lagged-weight (Picard) iteration: the face weights `1/√(1 − |∇u|²)` are
/// frozen at the current iterate and the resulting linear problem is relaxed
/// by red-black successive over-relaxation, to a tolerance tied to the
/// current nonlinear residual. The first solve uses unit weights, which gives
/// the harmonic extension as a smooth starting point. All nodes of one colour
/// are updated from the same state, so the result does not depend on the
/// number of worker threads. `iterations` counts relaxation sweeps.
///
/// When the upper and lower Lipschitz extensions of the data coincide (fully
/// lightlike data), their common value is returned without iterating.
pub fn solve_plateau(bd: &BoundaryData, domain: &GridGraph, cfg: &SolverConfig) -> Result<PlateauSolution> {
    cfg.validate()?;
    if bd.nodes.len() != bd.values.len() || bd.nodes.is_empty() {
        return Err(Error::Config("boundary data is empty or inconsistent".into()));
    }
    let mut expected = domain.boundary_nodes();
    let mut given = bd.nodes.clone();
    expected.sort_unstable();
    given.sort_unstable();
    if expected != given {
        return Err(Error::Config("boundary data does not cover the mask boundary".into()));
    }
    check_admissible(domain, bd)?;

    let mut g = GridGraph { u: vec![f64::NAN; domain.len()], ..domain.clone() };
    for (&k, &v) in bd.nodes.iter().zip(&bd.values) {
        g.u[k] = v;
    }
    let bounds = mcshane_bounds(domain, bd);
    let interior: Vec<usize> = (0..g.len()).filter(|&k| g.is_interior(k)).collect();
    let scale = 1.0 + bd.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = interior.iter().map(|&k| (bounds[k].1 - bounds[k].0).abs()).fold(0.0, f64::max);
    for &k in &interior {
        g.u[k] = 0.5 * (bounds[k].0 + bounds[k].1);
    }
    let omega = cfg.relaxation.unwrap_or_else(|| {
        let diam = (g.nx.max(g.ny) - 1) as f64 * g.h;
        2.0 / (1.0 + (std::f64::consts::PI * g.h / diam).sin())
    });
    let imbalance = |g: &GridGraph| -> (f64, usize) {
        let r: Vec<(f64, bool)> = interior.par_iter().map(|&k| flux_sum(g, &g.u, k, cfg.eps_reg)).collect();
        (r.iter().fold(0.0, |m, x| m.max(x.0.abs())), r.iter().filter(|x| x.1).count())
    };
    if interior.is_empty() || gap <= 1e-9 * scale {
        let (residual, clamped_nodes) = imbalance(&g);
        let stats = SolveStats {
            iterations: 0,
            residual,
            relaxation: omega,
            clamped_nodes,
            degenerate: !interior.is_empty(),
            history: vec![],
        };
        return Ok(PlateauSolution { graph: g, stats });
    }

    let colors: [Vec<usize>; 2] = [0, 1].map(|c| {
        interior
            .iter()
            .copied()
            .filter(|&k| {
                let (i, j) = g.ij(k);
                (i + j) % 2 == c
            })
            .collect()
    });
    let max_iters = cfg.max_iters.unwrap_or(200 * g.nx * g.ny);
    let check_every = 10;
    let mut history = vec![];
    let mut iterations = 0;
    // Face weights of each interior node in DIRS4 order, with its neighbours.
    let neighbours: Vec<[usize; 4]> =
        interior.iter().map(|&k| [0, 1, 2, 3].map(|d| face_derivatives(&g, &g.u, k, d).0)).collect();
    let slot: Vec<Option<usize>> = {
        let mut s = vec![None; g.len()];
        for (n, &k) in interior.iter().enumerate() {
            s[k] = Some(n);
        }
        s
    };
    let color_slots: [Vec<usize>; 2] = [0, 1].map(|c| colors[c].iter().map(|&k| slot[k].expect("interior")).collect());
    // The first linear solve uses unit weights, i.e. the harmonic extension.
    let mut weights: Vec<[f64; 4]> = vec![[1.0; 4]; interior.len()];
    let mut nonlinear = scale;
    loop {
        // The harmonic step is solved fully: a loosely relaxed start can have
        // local gradients near the light cone, which freezes huge weights.
        let inner_tol = if history.is_empty() { 0.1 * cfg.tol } else { (0.1 * cfg.tol).max(1e-2 * nonlinear) };
        loop {
            for slots in &color_slots {
                let updates: Vec<f64> = slots
                    .par_iter()
                    .map(|&n| {
                        let k = interior[n];
                        let (mut num, mut den) = (0.0, 0.0);
                        for d in 0..4 {
                            num += weights[n][d] * g.u[neighbours[n][d]];
                            den += weights[n][d];
                        }
                        g.u[k] + omega * (num / den - g.u[k])
                    })
                    .collect();
                for (&n, v) in slots.iter().zip(updates) {
                    g.u[interior[n]] = v;
                }
            }
            iterations += 1;
            if iterations % check_every == 0 || iterations >= max_iters {
                let linear = (0..interior.len())
                    .into_par_iter()
                    .map(|n| {
                        let k = interior[n];
                        (0..4).map(|d| weights[n][d] * (g.u[neighbours[n][d]] - g.u[k])).sum::<f64>().abs() / g.h
                    })
                    .reduce(|| 0.0, f64::max);
                if linear <= inner_tol || !linear.is_finite() || iterations >= max_iters {
                    break;
                }
            }
        }
        let (res, clamped_nodes) = imbalance(&g);
        history.push((iterations, res));
        nonlinear = res;
        if !res.is_finite() {
            return Err(Error::Convergence { iterations, residual: res });
        }
        if res <= cfg.tol {
            let stats =
                SolveStats { iterations, residual: res, relaxation: omega, clamped_nodes, degenerate: false, history };
            return Ok(PlateauSolution { graph: g, stats });
        }
        if iterations >= max_iters {
            return Err(Error::Convergence { iterations, residual: res });
        }
        weights = interior
            .par_iter()
            .map(|&k| {
                [0, 1, 2, 3].map(|d| {
                    let (_, p, q) = face_derivatives(&g, &g.u, k, d);
                    maximal_weight(p * p + q * q, cfg.eps_reg).0
                })
            })
            .collect();
    }
}

/// Result of integrating a conjugate 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateGraph {
    pub graph: GridGraph,
    /// Largest cell circulation of the integrated form divided by `h²`, over
    /// cells whose corners are all interior nodes.
    pub loop_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateOptions {
    /// Gradients at or above `1 − singular_tol` make the graph singular.
    pub singular_tol: f64,
    /// Largest admissible loop residual.
    pub exactness_tol: f64,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        ConjugateOptions { singular_tol: 1e-6, exactness_tol: 1e-2 }
    }
}

/// Integrates the closed form `a dx1 + b dx2` given at the nodes along a
/// breadth-first spanning tree from `anchor` with the trapezoid rule.
fn integrate_form(g: &GridGraph, coef: &[[f64; 2]], anchor: usize, tol: f64) -> Result<ConjugateGraph> {
    if anchor >= g.len() || !g.mask[anchor] {
        return Err(Error::Config(format!("anchor node {anchor} is not in the mask")));
    }
    let mut out = GridGraph { u: vec![f64::NAN; g.len()], ..g.clone() };
    out.u[anchor] = 0.0;
    let mut queue = VecDeque::from([anchor]);
    while let Some(k) = queue.pop_front() {
        for (d, &(di, dj)) in DIRS4.iter().enumerate() {
            if let Some(n) = g.masked_offset(k, di, dj) {
                if out.u[n].is_nan() {
                    let axis = if d % 2 == 0 { 0 } else { 1 };
                    let sign = (di + dj) as f64;
                    out.u[n] = out.u[k] + sign * 0.5 * (coef[k][axis] + coef[n][axis]) * g.h;
                    queue.push_back(n);
                }
            }
        }
    }
    for k in 0..g.len() {
        if g.mask[k] && out.u[k].is_nan() {
            return Err(Error::Config("mask is not connected".into()));
        }
    }
    let mut loop_residual: f64 = 0.0;
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let k = g.idx(i, j);
            let c = [k, k + 1, k + g.nx + 1, k + g.nx];
            // One-sided gradients at the mask boundary carry O(h) errors whose
            // curl is O(1), so only cells with central gradients are judged.
            if c.iter().any(|&n| !g.is_interior(n)) {
                continue;
            }
            let circ = 0.5
                * g.h
                * ((coef[c[0]][0] + coef[c[1]][0]) + (coef[c[1]][1] + coef[c[2]][1])
                    - (coef[c[2]][0] + coef[c[3]][0])
                    - (coef[c[3]][1] + coef[c[0]][1]));
            loop_residual = loop_residual.max(circ.abs() / (g.h * g.h));
        }
    }
    if loop_residual > tol {
        return Err(Error::Exactness { residual: loop_residual, tol });
    }
    Ok(ConjugateGraph { graph: out, loop_residual })
}

/// Conjugate function of a nonsingular maximal graph:
/// `√(1 − |∇u|²) du* = u_{x2} dx1 − u_{x1} dx2`, normalized by `u*(anchor) = 0`.
pub fn conjugate_graph(g: &GridGraph, anchor: usize, opts: &ConjugateOptions) -> Result<ConjugateGraph> {
    let mut coef = vec![[0.0; 2]; g.len()];
    for k in (0..g.len()).filter(|&k| g.mask[k]) {
        let [ux, uy] = g.gradient(k);
        let s = ux * ux + uy * uy;
        if s.sqrt() >= 1.0 - opts.singular_tol {
            return Err(Error::Singular { node: k, grad: s.sqrt() });
        }
        let w = (1.0 - s).sqrt();
        coef[k] = [uy / w, -ux / w];
    }
    integrate_form(g, &coef, anchor, opts.exactness_tol)
}

/// Inverse of [`conjugate_graph`]: recovers the maximal graph from a minimal
/// one through `du = (−u*_{x2} dx1 + u*_{x1} dx2)/√(1 + |∇u*|²)`.
pub fn maximal_from_minimal(g: &GridGraph, anchor: usize, opts: &ConjugateOptions) -> Result<ConjugateGraph> {
    let coef: Vec<[f64; 2]> = (0..g.len())
        .map(|k| {
            if !g.mask[k] {
                return [0.0; 2];
            }
            let [ux, uy] = g.gradient(k);
            let w = (1.0 + ux * ux + uy * uy).sqrt();
            [-uy / w, ux / w]
        })
        .collect();
    integrate_form(g, &coef, anchor, opts.exactness_tol)
}

/// A straight segment fitted to a cluster of singular nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSegment {
    pub nodes: Vec<usize>,
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Euclidean unit direction of the lifted segment, oriented upwards in `t`.
    pub direction: LorentzVec,
    /// Largest distance of a member node from the fitted line.
    pub fit_residual: f64,
    /// `|‖direction‖²|`, zero for a lightlike segment.
    pub lightlike_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularReport {
    pub tol: f64,
    pub nodes: Vec<usize>,
    pub segments: Vec<SingularSegment>,
    /// Clusters too small to fit a segment.
    pub points: Vec<Vec<usize>>,
}

const MIN_SEGMENT_NODES: usize = 4;
const ANGLE_BINS: usize = 16;

fn fit_segment(g: &GridGraph, nodes: Vec<usize>) -> SingularSegment {
    let n = nodes.len() as f64;
    let pts: Vec<[f64; 2]> = nodes.iter().map(|&k| g.xy(k)).collect();
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // Principal axis of the 2x2 scatter matrix.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut d = [theta.cos(), theta.sin()];
    let proj: Vec<f64> = pts.iter().map(|p| (p[0] - cx) * d[0] + (p[1] - cy) * d[1]).collect();
    let ubar = nodes.iter().map(|&k| g.u[k]).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (s, &k) in proj.iter().zip(&nodes) {
        num += s * (g.u[k] - ubar);
        den += s * s;
    }
    let mut slope = if den > 0.0 { num / den } else { 0.0 };
    let mut proj = proj;
    if slope < 0.0 {
        slope = -slope;
        d = [-d[0], -d[1]];
        proj.iter_mut().for_each(|s| *s = -*s);
    }
    let fit_residual = pts.iter().map(|p| ((p[0] - cx) * d[1] - (p[1] - cy) * d[0]).abs()).fold(0.0, f64::max);
    let smin = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dir = LorentzVec::new(d[0], d[1], slope);
    let direction = dir / dir.euclid_norm();
    SingularSegment {
        start: [cx + smin * d[0], cy + smin * d[1]],
        end: [cx + smax * d[0], cy + smax * d[1]],
        lightlike_defect: direction.norm2().abs(),
        direction,
        fit_residual,
        nodes,
    }
}

/// Flags nodes whose central-difference gradient has norm at least `1 − tol`,
/// groups them into 8-connected clusters and fits a segment to each.
///
/// A cluster wider than two cells is split by gradient direction into
/// angular bins first, so a fan of singular segments (as on a light cone)
/// yields one segment per direction rather than a single meaningless fit.
pub fn detect_singular(g: &GridGraph, tol: f64) -> SingularReport {
    let grads: Vec<Option<[f64; 2]>> = (0..g.len()).map(|k| g.central_gradient(k)).collect();
    let flagged: Vec<bool> = grads.iter().map(|gr| gr.is_some_and(|[a, b]| a.hypot(b) >= 1.0 - tol)).collect();
    let nodes: Vec<usize> = (0..g.len()).filter(|&k| flagged[k]).collect();
    let mut segments = vec![];
    let mut points = vec![];
    for comp in components_8(&flagged, g.nx, g.ny) {
        if comp.len() < MIN_SEGMENT_NODES {
            points.push(comp);
            continue;
        }
        let seg = fit_segment(g, comp);
        if seg.fit_residual <= 2.0 * g.h {
            segments.push(seg);
            continue;
        }
        for bin in 0..ANGLE_BINS {
            let mut sub = vec![false; g.len()];
            for &k in &seg.nodes {
                let [a, b] = grads[k].expect("flagged nodes have gradients");
                let ang = b.atan2(a).rem_euclid(std::f64::consts::TAU);
                let which = ((ang / std::f64::consts::TAU * ANGLE_BINS as f64) as usize).min(ANGLE_BINS - 1);
                sub[k] = which == bin;
            }
            for part in components_8(&sub, g.nx, g.ny) {
                if part.len() < MIN_SEGMENT_NODES {
                    points.push(part);
                } else {
                    segments.push(fit_segment(g, part));
                }
            }
        }
    }
    SingularReport { tol, nodes, segments, points }
}
