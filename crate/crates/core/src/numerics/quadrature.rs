use crate::error::{invalid, Error, Result};
use std::f64::consts::PI;

/// One-dimensional quadrature rule on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

/// Gauss–Legendre rule with `n` nodes mapped to `[lo, hi]`.
///
/// Nodes are found by Newton iteration on `P_n` starting from the
/// Chebyshev-like guesses `cos(π(i + 3/4)/(n + 1/2))`.
pub fn gauss_legendre_1d(n: usize, lo: f64, hi: f64) -> Result<Rule1d> {
    if n == 0 {
        return Err(invalid("Gauss-Legendre rule needs at least one node"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("bad interval [{lo}, {hi}]")));
    }
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // nodes in ascending order
        ref_nodes[i] = -x;
        ref_nodes[n - 1 - i] = x;
        ref_weights[i] = w;
        ref_weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let half_len = 0.5 * (hi - lo);
    Ok(Rule1d {
        nodes: ref_nodes.iter().map(|x| mid + half_len * x).collect(),
        weights: ref_weights.iter().map(|w| w * half_len).collect(),
        lo,
        hi,
    })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Tensor-product quadrature over a 1D or 2D box.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: Vec<(f64, f64)>,
}

impl QuadratureGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn volume(&self) -> f64 {
        self.domain.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Cartesian product of per-axis rules; the first axis varies fastest.
pub fn tensor_grid(rules: &[Rule1d]) -> Result<QuadratureGrid> {
    match rules.len() {
        0 => Err(invalid("tensor grid needs at least one axis")),
        1 => {
            let r = &rules[0];
            Ok(QuadratureGrid {
                dim: 1,
                nodes: r.nodes.clone(),
                weights: r.weights.clone(),
                domain: vec![(r.lo, r.hi)],
            })
        }
        2 => {
            let (rx, ry) = (&rules[0], &rules[1]);
            let n = rx.nodes.len() * ry.nodes.len();
            let mut nodes = Vec::with_capacity(2 * n);
            let mut weights = Vec::with_capacity(n);
            for (y, wy) in ry.nodes.iter().zip(&ry.weights) {
                for (x, wx) in rx.nodes.iter().zip(&rx.weights) {
                    nodes.push(*x);
                    nodes.push(*y);
                    weights.push(wx * wy);
                }
            }
            Ok(QuadratureGrid { dim: 2, nodes, weights, domain: vec![(rx.lo, rx.hi), (ry.lo, ry.hi)] })
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Gauss–Legendre tensor rule with `n` nodes per axis over a box.
pub fn gauss_legendre_grid(axes: &[(f64, f64)], n: usize) -> Result<QuadratureGrid> {
    let rules = axes.iter().map(|&(lo, hi)| gauss_legendre_1d(n, lo, hi)).collect::<Result<Vec<_>>>()?;
    tensor_grid(&rules)
}
