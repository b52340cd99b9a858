//! Axis-aligned boxes and the uniform point sets laid over them.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    axes: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(axes: Vec<(f64, f64)>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("domain needs at least one axis"));
        }
        if axes.len() > 2 {
            return Err(Error::UnsupportedDimension(axes.len()));
        }
        for &(lo, hi) in &axes {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(invalid(format!("empty or non-finite axis [{lo}, {hi}]")));
            }
        }
        Ok(Self { axes })
    }

    /// `[-1, 1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![(-1.0, 1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[(f64, f64)] {
        &self.axes
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.axes[axis].1 - self.axes[axis].0
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.length(a)).product()
    }

    /// Membership in the closed box, with a relative slack of `1e-12`.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.axes).all(|(v, &(lo, hi))| {
                let tol = 1e-12 * (hi - lo);
                *v >= lo - tol && *v <= hi + tol
            })
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!("point has {} coordinates, domain is {}-dimensional", x.len(), self.dim())));
        }
        if !self.contains(x) {
            return Err(invalid(format!("point {x:?} lies outside the domain")));
        }
        Ok(())
    }

    /// Tensor grid with `n` points per axis, first axis fastest. With
    /// `include_endpoints` the points are `linspace(lo, hi, n)`; otherwise the
    /// interior nodes of `linspace(lo, hi, n + 2)`.
    pub fn uniform_grid(&self, n: usize, include_endpoints: bool) -> Result<Vec<Vec<f64>>> {
        if n == 0 || (include_endpoints && n == 1) {
            return Err(invalid(format!("uniform grid needs more points per axis, got {n}")));
        }
        let axis_nodes: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|&(lo, hi)| {
                if include_endpoints {
                    linspace(lo, hi, n)
                } else {
                    let full = linspace(lo, hi, n + 2);
                    full[1..=n].to_vec()
                }
            })
            .collect();
        Ok(tensor_points(&axis_nodes))
    }

    /// Uniform grid holding `total` points: `total` per axis in 1D, `√total` per
    /// axis in 2D (which must then be a perfect square).
    pub fn uniform_points(&self, total: usize, include_endpoints: bool) -> Result<Vec<Vec<f64>>> {
        let n = per_axis_count(total, self.dim())?;
        self.uniform_grid(n, include_endpoints)
    }
}

/// Points per axis for a tensor grid holding `total` points.
pub fn per_axis_count(total: usize, dim: usize) -> Result<usize> {
    match dim {
        1 => Ok(total),
        2 => {
            let n = (total as f64).sqrt().round() as usize;
            if n * n != total {
                return Err(invalid(format!("2D point count {total} is not a perfect square")));
            }
            Ok(n)
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// Cartesian product of per-axis nodes, first axis varying fastest.
pub fn tensor_points(axis_nodes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    match axis_nodes.len() {
        1 => axis_nodes[0].iter().map(|&x| vec![x]).collect(),
        2 => {
            let mut out = Vec::with_capacity(axis_nodes[0].len() * axis_nodes[1].len());
            for &y in &axis_nodes[1] {
                for &x in &axis_nodes[0] {
                    out.push(vec![x, y]);
                }
            }
            out
        }
        _ => Vec::new(),
    }
}
