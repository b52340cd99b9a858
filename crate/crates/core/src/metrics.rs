//! Error norms, boundary flux errors and energies.

use crate::domain::Domain;
use crate::error::{invalid, Error, Result};
use crate::trial::TrialSpace;

/// Points per axis of the evaluation grid (endpoints included).
pub fn evaluation_nodes(dim: usize) -> usize {
    if dim == 1 {
        256
    } else {
        64
    }
}

/// Uniform evaluation grid for `domain`, first axis fastest.
pub fn evaluation_points(domain: &Domain) -> Vec<Vec<f64>> {
    domain.uniform_grid(evaluation_nodes(domain.dim()), true).expect("evaluation grid is valid")
}

/// `‖pred − ref‖₂ / ‖ref‖₂` over all entries.
pub fn l2_relative_error(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(invalid(format!("prediction has {} values, reference {}", pred.len(), reference.len())));
    }
    let den: f64 = reference.iter().map(|r| r * r).sum();
    if den == 0.0 {
        return Err(Error::UndefinedReference);
    }
    let num: f64 = pred.iter().zip(reference).map(|(p, r)| (p - r) * (p - r)).sum();
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn name(&self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        }
    }

    /// `(normal axis, outward sign, fixed coordinate is the upper end)`.
    fn geometry(&self) -> (usize, f64, bool) {
        match self {
            Edge::Left => (0, -1.0, false),
            Edge::Right => (0, 1.0, true),
            Edge::Bottom => (1, -1.0, false),
            Edge::Top => (1, 1.0, true),
        }
    }

    /// `samples` points at the midpoints of equal subdivisions of the edge.
    pub fn sample_points(&self, domain: &Domain, samples: usize) -> Vec<Vec<f64>> {
        let (axis, _, upper) = self.geometry();
        let (lo, hi) = domain.axes()[axis];
        let fixed = if upper { hi } else { lo };
        let (tlo, thi) = domain.axes()[1 - axis];
        (0..samples)
            .map(|k| {
                let t = tlo + (thi - tlo) * (k as f64 + 0.5) / samples as f64;
                let mut x = vec![0.0; 2];
                x[axis] = fixed;
                x[1 - axis] = t;
                x
            })
            .collect()
    }
}

/// Mean over edge samples (and components) of `|∂u/∂n − expected|`, with the
/// outward normal derivative taken from `derivative(x, axis)`.
pub fn normal_derivative_error<F>(domain: &Domain, edge: Edge, expected: f64, samples: usize, mut derivative: F) -> Result<f64>
where
    F: FnMut(&[f64], usize) -> Result<Vec<f64>>,
{
    if domain.dim() != 2 {
        return Err(invalid("boundary gradient error is defined for 2D problems"));
    }
    if samples == 0 {
        return Err(invalid("need at least one boundary sample"));
    }
    let (axis, sign, _) = edge.geometry();
    let mut total = 0.0;
    let mut count = 0usize;
    for x in edge.sample_points(domain, samples) {
        for d in derivative(&x, axis)? {
            total += (sign * d - expected).abs();
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Mean `|∂u/∂n − expected|` of a trial function along one edge.
pub fn boundary_gradient_error(space: &TrialSpace, edge: Edge, expected: f64, samples: usize) -> Result<f64> {
    normal_derivative_error(space.domain(), edge, expected, samples, |x, axis| {
        Ok(space.eval_along(x, axis)?.iter().map(|v| v.d1).collect())
    })
}

/// Trapezoid weights of an `n`-per-axis node grid (endpoints included) with spacing `h`.
pub fn trapezoid_weights(n: usize, dim: usize, h: f64) -> Vec<f64> {
    let w1: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
    match dim {
        1 => w1,
        _ => {
            let mut w = Vec::with_capacity(n * n);
            for wy in &w1 {
                for wx in &w1 {
                    w.push(wx * wy);
                }
            }
            w
        }
    }
}

/// `Σ w_i u_i²` on a uniform grid with `n` nodes per axis and spacing `h`,
/// trapezoid weights at the edges.
pub fn energy(u: &[f64], n: usize, dim: usize, h: f64) -> Result<f64> {
    let w = trapezoid_weights(n, dim, h);
    if w.len() != u.len() {
        return Err(invalid(format!("grid of {} nodes given {} values", w.len(), u.len())));
    }
    Ok(u.iter().zip(&w).map(|(v, w)| w * v * v).sum())
}

/// `Σ w_i (u_i² − φ_i u_i)`: the free energy of the drift-diffusion porous
/// medium flow `u_t = ∇·(u∇(2u − φ))`, which it dissipates.
pub fn free_energy(u: &[f64], potential: &[f64], n: usize, dim: usize, h: f64) -> Result<f64> {
    let w = trapezoid_weights(n, dim, h);
    if w.len() != u.len() || potential.len() != u.len() {
        return Err(invalid("grid, field and potential sizes differ"));
    }
    Ok(u.iter().zip(potential).zip(&w).map(|((v, p), w)| w * (v * v - p * v)).sum())
}

/// True when no successive increase exceeds `1e-10·|E(0)|`.
pub fn is_monotone_decay(values: &[f64]) -> bool {
    let Some(first) = values.first() else { return true };
    let tol = 1e-10 * first.abs();
    values.windows(2).all(|w| w[1] - w[0] <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), times: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, time: f64, value: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if time < last {
                return Err(invalid(format!("series {} is not time-ordered ({time} after {last})", self.name)));
            }
        }
        self.times.push(time);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn monotone_decay(&self) -> bool {
        is_monotone_decay(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn l2_examples() {
        let r = [1.0, -2.0, 3.0];
        assert_eq!(l2_relative_error(&r, &r).unwrap(), 0.0);
        let p: Vec<f64> = r.iter().map(|v| 1.1 * v).collect();
        assert!((l2_relative_error(&p, &r).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(l2_relative_error(&[1.0], &[0.0]), Err(Error::UndefinedReference)));
    }

    #[test]
    fn energy_examples() {
        let n = 129;
        let h = 2.0 / (n - 1) as f64;
        assert_eq!(energy(&vec![0.0; n * n], n, 2, h).unwrap(), 0.0);
        assert!((energy(&vec![1.0; n * n], n, 2, h).unwrap() - 4.0).abs() < 1e-12);
        let mut u = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (-1.0 + h * i as f64, -1.0 + h * j as f64);
                u.push((PI * x).cos() * (PI * y).cos());
            }
        }
        assert!((energy(&u, n, 2, h).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_flag() {
        assert!(is_monotone_decay(&[3.0, 2.0, 2.0, 1.0]));
        assert!(!is_monotone_decay(&[3.0, 2.0, 2.1]));
        let mut s = MetricSeries::new("e");
        s.push(0.0, 1.0).unwrap();
        assert!(s.push(-1.0, 1.0).is_err());
    }

    #[test]
    fn analytic_neumann_field_has_zero_flux() {
        let d = Domain::unit(2).unwrap();
        for e in Edge::ALL {
            let err = normal_derivative_error(&d, e, 0.0, 50, |x, axis| {
                let (a, b) = (PI * x[0], PI * x[1]);
                Ok(vec![if axis == 0 { -PI * a.sin() * b.cos() } else { -PI * a.cos() * b.sin() }])
            })
            .unwrap();
            assert!(err < 1e-14, "{}", e.name());
        }
        assert!(normal_derivative_error(&Domain::unit(1).unwrap(), Edge::Left, 0.0, 5, |_, _| Ok(vec![0.0])).is_err());
    }
}
