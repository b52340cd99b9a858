//! The benchmark problems, all written as `∂u/∂t + N(u) = 0`.
//!
//! Weak residuals are stored as a source and a flux so that for a test
//! function `v` the integrand reads `source·v + flux·∇v`.

use crate::domain::Domain;
use crate::error::{invalid, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Periodic,
}

/// Trial-function data at one point: `u[c]`, `grad[c][axis]`, `lap[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointState {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
    pub lap: Vec<f64>,
}

impl PointState {
    pub fn zeros(x: Vec<f64>, components: usize) -> Self {
        let d = x.len();
        Self { x, u: vec![0.0; components], grad: vec![vec![0.0; d]; components], lap: vec![0.0; components] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PdeProblem {
    /// `u_t = u_xx − ε⁻² u(u² − 1)` on `[−1, 1]`, homogeneous Dirichlet.
    AllenCahn1d { eps: f64 },
    /// `u_t + (u·∇)u = νΔu` for `u = (u, v)` on `[−1, 1]²`, homogeneous Dirichlet.
    Burgers2d { nu: f64 },
    /// `u_t = αΔu + u(1 − u)` on `[−1, 1]²`, homogeneous Neumann.
    HeatReaction2d { alpha: f64 },
    /// `u_t = Δ(u²) − ∇·(Vu)` with `V = ∇(sin πx sin πy)` on `[−1, 1]²`, periodic.
    PmeDrift2d,
}

pub const ALLEN_CAHN_EPS: f64 = 0.002;
pub const BURGERS_NU: f64 = 0.05;
pub const HEAT_ALPHA: f64 = 0.1;

impl PdeProblem {
    pub fn allen_cahn() -> Self {
        PdeProblem::AllenCahn1d { eps: ALLEN_CAHN_EPS }
    }

    pub fn burgers() -> Self {
        PdeProblem::Burgers2d { nu: BURGERS_NU }
    }

    pub fn heat() -> Self {
        PdeProblem::HeatReaction2d { alpha: HEAT_ALPHA }
    }

    pub fn pme() -> Self {
        PdeProblem::PmeDrift2d
    }

    pub fn validate(&self) -> Result<()> {
        let (name, c) = match *self {
            PdeProblem::AllenCahn1d { eps } => ("eps", eps),
            PdeProblem::Burgers2d { nu } => ("nu", nu),
            PdeProblem::HeatReaction2d { alpha } => ("alpha", alpha),
            PdeProblem::PmeDrift2d => return Ok(()),
        };
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid(format!("{name} must be positive and finite, got {c}")));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            PdeProblem::AllenCahn1d { .. } => "allen-cahn",
            PdeProblem::Burgers2d { .. } => "burgers",
            PdeProblem::HeatReaction2d { .. } => "heat",
            PdeProblem::PmeDrift2d => "pme",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PdeProblem::AllenCahn1d { .. } => 1,
            _ => 2,
        }
    }

    pub fn domain(&self) -> Domain {
        Domain::unit(self.dim()).expect("unit box is valid")
    }

    pub fn components(&self) -> usize {
        match self {
            PdeProblem::Burgers2d { .. } => 2,
            _ => 1,
        }
    }

    pub fn boundary(&self) -> BoundaryKind {
        match self {
            PdeProblem::AllenCahn1d { .. } | PdeProblem::Burgers2d { .. } => BoundaryKind::Dirichlet,
            PdeProblem::HeatReaction2d { .. } => BoundaryKind::Neumann,
            PdeProblem::PmeDrift2d => BoundaryKind::Periodic,
        }
    }

    pub fn initial_condition(&self, x: &[f64]) -> Vec<f64> {
        match self {
            PdeProblem::AllenCahn1d { .. } => vec![0.08 * (PI * x[0]).sin()],
            PdeProblem::Burgers2d { .. } => {
                let s = 0.5 * (PI * x[0]).sin() * (PI * x[1]).sin();
                vec![s, s]
            }
            PdeProblem::HeatReaction2d { .. } => vec![(PI * x[0]).cos() * (PI * x[1]).cos()],
            PdeProblem::PmeDrift2d => vec![1.0 + 0.5 * (PI * x[0]).cos() * (PI * x[1]).cos()],
        }
    }

    pub fn check_state(&self, st: &PointState) -> Result<()> {
        let (m, d) = (self.components(), self.dim());
        if st.x.len() != d || st.u.len() != m || st.lap.len() != m || st.grad.len() != m || st.grad.iter().any(|g| g.len() != d) {
            return Err(invalid(format!("point state does not match a {d}-dimensional problem with {m} components")));
        }
        Ok(())
    }

    /// `N(u)` per component.
    pub fn strong_residual(&self, st: &PointState) -> Vec<f64> {
        match *self {
            PdeProblem::AllenCahn1d { eps } => {
                let u = st.u[0];
                vec![-st.lap[0] + u * (u * u - 1.0) / (eps * eps)]
            }
            PdeProblem::Burgers2d { nu } => {
                let (u, v) = (st.u[0], st.u[1]);
                (0..2).map(|c| -nu * st.lap[c] + u * st.grad[c][0] + v * st.grad[c][1]).collect()
            }
            PdeProblem::HeatReaction2d { alpha } => {
                let u = st.u[0];
                vec![-alpha * st.lap[0] - u * (1.0 - u)]
            }
            PdeProblem::PmeDrift2d => {
                let u = st.u[0];
                let g = &st.grad[0];
                let vel = drift_velocity(st.x[0], st.x[1]);
                let div = drift_divergence(st.x[0], st.x[1]);
                let grad2 = g[0] * g[0] + g[1] * g[1];
                vec![-2.0 * (grad2 + u * st.lap[0]) + vel[0] * g[0] + vel[1] * g[1] + u * div]
            }
        }
    }

    /// Source `s_c` and flux `F_c` of the weak residual, integrand `s_c·v + F_c·∇v`.
    pub fn weak_parts(&self, st: &PointState) -> (Vec<f64>, Vec<Vec<f64>>) {
        match *self {
            PdeProblem::AllenCahn1d { eps } => {
                let u = st.u[0];
                (vec![u * (u * u - 1.0) / (eps * eps)], vec![vec![st.grad[0][0]]])
            }
            PdeProblem::Burgers2d { nu } => {
                let (u, v) = (st.u[0], st.u[1]);
                let source = (0..2).map(|c| u * st.grad[c][0] + v * st.grad[c][1]).collect();
                let flux = (0..2).map(|c| vec![nu * st.grad[c][0], nu * st.grad[c][1]]).collect();
                (source, flux)
            }
            PdeProblem::HeatReaction2d { alpha } => {
                let u = st.u[0];
                (vec![-u * (1.0 - u)], vec![vec![alpha * st.grad[0][0], alpha * st.grad[0][1]]])
            }
            PdeProblem::PmeDrift2d => {
                let u = st.u[0];
                let vel = drift_velocity(st.x[0], st.x[1]);
                let g = &st.grad[0];
                (vec![0.0], vec![vec![2.0 * u * g[0] - vel[0] * u, 2.0 * u * g[1] - vel[1] * u]])
            }
        }
    }

    /// Weak residual integrand per component for one test function.
    pub fn weak_integrand(&self, st: &PointState, v: f64, gradv: &[f64]) -> Vec<f64> {
        let (s, f) = self.weak_parts(st);
        s.iter()
            .zip(&f)
            .map(|(sc, fc)| sc * v + fc.iter().zip(gradv).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

/// Drift potential `sin πx sin πy`.
pub fn drift_potential(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

pub fn drift_velocity(x: f64, y: f64) -> [f64; 2] {
    [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()]
}

/// `∇·V = −2π² sin πx sin πy`.
pub fn drift_divergence(x: f64, y: f64) -> f64 {
    -2.0 * PI * PI * drift_potential(x, y)
}
