//! Parameter time stepping: assemble `(J, N)` from the current trial function,
//! solve `JᵀJγ = −JᵀN`, advance `W ← W + Δt·γ`.
//!
//! Strong systems have one row per (collocation point, component), point-major.
//! Weak systems have one row per (component, test function), component-major,
//! so row `c·K + k` projects component `c` onto `v_k`.

use crate::basis::{BasisKind, TestBasis};
use crate::error::{invalid, Error, Result};
use crate::numerics::matrix::norm2 as norm;
use crate::numerics::{condition_number, solve_least_squares, DenseMatrix, LstsqMethod, QuadratureGrid};
use crate::pde::{PdeProblem, PointState};
use crate::trial::TrialSpace;
use nalgebra::DMatrixView;
use std::time::Instant;

/// Assembled update system.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub jacobian: DenseMatrix,
    pub residual: Vec<f64>,
}

/// Test functions tabulated at quadrature nodes and premultiplied by the weights.
#[derive(Debug, Clone)]
pub struct WeakProjector {
    kind: BasisKind,
    points: Vec<Vec<f64>>,
    /// `w_i v_k(x_i)`, `K × N_x`.
    values: DenseMatrix,
    /// `w_i ∂v_k/∂x_a(x_i)` per axis `a`.
    grads: Vec<DenseMatrix>,
}

impl WeakProjector {
    pub fn new(quad: &QuadratureGrid, basis: &TestBasis) -> Result<Self> {
        if quad.dim() != basis.domain().dim() {
            return Err(invalid("quadrature and test basis live in different dimensions"));
        }
        let (k, n, d) = (basis.len(), quad.len(), quad.dim());
        let mut values = DenseMatrix::zeros(k, n);
        let mut grads = vec![DenseMatrix::zeros(k, n); d];
        let mut points = Vec::with_capacity(n);
        for (i, (x, w)) in quad.points().zip(quad.weights()).enumerate() {
            let (v, g) = basis.eval_all(x)?;
            for kk in 0..k {
                values.set(kk, i, w * v[kk]);
                for (a, ga) in grads.iter_mut().enumerate() {
                    ga.set(kk, i, w * g[kk][a]);
                }
            }
            points.push(x.to_vec());
        }
        Ok(Self { kind: basis.kind(), points, values, grads })
    }

    pub fn basis_kind(&self) -> BasisKind {
        self.kind
    }

    pub fn test_count(&self) -> usize {
        self.values.rows()
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

#[derive(Debug, Clone)]
pub enum SolverKind {
    Strong { points: Vec<Vec<f64>> },
    Weak { projector: WeakProjector },
}

impl SolverKind {
    pub fn strong(points: Vec<Vec<f64>>) -> Self {
        SolverKind::Strong { points }
    }

    pub fn weak(quad: &QuadratureGrid, basis: &TestBasis) -> Result<Self> {
        Ok(SolverKind::Weak { projector: WeakProjector::new(quad, basis)? })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Strong { .. } => "strong",
            SolverKind::Weak { .. } => "weak",
        }
    }

    pub fn assemble(&self, space: &TrialSpace, problem: &PdeProblem) -> Result<LinearSystem> {
        match self {
            SolverKind::Strong { points } => assemble_strong(space, problem, points),
            SolverKind::Weak { projector } => assemble_weak_with(space, problem, projector),
        }
    }
}

fn check_compat(space: &TrialSpace, problem: &PdeProblem) -> Result<()> {
    if space.dim() != problem.dim() || space.components() != problem.components() {
        return Err(invalid(format!(
            "trial space ({}D, {} components) does not fit problem {}",
            space.dim(),
            space.components(),
            problem.name()
        )));
    }
    Ok(())
}

fn non_finite(what: &str, x: &[f64]) -> Error {
    Error::Numeric(format!("non-finite {what} at x = {x:?}"))
}

/// Collocation system: `J[(i, c), j] = ∂u_c(x_i)/∂W_j`, `N[(i, c)] = N(u)_c(x_i)`.
pub fn assemble_strong(space: &TrialSpace, problem: &PdeProblem, points: &[Vec<f64>]) -> Result<LinearSystem> {
    check_compat(space, problem)?;
    if points.is_empty() {
        return Err(invalid("strong assembly needs collocation points"));
    }
    let m = space.components();
    let mut residual = Vec::with_capacity(points.len() * m);
    for x in points {
        space.domain().check_point(x)?;
        let st = space.state(x)?;
        let r = problem.strong_residual(&st);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(non_finite("strong residual", x));
        }
        residual.extend(r);
    }
    let jacobian = space.param_jacobian(points)?;
    if !jacobian.is_finite() {
        return Err(Error::Numeric("non-finite entries in the collocation Jacobian".into()));
    }
    Ok(LinearSystem { jacobian, residual })
}

/// Weak system built from a fresh projector.
pub fn assemble_weak(space: &TrialSpace, problem: &PdeProblem, quad: &QuadratureGrid, basis: &TestBasis) -> Result<LinearSystem> {
    assemble_weak_with(space, problem, &WeakProjector::new(quad, basis)?)
}

/// `J[(c, k), j] = Σ_i w_i ∂u_c(x_i)/∂W_j v_k(x_i)` and
/// `N[(c, k)] = Σ_i w_i (s_c v_k + F_c·∇v_k)(x_i)`.
pub fn assemble_weak_with(space: &TrialSpace, problem: &PdeProblem, proj: &WeakProjector) -> Result<LinearSystem> {
    check_compat(space, problem)?;
    if !proj.kind.compatible_with(problem.boundary()) {
        return Err(Error::Config(format!(
            "{} test functions do not fit the {:?} boundary of {}",
            proj.kind.name(),
            problem.boundary(),
            problem.name()
        )));
    }
    let m = space.components();
    let d = space.dim();
    let (k, n, p) = (proj.test_count(), proj.node_count(), space.param_count());
    if proj.grads.len() != d {
        return Err(invalid("projector dimension does not match the trial space"));
    }
    // Sources and fluxes per component, node-indexed.
    let mut source = vec![vec![0.0; n]; m];
    let mut flux = vec![vec![vec![0.0; n]; d]; m];
    for (i, x) in proj.points.iter().enumerate() {
        let st: PointState = space.state(x)?;
        let (s, f) = problem.weak_parts(&st);
        for c in 0..m {
            if !s[c].is_finite() || f[c].iter().any(|v| !v.is_finite()) {
                return Err(non_finite("weak integrand", x));
            }
            source[c][i] = s[c];
            for a in 0..d {
                flux[c][a][i] = f[c][a];
            }
        }
    }
    let mut residual = vec![0.0; m * k];
    for c in 0..m {
        let mut r = proj.values.matvec(&source[c]);
        for a in 0..d {
            for (ri, gi) in r.iter_mut().zip(proj.grads[a].matvec(&flux[c][a])) {
                *ri += gi;
            }
        }
        residual[c * k..(c + 1) * k].copy_from_slice(&r);
    }

    let ju = space.param_jacobian(&proj.points)?;
    let mut jac = DenseMatrix::zeros(m * k, p);
    // Column-major views: row-major `ju` (N·m × P) is `P × N·m`; component c
    // is every m-th column starting at c. Row-major `values` (K × N) is `N × K`.
    let vt = DMatrixView::from_slice(proj.values.as_slice(), n, k);
    for c in 0..m {
        let jc = DMatrixView::from_slice_with_strides(&ju.as_slice()[c * p..], p, n, 1, m * p);
        let block = jc * vt; // P × K column-major == K × P row-major
        jac.as_mut_slice()[c * k * p..(c + 1) * k * p].copy_from_slice(block.as_slice());
    }
    if !jac.is_finite() {
        return Err(Error::Numeric("non-finite entries in the weak Jacobian".into()));
    }
    Ok(LinearSystem { jacobian: jac, residual })
}

/// One forward-Euler step: returns `(W + Δt·γ, γ, method)`.
pub fn evolve_step(w: &[f64], system: &LinearSystem, dt: f64, regularization: f64) -> Result<(Vec<f64>, Vec<f64>, LstsqMethod)> {
    if system.jacobian.cols() != w.len() {
        return Err(invalid(format!("system has {} columns, parameter vector {}", system.jacobian.cols(), w.len())));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let sol = solve_least_squares(&system.jacobian, &system.residual, regularization)?;
    let next = w.iter().zip(&sol.gamma).map(|(a, g)| a + dt * g).collect();
    Ok((next, sol.gamma, sol.method))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    pub regularization: f64,
    /// Keep `W` every this many steps (must divide `steps`).
    pub snapshot_every: usize,
    /// Compute `cond(J)` every this many steps; 0 disables it.
    pub condition_every: usize,
    /// Halt when `‖γ‖Δt > blowup_factor·‖W‖ + 1`.
    pub blowup_factor: f64,
}

impl EvolutionConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self { dt, steps, regularization: 0.0, snapshot_every: steps.max(1), condition_every: 1, blowup_factor: 1e3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(invalid("step count must be at least 1"));
        }
        if !(self.regularization >= 0.0) || !self.regularization.is_finite() {
            return Err(invalid("regularization must be nonnegative"));
        }
        if self.snapshot_every == 0 || self.steps % self.snapshot_every != 0 {
            return Err(invalid(format!("snapshot stride {} must divide the step count {}", self.snapshot_every, self.steps)));
        }
        if !(self.blowup_factor > 0.0) {
            return Err(invalid("blow-up factor must be positive"));
        }
        Ok(())
    }
}

/// Diagnostics of the step that advanced from `t_{step-1}` to `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    /// `cond(J)` of the assembled system, `None` when not computed for this step.
    pub condition: Option<f64>,
    pub residual_norm: f64,
    pub gamma_norm: f64,
    pub method: LstsqMethod,
    /// Assemble plus solve, seconds.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Failed { step: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub trajectory: Vec<Snapshot>,
    pub reports: Vec<StepReport>,
    pub status: RunStatus,
    /// Parameters after the last successful step.
    pub final_params: Vec<f64>,
}

impl EvolutionRun {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn max_condition(&self) -> Option<f64> {
        self.reports.iter().filter_map(|r| r.condition).reduce(f64::max)
    }

    pub fn total_wall_seconds(&self) -> f64 {
        self.reports.iter().map(|r| r.wall_seconds).sum()
    }
}

/// March `space` from its current parameters through `config.steps` steps.
/// Numerical breakdowns end the run early with [`RunStatus::Failed`]; the
/// trajectory keeps every snapshot taken up to that point.
pub fn evolve(space: &TrialSpace, problem: &PdeProblem, solver: &SolverKind, config: &EvolutionConfig) -> Result<EvolutionRun> {
    config.validate()?;
    check_compat(space, problem)?;
    if let SolverKind::Strong { points } = solver {
        for x in points {
            space.domain().check_point(x)?;
        }
    }
    let mut space = space.clone();
    let mut w = space.params().to_vec();
    let mut trajectory = vec![Snapshot { step: 0, time: 0.0, params: w.clone() }];
    let mut reports = Vec::with_capacity(config.steps);
    let mut status = RunStatus::Completed;
    for n in 0..config.steps {
        let t0 = Instant::now();
        let outcome = solver
            .assemble(&space, problem)
            .and_then(|sys| evolve_step(&w, &sys, config.dt, config.regularization).map(|r| (sys, r)));
        let wall = t0.elapsed().as_secs_f64();
        let (sys, (next, gamma, method)) = match outcome {
            Ok(v) => v,
            Err(Error::Numeric(msg)) => {
                status = RunStatus::Failed { step: n + 1, reason: msg };
                break;
            }
            Err(e) => return Err(e),
        };
        let gamma_norm = norm(&gamma);
        if gamma_norm * config.dt > config.blowup_factor * norm(&w) + 1.0 {
            status = RunStatus::Failed {
                step: n + 1,
                reason: format!("parameter update blew up (|gamma| dt = {:.3e})", gamma_norm * config.dt),
            };
            break;
        }
        let condition = if config.condition_every > 0 && (n % config.condition_every == 0 || n + 1 == config.steps) {
            Some(condition_number(&sys.jacobian).unwrap_or(f64::INFINITY))
        } else {
            None
        };
        w = next;
        space.set_params(&w)?;
        let time = config.dt * (n + 1) as f64;
        reports.push(StepReport {
            step: n + 1,
            time,
            condition,
            residual_norm: norm(&sys.residual),
            gamma_norm,
            method,
            wall_seconds: wall,
        });
        if (n + 1) % config.snapshot_every == 0 {
            trajectory.push(Snapshot { step: n + 1, time, params: w.clone() });
        }
    }
    Ok(EvolutionRun { trajectory, reports, status, final_params: w })
}
