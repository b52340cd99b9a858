//! Finite-difference reference solutions, written independently of the
//! network residual code, plus a fine quadrature integrator.

mod allen_cahn;
mod burgers;
mod heat;
mod pme;

pub use allen_cahn::fdm_allen_cahn;
pub use burgers::fdm_burgers;
pub use heat::{fdm_heat_reaction, neumann_laplacian_2d};
pub use pme::{fdm_pme_drift, pme_flux_divergence};

use crate::error::{invalid, Error, Result};
use crate::numerics::gauss_legendre_grid;
use crate::pde::PdeProblem;

/// Field values on a uniform node grid over `[-1, 1]^d`, first axis fastest.
///
/// Non-periodic grids store `nodes` points per axis including both ends.
/// Periodic grids store `nodes` distinct points `−1 + i·2/nodes`; the right
/// end coincides with node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmGrid {
    pub dim: usize,
    pub nodes: usize,
    pub periodic: bool,
    pub time: f64,
    /// One field per component.
    pub fields: Vec<Vec<f64>>,
}

impl FdmGrid {
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            2.0 / self.nodes as f64
        } else {
            2.0 / (self.nodes - 1) as f64
        }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -1.0 + self.spacing() * i as f64
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node index along one axis for position `j` of an `n`-point linspace over `[-1, 1]`.
    fn stride_index(&self, j: usize, n: usize) -> Result<usize> {
        let intervals = if self.periodic { self.nodes } else { self.nodes - 1 };
        if n < 2 || intervals % (n - 1) != 0 {
            return Err(invalid(format!(
                "a {n}-point grid does not sit on the {} oracle nodes",
                self.nodes
            )));
        }
        let r = intervals / (n - 1);
        Ok(if self.periodic { (j * r) % self.nodes } else { j * r })
    }

    /// Values at the `n`-per-axis uniform grid including endpoints,
    /// component-major then point order (first axis fastest).
    pub fn restrict(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        let idx: Vec<usize> = (0..n).map(|j| self.stride_index(j, n)).collect::<Result<_>>()?;
        Ok(self
            .fields
            .iter()
            .map(|f| match self.dim {
                1 => idx.iter().map(|&i| f[i]).collect(),
                _ => {
                    let mut out = Vec::with_capacity(n * n);
                    for &iy in &idx {
                        for &ix in &idx {
                            out.push(f[iy * self.nodes + ix]);
                        }
                    }
                    out
                }
            })
            .collect())
    }
}

/// Advance through `times` (ascending, nonnegative) with steps no longer than
/// `dt_max`, shortening them so each requested time is hit exactly.
pub(crate) fn march<T, S, P>(times: &[f64], dt_max: f64, state: &mut T, mut step: S, mut snapshot: P) -> Result<()>
where
    S: FnMut(&mut T, f64) -> Result<()>,
    P: FnMut(&T, f64),
{
    if !(dt_max > 0.0) || !dt_max.is_finite() {
        return Err(invalid(format!("oracle time step must be positive, got {dt_max}")));
    }
    let mut t = 0.0;
    for &target in times {
        if !(target >= t) || !target.is_finite() {
            return Err(invalid("oracle output times must be ascending and nonnegative"));
        }
        let span = target - t;
        if span > 0.0 {
            let k = (span / dt_max).ceil().max(1.0) as usize;
            let h = span / k as f64;
            for _ in 0..k {
                step(state, h)?;
            }
        }
        t = target;
        snapshot(state, t);
    }
    Ok(())
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Abort when the field turns non-finite or its sup norm more than doubles in a step.
pub(crate) fn check_growth(before: f64, after: f64, what: &str) -> Result<()> {
    if !after.is_finite() || (after > 2.0 * before && after > 1e-300) {
        return Err(Error::Numeric(format!("{what} oracle became unstable (|u| {before:.3e} -> {after:.3e})")));
    }
    Ok(())
}

/// Tensor Gauss–Legendre integral with `n_per_axis` nodes per axis.
pub fn fine_integral(f: impl FnMut(&[f64]) -> f64, axes: &[(f64, f64)], n_per_axis: usize) -> Result<f64> {
    Ok(gauss_legendre_grid(axes, n_per_axis)?.integrate(f))
}

/// Oracle resolution and time step.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    /// Node count per axis (distinct nodes for periodic grids).
    pub nodes: usize,
    /// Time step; `None` picks the solver default.
    pub dt: Option<f64>,
}

impl OracleSettings {
    /// Nodes aligned with an `n_eval`-point evaluation grid, refined `refine` times.
    pub fn aligned(problem: &PdeProblem, n_eval: usize, refine: usize) -> Self {
        let intervals = refine * (n_eval - 1);
        let nodes = match problem {
            PdeProblem::PmeDrift2d => intervals,
            _ => intervals + 1,
        };
        Self { nodes, dt: None }
    }
}

/// Reference solution of `problem` from its built-in initial condition at each of `times`.
pub fn run_oracle(problem: &PdeProblem, settings: &OracleSettings, times: &[f64]) -> Result<Vec<FdmGrid>> {
    problem.validate()?;
    let ic = |x: &[f64]| problem.initial_condition(x);
    match *problem {
        PdeProblem::AllenCahn1d { eps } => fdm_allen_cahn(eps, |x| ic(&[x])[0], settings.nodes, settings.dt, times),
        PdeProblem::Burgers2d { nu } => fdm_burgers(
            nu,
            |x, y| {
                let u = ic(&[x, y]);
                (u[0], u[1])
            },
            settings.nodes,
            settings.dt,
            times,
        ),
        PdeProblem::HeatReaction2d { alpha } => fdm_heat_reaction(alpha, 1.0, |x, y| ic(&[x, y])[0], settings.nodes, settings.dt, times),
        PdeProblem::PmeDrift2d => fdm_pme_drift(|x, y| ic(&[x, y])[0], settings.nodes, settings.dt, times),
    }
}
