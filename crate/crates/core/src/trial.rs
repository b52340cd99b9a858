//! Trial functions built on a [`KanNetwork`] that meet their boundary
//! conditions for every parameter vector.
//!
//! * Dirichlet: `u = h1(x)·net(x)`, where `h1` vanishes on the whole boundary
//!   of the box, hidden activations pass through `sign(z)|z|^q`.
//! * Lifted Dirichlet: the same plus a closed-form `l(x)` carrying the boundary data.
//! * Periodic: `u = net(embed(x))` with harmonic features of each coordinate.
//! * Unconstrained: `u = net(x)` (Neumann problems put the data in the weak form).

use crate::domain::Domain;
use crate::error::{invalid, Result};
use crate::kan::KanNetwork;
use crate::numerics::{DenseMatrix, Dual2, Scalar};
use crate::pde::PointState;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletConstraint {
    /// Per-axis exponent `p_i` of the boundary factor.
    pub exponents: Vec<f64>,
    /// Exponent `q` of the hidden-layer map.
    pub hidden_power: f64,
}

impl DirichletConstraint {
    pub fn smooth(dim: usize) -> Self {
        Self { exponents: vec![1.0; dim], hidden_power: 1.0 }
    }
}

/// Closed-form liftings. Time independent.
#[derive(Debug, Clone, PartialEq)]
pub enum Lifting {
    Constant(f64),
    /// `amplitude · Π_i sin(freq_i·x_i + phase_i)`.
    SeparableTrig { amplitude: f64, freq: Vec<f64>, phase: Vec<f64> },
}

impl Lifting {
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Lifting::Constant(c) => S::constant(*c),
            Lifting::SeparableTrig { amplitude, freq, phase } => {
                let mut acc = S::constant(*amplitude);
                for ((xi, f), p) in x.iter().zip(freq).zip(phase) {
                    acc = acc * (*xi * *f + *p).sin();
                }
                acc
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicEmbedding {
    /// Period `L` per axis.
    pub periods: Vec<f64>,
    /// Harmonics `H` per axis.
    pub harmonics: usize,
}

impl PeriodicEmbedding {
    pub fn for_domain(domain: &Domain, harmonics: usize) -> Self {
        Self { periods: (0..domain.dim()).map(|a| domain.length(a)).collect(), harmonics }
    }

    pub fn feature_count(&self) -> usize {
        2 * self.harmonics * self.periods.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Unconstrained,
    Dirichlet(DirichletConstraint),
    DirichletLifted(DirichletConstraint, Lifting),
    Periodic(PeriodicEmbedding),
}

/// Normalized boundary factor `Π_i [(x_i − lo_i)(hi_i − x_i) / (L_i/2)²]^{p_i}`;
/// 1 at the box center, exactly 0 on its boundary.
pub fn dirichlet_factor(x: &[f64], domain: &Domain, exponents: &[f64]) -> Result<f64> {
    domain.check_point(x)?;
    if exponents.len() != domain.dim() {
        return Err(invalid("one exponent per axis required"));
    }
    Ok(factor_generic(x, domain, exponents))
}

fn factor_generic<S: Scalar>(x: &[S], domain: &Domain, exponents: &[f64]) -> S {
    let mut acc = S::constant(1.0);
    for ((xi, &(lo, hi)), &p) in x.iter().zip(domain.axes()).zip(exponents) {
        let half = 0.5 * (hi - lo);
        let a = (*xi - lo) * ((S::constant(hi) - *xi) * (1.0 / (half * half)));
        acc = acc * if p == 1.0 { a } else { a.signed_pow(p) };
    }
    acc
}

/// Features `(sin hωx, cos hωx)` for `h = 1..H`, concatenated over axes.
pub fn periodic_embed(x: &[f64], embedding: &PeriodicEmbedding) -> Vec<f64> {
    embed_generic(x, embedding)
}

fn embed_generic<S: Scalar>(x: &[S], e: &PeriodicEmbedding) -> Vec<S> {
    let mut out = Vec::with_capacity(e.feature_count());
    for (xi, l) in x.iter().zip(&e.periods) {
        let w = 2.0 * PI / l;
        for h in 1..=e.harmonics {
            let arg = *xi * (w * h as f64);
            out.push(arg.sin());
            out.push(arg.cos());
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrialSpace {
    network: KanNetwork,
    constraint: Constraint,
    domain: Domain,
}

impl TrialSpace {
    pub fn new(network: KanNetwork, constraint: Constraint, domain: Domain) -> Result<Self> {
        let dim = domain.dim();
        let expected_inputs = match &constraint {
            Constraint::Periodic(e) => {
                if e.harmonics == 0 {
                    return Err(invalid("periodic embedding needs at least one harmonic"));
                }
                if e.periods.len() != dim || e.periods.iter().any(|p| !(*p > 0.0)) {
                    return Err(invalid("periodic embedding needs one positive period per axis"));
                }
                e.feature_count()
            }
            _ => dim,
        };
        if network.input_dim() != expected_inputs {
            return Err(invalid(format!(
                "network takes {} inputs, trial space supplies {expected_inputs}",
                network.input_dim()
            )));
        }
        let network = match &constraint {
            Constraint::Dirichlet(d) | Constraint::DirichletLifted(d, _) => {
                if d.exponents.len() != dim || d.exponents.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                    return Err(invalid("Dirichlet exponents must be one per axis, each in (0, 1]"));
                }
                network.with_hidden_power(d.hidden_power)?
            }
            _ => network.with_hidden_power(1.0)?,
        };
        if let Constraint::DirichletLifted(_, Lifting::SeparableTrig { freq, phase, .. }) = &constraint {
            if freq.len() != dim || phase.len() != dim {
                return Err(invalid("separable lifting needs one frequency and phase per axis"));
            }
        }
        Ok(Self { network, constraint, domain })
    }

    pub fn network(&self) -> &KanNetwork {
        &self.network
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn components(&self) -> usize {
        self.network.output_dim()
    }

    pub fn param_count(&self) -> usize {
        self.network.param_count()
    }

    pub fn params(&self) -> &[f64] {
        self.network.params()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.network.set_params(params)
    }

    fn features<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        match &self.constraint {
            Constraint::Periodic(e) => embed_generic(x, e),
            _ => x.to_vec(),
        }
    }

    fn factor<S: Scalar>(&self, x: &[S]) -> S {
        match &self.constraint {
            Constraint::Dirichlet(d) | Constraint::DirichletLifted(d, _) => factor_generic(x, &self.domain, &d.exponents),
            _ => S::constant(1.0),
        }
    }

    fn lift<S: Scalar>(&self, x: &[S]) -> S {
        match &self.constraint {
            Constraint::DirichletLifted(_, l) => l.eval(x),
            _ => S::zero(),
        }
    }

    fn eval_generic<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let mut out = self.network.forward_generic(&self.features(x))?;
        let f = self.factor(x);
        let l = self.lift(x);
        for o in &mut out {
            *o = f * *o + l;
        }
        Ok(out)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(invalid(format!("point has {} coordinates, trial space is {}-dimensional", x.len(), self.dim())));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        self.eval_generic(x)
    }

    /// Values with first and second derivatives along `axis`.
    pub fn eval_along(&self, x: &[f64], axis: usize) -> Result<Vec<Dual2>> {
        self.check(x)?;
        if axis >= x.len() {
            return Err(invalid(format!("axis {axis} out of range")));
        }
        let xd: Vec<Dual2> = x
            .iter()
            .enumerate()
            .map(|(k, v)| if k == axis { Dual2::variable(*v) } else { Dual2::constant(*v) })
            .collect();
        self.eval_generic(&xd)
    }

    /// Values, gradients and Laplacians of every component at `x`.
    pub fn state(&self, x: &[f64]) -> Result<PointState> {
        let m = self.components();
        let d = self.dim();
        let mut st = PointState::zeros(x.to_vec(), m);
        for axis in 0..d {
            let vals = self.eval_along(x, axis)?;
            for (c, v) in vals.iter().enumerate() {
                if axis == 0 {
                    st.u[c] = v.value;
                }
                st.grad[c][axis] = v.d1;
                st.lap[c] += v.d2;
            }
        }
        Ok(st)
    }

    /// `∂u_c(x_i)/∂W_j`, one row per (point, component), point-major.
    pub fn param_jacobian(&self, points: &[Vec<f64>]) -> Result<DenseMatrix> {
        if points.is_empty() {
            return Err(invalid("param_jacobian needs at least one point"));
        }
        let m = self.components();
        let mut jac = DenseMatrix::zeros(points.len() * m, self.param_count());
        let mut seed = vec![0.0; m];
        for (i, x) in points.iter().enumerate() {
            self.check(x)?;
            let tape = self.network.tape(&self.features(x))?;
            let f = self.factor(x);
            for c in 0..m {
                seed.fill(0.0);
                seed[c] = f;
                self.network.backward(&tape, &seed, jac.row_mut(i * m + c));
            }
        }
        Ok(jac)
    }

    /// Mean squared misfit against `targets` (point-major, `points.len()·m`
    /// entries) and its gradient with respect to the parameters.
    pub fn mse_and_gradient(&self, points: &[Vec<f64>], targets: &[f64], grad: &mut [f64]) -> Result<f64> {
        let m = self.components();
        if targets.len() != points.len() * m || points.is_empty() {
            return Err(invalid("targets must hold one value per point and component"));
        }
        if grad.len() != self.param_count() {
            return Err(invalid("gradient buffer has the wrong length"));
        }
        grad.fill(0.0);
        let scale = 1.0 / targets.len() as f64;
        let mut buf = vec![0.0; self.param_count()];
        let mut seed = vec![0.0; m];
        let mut loss = 0.0;
        for (i, x) in points.iter().enumerate() {
            self.check(x)?;
            let tape = self.network.tape(&self.features(x))?;
            let f = self.factor(x);
            let l = self.lift(x);
            for c in 0..m {
                let r = f * tape.output()[c] + l - targets[i * m + c];
                loss += r * r;
                seed[c] = 2.0 * scale * r * f;
            }
            self.network.backward(&tape, &seed, &mut buf);
            for (g, b) in grad.iter_mut().zip(&buf) {
                *g += b;
            }
        }
        Ok(loss * scale)
    }
}
