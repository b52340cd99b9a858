#![allow(dead_code)]

use evokan::basis::{BasisKind, TestBasis};
use evokan::oracle::fine_integral;
use evokan::pde::{PdeProblem, PointState};
use std::f64::consts::PI;

pub type Field = fn(&[f64]) -> PointState;

pub fn ac_field(x: &[f64]) -> PointState {
    // u = 0.8 sin(pi x) + 0.3 cos(2x)
    let x0 = x[0];
    let mut s = PointState::zeros(x.to_vec(), 1);
    s.u[0] = 0.8 * (PI * x0).sin() + 0.3 * (2.0 * x0).cos();
    s.grad[0][0] = 0.8 * PI * (PI * x0).cos() - 0.6 * (2.0 * x0).sin();
    s.lap[0] = -0.8 * PI * PI * (PI * x0).sin() - 1.2 * (2.0 * x0).cos();
    s
}

pub fn burgers_field(x: &[f64]) -> PointState {
    // u = sin(pi x) sin(pi y) e^{x/2}, v = cos(x) y
    let (a, b) = (x[0], x[1]);
    let mut s = PointState::zeros(x.to_vec(), 2);
    let (sx, cx, sy, cy, e) = ((PI * a).sin(), (PI * a).cos(), (PI * b).sin(), (PI * b).cos(), (0.5 * a).exp());
    s.u[0] = sx * sy * e;
    s.grad[0] = vec![(PI * cx + 0.5 * sx) * sy * e, PI * sx * cy * e];
    s.lap[0] = (-PI * PI * sx + PI * cx + 0.25 * sx) * sy * e - PI * PI * sx * sy * e;
    s.u[1] = a.cos() * b;
    s.grad[1] = vec![-a.sin() * b, a.cos()];
    s.lap[1] = -a.cos() * b;
    s
}

pub fn heat_field(x: &[f64]) -> PointState {
    // u = cos(pi x) cos(2 pi y) + x^2 - x^4/2 + 0.2, zero normal derivative on the square
    let (a, b) = (x[0], x[1]);
    let mut s = PointState::zeros(x.to_vec(), 1);
    s.u[0] = (PI * a).cos() * (2.0 * PI * b).cos() + a * a - 0.5 * a.powi(4) + 0.2;
    s.grad[0] = vec![-PI * (PI * a).sin() * (2.0 * PI * b).cos() + 2.0 * a - 2.0 * a.powi(3), -2.0 * PI * (PI * a).cos() * (2.0 * PI * b).sin()];
    s.lap[0] = -5.0 * PI * PI * (PI * a).cos() * (2.0 * PI * b).cos() + 2.0 - 6.0 * a * a;
    s
}

pub fn pme_field(x: &[f64]) -> PointState {
    // u = 1 + 0.5 cos(pi x) sin(pi y) + 0.2 sin(2 pi x + 0.3)
    let (a, b) = (x[0], x[1]);
    let mut s = PointState::zeros(x.to_vec(), 1);
    let arg = 2.0 * PI * a + 0.3;
    s.u[0] = 1.0 + 0.5 * (PI * a).cos() * (PI * b).sin() + 0.2 * arg.sin();
    s.grad[0] = vec![-0.5 * PI * (PI * a).sin() * (PI * b).sin() + 0.4 * PI * arg.cos(), 0.5 * PI * (PI * a).cos() * (PI * b).cos()];
    s.lap[0] = -PI * PI * (PI * a).cos() * (PI * b).sin() - 0.8 * PI * PI * arg.sin();
    s
}

pub fn shipped_bases(problem: &PdeProblem) -> Vec<TestBasis> {
    let d = problem.domain();
    let kinds = match problem {
        PdeProblem::AllenCahn1d { .. } => vec![BasisKind::Sine1d { count: 10 }, BasisKind::Sine1d { count: 25 }],
        PdeProblem::Burgers2d { .. } => vec![BasisKind::Sine2d { per_axis: 6 }],
        PdeProblem::HeatReaction2d { .. } => vec![BasisKind::Cosine2d { per_axis: 6 }],
        PdeProblem::PmeDrift2d => vec![BasisKind::Fourier2d { max_mode: 3 }],
    };
    kinds.into_iter().map(|k| TestBasis::new(k, d.clone()).unwrap()).collect()
}

/// Largest `|∫ N_strong v_k − N_k_weak|` over every shipped basis, mode and component.
pub fn consistency_gap(problem: &PdeProblem, state: &dyn Fn(&[f64]) -> PointState) -> f64 {
    let axes = problem.domain().axes().to_vec();
    let mut worst: f64 = 0.0;
    for basis in shipped_bases(problem) {
        for k in 0..basis.len() {
            for c in 0..problem.components() {
                let strong = fine_integral(|x| problem.strong_residual(&state(x))[c] * basis.eval(k, x).unwrap(), &axes, 64).unwrap();
                let weak = fine_integral(
                    |x| {
                        let (v, g) = (basis.eval(k, x).unwrap(), basis.grad(k, x).unwrap());
                        problem.weak_integrand(&state(x), v, &g)[c]
                    },
                    &axes,
                    64,
                )
                .unwrap();
                worst = worst.max((strong - weak).abs());
            }
        }
    }
    worst
}

