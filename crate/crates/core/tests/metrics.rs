use evokan::domain::Domain;
use evokan::metrics::{boundary_gradient_error, energy, free_energy, l2_relative_error, normal_derivative_error, Edge};
use evokan::oracle::{fdm_heat_reaction, FdmGrid};
use evokan::pde::HEAT_ALPHA;
use evokan::trial::{Constraint, TrialSpace};
use evokan::KanNetwork;
use proptest::prelude::*;
use std::f64::consts::PI;

fn square() -> Domain {
    Domain::unit(2).unwrap()
}

fn heat_space(seed: u64) -> TrialSpace {
    let net = KanNetwork::random(KanNetwork::layers_from_widths(&[2, 4, 4, 1], 6), seed).unwrap();
    TrialSpace::new(net, Constraint::Unconstrained, square()).unwrap()
}

#[test]
fn boundary_gradient_error_matches_finite_differences() {
    let h = 1e-6;
    for seed in 0..3 {
        let space = heat_space(seed);
        for edge in Edge::ALL {
            let exact = boundary_gradient_error(&space, edge, 0.0, 40).unwrap();
            // one-sided differences pointing into the domain
            let fd = normal_derivative_error(&square(), edge, 0.0, 40, |x, axis| {
                let inward = if x[axis] < 0.0 { 1.0 } else { -1.0 };
                let at = |s: f64| {
                    let mut y = x.to_vec();
                    y[axis] += inward * s;
                    space.eval(&y).unwrap()[0]
                };
                let d = (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h) * inward;
                Ok(vec![d])
            })
            .unwrap();
            assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact), "{} seed {seed}: {exact} vs {fd}", edge.name());
        }
    }
}

#[test]
fn constant_and_neumann_fields_have_no_boundary_flux() {
    let zero = KanNetwork::zeros(KanNetwork::layers_from_widths(&[2, 3, 1], 5)).unwrap();
    let space = TrialSpace::new(zero, Constraint::Unconstrained, square()).unwrap();
    for edge in Edge::ALL {
        assert_eq!(boundary_gradient_error(&space, edge, 0.0, 17).unwrap(), 0.0);
        // a nonzero expected flux is measured against
        assert_eq!(boundary_gradient_error(&space, edge, 0.5, 17).unwrap(), 0.5);
    }
}

/// Mean |normal derivative| of an oracle grid along one edge, from second-order
/// one-sided differences at the edge nodes, linearly interpolated to the samples.
fn oracle_edge_error(g: &FdmGrid, edge: Edge) -> f64 {
    let n = g.nodes;
    let h = g.spacing();
    let u = &g.fields[0];
    let at = |i: usize, j: usize| u[j * n + i];
    let deriv: Vec<f64> = (0..n)
        .map(|t| match edge {
            Edge::Left => (-3.0 * at(0, t) + 4.0 * at(1, t) - at(2, t)) / (2.0 * h),
            Edge::Right => (3.0 * at(n - 1, t) - 4.0 * at(n - 2, t) + at(n - 3, t)) / (2.0 * h),
            Edge::Bottom => (-3.0 * at(t, 0) + 4.0 * at(t, 1) - at(t, 2)) / (2.0 * h),
            Edge::Top => (3.0 * at(t, n - 1) - 4.0 * at(t, n - 2) + at(t, n - 3)) / (2.0 * h),
        })
        .collect();
    normal_derivative_error(&square(), edge, 0.0, 64, |x, axis| {
        let s = (x[1 - axis] + 1.0) / h;
        let k = (s.floor() as usize).min(n - 2);
        let f = s - k as f64;
        Ok(vec![(1.0 - f) * deriv[k] + f * deriv[k + 1]])
    })
    .unwrap()
}

#[test]
fn oracle_boundary_flux_vanishes_under_refinement() {
    // an initial condition whose flux is not zero, so the oracle has to create the
    // Neumann layer itself
    let ic = |x: f64, y: f64| (PI * x).cos() * (PI * y).cos() + 0.2 * (0.5 * PI * x).sin() * (0.5 * PI * y).cos();
    let errs: Vec<Vec<f64>> = [17, 33, 65]
        .iter()
        .map(|&n| {
            let g = fdm_heat_reaction(HEAT_ALPHA, 1.0, ic, n, None, &[0.05]).unwrap().remove(0);
            Edge::ALL.iter().map(|&e| oracle_edge_error(&g, e)).collect()
        })
        .collect();
    for e in 0..4 {
        for w in errs.windows(2) {
            let order = (w[0][e] / w[1][e]).log2();
            assert!(order >= 1.0, "{}: {:?}", Edge::ALL[e].name(), errs.iter().map(|r| r[e]).collect::<Vec<_>>());
        }
    }
}

#[test]
fn energy_is_positive_off_zero() {
    let n = 9;
    let h = 0.25;
    for k in 0..n * n {
        let mut u = vec![0.0; n * n];
        u[k] = 1e-3;
        assert!(energy(&u, n, 2, h).unwrap() > 0.0);
    }
    assert!(energy(&[1.0; 5], 4, 1, 0.5).is_err());
    assert!(free_energy(&[1.0; 4], &[0.0; 3], 4, 1, 0.5).is_err());
    // with zero potential the free energy is the plain energy
    let u = [0.3, -0.2, 0.9, 1.1];
    assert_eq!(free_energy(&u, &[0.0; 4], 4, 1, 0.5).unwrap(), energy(&u, 4, 1, 0.5).unwrap());
}

proptest! {
    #[test]
    fn l2_error_is_scale_invariant(
        v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..50),
        c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
    ) {
        let p: Vec<f64> = v.iter().map(|t| t.0).collect();
        let r: Vec<f64> = v.iter().map(|t| t.1).collect();
        prop_assume!(r.iter().any(|x| x.abs() > 1e-6));
        let base = l2_relative_error(&p, &r).unwrap();
        let cp: Vec<f64> = p.iter().map(|x| c * x).collect();
        let cr: Vec<f64> = r.iter().map(|x| c * x).collect();
        let scaled = l2_relative_error(&cp, &cr).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-12 * (1.0 + base));
    }

    #[test]
    fn energy_is_nonnegative(u in prop::collection::vec(-5.0f64..5.0, 36)) {
        prop_assert!(energy(&u, 6, 2, 0.4).unwrap() >= 0.0);
    }
}
