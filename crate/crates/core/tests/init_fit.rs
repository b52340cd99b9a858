use evokan::domain::Domain;
use evokan::init_fit::{adam_minimize, fit_initial, fitting_points, AdamConfig};
use evokan::pde::PdeProblem;
use evokan::trial::{Constraint, DirichletConstraint, TrialSpace};
use evokan::KanNetwork;

fn ac_space(net: KanNetwork) -> TrialSpace {
    TrialSpace::new(net, Constraint::Dirichlet(DirichletConstraint::smooth(1)), PdeProblem::allen_cahn().domain()).unwrap()
}

fn ac_net(seed: u64) -> KanNetwork {
    KanNetwork::random(KanNetwork::layers_from_widths(&[1, 3, 3, 3, 3, 1], 4), seed).unwrap()
}

#[test]
fn zero_target_needs_no_iterations() {
    // the AC problem with eps irrelevant: target comes from a zero-amplitude field
    let zero = KanNetwork::zeros(KanNetwork::layers_from_widths(&[1, 3, 3, 3, 3, 1], 4)).unwrap();
    let space = ac_space(zero);
    let points = fitting_points(space.domain(), 64).unwrap();
    let targets = vec![0.0; points.len()];
    let mut s = space.clone();
    let r = adam_minimize(space.params(), &AdamConfig::default(), |w, g| {
        s.set_params(w)?;
        s.mse_and_gradient(&points, &targets, g)
    })
    .unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.loss, 0.0);
    assert_eq!(r.params, space.params());
}

#[test]
fn ac_network_fits_the_initial_condition() {
    let p = PdeProblem::allen_cahn();
    let space = ac_space(ac_net(0));
    let adam = AdamConfig { max_iterations: 20_000, ..Default::default() };
    let fit = fit_initial(&space, &p, &adam).unwrap();
    assert!(fit.mse <= 1e-6, "mse {}", fit.mse);

    // the fitted function still vanishes on the boundary
    let mut fitted = space.clone();
    fitted.set_params(&fit.params).unwrap();
    for x in [-1.0, 1.0] {
        assert!(fitted.eval(&[x]).unwrap()[0].abs() <= 1e-12);
    }
    // and it is close to 0.08 sin(pi x) inside
    for i in 1..20 {
        let x = -1.0 + 0.1 * i as f64;
        let want = 0.08 * (std::f64::consts::PI * x).sin();
        assert!((fitted.eval(&[x]).unwrap()[0] - want).abs() < 5e-3);
    }

    // the best loss of each 500-iteration window does not increase
    let mins: Vec<f64> = fit.history.chunks(500).map(|c| c.iter().cloned().fold(f64::INFINITY, f64::min)).collect();
    for (i, w) in mins.windows(2).enumerate() {
        assert!(w[1] <= w[0], "window {}: {} > {}", i + 1, w[1], w[0]);
    }

    // deterministic
    let again = fit_initial(&space, &p, &adam).unwrap();
    assert_eq!(again.params, fit.params);
    assert_eq!(again.mse, fit.mse);
}

#[test]
fn restart_keeps_the_better_fit() {
    let p = PdeProblem::allen_cahn();
    let space = ac_space(ac_net(0));
    // an unreachable target forces the restart
    let adam = AdamConfig { max_iterations: 50, target_mse: 1e-30, seed: 5, ..Default::default() };
    let fit = fit_initial(&space, &p, &adam).unwrap();
    assert!(fit.restarted);
    assert!(!fit.converged);
    let single = {
        let mut s = space.clone();
        let pts = fitting_points(space.domain(), (4 * space.param_count()).max(256)).unwrap();
        let targets: Vec<f64> = pts.iter().map(|x| p.initial_condition(x)[0]).collect();
        adam_minimize(space.params(), &adam, |w, g| {
            s.set_params(w)?;
            s.mse_and_gradient(&pts, &targets, g)
        })
        .unwrap()
    };
    assert!(fit.mse <= single.loss);
}

#[test]
fn fitting_grid_and_config_checks() {
    let line = Domain::new(vec![(-1.0, 1.0)]).unwrap();
    let pts = fitting_points(&line, 101).unwrap();
    assert_eq!(pts.len(), 101);
    assert_eq!(pts[0], vec![-1.0]);
    assert_eq!(pts[100], vec![1.0]);
    let sq = Domain::new(vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
    assert_eq!(fitting_points(&sq, 900).unwrap().len(), 900);

    assert!(AdamConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
    assert!(AdamConfig { beta1: 1.0, ..Default::default() }.validate().is_err());
    assert!(AdamConfig { samples: Some(0), ..Default::default() }.validate().is_err());
    let bad = adam_minimize(&[1.0], &AdamConfig::default(), |_, g| {
        g[0] = f64::NAN;
        Ok(1.0)
    });
    assert!(bad.is_err());
}
