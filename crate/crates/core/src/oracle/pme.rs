use super::{check_growth, march, max_abs, FdmGrid};
use crate::error::{invalid, Result};
use std::f64::consts::PI;

/// Drift `V = ∇(sin πx sin πy)` sampled at the east and north faces of
/// every node of the periodic `n × n` grid.
pub(crate) struct FaceDrift {
    n: usize,
    east: Vec<f64>,
    north: Vec<f64>,
}

impl FaceDrift {
    pub(crate) fn new(n: usize) -> Self {
        let h = 2.0 / n as f64;
        let x = |i: usize| -1.0 + h * i as f64;
        let mut east = Vec::with_capacity(n * n);
        let mut north = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                east.push(PI * (PI * (x(i) + 0.5 * h)).cos() * (PI * x(j)).sin());
                north.push(PI * (PI * x(i)).sin() * (PI * (x(j) + 0.5 * h)).cos());
            }
        }
        Self { n, east, north }
    }

    /// `∇·(∇(u²) − Vu)` from face fluxes `F = Δ(u²)/h − V_face·(u_L + u_R)/2`,
    /// so that the sum over the grid telescopes to zero.
    pub(crate) fn divergence(&self, u: &[f64], out: &mut [f64], fe: &mut [f64], fnorth: &mut [f64]) {
        let n = self.n;
        let h = 2.0 / n as f64;
        let inv_h = 1.0 / h;
        for j in 0..n {
            let jn = (j + 1) % n;
            for i in 0..n {
                let c = j * n + i;
                let uc = u[c];
                let ue = u[j * n + (i + 1) % n];
                let un = u[jn * n + i];
                fe[c] = (ue * ue - uc * uc) * inv_h - self.east[c] * 0.5 * (uc + ue);
                fnorth[c] = (un * un - uc * uc) * inv_h - self.north[c] * 0.5 * (uc + un);
            }
        }
        for j in 0..n {
            let js = (j + n - 1) % n;
            for i in 0..n {
                let c = j * n + i;
                let w = j * n + (i + n - 1) % n;
                out[c] = (fe[c] - fe[w] + fnorth[c] - fnorth[js * n + i]) * inv_h;
            }
        }
    }
}

/// `∇·(∇(u²) − Vu)` on the periodic `n × n` grid of spacing `2/n`.
pub fn pme_flux_divergence(u: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    let (mut fe, mut fnorth) = (vec![0.0; n * n], vec![0.0; n * n]);
    FaceDrift::new(n).divergence(u, &mut out, &mut fe, &mut fnorth);
    out
}

/// `u_t = Δ(u²) − ∇·(Vu)` on the periodic square with `nodes` distinct nodes
/// per axis; conservative explicit Euler.
pub fn fdm_pme_drift(u0: impl Fn(f64, f64) -> f64, nodes: usize, dt: Option<f64>, times: &[f64]) -> Result<Vec<FdmGrid>> {
    if nodes < 4 {
        return Err(invalid("PME oracle needs at least 4 nodes per axis"));
    }
    let n = nodes;
    let h = 2.0 / n as f64;
    let mut u = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            u.push(u0(-1.0 + h * i as f64, -1.0 + h * j as f64));
        }
    }
    // diffusivity 2u (with headroom for drift compression) and the drift speed
    let umax = 1.5 * max_abs(&u).max(1e-3);
    let bound = 1.0 / (8.0 * umax / (h * h) + 2.0 * PI / h);
    let drift = FaceDrift::new(n);
    let mut div = vec![0.0; n * n];
    let (mut fe, mut fnorth) = (vec![0.0; n * n], vec![0.0; n * n]);
    let mut out = Vec::new();
    march(
        times,
        dt.unwrap_or(0.25 * bound),
        &mut u,
        |u, k| {
            let before = max_abs(u);
            drift.divergence(u, &mut div, &mut fe, &mut fnorth);
            for (v, d) in u.iter_mut().zip(&div) {
                *v += k * d;
            }
            check_growth(before.max(1e-3), max_abs(u), "PME")
        },
        |u, t| out.push(FdmGrid { dim: 2, nodes, periodic: true, time: t, fields: vec![u.clone()] }),
    )?;
    Ok(out)
}
