use super::{check_growth, march, max_abs, FdmGrid};
use crate::error::{invalid, Result};

/// Five-point Laplacian on an `n × n` node grid with homogeneous Neumann data
/// imposed through mirrored ghost nodes (`u_{-1} = u_1`, `u_n = u_{n-2}`).
pub fn neumann_laplacian_2d(u: &[f64], n: usize, h: f64) -> Vec<f64> {
    let inv = 1.0 / (h * h);
    let at = |i: usize, j: usize| u[j * n + i];
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        let (jm, jp) = (if j == 0 { 1 } else { j - 1 }, if j == n - 1 { n - 2 } else { j + 1 });
        for i in 0..n {
            let (im, ip) = (if i == 0 { 1 } else { i - 1 }, if i == n - 1 { n - 2 } else { i + 1 });
            out[j * n + i] = (at(im, j) + at(ip, j) + at(i, jm) + at(i, jp) - 4.0 * at(i, j)) * inv;
        }
    }
    out
}

/// `u_t = αΔu + r·u(1 − u)` on `[−1, 1]²` with zero normal flux; explicit Euler.
/// `reaction_scale` multiplies the reaction (`1` for the benchmark, `0` for pure diffusion).
pub fn fdm_heat_reaction(
    alpha: f64,
    reaction_scale: f64,
    u0: impl Fn(f64, f64) -> f64,
    nodes: usize,
    dt: Option<f64>,
    times: &[f64],
) -> Result<Vec<FdmGrid>> {
    if nodes < 3 {
        return Err(invalid("heat oracle needs at least 3 nodes per axis"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    let h = 2.0 / (nodes - 1) as f64;
    let mut u = Vec::with_capacity(nodes * nodes);
    for j in 0..nodes {
        for i in 0..nodes {
            u.push(u0(-1.0 + h * i as f64, -1.0 + h * j as f64));
        }
    }
    let bound = 1.0 / (4.0 * alpha / (h * h) + 2.0 * reaction_scale.abs());
    let mut out = Vec::new();
    march(
        times,
        dt.unwrap_or(0.25 * bound),
        &mut u,
        |u, k| {
            let before = max_abs(u);
            let lap = neumann_laplacian_2d(u, nodes, h);
            for (v, l) in u.iter_mut().zip(&lap) {
                *v += k * (alpha * l + reaction_scale * *v * (1.0 - *v));
            }
            check_growth(before.max(1.0), max_abs(u), "heat")
        },
        |u, t| out.push(FdmGrid { dim: 2, nodes, periodic: false, time: t, fields: vec![u.clone()] }),
    )?;
    Ok(out)
}
