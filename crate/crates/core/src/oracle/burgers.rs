use super::{check_growth, march, max_abs, FdmGrid};
use crate::error::{invalid, Result};

/// `u_t + u u_x + v u_y = νΔu` (and likewise for `v`) on `[−1, 1]²` with zero
/// Dirichlet data. First-order upwind advection, central diffusion, explicit Euler.
pub fn fdm_burgers(
    nu: f64,
    uv0: impl Fn(f64, f64) -> (f64, f64),
    nodes: usize,
    dt: Option<f64>,
    times: &[f64],
) -> Result<Vec<FdmGrid>> {
    if nodes < 3 {
        return Err(invalid("Burgers oracle needs at least 3 nodes per axis"));
    }
    if !(nu > 0.0) {
        return Err(invalid("nu must be positive"));
    }
    let n = nodes;
    let h = 2.0 / (n - 1) as f64;
    let mut u = vec![0.0; n * n];
    let mut v = vec![0.0; n * n];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let (a, b) = uv0(-1.0 + h * i as f64, -1.0 + h * j as f64);
            u[j * n + i] = a;
            v[j * n + i] = b;
        }
    }
    let speed = max_abs(&u) + max_abs(&v);
    let bound = 1.0 / (4.0 * nu / (h * h) + 2.0 * speed / h + 1e-300);
    let inv_h = 1.0 / h;
    let inv_h2 = inv_h * inv_h;
    let mut out = Vec::new();
    let mut fields = (u, v);
    march(
        times,
        dt.unwrap_or(0.25 * bound),
        &mut fields,
        |(u, v), k| {
            let before = max_abs(u).max(max_abs(v));
            let (uo, vo) = (u.clone(), v.clone());
            for j in 1..n - 1 {
                for i in 1..n - 1 {
                    let c = j * n + i;
                    let (a, b) = (uo[c], vo[c]);
                    for (dst, f) in [(&mut *u, &uo), (&mut *v, &vo)] {
                        let dx = if a > 0.0 { f[c] - f[c - 1] } else { f[c + 1] - f[c] } * inv_h;
                        let dy = if b > 0.0 { f[c] - f[c - n] } else { f[c + n] - f[c] } * inv_h;
                        let lap = (f[c - 1] + f[c + 1] + f[c - n] + f[c + n] - 4.0 * f[c]) * inv_h2;
                        dst[c] = f[c] + k * (nu * lap - a * dx - b * dy);
                    }
                }
            }
            check_growth(before.max(1e-3), max_abs(u).max(max_abs(v)), "Burgers")
        },
        |(u, v), t| out.push(FdmGrid { dim: 2, nodes, periodic: false, time: t, fields: vec![u.clone(), v.clone()] }),
    )?;
    Ok(out)
}
