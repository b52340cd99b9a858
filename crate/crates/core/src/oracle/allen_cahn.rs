use super::{check_growth, march, max_abs, FdmGrid};
use crate::error::{invalid, Result};

const DEFAULT_DT: f64 = 1e-9;

/// Solve `(I − h·D2) x = rhs` for the constant tridiagonal `D2 = [1, −2, 1]/dx²`
/// with zero Dirichlet data outside the interior block.
fn thomas(rhs: &mut [f64], diag: f64, off: f64, scratch: &mut [f64]) {
    let n = rhs.len();
    scratch[0] = off / diag;
    rhs[0] /= diag;
    for i in 1..n {
        let denom = diag - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// `u_t = u_xx − ε⁻²u(u² − 1)` on `[−1, 1]`, `u(±1) = 0`, with `nodes` grid
/// points. Diffusion is implicit, reaction explicit (IMEX Euler).
pub fn fdm_allen_cahn(eps: f64, u0: impl Fn(f64) -> f64, nodes: usize, dt: Option<f64>, times: &[f64]) -> Result<Vec<FdmGrid>> {
    if nodes < 3 {
        return Err(invalid("Allen-Cahn oracle needs at least 3 nodes"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let dx = 2.0 / (nodes - 1) as f64;
    let mut u: Vec<f64> = (0..nodes).map(|i| if i == 0 || i == nodes - 1 { 0.0 } else { u0(-1.0 + dx * i as f64) }).collect();
    let inv_eps2 = 1.0 / (eps * eps);
    let mut scratch = vec![0.0; nodes - 2];
    let mut out = Vec::new();
    march(
        times,
        dt.unwrap_or(DEFAULT_DT),
        &mut u,
        |u, h| {
            let before = max_abs(u);
            let interior = &mut u[1..nodes - 1];
            for v in interior.iter_mut() {
                *v -= h * inv_eps2 * *v * (*v * *v - 1.0);
            }
            let r = h / (dx * dx);
            thomas(interior, 1.0 + 2.0 * r, -r, &mut scratch);
            check_growth(before.max(1.0), max_abs(u), "Allen-Cahn")
        },
        |u, t| out.push(FdmGrid { dim: 1, nodes, periodic: false, time: t, fields: vec![u.clone()] }),
    )?;
    Ok(out)
}
