//! Test-function families for the weak form.
//!
//! Modes are stored in lexicographic order of their indices so that row `k`
//! of a weak system always refers to the same function:
//!
//! * `sine-1d`: `sin(kπ(x − lo)/L)`, `k = 1..K`.
//! * `sine-2d`: `sin(aπ(x − lo)/L_x)·sin(bπ(y − lo)/L_y)`, `(a, b) ∈ 1..=n`, `a` outer.
//! * `fourier-2d`: `f_m(x)·g_n(y)` with `f, g ∈ {sin, cos}` of `2πm x/L`,
//!   `(m, n) ∈ 0..=M`, `(0, 0)` skipped, index 0 meaning the factor is absent;
//!   ordered by `(m, n, kind_x, kind_y)` with sin before cos.
//! * `cosine-2d`: `cos(aπ(x − lo)/L_x)·cos(bπ(y − lo)/L_y)`, `(a, b) ∈ 0..n`,
//!   constant included.

use crate::domain::Domain;
use crate::error::{invalid, Error, Result};
use crate::pde::BoundaryKind;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Sine1d { count: usize },
    Sine2d { per_axis: usize },
    Fourier2d { max_mode: usize },
    Cosine2d { per_axis: usize },
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Sine1d { .. } => "sine-1d",
            BasisKind::Sine2d { .. } => "sine-2d",
            BasisKind::Fourier2d { .. } => "fourier-2d",
            BasisKind::Cosine2d { .. } => "cosine-2d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisKind::Sine1d { .. } => 1,
            _ => 2,
        }
    }

    pub fn compatible_with(&self, bc: BoundaryKind) -> bool {
        matches!(
            (self, bc),
            (BasisKind::Sine1d { .. } | BasisKind::Sine2d { .. }, BoundaryKind::Dirichlet)
                | (BasisKind::Fourier2d { .. }, BoundaryKind::Periodic)
                | (BasisKind::Cosine2d { .. }, BoundaryKind::Neumann)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    One,
    Sin,
    Cos,
}

/// `shape(wave·x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct AxisFn {
    shape: Shape,
    wave: f64,
    phase: f64,
    /// Endpoints where a sine factor vanishes; returned as exact zeros.
    zeros: Option<(f64, f64)>,
}

impl AxisFn {
    const ONE: AxisFn = AxisFn { shape: Shape::One, wave: 0.0, phase: 0.0, zeros: None };

    fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let a = self.wave * x + self.phase;
        match self.shape {
            Shape::One => (1.0, 0.0),
            Shape::Sin => {
                let v = match self.zeros {
                    Some((lo, hi)) if x == lo || x == hi => 0.0,
                    _ => a.sin(),
                };
                (v, self.wave * a.cos())
            }
            Shape::Cos => (a.cos(), -self.wave * a.sin()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestBasis {
    kind: BasisKind,
    domain: Domain,
    modes: Vec<Vec<AxisFn>>,
}

impl TestBasis {
    pub fn new(kind: BasisKind, domain: Domain) -> Result<Self> {
        if kind.dim() != domain.dim() {
            return Err(Error::UnsupportedDimension(domain.dim()));
        }
        let ax = domain.axes().to_vec();
        let half_wave = |k: usize, axis: usize| k as f64 * PI / (ax[axis].1 - ax[axis].0);
        let sine = |k: usize, axis: usize| {
            let w = half_wave(k, axis);
            AxisFn { shape: Shape::Sin, wave: w, phase: -w * ax[axis].0, zeros: Some(ax[axis]) }
        };
        let cosine = |k: usize, axis: usize| {
            if k == 0 {
                return AxisFn::ONE;
            }
            let w = half_wave(k, axis);
            AxisFn { shape: Shape::Cos, wave: w, phase: -w * ax[axis].0, zeros: None }
        };
        let mut modes = Vec::new();
        match kind {
            BasisKind::Sine1d { count } => {
                if count == 0 {
                    return Err(invalid("sine-1d basis needs at least one mode"));
                }
                modes.extend((1..=count).map(|k| vec![sine(k, 0)]));
            }
            BasisKind::Sine2d { per_axis } => {
                if per_axis == 0 {
                    return Err(invalid("sine-2d basis needs at least one mode per axis"));
                }
                for a in 1..=per_axis {
                    for b in 1..=per_axis {
                        modes.push(vec![sine(a, 0), sine(b, 1)]);
                    }
                }
            }
            BasisKind::Cosine2d { per_axis } => {
                if per_axis == 0 {
                    return Err(invalid("cosine-2d basis needs at least one mode per axis"));
                }
                for a in 0..per_axis {
                    for b in 0..per_axis {
                        modes.push(vec![cosine(a, 0), cosine(b, 1)]);
                    }
                }
            }
            BasisKind::Fourier2d { max_mode } => {
                if max_mode == 0 {
                    return Err(invalid("fourier-2d basis needs max_mode >= 1"));
                }
                let options = |m: usize, axis: usize| -> Vec<AxisFn> {
                    if m == 0 {
                        return vec![AxisFn::ONE];
                    }
                    let w = 2.0 * half_wave(m, axis);
                    vec![
                        AxisFn { shape: Shape::Sin, wave: w, phase: 0.0, zeros: None },
                        AxisFn { shape: Shape::Cos, wave: w, phase: 0.0, zeros: None },
                    ]
                };
                for m in 0..=max_mode {
                    for n in 0..=max_mode {
                        if m == 0 && n == 0 {
                            continue;
                        }
                        for fx in options(m, 0) {
                            for fy in options(n, 1) {
                                modes.push(vec![fx, fy]);
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { kind, domain, modes })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    fn check(&self, k: usize, x: &[f64]) -> Result<()> {
        if k >= self.len() {
            return Err(invalid(format!("test function index {k} out of range (K = {})", self.len())));
        }
        if x.len() != self.domain.dim() {
            return Err(invalid("point dimension does not match the basis"));
        }
        Ok(())
    }

    pub fn eval(&self, k: usize, x: &[f64]) -> Result<f64> {
        self.check(k, x)?;
        Ok(self.modes[k].iter().zip(x).map(|(f, xi)| f.value_and_slope(*xi).0).product())
    }

    pub fn grad(&self, k: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check(k, x)?;
        let mut v = vec![0.0; x.len()];
        let mut s = vec![0.0; x.len()];
        self.value_slopes(k, x, &mut v, &mut s);
        Ok(gradient_from_factors(&v, &s))
    }

    fn value_slopes(&self, k: usize, x: &[f64], v: &mut [f64], s: &mut [f64]) {
        for (a, f) in self.modes[k].iter().enumerate() {
            let (val, slope) = f.value_and_slope(x[a]);
            v[a] = val;
            s[a] = slope;
        }
    }

    /// Value and gradient of every test function at `x`: `values[k]`, `grads[k][axis]`.
    pub fn eval_all(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if x.len() != self.domain.dim() {
            return Err(invalid("point dimension does not match the basis"));
        }
        let d = x.len();
        let mut v = vec![0.0; d];
        let mut s = vec![0.0; d];
        let mut values = Vec::with_capacity(self.len());
        let mut grads = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            self.value_slopes(k, x, &mut v, &mut s);
            values.push(v.iter().product());
            grads.push(gradient_from_factors(&v, &s));
        }
        Ok((values, grads))
    }
}

fn gradient_from_factors(v: &[f64], s: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|a| (0..v.len()).map(|b| if a == b { s[b] } else { v[b] }).product())
        .collect()
}
