//! Layered RBF-KAN: every edge carries a Gaussian radial-basis expansion plus
//! a weighted silu term, and every neuron sums its incoming edges.
//!
//! Parameters live in one flat vector. Edge `(layer, j, i)` (input neuron `i`
//! feeding output neuron `j`) owns `grid_size + 1` consecutive entries: the
//! RBF weights `w^1..w^g` followed by the silu weight `b`. Layers are stored
//! in order, edges within a layer row-major in `(j, i)`.

use crate::error::{invalid, Error, Result};
use crate::numerics::{DenseMatrix, Dual2, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

pub const DEFAULT_CENTER_LO: f64 = -2.0;
pub const DEFAULT_CENTER_HI: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub in_width: usize,
    pub out_width: usize,
    pub grid_size: usize,
    pub center_lo: f64,
    pub center_hi: f64,
    pub rbf_width: f64,
}

impl LayerSpec {
    /// Layer with `grid_size` centers on the default span and width equal to
    /// the center spacing.
    pub fn new(in_width: usize, out_width: usize, grid_size: usize) -> Self {
        Self::with_span(in_width, out_width, grid_size, DEFAULT_CENTER_LO, DEFAULT_CENTER_HI)
    }

    pub fn with_span(in_width: usize, out_width: usize, grid_size: usize, lo: f64, hi: f64) -> Self {
        let rbf_width = if grid_size > 1 { (hi - lo) / (grid_size - 1) as f64 } else { 1.0 };
        Self { in_width, out_width, grid_size, center_lo: lo, center_hi: hi, rbf_width }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_width == 0 || self.out_width == 0 {
            return Err(invalid("layer widths must be positive"));
        }
        if self.grid_size == 0 {
            return Err(invalid("grid_size must be at least 1"));
        }
        if !(self.center_lo < self.center_hi) {
            return Err(invalid(format!("center span [{}, {}] is empty", self.center_lo, self.center_hi)));
        }
        if !(self.rbf_width > 0.0) || !self.rbf_width.is_finite() {
            return Err(invalid(format!("rbf_width must be positive, got {}", self.rbf_width)));
        }
        Ok(())
    }

    pub fn centers(&self) -> Vec<f64> {
        if self.grid_size == 1 {
            return vec![0.5 * (self.center_lo + self.center_hi)];
        }
        let step = (self.center_hi - self.center_lo) / (self.grid_size - 1) as f64;
        (0..self.grid_size).map(|k| self.center_lo + step * k as f64).collect()
    }

    /// Parameters per edge: `grid_size` RBF weights and one silu weight.
    pub fn edge_params(&self) -> usize {
        self.grid_size + 1
    }

    pub fn param_count(&self) -> usize {
        self.in_width * self.out_width * self.edge_params()
    }
}

/// One edge function `φ(x) = b·silu(x) + Σ_k w^k exp(−(x − c_k)²/(2h²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    pub rbf_weights: Vec<f64>,
    pub base_weight: f64,
    pub centers: Vec<f64>,
    pub width: f64,
}

impl EdgeFunction {
    pub fn eval(&self, x: f64) -> f64 {
        edge_phi(self, x)
    }
}

pub fn edge_phi(edge: &EdgeFunction, x: f64) -> f64 {
    let inv = 1.0 / (2.0 * edge.width * edge.width);
    let rbf: f64 = edge
        .rbf_weights
        .iter()
        .zip(&edge.centers)
        .map(|(w, c)| w * (-(x - c) * (x - c) * inv).exp())
        .sum();
    edge.base_weight * x.silu() + rbf
}

/// Per-layer precomputed constants.
#[derive(Debug, Clone)]
struct LayerGeom {
    centers: Vec<f64>,
    inv_two_h2: f64,
    inv_h2: f64,
    offset: usize,
}

#[derive(Debug, Clone)]
pub struct KanNetwork {
    layers: Vec<LayerSpec>,
    params: Vec<f64>,
    /// Exponent `q` of the zero-preserving map `z ↦ sign(z)|z|^q` applied to
    /// hidden activations before they enter the next layer. `1` is the identity.
    hidden_power: f64,
    geom: Vec<LayerGeom>,
}

impl PartialEq for KanNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
            && self.hidden_power.to_bits() == other.hidden_power.to_bits()
            && self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Activations recorded by a forward pass, consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct Tape<S> {
    /// Per layer, the basis responses `[ψ_1..ψ_g, silu]` of each input, flattened `[i][m]`.
    basis: Vec<Vec<S>>,
    /// Per layer, their derivatives with respect to the (transformed) input.
    basis_prime: Vec<Vec<S>>,
    /// Per layer, derivative of the hidden transform at each input (1 for the first layer).
    transform_prime: Vec<Vec<S>>,
    output: Vec<S>,
}

impl<S: Scalar> Tape<S> {
    pub fn output(&self) -> &[S] {
        &self.output
    }
}

impl KanNetwork {
    pub fn new(layers: Vec<LayerSpec>, params: Vec<f64>) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("network needs at least one layer"));
        }
        for l in &layers {
            l.validate()?;
        }
        for w in layers.windows(2) {
            if w[0].out_width != w[1].in_width {
                return Err(invalid(format!(
                    "layer widths do not chain: {} -> {}",
                    w[0].out_width, w[1].in_width
                )));
            }
        }
        let count: usize = layers.iter().map(LayerSpec::param_count).sum();
        if params.len() != count {
            return Err(invalid(format!("expected {count} parameters, got {}", params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("non-finite network parameter".into()));
        }
        let mut offset = 0;
        let geom = layers
            .iter()
            .map(|l| {
                let g = LayerGeom {
                    centers: l.centers(),
                    inv_two_h2: 1.0 / (2.0 * l.rbf_width * l.rbf_width),
                    inv_h2: 1.0 / (l.rbf_width * l.rbf_width),
                    offset,
                };
                offset += l.param_count();
                g
            })
            .collect();
        Ok(Self { layers, params, hidden_power: 1.0, geom })
    }

    pub fn zeros(layers: Vec<LayerSpec>) -> Result<Self> {
        let count = layers.iter().map(LayerSpec::param_count).sum();
        Self::new(layers, vec![0.0; count])
    }

    /// Layer specs for widths `[n_0, …, n_L]` with a shared grid size.
    pub fn layers_from_widths(widths: &[usize], grid_size: usize) -> Vec<LayerSpec> {
        widths.windows(2).map(|w| LayerSpec::new(w[0], w[1], grid_size)).collect()
    }

    /// RBF weights uniform in `±1/√(in_width·g)`, silu weights zero.
    pub fn random(layers: Vec<LayerSpec>, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(layers)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (l, geom) in net.layers.iter().zip(&net.geom) {
            let s = 1.0 / ((l.in_width * l.grid_size) as f64).sqrt();
            for e in 0..l.in_width * l.out_width {
                let base = geom.offset + e * l.edge_params();
                for k in 0..l.grid_size {
                    net.params[base + k] = rng.random_range(-s..s);
                }
            }
        }
        Ok(net)
    }

    pub fn with_hidden_power(mut self, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(invalid(format!("hidden exponent must lie in (0, 1], got {q}")));
        }
        self.hidden_power = q;
        Ok(self)
    }

    pub fn hidden_power(&self) -> f64 {
        self.hidden_power
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_width
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_width)
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(invalid(format!("expected {} parameters, got {}", self.params.len(), params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("non-finite network parameter".into()));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Offset of edge `(layer, j, i)` in the parameter vector.
    pub fn edge_offset(&self, layer: usize, j: usize, i: usize) -> usize {
        let l = &self.layers[layer];
        self.geom[layer].offset + (j * l.in_width + i) * l.edge_params()
    }

    pub fn edge(&self, layer: usize, j: usize, i: usize) -> EdgeFunction {
        let l = &self.layers[layer];
        let off = self.edge_offset(layer, j, i);
        EdgeFunction {
            rbf_weights: self.params[off..off + l.grid_size].to_vec(),
            base_weight: self.params[off + l.grid_size],
            centers: self.geom[layer].centers.clone(),
            width: l.rbf_width,
        }
    }

    fn check_input(&self, n: usize) -> Result<()> {
        if n != self.input_dim() {
            return Err(invalid(format!("input has {n} components, network expects {}", self.input_dim())));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        Ok(self.run(x, None))
    }

    /// Evaluate over dual inputs; derivatives follow whatever seeds the inputs carry.
    pub fn forward_dual(&self, x: &[Dual2]) -> Result<Vec<Dual2>> {
        self.check_input(x.len())?;
        Ok(self.run(x, None))
    }

    pub fn forward_generic<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_input(x.len())?;
        Ok(self.run(x, None))
    }

    /// Outputs with first and second derivatives along input `axis`.
    pub fn forward_with_spatial(&self, x: &[f64], axis: usize) -> Result<Vec<Dual2>> {
        self.check_input(x.len())?;
        if axis >= x.len() {
            return Err(invalid(format!("axis {axis} out of range for {}-dimensional input", x.len())));
        }
        let xd: Vec<Dual2> = x
            .iter()
            .enumerate()
            .map(|(k, v)| if k == axis { Dual2::variable(*v) } else { Dual2::constant(*v) })
            .collect();
        Ok(self.run(&xd, None))
    }

    /// Forward pass that records everything the backward pass needs.
    pub fn tape<S: Scalar>(&self, x: &[S]) -> Result<Tape<S>> {
        self.check_input(x.len())?;
        let mut tape = Tape {
            basis: Vec::with_capacity(self.layers.len()),
            basis_prime: Vec::with_capacity(self.layers.len()),
            transform_prime: Vec::with_capacity(self.layers.len()),
            output: Vec::new(),
        };
        tape.output = self.run(x, Some(&mut tape));
        Ok(tape)
    }

    fn run<S: Scalar>(&self, x: &[S], mut tape: Option<&mut Tape<S>>) -> Vec<S> {
        let mut act: Vec<S> = x.to_vec();
        for (li, (layer, geom)) in self.layers.iter().zip(&self.geom).enumerate() {
            let g = layer.grid_size;
            let ep = layer.edge_params();
            let record = tape.is_some();
            let mut basis = Vec::with_capacity(layer.in_width * ep);
            let mut basis_prime = if record { Vec::with_capacity(layer.in_width * ep) } else { Vec::new() };
            let mut tprime = if record { Vec::with_capacity(layer.in_width) } else { Vec::new() };
            for a in &act {
                let z = if li > 0 && self.hidden_power != 1.0 {
                    if record {
                        tprime.push(transform_prime(*a, self.hidden_power));
                    }
                    a.signed_pow(self.hidden_power)
                } else {
                    if record {
                        tprime.push(S::constant(1.0));
                    }
                    *a
                };
                for c in &geom.centers {
                    let d = z - *c;
                    let psi = (d * d * (-geom.inv_two_h2)).exp();
                    basis.push(psi);
                    if record {
                        basis_prime.push(d * psi * (-geom.inv_h2));
                    }
                }
                basis.push(z.silu());
                if record {
                    basis_prime.push(z.silu_prime());
                }
            }
            let w = &self.params[geom.offset..geom.offset + layer.param_count()];
            let mut next = vec![S::zero(); layer.out_width];
            for (j, out) in next.iter_mut().enumerate() {
                let mut acc = S::zero();
                let row = &w[j * layer.in_width * ep..(j + 1) * layer.in_width * ep];
                for (wk, bk) in row.iter().zip(&basis) {
                    acc += *bk * *wk;
                }
                *out = acc;
            }
            debug_assert_eq!(basis.len(), layer.in_width * (g + 1));
            if let Some(t) = tape.as_deref_mut() {
                t.basis.push(basis);
                t.basis_prime.push(basis_prime);
                t.transform_prime.push(tprime);
            }
            act = next;
        }
        act
    }

    /// Vector–Jacobian product: `out[p] = Σ_c seed[c] · ∂y_c/∂W_p`.
    pub fn backward<S: Scalar>(&self, tape: &Tape<S>, seed: &[S], out: &mut [S]) {
        assert_eq!(seed.len(), self.output_dim());
        assert_eq!(out.len(), self.param_count());
        let mut delta: Vec<S> = seed.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let geom = &self.geom[li];
            let ep = layer.edge_params();
            let basis = &tape.basis[li];
            let bprime = &tape.basis_prime[li];
            let w = &self.params[geom.offset..geom.offset + layer.param_count()];
            let grads = &mut out[geom.offset..geom.offset + layer.param_count()];
            let row_len = layer.in_width * ep;
            for (j, dj) in delta.iter().enumerate() {
                for (gk, bk) in grads[j * row_len..(j + 1) * row_len].iter_mut().zip(basis) {
                    *gk = *dj * *bk;
                }
            }
            if li == 0 {
                break;
            }
            let mut prev = vec![S::zero(); layer.in_width];
            for (j, dj) in delta.iter().enumerate() {
                let row = &w[j * row_len..(j + 1) * row_len];
                for (i, p) in prev.iter_mut().enumerate() {
                    let mut dphi = S::zero();
                    for m in 0..ep {
                        dphi += bprime[i * ep + m] * row[i * ep + m];
                    }
                    *p += *dj * dphi;
                }
            }
            for (p, t) in prev.iter_mut().zip(&tape.transform_prime[li]) {
                *p = *p * *t;
            }
            delta = prev;
        }
    }

    /// Sensitivity matrix `∂ŷ_c(x_i)/∂W_j`, one row per (point, component),
    /// point-major. With `need_spatial`, one further block per input axis holds
    /// `∂(∂ŷ_c/∂x_axis)(x_i)/∂W_j` in the same row order.
    pub fn param_jacobian(&self, points: &[Vec<f64>], need_spatial: bool) -> Result<DenseMatrix> {
        if points.is_empty() {
            return Err(invalid("param_jacobian needs at least one point"));
        }
        let m = self.output_dim();
        let p = self.param_count();
        let d = self.input_dim();
        let blocks = if need_spatial { 1 + d } else { 1 };
        let n = points.len();
        let mut jac = DenseMatrix::zeros(blocks * n * m, p);
        let mut seed = vec![0.0; m];
        for (i, x) in points.iter().enumerate() {
            let tape = self.tape(x)?;
            for c in 0..m {
                seed.fill(0.0);
                seed[c] = 1.0;
                self.backward(&tape, &seed, jac.row_mut(i * m + c));
            }
        }
        if need_spatial {
            let mut buf = vec![Dual2::default(); p];
            let mut dseed = vec![Dual2::default(); m];
            for axis in 0..d {
                for (i, x) in points.iter().enumerate() {
                    let xd: Vec<Dual2> = x
                        .iter()
                        .enumerate()
                        .map(|(k, v)| if k == axis { Dual2::variable(*v) } else { Dual2::constant(*v) })
                        .collect();
                    let tape = self.tape(&xd)?;
                    for c in 0..m {
                        dseed.fill(Dual2::default());
                        dseed[c] = Dual2::constant(1.0);
                        self.backward(&tape, &dseed, &mut buf);
                        let row = jac.row_mut((1 + axis) * n * m + i * m + c);
                        for (r, b) in row.iter_mut().zip(&buf) {
                            *r = b.d1;
                        }
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Versioned plain-text checkpoint; floats carry 17 significant digits.
    pub fn to_checkpoint(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "evokan-checkpoint 1");
        let _ = writeln!(s, "hidden_power {:.16e}", self.hidden_power);
        let _ = writeln!(s, "layers {}", self.layers.len());
        for l in &self.layers {
            let _ = writeln!(
                s,
                "{} {} {} {:.16e} {:.16e} {:.16e}",
                l.in_width, l.out_width, l.grid_size, l.center_lo, l.center_hi, l.rbf_width
            );
        }
        let _ = writeln!(s, "params {}", self.params.len());
        for p in &self.params {
            let _ = writeln!(s, "{p:.16e}");
        }
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| -> Result<(usize, Vec<&str>)> {
            lines
                .next()
                .map(|(n, l)| (n + 1, l.split_whitespace().collect()))
                .ok_or_else(|| Error::Checkpoint { line: 0, msg: format!("unexpected end of input, expected {what}") })
        };
        let bad = |line: usize, msg: &str| Error::Checkpoint { line, msg: msg.to_string() };

        let (ln, head) = next("header")?;
        if head != ["evokan-checkpoint", "1"] {
            return Err(bad(ln, "unsupported header"));
        }
        let (ln, hp) = next("hidden_power")?;
        if hp.len() != 2 || hp[0] != "hidden_power" {
            return Err(bad(ln, "expected `hidden_power <q>`"));
        }
        let hidden_power: f64 = hp[1].parse().map_err(|_| bad(ln, "bad hidden_power"))?;
        let (ln, lc) = next("layers")?;
        if lc.len() != 2 || lc[0] != "layers" {
            return Err(bad(ln, "expected `layers <count>`"));
        }
        let nl: usize = lc[1].parse().map_err(|_| bad(ln, "bad layer count"))?;
        let mut layers = Vec::with_capacity(nl);
        for _ in 0..nl {
            let (ln, f) = next("layer spec")?;
            if f.len() != 6 {
                return Err(bad(ln, "layer spec needs 6 fields"));
            }
            let u = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad integer"));
            let r = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad float"));
            layers.push(LayerSpec {
                in_width: u(f[0])?,
                out_width: u(f[1])?,
                grid_size: u(f[2])?,
                center_lo: r(f[3])?,
                center_hi: r(f[4])?,
                rbf_width: r(f[5])?,
            });
        }
        let (ln, pc) = next("params")?;
        if pc.len() != 2 || pc[0] != "params" {
            return Err(bad(ln, "expected `params <count>`"));
        }
        let np: usize = pc[1].parse().map_err(|_| bad(ln, "bad parameter count"))?;
        let mut params = Vec::with_capacity(np);
        for _ in 0..np {
            let (ln, f) = next("parameter")?;
            if f.len() != 1 {
                return Err(bad(ln, "one parameter per line"));
            }
            params.push(f[0].parse::<f64>().map_err(|_| bad(ln, "bad float"))?);
        }
        if let Ok((ln, _)) = next("") {
            return Err(bad(ln, "trailing content"));
        }
        Self::new(layers, params)?.with_hidden_power(hidden_power)
    }
}

/// Derivative of `sign(z)|z|^q`, i.e. `q|z|^(q-1)`, written as `q·h(z)/z`.
/// At `z = 0` with `q < 1` the slope is unbounded; the edge is treated as flat there.
fn transform_prime<S: Scalar>(a: S, q: f64) -> S {
    if a.value() == 0.0 {
        return S::constant(if q == 1.0 { 1.0 } else { 0.0 });
    }
    a.signed_pow(q) / a * q
}
