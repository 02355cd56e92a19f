//! Fully-connected network over a flat parameter vector: tanh hidden layers,
//! linear output, hand-written backprop.

use rand::Rng;
use rand_distr::StandardNormal;

/// Layer widths, input first. Parameters are laid out layer by layer as a
/// row-major `out x in` weight block followed by `out` biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    sizes: Vec<usize>,
}

/// Activations of one forward pass, input included; needed for backprop.
#[derive(Debug, Clone)]
pub struct Trace {
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("trace has layers")
    }
}

impl Mlp {
    pub fn new(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output widths");
        assert!(sizes.iter().all(|&s| s > 0));
        Mlp { sizes: sizes.to_vec() }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut offset = 0;
        self.sizes.windows(2).map(move |w| {
            let start = offset;
            offset += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> Trace {
        debug_assert_eq!(params.len(), self.num_params());
        debug_assert_eq!(x.len(), self.input_dim());
        let last = self.sizes.len() - 2;
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.to_vec());
        for (l, (start, n_in, n_out)) in self.layers().enumerate() {
            let input = &acts[l];
            let w = &params[start..start + n_in * n_out];
            let b = &params[start + n_in * n_out..start + n_in * n_out + n_out];
            let mut out = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let z = b[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                out.push(if l == last { z } else { z.tanh() });
            }
            acts.push(out);
        }
        Trace { acts }
    }

    /// Accumulates `d_out^T * d(output)/d(params)` into `grad`.
    pub fn backward(&self, params: &[f64], trace: &Trace, d_out: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.num_params());
        let layers: Vec<_> = self.layers().collect();
        let last = layers.len() - 1;
        let mut delta = d_out.to_vec();
        for (l, &(start, n_in, n_out)) in layers.iter().enumerate().rev() {
            if l != last {
                // through tanh: d/dz = (1 - a^2)
                for (d, a) in delta.iter_mut().zip(&trace.acts[l + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let input = &trace.acts[l];
            let (gw, gb) = grad[start..start + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for o in 0..n_out {
                gb[o] += delta[o];
                let row = &mut gw[o * n_in..(o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += delta[o] * a;
                }
            }
            if l > 0 {
                let w = &params[start..start + n_in * n_out];
                let mut prev = vec![0.0; n_in];
                for o in 0..n_out {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    for (p, wv) in prev.iter_mut().zip(row) {
                        *p += delta[o] * wv;
                    }
                }
                delta = prev;
            }
        }
    }

    /// Orthogonal init: each weight block is an orthonormal matrix scaled by
    /// `hidden_gain` (or `output_gain` for the final layer); biases zero.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R, hidden_gain: f64, output_gain: f64) -> Vec<f64> {
        let mut params = vec![0.0; self.num_params()];
        let n_layers = self.sizes.len() - 1;
        for (l, (start, n_in, n_out)) in self.layers().enumerate() {
            let gain = if l + 1 == n_layers { output_gain } else { hidden_gain };
            let w = orthogonal(rng, n_out, n_in);
            for (p, v) in params[start..start + n_in * n_out].iter_mut().zip(w) {
                *p = gain * v;
            }
        }
        params
    }
}

/// `rows x cols` row-major matrix with orthonormal rows or columns
/// (whichever is the shorter side), via Gram-Schmidt on a Gaussian draw.
fn orthogonal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<f64> {
    let (long, short) = if rows >= cols { (rows, cols) } else { (cols, rows) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| rng.sample(StandardNormal)).collect();
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut m = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            m[r * cols + c] = if rows >= cols { basis[c][r] } else { basis[r][c] };
        }
    }
    m
}
