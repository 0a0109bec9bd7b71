//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! Hidden layers use ReLU and the output layer a logistic sigmoid, so every
//! output lies in (0, 1). Weights of a layer are stored as an `(in, out)`
//! matrix and a batch is a `(batch, in)` matrix, so a layer computes
//! `x.dot(W) + b`.

pub mod checkpoint;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub learning_rate: f64,
}

/// Layer outputs of a batched forward pass; `activations[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("at least the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn scale(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self.biases.iter_mut().for_each(|b| *b *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascend,
    Descend,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Mlp {
    /// Network with every parameter drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    pub fn new(dims: &[usize], learning_rate: f64, rng: &mut impl Rng) -> Result<Self> {
        Self::validate_dims(dims)?;
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for pair in dims.windows(2) {
            let bound = 1.0 / (pair[0] as f64).sqrt();
            weights.push(Array2::from_shape_fn((pair[0], pair[1]), |_| rng.random_range(-bound..=bound)));
            biases.push(Array1::from_shape_fn(pair[1], |_| rng.random_range(-bound..=bound)));
        }
        Self::from_parts(dims.to_vec(), weights, biases, learning_rate)
    }

    pub fn zeros(dims: &[usize], learning_rate: f64) -> Result<Self> {
        Self::validate_dims(dims)?;
        let weights = dims.windows(2).map(|p| Array2::zeros((p[0], p[1]))).collect();
        let biases = dims.windows(2).map(|p| Array1::zeros(p[1])).collect();
        Self::from_parts(dims.to_vec(), weights, biases, learning_rate)
    }

    pub fn from_parts(
        dims: Vec<usize>,
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        learning_rate: f64,
    ) -> Result<Self> {
        Self::validate_dims(&dims)?;
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(SimError::config("learning_rate", "must be positive"));
        }
        if weights.len() != dims.len() - 1 || biases.len() != dims.len() - 1 {
            return Err(SimError::dim("layer count", dims.len() - 1, weights.len()));
        }
        for (i, pair) in dims.windows(2).enumerate() {
            if weights[i].dim() != (pair[0], pair[1]) {
                return Err(SimError::dim("weight shape", pair[0] * pair[1], weights[i].len()));
            }
            if biases[i].len() != pair[1] {
                return Err(SimError::dim("bias length", pair[1], biases[i].len()));
            }
        }
        Ok(Self { dims, weights, biases, learning_rate })
    }

    fn validate_dims(dims: &[usize]) -> Result<()> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(SimError::config("layer_dims", "need at least two positive widths"));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_len(&self) -> usize {
        self.dims[0]
    }

    pub fn output_len(&self) -> usize {
        *self.dims.last().expect("validated")
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Batched forward pass keeping every layer output for `backward`.
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<ForwardCache> {
        if input.ncols() != self.input_len() {
            return Err(SimError::dim("network input", self.input_len(), input.ncols()));
        }
        let last = self.num_layers() - 1;
        let mut activations = Vec::with_capacity(self.num_layers() + 1);
        activations.push(input.to_owned());
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = activations[i].dot(w);
            z += b;
            if i == last {
                z.mapv_inplace(sigmoid);
            } else {
                z.mapv_inplace(|v| v.max(0.0));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|_| SimError::dim("network input", self.input_len(), input.len()))?;
        let cache = self.forward_batch(x)?;
        Ok(cache.output().row(0).to_vec())
    }

    /// Reverse pass. `output_grad` is dL/d(output) per sample; returned
    /// parameter gradients are summed over the batch, and the second value
    /// is dL/d(input) per sample.
    pub fn backward(&self, cache: &ForwardCache, output_grad: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        if cache.activations.len() != self.num_layers() + 1 {
            return Err(SimError::dim("forward cache", self.num_layers() + 1, cache.activations.len()));
        }
        let out = cache.output();
        if output_grad.dim() != out.dim() {
            return Err(SimError::dim("output gradient", out.len(), output_grad.len()));
        }
        let mut weights = Vec::with_capacity(self.num_layers());
        let mut biases = Vec::with_capacity(self.num_layers());
        // delta = dL/dz of the current layer.
        let mut delta = output_grad.to_owned();
        Zip::from(&mut delta).and(out).for_each(|d, &y| *d *= y * (1.0 - y));
        for i in (0..self.num_layers()).rev() {
            let a_prev = &cache.activations[i];
            weights.push(a_prev.t().dot(&delta));
            biases.push(delta.sum_axis(Axis(0)));
            let mut upstream = delta.dot(&self.weights[i].t());
            if i > 0 {
                Zip::from(&mut upstream)
                    .and(a_prev)
                    .for_each(|d, &a| if a <= 0.0 { *d = 0.0 });
            }
            delta = upstream;
        }
        weights.reverse();
        biases.reverse();
        Ok((Gradients { weights, biases }, delta))
    }

    /// `theta <- theta +/- lr * grad`; rejects non-finite gradients without
    /// touching the parameters.
    pub fn sgd_step(&mut self, grads: &Gradients, direction: Direction) -> Result<()> {
        if grads.weights.len() != self.num_layers() || grads.biases.len() != self.num_layers() {
            return Err(SimError::dim("gradient layers", self.num_layers(), grads.weights.len()));
        }
        for i in 0..self.num_layers() {
            if grads.weights[i].dim() != self.weights[i].dim() || grads.biases[i].len() != self.biases[i].len() {
                return Err(SimError::dim("gradient shape", self.weights[i].len(), grads.weights[i].len()));
            }
        }
        if !grads.is_finite() {
            return Err(SimError::Numerical("non-finite gradient".into()));
        }
        let step = match direction {
            Direction::Ascend => self.learning_rate,
            Direction::Descend => -self.learning_rate,
        };
        for i in 0..self.num_layers() {
            self.weights[i].scaled_add(step, &grads.weights[i]);
            self.biases[i].scaled_add(step, &grads.biases[i]);
        }
        Ok(())
    }

    /// `target <- tau * online + (1 - tau) * target`.
    pub fn soft_update(&mut self, online: &Mlp, tau: f64) -> Result<()> {
        if self.dims != online.dims {
            return Err(SimError::dim("soft update", self.parameter_count(), online.parameter_count()));
        }
        for (t, o) in self.weights.iter_mut().zip(&online.weights) {
            Zip::from(t).and(o).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        }
        for (t, o) in self.biases.iter_mut().zip(&online.biases) {
            Zip::from(t).and(o).for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        }
        Ok(())
    }

    /// Visit every parameter in checkpoint order: per layer, weights
    /// row-major then biases.
    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()))
    }
}

impl Gradients {
    /// Flattened in the same order as [`Mlp::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use ndarray::array;

    #[test]
    fn zero_net_outputs_half() {
        let net = Mlp::zeros(&[4, 3, 2], 0.1).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let single = Mlp::zeros(&[1, 1], 0.1).unwrap();
        assert_eq!(single.forward(&[3.0]).unwrap(), vec![0.5]);
        assert!(matches!(net.forward(&[1.0]), Err(SimError::Dimension { .. })));
    }

    #[test]
    fn one_layer_derivative_is_exact() {
        let net = Mlp::from_parts(vec![1, 1], vec![array![[0.7]]], vec![array![-0.2]], 0.1).unwrap();
        let x = array![[1.3]];
        let cache = net.forward_batch(x.view()).unwrap();
        let (g, gx) = net.backward(&cache, array![[1.0]].view()).unwrap();
        let y = sigmoid(0.7 * 1.3 - 0.2);
        let s = y * (1.0 - y);
        assert!((g.weights[0][[0, 0]] - s * 1.3).abs() < 1e-12);
        assert!((g.biases[0][0] - s).abs() < 1e-12);
        assert!((gx[[0, 0]] - s * 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let mut rng = seeds::substream(1, seeds::INIT);
        let net = Mlp::new(&[5, 8, 3], 0.1, &mut rng).unwrap();
        let x = Array2::from_elem((4, 5), 0.3);
        let cache = net.forward_batch(x.view()).unwrap();
        let (g, gx) = net.backward(&cache, Array2::zeros((4, 3)).view()).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
        assert!(gx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sgd_arithmetic_and_rejection() {
        let mut net = Mlp::from_parts(vec![1, 1], vec![array![[1.0]]], vec![array![0.0]], 0.1).unwrap();
        let g = Gradients { weights: vec![array![[2.0]]], biases: vec![array![0.0]] };
        net.sgd_step(&g, Direction::Descend).unwrap();
        assert!((net.weights[0][[0, 0]] - 0.8).abs() < 1e-15);
        let before = net.clone();
        let zero = Gradients { weights: vec![array![[0.0]]], biases: vec![array![0.0]] };
        net.sgd_step(&zero, Direction::Ascend).unwrap();
        assert_eq!(net, before);
        let bad = Gradients { weights: vec![array![[f64::NAN]]], biases: vec![array![0.0]] };
        assert!(matches!(net.sgd_step(&bad, Direction::Ascend), Err(SimError::Numerical(_))));
        assert_eq!(net, before);
    }

    #[test]
    fn soft_update_examples() {
        let mut target = Mlp::zeros(&[2, 2], 0.1).unwrap();
        let mut online = target.clone();
        online.parameters_mut().for_each(|p| *p = 1.0);
        target.soft_update(&online, 0.001).unwrap();
        assert!(target.parameters().all(|p| (p - 0.001).abs() < 1e-15));
        for _ in 0..99 {
            target.soft_update(&online, 0.001).unwrap();
        }
        let expected = 1.0 - 0.999f64.powi(100);
        assert!(target.parameters().all(|p| (p - expected).abs() < 1e-12));
        target.soft_update(&online, 1.0).unwrap();
        assert_eq!(target, online);
        let other = Mlp::zeros(&[2, 3], 0.1).unwrap();
        assert!(target.soft_update(&other, 0.5).is_err());
    }
}
