//! Fully connected layers with exact reverse-mode gradients.
//!
//! A forward pass returns a [`Tape`] holding every intermediate needed for
//! the backward pass, stamped with the network's parameter version so a
//! tape cannot be replayed against weights it was not computed with.

use super::matrix::Matrix;
use super::Rng;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NumError {
    #[error("shape mismatch at {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("stale tape: parameters are at version {params} but the tape was recorded at {tape}")]
    StaleTape { params: u64, tape: u64 },
    #[error("non-finite gradient ({value}) at parameter index {index}")]
    NonFiniteGradient { index: usize, value: f64 },
}

/// Elementwise nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Rectifier,
    Identity,
    Logistic,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation output `y = f(z)`.
    /// (All three activations allow this, and the tape then only needs to
    /// keep post-activation values.)
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Logistic => y * (1.0 - y),
        }
    }
}

/// One affine layer: `y = f(x·Wᵀ + b)` with `W: out×in`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    /// Glorot-uniform initialization; biases start at zero.
    pub fn init(inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> DenseLayer {
        let bound = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..outputs * inputs)
            .map(|_| (rng.uniform() * 2.0 - 1.0) * bound)
            .collect();
        DenseLayer {
            w: Matrix::from_vec(outputs, inputs, data),
            b: vec![0.0; outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn outputs(&self) -> usize {
        self.w.rows()
    }

    fn param_count(&self) -> usize {
        self.w.rows() * self.w.cols() + self.b.len()
    }
}

/// A stack of dense layers.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
    /// Bumped on every parameter write; tapes carry the version they saw.
    version: u64,
}

/// Intermediates of one forward pass: the input to each layer and each
/// layer's post-activation output.
#[derive(Debug)]
pub struct Tape {
    version: u64,
    /// `values[0]` is the network input, `values[i]` the output of layer
    /// `i-1`; the last entry is the network output.
    values: Vec<Matrix>,
}

impl Tape {
    pub fn output(&self) -> &Matrix {
        self.values.last().unwrap()
    }
}

/// Gradients aligned with [`Mlp::params`] order.
#[derive(Debug)]
pub struct Gradients {
    pub flat: Vec<f64>,
    /// Gradient with respect to the network input.
    pub input: Matrix,
}

impl Mlp {
    /// Builds a network from layer sizes: `sizes[0]` inputs, hidden layers
    /// with `hidden_activation`, and a final layer with `output_activation`.
    pub fn init(
        sizes: &[usize],
        hidden_activation: Activation,
        output_activation: Activation,
        rng: &mut Rng,
    ) -> Mlp {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for i in 0..sizes.len() - 1 {
            let act = if i + 2 == sizes.len() {
                output_activation
            } else {
                hidden_activation
            };
            layers.push(DenseLayer::init(sizes[i], sizes[i + 1], act, rng));
        }
        Mlp { layers, version: 0 }
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Mlp {
        for pair in layers.windows(2) {
            assert_eq!(
                pair[0].outputs(),
                pair[1].inputs(),
                "adjacent layer shapes must chain"
            );
        }
        Mlp { layers, version: 0 }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn inputs(&self) -> usize {
        self.layers.first().unwrap().inputs()
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().unwrap().outputs()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// Flattens all parameters (per layer: W row-major, then b).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.w.data());
            out.extend_from_slice(&layer.b);
        }
        out
    }

    /// Writes back a flat parameter vector and invalidates outstanding
    /// tapes.
    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "parameter count mismatch");
        let mut offset = 0;
        for layer in &mut self.layers {
            let wlen = layer.w.rows() * layer.w.cols();
            layer.w.data_mut().copy_from_slice(&flat[offset..offset + wlen]);
            offset += wlen;
            let blen = layer.b.len();
            layer.b.copy_from_slice(&flat[offset..offset + blen]);
            offset += blen;
        }
        self.version += 1;
    }

    /// Forward pass over a batch (rows are samples).
    pub fn forward(&self, x: &Matrix) -> Result<Tape, NumError> {
        if x.cols() != self.inputs() {
            return Err(NumError::Shape {
                context: "forward input width",
                expected: self.inputs(),
                got: x.cols(),
            });
        }
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.clone());
        for layer in &self.layers {
            let mut z = values.last().unwrap().mul_t(&layer.w);
            z.add_row_broadcast(&layer.b);
            for v in z.data_mut() {
                *v = layer.activation.apply(*v);
            }
            values.push(z);
        }
        Ok(Tape {
            version: self.version,
            values,
        })
    }

    /// Reverse pass. `output_grad` is dL/d(output), same shape as the
    /// tape's output; returns parameter gradients (flat, summed over the
    /// batch) and the input gradient.
    pub fn backward(&self, tape: &Tape, output_grad: &Matrix) -> Result<Gradients, NumError> {
        if tape.version != self.version {
            return Err(NumError::StaleTape {
                params: self.version,
                tape: tape.version,
            });
        }
        let out = tape.output();
        if output_grad.rows() != out.rows() || output_grad.cols() != out.cols() {
            return Err(NumError::Shape {
                context: "backward output gradient",
                expected: out.rows() * out.cols(),
                got: output_grad.rows() * output_grad.cols(),
            });
        }

        let mut flat = vec![0.0; self.param_count()];
        // Per-layer slice boundaries of the flat vector, front to back.
        let mut bounds = Vec::with_capacity(self.layers.len());
        let mut offset = 0;
        for layer in &self.layers {
            bounds.push(offset);
            offset += layer.param_count();
        }

        let mut grad = output_grad.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let y = &tape.values[idx + 1];
            let input = &tape.values[idx];
            // dL/dz = dL/dy ⊙ f'(z), with f' written in terms of y.
            for (g, &yv) in grad.data_mut().iter_mut().zip(y.data()) {
                *g *= layer.activation.derivative_from_output(yv);
            }
            let wgrad = grad.t_mul(input);
            let bgrad = grad.col_sum();
            let start = bounds[idx];
            let wlen = wgrad.rows() * wgrad.cols();
            flat[start..start + wlen].copy_from_slice(wgrad.data());
            flat[start + wlen..start + wlen + bgrad.len()].copy_from_slice(&bgrad);
            grad = grad.mul(&layer.w);
        }
        Ok(Gradients { flat, input: grad })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_x(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.uniform() * 2.0 - 1.0).collect(),
        )
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut eye = Matrix::zeros(3, 3);
        for i in 0..3 {
            eye.set(i, i, 1.0);
        }
        let mlp = Mlp::from_layers(vec![DenseLayer {
            w: eye,
            b: vec![0.0; 3],
            activation: Activation::Identity,
        }]);
        let mut rng = Rng::new(1);
        let x = random_x(&mut rng, 4, 3);
        let tape = mlp.forward(&x).unwrap();
        assert_eq!(tape.output(), &x);
    }

    #[test]
    fn rectifier_clamps_negatives() {
        let mlp = Mlp::from_layers(vec![DenseLayer {
            w: Matrix::from_vec(1, 1, vec![1.0]),
            b: vec![0.0],
            activation: Activation::Rectifier,
        }]);
        let x = Matrix::from_vec(3, 1, vec![-2.0, 0.0, 1.5]);
        let tape = mlp.forward(&x).unwrap();
        assert_eq!(tape.output().data(), &[0.0, 0.0, 1.5]);
    }

    #[test]
    fn one_layer_identity_gradients_have_closed_form() {
        // y = x·Wᵀ + b, L = Σ g⊙y: dW = gᵀ·x, db = Σ_batch g, dx = g·W.
        let mut rng = Rng::new(5);
        let mlp = Mlp::init(&[3, 2], Activation::Identity, Activation::Identity, &mut rng);
        let x = random_x(&mut rng, 4, 3);
        let g = random_x(&mut rng, 4, 2);
        let tape = mlp.forward(&x).unwrap();
        let grads = mlp.backward(&tape, &g).unwrap();

        let dw = g.t_mul(&x);
        let db = g.col_sum();
        assert_eq!(&grads.flat[..6], dw.data());
        assert_eq!(&grads.flat[6..8], db.as_slice());
        let dx = g.mul(&mlp.layers()[0].w);
        assert_eq!(grads.input, dx);
    }

    #[test]
    fn zero_output_gradient_gives_zero_parameter_gradients() {
        let mut rng = Rng::new(6);
        let mlp = Mlp::init(&[4, 5, 3], Activation::Rectifier, Activation::Logistic, &mut rng);
        let x = random_x(&mut rng, 2, 4);
        let tape = mlp.forward(&x).unwrap();
        let grads = mlp.backward(&tape, &Matrix::zeros(2, 3)).unwrap();
        assert!(grads.flat.iter().all(|&g| g == 0.0));
        assert!(grads.input.data().iter().all(|&g| g == 0.0));
    }

    /// Central finite differences of L(params) = Σ 0.5·out² confirm the
    /// analytic gradients for every activation.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(9);
        for &acts in &[
            (Activation::Rectifier, Activation::Identity),
            (Activation::Logistic, Activation::Logistic),
            (Activation::Identity, Activation::Rectifier),
        ] {
            let mut mlp = Mlp::init(&[5, 7, 4, 3], acts.0, acts.1, &mut rng);
            let x = random_x(&mut rng, 2, 5);

            let tape = mlp.forward(&x).unwrap();
            let gout = tape.output().clone();
            let analytic = mlp.backward(&tape, &gout).unwrap().flat;

            let loss = |mlp: &Mlp| -> f64 {
                let out = mlp.forward(&x).unwrap();
                out.output().data().iter().map(|v| 0.5 * v * v).sum()
            };
            let mut params = mlp.params();
            let h = 1e-5;
            let mut worst = 0.0f64;
            for i in 0..params.len() {
                let orig = params[i];
                params[i] = orig + h;
                mlp.set_params(&params);
                let up = loss(&mlp);
                params[i] = orig - h;
                mlp.set_params(&params);
                let down = loss(&mlp);
                params[i] = orig;
                let fd = (up - down) / (2.0 * h);
                let denom = analytic[i].abs().max(fd.abs()).max(1e-8);
                worst = worst.max((analytic[i] - fd).abs() / denom);
            }
            mlp.set_params(&params);
            assert!(worst < 1e-4, "max relative error {worst:.3e} for {acts:?}");
        }
    }

    #[test]
    fn stale_tapes_are_rejected() {
        let mut rng = Rng::new(12);
        let mut mlp = Mlp::init(&[3, 2], Activation::Identity, Activation::Identity, &mut rng);
        let x = random_x(&mut rng, 1, 3);
        let tape = mlp.forward(&x).unwrap();
        let params = mlp.params();
        mlp.set_params(&params);
        let err = mlp.backward(&tape, &Matrix::zeros(1, 2)).unwrap_err();
        assert_eq!(err, NumError::StaleTape { params: 1, tape: 0 });
    }

    #[test]
    fn shape_errors_are_reported() {
        let mut rng = Rng::new(13);
        let mlp = Mlp::init(&[3, 2], Activation::Identity, Activation::Identity, &mut rng);
        let err = mlp.forward(&Matrix::zeros(1, 4)).unwrap_err();
        assert!(matches!(err, NumError::Shape { expected: 3, got: 4, .. }), "{err}");
        let tape = mlp.forward(&Matrix::zeros(1, 3)).unwrap();
        let err = mlp.backward(&tape, &Matrix::zeros(1, 5)).unwrap_err();
        assert!(matches!(err, NumError::Shape { .. }), "{err}");
    }

    #[test]
    fn params_round_trip() {
        let mut rng = Rng::new(14);
        let mut mlp = Mlp::init(&[6, 4, 2], Activation::Rectifier, Activation::Identity, &mut rng);
        let params = mlp.params();
        assert_eq!(params.len(), mlp.param_count());
        let doubled: Vec<f64> = params.iter().map(|p| p * 2.0).collect();
        mlp.set_params(&doubled);
        assert_eq!(mlp.params(), doubled);
    }
}
