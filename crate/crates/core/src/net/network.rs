use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis, CowArray, Ix2, Zip};

use super::{sigmoid, ArchitectureSpec, Scalar};
use crate::rng::{self, tag};
use crate::{Error, Result};

/// Weights `(fan_in, fan_out)` and bias `(fan_out)` of one affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F> {
    pub weights: Array2<F>,
    pub bias: Array1<F>,
}

impl<F: Scalar> Dense<F> {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense {
            weights: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    fn glorot(fan_in: usize, fan_out: usize, rng: &mut rng::Rng) -> Self {
        Self::uniform(fan_in, fan_out, fan_in + fan_out, rng)
    }

    /// Weights uniform in `±sqrt(6 / fan_sum)`.
    fn uniform(fan_in: usize, fan_out: usize, fan_sum: usize, rng: &mut rng::Rng) -> Self {
        let limit = (6.0 / fan_sum as f64).sqrt();
        let weights = Array2::from_shape_simple_fn((fan_in, fan_out), || {
            F::from_f64((2.0 * rng::unit_f64(rng) - 1.0) * limit).unwrap()
        });
        Dense {
            weights,
            bias: Array1::zeros(fan_out),
        }
    }
}

/// All trainable parameters, in layer order. Gradients share this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters<F> {
    pub hidden: Vec<Dense<F>>,
    /// Column `2j` is the class-0 logit of bit `j`, column `2j + 1` class 1.
    pub head: Dense<F>,
}

impl<F: Scalar> Parameters<F> {
    pub fn zeros_like(spec: &ArchitectureSpec) -> Self {
        let hidden = spec
            .hidden_sizes
            .iter()
            .enumerate()
            .map(|(l, &w)| Dense::zeros(spec.fan_in(l), w))
            .collect();
        let head = Dense::zeros(spec.fan_in(spec.hidden_sizes.len()), 2 * spec.output_bit_count);
        Parameters { hidden, head }
    }

    fn layers(&self) -> impl Iterator<Item = &Dense<F>> {
        self.hidden.iter().chain(std::iter::once(&self.head))
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense<F>> {
        self.hidden.iter_mut().chain(std::iter::once(&mut self.head))
    }

    /// Weight then bias of every layer, hidden layers first, heads last.
    pub fn slices(&self) -> Vec<&[F]> {
        self.layers()
            .flat_map(|d| {
                [
                    d.weights.as_slice().expect("standard layout"),
                    d.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [F]> {
        self.layers_mut()
            .flat_map(|d| {
                [
                    d.weights.as_slice_mut().expect("standard layout"),
                    d.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &Parameters<F>) -> bool {
        self.hidden.len() == other.hidden.len()
            && self.layers().zip(other.layers()).all(|(a, b)| {
                a.weights.dim() == b.weights.dim() && a.bias.dim() == b.bias.dim()
            })
    }

    pub fn cast<G: Scalar>(&self) -> Parameters<G> {
        let c = |d: &Dense<F>| Dense {
            weights: d.weights.mapv(|v| G::from(v).unwrap()),
            bias: d.bias.mapv(|v| G::from(v).unwrap()),
        };
        Parameters {
            hidden: self.hidden.iter().map(c).collect(),
            head: c(&self.head),
        }
    }
}

/// Per-example, per-bit class probabilities `(p0, p1)`, shape `(B, n, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBatch {
    pub probs: Array3<f64>,
}

impl PredictionBatch {
    fn from_logits<F: Scalar>(logits: &Array2<F>) -> Self {
        let (b, two_n) = logits.dim();
        let n = two_n / 2;
        let mut probs = Array3::zeros((b, n, 2));
        for i in 0..b {
            for j in 0..n {
                let z0 = logits[[i, 2 * j]].to_f64().unwrap();
                let z1 = logits[[i, 2 * j + 1]].to_f64().unwrap();
                let m = z0.max(z1);
                let (e0, e1) = ((z0 - m).exp(), (z1 - m).exp());
                probs[[i, j, 0]] = e0 / (e0 + e1);
                probs[[i, j, 1]] = e1 / (e0 + e1);
            }
        }
        PredictionBatch { probs }
    }

    pub fn examples(&self) -> usize {
        self.probs.dim().0
    }

    pub fn bits(&self) -> usize {
        self.probs.dim().1
    }

    /// Argmax per bit; an exact tie predicts 0.
    pub fn predict_bits(&self) -> Array2<u8> {
        let (b, n, _) = self.probs.dim();
        Array2::from_shape_fn((b, n), |(i, j)| {
            (self.probs[[i, j, 1]] > self.probs[[i, j, 0]]) as u8
        })
    }
}

/// A dense network with one two-class softmax head per output bit.
#[derive(Debug, Clone, PartialEq)]
pub struct MimicNetwork<F = f32> {
    spec: ArchitectureSpec,
    params: Parameters<F>,
    parameter_seed: u64,
}

/// Hidden-layer outputs kept for backpropagation.
struct Trace<F> {
    hidden: Vec<Array2<F>>,
    logits: Array2<F>,
}

impl<F: Scalar> MimicNetwork<F> {
    /// Glorot-uniform weights and zero biases, drawn layer by layer (row-major)
    /// from the seed's initialisation stream.
    pub fn build(spec: &ArchitectureSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut r = rng::rng(rng::derive_seed(seed, tag::INIT));
        let hidden = spec
            .hidden_sizes
            .iter()
            .enumerate()
            .map(|(l, &w)| Dense::glorot(spec.fan_in(l), w, &mut r))
            .collect();
        // n independent heads, each a fan_out = 2 map, drawn side by side.
        let fan_in = spec.fan_in(spec.hidden_sizes.len());
        let head = Dense::uniform(fan_in, 2 * spec.output_bit_count, fan_in + 2, &mut r);
        Ok(MimicNetwork {
            spec: spec.clone(),
            params: Parameters { hidden, head },
            parameter_seed: seed,
        })
    }

    /// All parameters zero.
    pub fn zeroed(spec: &ArchitectureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(MimicNetwork {
            spec: spec.clone(),
            params: Parameters::zeros_like(spec),
            parameter_seed: 0,
        })
    }

    pub fn from_parts(spec: ArchitectureSpec, params: Parameters<F>, parameter_seed: u64) -> Result<Self> {
        spec.validate()?;
        if !Parameters::<F>::zeros_like(&spec).same_shape(&params) {
            return Err(Error::Shape("parameters do not match architecture".into()));
        }
        Ok(MimicNetwork {
            spec,
            params,
            parameter_seed,
        })
    }

    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn parameter_seed(&self) -> u64 {
        self.parameter_seed
    }

    pub fn params(&self) -> &Parameters<F> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Parameters<F> {
        &mut self.params
    }

    pub fn cast<G: Scalar>(&self) -> MimicNetwork<G> {
        MimicNetwork {
            spec: self.spec.clone(),
            params: self.params.cast(),
            parameter_seed: self.parameter_seed,
        }
    }

    fn check_input(&self, x: &ArrayView2<F>) -> Result<()> {
        if x.ncols() != self.spec.input_width {
            return Err(Error::Shape(format!(
                "batch has {} columns, network takes {}",
                x.ncols(),
                self.spec.input_width
            )));
        }
        Ok(())
    }

    /// Concatenated input of `layer`.
    fn layer_input<'a>(
        &self,
        layer: usize,
        x: &'a ArrayView2<'_, F>,
        hidden: &'a [Array2<F>],
    ) -> CowArray<'a, F, Ix2> {
        let sources = self.spec.sources(layer);
        let view = |s: Option<usize>| match s {
            None => x.view(),
            Some(k) => hidden[k].view(),
        };
        if let [only] = sources[..] {
            return CowArray::from(view(only));
        }
        let views: Vec<ArrayView2<F>> = sources.into_iter().map(view).collect();
        CowArray::from(ndarray::concatenate(Axis(1), &views).expect("same row count"))
    }

    fn affine(input: &ArrayView2<F>, layer: &Dense<F>) -> Array2<F> {
        let mut z = Array2::zeros((input.nrows(), layer.weights.ncols()));
        z.rows_mut()
            .into_iter()
            .for_each(|mut row| row.assign(&layer.bias));
        general_mat_mul(F::one(), input, &layer.weights, F::one(), &mut z);
        z
    }

    fn trace(&self, x: &ArrayView2<F>) -> Trace<F> {
        let act = self.spec.activation;
        let mut hidden: Vec<Array2<F>> = Vec::with_capacity(self.params.hidden.len());
        for (l, layer) in self.params.hidden.iter().enumerate() {
            let input = self.layer_input(l, x, &hidden);
            let mut z = Self::affine(&input.view(), layer);
            F::activate(act, z.as_slice_mut().expect("standard layout"));
            hidden.push(z);
        }
        let input = self.layer_input(self.params.hidden.len(), x, &hidden);
        let logits = Self::affine(&input.view(), &self.params.head);
        Trace { hidden, logits }
    }

    /// Raw head logits, shape `(B, 2n)`.
    pub fn logits(&self, x: ArrayView2<F>) -> Result<Array2<F>> {
        self.check_input(&x)?;
        Ok(self.trace(&x).logits)
    }

    pub fn forward(&self, x: ArrayView2<F>) -> Result<PredictionBatch> {
        Ok(PredictionBatch::from_logits(&self.logits(x)?))
    }

    /// Predicted bits: 1 iff the class-1 logit is strictly larger.
    pub fn predict_bits(&self, x: ArrayView2<F>) -> Result<Array2<u8>> {
        let z = self.logits(x)?;
        let n = self.spec.output_bit_count;
        Ok(Array2::from_shape_fn((z.nrows(), n), |(i, j)| {
            (z[[i, 2 * j + 1]] > z[[i, 2 * j]]) as u8
        }))
    }

    fn check_targets(&self, x: &ArrayView2<F>, targets: &ArrayView2<u8>) -> Result<()> {
        if targets.dim() != (x.nrows(), self.spec.output_bit_count) {
            return Err(Error::Shape(format!(
                "targets are {:?}, expected ({}, {})",
                targets.dim(),
                x.nrows(),
                self.spec.output_bit_count
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        Ok(())
    }

    /// Mean over examples of the summed per-bit cross-entropy.
    pub fn loss(&self, x: ArrayView2<F>, targets: ArrayView2<u8>) -> Result<f64> {
        self.check_input(&x)?;
        self.check_targets(&x, &targets)?;
        cross_entropy(&self.trace(&x).logits, &targets)
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<F>,
        targets: ArrayView2<u8>,
    ) -> Result<(f64, Parameters<F>)> {
        self.check_input(&x)?;
        self.check_targets(&x, &targets)?;
        let trace = self.trace(&x);
        let loss = cross_entropy(&trace.logits, &targets)?;

        let b = x.nrows();
        let scale = F::one() / F::from_usize(b).unwrap();
        // d loss / d z1 = (p1 - y) / B and d / d z0 is its negation.
        let mut dz = Array2::<F>::zeros(trace.logits.dim());
        for i in 0..b {
            for j in 0..self.spec.output_bit_count {
                let p1 = sigmoid(trace.logits[[i, 2 * j + 1]] - trace.logits[[i, 2 * j]]);
                let g = (p1 - F::from_u8(targets[[i, j]]).unwrap()) * scale;
                dz[[i, 2 * j]] = -g;
                dz[[i, 2 * j + 1]] = g;
            }
        }

        let depth = self.params.hidden.len();
        let mut grads = Parameters::zeros_like(&self.spec);
        let mut d_hidden: Vec<Option<Array2<F>>> = vec![None; depth];
        let act = self.spec.activation;

        for layer in (0..=depth).rev() {
            let (weights, grad) = if layer == depth {
                (&self.params.head.weights, &mut grads.head)
            } else {
                let mut d = d_hidden[layer]
                    .take()
                    .expect("every hidden layer feeds a later layer");
                Zip::from(&mut d)
                    .and(&trace.hidden[layer])
                    .for_each(|g, &y| *g = *g * act.derivative_from_output(y));
                dz = d;
                (&self.params.hidden[layer].weights, &mut grads.hidden[layer])
            };

            let input = self.layer_input(layer, &x, &trace.hidden);
            general_mat_mul(F::one(), &input.t(), &dz, F::zero(), &mut grad.weights);
            grad.bias = dz.sum_axis(Axis(0));

            let mut row = 0;
            for src in self.spec.sources(layer) {
                let width = self.spec.width_of(src);
                if let Some(k) = src {
                    let w_part = weights.slice(s![row..row + width, ..]);
                    let acc = d_hidden[k].get_or_insert_with(|| Array2::zeros((b, width)));
                    general_mat_mul(F::one(), &dz, &w_part.t(), F::one(), acc);
                }
                row += width;
            }
        }
        Ok((loss, grads))
    }
}

/// Two-class cross-entropy summed over bits and averaged over rows,
/// evaluated in `f64` with probabilities clamped to `[1e-12, 1 - 1e-12]`.
fn cross_entropy<F: Scalar>(logits: &Array2<F>, targets: &ArrayView2<u8>) -> Result<f64> {
    const EPS: f64 = 1e-12;
    let (b, n) = targets.dim();
    let mut total = 0.0f64;
    for i in 0..b {
        for j in 0..n {
            let z0 = logits[[i, 2 * j]].to_f64().unwrap();
            let z1 = logits[[i, 2 * j + 1]].to_f64().unwrap();
            let p1 = sigmoid(z1 - z0);
            let p = if targets[[i, j]] == 1 { p1 } else { 1.0 - p1 };
            total -= p.clamp(EPS, 1.0 - EPS).ln();
        }
    }
    let loss = total / b as f64;
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("loss is {loss}")));
    }
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Activation, ArchKind};
    use ndarray::array;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut r = rng::rng(seed);
        Array2::from_shape_simple_fn((rows, cols), || 2.0 * rng::unit_f64(&mut r) - 1.0)
    }

    fn random_bits(rows: usize, cols: usize, seed: u64) -> Array2<u8> {
        let mut r = rng::rng(seed);
        Array2::from_shape_simple_fn((rows, cols), || rng::below(&mut r, 2) as u8)
    }

    /// Central differences over every parameter, independent of backprop.
    fn finite_difference(
        net: &MimicNetwork<f64>,
        x: &Array2<f64>,
        y: &Array2<u8>,
        h: f64,
    ) -> Vec<f64> {
        let mut probe = net.clone();
        let n_slices = probe.params.slices().len();
        let mut out = Vec::new();
        for s in 0..n_slices {
            let len = probe.params.slices()[s].len();
            for k in 0..len {
                let orig = probe.params.slices()[s][k];
                probe.params.slices_mut()[s][k] = orig + h;
                let up = probe.loss(x.view(), y.view()).unwrap();
                probe.params.slices_mut()[s][k] = orig - h;
                let down = probe.loss(x.view(), y.view()).unwrap();
                probe.params.slices_mut()[s][k] = orig;
                out.push((up - down) / (2.0 * h));
            }
        }
        out
    }

    fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
        analytic
            .iter()
            .zip(numeric)
            .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
            .fold(0.0, f64::max)
    }

    fn check(spec: ArchitectureSpec, seed: u64) {
        let mut net = MimicNetwork::<f64>::build(&spec, seed).unwrap();
        // Nonzero biases keep ReLU pre-activations away from the kink, where
        // central differences are meaningless.
        let mut r = rng::rng(seed + 3);
        for layer in net.params.layers_mut() {
            layer.bias.mapv_inplace(|_| 0.5 * rng::unit_f64(&mut r) + 0.1);
        }
        let x = random_matrix(4, spec.input_width, seed + 1);
        let y = random_bits(4, spec.output_bit_count, seed + 2);
        let (_, grads) = net.loss_and_gradients(x.view(), y.view()).unwrap();
        let analytic: Vec<f64> = grads.slices().concat();
        let numeric = finite_difference(&net, &x, &y, 1e-5);
        assert_eq!(analytic.len(), numeric.len());
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-4, "{}: relative error {err}", spec.id());
    }

    fn scaled_suite(act: Activation) -> Vec<ArchitectureSpec> {
        vec![
            ArchitectureSpec::custom(5, 3, vec![8], act, false),
            ArchitectureSpec::custom(5, 3, vec![4, 4, 4, 4], act, false),
            ArchitectureSpec::custom(5, 3, vec![3, 6, 6, 3], act, true),
        ]
    }

    #[test]
    fn gradients_match_finite_differences() {
        for act in Activation::ALL {
            for (i, spec) in scaled_suite(act).into_iter().enumerate() {
                check(spec, 100 + i as u64);
            }
        }
        check(ArchitectureSpec::custom(6, 1, vec![], Activation::Sigmoid, false), 7);
        check(ArchitectureSpec::custom(6, 2, vec![5], Activation::Tanh, true), 8);
    }

    #[test]
    fn build_shapes() {
        let fat = ArchitectureSpec::new(ArchKind::FatShallow, 64, 64, Activation::Sigmoid);
        let net = MimicNetwork::<f32>::build(&fat, 1).unwrap();
        assert_eq!(net.params.hidden.len(), 1);
        assert_eq!(net.params.hidden[0].weights.dim(), (64, 1000));
        assert_eq!(net.params.head.weights.dim(), (1000, 128));

        let deep = ArchitectureSpec::new(ArchKind::DeepThin, 48, 1, Activation::Sigmoid);
        let net = MimicNetwork::<f32>::build(&deep, 1).unwrap();
        let widths: Vec<usize> = net.params.hidden.iter().map(|d| d.weights.ncols()).collect();
        assert_eq!(widths, vec![128; 4]);
        assert_eq!(net.params.head.weights.dim(), (128, 2));

        let cas = ArchitectureSpec::new(ArchKind::Cascade, 64, 64, Activation::Sigmoid);
        let net = MimicNetwork::<f32>::build(&cas, 1).unwrap();
        assert_eq!(net.params.hidden[3].weights.nrows(), 256 + 256);
        assert_eq!(net.params.len(), cas.parameter_count());
    }

    #[test]
    fn build_is_deterministic() {
        let spec = ArchitectureSpec::new(ArchKind::Cascade, 10, 3, Activation::Tanh);
        let a = MimicNetwork::<f32>::build(&spec, 5).unwrap();
        let b = MimicNetwork::<f32>::build(&spec, 5).unwrap();
        let c = MimicNetwork::<f32>::build(&spec, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params, c.params);
        let limit = (6.0f32 / (10 + 128) as f32).sqrt();
        assert!(a.params.hidden[0].weights.iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn zero_network_is_uniform() {
        let spec = ArchitectureSpec::new(ArchKind::FatShallow, 8, 5, Activation::Sigmoid);
        let net = MimicNetwork::<f64>::zeroed(&spec).unwrap();
        let x = random_matrix(7, 8, 3);
        let p = net.forward(x.view()).unwrap();
        assert_eq!(p.probs.dim(), (7, 5, 2));
        assert!(p.probs.iter().all(|&v| v == 0.5));
        assert_eq!(net.predict_bits(x.view()).unwrap(), Array2::<u8>::zeros((7, 5)));
        assert_eq!(p.predict_bits(), Array2::<u8>::zeros((7, 5)));
        let y = random_bits(7, 5, 4);
        let loss = net.loss(x.view(), y.view()).unwrap();
        assert!((loss - 5.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn hand_computed_toy() {
        // 1 input -> 1 sigmoid unit -> 1 head. x = 1, w1 = 2, b1 = -1,
        // head weights (0.5, -1.5), head bias (0.25, 0).
        // h = sigmoid(1) = 0.7310585786300049
        // z0 = 0.5 h + 0.25 = 0.6155292893150024, z1 = -1.5 h = -1.0965878679450074
        // p1 = 1 / (1 + e^(z0 - z1)) = 1 / (1 + e^1.7121171572600098)
        //    = 0.1528893123454457
        let spec = ArchitectureSpec::custom(1, 1, vec![1], Activation::Sigmoid, false);
        let params = Parameters {
            hidden: vec![Dense { weights: array![[2.0]], bias: array![-1.0] }],
            head: Dense { weights: array![[0.5, -1.5]], bias: array![0.25, 0.0] },
        };
        let net = MimicNetwork::<f64>::from_parts(spec, params, 0).unwrap();
        let p = net.forward(array![[1.0]].view()).unwrap();
        assert!((p.probs[[0, 0, 1]] - 0.1528893123454457).abs() < 1e-12);
        assert!((p.probs[[0, 0, 0]] + p.probs[[0, 0, 1]] - 1.0).abs() < 1e-12);
        assert_eq!(net.predict_bits(array![[1.0]].view()).unwrap()[[0, 0]], 0);
    }

    #[test]
    fn confident_predictor_has_vanishing_loss() {
        let spec = ArchitectureSpec::custom(2, 2, vec![], Activation::Sigmoid, false);
        // bit 0 copies x0, bit 1 copies x1, with +/-40 logits
        let params = Parameters {
            hidden: vec![],
            head: Dense {
                weights: array![[-40.0, 40.0, 0.0, 0.0], [0.0, 0.0, -40.0, 40.0]],
                bias: array![20.0, -20.0, 20.0, -20.0],
            },
        };
        let net = MimicNetwork::<f64>::from_parts(spec, params, 0).unwrap();
        let x = array![[0.0, 1.0], [1.0, 1.0], [0.0, 0.0]];
        let y = array![[0u8, 1], [1, 1], [0, 0]];
        assert!(net.loss(x.view(), y.view()).unwrap() < 1e-7);
        assert_eq!(net.predict_bits(x.view()).unwrap(), y);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let spec = ArchitectureSpec::new(ArchKind::DeepThin, 12, 9, Activation::Relu);
        let net = MimicNetwork::<f32>::build(&spec, 2).unwrap();
        let x = random_matrix(33, 12, 9).mapv(|v| v as f32 * 4.0);
        let p = net.forward(x.view()).unwrap();
        assert_eq!((p.examples(), p.bits()), (33, 9));
        for pair in p.probs.lanes(Axis(2)) {
            assert!((pair[0] + pair[1] - 1.0).abs() < 1e-9);
            assert!(pair.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn shape_errors() {
        let spec = ArchitectureSpec::custom(3, 2, vec![4], Activation::Sigmoid, false);
        let net = MimicNetwork::<f64>::build(&spec, 0).unwrap();
        assert!(matches!(net.forward(Array2::zeros((2, 4)).view()), Err(Error::Shape(_))));
        assert!(matches!(
            net.loss_and_gradients(Array2::zeros((2, 3)).view(), Array2::zeros((2, 3)).view()),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            net.loss(Array2::zeros((0, 3)).view(), Array2::zeros((0, 2)).view()),
            Err(Error::Shape(_))
        ));
        let mut bad = net.params().clone();
        bad.head.bias = Array1::zeros(3);
        assert!(MimicNetwork::from_parts(spec, bad, 0).is_err());
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let spec = ArchitectureSpec::custom(1, 1, vec![], Activation::Sigmoid, false);
        let mut net = MimicNetwork::<f64>::zeroed(&spec).unwrap();
        net.params_mut().head.bias[0] = f64::NAN;
        let r = net.loss(array![[1.0]].view(), array![[1u8]].view());
        assert!(matches!(r, Err(Error::Numeric(_))));
    }
}
