//! The attribute policy: a small MLP whose output is split into one softmax
//! head per attribute, each a categorical distribution over that attribute's
//! bins. Includes categorical sampling, exact log-probability gradients via
//! backpropagation, Adam updates, and the moving-average reward baseline.

use rand::Rng;
use thiserror::Error;

use crate::attr::BinIndexVector;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("input has {got} entries, policy expects {expected}")]
    InputDimMismatch { got: usize, expected: usize },
    #[error("bin vector has {got} entries, policy has {expected} heads")]
    HeadCountMismatch { got: usize, expected: usize },
    #[error("head {head}: bin {bin} out of range ({num_bins} bins)")]
    BinOutOfRange {
        head: usize,
        bin: usize,
        num_bins: usize,
    },
    #[error("update needs at least one episode")]
    NoEpisodes,
    #[error("probability row {row} does not sum to 1 (sum = {sum})")]
    BadProbRow { row: usize, sum: f64 },
}

/// Per-attribute categorical distributions, one row per head.
/// Rows may have different lengths when attributes use different bin counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    rows: Vec<Vec<f64>>,
}

impl ProbMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, PolicyError> {
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(PolicyError::BadProbRow { row: i, sum });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Samples one bin per row, returning the joint log-probability of the
    /// draw under the matrix.
    pub fn sample_bins<R: Rng>(&self, rng: &mut R) -> (BinIndexVector, f64) {
        let mut bins = Vec::with_capacity(self.rows.len());
        let mut log_prob = 0.0;
        for row in &self.rows {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = row.len() - 1;
            for (k, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = k;
                    break;
                }
            }
            bins.push(chosen);
            log_prob += row[chosen].max(f64::MIN_POSITIVE).ln();
        }
        (BinIndexVector::new(bins), log_prob)
    }

    /// Per-row argmax; ties break toward the lowest bin index.
    pub fn greedy_bins(&self) -> BinIndexVector {
        let bins = self
            .rows
            .iter()
            .map(|row| {
                let mut best = 0;
                for (k, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect();
        BinIndexVector::new(bins)
    }

    /// Joint log-probability of a specific bin choice.
    pub fn log_prob(&self, bins: &BinIndexVector) -> Result<f64, PolicyError> {
        if bins.len() != self.rows.len() {
            return Err(PolicyError::HeadCountMismatch {
                got: bins.len(),
                expected: self.rows.len(),
            });
        }
        let mut lp = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            let k = bins.get(i);
            if k >= row.len() {
                return Err(PolicyError::BinOutOfRange {
                    head: i,
                    bin: k,
                    num_bins: row.len(),
                });
            }
            lp += row[k].max(f64::MIN_POSITIVE).ln();
        }
        Ok(lp)
    }
}

/// Gradient of a scalar with respect to every policy parameter, shaped like
/// the policy's layers.
#[derive(Debug, Clone)]
pub struct PolicyGrad {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl PolicyGrad {
    fn zeros_like(policy: &MlpPolicy) -> Self {
        Self {
            d_weights: policy.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            d_biases: policy.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    fn add_scaled(&mut self, other: &PolicyGrad, scale: f64) {
        for (dst, src) in self.d_weights.iter_mut().zip(&other.d_weights) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
        for (dst, src) in self.d_biases.iter_mut().zip(&other.d_biases) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    fn scale(&mut self, s: f64) {
        for w in &mut self.d_weights {
            for v in w.iter_mut() {
                *v *= s;
            }
        }
        for b in &mut self.d_biases {
            for v in b.iter_mut() {
                *v *= s;
            }
        }
    }
}

/// Fully-connected rectifier MLP with one softmax head per attribute.
///
/// Layout: input (group size) -> hidden layers -> concatenated head logits.
/// Weights are row-major `(out_dim, in_dim)` per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicy {
    input_dim: usize,
    bins_per_head: Vec<usize>,
    layer_dims: Vec<(usize, usize)>, // (in, out) per layer
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl MlpPolicy {
    /// Fan-in scaled uniform weight init, zero biases.
    pub fn new<R: Rng>(
        input_dim: usize,
        hidden_dims: &[usize],
        bins_per_head: &[usize],
        rng: &mut R,
    ) -> Self {
        let mut policy = Self::zeroed(input_dim, hidden_dims, bins_per_head);
        for (l, &(in_dim, _)) in policy.layer_dims.clone().iter().enumerate() {
            let bound = 1.0 / (in_dim as f64).sqrt();
            for w in policy.weights[l].iter_mut() {
                *w = (rng.gen::<f64>() * 2.0 - 1.0) * bound;
            }
        }
        policy
    }

    /// All-zero parameters: every head starts uniform.
    pub fn zeroed(input_dim: usize, hidden_dims: &[usize], bins_per_head: &[usize]) -> Self {
        assert!(input_dim > 0, "policy needs at least one input");
        assert!(!bins_per_head.is_empty(), "policy needs at least one head");
        let output_dim: usize = bins_per_head.iter().sum();
        let mut layer_dims = Vec::new();
        let mut prev = input_dim;
        for &h in hidden_dims {
            layer_dims.push((prev, h));
            prev = h;
        }
        layer_dims.push((prev, output_dim));
        let weights = layer_dims
            .iter()
            .map(|&(i, o)| vec![0.0; i * o])
            .collect();
        let biases = layer_dims.iter().map(|&(_, o)| vec![0.0; o]).collect();
        Self {
            input_dim,
            bins_per_head: bins_per_head.to_vec(),
            layer_dims,
            weights,
            biases,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_heads(&self) -> usize {
        self.bins_per_head.len()
    }

    pub fn bins_per_head(&self) -> &[usize] {
        &self.bins_per_head
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[(usize, usize)] {
        &self.layer_dims
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        &self.weights[layer]
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.biases[layer]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.weights[layer]
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.biases[layer]
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn check_input(&self, input: &[f64]) -> Result<(), PolicyError> {
        if input.len() != self.input_dim {
            return Err(PolicyError::InputDimMismatch {
                got: input.len(),
                expected: self.input_dim,
            });
        }
        Ok(())
    }

    /// Per-head categorical distributions for one input.
    pub fn forward(&self, input: &[f64]) -> Result<ProbMatrix, PolicyError> {
        self.check_input(input)?;
        let trace = self.forward_trace(input);
        Ok(trace.probs)
    }

    /// Forward pass keeping post-activation values per layer for backprop.
    fn forward_trace(&self, input: &[f64]) -> ForwardTrace {
        let n_layers = self.layer_dims.len();
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
        let mut current = input.to_vec();
        for l in 0..n_layers {
            let (in_dim, out_dim) = self.layer_dims[l];
            let mut out = vec![0.0; out_dim];
            let w = &self.weights[l];
            for (o, out_v) in out.iter_mut().enumerate() {
                let row = &w[o * in_dim..(o + 1) * in_dim];
                let mut acc = self.biases[l][o];
                for (x, wi) in current.iter().zip(row) {
                    acc += x * wi;
                }
                *out_v = acc;
            }
            if l + 1 < n_layers {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            activations.push(out.clone());
            current = out;
        }
        // Stable per-head softmax over the final logits.
        let logits = activations.last().unwrap();
        let mut rows = Vec::with_capacity(self.bins_per_head.len());
        let mut offset = 0;
        for &k in &self.bins_per_head {
            let slice = &logits[offset..offset + k];
            let max = slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = slice.iter().map(|&z| (z - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            rows.push(exps.iter().map(|&e| e / sum).collect());
            offset += k;
        }
        ForwardTrace {
            activations,
            probs: ProbMatrix { rows },
        }
    }

    /// Exact gradient of `sum over heads of log p(chosen bin)` with respect
    /// to every parameter, backpropagated through the softmax heads and the
    /// rectifier layers.
    pub fn grad_log_prob(
        &self,
        input: &[f64],
        bins: &BinIndexVector,
    ) -> Result<PolicyGrad, PolicyError> {
        self.check_input(input)?;
        if bins.len() != self.bins_per_head.len() {
            return Err(PolicyError::HeadCountMismatch {
                got: bins.len(),
                expected: self.bins_per_head.len(),
            });
        }
        for (h, &k) in self.bins_per_head.iter().enumerate() {
            if bins.get(h) >= k {
                return Err(PolicyError::BinOutOfRange {
                    head: h,
                    bin: bins.get(h),
                    num_bins: k,
                });
            }
        }

        let trace = self.forward_trace(input);
        let n_layers = self.layer_dims.len();
        let mut grad = PolicyGrad::zeros_like(self);

        // d log p / d logit = indicator(chosen) - p, head by head.
        let output_dim = self.layer_dims[n_layers - 1].1;
        let mut delta = vec![0.0; output_dim];
        let mut offset = 0;
        for (h, row) in trace.probs.rows.iter().enumerate() {
            let chosen = bins.get(h);
            for (k, &p) in row.iter().enumerate() {
                delta[offset + k] = if k == chosen { 1.0 - p } else { -p };
            }
            offset += row.len();
        }

        for l in (0..n_layers).rev() {
            let (in_dim, out_dim) = self.layer_dims[l];
            let layer_input: &[f64] = if l == 0 {
                input
            } else {
                &trace.activations[l - 1]
            };
            let dw = &mut grad.d_weights[l];
            for o in 0..out_dim {
                let d = delta[o];
                grad.d_biases[l][o] = d;
                let row = &mut dw[o * in_dim..(o + 1) * in_dim];
                for (g, &x) in row.iter_mut().zip(layer_input) {
                    *g = d * x;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.weights[l];
            let mut prev_delta = vec![0.0; in_dim];
            for (o, &d) in delta.iter().enumerate().take(out_dim) {
                let row = &w[o * in_dim..(o + 1) * in_dim];
                for (pd, &wi) in prev_delta.iter_mut().zip(row) {
                    *pd += d * wi;
                }
            }
            // Rectifier gate from the stored post-activation values.
            for (pd, &a) in prev_delta.iter_mut().zip(&trace.activations[l - 1]) {
                if a <= 0.0 {
                    *pd = 0.0;
                }
            }
            delta = prev_delta;
        }
        Ok(grad)
    }
}

struct ForwardTrace {
    activations: Vec<Vec<f64>>,
    probs: ProbMatrix,
}

/// Adam accumulator shaped like a policy's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(policy: &MlpPolicy, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m_weights: policy.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_weights: policy.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_biases: policy.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_biases: policy.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// One Adam ascent step along `grad` (gradient of the objective to
    /// maximize).
    pub fn ascend(&mut self, policy: &mut MlpPolicy, grad: &PolicyGrad) {
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        for l in 0..policy.weights.len() {
            Self::ascend_slice(
                &mut policy.weights[l],
                &grad.d_weights[l],
                &mut self.m_weights[l],
                &mut self.v_weights[l],
                self.learning_rate,
                self.beta1,
                self.beta2,
                self.epsilon,
                bc1,
                bc2,
            );
            Self::ascend_slice(
                &mut policy.biases[l],
                &grad.d_biases[l],
                &mut self.m_biases[l],
                &mut self.v_biases[l],
                self.learning_rate,
                self.beta1,
                self.beta2,
                self.epsilon,
                bc1,
                bc2,
            );
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn ascend_slice(
        params: &mut [f64],
        grad: &[f64],
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        bc1: f64,
        bc2: f64,
    ) {
        for i in 0..params.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] += lr * m_hat / (v_hat.sqrt() + eps);
        }
    }

    pub(crate) fn moment_slices(&self, layer: usize) -> (&[f64], &[f64], &[f64], &[f64]) {
        (
            &self.m_weights[layer],
            &self.v_weights[layer],
            &self.m_biases[layer],
            &self.v_biases[layer],
        )
    }

    pub(crate) fn moment_slices_mut(
        &mut self,
        layer: usize,
    ) -> (&mut Vec<f64>, &mut Vec<f64>, &mut Vec<f64>, &mut Vec<f64>) {
        (
            &mut self.m_weights[layer],
            &mut self.v_weights[layer],
            &mut self.m_biases[layer],
            &mut self.v_biases[layer],
        )
    }
}

/// Exponential moving average of past mean rewards, the variance-reduction
/// baseline subtracted from each episode's reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaBaseline {
    pub value: f64,
    pub decay: f64,
}

impl EmaBaseline {
    pub fn new(decay: f64) -> Self {
        assert!((0.0..1.0).contains(&decay), "decay must lie in [0, 1)");
        Self { value: 0.0, decay }
    }

    /// `b <- decay * b + (1 - decay) * mean_reward`
    pub fn update(&mut self, mean_reward: f64) {
        self.value = self.decay * self.value + (1.0 - self.decay) * mean_reward;
    }
}

/// One sampled rollout: the policy input, the drawn bins, their joint
/// log-probability, and the observed reward.
#[derive(Debug, Clone)]
pub struct Episode {
    pub input: Vec<f64>,
    pub bins: BinIndexVector,
    pub log_prob: f64,
    pub reward: f64,
}

/// One REINFORCE ascent step: averages `grad log p * (reward - baseline)`
/// over the episodes and applies it through Adam. The baseline itself is
/// left untouched; callers advance it separately via [`EmaBaseline::update`].
pub fn reinforce_update(
    policy: &mut MlpPolicy,
    adam: &mut AdamState,
    episodes: &[Episode],
    baseline: &EmaBaseline,
) -> Result<(), PolicyError> {
    if episodes.is_empty() {
        return Err(PolicyError::NoEpisodes);
    }
    let mut total = PolicyGrad::zeros_like(policy);
    for ep in episodes {
        let g = policy.grad_log_prob(&ep.input, &ep.bins)?;
        total.add_scaled(&g, ep.reward - baseline.value);
    }
    total.scale(1.0 / episodes.len() as f64);
    adam.ascend(policy, &total);
    Ok(())
}
