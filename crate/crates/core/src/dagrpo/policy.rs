//! Linear-softmax token policy over sparse context features.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::vocab::TokenId;
use crate::scalar::Scalar;

/// Active features of one decoding context. A row feature adds its whole
/// weight row to the logits; a pointer adds one shared scalar to the logit
/// of the token it points at.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub rows: Vec<u32>,
    pub pointers: Vec<(u32, TokenId)>,
}

impl Context {
    pub fn rows(rows: Vec<u32>) -> Self {
        Self {
            rows,
            pointers: Vec::new(),
        }
    }
}

/// One generated token with the context it was sampled under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSample {
    pub context: Context,
    pub token: TokenId,
}

/// `logit(v) = (Σ_rows W[f, v] + Σ_pointers θ_p·1[v = target_p]) / temperature`.
/// Row weights are stored feature-major, followed by the pointer scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearSoftmaxPolicy<T: Scalar> {
    pub vocab: usize,
    pub rows: usize,
    pub pointers: usize,
    pub temperature: T,
    pub weights: Vec<T>,
}

impl<T: Scalar> LinearSoftmaxPolicy<T> {
    pub fn zeros(vocab: usize, rows: usize, pointers: usize) -> Self {
        Self {
            vocab,
            rows,
            pointers,
            temperature: T::one(),
            weights: vec![T::zero(); vocab * rows + pointers],
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.vocab * self.rows + self.pointers
    }

    fn pointer_index(&self, p: u32) -> usize {
        self.vocab * self.rows + p as usize
    }

    pub fn weight(&self, row: usize, token: usize) -> T {
        self.weights[row * self.vocab + token]
    }

    pub fn weight_mut(&mut self, row: usize, token: usize) -> &mut T {
        &mut self.weights[row * self.vocab + token]
    }

    pub fn pointer(&self, p: usize) -> T {
        self.weights[self.pointer_index(p as u32)]
    }

    pub fn pointer_mut(&mut self, p: usize) -> &mut T {
        let i = self.pointer_index(p as u32);
        &mut self.weights[i]
    }

    pub fn is_finite(&self) -> bool {
        self.temperature.is_finite() && self.temperature > T::zero() && self.weights.iter().all(|w| w.is_finite())
    }

    pub fn logits(&self, ctx: &Context) -> Vec<T> {
        let mut out = vec![T::zero(); self.vocab];
        for &f in &ctx.rows {
            let row = &self.weights[f as usize * self.vocab..(f as usize + 1) * self.vocab];
            for (o, &w) in out.iter_mut().zip(row) {
                *o = *o + w;
            }
        }
        for &(p, t) in &ctx.pointers {
            out[t as usize] = out[t as usize] + self.weights[self.pointer_index(p)];
        }
        let inv = T::one() / self.temperature;
        for o in &mut out {
            *o = *o * inv;
        }
        out
    }

    /// Log-probabilities of every token, computed with the max-shift trick.
    pub fn log_probs(&self, ctx: &Context) -> Vec<T> {
        let logits = self.logits(ctx);
        let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = m + logits.iter().map(|&l| (l - m).exp()).sum::<T>().ln();
        logits.into_iter().map(|l| l - lse).collect()
    }

    pub fn probs(&self, ctx: &Context) -> Vec<T> {
        self.log_probs(ctx).into_iter().map(T::exp).collect()
    }

    pub fn log_prob(&self, ctx: &Context, token: TokenId) -> T {
        self.log_probs(ctx)[token as usize]
    }

    /// Samples a token by inverse CDF over one uniform draw.
    pub fn sample<R: Rng>(&self, ctx: &Context, rng: &mut R) -> TokenId {
        let probs = self.probs(ctx);
        let u = T::of(rng.random::<f64>());
        let mut acc = T::zero();
        for (i, &p) in probs.iter().enumerate() {
            acc = acc + p;
            if u < acc {
                return i as TokenId;
            }
        }
        // rounding left the total just under u; fall back to the likeliest
        self.greedy(ctx)
    }

    /// Most likely token, lowest id on ties.
    pub fn greedy(&self, ctx: &Context) -> TokenId {
        let logits = self.logits(ctx);
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = i;
            }
        }
        best as TokenId
    }

    /// Adds `scale · ∇ log π(token | ctx)` into `grad`.
    pub fn accumulate_log_prob_grad(&self, ctx: &Context, token: TokenId, scale: T, grad: &mut [T]) {
        let probs = self.probs(ctx);
        let s = scale / self.temperature;
        let ind = |v: usize| if v == token as usize { T::one() } else { T::zero() };
        for &f in &ctx.rows {
            let row = &mut grad[f as usize * self.vocab..(f as usize + 1) * self.vocab];
            for (v, g) in row.iter_mut().enumerate() {
                *g = *g + s * (ind(v) - probs[v]);
            }
        }
        for &(p, t) in &ctx.pointers {
            let i = self.pointer_index(p);
            grad[i] = grad[i] + s * (ind(t as usize) - probs[t as usize]);
        }
    }

    pub fn cast<U: Scalar>(&self) -> LinearSoftmaxPolicy<U> {
        LinearSoftmaxPolicy {
            vocab: self.vocab,
            rows: self.rows,
            pointers: self.pointers,
            temperature: U::of(self.temperature.to_f64_lossy()),
            weights: self.weights.iter().map(|w| U::of(w.to_f64_lossy())).collect(),
        }
    }
}
