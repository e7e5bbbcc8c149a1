use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{Vocab, BOS, UNK};
use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    fn uniform(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(-scale..=scale)).collect();
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Sentence encoder `f(x) = tanh(W · mean(E[tokens]) + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    /// `|V| × d`
    pub embedding: Matrix,
    /// `d × d`
    pub proj: Matrix,
    pub bias: Vec<f64>,
}

/// Next-token head: `logits = Uᵀ h + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmHeadParams {
    /// `d × |V|`
    pub out: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub embedding: Matrix,
    pub proj: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGrads {
    pub out: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients for every parameter of a [`ToyModel`], same shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub encoder: EncoderGrads,
    pub head: HeadGrads,
}

pub const BLOCK_NAMES: [&str; 5] = [
    "embedding",
    "projection",
    "projection_bias",
    "lm_output",
    "lm_bias",
];

impl ModelGrads {
    pub fn zeros(vocab: usize, dim: usize) -> Self {
        ModelGrads {
            encoder: EncoderGrads {
                embedding: Matrix::zeros(vocab, dim),
                proj: Matrix::zeros(dim, dim),
                bias: vec![0.0; dim],
            },
            head: HeadGrads {
                out: Matrix::zeros(dim, vocab),
                bias: vec![0.0; vocab],
            },
        }
    }

    pub fn blocks(&self) -> [(&'static str, &[f64]); 5] {
        [
            (BLOCK_NAMES[0], &self.encoder.embedding.data),
            (BLOCK_NAMES[1], &self.encoder.proj.data),
            (BLOCK_NAMES[2], &self.encoder.bias),
            (BLOCK_NAMES[3], &self.head.out.data),
            (BLOCK_NAMES[4], &self.head.bias),
        ]
    }

    pub fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 5] {
        [
            (BLOCK_NAMES[0], &mut self.encoder.embedding.data),
            (BLOCK_NAMES[1], &mut self.encoder.proj.data),
            (BLOCK_NAMES[2], &mut self.encoder.bias),
            (BLOCK_NAMES[3], &mut self.head.out.data),
            (BLOCK_NAMES[4], &mut self.head.bias),
        ]
    }

    /// `self += scale · other`, element by element in a fixed order.
    pub fn add_scaled(&mut self, other: &ModelGrads, scale: f64) {
        for ((_, dst), (_, src)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (_, b) in self.blocks_mut() {
            b.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|(_, b)| b.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// Flat copy of every block in [`BLOCK_NAMES`] order.
    pub fn flatten(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|(_, b)| b.iter().copied()).collect()
    }
}

/// Intermediate values kept from [`ToyModel::encode`] for the backward pass.
#[derive(Debug, Clone)]
pub struct EncodeCache {
    ids: Vec<usize>,
    mean: Vec<f64>,
    out: Vec<f64>,
}

impl EncodeCache {
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub vector: Vec<f64>,
    pub cache: EncodeCache,
}

/// Trainable toy sentence encoder with a prefix-mean causal LM head.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    pub vocab: Vocab,
    pub encoder: EncoderParams,
    pub head: LmHeadParams,
}

pub const DEFAULT_DIM: usize = 32;
pub const INIT_SCALE: f64 = 0.1;

impl ToyModel {
    /// Weight matrices uniform in `[-0.1, 0.1]` from a seeded ChaCha8 stream;
    /// both bias vectors start at zero.
    pub fn init(vocab: Vocab, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = vocab.len();
        let embedding = Matrix::uniform(v, dim, INIT_SCALE, &mut rng);
        let proj = Matrix::uniform(dim, dim, INIT_SCALE, &mut rng);
        let out = Matrix::uniform(dim, v, INIT_SCALE, &mut rng);
        ToyModel {
            vocab,
            encoder: EncoderParams {
                embedding,
                proj,
                bias: vec![0.0; dim],
            },
            head: LmHeadParams {
                out,
                bias: vec![0.0; v],
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.encoder.bias.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn zero_grads(&self) -> ModelGrads {
        ModelGrads::zeros(self.vocab_size(), self.dim())
    }

    pub fn blocks(&self) -> [(&'static str, &[f64]); 5] {
        [
            (BLOCK_NAMES[0], &self.encoder.embedding.data),
            (BLOCK_NAMES[1], &self.encoder.proj.data),
            (BLOCK_NAMES[2], &self.encoder.bias),
            (BLOCK_NAMES[3], &self.head.out.data),
            (BLOCK_NAMES[4], &self.head.bias),
        ]
    }

    pub fn blocks_mut(&mut self) -> [(&'static str, &mut [f64]); 5] {
        [
            (BLOCK_NAMES[0], &mut self.encoder.embedding.data),
            (BLOCK_NAMES[1], &mut self.encoder.proj.data),
            (BLOCK_NAMES[2], &mut self.encoder.bias),
            (BLOCK_NAMES[3], &mut self.head.out.data),
            (BLOCK_NAMES[4], &mut self.head.bias),
        ]
    }

    /// Encodes text. Unknown tokens map to `UNK`; a text with no tokens
    /// encodes as if it were the single token `UNK`.
    pub fn encode(&self, text: &str) -> Encoded {
        self.encode_ids(&self.vocab.ids(text))
    }

    pub fn encode_ids(&self, ids: &[usize]) -> Encoded {
        let ids = if ids.is_empty() { vec![UNK] } else { ids.to_vec() };
        let d = self.dim();
        let mut mean = vec![0.0; d];
        for &t in &ids {
            for (m, e) in mean.iter_mut().zip(self.encoder.embedding.row(t)) {
                *m += e;
            }
        }
        let n = ids.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let out = self.project(&mean);
        Encoded {
            vector: out.clone(),
            cache: EncodeCache { ids, mean, out },
        }
    }

    /// `tanh(W m + b)`
    fn project(&self, mean: &[f64]) -> Vec<f64> {
        let w = &self.encoder.proj;
        (0..w.rows)
            .map(|i| {
                let z: f64 = w.row(i).iter().zip(mean).map(|(a, b)| a * b).sum();
                (z + self.encoder.bias[i]).tanh()
            })
            .collect()
    }

    /// Gradients of `⟨upstream, f(x)⟩` with respect to `E`, `W`, `b`.
    pub fn encode_backward(&self, upstream: &[f64], cache: &EncodeCache) -> Result<EncoderGrads> {
        let mut g = self.zero_grads();
        self.encode_backward_into(upstream, cache, 1.0, &mut g)?;
        Ok(g.encoder)
    }

    /// Accumulates `scale ·` the encoder gradient into `grads`.
    pub fn encode_backward_into(
        &self,
        upstream: &[f64],
        cache: &EncodeCache,
        scale: f64,
        grads: &mut ModelGrads,
    ) -> Result<()> {
        let d = self.dim();
        if upstream.len() != d {
            return Err(Error::ShapeMismatch {
                what: "encoder upstream gradient",
                expected: d,
                got: upstream.len(),
            });
        }
        if cache.mean.len() != d {
            return Err(Error::ShapeMismatch {
                what: "encoder cache",
                expected: d,
                got: cache.mean.len(),
            });
        }
        let dz: Vec<f64> = upstream
            .iter()
            .zip(&cache.out)
            .map(|(g, h)| scale * g * (1.0 - h * h))
            .collect();
        self.pooled_backward(&dz, &cache.mean, &cache.ids, grads);
        Ok(())
    }

    /// Backward through `z = W m + b` with `m = mean(E[ids])`, given `dz`.
    fn pooled_backward(&self, dz: &[f64], mean: &[f64], ids: &[usize], grads: &mut ModelGrads) {
        let d = self.dim();
        let w = &self.encoder.proj;
        let mut dm = vec![0.0; d];
        for i in 0..d {
            let dzi = dz[i];
            grads.encoder.bias[i] += dzi;
            let grow = grads.encoder.proj.row_mut(i);
            for j in 0..d {
                grow[j] += dzi * mean[j];
            }
            for (j, wij) in w.row(i).iter().enumerate() {
                dm[j] += wij * dzi;
            }
        }
        let inv_n = 1.0 / ids.len() as f64;
        for &t in ids {
            for (g, v) in grads.encoder.embedding.row_mut(t).iter_mut().zip(&dm) {
                *g += v * inv_n;
            }
        }
    }

    /// Mean next-token cross-entropy of `text` and its gradients.
    ///
    /// The sequence is `[BOS, t1, .., tn]`; the predictor at position `j` is
    /// `tanh(W · mean(E[seq[0..=j]]) + b)` and predicts `seq[j + 1]`.
    pub fn lm_loss_and_grads(&self, text: &str) -> Result<(f64, ModelGrads)> {
        let ids = self.vocab.ids(text);
        let mut g = self.zero_grads();
        let loss = self.lm_backward_into(&ids, 1.0, &mut g)?;
        Ok((loss, g))
    }

    pub fn lm_loss(&self, text: &str) -> Result<f64> {
        self.lm_pass(&self.vocab.ids(text), None)
    }

    /// Length-normalized log-probability (mean over predicted tokens).
    pub fn mean_log_prob(&self, text: &str) -> Result<f64> {
        self.lm_loss(text).map(|l| -l)
    }

    /// Accumulates `scale ·` the LM gradient for `ids` and returns the loss.
    pub fn lm_backward_into(&self, ids: &[usize], scale: f64, grads: &mut ModelGrads) -> Result<f64> {
        self.lm_pass(ids, Some((scale, grads)))
    }

    fn lm_pass(&self, ids: &[usize], mut grads: Option<(f64, &mut ModelGrads)>) -> Result<f64> {
        if ids.is_empty() {
            return Err(Error::EmptyText);
        }
        let d = self.dim();
        let v = self.vocab_size();
        let n = ids.len();
        let u = &self.head.out;

        let mut seq = Vec::with_capacity(n + 1);
        seq.push(BOS);
        seq.extend_from_slice(ids);

        let mut running = vec![0.0; d];
        let mut mean = vec![0.0; d];
        let mut logits = vec![0.0; v];
        let mut dlogits = vec![0.0; v];
        // per-position gradient wrt the prefix mean, divided by prefix length
        let mut dmean_scaled: Vec<Vec<f64>> = Vec::new();
        let mut total = 0.0;

        for j in 0..n {
            for (r, e) in running.iter_mut().zip(self.encoder.embedding.row(seq[j])) {
                *r += e;
            }
            let len = (j + 1) as f64;
            for (m, r) in mean.iter_mut().zip(&running) {
                *m = r / len;
            }
            let h = self.project(&mean);
            logits.copy_from_slice(&self.head.bias);
            for (i, hi) in h.iter().enumerate() {
                for (l, uik) in logits.iter_mut().zip(u.row(i)) {
                    *l += hi * uik;
                }
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = logits.iter().map(|l| (l - max).exp()).sum();
            let lse = max + sum_exp.ln();
            let target = seq[j + 1];
            total += lse - logits[target];

            if let Some((scale, g)) = grads.as_mut() {
                let coef = *scale / n as f64;
                for (dl, l) in dlogits.iter_mut().zip(&logits) {
                    *dl = coef * (l - lse).exp();
                }
                dlogits[target] -= coef;
                for (c, dl) in g.head.bias.iter_mut().zip(&dlogits) {
                    *c += dl;
                }
                let mut dz = vec![0.0; d];
                for i in 0..d {
                    let grow = g.head.out.row_mut(i);
                    let mut dh = 0.0;
                    for ((gk, uk), dl) in grow.iter_mut().zip(u.row(i)).zip(&dlogits) {
                        *gk += h[i] * dl;
                        dh += uk * dl;
                    }
                    dz[i] = dh * (1.0 - h[i] * h[i]);
                }
                // W, b and dL/dmean for this position
                let w = &self.encoder.proj;
                let mut dm = vec![0.0; d];
                for i in 0..d {
                    g.encoder.bias[i] += dz[i];
                    let grow = g.encoder.proj.row_mut(i);
                    for jj in 0..d {
                        grow[jj] += dz[i] * mean[jj];
                    }
                    for (jj, wij) in w.row(i).iter().enumerate() {
                        dm[jj] += wij * dz[i];
                    }
                }
                dm.iter_mut().for_each(|x| *x /= len);
                dmean_scaled.push(dm);
            }
        }

        if let Some((_, g)) = grads.as_mut() {
            // token at position i feeds every prefix mean j >= i
            let mut acc = vec![0.0; d];
            for j in (0..n).rev() {
                for (a, x) in acc.iter_mut().zip(&dmean_scaled[j]) {
                    *a += x;
                }
                for (ge, a) in g.encoder.embedding.row_mut(seq[j]).iter_mut().zip(&acc) {
                    *ge += a;
                }
            }
        }
        Ok(total / n as f64)
    }
}
