//! Variational autoencoder over flattened graph matrices, with optional
//! property conditioning.
//!
//! The unconditional and conditional models share one implementation; the
//! condition vector, when the model has one, is concatenated to both the
//! encoder input and the decoder input. The decoder emits per-entry
//! probabilities through a logistic output layer and the objective is
//! element-wise binary cross-entropy plus a KL term against the standard
//! normal prior. The KL weight ramps linearly from 0 to 1 across the first
//! epoch so reconstruction has a head start.
//!
//! Everything here is deterministic given the config seed: initialization,
//! batch order, and noise draws all come from seeded generators, so a
//! training run reproduces its checkpoint byte for byte.

use std::path::Path;

use crate::dataset::{batches, Batch, Dataset, DatasetError, DatasetManifest, Split};
use crate::molgraph::{decode_matrix, GraphSchema, MolGraph};
use crate::numcore::{Activation, AdamState, Matrix, Mlp, NumError, Rng};
use crate::props::ConditionVector;

/// Probabilities are clamped to `[EPS, 1 - EPS]` inside the loss so a
/// saturated output can never produce an infinite cross-entropy.
const EPS: f64 = 1e-7;

#[derive(Debug, thiserror::Error)]
pub enum CvaeError {
    #[error("bad model config: {message}")]
    Config { message: String },
    #[error("condition mismatch: model takes {expected} condition values, got {got}")]
    Condition { expected: usize, got: usize },
    #[error("checkpoint failed its checksum (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum { stored: u64, computed: u64 },
    #[error("checkpoint format: {message}")]
    Format { message: String },
    #[error("epoch {epoch} batch {batch}: {source}")]
    Training {
        epoch: usize,
        batch: usize,
        source: NumError,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("numeric: {0}")]
    Num(#[from] NumError),
    #[error("dataset: {0}")]
    Data(#[from] DatasetError),
    #[error("config encoding: {0}")]
    Json(#[from] serde_json::Error),
}

/// Hyperparameters and shape constants for one model.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub latent_dim: usize,
    pub encoder_widths: Vec<usize>,
    pub decoder_widths: Vec<usize>,
    /// 0 for the unconditional model, 21 for the conditional one.
    pub condition_dim: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    /// KL weight reaches 1 after this many epochs (0 disables the ramp).
    pub kl_warmup_epochs: f64,
    pub seed: u64,
    pub schema: GraphSchema,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            latent_dim: 128,
            encoder_widths: vec![512, 256],
            decoder_widths: vec![256, 512],
            condition_dim: ConditionVector::LEN,
            batch_size: 256,
            epochs: 10,
            lr: 1e-3,
            kl_warmup_epochs: 1.0,
            seed: 1,
            schema: GraphSchema::default(),
        }
    }
}

impl ModelConfig {
    pub fn conditional(&self) -> bool {
        self.condition_dim != 0
    }

    pub fn validate(&self) -> Result<(), CvaeError> {
        let fail = |message: String| Err(CvaeError::Config { message });
        if self.condition_dim != 0 && self.condition_dim != ConditionVector::LEN {
            return fail(format!(
                "condition_dim must be 0 or {}, got {}",
                ConditionVector::LEN,
                self.condition_dim
            ));
        }
        if self.latent_dim == 0 {
            return fail("latent_dim must be positive".into());
        }
        if self.encoder_widths.iter().any(|&w| w == 0)
            || self.decoder_widths.iter().any(|&w| w == 0)
        {
            return fail("layer widths must be positive".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive".into());
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return fail(format!("lr must be positive and finite, got {}", self.lr));
        }
        if !(self.kl_warmup_epochs.is_finite() && self.kl_warmup_epochs >= 0.0) {
            return fail("kl_warmup_epochs must be finite and non-negative".into());
        }
        if !self.schema.compatible() {
            return fail(format!("schema {:?} does not match this build", self.schema));
        }
        Ok(())
    }

    fn encoder_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.schema.flat_len() + self.condition_dim];
        sizes.extend_from_slice(&self.encoder_widths);
        sizes.push(2 * self.latent_dim);
        sizes
    }

    fn decoder_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.latent_dim + self.condition_dim];
        sizes.extend_from_slice(&self.decoder_widths);
        sizes.push(self.schema.flat_len());
        sizes
    }
}

/// The three parts of the objective. `total = recon + beta * kl` for
/// whatever beta the caller passed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub recon: f64,
    pub kl: f64,
    pub total: f64,
}

/// Per-epoch training record; `total` here is the unweighted `recon + kl`
/// so epochs are comparable across the warmup ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub recon: f64,
    pub kl: f64,
    pub total: f64,
}

/// Writes the loss log as `epoch,recon,kl,total` CSV.
pub fn write_loss_csv(path: &Path, log: &[EpochLoss]) -> Result<(), CvaeError> {
    let mut out = String::from("epoch,recon,kl,total\n");
    for row in log {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            row.epoch, row.recon, row.kl, row.total
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Encoder/decoder pair with the config that shaped them.
#[derive(Debug)]
pub struct CvaeModel {
    config: ModelConfig,
    encoder: Mlp,
    decoder: Mlp,
}

impl CvaeModel {
    /// Fresh model with seeded Glorot initialization.
    pub fn init(config: ModelConfig) -> Result<CvaeModel, CvaeError> {
        config.validate()?;
        let mut rng = Rng::new(config.seed);
        let encoder = Mlp::init(
            &config.encoder_sizes(),
            Activation::Rectifier,
            Activation::Identity,
            &mut rng,
        );
        let decoder = Mlp::init(
            &config.decoder_sizes(),
            Activation::Rectifier,
            Activation::Logistic,
            &mut rng,
        );
        Ok(CvaeModel {
            config,
            encoder,
            decoder,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn param_count(&self) -> usize {
        self.encoder.param_count() + self.decoder.param_count()
    }

    /// Encoder weights first, then decoder weights.
    pub fn params(&self) -> Vec<f64> {
        let mut flat = self.encoder.params();
        flat.extend_from_slice(&self.decoder.params());
        flat
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        let split = self.encoder.param_count();
        assert_eq!(flat.len(), split + self.decoder.param_count());
        self.encoder.set_params(&flat[..split]);
        self.decoder.set_params(&flat[split..]);
    }

    fn check_condition(&self, got: usize) -> Result<(), CvaeError> {
        if got != self.config.condition_dim {
            return Err(CvaeError::Condition {
                expected: self.config.condition_dim,
                got,
            });
        }
        Ok(())
    }

    /// Posterior parameters for one flattened matrix.
    pub fn encode(
        &self,
        x: &[f64],
        c: Option<&ConditionVector>,
    ) -> Result<(Vec<f64>, Vec<f64>), CvaeError> {
        self.check_condition(c.map_or(0, |_| ConditionVector::LEN))?;
        assert_eq!(x.len(), self.config.schema.flat_len(), "matrix length");
        let mut input = x.to_vec();
        if let Some(c) = c {
            input.extend_from_slice(&c.features());
        }
        let tape = self
            .encoder
            .forward(&Matrix::from_vec(1, input.len(), input))?;
        let out = tape.output().row(0);
        let l = self.config.latent_dim;
        Ok((out[..l].to_vec(), out[l..].to_vec()))
    }

    /// Per-entry probabilities for one latent vector, flattened row-major.
    pub fn decode(&self, z: &[f64], c: Option<&ConditionVector>) -> Result<Vec<f64>, CvaeError> {
        self.check_condition(c.map_or(0, |_| ConditionVector::LEN))?;
        assert_eq!(z.len(), self.config.latent_dim, "latent length");
        debug_assert!(z.iter().all(|v| v.is_finite()), "latent must be finite");
        let mut input = z.to_vec();
        if let Some(c) = c {
            input.extend_from_slice(&c.features());
        }
        let tape = self
            .decoder
            .forward(&Matrix::from_vec(1, input.len(), input))?;
        Ok(tape.output().row(0).to_vec())
    }

    /// Mean objective over a batch and its gradient with respect to
    /// [`CvaeModel::params`]. The caller supplies the posterior noise so
    /// the whole computation is a deterministic function of the weights,
    /// which is what makes finite-difference checking possible.
    pub fn loss_and_grad(
        &self,
        x: &Matrix,
        c: Option<&Matrix>,
        eps: &Matrix,
        beta: f64,
    ) -> Result<(LossParts, Vec<f64>), CvaeError> {
        self.check_condition(c.map_or(0, |m| m.cols()))?;
        let n = x.rows();
        let l = self.config.latent_dim;
        assert_eq!(x.cols(), self.config.schema.flat_len(), "matrix width");
        assert_eq!((eps.rows(), eps.cols()), (n, l), "noise shape");
        if let Some(c) = c {
            assert_eq!(c.rows(), n, "condition rows");
        }
        let scale = 1.0 / n as f64;

        let enc_in = hstack(x, c);
        let enc_tape = self.encoder.forward(&enc_in)?;
        let enc_out = enc_tape.output();

        // z = mu + exp(logvar / 2) * eps, per sample and coordinate.
        let mut dec_in = Matrix::zeros(n, l + self.config.condition_dim);
        let mut kl_sum = 0.0;
        for r in 0..n {
            let row = enc_out.row(r);
            let (mu, lv) = row.split_at(l);
            let out = dec_in.row_mut(r);
            for k in 0..l {
                out[k] = mu[k] + (lv[k] / 2.0).exp() * eps.at(r, k);
                kl_sum += -0.5 * (1.0 + lv[k] - mu[k] * mu[k] - lv[k].exp());
            }
            if let Some(c) = c {
                out[l..].copy_from_slice(c.row(r));
            }
        }

        let dec_tape = self.decoder.forward(&dec_in)?;
        let probs = dec_tape.output();

        // Cross-entropy and its gradient in one pass. Entries the clamp
        // flattens contribute zero gradient, matching the computed loss.
        let mut recon_sum = 0.0;
        let mut dprobs = Matrix::zeros(n, x.cols());
        for r in 0..n {
            let targets = x.row(r);
            let out = probs.row(r);
            let grad = dprobs.row_mut(r);
            for (k, (&t, &p)) in targets.iter().zip(out).enumerate() {
                let q = p.clamp(EPS, 1.0 - EPS);
                recon_sum -= t * q.ln() + (1.0 - t) * (1.0 - q).ln();
                if p > EPS && p < 1.0 - EPS {
                    grad[k] = scale * (-t / q + (1.0 - t) / (1.0 - q));
                }
            }
        }

        let dec_grads = self.decoder.backward(&dec_tape, &dprobs)?;

        // Split the decoder's input gradient back into latent and noise
        // paths and add the KL term's own gradient.
        let mut denc_out = Matrix::zeros(n, 2 * l);
        for r in 0..n {
            let dz = dec_grads.input.row(r);
            let row = enc_out.row(r);
            let (mu, lv) = row.split_at(l);
            let out = denc_out.row_mut(r);
            for k in 0..l {
                out[k] = dz[k] + beta * scale * mu[k];
                out[l + k] = dz[k] * eps.at(r, k) * (lv[k] / 2.0).exp() * 0.5
                    + beta * scale * 0.5 * (lv[k].exp() - 1.0);
            }
        }
        let enc_grads = self.encoder.backward(&enc_tape, &denc_out)?;

        let mut flat = enc_grads.flat;
        flat.extend_from_slice(&dec_grads.flat);
        let recon = recon_sum * scale;
        let kl = kl_sum * scale;
        Ok((
            LossParts {
                recon,
                kl,
                total: recon + beta * kl,
            },
            flat,
        ))
    }

    /// Mean loss over a split with the posterior mean as the code (no
    /// noise), so evaluation is deterministic and comparable across runs.
    pub fn evaluate(
        &self,
        ds: &Dataset,
        manifest: &DatasetManifest,
        split: Split,
    ) -> Result<LossParts, CvaeError> {
        let mut recon = 0.0;
        let mut kl = 0.0;
        let mut count = 0usize;
        for batch in batches(ds, manifest, split, self.config.batch_size, 0)? {
            let n = batch.x.rows();
            let eps = Matrix::zeros(n, self.config.latent_dim);
            let c = self.batch_condition(&batch);
            let (parts, _) = self.loss_and_grad(&batch.x, c, &eps, 1.0)?;
            recon += parts.recon * n as f64;
            kl += parts.kl * n as f64;
            count += n;
        }
        if count == 0 {
            return Err(CvaeError::Config {
                message: "evaluation split is empty".into(),
            });
        }
        let (recon, kl) = (recon / count as f64, kl / count as f64);
        Ok(LossParts {
            recon,
            kl,
            total: recon + kl,
        })
    }

    fn batch_condition<'a>(&self, batch: &'a Batch) -> Option<&'a Matrix> {
        if self.config.conditional() {
            Some(&batch.c)
        } else {
            None
        }
    }

    /// Draws `n` codes from the prior and decodes each through matrix
    /// repair, so every returned graph passes validation.
    pub fn sample(
        &self,
        c: Option<&ConditionVector>,
        n: usize,
        seed: u64,
    ) -> Result<Vec<MolGraph>, CvaeError> {
        self.check_condition(c.map_or(0, |_| ConditionVector::LEN))?;
        let mut rng = Rng::new(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let z = rng.gaussian_vec(self.config.latent_dim);
            let probs = self.decode(&z, c)?;
            out.push(decode_matrix(&probs, &self.config.schema));
        }
        Ok(out)
    }

    /// Packages the current weights for [`save_checkpoint`].
    pub fn checkpoint(&self, meta: TrainMeta) -> ModelCheckpoint {
        ModelCheckpoint {
            config: self.config.clone(),
            meta,
            weights: self.params(),
        }
    }

    /// Rebuilds a model from checkpointed weights.
    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<CvaeModel, CvaeError> {
        let mut model = CvaeModel::init(ckpt.config.clone())?;
        if ckpt.weights.len() != model.param_count() {
            return Err(CvaeError::Format {
                message: format!(
                    "checkpoint has {} weights, config requires {}",
                    ckpt.weights.len(),
                    model.param_count()
                ),
            });
        }
        model.set_params(&ckpt.weights);
        Ok(model)
    }
}

/// z = mu + exp(logvar / 2) * eps.
pub fn reparameterize(mu: &[f64], logvar: &[f64], eps: &[f64]) -> Vec<f64> {
    assert_eq!(mu.len(), logvar.len(), "shape");
    assert_eq!(mu.len(), eps.len(), "shape");
    mu.iter()
        .zip(logvar)
        .zip(eps)
        .map(|((&m, &lv), &e)| m + (lv / 2.0).exp() * e)
        .collect()
}

/// Per-sample objective: summed binary cross-entropy over the matrix plus
/// `beta` times the KL divergence from the standard normal prior.
pub fn elbo_loss(x: &[f64], xhat: &[f64], mu: &[f64], logvar: &[f64], beta: f64) -> LossParts {
    assert_eq!(x.len(), xhat.len(), "shape");
    assert_eq!(mu.len(), logvar.len(), "shape");
    let recon: f64 = x
        .iter()
        .zip(xhat)
        .map(|(&t, &p)| {
            let q = p.clamp(EPS, 1.0 - EPS);
            -(t * q.ln() + (1.0 - t) * (1.0 - q).ln())
        })
        .sum();
    let kl: f64 = mu
        .iter()
        .zip(logvar)
        .map(|(&m, &lv)| -0.5 * (1.0 + lv - m * m - lv.exp()))
        .sum();
    LossParts {
        recon,
        kl,
        total: recon + beta * kl,
    }
}

/// Training metadata embedded in checkpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainMeta {
    pub epochs_completed: usize,
    pub final_recon: f64,
    pub final_kl: f64,
    pub final_total: f64,
}

/// A self-describing snapshot of a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub config: ModelConfig,
    pub meta: TrainMeta,
    pub weights: Vec<f64>,
}

const CKPT_MAGIC: &[u8; 4] = b"MGCV";
const CKPT_VERSION: u32 = 1;

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, path: &Path) -> Result<(), CvaeError> {
    let config = serde_json::to_vec(&ckpt.config)?;
    let meta = serde_json::to_vec(&ckpt.meta)?;
    let mut bytes = Vec::with_capacity(32 + config.len() + meta.len() + 8 * ckpt.weights.len());
    bytes.extend_from_slice(CKPT_MAGIC);
    bytes.extend_from_slice(&CKPT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(config.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&config);
    bytes.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&meta);
    bytes.extend_from_slice(&(ckpt.weights.len() as u64).to_le_bytes());
    for w in &ckpt.weights {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    let checksum = fnv64(&bytes);
    bytes.extend_from_slice(&checksum.to_le_bytes());
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint, CvaeError> {
    let bytes = std::fs::read(path)?;
    let fail = |message: String| CvaeError::Format { message };
    if bytes.len() < 28 {
        return Err(fail("truncated checkpoint".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let computed = fnv64(body);
    if stored != computed {
        return Err(CvaeError::Checksum { stored, computed });
    }
    if &body[0..4] != CKPT_MAGIC {
        return Err(fail(format!("bad magic {:?}", &body[0..4])));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
    if version != CKPT_VERSION {
        return Err(fail(format!("unsupported version {version}")));
    }
    let mut at = 8usize;
    let mut take = |n: usize| -> Result<&[u8], CvaeError> {
        if at + n > body.len() {
            return Err(CvaeError::Format {
                message: "truncated checkpoint".into(),
            });
        }
        let s = &body[at..at + n];
        at += n;
        Ok(s)
    };
    let config_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let config: ModelConfig = serde_json::from_slice(take(config_len)?)?;
    let meta_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let meta: TrainMeta = serde_json::from_slice(take(meta_len)?)?;
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        weights.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    if at != body.len() {
        return Err(fail("trailing bytes after weights".into()));
    }
    let ckpt = ModelCheckpoint {
        config,
        meta,
        weights,
    };
    ckpt.config.validate()?;
    Ok(ckpt)
}

/// Runs minibatch Adam on the ELBO and returns the final checkpoint with
/// the per-epoch loss log. Fully deterministic given the config.
pub fn train(
    config: &ModelConfig,
    ds: &Dataset,
    manifest: &DatasetManifest,
) -> Result<(ModelCheckpoint, Vec<EpochLoss>), CvaeError> {
    config.validate()?;
    if config.schema != *ds.schema() {
        return Err(CvaeError::Config {
            message: format!(
                "config schema {:?} != dataset schema {:?}",
                config.schema,
                ds.schema()
            ),
        });
    }
    let mut model = CvaeModel::init(config.clone())?;
    let mut params = model.params();
    let mut adam = AdamState::new(params.len(), config.lr);
    let mut noise = Rng::new(config.seed ^ 0x6e6f_6973_65u64);

    let train_n = manifest.train.len();
    let steps_per_epoch = train_n.div_ceil(config.batch_size).max(1);
    let warmup_steps = config.kl_warmup_epochs * steps_per_epoch as f64;

    let mut log = Vec::with_capacity(config.epochs);
    let mut step = 0usize;
    for epoch in 1..=config.epochs {
        let epoch_seed = config
            .seed
            .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(epoch as u64));
        let mut recon = 0.0;
        let mut kl = 0.0;
        let mut seen = 0usize;
        for (bi, batch) in
            batches(ds, manifest, Split::Train, config.batch_size, epoch_seed)?.enumerate()
        {
            let n = batch.x.rows();
            let mut eps = Matrix::zeros(n, config.latent_dim);
            noise.fill_gaussian(eps.data_mut());
            let beta = if warmup_steps > 0.0 {
                (((step + 1) as f64) / warmup_steps).min(1.0)
            } else {
                1.0
            };
            let c = if config.conditional() {
                Some(&batch.c)
            } else {
                None
            };
            let (parts, grad) = model.loss_and_grad(&batch.x, c, &eps, beta)?;
            adam.step(&mut params, &grad).map_err(|source| {
                CvaeError::Training {
                    epoch,
                    batch: bi,
                    source,
                }
            })?;
            model.set_params(&params);
            recon += parts.recon * n as f64;
            kl += parts.kl * n as f64;
            seen += n;
            step += 1;
        }
        if seen == 0 {
            return Err(CvaeError::Config {
                message: "training split is empty".into(),
            });
        }
        let (er, ek) = (recon / seen as f64, kl / seen as f64);
        log.push(EpochLoss {
            epoch,
            recon: er,
            kl: ek,
            total: er + ek,
        });
    }

    let last = log.last().copied().unwrap_or(EpochLoss {
        epoch: 0,
        recon: 0.0,
        kl: 0.0,
        total: 0.0,
    });
    let meta = TrainMeta {
        epochs_completed: config.epochs,
        final_recon: last.recon,
        final_kl: last.kl,
        final_total: last.total,
    };
    Ok((model.checkpoint(meta), log))
}

/// `[a | b]` columnwise; `b = None` is a plain copy.
fn hstack(a: &Matrix, b: Option<&Matrix>) -> Matrix {
    let extra = b.map_or(0, |m| m.cols());
    let mut out = Matrix::zeros(a.rows(), a.cols() + extra);
    for r in 0..a.rows() {
        let row = out.row_mut(r);
        row[..a.cols()].copy_from_slice(a.row(r));
        if let Some(b) = b {
            row[a.cols()..].copy_from_slice(b.row(r));
        }
    }
    out
}
