//! Scratch probe: uniqueness of prior samples as training progresses.
//!
//! Usage: uniq_probe <cache> <manifest> [latent] [warmup] [epochs] [batch] [lr] [dec2] [dec1] [enc1] [enc2]

use std::collections::HashSet;

use mgcvae_core::cvae::{CvaeModel, ModelConfig};
use mgcvae_core::dataset::{batches, Dataset, DatasetManifest, Split};
use mgcvae_core::molgraph::GraphSchema;
use mgcvae_core::numcore::{AdamState, Matrix, Rng};
use mgcvae_core::smiles::write_smiles;

fn main() {
    let mut args = std::env::args().skip(1);
    let cache = args.next().expect("cache path");
    let manifest_path = args.next().expect("manifest path");
    let latent: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(64);
    let warmup: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let epochs: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(10);
    let batch: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(128);
    let lr: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let dec2: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(256);
    let dec1: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(128);
    let enc1: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(256);
    let enc2: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(128);

    let ds = Dataset::open(cache.as_ref()).unwrap();
    let manifest = DatasetManifest::load(manifest_path.as_ref()).unwrap();
    let config = ModelConfig {
        latent_dim: latent,
        encoder_widths: vec![enc1, enc2],
        decoder_widths: vec![dec1, dec2],
        condition_dim: 0,
        batch_size: batch,
        epochs,
        lr,
        kl_warmup_epochs: warmup,
        seed: 7,
        schema: GraphSchema::default(),
    };
    let mut model = CvaeModel::init(config.clone()).unwrap();
    let mut params = model.params();
    let mut adam = AdamState::new(params.len(), config.lr);
    let mut noise = Rng::new(config.seed ^ 0x6e6f_6973_65u64);
    let steps_per_epoch = manifest.train.len().div_ceil(config.batch_size);
    let warmup_steps = warmup * steps_per_epoch as f64;
    let mut step = 0usize;
    let started = std::time::Instant::now();

    for epoch in 1..=epochs {
        let epoch_seed = config
            .seed
            .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(epoch as u64));
        let (mut recon_sum, mut kl_sum, mut seen) = (0.0, 0.0, 0usize);
        for batch in batches(&ds, &manifest, Split::Train, config.batch_size, epoch_seed).unwrap()
        {
            let n = batch.x.rows();
            let mut eps = Matrix::zeros(n, config.latent_dim);
            noise.fill_gaussian(eps.data_mut());
            let beta = (((step + 1) as f64) / warmup_steps).min(1.0);
            let (parts, grad) = model.loss_and_grad(&batch.x, None, &eps, beta).unwrap();
            adam.step(&mut params, &grad).unwrap();
            model.set_params(&params);
            recon_sum += parts.recon * n as f64;
            kl_sum += parts.kl * n as f64;
            seen += n;
            step += 1;
        }
        let samples = model.sample(None, 1000, 4242).unwrap();
        let canon: Vec<String> = samples.iter().map(|g| write_smiles(g).unwrap()).collect();
        let distinct: HashSet<&String> = canon.iter().collect();
        if epoch == epochs {
            let mut freq: std::collections::HashMap<&String, usize> = Default::default();
            for s in &canon {
                *freq.entry(s).or_default() += 1;
            }
            let mut top: Vec<_> = freq.into_iter().collect();
            top.sort_by(|a, b| b.1.cmp(&a.1));
            for (s, n) in top.iter().take(5) {
                println!("  dup x{n}: {s}");
            }
        }
        println!(
            "latent {latent} warmup {warmup} batch {batch} lr {lr}: epoch {epoch} recon {:.2} kl {:.2} uniq {:.3} ({:.0}s)",
            recon_sum / seen as f64,
            kl_sum / seen as f64,
            distinct.len() as f64 / 1000.0,
            started.elapsed().as_secs_f64()
        );
    }
}
