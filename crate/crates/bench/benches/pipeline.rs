//! Hot-path benchmarks: SMILES round trip, matrix codec, one training
//! gradient step, fingerprinting, and the report PCA.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use mgcvae_core::cvae::{CvaeModel, ModelConfig};
use mgcvae_core::evalkit::{morgan_fp, pca2};
use mgcvae_core::molgraph::{decode_matrix, encode_matrix, GraphSchema};
use mgcvae_core::numcore::{Matrix, Rng};
use mgcvae_core::props::ConditionVector;
use mgcvae_core::smiles::{parse_smiles, write_smiles};

const CORPUS: &[&str] = &[
    "CC(C)CC1CCC(C)CC1O",
    "O=C1OC(CCl)CN1C1CCCCC1",
    "FC(F)(F)C1CCC(OC2CCOC2)CC1",
    "CC1(C)OC1CC(O)CC#N",
    "S1C(Br)C1CCOP(C)C",
];

fn smiles_roundtrip(c: &mut Criterion) {
    c.bench_function("smiles_parse", |b| {
        b.iter(|| {
            for s in CORPUS {
                black_box(parse_smiles(black_box(s)).unwrap());
            }
        })
    });
    let graphs: Vec<_> = CORPUS.iter().map(|s| parse_smiles(s).unwrap()).collect();
    c.bench_function("smiles_write", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(write_smiles(black_box(g)).unwrap());
            }
        })
    });
}

fn matrix_codec(c: &mut Criterion) {
    let schema = GraphSchema::default();
    let graphs: Vec<_> = CORPUS.iter().map(|s| parse_smiles(s).unwrap()).collect();
    c.bench_function("matrix_encode", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(encode_matrix(black_box(g), &schema).unwrap());
            }
        })
    });
    let encoded: Vec<_> = graphs
        .iter()
        .map(|g| encode_matrix(g, &schema).unwrap())
        .collect();
    c.bench_function("matrix_decode", |b| {
        b.iter(|| {
            for m in &encoded {
                black_box(decode_matrix(black_box(&m.data), &schema));
            }
        })
    });
}

/// One minibatch gradient at the default model shape; the dominant cost
/// of training.
fn train_step(c: &mut Criterion) {
    let config = ModelConfig::default();
    let schema = config.schema;
    let model = CvaeModel::init(config.clone()).unwrap();
    let batch = 32;
    let mut x = Matrix::zeros(batch, schema.flat_len());
    let mut cond = Matrix::zeros(batch, ConditionVector::LEN);
    for i in 0..batch {
        let g = parse_smiles(CORPUS[i % CORPUS.len()]).unwrap();
        let m = encode_matrix(&g, &schema).unwrap();
        x.row_mut(i).copy_from_slice(&m.data);
        cond.set(i, i % ConditionVector::LEN, 1.0);
    }
    let mut rng = Rng::new(11);
    let mut eps = Matrix::zeros(batch, config.latent_dim);
    for i in 0..batch {
        eps.row_mut(i).copy_from_slice(&rng.gaussian_vec(config.latent_dim));
    }
    c.bench_function("train_step_batch32", |b| {
        b.iter(|| {
            black_box(
                model
                    .loss_and_grad(black_box(&x), Some(&cond), &eps, 1.0)
                    .unwrap(),
            );
        })
    });
}

fn fingerprint(c: &mut Criterion) {
    let graphs: Vec<_> = CORPUS.iter().map(|s| parse_smiles(s).unwrap()).collect();
    c.bench_function("morgan_fp_r2", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(morgan_fp(black_box(g), 2, 1024));
            }
        })
    });
}

fn report_pca(c: &mut Criterion) {
    let mut rng = Rng::new(5);
    let mut points = Matrix::zeros(500, 64);
    for i in 0..points.rows() {
        let row = rng.gaussian_vec(64);
        points.row_mut(i).copy_from_slice(&row);
    }
    c.bench_function("pca2_500x64", |b| {
        b.iter(|| black_box(pca2(black_box(&points)).unwrap()))
    });
}

criterion_group!(
    benches,
    smiles_roundtrip,
    matrix_codec,
    train_step,
    fingerprint,
    report_pca
);
criterion_main!(benches);
