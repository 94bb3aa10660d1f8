//! Evaluation machinery for generated molecule sets: sample-quality
//! metrics, per-condition satisfaction tables, Morgan-style fingerprints,
//! a two-component PCA, and CSV/SVG report emission.
//!
//! Everything here is deterministic: fixed hash constants, seeded power
//! iteration starts, ordered map iteration, and fixed-precision number
//! formatting, so re-running a report over the same inputs reproduces the
//! same bytes.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::molgraph::{bridge_flags, MolGraph};
use crate::numcore::{Matrix, Rng};
use crate::props::bin_conditions;
use crate::smiles::write_smiles;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },
    #[error("bad input: {message}")]
    Input { message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Sample-quality summary over one generated set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsResult {
    pub validity: f64,
    pub uniqueness: f64,
    pub novelty: f64,
    pub n_generated: usize,
    pub n_valid: usize,
    pub n_unique: usize,
}

/// Validity is valid/total under the structural rules (no size cap);
/// uniqueness is distinct canonical SMILES over valid samples; novelty is
/// the fraction of valid samples (counted per sample, not per distinct
/// structure) whose canonical SMILES is absent from `training`. With zero
/// valid samples both ratios are defined as 0.
pub fn metrics(
    generated: &[MolGraph],
    training: &HashSet<String>,
) -> Result<MetricsResult, EvalError> {
    if generated.is_empty() {
        return Err(EvalError::EmptyInput {
            context: "metrics over zero generated molecules",
        });
    }
    let mut canon: Vec<String> = Vec::new();
    for g in generated {
        if g.validate_unbounded().valid() {
            canon.push(write_smiles(g).expect("valid graphs always write"));
        }
    }
    let n_valid = canon.len();
    let n_unique = canon.iter().collect::<HashSet<_>>().len();
    let n_novel = canon.iter().filter(|s| !training.contains(*s)).count();
    let ratio = |num: usize| {
        if n_valid == 0 {
            0.0
        } else {
            num as f64 / n_valid as f64
        }
    };
    Ok(MetricsResult {
        validity: n_valid as f64 / generated.len() as f64,
        uniqueness: ratio(n_unique),
        novelty: ratio(n_novel),
        n_generated: generated.len(),
        n_valid,
        n_unique,
    })
}

/// One condition pair's satisfaction percentages for both models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionRow {
    pub condition_logp: i64,
    pub condition_mr: i64,
    pub cvae_logp_pct: f64,
    pub cvae_mr_pct: f64,
    pub cvae_both_pct: f64,
    pub vae_logp_pct: f64,
    pub vae_mr_pct: f64,
    pub vae_both_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionTable {
    pub rows: Vec<ConditionRow>,
}

fn satisfaction(props: &[(f64, f64)], c1: i64, c2: i64) -> (f64, f64, f64) {
    let (mut lp, mut mr, mut both) = (0usize, 0usize, 0usize);
    for &(x, y) in props {
        let Ok(cv) = bin_conditions(x, y) else {
            continue;
        };
        let a = cv.logp_bin() as i64 == c1;
        let b = cv.mr_bin() as i64 == c2;
        lp += a as usize;
        mr += b as usize;
        both += (a && b) as usize;
    }
    let pct = |n: usize| 100.0 * n as f64 / props.len() as f64;
    (pct(lp), pct(mr), pct(both))
}

/// Builds the per-condition table. `per_pair` holds the conditioned
/// model's generated property pairs keyed by the requested (logP, MR)
/// bins, in the row order the report should use; `baseline` holds the
/// unconditioned model's property pairs and is scored against every
/// condition identically.
pub fn condition_table(
    per_pair: &[((i64, i64), Vec<(f64, f64)>)],
    baseline: &[(f64, f64)],
) -> Result<ConditionTable, EvalError> {
    if per_pair.is_empty() {
        return Ok(ConditionTable::default());
    }
    if baseline.is_empty() {
        return Err(EvalError::EmptyInput {
            context: "condition table baseline",
        });
    }
    let mut rows = Vec::with_capacity(per_pair.len());
    for ((c1, c2), props) in per_pair {
        if props.is_empty() {
            return Err(EvalError::EmptyInput {
                context: "condition pair with zero samples",
            });
        }
        let (cl, cm, cb) = satisfaction(props, *c1, *c2);
        let (vl, vm, vb) = satisfaction(baseline, *c1, *c2);
        rows.push(ConditionRow {
            condition_logp: *c1,
            condition_mr: *c2,
            cvae_logp_pct: cl,
            cvae_mr_pct: cm,
            cvae_both_pct: cb,
            vae_logp_pct: vl,
            vae_mr_pct: vm,
            vae_both_pct: vb,
        });
    }
    Ok(ConditionTable { rows })
}

/// Fixed-length binary fingerprint, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintVector {
    nbits: usize,
    words: Vec<u64>,
}

impl FingerprintVector {
    fn zeros(nbits: usize) -> FingerprintVector {
        FingerprintVector {
            nbits,
            words: vec![0; nbits.div_ceil(64)],
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.nbits);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set bit indices in ascending order.
    pub fn on_bits(&self) -> Vec<usize> {
        (0..self.nbits).filter(|&i| self.get(i)).collect()
    }

    /// 0.0/1.0 expansion, for feeding the PCA.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.nbits).map(|i| self.get(i) as u8 as f64).collect()
    }
}

/// FNV-1a over a byte string; the fingerprint's only hash primitive.
fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Circular-substructure fingerprint. Round-0 identifiers hash the atom's
/// local invariant (element, degree, implicit hydrogens, aromatic flag,
/// ring membership); each later round hashes the previous identifier with
/// the sorted (bond order, neighbor identifier) list, so the result does
/// not depend on atom numbering. Identifiers are deduplicated within each
/// round and each one sets bit `id % nbits`.
pub fn morgan_fp(g: &MolGraph, radius: usize, nbits: usize) -> FingerprintVector {
    assert!(nbits > 0, "nbits must be positive");
    let n = g.atom_count();
    let mut fp = FingerprintVector::zeros(nbits);
    if n == 0 {
        return fp;
    }

    let edges: Vec<(usize, usize)> = g.bonds.iter().map(|b| (b.i, b.j)).collect();
    let bridges = bridge_flags(n, &edges);
    let mut in_ring = vec![false; n];
    for (k, &(i, j)) in edges.iter().enumerate() {
        if !bridges[k] {
            in_ring[i] = true;
            in_ring[j] = true;
        }
    }

    let adjacency = g.adjacency();
    let mut ids: Vec<u64> = (0..n)
        .map(|a| {
            fnv64(&[
                g.atoms[a].element.index() as u8,
                g.degree(a) as u8,
                g.implicit_hydrogens(a) as u8,
                g.atoms[a].aromatic as u8,
                in_ring[a] as u8,
            ])
        })
        .collect();

    let mut seen: BTreeSet<u64> = ids.iter().copied().collect();
    for id in &seen {
        fp.set((id % nbits as u64) as usize);
    }

    for round in 1..=radius {
        let mut next = Vec::with_capacity(n);
        for a in 0..n {
            let mut neighbors: Vec<(u8, u64)> = adjacency[a]
                .iter()
                .map(|&(b, order)| (order.index() as u8, ids[b]))
                .collect();
            neighbors.sort_unstable();
            let mut bytes = Vec::with_capacity(9 + 9 * neighbors.len());
            bytes.push(round as u8);
            bytes.extend_from_slice(&ids[a].to_le_bytes());
            for (order, id) in neighbors {
                bytes.push(order);
                bytes.extend_from_slice(&id.to_le_bytes());
            }
            next.push(fnv64(&bytes));
        }
        ids = next;
        seen.clear();
        seen.extend(ids.iter().copied());
        for id in &seen {
            fp.set((id % nbits as u64) as usize);
        }
    }
    fp
}

/// Two-component principal component analysis result.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca2 {
    /// Centered data projected on the two components, n x 2.
    pub projection: Matrix,
    /// Unit-norm, mutually orthogonal, sign-fixed components.
    pub components: [Vec<f64>; 2],
    /// Fraction of total variance each component explains.
    pub explained: [f64; 2],
}

fn matvec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    (0..m.rows())
        .map(|r| m.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Power iteration on a symmetric PSD matrix, kept orthogonal to `against`
/// when given. Returns the unit eigenvector estimate and its Rayleigh
/// quotient; a zero matrix yields eigenvalue 0 and the (projected) start
/// direction.
fn power_iterate(c: &Matrix, against: Option<&[f64]>) -> (Vec<f64>, f64) {
    let d = c.rows();
    let mut rng = Rng::new(0x9c0f_feeu64);
    let mut v = rng.gaussian_vec(d);
    let project = |v: &mut Vec<f64>| {
        if let Some(u) = against {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, u) in v.iter_mut().zip(u) {
                *x -= dot * u;
            }
        }
    };
    project(&mut v);
    let s = norm(&v);
    for x in v.iter_mut() {
        *x /= s;
    }
    for _ in 0..1000 {
        let mut w = matvec(c, &v);
        project(&mut w);
        let s = norm(&w);
        if s < 1e-300 {
            return (v, 0.0);
        }
        for x in w.iter_mut() {
            *x /= s;
        }
        let delta = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = w;
        if delta < 1e-9 {
            break;
        }
    }
    let cv = matvec(c, &v);
    let lambda: f64 = v.iter().zip(&cv).map(|(a, b)| a * b).sum();
    (v, lambda.max(0.0))
}

fn sign_fix(v: &mut [f64]) {
    let k = (0..v.len())
        .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
        .unwrap();
    if v[k] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Deterministic unit vector orthogonal to `u`: the basis vector with the
/// smallest |u| coordinate, Gram-Schmidt'ed against `u`.
fn orthogonal_completion(u: &[f64]) -> Vec<f64> {
    let k = (0..u.len())
        .min_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap())
        .unwrap();
    let mut v = vec![0.0; u.len()];
    v[k] = 1.0;
    let dot = u[k];
    for (x, ui) in v.iter_mut().zip(u) {
        *x -= dot * ui;
    }
    let s = norm(&v);
    for x in v.iter_mut() {
        *x /= s;
    }
    v
}

/// Projects `points` (n x d, one point per row) onto the top two principal
/// components of their covariance.
pub fn pca2(points: &Matrix) -> Result<Pca2, EvalError> {
    let (n, d) = (points.rows(), points.cols());
    if n < 3 || d < 2 {
        return Err(EvalError::Input {
            message: format!("pca needs at least 3 points of dimension 2, got {n} x {d}"),
        });
    }
    let mut centered = points.clone();
    for c in 0..d {
        let mean = (0..n).map(|r| points.at(r, c)).sum::<f64>() / n as f64;
        for r in 0..n {
            let v = centered.at(r, c) - mean;
            centered.set(r, c, v);
        }
    }
    let mut cov = centered.t_mul(&centered);
    let scale = 1.0 / (n - 1) as f64;
    for v in cov.data_mut() {
        *v *= scale;
    }
    let total: f64 = (0..d).map(|i| cov.at(i, i)).sum();

    let (mut v1, l1) = power_iterate(&cov, None);
    // Degenerate inputs (all points equal) get a fixed basis.
    if total <= 0.0 || l1 <= 0.0 {
        v1 = vec![0.0; d];
        v1[0] = 1.0;
    }
    sign_fix(&mut v1);

    // Deflate and repeat for the runner-up direction.
    for i in 0..d {
        for j in 0..d {
            let v = cov.at(i, j) - l1 * v1[i] * v1[j];
            cov.set(i, j, v);
        }
    }
    let (mut v2, l2) = power_iterate(&cov, Some(&v1));
    let rank_deficient = total <= 0.0 || l2 <= total * 1e-13;
    let l2 = if rank_deficient { 0.0 } else { l2 };
    if rank_deficient {
        v2 = orthogonal_completion(&v1);
    }
    sign_fix(&mut v2);

    let mut projection = Matrix::zeros(n, 2);
    for r in 0..n {
        let row = centered.row(r);
        let x: f64 = row.iter().zip(&v1).map(|(a, b)| a * b).sum();
        let y: f64 = row.iter().zip(&v2).map(|(a, b)| a * b).sum();
        projection.set(r, 0, x);
        projection.set(r, 1, y);
    }
    let explained = if total > 0.0 {
        [l1 / total, l2 / total]
    } else {
        [0.0, 0.0]
    };
    Ok(Pca2 {
        projection,
        components: [v1, v2],
        explained,
    })
}

/// Binned property counts for one molecule source. logP uses integer bins
/// (round half up), MR uses width-5 bins anchored at multiples of 5.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub label: String,
    pub logp: BTreeMap<i64, u64>,
    pub mr: BTreeMap<i64, u64>,
}

pub fn histogram(label: &str, props: &[(f64, f64)]) -> Histogram {
    let mut logp = BTreeMap::new();
    let mut mr = BTreeMap::new();
    for &(x, y) in props {
        if x.is_finite() {
            *logp.entry((x + 0.5).floor() as i64).or_insert(0) += 1;
        }
        if y.is_finite() {
            *mr.entry(((y / 5.0).floor() * 5.0) as i64).or_insert(0) += 1;
        }
    }
    Histogram {
        label: label.to_string(),
        logp,
        mr,
    }
}

/// Everything a report needs, already computed.
#[derive(Debug)]
pub struct ReportInputs<'a> {
    /// (model label, metrics) per evaluated sample set.
    pub metrics: &'a [(String, MetricsResult)],
    pub table: &'a ConditionTable,
    /// (source label, n x 2 projection) per scatter source.
    pub projections: &'a [(String, Matrix)],
    pub histograms: &'a [Histogram],
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Writes `metrics.csv`, `condition_table.csv`, `pca_scatter.svg`, and
/// `prop_hist.svg` into `out_dir`. Byte-deterministic for equal inputs.
pub fn emit_report(inputs: &ReportInputs, out_dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("metrics.csv"), metrics_csv(inputs.metrics))?;
    std::fs::write(
        out_dir.join("condition_table.csv"),
        condition_csv(inputs.table),
    )?;
    std::fs::write(
        out_dir.join("pca_scatter.svg"),
        scatter_svg(inputs.projections),
    )?;
    std::fs::write(out_dir.join("prop_hist.svg"), hist_svg(inputs.histograms))?;
    Ok(())
}

fn metrics_csv(rows: &[(String, MetricsResult)]) -> String {
    let mut out =
        String::from("model,validity,uniqueness,novelty,n_generated,n_valid,n_unique\n");
    for (label, m) in rows {
        let _ = writeln!(
            out,
            "{label},{:.4},{:.4},{:.4},{},{},{}",
            m.validity, m.uniqueness, m.novelty, m.n_generated, m.n_valid, m.n_unique
        );
    }
    out
}

fn condition_csv(table: &ConditionTable) -> String {
    let mut out = String::from(
        "mgcvae_logp_pct,mgcvae_mr_pct,mgcvae_both_pct,\
         mgvae_logp_pct,mgvae_mr_pct,mgvae_both_pct,\
         diff_logp_pct,diff_mr_pct,diff_both_pct,\
         condition_logp,condition_mr\n",
    );
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{},{}",
            r.cvae_logp_pct,
            r.cvae_mr_pct,
            r.cvae_both_pct,
            r.vae_logp_pct,
            r.vae_mr_pct,
            r.vae_both_pct,
            r.cvae_logp_pct - r.vae_logp_pct,
            r.cvae_mr_pct - r.vae_mr_pct,
            r.cvae_both_pct - r.vae_both_pct,
            r.condition_logp,
            r.condition_mr
        );
    }
    out
}

struct Extent {
    min: f64,
    max: f64,
}

impl Extent {
    fn new() -> Extent {
        Extent {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    /// Affine map onto [lo, hi]; a collapsed extent maps to the middle.
    fn map(&self, v: f64, lo: f64, hi: f64) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return (lo + hi) / 2.0;
        }
        lo + (v - self.min) / span * (hi - lo)
    }
}

fn scatter_svg(sources: &[(String, Matrix)]) -> String {
    let (w, h) = (640.0, 480.0);
    let (x0, x1, y0, y1) = (60.0, 620.0, 440.0, 20.0);
    let mut xs = Extent::new();
    let mut ys = Extent::new();
    for (_, m) in sources {
        for r in 0..m.rows() {
            xs.add(m.at(r, 0));
            ys.add(m.at(r, 1));
        }
    }
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\"/>\n",
        x1 - x0,
        y0 - y1
    );
    for (si, (label, m)) in sources.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        for r in 0..m.rows() {
            let cx = xs.map(m.at(r, 0), x0, x1);
            let cy = ys.map(m.at(r, 1), y0, y1);
            let _ = writeln!(
                out,
                "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"2\" fill=\"{color}\" \
                 fill-opacity=\"0.5\"/>"
            );
        }
        let ly = 34.0 + 16.0 * si as f64;
        let _ = writeln!(
            out,
            "<rect x=\"72\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"86\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">\
             {label}</text>",
            ly - 9.0,
            ly
        );
    }
    out.push_str(
        "<text x=\"330\" y=\"466\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">PC1</text>\n\
         <text x=\"22\" y=\"230\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 22 230)\">PC2</text>\n</svg>\n",
    );
    out
}

fn hist_panel(
    out: &mut String,
    sets: &[(&str, &BTreeMap<i64, u64>)],
    title: &str,
    x0: f64,
    x1: f64,
) {
    let (y0, y1) = (380.0, 30.0);
    let _ = writeln!(
        out,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\"/>\n\
         <text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{title}</text>",
        x1 - x0,
        y0 - y1,
        (x0 + x1) / 2.0
    );
    let bins: BTreeSet<i64> = sets
        .iter()
        .flat_map(|(_, m)| m.keys().copied())
        .collect();
    if bins.is_empty() {
        return;
    }
    let peak = sets
        .iter()
        .flat_map(|(_, m)| m.values().copied())
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let bins: Vec<i64> = bins.into_iter().collect();
    let bw = (x1 - x0) / bins.len() as f64;
    for (si, (_, counts)) in sets.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        for (bi, bin) in bins.iter().enumerate() {
            let Some(&count) = counts.get(bin) else {
                continue;
            };
            let bh = (y0 - y1) * count as f64 / peak;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"{color}\" fill-opacity=\"0.45\"/>",
                x0 + bi as f64 * bw,
                y0 - bh,
                bw,
                bh
            );
        }
    }
    let step = bins.len().div_ceil(8);
    for (bi, bin) in bins.iter().enumerate().step_by(step) {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"396\" font-family=\"sans-serif\" font-size=\"10\" \
             text-anchor=\"middle\">{bin}</text>",
            x0 + (bi as f64 + 0.5) * bw
        );
    }
}

fn hist_svg(histograms: &[Histogram]) -> String {
    let (w, h) = (960.0, 420.0);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    let logp: Vec<(&str, &BTreeMap<i64, u64>)> = histograms
        .iter()
        .map(|hg| (hg.label.as_str(), &hg.logp))
        .collect();
    let mr: Vec<(&str, &BTreeMap<i64, u64>)> = histograms
        .iter()
        .map(|hg| (hg.label.as_str(), &hg.mr))
        .collect();
    hist_panel(&mut out, &logp, "logP", 50.0, 470.0);
    hist_panel(&mut out, &mr, "MR", 530.0, 950.0);
    for (si, hg) in histograms.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let lx = 50.0 + 130.0 * si as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{lx:.1}\" y=\"404\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{:.1}\" y=\"413\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 14.0,
            hg.label
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{Atom, Bond, BondOrder, Element};
    use crate::props::{crippen_logp, crippen_mr, ContributionTable};
    use crate::smiles::parse_smiles;
    use crate::synth::{synth_corpus, SynthConfig};

    fn graphs(smiles: &[&str]) -> Vec<MolGraph> {
        smiles.iter().map(|s| parse_smiles(s).unwrap()).collect()
    }

    /// A carbon with five neighbors: structurally invalid.
    fn broken_graph() -> MolGraph {
        let carbon = Atom {
            element: Element::C,
            aromatic: false,
        };
        MolGraph {
            atoms: vec![carbon; 6],
            bonds: (1..6)
                .map(|j| Bond {
                    i: 0,
                    j,
                    order: BondOrder::Single,
                })
                .collect(),
        }
    }

    #[test]
    fn metrics_match_worked_examples() {
        let training: HashSet<String> = HashSet::new();
        let mut gen = graphs(&["CCO", "CCO", "CCC"]);
        let m = metrics(&gen, &training).unwrap();
        assert_eq!(m.validity, 1.0);
        assert!((m.uniqueness - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.novelty, 1.0);
        assert_eq!((m.n_generated, m.n_valid, m.n_unique), (3, 3, 2));

        gen.push(broken_graph());
        let m = metrics(&gen, &training).unwrap();
        assert_eq!(m.validity, 0.75);

        let training: HashSet<String> =
            [write_smiles(&parse_smiles("CCO").unwrap()).unwrap()].into();
        let m = metrics(&gen, &training).unwrap();
        // Two of three valid samples are the known CCO.
        assert!((m.novelty - 1.0 / 3.0).abs() < 1e-15);

        assert!(matches!(
            metrics(&[], &training),
            Err(EvalError::EmptyInput { .. })
        ));
    }

    #[test]
    fn metrics_agree_with_a_naive_recount() {
        let corpus = synth_corpus(81, 120, &SynthConfig::default());
        let training: HashSet<String> = corpus[..60].iter().cloned().collect();
        let mut rng = Rng::new(300);
        for _ in 0..40 {
            let n = 1 + rng.below(20);
            let mut gen: Vec<MolGraph> = Vec::new();
            for _ in 0..n {
                if rng.uniform() < 0.15 {
                    gen.push(broken_graph());
                } else {
                    let pick = &corpus[rng.below(corpus.len())];
                    gen.push(parse_smiles(pick).unwrap());
                }
            }
            let got = metrics(&gen, &training).unwrap();

            // Naive recount with quadratic scans.
            let valid: Vec<String> = gen
                .iter()
                .filter(|g| g.validate_unbounded().valid())
                .map(|g| write_smiles(g).unwrap())
                .collect();
            let mut unique: Vec<&String> = Vec::new();
            for s in &valid {
                if !unique.iter().any(|u| *u == s) {
                    unique.push(s);
                }
            }
            let novel = valid
                .iter()
                .filter(|s| !training.iter().any(|t| t == *s))
                .count();
            assert_eq!(got.n_valid, valid.len());
            assert_eq!(got.n_unique, unique.len());
            assert_eq!(got.validity, valid.len() as f64 / n as f64);
            if !valid.is_empty() {
                assert_eq!(got.uniqueness, unique.len() as f64 / valid.len() as f64);
                assert_eq!(got.novelty, novel as f64 / valid.len() as f64);
            } else {
                assert_eq!((got.uniqueness, got.novelty), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn condition_table_scores_and_bounds() {
        // Everything exactly in bin (1, 30).
        let exact = vec![((1i64, 30i64), vec![(1.2, 31.0), (0.8, 28.0)])];
        let t = condition_table(&exact, &[(5.4, 70.0)]).unwrap();
        let r = t.rows[0];
        assert_eq!(
            (r.cvae_logp_pct, r.cvae_mr_pct, r.cvae_both_pct),
            (100.0, 100.0, 100.0)
        );
        assert_eq!((r.vae_logp_pct, r.vae_mr_pct, r.vae_both_pct), (0.0, 0.0, 0.0));

        // Random data: both <= min(single), baseline identical across rows
        // that share a condition value.
        let mut rng = Rng::new(77);
        let draw = |rng: &mut Rng, n: usize| -> Vec<(f64, f64)> {
            (0..n)
                .map(|_| (rng.uniform() * 8.0 - 4.0, rng.uniform() * 70.0 + 10.0))
                .collect()
        };
        let baseline = draw(&mut rng, 200);
        let mut pairs = Vec::new();
        for c2 in [20i64, 30, 40] {
            for c1 in [0i64, 1, 2] {
                pairs.push(((c1, c2), draw(&mut rng, 50)));
            }
        }
        let t = condition_table(&pairs, &baseline).unwrap();
        assert_eq!(t.rows.len(), 9);
        for r in &t.rows {
            assert!(r.cvae_both_pct <= r.cvae_logp_pct.min(r.cvae_mr_pct) + 1e-12);
            assert!(r.vae_both_pct <= r.vae_logp_pct.min(r.vae_mr_pct) + 1e-12);
        }
        let same_c1: Vec<&ConditionRow> =
            t.rows.iter().filter(|r| r.condition_logp == 1).collect();
        assert!(same_c1.windows(2).all(|w| w[0].vae_logp_pct == w[1].vae_logp_pct));

        assert!(condition_table(&[], &baseline).unwrap().rows.is_empty());
        assert!(matches!(
            condition_table(&exact, &[]),
            Err(EvalError::EmptyInput { .. })
        ));
        assert!(matches!(
            condition_table(&[((0, 20), vec![])], &baseline),
            Err(EvalError::EmptyInput { .. })
        ));
    }

    #[test]
    fn fingerprints_ignore_atom_numbering() {
        let a = morgan_fp(&parse_smiles("CCO").unwrap(), 2, 1024);
        let b = morgan_fp(&parse_smiles("OCC").unwrap(), 2, 1024);
        assert_eq!(a, b);
        assert_eq!(a.nbits(), 1024);

        // Random relabelings of corpus molecules.
        let mut rng = Rng::new(91);
        for smi in synth_corpus(82, 30, &SynthConfig::default()) {
            let g = parse_smiles(&smi).unwrap();
            let reference = morgan_fp(&g, 2, 1024);
            for _ in 0..20 {
                let mut order: Vec<usize> = (0..g.atom_count()).collect();
                rng.shuffle(&mut order);
                let mut inverse = vec![0usize; order.len()];
                for (new, &old) in order.iter().enumerate() {
                    inverse[old] = new;
                }
                let permuted = MolGraph {
                    atoms: order.iter().map(|&old| g.atoms[old]).collect(),
                    bonds: g
                        .bonds
                        .iter()
                        .map(|b| Bond {
                            i: inverse[b.i],
                            j: inverse[b.j],
                            order: b.order,
                        })
                        .collect(),
                };
                assert_eq!(morgan_fp(&permuted, 2, 1024), reference, "{smi}");
            }
        }
    }

    #[test]
    fn single_atom_radius_zero_sets_one_bit() {
        let g = parse_smiles("C").unwrap();
        let fp = morgan_fp(&g, 0, 1024);
        assert_eq!(fp.count_ones(), 1);
    }

    #[test]
    fn ethanol_bits_are_frozen() {
        // Regression pin of this implementation's output, not a
        // cross-library compatibility claim.
        let fp = morgan_fp(&parse_smiles("CCO").unwrap(), 2, 1024);
        assert_eq!(fp.on_bits(), ETHANOL_BITS);
        let dense = fp.to_dense();
        assert_eq!(dense.len(), 1024);
        assert_eq!(dense.iter().sum::<f64>(), fp.count_ones() as f64);
    }

    // Three atoms times three rounds, no collisions: nine bits.
    const ETHANOL_BITS: &[usize] = &[159, 274, 286, 408, 427, 463, 696, 801, 892];

    fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> Vec<(f64, Vec<f64>)> {
        // Cyclic Jacobi rotations; plenty for tiny symmetric matrices.
        let d = a.len();
        let mut v = vec![vec![0.0; d]; d];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _ in 0..200 {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-26 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for k in 0..d {
                        let (vkp, vkq) = (v[k][p], v[k][q]);
                        v[k][p] = c * vkp - s * vkq;
                        v[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut out: Vec<(f64, Vec<f64>)> = (0..d)
            .map(|i| (a[i][i], (0..d).map(|k| v[k][i]).collect()))
            .collect();
        out.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        out
    }

    #[test]
    fn pca_matches_a_dense_eigensolver() {
        let mut rng = Rng::new(55);
        for _ in 0..10 {
            let (n, d) = (40, 4);
            let mut pts = Matrix::zeros(n, d);
            // Anisotropic cloud so eigenvalues are well separated.
            let scales = [3.0, 1.7, 0.9, 0.3];
            for r in 0..n {
                for c in 0..d {
                    pts.set(r, c, rng.gaussian() * scales[c] + c as f64);
                }
            }
            let got = pca2(&pts).unwrap();

            let means: Vec<f64> =
                (0..d).map(|c| (0..n).map(|r| pts.at(r, c)).sum::<f64>() / n as f64).collect();
            let mut cov = vec![vec![0.0; d]; d];
            for (i, cov_row) in cov.iter_mut().enumerate() {
                for (j, slot) in cov_row.iter_mut().enumerate() {
                    *slot = (0..n)
                        .map(|r| (pts.at(r, i) - means[i]) * (pts.at(r, j) - means[j]))
                        .sum::<f64>()
                        / (n - 1) as f64;
                }
            }
            let eig = jacobi_eigen(cov);
            for k in 0..2 {
                let dot: f64 = got.components[k]
                    .iter()
                    .zip(&eig[k].1)
                    .map(|(a, b)| a * b)
                    .sum();
                let err: f64 = got.components[k]
                    .iter()
                    .zip(&eig[k].1)
                    .map(|(a, b)| (a - dot.signum() * b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-8, "component {k}: err {err}");
            }
            assert!(got.explained[0] >= got.explained[1]);
            let ortho: f64 = got.components[0]
                .iter()
                .zip(&got.components[1])
                .map(|(a, b)| a * b)
                .sum();
            assert!(ortho.abs() < 1e-6);
            for k in 0..2 {
                let mean: f64 =
                    (0..n).map(|r| got.projection.at(r, k)).sum::<f64>() / n as f64;
                assert!(mean.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pca_degenerate_line_has_no_second_variance() {
        let n = 12;
        let mut pts = Matrix::zeros(n, 3);
        for r in 0..n {
            let t = r as f64 * 0.7 - 2.0;
            pts.set(r, 0, 2.0 * t);
            pts.set(r, 1, -t);
            pts.set(r, 2, 0.5 * t);
        }
        let got = pca2(&pts).unwrap();
        assert!(got.explained[1] < 1e-12);
        assert!((norm(&got.components[1]) - 1.0).abs() < 1e-12);
        let ortho: f64 = got.components[0]
            .iter()
            .zip(&got.components[1])
            .map(|(a, b)| a * b)
            .sum();
        assert!(ortho.abs() < 1e-9);

        assert!(pca2(&Matrix::zeros(2, 5)).is_err());
        assert!(pca2(&Matrix::zeros(5, 1)).is_err());
    }

    #[test]
    fn reports_are_byte_deterministic() {
        let table = ContributionTable::builtin();
        let corpus = synth_corpus(83, 40, &SynthConfig::default());
        let props: Vec<(f64, f64)> = corpus
            .iter()
            .map(|s| {
                let g = parse_smiles(s).unwrap();
                (crippen_logp(&g, table), crippen_mr(&g, table))
            })
            .collect();
        let gen = graphs(&["CCO", "CCC", "CCN"]);
        let m = metrics(&gen, &HashSet::new()).unwrap();
        let ct = condition_table(
            &[((1, 40), props[..20].to_vec()), ((2, 40), props[20..].to_vec())],
            &props,
        )
        .unwrap();
        let fps = Matrix::from_vec(
            corpus.len(),
            1024,
            corpus
                .iter()
                .flat_map(|s| morgan_fp(&parse_smiles(s).unwrap(), 2, 1024).to_dense())
                .collect(),
        );
        let pca = pca2(&fps).unwrap();
        let inputs = ReportInputs {
            metrics: &[("mgvae".into(), m)],
            table: &ct,
            projections: &[("dataset".into(), pca.projection.clone())],
            histograms: &[histogram("dataset", &props)],
        };
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        emit_report(&inputs, &a).unwrap();
        emit_report(&inputs, &b).unwrap();
        for f in [
            "metrics.csv",
            "condition_table.csv",
            "pca_scatter.svg",
            "prop_hist.svg",
        ] {
            let fa = std::fs::read(a.join(f)).unwrap();
            let fb = std::fs::read(b.join(f)).unwrap();
            assert!(!fa.is_empty());
            assert_eq!(fa, fb, "{f}");
        }

        let text = std::fs::read_to_string(a.join("condition_table.csv")).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header.split(',').count(), 11);
        assert_eq!(text.lines().count(), 3);

        // Empty table emits just the header.
        let empty = ReportInputs {
            metrics: &[],
            table: &ConditionTable::default(),
            projections: &[],
            histograms: &[],
        };
        let c = dir.path().join("c");
        emit_report(&empty, &c).unwrap();
        let text = std::fs::read_to_string(c.join("condition_table.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
    }
}
