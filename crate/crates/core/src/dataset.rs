//! Dataset ingestion, filtering, caching, and batch iteration.
//!
//! Input is plain text, one molecule per line: a SMILES string optionally
//! followed by tab-separated precomputed logP and MR columns (when the
//! columns are absent the properties are computed here). Accepted records
//! are tensorized once and written to a binary cache so training never
//! re-parses chemistry, plus a JSON manifest holding counts, the split,
//! and the schema the cache was built with.
//!
//! Cache layout (all little-endian): magic `MGCD`, version u32, schema as
//! three u32 (max atoms, atom types, bond types), record count u64; then
//! fixed-width records of 256 bytes SMILES (u16 length + padded bytes),
//! two f64 properties, and the graph matrix bit-packed LSB-first. Matrix
//! entries are exact zeros and ones, so bit packing is lossless and the
//! cache re-expands bit-identically.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::molgraph::{encode_matrix, GraphSchema, InitialGraphMatrix, MolGraph};
use crate::numcore::{Matrix, Rng};
use crate::props::{bin_conditions, crippen_logp, crippen_mr, ConditionVector, ContributionTable};
use crate::smiles::{parse_smiles, write_smiles, SmilesError};

const MAGIC: &[u8; 4] = b"MGCD";
const VERSION: u32 = 1;
const SMILES_FIELD: usize = 256;

/// Property bounds from the dataset definition; both intervals are open.
const LOGP_RANGE: (f64, f64) = (-6.0, 5.0);
const MR_RANGE: (f64, f64) = (5.0, 95.0);

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("cache format: {message}")]
    Format { message: String },
    #[error("schema mismatch: {message}")]
    Schema { message: String },
}

/// Why a molecule was left out of the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// SMILES carries a charge sign.
    Charge,
    /// Multi-fragment input (the '.' separator).
    Fragment,
    /// Some other unsupported SMILES feature (brackets, stereo, ...).
    Feature,
    /// An element outside the twelve supported ones.
    Element,
    /// Unparseable SMILES.
    Syntax,
    /// More heavy atoms than the schema holds.
    Size,
    /// Parsed but chemically invalid.
    Invalid,
    /// logP or MR outside the dataset ranges (or not a number).
    Property,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Charge => "charge",
            RejectReason::Fragment => "fragment",
            RejectReason::Feature => "feature",
            RejectReason::Element => "element",
            RejectReason::Syntax => "syntax",
            RejectReason::Size => "size",
            RejectReason::Invalid => "invalid",
            RejectReason::Property => "property",
        }
    }

    fn from_parse_error(err: &SmilesError) -> RejectReason {
        match err {
            SmilesError::RejectedFeature { ch: '+' | '-', .. } => RejectReason::Charge,
            SmilesError::RejectedFeature { ch: '.', .. } => RejectReason::Fragment,
            SmilesError::RejectedFeature { .. } => RejectReason::Feature,
            SmilesError::UnsupportedElement { .. } => RejectReason::Element,
            SmilesError::Syntax { .. } => RejectReason::Syntax,
        }
    }
}

/// One tensorized molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub canonical_smiles: String,
    pub logp: f64,
    pub mr: f64,
    pub condition: ConditionVector,
    pub matrix: InitialGraphMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DatasetCounts {
    pub total: u64,
    pub accepted: u64,
    pub rejected: BTreeMap<String, u64>,
}

/// Everything about a prepared dataset except the tensors themselves.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DatasetManifest {
    pub source: String,
    pub schema: GraphSchema,
    pub counts: DatasetCounts,
    pub split_seed: u64,
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DatasetManifest, DatasetError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Applies every dataset filter to one parsed molecule. On acceptance the
/// returned record carries the canonical SMILES, properties (precomputed
/// ones are honored when given), condition bins, and the encoded matrix.
pub fn accept_molecule(
    parsed: Result<MolGraph, SmilesError>,
    precomputed: Option<(f64, f64)>,
    schema: &GraphSchema,
    table: &ContributionTable,
) -> Result<DatasetRecord, RejectReason> {
    let g = parsed.map_err(|e| RejectReason::from_parse_error(&e))?;
    if g.atom_count() > schema.max_atoms {
        return Err(RejectReason::Size);
    }
    if !g.validate(schema.max_atoms).valid() {
        return Err(RejectReason::Invalid);
    }
    let (logp, mr) = match precomputed {
        Some(pair) => pair,
        None => (
            crippen_logp(&g, table),
            crippen_mr(&g, table),
        ),
    };
    let in_range = logp > LOGP_RANGE.0 && logp < LOGP_RANGE.1 && mr > MR_RANGE.0 && mr < MR_RANGE.1;
    if !in_range {
        return Err(RejectReason::Property);
    }
    let condition = bin_conditions(logp, mr).map_err(|_| RejectReason::Property)?;
    let canonical_smiles = write_smiles(&g).expect("validated graph always writes");
    let matrix = encode_matrix(&g, schema).expect("size checked above");
    Ok(DatasetRecord {
        canonical_smiles,
        logp,
        mr,
        condition,
        matrix,
    })
}

/// Ingestion settings. `skip_malformed_lines` turns malformed property
/// columns from hard errors into counted rejects.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub cache_path: PathBuf,
    pub manifest_path: PathBuf,
    pub schema: GraphSchema,
    pub split_seed: u64,
    pub skip_malformed_lines: bool,
}

/// Reads, filters, tensorizes and caches a SMILES file, then splits 9:1.
/// Writes the cache and manifest files and returns the manifest.
pub fn ingest(input: &Path, config: &IngestConfig) -> Result<DatasetManifest, DatasetError> {
    let table = ContributionTable::builtin();
    let reader = BufReader::new(std::fs::File::open(input)?);

    let mut counts = DatasetCounts {
        total: 0,
        accepted: 0,
        rejected: BTreeMap::new(),
    };
    let reject = |counts: &mut DatasetCounts, key: &str| {
        *counts.rejected.entry(key.to_string()).or_insert(0) += 1;
    };

    let bytes_per_matrix = config.schema.flat_len().div_ceil(8);
    let mut body: Vec<u8> = Vec::new();
    let mut accepted: u64 = 0;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        counts.total += 1;
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let precomputed = match fields.len() {
            1 => None,
            3 => {
                let lp = fields[1].parse::<f64>();
                let mr = fields[2].parse::<f64>();
                match (lp, mr) {
                    (Ok(lp), Ok(mr)) => Some((lp, mr)),
                    _ => {
                        if config.skip_malformed_lines {
                            reject(&mut counts, "malformed_line");
                            continue;
                        }
                        return Err(DatasetError::Line {
                            line: lineno,
                            message: format!("bad property columns in {trimmed:?}"),
                        });
                    }
                }
            }
            n => {
                if config.skip_malformed_lines {
                    reject(&mut counts, "malformed_line");
                    continue;
                }
                return Err(DatasetError::Line {
                    line: lineno,
                    message: format!("expected 1 or 3 tab-separated fields, got {n}"),
                });
            }
        };
        match accept_molecule(parse_smiles(fields[0]), precomputed, &config.schema, table) {
            Ok(record) => {
                write_record(&mut body, &record, bytes_per_matrix);
                accepted += 1;
            }
            Err(reason) => reject(&mut counts, reason.as_str()),
        }
    }
    counts.accepted = accepted;

    let mut file = Vec::with_capacity(24 + body.len());
    file.extend_from_slice(MAGIC);
    file.extend_from_slice(&VERSION.to_le_bytes());
    file.extend_from_slice(&(config.schema.max_atoms as u32).to_le_bytes());
    file.extend_from_slice(&(config.schema.atom_types as u32).to_le_bytes());
    file.extend_from_slice(&(config.schema.bond_types as u32).to_le_bytes());
    file.extend_from_slice(&accepted.to_le_bytes());
    file.extend_from_slice(&body);
    std::fs::write(&config.cache_path, file)?;

    let (train, test) = split(accepted as usize, config.split_seed);
    let manifest = DatasetManifest {
        source: input.display().to_string(),
        schema: config.schema,
        counts,
        split_seed: config.split_seed,
        train,
        test,
    };
    manifest.save(&config.manifest_path)?;
    Ok(manifest)
}

/// Seeded 9:1 partition of `0..n`. Both sides come back sorted; the test
/// side gets round(n/10) records.
pub fn split(n: usize, seed: u64) -> (Vec<u32>, Vec<u32>) {
    let mut indices: Vec<u32> = (0..n as u32).collect();
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut indices);
    let test_n = (n + 5) / 10;
    let mut test: Vec<u32> = indices[..test_n].to_vec();
    let mut train: Vec<u32> = indices[test_n..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn write_record(out: &mut Vec<u8>, record: &DatasetRecord, bytes_per_matrix: usize) {
    let smiles = record.canonical_smiles.as_bytes();
    assert!(
        smiles.len() <= SMILES_FIELD - 2,
        "canonical SMILES exceeds the fixed field: {}",
        record.canonical_smiles
    );
    out.extend_from_slice(&(smiles.len() as u16).to_le_bytes());
    out.extend_from_slice(smiles);
    out.resize(out.len() + (SMILES_FIELD - 2 - smiles.len()), 0);
    out.extend_from_slice(&record.logp.to_le_bytes());
    out.extend_from_slice(&record.mr.to_le_bytes());
    let start = out.len();
    out.resize(start + bytes_per_matrix, 0);
    for (k, &v) in record.matrix.data.iter().enumerate() {
        if v >= 0.5 {
            out[start + k / 8] |= 1 << (k % 8);
        }
    }
}

/// An open cache. Matrices stay bit-packed in memory and are expanded on
/// demand, so a 50k-record dataset costs megabytes, not gigabytes.
#[derive(Debug)]
pub struct Dataset {
    schema: GraphSchema,
    smiles: Vec<String>,
    props: Vec<(f64, f64)>,
    packed: Vec<u8>,
    bytes_per_matrix: usize,
}

impl Dataset {
    pub fn open(path: &Path) -> Result<Dataset, DatasetError> {
        let bytes = std::fs::read(path)?;
        let fail = |message: String| DatasetError::Format { message };
        if bytes.len() < 24 {
            return Err(fail("truncated header".into()));
        }
        if &bytes[0..4] != MAGIC {
            return Err(fail(format!("bad magic {:?}", &bytes[0..4])));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(fail(format!("unsupported version {version}")));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let schema = GraphSchema {
            max_atoms: word(8),
            atom_types: word(12),
            bond_types: word(16),
        };
        if !schema.compatible() {
            return Err(DatasetError::Schema {
                message: format!("cache schema {schema:?} does not match this build"),
            });
        }
        let count = u64::from_le_bytes(bytes[20..28].try_into().unwrap()) as usize;
        let bytes_per_matrix = schema.flat_len().div_ceil(8);
        let record_len = SMILES_FIELD + 16 + bytes_per_matrix;
        let expect = 28 + count * record_len;
        if bytes.len() != expect {
            return Err(fail(format!(
                "length {} does not match {count} records of {record_len} bytes",
                bytes.len()
            )));
        }

        let mut smiles = Vec::with_capacity(count);
        let mut props = Vec::with_capacity(count);
        let mut packed = Vec::with_capacity(count * bytes_per_matrix);
        for r in 0..count {
            let at = 28 + r * record_len;
            let len = u16::from_le_bytes(bytes[at..at + 2].try_into().unwrap()) as usize;
            if len > SMILES_FIELD - 2 {
                return Err(fail(format!("record {r}: smiles length {len}")));
            }
            let s = std::str::from_utf8(&bytes[at + 2..at + 2 + len])
                .map_err(|e| fail(format!("record {r}: smiles not utf-8: {e}")))?;
            smiles.push(s.to_string());
            let logp = f64::from_le_bytes(
                bytes[at + SMILES_FIELD..at + SMILES_FIELD + 8].try_into().unwrap(),
            );
            let mr = f64::from_le_bytes(
                bytes[at + SMILES_FIELD + 8..at + SMILES_FIELD + 16].try_into().unwrap(),
            );
            props.push((logp, mr));
            packed.extend_from_slice(&bytes[at + SMILES_FIELD + 16..at + record_len]);
        }
        Ok(Dataset {
            schema,
            smiles,
            props,
            packed,
            bytes_per_matrix,
        })
    }

    pub fn len(&self) -> usize {
        self.smiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smiles.is_empty()
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    pub fn smiles(&self, i: usize) -> &str {
        &self.smiles[i]
    }

    pub fn properties(&self, i: usize) -> (f64, f64) {
        self.props[i]
    }

    /// Expands record `i` back to the full in-memory form.
    pub fn record(&self, i: usize) -> DatasetRecord {
        let mut data = vec![0.0; self.schema.flat_len()];
        self.expand_matrix(i, &mut data);
        let (logp, mr) = self.props[i];
        DatasetRecord {
            canonical_smiles: self.smiles[i].clone(),
            logp,
            mr,
            condition: bin_conditions(logp, mr).expect("cached properties are finite"),
            matrix: InitialGraphMatrix {
                schema: self.schema,
                data,
            },
        }
    }

    fn expand_matrix(&self, i: usize, out: &mut [f64]) {
        let base = i * self.bytes_per_matrix;
        for (k, v) in out.iter_mut().enumerate() {
            let bit = self.packed[base + k / 8] >> (k % 8) & 1;
            *v = bit as f64;
        }
    }
}

/// Which side of the 9:1 partition to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// One minibatch: matrices row per sample.
#[derive(Debug)]
pub struct Batch {
    /// Flattened graph matrices, `batch × flat_len`.
    pub x: Matrix,
    /// Condition vectors, `batch × 21`.
    pub c: Matrix,
}

/// Iterator over seeded, shuffled minibatches; the final short batch is
/// included.
#[derive(Debug)]
pub struct Batches<'a> {
    ds: &'a Dataset,
    order: Vec<u32>,
    batch_size: usize,
    at: usize,
}

/// Checks the manifest against the cache and sets up one epoch of batches.
/// The epoch seed fixes the shuffle, so equal seeds give identical batch
/// streams.
pub fn batches<'a>(
    ds: &'a Dataset,
    manifest: &DatasetManifest,
    split: Split,
    batch_size: usize,
    epoch_seed: u64,
) -> Result<Batches<'a>, DatasetError> {
    assert!(batch_size > 0, "batch_size must be positive");
    if manifest.schema != ds.schema {
        return Err(DatasetError::Schema {
            message: format!(
                "manifest schema {:?} != cache schema {:?}",
                manifest.schema, ds.schema
            ),
        });
    }
    if manifest.counts.accepted as usize != ds.len() {
        return Err(DatasetError::Schema {
            message: format!(
                "manifest says {} records, cache holds {}",
                manifest.counts.accepted,
                ds.len()
            ),
        });
    }
    let mut order: Vec<u32> = match split {
        Split::Train => manifest.train.clone(),
        Split::Test => manifest.test.clone(),
    };
    if let Some(&bad) = order.iter().find(|&&i| i as usize >= ds.len()) {
        return Err(DatasetError::Schema {
            message: format!("split index {bad} out of range"),
        });
    }
    Rng::new(epoch_seed).shuffle(&mut order);
    Ok(Batches {
        ds,
        order,
        batch_size,
        at: 0,
    })
}

impl Iterator for Batches<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.at >= self.order.len() {
            return None;
        }
        let end = (self.at + self.batch_size).min(self.order.len());
        let chunk = &self.order[self.at..end];
        self.at = end;
        let flat = self.ds.schema.flat_len();
        let mut x = Matrix::zeros(chunk.len(), flat);
        let mut c = Matrix::zeros(chunk.len(), ConditionVector::LEN);
        for (row, &idx) in chunk.iter().enumerate() {
            self.ds.expand_matrix(idx as usize, x.row_mut(row));
            let (logp, mr) = self.ds.props[idx as usize];
            let cv = bin_conditions(logp, mr).expect("cached properties are finite");
            c.row_mut(row).copy_from_slice(&cv.features());
        }
        Some(Batch { x, c })
    }
}
