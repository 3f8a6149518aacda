//! Compression-based cost of a tree on a dataset.
//!
//! Two quantities in `[0, 1]`-ish scale are measured with a general purpose
//! compressor standing in for Kolmogorov complexity:
//!
//! * **inaccuracy**: how expensive the rows the tree misclassifies are to
//!   describe, relative to the whole dataset,
//!   `(|C(E)| - h) / (|C(X)| - h)`, and exactly `0` when nothing is
//!   misclassified;
//! * **surfeit**: how redundant the tree's text form is,
//!   `1 - (|C(M)| - h) / (|C(R)| - h)` clamped to `[0, 1]`, where `R` is a
//!   fixed pseudo-random (incompressible) byte string as long as `M`.
//!
//! `h` is the compressed length of the empty input, i.e. the backend's fixed
//! container cost. Measuring every length net of it, and comparing the model
//! against an incompressible string of the same length instead of its raw
//! byte count, keeps both ratios meaningful for model texts of a few dozen
//! bytes, where container overhead would otherwise dominate.
//!
//! The two are folded into a single cost by one of six [`CombinerKind`]s.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::tree::Tree;

/// Compression backend, always run at its maximum level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CompressorKind {
    /// bzip2, 900k blocks.
    #[default]
    Bz2,
    /// DEFLATE in a zlib container, level 9.
    Zlib,
    /// LZMA in the classic `.lzma` container, preset 9.
    Lzma,
}

impl CompressorKind {
    pub const ALL: [CompressorKind; 3] = [
        CompressorKind::Bz2,
        CompressorKind::Zlib,
        CompressorKind::Lzma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CompressorKind::Bz2 => "bz2",
            CompressorKind::Zlib => "zlib",
            CompressorKind::Lzma => "lzma",
        }
    }
}

impl fmt::Display for CompressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CompressorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidConfig(format!("unknown compressor {s:?} (bz2, zlib, lzma)"))
            })
    }
}

/// Compresses `bytes` with `kind` at its maximum level.
pub fn compress(kind: CompressorKind, bytes: &[u8]) -> Result<Vec<u8>> {
    match kind {
        CompressorKind::Bz2 => {
            let mut enc = bzip2::write::BzEncoder::new(Vec::new(), bzip2::Compression::best());
            enc.write_all(bytes).map_err(Error::Compression)?;
            enc.finish().map_err(Error::Compression)
        }
        CompressorKind::Zlib => {
            let mut enc = flate2::write::ZlibEncoder::new(Vec::new(), flate2::Compression::best());
            enc.write_all(bytes).map_err(Error::Compression)?;
            enc.finish().map_err(Error::Compression)
        }
        CompressorKind::Lzma => {
            let options = xz2::stream::LzmaOptions::new_preset(9)
                .map_err(|e| Error::Compression(e.into()))?;
            let stream = xz2::stream::Stream::new_lzma_encoder(&options)
                .map_err(|e| Error::Compression(e.into()))?;
            let mut enc = xz2::write::XzEncoder::new_stream(Vec::new(), stream);
            enc.write_all(bytes).map_err(Error::Compression)?;
            enc.finish().map_err(Error::Compression)
        }
    }
}

/// Length in bytes of `bytes` compressed by `kind`.
pub fn compressed_length(kind: CompressorKind, bytes: &[u8]) -> Result<usize> {
    compress(kind, bytes).map(|c| c.len())
}

/// The first `len` bytes of a fixed ChaCha8 stream (seed 0); longer
/// references extend shorter ones.
pub fn reference_bytes(len: usize) -> Vec<u8> {
    let mut buf = vec![0; len];
    ChaCha8Rng::seed_from_u64(0).fill_bytes(&mut buf);
    buf
}

/// How inaccuracy and surfeit fold into one cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CombinerKind {
    /// `2is / (i + s)`, and `0` when `i + s = 0`.
    #[default]
    Harmonic,
    /// `(i + s) / 2`
    Arithmetic,
    /// `sqrt(i s)`
    Geometric,
    /// `sqrt(i^2 + s^2)`
    Euclidean,
    /// `i + s`
    Sum,
    /// `i s`
    Product,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 6] = [
        CombinerKind::Harmonic,
        CombinerKind::Arithmetic,
        CombinerKind::Geometric,
        CombinerKind::Euclidean,
        CombinerKind::Sum,
        CombinerKind::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CombinerKind::Harmonic => "harmonic",
            CombinerKind::Arithmetic => "arithmetic",
            CombinerKind::Geometric => "geometric",
            CombinerKind::Euclidean => "euclidean",
            CombinerKind::Sum => "sum",
            CombinerKind::Product => "product",
        }
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CombinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CombinerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown combiner {s:?} (harmonic, arithmetic, geometric, euclidean, sum, product)"
                ))
            })
    }
}

pub fn combine(kind: CombinerKind, inaccuracy: f64, surfeit: f64) -> f64 {
    let (i, s) = (inaccuracy, surfeit);
    match kind {
        CombinerKind::Harmonic => {
            if i + s == 0.0 {
                0.0
            } else {
                2.0 * i * s / (i + s)
            }
        }
        CombinerKind::Arithmetic => (i + s) / 2.0,
        CombinerKind::Geometric => (i * s).sqrt(),
        CombinerKind::Euclidean => i.hypot(s),
        CombinerKind::Sum => i + s,
        CombinerKind::Product => i * s,
    }
}

/// Inaccuracy, surfeit and their combination for one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub inaccuracy: f64,
    pub surfeit: f64,
    pub combined: f64,
    pub combiner: CombinerKind,
}

impl CostBreakdown {
    pub fn new(combiner: CombinerKind, inaccuracy: f64, surfeit: f64) -> Self {
        CostBreakdown {
            inaccuracy,
            surfeit,
            combined: combine(combiner, inaccuracy, surfeit),
            combiner,
        }
    }
}

fn net_ratio(part: usize, whole: usize, empty: usize) -> f64 {
    let whole = whole.saturating_sub(empty);
    if whole == 0 {
        return 0.0;
    }
    part.saturating_sub(empty) as f64 / whole as f64
}

fn surfeit_from_lengths(model: usize, reference: usize, empty: usize) -> f64 {
    (1.0 - net_ratio(model, reference, empty)).clamp(0.0, 1.0)
}

/// Cost evaluator bound to one dataset and backend.
///
/// Caches the compressed length of the dataset, of the empty input, and of
/// reference strings by length; everything else is recompressed per call.
pub struct CostModel<'a> {
    kind: CompressorKind,
    combiner: CombinerKind,
    data: &'a Dataset,
    empty_len: usize,
    data_len: usize,
    reference_len: HashMap<usize, usize>,
}

impl<'a> CostModel<'a> {
    pub fn new(kind: CompressorKind, combiner: CombinerKind, data: &'a Dataset) -> Result<Self> {
        Ok(CostModel {
            kind,
            combiner,
            data,
            empty_len: compressed_length(kind, &[])?,
            data_len: compressed_length(kind, &data.encode())?,
            reference_len: HashMap::new(),
        })
    }

    pub fn kind(&self) -> CompressorKind {
        self.kind
    }

    pub fn combiner(&self) -> CombinerKind {
        self.combiner
    }

    pub fn inaccuracy(&self, tree: &Tree) -> Result<f64> {
        let wrong = tree.misclassified(self.data)?;
        if wrong.is_empty() {
            return Ok(0.0);
        }
        let errors = compressed_length(
            self.kind,
            &self.data.encode_rows(wrong.rows().iter().copied()),
        )?;
        Ok(net_ratio(errors, self.data_len, self.empty_len))
    }

    pub fn surfeit(&mut self, tree: &Tree) -> Result<f64> {
        let text = tree.serialize();
        let model = compressed_length(self.kind, text.as_bytes())?;
        let reference = match self.reference_len.get(&text.len()) {
            Some(&r) => r,
            None => {
                let r = compressed_length(self.kind, &reference_bytes(text.len()))?;
                self.reference_len.insert(text.len(), r);
                r
            }
        };
        Ok(surfeit_from_lengths(model, reference, self.empty_len))
    }

    pub fn cost(&mut self, tree: &Tree) -> Result<CostBreakdown> {
        let inaccuracy = self.inaccuracy(tree)?;
        let surfeit = self.surfeit(tree)?;
        Ok(CostBreakdown::new(self.combiner, inaccuracy, surfeit))
    }
}

/// Inaccuracy of `tree` on `data`; `0` iff every row is classified right.
pub fn inaccuracy(kind: CompressorKind, tree: &Tree, data: &Dataset) -> Result<f64> {
    CostModel::new(kind, CombinerKind::default(), data)?.inaccuracy(tree)
}

/// Redundancy of the tree's text form, in `[0, 1]`.
pub fn surfeit(kind: CompressorKind, tree: &Tree) -> Result<f64> {
    let text = tree.serialize();
    let model = compressed_length(kind, text.as_bytes())?;
    let reference = compressed_length(kind, &reference_bytes(text.len()))?;
    Ok(surfeit_from_lengths(
        model,
        reference,
        compressed_length(kind, &[])?,
    ))
}

pub fn tree_cost(
    kind: CompressorKind,
    combiner: CombinerKind,
    tree: &Tree,
    data: &Dataset,
) -> Result<CostBreakdown> {
    CostModel::new(kind, combiner, data)?.cost(tree)
}
