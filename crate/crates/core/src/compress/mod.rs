//! Lossless compressor backends exposing a code-word-length function `C(x)`
//! in bits, plus the conditional compressed information `C(y|x)`.
//!
//! All lengths are whole bytes of a self-delimiting encoding times eight.

mod block_sort;
mod normality;
#[cfg(feature = "ppm")]
mod ppm;
mod range_coder;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

pub use normality::{check_normality, AxiomResult, NormalityReport, Tolerance, AXIOMS};

/// Anything that can assign a code length (in bits) to a byte string.
///
/// Implementations must be deterministic and safe to call from several
/// threads at once.
pub trait Compressor: Send + Sync {
    fn name(&self) -> &str;

    /// Largest input the compressor can exploit redundancy across, if bounded.
    fn window_limit(&self) -> Option<usize> {
        None
    }

    fn code_length(&self, data: &[u8]) -> Result<u64>;
}

impl<C: Compressor + ?Sized> Compressor for &C {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn window_limit(&self) -> Option<usize> {
        (**self).window_limit()
    }
    fn code_length(&self, data: &[u8]) -> Result<u64> {
        (**self).code_length(data)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// LZ77 + Huffman (raw deflate stream).
    Deflate,
    /// Burrows-Wheeler block sorting.
    BlockSorting,
    /// Context modelling, unbounded window. Needs the `ppm` feature.
    Ppm,
    /// Length-prefixed copy; a reference with analytically known lengths.
    Identity,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Deflate => "deflate",
            Family::BlockSorting => block_sort::NAME,
            Family::Ppm => "ppm",
            Family::Identity => "identity",
        }
    }

    pub fn default_level(self) -> u32 {
        match self {
            Family::Deflate | Family::BlockSorting => 9,
            Family::Ppm => 4,
            Family::Identity => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deflate" => Ok(Family::Deflate),
            "bzip-like" | "block-sorting" => Ok(Family::BlockSorting),
            "ppm" => Ok(Family::Ppm),
            "identity" => Ok(Family::Identity),
            other => Err(Error::Argument(format!(
                "unknown backend '{other}' (expected deflate, bzip-like, ppm or identity)"
            ))),
        }
    }
}

/// Bits of framing the identity backend puts in front of the payload.
pub const IDENTITY_HEADER_BITS: u64 = 64;

/// Deflate's sliding dictionary.
pub const DEFLATE_WINDOW: usize = 32 * 1024;

/// A configured compressor: family plus effort level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Backend {
    family: Family,
    level: u32,
}

impl Backend {
    pub fn new(family: Family, level: u32) -> Result<Self> {
        let ok = match family {
            Family::Deflate => level <= 9,
            Family::BlockSorting => (1..=9).contains(&level),
            Family::Ppm => (1..=6).contains(&level),
            Family::Identity => true,
        };
        if !ok {
            return Err(Error::Argument(format!(
                "level {level} out of range for backend {family}"
            )));
        }
        #[cfg(not(feature = "ppm"))]
        if family == Family::Ppm {
            return Err(Error::Argument(
                "ppm backend not compiled in (enable the `ppm` feature)".into(),
            ));
        }
        Ok(Backend { family, level })
    }

    pub fn with_default_level(family: Family) -> Result<Self> {
        Self::new(family, family.default_level())
    }

    /// Parses a backend name as accepted on the command line.
    pub fn from_name(name: &str, level: Option<u32>) -> Result<Self> {
        let family: Family = name.parse()?;
        Self::new(family, level.unwrap_or(family.default_level()))
    }

    pub fn deflate() -> Self {
        Backend {
            family: Family::Deflate,
            level: 9,
        }
    }

    pub fn block_sorting() -> Self {
        Backend {
            family: Family::BlockSorting,
            level: 9,
        }
    }

    pub fn identity() -> Self {
        Backend {
            family: Family::Identity,
            level: 0,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    fn block_size(&self) -> usize {
        self.level as usize * 100_000
    }

    pub fn compress(&self, data: &[u8]) -> Result<Vec<u8>> {
        match self.family {
            Family::Identity => {
                let mut out = Vec::with_capacity(data.len() + 8);
                out.extend_from_slice(&(data.len() as u64).to_le_bytes());
                out.extend_from_slice(data);
                Ok(out)
            }
            Family::Deflate => {
                let mut enc = flate2::write::DeflateEncoder::new(
                    Vec::with_capacity(data.len() / 2 + 16),
                    flate2::Compression::new(self.level),
                );
                enc.write_all(data)
                    .and_then(|_| enc.finish())
                    .map_err(|e| Error::backend("deflate", e.to_string()))
            }
            Family::BlockSorting => Ok(block_sort::compress(data, self.block_size())),
            #[cfg(feature = "ppm")]
            Family::Ppm => Ok(ppm::compress(data, self.level as usize)),
            #[cfg(not(feature = "ppm"))]
            Family::Ppm => Err(Error::backend("ppm", "not compiled in")),
        }
    }

    pub fn decompress(&self, encoded: &[u8]) -> Result<Vec<u8>> {
        match self.family {
            Family::Identity => {
                if encoded.len() < 8 {
                    return Err(Error::backend("identity", "missing length header"));
                }
                let (head, body) = encoded.split_at(8);
                let len = u64::from_le_bytes(head.try_into().expect("8-byte header"));
                if len != body.len() as u64 {
                    return Err(Error::backend("identity", "length header mismatch"));
                }
                Ok(body.to_vec())
            }
            Family::Deflate => {
                let mut out = Vec::new();
                flate2::read::DeflateDecoder::new(encoded)
                    .read_to_end(&mut out)
                    .map_err(|e| Error::backend("deflate", e.to_string()))?;
                Ok(out)
            }
            Family::BlockSorting => block_sort::decompress(encoded),
            #[cfg(feature = "ppm")]
            Family::Ppm => ppm::decompress(encoded),
            #[cfg(not(feature = "ppm"))]
            Family::Ppm => Err(Error::backend("ppm", "not compiled in")),
        }
    }
}

impl Compressor for Backend {
    fn name(&self) -> &str {
        self.family.name()
    }

    fn window_limit(&self) -> Option<usize> {
        match self.family {
            Family::Deflate => Some(DEFLATE_WINDOW),
            Family::BlockSorting => Some(self.block_size()),
            Family::Ppm | Family::Identity => None,
        }
    }

    fn code_length(&self, data: &[u8]) -> Result<u64> {
        Ok(self.compress(data)?.len() as u64 * 8)
    }
}

/// `C(x)` in bits.
pub fn code_length<C: Compressor + ?Sized>(backend: &C, x: &[u8]) -> Result<u64> {
    backend.code_length(x)
}

pub fn concat(x: &[u8], y: &[u8]) -> Vec<u8> {
    let mut xy = Vec::with_capacity(x.len() + y.len());
    xy.extend_from_slice(x);
    xy.extend_from_slice(y);
    xy
}

/// `C(y|x) = C(xy) - C(x)`; signed because real compressors can go below zero.
pub fn conditional_info<C: Compressor + ?Sized>(backend: &C, x: &[u8], y: &[u8]) -> Result<i64> {
    let cxy = backend.code_length(&concat(x, y))?;
    let cx = backend.code_length(x)?;
    Ok(cxy as i64 - cx as i64)
}

/// Logs and returns a warning when an input exceeds half the backend window.
pub fn window_warning<C: Compressor + ?Sized>(backend: &C, len: usize) -> Option<String> {
    let limit = backend.window_limit()?;
    if len > limit / 2 {
        let msg = format!(
            "{}: input of {len} bytes exceeds half the {limit}-byte window; redundancy across it will not be found",
            backend.name()
        );
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    }
}
