//! Pair-set files.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! "NCPS"  u8 version=1  u16 input_bits  u16 output_bits  u64 count
//! count × [ input packed MSB-first, ceil(m/8) bytes | output, ceil(n/8) bytes ]
//! ```
//!
//! JSON lines: a header `{"in_bits":m,"out_bits":n}` followed by one
//! `{"in":"<HEX>","out":"<HEX>"}` object per pair, hex as in
//! [`BitBlock::to_hex`].

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PairSet;
use crate::{BitBlock, Error, Result};

const MAGIC: &[u8; 4] = b"NCPS";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Binary,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Binary => "ncps",
            Format::Jsonl => "jsonl",
        }
    }

    /// Guesses from a file extension; anything but `.jsonl` is binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => Format::Jsonl,
            _ => Format::Binary,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "bin" | "ncps" => Ok(Format::Binary),
            "jsonl" | "json" => Ok(Format::Jsonl),
            other => Err(Error::Config(format!("unknown dataset format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Binary => "binary",
            Format::Jsonl => "jsonl",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    in_bits: usize,
    out_bits: usize,
}

#[derive(Serialize, Deserialize)]
struct Line {
    #[serde(rename = "in")]
    input: String,
    out: String,
}

pub fn write_pairs(set: &PairSet, path: &Path, format: Format) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_pairs_to(set, &mut w, format)?;
    w.flush()?;
    Ok(())
}

pub fn read_pairs(path: &Path, format: Format) -> Result<PairSet> {
    let mut set = read_pairs_from(BufReader::new(File::open(path)?), format)?;
    set.origin = Some(path.display().to_string());
    Ok(set)
}

pub fn write_pairs_to<W: Write>(set: &PairSet, w: &mut W, format: Format) -> Result<()> {
    match format {
        Format::Binary => {
            let width = |bits: usize, what: &str| {
                u16::try_from(bits)
                    .map_err(|_| Error::Length(format!("{what} width {bits} exceeds u16")))
            };
            w.write_all(MAGIC)?;
            w.write_all(&[VERSION])?;
            w.write_all(&width(set.input_bits, "input")?.to_le_bytes())?;
            w.write_all(&width(set.output_bits, "output")?.to_le_bytes())?;
            w.write_all(&(set.len() as u64).to_le_bytes())?;
            for (x, y) in set.iter() {
                w.write_all(x.as_bytes())?;
                w.write_all(y.as_bytes())?;
            }
        }
        Format::Jsonl => {
            serde_json::to_writer(
                &mut *w,
                &Header {
                    in_bits: set.input_bits,
                    out_bits: set.output_bits,
                },
            )?;
            w.write_all(b"\n")?;
            for (x, y) in set.iter() {
                serde_json::to_writer(
                    &mut *w,
                    &Line {
                        input: x.to_hex(),
                        out: y.to_hex(),
                    },
                )?;
                w.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Truncated(what.to_string()),
        _ => Error::Io(e),
    })
}

pub fn read_pairs_from<R: BufRead>(mut r: R, format: Format) -> Result<PairSet> {
    match format {
        Format::Binary => {
            let mut head = [0u8; 17];
            r.read_exact(&mut head).map_err(|e| match e.kind() {
                ErrorKind::UnexpectedEof => Error::Header("file shorter than header".into()),
                _ => Error::Io(e),
            })?;
            if &head[..4] != MAGIC {
                return Err(Error::Header(format!("bad magic {:?}", &head[..4])));
            }
            if head[4] != VERSION {
                return Err(Error::Header(format!("unsupported version {}", head[4])));
            }
            let m = u16::from_le_bytes([head[5], head[6]]) as usize;
            let n = u16::from_le_bytes([head[7], head[8]]) as usize;
            let count = u64::from_le_bytes(head[9..17].try_into().unwrap());
            if m == 0 || n == 0 {
                return Err(Error::Header(format!("zero width {m}->{n}")));
            }
            let (mb, nb) = (m.div_ceil(8), n.div_ceil(8));
            let mut pairs = Vec::with_capacity(count.min(1 << 24) as usize);
            let mut rec = vec![0u8; mb + nb];
            for i in 0..count {
                read_exact_or(&mut r, &mut rec, &format!("record {i} of {count}"))?;
                pairs.push((
                    BitBlock::unpack(&rec[..mb], m)?,
                    BitBlock::unpack(&rec[mb..], n)?,
                ));
            }
            let mut extra = [0u8; 1];
            if r.read(&mut extra)? != 0 {
                return Err(Error::Format("trailing bytes after last record".into()));
            }
            PairSet::from_pairs(m, n, pairs)
        }
        Format::Jsonl => {
            let mut lines = r.lines();
            let header: Header = match lines.next() {
                Some(line) => serde_json::from_str(&line?)
                    .map_err(|e| Error::Header(format!("jsonl header: {e}")))?,
                None => return Err(Error::Header("empty file".into())),
            };
            let mut pairs = Vec::new();
            for (i, line) in lines.enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: Line = serde_json::from_str(&line)
                    .map_err(|e| Error::Truncated(format!("line {}: {e}", i + 2)))?;
                pairs.push((
                    BitBlock::from_hex_value(&rec.input, header.in_bits)?,
                    BitBlock::from_hex_value(&rec.out, header.out_bits)?,
                ));
            }
            PairSet::from_pairs(header.in_bits, header.out_bits, pairs)
        }
    }
}
