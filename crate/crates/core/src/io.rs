//! Embedding interchange formats.
//!
//! Binary layout: magic `MIIE`, little-endian `u32` dimension, `u64` count,
//! then `n·d` little-endian `f32` records. CSV holds one embedding per row.
//! Vectors are renormalized in f64 on load since the 32-bit records carry
//! tighter rounding than the unit-norm invariant allows.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{MiiError, Result};
use crate::sphere::Embedding;

pub const MAGIC: [u8; 4] = *b"MIIE";

pub fn write_embeddings<W: Write>(mut w: W, embeddings: &[Embedding]) -> Result<()> {
    if embeddings.is_empty() {
        return Err(MiiError::EmptyInput("embedding list"));
    }
    let d = embeddings[0].dim();
    w.write_all(&MAGIC)?;
    w.write_all(&(d as u32).to_le_bytes())?;
    w.write_all(&(embeddings.len() as u64).to_le_bytes())?;
    for e in embeddings {
        if e.dim() != d {
            return Err(MiiError::DimensionMismatch {
                expected: d,
                got: e.dim(),
            });
        }
        for &c in e.coords() {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_embeddings<R: Read>(mut r: R) -> Result<Vec<Embedding>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(MiiError::Format("bad magic bytes".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    if d < 2 {
        return Err(MiiError::Format(format!("dimension {d} below 2")));
    }
    let mut out = Vec::with_capacity(n);
    let mut row = vec![0u8; d * 4];
    for i in 0..n {
        r.read_exact(&mut row).map_err(|_| {
            MiiError::Format(format!("truncated file: row {i} of {n} incomplete"))
        })?;
        let coords: Vec<f64> = row
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        out.push(Embedding::from_unnormalized(coords).map_err(|e| {
            MiiError::Format(format!("row {i} is not a valid direction: {e}"))
        })?);
    }
    Ok(out)
}

pub fn write_embeddings_file<P: AsRef<Path>>(path: P, embeddings: &[Embedding]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_embeddings(&mut w, embeddings)?;
    w.flush()?;
    Ok(())
}

pub fn read_embeddings_file<P: AsRef<Path>>(path: P) -> Result<Vec<Embedding>> {
    read_embeddings(BufReader::new(File::open(path)?))
}

/// One embedding per row, full f64 round-trip precision.
pub fn write_embeddings_csv<W: Write>(mut w: W, embeddings: &[Embedding]) -> Result<()> {
    if embeddings.is_empty() {
        return Err(MiiError::EmptyInput("embedding list"));
    }
    let d = embeddings[0].dim();
    for e in embeddings {
        if e.dim() != d {
            return Err(MiiError::DimensionMismatch {
                expected: d,
                got: e.dim(),
            });
        }
        let row: Vec<String> = e.coords().iter().map(|c| format!("{c}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_embeddings_csv<R: Read>(r: R) -> Result<Vec<Embedding>> {
    let mut text = String::new();
    let mut r = r;
    r.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let coords: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| MiiError::Format(format!("line {}: {e}", ln + 1)))
            })
            .collect::<Result<_>>()?;
        out.push(
            Embedding::from_unnormalized(coords)
                .map_err(|e| MiiError::Format(format!("line {}: {e}", ln + 1)))?,
        );
    }
    if out.is_empty() {
        return Err(MiiError::Format("no embeddings in CSV".into()));
    }
    Ok(out)
}

pub fn write_embeddings_csv_file<P: AsRef<Path>>(path: P, embeddings: &[Embedding]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_embeddings_csv(&mut w, embeddings)?;
    w.flush()?;
    Ok(())
}

pub fn read_embeddings_csv_file<P: AsRef<Path>>(path: P) -> Result<Vec<Embedding>> {
    read_embeddings_csv(BufReader::new(File::open(path)?))
}
