//! CSV and binary serialization of fields.
//!
//! Binary single-field layout (little endian): magic `SLF1`, `u64 n`, `f64 x_min`,
//! `f64 x_max`, then `n` pairs `(re, im)` of `f64`.
//!
//! Multi-field container: magic `SLFC`, `u64 count`, then per field an `f64` label
//! followed by a single-field record without its magic.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{ComplexField, SpatialGrid};
use crate::error::{LabError, Result};

const FIELD_MAGIC: &[u8; 4] = b"SLF1";
const CONTAINER_MAGIC: &[u8; 4] = b"SLFC";

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(field: &ComplexField, mut out: W) -> Result<()> {
    writeln!(out, "x,re,im")?;
    for (j, z) in field.values().iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(field.grid().x(j)),
            fmt_f64(z.re),
            fmt_f64(z.im)
        )?;
    }
    Ok(())
}

/// Read a field written by [`write_csv`]. The grid is rebuilt from the first node and spacing.
pub fn read_csv<R: BufRead>(input: R) -> Result<ComplexField> {
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "x,re,im" {
                return Err(LabError::Format(format!("unexpected CSV header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| LabError::Format(format!("line {}: {e}", i + 1)))?;
        if cols.len() != 3 {
            return Err(LabError::Format(format!(
                "line {}: expected 3 columns",
                i + 1
            )));
        }
        xs.push(cols[0]);
        vals.push(Complex64::new(cols[1], cols[2]));
    }
    if xs.len() < 2 {
        return Err(LabError::Format("CSV field needs at least two rows".into()));
    }
    let dx = xs[1] - xs[0];
    let grid = SpatialGrid::new(xs[0], xs[0] + dx * xs.len() as f64, xs.len())?;
    ComplexField::new(grid, vals)
}

fn write_record<W: Write>(field: &ComplexField, out: &mut W) -> Result<()> {
    let g = field.grid();
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    out.write_all(&g.x_min().to_le_bytes())?;
    out.write_all(&g.x_max().to_le_bytes())?;
    for z in field.values() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_record<R: Read>(r: &mut R) -> Result<ComplexField> {
    let n = read_u64(r)? as usize;
    let x_min = read_f64(r)?;
    let x_max = read_f64(r)?;
    let grid = SpatialGrid::new(x_min, x_max, n)?;
    let mut vals = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        vals.push(Complex64::new(re, im));
    }
    ComplexField::new(grid, vals)
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(LabError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&b),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

pub fn write_binary<W: Write>(field: &ComplexField, mut out: W) -> Result<()> {
    out.write_all(FIELD_MAGIC)?;
    write_record(field, &mut out)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<ComplexField> {
    expect_magic(&mut input, FIELD_MAGIC)?;
    read_record(&mut input)
}

/// Write labelled fields (a label is typically a time or an energy).
pub fn write_container<W: Write>(fields: &[(f64, ComplexField)], mut out: W) -> Result<()> {
    out.write_all(CONTAINER_MAGIC)?;
    out.write_all(&(fields.len() as u64).to_le_bytes())?;
    for (label, f) in fields {
        out.write_all(&label.to_le_bytes())?;
        write_record(f, &mut out)?;
    }
    Ok(())
}

pub fn read_container<R: Read>(mut input: R) -> Result<Vec<(f64, ComplexField)>> {
    expect_magic(&mut input, CONTAINER_MAGIC)?;
    let count = read_u64(&mut input)? as usize;
    (0..count)
        .map(|_| {
            let label = read_f64(&mut input)?;
            Ok((label, read_record(&mut input)?))
        })
        .collect()
}

/// Incremental writer for a container whose length is only known at the end.
pub struct ContainerWriter<W: Write + std::io::Seek> {
    out: W,
    /// Stream offset of the count field.
    count_at: u64,
    count: u64,
}

impl<W: Write + std::io::Seek> ContainerWriter<W> {
    /// Starts the container at the current stream position.
    pub fn new(mut out: W) -> Result<Self> {
        let count_at = out.stream_position()? + CONTAINER_MAGIC.len() as u64;
        out.write_all(CONTAINER_MAGIC)?;
        out.write_all(&0u64.to_le_bytes())?;
        Ok(Self {
            out,
            count_at,
            count: 0,
        })
    }

    pub fn push(&mut self, label: f64, field: &ComplexField) -> Result<()> {
        self.out.write_all(&label.to_le_bytes())?;
        write_record(field, &mut self.out)?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.seek(std::io::SeekFrom::Start(self.count_at))?;
        self.out.write_all(&self.count.to_le_bytes())?;
        self.out.seek(std::io::SeekFrom::End(0))?;
        self.out.flush()?;
        Ok(self.out)
    }
}
