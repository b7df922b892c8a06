use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use soliton_lab::field::io::{fmt_f64, ContainerWriter};
use soliton_lab::field::ComplexField;

use crate::error::{CliError, CliResult};
use crate::plot::{render_svg, Axes, Series};

/// Leading bytes of `frames.bin`, followed by the 32-byte config digest, the seed
/// (little-endian u64) and a field container.
pub const FRAMES_MAGIC: &[u8; 8] = b"SLFRAMES";

/// Writes the artifacts of one run into a directory, stamping each with the config hash and seed.
pub struct ArtifactWriter {
    dir: PathBuf,
    hash: String,
    seed: u64,
    written: Vec<PathBuf>,
}

pub fn num(v: f64) -> String {
    fmt_f64(v)
}

impl ArtifactWriter {
    pub fn new(dir: &Path, hash: String, seed: u64) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Output {
            path: dir.display().to_string(),
            source: e,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            seed,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn stamp(&self) -> String {
        format!("config_sha256={} seed={}", self.hash, self.seed)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            source: e,
        })?;
        self.written.push(path);
        Ok(())
    }

    /// CSV with a `#` stamp line, then the header row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut s = format!("# {}\n{}\n", self.stamp(), header.join(","));
        for r in rows {
            debug_assert_eq!(r.len(), header.len());
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.put(name, s.as_bytes())
    }

    /// JSON object with `config_sha256` and `seed` prepended to the fields of `body`.
    pub fn json(&mut self, name: &str, body: Value) -> CliResult<()> {
        let mut m = Map::new();
        m.insert("config_sha256".into(), Value::from(self.hash.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        match body {
            Value::Object(o) => m.extend(o),
            other => {
                m.insert("value".into(), other);
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json serializes");
        s.push('\n');
        self.put(name, s.as_bytes())
    }

    pub fn svg(&mut self, name: &str, series: &[Series], axes: &Axes) -> CliResult<()> {
        let s = render_svg(series, axes, &self.stamp())?;
        self.put(name, s.as_bytes())
    }

    pub fn frames(&mut self, name: &str, frames: &[(f64, &ComplexField)]) -> CliResult<()> {
        let path = self.dir.join(name);
        let io = |e: std::io::Error| CliError::Output {
            path: path.display().to_string(),
            source: e,
        };
        let mut f = fs::File::create(&path).map_err(io)?;
        f.write_all(FRAMES_MAGIC).map_err(io)?;
        f.write_all(&hex_to_bytes(&self.hash)).map_err(io)?;
        f.write_all(&self.seed.to_le_bytes()).map_err(io)?;
        let mut w = ContainerWriter::new(BufWriter::new(f))?;
        for (t, field) in frames {
            w.push(*t, field)?;
        }
        w.finish()?.flush().map_err(io)?;
        self.written.push(path);
        Ok(())
    }
}

fn hex_to_bytes(h: &str) -> Vec<u8> {
    (0..h.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&h[i..i + 2], 16).expect("hex digest"))
        .collect()
}

/// Read back `frames.bin`: (config hash, seed, labelled fields).
pub fn read_frames(path: &Path) -> CliResult<(String, u64, Vec<(f64, ComplexField)>)> {
    let bytes = fs::read(path).map_err(|e| CliError::Output {
        path: path.display().to_string(),
        source: e,
    })?;
    if bytes.len() < 48 || &bytes[..8] != FRAMES_MAGIC {
        return Err(CliError::Usage(format!(
            "{} is not a frames file",
            path.display()
        )));
    }
    let hash = bytes[8..40].iter().map(|b| format!("{b:02x}")).collect();
    let seed = u64::from_le_bytes(bytes[40..48].try_into().expect("8 bytes"));
    let frames = soliton_lab::field::io::read_container(&bytes[48..])?;
    Ok((hash, seed, frames))
}
