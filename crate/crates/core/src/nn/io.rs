//! Versioned model files.
//!
//! ```text
//! nnagg-model
//! version=1
//! spec=7-64:relu-64:relu-1:identity
//! params=4737
//! <4737 little-endian f64 in flat parameter order>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::mlp::Mlp;
use super::spec::MlpSpec;
use crate::{Error, Result};

pub const MODEL_MAGIC: &str = "nnagg-model";
const VERSION: u32 = 1;

pub fn write_model<W: Write>(mlp: &Mlp, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{MODEL_MAGIC}")?;
    writeln!(out, "version={VERSION}")?;
    writeln!(out, "spec={}", mlp.spec().to_text())?;
    writeln!(out, "params={}", mlp.param_count())?;
    for p in mlp.params() {
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()
}

fn header_line<R: BufRead>(input: &mut R, key: &str) -> Result<String> {
    let mut line = String::new();
    input
        .read_line(&mut line)
        .map_err(|e| Error::Format(format!("reading header `{key}`: {e}")))?;
    let line = line.trim_end_matches('\n');
    if key == MODEL_MAGIC {
        return if line == MODEL_MAGIC {
            Ok(String::new())
        } else {
            Err(Error::Format("not a model file (bad magic line)".into()))
        };
    }
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .map(str::to_owned)
        .ok_or_else(|| Error::Format(format!("expected `{key}=` header, found `{line}`")))
}

pub fn read_model<R: BufRead>(mut input: R) -> Result<Mlp> {
    header_line(&mut input, MODEL_MAGIC)?;
    let version = header_line(&mut input, "version")?;
    if version != VERSION.to_string() {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let spec = MlpSpec::from_text(&header_line(&mut input, "spec")?)
        .map_err(|e| Error::Format(e.to_string()))?;
    let count: usize = header_line(&mut input, "params")?
        .parse()
        .map_err(|_| Error::Format("bad parameter count".into()))?;
    if count != spec.param_count() {
        return Err(Error::Format(format!(
            "header declares {count} parameters, architecture {} has {}",
            spec.to_text(),
            spec.param_count()
        )));
    }
    let mut params = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for i in 0..count {
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::Format(format!("truncated after {i} of {count} parameters")))?;
        params.push(f64::from_le_bytes(buf));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest).map_err(|e| Error::Format(e.to_string()))? != 0 {
        return Err(Error::Format("trailing bytes after parameters".into()));
    }
    Mlp::from_params(&spec, params)
}

impl Mlp {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        write_model(self, BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        read_model(BufReader::new(file))
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}
