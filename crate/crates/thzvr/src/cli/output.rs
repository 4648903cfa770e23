use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// Buffered file, or stdout when no path is given.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Writes a versioned CSV: one `#` comment line, a header, then the rows.
pub fn write_csv<W: Write>(
    mut out: W,
    version: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(out, "# {version}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Shortest round-trip decimal; `NaN` marks a value that is not available.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn echo_config(config: &NetworkConfig) -> Result<()> {
    let mut out = sink(None)?;
    writeln!(out, "# params_hash = \"{}\"", config.params_hash())?;
    write!(out, "{}", config.canonical_toml())?;
    out.flush()?;
    Ok(())
}
