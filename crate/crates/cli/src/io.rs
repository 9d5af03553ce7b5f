use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use orlicz_core::{GridFunction64, Result};
use serde::Serialize;

/// Buffered writer to `path`, or to stdout when absent.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn write_json<S: Serialize + ?Sized>(path: Option<&Path>, value: &S) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Grid function from a `.json` file or the `x[,y],value` CSV layout.
pub fn read_function(path: &Path) -> Result<GridFunction64> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        GridFunction64::from_json(&std::fs::read_to_string(path)?)
    } else {
        GridFunction64::read_csv(File::open(path)?)
    }
}
