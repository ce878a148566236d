use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};

/// A CSV cell; floats are written with 17 significant digits.
pub enum Cell {
    F(f64),
    U(u64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::U(n) => n.to_string(),
        }
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// CSV with a `# schema: name/vN` comment line before the header row.
pub fn write_csv(path: &Path, schema: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(file, "# schema: {schema}").map_err(io)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io)
}

/// Whitespace-separated `x y stderr envelope` columns for plotting.
pub fn write_plot_data(path: &Path, title: &str, rows: &[(f64, f64, f64, f64)]) -> Result<()> {
    let mut s = format!("# {title}\n# x y stderr envelope\n");
    for (x, y, e, env) in rows {
        s.push_str(&format!("{x:.16e} {y:.16e} {e:.16e} {env:.16e}\n"));
    }
    std::fs::write(path, s).map_err(io)
}

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    started_unix_s: f64,
    wall_clock_s: f64,
    threads: usize,
    version: &'a str,
}

/// Timing and environment data kept apart from the reproducible report.
pub fn write_run_meta(path: &Path, command: &str, started: SystemTime, elapsed: Duration) -> Result<()> {
    let meta = RunMeta {
        command,
        started_unix_s: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        wall_clock_s: elapsed.as_secs_f64(),
        threads: rayon::current_num_threads(),
        version: env!("CARGO_PKG_VERSION"),
    };
    write_json(path, &meta)
}
