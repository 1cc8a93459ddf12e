//! Grid function files.
//!
//! CSV: one row per spatial cell (flat index), one column per time cell, no
//! header. The grid geometry is not stored and must be supplied on read.
//!
//! Binary: an ASCII header terminated by `end_header\n`, then the values as
//! little-endian `f64` in storage order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GridFunction, GridSpec};
use crate::error::{Error, Result};

pub fn write_csv(u: &GridFunction, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for s in 0..u.spec().n_space() {
        w.write_record(u.space_slice(s).iter().map(|v| format!("{v:e}")))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_csv(spec: GridSpec, path: &Path) -> Result<GridFunction> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut values = Vec::with_capacity(spec.len());
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != spec.n_time() {
            return Err(Error::Format(format!(
                "row {rows} has {} columns, expected {}",
                rec.len(),
                spec.n_time()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {rows}: cannot parse {field:?}")))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows != spec.n_space() {
        return Err(Error::Format(format!("{rows} rows, expected {}", spec.n_space())));
    }
    GridFunction::new(spec, values)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_binary(u: &GridFunction, path: &Path) -> Result<()> {
    let spec = u.spec();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = format!(
        "gridfn 1\nspatial_cells {}\nspatial_extent {}\ntime_cells {}\nhorizon {:e}\nend_header\n",
        join(spec.spatial_cells()),
        spec.spatial_extent().iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" "),
        spec.n_time(),
        spec.horizon()
    );
    let io = |e| Error::io(path, e);
    w.write_all(header.as_bytes()).map_err(io)?;
    for v in u.values() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_binary(path: &Path) -> Result<GridFunction> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut cells = None;
    let mut extent = None;
    let mut time_cells = None;
    let mut horizon = None;
    let mut first = true;
    loop {
        let mut line = String::new();
        if r.read_line(&mut line).map_err(|e| Error::io(path, e))? == 0 {
            return Err(Error::Format("missing end_header".into()));
        }
        let line = line.trim_end();
        if first {
            if line != "gridfn 1" {
                return Err(Error::Format(format!("bad magic line {line:?}")));
            }
            first = false;
            continue;
        }
        if line == "end_header" {
            break;
        }
        let (key, rest) = line.split_once(' ').ok_or_else(|| Error::Format(format!("bad header line {line:?}")))?;
        let bad = |_| Error::Format(format!("bad header line {line:?}"));
        match key {
            "spatial_cells" => {
                cells = Some(rest.split_whitespace().map(str::parse).collect::<std::result::Result<Vec<usize>, _>>().map_err(|_| Error::Format(format!("bad header line {line:?}")))?)
            }
            "spatial_extent" => {
                extent = Some(rest.split_whitespace().map(str::parse).collect::<std::result::Result<Vec<f64>, _>>().map_err(|_| Error::Format(format!("bad header line {line:?}")))?)
            }
            "time_cells" => time_cells = Some(rest.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "horizon" => horizon = Some(rest.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(Error::Format(format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| Error::Format(format!("header lacks {k}"));
    let spec = GridSpec::new(
        &cells.ok_or_else(|| missing("spatial_cells"))?,
        &extent.ok_or_else(|| missing("spatial_extent"))?,
        time_cells.ok_or_else(|| missing("time_cells"))?,
        horizon.ok_or_else(|| missing("horizon"))?,
    )?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * spec.len() {
        return Err(Error::Format(format!("{} payload bytes, expected {}", bytes.len(), 8 * spec.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    GridFunction::new(spec, values)
}
