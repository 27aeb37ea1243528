//! Trajectory CSV files and JSON documents.
//!
//! A trajectory file has the header `t,sample,dim_0,…,dim_{d-1}` and one row per
//! (node, sample), nodes in order. Values are written with 17 significant digits, which
//! round-trips `f64` exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::dynamics::StackedTrajectory;
use crate::error::{arg_err, Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

fn fmt<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v.as_f64())
}

pub fn write_trajectory<S: Scalar>(path: impl AsRef<Path>, traj: &StackedTrajectory<S>) -> Result<()> {
    let file = File::create(path)?;
    write_trajectory_to(BufWriter::new(file), traj)
}

pub fn write_trajectory_to<S: Scalar, W: Write>(w: W, traj: &StackedTrajectory<S>) -> Result<()> {
    if traj.is_empty() || traj.times.len() != traj.states.len() {
        return arg_err("cannot write an empty or inconsistent trajectory");
    }
    let d = traj.states[0].cols();
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "sample".to_string()];
    header.extend((0..d).map(|j| format!("dim_{j}")));
    wr.write_record(&header).map_err(csv_err)?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        for i in 0..x.rows() {
            let mut rec = vec![fmt(*t), i.to_string()];
            rec.extend(x.row(i).iter().map(|v| fmt(*v)));
            wr.write_record(&rec).map_err(csv_err)?;
        }
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

pub fn read_trajectory<S: Scalar>(path: impl AsRef<Path>) -> Result<StackedTrajectory<S>> {
    read_trajectory_from(BufReader::new(File::open(path)?))
}

pub fn read_trajectory_from<S: Scalar, R: std::io::Read>(r: R) -> Result<StackedTrajectory<S>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
    if header.len() < 3 || &header[0] != "t" || &header[1] != "sample" {
        return Err(parse_err(1, "expected header `t,sample,dim_0,...`".into()));
    }
    for (j, h) in header.iter().skip(2).enumerate() {
        if h != format!("dim_{j}") {
            return Err(parse_err(1, format!("unexpected column `{h}`")));
        }
    }
    let d = header.len() - 2;
    let mut times: Vec<S> = Vec::new();
    let mut blocks: Vec<Vec<S>> = Vec::new();
    let mut expected_sample = 0usize;
    let mut samples_per_node: Option<usize> = None;
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != d + 2 {
            return Err(parse_err(line, format!("expected {} fields, found {}", d + 2, rec.len())));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map(S::c)
                .map_err(|_| parse_err(line, format!("not a number: `{s}`")))
        };
        let t = num(&rec[0])?;
        let sample: usize = rec[1].trim().parse().map_err(|_| parse_err(line, format!("bad sample index `{}`", &rec[1])))?;
        if sample == 0 {
            if let Some(last) = blocks.last() {
                let rows = last.len() / d;
                match samples_per_node {
                    None => samples_per_node = Some(rows),
                    Some(n) if n != rows => return Err(parse_err(line, "nodes with different sample counts".into())),
                    _ => {}
                }
            }
            times.push(t);
            blocks.push(Vec::new());
            expected_sample = 0;
        } else if blocks.is_empty() || times.last() != Some(&t) {
            return Err(parse_err(line, "sample rows out of order".into()));
        }
        if sample != expected_sample {
            return Err(parse_err(line, format!("expected sample {expected_sample}, found {sample}")));
        }
        expected_sample += 1;
        let block = blocks.last_mut().expect("block pushed above");
        for f in rec.iter().skip(2) {
            block.push(num(f)?);
        }
    }
    if blocks.is_empty() {
        return arg_err("trajectory file has no rows");
    }
    let rows = blocks[0].len() / d;
    if blocks.iter().any(|b| b.len() != rows * d) {
        return Err(parse_err(0, "last node has a different sample count".into()));
    }
    let states = blocks.into_iter().map(|b| Mat::new(rows, d, b)).collect::<Result<Vec<_>>>()?;
    Ok(StackedTrajectory { times, states })
}

/// Labels as CSV with header `sample,label_0,…`.
pub fn write_labels<S: Scalar>(path: impl AsRef<Path>, labels: &Mat<S>) -> Result<()> {
    let mut wr = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["sample".to_string()];
    header.extend((0..labels.cols()).map(|j| format!("label_{j}")));
    wr.write_record(&header).map_err(csv_err)?;
    for i in 0..labels.rows() {
        let mut rec = vec![i.to_string()];
        rec.extend(labels.row(i).iter().map(|v| fmt(*v)));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
