use std::io::{Read, Write};

use serde::Serialize;

use super::SolverConfig;
use crate::error::{LabError, Result};
use crate::export::fmt_f64;
use crate::grid::{Field, NormKind, PeriodicGrid};

/// Norms of the state at one base time. `dudt_l2` is the `L^2` norm of the
/// right-hand side of the equation at that time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormRecord {
    pub t: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub h1: f64,
    pub h2: f64,
    pub dudt_l2: f64,
}

impl NormRecord {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
            NormKind::H1 => self.h1,
            NormKind::H2 => self.h2,
        }
    }
}

/// Output of a solve: a norm record at every base step and node values at
/// every `snapshot_stride`-th base step (always including the final time).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    grid: PeriodicGrid,
    pub config: SolverConfig,
    pub t_start: f64,
    pub t_end: f64,
    pub norms: Vec<NormRecord>,
    snapshot_times: Vec<f64>,
    snapshots: Vec<Field>,
}

impl Trajectory {
    pub(crate) fn empty(grid: &PeriodicGrid, config: &SolverConfig, t_start: f64) -> Self {
        Self {
            grid: grid.clone(),
            config: config.clone(),
            t_start,
            t_end: t_start,
            norms: Vec::new(),
            snapshot_times: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub(crate) fn push_norms(&mut self, record: NormRecord) {
        self.t_end = record.t;
        self.norms.push(record);
    }

    pub(crate) fn push_snapshot(&mut self, t: f64, field: Field) {
        if self.snapshot_times.last() == Some(&t) {
            return;
        }
        self.t_end = self.t_end.max(t);
        self.snapshot_times.push(t);
        self.snapshots.push(field);
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn snapshot_times(&self) -> &[f64] {
        &self.snapshot_times
    }

    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn final_state(&self) -> Option<&Field> {
        self.snapshots.last()
    }

    pub fn initial_state(&self) -> Option<&Field> {
        self.snapshots.first()
    }

    /// Snapshot whose time is nearest to `t`.
    pub fn snapshot_near(&self, t: f64) -> Option<(f64, &Field)> {
        let i = nearest_index(&self.snapshot_times, t)?;
        Some((self.snapshot_times[i], &self.snapshots[i]))
    }

    /// Norm record whose time is nearest to `t`.
    pub fn record_near(&self, t: f64) -> Option<&NormRecord> {
        let times: Vec<f64> = self.norms.iter().map(|r| r.t).collect();
        nearest_index(&times, t).map(|i| &self.norms[i])
    }

    pub fn times(&self) -> Vec<f64> {
        self.norms.iter().map(|r| r.t).collect()
    }

    pub fn norm_series(&self, kind: NormKind) -> Vec<(f64, f64)> {
        self.norms.iter().map(|r| (r.t, r.get(kind))).collect()
    }

    /// CSV with columns `t, mean, min, max, l1, l2, linf, h1, h2, dudt_l2`.
    pub fn write_norms_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "t,mean,min,max,l1,l2,linf,h1,h2,dudt_l2")?;
        for r in &self.norms {
            let row = [r.t, r.mean, r.min, r.max, r.l1, r.l2, r.linf, r.h1, r.h2, r.dudt_l2];
            let row: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Little-endian binary: `u64 n`, `u64 count`, `count` times as `f64`,
    /// then `count * n` node values, row-major by time.
    pub fn write_snapshots(&self, mut out: impl Write) -> Result<()> {
        out.write_all(&(self.grid.n() as u64).to_le_bytes())?;
        out.write_all(&(self.snapshots.len() as u64).to_le_bytes())?;
        for t in &self.snapshot_times {
            out.write_all(&t.to_le_bytes())?;
        }
        for s in &self.snapshots {
            for v in s.values() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Reads a file written by [`Trajectory::write_snapshots`].
pub fn read_snapshots(mut input: impl Read) -> Result<(Vec<f64>, Vec<Field>)> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let count = u64::from_le_bytes(word) as usize;
    let grid = PeriodicGrid::new(n)?;
    let mut next = || -> Result<f64> {
        input.read_exact(&mut word)?;
        Ok(f64::from_le_bytes(word))
    };
    let times = (0..count).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let values = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
        fields.push(Field::from_values(&grid, values)?);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidConfig("snapshot times not increasing".into()));
    }
    Ok((times, fields))
}

pub(crate) fn nearest_index(times: &[f64], t: f64) -> Option<usize> {
    if times.is_empty() {
        return None;
    }
    let i = times.partition_point(|&s| s < t);
    if i == 0 {
        return Some(0);
    }
    if i == times.len() {
        return Some(times.len() - 1);
    }
    Some(if t - times[i - 1] <= times[i] - t { i - 1 } else { i })
}
