//! Aggregate run summaries into the quantitative claims: completion-time
//! scaling fits and fallback-count bounds.
//!
//! Fits use the median active time per (n, N_x) cell across seeds, which
//! suppresses the heavy tail the with-high-probability statements allow, and
//! regress those medians against `a * N_x * log n + b * log^2 n` or
//! `a * N_x + b * log^2 n`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::automaton::AlgoVariant;
use crate::model::{ceil_log2, Scenario};
use crate::sim::Trace;
use crate::{Error, Result};

/// One node's completed run.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub n: u32,
    pub n_x: u32,
    pub variant: AlgoVariant,
    pub delta: u32,
    pub gamma: f64,
    pub seed: u64,
    /// Slots from wake to halt.
    pub active_slots: u64,
    /// Slots from wake to first success, when success occurred.
    pub first_success_slots: Option<u64>,
    pub fallbacks: u32,
    pub transmissions: u64,
}

/// Rows for every node of a finished trace that actually halted.
pub fn rows_from_trace(
    scn: &Scenario,
    trace: &Trace,
    variant: AlgoVariant,
    seed: u64,
) -> Vec<RunRow> {
    trace
        .nodes
        .iter()
        .filter_map(|s| {
            let halt = s.halt_slot?;
            Some(RunRow {
                n: scn.n_bound(),
                n_x: s.n_x,
                variant,
                delta: scn.consts().delta,
                gamma: scn.consts().gamma,
                seed,
                active_slots: halt - s.wake,
                first_success_slots: s.first_success.map(|f| f.saturating_sub(s.wake)),
                fallbacks: s.fallbacks,
                transmissions: s.transmissions,
            })
        })
        .collect()
}

/// Which two-term bound shape to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitForm {
    /// active = a * N_x * log n + b * log^2 n
    #[serde(rename = "nlogn_plus_log2")]
    NlogNPlusLog2,
    /// active = a * N_x + b * log^2 n
    #[serde(rename = "n_plus_log2")]
    NPlusLog2,
}

impl std::str::FromStr for FitForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nlogn" | "nlogn_plus_log2" => Ok(FitForm::NlogNPlusLog2),
            "n" | "n_plus_log2" => Ok(FitForm::NPlusLog2),
            other => Err(Error::InvalidConfig(format!("unknown fit form {other:?}"))),
        }
    }
}

/// One aggregated cell of the fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellFit {
    pub n: u32,
    pub n_x: u32,
    pub rows: usize,
    pub median_active: f64,
    pub fitted: f64,
}

/// Least-squares result over the cell medians.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub form: FitForm,
    pub a: f64,
    pub b: f64,
    /// ||residual|| / ||median||, both over cells.
    pub residual: f64,
    pub cells: Vec<CellFit>,
}

/// Fit the requested bound shape to per-node rows. Rows are grouped into
/// (n, N_x) cells, each cell contributes its median active time, and the two
/// coefficients are solved by least squares over cells. Requires at least
/// 10 rows spanning at least 4 distinct N_x values.
pub fn fit_bound(rows: &[RunRow], form: FitForm) -> Result<FitReport> {
    if rows.len() < 10 {
        return Err(Error::InvalidConfig(format!(
            "fit needs at least 10 rows, got {}",
            rows.len()
        )));
    }
    let mut cells: BTreeMap<(u32, u32), Vec<u64>> = BTreeMap::new();
    for row in rows {
        cells.entry((row.n, row.n_x)).or_default().push(row.active_slots);
    }
    let distinct_nx: std::collections::BTreeSet<u32> = rows.iter().map(|r| r.n_x).collect();
    if distinct_nx.len() < 4 {
        return Err(Error::DegenerateFit);
    }

    let mut design: Vec<(f64, f64, f64, u32, u32, usize)> = Vec::with_capacity(cells.len());
    for ((n, n_x), mut values) in cells {
        values.sort_unstable();
        let mid = values.len() / 2;
        let median = if values.len() % 2 == 1 {
            values[mid] as f64
        } else {
            (values[mid - 1] + values[mid]) as f64 / 2.0
        };
        let log_n = ceil_log2(n).max(1) as f64;
        let u = match form {
            FitForm::NlogNPlusLog2 => n_x as f64 * log_n,
            FitForm::NPlusLog2 => n_x as f64,
        };
        let v = log_n * log_n;
        design.push((u, v, median, n, n_x, values.len()));
    }

    // 2x2 normal equations
    let (mut suu, mut suv, mut svv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v, y, ..) in &design {
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suy += u * y;
        svy += v * y;
    }
    let det = suu * svv - suv * suv;
    let scale = suu.max(svv).max(1.0);
    if det.abs() <= 1e-12 * scale * scale {
        return Err(Error::DegenerateFit);
    }
    let a = (suy * svv - svy * suv) / det;
    let b = (svy * suu - suy * suv) / det;

    let mut rss = 0.0;
    let mut yss = 0.0;
    let cells: Vec<CellFit> = design
        .into_iter()
        .map(|(u, v, y, n, n_x, rows)| {
            let fitted = a * u + b * v;
            rss += (y - fitted) * (y - fitted);
            yss += y * y;
            CellFit { n, n_x, rows, median_active: y, fitted }
        })
        .collect();
    let residual = if yss > 0.0 { (rss / yss).sqrt() } else { 0.0 };
    Ok(FitReport { form, a, b, residual, cells })
}

/// Fallback-count ratios against the per-variant bounds: `k / N_x` for the
/// budget-only variant and `k log n / (N_x + log n)` for the power-measuring
/// one. Reports the worst observed ratio of each kind.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct FallbackReport {
    pub alg1_rows: usize,
    pub alg1_max_ratio: f64,
    pub alg2_rows: usize,
    pub alg2_max_ratio: f64,
}

pub fn fallback_stats(rows: &[RunRow]) -> FallbackReport {
    let mut report = FallbackReport::default();
    for row in rows {
        let log_n = ceil_log2(row.n).max(1) as f64;
        match row.variant {
            AlgoVariant::Alg1 => {
                report.alg1_rows += 1;
                let ratio = row.fallbacks as f64 / row.n_x as f64;
                report.alg1_max_ratio = report.alg1_max_ratio.max(ratio);
            }
            AlgoVariant::Alg2 => {
                report.alg2_rows += 1;
                let ratio = row.fallbacks as f64 * log_n / (row.n_x as f64 + log_n);
                report.alg2_max_ratio = report.alg2_max_ratio.max(ratio);
            }
        }
    }
    report
}

/// Parse rows back out of the sweep summary CSV
/// (`node_id,n,N_x,wake,halt,first_success,reason,fallbacks`). Rows without
/// a halt slot are skipped; the variant is supplied by the caller since the
/// summary format does not carry it.
pub fn rows_from_summary_csv(text: &str, variant: AlgoVariant) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::InvalidConfig(format!(
                "summary line {} has {} fields, expected 8",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_u64 = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::InvalidConfig(format!("bad {what}: {s:?}")))
        };
        if fields[4].is_empty() {
            continue; // never halted
        }
        let n: u32 = fields[1]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad n: {:?}", fields[1])))?;
        let n_x: u32 = fields[2]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad N_x: {:?}", fields[2])))?;
        let wake = parse_u64(fields[3], "wake")?;
        let halt = parse_u64(fields[4], "halt")?;
        let first_success = if fields[5].is_empty() {
            None
        } else {
            Some(parse_u64(fields[5], "first_success")?)
        };
        let fallbacks: u32 = fields[7]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad fallbacks: {:?}", fields[7])))?;
        if halt < wake {
            return Err(Error::InvalidConfig(format!("halt {halt} precedes wake {wake}")));
        }
        let reason = fields[6];
        if !matches!(reason, "budget" | "low_power_success" | "none") {
            return Err(Error::InvalidConfig(format!("bad reason {reason:?}")));
        }
        rows.push(RunRow {
            n,
            n_x,
            variant,
            delta: 0,
            gamma: 0.0,
            seed: 0,
            active_slots: halt - wake,
            first_success_slots: first_success.map(|f| f.saturating_sub(wake)),
            fallbacks,
            transmissions: 0,
        });
    }
    Ok(rows)
}
