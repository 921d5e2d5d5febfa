//! Regenerates the published tables as CSV.

use std::io::Write;

use doublespend::asymptotics::z0_sharp;
use doublespend::race::{
    attacker_success_closed, conditional_probability, confirmations_required, nakamoto_probability,
};
use doublespend::{Error, HashSplit, Result};

use crate::grid::Grid;

/// Attacker shares of the confirmation table.
pub const CONFIRMATION_SHARES: [f64; 8] = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45];
pub const CONFIRMATION_RISK: f64 = 0.001;

pub const SATOSHI_KAPPAS: Grid = Grid::new(0.1, 3.5, 0.1);
pub const SATOSHI_SHARES: Grid = Grid::new(0.02, 0.26, 0.02);

/// Sharp ranks listed in the boundary table.
pub const SHARP_RANKS: std::ops::RangeInclusive<u64> = 2..=11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFormat {
    /// Raw probability with this many decimals.
    Probability(usize),
    /// Percentage with this many decimals.
    Percent(usize),
}

/// Rectangular table of probabilities, keyed by a row parameter and a
/// column parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    pub row_label: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
    pub format: CellFormat,
}

impl ProbTable {
    pub fn to_text(&self) -> TextTable {
        let mut header = vec![self.row_label.clone()];
        header.extend(self.columns.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|(key, cells)| {
                let mut row = vec![key.clone()];
                row.extend(cells.iter().map(|&v| format_cell(v, self.format)));
                row
            })
            .collect();
        TextTable { header, rows }
    }
}

fn format_cell(v: f64, format: CellFormat) -> String {
    debug_assert!((0.0..=1.0).contains(&v), "cell {v} is not a probability");
    match format {
        CellFormat::Probability(d) => format!("{v:.d$}"),
        CellFormat::Percent(d) => format!("{:.d$}", 100.0 * v),
    }
}

/// A table whose cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct TextTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    /// Comma separated, LF terminated, header first.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }
}

/// Exact and Nakamoto probabilities for each `z`, to 7 decimals.
pub fn success_table(q: f64, zs: &[u64]) -> Result<ProbTable> {
    let split = HashSplit::new(q)?;
    let rows = zs
        .iter()
        .map(|&z| {
            Ok((
                z.to_string(),
                vec![
                    attacker_success_closed(&split, z)?,
                    nakamoto_probability(&split, z)?,
                ],
            ))
        })
        .collect::<Result<_>>()?;
    Ok(ProbTable {
        row_label: "z".into(),
        columns: vec!["exact".into(), "nakamoto".into()],
        rows,
        format: CellFormat::Probability(7),
    })
}

pub fn pz_q01() -> Result<ProbTable> {
    success_table(0.1, &(0..=10).collect::<Vec<_>>())
}

pub fn pz_q03() -> Result<ProbTable> {
    success_table(0.3, &(0..=50).step_by(5).collect::<Vec<_>>())
}

/// `P(z, κ)` in percent, κ down the rows and q across.
pub fn conditional_table(z: u64, kappas: &Grid, shares: &Grid) -> Result<ProbTable> {
    let splits = shares
        .values()
        .into_iter()
        .map(HashSplit::new)
        .collect::<Result<Vec<_>>>()?;
    let rows = kappas
        .values()
        .into_iter()
        .map(|kappa| {
            let cells = splits
                .iter()
                .map(|s| conditional_probability(s, z, kappa))
                .collect::<Result<_>>()?;
            Ok((kappa.to_string(), cells))
        })
        .collect::<Result<_>>()?;
    Ok(ProbTable {
        row_label: "kappa".into(),
        columns: splits.iter().map(|s| s.q().to_string()).collect(),
        rows,
        format: CellFormat::Percent(2),
    })
}

pub fn satoshi(z: u64) -> Result<ProbTable> {
    conditional_table(z, &SATOSHI_KAPPAS, &SATOSHI_SHARES)
}

/// Confirmations needed to push the risk below 0.1%.
pub fn confirmations() -> Result<TextTable> {
    let rows = CONFIRMATION_SHARES
        .iter()
        .map(|&q| {
            let split = HashSplit::new(q)?;
            Ok(vec![
                q.to_string(),
                confirmations_required(&split, CONFIRMATION_RISK, false)?.to_string(),
                confirmations_required(&split, CONFIRMATION_RISK, true)?.to_string(),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(TextTable {
        header: vec!["q".into(), "z".into(), "z_sn".into()],
        rows,
    })
}

/// Smallest q at which the sharp rank reaches `rank`, to within 1e-9.
pub fn sharp_rank_threshold(rank: u64) -> Result<f64> {
    let reaches = |q: f64| -> Result<bool> { Ok(z0_sharp(&HashSplit::new(q)?)? >= rank) };
    let (mut lo, mut hi) = (1e-9, 0.45);
    if reaches(lo)? {
        return Ok(0.0);
    }
    if !reaches(hi)? {
        return Err(Error::RankScanOverflow { limit: rank });
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Thresholds of the sharp rank, floored to 3 decimals as published.
pub fn z0() -> Result<TextTable> {
    let rows = SHARP_RANKS
        .map(|rank| {
            let t = sharp_rank_threshold(rank)?;
            Ok(vec![
                rank.to_string(),
                format!("{:.3}", (t * 1000.0).floor() / 1000.0),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(TextTable {
        header: vec!["z0".into(), "q_min".into()],
        rows,
    })
}
