//! Experiment sweeps and their CSV tables.

use std::io::{Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use crate::bsaa::worst_case_regret_bsaa;
use crate::error::{Error, Result};
use crate::km::{sample_complexity_km, worst_case_regret_km, LatticeSpec};
use crate::model::{CensoringDesign, CostParameters};
use crate::policies::Policy;

/// One CSV cell. Integers print bare, reals with 17 significant digits, missing values as
/// an empty field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Empty => String::new(),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Cell::Empty);
        }
        if s.bytes().all(|b| b.is_ascii_digit()) {
            return s.parse().map(Cell::Int).map_err(|e| Error::Parse(format!("cell {s:?}: {e}")));
        }
        s.parse().map(Cell::Real).map_err(|e| Error::Parse(format!("cell {s:?}: {e}")))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Real(v) => Some(v),
            Cell::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            rows.push(record.iter().map(Cell::parse).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { header, rows })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_from(file)
    }
}

/// Shortest decimal label for a parameter value, e.g. `0.0225` or `0.7`.
pub fn trim_label(v: f64) -> String {
    let s = format!("{v:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

/// Regret-vs-n sweep over exploration designs: `n - m` samples at `x`, `m` at level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub policy: Policy,
    pub x: f64,
    pub q: f64,
    pub m_values: Vec<usize>,
    pub n_range: RangeInclusive<usize>,
    /// BSAA grid tolerance.
    pub tol: f64,
    pub lattice: LatticeSpec,
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.n_range.is_empty() || *self.n_range.start() == 0 {
            return Err(Error::InvalidParameter("n range must be nonempty and start at >= 1".into()));
        }
        if self.m_values.is_empty() {
            return Err(Error::InvalidParameter("at least one m value is required".into()));
        }
        if !(0.0..=1.0).contains(&self.x) {
            return Err(Error::InvalidParameter(format!("x must lie in [0,1], got {}", self.x)));
        }
        Ok(())
    }
}

/// Worst-case regret certificate value for one design under either policy.
pub fn certificate_value(
    policy: Policy,
    design: &CensoringDesign,
    cp: &CostParameters,
    tol: f64,
    lattice: &LatticeSpec,
) -> Result<f64> {
    Ok(match policy {
        Policy::Bsaa => worst_case_regret_bsaa(design, cp, tol)?.value,
        Policy::Km => worst_case_regret_km(design, cp, lattice)?.value,
    })
}

/// Columns `n, wc_regret_{m}_{x}..., wc_regret_full_info_{x}`; cells with `m > n` are empty.
/// The full-information column is the uncensored SAA benchmark with `n` samples at level 1.
pub fn run_sweep(config: &SweepConfig) -> Result<Table> {
    config.validate()?;
    let cp = CostParameters::from_fractile(config.q)?;
    let label = trim_label(config.x);
    let mut header = vec!["n".to_string()];
    header.extend(config.m_values.iter().map(|m| format!("wc_regret_{m}_{label}")));
    header.push(format!("wc_regret_full_info_{label}"));
    let mut rows = Vec::new();
    for n in config.n_range.clone() {
        let mut row = vec![Cell::Int(n as u64)];
        for &m in &config.m_values {
            if m > n {
                row.push(Cell::Empty);
                continue;
            }
            let design = CensoringDesign::exploration(config.x, n, m)?;
            row.push(Cell::Real(certificate_value(config.policy, &design, &cp, config.tol, &config.lattice)?));
        }
        let full = CensoringDesign::single(1.0, n)?;
        row.push(Cell::Real(worst_case_regret_bsaa(&full, &cp, config.tol)?.value));
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Regret target `frac · q (1 - q)`, a fraction of the no-information regret.
pub fn sample_complexity_target(q: f64, frac: f64) -> Result<f64> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidParameter(format!("target fraction must lie in (0,1), got {frac}")));
    }
    Ok(frac * q * (1.0 - q))
}

/// Grid `start, start + step, ...` up to `end` inclusive, rounded to 10 decimals.
pub fn x_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || end < start || start < 0.0 || end > 1.0 {
        return Err(Error::InvalidParameter(format!("bad x grid {start}..{end} step {step}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10).collect())
}

/// Columns `x, num_sample_{target}`; an empty cell means no `n <= n_cap` reaches the target.
pub fn run_sample_complexity(
    q: f64,
    frac: f64,
    xs: &[f64],
    n_cap: usize,
    lattice: &LatticeSpec,
) -> Result<Table> {
    let target = sample_complexity_target(q, frac)?;
    let header = vec!["x".to_string(), format!("num_sample_{}", trim_label(target))];
    let mut rows = Vec::new();
    for &x in xs {
        let n = sample_complexity_km(x, q, target, n_cap, lattice)?;
        rows.push(vec![Cell::Real(x), n.map_or(Cell::Empty, |n| Cell::Int(n as u64))]);
    }
    Ok(Table { header, rows })
}
