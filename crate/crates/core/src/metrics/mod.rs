//! Event log, yearly series, ensemble statistics and contact matrices.

mod contact;
pub mod svg;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use contact::ContactMatrix;

use crate::engine::{AgentId, SimTime};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error("series times must be strictly increasing")]
    NotIncreasing,
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("lag must be at least 1")]
    ZeroLag,
    #[error("no realizations to summarize")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Baseline,
    Intervention,
}

impl Arm {
    pub fn label(self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Intervention => "intervention",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub t: SimTime,
    pub kind: &'static str,
    pub agent: AgentId,
    pub age: f64,
    pub arm: Arm,
    /// Kind-specific payload, e.g. a dose index or a protection level.
    pub value: f64,
}

/// Append-only log of model events.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, rec: EventRecord) {
        debug_assert!(
            self.records.last().is_none_or(|l| l.t <= rec.t),
            "event log out of order"
        );
        self.records.push(rec);
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a EventRecord> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn count(&self, kind: &str) -> usize {
        self.of_kind(kind).count()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Age bins given by ascending lower edges; the last bin is open-ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgeBins(pub Vec<f64>);

impl Default for AgeBins {
    fn default() -> Self {
        AgeBins(vec![
            0.0, 1.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0,
        ])
    }
}

impl AgeBins {
    pub fn uniform(width: f64, count: usize) -> Self {
        AgeBins((0..count).map(|i| i as f64 * width).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        !self.0.is_empty() && self.0[0] == 0.0 && self.0.windows(2).all(|w| w[1] > w[0])
    }

    pub fn bin(&self, age: f64) -> usize {
        self.0.partition_point(|&e| e <= age).saturating_sub(1)
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.0.get(i + 1).copied().unwrap_or(f64::INFINITY)
    }

    pub fn label(&self, i: usize) -> String {
        match self.0.get(i + 1) {
            Some(hi) => format!("{}-{}", self.0[i], hi),
            None => format!("{}+", self.0[i]),
        }
    }
}

/// Yearly reporting grid. Year `y` covers simulation time
/// `[burn_in + y, burn_in + y + 1)`, so year 0 starts at burn-in end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearGrid {
    pub burn_in: f64,
    pub first: i32,
    pub count: usize,
}

impl YearGrid {
    pub fn new(burn_in: f64, horizon: f64) -> Self {
        let first = (-burn_in).floor() as i32;
        let last = (horizon - burn_in).ceil() as i32;
        YearGrid {
            burn_in,
            first,
            count: (last - first).max(0) as usize,
        }
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.count).map(move |i| self.first + i as i32)
    }

    pub fn index(&self, t: SimTime) -> Option<usize> {
        let y = (t - self.burn_in).floor() as i64 - self.first as i64;
        (y >= 0 && (y as usize) < self.count).then_some(y as usize)
    }

    /// Simulation-time bounds of the year at index `i`.
    pub fn bounds(&self, i: usize) -> (SimTime, SimTime) {
        let start = self.burn_in + (self.first + i as i32) as f64;
        (start, start + 1.0)
    }
}

/// Counts and person-time by (year, age bin).
#[derive(Debug, Clone, PartialEq)]
pub struct AgeBinnedIncidence {
    pub grid: YearGrid,
    pub bins: AgeBins,
    counts: Vec<u64>,
    person_years: Vec<f64>,
}

impl AgeBinnedIncidence {
    pub fn new(grid: YearGrid, bins: AgeBins) -> Self {
        let n = grid.count * bins.len();
        AgeBinnedIncidence {
            grid,
            bins,
            counts: vec![0; n],
            person_years: vec![0.0; n],
        }
    }

    fn slot(&self, year: usize, bin: usize) -> usize {
        year * self.bins.len() + bin
    }

    pub fn add_event(&mut self, t: SimTime, age: f64) {
        if let Some(y) = self.grid.index(t) {
            let i = self.slot(y, self.bins.bin(age));
            self.counts[i] += 1;
        }
    }

    /// Add the person-time of someone born at `birth` and alive over
    /// `[from, to)`, split across years and age bins.
    pub fn add_exposure(&mut self, birth: SimTime, from: SimTime, to: SimTime) {
        let mut t = from.max(self.grid.bounds(0).0);
        let end = to.min(self.grid.bounds(self.grid.count.saturating_sub(1)).1);
        while t < end {
            let Some(mut y) = self.grid.index(t) else {
                break;
            };
            let mut b = self.bins.bin(t - birth);
            // `t` can sit exactly on an edge that the subtraction rounds below
            while y + 1 < self.grid.count && self.grid.bounds(y).1 <= t {
                y += 1;
            }
            while b + 1 < self.bins.len() && birth + self.bins.upper(b) <= t {
                b += 1;
            }
            let seg_end = end
                .min(self.grid.bounds(y).1)
                .min(birth + self.bins.upper(b));
            let i = self.slot(y, b);
            self.person_years[i] += seg_end - t;
            if seg_end <= t {
                break;
            }
            t = seg_end;
        }
    }

    pub fn count(&self, year: usize, bin: usize) -> u64 {
        self.counts[self.slot(year, bin)]
    }

    pub fn person_years(&self, year: usize, bin: usize) -> f64 {
        self.person_years[self.slot(year, bin)]
    }

    /// Per-100,000 rate; zero when there is no person-time.
    pub fn rate(&self, year: usize, bin: usize) -> f64 {
        per_100k(self.count(year, bin), self.person_years(year, bin))
    }

    pub fn year_total(&self, year: usize) -> u64 {
        (0..self.bins.len()).map(|b| self.count(year, b)).sum()
    }

    pub fn year_person_years(&self, year: usize) -> f64 {
        (0..self.bins.len())
            .map(|b| self.person_years(year, b))
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Yearly rate per 100,000 over all ages.
    pub fn rate_series(&self, label: &str) -> TimeSeries {
        let values = (0..self.grid.count)
            .map(|y| per_100k(self.year_total(y), self.year_person_years(y)))
            .collect();
        TimeSeries::yearly(label, &self.grid, values)
    }

    /// Yearly raw counts over all ages.
    pub fn count_series(&self, label: &str) -> TimeSeries {
        let values = (0..self.grid.count)
            .map(|y| self.year_total(y) as f64)
            .collect();
        TimeSeries::yearly(label, &self.grid, values)
    }
}

fn per_100k(count: u64, py: f64) -> f64 {
    if py > 0.0 {
        count as f64 / py * 1e5
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: &str, times: Vec<f64>, values: Vec<f64>) -> Result<Self, MetricsError> {
        if times.len() != values.len() {
            return Err(MetricsError::GridMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MetricsError::NotIncreasing);
        }
        Ok(TimeSeries {
            label: label.to_string(),
            times,
            values,
        })
    }

    pub fn yearly(label: &str, grid: &YearGrid, values: Vec<f64>) -> Self {
        let times = grid.years().map(f64::from).collect();
        TimeSeries::new(label, times, values).expect("yearly grid is increasing")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values at times in `[from, to)`.
    pub fn window(&self, from: f64, to: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .filter(move |(t, _)| **t >= from && **t < to)
            .map(|(t, v)| (*t, *v))
    }
}

/// Pointwise `intervention - baseline`.
pub fn paired_difference(
    baseline: &TimeSeries,
    intervention: &TimeSeries,
) -> Result<TimeSeries, MetricsError> {
    if baseline.times != intervention.times {
        return Err(MetricsError::GridMismatch(format!(
            "`{}` and `{}` have different sample times",
            baseline.label, intervention.label
        )));
    }
    let values = baseline
        .values
        .iter()
        .zip(&intervention.values)
        .map(|(b, i)| i - b)
        .collect();
    Ok(TimeSeries {
        label: format!("{} difference", intervention.label),
        times: baseline.times.clone(),
        values,
    })
}

/// Pearson correlation between the series and itself shifted by `lag`.
/// `Ok(None)` when either segment is constant.
pub fn yearly_autocorrelation(values: &[f64], lag: usize) -> Result<Option<f64>, MetricsError> {
    if lag == 0 {
        return Err(MetricsError::ZeroLag);
    }
    if values.len() <= lag + 1 {
        return Err(MetricsError::TooShort {
            needed: lag + 2,
            got: values.len(),
        });
    }
    let a = &values[..values.len() - lag];
    let b = &values[lag..];
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return Ok(None);
    }
    Ok(Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)))
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

pub const SUMMARY_QUANTILES: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub time: f64,
    /// At [`SUMMARY_QUANTILES`].
    pub quantiles: [f64; 5],
    pub mean: f64,
}

impl SummaryPoint {
    pub fn median(&self) -> f64 {
        self.quantiles[2]
    }
}

/// Per-time-point distribution across realizations. A single realization
/// gives a degenerate summary whose quantiles all equal the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub label: String,
    pub realizations: usize,
    pub points: Vec<SummaryPoint>,
}

impl EnsembleSummary {
    pub fn from_series(label: &str, series: &[TimeSeries]) -> Result<Self, MetricsError> {
        let first = series.first().ok_or(MetricsError::Empty)?;
        if let Some(bad) = series.iter().find(|s| s.times != first.times) {
            return Err(MetricsError::GridMismatch(format!(
                "`{}` differs from `{}`",
                bad.label, first.label
            )));
        }
        let mut column = Vec::with_capacity(series.len());
        let points = first
            .times
            .iter()
            .enumerate()
            .map(|(i, &time)| {
                column.clear();
                column.extend(series.iter().map(|s| s.values[i]));
                column.sort_by(f64::total_cmp);
                SummaryPoint {
                    time,
                    quantiles: SUMMARY_QUANTILES.map(|q| quantile_sorted(&column, q)),
                    mean: column.iter().sum::<f64>() / column.len() as f64,
                }
            })
            .collect();
        Ok(EnsembleSummary {
            label: label.to_string(),
            realizations: series.len(),
            points,
        })
    }

    pub fn median_series(&self) -> TimeSeries {
        TimeSeries {
            label: format!("{} median", self.label),
            times: self.points.iter().map(|p| p.time).collect(),
            values: self.points.iter().map(|p| p.median()).collect(),
        }
    }
}

/// Write an [`EnsembleSummary`] block of `summary.csv`.
pub fn write_summary_rows(out: &mut String, arm: &str, s: &EnsembleSummary) {
    use std::fmt::Write as _;
    for p in &s.points {
        let q = p.quantiles;
        let _ = writeln!(
            out,
            "{arm},{},{},{},{},{},{},{}",
            p.time, q[0], q[1], q[2], q[3], q[4], p.mean
        );
    }
}

pub const SUMMARY_HEADER: &str = "arm,year,q025,q25,q50,q75,q975,mean\n";
pub const INCIDENCE_HEADER: &str = "arm,realization,year,age_bin,count,rate_per_100k\n";

/// Rows of `incidence.csv` for one realization and arm.
pub fn write_incidence_rows(
    out: &mut String,
    arm: &str,
    realization: usize,
    inc: &AgeBinnedIncidence,
) {
    use std::fmt::Write as _;
    for (y, year) in inc.grid.years().enumerate() {
        for b in 0..inc.bins.len() {
            let _ = writeln!(
                out,
                "{arm},{realization},{year},{},{},{}",
                inc.bins.label(b),
                inc.count(y, b),
                inc.rate(y, b)
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> TimeSeries {
        let times = (0..values.len()).map(|i| i as f64).collect();
        TimeSeries::new("s", times, values).unwrap()
    }

    #[test]
    fn age_bins_lookup() {
        let b = AgeBins::default();
        assert_eq!(b.bin(0.0), 0);
        assert_eq!(b.bin(0.99), 0);
        assert_eq!(b.bin(1.0), 1);
        assert_eq!(b.bin(95.0), b.len() - 1);
        assert_eq!(b.label(b.len() - 1), "80+");
        assert!(b.is_valid());
    }

    #[test]
    fn year_grid_anchored_at_burn_in() {
        let g = YearGrid::new(20.0, 60.0);
        assert_eq!(g.count, 60);
        assert_eq!(g.first, -20);
        assert_eq!(g.index(20.0), Some(20));
        assert_eq!(g.index(19.999), Some(19));
        assert_eq!(g.index(60.0), None);
        assert_eq!(g.bounds(20), (20.0, 21.0));
    }

    #[test]
    fn single_event_single_year() {
        let mut inc = AgeBinnedIncidence::new(YearGrid::new(0.0, 10.0), AgeBins::default());
        inc.add_event(3.2, 40.0);
        let s = inc.count_series("x");
        assert_eq!(s.values.iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(s.values[3], 1.0);
        assert_eq!(inc.total(), 1);
    }

    #[test]
    fn exposure_splits_across_years_and_bins() {
        let mut inc = AgeBinnedIncidence::new(YearGrid::new(0.0, 3.0), AgeBins(vec![0.0, 1.0]));
        // born at 0.5, alive until 2.5
        inc.add_exposure(0.5, 0.5, 2.5);
        assert!((inc.person_years(0, 0) - 0.5).abs() < 1e-12);
        assert!((inc.person_years(1, 0) - 0.5).abs() < 1e-12);
        assert!((inc.person_years(1, 1) - 0.5).abs() < 1e-12);
        assert!((inc.person_years(2, 1) - 0.5).abs() < 1e-12);
        let total: f64 = (0..3).map(|y| inc.year_person_years(y)).sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn autocorrelation_of_alternation() {
        let v: Vec<f64> = (0..20)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert!((yearly_autocorrelation(&v, 2).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert!((yearly_autocorrelation(&v, 1).unwrap().unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(yearly_autocorrelation(&[3.0; 10], 1).unwrap(), None);
        assert!(yearly_autocorrelation(&v, 0).is_err());
        assert!(yearly_autocorrelation(&v[..2], 1).is_err());
    }

    #[test]
    fn white_noise_autocorrelation_is_small() {
        let mut rng = crate::engine::RngStream::new(9, 0, "wn");
        let n = 4000;
        let v: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let r = yearly_autocorrelation(&v, 1).unwrap().unwrap();
        assert!(r.abs() < 3.0 / (n as f64).sqrt(), "{r}");
    }

    #[test]
    fn paired_difference_checks_grid() {
        let a = series(vec![1.0, 2.0]);
        let b = series(vec![1.0, 2.0]);
        assert!(paired_difference(&a, &b)
            .unwrap()
            .values
            .iter()
            .all(|v| *v == 0.0));
        let c = series(vec![1.0, 2.0, 3.0]);
        assert!(paired_difference(&a, &c).is_err());
    }

    #[test]
    fn summary_quantiles() {
        let s: Vec<TimeSeries> = (1..=5).map(|k| series(vec![k as f64, 0.0])).collect();
        let sum = EnsembleSummary::from_series("x", &s).unwrap();
        assert_eq!(sum.points[0].median(), 3.0);
        assert_eq!(sum.points[0].mean, 3.0);
        assert_eq!(sum.points[0].quantiles[1], 2.0);
        assert_eq!(sum.points[1].quantiles, [0.0; 5]);
        let one = EnsembleSummary::from_series("x", &s[..1]).unwrap();
        assert_eq!(one.points[0].quantiles, [1.0; 5]);
        assert!(EnsembleSummary::from_series("x", &[]).is_err());
    }

    #[test]
    fn non_increasing_times_rejected() {
        assert!(TimeSeries::new("x", vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }
}
