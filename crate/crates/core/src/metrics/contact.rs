use std::fmt::Write as _;

/// Age-by-age contact matrix over uniform age bins.
///
/// Each contact reported by a respondent aged `a` with someone aged `b`
/// adds one to raw `(bin(a), bin(b))` and to raw `(bin(b), bin(a))`, so raw
/// counts are symmetric. Rates use the reported direction only: entry
/// `(i, j)` is the mean number of daily contacts a respondent in bin `i`
/// reports with people in bin `j`, per observed person-day in bin `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMatrix {
    width: f64,
    n: usize,
    counts: Vec<f64>,
    reported: Vec<f64>,
    person_days: Vec<f64>,
}

impl ContactMatrix {
    /// `n` bins of `width` years; the last bin is open-ended.
    pub fn new(width: f64, n: usize) -> Self {
        assert!(width > 0.0 && n > 0);
        ContactMatrix {
            width,
            n,
            counts: vec![0.0; n * n],
            reported: vec![0.0; n * n],
            person_days: vec![0.0; n],
        }
    }

    pub fn bins(&self) -> usize {
        self.n
    }

    pub fn bin_width(&self) -> f64 {
        self.width
    }

    pub fn bin(&self, age: f64) -> usize {
        ((age.max(0.0) / self.width) as usize).min(self.n - 1)
    }

    pub fn label(&self, i: usize) -> String {
        let lo = i as f64 * self.width;
        if i + 1 == self.n {
            format!("{lo}+")
        } else {
            format!("{lo}-{}", lo + self.width - 1.0)
        }
    }

    /// Contact reported by a respondent aged `respondent` with someone aged `other`.
    pub fn add_contact(&mut self, respondent: f64, other: f64) {
        let (i, j) = (self.bin(respondent), self.bin(other));
        self.reported[i * self.n + j] += 1.0;
        self.counts[i * self.n + j] += 1.0;
        self.counts[j * self.n + i] += 1.0;
    }

    /// Person-days observed for someone of age `age`.
    pub fn add_observation(&mut self, age: f64, days: f64) {
        let i = self.bin(age);
        self.person_days[i] += days;
    }

    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.n + j]
    }

    pub fn person_days(&self, i: usize) -> f64 {
        self.person_days[i]
    }

    /// Mean daily contacts; zero for rows without observed person-time.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        let d = self.person_days[i];
        if d > 0.0 {
            self.reported[i * self.n + j] / d
        } else {
            0.0
        }
    }

    /// Rows with no observed person-time.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.person_days[i] <= 0.0)
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.rate(i, j)).sum()
    }

    pub fn merge(&mut self, other: &ContactMatrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.reported.iter_mut().zip(&other.reported) {
            *a += b;
        }
        for (a, b) in self.person_days.iter_mut().zip(&other.person_days) {
            *a += b;
        }
    }

    /// Share of raw contact mass on each band `d = |i - j|`.
    pub fn band_mass(&self) -> Vec<f64> {
        let mut band = vec![0.0; self.n];
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let c = self.raw(i, j);
                band[i.abs_diff(j)] += c;
                total += c;
            }
        }
        if total > 0.0 {
            for b in &mut band {
                *b /= total;
            }
        }
        band
    }

    /// Band mass after dividing each band by the number of cells in it,
    /// so that long and short bands compare fairly.
    pub fn band_density(&self) -> Vec<f64> {
        self.band_mass()
            .iter()
            .enumerate()
            .map(|(d, m)| {
                let cells = if d == 0 { self.n } else { 2 * (self.n - d) };
                m / cells as f64
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_bin,col_bin,contacts_per_day,empty_row\n");
        for i in 0..self.n {
            let empty = self.person_days[i] <= 0.0;
            for j in 0..self.n {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    self.label(i),
                    self.label(j),
                    self.rate(i, j),
                    empty
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mother_and_child() {
        let mut m = ContactMatrix::new(5.0, 17);
        m.add_observation(30.0, 1.0);
        m.add_observation(2.0, 1.0);
        m.add_contact(30.0, 2.0);
        m.add_contact(2.0, 30.0);
        for i in 0..17 {
            for j in 0..17 {
                let expect = (i, j) == (0, 6) || (i, j) == (6, 0);
                assert_eq!(m.raw(i, j) > 0.0, expect, "{i},{j}");
            }
        }
        assert_eq!(m.rate(0, 6), 1.0);
        assert_eq!(m.rate(6, 0), 1.0);
        assert_eq!(m.raw(0, 6), 2.0);
        assert_eq!(m.empty_rows().len(), 15);
    }

    #[test]
    fn counts_are_symmetric() {
        let mut m = ContactMatrix::new(5.0, 4);
        for (a, b) in [(1.0, 7.0), (12.0, 3.0), (50.0, 50.0), (16.0, 2.0)] {
            m.add_contact(a, b);
        }
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.raw(i, j), m.raw(j, i));
            }
        }
        assert!((m.band_mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
