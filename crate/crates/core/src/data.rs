//! User-service QoS matrices: WS-Dream text I/O, submatrix extraction and
//! density-controlled train/test splits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Selection};
use crate::error::{Error, Result};

/// Dense `m x n` grid of QoS values with an observation mask.
///
/// Unobserved cells hold `0.0` in `values`; every observed value is finite and
/// strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct QosMatrix {
    m: usize,
    n: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl QosMatrix {
    pub fn new(m: usize, n: usize, values: Vec<f64>, observed: Vec<bool>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if values.len() != m * n || observed.len() != m * n {
            return Err(Error::Format(format!(
                "grid holds {} values and {} mask bits, expected {}",
                values.len(),
                observed.len(),
                m * n
            )));
        }
        let mut values = values;
        for (idx, (v, &obs)) in values.iter_mut().zip(&observed).enumerate() {
            if obs {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::Format(format!(
                        "observed cell ({}, {}) has non-positive or non-finite value {}",
                        idx / n,
                        idx % n,
                        v
                    )));
                }
            } else {
                *v = 0.0;
            }
        }
        Ok(QosMatrix {
            m,
            n,
            values,
            observed,
        })
    }

    /// Matrix with no observed cells.
    pub fn unobserved(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![0.0; m * n], vec![false; m * n])
    }

    /// Builds a matrix from rows where any value `<= 0` (or NaN) means "not observed".
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(m * n);
        let mut observed = Vec::with_capacity(m * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for &v in row {
                let obs = v > 0.0 && v.is_finite();
                values.push(if obs { v } else { 0.0 });
                observed.push(obs);
            }
        }
        Self::new(m, n, values, observed)
    }

    pub fn users(&self) -> usize {
        self.m
    }

    pub fn services(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_observed(&self, u: usize, s: usize) -> bool {
        self.observed[u * self.n + s]
    }

    #[inline]
    pub fn get(&self, u: usize, s: usize) -> Option<f64> {
        let idx = u * self.n + s;
        self.observed[idx].then(|| self.values[idx])
    }

    /// Raw stored value; `0.0` for unobserved cells.
    #[inline]
    pub fn value(&self, u: usize, s: usize) -> f64 {
        self.values[u * self.n + s]
    }

    pub fn set(&mut self, u: usize, s: usize, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Format(format!(
                "cannot store non-positive or non-finite value {value}"
            )));
        }
        let idx = u * self.n + s;
        self.values[idx] = value;
        self.observed[idx] = true;
        Ok(())
    }

    pub fn unset(&mut self, u: usize, s: usize) {
        let idx = u * self.n + s;
        self.values[idx] = 0.0;
        self.observed[idx] = false;
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    pub fn density(&self) -> f64 {
        self.observed_count() as f64 / (self.m * self.n) as f64
    }

    pub fn mask(&self) -> &[bool] {
        &self.observed
    }

    /// Observed `(service, value)` pairs of one user.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = u * self.n;
        (0..self.n)
            .filter(move |&s| self.observed[start + s])
            .map(move |s| (s, self.values[start + s]))
    }

    /// Observed `(user, value)` pairs of one service.
    pub fn column(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.m).filter_map(move |u| {
            let idx = u * self.n + s;
            self.observed[idx].then(|| (u, self.values[idx]))
        })
    }

    /// All observed cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.observed
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(move |(idx, _)| (idx / self.n, idx % self.n, self.values[idx]))
    }

    pub fn transpose(&self) -> QosMatrix {
        let mut values = vec![0.0; self.m * self.n];
        let mut observed = vec![false; self.m * self.n];
        for u in 0..self.m {
            for s in 0..self.n {
                values[s * self.m + u] = self.values[u * self.n + s];
                observed[s * self.m + u] = self.observed[u * self.n + s];
            }
        }
        QosMatrix {
            m: self.n,
            n: self.m,
            values,
            observed,
        }
    }

    /// Observed value range and mean, or `None` for an empty mask.
    pub fn value_stats(&self) -> Option<(f64, f64, f64)> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (_, _, v) in self.cells() {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            count += 1;
        }
        (count > 0).then(|| (min, sum / count as f64, max))
    }

    /// Serializes in WS-Dream layout: one user per line, single spaces,
    /// six significant digits, `-1` for unobserved cells.
    pub fn to_wsdream_string(&self) -> String {
        let mut out = String::with_capacity(self.m * self.n * 8);
        for u in 0..self.m {
            for s in 0..self.n {
                if s > 0 {
                    out.push(' ');
                }
                match self.get(u, s) {
                    Some(v) => out.push_str(&format_sig6(v)),
                    None => out.push_str("-1"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_wsdream(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_wsdream_string()).map_err(|e| Error::io(path, e))
    }
}

/// `%g`-style rendering with six significant digits.
pub(crate) fn format_sig6(v: f64) -> String {
    const DIGITS: i32 = 6;
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        let mut s = String::new();
        let _ = write!(s, "{mantissa}e{sign}{:02}", exp.abs());
        s
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses WS-Dream matrix text. Values `<= 0` are the failure sentinel and
/// become unobserved cells. Blank lines are ignored.
pub fn parse_wsdream_str(text: &str) -> Result<QosMatrix> {
    let mut values = Vec::new();
    let mut observed = Vec::new();
    let mut n = None;
    let mut m = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line_no + 1;
        let mut count = 0usize;
        for (col, token) in line.split_whitespace().enumerate() {
            let v: f64 = token.parse().map_err(|_| Error::BadToken {
                row,
                column: col + 1,
                token: token.to_string(),
            })?;
            if v.is_nan() || v.is_infinite() {
                return Err(Error::BadToken {
                    row,
                    column: col + 1,
                    token: token.to_string(),
                });
            }
            let obs = v > 0.0;
            values.push(if obs { v } else { 0.0 });
            observed.push(obs);
            count += 1;
        }
        match n {
            None => n = Some(count),
            Some(expected) if expected != count => {
                return Err(Error::RaggedRow {
                    row,
                    expected,
                    found: count,
                })
            }
            _ => {}
        }
        m += 1;
    }
    QosMatrix::new(m, n.unwrap_or(0), values, observed)
}

pub fn parse_wsdream_matrix(path: impl AsRef<Path>) -> Result<QosMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_wsdream_str(&text)
}

/// Cuts the `user_num x service_num` experiment block out of `src`.
pub fn extract_submatrix(src: &QosMatrix, cfg: &ExperimentConfig, seed: u64) -> Result<QosMatrix> {
    let (rows, cols) = (cfg.user_num, cfg.service_num);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix);
    }
    if rows > src.m || cols > src.n {
        return Err(Error::DimensionsExceedSource {
            rows,
            cols,
            m: src.m,
            n: src.n,
        });
    }
    let (users, services): (Vec<usize>, Vec<usize>) = match cfg.selection {
        Selection::FirstN => ((0..rows).collect(), (0..cols).collect()),
        Selection::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut users = index::sample(&mut rng, src.m, rows).into_vec();
            let mut services = index::sample(&mut rng, src.n, cols).into_vec();
            users.sort_unstable();
            services.sort_unstable();
            (users, services)
        }
    };
    let mut values = Vec::with_capacity(rows * cols);
    let mut observed = Vec::with_capacity(rows * cols);
    for &u in &users {
        for &s in &services {
            values.push(src.value(u, s));
            observed.push(src.is_observed(u, s));
        }
    }
    QosMatrix::new(rows, cols, values, observed)
}

/// Disjoint train/test partition of a matrix's observed cells.
#[derive(Clone, Debug)]
pub struct TrainTestSplit {
    pub train: QosMatrix,
    pub test: QosMatrix,
    pub density: f64,
    pub seed: u64,
}

/// Number of training cells for a density: `density * observed`, rounded half up.
pub fn train_cell_count(observed: usize, density: f64) -> usize {
    (density * observed as f64 + 0.5).floor() as usize
}

/// Moves a uniformly random `density` fraction of the observed cells into the
/// training matrix; everything else observed becomes test data.
pub fn split_by_density(src: &QosMatrix, density: f64, seed: u64) -> Result<TrainTestSplit> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::DensityOutOfRange(density));
    }
    let cells: Vec<usize> = (0..src.m * src.n).filter(|&i| src.observed[i]).collect();
    let take = train_cell_count(cells.len(), density).min(cells.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = index::sample(&mut rng, cells.len(), take);

    let mut train_mask = vec![false; src.m * src.n];
    for i in chosen.iter() {
        train_mask[cells[i]] = true;
    }
    let mut train_values = vec![0.0; src.m * src.n];
    let mut test_values = vec![0.0; src.m * src.n];
    let mut test_mask = vec![false; src.m * src.n];
    for &c in &cells {
        if train_mask[c] {
            train_values[c] = src.values[c];
        } else {
            test_values[c] = src.values[c];
            test_mask[c] = true;
        }
    }
    Ok(TrainTestSplit {
        train: QosMatrix::new(src.m, src.n, train_values, train_mask)?,
        test: QosMatrix::new(src.m, src.n, test_values, test_mask)?,
        density,
        seed,
    })
}

/// Mean over observed cells.
pub fn global_mean(train: &QosMatrix) -> Result<f64> {
    let (sum, count) = train
        .cells()
        .fold((0.0, 0usize), |(s, c), (_, _, v)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::EmptyTraining);
    }
    Ok(sum / count as f64)
}
