//! Paired samples, their centered power sums, ranks and the observed
//! correlation.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, NeumaierSum};

/// Paired real samples `(x_i, y_i)`, `i = 1..n`, with `n >= 2` and every value
/// finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Range(format!(
                "x has {} values but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::TooSmall(x.len()));
        }
        if let Some(i) = x
            .iter()
            .zip(&y)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::NonFinite { row: i + 1 });
        }
        Ok(Self { x, y })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (x, y) = pairs.iter().copied().unzip();
        Self::new(x, y)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// The same x with y rearranged as `y[perm[i]]`.
    pub fn permute_y(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::Range("permutation length differs from n".into()));
        }
        let y = perm.iter().map(|&j| self.y[j]).collect();
        Ok(Self {
            x: self.x.clone(),
            y,
        })
    }
}

/// Centered power sums `S[j] = sum_i (z_i - mean)^j` for `j = 0..=max_order`.
///
/// `S[0] = n`. The central moments `<z^j>` are `S[j] / n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralMoments {
    n: usize,
    mean: f64,
    sums: Vec<f64>,
}

impl CentralMoments {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max_order(&self) -> usize {
        self.sums.len() - 1
    }

    /// `S[j]`; panics if `j` exceeds [`Self::max_order`].
    pub fn sum(&self, j: usize) -> f64 {
        self.sums[j]
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Central moment `<z^j> = S[j] / n`.
    pub fn moment(&self, j: usize) -> f64 {
        self.sums[j] / self.n as f64
    }

    /// Population variance `S[2] / n`.
    pub fn variance(&self) -> f64 {
        self.moment(2)
    }

    /// `sqrt(S[2] / n)`.
    pub fn sigma(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Power sums of the data rescaled to unit `S[2]`: `S[j] / S[2]^(j/2)`,
    /// with the first sum pinned to its exact value of zero.
    pub fn standardized(&self) -> Result<Vec<f64>> {
        if self.max_order() < 2 {
            return Err(Error::Range("standardization needs S[2]".into()));
        }
        let s2 = self.sums[2];
        if s2 <= 0.0 {
            return Err(Error::Degenerate("zero variance"));
        }
        let scale = s2.sqrt();
        let mut out = Vec::with_capacity(self.sums.len());
        out.push(self.n as f64);
        out.push(0.0);
        out.push(1.0);
        let mut denom = s2;
        for &s in &self.sums[3..] {
            denom *= scale;
            out.push(s / denom);
        }
        Ok(out)
    }
}

/// Two-pass centered power sums with compensated accumulation.
///
/// The input is accumulated in sorted order, so the result depends only on the
/// multiset of values, not on their arrangement.
pub fn central_moments(values: &[f64], max_order: usize) -> Result<CentralMoments> {
    if values.is_empty() {
        return Err(Error::TooSmall(0));
    }
    if max_order < 1 {
        return Err(Error::Range("max order must be at least 1".into()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i + 1 });
    }

    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;

    let mut mean = compensated_sum(sorted.iter().copied()) / nf;
    // second pass corrects the mean for rounding in the first
    mean += compensated_sum(sorted.iter().map(|v| v - mean)) / nf;

    let mut acc = vec![NeumaierSum::new(); max_order + 1];
    for &v in &sorted {
        let d = v - mean;
        let mut p = d;
        for a in acc.iter_mut().skip(1) {
            *a += p;
            p *= d;
        }
    }
    let mut sums: Vec<f64> = acc.iter().map(NeumaierSum::sum).collect();
    sums[0] = nf;

    Ok(CentralMoments { n, mean, sums })
}

/// Replace each coordinate by its rank in `1..=n`; tied values share the
/// average of the positions they occupy.
pub fn rank_transform(dataset: &Dataset) -> Dataset {
    Dataset {
        x: midranks(&dataset.x),
        y: midranks(&dataset.y),
    }
}

pub(crate) fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share the mean rank
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// True when neither coordinate contains repeated values.
pub fn is_tie_free(dataset: &Dataset) -> bool {
    fn distinct(v: &[f64]) -> bool {
        let mut s = v.to_vec();
        s.sort_unstable_by(f64::total_cmp);
        s.windows(2).all(|w| w[0] != w[1])
    }
    distinct(&dataset.x) && distinct(&dataset.y)
}

/// Pearson correlation of the identity pairing.
pub fn pearson_obs(dataset: &Dataset) -> Result<f64> {
    let n = dataset.n() as f64;
    let mx = compensated_sum(dataset.x.iter().copied()) / n;
    let my = compensated_sum(dataset.y.iter().copied()) / n;

    let mut sxy = NeumaierSum::new();
    let mut sxx = NeumaierSum::new();
    let mut syy = NeumaierSum::new();
    for (&a, &b) in dataset.x.iter().zip(&dataset.y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let (sxx, syy) = (sxx.sum(), syy.sum());
    if sxx <= 0.0 {
        return Err(Error::Degenerate("zero variance in x"));
    }
    if syy <= 0.0 {
        return Err(Error::Degenerate("zero variance in y"));
    }
    let rho = sxy.sum() / (sxx * syy).sqrt();
    debug_assert!(rho.abs() <= 1.0 + 1e-12);
    Ok(rho.clamp(-1.0, 1.0))
}

/// How a CSV input treats its first line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Header {
    Present,
    Absent,
    /// Skip the first line only when none of its fields is numeric.
    Detect,
}

impl From<bool> for Header {
    fn from(has_header: bool) -> Self {
        if has_header {
            Header::Present
        } else {
            Header::Absent
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, header: impl Into<Header>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, header)
}

/// Two comma-separated numeric columns `x,y`; LF or CRLF line endings.
pub fn read_csv<R: Read>(reader: R, header: impl Into<Header>) -> Result<Dataset> {
    let header = header.into();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if idx == 0 {
            let skip = match header {
                Header::Present => true,
                Header::Absent => false,
                Header::Detect => record.iter().all(|f| f.parse::<f64>().is_err()),
            };
            if skip {
                continue;
            }
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                row,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            let raw = &record[i];
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {} is not a number: {raw:?}", i + 1),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { row })
            }
        };
        x.push(field(0)?);
        y.push(field(1)?);
    }
    if x.len() < 2 {
        return Err(Error::TooSmall(x.len()));
    }
    Dataset::new(x, y)
}
