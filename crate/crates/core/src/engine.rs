//! Exact moments of Pearson's correlation over all permutations of one
//! coordinate.
//!
//! Expanding `rho^k` and summing over permutations groups the `k` index
//! positions into blocks that share a data point. Each block shape (a
//! partition of `k`) contributes
//!
//! ```text
//! C*(p) * X_p * Y_p * (n - m)! / n!
//! ```
//!
//! where `X_p`, `Y_p` are sums over pairwise-distinct index tuples of products
//! of centered powers, evaluated by inclusion-exclusion on the power sums
//! ([`DistinctSums`]), and `C*(p)` is
//! [`adjusted_multinomial`](crate::partition::adjusted_multinomial). Shapes with more
//! blocks than data points vanish.

use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;

use crate::data::{central_moments, rank_transform, CentralMoments, Dataset};
use crate::error::{Error, Result};
use crate::partition::{lattice, PartitionLattice, MAX_ORDER};
use crate::scalar::{rational, Scalar};

/// Sums over pairwise-distinct index tuples,
/// `X(n_1..n_m) = sum_{i_1..i_m distinct} prod_t z_{i_t}^{n_t}`,
/// for every exponent multiset up to the order of the supplied power sums.
///
/// `X` is symmetric in its exponents, so values are tabulated once per
/// partition by running the inclusion-exclusion recursion over the
/// [`PartitionLattice`]. The table belongs to one evaluation context.
pub struct DistinctSums<T> {
    lattice: Arc<PartitionLattice>,
    max_order: usize,
    values: Vec<T>,
}

impl<T: Scalar> DistinctSums<T> {
    /// `sums[j]` is `S[j]`; index 0 is unused.
    pub fn new(sums: &[T]) -> Result<Self> {
        let max_order = sums.len().saturating_sub(1);
        let lattice = lattice(max_order)?;
        let count = lattice.of_order(max_order).end;
        let mut values: Vec<T> = Vec::with_capacity(count);
        for step in &lattice.steps()[..count] {
            let head = sums[step.last as usize].clone();
            let value = match step.rest {
                None => head,
                Some(rest) => T::sum_terms(
                    std::iter::once(head * values[rest].clone()).chain(
                        step.merged
                            .iter()
                            .map(|&(i, mult)| -(T::from_count(mult as u128) * values[i].clone())),
                    ),
                ),
            };
            values.push(value);
        }
        Ok(Self {
            lattice,
            max_order,
            values,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `X` for the given exponents, in any order.
    pub fn get(&self, exponents: &[u32]) -> Result<T> {
        if exponents.is_empty() || exponents.contains(&0) {
            return Err(Error::Range("exponents must be positive".into()));
        }
        let order: u32 = exponents.iter().sum();
        if order as usize > self.max_order {
            return Err(Error::Range(format!(
                "order {order} exceeds available power sums ({})",
                self.max_order
            )));
        }
        let mut key = exponents.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        let idx = self
            .lattice
            .index_of(&key)
            .expect("lattice covers the order");
        Ok(self.values[idx].clone())
    }

    /// Number of tabulated partitions.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn at(&self, idx: usize) -> &T {
        &self.values[idx]
    }
}

/// `n (n-1) .. (n-m+1)`.
pub fn falling_factorial<T: Scalar>(n: usize, m: usize) -> T {
    (0..m).fold(T::one(), |acc, i| acc * T::from_count((n - i) as u128))
}

/// Evaluates `sum_{m <= n} sum_{|p| = m} C*(p) X_p Y_p / (n)_m` for each
/// order, from tabulated distinct sums of both coordinates.
pub struct InductiveEngine<T> {
    n: usize,
    x: DistinctSums<T>,
    y: DistinctSums<T>,
    /// `falling[m] = n (n-1) .. (n-m+1)`.
    falling: Vec<T>,
}

impl<T: Scalar> InductiveEngine<T> {
    pub fn new(n: usize, x_sums: &[T], y_sums: &[T]) -> Result<Self> {
        let x = DistinctSums::new(x_sums)?;
        let y = DistinctSums::new(y_sums)?;
        let top = x.max_order().min(y.max_order()).min(n);
        let mut falling = vec![T::one()];
        for m in 1..=top {
            let prev = falling[m - 1].clone();
            falling.push(prev * T::from_count((n - m + 1) as u128));
        }
        Ok(Self { n, x, y, falling })
    }

    pub fn max_order(&self) -> usize {
        self.x.max_order().min(self.y.max_order())
    }

    /// The permutation average of `(sum_i x_i y_{pi(i)})^k` for the supplied
    /// power sums. With power sums standardized to `S[2] = 1` this is
    /// `<rho^k>`.
    pub fn moment(&self, k: usize) -> Result<T> {
        if k > self.max_order() {
            return Err(Error::Range(format!(
                "order {k} exceeds available power sums ({})",
                self.max_order()
            )));
        }
        if k == 0 {
            return Ok(T::one());
        }
        let lattice = &self.x.lattice;
        let terms = lattice.of_order(k).filter_map(|idx| {
            let m = lattice.partition(idx).len();
            // h_{n,m}: no term needs more distinct points than exist
            (m <= self.n).then(|| {
                T::from_count(lattice.weight(idx)) * self.x.at(idx).clone() * self.y.at(idx).clone()
                    / self.falling[m].clone()
            })
        });
        Ok(T::sum_terms(terms))
    }
}

fn check_pair(sx: &CentralMoments, sy: &CentralMoments, k: usize) -> Result<()> {
    if sx.n() != sy.n() {
        return Err(Error::Range("x and y sample sizes differ".into()));
    }
    if k > sx.max_order().min(sy.max_order()) {
        return Err(Error::Range(format!(
            "order {k} exceeds the available power sums"
        )));
    }
    if sx.sum(2) <= 0.0 || sy.sum(2) <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    Ok(())
}

/// `<rho^k>` from the power sums via the distinct-tuple recursion.
pub fn exact_moment_inductive(sx: &CentralMoments, sy: &CentralMoments, k: usize) -> Result<f64> {
    if sx.max_order() < 2 || sy.max_order() < 2 {
        return Err(Error::Range("power sums up to order 2 are required".into()));
    }
    check_pair(sx, sy, k)?;
    let zx = sx.standardized()?;
    let zy = sy.standardized()?;
    InductiveEngine::new(sx.n(), &zx, &zy)?.moment(k)
}

/// Which closed-form expressions to use for `k <= 5`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedForm {
    /// The published expressions with the `k = 4`, two-block term's
    /// normalization restored (`n^3` rather than `n^5` in its bracket).
    #[default]
    Corrected,
    /// The published expressions exactly as printed.
    Verbatim,
}

/// `<rho^k>` for `1 <= k <= 5` from the closed forms in the data's central
/// moments `chi_j = <x^j>`, `nu_j = <y^j>`.
pub fn exact_moment_closed(sx: &CentralMoments, sy: &CentralMoments, k: usize) -> Result<f64> {
    closed_form_moment(sx, sy, k, ClosedForm::Corrected)
}

pub fn closed_form_moment(
    sx: &CentralMoments,
    sy: &CentralMoments,
    k: usize,
    form: ClosedForm,
) -> Result<f64> {
    if !(1..=5).contains(&k) {
        return Err(Error::Range(format!(
            "closed forms cover k = 1..5, got {k}"
        )));
    }
    if sx.max_order() < 2 || sy.max_order() < 2 {
        return Err(Error::Range("power sums up to order 2 are required".into()));
    }
    check_pair(sx, sy, k)?;

    let n = sx.n() as f64;
    let chi = |j: usize| sx.moment(j);
    let nu = |j: usize| sy.moment(j);
    let (sgx, sgy) = (sx.sigma(), sy.sigma());
    // h_{n,m}: terms needing more distinct points than exist drop out
    let gate = |m: usize, term: &dyn Fn() -> f64| {
        if m <= sx.n() {
            term()
        } else {
            0.0
        }
    };
    let n1 = n - 1.0;
    let n2 = n - 2.0;
    let n3 = n - 3.0;
    let n4 = n - 4.0;

    let value = match k {
        1 => 0.0,
        2 => 1.0 / n1,
        3 => {
            let mu33 = chi(3) * nu(3);
            let bracket = gate(1, &|| 1.0 / (n * n))
                + gate(2, &|| 3.0 / (n * n * n1))
                + gate(3, &|| 4.0 / (n * n * n1 * n2));
            mu33 / (sgx.powi(3) * sgy.powi(3)) * bracket
        }
        4 => {
            let (x4, y4) = (chi(4), nu(4));
            let (vx, vy) = (sgx.powi(4), sgy.powi(4));
            let pair = match form {
                ClosedForm::Verbatim => (n * n * vx - n * x4) * (n * n * vy - n * y4),
                ClosedForm::Corrected => (n * vx - x4) * (n * vy - y4),
            };
            let triple = (2.0 * n * x4 - n * n * vx) * (2.0 * n * y4 - n * n * vy);
            let bracket = gate(1, &|| x4 * y4 / n.powi(3))
                + gate(2, &|| (4.0 * x4 * y4 + 3.0 * pair) / (n.powi(3) * n1))
                + gate(3, &|| 6.0 * triple / (n.powi(5) * n1 * n2))
                + gate(4, &|| 9.0 * triple / (n.powi(5) * n1 * n2 * n3));
            bracket / (vx * vy)
        }
        5 => {
            let (x5, y5) = (chi(5), nu(5));
            let (x32, y32) = (chi(3) * chi(2), nu(3) * nu(2));
            let mu55 = x5 * y5;
            let n6 = n.powi(6);
            let bracket = gate(1, &|| mu55 / n.powi(4))
                + gate(2, &|| 5.0 * mu55 / (n.powi(4) * n1))
                + gate(2, &|| {
                    10.0 * (n * n * x32 - n * x5) * (n * n * y32 - n * y5) / (n6 * n1)
                })
                + gate(3, &|| {
                    10.0 * (2.0 * n * x5 - n * n * x32) * (2.0 * n * y5 - n * n * y32)
                        / (n6 * n1 * n2)
                })
                + gate(3, &|| {
                    60.0 * (n * x5 - n * n * x32) * (n * y5 - n * n * y32) / (n6 * n1 * n2)
                })
                + gate(4, &|| {
                    10.0 * (6.0 * n * x5 - 5.0 * n * n * x32) * (6.0 * n * y5 - 5.0 * n * n * y32)
                        / (n6 * n1 * n2 * n3)
                })
                + gate(5, &|| {
                    16.0 * (6.0 * n * x5 - 5.0 * n * n * x32) * (6.0 * n * y5 - 5.0 * n * n * y32)
                        / (n6 * n1 * n2 * n3 * n4)
                });
            bracket / (sgx.powi(5) * sgy.powi(5))
        }
        _ => unreachable!(),
    };
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pearson,
    Spearman,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Inductive,
    OracleExact,
    OracleMc,
}

/// `values[k] = <rho^k>` for `k = 0..=max_order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentVector {
    pub n: usize,
    pub mode: Mode,
    pub values: Vec<f64>,
    /// How each `values[k]` was obtained.
    pub methods: Vec<Method>,
}

impl MomentVector {
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }
}

/// How [`moment_vector_with`] fills orders up to five.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Closed forms for `k <= 5`, the recursion above.
    #[default]
    ClosedThenInductive,
    InductiveOnly,
}

/// Exact permutation moments of Pearson's correlation (or Spearman's, which
/// ranks both coordinates first).
pub fn moment_vector(dataset: &Dataset, max_order: usize, mode: Mode) -> Result<MomentVector> {
    moment_vector_with(dataset, max_order, mode, Strategy::default())
}

pub fn moment_vector_with(
    dataset: &Dataset,
    max_order: usize,
    mode: Mode,
    strategy: Strategy,
) -> Result<MomentVector> {
    if max_order < 1 {
        return Err(Error::Range("max order must be at least 1".into()));
    }
    if max_order > MAX_ORDER {
        return Err(Error::Range(format!(
            "max order {max_order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let ranked;
    let data = match mode {
        Mode::Pearson => dataset,
        Mode::Spearman => {
            ranked = rank_transform(dataset);
            &ranked
        }
    };
    let order = max_order.max(2);
    let sx = central_moments(data.x(), order)?;
    let sy = central_moments(data.y(), order)?;
    if sx.sum(2) <= 0.0 || sy.sum(2) <= 0.0 {
        return Err(Error::Degenerate("zero variance"));
    }
    let zx = sx.standardized()?;
    let zy = sy.standardized()?;
    let engine = InductiveEngine::new(data.n(), &zx, &zy)?;

    let mut values = vec![1.0];
    let mut methods = vec![Method::ClosedForm];
    for k in 1..=max_order {
        if k <= 5 && strategy == Strategy::ClosedThenInductive {
            values.push(exact_moment_closed(&sx, &sy, k)?);
            methods.push(Method::ClosedForm);
        } else {
            values.push(engine.moment(k)?);
            methods.push(Method::Inductive);
        }
    }
    Ok(MomentVector {
        n: data.n(),
        mode,
        values,
        methods,
    })
}

/// Exact rational permutation averages of `(sum_i xc_i yc_{pi(i)})^k` for
/// `k = 0..=max_order`, where `xc`, `yc` are the exactly centered data.
///
/// Equals `<rho^k> * (S_x[2] S_y[2])^(k/2)` with no rounding anywhere.
pub fn raw_moments_rational(dataset: &Dataset, max_order: usize) -> Result<Vec<BigRational>> {
    if max_order > MAX_ORDER {
        return Err(Error::Range(format!(
            "max order {max_order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let sx = rational_power_sums(dataset.x(), max_order);
    let sy = rational_power_sums(dataset.y(), max_order);
    let engine = InductiveEngine::new(dataset.n(), &sx, &sy)?;
    (0..=max_order).map(|k| engine.moment(k)).collect()
}

/// Exact centered power sums `S[0..=max_order]` of `values`.
pub fn rational_power_sums(values: &[f64], max_order: usize) -> Vec<BigRational> {
    let vals: Vec<BigRational> = values.iter().map(|&v| rational(v)).collect();
    let n = BigRational::from_count(vals.len() as u128);
    let mean = BigRational::sum_terms(vals.iter().cloned()) / n.clone();
    let centered: Vec<BigRational> = vals.into_iter().map(|v| v - mean.clone()).collect();
    let mut sums = vec![n];
    let mut powers = centered.clone();
    for _ in 1..=max_order {
        sums.push(BigRational::sum_terms(powers.iter().cloned()));
        for (p, c) in powers.iter_mut().zip(&centered) {
            *p = p.clone() * c.clone();
        }
    }
    sums
}
