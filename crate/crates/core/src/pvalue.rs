use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

/// Comparison slack used when counting permutations at least as extreme as the
/// observed statistic.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    #[default]
    Two,
    Right,
    Left,
}

impl Tail {
    /// Inclusive "at least as extreme" test with [`TIE_EPSILON`] slack.
    #[inline]
    pub fn is_extreme(self, rho: f64, observed: f64) -> bool {
        match self {
            Tail::Two => rho.abs() >= observed.abs() - TIE_EPSILON,
            Tail::Right => rho >= observed - TIE_EPSILON,
            Tail::Left => rho <= observed + TIE_EPSILON,
        }
    }
}

impl FromStr for Tail {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two" => Ok(Tail::Two),
            "right" => Ok(Tail::Right),
            "left" => Ok(Tail::Left),
            _ => Err(format!("unknown tail {s:?} (expected two, right or left)")),
        }
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::Two => "two",
            Tail::Right => "right",
            Tail::Left => "left",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PvalueMethod {
    Exact,
    Mc,
    Hausdorff,
    Legendre,
}

impl fmt::Display for PvalueMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PvalueMethod::Exact => "exact",
            PvalueMethod::Mc => "mc",
            PvalueMethod::Hausdorff => "hausdorff",
            PvalueMethod::Legendre => "legendre",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PvalueEstimate {
    pub rho_obs: f64,
    pub p: f64,
    pub method: PvalueMethod,
    pub tail: Tail,
    /// Moment order used by the moment-based estimators.
    pub order: Option<usize>,
    pub diagnostics: BTreeMap<&'static str, f64>,
}
