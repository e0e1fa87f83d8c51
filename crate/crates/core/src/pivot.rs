//! Entering-variable selection: Dantzig's most-negative-coefficient rule,
//! best improvement, and the p-norm rule (steepest edge at `p = 2`).
//!
//! The p-norm rule picks `argmin_k c̄_k / ‖(v_N)_k‖_p`, where `(v_N)_k` is
//! column `k` of `[−Ā ; I]`. Only integer `p ≥ 1` and `p = ∞` are supported,
//! which keeps every comparison rational: for improving columns the ratio is
//! compared through `|c̄_k|^p / ‖(v_N)_k‖_p^p` (exponent 1 for `∞`).

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::lp::Dictionary;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PivotError {
    #[error("column {k} out of range for a dictionary with {ell} nonbasic columns")]
    IndexOutOfRange { k: usize, ell: usize },
    #[error("norm order must be a positive integer or `inf`, got `{0}`")]
    InvalidP(String),
    #[error("unknown pivot rule `{0}` (expected dantzig, best, steepest, pnorm:<p> or pnorm:inf)")]
    UnknownRule(String),
}

/// The `p` of a p-norm: a positive integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormOrder {
    Finite(u32),
    Infinity,
}

impl NormOrder {
    pub const STEEPEST: NormOrder = NormOrder::Finite(2);

    pub fn finite(p: u32) -> Result<Self, PivotError> {
        if p == 0 {
            return Err(PivotError::InvalidP(p.to_string()));
        }
        Ok(NormOrder::Finite(p))
    }

    /// The power in which norms are compared: `p` when finite, 1 for `∞`.
    pub fn exponent(self) -> u32 {
        match self {
            NormOrder::Finite(p) => p,
            NormOrder::Infinity => 1,
        }
    }

    /// Raises a nonnegative rational to [`Self::exponent`].
    pub fn raise(self, value: &Rational) -> Rational {
        rational::pow(value, self.exponent())
    }

    /// `‖v‖^e` for a vector given by its entries.
    pub fn norm_power<'a>(self, entries: impl IntoIterator<Item = &'a Rational>) -> Rational {
        match self {
            NormOrder::Finite(p) => entries.into_iter().map(|v| rational::pow(&v.abs(), p)).sum(),
            NormOrder::Infinity => entries.into_iter().map(Signed::abs).max().unwrap_or_else(Rational::zero),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormOrder::Finite(p) => write!(f, "{p}"),
            NormOrder::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for NormOrder {
    type Err = PivotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "infinity" | "∞" => Ok(NormOrder::Infinity),
            _ => {
                let p: u32 = s.parse().map_err(|_| PivotError::InvalidP(s.to_string()))?;
                NormOrder::finite(p)
            }
        }
    }
}

impl Serialize for NormOrder {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NormOrder {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Int(p) => NormOrder::finite(p),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PivotRule {
    Dantzig,
    BestImprovement,
    PNorm(NormOrder),
}

impl PivotRule {
    pub const STEEPEST_EDGE: PivotRule = PivotRule::PNorm(NormOrder::STEEPEST);

    /// Norm used when recording edge lengths in traces: the rule's own order,
    /// or the Euclidean norm for rules that do not use one.
    pub fn trace_norm(self) -> NormOrder {
        match self {
            PivotRule::PNorm(order) => order,
            _ => NormOrder::STEEPEST,
        }
    }

    pub fn norm_order(self) -> Option<NormOrder> {
        match self {
            PivotRule::PNorm(order) => Some(order),
            _ => None,
        }
    }
}

impl fmt::Display for PivotRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PivotRule::Dantzig => f.write_str("dantzig"),
            PivotRule::BestImprovement => f.write_str("best"),
            PivotRule::PNorm(order) => write!(f, "pnorm:{order}"),
        }
    }
}

impl FromStr for PivotRule {
    type Err = PivotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dantzig" => Ok(PivotRule::Dantzig),
            "best" => Ok(PivotRule::BestImprovement),
            "steepest" => Ok(PivotRule::STEEPEST_EDGE),
            _ => match s.strip_prefix("pnorm:") {
                Some(p) => Ok(PivotRule::PNorm(p.parse()?)),
                None => Err(PivotError::UnknownRule(s.to_string())),
            },
        }
    }
}

impl Serialize for PivotRule {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PivotRule {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A column norm held as `‖(v_N)_k‖_p^e` where `e` is the order's exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnNorm {
    pub order: NormOrder,
    pub power: Rational,
}

impl ColumnNorm {
    /// The norm itself when it is known to be rational (`p = 1`, `p = ∞`).
    pub fn exact_value(&self) -> Option<Rational> {
        (self.order.exponent() == 1).then(|| self.power.clone())
    }
}

/// `‖(v_N)_k‖_p`, returned in exact powered form: `1 + Σᵢ|ā_ik|^p` for finite
/// `p`, `max(1, maxᵢ|ā_ik|)` for `∞`.
pub fn column_pnorm(dict: &Dictionary, k: usize, order: NormOrder) -> Result<ColumnNorm, PivotError> {
    if k >= dict.ell() {
        return Err(PivotError::IndexOutOfRange { k, ell: dict.ell() });
    }
    if order == NormOrder::Finite(0) {
        return Err(PivotError::InvalidP("0".into()));
    }
    Ok(ColumnNorm { order, power: column_norm_power(dict, k, order) })
}

pub(crate) fn column_norm_power(dict: &Dictionary, k: usize, order: NormOrder) -> Rational {
    let a = dict.a_bar();
    let one = Rational::one();
    let column = (0..dict.m()).map(|i| &a[(i, k)]);
    order.norm_power(std::iter::once(&one).chain(column))
}

/// Outcome of entering-variable selection; columns are positions in the
/// dictionary's nonbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// No negative reduced cost: the basis is optimal.
    Optimal,
    Enter(usize),
    /// Best improvement found an improving column with no blocking row.
    UnboundedRay(usize),
}

/// Picks the entering column. `step` is the ratio test for a column (`None`
/// when the ray is unbounded); only best improvement calls it. Ties go to
/// the smallest nonbasic variable index.
pub fn select_entering<F>(dict: &Dictionary, rule: PivotRule, step: F) -> Selection
where
    F: Fn(usize) -> Option<Rational>,
{
    let improving: Vec<usize> = (0..dict.ell()).filter(|&k| dict.c_bar()[k].is_negative()).collect();
    if improving.is_empty() {
        return Selection::Optimal;
    }
    match rule {
        PivotRule::Dantzig => Selection::Enter(argmax(&improving, |k| -dict.c_bar()[k].clone())),
        PivotRule::PNorm(order) => Selection::Enter(argmax(&improving, |k| pnorm_score(dict, k, order))),
        PivotRule::BestImprovement => {
            let mut best: Option<(usize, Rational)> = None;
            for &k in &improving {
                let Some(theta) = step(k) else {
                    return Selection::UnboundedRay(k);
                };
                let gain = -&dict.c_bar()[k] * theta;
                if best.as_ref().is_none_or(|(_, g)| gain > *g) {
                    best = Some((k, gain));
                }
            }
            Selection::Enter(best.expect("at least one improving column").0)
        }
    }
}

/// `(|c̄_k| / ‖(v_N)_k‖_p)^e`, monotone in the per-unit-length decrease.
pub(crate) fn pnorm_score(dict: &Dictionary, k: usize, order: NormOrder) -> Rational {
    order.raise(&dict.c_bar()[k].abs()) / column_norm_power(dict, k, order)
}

/// First position in `candidates` maximizing `score`. Candidates are in
/// ascending nonbasis order, so the first maximizer has the smallest
/// variable index.
fn argmax(candidates: &[usize], score: impl Fn(usize) -> Rational) -> usize {
    let mut best = candidates[0];
    let mut best_score = score(best);
    for &k in &candidates[1..] {
        let s = score(k);
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    best
}
