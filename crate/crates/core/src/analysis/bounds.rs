use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::{AnalysisError, BfsCatalog, QReport};
use crate::certified::{self, Interval};
use crate::pivot::NormOrder;
use crate::rational::{self, Rational};

/// The quantities every bound is computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundInputs {
    pub m: usize,
    pub n: usize,
    #[serde(with = "rational::as_string")]
    pub gamma: Rational,
    #[serde(with = "rational::as_string")]
    pub delta: Rational,
    /// Exact text form of `q`, absent for the Dantzig-rule bounds.
    pub q: Option<String>,
    pub p: Option<NormOrder>,
    /// `cᵀx⁰ − z*`
    #[serde(with = "rational::as_string")]
    pub gap0: Rational,
    /// `z_second − z*`
    #[serde(with = "rational::as_string")]
    pub gap_second: Rational,
}

impl BoundInputs {
    fn spread(&self) -> Rational {
        rational::int(self.m as i64) * &self.gamma / &self.delta
    }

    fn gap_ratio(&self) -> Rational {
        &self.gap0 / &self.gap_second
    }
}

/// Bounds for the most-negative-coefficient and best-improvement rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KmBounds {
    pub km1: u64,
    pub km2: u64,
    pub km3: u64,
    pub inputs: BoundInputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Thm3,
    Thm4,
    Thm5,
    Thm6,
    Km1,
    Km2,
    Km3,
}

impl BoundKind {
    pub const PNORM: [BoundKind; 4] = [BoundKind::Thm3, BoundKind::Thm4, BoundKind::Thm5, BoundKind::Thm6];
    pub const DANTZIG: [BoundKind; 2] = [BoundKind::Km1, BoundKind::Km2];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Thm3 => "thm3",
            BoundKind::Thm4 => "thm4",
            BoundKind::Thm5 => "thm5",
            BoundKind::Thm6 => "thm6",
            BoundKind::Km1 => "km1",
            BoundKind::Km2 => "km2",
            BoundKind::Km3 => "km3",
        }
    }

    fn uses_gap_ratio(self) -> bool {
        matches!(self, BoundKind::Thm3 | BoundKind::Thm5 | BoundKind::Km1)
    }

    fn uses_spread(self) -> bool {
        matches!(self, BoundKind::Thm4 | BoundKind::Thm6 | BoundKind::Km2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub thm3: u64,
    pub thm4: u64,
    pub thm5: u64,
    pub thm6: u64,
    pub km1: u64,
    pub km2: u64,
    pub km3: u64,
    pub dmdp_thm7: Option<u64>,
    pub inputs: BoundInputs,
}

impl BoundReport {
    pub fn value(&self, kind: BoundKind) -> u64 {
        match kind {
            BoundKind::Thm3 => self.thm3,
            BoundKind::Thm4 => self.thm4,
            BoundKind::Thm5 => self.thm5,
            BoundKind::Thm6 => self.thm6,
            BoundKind::Km1 => self.km1,
            BoundKind::Km2 => self.km2,
            BoundKind::Km3 => self.km3,
        }
    }

    /// Iteration limit the bound actually certifies.
    ///
    /// The formulas are ceilings of `T` with `(1 − 1/x)^T · y < 1`; when the
    /// logarithm vanishes (`gap0 = gap_second`, or `mγ/δ = 1`) the ceiling is
    /// 0, yet one iteration (one per nonbasic variable for the variable-removal
    /// bounds) is still needed and allowed.
    pub fn limit(&self, kind: BoundKind) -> u64 {
        effective_limit(kind, self.value(kind), &self.inputs)
    }
}

impl KmBounds {
    pub fn value(&self, kind: BoundKind) -> Option<u64> {
        match kind {
            BoundKind::Km1 => Some(self.km1),
            BoundKind::Km2 => Some(self.km2),
            BoundKind::Km3 => Some(self.km3),
            _ => None,
        }
    }

    pub fn limit(&self, kind: BoundKind) -> Option<u64> {
        self.value(kind).map(|v| effective_limit(kind, v, &self.inputs))
    }
}

fn effective_limit(kind: BoundKind, value: u64, inputs: &BoundInputs) -> u64 {
    if kind.uses_gap_ratio() && inputs.gap_ratio().is_one() {
        value.max(1)
    } else if kind.uses_spread() && inputs.spread().is_one() {
        value.max((inputs.n - inputs.m) as u64)
    } else {
        value
    }
}

fn ceil_u64(eval: impl Fn(u32) -> Interval) -> Result<u64, AnalysisError> {
    certified::certified_ceil(eval)?.to_u64().ok_or(AnalysisError::Overflow)
}

fn times(factor: u64, value: u64) -> Result<u64, AnalysisError> {
    factor.checked_mul(value).ok_or(AnalysisError::Overflow)
}

fn inputs(catalog: &BfsCatalog, x0_objective: &Rational) -> Result<BoundInputs, AnalysisError> {
    let (Some(gamma), Some(delta), true) = (&catalog.gamma, &catalog.delta, catalog.nondegenerate) else {
        return Err(AnalysisError::DegenerateInstance);
    };
    if *x0_objective <= catalog.z_star {
        return Err(AnalysisError::InitialOptimal(rational::format(x0_objective)));
    }
    let z_second = catalog.z_second.as_ref().ok_or(AnalysisError::MissingSecondBest)?;
    Ok(BoundInputs {
        m: catalog.m,
        n: catalog.n,
        gamma: gamma.clone(),
        delta: delta.clone(),
        q: None,
        p: None,
        gap0: x0_objective - &catalog.z_star,
        gap_second: z_second - &catalog.z_star,
    })
}

/// `km1`, `km2` and `km3` from the catalog constants and the initial
/// objective value.
pub fn evaluate_km_bounds(catalog: &BfsCatalog, x0_objective: &Rational) -> Result<KmBounds, AnalysisError> {
    let inputs = inputs(catalog, x0_objective)?;
    let ell = (inputs.n - inputs.m) as u64;
    let spread = inputs.spread();
    let gap_ratio = inputs.gap_ratio();
    let km1 = ceil_u64(|p| certified::ln(&gap_ratio, p).scale(&spread))?;
    let km2 = times(ell, ceil_u64(|p| certified::ln(&spread, p).scale(&spread))?)?;
    let (Some(g_d), Some(d_d)) = (&catalog.gamma_d_prime, &catalog.delta_d_prime) else {
        return Err(AnalysisError::NoImprovingNonbasis);
    };
    let km3_value = rational::int(inputs.m.min(inputs.n - inputs.m) as i64) * &inputs.gamma * g_d / (&inputs.delta * d_d);
    let km3 = rational::ceil_to_bigint(&km3_value).to_u64().ok_or(AnalysisError::Overflow)?;
    Ok(KmBounds { km1, km2, km3, inputs })
}

/// All bounds for the p-norm rule at `order`, plus the Dantzig-rule ones.
pub fn evaluate_bounds(
    catalog: &BfsCatalog,
    qrep: &QReport,
    order: NormOrder,
    x0_objective: &Rational,
) -> Result<BoundReport, AnalysisError> {
    if qrep.order != order {
        return Err(AnalysisError::UndefinedQ { wanted: order.to_string(), found: qrep.order.to_string() });
    }
    let km = evaluate_km_bounds(catalog, x0_objective)?;
    let mut inputs = km.inputs.clone();
    inputs.q = Some(qrep.q_display());
    inputs.p = Some(order);
    let ell = (inputs.n - inputs.m) as u64;
    let m = rational::int(inputs.m as i64);
    let spread = inputs.spread();
    let gap_ratio = inputs.gap_ratio();
    let inv_q = qrep.q_pow.recip();
    let e = order.exponent();

    // mγ/(qδ)
    let factor34 = |prec| certified::root(&inv_q, e, prec).scale(&spread);
    // m^{1+1/p}·γ²/δ²
    let ratio_sq = rational::pow(&(&inputs.gamma / &inputs.delta), 2);
    let factor56 = |prec| match order {
        NormOrder::Finite(p) => certified::root(&m, p, prec).scale(&(&m * &ratio_sq)),
        NormOrder::Infinity => Interval::point(&m * &ratio_sq),
    };
    let thm3 = ceil_u64(|p| factor34(p).mul(&certified::ln(&gap_ratio, p)))?;
    let thm4 = times(ell, ceil_u64(|p| factor34(p).mul(&certified::ln(&spread, p)))?)?;
    let thm5 = ceil_u64(|p| factor56(p).mul(&certified::ln(&gap_ratio, p)))?;
    let thm6 = times(ell, ceil_u64(|p| factor56(p).mul(&certified::ln(&spread, p)))?)?;
    Ok(BoundReport { thm3, thm4, thm5, thm6, km1: km.km1, km2: km.km2, km3: km.km3, dmdp_thm7: None, inputs })
}
