//! Reproducible instance families: Klee–Minty cubes, random nondegenerate
//! LPs with a known feasible start, and discounted Markov decision problems.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{enumerate_bfs, AnalysisError, DEFAULT_ENUMERATION_BUDGET};
use crate::certified::{self, CertifyError, Interval};
use crate::engine::{default_max_iters, solve, Outcome};
use crate::linalg::Matrix;
use crate::lp::{Basis, LpError, StandardFormLp};
use crate::pivot::{NormOrder, PivotRule};
use crate::rational::{self, Rational};

/// Largest Klee–Minty dimension [`klee_minty`] accepts.
pub const MAX_KLEE_MINTY_DIMENSION: usize = 24;

/// Attempts [`random_lp`] makes before giving up.
pub const RESAMPLE_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("value range must be at least 1, got {0}")]
    InvalidRange(i64),
    #[error("discount factor must satisfy 0 <= theta < 1, got {0}")]
    InvalidTheta(String),
    #[error("no acceptable instance after {0} attempts")]
    ResampleLimitExceeded(usize),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("bound value does not fit in 64 bits")]
    Overflow,
}

/// An instance together with the feasible basis it is meant to start from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedLp {
    pub lp: StandardFormLp,
    pub initial_basis: Basis,
}

/// The `m`-dimensional Klee–Minty cube
///
/// ```text
/// max Σ_j 2^{m−j} x_j   s.t.   2·Σ_{j<i} 2^{i−j} x_j + x_i ≤ 5^i,  x ≥ 0
/// ```
///
/// as `min −Σ_j 2^{m−j} x_j` with one slack per row, starting at the all-slack
/// basis (the origin).
pub fn klee_minty(m: usize) -> Result<GeneratedLp, GenError> {
    if !(2..=MAX_KLEE_MINTY_DIMENSION).contains(&m) {
        return Err(GenError::InvalidDimension(format!("Klee-Minty needs 2 <= m <= {MAX_KLEE_MINTY_DIMENSION}, got {m}")));
    }
    let two = rational::int(2);
    let n = 2 * m;
    let mut rows = vec![vec![Rational::zero(); n]; m];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate().take(i) {
            *entry = rational::pow(&two, (i - j + 1) as u32);
        }
        row[i] = Rational::one();
        row[m + i] = Rational::one();
    }
    let b = (1..=m).map(|i| rational::pow(&rational::int(5), i as u32)).collect();
    let mut c: Vec<Rational> = (0..m).map(|j| -rational::pow(&two, (m - 1 - j) as u32)).collect();
    c.resize(n, Rational::zero());
    let lp = StandardFormLp::new(format!("kleeminty-{m}"), rows, b, c)?;
    let initial_basis = Basis::new(&lp, m..n)?;
    Ok(GeneratedLp { lp, initial_basis })
}

/// A random standard-form LP with integer data in `[−range, range]`.
///
/// A basis `B` is fixed first (a random `m`-subset of columns) together with
/// basic values in `1..=range`, and `b = A_B x_B`, so `B` is feasible by
/// construction. Draws are rejected until `A` has full row rank, `A_B` is
/// nonsingular, every BFS is nondegenerate, the simplex method from `B`
/// ends optimal, and `B` itself is not optimal.
pub fn random_lp(m: usize, n: usize, seed: u64, range: i64) -> Result<GeneratedLp, GenError> {
    if m == 0 || n <= m {
        return Err(GenError::InvalidDimension(format!("need n > m >= 1, got m = {m}, n = {n}")));
    }
    if range < 1 {
        return Err(GenError::InvalidRange(range));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("random-m{m}-n{n}-s{seed}");
    for _ in 0..RESAMPLE_LIMIT {
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-range..=range)).collect()).collect();
        let mut columns: Vec<usize> = (0..n).collect();
        columns.shuffle(&mut rng);
        let mut chosen = columns[..m].to_vec();
        chosen.sort_unstable();
        let x_b: Vec<i64> = (0..m).map(|_| rng.random_range(1..=range)).collect();
        let c: Vec<i64> = (0..n).map(|_| rng.random_range(-range..=range)).collect();
        let b = rows.iter().map(|row| chosen.iter().zip(&x_b).map(|(&j, &x)| row[j] * x).sum::<i64>());

        let to_rational = |v: &[i64]| v.iter().map(|&x| rational::int(x)).collect::<Vec<_>>();
        let Ok(lp) = StandardFormLp::new(
            name.clone(),
            rows.iter().map(|r| to_rational(r)).collect(),
            b.map(rational::int).collect(),
            to_rational(&c),
        ) else {
            continue;
        };
        let Ok(basis) = Basis::new(&lp, chosen) else { continue };
        if !enumerate_bfs(&lp, DEFAULT_ENUMERATION_BUDGET)?.nondegenerate {
            continue;
        }
        let trace = solve(&lp, &basis, PivotRule::Dantzig, default_max_iters(&lp)).map_err(AnalysisError::from)?;
        if matches!(trace.outcome, Outcome::Optimal { .. }) && trace.iterations() > 0 {
            return Ok(GeneratedLp { lp, initial_basis: basis });
        }
    }
    Err(GenError::ResampleLimitExceeded(RESAMPLE_LIMIT))
}

/// A discounted MDP with `m` states and `k` actions per state, and its LP
/// `min cᵀx  s.t.  (E − θP)x = e,  x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmdpInstance {
    pub m: usize,
    pub k: usize,
    pub theta: Rational,
    /// Column `j` is the next-state distribution of action `j`.
    pub p: Matrix,
    /// `E[i][j] = 1` iff action `j` belongs to state `i`.
    pub e: Matrix,
    pub costs: Vec<Rational>,
    pub lp: StandardFormLp,
    /// First action of every state.
    pub initial_basis: Basis,
}

impl DmdpInstance {
    pub fn n(&self) -> usize {
        self.m * self.k
    }

    /// `m/(1−θ)`, the upper end of the range every basic value lies in.
    pub fn basic_value_ceiling(&self) -> Rational {
        rational::int(self.m as i64) / (Rational::one() - &self.theta)
    }

    pub fn generated(&self) -> GeneratedLp {
        GeneratedLp { lp: self.lp.clone(), initial_basis: self.initial_basis.clone() }
    }
}

fn check_theta(theta: &Rational) -> Result<(), GenError> {
    if theta.is_negative() || *theta >= Rational::one() {
        return Err(GenError::InvalidTheta(rational::format(theta)));
    }
    Ok(())
}

/// Draws a DMDP: transition columns are normalized random integers in
/// `1..=9`, costs are integers in `1..=20`. Action `j` belongs to state
/// `j / k`. Needs `k ≥ 2` so that the LP has more variables than rows.
pub fn dmdp_generate(m: usize, k: usize, theta: &Rational, seed: u64) -> Result<DmdpInstance, GenError> {
    check_theta(theta)?;
    if m == 0 || k < 2 {
        return Err(GenError::InvalidDimension(format!("need m >= 1 and k >= 2, got m = {m}, k = {k}")));
    }
    let n = m * k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Matrix::zeros(m, n);
    let mut e = Matrix::zeros(m, n);
    for j in 0..n {
        let weights: Vec<i64> = (0..m).map(|_| rng.random_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        for (i, w) in weights.into_iter().enumerate() {
            p[(i, j)] = rational::frac(w, total);
        }
        e[(j / k, j)] = Rational::one();
    }
    let costs: Vec<Rational> = (0..n).map(|_| rational::int(rng.random_range(1..=20))).collect();
    let rows = (0..m).map(|i| (0..n).map(|j| &e[(i, j)] - theta * &p[(i, j)]).collect()).collect();
    let name = format!("dmdp-m{m}-k{k}-t{}-s{seed}", rational::format(theta).replace('/', "_"));
    let lp = StandardFormLp::new(name, rows, vec![Rational::one(); m], costs.clone())?;
    let initial_basis = Basis::new(&lp, (0..m).map(|i| i * k))?;
    Ok(DmdpInstance { m, k, theta: theta.clone(), p, e, costs, lp, initial_basis })
}

/// `(n − m)·⌈m^{3+1/p}/(1−θ)² · ln(m²/(1−θ))⌉`, with `m^{1/p} = 1` for `∞`.
pub fn dmdp_bound(m: usize, n: usize, theta: &Rational, order: NormOrder) -> Result<u64, GenError> {
    check_theta(theta)?;
    if m == 0 || n <= m {
        return Err(GenError::InvalidDimension(format!("need n > m >= 1, got m = {m}, n = {n}")));
    }
    let mr = rational::int(m as i64);
    let slack = Rational::one() - theta;
    let scale = rational::pow(&mr, 3) / rational::pow(&slack, 2);
    let log_arg = &mr * &mr / &slack;
    let ceiling = certified::certified_ceil(|prec| {
        let root = match order {
            NormOrder::Finite(p) => certified::root(&mr, p, prec),
            NormOrder::Infinity => Interval::point(Rational::one()),
        };
        root.scale(&scale).mul(&certified::ln(&log_arg, prec))
    })?;
    let per_variable = ceiling.to_u64().ok_or(GenError::Overflow)?;
    ((n - m) as u64).checked_mul(per_variable).ok_or(GenError::Overflow)
}

/// Iteration limit certified by [`dmdp_bound`]: at least one iteration per
/// nonbasic variable even when the logarithm vanishes (`m = 1`, `θ = 0`).
pub fn dmdp_limit(m: usize, n: usize, theta: &Rational, order: NormOrder) -> Result<u64, GenError> {
    let bound = dmdp_bound(m, n, theta, order)?;
    let log_arg = rational::int((m * m) as i64) / (Rational::one() - theta);
    Ok(if log_arg.is_one() { bound.max((n - m) as u64) } else { bound })
}
