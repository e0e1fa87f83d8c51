//! Standard-form linear programs and the per-basis algebra everything else
//! reads: dictionaries, basic solutions and dual solutions.
//!
//! The problem is `minimize cᵀx subject to Ax = b, x ≥ 0` with `A` of full
//! row rank `m < n`. Variable indices are 0-based in the API; serialized
//! forms use 1-based indices.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("constraint matrix has rank {rank} < m = {m}")]
    RankDeficient { rank: usize, m: usize },
    #[error("need n > m >= 1, got m = {m}, n = {n}")]
    DegenerateShape { m: usize, n: usize },
    #[error("basis columns {0:?} are linearly dependent")]
    SingularBasis(Vec<usize>),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
}

/// `minimize cᵀx s.t. Ax = b, x ≥ 0`, validated to have `n > m ≥ 1` and
/// `rank(A) = m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardFormLp {
    name: String,
    a: Matrix,
    b: Vec<Rational>,
    c: Vec<Rational>,
}

impl StandardFormLp {
    /// Validates and builds the problem. The rank is computed by exact
    /// elimination.
    pub fn new(
        name: impl Into<String>,
        a_rows: Vec<Vec<Rational>>,
        b: Vec<Rational>,
        c: Vec<Rational>,
    ) -> Result<Self, LpError> {
        let m = a_rows.len();
        let a = Matrix::from_rows(a_rows)
            .ok_or_else(|| LpError::DimensionMismatch("rows of A have different lengths".into()))?;
        let n = a.cols();
        if b.len() != m {
            return Err(LpError::DimensionMismatch(format!("A has {m} rows but b has length {}", b.len())));
        }
        if c.len() != n {
            return Err(LpError::DimensionMismatch(format!("A has {n} columns but c has length {}", c.len())));
        }
        if m == 0 {
            return Err(LpError::DegenerateShape { m, n });
        }
        let rank = linalg::rank(&a);
        if rank < m {
            return Err(LpError::RankDeficient { rank, m });
        }
        if n <= m {
            return Err(LpError::DegenerateShape { m, n });
        }
        Ok(Self { name: name.into(), a, b, c })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Number of nonbasic variables, `n - m`.
    pub fn ell(&self) -> usize {
        self.n() - self.m()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    pub fn objective(&self, x: &[Rational]) -> Rational {
        linalg::dot(&self.c, x)
    }
}

/// Re-runs the checks of [`StandardFormLp::new`] on raw data.
pub fn validate(
    name: &str,
    a_rows: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    c: Vec<Rational>,
) -> Result<StandardFormLp, LpError> {
    StandardFormLp::new(name, a_rows, b, c)
}

/// A set of `m` distinct variable indices, kept in ascending order so that
/// dictionary rows are ordered by basic variable index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Basis(Vec<usize>);

impl Basis {
    /// Checks size, range and distinctness against `lp`, and that the columns
    /// are nonsingular.
    pub fn new(lp: &StandardFormLp, indices: impl IntoIterator<Item = usize>) -> Result<Self, LpError> {
        let basis = Self::from_indices(indices, lp.m(), lp.n())?;
        if linalg::rank(&lp.a().select_columns(&basis.0)) < lp.m() {
            return Err(LpError::SingularBasis(basis.0));
        }
        Ok(basis)
    }

    /// Structural checks only (size, range, distinctness); singularity is
    /// discovered later by [`dictionary`].
    pub fn from_indices(indices: impl IntoIterator<Item = usize>, m: usize, n: usize) -> Result<Self, LpError> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if v.len() != m {
            return Err(LpError::InvalidBasis(format!("expected {m} indices, got {}", v.len())));
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(LpError::InvalidBasis(format!("repeated index in {v:?}")));
        }
        if let Some(&bad) = v.iter().find(|&&j| j >= n) {
            return Err(LpError::InvalidBasis(format!("index {bad} out of range for n = {n}")));
        }
        Ok(Self(v))
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// Complement in `0..n`, ascending.
    pub fn nonbasis(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|j| !self.contains(*j)).collect()
    }

    /// The basis after `entering` replaces `leaving`.
    pub fn exchange(&self, leaving: usize, entering: usize) -> Basis {
        let mut v: Vec<usize> = self.0.iter().copied().filter(|&j| j != leaving).collect();
        v.push(entering);
        v.sort_unstable();
        Basis(v)
    }

    /// 1-based indices, as written in files and on the command line.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|j| j + 1).collect()
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for Basis {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Basis {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(de)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("basis indices are 1-based"));
        }
        let mut v: Vec<usize> = raw.into_iter().map(|j| j - 1).collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(serde::de::Error::custom("repeated basis index"));
        }
        Ok(Basis(v))
    }
}

/// Serde adapter writing a 0-based variable index as 1-based.
pub mod one_based {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(j: &usize, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_u64(*j as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<usize, D::Error> {
        let j = usize::deserialize(de)?;
        j.checked_sub(1).ok_or_else(|| serde::de::Error::custom("variable indices are 1-based"))
    }
}

/// The problem rewritten for one basis:
/// `minimize z0 + c̄ᵀx_N s.t. x_B = b̄ − Ā x_N`.
///
/// Row `i` corresponds to `basis.indices()[i]`; column `k` to `nonbasis[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    basis: Basis,
    nonbasis: Vec<usize>,
    b_bar: Vec<Rational>,
    c_bar: Vec<Rational>,
    a_bar: Matrix,
    z0: Rational,
}

impl Dictionary {
    /// Assembles a dictionary from raw parts without an underlying problem.
    /// Useful for exercising pivot rules on hand-written tableaux; only
    /// shapes are checked.
    pub fn from_parts(
        basis: Basis,
        nonbasis: Vec<usize>,
        b_bar: Vec<Rational>,
        c_bar: Vec<Rational>,
        a_bar: Matrix,
        z0: Rational,
    ) -> Result<Self, LpError> {
        let m = basis.len();
        let ell = nonbasis.len();
        if b_bar.len() != m || c_bar.len() != ell || a_bar.rows() != m || a_bar.cols() != ell {
            return Err(LpError::DimensionMismatch(format!(
                "dictionary parts: m = {m}, ell = {ell}, b_bar {}, c_bar {}, a_bar {}x{}",
                b_bar.len(),
                c_bar.len(),
                a_bar.rows(),
                a_bar.cols()
            )));
        }
        Ok(Self { basis, nonbasis, b_bar, c_bar, a_bar, z0 })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn nonbasis(&self) -> &[usize] {
        &self.nonbasis
    }

    pub fn b_bar(&self) -> &[Rational] {
        &self.b_bar
    }

    pub fn c_bar(&self) -> &[Rational] {
        &self.c_bar
    }

    pub fn a_bar(&self) -> &Matrix {
        &self.a_bar
    }

    pub fn z0(&self) -> &Rational {
        &self.z0
    }

    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn ell(&self) -> usize {
        self.nonbasis.len()
    }

    pub fn is_feasible(&self) -> bool {
        self.b_bar.iter().all(|v| !v.is_negative())
    }

    pub fn is_optimal(&self) -> bool {
        self.c_bar.iter().all(|v| !v.is_negative())
    }

    /// Smallest reduced cost and the first column attaining it.
    pub fn min_reduced_cost(&self) -> Option<(usize, &Rational)> {
        let mut best: Option<(usize, &Rational)> = None;
        for (k, v) in self.c_bar.iter().enumerate() {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k, v));
            }
        }
        best
    }

    /// Column `k` of `V_N = [−Ā ; I]`, laid out over all `n` variables: the
    /// basic entries get `−ā_ik`, the entering variable gets 1.
    pub fn edge_direction(&self, k: usize) -> Vec<(usize, Rational)> {
        let mut out: Vec<(usize, Rational)> = self
            .basis
            .indices()
            .iter()
            .enumerate()
            .map(|(i, &j)| (j, -self.a_bar[(i, k)].clone()))
            .collect();
        out.push((self.nonbasis[k], Rational::from_integer(1.into())));
        out.sort_by_key(|(j, _)| *j);
        out
    }
}

/// Computes `b̄ = A_B⁻¹b`, `Ā = A_B⁻¹A_N`, `c̄ = c_N − A_Nᵀ(A_Bᵀ)⁻¹c_B` and
/// `z0 = c_Bᵀb̄` from scratch.
pub fn dictionary(lp: &StandardFormLp, basis: &Basis) -> Result<Dictionary, LpError> {
    check_dims(lp, basis)?;
    let n = lp.n();
    let nonbasis = basis.nonbasis(n);
    let a_b = lp.a().select_columns(basis.indices());
    let a_n = lp.a().select_columns(&nonbasis);
    let rhs = a_n.hstack(&Matrix::column_matrix(lp.b()));
    let x = linalg::solve(&a_b, &rhs).ok_or_else(|| LpError::SingularBasis(basis.indices().to_vec()))?;
    let ell = nonbasis.len();
    let m = lp.m();
    let mut a_bar = Matrix::zeros(m, ell);
    let mut b_bar = Vec::with_capacity(m);
    for i in 0..m {
        for k in 0..ell {
            a_bar[(i, k)] = x[(i, k)].clone();
        }
        b_bar.push(x[(i, ell)].clone());
    }
    let c_b: Vec<Rational> = basis.indices().iter().map(|&j| lp.c()[j].clone()).collect();
    // c̄_k = c_{N_k} − c_Bᵀ Ā_k, identical to c_N − A_Nᵀ y with y = (A_Bᵀ)⁻¹c_B
    let c_bar = nonbasis
        .iter()
        .enumerate()
        .map(|(k, &j)| &lp.c()[j] - linalg::dot(&c_b, &a_bar.column(k)))
        .collect();
    let z0 = linalg::dot(&c_b, &b_bar);
    Ok(Dictionary { basis: basis.clone(), nonbasis, b_bar, c_bar, a_bar, z0 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicSolution {
    #[serde(with = "rational::vec_string")]
    pub x: Vec<Rational>,
    pub basis: Basis,
    #[serde(with = "rational::as_string")]
    pub objective: Rational,
    pub feasible: bool,
    pub degenerate: bool,
}

impl BasicSolution {
    pub fn from_dictionary(dict: &Dictionary, n: usize) -> Self {
        let mut x = vec![Rational::zero(); n];
        for (i, &j) in dict.basis().indices().iter().enumerate() {
            x[j] = dict.b_bar()[i].clone();
        }
        let feasible = dict.is_feasible();
        let degenerate = feasible && dict.b_bar().iter().any(Zero::is_zero);
        Self { x, basis: dict.basis().clone(), objective: dict.z0().clone(), feasible, degenerate }
    }

    /// Values of the basic variables, in basis order.
    pub fn basic_values(&self) -> impl Iterator<Item = &Rational> {
        self.basis.indices().iter().map(|&j| &self.x[j])
    }
}

pub fn basic_solution(lp: &StandardFormLp, basis: &Basis) -> Result<BasicSolution, LpError> {
    Ok(BasicSolution::from_dictionary(&dictionary(lp, basis)?, lp.n()))
}

/// `(y, s)` with `Aᵀy + s = c` and `s_B = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualSolution {
    #[serde(with = "rational::vec_string")]
    pub y: Vec<Rational>,
    #[serde(with = "rational::vec_string")]
    pub s: Vec<Rational>,
}

impl DualSolution {
    pub fn objective(&self, lp: &StandardFormLp) -> Rational {
        linalg::dot(lp.b(), &self.y)
    }

    pub fn is_feasible(&self) -> bool {
        self.s.iter().all(|v| !v.is_negative())
    }
}

pub fn dual_solution(lp: &StandardFormLp, basis: &Basis) -> Result<DualSolution, LpError> {
    check_dims(lp, basis)?;
    let a_b = lp.a().select_columns(basis.indices());
    let c_b: Vec<Rational> = basis.indices().iter().map(|&j| lp.c()[j].clone()).collect();
    let y = linalg::solve(&a_b.transpose(), &Matrix::column_matrix(&c_b))
        .ok_or_else(|| LpError::SingularBasis(basis.indices().to_vec()))?
        .column(0);
    let aty = lp.a().transpose().mul_vec(&y);
    let s = lp.c().iter().zip(aty).map(|(c, v)| c - v).collect();
    Ok(DualSolution { y, s })
}

fn check_dims(lp: &StandardFormLp, basis: &Basis) -> Result<(), LpError> {
    if basis.len() != lp.m() || basis.indices().iter().any(|&j| j >= lp.n()) {
        return Err(LpError::InvalidBasis(format!("{basis} does not fit m = {}, n = {}", lp.m(), lp.n())));
    }
    Ok(())
}
