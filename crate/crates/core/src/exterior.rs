//! Exterior algebra over ℝⁿ in the standard multi-index basis.
//!
//! A [`KVector`] stores the coefficients of `Σ ζ_I e_I` and a [`KCovector`]
//! those of `Σ α_I dx_I`, with `I` ranging over strictly increasing,
//! 1-based multi-indices. Coefficients are generic over [`Scalar`]; the
//! algebraic identities are exact when the scalar is [`Rational`].

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::plane::Plane;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),
    #[error("grade {inner} exceeds grade {outer}")]
    GradeTooLarge { inner: usize, outer: usize },
    #[error("invalid multi-index {entries:?} for n = {n}")]
    InvalidIndex { entries: Vec<usize>, n: usize },
    #[error("covector grade {grade} exceeds plane dimension {dim}")]
    PlaneTooSmall { grade: usize, dim: usize },
}

/// Strictly increasing tuple `(i₁, …, i_k)` with `1 ≤ i₁ < … < i_k ≤ n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self, AlgebraError> {
        let ok = entries.iter().all(|&i| (1..=n).contains(&i))
            && entries.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Self(entries))
        } else {
            Err(AlgebraError::InvalidIndex { entries, n })
        }
    }

    /// The empty index, basis of grade 0.
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn single(i: usize) -> Self {
        Self(vec![i])
    }

    /// All of `I(n, k)` in lexicographic order; `C(n, k)` elements.
    pub fn all(n: usize, k: usize) -> impl Iterator<Item = MultiIndex> {
        (1..=n).combinations(k).map(MultiIndex)
    }

    pub fn grade(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Sorted union of two disjoint indices together with the sign of the
    /// permutation that sorts the concatenation `self ++ other`.
    /// Returns `None` when the indices share an entry.
    pub fn merge(&self, other: &MultiIndex) -> Option<(MultiIndex, i32)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let mut inversions = 0usize;
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    // b[j] jumps over the remaining entries of a
                    inversions += a.len() - i;
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => return None,
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Some((MultiIndex(out), sign))
    }

    /// `self ∖ sub` if `sub ⊂ self`.
    pub fn remove(&self, sub: &MultiIndex) -> Option<MultiIndex> {
        if !sub.0.iter().all(|i| self.0.binary_search(i).is_ok()) {
            return None;
        }
        Some(MultiIndex(
            self.0
                .iter()
                .copied()
                .filter(|i| sub.0.binary_search(i).is_err())
                .collect(),
        ))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// Marker for multivectors (`e_I` basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Primal;

/// Marker for covectors (`dx_I` basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dual;

/// Homogeneous element of the exterior algebra of ℝⁿ (or of its dual).
pub struct Multivector<S, K> {
    n: usize,
    grade: usize,
    coeffs: BTreeMap<MultiIndex, S>,
    kind: PhantomData<K>,
}

pub type KVector<S = Rational> = Multivector<S, Primal>;
pub type KCovector<S = Rational> = Multivector<S, Dual>;

impl<S: Scalar, K> Multivector<S, K> {
    pub fn zero(n: usize, grade: usize) -> Self {
        Self {
            n,
            grade,
            coeffs: BTreeMap::new(),
            kind: PhantomData,
        }
    }

    /// The grade-0 element `c`.
    pub fn scalar(n: usize, c: S) -> Self {
        let mut out = Self::zero(n, 0);
        out.add_term(MultiIndex::empty(), c);
        out
    }

    /// `e_I` or `dx_I`.
    pub fn basis(n: usize, index: MultiIndex) -> Self {
        let mut out = Self::zero(n, index.grade());
        out.add_term(index, S::one());
        out
    }

    /// `e_i` or `dx_i` (1-based).
    pub fn unit(n: usize, i: usize) -> Self {
        Self::basis(n, MultiIndex::single(i))
    }

    /// Builds from `(index, coefficient)` pairs, summing repeated indices.
    pub fn from_terms(
        n: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (MultiIndex, S)>,
    ) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(n, grade);
        for (index, c) in terms {
            if index.grade() != grade {
                return Err(AlgebraError::GradeMismatch(index.grade(), grade));
            }
            MultiIndex::new(index.0.clone(), n)?;
            out.add_term(index, c);
        }
        Ok(out)
    }

    /// Grade-1 element with the given dense components.
    pub fn from_components(components: &[S]) -> Self {
        let n = components.len();
        let mut out = Self::zero(n, 1);
        for (i, c) in components.iter().enumerate() {
            out.add_term(MultiIndex::single(i + 1), c.clone());
        }
        out
    }

    /// `v₁ ∧ … ∧ v_k` for dense vectors of a common length.
    pub fn wedge_all(n: usize, vectors: &[Vec<S>]) -> Result<Self, AlgebraError> {
        let mut acc = Self::scalar(n, S::one());
        for v in vectors {
            if v.len() != n {
                return Err(AlgebraError::DimensionMismatch(v.len(), n));
            }
            acc = acc.wedge(&Self::from_components(v))?;
        }
        Ok(acc)
    }

    fn add_term(&mut self, index: MultiIndex, c: S) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(index) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, index: &MultiIndex) -> S {
        self.coeffs.get(index).cloned().unwrap_or_else(S::zero)
    }

    /// Nonzero coefficients in index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.coeffs.iter()
    }

    /// Coefficients of a grade-1 element as a dense vector.
    pub fn components(&self) -> Vec<S> {
        (1..=self.n)
            .map(|i| self.coeff(&MultiIndex::single(i)))
            .collect()
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.n, self.grade);
        for (i, v) in &self.coeffs {
            out.add_term(i.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (i, v) in &other.coeffs {
            out.add_term(i.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(&-S::one()))
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.n != other.n {
            return Err(AlgebraError::DimensionMismatch(self.n, other.n));
        }
        if self.grade != other.grade {
            return Err(AlgebraError::GradeMismatch(self.grade, other.grade));
        }
        Ok(())
    }

    /// Exterior product. A result grade above `n` yields the zero element
    /// of that grade.
    pub fn wedge(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.n != other.n {
            return Err(AlgebraError::DimensionMismatch(self.n, other.n));
        }
        let mut out = Self::zero(self.n, self.grade + other.grade);
        if out.grade > self.n {
            return Ok(out);
        }
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                if let Some((index, sign)) = i.merge(j) {
                    let c = a.clone() * b.clone();
                    out.add_term(index, if sign > 0 { c } else { -c });
                }
            }
        }
        Ok(out)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.to_f64().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_f64(&self) -> Multivector<f64, K> {
        Multivector {
            n: self.n,
            grade: self.grade,
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| (i.clone(), c.to_f64()))
                .filter(|(_, c)| *c != 0.0)
                .collect(),
            kind: PhantomData,
        }
    }
}

impl<S: Clone, K> Clone for Multivector<S, K> {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            grade: self.grade,
            coeffs: self.coeffs.clone(),
            kind: PhantomData,
        }
    }
}

impl<S: PartialEq, K> PartialEq for Multivector<S, K> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.grade == other.grade && self.coeffs == other.coeffs
    }
}

impl<S: Scalar, K> fmt::Debug for Multivector<S, K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ{}(ℝ{})[", self.grade, self.n)?;
        for (k, (i, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {c:?}")?;
        }
        write!(f, "]")
    }
}

/// Duality pairing `⟨ζ; α⟩ = Σ ζ_I α_I`.
pub fn pair<S: Scalar>(zeta: &KVector<S>, alpha: &KCovector<S>) -> Result<S, AlgebraError> {
    if zeta.n != alpha.n {
        return Err(AlgebraError::DimensionMismatch(zeta.n, alpha.n));
    }
    if zeta.grade != alpha.grade {
        return Err(AlgebraError::GradeMismatch(zeta.grade, alpha.grade));
    }
    let mut acc = S::zero();
    for (i, z) in &zeta.coeffs {
        if let Some(a) = alpha.coeffs.get(i) {
            acc = acc + z.clone() * a.clone();
        }
    }
    Ok(acc)
}

/// Interior multiplication `ζ ⌞ α`, the `(k−h)`-vector characterised by
/// `⟨ζ⌞α; β⟩ = ⟨ζ; α∧β⟩` for every `β`.
///
/// The coefficient on `e_J` is `Σ_I sign(I, J) α_I ζ_{I∪J}`, where
/// `sign(I, J)` is the sign of the shuffle sorting `I ++ J`.
pub fn interior<S: Scalar>(
    zeta: &KVector<S>,
    alpha: &KCovector<S>,
) -> Result<KVector<S>, AlgebraError> {
    if zeta.n != alpha.n {
        return Err(AlgebraError::DimensionMismatch(zeta.n, alpha.n));
    }
    if alpha.grade > zeta.grade {
        return Err(AlgebraError::GradeTooLarge {
            inner: alpha.grade,
            outer: zeta.grade,
        });
    }
    let mut out = KVector::zero(zeta.n, zeta.grade - alpha.grade);
    for (k, z) in &zeta.coeffs {
        for (i, a) in &alpha.coeffs {
            let Some(j) = k.remove(i) else { continue };
            let (_, sign) = i.merge(&j).expect("disjoint by construction");
            let c = z.clone() * a.clone();
            out.add_term(j, if sign > 0 { c } else { -c });
        }
    }
    Ok(out)
}

/// Whether `⟨v⌞α; β⟩ = 0` for every basis covector `α` of grade `h − p`.
pub fn annihilates<S: Scalar>(v: &KVector<S>, beta: &KCovector<S>) -> Result<bool, AlgebraError> {
    if v.n != beta.n {
        return Err(AlgebraError::DimensionMismatch(v.n, beta.n));
    }
    if beta.grade > v.grade {
        return Err(AlgebraError::GradeTooLarge {
            inner: beta.grade,
            outer: v.grade,
        });
    }
    let scale = v.norm() * beta.norm();
    for index in MultiIndex::all(v.n, v.grade - beta.grade) {
        let contracted = interior(v, &KCovector::basis(v.n, index))?;
        if !pair(&contracted, beta)?.is_negligible(scale) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Generators `v ⌞ dx_J`, `J ∈ I(n, k−1)`, of `span(v)` as dense vectors.
pub fn span_generators<S: Scalar>(v: &KVector<S>) -> Vec<Vec<S>> {
    if v.grade == 0 || v.is_zero() {
        return Vec::new();
    }
    MultiIndex::all(v.n, v.grade - 1)
        .map(|j| {
            interior(v, &KCovector::basis(v.n, j))
                .expect("grade k−1 ≤ k")
                .components()
        })
        .filter(|c| c.iter().any(|x| !x.is_zero()))
        .collect()
}

/// `span(v) = { v⌞α | α ∈ Λ^{k−1} }` as an orthonormal plane.
///
/// Rational inputs are ranked exactly; float inputs use pivoted
/// orthogonalization with relative tolerance `1e-10`.
pub fn span<S: Scalar>(v: &KVector<S>) -> Plane {
    let generators = span_generators(v);
    if S::EXACT {
        let independent = exact_independent_columns(&generators);
        let cols: Vec<Vec<f64>> = independent
            .iter()
            .map(|&i| generators[i].iter().map(Scalar::to_f64).collect())
            .collect();
        Plane::from_independent(v.n, &cols)
    } else {
        let cols: Vec<Vec<f64>> = generators
            .iter()
            .map(|g| g.iter().map(Scalar::to_f64).collect())
            .collect();
        Plane::from_spanning(v.n, &cols, crate::scalar::FLOAT_RANK_TOL)
    }
}

/// `dim span(v) = k`; the zero vector counts as simple.
pub fn is_simple<S: Scalar>(v: &KVector<S>) -> bool {
    if v.is_zero() || v.grade <= 1 {
        return true;
    }
    span(v).dim() == v.grade
}

/// Indices of a maximal independent subset of `columns`, by exact
/// Gaussian elimination in the scalar field.
pub fn exact_independent_columns<S: Scalar>(columns: &[Vec<S>]) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<S>)> = Vec::new(); // (pivot row, reduced column)
    let mut chosen = Vec::new();
    for (ci, col) in columns.iter().enumerate() {
        let mut r = col.clone();
        for (pivot, b) in &basis {
            if r[*pivot].is_zero() {
                continue;
            }
            let f = r[*pivot].clone() / b[*pivot].clone();
            for (x, y) in r.iter_mut().zip(b) {
                *x = x.clone() - f.clone() * y.clone();
            }
        }
        if let Some(pivot) = r.iter().position(|x| !x.is_zero()) {
            basis.push((pivot, r));
            chosen.push(ci);
        }
    }
    chosen
}

/// Values `M[a] = ⟨u_{a₁} ∧ … ∧ u_{a_p}; β⟩` of a covector on increasing
/// tuples of a plane's orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionTable {
    pub grade: usize,
    /// Keyed by 0-based increasing tuples of plane basis positions.
    pub entries: BTreeMap<Vec<usize>, f64>,
}

impl RestrictionTable {
    /// Root-sum-square of the entries, which does not depend on the choice
    /// of orthonormal basis; zero for an empty table.
    pub fn norm(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Max-abs entry; zero for an empty table.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.entries.get(tuple).copied().unwrap_or(0.0)
    }
}

/// Restriction of `β` to `P × … × P` in the basis of `P`.
pub fn restrict_covector<S: Scalar>(
    beta: &KCovector<S>,
    plane: &Plane,
) -> Result<RestrictionTable, AlgebraError> {
    if beta.n != plane.ambient() {
        return Err(AlgebraError::DimensionMismatch(beta.n, plane.ambient()));
    }
    let p = beta.grade;
    if p > plane.dim() {
        return Err(AlgebraError::PlaneTooSmall {
            grade: p,
            dim: plane.dim(),
        });
    }
    let basis = plane.basis();
    let mut entries = BTreeMap::new();
    for tuple in (0..plane.dim()).combinations(p) {
        let mut value = 0.0;
        for (index, c) in beta.terms() {
            // coefficient of e_I in u_{a1} ∧ … ∧ u_{ap} is the I-rows minor
            let minor = DMatrix::from_fn(p, p, |r, s| basis[(index.entries()[r] - 1, tuple[s])]);
            value += c.to_f64() * det(&minor);
        }
        entries.insert(tuple, value);
    }
    Ok(RestrictionTable { grade: p, entries })
}

fn det(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().determinant(),
    }
}

/// Dense float vector of a grade-1 element.
pub fn to_dvector<S: Scalar>(v: &KVector<S>) -> DVector<f64> {
    DVector::from_iterator(v.n, v.components().iter().map(Scalar::to_f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn e(n: usize, i: usize) -> KVector {
        KVector::unit(n, i)
    }

    fn dx(n: usize, idx: &[usize]) -> KCovector {
        KCovector::basis(n, MultiIndex::new(idx.to_vec(), n).unwrap())
    }

    fn ev(n: usize, idx: &[usize]) -> KVector {
        KVector::basis(n, MultiIndex::new(idx.to_vec(), n).unwrap())
    }

    fn q(v: i64) -> Rational {
        ratio(v, 1)
    }

    /// Sign of the permutation sorting `seq` (0 if repeated), by counting
    /// inversions pairwise.
    fn perm_sign(seq: &[usize]) -> i32 {
        let mut sign = 1;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i] == seq[j] {
                    return 0;
                }
                if seq[i] > seq[j] {
                    sign = -sign;
                }
            }
        }
        sign
    }

    #[test]
    fn multi_index_validation() {
        assert!(MultiIndex::new(vec![1, 3], 3).is_ok());
        assert!(MultiIndex::new(vec![3, 1], 3).is_err());
        assert!(MultiIndex::new(vec![0, 1], 3).is_err());
        assert!(MultiIndex::new(vec![2, 4], 3).is_err());
        assert!(MultiIndex::new(vec![2, 2], 3).is_err());
        assert_eq!(MultiIndex::all(5, 2).count(), 10);
        assert_eq!(MultiIndex::all(6, 3).count(), 20);
    }

    #[test]
    fn merge_sign_matches_permutation_oracle() {
        for n in 1..=5 {
            for a in 0..=n {
                for b in 0..=n - a {
                    for i in MultiIndex::all(n, a) {
                        for j in MultiIndex::all(n, b) {
                            let concat: Vec<usize> =
                                i.entries().iter().chain(j.entries()).copied().collect();
                            let oracle = perm_sign(&concat);
                            match i.merge(&j) {
                                None => assert_eq!(oracle, 0),
                                Some((_, s)) => assert_eq!(s, oracle),
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(e(3, 1).wedge(&e(3, 2)).unwrap(), ev(3, &[1, 2]));
        assert!(e(3, 1).wedge(&e(3, 1)).unwrap().is_zero());
        assert_eq!(
            e(3, 2).wedge(&e(3, 1)).unwrap(),
            ev(3, &[1, 2]).scale(&q(-1))
        );
    }

    #[test]
    fn wedge_above_top_grade_is_zero() {
        let w = ev(3, &[1, 2]).wedge(&ev(3, &[1, 3])).unwrap();
        assert!(w.is_zero());
        assert_eq!(w.grade(), 4);
    }

    #[test]
    fn wedge_dimension_mismatch() {
        assert_eq!(
            e(3, 1).wedge(&e(4, 1)).unwrap_err(),
            AlgebraError::DimensionMismatch(3, 4)
        );
    }

    #[test]
    fn wedge_basis_graded_anticommutative_and_associative() {
        for n in 1..=5 {
            let all: Vec<KVector> = (0..=n)
                .flat_map(|k| MultiIndex::all(n, k).map(move |i| KVector::basis(n, i)))
                .collect();
            for a in &all {
                for b in &all {
                    let sign = if (a.grade() * b.grade()) % 2 == 0 {
                        q(1)
                    } else {
                        q(-1)
                    };
                    assert_eq!(a.wedge(b).unwrap(), b.wedge(a).unwrap().scale(&sign));
                }
            }
            if n <= 4 {
                for a in &all {
                    for b in &all {
                        for c in &all {
                            let l = a.wedge(b).unwrap().wedge(c).unwrap();
                            let r = a.wedge(&b.wedge(c).unwrap()).unwrap();
                            assert_eq!(l, r);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&ev(3, &[1, 2]), &dx(3, &[1, 2])).unwrap(), q(1));
        assert_eq!(pair(&ev(3, &[1, 2]), &dx(3, &[1, 3])).unwrap(), q(0));
        let z = ev(3, &[1, 2])
            .scale(&q(2))
            .add(&ev(3, &[2, 3]).scale(&q(3)))
            .unwrap();
        assert_eq!(pair(&z, &dx(3, &[2, 3])).unwrap(), q(3));
        assert!(matches!(
            pair(&ev(3, &[1, 2]), &dx(3, &[1])),
            Err(AlgebraError::GradeMismatch(2, 1))
        ));
    }

    /// Coefficients of ζ⌞α recovered one basis β at a time from the
    /// defining identity, independent of the shuffle formula.
    fn interior_oracle(zeta: &KVector, alpha: &KCovector) -> KVector {
        let n = zeta.ambient();
        let g = zeta.grade() - alpha.grade();
        let terms = MultiIndex::all(n, g).map(|j| {
            let beta = KCovector::basis(n, j.clone());
            (j, pair(zeta, &alpha.wedge(&beta).unwrap()).unwrap())
        });
        KVector::from_terms(n, g, terms).unwrap()
    }

    #[test]
    fn interior_examples() {
        let z = ev(3, &[1, 2]);
        assert_eq!(interior(&z, &dx(3, &[1])).unwrap(), e(3, 2));
        assert_eq!(interior_oracle(&z, &dx(3, &[1])), e(3, 2));

        let z = ev(3, &[1, 2, 3]);
        let expected = ev(3, &[1, 3]).scale(&q(-1));
        assert_eq!(interior(&z, &dx(3, &[2])).unwrap(), expected);
        assert_eq!(interior_oracle(&z, &dx(3, &[2])), expected);

        let c = KCovector::scalar(3, ratio(5, 2));
        assert_eq!(interior(&z, &c).unwrap(), z.scale(&ratio(5, 2)));
    }

    #[test]
    fn interior_rejects_large_covector() {
        assert!(matches!(
            interior(&e(3, 1), &dx(3, &[1, 2])),
            Err(AlgebraError::GradeTooLarge { inner: 2, outer: 1 })
        ));
    }

    fn non_simple_v() -> KVector {
        ev(5, &[1, 2, 3]).add(&ev(5, &[1, 4, 5])).unwrap()
    }

    #[test]
    fn annihilates_examples() {
        assert!(annihilates(&non_simple_v(), &dx(5, &[2, 4])).unwrap());
        assert!(!annihilates(&ev(3, &[1, 2]), &dx(3, &[1])).unwrap());
        assert!(annihilates(&non_simple_v(), &KCovector::zero(5, 2)).unwrap());
    }

    #[test]
    fn span_examples() {
        let p = span(&ev(3, &[1, 2]));
        assert_eq!(p.dim(), 2);
        assert!(p.contains(&[1.0, 0.0, 0.0], 1e-12));
        assert!(p.contains(&[0.0, 1.0, 0.0], 1e-12));
        assert_eq!(span(&KVector::<Rational>::zero(3, 2)).dim(), 0);
        assert_eq!(span(&non_simple_v()).dim(), 5);
    }

    #[test]
    fn simplicity_examples() {
        assert!(is_simple(&ev(3, &[1, 2])));
        let v = ev(4, &[1, 2]).add(&ev(4, &[3, 4])).unwrap();
        assert_eq!(span(&v).dim(), 4);
        assert!(!is_simple(&v));
        let blade =
            KVector::wedge_all(3, &[vec![q(1), q(1), q(0)], vec![q(0), q(0), q(1)]]).unwrap();
        assert!(is_simple(&blade));
        assert!(is_simple(&KVector::<Rational>::zero(4, 2)));
    }

    #[test]
    fn float_span_uses_tolerance() {
        let v =
            KVector::<f64>::wedge_all(3, &[vec![1.0, 1e-3, 0.0], vec![0.0, 1.0, 1e-3]]).unwrap();
        assert_eq!(span(&v).dim(), 2);
        assert!(is_simple(&v));
    }

    #[test]
    fn restriction_examples() {
        let beta = dx(4, &[1, 2]);
        let t = restrict_covector(&beta, &Plane::coordinate(4, &[1, 2])).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert!((t.get(&[0, 1]) - 1.0).abs() < 1e-15);
        let t = restrict_covector(&beta, &Plane::coordinate(4, &[3, 4])).unwrap();
        assert_eq!(t.norm(), 0.0);

        let plane = span(&non_simple_v());
        assert_eq!(plane.dim(), 5);
        let t =
            restrict_covector(&dx(5, &[2, 4]), &Plane::coordinate(5, &[1, 2, 3, 4, 5])).unwrap();
        assert_eq!(t.get(&[1, 3]), 1.0);
        assert!((restrict_covector(&dx(5, &[2, 4]), &plane).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn restriction_rejects_small_plane() {
        assert!(matches!(
            restrict_covector(&dx(3, &[1, 2]), &Plane::coordinate(3, &[1])),
            Err(AlgebraError::PlaneTooSmall { grade: 2, dim: 1 })
        ));
    }
}
