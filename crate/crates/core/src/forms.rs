//! Differential forms with polynomial coefficients, and distributions of
//! planes given by defining 1-forms.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::exterior::{restrict_covector, AlgebraError, KCovector, MultiIndex};
use crate::plane::Plane;
use crate::poly::{PolyError, PolyExpr};
use crate::scalar::{Rational, FLOAT_RANK_TOL};

/// Default tolerance below which an involutivity defect counts as zero.
pub const INVOLUTIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("top-grade form: d of a grade-{0} form in ℝ^{0} is not defined here")]
    TopGrade(usize),
    #[error("degenerate defining forms at {0:?}")]
    Degenerate(Vec<f64>),
    #[error("distribution of dimension {k} in ℝ^{n} needs {expected} defining 1-forms, got {got}")]
    FormCount {
        n: usize,
        k: usize,
        expected: usize,
        got: usize,
    },
    #[error("defining form {index} has grade {grade}, expected 1")]
    NotOneForm { index: usize, grade: usize },
    #[error("form lives in ℝ^{0}, expected ℝ^{1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `ω = Σ_I ω_I dx_I` with polynomial coefficients `ω_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    n: usize,
    grade: usize,
    coeffs: BTreeMap<MultiIndex, PolyExpr>,
}

impl DifferentialForm {
    pub fn zero(n: usize, grade: usize) -> Self {
        Self {
            n,
            grade,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        n: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (MultiIndex, PolyExpr)>,
    ) -> Result<Self, FormError> {
        let mut out = Self::zero(n, grade);
        for (index, coeff) in terms {
            if index.grade() != grade {
                return Err(AlgebraError::GradeMismatch(index.grade(), grade).into());
            }
            MultiIndex::new(index.entries().to_vec(), n)?;
            if coeff.nvars() != n {
                return Err(FormError::DimensionMismatch(coeff.nvars(), n));
            }
            out.add_term(index, coeff);
        }
        Ok(out)
    }

    /// Parses `(multi-index, polynomial text)` pairs.
    pub fn parse_terms<'a>(
        n: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, &'a str)>,
    ) -> Result<Self, FormError> {
        let mut parsed = Vec::new();
        for (idx, text) in terms {
            parsed.push((MultiIndex::new(idx, n)?, PolyExpr::parse(text, n)?));
        }
        Self::from_terms(n, grade, parsed)
    }

    /// The constant form `dx_I`.
    pub fn basis(n: usize, index: MultiIndex) -> Self {
        let grade = index.grade();
        let mut out = Self::zero(n, grade);
        out.add_term(index, PolyExpr::one(n));
        out
    }

    fn add_term(&mut self, index: MultiIndex, coeff: PolyExpr) {
        if coeff.is_zero() {
            return;
        }
        let sum = match self.coeffs.remove(&index) {
            Some(prev) => &prev + &coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.coeffs.insert(index, sum);
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

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &PolyExpr)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, index: &MultiIndex) -> PolyExpr {
        self.coeffs
            .get(index)
            .cloned()
            .unwrap_or_else(|| PolyExpr::zero(self.n))
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    fn check_same(&self, other: &Self) -> Result<(), FormError> {
        if self.n != other.n {
            return Err(FormError::DimensionMismatch(other.n, self.n));
        }
        if self.grade != other.grade {
            return Err(AlgebraError::GradeMismatch(other.grade, self.grade).into());
        }
        Ok(())
    }

    /// Multiplies every coefficient by a polynomial.
    pub fn mul_poly(&self, f: &PolyExpr) -> Self {
        let mut out = Self::zero(self.n, self.grade);
        for (i, c) in &self.coeffs {
            out.add_term(i.clone(), c * f);
        }
        out
    }

    /// Pointwise exterior product. Grades above `n` give the zero form.
    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        if self.n != other.n {
            return Err(FormError::DimensionMismatch(other.n, self.n));
        }
        let mut out = Self::zero(self.n, self.grade + other.grade);
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                if let Some((index, sign)) = i.merge(j) {
                    let c = a * b;
                    out.add_term(index, if sign > 0 { c } else { -&c });
                }
            }
        }
        Ok(out)
    }

    /// Covector `ω(x)` in floating point.
    pub fn eval(&self, x: &[f64]) -> Result<KCovector<f64>, FormError> {
        if x.len() != self.n {
            return Err(PolyError::Arity {
                expected: self.n,
                got: x.len(),
            }
            .into());
        }
        let terms = self
            .coeffs
            .iter()
            .map(|(i, c)| (i.clone(), c.eval_f64_unchecked(x)));
        Ok(KCovector::from_terms(self.n, self.grade, terms)?)
    }

    /// Covector `ω(x)` evaluated exactly at a rational point.
    pub fn eval_exact(&self, x: &[Rational]) -> Result<KCovector<Rational>, FormError> {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (i, c) in &self.coeffs {
            terms.push((i.clone(), c.eval(x)?));
        }
        Ok(KCovector::from_terms(self.n, self.grade, terms)?)
    }

    /// Exterior derivative `dω = Σ_I Σ_j (∂_j ω_I) dx_j ∧ dx_I`.
    pub fn d(&self) -> Result<Self, FormError> {
        if self.grade >= self.n {
            return Err(FormError::TopGrade(self.n));
        }
        let mut out = Self::zero(self.n, self.grade + 1);
        for (index, c) in &self.coeffs {
            for j in 1..=self.n {
                let Some((merged, sign)) = MultiIndex::single(j).merge(index) else {
                    continue;
                };
                let dc = c.diff(j)?;
                out.add_term(merged, if sign > 0 { dc } else { -&dc });
            }
        }
        Ok(out)
    }

    /// Maximum total degree over the coefficients.
    pub fn degree(&self) -> u32 {
        self.coeffs
            .values()
            .map(PolyExpr::degree)
            .max()
            .unwrap_or(0)
    }
}

/// A `k`-plane distribution on ℝⁿ, locally the common kernel of `n − k`
/// defining 1-forms.
#[derive(Debug, Clone)]
pub struct Distribution {
    n: usize,
    k: usize,
    defining: Vec<DifferentialForm>,
    derivatives: Vec<DifferentialForm>,
    /// `∂_j` of the coefficient of `dx_l` in form `i`, as `[i][l][j]`.
    jacobian: Vec<Vec<Vec<PolyExpr>>>,
}

impl Distribution {
    pub fn new(n: usize, k: usize, defining: Vec<DifferentialForm>) -> Result<Self, FormError> {
        if k > n || defining.len() != n - k {
            return Err(FormError::FormCount {
                n,
                k,
                expected: n.saturating_sub(k),
                got: defining.len(),
            });
        }
        for (index, f) in defining.iter().enumerate() {
            if f.grade != 1 {
                return Err(FormError::NotOneForm {
                    index,
                    grade: f.grade,
                });
            }
            if f.n != n {
                return Err(FormError::DimensionMismatch(f.n, n));
            }
        }
        let derivatives = defining
            .iter()
            .map(|f| {
                if n > 1 {
                    f.d()
                } else {
                    Ok(DifferentialForm::zero(n, 2))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let jacobian = defining
            .iter()
            .map(|f| {
                (1..=n)
                    .map(|l| {
                        let c = f.coeff(&MultiIndex::single(l));
                        (1..=n)
                            .map(|j| c.diff(j).expect("index in range"))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            k,
            defining,
            derivatives,
            jacobian,
        })
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn defining_forms(&self) -> &[DifferentialForm] {
        &self.defining
    }

    /// Exterior derivatives of the defining forms.
    pub fn derivatives(&self) -> &[DifferentialForm] {
        &self.derivatives
    }

    /// `(n − k) × n` matrix whose rows are the defining covectors at `x`.
    pub fn form_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>, FormError> {
        if x.len() != self.n {
            return Err(PolyError::Arity {
                expected: self.n,
                got: x.len(),
            }
            .into());
        }
        let mut m = DMatrix::zeros(self.n - self.k, self.n);
        for (r, f) in self.defining.iter().enumerate() {
            for (index, c) in f.terms() {
                m[(r, index.entries()[0] - 1)] = c.eval_f64_unchecked(x);
            }
        }
        Ok(m)
    }

    /// `𝒟(x)`: orthonormal basis of the common kernel of the defining forms.
    pub fn plane(&self, x: &[f64]) -> Result<Plane, FormError> {
        let m = self.form_matrix(x)?;
        if m.nrows() == 0 {
            return Ok(Plane::coordinate(self.n, &(1..=self.n).collect::<Vec<_>>()));
        }
        Plane::kernel_of_rows(&m, FLOAT_RANK_TOL).ok_or_else(|| FormError::Degenerate(x.to_vec()))
    }

    /// Largest root-sum-square norm of `(dω^{(j)})_x` restricted to `𝒟(x) × 𝒟(x)`,
    /// over an orthonormal basis of `𝒟(x)`.
    pub fn restricted_curvature(&self, x: &[f64]) -> Result<f64, FormError> {
        let plane = self.plane(x)?;
        self.restricted_curvature_on(&plane, x)
    }

    fn restricted_curvature_on(&self, plane: &Plane, x: &[f64]) -> Result<f64, FormError> {
        if plane.dim() < 2 {
            return Ok(0.0);
        }
        let mut worst = 0.0_f64;
        for dw in &self.derivatives {
            worst = worst.max(restrict_covector(&dw.eval(x)?, plane)?.norm());
        }
        Ok(worst)
    }

    /// Involutivity defect at `x`: the restricted curvature weighted by the
    /// `(n−k)`-volume `sqrt(det(A Aᵀ))` of the defining covectors `A`.
    ///
    /// This is the size of `ω¹ ∧ … ∧ ω^{n−k} ∧ dω^{(j)}` evaluated on an
    /// orthonormal frame adapted to `𝒟(x)`. It vanishes exactly when every
    /// `dω^{(j)}` vanishes on `𝒟(x) × 𝒟(x)`.
    pub fn involutivity_defect(&self, x: &[f64]) -> Result<f64, FormError> {
        let m = self.form_matrix(x)?;
        let plane = if m.nrows() == 0 {
            Plane::coordinate(self.n, &(1..=self.n).collect::<Vec<_>>())
        } else {
            Plane::kernel_of_rows(&m, FLOAT_RANK_TOL)
                .ok_or_else(|| FormError::Degenerate(x.to_vec()))?
        };
        let curvature = self.restricted_curvature_on(&plane, x)?;
        if curvature == 0.0 {
            return Ok(0.0);
        }
        let volume = m.singular_values().iter().product::<f64>();
        Ok(volume * curvature)
    }

    /// Whether the defect at `x` is below `tol`.
    pub fn is_involutive_at(&self, x: &[f64], tol: f64) -> Result<bool, FormError> {
        Ok(self.involutivity_defect(x)? < tol)
    }

    /// Applies a constant invertible mixing `A` to the defining forms:
    /// `ω'ⁱ = Σ_j A_ij ωʲ`.
    pub fn mix(&self, a: &[Vec<Rational>]) -> Result<Self, FormError> {
        let mut mixed = Vec::with_capacity(self.defining.len());
        for row in a {
            let mut acc = DifferentialForm::zero(self.n, 1);
            for (c, f) in row.iter().zip(&self.defining) {
                acc = acc.add(&f.mul_poly(&PolyExpr::constant(self.n, c.clone())))?;
            }
            mixed.push(acc);
        }
        Self::new(self.n, self.k, mixed)
    }

    /// Bound on `|𝒟(y) − 𝒟(c)|` as a projector perturbation for
    /// `|y − c| ≤ radius`, from the coefficient Jacobian over the enclosing
    /// box and the smallest singular value of the form matrix at `c`.
    /// Infinite when the bound cannot certify full rank on the ball.
    pub fn plane_variation_bound(&self, center: &[f64], radius: f64) -> f64 {
        if self.defining.is_empty() || radius == 0.0 {
            return 0.0;
        }
        let Ok(m) = self.form_matrix(center) else {
            return f64::INFINITY;
        };
        let sigma_min = if m.nrows() == 1 {
            m.norm()
        } else {
            m.singular_values().min()
        };
        let mut g2 = 0.0;
        for form in &self.jacobian {
            for coeff in form {
                for dj in coeff {
                    if !dj.is_zero() {
                        g2 += dj.abs_bound(center, radius).powi(2);
                    }
                }
            }
        }
        let spread = g2.sqrt() * radius;
        if spread >= sigma_min {
            return f64::INFINITY;
        }
        2.0 * spread / (sigma_min - spread)
    }
}
