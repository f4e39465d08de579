//! Region predicates on the carrier of a current, evaluated per simplex.
//!
//! A mask answers two questions: does a point of simplex `i` belong to the
//! region, and is a whole sub-cell certainly inside, certainly outside, or
//! undecided at its size. Undecided cells are refined by the ball-mass
//! estimator and count toward its interval width.

use crate::currents::PolyhedralCurrent;
use crate::exterior::restrict_covector;
use crate::forms::{DifferentialForm, Distribution};
use crate::plane::{tangency_defect, Plane};
use crate::poly::PolyExpr;
use crate::scalar::FLOAT_RANK_TOL;

use super::geometry::Cell;

/// Three-valued membership of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    Unknown,
}

impl Membership {
    /// Kleene conjunction.
    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Membership::Out, _) | (_, Membership::Out) => Membership::Out,
            (Membership::In, Membership::In) => Membership::In,
            _ => Membership::Unknown,
        }
    }
}

impl std::ops::Not for Membership {
    type Output = Self;

    fn not(self) -> Self {
        match self {
            Membership::In => Membership::Out,
            Membership::Out => Membership::In,
            Membership::Unknown => Membership::Unknown,
        }
    }
}

/// A sub-cell of simplex `simplex`, with a bounding ball.
#[derive(Debug, Clone)]
pub struct CellView<'a> {
    pub simplex: usize,
    /// Vertex-major coordinates, `n` per vertex.
    pub coords: &'a [f64],
    pub n: usize,
    pub centroid: Vec<f64>,
    pub radius: f64,
}

impl<'a> CellView<'a> {
    pub(crate) fn of(cell: &'a Cell) -> Self {
        let (centroid, radius) = cell.bounding_ball();
        Self {
            simplex: cell.simplex,
            coords: &cell.coords,
            n: cell.n,
            centroid,
            radius,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = &'a [f64]> {
        self.coords.chunks_exact(self.n)
    }
}

pub trait Mask: Send + Sync {
    fn classify(&self, cell: &CellView<'_>) -> Membership;
    fn contains(&self, simplex: usize, point: &[f64]) -> bool;
}

/// Everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct Full;

impl Mask for Full {
    fn classify(&self, _: &CellView<'_>) -> Membership {
        Membership::In
    }

    fn contains(&self, _: usize, _: &[f64]) -> bool {
        true
    }
}

/// Set complement of another mask.
pub struct Complement<M>(pub M);

impl<M: Mask> Mask for Complement<M> {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        !self.0.classify(cell)
    }

    fn contains(&self, simplex: usize, point: &[f64]) -> bool {
        !self.0.contains(simplex, point)
    }
}

/// Intersection of two masks.
pub struct And<A, B>(pub A, pub B);

impl<A: Mask, B: Mask> Mask for And<A, B> {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        let a = self.0.classify(cell);
        if a == Membership::Out {
            return a;
        }
        a.and(self.1.classify(cell))
    }

    fn contains(&self, simplex: usize, point: &[f64]) -> bool {
        self.0.contains(simplex, point) && self.1.contains(simplex, point)
    }
}

impl<M: Mask + ?Sized> Mask for &M {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        (**self).classify(cell)
    }

    fn contains(&self, simplex: usize, point: &[f64]) -> bool {
        (**self).contains(simplex, point)
    }
}

impl<M: Mask + ?Sized> Mask for Box<M> {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        (**self).classify(cell)
    }

    fn contains(&self, simplex: usize, point: &[f64]) -> bool {
        (**self).contains(simplex, point)
    }
}

/// Closed half-space `{ y : ⟨a, y⟩ ≤ b }`.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    fn value(&self, y: &[f64]) -> f64 {
        self.normal.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

impl Mask for HalfSpace {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        let (mut inside, mut outside) = (true, true);
        for v in cell.vertices() {
            let value = self.value(v);
            inside &= value <= 0.0;
            outside &= value > 0.0;
        }
        if inside {
            Membership::In
        } else if outside {
            Membership::Out
        } else {
            Membership::Unknown
        }
    }

    fn contains(&self, _: usize, point: &[f64]) -> bool {
        self.value(point) <= 0.0
    }
}

/// Only the listed simplices.
#[derive(Debug, Clone)]
pub struct SimplexSubset(pub Vec<bool>);

impl Mask for SimplexSubset {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        if self.0.get(cell.simplex).copied().unwrap_or(false) {
            Membership::In
        } else {
            Membership::Out
        }
    }

    fn contains(&self, simplex: usize, _: &[f64]) -> bool {
        self.0.get(simplex).copied().unwrap_or(false)
    }
}

fn certify(defect_at_center: f64, variation: f64, tol: f64) -> Membership {
    if defect_at_center + variation < tol {
        Membership::In
    } else if defect_at_center - variation >= tol {
        Membership::Out
    } else {
        Membership::Unknown
    }
}

/// Direction planes of every simplex of a current.
pub fn simplex_spans(current: &PolyhedralCurrent) -> Vec<Plane> {
    current
        .simplices()
        .iter()
        .map(|s| {
            let c = s.coords();
            let edges: Vec<Vec<f64>> = c[1..]
                .iter()
                .map(|v| v.iter().zip(&c[0]).map(|(a, b)| a - b).collect())
                .collect();
            Plane::from_spanning(current.ambient(), &edges, FLOAT_RANK_TOL)
        })
        .collect()
}

/// `Γ_tol = { y : tangency_defect(span η_Δ, 𝒟(y)) < tol }` on each simplex.
///
/// A cell is certified from the defect at its centroid plus the
/// distribution's plane-variation bound over the cell's bounding ball.
#[derive(Debug, Clone)]
pub struct TangencyMask {
    distribution: Distribution,
    spans: Vec<Plane>,
    grade: usize,
    tol: f64,
}

impl TangencyMask {
    pub fn new(current: &PolyhedralCurrent, distribution: &Distribution, tol: f64) -> Self {
        Self {
            distribution: distribution.clone(),
            spans: simplex_spans(current),
            grade: current.grade(),
            tol,
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Defect at `point` for simplex `simplex`; `None` where the simplex is
    /// degenerate or the distribution is singular.
    pub fn defect(&self, simplex: usize, point: &[f64]) -> Option<f64> {
        let span = &self.spans[simplex];
        if span.dim() < self.grade {
            return None;
        }
        if self.distribution.defining_forms().len() == 1 {
            return self.hyperplane_defect(span, point);
        }
        let plane = self.distribution.plane(point).ok()?;
        tangency_defect(span, &plane).ok().or(Some(1.0))
    }

    /// For `𝒟 = ker ω` the residual `P − QQᵀP` is `ω̂ ω̂ᵀ P`, whose norm is
    /// `|Pᵀ ω̂|`.
    fn hyperplane_defect(&self, span: &Plane, point: &[f64]) -> Option<f64> {
        let row = self.distribution.form_matrix(point).ok()?;
        let norm = row.norm();
        if norm == 0.0 {
            return None;
        }
        let along = row * span.basis() / norm;
        Some(along.norm())
    }
}

impl Mask for TangencyMask {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        let Some(d) = self.defect(cell.simplex, &cell.centroid) else {
            return Membership::Unknown;
        };
        let variation = self
            .distribution
            .plane_variation_bound(&cell.centroid, cell.radius);
        certify(d, variation, self.tol)
    }

    fn contains(&self, simplex: usize, point: &[f64]) -> bool {
        self.defect(simplex, point).is_some_and(|d| d < self.tol)
    }
}

/// `𝒦_tol(τ, ω)`: points where `ω_y` restricted to the simplex's direction
/// plane has max-abs entry below `tol`.
#[derive(Debug, Clone)]
pub struct AnnihilatorMask {
    form: DifferentialForm,
    /// `∂_j` of each coefficient of the form.
    gradients: Vec<Vec<PolyExpr>>,
    spans: Vec<Plane>,
    tol: f64,
}

impl AnnihilatorMask {
    pub fn new(current: &PolyhedralCurrent, form: &DifferentialForm, tol: f64) -> Self {
        let n = form.ambient();
        let gradients = form
            .terms()
            .map(|(_, c)| {
                (1..=n)
                    .map(|j| c.diff(j).expect("index in range"))
                    .collect()
            })
            .collect();
        Self {
            form: form.clone(),
            gradients,
            spans: simplex_spans(current),
            tol,
        }
    }

    pub fn defect(&self, simplex: usize, point: &[f64]) -> f64 {
        let span = &self.spans[simplex];
        if self.form.grade() > span.dim() {
            return 0.0;
        }
        let value = self.form.eval(point).expect("point has ambient dimension");
        restrict_covector(&value, span).expect("grade fits").norm()
    }

    /// Bound on the change of the restricted table over a ball: the
    /// coefficient gradients bound the covector change, and restriction to
    /// an orthonormal frame does not increase it.
    fn variation(&self, center: &[f64], radius: f64) -> f64 {
        let mut s = 0.0;
        for grads in &self.gradients {
            for g in grads {
                if !g.is_zero() {
                    s += g.abs_bound(center, radius).powi(2);
                }
            }
        }
        radius * s.sqrt()
    }
}

impl Mask for AnnihilatorMask {
    fn classify(&self, cell: &CellView<'_>) -> Membership {
        let d = self.defect(cell.simplex, &cell.centroid);
        certify(d, self.variation(&cell.centroid, cell.radius), self.tol)
    }

    fn contains(&self, simplex: usize, point: &[f64]) -> bool {
        self.defect(simplex, point) < self.tol
    }
}
