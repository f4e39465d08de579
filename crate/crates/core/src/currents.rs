//! Integral currents realised as finite chains of oriented simplices with
//! integer multiplicities.
//!
//! Vertex coordinates are exact rationals, so boundaries cancel exactly and
//! pairings with polynomial forms are computed without rounding.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exterior::{KVector, MultiIndex};
use crate::forms::{DifferentialForm, FormError};
use crate::scalar::{factorial, rational_from_f64, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurrentError {
    #[error("degenerate simplex: edge vectors are linearly dependent")]
    Degenerate,
    #[error("simplex has {got} vertices, expected {expected}")]
    VertexCount { expected: usize, got: usize },
    #[error("vertex has {got} coordinates, expected {expected}")]
    VertexDimension { expected: usize, got: usize },
    #[error("grade mismatch: current has grade {current}, form has grade {form}")]
    GradeMismatch { current: usize, form: usize },
    #[error("simplex grade {k} exceeds ambient dimension {n}")]
    GradeTooLarge { k: usize, n: usize },
    #[error("a 0-current has no boundary")]
    NoBoundary,
    #[error("multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("vertex index {index} out of range ({count} vertices)")]
    VertexIndex { index: usize, count: usize },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Volume of the unit ball in ℝᵏ.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * std::f64::consts::PI / k as f64,
    }
}

/// Factor turning Euclidean k-volume into the diameter-normalized Hausdorff
/// measure, under which a flat k-disk of radius r has measure (2r)ᵏ.
pub fn hausdorff_normalization(k: usize) -> f64 {
    2f64.powi(k as i32) / unit_ball_volume(k)
}

/// Oriented k-simplex `sign · [v₀, …, v_k]` with positive multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<Rational>>,
    coords: Vec<Vec<f64>>,
    multiplicity: u32,
    sign: i8,
}

impl Simplex {
    /// Degenerate vertex sets are accepted; [`Simplex::orientation`]
    /// rejects them and [`Simplex::volume`] reports zero.
    pub fn new(vertices: Vec<Vec<Rational>>, multiplicity: u32) -> Result<Self, CurrentError> {
        Self::with_sign(vertices, multiplicity, 1)
    }

    pub fn with_sign(
        vertices: Vec<Vec<Rational>>,
        multiplicity: u32,
        sign: i8,
    ) -> Result<Self, CurrentError> {
        if multiplicity == 0 {
            return Err(CurrentError::ZeroMultiplicity);
        }
        let n = vertices.first().map(Vec::len).unwrap_or(0);
        if vertices.is_empty() {
            return Err(CurrentError::VertexCount {
                expected: 1,
                got: 0,
            });
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != n) {
            return Err(CurrentError::VertexDimension {
                expected: n,
                got: v.len(),
            });
        }
        if vertices.len() - 1 > n {
            return Err(CurrentError::GradeTooLarge {
                k: vertices.len() - 1,
                n,
            });
        }
        let coords = vertices
            .iter()
            .map(|v| v.iter().map(Scalar::to_f64).collect())
            .collect();
        Ok(Self {
            vertices,
            coords,
            multiplicity,
            sign: if sign < 0 { -1 } else { 1 },
        })
    }

    /// Builds from float coordinates, converted exactly to rationals.
    pub fn from_f64(vertices: &[Vec<f64>], multiplicity: u32) -> Result<Self, CurrentError> {
        let exact = vertices
            .iter()
            .map(|v| {
                v.iter()
                    .map(|&c| rational_from_f64(c).ok_or(CurrentError::NonFinite))
                    .collect()
            })
            .collect::<Result<Vec<Vec<Rational>>, _>>()?;
        Self::new(exact, multiplicity)
    }

    pub fn ambient(&self) -> usize {
        self.coords[0].len()
    }

    pub fn grade(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    /// Vertex coordinates in floating point.
    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Same simplex with reversed orientation.
    pub fn reversed(&self) -> Self {
        Self {
            sign: -self.sign,
            ..self.clone()
        }
    }

    /// Same simplex with two vertices exchanged (an odd permutation).
    pub fn transposed(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        out.vertices.swap(i, j);
        out.coords.swap(i, j);
        out
    }

    fn edges(&self) -> Vec<Vec<Rational>> {
        let v0 = &self.vertices[0];
        self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect())
            .collect()
    }

    /// `sign · (v₁−v₀) ∧ … ∧ (v_k−v₀)`, exact and unnormalized.
    pub fn edge_wedge(&self) -> KVector<Rational> {
        let w = KVector::wedge_all(self.ambient(), &self.edges()).expect("edges share dimension");
        if self.sign < 0 {
            w.scale(&Rational::from_i64(-1))
        } else {
            w
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.edge_wedge().is_zero()
    }

    /// Unit simple k-vector orienting the simplex.
    pub fn orientation(&self) -> Result<KVector<f64>, CurrentError> {
        let w = self.edge_wedge();
        if w.is_zero() {
            return Err(CurrentError::Degenerate);
        }
        let w = w.to_f64();
        Ok(w.scale(&(1.0 / w.norm())))
    }

    /// Euclidean k-volume `sqrt(det Gram)/k!`; zero (with a warning) for a
    /// degenerate simplex.
    pub fn volume(&self) -> f64 {
        let w = self.edge_wedge();
        if w.is_zero() {
            log::warn!("volume of a degenerate simplex requested; returning 0");
            return 0.0;
        }
        w.norm() / factorial(self.grade()).to_f64()
    }

    /// `(2ᵏ/α(k)) · volume`.
    pub fn normalized_measure(&self) -> f64 {
        hausdorff_normalization(self.grade()) * self.volume()
    }

    /// `∫_Δ ⟨η; ω⟩ dℋᵏ` for a single copy (no multiplicity), exactly.
    pub fn integrate(&self, form: &DifferentialForm) -> Result<Rational, CurrentError> {
        if form.grade() != self.grade() {
            return Err(CurrentError::GradeMismatch {
                current: self.grade(),
                form: form.grade(),
            });
        }
        if form.ambient() != self.ambient() {
            return Err(CurrentError::VertexDimension {
                expected: form.ambient(),
                got: self.ambient(),
            });
        }
        let w = self.edge_wedge();
        let edges = self.edges();
        let mut acc = Rational::zero();
        for (index, coeff) in form.terms() {
            let weight = w.coeff(index);
            if weight.is_zero() {
                continue;
            }
            let pulled = coeff.compose_affine(&self.vertices[0], &edges);
            acc += weight * pulled.integrate_standard_simplex();
        }
        Ok(acc)
    }
}

/// Finite chain `Σ θ_Δ ⟦Δ⟧` of oriented k-simplices in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCurrent {
    n: usize,
    k: usize,
    simplices: Vec<Simplex>,
}

impl PolyhedralCurrent {
    pub fn empty(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            simplices: Vec::new(),
        }
    }

    pub fn new(n: usize, k: usize, simplices: Vec<Simplex>) -> Result<Self, CurrentError> {
        if k > n {
            return Err(CurrentError::GradeTooLarge { k, n });
        }
        for s in &simplices {
            if s.grade() != k {
                return Err(CurrentError::VertexCount {
                    expected: k + 1,
                    got: s.grade() + 1,
                });
            }
            if s.ambient() != n {
                return Err(CurrentError::VertexDimension {
                    expected: n,
                    got: s.ambient(),
                });
            }
        }
        Ok(Self { n, k, simplices })
    }

    /// Builds from a shared vertex table and `(vertex indices, multiplicity)`.
    pub fn from_mesh(
        n: usize,
        k: usize,
        vertices: &[Vec<Rational>],
        cells: &[(Vec<usize>, u32)],
    ) -> Result<Self, CurrentError> {
        let mut simplices = Vec::with_capacity(cells.len());
        for (ids, m) in cells {
            let mut vs = Vec::with_capacity(ids.len());
            for &i in ids {
                let v = vertices.get(i).ok_or(CurrentError::VertexIndex {
                    index: i,
                    count: vertices.len(),
                })?;
                vs.push(v.clone());
            }
            simplices.push(Simplex::new(vs, *m)?);
        }
        Self::new(n, k, simplices)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Union of chains (multiplicities add in every pairing).
    pub fn plus(&self, other: &Self) -> Result<Self, CurrentError> {
        let mut all = self.simplices.clone();
        all.extend(other.simplices.iter().cloned());
        Self::new(self.n, self.k, all)
    }

    /// Alternating face chain; faces with the same vertex set cancel or
    /// merge exactly. Each face is stored with its vertices in sorted order.
    pub fn boundary(&self) -> Result<Self, CurrentError> {
        if self.k == 0 {
            return Err(CurrentError::NoBoundary);
        }
        let mut net: BTreeMap<Vec<Vec<Rational>>, i64> = BTreeMap::new();
        for s in &self.simplices {
            for skip in 0..=self.k {
                let mut face: Vec<Vec<Rational>> = s
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, v)| v.clone())
                    .collect();
                let parity = sort_parity(&mut face);
                let alt = if skip % 2 == 0 { 1 } else { -1 };
                let signed = alt * parity * i64::from(s.sign) * i64::from(s.multiplicity);
                *net.entry(face).or_insert(0) += signed;
            }
        }
        let mut faces = Vec::new();
        for (verts, m) in net {
            if m == 0 {
                continue;
            }
            let mult = u32::try_from(m.unsigned_abs()).expect("multiplicity fits in u32");
            faces.push(Simplex::with_sign(verts, mult, if m > 0 { 1 } else { -1 })?);
        }
        Self::new(self.n, self.k - 1, faces)
    }

    /// `⟨T; ω⟩ = Σ_Δ θ_Δ ∫_Δ ⟨η_Δ; ω⟩ dℋᵏ`, exactly.
    pub fn pair(&self, form: &DifferentialForm) -> Result<Rational, CurrentError> {
        if form.grade() != self.k {
            return Err(CurrentError::GradeMismatch {
                current: self.k,
                form: form.grade(),
            });
        }
        let mut acc = Rational::zero();
        for s in &self.simplices {
            acc += s.integrate(form)? * Rational::from_i64(i64::from(s.multiplicity));
        }
        Ok(acc)
    }

    /// `Σ θ_Δ vol(Δ)` (Euclidean).
    pub fn mass(&self) -> f64 {
        self.simplices
            .iter()
            .map(|s| f64::from(s.multiplicity) * s.volume())
            .sum()
    }

    /// `|⟨T; dω⟩ − ⟨∂T; ω⟩|` for a form of grade `k − 1`.
    pub fn check_stokes(&self, form: &DifferentialForm) -> Result<Rational, CurrentError> {
        if form.grade() + 1 != self.k {
            return Err(CurrentError::GradeMismatch {
                current: self.k,
                form: form.grade() + 1,
            });
        }
        let lhs = self.pair(&form.d()?)?;
        let rhs = self.boundary()?.pair(form)?;
        Ok((lhs - rhs).abs())
    }

    /// Applies `f` to every vertex (in floating point, converted back
    /// exactly).
    pub fn map_vertices(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self, CurrentError> {
        let mut out = Vec::with_capacity(self.simplices.len());
        for s in &self.simplices {
            let moved: Vec<Vec<f64>> = s.coords.iter().map(|v| f(v)).collect();
            let mut t = Simplex::from_f64(&moved, s.multiplicity)?;
            t.sign = s.sign;
            out.push(t);
        }
        let n = out.first().map(Simplex::ambient).unwrap_or(self.n);
        Self::new(n, self.k, out)
    }

    /// Copy with every multiplicity multiplied by `factor`.
    pub fn scaled_multiplicity(&self, factor: u32) -> Result<Self, CurrentError> {
        let simplices = self
            .simplices
            .iter()
            .map(|s| Simplex {
                multiplicity: s.multiplicity * factor,
                ..s.clone()
            })
            .collect();
        Self::new(self.n, self.k, simplices)
    }
}

/// Sorts in place and returns the sign of the sorting permutation.
fn sort_parity(items: &mut [Vec<Rational>]) -> i64 {
    let mut sign = 1;
    // insertion sort: each adjacent swap flips the sign
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1] > items[j] {
            items.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    sign
}

/// `T` paired with the constant form `dx_I`: exact weighted area of the
/// projection onto the `I` coordinates.
pub fn flux(current: &PolyhedralCurrent, index: &MultiIndex) -> Result<Rational, CurrentError> {
    current.pair(&DifferentialForm::basis(current.ambient(), index.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn q(v: i64) -> Rational {
        ratio(v, 1)
    }

    fn pt(c: &[i64]) -> Vec<Rational> {
        c.iter().map(|&v| q(v)).collect()
    }

    fn form(n: usize, grade: usize, terms: &[(&[usize], &str)]) -> DifferentialForm {
        DifferentialForm::parse_terms(n, grade, terms.iter().map(|(i, s)| (i.to_vec(), *s)))
            .unwrap()
    }

    fn unit_triangle() -> PolyhedralCurrent {
        let s = Simplex::new(vec![pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1])], 1).unwrap();
        PolyhedralCurrent::new(2, 2, vec![s]).unwrap()
    }

    fn unit_square() -> PolyhedralCurrent {
        let v = vec![pt(&[0, 0]), pt(&[1, 0]), pt(&[1, 1]), pt(&[0, 1])];
        PolyhedralCurrent::from_mesh(2, 2, &v, &[(vec![0, 1, 2], 1), (vec![0, 2, 3], 1)]).unwrap()
    }

    #[test]
    fn orientation_examples() {
        let t = Simplex::new(vec![pt(&[0, 0, 0]), pt(&[1, 0, 0]), pt(&[0, 1, 0])], 1).unwrap();
        let o = t.orientation().unwrap();
        assert_eq!(o.coeff(&MultiIndex::new(vec![1, 2], 3).unwrap()), 1.0);
        assert_eq!(o.norm(), 1.0);

        let seg = Simplex::new(vec![pt(&[0, 0]), pt(&[0, 2])], 1).unwrap();
        assert_eq!(seg.orientation().unwrap().components(), vec![0.0, 1.0]);

        let t = Simplex::new(vec![pt(&[0, 0, 0]), pt(&[1, 0, 0]), pt(&[0, 0, 1])], 1).unwrap();
        assert_eq!(
            t.orientation()
                .unwrap()
                .coeff(&MultiIndex::new(vec![1, 3], 3).unwrap()),
            1.0
        );

        let flat = Simplex::new(vec![pt(&[0, 0]), pt(&[1, 1]), pt(&[2, 2])], 1).unwrap();
        assert_eq!(flat.orientation().unwrap_err(), CurrentError::Degenerate);
        assert_eq!(flat.volume(), 0.0);
    }

    #[test]
    fn volume_examples() {
        let t = unit_triangle().simplices()[0].clone();
        let t = &t;
        assert_eq!(t.volume(), 0.5);
        let seg = Simplex::new(vec![pt(&[0, 0]), pt(&[0, 2])], 1).unwrap();
        assert_eq!(seg.volume(), 2.0);
        assert!((t.normalized_measure() - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
        // segments are measured by length: (2/α(1)) = 1
        assert_eq!(seg.normalized_measure(), 2.0);
    }

    #[test]
    fn boundary_of_triangle() {
        let b = unit_triangle().boundary().unwrap();
        assert_eq!(b.simplices().len(), 3);
        // ⟨∂T; x1 dx2⟩ = ∫_T dx1∧dx2 = 1/2
        assert_eq!(b.pair(&form(2, 1, &[(&[2], "x1")])).unwrap(), ratio(1, 2));
    }

    #[test]
    fn shared_edge_cancels() {
        let b = unit_square().boundary().unwrap();
        assert_eq!(b.simplices().len(), 4);
        for s in b.simplices() {
            assert_eq!(s.multiplicity(), 1);
        }
        assert!(b.boundary().unwrap().is_empty());
    }

    #[test]
    fn boundary_of_point_chain_is_rejected() {
        let b = unit_triangle().boundary().unwrap().boundary().unwrap();
        assert!(b.is_empty());
        assert_eq!(b.boundary().unwrap_err(), CurrentError::NoBoundary);
    }

    #[test]
    fn pairing_examples() {
        let t = unit_triangle();
        assert_eq!(t.pair(&form(2, 2, &[(&[1, 2], "1")])).unwrap(), ratio(1, 2));
        assert_eq!(
            t.pair(&form(2, 2, &[(&[1, 2], "x1")])).unwrap(),
            ratio(1, 6)
        );
        let t3 = t.scaled_multiplicity(3).unwrap();
        assert_eq!(
            t3.pair(&form(2, 2, &[(&[1, 2], "x1")])).unwrap(),
            ratio(1, 2)
        );
        assert!(matches!(
            t.pair(&form(2, 1, &[(&[1], "1")])),
            Err(CurrentError::GradeMismatch {
                current: 2,
                form: 1
            })
        ));
    }

    /// Centroid-rule quadrature on a fine subdivision of the triangle.
    #[test]
    fn pairing_matches_numeric_quadrature() {
        let f = |x: f64, y: f64| x * x * y + 3.0 * y.powi(3);
        let m = 400;
        let h = 1.0 / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m - i {
                let (x, y) = (i as f64 * h, j as f64 * h);
                acc += f(x + h / 3.0, y + h / 3.0) * 0.5 * h * h;
                if i + j + 1 < m {
                    acc += f(x + 2.0 * h / 3.0, y + 2.0 * h / 3.0) * 0.5 * h * h;
                }
            }
        }
        let exact = unit_triangle()
            .pair(&form(2, 2, &[(&[1, 2], "x1^2*x2 + 3*x2^3")]))
            .unwrap();
        assert!((acc - exact.to_f64()).abs() < 1e-5);
    }

    #[test]
    fn mass_examples() {
        assert_eq!(unit_triangle().mass(), 0.5);
        assert_eq!(unit_triangle().scaled_multiplicity(2).unwrap().mass(), 1.0);
        assert_eq!(PolyhedralCurrent::empty(3, 2).mass(), 0.0);
    }

    #[test]
    fn stokes_examples() {
        let t = unit_triangle();
        let w = form(2, 1, &[(&[2], "x1")]);
        assert_eq!(t.pair(&w.d().unwrap()).unwrap(), ratio(1, 2));
        assert_eq!(t.boundary().unwrap().pair(&w).unwrap(), ratio(1, 2));
        assert!(t.check_stokes(&w).unwrap().is_zero());

        // closed constant-coefficient form: residual is |⟨∂T; ω⟩| = 0 for ω = dx1
        let c = form(2, 1, &[(&[1], "1")]);
        assert!(t.check_stokes(&c).unwrap().is_zero());

        let sq = unit_square();
        assert!(sq
            .check_stokes(&form(2, 1, &[(&[2], "1/2*x1^2")]))
            .unwrap()
            .is_zero());
    }

    /// Line-integral oracle for the triangle edges, parametrised by hand.
    #[test]
    fn boundary_pairing_matches_edge_integrals() {
        // ∮ x1 dx2 over (0,0)→(1,0)→(0,1)→(0,0): only the hypotenuse
        // contributes, ∫_0^1 (1−t) dt = 1/2.
        let b = unit_triangle().boundary().unwrap();
        assert_eq!(b.pair(&form(2, 1, &[(&[2], "x1")])).unwrap(), ratio(1, 2));
        // ∮ x2^2 dx1: bottom edge 0, hypotenuse ∫ t² (−1) dt = −1/3, left 0
        assert_eq!(
            b.pair(&form(2, 1, &[(&[1], "x2^2")])).unwrap(),
            ratio(-1, 3)
        );
    }

    #[test]
    fn transposition_flips_sign() {
        let t = unit_triangle().simplices()[0].clone();
        let t = &t;
        let s = t.transposed(1, 2);
        assert_eq!(
            s.orientation().unwrap(),
            t.orientation().unwrap().scale(&-1.0)
        );
        let w = form(2, 2, &[(&[1, 2], "x1 + 3*x2^2")]);
        assert_eq!(s.integrate(&w).unwrap(), -t.integrate(&w).unwrap());
        assert_eq!(
            t.reversed().integrate(&w).unwrap(),
            -t.integrate(&w).unwrap()
        );
    }

    #[test]
    fn flux_is_projected_area() {
        let v = vec![pt(&[0, 0, 0]), pt(&[2, 0, 1]), pt(&[0, 3, 5])];
        let c = PolyhedralCurrent::from_mesh(3, 2, &v, &[(vec![0, 1, 2], 1)]).unwrap();
        assert_eq!(
            flux(&c, &MultiIndex::new(vec![1, 2], 3).unwrap()).unwrap(),
            q(3)
        );
    }

    #[test]
    fn mesh_index_validation() {
        let v = vec![pt(&[0, 0])];
        assert!(matches!(
            PolyhedralCurrent::from_mesh(2, 1, &v, &[(vec![0, 3], 1)]),
            Err(CurrentError::VertexIndex { index: 3, count: 1 })
        ));
        assert!(matches!(
            PolyhedralCurrent::from_mesh(2, 2, &v, &[(vec![0, 0], 1)]),
            Err(CurrentError::VertexCount {
                expected: 3,
                got: 2
            })
        ));
    }
}
