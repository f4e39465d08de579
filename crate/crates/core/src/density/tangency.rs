//! Partition of a current's carrier into certified tangent, certified
//! non-tangent and undecided parts.

use serde::Serialize;
use thiserror::Error;

use crate::currents::PolyhedralCurrent;
use crate::forms::Distribution;

use super::geometry::Cell;
use super::mask::{CellView, Mask, Membership, TangencyMask};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TangencyError {
    #[error(
        "ambient dimension mismatch: current in R^{current}, distribution in R^{distribution}"
    )]
    DimensionMismatch { current: usize, distribution: usize },
    #[error("current grade {grade} exceeds distribution dimension {dim}")]
    GradeTooLarge { grade: usize, dim: usize },
}

/// Weighted normalized measure of each part of one simplex.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RegionMeasures {
    pub tangent: f64,
    pub non_tangent: f64,
    pub undecided: f64,
}

#[derive(Debug, Clone)]
pub struct TangencyPartition {
    pub mask: TangencyMask,
    pub regions: Vec<RegionMeasures>,
}

impl TangencyPartition {
    pub fn totals(&self) -> RegionMeasures {
        self.regions
            .iter()
            .fold(RegionMeasures::default(), |a, r| RegionMeasures {
                tangent: a.tangent + r.tangent,
                non_tangent: a.non_tangent + r.non_tangent,
                undecided: a.undecided + r.undecided,
            })
    }
}

/// Builds the tangency mask `{defect < tol}` and partitions each simplex
/// by uniform bisection to `depth` levels.
pub fn classify_tangency(
    current: &PolyhedralCurrent,
    distribution: &Distribution,
    tol: f64,
    depth: u32,
) -> Result<TangencyPartition, TangencyError> {
    if current.ambient() != distribution.ambient() {
        return Err(TangencyError::DimensionMismatch {
            current: current.ambient(),
            distribution: distribution.ambient(),
        });
    }
    if current.grade() > distribution.dim() {
        return Err(TangencyError::GradeTooLarge {
            grade: current.grade(),
            dim: distribution.dim(),
        });
    }
    let mask = TangencyMask::new(current, distribution, tol);
    let mut regions = Vec::with_capacity(current.simplices().len());
    for (i, s) in current.simplices().iter().enumerate() {
        let weight = f64::from(s.multiplicity()) * s.normalized_measure();
        let mut out = RegionMeasures::default();
        let mut stack = vec![(Cell::from_vertices(i, s.coords(), weight), 0u32)];
        while let Some((cell, level)) = stack.pop() {
            match mask.classify(&CellView::of(&cell)) {
                Membership::In => out.tangent += cell.measure,
                Membership::Out => out.non_tangent += cell.measure,
                Membership::Unknown if level >= depth || current.grade() == 0 => {
                    out.undecided += cell.measure
                }
                Membership::Unknown => {
                    let (a, b) = cell.bisect();
                    stack.push((b, level + 1));
                    stack.push((a, level + 1));
                }
            }
        }
        regions.push(out);
    }
    Ok(TangencyPartition { mask, regions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::DifferentialForm;
    use crate::scalar::ratio;

    fn square() -> PolyhedralCurrent {
        let q = |a: i64, b: i64| vec![ratio(a, 1), ratio(b, 1), ratio(0, 1)];
        let v = vec![q(-1, -1), q(1, -1), q(1, 1), q(-1, 1)];
        PolyhedralCurrent::from_mesh(3, 2, &v, &[(vec![0, 1, 2], 1), (vec![0, 2, 3], 1)]).unwrap()
    }

    fn distribution(terms: &[(&[usize], &str)]) -> Distribution {
        let w = DifferentialForm::parse_terms(3, 1, terms.iter().map(|(i, s)| (i.to_vec(), *s)))
            .unwrap();
        Distribution::new(3, 2, vec![w]).unwrap()
    }

    #[test]
    fn horizontal_square_is_fully_tangent() {
        let p = classify_tangency(&square(), &distribution(&[(&[3], "1")]), 1e-9, 8).unwrap();
        let t = p.totals();
        assert_eq!(t.non_tangent + t.undecided, 0.0);
        assert!((t.tangent - 16.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn contact_tangent_region_is_a_thin_strip() {
        let tol = 0.05;
        let p = classify_tangency(
            &square(),
            &distribution(&[(&[3], "1"), (&[1], "-x2")]),
            tol,
            20,
        )
        .unwrap();
        let t = p.totals();
        // the strip |x2| < tol/sqrt(1 - tol²) has area ≈ 2·2·tol
        let strip = 4.0 * tol / (1.0 - tol * tol).sqrt() * 4.0 / std::f64::consts::PI;
        assert!(
            t.tangent <= strip && strip <= t.tangent + t.undecided,
            "{t:?}"
        );
        assert!(t.undecided < 0.25 * strip);
    }

    #[test]
    fn dimension_checks() {
        let d = distribution(&[(&[3], "1")]);
        let q = |a: i64| vec![ratio(a, 1); 3];
        let v = vec![
            q(0),
            vec![ratio(1, 1), ratio(0, 1), ratio(0, 1)],
            vec![ratio(0, 1), ratio(1, 1), ratio(0, 1)],
            vec![ratio(0, 1), ratio(0, 1), ratio(1, 1)],
        ];
        let solid = PolyhedralCurrent::from_mesh(3, 3, &v, &[(vec![0, 1, 2, 3], 1)]).unwrap();
        assert_eq!(
            classify_tangency(&solid, &d, 1e-9, 4).unwrap_err(),
            TangencyError::GradeTooLarge { grade: 3, dim: 2 }
        );
    }
}
