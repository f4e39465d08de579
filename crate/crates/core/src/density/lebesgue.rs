//! The pointwise value `τ(x) = lim ∫_{B_r(x)} θη dℋᵏ / ℋᵏ(R ∩ B_r(x))` of a
//! polyhedral current, from the tangent cones of the simplices at `x`.

use crate::currents::{PolyhedralCurrent, Simplex};
use crate::exterior::KVector;

use super::ball::{ball_mass, BallOptions, Tolerance};
use super::geometry::{barycentric, dist, distance_to_simplex};
use super::mask::Full;

const ON_TOL: f64 = 1e-12;

/// `lim ℋᵏ(Δ ∩ B_r(x)) / (α(k) rᵏ)`: the share of a k-ball around `x`
/// covered by the simplex. Closed form for `k ≤ 2` (1 inside, 1/2 on a
/// facet, the vertex angle over 2π at a triangle corner), numeric above.
pub fn cone_fraction(simplex: &Simplex, x: &[f64]) -> f64 {
    let coords = simplex.coords();
    let verts: Vec<&[f64]> = coords.iter().map(Vec::as_slice).collect();
    let scale = verts
        .iter()
        .flat_map(|v| v.iter())
        .fold(1.0_f64, |m, c| m.max(c.abs()));
    if distance_to_simplex(x, &verts) > ON_TOL * scale {
        return 0.0;
    }
    let k = simplex.grade();
    if k == 0 {
        return 1.0;
    }
    let Some(lambda) = barycentric(x, &verts) else {
        return 0.0;
    };
    let zeros: Vec<usize> = (0..=k).filter(|&i| lambda[i].abs() <= ON_TOL).collect();
    match (k, zeros.len()) {
        (_, 0) => 1.0,
        (_, 1) => 0.5,
        (2, 2) => {
            let apex = (0..=2)
                .find(|i| !zeros.contains(i))
                .expect("one vertex remains");
            let a: Vec<f64> = verts[zeros[0]]
                .iter()
                .zip(verts[apex])
                .map(|(p, q)| p - q)
                .collect();
            let b: Vec<f64> = verts[zeros[1]]
                .iter()
                .zip(verts[apex])
                .map(|(p, q)| p - q)
                .collect();
            let dot: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
            let norms = dist(&a, &vec![0.0; a.len()]) * dist(&b, &vec![0.0; b.len()]);
            (dot / norms).clamp(-1.0, 1.0).acos() / (2.0 * std::f64::consts::PI)
        }
        _ => numeric_cone_fraction(simplex, &verts, &lambda, x),
    }
}

fn numeric_cone_fraction(simplex: &Simplex, verts: &[&[f64]], lambda: &[f64], x: &[f64]) -> f64 {
    // a ball smaller than the distance to every facet avoiding x sees only the cone
    let mut reach = f64::INFINITY;
    for (i, &l) in lambda.iter().enumerate() {
        if l > ON_TOL {
            let facet: Vec<&[f64]> = (0..verts.len())
                .filter(|&j| j != i)
                .map(|j| verts[j])
                .collect();
            reach = reach.min(distance_to_simplex(x, &facet));
        }
    }
    let r = 0.5 * reach;
    let single = PolyhedralCurrent::new(
        x.len(),
        simplex.grade(),
        vec![Simplex::from_f64(simplex.coords(), 1).expect("finite")],
    )
    .expect("consistent grade");
    let opts = BallOptions {
        tol: Tolerance::Relative(1e-4),
        ..BallOptions::default()
    };
    ball_mass(&single, &Full, x, r, &opts).mid() / (2.0 * r).powi(simplex.grade() as i32)
}

/// `τ(x)`: cone-weighted average of `θ_Δ η_Δ` over the simplices through
/// `x`, normalized by their total cone share. Zero off the carrier.
/// Overlapping simplices are each counted in the normalization.
pub fn lebesgue_value(current: &PolyhedralCurrent, x: &[f64]) -> KVector<f64> {
    let mut acc = KVector::<f64>::zero(current.ambient(), current.grade());
    let mut total = 0.0;
    for s in current.simplices() {
        let w = cone_fraction(s, x);
        if w == 0.0 {
            continue;
        }
        let Ok(eta) = s.orientation() else { continue };
        acc = acc
            .add(&eta.scale(&(w * f64::from(s.multiplicity()))))
            .expect("same grade");
        total += w;
    }
    if total == 0.0 {
        acc
    } else {
        acc.scale(&(1.0 / total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::MultiIndex;
    use crate::scalar::ratio;

    fn tri(pts: [[i64; 3]; 3]) -> Simplex {
        Simplex::new(
            pts.iter()
                .map(|p| p.iter().map(|&c| ratio(c, 1)).collect())
                .collect(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn cone_fractions() {
        let t = tri([[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
        assert_eq!(cone_fraction(&t, &[0.2, 0.2, 0.0]), 1.0);
        assert_eq!(cone_fraction(&t, &[0.5, 0.0, 0.0]), 0.5);
        assert!((cone_fraction(&t, &[0.0, 0.0, 0.0]) - 0.25).abs() < 1e-15);
        assert!((cone_fraction(&t, &[1.0, 0.0, 0.0]) - 0.125).abs() < 1e-15);
        assert_eq!(cone_fraction(&t, &[0.2, 0.2, 0.1]), 0.0);
    }

    #[test]
    fn tetrahedron_corner_is_one_eighth() {
        let s = Simplex::new(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
                .iter()
                .map(|p| p.iter().map(|&c| ratio(c, 1)).collect())
                .collect(),
            1,
        )
        .unwrap();
        assert!((cone_fraction(&s, &[0.0; 3]) - 0.125).abs() < 2e-3);
        assert_eq!(cone_fraction(&s, &[0.1, 0.1, 0.1]), 1.0);
    }

    #[test]
    fn value_on_a_flat_fan_is_the_common_orientation() {
        let a = tri([[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
        let b = tri([[0, 0, 0], [0, 1, 0], [-1, 0, 0]]);
        let t = PolyhedralCurrent::new(3, 2, vec![a, b]).unwrap();
        let tau = lebesgue_value(&t, &[0.0, 0.0, 0.0]);
        assert!((tau.coeff(&MultiIndex::new(vec![1, 2], 3).unwrap()) - 1.0).abs() < 1e-15);
        assert!(lebesgue_value(&t, &[0.0, 0.0, 1.0]).is_zero());
    }
}
