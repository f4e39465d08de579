use nalgebra::{Rotation3, Vector3};
use num_traits::Zero;
use proptest::prelude::*;

use tangency_core::exterior::MultiIndex;
use tangency_core::scalar::ratio;
use tangency_core::{DifferentialForm, PolyExpr, PolyhedralCurrent, Rational, Simplex};

fn coordinate() -> impl Strategy<Value = Rational> {
    (-8i64..=8, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn simplex(n: usize, k: usize) -> impl Strategy<Value = Option<Simplex>> {
    (
        proptest::collection::vec(proptest::collection::vec(coordinate(), n), k + 1),
        1u32..=3,
    )
        .prop_map(|(vertices, m)| {
            Simplex::new(vertices, m)
                .ok()
                .filter(|s| !s.is_degenerate())
        })
}

/// A chain of up to four simplices of grade `k` in ℝⁿ.
fn chain() -> impl Strategy<Value = PolyhedralCurrent> {
    (1usize..=3)
        .prop_flat_map(|k| (Just(k), k..=4))
        .prop_flat_map(|(k, n)| {
            (
                Just(n),
                Just(k),
                proptest::collection::vec(simplex(n, k), 1..=4),
            )
        })
        .prop_filter_map("all simplices degenerate", |(n, k, simplices)| {
            let simplices: Vec<Simplex> = simplices.into_iter().flatten().collect();
            (!simplices.is_empty()).then(|| PolyhedralCurrent::new(n, k, simplices).unwrap())
        })
}

fn poly(n: usize) -> impl Strategy<Value = PolyExpr> {
    let term = (proptest::collection::vec(0u32..=3, n), coordinate());
    proptest::collection::vec(term, 0..4).prop_map(move |t| {
        PolyExpr::from_terms(n, t.into_iter().filter(|(e, _)| e.iter().sum::<u32>() <= 3))
    })
}

fn chain_and_form() -> impl Strategy<Value = (PolyhedralCurrent, DifferentialForm)> {
    chain().prop_flat_map(|t| {
        let (n, l) = (t.ambient(), t.grade() - 1);
        let count = MultiIndex::all(n, l).count();
        (Just(t), proptest::collection::vec(poly(n), count)).prop_map(move |(t, cs)| {
            let form = DifferentialForm::from_terms(n, l, MultiIndex::all(n, l).zip(cs)).unwrap();
            (t, form)
        })
    })
}

fn rotation() -> impl Strategy<Value = (Rotation3<f64>, Vector3<f64>)> {
    (
        proptest::array::uniform3(-1.0f64..1.0),
        -3.0f64..3.0,
        proptest::array::uniform3(-5.0f64..5.0),
    )
        .prop_filter("axis too short", |(a, _, _)| {
            a.iter().map(|v| v * v).sum::<f64>() > 1e-2
        })
        .prop_map(|(a, angle, t)| {
            let axis = nalgebra::Unit::new_normalize(Vector3::from(a));
            (Rotation3::from_axis_angle(&axis, angle), Vector3::from(t))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn stokes_holds_exactly((t, form) in chain_and_form()) {
        prop_assert!(t.check_stokes(&form).unwrap().is_zero());
    }

    #[test]
    fn boundary_of_boundary_is_empty(t in chain()) {
        prop_assume!(t.grade() >= 2);
        prop_assert!(t.boundary().unwrap().boundary().unwrap().is_empty());
    }

    #[test]
    fn transposition_flips_orientation_and_pairings((t, form) in chain_and_form(), i in 0usize..4, j in 0usize..4) {
        let s = &t.simplices()[0];
        let (i, j) = (i % (s.grade() + 1), j % (s.grade() + 1));
        prop_assume!(i != j);
        let u = s.transposed(i, j);
        let a = s.orientation().unwrap();
        let b = u.orientation().unwrap();
        prop_assert!(a.add(&b).unwrap().norm() < 1e-12);
        let w = form.d().unwrap();
        prop_assert_eq!(s.integrate(&w).unwrap(), -u.integrate(&w).unwrap());
    }

    #[test]
    fn mass_is_invariant_under_rigid_motions(t in chain(), (rot, shift) in rotation()) {
        prop_assume!(t.ambient() == 3);
        let moved = t
            .map_vertices(|v| {
                let y = rot * Vector3::new(v[0], v[1], v[2]) + shift;
                vec![y.x, y.y, y.z]
            })
            .unwrap();
        prop_assert!((moved.mass() - t.mass()).abs() <= 1e-9 * t.mass().max(1.0));
    }
}
