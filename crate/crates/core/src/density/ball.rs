//! Interval estimates of a current's weighted measure inside a ball.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::currents::PolyhedralCurrent;

use super::geometry::{dist, distance_to_simplex, Cell};
use super::mask::{CellView, Mask, Membership};

/// Default subdivision depth, in halvings of the ball diameter.
pub const DEFAULT_DEPTH: u32 = 12;
/// Default relative tolerance, as a fraction of `(2r)ᵏ`.
pub const DEFAULT_REL_TOL: f64 = 1e-3;
/// Default cap on cell bisections per query.
pub const DEFAULT_MAX_SPLITS: usize = 200_000;

/// Target width of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Fraction of `(2r)ᵏ`, the measure of a flat disk of radius `r`.
    Relative(f64),
    Absolute(f64),
}

impl Tolerance {
    pub fn resolve(self, radius: f64, grade: usize) -> f64 {
        match self {
            Tolerance::Relative(f) => f * (2.0 * radius).powi(grade as i32),
            Tolerance::Absolute(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallOptions {
    pub tol: Tolerance,
    /// Cells with diameter below `2r · 2^{-depth}` are not split further.
    pub depth: u32,
    pub max_splits: usize,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::Relative(DEFAULT_REL_TOL),
            depth: DEFAULT_DEPTH,
            max_splits: DEFAULT_MAX_SPLITS,
        }
    }
}

/// `lower ≤ Σ θ · normalized_measure(Δ ∩ B_r(x) ∩ mask) ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMassEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Whether `upper − lower` met the requested tolerance.
    pub converged: bool,
}

impl BallMassEstimate {
    pub const ZERO: Self = Self {
        lower: 0.0,
        upper: 0.0,
        converged: true,
    };

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn classify_ball(view: &CellView<'_>, x: &[f64], r: f64) -> Membership {
    let dc = dist(&view.centroid, x);
    if dc + view.radius <= r {
        return Membership::In;
    }
    if dc - view.radius >= r {
        return Membership::Out;
    }
    if view.vertices().all(|v| dist(v, x) <= r) {
        return Membership::In;
    }
    let vertices: Vec<&[f64]> = view.vertices().collect();
    if distance_to_simplex(x, &vertices) >= r {
        return Membership::Out;
    }
    Membership::Unknown
}

struct Pending {
    cell: Cell,
    seq: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // largest measure first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        self.cell
            .measure
            .total_cmp(&other.cell.measure)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Interval for the weighted, diameter-normalized measure of the part of
/// `current` inside `B_r(x)` and inside `mask`.
///
/// Cells are split at their longest edge, largest first. A cell counts
/// fully once both the ball and the mask certify it inside, and is dropped
/// once either certifies it outside; the rest make up the interval width.
pub fn ball_mass(
    current: &PolyhedralCurrent,
    mask: &dyn Mask,
    x: &[f64],
    r: f64,
    opts: &BallOptions,
) -> BallMassEstimate {
    assert!(r > 0.0, "ball radius must be positive");
    let tol = opts.tol.resolve(r, current.grade());
    let min_diameter = 2.0 * r * 0.5f64.powi(opts.depth as i32);
    let mut lower = 0.0;
    let mut heap = BinaryHeap::new();
    let mut frozen = 0.0;
    let mut seq = 0u64;

    let admit = |cell: Cell, heap: &mut BinaryHeap<Pending>, lower: &mut f64, seq: &mut u64| {
        if cell.measure <= 0.0 {
            return;
        }
        let view = CellView::of(&cell);
        let state = classify_ball(&view, x, r);
        if state == Membership::Out {
            return;
        }
        match state.and(mask.classify(&view)) {
            Membership::In => *lower += cell.measure,
            Membership::Out => {}
            Membership::Unknown => {
                *seq += 1;
                heap.push(Pending { cell, seq: *seq });
            }
        }
    };

    for (i, s) in current.simplices().iter().enumerate() {
        let weight = f64::from(s.multiplicity()) * s.normalized_measure();
        admit(
            Cell::from_vertices(i, s.coords(), weight),
            &mut heap,
            &mut lower,
            &mut seq,
        );
    }

    let mut pending: f64 = heap.iter().map(|p| p.cell.measure).sum();
    let mut splits = 0;
    while pending + frozen > tol && splits < opts.max_splits {
        let Some(Pending { cell, .. }) = heap.pop() else {
            break;
        };
        pending -= cell.measure;
        if cell.longest_edge().2 <= min_diameter {
            frozen += cell.measure;
            continue;
        }
        splits += 1;
        let (a, b) = cell.bisect();
        for child in [a, b] {
            let before = heap.len();
            let m = child.measure;
            admit(child, &mut heap, &mut lower, &mut seq);
            if heap.len() > before {
                pending += m;
            }
        }
    }
    // recompute in a fixed order to avoid drift from the running sum
    let mut rest: Vec<f64> = heap.into_iter().map(|p| p.cell.measure).collect();
    rest.sort_by(f64::total_cmp);
    let slack = rest.iter().sum::<f64>() + frozen;
    BallMassEstimate {
        lower,
        upper: lower + slack,
        converged: slack <= tol,
    }
}

/// Monte-Carlo estimate of the same quantity with its standard error:
/// simplices are drawn in proportion to weight, points uniformly within.
pub fn monte_carlo_ball_mass<R: Rng>(
    current: &PolyhedralCurrent,
    mask: &dyn Mask,
    x: &[f64],
    r: f64,
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let weights: Vec<f64> = current
        .simplices()
        .iter()
        .map(|s| f64::from(s.multiplicity()) * s.normalized_measure())
        .collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 || samples == 0 {
        return (0.0, 0.0);
    }
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let mut hits = 0usize;
    let mut point = vec![0.0; current.ambient()];
    for _ in 0..samples {
        let u = rng.gen::<f64>() * total;
        let i = cumulative
            .partition_point(|&c| c <= u)
            .min(weights.len() - 1);
        let verts = current.simplices()[i].coords();
        // uniform barycentrics from normalized exponentials
        let bary: Vec<f64> = verts
            .iter()
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        let s: f64 = bary.iter().sum();
        point.iter_mut().for_each(|p| *p = 0.0);
        for (b, v) in bary.iter().zip(verts) {
            for (p, c) in point.iter_mut().zip(v) {
                *p += b / s * c;
            }
        }
        if dist(&point, x) < r && mask.contains(i, &point) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (total * p, total * (p * (1.0 - p) / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::mask::{Full, HalfSpace};
    use crate::scalar::ratio;
    use rand::SeedableRng;

    fn flat_square(half: i64) -> PolyhedralCurrent {
        let q = |a: i64, b: i64| vec![ratio(a, 1), ratio(b, 1), ratio(0, 1)];
        let v = vec![
            q(-half, -half),
            q(half, -half),
            q(half, half),
            q(-half, half),
        ];
        PolyhedralCurrent::from_mesh(3, 2, &v, &[(vec![0, 1, 2], 1), (vec![0, 2, 3], 1)]).unwrap()
    }

    #[test]
    fn flat_disk_measure() {
        let t = flat_square(1);
        let e = ball_mass(&t, &Full, &[0.0, 0.0, 0.0], 0.1, &BallOptions::default());
        assert!(e.lower <= 0.04 && 0.04 <= e.upper, "{e:?}");
        assert!(e.width() <= 4e-5 + 1e-18);
        assert!(e.converged);
    }

    #[test]
    fn far_ball_is_empty() {
        let t = flat_square(1);
        assert_eq!(
            ball_mass(&t, &Full, &[0.0, 0.0, 5.0], 1.0, &BallOptions::default()),
            BallMassEstimate::ZERO
        );
    }

    #[test]
    fn halving_radius_quarters_mass() {
        let t = flat_square(1);
        let o = BallOptions::default();
        let a = ball_mass(&t, &Full, &[0.1, 0.2, 0.0], 0.2, &o);
        let b = ball_mass(&t, &Full, &[0.1, 0.2, 0.0], 0.1, &o);
        let (lo, hi) = (a.lower / b.upper, a.upper / b.lower);
        assert!(lo >= 3.9 && hi <= 4.1, "{lo} {hi}");
    }

    #[test]
    fn half_space_cuts_disk_in_half() {
        let t = flat_square(1);
        let h = HalfSpace {
            normal: vec![1.0, 0.0, 0.0],
            offset: 0.0,
        };
        let e = ball_mass(&t, &h, &[0.0, 0.0, 0.0], 0.5, &BallOptions::default());
        assert!(e.lower <= 0.5 && 0.5 <= e.upper, "{e:?}");
    }

    #[test]
    fn depth_limit_is_reported() {
        let t = flat_square(1);
        let o = BallOptions {
            tol: Tolerance::Absolute(1e-12),
            depth: 4,
            ..BallOptions::default()
        };
        let e = ball_mass(&t, &Full, &[0.0, 0.0, 0.0], 0.5, &o);
        assert!(!e.converged);
        assert!(e.lower <= 1.0 && 1.0 <= e.upper);
    }

    #[test]
    fn monte_carlo_agrees_on_disk() {
        let t = flat_square(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (est, sigma) =
            monte_carlo_ball_mass(&t, &Full, &[0.0, 0.0, 0.0], 0.5, 200_000, &mut rng);
        assert!((est - 1.0).abs() < 4.0 * sigma, "{est} ± {sigma}");
    }
}
