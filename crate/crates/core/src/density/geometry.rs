//! Small dense geometry on simplices stored as flat coordinate arrays.

use nalgebra::{DMatrix, DVector};

/// A sub-simplex of one of the current's simplices, with its share of that
/// simplex's weighted measure.
#[derive(Debug, Clone)]
pub(crate) struct Cell {
    pub simplex: usize,
    pub n: usize,
    /// `(k + 1) · n` coordinates, vertex-major.
    pub coords: Vec<f64>,
    pub measure: f64,
}

impl Cell {
    pub fn from_vertices(simplex: usize, vertices: &[Vec<f64>], measure: f64) -> Self {
        let n = vertices[0].len();
        let coords = vertices.iter().flatten().copied().collect();
        Self {
            simplex,
            n,
            coords,
            measure,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn centroid(&self) -> Vec<f64> {
        let m = self.vertex_count() as f64;
        let mut c = vec![0.0; self.n];
        for i in 0..self.vertex_count() {
            for (a, b) in c.iter_mut().zip(self.vertex(i)) {
                *a += b;
            }
        }
        c.iter_mut().for_each(|a| *a /= m);
        c
    }

    /// Centroid and the largest centroid-to-vertex distance.
    pub fn bounding_ball(&self) -> (Vec<f64>, f64) {
        let c = self.centroid();
        let r = (0..self.vertex_count())
            .map(|i| dist(&c, self.vertex(i)))
            .fold(0.0, f64::max);
        (c, r)
    }

    /// Longest edge `(i, j, length)`.
    pub fn longest_edge(&self) -> (usize, usize, f64) {
        let m = self.vertex_count();
        let mut best = (0, 0, 0.0);
        for i in 0..m {
            for j in i + 1..m {
                let d = dist(self.vertex(i), self.vertex(j));
                if d > best.2 {
                    best = (i, j, d);
                }
            }
        }
        best
    }

    /// Splits at the midpoint of the longest edge into two halves of equal
    /// measure.
    pub fn bisect(&self) -> (Cell, Cell) {
        let (i, j, _) = self.longest_edge();
        let mid: Vec<f64> = self
            .vertex(i)
            .iter()
            .zip(self.vertex(j))
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mut a = self.clone();
        let mut b = self.clone();
        a.coords[j * self.n..(j + 1) * self.n].copy_from_slice(&mid);
        b.coords[i * self.n..(i + 1) * self.n].copy_from_slice(&mid);
        a.measure *= 0.5;
        b.measure *= 0.5;
        (a, b)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Barycentric coordinates of the orthogonal projection of `x` onto the
/// affine hull of `vertices`; `None` when the vertices are affinely
/// dependent.
pub fn barycentric(x: &[f64], vertices: &[&[f64]]) -> Option<Vec<f64>> {
    let m = vertices.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let n = x.len();
    let v0 = vertices[0];
    let e = DMatrix::from_fn(n, m - 1, |r, c| vertices[c + 1][r] - v0[r]);
    let rhs = DVector::from_fn(n, |r, _| x[r] - v0[r]);
    let gram = e.transpose() * &e;
    let lambda = gram.cholesky()?.solve(&(e.transpose() * rhs));
    let mut out = Vec::with_capacity(m);
    out.push(1.0 - lambda.sum());
    out.extend(lambda.iter());
    Some(out)
}

/// Euclidean distance from `x` to the closed simplex with the given
/// vertices. Segments and triangles use closed-form closest points; larger
/// simplices project onto every face and keep projections that land inside.
pub fn distance_to_simplex(x: &[f64], vertices: &[&[f64]]) -> f64 {
    match vertices.len() {
        1 => dist(x, vertices[0]),
        2 => segment_distance(x, vertices[0], vertices[1]),
        3 => triangle_distance(x, vertices[0], vertices[1], vertices[2]),
        _ => face_search_distance(x, vertices),
    }
}

fn dot_diff(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    // ⟨a − b, c − d⟩
    a.iter()
        .zip(b)
        .zip(c.iter().zip(d))
        .map(|((a, b), (c, d))| (a - b) * (c - d))
        .sum()
}

fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let len2 = dot_diff(b, a, b, a);
    let t = if len2 > 0.0 {
        (dot_diff(x, a, b, a) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    x.iter()
        .zip(a.iter().zip(b))
        .map(|(x, (a, b))| (x - (a + t * (b - a))).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Closest point on a triangle by Voronoi-region tests on dot products,
/// valid in any ambient dimension.
fn triangle_distance(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let d1 = dot_diff(b, a, p, a);
    let d2 = dot_diff(c, a, p, a);
    if d1 <= 0.0 && d2 <= 0.0 {
        return dist(p, a);
    }
    let d3 = dot_diff(b, a, p, b);
    let d4 = dot_diff(c, a, p, b);
    if d3 >= 0.0 && d4 <= d3 {
        return dist(p, b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return segment_distance(p, a, b);
    }
    let d5 = dot_diff(b, a, p, c);
    let d6 = dot_diff(c, a, p, c);
    if d6 >= 0.0 && d5 <= d6 {
        return dist(p, c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return segment_distance(p, a, c);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return segment_distance(p, b, c);
    }
    let denom = va + vb + vc;
    if denom <= 0.0 {
        // degenerate triangle: fall back to its edges
        return segment_distance(p, a, b)
            .min(segment_distance(p, a, c))
            .min(segment_distance(p, b, c));
    }
    let (v, w) = (vb / denom, vc / denom);
    p.iter()
        .zip(a.iter().zip(b.iter().zip(c)))
        .map(|(p, (a, (b, c)))| (p - (a + v * (b - a) + w * (c - a))).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn face_search_distance(x: &[f64], vertices: &[&[f64]]) -> f64 {
    let m = vertices.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << m) {
        let face: Vec<&[f64]> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| vertices[i])
            .collect();
        let Some(lambda) = barycentric(x, &face) else {
            continue;
        };
        if lambda.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let mut p = vec![0.0; x.len()];
        for (l, v) in lambda.iter().zip(&face) {
            for (a, b) in p.iter_mut().zip(*v) {
                *a += l * b;
            }
        }
        best = best.min(dist(x, &p));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let tri: [&[f64]; 3] = [&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]];
        assert_eq!(distance_to_simplex(&[0.2, 0.2, 3.0], &tri), 3.0);
        assert!((distance_to_simplex(&[2.0, 0.0, 0.0], &tri) - 1.0).abs() < 1e-15);
        let d = distance_to_simplex(&[1.0, 1.0, 0.0], &tri);
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((distance_to_simplex(&[-1.0, -1.0, 0.0], &tri) - 2f64.sqrt()).abs() < 1e-15);
    }

    /// Brute-force oracle: minimum over a dense barycentric grid.
    #[test]
    fn distance_matches_grid_search() {
        let tri: [&[f64]; 3] = [&[0.1, -0.3, 0.4], &[1.2, 0.5, -0.2], &[-0.4, 0.9, 0.7]];
        let m = 300;
        for x in [[0.5, 2.0, -1.0], [0.3, 0.3, 0.3], [-2.0, 0.0, 1.0]] {
            let mut brute = f64::INFINITY;
            for i in 0..=m {
                for j in 0..=m - i {
                    let (a, b) = (i as f64 / m as f64, j as f64 / m as f64);
                    let c = 1.0 - a - b;
                    let p: Vec<f64> = (0..3)
                        .map(|r| a * tri[0][r] + b * tri[1][r] + c * tri[2][r])
                        .collect();
                    brute = brute.min(dist(&x, &p));
                }
            }
            let d = distance_to_simplex(&x, &tri);
            assert!(d <= brute + 1e-12 && brute - d < 1e-2, "{d} vs {brute}");
        }
    }

    #[test]
    fn closed_forms_match_face_search() {
        let tri: [&[f64]; 3] = [
            &[0.1, -0.3, 0.4, 0.0],
            &[1.2, 0.5, -0.2, 1.0],
            &[-0.4, 0.9, 0.7, -0.5],
        ];
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..2000 {
            let x: Vec<f64> = (0..4).map(|_| next()).collect();
            let fast = distance_to_simplex(&x, &tri);
            let slow = face_search_distance(&x, &tri);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
            let seg = [tri[0], tri[2]];
            assert!((distance_to_simplex(&x, &seg) - face_search_distance(&x, &seg)).abs() < 1e-12);
        }
    }

    #[test]
    fn bisection_halves_measure_and_shrinks() {
        let c = Cell::from_vertices(0, &[vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 1.0]], 2.0);
        let (a, b) = c.bisect();
        assert_eq!(a.measure + b.measure, 2.0);
        assert_eq!(a.vertex(1), &[2.0, 0.0]);
        assert_eq!(b.vertex(0), &[2.0, 0.0]);
        assert!(a.longest_edge().2 < c.longest_edge().2);
    }
}
