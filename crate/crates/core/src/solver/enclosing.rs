//! Smallest enclosing ball of a finite point set in `R³`.

use nalgebra::{Matrix3, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnclosingBall {
    pub center: [f64; 3],
    pub radius: f64,
}

impl EnclosingBall {
    fn contains(&self, p: &Vector3<f64>) -> bool {
        let c = Vector3::from(self.center);
        (p - c).norm() <= self.radius * (1.0 + 1e-12) + 1e-14
    }

    fn new(center: Vector3<f64>, radius: f64) -> Self {
        Self {
            center: center.into(),
            radius,
        }
    }

    fn point(p: &Vector3<f64>) -> Self {
        Self::new(*p, 0.0)
    }

    fn diameter(a: &Vector3<f64>, b: &Vector3<f64>) -> Self {
        Self::new((a + b) / 2.0, (a - b).norm() / 2.0)
    }

    /// Smallest ball with `a`, `b`, `c` on its boundary, or the best
    /// diameter ball when the points are collinear.
    fn through3(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> Self {
        let (u, v) = (b - a, c - a);
        let w = u.cross(&v);
        let w2 = w.norm_squared();
        if w2 <= 1e-24 * u.norm_squared().max(1e-300) * v.norm_squared().max(1e-300) {
            return Self::widest_pair(&[*a, *b, *c]);
        }
        let offset = (v.norm_squared() * w.cross(&u) + u.norm_squared() * v.cross(&w)) / (2.0 * w2);
        Self::new(a + offset, offset.norm())
    }

    /// Ball with all four points on its boundary; falls back to the smallest
    /// ball covering them when they are coplanar.
    fn through4(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, d: &Vector3<f64>) -> Self {
        let rows = [b - a, c - a, d - a];
        let m = Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()]);
        let rhs = Vector3::new(rows[0].norm_squared(), rows[1].norm_squared(), rows[2].norm_squared()) / 2.0;
        match m.lu().solve(&rhs) {
            Some(offset) if offset.iter().all(|x| x.is_finite()) && m.determinant().abs() > 1e-14 => {
                Self::new(a + offset, offset.norm())
            }
            _ => brute_force(&[*a, *b, *c, *d]),
        }
    }

    fn widest_pair(points: &[Vector3<f64>]) -> Self {
        let mut best = Self::point(&points[0]);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let ball = Self::diameter(&points[i], &points[j]);
                if ball.radius > best.radius {
                    best = ball;
                }
            }
        }
        best
    }
}

/// Minimum over all candidate balls defined by 1 to 4 support points. Cubic
/// to quartic in the point count; only for small sets and tests.
fn brute_force(points: &[Vector3<f64>]) -> EnclosingBall {
    let n = points.len();
    let covers = |ball: &EnclosingBall| points.iter().all(|p| ball.contains(p));
    let mut best: Option<EnclosingBall> = None;
    let mut consider = |ball: EnclosingBall| {
        if ball.radius.is_finite() && covers(&ball) && best.is_none_or(|b| ball.radius < b.radius) {
            best = Some(ball);
        }
    };
    for i in 0..n {
        consider(EnclosingBall::point(&points[i]));
        for j in i + 1..n {
            consider(EnclosingBall::diameter(&points[i], &points[j]));
            for k in j + 1..n {
                consider(EnclosingBall::through3(&points[i], &points[j], &points[k]));
                for l in k + 1..n {
                    let (a, b, c, d) = (&points[i], &points[j], &points[k], &points[l]);
                    let m = Matrix3::from_rows(&[(b - a).transpose(), (c - a).transpose(), (d - a).transpose()]);
                    if m.determinant().abs() > 1e-14 {
                        consider(EnclosingBall::through4(a, b, c, d));
                    }
                }
            }
        }
    }
    best.expect("the widest pair always covers")
}

/// Exact 1-center by the randomized incremental method with a fixed shuffle,
/// so the result is reproducible.
pub fn smallest_enclosing_ball(points: &[[f64; 3]]) -> Option<EnclosingBall> {
    if points.is_empty() {
        return None;
    }
    let mut pts: Vec<Vector3<f64>> = points.iter().map(|p| Vector3::from(*p)).collect();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));

    let mut ball = EnclosingBall::point(&pts[0]);
    for i in 1..pts.len() {
        if ball.contains(&pts[i]) {
            continue;
        }
        ball = EnclosingBall::point(&pts[i]);
        for j in 0..i {
            if ball.contains(&pts[j]) {
                continue;
            }
            ball = EnclosingBall::diameter(&pts[i], &pts[j]);
            for k in 0..j {
                if ball.contains(&pts[k]) {
                    continue;
                }
                ball = EnclosingBall::through3(&pts[i], &pts[j], &pts[k]);
                for l in 0..k {
                    if !ball.contains(&pts[l]) {
                        ball = EnclosingBall::through4(&pts[i], &pts[j], &pts[k], &pts[l]);
                    }
                }
            }
        }
    }
    Some(ball)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..40 {
            let n = 2 + trial % 9;
            let pts: Vec<[f64; 3]> = (0..n)
                .map(|_| [0, 1, 2].map(|_| rng.random_range(-2.0..2.0)))
                .collect();
            let fast = smallest_enclosing_ball(&pts).unwrap();
            let vecs: Vec<Vector3<f64>> = pts.iter().map(|p| Vector3::from(*p)).collect();
            let slow = brute_force(&vecs);
            assert!((fast.radius - slow.radius).abs() < 1e-9, "{fast:?} vs {slow:?}");
            for p in &vecs {
                assert!(fast.contains(p));
            }
        }
    }

    #[test]
    fn cube_corners() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        let ball = smallest_enclosing_ball(&pts).unwrap();
        assert!((ball.radius - 3f64.sqrt() / 2.0).abs() < 1e-12);
        for c in ball.center {
            assert!((c - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_sets() {
        assert!(smallest_enclosing_ball(&[]).is_none());
        let one = smallest_enclosing_ball(&[[1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(one.radius, 0.0);
        let line = smallest_enclosing_ball(&[[0.0; 3], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert!((line.radius - 1.5).abs() < 1e-12);
        let square = smallest_enclosing_ball(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
        assert!((square.radius - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
