//! Fixed-size 2-D helpers and slice norms used throughout the controller.

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

#[inline]
pub fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

#[inline]
pub fn add(a: &Vec2, b: &Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: &Vec2, b: &Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(k: f64, v: &Vec2) -> Vec2 {
    [k * v[0], k * v[1]]
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Maximum absolute entry. Zero for an empty slice.
#[inline]
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(libm::fabs(*x)))
}

/// `‖k·a − b‖_∞` without materialising the difference.
#[inline]
pub fn scaled_dist_inf(k: f64, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |acc, (x, y)| acc.max(libm::fabs(k * x - y)))
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2) -> Vec2 {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let radius = libm::sqrt(half_diff * half_diff + m[0][1] * m[1][0]);
    [mean - radius, mean + radius]
}

/// Solves `m·x = b` by Cramer's rule. Returns `None` when the determinant is zero.
pub fn solve2(m: &Mat2, b: &Vec2) -> Option<Vec2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (b[0] * m[1][1] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_rhs() {
        let m = [[10.0, 4.6], [4.6, 2.3]];
        let x = solve2(&m, &[1.0, -2.0]).unwrap();
        let back = mat_vec(&m, &x);
        assert!((back[0] - 1.0).abs() < 1e-12 && (back[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_has_no_solution() {
        assert!(solve2(&[[1.0, 2.0], [2.0, 4.0]], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        assert_eq!(sym_eigenvalues(&[[3.0, 0.0], [0.0, 1.0]]), [1.0, 3.0]);
    }

    #[test]
    fn scaled_distance() {
        assert_eq!(scaled_dist_inf(2.0, &[1.0, 2.0], &[2.0, 2.0]), 2.0);
        assert_eq!(norm_inf(&[]), 0.0);
    }
}
