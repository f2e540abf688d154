//! Fixed-size 2×2 helpers. Rows are assets, columns Brownian factors.

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn scale(c: f64, a: Vec2) -> Vec2 {
    [c * a[0], c * a[1]]
}

pub fn mat_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [dot(m[0], v), dot(m[1], v)]
}

/// `m' v`
pub fn mat_t_vec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[1][0] * v[1],
        m[0][1] * v[0] + m[1][1] * v[1],
    ]
}

/// `m m'`
pub fn gram(m: &Mat2) -> Mat2 {
    [
        [dot(m[0], m[0]), dot(m[0], m[1])],
        [dot(m[1], m[0]), dot(m[1], m[1])],
    ]
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Solves `m x = rhs`; `None` when `m` is numerically singular.
pub fn solve(m: &Mat2, rhs: Vec2) -> Option<Vec2> {
    let d = det(m);
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if d == 0.0 || d.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some([
        (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / d,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / d,
    ])
}

pub fn outer(a: Vec2, b: Vec2) -> Mat2 {
    [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]]
}

pub fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn mat_scale(c: f64, a: &Mat2) -> Mat2 {
    [[c * a[0][0], c * a[0][1]], [c * a[1][0], c * a[1][1]]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_round_trip() {
        let m = [[2.0, 1.0], [0.5, 3.0]];
        let x = solve(&m, [1.0, -2.0]).unwrap();
        let back = mat_vec(&m, x);
        assert!((back[0] - 1.0).abs() < 1e-15 && (back[1] + 2.0).abs() < 1e-15);
        assert!(solve(&[[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }

    #[test]
    fn transpose_product() {
        let m = [[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(mat_t_vec(&m, [1.0, 1.0]), [4.0, 6.0]);
        assert_eq!(gram(&m), [[5.0, 11.0], [11.0, 25.0]]);
    }
}
