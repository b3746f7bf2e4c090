use super::matrix::Matrix;

/// Convex hull of 2-D points (Andrew's monotone chain), counter-clockwise,
/// without collinear points.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s.abs()
}

/// Area of the convex hull of the rows of an `n x 2` real matrix.
/// Collinear input yields 0.
pub fn convex_hull_area_2d(points: &Matrix) -> f64 {
    assert_eq!(points.cols(), 2, "expected an n x 2 point matrix");
    let pts: Vec<[f64; 2]> = (0..points.rows())
        .map(|r| [points[(r, 0)].re, points[(r, 1)].re])
        .collect();
    polygon_area(&convex_hull_2d(&pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square() {
        let sq = Matrix::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[0.5, 0.5]]);
        assert!((convex_hull_area_2d(&sq) - 1.0).abs() < 1e-15);
        let shear = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!((convex_hull_area_2d(&(&sq * &shear)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collinear_is_zero() {
        let line = Matrix::from_rows(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]);
        assert_eq!(convex_hull_area_2d(&line), 0.0);
    }

    #[test]
    fn hull_drops_interior_and_duplicates() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [2.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 2.0], [1.0, 0.0]];
        let h = convex_hull_2d(&pts);
        assert_eq!(h.len(), 4);
        assert!((polygon_area(&h) - 4.0).abs() < 1e-15);
    }
}
