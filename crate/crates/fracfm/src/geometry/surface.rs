use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::linalg::Point;
use crate::Result;

/// Analytic surfaces used for sampling, hosting crack patches and inclusions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceKind {
    Sphere { center: [f64; 3], radius: f64 },
    Ellipsoid { center: [f64; 3], semi_axes: [f64; 3] },
    Cube { center: [f64; 3], side: f64 },
    /// Square patch `center + u τ1 + v τ2`, `|u|, |v| ≤ half_extent`.
    Plane { center: [f64; 3], normal: [f64; 3], half_extent: f64 },
}

impl SurfaceKind {
    pub fn center(&self) -> Point {
        match self {
            SurfaceKind::Sphere { center, .. }
            | SurfaceKind::Ellipsoid { center, .. }
            | SurfaceKind::Cube { center, .. }
            | SurfaceKind::Plane { center, .. } => Point::from(*center),
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, SurfaceKind::Plane { .. })
    }

    /// Semi-axes of the sphere/ellipsoid kinds.
    pub fn axes(&self) -> Option<[f64; 3]> {
        match self {
            SurfaceKind::Sphere { radius, .. } => Some([*radius; 3]),
            SurfaceKind::Ellipsoid { semi_axes, .. } => Some(*semi_axes),
            _ => None,
        }
    }

    /// Largest point-to-point distance on the surface.
    pub fn diameter(&self) -> f64 {
        match self {
            SurfaceKind::Sphere { radius, .. } => 2.0 * radius,
            SurfaceKind::Ellipsoid { semi_axes, .. } => 2.0 * semi_axes.iter().cloned().fold(0.0, f64::max),
            SurfaceKind::Cube { side, .. } => side * 3f64.sqrt(),
            SurfaceKind::Plane { half_extent, .. } => 2.0 * half_extent * 2f64.sqrt(),
        }
    }

    /// Strictly inside the closed surface (always false for planar patches).
    pub fn contains(&self, p: &Point) -> bool {
        let r = p - self.center();
        match self {
            SurfaceKind::Sphere { radius, .. } => r.norm() < *radius,
            SurfaceKind::Ellipsoid { semi_axes, .. } => r.component_div(&Point::from(*semi_axes)).norm_squared() < 1.0,
            SurfaceKind::Cube { side, .. } => r.amax() < 0.5 * side,
            SurfaceKind::Plane { .. } => false,
        }
    }

    /// On the surface up to a relative tolerance (planar patches include their extent).
    pub fn on_surface(&self, p: &Point, tol: f64) -> bool {
        let r = p - self.center();
        match self {
            SurfaceKind::Sphere { radius, .. } => (r.norm() - radius).abs() <= tol * radius,
            SurfaceKind::Ellipsoid { semi_axes, .. } => (r.component_div(&Point::from(*semi_axes)).norm() - 1.0).abs() <= tol,
            SurfaceKind::Cube { side, .. } => (r.amax() - 0.5 * side).abs() <= tol * side,
            SurfaceKind::Plane { normal, half_extent, .. } => {
                let n = Point::from(*normal).normalize();
                let (t1, t2) = tangent_frame(&n);
                let slack = half_extent * (1.0 + tol);
                r.dot(&n).abs() <= tol * half_extent && r.dot(&t1).abs() <= slack && r.dot(&t2).abs() <= slack
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        match self {
            SurfaceKind::Sphere { radius, .. } => pos("radius", *radius),
            SurfaceKind::Ellipsoid { semi_axes, .. } => semi_axes.iter().try_for_each(|a| pos("semi_axes", *a)),
            SurfaceKind::Cube { side, .. } => pos("side", *side),
            SurfaceKind::Plane { normal, half_extent, .. } => {
                pos("half_extent", *half_extent)?;
                if Point::from(*normal).norm() < 1e-12 {
                    return Err(invalid("normal", "degenerate normal"));
                }
                Ok(())
            }
        }
    }
}

/// Orthonormal tangents `(τ1, τ2)` with `τ1 × τ2 = n`.
pub fn tangent_frame(n: &Point) -> (Point, Point) {
    let helper = if n.x.abs() < 0.9 { Point::x() } else { Point::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSurface {
    pub kind: SurfaceKind,
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    /// Points that lie on the true crack, when known.
    pub truth: Option<Vec<bool>>,
}

impl SamplingSurface {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Concatenate several surfaces (kind of the first is kept).
    pub fn concat(parts: Vec<SamplingSurface>) -> Result<SamplingSurface> {
        let mut it = parts.into_iter();
        let mut first = it.next().ok_or_else(|| invalid("sampling", "no sampling surfaces"))?;
        for p in it {
            first.points.extend(p.points);
            first.normals.extend(p.normals);
            first.truth = match (first.truth.take(), p.truth) {
                (Some(mut a), Some(b)) => {
                    a.extend(b);
                    Some(a)
                }
                _ => None,
            };
        }
        Ok(first)
    }
}

/// Golden-spiral points on the unit sphere.
fn fibonacci_sphere(m: usize) -> Vec<Point> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
            let r = (1.0 - z * z).sqrt();
            let ph = golden * i as f64;
            Point::new(r * ph.cos(), r * ph.sin(), z)
        })
        .collect()
}

/// Sample `count` points on an analytic surface with exact outward normals.
///
/// Planar patches need a perfect-square count (an `n × n` node grid).
pub fn parametric_surface(kind: &SurfaceKind, count: usize) -> Result<SamplingSurface> {
    kind.validate()?;
    if count < 4 {
        return Err(invalid("count", format!("need at least 4 points, got {count}")));
    }
    let c = kind.center();
    let (points, normals) = match kind {
        SurfaceKind::Sphere { radius, .. } => fibonacci_sphere(count).into_iter().map(|p| (c + p * *radius, p)).unzip(),
        SurfaceKind::Ellipsoid { semi_axes: a, .. } => fibonacci_sphere(count)
            .into_iter()
            .map(|p| {
                let x = c + Point::new(a[0] * p.x, a[1] * p.y, a[2] * p.z);
                let n = Point::new(p.x / a[0], p.y / a[1], p.z / a[2]).normalize();
                (x, n)
            })
            .unzip(),
        SurfaceKind::Cube { side, .. } => {
            let h = 0.5 * side;
            let mut pts = Vec::with_capacity(count);
            let mut nrm = Vec::with_capacity(count);
            for f in 0..6 {
                let m = count / 6 + usize::from(f < count % 6);
                let k = (m as f64).sqrt().ceil().max(1.0) as usize;
                let axis = f / 2;
                let sign = if f % 2 == 0 { 1.0 } else { -1.0 };
                let mut n = Point::zeros();
                n[axis] = sign;
                let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                for idx in 0..m {
                    let (i, j) = (idx / k, idx % k);
                    let mut p = c + n * h;
                    p[a1] += side * ((i as f64 + 0.5) / k as f64 - 0.5);
                    p[a2] += side * ((j as f64 + 0.5) / k as f64 - 0.5);
                    pts.push(p);
                    nrm.push(n);
                }
            }
            (pts, nrm)
        }
        SurfaceKind::Plane { normal, half_extent, .. } => {
            let n = (count as f64).sqrt().round() as usize;
            if n * n != count {
                return Err(invalid("count", format!("planar patches need a square count, got {count}")));
            }
            let nrm = Point::from(*normal).normalize();
            let (t1, t2) = tangent_frame(&nrm);
            let step = 2.0 * half_extent / (n - 1) as f64;
            let mut pts = Vec::with_capacity(count);
            for i in 0..n {
                for j in 0..n {
                    let u = -half_extent + step * i as f64;
                    let v = -half_extent + step * j as f64;
                    pts.push(c + t1 * u + t2 * v);
                }
            }
            (pts, vec![nrm; count])
        }
    };
    Ok(SamplingSurface { kind: kind.clone(), points, normals, truth: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sphere_normals_are_radial() {
        let k = SurfaceKind::Sphere { center: [0.0, -4.0, -2.0], radius: 2.0 };
        let s = parametric_surface(&k, 150).unwrap();
        let c = k.center();
        for (p, n) in s.points.iter().zip(&s.normals) {
            assert!(((p - c) / 2.0 - n).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_points_on_surface() {
        let k = SurfaceKind::Ellipsoid { center: [0.0; 3], semi_axes: [4.5, 4.0, 6.0] };
        let s = parametric_surface(&k, 900).unwrap();
        for (p, n) in s.points.iter().zip(&s.normals) {
            let f = (p.x / 4.5).powi(2) + (p.y / 4.0).powi(2) + (p.z / 6.0).powi(2);
            assert!((f - 1.0).abs() < 1e-10);
            assert!((n.norm() - 1.0).abs() < 1e-12);
            assert!(p.dot(n) > 0.0);
        }
    }

    #[test]
    fn cube_has_six_face_normals() {
        let k = SurfaceKind::Cube { center: [0.0, 3.0, 3.0], side: 1.8 };
        let s = parametric_surface(&k, 200).unwrap();
        assert_eq!(s.len(), 200);
        let mut distinct: Vec<Point> = Vec::new();
        for (p, n) in s.points.iter().zip(&s.normals) {
            if !distinct.iter().any(|d| (d - n).norm() < 1e-12) {
                distinct.push(*n);
            }
            let rel = p - k.center();
            // on a face, strictly away from edges
            let on_face = (0..3).filter(|&a| (rel[a].abs() - 0.9).abs() < 1e-12).count();
            assert_eq!(on_face, 1);
        }
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn validation_errors() {
        let k = SurfaceKind::Sphere { center: [0.0; 3], radius: 1.0 };
        assert!(parametric_surface(&k, 3).is_err());
        assert!(parametric_surface(&SurfaceKind::Sphere { center: [0.0; 3], radius: -1.0 }, 10).is_err());
        let p = SurfaceKind::Plane { center: [0.0; 3], normal: [0.0, 0.0, 1.0], half_extent: 1.0 };
        assert!(parametric_surface(&p, 10).is_err());
        assert_eq!(parametric_surface(&p, 25).unwrap().len(), 25);
    }

    proptest! {
        #[test]
        fn convex_outward_normals(a in 0.5..5.0f64, b in 0.5..5.0f64, cc in 0.5..5.0f64, m in 4usize..300, cx in -3.0..3.0f64) {
            for k in [
                SurfaceKind::Ellipsoid { center: [cx, 1.0, -2.0], semi_axes: [a, b, cc] },
                SurfaceKind::Sphere { center: [cx, 0.0, 0.0], radius: a },
                SurfaceKind::Cube { center: [0.0, cx, 0.0], side: b },
            ] {
                let s = parametric_surface(&k, m).unwrap();
                prop_assert_eq!(s.len(), m);
                for (p, n) in s.points.iter().zip(&s.normals) {
                    prop_assert!((n.norm() - 1.0).abs() < 1e-12);
                    prop_assert!((p - k.center()).dot(n) > 0.0);
                }
            }
        }
    }
}
