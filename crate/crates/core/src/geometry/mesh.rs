use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::clustering::Aabb;
use crate::error::{Error, Result};
use crate::math::{self, Point3};

/// Finest sphere level accepted by [`TriangleMesh::sphere`] (8·4¹⁰ triangles).
pub const MAX_SPHERE_LEVEL: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Point3; 3],
}

impl Triangle {
    pub fn new(a: Point3, b: Point3, c: Point3) -> Self {
        Self {
            vertices: [a, b, c],
        }
    }

    pub fn normal(&self) -> Point3 {
        let [a, b, c] = self.vertices;
        math::cross(math::sub(b, a), math::sub(c, a))
    }

    pub fn area(&self) -> f64 {
        0.5 * math::norm(self.normal())
    }

    pub fn centroid(&self) -> Point3 {
        let [a, b, c] = self.vertices;
        math::scale(math::add(math::add(a, b), c), 1.0 / 3.0)
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.vertices;
        math::dist(a, b).max(math::dist(b, c)).max(math::dist(c, a))
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Point with barycentric coordinates `l`.
    #[inline]
    pub fn at(&self, l: [f64; 3]) -> Point3 {
        let [a, b, c] = self.vertices;
        [
            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
            l[0] * a[2] + l[1] * b[2] + l[2] * c[2],
        ]
    }

    /// Closest point of the triangle to `p`.
    pub fn closest_point(&self, p: Point3) -> Point3 {
        let [a, b, c] = self.vertices;
        let ab = math::sub(b, a);
        let ac = math::sub(c, a);
        let ap = math::sub(p, a);
        let d1 = math::dot(ab, ap);
        let d2 = math::dot(ac, ap);
        if d1 <= 0.0 && d2 <= 0.0 {
            return a;
        }
        let bp = math::sub(p, b);
        let d3 = math::dot(ab, bp);
        let d4 = math::dot(ac, bp);
        if d3 >= 0.0 && d4 <= d3 {
            return b;
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let v = d1 / (d1 - d3);
            return math::add(a, math::scale(ab, v));
        }
        let cp = math::sub(p, c);
        let d5 = math::dot(ab, cp);
        let d6 = math::dot(ac, cp);
        if d6 >= 0.0 && d5 <= d6 {
            return c;
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            let w = d2 / (d2 - d6);
            return math::add(a, math::scale(ac, w));
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            return math::add(b, math::scale(math::sub(c, b), w));
        }
        let denom = 1.0 / (va + vb + vc);
        let v = vb * denom;
        let w = vc * denom;
        math::add(a, math::add(math::scale(ab, v), math::scale(ac, w)))
    }
}

/// Flat triangulation with one piecewise-constant basis function per triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references vertex {v} of {}",
                        vertices.len()
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
        }
        let mesh = Self {
            vertices,
            triangles,
        };
        for t in 0..mesh.len() {
            let area = mesh.triangle(t).area();
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {t} has zero area")));
            }
        }
        Ok(mesh)
    }

    /// Octahedron projected to the unit sphere after `level` rounds of
    /// midpoint quadrisection. The children of triangle `t` of one level are
    /// triangles `4t..4t+4` of the next.
    pub fn sphere(level: u32) -> Result<Self> {
        if level > MAX_SPHERE_LEVEL {
            return Err(Error::Capacity {
                what: "sphere level",
                requested: level as usize,
                limit: MAX_SPHERE_LEVEL as usize,
            });
        }
        let mut vertices: Vec<Point3> = alloc::vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let mut triangles = Vec::with_capacity(8);
        for sz in [4usize, 5] {
            for sy in [2usize, 3] {
                for sx in [0usize, 1] {
                    let flips = (sx == 1) as u8 + (sy == 3) as u8 + (sz == 5) as u8;
                    if flips % 2 == 0 {
                        triangles.push([sx, sy, sz]);
                    } else {
                        triangles.push([sy, sx, sz]);
                    }
                }
            }
        }
        for _ in 0..level {
            let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = math::scale(math::add(vertices[key.0], vertices[key.1]), 0.5);
                    vertices.push(math::scale(m, 1.0 / math::norm(m)));
                    vertices.len() - 1
                })
            };
            for &[a, b, c] in &triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.push([a, ab, ca]);
                next.push([ab, b, bc]);
                next.push([ca, bc, c]);
                next.push([ab, bc, ca]);
            }
            triangles = next;
        }
        Self::new(vertices, triangles)
    }

    /// Number of triangles, which is also the number of basis functions.
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn connectivity(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, i: usize) -> Triangle {
        let [a, b, c] = self.triangles[i];
        Triangle::new(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn checked_triangle(&self, i: usize) -> Result<Triangle> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.triangle(i))
    }

    pub fn all_triangles(&self) -> Vec<Triangle> {
        (0..self.len()).map(|i| self.triangle(i)).collect()
    }

    pub fn centroids(&self) -> Vec<Point3> {
        (0..self.len())
            .map(|i| self.triangle(i).centroid())
            .collect()
    }

    pub fn support_boxes(&self) -> Vec<Aabb> {
        (0..self.len()).map(|i| self.triangle(i).bbox()).collect()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.len()).map(|i| self.triangle(i).area()).sum()
    }
}
