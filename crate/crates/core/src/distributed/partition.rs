use alloc::vec::Vec;

use crate::clustering::{Aabb, ClusterTree};
use crate::error::{Error, Result};
use crate::geometry::{Triangle, TriangleMesh};
use crate::math::Point3;

/// Splits `0..points.len()` into `p` parts by recursive bisection along the
/// longest axis of the points' bounding box. A set destined for `q` nodes is
/// split into `⌊q/2⌋` and `q - ⌊q/2⌋` nodes with sizes in the same ratio
/// (rounded down for the lower side). Each part is sorted.
pub fn partition_indices(points: &[Point3], p: usize) -> Result<Vec<Vec<usize>>> {
    if p == 0 {
        return Err(Error::InvalidArgument("node count must be positive".into()));
    }
    if p > points.len() {
        return Err(Error::Capacity {
            what: "nodes per index",
            requested: p,
            limit: points.len(),
        });
    }
    let mut out = Vec::with_capacity(p);
    bisect(points, (0..points.len()).collect(), p, &mut out);
    Ok(out)
}

fn bisect(points: &[Point3], mut idx: Vec<usize>, p: usize, out: &mut Vec<Vec<usize>>) {
    if p == 1 {
        idx.sort_unstable();
        out.push(idx);
        return;
    }
    let p1 = p / 2;
    let n1 = idx.len() * p1 / p;
    let pts: Vec<Point3> = idx.iter().map(|&i| points[i]).collect();
    let axis = Aabb::from_points(&pts).longest_axis();
    idx.sort_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b)));
    let hi = idx.split_off(n1);
    bisect(points, idx, p1, out);
    bisect(points, hi, p - p1, out);
}

/// The part of the mesh owned by one node. Local position `k` stands for
/// global basis index `global[k]`; `global` is increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPart {
    pub rank: usize,
    pub global: Vec<usize>,
    pub triangles: Vec<Triangle>,
}

impl LocalPart {
    pub fn new(mesh: &TriangleMesh, rank: usize, global: Vec<usize>) -> Result<Self> {
        if global.is_empty() {
            return Err(Error::InvalidArgument("a node must own at least one index".into()));
        }
        if global.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("owned indices must be increasing".into()));
        }
        let triangles = global
            .iter()
            .map(|&i| mesh.checked_triangle(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rank,
            global,
            triangles,
        })
    }

    /// Partitions `mesh` over `p` nodes and returns every node's part.
    pub fn split(mesh: &TriangleMesh, p: usize) -> Result<Vec<Self>> {
        partition_indices(&mesh.centroids(), p)?
            .into_iter()
            .enumerate()
            .map(|(rank, idx)| Self::new(mesh, rank, idx))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    /// Cluster tree over local positions.
    pub fn tree(&self, leaf_limit: usize) -> Result<ClusterTree> {
        let idx: Vec<usize> = (0..self.len()).collect();
        let points: Vec<Point3> = self.triangles.iter().map(Triangle::centroid).collect();
        let boxes: Vec<Aabb> = self.triangles.iter().map(Triangle::bbox).collect();
        ClusterTree::build(&idx, &points, &boxes, leaf_limit)
    }

    /// Mean of the triangle centroids.
    pub fn anchor(&self) -> Point3 {
        let mut s = [0.0; 3];
        for t in &self.triangles {
            s = crate::math::add(s, t.centroid());
        }
        crate::math::scale(s, 1.0 / self.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_splits_proportionally() {
        let pts: Vec<Point3> = (0..10).map(|i| [9.0 - i as f64, 0.0, 0.0]).collect();
        let parts = partition_indices(&pts, 3).unwrap();
        assert_eq!(parts, [vec_of(&[7, 8, 9]), vec_of(&[4, 5, 6]), vec_of(&[0, 1, 2, 3])]);
        assert!(partition_indices(&pts, 11).is_err());
        assert!(partition_indices(&pts, 0).is_err());
    }

    fn vec_of(v: &[usize]) -> Vec<usize> {
        v.to_vec()
    }

    #[test]
    fn two_parts_of_sphere_are_hemispheres() {
        let mesh = TriangleMesh::sphere(3).unwrap();
        let parts = LocalPart::split(&mesh, 2).unwrap();
        assert_eq!(parts[0].len(), 256);
        assert!(parts[0].triangles.iter().all(|t| t.centroid()[0] < 0.0));
        assert!(parts[1].triangles.iter().all(|t| t.centroid()[0] > 0.0));
    }
}
