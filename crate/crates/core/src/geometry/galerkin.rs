use crate::error::{Error, Result};
use crate::geometry::kernel::Kernel;
use crate::geometry::mesh::{Triangle, TriangleMesh};
use crate::geometry::quadrature::TriangleQuadRule;
use crate::linalg::Matrix;
use crate::math;
use crate::scalar::Scalar;

/// Largest `n` accepted by [`assemble_dense`] unless the caller raises it.
pub const DEFAULT_DENSE_LIMIT: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Identical,
    SharedEdge,
    SharedVertex,
    Regular,
}

/// Classifies a pair by exact vertex coordinate equality, so it works on
/// geometry shipped between nodes without any connectivity.
pub fn classify_pair(a: &Triangle, b: &Triangle) -> PairKind {
    let shared = a
        .vertices
        .iter()
        .filter(|v| b.vertices.iter().any(|w| w == *v))
        .count();
    match shared {
        0 => PairKind::Regular,
        1 => PairKind::SharedVertex,
        2 => PairKind::SharedEdge,
        _ => PairKind::Identical,
    }
}

/// `∫_a ∫_b g(x, y) dy dx` with `a` as the outer triangle.
pub fn pair_integral<K: Kernel>(
    kernel: &K,
    a: &Triangle,
    b: &Triangle,
    rule: &TriangleQuadRule,
) -> K::Scalar {
    match classify_pair(a, b) {
        PairKind::Regular => regular(kernel, a, b, rule),
        _ => singular(kernel, a, b, rule),
    }
}

fn regular<K: Kernel>(
    kernel: &K,
    a: &Triangle,
    b: &Triangle,
    rule: &TriangleQuadRule,
) -> K::Scalar {
    let ys: alloc::vec::Vec<_> = rule.points().iter().map(|l| b.at(*l)).collect();
    let mut total = K::Scalar::zero();
    for (la, wa) in rule.points().iter().zip(rule.weights()) {
        let x = a.at(*la);
        let mut inner = K::Scalar::zero();
        for (y, wb) in ys.iter().zip(rule.weights()) {
            inner += kernel.at_distance(math::dist(x, *y)).scale(*wb);
        }
        total += inner.scale(*wa);
    }
    total.scale(a.area() * b.area())
}

// The inner integral is split into the sub-triangles spanned by the point `p`
// of `b` closest to `x` and the edges of `b`. On each sub-triangle the Duffy
// map `y = p + u (s - p + v (t - s))` cancels the 1/r behaviour at `p`, and a
// sinh substitution in `v` around the foot of `p` on the edge line resolves
// the remaining peak when `p` is close to that edge.
fn singular<K: Kernel>(
    kernel: &K,
    a: &Triangle,
    b: &Triangle,
    rule: &TriangleQuadRule,
) -> K::Scalar {
    let (nodes, weights) = rule.line();
    let area_b = b.area();
    let mut total = K::Scalar::zero();
    for (la, wa) in rule.points().iter().zip(rule.weights()) {
        let x = a.at(*la);
        let p = b.closest_point(x);
        let mut inner = K::Scalar::zero();
        for e in 0..3 {
            let s = b.vertices[e];
            let t = b.vertices[(e + 1) % 3];
            let ps = math::sub(s, p);
            let st = math::sub(t, s);
            let jac = math::norm(math::cross(ps, st));
            if jac <= 1e-14 * area_b {
                continue;
            }
            let len2 = math::dot(st, st);
            let len = math::sqrt(len2);
            let v0 = -math::dot(ps, st) / len2;
            let h = jac / len;
            let s0 = libm::asinh(-v0 * len / h);
            let s1 = libm::asinh((1.0 - v0) * len / h);
            for (&sv, &wv) in nodes.iter().zip(weights) {
                let sigma = s0 + (s1 - s0) * sv;
                let v = v0 + h / len * libm::sinh(sigma);
                let dv = (s1 - s0) * h / len * libm::cosh(sigma) * wv;
                let d = math::add(ps, math::scale(st, v));
                for (&u, &wu) in nodes.iter().zip(weights) {
                    let y = math::add(p, math::scale(d, u));
                    let r = math::dist(x, y);
                    inner += kernel.at_distance(r).scale(wu * dv * jac * u);
                }
            }
        }
        total += inner.scale(*wa);
    }
    total.scale(a.area())
}

/// Entry `g_ij` from explicit geometry. The pair is always integrated with the
/// smaller index outer, so `g_ij` and `g_ji` are bitwise equal.
pub fn galerkin_entry_between<K: Kernel>(
    kernel: &K,
    (i, ti): (usize, &Triangle),
    (j, tj): (usize, &Triangle),
    rule: &TriangleQuadRule,
) -> K::Scalar {
    if i <= j {
        pair_integral(kernel, ti, tj, rule)
    } else {
        pair_integral(kernel, tj, ti, rule)
    }
}

pub fn galerkin_entry<K: Kernel>(
    mesh: &TriangleMesh,
    kernel: &K,
    i: usize,
    j: usize,
    rule: &TriangleQuadRule,
) -> Result<K::Scalar> {
    let ti = mesh.checked_triangle(i)?;
    let tj = mesh.checked_triangle(j)?;
    Ok(galerkin_entry_between(kernel, (i, &ti), (j, &tj), rule))
}

/// Full Galerkin matrix. `limit` guards against accidental `O(n²)` memory use.
pub fn assemble_dense<K: Kernel>(
    mesh: &TriangleMesh,
    kernel: &K,
    rule: &TriangleQuadRule,
    limit: usize,
) -> Result<Matrix<K::Scalar>> {
    let n = mesh.len();
    if n > limit {
        return Err(Error::Capacity {
            what: "dense matrix dimension",
            requested: n,
            limit,
        });
    }
    let tris = mesh.all_triangles();
    let mut g = Matrix::filled(n, n, K::Scalar::zero());
    for i in 0..n {
        for j in i..n {
            let v = galerkin_entry_between(kernel, (i, &tris[i]), (j, &tris[j]), rule);
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    Ok(g)
}
