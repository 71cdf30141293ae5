use std::sync::Arc;

use h2dist_core::clustering::{BlockStatus, BlockTree, ClusterTree};
use h2dist_core::exec::Serial;
use h2dist_core::geometry::{assemble_dense, Helmholtz, Laplace, TriangleMesh, TriangleQuadRule};
use h2dist_core::h2::{
    assemble_coupling, backward, forward, leaf_matrix, leaf_rule, BlockData, ClusterBasis,
    H2Matrix, H2Params, InterpolationScheme,
};
use h2dist_core::linalg::{gemv, relative_error, Matrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn params(order: usize) -> H2Params {
    H2Params {
        order,
        ..H2Params::default()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn worst_error(h: &H2Matrix<f64>, g: &Matrix<f64>, vectors: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..vectors)
        .map(|_| {
            let x = random_vec(&mut rng, g.cols());
            relative_error(&h.mvm(&x).unwrap(), &gemv(g, &x))
        })
        .fold(0.0, f64::max)
}

#[test]
fn nested_basis_identity_holds_on_level2_tree() {
    let mesh = TriangleMesh::sphere(2).unwrap();
    let tris = mesh.all_triangles();
    let tree = ClusterTree::for_mesh(&mesh, 8).unwrap();
    for m in [2, 3, 4] {
        let scheme = InterpolationScheme::new(m).unwrap();
        let rule = leaf_rule(&scheme, &TriangleQuadRule::default());
        let direct =
            |c: usize| leaf_matrix(&tree.node(c).bbox, tree.indices(c), &tris, &scheme, &rule);
        for c in 0..tree.len() {
            let parent = direct(c);
            for &ch in &tree.node(c).children {
                let e = scheme.transfer(&tree.node(c).bbox, &tree.node(ch).bbox);
                let nested = direct(ch).matmul(&e);
                let rows: Vec<usize> = tree
                    .indices(ch)
                    .iter()
                    .map(|i| tree.indices(c).binary_search(i).unwrap())
                    .collect();
                let restricted =
                    Matrix::from_fn(rows.len(), parent.cols(), |r, j| parent.get(rows[r], j));
                let diff = Matrix::from_fn(rows.len(), parent.cols(), |r, j| {
                    restricted.get(r, j) - nested.get(r, j)
                });
                let res = diff.frobenius() / restricted.frobenius();
                assert!(res <= 1e-12, "m={m} cluster {c} child {ch}: {res:e}");
            }
        }
    }
}

#[test]
fn forward_matches_direct_internal_coefficients() {
    let mesh = TriangleMesh::sphere(2).unwrap();
    let tris = mesh.all_triangles();
    let tree = ClusterTree::for_mesh(&mesh, 16).unwrap();
    let scheme = InterpolationScheme::new(3).unwrap();
    let rule = TriangleQuadRule::default();
    let basis = ClusterBasis::assemble(&tree, &tris, &scheme, &rule, &Serial);
    let x = random_vec(&mut ChaCha8Rng::seed_from_u64(1), mesh.len());
    let xhat = forward(&tree, &basis, &x);
    let exact_rule = leaf_rule(&scheme, &rule);
    for c in 0..tree.len() {
        let w = leaf_matrix(
            &tree.node(c).bbox,
            tree.indices(c),
            &tris,
            &scheme,
            &exact_rule,
        );
        let xs: Vec<f64> = tree.indices(c).iter().map(|&i| x[i]).collect();
        let direct = gemv(&w.transpose(), &xs);
        assert!(relative_error(&xhat[c], &direct) <= 1e-12, "cluster {c}");
    }
    let zero = forward(&tree, &basis, &vec![0.0; mesh.len()]);
    assert!(zero.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn single_leaf_transformations() {
    let mesh = TriangleMesh::sphere(0).unwrap();
    let tris = mesh.all_triangles();
    let tree = ClusterTree::for_mesh(&mesh, 16).unwrap();
    assert_eq!(tree.len(), 1);
    let scheme = InterpolationScheme::new(2).unwrap();
    let basis =
        ClusterBasis::assemble(&tree, &tris, &scheme, &TriangleQuadRule::default(), &Serial);
    let w = basis.leaf(0).unwrap();
    let x = random_vec(&mut ChaCha8Rng::seed_from_u64(2), 8);
    assert_eq!(forward(&tree, &basis, &x)[0], gemv(&w.transpose(), &x));
    let mut yhat = vec![random_vec(&mut ChaCha8Rng::seed_from_u64(3), 8)];
    let mut y = vec![1.0; 8];
    backward(&tree, &basis, &mut yhat, &mut y);
    let expect: Vec<f64> = gemv(w, &yhat[0]).iter().map(|v| 1.0 + v).collect();
    assert_eq!(y, expect);
}

#[test]
fn backward_is_adjoint_of_forward() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let tris = mesh.all_triangles();
    let tree = ClusterTree::for_mesh(&mesh, 16).unwrap();
    let scheme = InterpolationScheme::new(3).unwrap();
    let basis =
        ClusterBasis::assemble(&tree, &tris, &scheme, &TriangleQuadRule::default(), &Serial);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = scheme.rank();
    let mut yhat: Vec<Vec<f64>> = (0..tree.len()).map(|_| random_vec(&mut rng, k)).collect();
    let yhat0 = yhat.clone();
    let y = random_vec(&mut rng, mesh.len());
    let mut by = vec![0.0; mesh.len()];
    backward(&tree, &basis, &mut yhat, &mut by);
    let lhs = dot(&by, &y);
    let fy = forward(&tree, &basis, &y);
    let rhs: f64 = yhat0.iter().zip(&fy).map(|(a, b)| dot(a, b)).sum();
    assert!(
        (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()),
        "{lhs} vs {rhs}"
    );

    let mut zeros = vec![vec![0.0; k]; tree.len()];
    let mut y2 = y.clone();
    backward(&tree, &basis, &mut zeros, &mut y2);
    assert_eq!(y2, y);
}

#[test]
fn dense_oracle_error_level2_and_512() {
    let rule = TriangleQuadRule::default();
    let mesh = TriangleMesh::sphere(2).unwrap();
    let g = assemble_dense(&mesh, &Laplace, &rule, 8192).unwrap();
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &params(4), &Serial).unwrap();
    assert!(worst_error(&h, &g, 10, 5) < 1e-3);

    let mesh = TriangleMesh::sphere(3).unwrap();
    assert_eq!(mesh.len(), 512);
    let g = assemble_dense(&mesh, &Laplace, &rule, 8192).unwrap();
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &params(4), &Serial).unwrap();
    assert!(h.census().admissible_blocks > 0);
    assert!(worst_error(&h, &g, 10, 5) < 1e-3);
}

#[test]
fn error_decays_with_order() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let g = assemble_dense(&mesh, &Laplace, &TriangleQuadRule::default(), 8192).unwrap();
    let errs: Vec<f64> = [2, 3, 4]
        .iter()
        .map(|&m| {
            worst_error(
                &H2Matrix::from_mesh(&mesh, &Laplace, &params(m), &Serial).unwrap(),
                &g,
                3,
                6,
            )
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] * 2.0 <= w[0], "{errs:?}");
    }
}

#[test]
fn linear_deterministic_and_symmetric() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &params(3), &Serial).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = mesh.len();
    let (x1, x2) = (random_vec(&mut rng, n), random_vec(&mut rng, n));
    let a = 0.37;
    let comb: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| a * p + q).collect();
    let y1 = h.mvm(&x1).unwrap();
    let y2 = h.mvm(&x2).unwrap();
    let lhs = h.mvm(&comb).unwrap();
    let rhs: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + q).collect();
    assert!(relative_error(&lhs, &rhs) <= 1e-12);

    let again = h.mvm(&x1).unwrap();
    assert!(again
        .iter()
        .zip(&y1)
        .all(|(p, q)| p.to_bits() == q.to_bits()));

    let (gx, gy) = (dot(&y1, &x2), dot(&x1, &y2));
    assert!((gx - gy).abs() <= 1e-10 * gx.abs());
}

#[test]
fn single_nearfield_block_is_the_dense_matrix() {
    let mesh = TriangleMesh::sphere(1).unwrap();
    let p = H2Params {
        leaf_limit: 64,
        eta: 1e6,
        ..params(2)
    };
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &p, &Serial).unwrap();
    let g = assemble_dense(&mesh, &Laplace, &TriangleQuadRule::default(), 8192).unwrap();
    assert_eq!(h.blocks().len(), 1);
    assert_eq!(h.block_data()[0], BlockData::Nearfield(g.clone()));
    let x = random_vec(&mut ChaCha8Rng::seed_from_u64(8), mesh.len());
    assert_eq!(h.mvm(&x).unwrap(), gemv(&g, &x));
}

#[test]
fn nearfield_blocks_equal_dense_entries_bitwise() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let g = assemble_dense(&mesh, &Laplace, &TriangleQuadRule::default(), 8192).unwrap();
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &params(3), &Serial).unwrap();
    let t = h.row_tree();
    for (b, d) in h.block_data().iter().enumerate() {
        let node = h.blocks().node(b);
        match (node.status, d) {
            (BlockStatus::Inadmissible, BlockData::Nearfield(m)) => {
                for (r, &i) in t.indices(node.row).iter().enumerate() {
                    for (c, &j) in t.indices(node.col).iter().enumerate() {
                        assert_eq!(m.get(r, c).to_bits(), g.get(i, j).to_bits());
                    }
                }
            }
            (BlockStatus::Admissible, BlockData::Coupling(s)) => assert_eq!(s.rows(), 27),
            (BlockStatus::Subdivided, BlockData::Subdivided) => {}
            other => panic!("block {b}: mismatched data {:?}", other.0),
        }
    }
}

#[test]
fn census_matches_recount() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let m = 3;
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &params(m), &Serial).unwrap();
    let k = m * m * m;
    let t = h.row_tree();
    let leaves: usize = t.leaves().iter().map(|&c| t.indices(c).len() * k).sum();
    let transfers = (t.len() - 1) * k * k;
    let b = h.blocks();
    let adm = b.count(BlockStatus::Admissible) * k * k;
    let near: usize = b
        .leaves()
        .filter(|&x| b.node(x).status == BlockStatus::Inadmissible)
        .map(|x| t.indices(b.node(x).row).len() * t.indices(b.node(x).col).len())
        .sum();
    assert_eq!(h.census().total(), leaves + transfers + adm + near);
}

#[test]
fn storage_below_quarter_of_dense_level3_m4() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let h = H2Matrix::from_mesh(&mesh, &Laplace, &params(4), &Serial).unwrap();
    let n = mesh.len();
    let total = h.census().total();
    assert!(
        (total as f64) < 0.25 * (n * n) as f64,
        "stored {total} scalars, {:.2} × n²",
        total as f64 / (n * n) as f64
    );
}

#[test]
fn coupling_examples() {
    let scheme = InterpolationScheme::new(3).unwrap();
    let a = h2dist_core::clustering::Aabb::new([0.2, -0.5, 0.0], [1.0, 0.5, 0.3]).unwrap();
    // mirror image through the plane x = 0
    let b = h2dist_core::clustering::Aabb::new([-1.0, -0.5, 0.0], [-0.2, 0.5, 0.3]).unwrap();
    let s = assemble_coupling(&Laplace, &a, &b, &scheme).unwrap();
    let m = 3;
    let mirror = |nu: usize| (m - 1 - nu / (m * m)) * m * m + nu % (m * m);
    for i in 0..27 {
        for j in 0..27 {
            assert!((s.get(i, j) - s.get(mirror(j), mirror(i))).abs() < 1e-15);
        }
    }
    let one = InterpolationScheme::new(1).unwrap();
    let s1 = assemble_coupling(&Laplace, &a, &b, &one).unwrap();
    let d = h2dist_core::math::dist(a.center(), b.center());
    assert_eq!(s1.as_slice(), &[1.0 / (4.0 * std::f64::consts::PI * d)]);
    assert!(assemble_coupling(&Laplace, &a, &a, &one).is_err());
}

#[test]
fn far_block_low_rank_approximation() {
    let mesh = TriangleMesh::sphere(2).unwrap();
    let tris = mesh.all_triangles();
    let g = assemble_dense(&mesh, &Laplace, &TriangleQuadRule::default(), 8192).unwrap();
    // Octant-sized leaves all touch at the origin, so use small leaves to
    // get admissible pairs on this mesh.
    let tree = ClusterTree::for_mesh(&mesh, 4).unwrap();
    let scheme = InterpolationScheme::new(3).unwrap();
    let rule = leaf_rule(&scheme, &TriangleQuadRule::default());
    let blocks = BlockTree::build(&tree, &tree, 1.0);
    let far = blocks
        .leaves()
        .filter(|&b| blocks.node(b).status == BlockStatus::Admissible)
        .map(|b| (blocks.node(b).row, blocks.node(b).col))
        .collect::<Vec<_>>();
    assert!(!far.is_empty());
    let mut worst: f64 = 0.0;
    for (tau, sigma) in far {
        let (bt, bs) = (tree.node(tau).bbox, tree.node(sigma).bbox);
        let v = leaf_matrix(&bt, tree.indices(tau), &tris, &scheme, &rule);
        let w = leaf_matrix(&bs, tree.indices(sigma), &tris, &scheme, &rule);
        let s = assemble_coupling(&Laplace, &bt, &bs, &scheme).unwrap();
        let approx = v.matmul(&s).matmul(&w.transpose());
        let exact = Matrix::from_fn(approx.rows(), approx.cols(), |r, c| {
            g.get(tree.indices(tau)[r], tree.indices(sigma)[c])
        });
        let diff = Matrix::from_fn(approx.rows(), approx.cols(), |r, c| {
            approx.get(r, c) - exact.get(r, c)
        });
        worst = worst.max(diff.frobenius() / exact.frobenius());
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn helmholtz_compression_matches_dense() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let kernel = Helmholtz { wavenumber: 1.0 };
    let g = assemble_dense(&mesh, &kernel, &TriangleQuadRule::default(), 8192).unwrap();
    let h = H2Matrix::from_mesh(&mesh, &kernel, &params(4), &Serial).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x: Vec<Complex64> = (0..mesh.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    assert!(relative_error(&h.mvm(&x).unwrap(), &gemv(&g, &x)) < 1e-3);
}

#[test]
fn separate_row_and_column_trees() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let rows = Arc::new(ClusterTree::for_mesh(&mesh, 16).unwrap());
    let cols = Arc::new(ClusterTree::for_mesh(&mesh, 32).unwrap());
    let blocks = BlockTree::build(&*rows, &*cols, 1.0);
    let scheme = InterpolationScheme::new(3).unwrap();
    let rule = TriangleQuadRule::default();
    let h = H2Matrix::assemble(
        &Laplace,
        &mesh.all_triangles(),
        rows,
        cols,
        blocks,
        &scheme,
        &rule,
        &Serial,
    )
    .unwrap();
    let g = assemble_dense(&mesh, &Laplace, &rule, 8192).unwrap();
    assert!(worst_error(&h, &g, 2, 10) < 5e-3);
    assert!(h.mvm(&[1.0]).is_err());
}
