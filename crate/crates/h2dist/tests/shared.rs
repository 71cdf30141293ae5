use std::sync::Arc;

use h2dist::pipeline::{run_distributed_setup, run_shared_setup, Partition, SharedRun};
use h2dist::sim::run_nodes;
use h2dist_core::clustering::{check_cover, BlockStatus, BlockTree};
use h2dist_core::exec::Serial;
use h2dist_core::geometry::{Laplace, TriangleMesh};
use h2dist_core::h2::{forward, H2Params};
use h2dist_core::linalg::relative_error;
use h2dist_core::shared::{
    backward_shared, build_shared, build_shared_tree, check_shared_mirrors, check_shareholders, forward_shared,
    glue_shared, FanOut, SharedCoefficients, SharedSkeleton, SharedTree,
};
use h2dist_core::transport::Transport;
use h2dist_core::wire::{ClusterId, Tag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> H2Params {
    H2Params { order: 3, ..Default::default() }
}

fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn shared_trees(mesh: &TriangleMesh, p: usize) -> (Partition, Vec<SharedTree>, Vec<u64>) {
    let partition = Partition::new(mesh, p, 16).unwrap();
    let out = run_nodes(p, |tr| {
        let me = tr.rank();
        build_shared_tree(tr, partition.trees[me].clone(), partition.parts[me].anchor())
    });
    let sends = out.iter().map(|(_, c)| c.messages(Tag::Shareholders)).collect();
    (partition, out.into_iter().map(|(t, _)| t.unwrap()).collect(), sends)
}

fn skeletons(mesh: &TriangleMesh, p: usize, eta: f64, fan_out: FanOut) -> (Partition, Vec<SharedSkeleton>) {
    let partition = Partition::new(mesh, p, 16).unwrap();
    let out = run_nodes(p, |tr| {
        let me = tr.rank();
        let t = Arc::new(build_shared_tree(tr, partition.trees[me].clone(), partition.parts[me].anchor())?);
        build_shared(tr, t.clone(), t, eta, fan_out)
    });
    (partition, out.into_iter().map(|(s, _)| s.unwrap()).collect())
}

#[test]
fn two_nodes_share_one_root() {
    let mesh = TriangleMesh::sphere(2).unwrap();
    let (_, trees, _) = shared_trees(&mesh, 2);
    for t in &trees {
        assert_eq!(t.path.len(), 1);
        let root = &t.path[0];
        assert_eq!(root.header.shareholders, [0, 1]);
        let kids: Vec<ClusterId> = root.children.iter().map(|h| h.header.id).collect();
        assert_eq!(kids, [ClusterId::local(0, 0), ClusterId::local(1, 0)]);
    }
}

#[test]
fn four_nodes_pair_up_below_the_root() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let (_, trees, _) = shared_trees(&mesh, 4);
    let t = &trees[3];
    let sets: Vec<Vec<usize>> = t.path.iter().map(|c| c.header.shareholders.clone()).collect();
    assert_eq!(sets, [vec![0, 1, 2, 3], vec![2, 3]]);
    assert_eq!(trees[0].path[1].header.shareholders, [0, 1]);
}

#[test]
fn shareholder_conditions_hold() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    for p in [2, 3, 4, 8] {
        let (_, trees, sends) = shared_trees(&mesh, p);
        check_shareholders(&trees).unwrap_or_else(|e| panic!("p={p}: {e}"));
        // Only managers of a path cluster send its header upward.
        for t in &trees {
            let manages_something = t.path.iter().any(|c| {
                c.children.iter().any(|ch| ch.manager() == t.rank)
            });
            if !manages_something {
                assert_eq!(sends[t.rank], 0);
            }
        }
    }
}

#[test]
fn single_node_equals_sequential_block_tree() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let (partition, skels) = skeletons(&mesh, 1, 1.0, FanOut::PointToPoint);
    let tree = &partition.trees[0];
    let seq = BlockTree::build(&**tree, &**tree, 1.0);
    let s = &skels[0];
    assert_eq!(s.blocks.len(), seq.len());
    for (a, b) in s.blocks.iter().zip(seq.nodes()) {
        assert_eq!((a.row.preorder(), a.col.preorder(), a.status), (b.row, b.col, b.status));
        assert_eq!(a.children, b.children);
    }
}

fn gathered_leaves(skels: &[SharedSkeleton]) -> Vec<(ClusterId, ClusterId, BlockStatus)> {
    let mut out: Vec<_> = skels
        .iter()
        .flat_map(|s| s.owned_leaves().map(|b| (b.row, b.col, b.status)))
        .collect();
    out.sort_by_key(|e| (e.0, e.1));
    out
}

#[test]
fn gathered_leaves_partition_and_match_sequential_over_glued_tree() {
    for level in 1..=3 {
        let mesh = TriangleMesh::sphere(level).unwrap();
        for p in [1, 2, 4, 8] {
            for fan_out in [FanOut::PointToPoint, FanOut::Collective] {
                let (partition, skels) = skeletons(&mesh, p, 1.0, fan_out);
                check_shared_mirrors(&skels).unwrap_or_else(|e| panic!("level {level}, p={p}: {e}"));
                let trees: Vec<SharedTree> = skels.iter().map(|s| (*s.rows).clone()).collect();
                let (glued, ids) = glue_shared(&trees, &partition.parts).unwrap();
                let seq = BlockTree::build(&glued, &glued, 1.0);
                let mut expected: Vec<_> = seq
                    .leaves()
                    .map(|b| (ids[seq.node(b).row], ids[seq.node(b).col], seq.node(b).status))
                    .collect();
                expected.sort_by_key(|e| (e.0, e.1));
                let got = gathered_leaves(&skels);
                assert_eq!(got, expected, "level {level}, p={p}, {fan_out:?}");

                let pos: std::collections::BTreeMap<ClusterId, usize> =
                    ids.iter().enumerate().map(|(g, &id)| (id, g)).collect();
                let n = mesh.len();
                check_cover(
                    n,
                    n,
                    got.iter().map(|(r, c, _)| (glued.indices(pos[r]), glued.indices(pos[c]))),
                )
                .unwrap();
            }
        }
    }
}

#[test]
fn far_apart_parts_need_one_admissible_block() {
    let base = TriangleMesh::sphere(1).unwrap();
    let mut vertices = base.vertices().to_vec();
    vertices.extend(base.vertices().iter().map(|v| [v[0] + 100.0, v[1], v[2]]));
    let shift = base.vertices().len();
    let mut tris = base.connectivity().to_vec();
    tris.extend(base.connectivity().iter().map(|t| [t[0] + shift, t[1] + shift, t[2] + shift]));
    let mesh = TriangleMesh::new(vertices, tris).unwrap();
    let (_, skels) = skeletons(&mesh, 2, 4.0, FanOut::PointToPoint);
    for s in &skels {
        let admissible: Vec<_> = s
            .blocks
            .iter()
            .filter(|b| b.status == BlockStatus::Admissible && b.row.owner() != b.col.owner())
            .collect();
        assert_eq!(admissible.len(), 2, "node {}", s.rank);
        assert_eq!(s.blocks[0].status, BlockStatus::Subdivided);
    }
}

fn level3_run(p: usize, fan_out: FanOut) -> (TriangleMesh, SharedRun<f64>) {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let run = run_shared_setup(&mesh, &Laplace, &params(), p, fan_out, &Serial).unwrap();
    (mesh, run)
}

#[test]
fn shared_mvm_matches_sequential() {
    for p in [1, 2, 4, 8] {
        let (mesh, run) = level3_run(p, FanOut::PointToPoint);
        let (seq, _) = run.sequential(&mesh, &Laplace, &params(), &Serial).unwrap();
        for seed in 0..3 {
            let x = random_vector(mesh.len(), seed);
            let (y, _) = run.mvm(&x).unwrap();
            let z = seq.mvm(&x).unwrap();
            let err = relative_error(&y, &z);
            assert!(err <= 1e-12, "p={p}: {err:e}");
            if p == 1 {
                assert!(y.iter().zip(&z).all(|(a, b)| a.to_bits() == b.to_bits()));
            }
        }
    }
}

#[test]
fn forward_at_shared_root_matches_sequential() {
    let (mesh, run) = level3_run(2, FanOut::PointToPoint);
    let (seq, ids) = run.sequential(&mesh, &Laplace, &params(), &Serial).unwrap();
    let x = random_vector(mesh.len(), 4);
    let xhat_seq = forward(seq.col_tree(), seq.col_basis(), &x);
    let xs = run.partition.scatter(&x);
    let out = run_nodes(2, |tr| {
        let h = &run.nodes[tr.rank()];
        forward_shared(tr, &h.skeleton.cols, &h.col_basis, &h.col_transfer, &xs[tr.rank()])
    });
    let root = ids[0];
    assert!(root.is_shared());
    let manager_coeffs = out[0].0.as_ref().unwrap();
    let err = relative_error(&manager_coeffs.shared[&root], &xhat_seq[0]);
    assert!(err <= 1e-12, "{err:e}");
    // The non-manager sent its root's coefficients and nothing else.
    assert_eq!(out[1].1.messages(Tag::Xhat), 1);
    assert_eq!(out[0].1.messages(Tag::Xhat), 0);
    assert!(out[1].0.as_ref().unwrap().shared.is_empty());
}

#[test]
fn backward_of_zero_leaves_y_alone_and_is_adjoint_to_forward() {
    let (mesh, run) = level3_run(4, FanOut::PointToPoint);
    let x = random_vector(mesh.len(), 5);
    let xs = run.partition.scatter(&x);
    let k = run.nodes[0].row_basis.rank();
    // Random coefficients on every managed cluster, in one fixed global draw.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let yhats: Vec<SharedCoefficients<f64>> = run
        .nodes
        .iter()
        .map(|h| {
            let mut c = SharedCoefficients::zeros(&h.skeleton.rows, k);
            for v in c.local.iter_mut().chain(c.shared.values_mut()) {
                v.iter_mut().for_each(|e| *e = rng.gen_range(-1.0..=1.0));
            }
            c
        })
        .collect();
    let out = run_nodes(4, |tr| {
        let me = tr.rank();
        let h = &run.nodes[me];
        let fwd = forward_shared(tr, &h.skeleton.cols, &h.col_basis, &h.col_transfer, &xs[me])?;
        let mut zero = SharedCoefficients::zeros(&h.skeleton.rows, k);
        let mut y0 = vec![0.5; h.part.len()];
        backward_shared(tr, &h.skeleton.rows, &h.row_basis, &h.row_transfer, &mut zero, &mut y0)?;
        let mut yh = yhats[me].clone();
        let mut y = vec![0.0; h.part.len()];
        backward_shared(tr, &h.skeleton.rows, &h.row_basis, &h.row_transfer, &mut yh, &mut y)?;
        Ok::<_, h2dist_core::Error>((fwd, y0, y))
    });
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (me, (r, _)) in out.into_iter().enumerate() {
        let (fwd, y0, y) = r.unwrap();
        assert!(y0.iter().all(|&v| v == 0.5));
        // Summed over nodes, <x, V ŷ> = <x̂, ŷ>.
        lhs += xs[me].iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        for (id, v) in &yhats[me].shared {
            rhs += v.iter().zip(&fwd.shared[id]).map(|(a, b)| a * b).sum::<f64>();
        }
        for (c, v) in yhats[me].local.iter().enumerate() {
            rhs += v.iter().zip(&fwd.local[c]).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
}

#[test]
fn shared_stores_fewer_blocks_than_block_rows_at_eight_nodes() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let shared = run_shared_setup(&mesh, &Laplace, &params(), 8, FanOut::PointToPoint, &Serial).unwrap();
    let dist = run_distributed_setup(&mesh, &Laplace, &params(), 8, &Serial).unwrap();
    for (s, d) in shared.nodes.iter().zip(&dist.nodes) {
        assert!(s.stored_blocks() < d.stored_blocks(), "{} vs {}", s.stored_blocks(), d.stored_blocks());
    }
}

#[test]
fn fan_out_strategies_give_identical_results() {
    let (mesh, a) = level3_run(4, FanOut::PointToPoint);
    let (_, b) = level3_run(4, FanOut::Collective);
    let x = random_vector(mesh.len(), 8);
    let (ya, ca) = a.mvm(&x).unwrap();
    let (yb, cb) = b.mvm(&x).unwrap();
    assert!(ya.iter().zip(&yb).all(|(u, v)| u.to_bits() == v.to_bits()));
    assert_eq!(ca, cb);
    let (_, again) = level3_run(4, FanOut::PointToPoint);
    assert_eq!(a.build_census, again.build_census);
    assert_eq!(a.setup_census, again.setup_census);
    assert_eq!(a.tree_census, again.tree_census);
}
