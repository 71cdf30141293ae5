use std::sync::Arc;

use h2dist_core::clustering::BlockTree;
use h2dist_core::distributed::{build_block_distributed, mvm_distributed, setup_distributed, LocalPart};
use h2dist_core::exec::Serial;
use h2dist_core::geometry::{Laplace, TriangleMesh, TriangleQuadRule};
use h2dist_core::h2::{H2Matrix, H2Params, InterpolationScheme};
use h2dist_core::transport::{SingleNode, Transport};
use h2dist_core::wire::Tag;

#[test]
fn single_node_matches_sequential_bit_for_bit() {
    let mesh = TriangleMesh::sphere(3).unwrap();
    let params = H2Params { order: 3, ..Default::default() };
    let part = LocalPart::split(&mesh, 1).unwrap().remove(0);
    let tree = Arc::new(part.tree(params.leaf_limit).unwrap());
    let mut tr = SingleNode::new();
    let skel = build_block_distributed(&mut tr, tree.clone(), tree.clone(), params.eta).unwrap();
    let seq_blocks = BlockTree::build(&*tree, &*tree, params.eta);
    let mirror = &skel.recv_col[0];
    assert_eq!(skel.row_blocks[0].len(), seq_blocks.len());
    for (d, s) in skel.row_blocks[0].nodes().iter().zip(seq_blocks.nodes()) {
        assert_eq!((d.row, mirror.id(d.col).preorder(), d.status), (s.row, s.col, s.status));
        assert_eq!(d.children, s.children);
    }
    assert_eq!(skel.col_blocks[0].len(), seq_blocks.len());

    let scheme = InterpolationScheme::new(params.order).unwrap();
    let rule = TriangleQuadRule::new(params.rule_order).unwrap();
    let h = setup_distributed(&mut tr, skel, part, &Laplace, &scheme, &rule, &Serial).unwrap();
    let seq = H2Matrix::from_tree(&mesh, &Laplace, tree, &params, &Serial).unwrap();
    assert_eq!(h.data[0].as_slice(), seq.block_data());

    let x: Vec<f64> = (0..mesh.len()).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
    let y = mvm_distributed(&mut tr, &h, &x).unwrap();
    let z = seq.mvm(&x).unwrap();
    assert!(y.iter().zip(&z).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(tr.census().messages(Tag::Geometry), 0);
}
