use h2dist_core::clustering::{check_cover, Aabb, BlockTree, ClusterTree};
use h2dist_core::distributed::partition_indices;
use h2dist_core::geometry::Triangle;
use h2dist_core::transport::{SingleNode, Transport};
use h2dist_core::wire::{ClusterHeader, ClusterId, LeafGeometry, Reader, SharedHeader, Tag, Writer};
use num_complex::Complex64;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-10.0f64..10.0)
}

fn aabb() -> impl Strategy<Value = Aabb> {
    (point(), prop::array::uniform3(0.0f64..5.0))
        .prop_map(|(lo, d)| Aabb::new(lo, [lo[0] + d[0], lo[1] + d[1], lo[2] + d[2]]).unwrap())
}

fn cluster_id() -> impl Strategy<Value = ClusterId> {
    prop_oneof![
        (0usize..1000, 0usize..100_000).prop_map(|(o, p)| ClusterId::local(o, p)),
        (0usize..100_000).prop_map(ClusterId::shared),
    ]
}

fn header() -> impl Strategy<Value = ClusterHeader> {
    (aabb(), 0u32..3, cluster_id()).prop_map(|(bbox, child_count, id)| ClusterHeader { bbox, child_count, id })
}

proptest! {
    #[test]
    fn headers_round_trip(hs in prop::collection::vec(header(), 0..8)) {
        let mut w = Writer::new();
        for h in &hs {
            w.put_header(h);
        }
        let bytes = w.finish();
        prop_assert_eq!(bytes.len(), hs.len() * h2dist_core::wire::HEADER_BYTES);
        let mut r = Reader::new(&bytes);
        for h in &hs {
            prop_assert_eq!(&r.header().unwrap(), h);
        }
        prop_assert!(r.is_done());
    }

    #[test]
    fn shared_headers_round_trip(h in header(), nodes in prop::collection::btree_set(0usize..64, 1..6)) {
        let sh = SharedHeader { header: h, shareholders: nodes.into_iter().collect() };
        let mut w = Writer::new();
        w.put_shared_header(&sh);
        let bytes = w.finish();
        prop_assert_eq!(Reader::new(&bytes).shared_header().unwrap(), sh);
    }

    #[test]
    fn vectors_round_trip_bit_exactly(id in cluster_id(), v in prop::collection::vec(any::<f64>(), 0..40)) {
        let mut w = Writer::new();
        w.put_vector(id, &v);
        let bytes = w.finish();
        let (got_id, got) = Reader::new(&bytes).vector::<f64>().unwrap();
        prop_assert_eq!(got_id, id);
        prop_assert_eq!(got.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn complex_vectors_round_trip(id in cluster_id(), v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..20)) {
        let v: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let mut w = Writer::new();
        w.put_vector(id, &v);
        let bytes = w.finish();
        prop_assert_eq!(bytes.len(), 8 + 4 + 16 * v.len());
        prop_assert_eq!(Reader::new(&bytes).vector::<Complex64>().unwrap(), (id, v));
    }

    #[test]
    fn geometry_round_trips(id in cluster_id(), tris in prop::collection::vec((0usize..1 << 40, prop::array::uniform3(point())), 0..10)) {
        let g = LeafGeometry {
            id,
            indices: tris.iter().map(|t| t.0).collect(),
            triangles: tris.iter().map(|t| Triangle { vertices: t.1 }).collect(),
        };
        let mut w = Writer::new();
        w.put_geometry(&g);
        let bytes = w.finish();
        prop_assert_eq!(Reader::new(&bytes).geometry().unwrap(), g);
    }

    #[test]
    fn truncated_payloads_are_rejected(h in header(), cut in 0usize..h2dist_core::wire::HEADER_BYTES) {
        let mut w = Writer::new();
        w.put_header(&h);
        let bytes = w.finish();
        prop_assert!(Reader::new(&bytes[..cut]).header().is_err());
    }

    #[test]
    fn partition_covers_indices_once(pts in prop::collection::vec(point(), 1..200), p in 1usize..12) {
        prop_assume!(p <= pts.len());
        let parts = partition_indices(&pts, p).unwrap();
        prop_assert_eq!(parts.len(), p);
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        prop_assert!(parts.iter().all(|q| !q.is_empty() && q.windows(2).all(|w| w[0] < w[1])));
        all.sort_unstable();
        prop_assert_eq!(all, (0..pts.len()).collect::<Vec<_>>());
    }

    #[test]
    fn cluster_trees_satisfy_the_definition(
        pts in prop::collection::vec(point(), 1..300),
        radius in 0.0f64..0.5,
        leaf_limit in 1usize..20,
    ) {
        let idx: Vec<usize> = (0..pts.len()).map(|i| 3 * i + 1).collect();
        let boxes: Vec<Aabb> = pts
            .iter()
            .map(|p| Aabb::new([p[0] - radius, p[1] - radius, p[2] - radius], [p[0] + radius, p[1] + radius, p[2] + radius]).unwrap())
            .collect();
        let tree = ClusterTree::build(&idx, &pts, &boxes, leaf_limit).unwrap();
        tree.check(|i| boxes[(i - 1) / 3]).unwrap();
        prop_assert_eq!(tree.indices(0), &idx[..]);
        for c in tree.leaves() {
            prop_assert!(tree.indices(c).len() <= leaf_limit);
        }
        for (c, n) in tree.nodes().iter().enumerate() {
            prop_assert!(n.children.is_empty() || n.children.len() == 2);
            prop_assert!(n.children.iter().all(|&ch| ch > c));
        }
    }

    #[test]
    fn block_leaves_cover_the_product(
        pts in prop::collection::vec(point(), 1..120),
        eta in 0.25f64..4.0,
        leaf_limit in 1usize..12,
    ) {
        let idx: Vec<usize> = (0..pts.len()).collect();
        let boxes: Vec<Aabb> = pts.iter().map(|&p| Aabb::point(p)).collect();
        let tree = ClusterTree::build(&idx, &pts, &boxes, leaf_limit).unwrap();
        let blocks = BlockTree::build(&tree, &tree, eta);
        blocks.check_rules(&tree, &tree, eta).unwrap();
        let n = pts.len();
        check_cover(n, n, blocks.leaves().map(|b| (tree.indices(blocks.node(b).row), tree.indices(blocks.node(b).col)))).unwrap();
    }

    #[test]
    fn single_node_transport_keeps_order(msgs in prop::collection::vec((0usize..9, prop::collection::vec(any::<u8>(), 0..16)), 0..20)) {
        let mut t = SingleNode::new();
        for (k, m) in &msgs {
            t.send(0, Tag::ALL[*k], m.clone()).unwrap();
        }
        for (k, m) in &msgs {
            prop_assert_eq!(&t.recv(0, Tag::ALL[*k]).unwrap(), m);
        }
        prop_assert_eq!(t.census().total_messages(), msgs.len() as u64);
        prop_assert_eq!(t.census().total_bytes(), msgs.iter().map(|m| m.1.len() as u64).sum::<u64>());
    }
}
