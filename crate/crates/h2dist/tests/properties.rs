use h2dist::config::{RunConfig, Variant};
use h2dist::pipeline::Partition;
use h2dist::runner::random_vectors;
use h2dist::sim::run_nodes;
use h2dist_core::geometry::TriangleMesh;
use h2dist_core::transport::Transport;
use h2dist_core::wire::Tag;
use proptest::prelude::*;

/// Message `k` from `src` to `dst` in a script of `rounds` messages per pair.
fn payload(seed: u64, src: usize, dst: usize, k: usize) -> Vec<u8> {
    let h = seed ^ ((src as u64) << 40) ^ ((dst as u64) << 20) ^ k as u64;
    let len = (h % 23) as usize;
    (0..len).map(|i| (h.wrapping_mul(31).wrapping_add(i as u64) % 251) as u8).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn threads_deliver_per_pair_in_order(p in 1usize..6, rounds in 0usize..6, seed in any::<u64>()) {
        let out = run_nodes(p, |tr| {
            let me = tr.rank();
            for k in 0..rounds {
                for dst in 0..p {
                    tr.send(dst, Tag::ALL[k % Tag::ALL.len()], payload(seed, me, dst, k))?;
                }
            }
            for src in 0..p {
                for k in 0..rounds {
                    let got = tr.recv(src, Tag::ALL[k % Tag::ALL.len()])?;
                    if got != payload(seed, src, me, k) {
                        return Ok(false);
                    }
                }
            }
            Ok::<_, h2dist_core::ProtocolError>(true)
        });
        for (r, census) in out {
            prop_assert!(r.unwrap());
            prop_assert_eq!(census.total_messages(), (rounds * p) as u64);
        }
    }

    #[test]
    fn all_to_all_transposes(p in 1usize..6, seed in any::<u64>()) {
        let out = run_nodes(p, |tr| {
            let me = tr.rank();
            let sent = (0..p).map(|d| payload(seed, me, d, 0)).collect();
            tr.all_to_all(Tag::Children, sent)
        });
        for (me, (r, _)) in out.into_iter().enumerate() {
            let got = r.unwrap();
            for (src, m) in got.iter().enumerate() {
                prop_assert_eq!(m, &payload(seed, src, me, 0));
            }
        }
    }

    #[test]
    fn scatter_then_gather_is_identity(level in 0u32..3, p in 1usize..9, seed in any::<u64>()) {
        let mesh = TriangleMesh::sphere(level).unwrap();
        prop_assume!(p <= mesh.len());
        let part = Partition::new(&mesh, p, 4).unwrap();
        let x = random_vectors::<f64>(mesh.len(), 1, seed).pop().unwrap();
        prop_assert_eq!(part.gather(&part.scatter(&x)), x);
    }

    // TOML integers are signed, so config files hold seeds below 2^63.
    #[test]
    fn config_survives_toml(level in 0u32..6, m in 1usize..8, eta in 0.1f64..4.0, p in 1usize..9, seed in 0..=i64::MAX as u64) {
        let c = RunConfig { level, m, eta, p, seed, variant: Variant::Shared, threads: Some(2), ..Default::default() };
        let text = toml::to_string(&c).unwrap();
        prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }
}
