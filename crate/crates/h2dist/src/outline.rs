//! Cluster tree dumps as indented text or a flat JSON list.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use h2dist_core::clustering::ClusterTree;
use h2dist_core::geometry::TriangleMesh;
use h2dist_core::shared::{build_shared_tree, glue_shared};
use h2dist_core::transport::Transport;
use h2dist_core::wire::ClusterId;

use crate::config::{RunConfig, Variant};
use crate::pipeline::Partition;
use crate::sim::run_nodes;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineNode {
    pub id: String,
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub indices: usize,
    pub children: Vec<String>,
}

/// One tree with the id of every cluster, in preorder.
#[derive(Debug, Clone)]
pub struct LabelledTree {
    /// Owning node, or `None` for a tree spanning all nodes.
    pub node: Option<usize>,
    pub tree: Arc<ClusterTree>,
    pub ids: Vec<ClusterId>,
}

impl LabelledTree {
    pub fn outline(&self) -> Vec<OutlineNode> {
        self.tree
            .nodes()
            .iter()
            .enumerate()
            .map(|(c, n)| OutlineNode {
                id: self.ids[c].to_string(),
                min: n.bbox.min,
                max: n.bbox.max,
                indices: n.indices.len(),
                children: n.children.iter().map(|&ch| self.ids[ch].to_string()).collect(),
            })
            .collect()
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        if let Some(node) = self.node {
            s.push_str(&format!("# node {node}\n"));
        }
        self.tree
            .write_outline(&mut s, |c| self.ids[c].to_string())
            .expect("writing to a string");
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDump {
    pub node: Option<usize>,
    pub clusters: Vec<OutlineNode>,
}

/// The trees a configuration clusters its mesh into: one global tree for the
/// dense and H² variants, one local tree per node for the distributed
/// variant, and the glued shared tree for the shared variant.
pub fn trees_for(cfg: &RunConfig) -> Result<Vec<LabelledTree>, BenchError> {
    cfg.validate()?;
    let mesh = TriangleMesh::sphere(cfg.level)?;
    match cfg.variant {
        Variant::Dense | Variant::H2 => {
            let tree = ClusterTree::for_mesh(&mesh, cfg.leaf_limit)?;
            let ids = (0..tree.len()).map(|c| ClusterId::local(0, c)).collect();
            Ok(vec![LabelledTree { node: None, tree: Arc::new(tree), ids }])
        }
        Variant::Distributed => {
            let partition = Partition::new(&mesh, cfg.p, cfg.leaf_limit)?;
            Ok(partition
                .trees
                .iter()
                .enumerate()
                .map(|(rank, t)| LabelledTree {
                    node: Some(rank),
                    tree: t.clone(),
                    ids: (0..t.len()).map(|c| ClusterId::local(rank, c)).collect(),
                })
                .collect())
        }
        Variant::Shared => {
            let partition = Partition::new(&mesh, cfg.p, cfg.leaf_limit)?;
            let out = run_nodes(cfg.p, |tr| {
                let me = tr.rank();
                build_shared_tree(tr, partition.trees[me].clone(), partition.parts[me].anchor())
            });
            let trees = out.into_iter().map(|(t, _)| t).collect::<Result<Vec<_>, _>>().map_err(h2dist_core::Error::from)?;
            let (tree, ids) = glue_shared(&trees, &partition.parts)?;
            Ok(vec![LabelledTree { node: None, tree: Arc::new(tree), ids }])
        }
    }
}

pub fn dump_json(trees: &[LabelledTree]) -> String {
    let dumps: Vec<TreeDump> = trees.iter().map(|t| TreeDump { node: t.node, clusters: t.outline() }).collect();
    serde_json::to_string_pretty(&dumps).expect("outlines serialize")
}

pub fn dump_text(trees: &[LabelledTree]) -> String {
    trees.iter().map(LabelledTree::text).collect()
}
