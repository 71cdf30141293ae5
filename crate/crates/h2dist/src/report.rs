//! Serializable run reports and sweep rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use h2dist_core::geometry::TriangleMesh;
use h2dist_core::h2::StorageCensus;
use h2dist_core::transport::MessageCensus;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub max_diameter: f64,
    pub min_area: f64,
    pub total_area: f64,
}

impl MeshStats {
    pub fn of(mesh: &TriangleMesh) -> Self {
        let tris = mesh.all_triangles();
        Self {
            vertices: mesh.vertices().len(),
            triangles: tris.len(),
            max_diameter: tris.iter().map(|t| t.diameter()).fold(0.0, f64::max),
            min_area: tris.iter().map(|t| t.area()).fold(f64::INFINITY, f64::min),
            total_area: tris.iter().map(|t| t.area()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Storage {
    pub leaf: usize,
    pub transfer: usize,
    pub coupling: usize,
    pub nearfield: usize,
    pub total: usize,
    pub admissible_blocks: usize,
    pub inadmissible_blocks: usize,
    pub block_nodes: usize,
}

impl From<StorageCensus> for Storage {
    fn from(c: StorageCensus) -> Self {
        Self {
            leaf: c.leaf,
            transfer: c.transfer,
            coupling: c.coupling,
            nearfield: c.nearfield,
            total: c.total(),
            admissible_blocks: c.admissible_blocks,
            inadmissible_blocks: c.inadmissible_blocks,
            block_nodes: c.block_nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traffic {
    pub messages: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTraffic {
    pub total: Traffic,
    /// Non-empty tags only.
    pub by_tag: BTreeMap<String, Traffic>,
}

impl From<&MessageCensus> for PhaseTraffic {
    fn from(c: &MessageCensus) -> Self {
        Self {
            total: Traffic {
                messages: c.total_messages(),
                bytes: c.total_bytes(),
            },
            by_tag: c
                .entries()
                .filter(|&(_, m, _)| m > 0)
                .map(|(tag, messages, bytes)| (tag.name().to_string(), Traffic { messages, bytes }))
                .collect(),
        }
    }
}

/// Storage and messages of one simulated node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub rank: usize,
    pub indices: usize,
    pub stored_blocks: usize,
    pub storage: Storage,
    /// Construction phases in order (`tree` for the shared variant, `build`,
    /// `setup`) followed by `mvm` for one multiplication.
    pub messages: BTreeMap<String, PhaseTraffic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetric {
    pub max: f64,
    pub mean: f64,
}

impl ErrorMetric {
    pub fn of(errors: &[f64]) -> Self {
        Self {
            max: errors.iter().copied().fold(0.0, f64::max),
            mean: errors.iter().sum::<f64>() / errors.len() as f64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Errors {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<ErrorMetric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequential: Option<ErrorMetric>,
}

/// Wall-clock medians in seconds. Kept apart from the rest of the report,
/// which is byte-stable across reruns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub repeats: usize,
    pub setup_s: f64,
    pub mvm_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub n: usize,
    pub mesh: MeshStats,
    /// Entries of the uncompressed matrix.
    pub dense_scalars: usize,
    /// Compressed storage summed over nodes; all zero for the dense variant.
    pub storage: Storage,
    pub scalars_per_index: f64,
    /// Present for the distributed and shared variants.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeReport>,
    pub errors: Errors,
    pub timing: Timing,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report without its timing, as compared across reruns.
    pub fn stable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        v.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    pub fn max_stored_blocks(&self) -> Option<usize> {
        self.nodes.iter().map(|n| n.stored_blocks).max()
    }

    pub fn total_messages(&self) -> u64 {
        self.nodes.iter().flat_map(|n| n.messages.values()).map(|t| t.total.messages).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.nodes.iter().flat_map(|n| n.messages.values()).map(|t| t.total.bytes).sum()
    }
}

/// One line of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub variant: String,
    pub level: u32,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub storage_total: usize,
    pub scalars_per_index: f64,
    /// Ratio of `scalars_per_index` to the previous row's.
    pub growth: Option<f64>,
    pub max_stored_blocks: Option<usize>,
    pub messages: u64,
    pub bytes: u64,
    pub error_dense: Option<f64>,
    pub error_sequential: Option<f64>,
    /// Relative deviation of this row's products from the first row's.
    pub deviation_from_first: Option<f64>,
    pub setup_s: f64,
    pub mvm_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<RunReport>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
