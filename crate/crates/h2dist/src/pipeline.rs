//! End-to-end drivers: partition a mesh, run the distributed or shared
//! construction on simulated nodes, multiply, gather, and build the matching
//! sequential reference.

use std::sync::Arc;

use h2dist_core::clustering::ClusterTree;
use h2dist_core::distributed::{
    build_block_distributed, glue_trees, mvm_distributed, setup_distributed, DistributedH2, LocalPart,
};
use h2dist_core::exec::Executor;
use h2dist_core::geometry::{Kernel, TriangleMesh, TriangleQuadRule};
use h2dist_core::h2::{H2Matrix, H2Params, InterpolationScheme};
use h2dist_core::shared::{
    build_shared, build_shared_tree, glue_shared, mvm_shared, setup_shared, FanOut, SharedH2, SharedTree,
};
use h2dist_core::transport::{MessageCensus, Transport};
use h2dist_core::wire::ClusterId;
use h2dist_core::{Error, Result, Scalar};

use crate::sim::run_nodes;

/// Mesh parts and their local cluster trees, one per node.
#[derive(Debug, Clone)]
pub struct Partition {
    pub parts: Vec<LocalPart>,
    pub trees: Vec<Arc<ClusterTree>>,
}

impl Partition {
    pub fn new(mesh: &TriangleMesh, p: usize, leaf_limit: usize) -> Result<Self> {
        let parts = LocalPart::split(mesh, p)?;
        let trees = parts
            .iter()
            .map(|part| part.tree(leaf_limit).map(Arc::new))
            .collect::<Result<_>>()?;
        Ok(Self { parts, trees })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Restriction of a global vector to each node's indices.
    pub fn scatter<T: Copy>(&self, x: &[T]) -> Vec<Vec<T>> {
        self.parts.iter().map(|p| p.global.iter().map(|&i| x[i]).collect()).collect()
    }

    pub fn gather<T: Scalar>(&self, locals: &[Vec<T>]) -> Vec<T> {
        let n = self.parts.iter().map(LocalPart::len).sum();
        let mut y = vec![T::zero(); n];
        for (part, yl) in self.parts.iter().zip(locals) {
            for (&i, &v) in part.global.iter().zip(yl) {
                y[i] = v;
            }
        }
        y
    }
}

fn unzip_results<R>(out: Vec<(Result<R>, MessageCensus)>) -> Result<(Vec<R>, Vec<MessageCensus>)> {
    let mut rs = Vec::with_capacity(out.len());
    let mut cs = Vec::with_capacity(out.len());
    for (r, c) in out {
        rs.push(r?);
        cs.push(c);
    }
    Ok((rs, cs))
}

fn tools(params: &H2Params) -> Result<(InterpolationScheme, TriangleQuadRule)> {
    params.validate()?;
    Ok((InterpolationScheme::new(params.order)?, TriangleQuadRule::new(params.rule_order)?))
}

#[derive(Debug, Clone)]
pub struct DistributedRun<T> {
    pub partition: Partition,
    pub nodes: Vec<DistributedH2<T>>,
    /// Messages of the block-tree construction, per node.
    pub build_census: Vec<MessageCensus>,
    /// Messages of the matrix setup, per node.
    pub setup_census: Vec<MessageCensus>,
}

pub fn run_distributed_setup<K>(
    mesh: &TriangleMesh,
    kernel: &K,
    params: &H2Params,
    p: usize,
    exec: &impl Executor,
) -> Result<DistributedRun<K::Scalar>>
where
    K: Kernel + Sync,
{
    let (scheme, rule) = tools(params)?;
    let partition = Partition::new(mesh, p, params.leaf_limit)?;
    let out = run_nodes(p, |tr| {
        let me = tr.rank();
        let tree = partition.trees[me].clone();
        let skel = build_block_distributed(tr, tree.clone(), tree, params.eta)?;
        let built = tr.census().clone();
        let h = setup_distributed(tr, skel, partition.parts[me].clone(), kernel, &scheme, &rule, exec)?;
        Ok((h, built))
    });
    let (pairs, totals) = unzip_results(out)?;
    let (nodes, build_census): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let setup_census = totals.iter().zip(&build_census).map(|(t, b)| t.since(b)).collect();
    Ok(DistributedRun {
        partition,
        nodes,
        build_census,
        setup_census,
    })
}

impl<T: Scalar> DistributedRun<T> {
    /// Gathered `y = G x` with each node's message census.
    pub fn mvm(&self, x: &[T]) -> Result<(Vec<T>, Vec<MessageCensus>)> {
        check_len(x, &self.partition)?;
        let xs = self.partition.scatter(x);
        let out = run_nodes(self.nodes.len(), |tr| {
            let me = tr.rank();
            mvm_distributed(tr, &self.nodes[me], &xs[me])
        });
        let (ys, cs) = unzip_results(out)?;
        Ok((self.partition.gather(&ys), cs))
    }

    /// Sequential H²-matrix over the glued local trees.
    pub fn sequential<K: Kernel<Scalar = T>>(
        &self,
        mesh: &TriangleMesh,
        kernel: &K,
        params: &H2Params,
        exec: &impl Executor,
    ) -> Result<H2Matrix<T>> {
        let trees: Vec<ClusterTree> = self.partition.trees.iter().map(|t| (**t).clone()).collect();
        let (glued, _) = glue_trees(&self.partition.parts, &trees);
        H2Matrix::from_tree(mesh, kernel, Arc::new(glued), params, exec)
    }
}

fn check_len<T>(x: &[T], partition: &Partition) -> Result<()> {
    let n: usize = partition.parts.iter().map(LocalPart::len).sum();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SharedRun<T> {
    pub partition: Partition,
    pub nodes: Vec<SharedH2<T>>,
    /// Messages of the shared tree construction, per node.
    pub tree_census: Vec<MessageCensus>,
    /// Messages of the block-tree construction, per node.
    pub build_census: Vec<MessageCensus>,
    pub setup_census: Vec<MessageCensus>,
}

pub fn run_shared_setup<K>(
    mesh: &TriangleMesh,
    kernel: &K,
    params: &H2Params,
    p: usize,
    fan_out: FanOut,
    exec: &impl Executor,
) -> Result<SharedRun<K::Scalar>>
where
    K: Kernel + Sync,
{
    let (scheme, rule) = tools(params)?;
    let partition = Partition::new(mesh, p, params.leaf_limit)?;
    let out = run_nodes(p, |tr| {
        let me = tr.rank();
        let part = &partition.parts[me];
        let tree = Arc::new(build_shared_tree(tr, partition.trees[me].clone(), part.anchor())?);
        let c0 = tr.census().clone();
        let skel = build_shared(tr, tree.clone(), tree, params.eta, fan_out)?;
        let c1 = tr.census().clone();
        let h = setup_shared(tr, skel, part.clone(), kernel, &scheme, &rule, exec)?;
        Ok((h, c0, c1))
    });
    let (triples, totals) = unzip_results(out)?;
    let mut nodes = Vec::with_capacity(p);
    let mut tree_census = Vec::with_capacity(p);
    let mut build_census = Vec::with_capacity(p);
    let mut setup_census = Vec::with_capacity(p);
    for ((h, c0, c1), total) in triples.into_iter().zip(totals) {
        nodes.push(h);
        build_census.push(c1.since(&c0));
        setup_census.push(total.since(&c1));
        tree_census.push(c0);
    }
    Ok(SharedRun {
        partition,
        nodes,
        tree_census,
        build_census,
        setup_census,
    })
}

impl<T: Scalar> SharedRun<T> {
    pub fn mvm(&self, x: &[T]) -> Result<(Vec<T>, Vec<MessageCensus>)> {
        check_len(x, &self.partition)?;
        let xs = self.partition.scatter(x);
        let out = run_nodes(self.nodes.len(), |tr| {
            let me = tr.rank();
            mvm_shared(tr, &self.nodes[me], &xs[me])
        });
        let (ys, cs) = unzip_results(out)?;
        Ok((self.partition.gather(&ys), cs))
    }

    pub fn shared_trees(&self) -> Vec<SharedTree> {
        self.nodes.iter().map(|h| (*h.skeleton.rows).clone()).collect()
    }

    /// Sequential H²-matrix over the glued shared tree, with the id of every
    /// glued cluster.
    pub fn sequential<K: Kernel<Scalar = T>>(
        &self,
        mesh: &TriangleMesh,
        kernel: &K,
        params: &H2Params,
        exec: &impl Executor,
    ) -> Result<(H2Matrix<T>, Vec<ClusterId>)> {
        let (glued, ids) = glue_shared(&self.shared_trees(), &self.partition.parts)?;
        Ok((H2Matrix::from_tree(mesh, kernel, Arc::new(glued), params, exec)?, ids))
    }
}
