use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::clustering::{Aabb, BlockStatus, BlockTree, ClusterTree};
use crate::error::{Error, Result};
use crate::exec::{Executor, Serial};
use crate::geometry::{galerkin_entry_between, Kernel, Triangle, TriangleMesh, TriangleQuadRule};
use crate::h2::mvm::{backward, forward, interaction, LocalColumns};
use crate::h2::{ClusterBasis, InterpolationScheme};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Per-block payload.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockData<T> {
    Subdivided,
    /// `S_τσ`, k × k.
    Coupling(Matrix<T>),
    /// `G|τ̂×σ̂`.
    Nearfield(Matrix<T>),
}

impl<T: Copy> BlockData<T> {
    pub fn stored(&self) -> usize {
        match self {
            BlockData::Subdivided => 0,
            BlockData::Coupling(m) | BlockData::Nearfield(m) => m.rows() * m.cols(),
        }
    }
}

/// `s[ν][μ] = g(ξ_{τ,ν}, ξ_{σ,μ})`.
pub fn assemble_coupling<K: Kernel>(
    kernel: &K,
    row: &Aabb,
    col: &Aabb,
    scheme: &InterpolationScheme,
) -> Result<Matrix<K::Scalar>> {
    let xr = scheme.points(row);
    let xc = scheme.points(col);
    let mut s = Matrix::filled(xr.len(), xc.len(), K::Scalar::zero());
    for (i, x) in xr.iter().enumerate() {
        for (j, y) in xc.iter().enumerate() {
            s.set(i, j, kernel.eval(*x, *y)?);
        }
    }
    Ok(s)
}

/// Galerkin entries for explicit row and column index lists with their
/// triangles.
pub fn assemble_nearfield<K: Kernel>(
    kernel: &K,
    rows: (&[usize], &[Triangle]),
    cols: (&[usize], &[Triangle]),
    rule: &TriangleQuadRule,
) -> Matrix<K::Scalar> {
    let mut g = Matrix::filled(rows.0.len(), cols.0.len(), K::Scalar::zero());
    for (r, (&i, ti)) in rows.0.iter().zip(rows.1).enumerate() {
        for (c, (&j, tj)) in cols.0.iter().zip(cols.1).enumerate() {
            g.set(r, c, galerkin_entry_between(kernel, (i, ti), (j, tj), rule));
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Params {
    pub order: usize,
    pub eta: f64,
    pub leaf_limit: usize,
    pub rule_order: usize,
}

impl Default for H2Params {
    fn default() -> Self {
        Self {
            order: 4,
            eta: 1.0,
            leaf_limit: crate::clustering::DEFAULT_LEAF_LIMIT,
            rule_order: crate::geometry::DEFAULT_RULE_ORDER,
        }
    }
}

impl H2Params {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order > 16 {
            return Err(Error::InvalidArgument("order must be in 1..=16".into()));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidArgument(
                "eta must be positive and finite".into(),
            ));
        }
        if self.leaf_limit == 0 {
            return Err(Error::InvalidArgument("leaf limit must be positive".into()));
        }
        if self.rule_order == 0 {
            return Err(Error::InvalidArgument(
                "quadrature order must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Stored scalar counts by matrix part.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StorageCensus {
    pub leaf: usize,
    pub transfer: usize,
    pub coupling: usize,
    pub nearfield: usize,
    pub admissible_blocks: usize,
    pub inadmissible_blocks: usize,
    pub block_nodes: usize,
}

impl StorageCensus {
    pub fn total(&self) -> usize {
        self.leaf + self.transfer + self.coupling + self.nearfield
    }

    pub fn add(&mut self, o: &StorageCensus) {
        self.leaf += o.leaf;
        self.transfer += o.transfer;
        self.coupling += o.coupling;
        self.nearfield += o.nearfield;
        self.admissible_blocks += o.admissible_blocks;
        self.inadmissible_blocks += o.inadmissible_blocks;
        self.block_nodes += o.block_nodes;
    }
}

#[derive(Debug, Clone)]
pub struct H2Matrix<T> {
    rows: Arc<ClusterTree>,
    cols: Arc<ClusterTree>,
    blocks: BlockTree,
    row_basis: Arc<ClusterBasis>,
    col_basis: Arc<ClusterBasis>,
    data: Vec<BlockData<T>>,
    n_rows: usize,
    n_cols: usize,
}

impl<T: Scalar> H2Matrix<T> {
    /// `triangles` is indexed by the (shared) index space of both trees. When
    /// `rows` and `cols` are the same tree the basis is built once and used
    /// for both sides.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble<K: Kernel<Scalar = T>>(
        kernel: &K,
        triangles: &[Triangle],
        rows: Arc<ClusterTree>,
        cols: Arc<ClusterTree>,
        blocks: BlockTree,
        scheme: &InterpolationScheme,
        rule: &TriangleQuadRule,
        exec: &impl Executor,
    ) -> Result<Self> {
        let row_basis = Arc::new(ClusterBasis::assemble(&rows, triangles, scheme, rule, exec));
        let col_basis = if Arc::ptr_eq(&rows, &cols) {
            row_basis.clone()
        } else {
            Arc::new(ClusterBasis::assemble(&cols, triangles, scheme, rule, exec))
        };
        let data = exec.map(blocks.len(), &|b| {
            let node = blocks.node(b);
            let (tau, sigma) = (rows.node(node.row), cols.node(node.col));
            match node.status {
                BlockStatus::Subdivided => Ok(BlockData::Subdivided),
                BlockStatus::Admissible => {
                    assemble_coupling(kernel, &tau.bbox, &sigma.bbox, scheme)
                        .map(BlockData::Coupling)
                }
                BlockStatus::Inadmissible => {
                    let rt: Vec<Triangle> = tau.indices.iter().map(|&i| triangles[i]).collect();
                    let ct: Vec<Triangle> = sigma.indices.iter().map(|&j| triangles[j]).collect();
                    Ok(BlockData::Nearfield(assemble_nearfield(
                        kernel,
                        (&tau.indices, &rt),
                        (&sigma.indices, &ct),
                        rule,
                    )))
                }
            }
        });
        let data = data.into_iter().collect::<Result<Vec<_>>>()?;
        let n_rows = rows.node(0).indices.len();
        let n_cols = cols.node(0).indices.len();
        Ok(Self {
            rows,
            cols,
            blocks,
            row_basis,
            col_basis,
            data,
            n_rows,
            n_cols,
        })
    }

    /// Clusters the mesh, builds the block tree and assembles.
    pub fn from_mesh<K: Kernel<Scalar = T>>(
        mesh: &TriangleMesh,
        kernel: &K,
        params: &H2Params,
        exec: &impl Executor,
    ) -> Result<Self> {
        params.validate()?;
        let tree = Arc::new(ClusterTree::for_mesh(mesh, params.leaf_limit)?);
        Self::from_tree(mesh, kernel, tree, params, exec)
    }

    /// Assembles with `tree` used for both rows and columns.
    pub fn from_tree<K: Kernel<Scalar = T>>(
        mesh: &TriangleMesh,
        kernel: &K,
        tree: Arc<ClusterTree>,
        params: &H2Params,
        exec: &impl Executor,
    ) -> Result<Self> {
        params.validate()?;
        let scheme = InterpolationScheme::new(params.order)?;
        let rule = TriangleQuadRule::new(params.rule_order)?;
        let blocks = BlockTree::build(&*tree, &*tree, params.eta);
        Self::assemble(
            kernel,
            &mesh.all_triangles(),
            tree.clone(),
            tree,
            blocks,
            &scheme,
            &rule,
            exec,
        )
    }

    pub fn rows(&self) -> usize {
        self.n_rows
    }

    pub fn cols(&self) -> usize {
        self.n_cols
    }

    pub fn row_tree(&self) -> &Arc<ClusterTree> {
        &self.rows
    }

    pub fn col_tree(&self) -> &Arc<ClusterTree> {
        &self.cols
    }

    pub fn blocks(&self) -> &BlockTree {
        &self.blocks
    }

    pub fn block_data(&self) -> &[BlockData<T>] {
        &self.data
    }

    pub fn row_basis(&self) -> &ClusterBasis {
        &self.row_basis
    }

    pub fn col_basis(&self) -> &ClusterBasis {
        &self.col_basis
    }

    pub fn census(&self) -> StorageCensus {
        let (mut leaf, mut transfer) = self.row_basis.stored();
        if !Arc::ptr_eq(&self.row_basis, &self.col_basis) {
            let (l, t) = self.col_basis.stored();
            leaf += l;
            transfer += t;
        }
        let mut c = StorageCensus {
            leaf,
            transfer,
            block_nodes: self.blocks.len(),
            ..Default::default()
        };
        for d in &self.data {
            match d {
                BlockData::Coupling(_) => {
                    c.coupling += d.stored();
                    c.admissible_blocks += 1;
                }
                BlockData::Nearfield(_) => {
                    c.nearfield += d.stored();
                    c.inadmissible_blocks += 1;
                }
                BlockData::Subdivided => {}
            }
        }
        c
    }

    /// `y ← y + G x`.
    pub fn mvm_acc(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                actual: y.len(),
            });
        }
        let xhat = forward(&self.cols, &self.col_basis, x);
        let k = self.row_basis.rank();
        let mut yhat = alloc::vec![alloc::vec![T::zero(); k]; self.rows.len()];
        let cols = LocalColumns {
            tree: &self.cols,
            xhat: &xhat,
            x,
        };
        interaction(&self.blocks, &self.data, &self.rows, &cols, &mut yhat, y);
        backward(&self.rows, &self.row_basis, &mut yhat, y);
        Ok(())
    }

    pub fn mvm(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = alloc::vec![T::zero(); self.n_rows];
        self.mvm_acc(x, &mut y)?;
        Ok(y)
    }
}

impl<T: Scalar> H2Matrix<T> {
    pub fn serial_from_mesh<K: Kernel<Scalar = T>>(
        mesh: &TriangleMesh,
        kernel: &K,
        params: &H2Params,
    ) -> Result<Self> {
        Self::from_mesh(mesh, kernel, params, &Serial)
    }
}
