//! Reducible bipartite algebras `(⊕_k B(C^{n_k})) ⊗ (⊕_l B(C^{m_l}))`.
//!
//! The full space is `C^{Σn_k} ⊗ C^{Σm_l}` in lexicographic order: basis
//! vector `(a, b)` sits at index `a·Σm_l + b`. Block `(k, l)` is the set of
//! indices whose `a` lies in the `k`-th A-block and `b` in the `l`-th
//! B-block; these indices are generally not contiguous. [`block_layout`]
//! additionally assigns each block a contiguous range in the block-ordered
//! basis (k-major, then l), which is what `offset` refers to.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::states::{gaussian_complex, DensityMatrix};

/// Absolute tolerance for the block-scalar classicality test.
pub const CLASSICAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraJson")]
pub struct BipartiteAlgebra {
    blocks_a: Vec<usize>,
    blocks_b: Vec<usize>,
}

#[derive(Deserialize)]
struct AlgebraJson {
    blocks_a: Vec<usize>,
    blocks_b: Vec<usize>,
}

impl TryFrom<AlgebraJson> for BipartiteAlgebra {
    type Error = Error;

    fn try_from(j: AlgebraJson) -> Result<Self> {
        BipartiteAlgebra::new(j.blocks_a, j.blocks_b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSlot {
    pub k: usize,
    pub l: usize,
    pub offset: usize,
    pub size: usize,
}

impl BipartiteAlgebra {
    pub fn new(blocks_a: Vec<usize>, blocks_b: Vec<usize>) -> Result<Self> {
        if blocks_a.is_empty() || blocks_b.is_empty() {
            return Err(invalid("algebra needs at least one block on each side"));
        }
        if blocks_a.iter().chain(&blocks_b).any(|&n| n == 0) {
            return Err(invalid("block sizes must be positive"));
        }
        Ok(Self { blocks_a, blocks_b })
    }

    /// The full algebra `B(C^d_a) ⊗ B(C^d_b)`.
    pub fn full(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(vec![d_a], vec![d_b])
    }

    /// Parses `"n1,n2,...;m1,m2,..."`. Without a `;` the string lists the
    /// A-side blocks and the B side is trivial (`{1}`).
    pub fn parse(s: &str) -> Result<Self> {
        fn list(part: &str) -> Result<Vec<usize>> {
            part.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| invalid(format!("bad block size {t:?}"))))
                .collect()
        }
        match s.split_once(';') {
            Some((a, b)) => Self::new(list(a)?, list(b)?),
            None => Self::new(list(s)?, vec![1]),
        }
    }

    pub fn blocks_a(&self) -> &[usize] {
        &self.blocks_a
    }

    pub fn blocks_b(&self) -> &[usize] {
        &self.blocks_b
    }

    pub fn dim_a(&self) -> usize {
        self.blocks_a.iter().sum()
    }

    pub fn dim_b(&self) -> usize {
        self.blocks_b.iter().sum()
    }

    pub fn total_dim(&self) -> usize {
        self.dim_a() * self.dim_b()
    }

    pub fn a_is_commutative(&self) -> bool {
        self.blocks_a.iter().all(|&n| n == 1)
    }

    pub fn b_is_commutative(&self) -> bool {
        self.blocks_b.iter().all(|&m| m == 1)
    }

    pub fn is_commutative(&self) -> bool {
        self.a_is_commutative() && self.b_is_commutative()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks_a.len() * self.blocks_b.len()
    }

    fn offsets(blocks: &[usize]) -> Vec<usize> {
        blocks
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect()
    }

    /// Full-space indices of block `(k, l)`, ordered lexicographically.
    pub fn block_indices(&self, k: usize, l: usize) -> Vec<usize> {
        let off_a = Self::offsets(&self.blocks_a)[k];
        let off_b = Self::offsets(&self.blocks_b)[l];
        let d_b = self.dim_b();
        let mut idx = Vec::with_capacity(self.blocks_a[k] * self.blocks_b[l]);
        for i in 0..self.blocks_a[k] {
            for j in 0..self.blocks_b[l] {
                idx.push((off_a + i) * d_b + off_b + j);
            }
        }
        idx
    }

    /// For each full-space index, the position of its block in
    /// [`block_layout`] order.
    pub fn block_of_index(&self) -> Vec<usize> {
        let mut owner = vec![0; self.total_dim()];
        for (slot, b) in block_layout(self).iter().enumerate() {
            for i in self.block_indices(b.k, b.l) {
                owner[i] = slot;
            }
        }
        owner
    }

    /// Maps block-ordered basis positions to full-space indices.
    pub fn block_order_permutation(&self) -> Vec<usize> {
        block_layout(self).iter().flat_map(|b| self.block_indices(b.k, b.l)).collect()
    }

    /// Largest entry of `m` coupling two different blocks.
    pub fn off_block_deviation(&self, m: &ComplexMatrix) -> Result<f64> {
        if m.dim() != self.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.total_dim(), found: m.dim() });
        }
        let owner = self.block_of_index();
        let n = m.dim();
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                if owner[r] != owner[c] {
                    dev = dev.max(m[(r, c)].norm());
                }
            }
        }
        Ok(dev)
    }

    /// Errors with [`Error::NotInAlgebra`] unless `m` is block-diagonal
    /// within `tol · max(1, ‖m‖_F)`.
    pub fn check_member(&self, m: &ComplexMatrix, tol: f64) -> Result<()> {
        let deviation = self.off_block_deviation(m)?;
        if deviation > tol * m.frobenius_norm().max(1.0) {
            return Err(Error::NotInAlgebra { deviation });
        }
        Ok(())
    }

    /// Places per-block matrices (in layout order) into the full space.
    pub fn embed_blocks(&self, blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let layout = block_layout(self);
        if blocks.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), found: blocks.len() });
        }
        let mut out = ComplexMatrix::zeros(self.total_dim());
        for (slot, block) in layout.iter().zip(blocks) {
            if block.dim() != slot.size {
                return Err(Error::DimensionMismatch { expected: slot.size, found: block.dim() });
            }
            let idx = self.block_indices(slot.k, slot.l);
            for (r, &ir) in idx.iter().enumerate() {
                for (c, &ic) in idx.iter().enumerate() {
                    out[(ir, ic)] = block[(r, c)];
                }
            }
        }
        Ok(out)
    }
}

/// Blocks in k-major order with contiguous offsets in the block-ordered basis.
pub fn block_layout(alg: &BipartiteAlgebra) -> Vec<BlockSlot> {
    let mut out = Vec::with_capacity(alg.num_blocks());
    let mut offset = 0;
    for (k, &n) in alg.blocks_a.iter().enumerate() {
        for (l, &m) in alg.blocks_b.iter().enumerate() {
            out.push(BlockSlot { k, l, offset, size: n * m });
            offset += n * m;
        }
    }
    out
}

/// Weights `p_kl ≥ 0`, `Σ p_kl = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStateWeights {
    pub p: Vec<Vec<f64>>,
}

impl ClassicalStateWeights {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        if p.iter().flatten().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(invalid("classical weights must be finite and nonnegative"));
        }
        let total: f64 = p.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("classical weights sum to {total}, not 1")));
        }
        Ok(Self { p })
    }
}

/// `ρ = ⊕_{k,l} p_kl I/(n_k m_l)`
pub fn classical_state(alg: &BipartiteAlgebra, w: &ClassicalStateWeights) -> Result<DensityMatrix> {
    let w = ClassicalStateWeights::new(w.p.clone())?;
    if w.p.len() != alg.blocks_a.len() || w.p.iter().any(|row| row.len() != alg.blocks_b.len()) {
        return Err(invalid(format!("weights must be {}×{}", alg.blocks_a.len(), alg.blocks_b.len())));
    }
    let blocks: Vec<ComplexMatrix> = block_layout(alg)
        .iter()
        .map(|s| ComplexMatrix::identity(s.size).scale_real(w.p[s.k][s.l] / s.size as f64))
        .collect();
    Ok(DensityMatrix::from_trusted(alg.embed_blocks(&blocks)?))
}

/// Extreme points of the classical-state simplex, one per block, in layout order.
pub fn classical_state_vertices(alg: &BipartiteAlgebra) -> Vec<DensityMatrix> {
    let na = alg.blocks_a.len();
    let nb = alg.blocks_b.len();
    block_layout(alg)
        .iter()
        .map(|s| {
            let mut p = vec![vec![0.0; nb]; na];
            p[s.k][s.l] = 1.0;
            classical_state(alg, &ClassicalStateWeights { p }).expect("vertex weights are valid")
        })
        .collect()
}

/// Matrix-unit pair `(X, Y)` in one block with `tr(ρ[X, Y]) = value ≠ 0`.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorCertificate {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub value: C64,
}

/// Structural classicality test: `ρ` must be block-diagonal (else
/// [`Error::NotInAlgebra`]); it is classical iff every block is a scalar
/// multiple of the identity.
pub fn is_classical_state(rho: &DensityMatrix, alg: &BipartiteAlgebra) -> Result<bool> {
    Ok(classicality_certificate(rho, alg)?.is_none())
}

/// Returns the commutator certificate with the largest `|tr(ρ[X,Y])|` among
/// matrix units inside blocks, or `None` if every block of `ρ` is scalar
/// within [`CLASSICAL_TOLERANCE`].
pub fn classicality_certificate(rho: &DensityMatrix, alg: &BipartiteAlgebra) -> Result<Option<CommutatorCertificate>> {
    let m = rho.matrix();
    let deviation = alg.off_block_deviation(m)?;
    if deviation > CLASSICAL_TOLERANCE {
        return Err(Error::NotInAlgebra { deviation });
    }
    let n = m.dim();
    let mut best: Option<(f64, usize, usize, usize, C64)> = None;
    let mut consider = |mag: f64, kind: usize, i: usize, j: usize, val: C64| {
        if mag > CLASSICAL_TOLERANCE && best.is_none_or(|b| mag > b.0) {
            best = Some((mag, kind, i, j, val));
        }
    };
    for slot in block_layout(alg) {
        let idx = alg.block_indices(slot.k, slot.l);
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                // tr(ρ[E_ij, E_jj]) = ρ_ji
                let off = m[(j, i)];
                consider(off.norm(), 0, i, j, off);
                // tr(ρ[E_ij, E_ji]) = ρ_ii − ρ_jj
                let diag = m[(i, i)] - m[(j, j)];
                consider(diag.norm(), 1, i, j, diag);
            }
        }
    }
    Ok(best.map(|(_, kind, i, j, value)| {
        let x = ComplexMatrix::unit(n, i, j);
        let y = if kind == 0 { ComplexMatrix::unit(n, j, j) } else { ComplexMatrix::unit(n, j, i) };
        CommutatorCertificate { x, y, value }
    }))
}

/// Block-diagonal complex Gaussian matrix (not Hermitian).
pub(crate) fn random_block_matrix<R: Rng + ?Sized>(alg: &BipartiteAlgebra, rng: &mut R) -> ComplexMatrix {
    let blocks: Vec<ComplexMatrix> = block_layout(alg)
        .iter()
        .map(|s| {
            let data = (0..s.size * s.size).map(|_| gaussian_complex(rng)).collect();
            ComplexMatrix::from_vec(s.size, data).expect("finite gaussian block")
        })
        .collect();
    alg.embed_blocks(&blocks).expect("layout-consistent blocks")
}

pub(crate) fn random_element_with<R: Rng + ?Sized>(
    alg: &BipartiteAlgebra,
    rng: &mut R,
    positive: bool,
) -> HermitianOperator {
    let g = random_block_matrix(alg, rng);
    let h = if positive { g.adjoint().matmul(&g).expect("square") } else { (&g + &g.adjoint()).scale_real(0.5) };
    HermitianOperator::new(h).expect("constructed Hermitian")
}

/// Random Hermitian element of the algebra; `positive` gives `G†G`
/// blockwise.
pub fn random_algebra_element(alg: &BipartiteAlgebra, seed: u64, positive: bool) -> HermitianOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(alg, &mut rng, positive)
}
