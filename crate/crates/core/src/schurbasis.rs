//! Orthonormal Schur basis `|i, m, λ⟩` and the Schur operator bases.
//!
//! Block `i` is labelled by a partition of `t` with at most `d` rows. Within a
//! block, the span over `m` at fixed `λ` (the row space `L^i_λ`) carries an
//! irreducible `U(d)` representation of dimension `D_L`, and the span over `λ`
//! at fixed `m` (the column space `V^i_m`) an irreducible `S_t`
//! representation of dimension `D_V`.
//!
//! Construction, per block:
//! 1. the column space of the normal-tableau Young symmetrizer gives `|i, m, 1⟩`;
//! 2. candidates `O_{p_λ}|i, m, 1⟩` for every standard tableau `λ`;
//! 3. the candidate Gram matrix factorizes as `δ_{mm′} g_{λλ′}`, so mixing the
//!    `λ` sectors by `g^{-1/2}` (identically for every `m`) orthonormalizes
//!    the grid without breaking the `m` alignment between copies.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixContainer;
use crate::linalg::{identity, inverse_sqrt_spd, left_singular_vectors_real, max_abs, CMatrix};
use crate::permops::{young_symmetrizer_real, Permutation};
use crate::space::TensorSpace;
use crate::tableaux::{enumerate_partitions, hook_dimension, standard_tableaux, weyl_dimension, Partition, StandardTableau};

/// Relative singular-value cutoff for the symmetrizer column space.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Smallest admissible eigenvalue of the sector Gram matrix.
pub const GRAM_MIN_EIGENVALUE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SchurBlock {
    partition: Partition,
    d_l: usize,
    d_v: usize,
    /// `d^t × (D_L·D_V)`, column `λ·D_L + m` holds `|i, m, λ⟩`.
    vectors: CMatrix,
    gram_defect: f64,
}

impl SchurBlock {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Dimension of each irreducible `U(d)` copy.
    pub fn d_l(&self) -> usize {
        self.d_l
    }

    /// Dimension of each irreducible `S_t` copy.
    pub fn d_v(&self) -> usize {
        self.d_v
    }

    /// `D = D_L · D_V`.
    pub fn dimension(&self) -> usize {
        self.d_l * self.d_v
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn column(&self, m: usize, lambda: usize) -> usize {
        lambda * self.d_l + m
    }

    /// Largest violation of `⟨cand(m,λ)|cand(m′,λ′)⟩ = δ_{mm′} g_{λλ′}` seen
    /// while building the block.
    pub fn gram_defect(&self) -> f64 {
        self.gram_defect
    }
}

/// Per-block expansion coefficients `Tr(X Π̂^{m₁m₂†}_i)` and `Tr(X Π̂^{λ₁λ₂†}_i)`.
#[derive(Debug, Clone)]
pub struct BlockCoefficients {
    pub m_table: CMatrix,
    pub lambda_table: CMatrix,
}

#[derive(Debug, Clone)]
pub struct SchurExpansion {
    pub blocks: Vec<BlockCoefficients>,
    /// Max-entry residual of `X − Σ_i (1/D_V) Σ m_table Π̂^{m₁m₂}_i`.
    pub m_residual: f64,
    /// Max-entry residual of `X − Σ_i (1/D_L) Σ lambda_table Π̂^{λ₁λ₂}_i`.
    pub lambda_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SchurDecomposition {
    space: TensorSpace,
    blocks: Vec<SchurBlock>,
    offsets: Vec<usize>,
    /// All basis vectors side by side; unitary.
    basis: CMatrix,
}

/// Builds the Schur basis of `(ℂ^d)^⊗t`.
pub fn build_schur_basis(space: TensorSpace) -> Result<SchurDecomposition> {
    if space.d() < 2 {
        return Err(Error::Argument(format!("need d ≥ 2, got {}", space.d())));
    }
    let blocks = enumerate_partitions(space.t(), space.d())
        .into_iter()
        .map(|p| build_block(p, space))
        .collect::<Result<Vec<_>>>()?;
    SchurDecomposition::from_blocks(space, blocks)
}

/// Maps each entry of the normal tableau to the entry in the same cell of `tab`.
fn relabelling(normal: &StandardTableau, tab: &StandardTableau) -> Permutation {
    let mut images = vec![0; tab.shape().size()];
    for (a, b) in normal.reading_word().into_iter().zip(tab.reading_word()) {
        images[a - 1] = b - 1;
    }
    Permutation::new(images).expect("both tableaux fill 1..=t")
}

fn build_block(partition: Partition, space: TensorSpace) -> Result<SchurBlock> {
    let d_l = weyl_dimension(&partition, space.d())? as usize;
    let d_v = hook_dimension(&partition) as usize;
    let tableaux = standard_tableaux(&partition);
    if tableaux.len() != d_v {
        return Err(Error::Construction(format!(
            "{partition}: {} standard tableaux but hook dimension {d_v}",
            tableaux.len()
        )));
    }
    let n = space.dim();

    // (a) column space of the normal-tableau symmetrizer
    let normal = &tableaux[0];
    let y = young_symmetrizer_real(normal, space)?;
    let (u, sv) = left_singular_vectors_real(&y);
    let s_max = sv[0];
    let rank = sv.iter().filter(|&&s| s > RANK_CUTOFF * s_max).count();
    if rank != d_l {
        return Err(Error::Construction(format!(
            "{partition}: symmetrizer rank {rank} differs from Weyl dimension {d_l}"
        )));
    }
    let seed = u.columns(0, d_l).into_owned();

    // (b) candidates O_{p_λ}|m, 1⟩, column λ·D_L + m
    let mut cand = DMatrix::<f64>::zeros(n, d_l * d_v);
    for (lambda, tab) in tableaux.iter().enumerate() {
        let map = relabelling(normal, tab).index_map(space)?;
        for m in 0..d_l {
            let col = lambda * d_l + m;
            for (b, &image) in map.iter().enumerate() {
                cand[(image, col)] = seed[(b, m)];
            }
        }
    }

    // (c) sector Gram matrix, averaged over m
    let full_gram = cand.transpose() * &cand;
    let mut g = DMatrix::<f64>::zeros(d_v, d_v);
    for l1 in 0..d_v {
        for l2 in 0..d_v {
            g[(l1, l2)] = (0..d_l)
                .map(|m| full_gram[(l1 * d_l + m, l2 * d_l + m)])
                .sum::<f64>()
                / d_l as f64;
        }
    }
    let mut gram_defect = 0.0_f64;
    for l1 in 0..d_v {
        for m1 in 0..d_l {
            for l2 in 0..d_v {
                for m2 in 0..d_l {
                    let want = if m1 == m2 { g[(l1, l2)] } else { 0.0 };
                    let got = full_gram[(l1 * d_l + m1, l2 * d_l + m2)];
                    gram_defect = gram_defect.max((got - want).abs());
                }
            }
        }
    }
    let (g_inv_sqrt, g_min) = inverse_sqrt_spd(&g);
    if g_min < GRAM_MIN_EIGENVALUE {
        return Err(Error::Construction(format!(
            "{partition}: sector Gram matrix is singular (min eigenvalue {g_min:e})"
        )));
    }

    let mut vectors = CMatrix::zeros(n, d_l * d_v);
    for lambda in 0..d_v {
        for m in 0..d_l {
            let col = lambda * d_l + m;
            for lp in 0..d_v {
                let w = g_inv_sqrt[(lp, lambda)];
                if w == 0.0 {
                    continue;
                }
                let src = lp * d_l + m;
                for r in 0..n {
                    vectors[(r, col)].re += w * cand[(r, src)];
                }
            }
        }
    }
    Ok(SchurBlock { partition, d_l, d_v, vectors, gram_defect })
}

impl SchurDecomposition {
    fn from_blocks(space: TensorSpace, blocks: Vec<SchurBlock>) -> Result<Self> {
        let n = space.dim();
        let total: usize = blocks.iter().map(SchurBlock::dimension).sum();
        if total != n {
            return Err(Error::Construction(format!("block dimensions sum to {total}, expected {n}")));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut basis = CMatrix::zeros(n, n);
        let mut off = 0;
        for b in &blocks {
            offsets.push(off);
            basis.columns_mut(off, b.dimension()).copy_from(&b.vectors);
            off += b.dimension();
        }
        Ok(SchurDecomposition { space, blocks, offsets, basis })
    }

    pub fn space(&self) -> TensorSpace {
        self.space
    }

    pub fn blocks(&self) -> &[SchurBlock] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> Result<&SchurBlock> {
        self.blocks
            .get(i)
            .ok_or_else(|| Error::Index(format!("block {i} of {}", self.blocks.len())))
    }

    /// Unitary whose columns are all basis vectors, block after block.
    pub fn basis_matrix(&self) -> &CMatrix {
        &self.basis
    }

    /// Column of `|i, m, λ⟩` in [`basis_matrix`](Self::basis_matrix).
    pub fn column(&self, i: usize, m: usize, lambda: usize) -> Result<usize> {
        let b = self.block(i)?;
        if m >= b.d_l || lambda >= b.d_v {
            return Err(Error::Index(format!(
                "(m, λ) = ({m}, {lambda}) outside {}×{} in block {i}",
                b.d_l, b.d_v
            )));
        }
        Ok(self.offsets[i] + b.column(m, lambda))
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn vector(&self, i: usize, m: usize, lambda: usize) -> Result<CMatrix> {
        let col = self.column(i, m, lambda)?;
        Ok(self.basis.columns(col, 1).into_owned())
    }

    /// `|i, m₁, λ₁⟩⟨j, m₂, λ₂|`.
    pub fn pi_full(&self, i: usize, m1: usize, l1: usize, j: usize, m2: usize, l2: usize) -> Result<CMatrix> {
        let a = self.vector(i, m1, l1)?;
        let b = self.vector(j, m2, l2)?;
        Ok(&a * b.adjoint())
    }

    /// `Σ_m |i, m, λ₁⟩⟨i, m, λ₂|`.
    pub fn pi_lambda(&self, i: usize, l1: usize, l2: usize) -> Result<CMatrix> {
        let b = self.block(i)?;
        let mut out = CMatrix::zeros(self.space.dim(), self.space.dim());
        for m in 0..b.d_l {
            out += self.vector(i, m, l1)? * self.vector(i, m, l2)?.adjoint();
        }
        Ok(out)
    }

    /// `Σ_λ |i, m₁, λ⟩⟨i, m₂, λ|`.
    pub fn pi_m(&self, i: usize, m1: usize, m2: usize) -> Result<CMatrix> {
        let b = self.block(i)?;
        let mut out = CMatrix::zeros(self.space.dim(), self.space.dim());
        for l in 0..b.d_v {
            out += self.vector(i, m1, l)? * self.vector(i, m2, l)?.adjoint();
        }
        Ok(out)
    }

    /// Orthogonal projector onto block `i`.
    pub fn pi_block(&self, i: usize) -> Result<CMatrix> {
        let v = &self.block(i)?.vectors;
        Ok(v * v.adjoint())
    }

    /// Orthogonal projector onto the row space `L^i_λ`.
    pub fn row_space_projector(&self, i: usize, lambda: usize) -> Result<CMatrix> {
        let b = self.block(i)?;
        if lambda >= b.d_v {
            return Err(Error::Index(format!("λ = {lambda} outside block {i}")));
        }
        let v = b.vectors.columns(lambda * b.d_l, b.d_l);
        Ok(v * v.adjoint())
    }

    /// Orthogonal projector onto the column space `V^i_m`.
    pub fn column_space_projector(&self, i: usize, m: usize) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.space.dim(), self.space.dim());
        for l in 0..self.block(i)?.d_v {
            let v = self.vector(i, m, l)?;
            out += &v * v.adjoint();
        }
        Ok(out)
    }

    fn check_operator(&self, x: &CMatrix) -> Result<()> {
        let n = self.space.dim();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::Dimension {
                expected: format!("{n}×{n}"),
                actual: format!("{}×{}", x.nrows(), x.ncols()),
            });
        }
        Ok(())
    }

    /// `B† X B`: the operator in Schur coordinates.
    pub fn to_schur(&self, x: &CMatrix) -> Result<CMatrix> {
        self.check_operator(x)?;
        Ok(self.basis.adjoint() * x * &self.basis)
    }

    /// `B W B†`.
    pub fn from_schur(&self, w: &CMatrix) -> Result<CMatrix> {
        self.check_operator(w)?;
        Ok(&self.basis * w * self.basis.adjoint())
    }

    /// `Tr(X Π̂^{λ₁λ₂†}_i)` for every block, from Schur coordinates `w`.
    pub fn lambda_tables(&self, w: &CMatrix) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .zip(&self.offsets)
            .map(|(b, &off)| {
                CMatrix::from_fn(b.d_v, b.d_v, |l1, l2| {
                    (0..b.d_l)
                        .map(|m| w[(off + b.column(m, l1), off + b.column(m, l2))])
                        .sum()
                })
            })
            .collect()
    }

    /// `Tr(X Π̂^{m₁m₂†}_i)` for every block, from Schur coordinates `w`.
    pub fn m_tables(&self, w: &CMatrix) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .zip(&self.offsets)
            .map(|(b, &off)| {
                CMatrix::from_fn(b.d_l, b.d_l, |m1, m2| {
                    (0..b.d_v)
                        .map(|l| w[(off + b.column(m1, l), off + b.column(m2, l))])
                        .sum()
                })
            })
            .collect()
    }

    /// Schur coordinates of `Σ_i scale_i Σ tables_i[λ₁,λ₂] Π̂^{λ₁λ₂}_i`.
    pub fn assemble_lambda(&self, tables: &[CMatrix], scales: &[f64]) -> CMatrix {
        let n = self.space.dim();
        let mut w = CMatrix::zeros(n, n);
        for ((b, &off), (table, &s)) in self.blocks.iter().zip(&self.offsets).zip(tables.iter().zip(scales)) {
            for l1 in 0..b.d_v {
                for l2 in 0..b.d_v {
                    let v = table[(l1, l2)] * s;
                    for m in 0..b.d_l {
                        w[(off + b.column(m, l1), off + b.column(m, l2))] = v;
                    }
                }
            }
        }
        w
    }

    /// Schur coordinates of `Σ_i scale_i Σ tables_i[m₁,m₂] Π̂^{m₁m₂}_i`.
    pub fn assemble_m(&self, tables: &[CMatrix], scales: &[f64]) -> CMatrix {
        let n = self.space.dim();
        let mut w = CMatrix::zeros(n, n);
        for ((b, &off), (table, &s)) in self.blocks.iter().zip(&self.offsets).zip(tables.iter().zip(scales)) {
            for m1 in 0..b.d_l {
                for m2 in 0..b.d_l {
                    let v = table[(m1, m2)] * s;
                    for l in 0..b.d_v {
                        w[(off + b.column(m1, l), off + b.column(m2, l))] = v;
                    }
                }
            }
        }
        w
    }

    /// Expands `x` in both Schur operator bases and reports how well each
    /// expansion reconstructs it.
    pub fn decompose(&self, x: &CMatrix) -> Result<SchurExpansion> {
        let w = self.to_schur(x)?;
        let m_tables = self.m_tables(&w);
        let lambda_tables = self.lambda_tables(&w);
        let inv_dv: Vec<f64> = self.blocks.iter().map(|b| 1.0 / b.d_v as f64).collect();
        let inv_dl: Vec<f64> = self.blocks.iter().map(|b| 1.0 / b.d_l as f64).collect();
        let m_rec = self.from_schur(&self.assemble_m(&m_tables, &inv_dv))?;
        let l_rec = self.from_schur(&self.assemble_lambda(&lambda_tables, &inv_dl))?;
        Ok(SchurExpansion {
            m_residual: max_abs(&(x - m_rec)),
            lambda_residual: max_abs(&(x - l_rec)),
            blocks: m_tables
                .into_iter()
                .zip(lambda_tables)
                .map(|(m_table, lambda_table)| BlockCoefficients { m_table, lambda_table })
                .collect(),
        })
    }

    /// `max |⟨a|b⟩ − δ_ab|` over the whole grid.
    pub fn orthonormality_defect(&self) -> f64 {
        max_abs(&(self.basis.adjoint() * &self.basis - identity(self.space.dim())))
    }

    pub fn to_json(&self) -> Result<String> {
        let stored = StoredBasis {
            d: self.space.d(),
            t: self.space.t(),
            version: crate::VERSION.to_string(),
            blocks: self
                .blocks
                .iter()
                .map(|b| StoredBlock {
                    partition: b.partition.clone(),
                    d_l: b.d_l,
                    d_v: b.d_v,
                    gram_defect: b.gram_defect,
                    vectors: MatrixContainer::from_matrix(&b.vectors),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&stored)?)
    }

    /// Parses a cached basis, checking it matches `space` and this library version.
    pub fn from_json(json: &str, space: TensorSpace) -> Result<Self> {
        let stored: StoredBasis = serde_json::from_str(json)?;
        if stored.d != space.d() || stored.t != space.t() || stored.version != crate::VERSION {
            return Err(Error::Parse(format!(
                "cached basis is for (d={}, t={}, v{}), wanted (d={}, t={}, v{})",
                stored.d,
                stored.t,
                stored.version,
                space.d(),
                space.t(),
                crate::VERSION
            )));
        }
        let blocks = stored
            .blocks
            .into_iter()
            .map(|b| {
                let vectors = b.vectors.to_matrix()?;
                if vectors.nrows() != space.dim() || vectors.ncols() != b.d_l * b.d_v {
                    return Err(Error::Parse("cached block has the wrong shape".into()));
                }
                Ok(SchurBlock {
                    partition: b.partition,
                    d_l: b.d_l,
                    d_v: b.d_v,
                    vectors,
                    gram_defect: b.gram_defect,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(space, blocks)
    }
}

#[derive(Serialize, Deserialize)]
struct StoredBlock {
    partition: Partition,
    d_l: usize,
    d_v: usize,
    gram_defect: f64,
    vectors: MatrixContainer,
}

#[derive(Serialize, Deserialize)]
struct StoredBasis {
    d: usize,
    t: usize,
    version: String,
    blocks: Vec<StoredBlock>,
}

/// `<dir>/schur-d{d}-t{t}-v{version}.json`.
pub fn cache_path(dir: &Path, space: TensorSpace) -> PathBuf {
    dir.join(format!("schur-d{}-t{}-v{}.json", space.d(), space.t(), crate::VERSION))
}

/// Reads the basis from `dir` when a valid cache entry exists, otherwise
/// builds it and writes the entry. `None` disables caching.
pub fn load_or_build(space: TensorSpace, dir: Option<&Path>) -> Result<SchurDecomposition> {
    let Some(dir) = dir else {
        return build_schur_basis(space);
    };
    let path = cache_path(dir, space);
    if let Ok(json) = fs::read_to_string(&path) {
        if let Ok(basis) = SchurDecomposition::from_json(&json, space) {
            if basis.orthonormality_defect() < 1e-10 {
                return Ok(basis);
            }
        }
    }
    let basis = build_schur_basis(space)?;
    fs::create_dir_all(dir)?;
    fs::write(&path, basis.to_json()?)?;
    Ok(basis)
}
