//! Closed-form twirling channels.
//!
//! With Schur coordinates `W = B†ρB`, each channel only reshuffles the
//! per-block coefficient tables:
//!
//! - unitary twirl: `Σ_k (1/D_L^k) Σ_{λ₁λ₂} Tr(ρ Π̂^{λ₁λ₂†}_k) Π̂^{λ₁λ₂}_k`
//! - symmetric twirl: `Σ_k (1/D_V^k) Σ_{m₁m₂} Tr(ρ Π̂^{m₁m₂†}_k) Π̂^{m₁m₂}_k`
//! - SLOCC twirl: `Σ_k (β_k/D^k) 𝒯_U^{(k)}(ρ)` with `β_k = Tr(𝒜 Π̂_k)`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, kron_power, max_abs, min_eigenvalue, CMatrix};
use crate::measures::{check_dimension, integrate, MeasureSpec};
use crate::schurbasis::SchurDecomposition;
use crate::space::TensorSpace;
use crate::tableaux::Partition;

/// Tolerance for state validation.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// A possibly subnormalized density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: CMatrix,
}

impl DensityState {
    /// Checks Hermiticity, positivity and `0 < Tr ρ ≤ 1`, each to 1e−10.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::State(format!("{}×{} is not square", matrix.nrows(), matrix.ncols())));
        }
        let herm = hermitian_defect(&matrix);
        if herm > STATE_TOLERANCE {
            return Err(Error::State(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = matrix.trace().re;
        if !(tr > 0.0 && tr <= 1.0 + STATE_TOLERANCE) {
            return Err(Error::State(format!("trace {tr} outside (0, 1]")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -STATE_TOLERANCE {
            return Err(Error::State(format!("not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(DensityState { matrix })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityState { matrix: CMatrix::identity(n, n).scale(1.0 / n as f64) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// `Σ_k s_k 𝒯_U^{(k)}(x)`, the unitary twirl with block `k` scaled by `s_k`.
fn scaled_unitary_twirl(x: &CMatrix, basis: &SchurDecomposition, scales: &[f64]) -> Result<CMatrix> {
    let w = basis.to_schur(x)?;
    let tables = basis.lambda_tables(&w);
    let factors: Vec<f64> = basis
        .blocks()
        .iter()
        .zip(scales)
        .map(|(b, s)| s / b.d_l() as f64)
        .collect();
    basis.from_schur(&basis.assemble_lambda(&tables, &factors))
}

pub fn unitary_twirl(x: &CMatrix, basis: &SchurDecomposition) -> Result<CMatrix> {
    scaled_unitary_twirl(x, basis, &vec![1.0; basis.blocks().len()])
}

/// Block restriction `𝒯_U^{(k)}`.
pub fn unitary_twirl_block(x: &CMatrix, k: usize, basis: &SchurDecomposition) -> Result<CMatrix> {
    basis.block(k)?;
    let scales: Vec<f64> = (0..basis.blocks().len()).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
    scaled_unitary_twirl(x, basis, &scales)
}

pub fn symmetric_twirl(x: &CMatrix, basis: &SchurDecomposition) -> Result<CMatrix> {
    let w = basis.to_schur(x)?;
    let tables = basis.m_tables(&w);
    let factors: Vec<f64> = basis.blocks().iter().map(|b| 1.0 / b.d_v() as f64).collect();
    basis.from_schur(&basis.assemble_m(&tables, &factors))
}

/// `Tr(x Π̂_k)` for every block.
pub fn block_weights(x: &CMatrix, basis: &SchurDecomposition) -> Result<Vec<Complex64>> {
    let w = basis.to_schur(x)?;
    Ok(basis
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let off = basis.offset(k);
            (off..off + b.dimension()).map(|i| w[(i, i)]).sum()
        })
        .collect())
}

/// `𝒜 = ∫ (A_n^⊗t)² dμ`, a diagonal operator on the tensor space.
///
/// At `d = 2` the entry for a basis state with `j` factors `|1⟩` is
/// `∫ x^{-4j} dμ(x)`.
pub fn abelian_integral(measure: &MeasureSpec, space: TensorSpace) -> Result<CMatrix> {
    check_dimension(measure, space.d())?;
    let n = space.dim();
    let diag: Vec<f64> = match measure {
        MeasureSpec::DiagonalFamily(family) => (0..n)
            .map(|b| {
                let digits = space.digits(b);
                family
                    .members()
                    .map(|(a, w)| w * digits.iter().map(|&x| a[x] * a[x]).product::<f64>())
                    .sum()
            })
            .collect(),
        _ => {
            let moments = (0..=space.t())
                .map(|j| integrate(|x| x.powi(-4 * j as i32), measure))
                .collect::<Result<Vec<f64>>>()?;
            (0..n)
                .map(|b| moments[space.digits(b).iter().filter(|&&x| x == 1).count()])
                .collect()
        }
    };
    Ok(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        diag.into_iter().map(|x| Complex64::new(x, 0.0)),
    )))
}

#[derive(Debug, Clone)]
pub struct CollectiveTwirl {
    /// `α_k = Tr(α^⊗t Π̂_k†)`.
    pub coefficients: Vec<Complex64>,
    /// Max-entry residual of `𝒯_U(α^⊗t) − Σ_k (α_k/D^k) Π̂_k`, relative to `max|α^⊗t|`.
    pub residual: f64,
}

/// `𝒯_U(α^⊗t)` is diagonal in the block projectors; returns its coefficients.
pub fn twirl_of_collective(alpha: &CMatrix, basis: &SchurDecomposition) -> Result<CollectiveTwirl> {
    let d = basis.space().d();
    if alpha.nrows() != d || alpha.ncols() != d {
        return Err(Error::Dimension {
            expected: format!("{d}×{d}"),
            actual: format!("{}×{}", alpha.nrows(), alpha.ncols()),
        });
    }
    let sv = crate::linalg::singular_values(alpha);
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &s| (l.min(s), h.max(s)));
    if !(hi > 0.0 && lo / hi > 1e-12) {
        return Err(Error::Domain(format!("α is singular (condition number {:e})", hi / lo)));
    }
    let power = kron_power(alpha, basis.space().t());
    let coefficients = block_weights(&power, basis)?;
    let scales: Vec<Complex64> = coefficients
        .iter()
        .zip(basis.blocks())
        .map(|(a, b)| a / b.dimension() as f64)
        .collect();
    let mut diagonal = CMatrix::zeros(power.nrows(), power.ncols());
    for (k, b) in basis.blocks().iter().enumerate() {
        let off = basis.offset(k);
        for i in off..off + b.dimension() {
            diagonal[(i, i)] = scales[k];
        }
    }
    let closed = basis.from_schur(&diagonal)?;
    let full = unitary_twirl(&power, basis)?;
    let residual = max_abs(&(full - closed)) / max_abs(&power).max(1.0);
    if residual > 1e-10 {
        return Err(Error::Construction(format!(
            "twirl of α^⊗t is not block-diagonal (residual {residual:e})"
        )));
    }
    Ok(CollectiveTwirl { coefficients, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaRow {
    /// 1-based block index.
    pub block: usize,
    pub partition: Partition,
    pub d_l: usize,
    pub d_v: usize,
    pub d: usize,
    pub beta: f64,
    /// `β/D`, the postselection success probability of the block.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaTable {
    rows: Vec<BetaRow>,
}

impl BetaTable {
    /// `β_k = D^k` for every block: the table of the unitary twirl.
    pub fn trivial(basis: &SchurDecomposition) -> Self {
        let betas: Vec<f64> = basis.blocks().iter().map(|b| b.dimension() as f64).collect();
        Self::from_betas(&betas, basis).expect("β = D is admissible")
    }

    /// Checks `0 < β_k ≤ D^k` (upper bound up to 1e−10·D^k).
    pub fn from_betas(betas: &[f64], basis: &SchurDecomposition) -> Result<Self> {
        if betas.len() != basis.blocks().len() {
            return Err(Error::Dimension {
                expected: format!("{} coefficients", basis.blocks().len()),
                actual: betas.len().to_string(),
            });
        }
        let rows = betas
            .iter()
            .zip(basis.blocks())
            .enumerate()
            .map(|(k, (&beta, b))| {
                let d = b.dimension();
                if !(beta > 0.0 && beta <= d as f64 * (1.0 + 1e-10)) {
                    return Err(Error::Domain(format!("β_{} = {beta} outside (0, {d}]", k + 1)));
                }
                Ok(BetaRow {
                    block: k + 1,
                    partition: b.partition().clone(),
                    d_l: b.d_l(),
                    d_v: b.d_v(),
                    d,
                    beta,
                    ratio: beta / d as f64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BetaTable { rows })
    }

    pub fn rows(&self) -> &[BetaRow] {
        &self.rows
    }

    pub fn betas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.beta).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    /// CSV with header `block,partition,D_L,D_V,D,beta,ratio`; floats in
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,partition,D_L,D_V,D,beta,ratio\n");
        for r in &self.rows {
            let part = r.partition.rows().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.16e},{:.16e}",
                r.block, part, r.d_l, r.d_v, r.d, r.beta, r.ratio
            );
        }
        out
    }
}

/// `β_k = Tr(𝒜 Π̂_k†)`.
pub fn beta_coefficients(abelian: &CMatrix, basis: &SchurDecomposition) -> Result<BetaTable> {
    let n = basis.space().dim();
    if abelian.nrows() == n && abelian.ncols() == n && *abelian == CMatrix::identity(n, n) {
        // Tr Π̂_k = D^k exactly; avoids round-off in the projector traces
        return Ok(BetaTable::trivial(basis));
    }
    let betas: Vec<f64> = block_weights(abelian, basis)?.iter().map(|z| z.re).collect();
    BetaTable::from_betas(&betas, basis)
}

/// Convenience: `𝒜` for `measure`, then its β table.
pub fn beta_for_measure(measure: &MeasureSpec, basis: &SchurDecomposition) -> Result<BetaTable> {
    beta_coefficients(&abelian_integral(measure, basis.space())?, basis)
}

fn check_beta(beta: &BetaTable, basis: &SchurDecomposition) -> Result<()> {
    if beta.rows.len() != basis.blocks().len() {
        return Err(Error::Dimension {
            expected: format!("β table with {} blocks", basis.blocks().len()),
            actual: beta.rows.len().to_string(),
        });
    }
    Ok(())
}

pub fn slocc_twirl(x: &CMatrix, beta: &BetaTable, basis: &SchurDecomposition) -> Result<CMatrix> {
    slocc_twirl_iterated(x, beta, basis, 1)
}

/// `𝒯_SL^m(x) = Σ_k (β_k/D^k)^m 𝒯_U^{(k)}(x)`.
pub fn slocc_twirl_iterated(x: &CMatrix, beta: &BetaTable, basis: &SchurDecomposition, m: u32) -> Result<CMatrix> {
    check_beta(beta, basis)?;
    if m == 0 {
        return Err(Error::Argument("iteration count must be at least 1".into()));
    }
    let scales: Vec<f64> = beta.ratios().iter().map(|r| r.powi(m as i32)).collect();
    scaled_unitary_twirl(x, basis, &scales)
}

/// `⟨p_M(ρ)⟩ = Σ_k (β_k/D^k) Tr(ρ Π̂_k†)`.
pub fn mean_success_probability(x: &CMatrix, beta: &BetaTable, basis: &SchurDecomposition) -> Result<f64> {
    check_beta(beta, basis)?;
    Ok(block_weights(x, basis)?
        .iter()
        .zip(beta.ratios())
        .map(|(w, r)| r * w.re)
        .sum())
}

/// Minimum block weight for postselection.
pub const POSTSELECTION_FLOOR: f64 = 1e-12;

/// `Π̂_k ρ Π̂_k` renormalized, with the probability `Tr(Π̂_k ρ Π̂_k)/Tr ρ`.
pub fn postselect_block(x: &CMatrix, k: usize, basis: &SchurDecomposition) -> Result<(CMatrix, f64)> {
    let p = basis.pi_block(k)?;
    if x.nrows() != p.nrows() || x.ncols() != p.ncols() {
        return Err(Error::Dimension {
            expected: format!("{0}×{0}", p.nrows()),
            actual: format!("{}×{}", x.nrows(), x.ncols()),
        });
    }
    let projected = &p * x * &p;
    let weight = projected.trace().re;
    if weight <= POSTSELECTION_FLOOR {
        return Err(Error::Postselection { block: k, weight });
    }
    Ok((projected.unscale(weight), weight / x.trace().re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity};
    use crate::schurbasis::build_schur_basis;

    fn basis(d: usize, t: usize) -> SchurDecomposition {
        build_schur_basis(TensorSpace::new(d, t).unwrap()).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(DensityState::new(identity(4).scale(0.25)).is_ok());
        assert!(DensityState::new(identity(4).scale(0.1)).is_ok());
        assert!(DensityState::new(identity(4)).is_err());
        let mut m = identity(2).scale(0.5);
        m[(0, 1)] = c(0.6, 0.0);
        m[(1, 0)] = c(0.6, 0.0);
        assert!(matches!(DensityState::new(m), Err(Error::State(_))));
        let mut h = identity(2).scale(0.5);
        h[(0, 1)] = c(0.1, 0.0);
        assert!(DensityState::new(h).is_err());
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let b = basis(2, 4);
        let rho = DensityState::maximally_mixed(16);
        let out = unitary_twirl(rho.matrix(), &b).unwrap();
        assert!(max_abs(&(out - rho.matrix())) < 1e-12);
    }

    #[test]
    fn symmetric_twirl_single_site_is_identity_map() {
        let b = basis(3, 1);
        let rho = CMatrix::from_fn(3, 3, |i, j| c((i + j) as f64, i as f64 - j as f64));
        assert!(max_abs(&(symmetric_twirl(&rho, &b).unwrap() - &rho)) < 1e-12);
    }

    #[test]
    fn dirac_one_beta_is_dimension() {
        let b = basis(2, 4);
        let table = beta_for_measure(&MeasureSpec::dirac(1.0).unwrap(), &b).unwrap();
        let betas = table.betas();
        for (got, want) in betas.iter().zip([5.0, 9.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(table.ratios().iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn abelian_integral_dirac_and_single_site() {
        let space = TensorSpace::new(2, 3).unwrap();
        let a = abelian_integral(&MeasureSpec::dirac(1.0).unwrap(), space).unwrap();
        assert!(max_abs(&(a - identity(8))) < 1e-15);

        let one = TensorSpace::new(2, 1).unwrap();
        let a1 = abelian_integral(&MeasureSpec::TruncatedExponential, one).unwrap();
        let m1 = integrate(|x| x.powi(-4), &MeasureSpec::TruncatedExponential).unwrap();
        assert!((a1[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((a1[(1, 1)].re - m1).abs() < 1e-15);
        assert!(a1[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn abelian_integral_rejects_wrong_dimension() {
        let space = TensorSpace::new(3, 2).unwrap();
        assert!(abelian_integral(&MeasureSpec::TruncatedExponential, space).is_err());
    }

    #[test]
    fn beta_table_csv() {
        let b = basis(2, 3);
        let csv = BetaTable::trivial(&b).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "block,partition,D_L,D_V,D,beta,ratio");
        assert!(lines[1].starts_with("1,3,4,1,4,4.0000000000000000e0,"));
        assert!(lines[2].starts_with("2,2 1,2,2,4,"));
    }

    #[test]
    fn beta_bounds_are_checked() {
        let b = basis(2, 2);
        assert!(BetaTable::from_betas(&[3.0, 1.0], &b).is_ok());
        assert!(BetaTable::from_betas(&[3.5, 1.0], &b).is_err());
        assert!(BetaTable::from_betas(&[0.0, 1.0], &b).is_err());
        assert!(BetaTable::from_betas(&[1.0], &b).is_err());
    }

    #[test]
    fn iterate_zero_is_rejected() {
        let b = basis(2, 2);
        let beta = BetaTable::trivial(&b);
        assert!(slocc_twirl_iterated(&identity(4), &beta, &b, 0).is_err());
    }

    #[test]
    fn postselection_without_overlap_fails() {
        let b = basis(2, 2);
        // |00⟩ lies in the symmetric block only
        let mut rho = CMatrix::zeros(4, 4);
        rho[(0, 0)] = c(1.0, 0.0);
        assert!(matches!(postselect_block(&rho, 1, &b), Err(Error::Postselection { .. })));
        let (out, p) = postselect_block(&rho, 0, &b).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(max_abs(&(out - rho)) < 1e-12);
    }

    #[test]
    fn singular_alpha_is_rejected() {
        let b = basis(2, 2);
        let alpha = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(matches!(twirl_of_collective(&alpha, &b), Err(Error::Domain(_))));
    }
}
