//! Tensor permutation operators `O_p` on `(ℂ^d)^⊗t` and Young symmetrizers.
//!
//! `O_p` moves the tensor factor in slot `k` to slot `p(k)`, i.e.
//! `O_p |v_1⟩⊗…⊗|v_t⟩ = |v_{p⁻¹(1)}⟩⊗…⊗|v_{p⁻¹(t)}⟩`, so `O_p O_q = O_{p∘q}`.
//! Slots and permutation images are 0-based.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, CMatrix, ONE};
use crate::space::TensorSpace;
use crate::tableaux::StandardTableau;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::Argument(format!("{images:?} is not a bijection")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// From one-line notation with values in `1..=t`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::Argument(format!("{images:?} is not 1-based")));
        }
        Self::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(t: usize) -> Self {
        Permutation { images: (0..t).collect() }
    }

    pub fn transposition(t: usize, i: usize, k: usize) -> Result<Self> {
        if i >= t || k >= t {
            return Err(Error::Index(format!("transposition ({i} {k}) outside 0..{t}")));
        }
        let mut images: Vec<usize> = (0..t).collect();
        images.swap(i, k);
        Ok(Permutation { images })
    }

    pub fn random<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..t).collect();
        images.shuffle(rng);
        Permutation { images }
    }

    /// All of `S_t` in lexicographic one-line order.
    pub fn all(t: usize) -> Vec<Permutation> {
        fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if prefix.len() == used.len() {
                out.push(Permutation { images: prefix.clone() });
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    go(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::with_capacity(t), &mut vec![false; t], &mut out);
        out
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p] = i;
        }
        Permutation { images }
    }

    pub fn sign(&self) -> i32 {
        let mut seen = vec![false; self.len()];
        let mut sign = 1;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// Adjacent transpositions `j ↔ j+1`, returned as `j`, whose composition
    /// in list order equals `self`. Obtained by bubble-sorting the one-line form.
    pub fn adjacent_transpositions(&self) -> Vec<usize> {
        let mut line = self.images.clone();
        let mut swaps = Vec::new();
        let n = line.len();
        for pass in 0..n {
            for j in 0..n.saturating_sub(1 + pass) {
                if line[j] > line[j + 1] {
                    line.swap(j, j + 1);
                    swaps.push(j);
                }
            }
        }
        swaps.reverse();
        swaps
    }

    /// `map[b]` is the basis index of `O_p |b⟩`.
    pub fn index_map(&self, space: TensorSpace) -> Result<Vec<usize>> {
        check_len(self, space)?;
        let t = space.t();
        let mut out = vec![0; space.dim()];
        let mut target = vec![0; t];
        for (b, slot) in out.iter_mut().enumerate() {
            for (k, x) in space.digits(b).into_iter().enumerate() {
                target[self.images[k]] = x;
            }
            *slot = space.index(&target);
        }
        Ok(out)
    }
}

fn check_len(p: &Permutation, space: TensorSpace) -> Result<()> {
    if p.len() != space.t() {
        return Err(Error::Dimension {
            expected: format!("permutation of {} slots", space.t()),
            actual: format!("{} slots", p.len()),
        });
    }
    Ok(())
}

/// `O_p` built directly from its action on computational basis states.
pub fn permutation_matrix_direct(p: &Permutation, space: TensorSpace) -> Result<CMatrix> {
    let map = p.index_map(space)?;
    let n = space.dim();
    let mut m = CMatrix::zeros(n, n);
    for (b, &image) in map.iter().enumerate() {
        m[(image, b)] = ONE;
    }
    Ok(m)
}

/// `O_p ρ O_pᵀ` from an index map, without forming `O_p`.
pub fn conjugate_by_index_map(map: &[usize], rho: &CMatrix) -> CMatrix {
    let n = rho.nrows();
    let mut out = CMatrix::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            out[(map[a], map[b])] = rho[(a, b)];
        }
    }
    out
}

/// Generalized Gell-Mann matrices of `su(d)`, normalized to
/// `Tr(γ_a γ_b) = 2 δ_ab`: symmetric, then antisymmetric, then diagonal.
pub fn gell_mann(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
            out.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(0.0, -1.0);
            m[(k, j)] = c(0.0, 1.0);
            out.push(m);
        }
    }
    for l in 1..d {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c(scale, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * scale, 0.0);
        out.push(m);
    }
    out
}

/// `1⊗…⊗a⊗…⊗b⊗…⊗1` with `a` at slot `i` and `b` at slot `k`.
fn embed_pair(a: &CMatrix, i: usize, b: &CMatrix, k: usize, space: TensorSpace) -> CMatrix {
    let id = identity(space.d());
    let mut out = CMatrix::identity(1, 1);
    for slot in 0..space.t() {
        let factor = if slot == i {
            a
        } else if slot == k {
            b
        } else {
            &id
        };
        out = out.kronecker(factor);
    }
    out
}

/// Swap of slots `i` and `k` as `(1/d)·Id + (1/2)Σ_a γ_a^{(i)} γ_a^{(k)}`.
pub fn transposition_matrix_gellmann(i: usize, k: usize, space: TensorSpace) -> Result<CMatrix> {
    if i == k {
        return Err(Error::Argument(format!("transposition needs distinct slots, got {i} twice")));
    }
    if i >= space.t() || k >= space.t() {
        return Err(Error::Index(format!("slots ({i}, {k}) outside 0..{}", space.t())));
    }
    let d = space.d();
    let mut out = identity(space.dim()).scale(1.0 / d as f64);
    for g in gell_mann(d) {
        out += embed_pair(&g, i, &g, k, space).scale(0.5);
    }
    Ok(out)
}

/// `O_p` as a product of Gell-Mann transposition matrices over the bubble
/// decomposition of `p`.
pub fn permutation_matrix_product(p: &Permutation, space: TensorSpace) -> Result<CMatrix> {
    check_len(p, space)?;
    let mut adjacent: Vec<Option<CMatrix>> = vec![None; space.t().saturating_sub(1)];
    let mut out = identity(space.dim());
    for j in p.adjacent_transpositions() {
        if adjacent[j].is_none() {
            adjacent[j] = Some(transposition_matrix_gellmann(j, j + 1, space)?);
        }
        out *= adjacent[j].as_ref().expect("filled above");
    }
    Ok(out)
}

/// Left-multiplies `m` in place by `Σ_{σ ∈ Sym(slots)} s(σ) O_σ`, with
/// `s ≡ 1` or `s = sgn`.
///
/// Uses the coset factorization `Σ_{S_k} = T_k ⋯ T_2`,
/// `T_j = Id ± Σ_{i<j} O_{(slot_i slot_j)}`, costing `O(k² n²)` instead of `O(k! n²)`.
fn apply_group_sum(m: &mut DMatrix<f64>, slots: &[usize], signed: bool, space: TensorSpace) {
    let sign = if signed { -1.0 } else { 1.0 };
    let n = m.nrows();
    let t = space.t();
    for j in 1..slots.len() {
        let mut next = m.clone();
        for &si in &slots[..j] {
            let map = Permutation::transposition(t, si, slots[j])
                .and_then(|tau| tau.index_map(space))
                .expect("slots lie inside the tensor space");
            for col in 0..m.ncols() {
                for r in 0..n {
                    next[(map[r], col)] += sign * m[(r, col)];
                }
            }
        }
        *m = next;
    }
}

fn factorial(k: usize) -> f64 {
    (2..=k).map(|x| x as f64).product()
}

/// Real matrix of the Young symmetrizer
/// `(1/(|R||C|)) Σ_{r∈R} Σ_{c∈C} sgn(c) O_r O_c` for the row group `R` and
/// column group `C` of `tab`.
pub fn young_symmetrizer_real(tab: &StandardTableau, space: TensorSpace) -> Result<DMatrix<f64>> {
    let shape = tab.shape();
    if shape.size() != space.t() {
        return Err(Error::Dimension {
            expected: format!("tableau with {} boxes", space.t()),
            actual: format!("{} boxes", shape.size()),
        });
    }
    if shape.len() > space.d() {
        return Err(Error::Shape { rows: shape.rows().to_vec(), d: space.d() });
    }
    let n = space.dim();
    let mut m = DMatrix::<f64>::identity(n, n);
    let to_slots = |xs: &[usize]| xs.iter().map(|&e| e - 1).collect::<Vec<_>>();
    let mut norm = 1.0;
    for col in tab.columns() {
        apply_group_sum(&mut m, &to_slots(&col), true, space);
        norm *= factorial(col.len());
    }
    for row in tab.rows() {
        apply_group_sum(&mut m, &to_slots(row), false, space);
        norm *= factorial(row.len());
    }
    m /= norm;
    Ok(m)
}

pub fn young_symmetrizer(tab: &StandardTableau, space: TensorSpace) -> Result<CMatrix> {
    Ok(young_symmetrizer_real(tab, space)?.map(|x| c(x, 0.0)))
}

/// Numerical rank with a relative singular-value cutoff.
pub fn numerical_rank(m: &DMatrix<f64>, rel_cutoff: f64) -> usize {
    let sv = crate::linalg::singular_values_real(m);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_cutoff * max).count()
}
