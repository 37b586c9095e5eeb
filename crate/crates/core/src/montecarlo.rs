//! Stochastic and brute-force oracles for the closed-form channels.
//!
//! Sampling is sharded into fixed chunks of [`CHUNK`] draws. Chunk `c` draws
//! from its own stream `(seed, c)` and partial sums are combined by a fixed
//! pairwise tree, so results are bit-identical for any thread count.

use std::ops::Add;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, kron_power, op_norm, CMatrix};
use crate::measures::{sample_filtering, MeasureSpec};
use crate::permops::{conjugate_by_index_map, Permutation};
use crate::space::TensorSpace;

pub const CHUNK: usize = 1024;
/// Largest `t` for exhaustive permutation sums.
pub const MAX_BRUTE_T: usize = 6;

/// A reproducible random stream identified by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(s * re, s * im)
    })
}

/// Haar-random `U(d)`: QR of a complex Ginibre matrix with each column of
/// `Q` multiplied by the phase of the matching diagonal entry of `R`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random `SU(d)`: a Haar unitary divided by a `d`-th root of its determinant.
pub fn haar_special_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(d, rng);
    let root = u.determinant().powf(1.0 / d as f64);
    u / root
}

/// Ginibre-distributed random density matrix `GG†/Tr(GG†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Single-copy SLOCC operator `K A_n K′` with independent Haar `K, K′ ∈ SU(d)`.
pub fn sample_slocc_factor<R: Rng + ?Sized>(measure: &MeasureSpec, d: usize, rng: &mut R) -> Result<CMatrix> {
    let k = haar_special_unitary(d, rng);
    let a = sample_filtering(measure, d, rng)?;
    let kp = haar_special_unitary(d, rng);
    let diag = DMatrix::from_fn(d, d, |i, j| if i == j { c(a.diagonal()[i], 0.0) } else { c(0.0, 0.0) });
    Ok(k * diag * kp)
}

/// `(K A_n K′)^⊗t`.
pub fn sample_slocc<R: Rng + ?Sized>(measure: &MeasureSpec, space: TensorSpace, rng: &mut R) -> Result<CMatrix> {
    Ok(kron_power(&sample_slocc_factor(measure, space.d(), rng)?, space.t()))
}

/// Draws collective operators `M` for empirical twirls `E[M ρ M†]`.
pub trait CollectiveSampler: Sync {
    fn sample(&self, rng: &mut RngStream) -> Result<CMatrix>;
}

impl<F> CollectiveSampler for F
where
    F: Fn(&mut RngStream) -> Result<CMatrix> + Sync,
{
    fn sample(&self, rng: &mut RngStream) -> Result<CMatrix> {
        self(rng)
    }
}

/// `U^⊗t` with Haar `U ∈ U(d)`.
pub struct HaarSampler {
    pub space: TensorSpace,
}

impl CollectiveSampler for HaarSampler {
    fn sample(&self, rng: &mut RngStream) -> Result<CMatrix> {
        Ok(kron_power(&haar_unitary(self.space.d(), rng), self.space.t()))
    }
}

/// `U^⊗t` with Haar `U ∈ SU(d)`.
pub struct SpecialUnitarySampler {
    pub space: TensorSpace,
}

impl CollectiveSampler for SpecialUnitarySampler {
    fn sample(&self, rng: &mut RngStream) -> Result<CMatrix> {
        Ok(kron_power(&haar_special_unitary(self.space.d(), rng), self.space.t()))
    }
}

/// `(K A_n K′)^⊗t`.
pub struct SloccSampler {
    pub measure: MeasureSpec,
    pub space: TensorSpace,
}

impl CollectiveSampler for SloccSampler {
    fn sample(&self, rng: &mut RngStream) -> Result<CMatrix> {
        sample_slocc(&self.measure, self.space, rng)
    }
}

/// Sum of `draw` over `samples` draws, sharded and reduced deterministically.
pub fn sharded_sum<T, F>(samples: usize, seed: u64, draw: F) -> Result<T>
where
    T: Add<Output = T> + Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    fn tree<T: Add<Output = T>, F: Fn(&mut RngStream) -> Result<T>>(
        n: usize,
        rng: &mut RngStream,
        draw: &F,
    ) -> Result<T> {
        if n == 1 {
            return draw(rng);
        }
        let left = tree(n / 2, rng, draw)?;
        let right = tree(n - n / 2, rng, draw)?;
        Ok(left + right)
    }
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let n = CHUNK.min(samples - chunk * CHUNK);
            tree(n, &mut RngStream::new(seed, chunk as u64), &draw)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(pairwise(partial))
}

fn pairwise<T: Add<Output = T>>(mut items: Vec<T>) -> T {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().expect("at least one partial sum")
}

/// `(1/N) Σ M ρ M†` over `N` sampled collective operators.
pub fn empirical_twirl<S: CollectiveSampler + ?Sized>(
    rho: &CMatrix,
    sampler: &S,
    samples: usize,
    seed: u64,
) -> Result<CMatrix> {
    let sum = sharded_sum(samples, seed, |rng| {
        let m = sampler.sample(rng)?;
        if m.nrows() != rho.nrows() || m.ncols() != rho.ncols() {
            return Err(Error::Dimension {
                expected: format!("{0}×{0}", rho.nrows()),
                actual: format!("{}×{}", m.nrows(), m.ncols()),
            });
        }
        Ok(&m * rho * m.adjoint())
    })?;
    Ok(sum.unscale(samples as f64))
}

/// Exact `(1/t!) Σ_{p ∈ S_t} O_p ρ O_pᵀ`.
pub fn brute_symmetric_twirl(rho: &CMatrix, space: TensorSpace) -> Result<CMatrix> {
    if space.t() > MAX_BRUTE_T {
        return Err(Error::Capacity { d: space.d(), t: space.t(), cap: MAX_BRUTE_T });
    }
    if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
        return Err(Error::Dimension {
            expected: format!("{0}×{0}", space.dim()),
            actual: format!("{}×{}", rho.nrows(), rho.ncols()),
        });
    }
    let perms = Permutation::all(space.t());
    let mut sum = CMatrix::zeros(space.dim(), space.dim());
    for p in &perms {
        sum += conjugate_by_index_map(&p.index_map(space)?, rho);
    }
    Ok(sum.unscale(perms.len() as f64))
}

/// `p_M(ρ) = Tr(M^⊗t ρ M^{†⊗t}) / ‖M‖^{2t}`.
pub fn success_probability(m: &CMatrix, rho: &CMatrix, t: usize) -> Result<f64> {
    let d = m.nrows();
    if !m.is_square() || rho.nrows() != d.pow(t as u32) || rho.ncols() != rho.nrows() {
        return Err(Error::Dimension {
            expected: format!("{d}×{d} operator and {0}×{0} state", d.pow(t as u32)),
            actual: format!("{}×{} and {}×{}", m.nrows(), m.ncols(), rho.nrows(), rho.ncols()),
        });
    }
    let norm = op_norm(m);
    if norm == 0.0 || m.determinant().norm() < 1e-12 * norm.powi(d as i32) {
        return Err(Error::Domain("SLOCC operator is singular".into()));
    }
    let mt = kron_power(&m.unscale(norm), t);
    Ok((&mt * rho * mt.adjoint()).trace().re)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Copy)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Add for Moments {
    type Output = Moments;
    fn add(self, o: Moments) -> Moments {
        Moments { sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }
}

/// Mean and standard error of `f` over `samples` draws.
pub fn sample_mean<F>(samples: usize, seed: u64, f: F) -> Result<SampleStats>
where
    F: Fn(&mut RngStream) -> Result<f64> + Sync,
{
    let m = sharded_sum(samples, seed, |rng| {
        let x = f(rng)?;
        Ok(Moments { sum: x, sum_sq: x * x })
    })?;
    let n = samples as f64;
    let mean = m.sum / n;
    let var = if samples > 1 { ((m.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(SampleStats { mean, std_error: (var / n).sqrt(), samples })
}

/// Average of `p_M(ρ)` over `M = K A K′` drawn from `measure`.
pub fn sampled_success_probability(
    rho: &CMatrix,
    measure: &MeasureSpec,
    space: TensorSpace,
    samples: usize,
    seed: u64,
) -> Result<SampleStats> {
    sample_mean(samples, seed, |rng| {
        let m = sample_slocc_factor(measure, space.d(), rng)?;
        success_probability(&m, rho, space.t())
    })
}

/// Complex entry average helper for statistical checks on matrix estimates:
/// per-entry mean and standard error of `f`.
pub fn entrywise_stats<F>(samples: usize, seed: u64, rows: usize, cols: usize, f: F) -> Result<(CMatrix, DMatrix<f64>)>
where
    F: Fn(&mut RngStream) -> Result<CMatrix> + Sync,
{
    #[derive(Clone)]
    struct Acc {
        sum: CMatrix,
        sum_sq: DMatrix<f64>,
    }
    impl Add for Acc {
        type Output = Acc;
        fn add(self, o: Acc) -> Acc {
            Acc { sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
        }
    }
    let acc = sharded_sum(samples, seed, |rng| {
        let x = f(rng)?;
        if x.nrows() != rows || x.ncols() != cols {
            return Err(Error::Dimension {
                expected: format!("{rows}×{cols}"),
                actual: format!("{}×{}", x.nrows(), x.ncols()),
            });
        }
        let sq = x.map(|z: Complex64| z.norm_sqr());
        Ok(Acc { sum: x, sum_sq: sq })
    })?;
    let n = samples as f64;
    let mean = acc.sum.unscale(n);
    let sem = DMatrix::from_fn(rows, cols, |i, j| {
        let var = (acc.sum_sq[(i, j)] - n * mean[(i, j)].norm_sqr()) / (n - 1.0).max(1.0);
        (var.max(0.0) / n).sqrt()
    });
    Ok((mean, sem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map({
            let mut r = RngStream::new(9, 0);
            move |_| r.next_u64()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = RngStream::new(9, 0);
            move |_| r.next_u64()
        }).collect();
        let other: Vec<u64> = (0..4).map({
            let mut r = RngStream::new(9, 1);
            move |_| r.next_u64()
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = RngStream::new(1, 0);
        for d in 1..6 {
            let u = haar_unitary(d, &mut rng);
            assert!(max_abs(&(u.adjoint() * &u - identity(d))) < 1e-12);
            let s = haar_special_unitary(d, &mut rng);
            assert!((s.determinant() - c(1.0, 0.0)).norm() < 1e-12);
            assert!(max_abs(&(s.adjoint() * &s - identity(d))) < 1e-12);
        }
        let u1 = haar_unitary(1, &mut rng);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-12);
        for _ in 0..50 {
            assert!(haar_special_unitary(2, &mut rng).trace().norm() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn first_moment_of_haar() {
        // E|U_11|² = 1/d
        for d in [2usize, 3] {
            let stats = sample_mean(100_000, 4, |rng| Ok(haar_unitary(d, rng)[(0, 0)].norm_sqr())).unwrap();
            assert!((stats.mean - 1.0 / d as f64).abs() < 3.0 * stats.std_error);
        }
    }

    #[test]
    fn slocc_factor_properties() {
        let mut rng = RngStream::new(2, 0);
        let x = 1.7;
        let m = sample_slocc_factor(&MeasureSpec::dirac(x).unwrap(), 2, &mut rng).unwrap();
        assert!((op_norm(&m) - 1.0).abs() < 1e-12);
        assert!((m.determinant() - c(x.powi(-2), 0.0)).norm() < 1e-12);
        let u = sample_slocc_factor(&MeasureSpec::dirac(1.0).unwrap(), 2, &mut rng).unwrap();
        assert!(max_abs(&(u.adjoint() * &u - identity(2))) < 1e-12);
    }

    #[test]
    fn stub_sampler_returns_input() {
        let rho = random_density_matrix(4, &mut RngStream::new(3, 0));
        let id = |_: &mut RngStream| Ok(identity(4));
        let out = empirical_twirl(&rho, &id, 1, 0).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn empirical_twirl_is_reproducible() {
        let space = TensorSpace::new(2, 2).unwrap();
        let rho = random_density_matrix(4, &mut RngStream::new(3, 0));
        let sampler = HaarSampler { space };
        let a = empirical_twirl(&rho, &sampler, 3000, 17).unwrap();
        let b = empirical_twirl(&rho, &sampler, 3000, 17).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c1 = single.install(|| empirical_twirl(&rho, &sampler, 3000, 17).unwrap());
        assert_eq!(a, c1);
        assert!(empirical_twirl(&rho, &sampler, 0, 17).is_err());
    }

    #[test]
    fn brute_symmetric_twirl_small_cases() {
        let mut rng = RngStream::new(5, 0);
        let s1 = TensorSpace::new(3, 1).unwrap();
        let rho = random_density_matrix(3, &mut rng);
        assert!(max_abs(&(brute_symmetric_twirl(&rho, s1).unwrap() - &rho)) < 1e-15);

        let s2 = TensorSpace::new(2, 2).unwrap();
        let mut r01 = CMatrix::zeros(4, 4);
        r01[(1, 1)] = c(1.0, 0.0);
        let swap = crate::permops::permutation_matrix_direct(&Permutation::transposition(2, 0, 1).unwrap(), s2).unwrap();
        let want = (&r01 + &swap * &r01 * &swap).scale(0.5);
        assert!(max_abs(&(brute_symmetric_twirl(&r01, s2).unwrap() - want)) < 1e-15);

        assert!(matches!(
            brute_symmetric_twirl(&identity(128), TensorSpace::new(2, 7).unwrap()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn success_probability_examples() {
        let mut rng = RngStream::new(6, 0);
        let rho = random_density_matrix(8, &mut rng).scale(0.7);
        let u = haar_unitary(2, &mut rng);
        assert!((success_probability(&u, &rho, 3).unwrap() - 0.7).abs() < 1e-12);

        let x: f64 = 1.8;
        let m = CMatrix::from_row_slice(2, 2, &[c(x, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 / x, 0.0)]);
        let half = identity(2).scale(0.5);
        let want = 0.5 * (1.0 + x.powi(-4));
        assert!((success_probability(&m, &half, 1).unwrap() - want).abs() < 1e-14);

        let singular = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(success_probability(&singular, &half, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn random_states_are_states() {
        let rho = random_density_matrix(9, &mut RngStream::new(8, 0));
        assert!(crate::twirl::DensityState::new(rho).is_ok());
    }
}
