//! The `verify` suite: structural invariants of the Schur basis, properties
//! of the three channels, and agreement with brute-force and Monte Carlo
//! oracles. Work per check is capped so that the largest admissible spaces
//! still finish; capped checks say so in their detail column.

use rand::Rng;
use schurtwirl::linalg::{identity, kron_power, max_abs, min_eigenvalue, op_norm, trace, CMatrix};
use schurtwirl::measures::MeasureSpec;
use schurtwirl::montecarlo::{
    brute_symmetric_twirl, empirical_twirl, haar_unitary, random_density_matrix, sampled_success_probability,
    HaarSampler, RngStream, SloccSampler, MAX_BRUTE_T,
};
use schurtwirl::permops::{conjugate_by_index_map, Permutation};
use schurtwirl::schurbasis::SchurDecomposition;
use schurtwirl::tableaux::{hook_dimension, weyl_dimension};
use schurtwirl::twirl::{
    abelian_integral, beta_for_measure, mean_success_probability, slocc_twirl, slocc_twirl_iterated, symmetric_twirl,
    unitary_twirl,
};
use schurtwirl::TensorSpace;
use serde::Serialize;

use crate::format::{partition, sig6};
use crate::{cache, Failure, OutputArgs, SamplingArgs, SpaceArgs};

/// Largest space for Monte Carlo comparisons.
const MC_MAX_DIM: usize = 64;
/// Largest space for the exhaustive permutation sum.
const BRUTE_MAX_DIM: usize = 256;
/// Statistical tolerance for operator-norm Monte Carlo comparisons.
const MC_TOLERANCE: f64 = 5e-2;

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    residual: Option<f64>,
    tolerance: Option<f64>,
    status: Status,
    detail: String,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: &'static str, residual: f64, tolerance: f64, detail: impl Into<String>) {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name, residual: Some(residual), tolerance: Some(tolerance), status, detail: detail.into() });
    }

    fn skip(&mut self, name: &'static str, detail: impl Into<String>) {
        self.checks.push(Check { name, residual: None, tolerance: None, status: Status::Skip, detail: detail.into() });
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

/// Scale for the number of repetitions: full counts on small spaces.
fn reps(n: usize, small: usize, large: usize) -> usize {
    if n <= MC_MAX_DIM { small } else { large }
}

fn random_state(n: usize, rng: &mut RngStream) -> CMatrix {
    random_density_matrix(n, rng)
}

fn random_measure(rng: &mut RngStream) -> MeasureSpec {
    match rng.random_range(0..3) {
        0 => MeasureSpec::TruncatedExponential,
        1 => MeasureSpec::dirac(rng.random_range(1.0..4.0)).expect("x ≥ 1"),
        _ => {
            let nodes: Vec<f64> = (0..5).map(|_| rng.random_range(1.0..6.0)).collect();
            let weights: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
            MeasureSpec::tabulated(nodes, weights).expect("positive weights")
        }
    }
}

/// `Σ c_{λλ'} Π̂^{λλ'}_k / D_L` for a random density matrix `c`.
fn lambda_state(b: &SchurDecomposition, k: usize, rng: &mut RngStream) -> schurtwirl::Result<CMatrix> {
    let blk = b.block(k)?;
    let c = random_density_matrix(blk.d_v(), rng);
    let mut out = CMatrix::zeros(b.space().dim(), b.space().dim());
    for l1 in 0..blk.d_v() {
        for l2 in 0..blk.d_v() {
            out += b.pi_lambda(k, l1, l2)? * c[(l1, l2)];
        }
    }
    Ok(out.unscale(blk.d_l() as f64))
}

fn m_state(b: &SchurDecomposition, k: usize, rng: &mut RngStream) -> schurtwirl::Result<CMatrix> {
    let blk = b.block(k)?;
    let c = random_density_matrix(blk.d_l(), rng);
    let mut out = CMatrix::zeros(b.space().dim(), b.space().dim());
    for m1 in 0..blk.d_l() {
        for m2 in 0..blk.d_l() {
            out += b.pi_m(k, m1, m2)? * c[(m1, m2)];
        }
    }
    Ok(out.unscale(blk.d_v() as f64))
}

/// Deviation of `W = B† X B` from the form `⊕_k u_k ⊗ Id_{D_V}` (`on_m`) or
/// `⊕_k Id_{D_L} ⊗ v_k` (otherwise).
fn block_form_defect(w: &CMatrix, b: &SchurDecomposition, on_m: bool) -> f64 {
    let mut inside = CMatrix::zeros(w.nrows(), w.ncols());
    let mut defect: f64 = 0.0;
    for (k, blk) in b.blocks().iter().enumerate() {
        let off = b.offset(k);
        let (dl, dv) = (blk.d_l(), blk.d_v());
        for l1 in 0..dv {
            for m1 in 0..dl {
                for l2 in 0..dv {
                    for m2 in 0..dl {
                        let (r, c) = (off + l1 * dl + m1, off + l2 * dl + m2);
                        let z = w[(r, c)];
                        inside[(r, c)] = z;
                        let reference = if on_m {
                            if l1 != l2 { None } else { Some(w[(off + m1, off + m2)]) }
                        } else if m1 != m2 {
                            None
                        } else {
                            Some(w[(off + l1 * dl, off + l2 * dl)])
                        };
                        defect = defect.max(match reference {
                            None => z.norm(),
                            Some(r) => (z - r).norm(),
                        });
                    }
                }
            }
        }
    }
    defect.max(max_abs(&(w - inside)))
}

fn structural(suite: &mut Suite, b: &SchurDecomposition, rng: &mut RngStream) -> schurtwirl::Result<()> {
    let space = b.space();
    let (d, t, n) = (space.d(), space.t(), space.dim());

    let mut mismatch = 0u64;
    let mut total = 0usize;
    for blk in b.blocks() {
        mismatch += weyl_dimension(blk.partition(), d)?.abs_diff(blk.d_l() as u64);
        mismatch += hook_dimension(blk.partition()).abs_diff(blk.d_v() as u64);
        total += blk.dimension();
    }
    mismatch += total.abs_diff(n) as u64;
    suite.record("dimensions", mismatch as f64, 0.0, format!("Σ D_L·D_V = {total} of {n}"));

    suite.record("orthonormality", b.orthonormality_defect(), 1e-10, "max |B†B − Id|");
    let gram = b.blocks().iter().map(|x| x.gram_defect()).fold(0.0, f64::max);
    suite.record("sector_gram", gram, 1e-10, "candidate overlaps δ_mm'·g");

    let mut sum = CMatrix::zeros(n, n);
    for k in 0..b.blocks().len() {
        sum += b.pi_block(k)?;
    }
    suite.record("resolution_of_identity", max_abs(&(sum - identity(n))), 1e-10, "Σ_k Π̂_k = Id");

    // Π-algebra on sampled index tuples
    let tuples = reps(n, 40, if n <= 256 { 8 } else { 2 });
    let nb = b.blocks().len();
    let mut algebra: f64 = 0.0;
    for _ in 0..tuples {
        let (k, l) = (rng.random_range(0..nb), rng.random_range(0..nb));
        let (bk, bl) = (b.block(k)?, b.block(l)?);
        let (l1, l2) = (rng.random_range(0..bk.d_v()), rng.random_range(0..bk.d_v()));
        let (m1, m2) = (rng.random_range(0..bl.d_l()), rng.random_range(0..bl.d_l()));
        let pl = b.pi_lambda(k, l1, l2)?;
        let pm = b.pi_m(l, m1, m2)?;
        let prod = &pl * &pm;
        let want = if k == l { b.pi_full(k, m1, l1, k, m2, l2)? } else { CMatrix::zeros(n, n) };
        algebra = algebra.max(max_abs(&(&prod - want)));
        algebra = algebra.max(max_abs(&(&prod - &pm * &pl)));
        let tr = trace(&prod);
        let want_tr = if k == l && l1 == l2 && m1 == m2 { 1.0 } else { 0.0 };
        algebra = algebra.max((tr.re - want_tr).abs()).max(tr.im.abs());
    }
    suite.record("pi_algebra", algebra, 1e-10, format!("products, commutation, traces on {tuples} index tuples"));

    let basis = b.basis_matrix();
    let samples = reps(n, 100, if n <= 256 { 10 } else { 2 });
    let mut unitary_defect: f64 = 0.0;
    let mut commutant: f64 = 0.0;
    for _ in 0..samples {
        let u = kron_power(&haar_unitary(d, rng), t);
        let w = basis.adjoint() * &u * basis;
        unitary_defect = unitary_defect.max(block_form_defect(&w, b, true));
        let p = Permutation::random(t, rng);
        let map = p.index_map(space)?;
        let moved = conjugate_by_index_map(&map, &u);
        commutant = commutant.max(max_abs(&(moved - &u)));
    }
    suite.record("block_invariance_unitary", unitary_defect, 1e-9, format!("{samples} Haar U^⊗t act as u_k ⊗ Id"));
    suite.record("commutant", commutant, 1e-10, format!("O_p U^⊗t O_p† = U^⊗t on {samples} pairs"));

    let perms = if t <= 5 && n <= BRUTE_MAX_DIM {
        Permutation::all(t)
    } else {
        (0..20).map(|_| Permutation::random(t, rng)).collect()
    };
    let mut perm_defect: f64 = 0.0;
    for p in &perms {
        let map = p.index_map(space)?;
        let mut moved = CMatrix::zeros(n, n);
        for (bidx, &image) in map.iter().enumerate() {
            moved.row_mut(image).copy_from(&basis.row(bidx));
        }
        let w = basis.adjoint() * moved;
        perm_defect = perm_defect.max(block_form_defect(&w, b, false));
    }
    suite.record(
        "block_invariance_permutations",
        perm_defect,
        1e-9,
        format!("{} permutations act as Id ⊗ v_k", perms.len()),
    );
    Ok(())
}

fn channels(suite: &mut Suite, b: &SchurDecomposition, sampling: SamplingArgs, rng: &mut RngStream) -> schurtwirl::Result<()> {
    let space = b.space();
    let n = space.dim();
    let states: Vec<CMatrix> = (0..reps(n, 5, 2)).map(|_| random_state(n, rng)).collect();

    let (mut idem, mut tr, mut pos, mut span) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for rho in &states {
        let u = unitary_twirl(rho, b)?;
        let s = symmetric_twirl(rho, b)?;
        idem = idem.max(max_abs(&(unitary_twirl(&u, b)? - &u))).max(max_abs(&(symmetric_twirl(&s, b)? - &s)));
        tr = tr.max((trace(&u).re - 1.0).abs()).max((trace(&s).re - 1.0).abs());
        pos = pos.max(-min_eigenvalue(&u)).max(-min_eigenvalue(&s));
        span = span.max(b.decompose(&u)?.lambda_residual).max(b.decompose(&s)?.m_residual);
    }
    suite.record("idempotence", idem, 1e-10, "T_U∘T_U = T_U, T_sym∘T_sym = T_sym");
    suite.record("trace_preservation", tr, 1e-10, "Tr T_U(ρ) = Tr T_sym(ρ) = 1");
    suite.record("positivity", pos, 1e-9, "−min eigenvalue of outputs");

    let mut noiseless: f64 = 0.0;
    for k in 0..b.blocks().len() {
        let ru = lambda_state(b, k, rng)?;
        noiseless = noiseless.max(max_abs(&(unitary_twirl(&ru, b)? - &ru)));
        let rs = m_state(b, k, rng)?;
        noiseless = noiseless.max(max_abs(&(symmetric_twirl(&rs, b)? - &rs)));
    }
    suite.record("duality_noiseless", noiseless, 1e-10, "λ-states fixed by T_U, m-states by T_sym");
    suite.record("duality_span", span, 1e-10, "T_U outputs in λ-span, T_sym outputs in m-span");

    if space.t() <= MAX_BRUTE_T && n <= BRUTE_MAX_DIM {
        let mut brute: f64 = 0.0;
        for rho in &states {
            brute = brute.max(max_abs(&(symmetric_twirl(rho, b)? - brute_symmetric_twirl(rho, space)?)));
        }
        suite.record("symmetric_oracle", brute, 1e-10, "closed form vs (1/t!) Σ_p O_p ρ O_pᵀ");
    } else {
        suite.skip("symmetric_oracle", format!("needs t ≤ {MAX_BRUTE_T} and d^t ≤ {BRUTE_MAX_DIM}"));
    }

    if n <= MC_MAX_DIM {
        let rho = &states[0];
        let emp = empirical_twirl(rho, &HaarSampler { space }, sampling.samples, sampling.seed)?;
        let res = op_norm(&(emp - unitary_twirl(rho, b)?));
        suite.record("unitary_monte_carlo", res, MC_TOLERANCE, format!("operator norm, N={}", sampling.samples));
    } else {
        suite.skip("unitary_monte_carlo", format!("needs d^t ≤ {MC_MAX_DIM}"));
    }
    Ok(())
}

fn slocc(suite: &mut Suite, b: &SchurDecomposition, sampling: SamplingArgs, rng: &mut RngStream) -> schurtwirl::Result<()> {
    let space = b.space();
    let n = space.dim();
    let exp = MeasureSpec::TruncatedExponential;
    let beta = beta_for_measure(&exp, b)?;
    let states: Vec<CMatrix> = (0..reps(n, 5, 2)).map(|_| random_state(n, rng)).collect();

    let mut factor: f64 = 0.0;
    for measure in [exp.clone(), MeasureSpec::dirac(2.0)?] {
        let table = beta_for_measure(&measure, b)?;
        let correction = unitary_twirl(&abelian_integral(&measure, space)?, b)?;
        for rho in &states {
            let lhs = slocc_twirl(rho, &table, b)?;
            factor = factor.max(max_abs(&(lhs - unitary_twirl(rho, b)? * &correction)));
        }
    }
    suite.record("slocc_factorization", factor, 1e-10, "T_SL(ρ) = T_U(ρ)·T_U(A)");

    let mut iterated: f64 = 0.0;
    for rho in &states {
        let mut composed = slocc_twirl(rho, &beta, b)?;
        for m in 2..=5 {
            composed = slocc_twirl(&composed, &beta, b)?;
            if [2, 3, 5].contains(&m) {
                iterated = iterated.max(max_abs(&(slocc_twirl_iterated(rho, &beta, b, m)? - &composed)));
            }
        }
    }
    suite.record("iterated_law", iterated, 1e-9, "m-fold composition, m ∈ {2,3,5}");

    let mut cond: f64 = 0.0;
    for (k, ratio) in beta.ratios().iter().enumerate() {
        let rho = lambda_state(b, k, rng)?;
        cond = cond.max(max_abs(&(slocc_twirl(&rho, &beta, b)? - rho.scale(*ratio))));
    }
    suite.record("conditional_invariance", cond, 1e-9, "T_SL(ρ_k) = (β_k/D^k) ρ_k");

    let draws = reps(n, 200, 20);
    let (mut growth, mut neg, mut consistency) = (f64::NEG_INFINITY, 0.0_f64, 0.0_f64);
    for _ in 0..draws {
        let measure = random_measure(rng);
        let table = beta_for_measure(&measure, b)?;
        let rho = random_state(n, rng).scale(rng.random_range(0.2..1.0));
        let out = slocc_twirl(&rho, &table, b)?;
        growth = growth.max(trace(&out).re - trace(&rho).re);
        neg = neg.max(-min_eigenvalue(&out));
        consistency = consistency.max((trace(&out).re - mean_success_probability(&rho, &table, b)?).abs());
    }
    suite.record("trace_monotonicity", growth.max(0.0), 1e-12, format!("max Tr T_SL(ρ) − Tr ρ over {draws} states/measures"));
    suite.record("slocc_positivity", neg, 1e-9, "−min eigenvalue of T_SL outputs");
    suite.record("mean_success_trace", consistency, 1e-12, "Tr T_SL(ρ) = Σ_k (β_k/D^k) Tr(ρ Π̂_k)");

    if n <= MC_MAX_DIM {
        let rho = &states[0];
        let emp = empirical_twirl(rho, &SloccSampler { measure: exp.clone(), space }, sampling.samples, sampling.seed)?;
        let res = op_norm(&(emp - slocc_twirl(rho, &beta, b)?));
        suite.record("slocc_monte_carlo", res, MC_TOLERANCE, format!("exp measure, operator norm, N={}", sampling.samples));
        let mixed = identity(n).unscale(n as f64);
        let stats = sampled_success_probability(&mixed, &exp, space, sampling.samples, sampling.seed ^ 0x9e37_79b9)?;
        let closed = mean_success_probability(&mixed, &beta, b)?;
        let z = (stats.mean - closed).abs() / stats.std_error.max(f64::MIN_POSITIVE);
        suite.record("success_probability_monte_carlo", z, 3.0, format!("|mean − {}| in standard errors", sig6(closed)));
    } else {
        suite.skip("slocc_monte_carlo", format!("needs d^t ≤ {MC_MAX_DIM}"));
    }
    Ok(())
}

pub fn run(args: SpaceArgs, sampling: SamplingArgs, output: OutputArgs) -> Result<u8, Failure> {
    let space = TensorSpace::new(args.d, args.t)?;
    let basis = cache::basis(space, output.no_cache)?;
    let mut rng = RngStream::new(sampling.seed, u64::MAX);
    let mut suite = Suite { checks: Vec::new() };
    structural(&mut suite, &basis, &mut rng)?;
    channels(&mut suite, &basis, sampling, &mut rng)?;
    if space.d() == 2 {
        slocc(&mut suite, &basis, sampling, &mut rng)?;
    } else {
        suite.skip("slocc", "built-in measures are defined for d = 2");
    }
    let passed = suite.passed();

    if output.json {
        #[derive(Serialize)]
        struct Block {
            partition: Vec<usize>,
            d_l: usize,
            d_v: usize,
            dimension: usize,
        }
        #[derive(Serialize)]
        struct Report {
            d: usize,
            t: usize,
            seed: u64,
            #[serde(rename = "N")]
            n: usize,
            blocks: Vec<Block>,
            checks: Vec<Check>,
            passed: bool,
        }
        let blocks = basis
            .blocks()
            .iter()
            .map(|b| Block { partition: b.partition().rows().to_vec(), d_l: b.d_l(), d_v: b.d_v(), dimension: b.dimension() })
            .collect();
        let report = Report { d: args.d, t: args.t, seed: sampling.seed, n: sampling.samples, blocks, checks: suite.checks, passed };
        let text = serde_json::to_string_pretty(&report).map_err(schurtwirl::Error::from)?;
        println!("{text}");
    } else {
        println!("verify d={} t={} seed={} N={}", args.d, args.t, sampling.seed, sampling.samples);
        let blocks: Vec<String> = basis
            .blocks()
            .iter()
            .map(|b| format!("{} {}×{}={}", partition(b.partition().rows()), b.d_l(), b.d_v(), b.dimension()))
            .collect();
        println!("blocks: {} (total {})", blocks.join(", "), space.dim());
        println!("{:<32} {:>12} {:>10}  {:<6} detail", "check", "residual", "tolerance", "status");
        for c in &suite.checks {
            let fmt = |x: Option<f64>| x.map(sig6).unwrap_or_else(|| "-".into());
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            println!("{:<32} {:>12} {:>10}  {:<6} {}", c.name, fmt(c.residual), fmt(c.tolerance), status, c.detail);
        }
        let failed = suite.checks.iter().filter(|c| c.status == Status::Fail).count();
        if passed {
            println!("result: PASS");
        } else {
            println!("result: FAIL ({failed} checks)");
        }
    }
    Ok(if passed { 0 } else { 1 })
}
