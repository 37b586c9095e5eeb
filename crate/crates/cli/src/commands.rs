use std::fs;
use std::path::{Path, PathBuf};

use schurtwirl::io::{read_matrix, write_matrix, MatrixContainer};
use schurtwirl::linalg::{op_norm, CMatrix};
use schurtwirl::measures::MeasureSpec;
use schurtwirl::montecarlo::{empirical_twirl, random_density_matrix, HaarSampler, RngStream, SloccSampler};
use schurtwirl::permops::{permutation_matrix_direct, Permutation};
use schurtwirl::schurbasis::SchurDecomposition;
use schurtwirl::space::DEFAULT_CAPACITY;
use schurtwirl::twirl::{
    beta_for_measure, block_weights, mean_success_probability, slocc_twirl, slocc_twirl_iterated, symmetric_twirl,
    unitary_twirl, BetaRow, BetaTable, DensityState, STATE_TOLERANCE,
};
use schurtwirl::{Error, TensorSpace};
use serde::Serialize;

use crate::format::{partition, sig6};
use crate::{cache, Failure, MapKind, OutputArgs, SampleArgs, SpaceArgs, TwirlArgs};

/// Stream id for drawing the random input state of `sample`, kept apart from
/// the per-chunk Monte Carlo streams.
const STATE_STREAM: u64 = u64::MAX;

#[derive(Serialize)]
struct BlockReport {
    block: usize,
    partition: Vec<usize>,
    d_l: usize,
    d_v: usize,
    dimension: usize,
}

fn block_reports(basis: &SchurDecomposition) -> Vec<BlockReport> {
    basis
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| BlockReport {
            block: i + 1,
            partition: b.partition().rows().to_vec(),
            d_l: b.d_l(),
            d_v: b.d_v(),
            dimension: b.dimension(),
        })
        .collect()
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    println!("{text}");
    Ok(())
}

fn space(args: SpaceArgs) -> Result<TensorSpace, Failure> {
    Ok(TensorSpace::new(args.d, args.t)?)
}

fn parse_measure(spec: &str) -> Result<MeasureSpec, Failure> {
    MeasureSpec::parse(spec).map_err(|e| Failure { code: 3, message: e.to_string() })
}

pub fn decompose(args: SpaceArgs, output: OutputArgs) -> Result<u8, Failure> {
    let basis = cache::basis(space(args)?, output.no_cache)?;
    let blocks = block_reports(&basis);
    if output.json {
        #[derive(Serialize)]
        struct Report {
            d: usize,
            t: usize,
            dimension: usize,
            blocks: Vec<BlockReport>,
            orthonormality_defect: f64,
        }
        return print_json(&Report {
            d: args.d,
            t: args.t,
            dimension: basis.space().dim(),
            blocks,
            orthonormality_defect: basis.orthonormality_defect(),
        })
        .map(|_| 0);
    }
    println!("(C^{})^⊗{}: dimension {}, {} blocks", args.d, args.t, basis.space().dim(), blocks.len());
    println!("{:>5}  {:<12} {:>6} {:>6} {:>6}", "block", "partition", "D_L", "D_V", "D");
    for b in &blocks {
        println!(
            "{:>5}  {:<12} {:>6} {:>6} {:>6}",
            b.block,
            partition(&b.partition),
            b.d_l,
            b.d_v,
            b.dimension
        );
    }
    Ok(0)
}

fn read_state(path: &Path, d: usize) -> Result<(CMatrix, TensorSpace), Failure> {
    let m = read_matrix(path)?;
    if !m.is_square() {
        return Err(Failure { code: 3, message: format!("{}: {}×{} matrix is not square", path.display(), m.nrows(), m.ncols()) });
    }
    let space = TensorSpace::from_dimension(d, m.nrows(), DEFAULT_CAPACITY).map_err(|e| match e {
        Error::Capacity { .. } => Failure::from(e),
        other => Failure { code: 3, message: format!("{}: {other}", path.display()) },
    })?;
    let state = DensityState::new(m)?;
    Ok((state.into_matrix(), space))
}

fn default_output(input: &Path, map: MapKind) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "state".into());
    input.with_file_name(format!("{stem}.{}.json", map.name()))
}

pub fn twirl(args: &TwirlArgs) -> Result<u8, Failure> {
    let (rho, space) = read_state(&args.state, args.d)?;
    let tr_in = rho.trace().re;
    if !args.allow_subnormalized && (tr_in - 1.0).abs() > STATE_TOLERANCE {
        return Err(Failure {
            code: 4,
            message: format!("state has trace {tr_in}; pass --allow-subnormalized to accept it"),
        });
    }
    if args.iterate == 0 {
        return Err(Failure { code: 3, message: "--iterate must be at least 1".into() });
    }
    let basis = cache::basis(space, args.output.no_cache)?;
    let weights_in = block_weights(&rho, &basis)?;

    let mut beta: Option<BetaTable> = None;
    let mut mean_p = None;
    let out = match args.map {
        MapKind::Unitary => repeat(&rho, args.iterate, |x| unitary_twirl(x, &basis))?,
        MapKind::Symmetric => repeat(&rho, args.iterate, |x| symmetric_twirl(x, &basis))?,
        MapKind::Slocc => {
            let measure = parse_measure(&args.measure)?;
            let table = beta_for_measure(&measure, &basis)?;
            mean_p = Some(mean_success_probability(&rho, &table, &basis)?);
            let out = slocc_twirl_iterated(&rho, &table, &basis, args.iterate)?;
            beta = Some(table);
            out
        }
    };
    let tr_out = out.trace().re;
    let weights_out = block_weights(&out, &basis)?;
    let path = args.out.clone().unwrap_or_else(|| default_output(&args.state, args.map));
    write_matrix(&path, &out)?;

    if args.output.json {
        #[derive(Serialize)]
        struct BlockWeights {
            #[serde(flatten)]
            block: BlockReport,
            weight_in: f64,
            weight_out: f64,
        }
        #[derive(Serialize)]
        struct Report {
            map: MapKind,
            d: usize,
            t: usize,
            measure: Option<String>,
            iterate: u32,
            trace_in: f64,
            trace_out: f64,
            blocks: Vec<BlockWeights>,
            beta: Option<Vec<BetaRow>>,
            mean_success_probability: Option<f64>,
            out: String,
        }
        let blocks = block_reports(&basis)
            .into_iter()
            .zip(weights_in.iter().zip(&weights_out))
            .map(|(block, (wi, wo))| BlockWeights { block, weight_in: wi.re, weight_out: wo.re })
            .collect();
        return print_json(&Report {
            map: args.map,
            d: space.d(),
            t: space.t(),
            measure: (args.map == MapKind::Slocc).then(|| args.measure.clone()),
            iterate: args.iterate,
            trace_in: tr_in,
            trace_out: tr_out,
            blocks,
            beta: beta.map(|b| b.rows().to_vec()),
            mean_success_probability: mean_p,
            out: path.display().to_string(),
        })
        .map(|_| 0);
    }

    print!("{} twirl, d={} t={}", args.map.name(), space.d(), space.t());
    if args.map == MapKind::Slocc {
        print!(", measure {}", args.measure);
    }
    if args.iterate > 1 {
        print!(", iterated {} times", args.iterate);
    }
    println!();
    println!("trace in   {}", sig6(tr_in));
    println!("trace out  {}", sig6(tr_out));
    println!("{:>5}  {:<12} {:>12} {:>12}", "block", "partition", "weight in", "weight out");
    for (i, b) in basis.blocks().iter().enumerate() {
        println!(
            "{:>5}  {:<12} {:>12} {:>12}",
            i + 1,
            partition(b.partition().rows()),
            sig6(weights_in[i].re),
            sig6(weights_out[i].re)
        );
    }
    if let Some(table) = &beta {
        println!();
        print_beta_table(table);
    }
    if let Some(p) = mean_p {
        println!("mean success probability  {}", sig6(p));
    }
    println!("wrote {}", path.display());
    Ok(0)
}

fn repeat(x: &CMatrix, times: u32, f: impl Fn(&CMatrix) -> schurtwirl::Result<CMatrix>) -> schurtwirl::Result<CMatrix> {
    let mut out = f(x)?;
    for _ in 1..times {
        out = f(&out)?;
    }
    Ok(out)
}

fn print_beta_table(table: &BetaTable) {
    println!(
        "{:>5}  {:<12} {:>5} {:>5} {:>5} {:>12} {:>12}",
        "block", "partition", "D_L", "D_V", "D", "beta", "beta/D"
    );
    for r in table.rows() {
        println!(
            "{:>5}  {:<12} {:>5} {:>5} {:>5} {:>12} {:>12}",
            r.block,
            partition(r.partition.rows()),
            r.d_l,
            r.d_v,
            r.d,
            sig6(r.beta),
            sig6(r.ratio)
        );
    }
}

pub fn beta(args: SpaceArgs, measure: &str, output: OutputArgs) -> Result<u8, Failure> {
    let space = space(args)?;
    let spec = parse_measure(measure)?;
    let basis = cache::basis(space, output.no_cache)?;
    let table = beta_for_measure(&spec, &basis)?;
    if output.json {
        #[derive(Serialize)]
        struct Report<'a> {
            d: usize,
            t: usize,
            measure: &'a str,
            rows: &'a [BetaRow],
        }
        return print_json(&Report { d: args.d, t: args.t, measure, rows: table.rows() }).map(|_| 0);
    }
    print!("{}", table.to_csv());
    Ok(0)
}

pub fn sample(args: &SampleArgs) -> Result<u8, Failure> {
    let (rho, space) = match &args.state {
        Some(path) => read_state(path, args.d)?,
        None => {
            let t = args.t.ok_or_else(|| Failure { code: 3, message: "-t is required without a state file".into() })?;
            let space = TensorSpace::new(args.d, t)?;
            let mut rng = RngStream::new(args.sampling.seed, STATE_STREAM);
            (random_density_matrix(space.dim(), &mut rng), space)
        }
    };
    let basis = cache::basis(space, args.no_cache)?;
    let n = args.sampling.samples;
    let seed = args.sampling.seed;
    let (closed, estimate, measure) = match args.map {
        MapKind::Unitary => (unitary_twirl(&rho, &basis)?, empirical_twirl(&rho, &HaarSampler { space }, n, seed)?, None),
        MapKind::Symmetric => {
            let draw = |rng: &mut RngStream| permutation_matrix_direct(&Permutation::random(space.t(), rng), space);
            (symmetric_twirl(&rho, &basis)?, empirical_twirl(&rho, &draw, n, seed)?, None)
        }
        MapKind::Slocc => {
            let spec = parse_measure(&args.measure)?;
            let beta = beta_for_measure(&spec, &basis)?;
            let closed = slocc_twirl(&rho, &beta, &basis)?;
            let estimate = empirical_twirl(&rho, &SloccSampler { measure: spec, space }, n, seed)?;
            (closed, estimate, Some(args.measure.clone()))
        }
    };

    #[derive(Serialize)]
    struct Report {
        estimate: MatrixContainer,
        closed_form: MatrixContainer,
        residual_norm: f64,
        #[serde(rename = "N")]
        n: usize,
        seed: u64,
        map: MapKind,
        d: usize,
        t: usize,
        measure: Option<String>,
    }
    let report = Report {
        residual_norm: op_norm(&(&estimate - &closed)),
        estimate: MatrixContainer::from_matrix(&estimate),
        closed_form: MatrixContainer::from_matrix(&closed),
        n,
        seed,
        map: args.map,
        d: space.d(),
        t: space.t(),
        measure,
    };
    match &args.out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
            fs::write(path, text).map_err(Error::from)?;
            eprintln!("residual {} (N={n}, seed={seed}); wrote {}", sig6(report.residual_norm), path.display());
        }
        None => print_json(&report)?,
    }
    Ok(0)
}
