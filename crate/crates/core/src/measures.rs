//! Normalized measures on the abelian (filtering) factor of `SL(d, ℂ)`.
//!
//! At `d = 2` the factor is parametrized by `A = diag(x, 1/x)` with `x ≥ 1`,
//! whose operator-norm normalization is the filtering matrix
//! `A_n = diag(1, x⁻²)`. For other `d` there is no canonical
//! parametrization, so callers supply a weighted family of normalized
//! diagonal matrices directly.

use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Upper integration limit for the exponential measure; `e^{-33} < 1e-14`.
pub const EXP_CUTOFF: f64 = 33.0;
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;
const MAX_DEPTH: u32 = 50;
/// Budget of panel refinements before giving up.
const MAX_PANELS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// Point mass at `x₀ ≥ 1`.
    Dirac(f64),
    /// `e^{-x} dx / ∫₁^∞ e^{-x} dx` on `[1, ∞)`.
    TruncatedExponential,
    /// Discrete measure on nodes `x ≥ 1`; weights normalized to 1.
    Tabulated { nodes: Vec<f64>, weights: Vec<f64> },
    /// Weighted normalized diagonal matrices, for any `d`.
    DiagonalFamily(DiagonalFamily),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalFamily {
    diagonals: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl DiagonalFamily {
    /// Each diagonal must have entries in `(0, 1]` with maximum exactly 1.
    pub fn new(members: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Argument("empty diagonal family".into()));
        };
        let d = first.0.len();
        for (diag, _) in &members {
            if diag.len() != d || d == 0 {
                return Err(Error::Argument("diagonals of unequal or zero length".into()));
            }
            FilteringMatrix::from_diagonal(diag.clone())?;
        }
        let (diagonals, raw): (Vec<_>, Vec<_>) = members.into_iter().unzip();
        Ok(DiagonalFamily { diagonals, weights: normalize_weights(raw)? })
    }

    pub fn dim(&self) -> usize {
        self.diagonals[0].len()
    }

    pub fn members(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.diagonals.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }
}

fn normalize_weights(weights: Vec<f64>) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Argument("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Argument("weights sum to zero".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

impl MeasureSpec {
    pub fn dirac(x0: f64) -> Result<Self> {
        if !(x0.is_finite() && x0 >= 1.0) {
            return Err(Error::Domain(format!("Dirac location {x0} is below 1")));
        }
        Ok(MeasureSpec::Dirac(x0))
    }

    pub fn tabulated(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Argument("need equally many nodes and weights".into()));
        }
        if let Some(x) = nodes.iter().find(|x| !(x.is_finite() && **x >= 1.0)) {
            return Err(Error::Domain(format!("node {x} is below 1")));
        }
        Ok(MeasureSpec::Tabulated { nodes, weights: normalize_weights(weights)? })
    }

    /// Reads CSV rows `x,weight`. Blank lines and `#` comments are skipped.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse(format!("row {}: expected `x,weight`", line + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))
            };
            nodes.push(parse(&record[0])?);
            weights.push(parse(&record[1])?);
        }
        Self::tabulated(nodes, weights)
    }

    /// Parses `dirac:<x0>`, `exp`, or `table:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "exp" {
            return Ok(MeasureSpec::TruncatedExponential);
        }
        if let Some(x) = spec.strip_prefix("dirac:") {
            let x0 = x
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("measure `{spec}`: {e}")))?;
            return Self::dirac(x0);
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Self::from_csv(Path::new(path));
        }
        Err(Error::Parse(format!(
            "unknown measure `{spec}` (expected dirac:<x0>, exp or table:<path>)"
        )))
    }

    /// Dimension the measure is tied to: 2 for the scalar kinds.
    pub fn local_dimension(&self) -> usize {
        match self {
            MeasureSpec::DiagonalFamily(f) => f.dim(),
            _ => 2,
        }
    }
}

/// `∫ f dμ` for measures parametrized by `x`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, measure: &MeasureSpec) -> Result<f64> {
    match measure {
        MeasureSpec::Dirac(x0) => Ok(f(*x0)),
        MeasureSpec::TruncatedExponential => {
            let weighted = |x: f64| f(x) * (1.0 - x).exp();
            adaptive_simpson(weighted, 1.0, EXP_CUTOFF, QUADRATURE_TOLERANCE)
        }
        MeasureSpec::Tabulated { nodes, weights } => {
            Ok(nodes.iter().zip(weights).map(|(&x, &w)| w * f(x)).sum())
        }
        MeasureSpec::DiagonalFamily(_) => Err(Error::Argument(
            "a diagonal family has no scalar parameter to integrate over".into(),
        )),
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
    }

    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    struct State {
        err: f64,
        ok: bool,
        panels: usize,
    }

    fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32, st: &mut State) -> f64 {
        st.panels += 1;
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * tol {
            st.err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth == 0 || st.panels >= MAX_PANELS {
            st.ok = false;
            st.err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        let l = Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
        let r = Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
        refine(f, l, 0.5 * tol, depth - 1, st) + refine(f, r, 0.5 * tol, depth - 1, st)
    }

    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let root = Panel { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb) };
    let mut st = State { err: 0.0, ok: true, panels: 0 };
    let estimate = refine(&f, root, tol, MAX_DEPTH, &mut st);
    if !st.ok || !estimate.is_finite() {
        return Err(Error::Integration { estimate, error: st.err });
    }
    Ok(estimate)
}

/// Draws the filtering parameter `x`.
pub fn sample<R: Rng + ?Sized>(measure: &MeasureSpec, rng: &mut R) -> Result<f64> {
    match measure {
        MeasureSpec::Dirac(x0) => Ok(*x0),
        MeasureSpec::TruncatedExponential => {
            // u ∈ (0, 1]
            let u = 1.0 - rng.random::<f64>();
            Ok(1.0 - u.ln())
        }
        MeasureSpec::Tabulated { nodes, weights } => Ok(nodes[pick(weights, rng)]),
        MeasureSpec::DiagonalFamily(_) => Err(Error::Argument(
            "a diagonal family has no scalar parameter; use sample_filtering".into(),
        )),
    }
}

fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws a normalized filtering matrix of dimension `d`.
pub fn sample_filtering<R: Rng + ?Sized>(measure: &MeasureSpec, d: usize, rng: &mut R) -> Result<FilteringMatrix> {
    check_dimension(measure, d)?;
    match measure {
        MeasureSpec::DiagonalFamily(f) => {
            let i = pick(&f.weights, rng);
            FilteringMatrix::from_diagonal(f.diagonals[i].clone())
        }
        _ => filtering_matrix(sample(measure, rng)?),
    }
}

pub(crate) fn check_dimension(measure: &MeasureSpec, d: usize) -> Result<()> {
    if measure.local_dimension() != d {
        return Err(Error::Argument(format!(
            "measure is defined for d = {}, not d = {d}; supply a diagonal family",
            measure.local_dimension()
        )));
    }
    Ok(())
}

/// Diagonal of `A_n = A / ‖A‖` for a special-linear diagonal `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteringMatrix {
    diagonal: Vec<f64>,
}

impl FilteringMatrix {
    pub fn from_diagonal(diagonal: Vec<f64>) -> Result<Self> {
        let max = diagonal.iter().fold(0.0_f64, |m, &x| m.max(x));
        if diagonal.iter().any(|&x| !(x > 0.0 && x <= 1.0)) || max != 1.0 {
            return Err(Error::Domain(format!(
                "filtering diagonal {diagonal:?} must lie in (0, 1] with maximum 1"
            )));
        }
        Ok(FilteringMatrix { diagonal })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// The determinant-1 matrix this is the normalization of.
    pub fn unnormalized(&self) -> Vec<f64> {
        let d = self.diagonal.len() as f64;
        let det: f64 = self.diagonal.iter().product();
        let scale = det.powf(-1.0 / d);
        self.diagonal.iter().map(|x| x * scale).collect()
    }
}

/// `A_n = diag(1, x⁻²)` at `d = 2`.
pub fn filtering_matrix(x: f64) -> Result<FilteringMatrix> {
    if !(x.is_finite() && x >= 1.0) {
        return Err(Error::Domain(format!("filtering parameter {x} is below 1")));
    }
    FilteringMatrix::from_diagonal(vec![1.0, x.powi(-2)])
}
