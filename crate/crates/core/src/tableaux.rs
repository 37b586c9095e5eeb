//! Partitions, standard Young tableaux, and the two dimension formulas.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Young diagram: weakly decreasing positive row lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    rows: Vec<usize>,
}

impl Partition {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Argument("partition must have at least one row".into()));
        }
        if rows.contains(&0) {
            return Err(Error::Argument(format!("partition {rows:?} has an empty row")));
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Argument(format!("partition {rows:?} is not weakly decreasing")));
        }
        Ok(Partition { rows })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Number of boxes.
    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column lengths (the conjugate partition).
    pub fn columns(&self) -> Vec<usize> {
        (0..self.rows[0])
            .map(|c| self.rows.iter().take_while(|&&r| r > c).count())
            .collect()
    }

    pub fn hook(&self, row: usize, col: usize) -> usize {
        let arm = self.rows[row] - col - 1;
        let leg = self.rows[row + 1..].iter().take_while(|&&r| r > col).count();
        arm + leg + 1
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;
    fn try_from(rows: Vec<usize>) -> Result<Self> {
        Partition::new(rows)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.rows
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

/// All partitions of `t` with at most `d` rows, lexicographically decreasing.
///
/// The position in this list is the block index used everywhere downstream.
pub fn enumerate_partitions(t: usize, d: usize) -> Vec<Partition> {
    fn go(rem: usize, max: usize, rows_left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { rows: prefix.clone() });
            return;
        }
        if rows_left == 0 {
            return;
        }
        for r in (1..=rem.min(max)).rev() {
            prefix.push(r);
            go(rem - r, r, rows_left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if t == 0 || d == 0 {
        return out;
    }
    go(t, t, d, &mut Vec::new(), &mut out);
    out
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact running product of fractions.
struct Fraction {
    num: u128,
    den: u128,
}

impl Fraction {
    fn one() -> Self {
        Fraction { num: 1, den: 1 }
    }

    fn mul(&mut self, num: u128, den: u128) {
        let g1 = gcd(num, self.den);
        let g2 = gcd(self.num, den);
        self.num = (self.num / g2) * (num / g1);
        self.den = (self.den / g1) * (den / g2);
        let g = gcd(self.num, self.den);
        self.num /= g;
        self.den /= g;
    }

    fn into_integer(self) -> u64 {
        debug_assert_eq!(self.den, 1);
        self.num as u64
    }
}

/// Dimension of the irreducible `U(d)` representation labelled by `p`.
///
/// Rows are zero-padded to length `d`, so single-row shapes give the
/// symmetric-power dimension `C(t + d − 1, t)`.
pub fn weyl_dimension(p: &Partition, d: usize) -> Result<u64> {
    if p.len() > d {
        return Err(Error::Shape { rows: p.rows.clone(), d });
    }
    let row = |k: usize| p.rows.get(k).copied().unwrap_or(0);
    let mut acc = Fraction::one();
    // pairs with both rows padded contribute (ν − μ)/(ν − μ)
    for mu in 0..p.len() {
        for nu in mu + 1..d {
            let num = (row(mu) + nu - mu - row(nu)) as u128;
            acc.mul(num, (nu - mu) as u128);
        }
    }
    Ok(acc.into_integer())
}

/// Dimension of the irreducible `S_t` representation labelled by `p`
/// (hook-length formula).
pub fn hook_dimension(p: &Partition) -> u64 {
    let mut acc = Fraction::one();
    for k in 2..=p.size() {
        acc.mul(k as u128, 1);
    }
    for (row, &len) in p.rows.iter().enumerate() {
        for col in 0..len {
            acc.mul(1, p.hook(row, col) as u128);
        }
    }
    acc.into_integer()
}

/// A standard filling of a Young diagram with `1..=t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StandardTableau {
    shape: Partition,
    rows: Vec<Vec<usize>>,
}

impl StandardTableau {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let shape = Partition::new(rows.iter().map(Vec::len).collect())?;
        let t = shape.size();
        let mut seen = vec![false; t + 1];
        for &e in rows.iter().flatten() {
            if e == 0 || e > t || seen[e] {
                return Err(Error::Argument(format!("tableau {rows:?} is not a filling of 1..={t}")));
            }
            seen[e] = true;
        }
        for (r, row) in rows.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                let right_ok = row.get(c + 1).is_none_or(|&x| x > e);
                let below_ok = rows.get(r + 1).and_then(|nr| nr.get(c)).is_none_or(|&x| x > e);
                if !right_ok || !below_ok {
                    return Err(Error::Argument(format!("tableau {rows:?} is not standard")));
                }
            }
        }
        Ok(StandardTableau { shape, rows })
    }

    /// Row-major filling `1..=t`.
    pub fn normal(shape: &Partition) -> Self {
        let mut next = 0;
        let rows = shape
            .rows()
            .iter()
            .map(|&len| {
                (0..len)
                    .map(|_| {
                        next += 1;
                        next
                    })
                    .collect()
            })
            .collect();
        StandardTableau { shape: shape.clone(), rows }
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    /// Entries, row by row (1-based values).
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn columns(&self) -> Vec<Vec<usize>> {
        self.shape
            .columns()
            .iter()
            .enumerate()
            .map(|(c, &len)| (0..len).map(|r| self.rows[r][c]).collect())
            .collect()
    }

    /// Entries concatenated row by row.
    pub fn reading_word(&self) -> Vec<usize> {
        self.rows.iter().flatten().copied().collect()
    }
}

impl fmt::Display for StandardTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "{}", rows.join(" / "))
    }
}

/// All standard tableaux of shape `p`, ordered lexicographically by reading
/// word. The normal tableau has the smallest reading word, so it comes first.
pub fn standard_tableaux(p: &Partition) -> Vec<StandardTableau> {
    fn fill(
        shape: &[usize],
        filled: &mut Vec<usize>,
        rows: &mut Vec<Vec<usize>>,
        next: usize,
        t: usize,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if next > t {
            out.push(rows.clone());
            return;
        }
        for r in 0..shape.len() {
            let addable = filled[r] < shape[r] && (r == 0 || filled[r - 1] > filled[r]);
            if addable {
                filled[r] += 1;
                rows[r].push(next);
                fill(shape, filled, rows, next + 1, t, out);
                rows[r].pop();
                filled[r] -= 1;
            }
        }
    }
    let mut raw = Vec::new();
    fill(
        p.rows(),
        &mut vec![0; p.len()],
        &mut vec![Vec::new(); p.len()],
        1,
        p.size(),
        &mut raw,
    );
    let mut out: Vec<StandardTableau> = raw
        .into_iter()
        .map(|rows| StandardTableau { shape: p.clone(), rows })
        .collect();
    out.sort_by_key(|tab| tab.reading_word());
    out
}
