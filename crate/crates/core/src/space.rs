use crate::error::{Error, Result};

/// Default upper bound on `d^t`; all algebra here is dense.
pub const DEFAULT_CAPACITY: usize = 1024;

/// The tensor space `(ℂ^d)^⊗t` with its total dimension `d^t`.
///
/// Basis states `|i_1 … i_t⟩` are indexed big-endian: slot 0 is the most
/// significant digit, matching the Kronecker product order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorSpace {
    d: usize,
    t: usize,
    dim: usize,
}

impl TensorSpace {
    pub fn new(d: usize, t: usize) -> Result<Self> {
        Self::with_capacity(d, t, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(d: usize, t: usize, cap: usize) -> Result<Self> {
        if d == 0 || t == 0 {
            return Err(Error::Argument(format!("need d ≥ 1 and t ≥ 1, got d={d}, t={t}")));
        }
        let mut dim: usize = 1;
        for _ in 0..t {
            dim = dim
                .checked_mul(d)
                .filter(|&n| n <= cap)
                .ok_or(Error::Capacity { d, t, cap })?;
        }
        Ok(TensorSpace { d, t, dim })
    }

    /// Recovers `t` from a matrix dimension `n = d^t`.
    pub fn from_dimension(d: usize, n: usize, cap: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Argument(format!("cannot infer t for d={d}")));
        }
        let mut t = 0;
        let mut acc = 1;
        while acc < n {
            acc *= d;
            t += 1;
        }
        if acc != n || t == 0 {
            return Err(Error::Dimension {
                expected: format!("a power of {d}"),
                actual: n.to_string(),
            });
        }
        Self::with_capacity(d, t, cap)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Local level of `slot` in basis state `index`.
    pub fn digit(&self, index: usize, slot: usize) -> usize {
        (index / self.d.pow((self.t - 1 - slot) as u32)) % self.d
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.t];
        for slot in (0..self.t).rev() {
            out[slot] = index % self.d;
            index /= self.d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &x| acc * self.d + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_is_enforced() {
        assert_eq!(TensorSpace::new(2, 10).unwrap().dim(), 1024);
        assert!(matches!(TensorSpace::new(2, 11), Err(Error::Capacity { .. })));
        assert!(TensorSpace::with_capacity(2, 11, 4096).is_ok());
        assert!(TensorSpace::new(0, 3).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let s = TensorSpace::new(3, 4).unwrap();
        for i in 0..s.dim() {
            let ds = s.digits(i);
            assert_eq!(s.index(&ds), i);
            for (slot, &x) in ds.iter().enumerate() {
                assert_eq!(s.digit(i, slot), x);
            }
        }
    }

    #[test]
    fn infers_t_from_dimension() {
        assert_eq!(TensorSpace::from_dimension(2, 16, 1024).unwrap().t(), 4);
        assert!(TensorSpace::from_dimension(2, 12, 1024).is_err());
        assert!(TensorSpace::from_dimension(3, 1, 1024).is_err());
    }
}
