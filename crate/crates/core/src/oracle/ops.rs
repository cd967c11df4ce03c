use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single creation or annihilation operator on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

/// Product of ladder operators, written left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LadderString(pub Vec<Ladder>);

impl LadderString {
    pub fn identity() -> Self {
        LadderString(Vec::new())
    }

    /// `x†ⁿ xᵐ` on one mode.
    pub fn normal(mode: usize, n: usize, m: usize) -> Self {
        let mut v = vec![Ladder { mode, dagger: true }; n];
        v.extend(std::iter::repeat_n(Ladder { mode, dagger: false }, m));
        LadderString(v)
    }

    pub fn destroy(mode: usize) -> Self {
        Self::normal(mode, 0, 1)
    }

    pub fn create(mode: usize) -> Self {
        Self::normal(mode, 1, 0)
    }

    pub fn then(mut self, other: &LadderString) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }

    pub fn adjoint(&self) -> Self {
        LadderString(self.0.iter().rev().map(|l| Ladder { mode: l.mode, dagger: !l.dagger }).collect())
    }

    fn max_mode(&self) -> Option<usize> {
        self.0.iter().map(|l| l.mode).max()
    }

    /// Image of a Fock basis state; `None` when annihilated or truncated away.
    fn apply(&self, occ: &mut [usize], dims: &[usize]) -> Option<f64> {
        let mut amp = 1.0;
        for l in self.0.iter().rev() {
            let n = &mut occ[l.mode];
            if l.dagger {
                if *n + 1 >= dims[l.mode] {
                    return None;
                }
                *n += 1;
                amp *= *n as f64;
            } else {
                if *n == 0 {
                    return None;
                }
                amp *= *n as f64;
                *n -= 1;
            }
        }
        Some(amp.sqrt())
    }
}

impl fmt::Display for LadderString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "m{}{}", l.mode, if l.dagger { "+" } else { "" })?;
        }
        Ok(())
    }
}

/// Square sparse complex matrix held as sorted `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    pub n: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    /// Sums duplicate positions and drops exact zeros.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, Complex64)>) -> Self {
        t.sort_unstable_by_key(|e| (e.0, e.1));
        let mut entries: Vec<(usize, usize, Complex64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2.norm() != 0.0);
        SparseOp { n, entries }
    }

    pub fn from_map(n: usize, map: BTreeMap<(usize, usize), Complex64>) -> Self {
        let entries = map.into_iter().filter(|(_, v)| v.norm() != 0.0).map(|((r, c), v)| (r, c, v)).collect();
        SparseOp { n, entries }
    }

    /// Matrix of `Σ coeff · string` on the truncated product space.
    ///
    /// Basis index: mode 0 varies slowest.
    pub fn from_terms(dims: &[usize], terms: &[(Complex64, LadderString)]) -> Result<Self> {
        let n: usize = dims.iter().product();
        for (_, s) in terms {
            if let Some(m) = s.max_mode() {
                if m >= dims.len() {
                    return Err(Error::Dimension(format!("operator {s} acts on mode {m} of {}", dims.len())));
                }
            }
        }
        let mut map = BTreeMap::new();
        let mut occ = vec![0; dims.len()];
        for col in 0..n {
            for (coeff, s) in terms {
                decode(col, dims, &mut occ);
                if let Some(amp) = s.apply(&mut occ, dims) {
                    let row = encode(&occ, dims);
                    *map.entry((row, col)).or_insert(Complex64::new(0.0, 0.0)) += coeff * amp;
                }
            }
        }
        Ok(Self::from_map(n, map))
    }

    pub fn adjoint(&self) -> Self {
        let mut map = BTreeMap::new();
        for &(r, c, v) in &self.entries {
            map.insert((c, r), v.conj());
        }
        Self::from_map(self.n, map)
    }

    pub fn mul(&self, other: &SparseOp) -> Self {
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); other.n];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut map = BTreeMap::new();
        for &(r, k, v) in &self.entries {
            for &(c, w) in &by_row[k] {
                *map.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v * w;
            }
        }
        Self::from_map(self.n, map)
    }

    /// Largest `|A − A†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let map: BTreeMap<(usize, usize), Complex64> = self.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();
        let zero = Complex64::new(0.0, 0.0);
        self.entries
            .iter()
            .map(|&(r, c, v)| (v - map.get(&(c, r)).unwrap_or(&zero).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }
}

pub(crate) fn decode(mut idx: usize, dims: &[usize], occ: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        occ[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub(crate) fn encode(occ: &[usize], dims: &[usize]) -> usize {
    occ.iter().zip(dims).fold(0, |acc, (&o, &d)| acc * d + o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_operator_is_diagonal() {
        let n = SparseOp::from_terms(&[4], &[(Complex64::new(1.0, 0.0), LadderString::normal(0, 1, 1))]).unwrap();
        let diag: Vec<f64> = n.entries.iter().map(|e| e.2.re).collect();
        assert_eq!(diag, vec![1.0, 2.0, 3.0]);
        assert!(n.entries.iter().all(|e| e.0 == e.1));
    }

    #[test]
    fn product_space_indexing() {
        let dims = [3, 2];
        let b = SparseOp::from_terms(&dims, &[(Complex64::new(1.0, 0.0), LadderString::destroy(1))]).unwrap();
        // |n0=1, n1=1> = index 3 maps to |1,0> = index 2
        assert!(b.entries.contains(&(2, 3, Complex64::new(1.0, 0.0))));
        let mut occ = [0; 2];
        decode(5, &dims, &mut occ);
        assert_eq!(occ, [2, 1]);
        assert_eq!(encode(&occ, &dims), 5);
    }

    #[test]
    fn adjoint_and_hermiticity() {
        let dims = [5];
        let a = SparseOp::from_terms(&dims, &[(Complex64::new(1.0, 0.0), LadderString::destroy(0))]).unwrap();
        let ad = SparseOp::from_terms(&dims, &[(Complex64::new(1.0, 0.0), LadderString::create(0))]).unwrap();
        assert_eq!(a.adjoint(), ad);
        assert_eq!(LadderString::normal(0, 2, 1).adjoint(), LadderString::normal(0, 1, 2));
        let n = ad.mul(&a);
        assert_eq!(n.hermiticity_defect(), 0.0);
        assert!(a.hermiticity_defect() > 0.5);
        assert_eq!(LadderString::normal(1, 1, 1).to_string(), "m1+ m1");
    }
}
