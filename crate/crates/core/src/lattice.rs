use std::fmt;
use std::ops::{Add, Index, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A point `(k_1, …, k_n)` of the integer lattice acted on by the flows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn zero(n: usize) -> Self {
        LatticePoint(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        LatticePoint(vec![1; n])
    }

    /// Unit vector `e_i` (0-based index).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut k = vec![0; n];
        k[i] = 1;
        LatticePoint(k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &i64> {
        self.0.iter()
    }

    /// Every point of the box `max_i |k_i| ≤ radius`, in lexicographic order.
    pub fn cube(n: usize, radius: i64) -> Vec<LatticePoint> {
        let side = (2 * radius + 1) as usize;
        let total = side.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut k = vec![0; n];
                for slot in k.iter_mut().rev() {
                    *slot = (idx % side) as i64 - radius;
                    idx /= side;
                }
                LatticePoint(k)
            })
            .collect()
    }
}

impl Index<usize> for LatticePoint {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        assert_eq!(self.len(), rhs.len(), "lattice dimension mismatch");
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        assert_eq!(self.len(), rhs.len(), "lattice dimension mismatch");
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for LatticePoint {
    type Err = String;

    /// Parses `"1,0,-2"` (parentheses optional).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        if trimmed.is_empty() {
            return Ok(LatticePoint(Vec::new()));
        }
        trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| format!("bad lattice coordinate {t:?}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(LatticePoint)
    }
}
