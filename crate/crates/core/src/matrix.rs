//! Square matrices over `Z/p^k Z`.

use std::fmt;

use crate::error::{Error, Result};
use crate::residue::{Residue, ResidueRing};

/// An `m x m` matrix with entries in a single [`ResidueRing`], stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    m: usize,
    ring: ResidueRing,
    entries: Vec<u64>,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (mod {})", self.ring.modulus())
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.m {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.m {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entries[i * self.m + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl ModMatrix {
    pub fn zero(m: usize, ring: ResidueRing) -> Self {
        ModMatrix {
            m,
            ring,
            entries: vec![0; m * m],
        }
    }

    pub fn identity(m: usize, ring: ResidueRing) -> Self {
        let mut out = ModMatrix::zero(m, ring);
        let one = ring.one().value();
        for i in 0..m {
            out.entries[i * m + i] = one;
        }
        out
    }

    /// The elementary matrix `E_{i,j}` (0-based indices).
    pub fn unit(m: usize, ring: ResidueRing, i: usize, j: usize) -> Self {
        let mut out = ModMatrix::zero(m, ring);
        out.entries[i * m + j] = ring.one().value();
        out
    }

    /// Builds a matrix from signed row-major entries, reducing each one.
    pub fn from_i64(m: usize, ring: ResidueRing, entries: &[i64]) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                got: entries.len(),
            });
        }
        Ok(ModMatrix {
            m,
            ring,
            entries: entries.iter().map(|&x| ring.reduce_i128(x as i128)).collect(),
        })
    }

    pub fn from_rows(ring: ResidueRing, rows: &[Vec<i64>]) -> Result<Self> {
        let m = rows.len();
        let mut flat = Vec::with_capacity(m * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        ModMatrix::from_i64(m, ring, &flat)
    }

    /// Builds a matrix from unsigned representatives (reduced modulo `p^k`).
    pub fn from_raw(m: usize, ring: ResidueRing, entries: Vec<u64>) -> Self {
        assert_eq!(entries.len(), m * m, "entry count must be m^2");
        let modulus = ring.modulus();
        ModMatrix {
            m,
            ring,
            entries: entries.into_iter().map(|x| x % modulus).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    /// Row-major canonical representatives.
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u64> {
        self.entries
    }

    #[inline]
    pub fn raw(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.m + j]
    }

    pub fn get(&self, i: usize, j: usize) -> Residue {
        self.ring.from_u64(self.raw(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, x: Residue) {
        debug_assert_eq!(x.ring(), self.ring);
        self.entries[i * self.m + j] = x.value();
    }

    fn check_compatible(&self, other: &ModMatrix) {
        assert_eq!(self.m, other.m, "matrix dimensions differ");
        assert_eq!(self.ring, other.ring, "matrix rings differ");
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        self.check_compatible(other);
        let m = self.m;
        let modulus = self.ring.modulus() as u128;
        let mut out = vec![0u64; m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc: u128 = 0;
                for l in 0..m {
                    acc += self.entries[i * m + l] as u128 * other.entries[l * m + j] as u128;
                    // keep the accumulator bounded for large moduli
                    if acc >= 1u128 << 126 {
                        acc %= modulus;
                    }
                }
                out[i * m + j] = (acc % modulus) as u64;
            }
        }
        ModMatrix {
            m,
            ring: self.ring,
            entries: out,
        }
    }

    pub fn add(&self, other: &ModMatrix) -> ModMatrix {
        self.check_compatible(other);
        let ring = self.ring;
        ModMatrix {
            m: self.m,
            ring,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| ring.add_raw(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &ModMatrix) -> ModMatrix {
        self.check_compatible(other);
        let ring = self.ring;
        ModMatrix {
            m: self.m,
            ring,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| ring.sub_raw(a, b))
                .collect(),
        }
    }

    pub fn neg(&self) -> ModMatrix {
        let ring = self.ring;
        ModMatrix {
            m: self.m,
            ring,
            entries: self.entries.iter().map(|&a| ring.neg_raw(a)).collect(),
        }
    }

    pub fn scale(&self, c: Residue) -> ModMatrix {
        debug_assert_eq!(c.ring(), self.ring);
        let ring = self.ring;
        ModMatrix {
            m: self.m,
            ring,
            entries: self
                .entries
                .iter()
                .map(|&a| ring.mul_raw(a, c.value()))
                .collect(),
        }
    }

    pub fn trace(&self) -> Residue {
        let mut acc = 0;
        for i in 0..self.m {
            acc = self.ring.add_raw(acc, self.raw(i, i));
        }
        self.ring.from_u64(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        let one = self.ring.one().value();
        (0..self.m).all(|i| {
            (0..self.m).all(|j| self.raw(i, j) == if i == j { one } else { 0 })
        })
    }

    /// Smallest valuation among the entries (`exp` for the zero matrix).
    pub fn min_valuation(&self) -> u32 {
        self.entries
            .iter()
            .map(|&x| self.ring.valuation_raw(x))
            .min()
            .unwrap_or(self.ring.exp())
    }

    /// Division-free determinant: a dynamic program over column subsets,
    /// exact over any commutative ring.
    pub fn det(&self) -> Residue {
        let m = self.m;
        let ring = self.ring;
        match m {
            0 => return ring.one(),
            1 => return self.get(0, 0),
            2 => {
                let ad = ring.mul_raw(self.raw(0, 0), self.raw(1, 1));
                let bc = ring.mul_raw(self.raw(0, 1), self.raw(1, 0));
                return ring.from_u64(ring.sub_raw(ad, bc));
            }
            _ => {}
        }
        // dp[mask]: signed sum over assignments of the first popcount(mask)
        // rows to the columns in mask.
        let mut dp = vec![0u64; 1 << m];
        dp[0] = ring.one().value();
        for mask in 0usize..(1 << m) {
            let v = dp[mask];
            if v == 0 {
                continue;
            }
            let row = mask.count_ones() as usize;
            if row == m {
                continue;
            }
            for col in 0..m {
                if mask & (1 << col) != 0 {
                    continue;
                }
                let term = ring.mul_raw(v, self.raw(row, col));
                let above = (mask >> (col + 1)).count_ones();
                let next = mask | (1 << col);
                dp[next] = if above % 2 == 0 {
                    ring.add_raw(dp[next], term)
                } else {
                    ring.sub_raw(dp[next], term)
                };
            }
        }
        ring.from_u64(dp[(1 << m) - 1])
    }

    /// Inverse via the adjugate for `m <= 3`, unit-pivot Gauss-Jordan otherwise.
    pub fn inv(&self) -> Result<ModMatrix> {
        let det = self.det();
        if !det.is_unit() {
            return Err(Error::Singular(self.ring.modulus()));
        }
        let dinv = det.invert()?;
        let ring = self.ring;
        let a = |i, j| self.get(i, j);
        match self.m {
            1 => Ok(ModMatrix {
                m: 1,
                ring,
                entries: vec![dinv.value()],
            }),
            2 => {
                let adj = [a(1, 1), -a(0, 1), -a(1, 0), a(0, 0)];
                Ok(ModMatrix {
                    m: 2,
                    ring,
                    entries: adj.iter().map(|&x| (x * dinv).value()).collect(),
                })
            }
            3 => {
                let mut out = ModMatrix::zero(3, ring);
                for i in 0..3 {
                    for j in 0..3 {
                        // adj[i][j] = cofactor(j, i)
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        let cof = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
                        out.set(i, j, cof * dinv);
                    }
                }
                Ok(out)
            }
            _ => self.inv_gauss_jordan(),
        }
    }

    fn inv_gauss_jordan(&self) -> Result<ModMatrix> {
        let m = self.m;
        let ring = self.ring;
        let mut a = self.entries.clone();
        let mut b = ModMatrix::identity(m, ring).entries;
        for col in 0..m {
            // Local ring: an invertible matrix always has a unit pivot.
            let pivot = (col..m)
                .find(|&r| !a[r * m + col].is_multiple_of(ring.p()))
                .ok_or(Error::Singular(ring.modulus()))?;
            if pivot != col {
                for j in 0..m {
                    a.swap(pivot * m + j, col * m + j);
                    b.swap(pivot * m + j, col * m + j);
                }
            }
            let inv = ring.inverse_raw(a[col * m + col])?;
            for j in 0..m {
                a[col * m + j] = ring.mul_raw(a[col * m + j], inv);
                b[col * m + j] = ring.mul_raw(b[col * m + j], inv);
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0 {
                    continue;
                }
                for j in 0..m {
                    a[r * m + j] = ring.sub_raw(a[r * m + j], ring.mul_raw(f, a[col * m + j]));
                    b[r * m + j] = ring.sub_raw(b[r * m + j], ring.mul_raw(f, b[col * m + j]));
                }
            }
        }
        Ok(ModMatrix {
            m,
            ring,
            entries: b,
        })
    }

    /// Largest `k <= exp` with `self ≡ I (mod p^k)`.
    pub fn congruence_level(&self) -> u32 {
        let ring = self.ring;
        let one = ring.one().value();
        let mut level = ring.exp();
        for i in 0..self.m {
            for j in 0..self.m {
                let x = self.raw(i, j);
                let d = if i == j { ring.sub_raw(x, one) } else { x };
                level = level.min(ring.valuation_raw(d));
            }
        }
        level
    }

    /// Entrywise reduction modulo `p^k`.
    pub fn project(&self, k: u32) -> Result<ModMatrix> {
        if k > self.ring.exp() {
            return Err(Error::PrecisionExhausted {
                needed: k,
                available: self.ring.exp(),
            });
        }
        let ring = self.ring.with_exp(k)?;
        Ok(ModMatrix::from_raw(self.m, ring, self.entries.clone()))
    }

    /// Same canonical representatives viewed modulo `p^k` for `k >= exp`.
    /// Not a homomorphism; callers fix up whatever invariants they need.
    pub fn lift(&self, k: u32) -> Result<ModMatrix> {
        let ring = self.ring.with_exp(k)?;
        Ok(ModMatrix::from_raw(self.m, ring, self.entries.clone()))
    }

    /// Exact division of every entry by `p^e`, landing modulo `p^(exp-e)`.
    pub fn div_p_pow(&self, e: u32) -> Result<ModMatrix> {
        if e > self.ring.exp() || self.min_valuation() < e {
            return Err(Error::NotDivisible(e));
        }
        let ring = self.ring.with_exp(self.ring.exp() - e)?;
        let d = self.ring.p().pow(e);
        Ok(ModMatrix::from_raw(
            self.m,
            ring,
            self.entries.iter().map(|&x| x / d).collect(),
        ))
    }

    /// `{a, b} = a^-1 b^-1 a b`.
    pub fn commutator(&self, other: &ModMatrix) -> Result<ModMatrix> {
        let ai = self.inv()?;
        let bi = other.inv()?;
        Ok(ai.mul(&bi).mul(self).mul(other))
    }
}
