//! The Lie algebra `sl_m(Z/p^k Z)` and constructive bracket decompositions.
//!
//! For `m = 2` every element is a single bracket; for general `m` every
//! element is a sum of two brackets. Both constructions are explicit and
//! deterministic, and both outputs are checked by the callers that rely on
//! them (the synthesizer re-verifies every word it builds from them).

use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::residue::ResidueRing;

/// A trace-zero matrix modulo `p^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LieElement {
    mat: ModMatrix,
}

impl LieElement {
    pub fn new(mat: ModMatrix) -> Result<Self> {
        if !mat.trace().is_zero() {
            return Err(Error::NotTraceZero);
        }
        Ok(LieElement { mat })
    }

    pub fn zero(m: usize, ring: ResidueRing) -> Self {
        LieElement {
            mat: ModMatrix::zero(m, ring),
        }
    }

    /// Builds a trace-zero element from signed row-major entries; the last
    /// diagonal entry is overwritten with minus the sum of the others.
    pub fn from_i64_normalized(m: usize, ring: ResidueRing, entries: &[i64]) -> Result<Self> {
        let mut mat = ModMatrix::from_i64(m, ring, entries)?;
        let mut partial = ring.zero();
        for i in 0..m - 1 {
            partial = partial + mat.get(i, i);
        }
        mat.set(m - 1, m - 1, -partial);
        Ok(LieElement { mat })
    }

    pub fn matrix(&self) -> &ModMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ModMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn ring(&self) -> ResidueRing {
        self.mat.ring()
    }

    /// Precision exponent `k`.
    pub fn exponent(&self) -> u32 {
        self.mat.ring().exp()
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        LieElement {
            mat: self.mat.add(&other.mat),
        }
    }

    pub fn sub(&self, other: &LieElement) -> LieElement {
        LieElement {
            mat: self.mat.sub(&other.mat),
        }
    }

    pub fn scale(&self, c: crate::residue::Residue) -> LieElement {
        LieElement {
            mat: self.mat.scale(c),
        }
    }

    /// Trace-zero lift to a larger exponent: representatives are kept and the
    /// last diagonal entry is corrected so the trace vanishes exactly.
    pub fn lift(&self, k: u32) -> Result<LieElement> {
        let mat = self.mat.lift(k)?;
        let ring = mat.ring();
        let m = mat.dim();
        let mut mat = mat;
        let mut partial = ring.zero();
        for i in 0..m - 1 {
            partial = partial + mat.get(i, i);
        }
        mat.set(m - 1, m - 1, -partial);
        Ok(LieElement { mat })
    }

    pub fn project(&self, k: u32) -> Result<LieElement> {
        Ok(LieElement {
            mat: self.mat.project(k)?,
        })
    }
}

/// `[a, b] = ab - ba` on plain matrices.
pub fn mat_bracket(a: &ModMatrix, b: &ModMatrix) -> ModMatrix {
    a.mul(b).sub(&b.mul(a))
}

/// The Lie bracket; the result always has trace zero.
pub fn bracket(a: &LieElement, b: &LieElement) -> LieElement {
    LieElement {
        mat: mat_bracket(&a.mat, &b.mat),
    }
}

/// `(A1, A2)` with `[A1, A2] = a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketPair {
    pub first: LieElement,
    pub second: LieElement,
}

impl BracketPair {
    pub fn evaluate(&self) -> LieElement {
        bracket(&self.first, &self.second)
    }
}

/// `(B1, B2, B3, B4)` with `[B1, B2] + [B3, B4] = a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketQuad {
    pub diagonal: BracketPair,
    pub off_diagonal: BracketPair,
}

impl BracketQuad {
    pub fn evaluate(&self) -> LieElement {
        self.diagonal.evaluate().add(&self.off_diagonal.evaluate())
    }

    pub fn pairs(&self) -> [&BracketPair; 2] {
        [&self.diagonal, &self.off_diagonal]
    }
}

/// Single-bracket decomposition in `sl_2`.
///
/// Factor out `p^l` (the minimal entry valuation), pick `B` among
/// `E12, E21, E12 + E21` so that `t = Tr([a', B]^2)` is a unit, and return
/// `A1 = p^l * (-2t)^-1 * [[a', B], a']`, `A2 = [a', B]`. Correctness rests on
/// the identity `[[[A, B], A], [A, B]] = -2 Tr([A, B]^2) A`.
pub fn solve_bracket_sl2(a: &LieElement) -> Result<BracketPair> {
    if a.dim() != 2 {
        return Err(Error::WrongDimension(a.dim()));
    }
    let ring = a.ring();
    if a.is_zero() {
        return Ok(BracketPair {
            first: LieElement::zero(2, ring),
            second: LieElement::zero(2, ring),
        });
    }
    let l = a.matrix().min_valuation();
    let shifted = a.matrix().div_p_pow(l)?;
    // Trace-zero lift of a' = a / p^l back to exponent k.
    let reduced = LieElement::from_i64_normalized(
        2,
        ring,
        &[
            shifted.raw(0, 0) as i64,
            shifted.raw(0, 1) as i64,
            shifted.raw(1, 0) as i64,
            0,
        ],
    )?;
    let (u, v, w) = (shifted.get(0, 0), shifted.get(0, 1), shifted.get(1, 0));
    // Tr([a', E12]^2) = 2w^2, Tr([a', E21]^2) = 2v^2 and, once v and w are
    // non-units, Tr([a', E12 + E21]^2) ≡ -8u^2 (mod p).
    let probe = if w.is_unit() {
        ModMatrix::unit(2, ring, 0, 1)
    } else if v.is_unit() {
        ModMatrix::unit(2, ring, 1, 0)
    } else {
        assert!(u.is_unit(), "some entry of a / p^l must be a unit");
        ModMatrix::unit(2, ring, 0, 1).add(&ModMatrix::unit(2, ring, 1, 0))
    };
    let probe = LieElement { mat: probe };
    let c = bracket(&reduced, &probe);
    let t = c.matrix().mul(c.matrix()).trace();
    let beta = (-(ring.elem(2) * t)).invert()?;
    let first = bracket(&c, &reduced).scale(beta * ring.p_pow(l));
    Ok(BracketPair { first, second: c })
}

/// Diagonal values `(1, -1, 2, -2, ...)` for even `m`, `(0, 1, -1, 2, -2, ...)` for odd `m`.
pub fn reference_eigenvalues(m: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(m);
    if m % 2 == 1 {
        out.push(0);
    }
    let mut k = 1;
    while out.len() < m {
        out.push(k);
        out.push(-k);
        k += 1;
    }
    out
}

/// `D = diag(lambda)` with trace zero and all pairwise differences units.
pub fn reference_diagonal(m: usize, ring: ResidueRing) -> Result<LieElement> {
    let lambda = reference_eigenvalues(m);
    for i in 0..m {
        for j in 0..m {
            if i != j && !ring.elem(lambda[i] - lambda[j]).is_unit() {
                return Err(Error::InvalidGroupSpec(format!(
                    "lambda_{i} - lambda_{j} = {} is not a unit mod {}",
                    lambda[i] - lambda[j],
                    ring.p()
                )));
            }
        }
    }
    let mut d = ModMatrix::zero(m, ring);
    for (i, &x) in lambda.iter().enumerate() {
        d.set(i, i, ring.elem(x));
    }
    LieElement::new(d)
}

/// `g` with columns `e1, e1+e2, ..., e1+...+em`, and its inverse.
pub fn basis_change(m: usize, ring: ResidueRing) -> (ModMatrix, ModMatrix) {
    let mut g = ModMatrix::zero(m, ring);
    let mut g_inv = ModMatrix::identity(m, ring);
    for i in 0..m {
        for j in i..m {
            g.set(i, j, ring.one());
        }
        if i + 1 < m {
            g_inv.set(i, i + 1, -ring.one());
        }
    }
    (g, g_inv)
}

/// `B^g = g^-1 B g`.
pub fn conjugate(b: &ModMatrix, g: &ModMatrix, g_inv: &ModMatrix) -> ModMatrix {
    g_inv.mul(b).mul(g)
}

/// `(B1, B2)` with `diag [B1, B2] = diag a`, using `B1 = D^g` and
/// `B2 = sum_i a_i / (lambda_{i+1} - lambda_i) * E_{i+1,i}^g`, where
/// `diag a = sum_i a_i (E_{i+1,i+1} - E_{i,i})`.
pub fn solve_diagonal(a: &LieElement) -> Result<BracketPair> {
    let m = a.dim();
    let ring = a.ring();
    let lambda = reference_eigenvalues(m);
    let d = reference_diagonal(m, ring)?;
    let (g, g_inv) = basis_change(m, ring);
    let b1 = conjugate(d.matrix(), &g, &g_inv);
    let mut b2 = ModMatrix::zero(m, ring);
    let mut coeff = ring.zero();
    for i in 0..m - 1 {
        // a_i = -(d_1 + ... + d_i)
        coeff = coeff - a.matrix().get(i, i);
        if coeff.is_zero() {
            continue;
        }
        let gap = ring.elem(lambda[i + 1] - lambda[i]).invert()?;
        let e = conjugate(&ModMatrix::unit(m, ring, i + 1, i), &g, &g_inv);
        b2 = b2.add(&e.scale(coeff * gap));
    }
    Ok(BracketPair {
        first: LieElement::new(b1)?,
        second: LieElement::new(b2)?,
    })
}

/// `(D, X)` with `[D, X] = r` for a matrix `r` with zero diagonal.
pub fn solve_off_diagonal(r: &LieElement) -> Result<BracketPair> {
    let m = r.dim();
    let ring = r.ring();
    let lambda = reference_eigenvalues(m);
    let d = reference_diagonal(m, ring)?;
    let mut x = ModMatrix::zero(m, ring);
    for i in 0..m {
        if !r.matrix().get(i, i).is_zero() {
            return Err(Error::InvalidGroupSpec("residual has a nonzero diagonal".into()));
        }
        for j in 0..m {
            if i == j {
                continue;
            }
            let gap = ring.elem(lambda[i] - lambda[j]).invert()?;
            x.set(i, j, r.matrix().get(i, j) * gap);
        }
    }
    Ok(BracketPair {
        first: d,
        second: LieElement::new(x)?,
    })
}

/// Two-bracket decomposition valid for every `m >= 2` with `p >= m` (`p > 2`).
pub fn solve_two_brackets(a: &LieElement) -> Result<BracketQuad> {
    let m = a.dim();
    let ring = a.ring();
    if a.is_zero() {
        let z = || LieElement::zero(m, ring);
        return Ok(BracketQuad {
            diagonal: BracketPair { first: z(), second: z() },
            off_diagonal: BracketPair { first: z(), second: z() },
        });
    }
    let diagonal = solve_diagonal(a)?;
    let residual = a.sub(&diagonal.evaluate());
    let off_diagonal = solve_off_diagonal(&residual)?;
    Ok(BracketQuad {
        diagonal,
        off_diagonal,
    })
}
