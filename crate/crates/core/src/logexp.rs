//! Truncated p-adic logarithm and exponential between the congruence
//! subgroup `Γ_c` and `p^c sl_m`, with up-front precision budgeting.
//!
//! A term `x^j / j` (or `X^j / j!`) is computed at the working exponent
//! `W = K + s`, divided exactly by the p-part of the denominator, reduced to
//! `p^K`, and multiplied by the inverse of the unit part. `s` is the largest
//! p-valuation of any denominator used, so every division is exact.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lie::{mat_bracket, LieElement};
use crate::matrix::ModMatrix;
use crate::residue::ResidueRing;

fn floor_log(p: u64, mut j: u64) -> u32 {
    let mut e = 0;
    while j >= p {
        j /= p;
        e += 1;
    }
    e
}

fn valuation_u64(p: u64, mut j: u64) -> u32 {
    let mut e = 0;
    while j > 0 && j.is_multiple_of(p) {
        j /= p;
        e += 1;
    }
    e
}

/// `v_p(j!)` by Legendre's formula.
pub fn factorial_valuation(p: u64, j: u64) -> u32 {
    let mut acc = 0;
    let mut q = j / p;
    while q > 0 {
        acc += q as u32;
        q /= p;
    }
    acc
}

/// Series length and slack for one log or exp evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionBudget {
    /// Target exponent `K`.
    pub target: u32,
    /// Slack digits `s`.
    pub slack: u32,
    /// Last series index `J` that can contribute modulo `p^K`.
    pub terms: u32,
}

impl PrecisionBudget {
    pub fn working(&self) -> u32 {
        self.target + self.slack
    }

    /// Budget for `log(1 + x)` with `v_p(x) >= level`.
    ///
    /// Term `j` has valuation at least `j*level - floor(log_p j)`, which is
    /// nondecreasing in `j`, so the scan stops at the first index reaching `K`.
    pub fn for_log(p: u64, level: u32, target: u32) -> Self {
        assert!(level >= 1);
        let mut j: u64 = 1;
        while (j as i64) * level as i64 - (floor_log(p, j) as i64) < target as i64 {
            j += 1;
        }
        let terms = (j - 1) as u32;
        let slack = if terms == 0 { 0 } else { floor_log(p, terms as u64) };
        PrecisionBudget {
            target,
            slack,
            terms,
        }
    }

    /// Budget for `exp(X)` with `v_p(X) >= level`.
    ///
    /// Uses `v_p(j!) <= (j-1)/(p-1)`; the bound `j*level - floor((j-1)/(p-1))`
    /// is nondecreasing for `p >= 3`.
    pub fn for_exp(p: u64, level: u32, target: u32) -> Self {
        assert!(level >= 1 && p >= 3);
        let mut j: u64 = 1;
        while (j as i64) * level as i64 - ((j - 1) / (p - 1)) as i64 - (target as i64) < 0 {
            j += 1;
        }
        let terms = (j - 1) as u32;
        PrecisionBudget {
            target,
            slack: factorial_valuation(p, terms as u64),
            terms,
        }
    }
}

fn check_precision(ring: ResidueRing, target: u32) -> Result<ResidueRing> {
    if ring.exp() < target {
        return Err(Error::PrecisionExhausted {
            needed: target,
            available: ring.exp(),
        });
    }
    ring.with_exp(target)
}

/// `log(g) = sum_{j>=1} (-1)^(j+1) (g - I)^j / j` modulo `p^K`.
///
/// Requires `g ≡ I (mod p)` and `det g ≡ 1`; the input may carry any
/// precision `>= K` (the result modulo `p^K` only depends on `g` modulo `p^K`).
pub fn trunc_log(g: &ModMatrix, target: u32) -> Result<LieElement> {
    let out_ring = check_precision(g.ring(), target)?;
    let m = g.dim();
    let level = g.congruence_level();
    if level == 0 {
        return Err(Error::NotCongruent);
    }
    let level = level.min(target);
    if level >= target {
        return Ok(LieElement::zero(m, out_ring));
    }
    let p = out_ring.p();
    let budget = PrecisionBudget::for_log(p, level, target);
    let x = g.sub(&ModMatrix::identity(m, g.ring())).lift(budget.working())?;
    let mut power = x.clone();
    let mut sum = ModMatrix::zero(m, out_ring);
    for j in 1..=budget.terms as u64 {
        let e = valuation_u64(p, j);
        let unit = out_ring.from_u64(j / p.pow(e));
        let term = power
            .div_p_pow(e)?
            .project(target)?
            .scale(unit.invert()?);
        sum = if j % 2 == 1 { sum.add(&term) } else { sum.sub(&term) };
        if j < budget.terms as u64 {
            power = power.mul(&x);
        }
    }
    LieElement::new(sum)
}

/// `exp(X) = sum_{j>=0} X^j / j!` modulo `p^K`, for `X ≡ 0 (mod p)`.
pub fn trunc_exp(x: &LieElement, target: u32) -> Result<ModMatrix> {
    let out_ring = check_precision(x.ring(), target)?;
    let m = x.dim();
    let level = x.matrix().min_valuation();
    if level == 0 {
        return Err(Error::NotNilpotentEnough);
    }
    let level = level.min(target);
    let mut sum = ModMatrix::identity(m, out_ring);
    if level >= target {
        return Ok(sum);
    }
    let p = out_ring.p();
    let budget = PrecisionBudget::for_exp(p, level, target);
    let xw = x.matrix().lift(budget.working())?;
    let mut power = ModMatrix::identity(m, xw.ring());
    let mut p_part = 0u32;
    let mut unit_part = out_ring.one();
    for j in 1..=budget.terms as u64 {
        power = power.mul(&xw);
        let e = valuation_u64(p, j);
        p_part += e;
        unit_part = unit_part * out_ring.from_u64(j / p.pow(e));
        let term = power
            .div_p_pow(p_part)?
            .project(target)?
            .scale(unit_part.invert()?);
        sum = sum.add(&term);
    }
    Ok(sum)
}

/// Outcome of [`verify_diagram`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiagramReport {
    pub trials: usize,
    /// `{α, β} ≢ I + p^(i+j) [A, B]` modulo `p^(i+j+k)`.
    pub congruence_failures: usize,
    /// `{αα', ββ'} ≢ {α, β}` for perturbations in `Γ_(i+k)`, `Γ_(j+k)`.
    pub perturbation_failures: usize,
    /// `log {α, β} ≢ p^(i+j) [A, B]` or `log α ≢ p^i A`.
    pub log_failures: usize,
}

impl DiagramReport {
    pub fn passed(&self) -> bool {
        self.congruence_failures == 0 && self.perturbation_failures == 0 && self.log_failures == 0
    }

    pub fn merge(&mut self, other: &DiagramReport) {
        self.trials += other.trials;
        self.congruence_failures += other.congruence_failures;
        self.perturbation_failures += other.perturbation_failures;
        self.log_failures += other.log_failures;
    }
}

/// Uniform trace-zero matrix with entries modulo `ring`.
pub fn random_lie<R: Rng + ?Sized>(m: usize, ring: ResidueRing, rng: &mut R) -> LieElement {
    let e: Vec<i64> = (0..m * m)
        .map(|_| rng.gen_range(0..ring.modulus()) as i64)
        .collect();
    LieElement::from_i64_normalized(m, ring, &e).expect("entry count is m^2")
}

/// Numerically checks that the group commutator on
/// `Γ_i/Γ_(i+k) x Γ_j/Γ_(j+k)` matches the Lie bracket on
/// `p^i L/p^(i+k) L x p^j L/p^(j+k) L` through the log/exp bijections.
pub fn verify_diagram<R: Rng + ?Sized>(
    p: u64,
    m: usize,
    i: u32,
    j: u32,
    k: u32,
    trials: usize,
    rng: &mut R,
) -> Result<DiagramReport> {
    if i == 0 || j == 0 || k == 0 || k > i.min(j) {
        return Err(Error::InvalidGroupSpec(format!(
            "need i, j >= 1 and 1 <= k <= min(i, j); got i = {i}, j = {j}, k = {k}"
        )));
    }
    let top = i + j + k;
    let ring = ResidueRing::new(p, top)?;
    let small = ResidueRing::new(p, k)?;
    let id = ModMatrix::identity(m, ring);
    let mut report = DiagramReport::default();
    for _ in 0..trials {
        let a = random_lie(m, small, rng).lift(top)?;
        let b = random_lie(m, small, rng).lift(top)?;
        let alpha = trunc_exp(&a.scale(ring.p_pow(i)), top)?;
        let beta = trunc_exp(&b.scale(ring.p_pow(j)), top)?;
        let comm = alpha.commutator(&beta)?;
        let bracket = mat_bracket(a.matrix(), b.matrix()).scale(ring.p_pow(i + j));
        let expected = id.add(&bracket);
        report.trials += 1;
        if comm != expected {
            report.congruence_failures += 1;
        }

        let da = random_lie(m, ring, rng).scale(ring.p_pow(i + k));
        let db = random_lie(m, ring, rng).scale(ring.p_pow(j + k));
        let alpha2 = alpha.mul(&trunc_exp(&da, top)?);
        let beta2 = beta.mul(&trunc_exp(&db, top)?);
        if alpha2.commutator(&beta2)? != comm {
            report.perturbation_failures += 1;
        }

        let log_comm = trunc_log(&comm, top)?;
        let log_alpha = trunc_log(&alpha, i + k)?;
        let a_shift = a.project(i + k)?.scale(ring.with_exp(i + k)?.p_pow(i));
        if log_comm.matrix() != &bracket || log_alpha != a_shift {
            report.log_failures += 1;
        }
    }
    Ok(report)
}
