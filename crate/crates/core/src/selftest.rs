//! Invariant suites behind `shortword selftest`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lab::{random_element, random_synthesizer};
use crate::lie::{bracket, solve_bracket_sl2, solve_two_brackets, LieElement};
use crate::logexp::{random_lie, trunc_exp, trunc_log, verify_diagram};
use crate::matrix::ModMatrix;
use crate::residue::{GroupSpec, ResidueRing};
use crate::synth::SynthConfig;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} ({} cases, {} failures, {:.2}s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(name: String, f: impl FnOnce() -> Result<(usize, usize)>) -> Result<CheckResult> {
    let start = Instant::now();
    let (cases, failures) = f()?;
    Ok(CheckResult {
        name,
        cases,
        failures,
        elapsed: start.elapsed(),
    })
}

/// Every trace-zero `m x m` matrix mod `p^k`, in lexicographic order.
pub fn all_trace_zero(m: usize, p: u64, k: u32) -> Result<Vec<LieElement>> {
    let ring = ResidueRing::new(p, k)?;
    let free = m * m - 1;
    let q = ring.modulus();
    let total = (q as u128).pow(free as u32) as usize;
    (0..total)
        .map(|mut code| {
            let mut e = vec![0i64; m * m];
            for slot in e.iter_mut().take(free) {
                *slot = (code as u64 % q) as i64;
                code /= q as usize;
            }
            LieElement::from_i64_normalized(m, ring, &e)
        })
        .collect()
}

pub fn single_bracket_exhaustive(p: u64, k: u32) -> Result<CheckResult> {
    timed(format!("single bracket, all of sl2(Z/{p}^{k})"), || {
        let all = all_trace_zero(2, p, k)?;
        let mut bad = 0;
        for a in &all {
            let pair = solve_bracket_sl2(a)?;
            bad += usize::from(pair.evaluate() != *a);
        }
        Ok((all.len(), bad))
    })
}

pub fn two_brackets_exhaustive(m: usize, p: u64, k: u32) -> Result<CheckResult> {
    timed(format!("two brackets, all of sl{m}(Z/{p}^{k})"), || {
        let all = all_trace_zero(m, p, k)?;
        let mut bad = 0;
        for a in &all {
            bad += usize::from(solve_two_brackets(a)?.evaluate() != *a);
        }
        Ok((all.len(), bad))
    })
}

pub fn two_brackets_random(m: usize, p: u64, k: u32, count: usize, seed: u64) -> Result<CheckResult> {
    timed(format!("two brackets, {count} random in sl{m}(Z/{p}^{k})"), || {
        let ring = ResidueRing::new(p, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..count {
            let a = random_lie(m, ring, &mut rng);
            bad += usize::from(solve_two_brackets(&a)?.evaluate() != a);
        }
        Ok((count, bad))
    })
}

fn trace_product(a: &LieElement, b: &LieElement) -> crate::residue::Residue {
    a.matrix().mul(b.matrix()).trace()
}

/// `[[C, D], C] = 2 Tr(CD) C - 2 Tr(C^2) D` and
/// `[[[A, B], A], [A, B]] = -2 Tr([A, B]^2) A` on random elements of `sl_2`.
pub fn bracket_identities(p: u64, k: u32, count: usize, seed: u64) -> Result<CheckResult> {
    timed(format!("sl2 bracket identities mod {p}^{k}"), || {
        let ring = ResidueRing::new(p, k)?;
        let two = ring.elem(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..count {
            let c = random_lie(2, ring, &mut rng);
            let d = random_lie(2, ring, &mut rng);
            let lhs = bracket(&bracket(&c, &d), &c);
            let rhs = c
                .scale(two * trace_product(&c, &d))
                .sub(&d.scale(two * trace_product(&c, &c)));
            bad += usize::from(lhs != rhs);
            let ab = bracket(&c, &d);
            let lhs = bracket(&bracket(&ab, &c), &ab);
            let rhs = c.scale(-(two * trace_product(&ab, &ab)));
            bad += usize::from(lhs != rhs);
        }
        Ok((2 * count, bad))
    })
}

pub fn diagram(p: u64, m: usize, max_ij: u32, trials: usize, seed: u64) -> Result<CheckResult> {
    timed(format!("commutator/bracket diagram p={p} m={m}, i,j<={max_ij}"), || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut cases, mut bad) = (0, 0);
        for i in 1..=max_ij {
            for j in 1..=max_ij {
                for k in 1..=i.min(j) {
                    let r = verify_diagram(p, m, i, j, k, trials, &mut rng)?;
                    cases += r.trials;
                    bad += r.congruence_failures + r.perturbation_failures + r.log_failures;
                }
            }
        }
        Ok((cases, bad))
    })
}

fn random_gamma1<R: Rng>(m: usize, ring: ResidueRing, rng: &mut R) -> ModMatrix {
    loop {
        let x: Vec<u64> = (0..m * m).map(|_| rng.gen_range(0..ring.modulus() / ring.p()) * ring.p()).collect();
        let mut g = ModMatrix::identity(m, ring).add(&ModMatrix::from_raw(m, ring, x));
        let Ok(dinv) = g.det().invert() else { continue };
        for j in 0..m {
            g.set(0, j, g.get(0, j) * dinv);
        }
        return g;
    }
}

pub fn log_exp_round_trips(p: u64, m: usize, target: u32, count: usize, seed: u64) -> Result<CheckResult> {
    timed(format!("log/exp round trips p={p} m={m} K={target}"), || {
        let ring = ResidueRing::new(p, target)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = 0;
        for _ in 0..count {
            let g = random_gamma1(m, ring, &mut rng);
            bad += usize::from(trunc_exp(&trunc_log(&g, target)?, target)? != g);
            let x = random_lie(m, ring, &mut rng).scale(ring.p_pow(1));
            bad += usize::from(trunc_log(&trunc_exp(&x, target)?, target)? != x);
        }
        Ok((2 * count, bad))
    })
}

pub fn synthesis(p: u64, m: usize, n: u32, targets: usize, seed: u64) -> Result<CheckResult> {
    timed(format!("synthesis p={p} m={m} n={n}"), || {
        let spec = GroupSpec::new(p, m, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let syn = random_synthesizer(&spec, 2, &SynthConfig::default(), &mut rng)?;
        let mut bad = 0;
        for _ in 0..targets {
            let t = random_element(&spec, &mut rng);
            let w = syn.synthesize(&t)?.word;
            bad += usize::from(syn.gens().evaluate(&w)? != t);
        }
        Ok((targets, bad))
    })
}

/// The quick suite runs in a few seconds; the full suite matches the
/// acceptance-scale parameters.
pub fn run(full: bool) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        single_bracket_exhaustive(3, 1)?,
        single_bracket_exhaustive(3, 2)?,
        two_brackets_exhaustive(3, 3, 1)?,
    ];
    if full {
        for (m, p) in [(3, 5), (4, 5), (5, 5)] {
            out.push(two_brackets_random(m, p, 3, 10_000, 1)?);
        }
        for p in [3, 5] {
            for k in 1..=6 {
                out.push(bracket_identities(p, k, 10_000, 2)?);
            }
            out.push(diagram(p, 2, 4, 500, 3)?);
            out.push(log_exp_round_trips(p, 2, 12, 1_000, 4)?);
        }
        out.push(synthesis(3, 2, 12, 50, 5)?);
        out.push(synthesis(5, 2, 6, 50, 6)?);
    } else {
        out.push(two_brackets_random(4, 5, 2, 500, 1)?);
        out.push(bracket_identities(3, 4, 500, 2)?);
        out.push(diagram(3, 2, 2, 50, 3)?);
        out.push(log_exp_round_trips(3, 2, 8, 100, 4)?);
        out.push(synthesis(3, 2, 6, 20, 5)?);
    }
    Ok(out)
}
