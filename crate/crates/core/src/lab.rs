//! Exact Cayley-graph diameters, sampled worst cases and word-length
//! benchmarks.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::residue::GroupSpec;
use crate::search::CayleyBall;
use crate::synth::{build_base_table, SynthConfig, Synthesizer};
use crate::word::GeneratingSet;

/// Uniform element of `G_n`: uniform entries, rejected unless the
/// determinant is a unit, then the first row is divided by the determinant.
pub fn random_element<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> ModMatrix {
    let (m, ring) = (spec.m(), spec.ring());
    loop {
        let entries = (0..m * m).map(|_| rng.gen_range(0..ring.modulus())).collect();
        let mut g = ModMatrix::from_raw(m, ring, entries);
        let Ok(dinv) = g.det().invert() else { continue };
        for j in 0..m {
            g.set(0, j, g.get(0, j) * dinv);
        }
        return g;
    }
}

fn random_set<R: Rng + ?Sized>(spec: &GroupSpec, size: usize, rng: &mut R) -> GeneratingSet {
    let gens = (0..size).map(|_| random_element(spec, rng)).collect();
    GeneratingSet::new(*spec, gens).expect("sampled elements have det 1")
}

/// Random `size`-element sets until the base table builds, which certifies
/// that the set generates `G_n`.
pub fn random_synthesizer<R: Rng + ?Sized>(
    spec: &GroupSpec,
    size: usize,
    cfg: &SynthConfig,
    rng: &mut R,
) -> Result<Synthesizer> {
    if size == 0 {
        return Err(Error::NotGenerating("empty generating set".into()));
    }
    loop {
        let gens = random_set(spec, size, rng);
        match build_base_table(&gens, cfg) {
            Ok(table) => return Synthesizer::with_table(gens, table),
            Err(Error::NotGenerating(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

pub fn random_generating_set<R: Rng + ?Sized>(
    spec: &GroupSpec,
    size: usize,
    cfg: &SynthConfig,
    rng: &mut R,
) -> Result<GeneratingSet> {
    Ok(random_synthesizer(spec, size, cfg, rng)?.gens().clone())
}

/// Full BFS ball of `G_n`; fails if `|G_n| > budget` or `gens` does not
/// generate.
pub fn full_ball(gens: &GeneratingSet, budget: usize) -> Result<CayleyBall> {
    let spec = gens.spec();
    let order = spec.group_order_u64().filter(|&o| o as u128 <= budget as u128);
    let Some(order) = order else {
        return Err(Error::TooLarge {
            order: spec.group_order().to_string(),
            budget,
        });
    };
    let mut ball = CayleyBall::new(gens)?;
    ball.fill(usize::MAX);
    if (ball.len() as u64) < order {
        return Err(Error::NotGenerating(format!(
            "generated subgroup has {} of {order} elements",
            ball.len()
        )));
    }
    Ok(ball)
}

/// `diam(G_n, S)`: the eccentricity of the identity, which equals the
/// diameter because Cayley graphs are vertex-transitive.
pub fn exact_diameter(gens: &GeneratingSet, budget: usize) -> Result<u32> {
    Ok(full_ball(gens, budget)?.radius())
}

/// Largest diameter found over seeded random generating sets.
#[derive(Clone, Debug)]
pub struct WorstCase {
    pub diameter: u32,
    pub set: GeneratingSet,
    /// Diameter of every sampled set, in sampling order.
    pub diameters: Vec<u32>,
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sampled worst case of `diam(G_n, S)` over `num_sets` random sets of
/// `set_size` elements. Set `i` depends only on `(seed, i)`, so results for
/// a larger `num_sets` extend those for a smaller one.
pub fn worst_case_sample(
    spec: &GroupSpec,
    num_sets: usize,
    set_size: usize,
    seed: u64,
    budget: usize,
) -> Result<Option<WorstCase>> {
    if set_size == 0 {
        return Err(Error::NotGenerating("empty generating set".into()));
    }
    let mut best: Option<WorstCase> = None;
    let mut diameters = Vec::with_capacity(num_sets);
    for i in 0..num_sets {
        let mut rng = sample_rng(seed, i as u64);
        let (set, d) = loop {
            let set = random_set(spec, set_size, &mut rng);
            match exact_diameter(&set, budget) {
                Ok(d) => break (set, d),
                Err(Error::NotGenerating(_)) => continue,
                Err(e) => return Err(e),
            }
        };
        diameters.push(d);
        if best.as_ref().is_none_or(|b| d > b.diameter) {
            best = Some(WorstCase {
                diameter: d,
                set,
                diameters: Vec::new(),
            });
        }
    }
    Ok(best.map(|b| WorstCase { diameters, ..b }))
}

/// One benchmark cell: a generating set and its synthesized word lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub p: u64,
    pub m: usize,
    pub n: u32,
    pub seed: u64,
    pub set_size: usize,
    pub max_len: usize,
    pub mean_len: f64,
    pub diameter: Option<u32>,
    /// `log2 |G_n|`.
    pub group_order_log: f64,
    /// Fitted exponent of `max_len ~ n^d` over the whole run.
    pub slope_ref: Option<f64>,
}

/// Parameters of [`bench_lengths`].
#[derive(Clone, Debug)]
pub struct BenchParams {
    pub p: u64,
    pub m: usize,
    pub n_lo: u32,
    pub n_hi: u32,
    pub trials: usize,
    pub targets: usize,
    pub set_size: usize,
    pub seed: u64,
    pub cfg: SynthConfig,
    /// Groups up to this order also get an exact BFS for diameters and
    /// distance checks.
    pub bfs_budget: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            p: 3,
            m: 2,
            n_lo: 2,
            n_hi: 8,
            trials: 4,
            targets: 20,
            set_size: 2,
            seed: 0,
            cfg: SynthConfig::default(),
            bfs_budget: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub slope: Option<f64>,
    /// Words checked against exact BFS distances.
    pub distance_checks: usize,
}

fn cell_seed(seed: u64, n: u32, trial: usize) -> u64 {
    seed ^ ((n as u64) << 40) ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn bench_cell(params: &BenchParams, n: u32, trial: usize) -> Result<(BenchRow, usize)> {
    let spec = GroupSpec::new(params.p, params.m, n)?;
    let seed = cell_seed(params.seed, n, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let syn = random_synthesizer(&spec, params.set_size, &params.cfg, &mut rng)?;
    let gens = syn.gens();
    let ball = match full_ball(gens, params.bfs_budget) {
        Ok(b) => Some(b),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut lens = Vec::with_capacity(params.targets);
    for _ in 0..params.targets {
        let target = random_element(&spec, &mut rng);
        let out = syn.synthesize(&target)?;
        let check = crate::synth::verify(gens, &target, &out.word)?;
        if !check.ok {
            return Err(Error::VerificationFailed(format!(
                "p = {}, m = {}, n = {n}, seed = {seed}: word {} does not evaluate to {target}",
                params.p, params.m, out.word
            )));
        }
        if let Some(ball) = &ball {
            let dist = ball.depth(ball.find(&target).expect("ball covers G_n"));
            if (out.word.len() as u32) < dist {
                return Err(Error::VerificationFailed(format!(
                    "word of length {} for {target} beats BFS distance {dist}",
                    out.word.len()
                )));
            }
        }
        lens.push(out.word.len());
    }
    let max_len = lens.iter().copied().max().unwrap_or(0);
    let mean_len = if lens.is_empty() {
        0.0
    } else {
        lens.iter().sum::<usize>() as f64 / lens.len() as f64
    };
    let row = BenchRow {
        p: params.p,
        m: params.m,
        n,
        seed,
        set_size: params.set_size,
        max_len,
        mean_len,
        diameter: ball.as_ref().map(CayleyBall::radius),
        group_order_log: spec.log2_order(),
        slope_ref: None,
    };
    Ok((row, if ball.is_some() { lens.len() } else { 0 }))
}

/// Synthesizes and verifies words for random targets over random generating
/// sets for every `n` in range, then fits the growth exponent.
pub fn bench_lengths(params: &BenchParams) -> Result<BenchReport> {
    let cells: Vec<(u32, usize)> = (params.n_lo..=params.n_hi)
        .flat_map(|n| (0..params.trials).map(move |t| (n, t)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(n, t)| bench_cell(params, n, t))
        .collect::<Result<Vec<_>>>()?;
    let distance_checks = results.iter().map(|r| r.1).sum();
    let mut rows: Vec<BenchRow> = results.into_iter().map(|r| r.0).collect();
    let slope = fit_slope(&max_len_by_n(&rows), params.n_lo.max(4), params.n_hi);
    for row in &mut rows {
        row.slope_ref = slope;
    }
    Ok(BenchReport {
        rows,
        slope,
        distance_checks,
    })
}

/// `(n, max over rows of max_len)`, sorted by `n`.
pub fn max_len_by_n(rows: &[BenchRow]) -> Vec<(u32, usize)> {
    let mut out: Vec<(u32, usize)> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|e| e.0 == row.n) {
            Some(e) => e.1 = e.1.max(row.max_len),
            None => out.push((row.n, row.max_len)),
        }
    }
    out.sort();
    out
}

/// Least-squares slope of `ln(len)` against `ln(n)` for `lo <= n <= hi`.
pub fn fit_slope(points: &[(u32, usize)], lo: u32, hi: u32) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, len)| (lo..=hi).contains(n) && *len > 0)
        .map(|&(n, len)| ((n as f64).ln(), (len as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `maxlen(2n) / maxlen(n)` for every `n` with both values present.
pub fn doubling_ratios(points: &[(u32, usize)]) -> Vec<(u32, f64)> {
    points
        .iter()
        .filter_map(|&(n, len)| {
            let (_, len2) = points.iter().find(|e| e.0 == 2 * n)?;
            (len > 0).then(|| (n, *len2 as f64 / len as f64))
        })
        .collect()
}

pub fn emit_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "p",
        "m",
        "n",
        "seed",
        "set_size",
        "max_len",
        "mean_len",
        "diameter",
        "group_order_log",
        "slope_ref",
    ])
    .map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
