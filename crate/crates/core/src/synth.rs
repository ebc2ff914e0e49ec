//! Word synthesis by commutator lifting along the congruence filtration.
//!
//! A target `g ∈ G_n` is first matched modulo a low level by an exact table
//! lookup. The remaining residual lies in some `Γ_ℓ`; its class in
//! `Γ_ℓ/Γ_(ℓ+1)` is a trace-zero matrix `A` modulo `p`, which is written as a
//! bracket (`m = 2`) or a sum of two brackets (`m > 2`). Each bracket
//! `[A1, A2]` is realized as the commutator of words for `I + p^⌈ℓ/2⌉ A1` and
//! `I + p^⌊ℓ/2⌋ A2`, found recursively, because
//! `{I + p^a X, I + p^b Y} ≡ I + p^(a+b) [X, Y] (mod p^(a+b+1))`.
//! Dividing the residual by the realized word raises its level by at least
//! one, so at most `n - 1` passes are needed.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::lie::{solve_bracket_sl2, solve_two_brackets, LieElement};
use crate::matrix::ModMatrix;
use crate::residue::{GroupSpec, ResidueRing};
use crate::search::{CayleyBall, KeyCodec};
use crate::word::{GeneratingSet, Word};

mod cache;
mod span;

pub use cache::{cache_path, load_or_build};
use span::LinearSpan;

/// Tuning knobs for table construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    /// `N0`: levels `ℓ <= N0` are served from the base table.
    pub base_cutoff: u32,
    /// Largest group for which the base level is searched exhaustively.
    pub memory_budget: usize,
    /// Target ball size for the per-coset search.
    pub search_states: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            base_cutoff: 1,
            memory_budget: 10_000_000,
            search_states: 200_000,
        }
    }
}

/// How the base table was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMethod {
    /// Exhaustive BFS of `G_(N0+1)`; every stored word is a geodesic.
    FullBfs,
    /// BFS of `G_1` plus meet-in-the-middle search for each `Γ_ℓ/Γ_(ℓ+1)`.
    Bidirectional,
}

/// Words for the classes of one quotient `Γ_ℓ/Γ_(ℓ+1)`, keyed by the class
/// datum `(δ - I)/p^ℓ mod p`.
#[derive(Clone, Debug)]
pub(crate) struct Layer {
    pub(crate) level: u32,
    pub(crate) found: HashMap<u128, Word>,
    span: LinearSpan,
    span_words: Vec<Word>,
}

impl Layer {
    fn from_found(level: u32, p: u64, m: usize, codec: &KeyCodec, found: HashMap<u128, Word>) -> Self {
        let mut ordered: Vec<(&u128, &Word)> = found.iter().collect();
        ordered.sort_by(|a, b| (a.1.len(), a.0).cmp(&(b.1.len(), b.0)));
        let mut span = LinearSpan::new(p, m * m);
        let mut span_words = Vec::new();
        for (key, w) in ordered {
            if span.rank() == m * m - 1 {
                break;
            }
            if span.insert(codec.decode(*key).entries()) {
                span_words.push(w.clone());
            }
        }
        Layer {
            level,
            found,
            span,
            span_words,
        }
    }

    fn complete(&self, m: usize) -> bool {
        self.span.rank() == m * m - 1
    }

    /// A word for the class, either stored or assembled from the span basis
    /// (the quotient is abelian, so concatenation adds classes).
    fn lookup(&self, key: u128, codec: &KeyCodec) -> Option<Word> {
        if let Some(w) = self.found.get(&key) {
            return Some(w.clone());
        }
        let coeffs = self.span.express(codec.decode(key).entries())?;
        let p = self.span.p();
        let mut out = Word::empty();
        for (c, w) in coeffs.iter().zip(&self.span_words) {
            let (reps, piece) = if *c <= p / 2 {
                (*c, w.clone())
            } else {
                (p - c, w.inverse())
            };
            for _ in 0..reps {
                out.extend(&piece);
            }
        }
        Some(out)
    }
}

/// Exact words for everything below the recursion cutoff.
#[derive(Clone, Debug)]
pub struct BaseTable {
    pub(crate) method: BaseMethod,
    pub(crate) p: u64,
    pub(crate) m: usize,
    /// Level of the exhaustive table (`N0 + 1` for full BFS, `1` otherwise).
    pub(crate) root_level: u32,
    /// Effective `N0`.
    pub(crate) cutoff: u32,
    pub(crate) root: HashMap<u128, Word>,
    /// `layers[ℓ - 1]` for `1 <= ℓ <= cutoff` (bidirectional only).
    pub(crate) layers: Vec<Layer>,
}

impl BaseTable {
    pub fn method(&self) -> BaseMethod {
        self.method
    }

    pub fn root_level(&self) -> u32 {
        self.root_level
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Number of elements with an exhaustive word.
    pub fn root_len(&self) -> usize {
        self.root.len()
    }

    /// Number of stored quotient-class words per layer.
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.found.len()).collect()
    }

    fn root_codec(&self) -> KeyCodec {
        KeyCodec::new(self.m, ResidueRing::new(self.p, self.root_level).unwrap()).unwrap()
    }

    /// The stored word for an element of `G_root_level`.
    pub fn root_word(&self, g: &ModMatrix) -> Option<&Word> {
        self.root.get(&self.root_codec().encode(g))
    }

    /// Longest stored root word (the eccentricity of the identity when the
    /// table came from full BFS).
    pub fn root_radius(&self) -> usize {
        self.root.values().map(Word::len).max().unwrap_or(0)
    }
}

fn datum_codec(p: u64, m: usize) -> KeyCodec {
    KeyCodec::new(m, ResidueRing::new(p, 1).expect("p fits")).expect("m*m entries mod p fit in 128 bits")
}

/// `(δ - I)/p^ℓ mod p` for `δ ∈ Γ_ℓ`, given at any precision `>= ℓ + 1`.
pub fn level_datum(delta: &ModMatrix, level: u32) -> Result<LieElement> {
    let m = delta.dim();
    let top = delta.project(level + 1)?;
    let x = top.sub(&ModMatrix::identity(m, top.ring()));
    let a = x.div_p_pow(level).map_err(|_| Error::NotCongruent)?;
    LieElement::new(a)
}

/// `I + p^ℓ A` at exponent `k`, with the first row rescaled so that
/// `det = 1` exactly; the class modulo `p^(ℓ+1)` is unchanged.
fn lift_class(a: &LieElement, level: u32, k: u32) -> Result<ModMatrix> {
    let ring = ResidueRing::new(a.ring().p(), k)?;
    let m = a.dim();
    let mut g = ModMatrix::identity(m, ring).add(&a.matrix().lift(k)?.scale(ring.p_pow(level)));
    let dinv = g.det().invert()?;
    for j in 0..m {
        g.set(0, j, g.get(0, j) * dinv);
    }
    Ok(g)
}

/// Builds the base table for `gens`.
///
/// Full BFS when `|G_(N0+1)|` fits in the memory budget; otherwise BFS of
/// `G_1` followed by a per-level coset search. Failure to cover the required
/// classes means `gens` does not generate `G_n`.
pub fn build_base_table(gens: &GeneratingSet, cfg: &SynthConfig) -> Result<BaseTable> {
    let spec = *gens.spec();
    let (p, m, n) = (spec.p(), spec.m(), spec.n());
    if cfg.base_cutoff < 1 {
        return Err(Error::InvalidGroupSpec("base cutoff N0 must be at least 1".into()));
    }
    let full_level = (cfg.base_cutoff + 1).min(n);
    let full_order = spec.at_level(full_level)?.group_order_u64();
    let fits = full_order.is_some_and(|o| o as u128 <= cfg.memory_budget as u128);
    let full_codec_ok = KeyCodec::new(m, ResidueRing::new(p, full_level)?).is_ok();
    if fits && full_codec_ok {
        let root = exhaustive_words(gens, full_level, cfg.memory_budget)?;
        return Ok(BaseTable {
            method: BaseMethod::FullBfs,
            p,
            m,
            root_level: full_level,
            cutoff: full_level - 1,
            root,
            layers: Vec::new(),
        });
    }

    let root = exhaustive_words(gens, 1, cfg.memory_budget)?;
    let cutoff = cfg.base_cutoff.min(n - 1);
    let mut layers = Vec::new();
    for level in 1..=cutoff {
        let layer = coset_layer(gens, level, cfg, (level == 1).then_some(&root))?;
        if level == 1 && !layer.complete(m) {
            return Err(Error::NotGenerating(format!(
                "words found for Γ_1/Γ_2 span only a rank-{} subspace of sl_{m}(F_{p})",
                layer.span.rank()
            )));
        }
        layers.push(layer);
    }
    Ok(BaseTable {
        method: BaseMethod::Bidirectional,
        p,
        m,
        root_level: 1,
        cutoff,
        root,
        layers,
    })
}

fn exhaustive_words(gens: &GeneratingSet, level: u32, budget: usize) -> Result<HashMap<u128, Word>> {
    let spec = gens.spec().at_level(level)?;
    let order = spec.group_order_u64().unwrap_or(u64::MAX);
    if order as u128 > budget as u128 {
        return Err(Error::TooLarge {
            order: spec.group_order().to_string(),
            budget,
        });
    }
    let projected = gens.project(level)?;
    let mut ball = CayleyBall::new(&projected)?;
    ball.fill(usize::MAX);
    if (ball.len() as u64) < order {
        return Err(Error::NotGenerating(format!(
            "generated subgroup of G_{level} has {} of {order} elements",
            ball.len()
        )));
    }
    Ok((0..ball.len() as u32).map(|i| (ball.key(i), ball.word(i))).collect())
}

const PAIR_ANCHORS: usize = 4;

type Best = HashMap<u128, (u32, Word)>;

fn offer(best: &mut Best, key: u128, word: Word) {
    let len = word.len() as u32;
    match best.get(&key) {
        Some((cur, w)) if (*cur, w) <= (len, &word) => {}
        _ => {
            best.insert(key, (len, word));
        }
    }
}

/// Words for `Γ_ℓ/Γ_(ℓ+1)`.
///
/// A ball around the identity in `G_(ℓ+1)` is bucketed by image modulo
/// `p^ℓ`; two ball elements `a, b` in one bucket give `a b^-1 ∈ Γ_ℓ` with
/// word `w_a w_b^-1`. For `ℓ = 1` the Schreier generators
/// `t_x s t_(xs)^-1` of `H ∩ Γ_1`, taken over the BFS tree `t` of `G_1`, are
/// added as well; they generate `H ∩ Γ_1`, so their classes span the whole
/// quotient whenever `S` generates `G_2`.
fn coset_layer(
    gens: &GeneratingSet,
    level: u32,
    cfg: &SynthConfig,
    root: Option<&HashMap<u128, Word>>,
) -> Result<Layer> {
    let spec = *gens.spec();
    let (p, m) = (spec.p(), spec.m());
    let codec = datum_codec(p, m);
    let upper = gens.project(level + 1)?;
    let mut best = Best::new();

    if let Some(root) = root {
        let low = KeyCodec::new(m, ResidueRing::new(p, 1)?)?;
        let mut lifted: HashMap<u128, ModMatrix> = HashMap::with_capacity(root.len());
        for (k, w) in root {
            lifted.insert(*k, upper.evaluate(w)?);
        }
        let mut keys: Vec<&u128> = root.keys().collect();
        keys.sort();
        for k in keys {
            let tx = &lifted[k];
            for l in upper.alphabet() {
                let y = tx.mul(upper.element(l)?);
                let ky = low.encode(&y.project(1)?);
                let ty = lifted.get(&ky).ok_or_else(|| {
                    Error::NotGenerating("BFS tree of G_1 is not closed under S".into())
                })?;
                let delta = y.mul(&ty.inv()?);
                let key = codec.encode(level_datum(&delta, level)?.matrix());
                let mut w = root[k].clone();
                w.push(l);
                offer(&mut best, key, w.concat(&root[&ky].inverse()));
            }
        }
    }

    let mut ball = CayleyBall::new(&upper)?;
    ball.fill(cfg.search_states.min(cfg.memory_budget));
    let low = KeyCodec::new(m, ResidueRing::new(p, level)?)?;
    let mut bucket_of: HashMap<u128, usize> = HashMap::new();
    let mut buckets: Vec<Vec<u32>> = Vec::new();
    let elems: Vec<ModMatrix> = (0..ball.len() as u32).map(|i| ball.element(i)).collect();
    for (i, g) in elems.iter().enumerate() {
        let key = low.encode(&g.project(level)?);
        let b = *bucket_of.entry(key).or_insert_with(|| {
            buckets.push(Vec::new());
            buckets.len() - 1
        });
        buckets[b].push(i as u32);
    }
    // class -> (length, left, right): word(left) * word(right)^-1
    let mut pairs: HashMap<u128, (u32, u32, u32)> = HashMap::new();
    for bucket in &buckets {
        for &a in bucket.iter().take(PAIR_ANCHORS) {
            let a_inv = elems[a as usize].inv()?;
            for &b in bucket {
                if a == b {
                    continue;
                }
                let b_inv = elems[b as usize].inv()?;
                let len = ball.depth(a) + ball.depth(b);
                for (x, y, y_inv) in [(a, b, &b_inv), (b, a, &a_inv)] {
                    let delta = elems[x as usize].mul(y_inv);
                    let key = codec.encode(level_datum(&delta, level)?.matrix());
                    let cand = (len, x, y);
                    pairs
                        .entry(key)
                        .and_modify(|cur| {
                            if cand < *cur {
                                *cur = cand;
                            }
                        })
                        .or_insert(cand);
                }
            }
        }
    }
    for (key, (_, x, y)) in pairs {
        offer(&mut best, key, ball.word(x).concat(&ball.word(y).inverse()));
    }

    let mut found: HashMap<u128, Word> = best.into_iter().map(|(k, (_, w))| (k, w)).collect();
    found.insert(codec.encode(&ModMatrix::zero(m, codec.ring())), Word::empty());
    Ok(Layer::from_found(level, p, m, &codec, found))
}

/// A realized class: its word and the word's value in `G_n`.
struct Realized {
    word: Word,
    value: ModMatrix,
}

type Memo = HashMap<(u32, u128), Rc<Realized>>;

/// Output of [`Synthesizer::synthesize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synthesis {
    /// Freely reduced word.
    pub word: Word,
    /// Length before free reduction.
    pub raw_len: usize,
    /// `(ℓ, raw length)` for each lifting pass.
    pub passes: Vec<(u32, usize)>,
}

/// Synthesizes verified words for a fixed generating set.
pub struct Synthesizer {
    gens: GeneratingSet,
    table: BaseTable,
    datum: KeyCodec,
}

impl Synthesizer {
    pub fn new(gens: GeneratingSet, cfg: &SynthConfig) -> Result<Self> {
        let table = build_base_table(&gens, cfg)?;
        Synthesizer::with_table(gens, table)
    }

    /// Reuses a previously built (e.g. cached) table.
    pub fn with_table(gens: GeneratingSet, table: BaseTable) -> Result<Self> {
        let spec = gens.spec();
        if table.p != spec.p() || table.m != spec.m() || table.root_level > spec.n() {
            return Err(Error::Cache(format!(
                "table for p = {}, m = {}, level {} does not match G_{} over p = {}, m = {}",
                table.p,
                table.m,
                table.root_level,
                spec.n(),
                spec.p(),
                spec.m()
            )));
        }
        let datum = datum_codec(spec.p(), spec.m());
        Ok(Synthesizer { gens, table, datum })
    }

    pub fn gens(&self) -> &GeneratingSet {
        &self.gens
    }

    pub fn table(&self) -> &BaseTable {
        &self.table
    }

    fn spec(&self) -> &GroupSpec {
        self.gens.spec()
    }

    fn check_element(&self, g: &ModMatrix) -> Result<()> {
        let spec = self.spec();
        if g.dim() != spec.m() {
            return Err(Error::DimensionMismatch {
                expected: spec.m(),
                got: g.dim(),
            });
        }
        if g.ring() != spec.ring() {
            return Err(Error::InvalidGroupSpec(format!(
                "element must be reduced modulo {}",
                spec.ring().modulus()
            )));
        }
        if g.det() != spec.ring().one() {
            return Err(Error::InvalidGroupSpec(format!("determinant {} != 1", g.det())));
        }
        Ok(())
    }

    /// A word `w` with `evaluate(w) ≡ δ (mod p^(ℓ+1))` for `δ ∈ Γ_ℓ`.
    ///
    /// `delta` may be given at any precision `>= ℓ + 1`.
    pub fn realize_level(&self, delta: &ModMatrix, level: u32) -> Result<Word> {
        let n = self.spec().n();
        if level < 1 || level + 1 > n {
            return Err(Error::InvalidGroupSpec(format!("level {level} outside 1..={}", n - 1)));
        }
        let top = delta.project(level + 1)?;
        if top.det() != top.ring().one() {
            return Err(Error::InvalidGroupSpec("determinant is not 1".into()));
        }
        if top.congruence_level() < level {
            return Err(Error::NotCongruent);
        }
        let a = level_datum(&top, level)?;
        let mut memo = Memo::new();
        let node = self.realize(level, self.datum.encode(a.matrix()), &mut memo)?;
        let check = self.gens.evaluate_at(&node.word, level + 1)?;
        if check != top {
            return Err(Error::VerificationFailed(format!(
                "level {level}: word evaluates to {check}, expected {top}"
            )));
        }
        Ok(node.word.clone())
    }

    fn realize(&self, level: u32, key: u128, memo: &mut Memo) -> Result<Rc<Realized>> {
        if let Some(hit) = memo.get(&(level, key)) {
            return Ok(hit.clone());
        }
        let spec = *self.spec();
        let (m, n) = (spec.m(), spec.n());
        let a = LieElement::new(self.datum.decode(key))?;
        let node = if a.is_zero() {
            Realized {
                word: Word::empty(),
                value: ModMatrix::identity(m, spec.ring()),
            }
        } else if let Some(word) = self.base_word(level, &a)? {
            let value = self.gens.evaluate(&word)?;
            Realized { word, value }
        } else {
            let hi = level.div_ceil(2);
            let lo = level / 2;
            let pairs = if m == 2 {
                vec![solve_bracket_sl2(&a)?]
            } else {
                let quad = solve_two_brackets(&a)?;
                vec![quad.diagonal, quad.off_diagonal]
            };
            let mut word = Word::empty();
            let mut value = ModMatrix::identity(m, spec.ring());
            for pair in pairs {
                let left = self.realize(hi, self.datum.encode(pair.first.matrix()), memo)?;
                let right = self.realize(lo, self.datum.encode(pair.second.matrix()), memo)?;
                word.extend(&Word::commutator(&left.word, &right.word));
                value = value.mul(&left.value.commutator(&right.value)?);
            }
            Realized { word, value }
        };
        // Every node is checked against its class before it is used.
        let want = lift_class(&a, level, level + 1)?;
        if node.value.project(level + 1)? != want {
            return Err(Error::VerificationFailed(format!(
                "class at level {level} (datum {}) realized as {}",
                a.matrix(),
                node.value
            )));
        }
        debug_assert!(n > level);
        let node = Rc::new(node);
        memo.insert((level, key), node.clone());
        Ok(node)
    }

    /// Table word for a class at `level <= cutoff`, if the table serves it.
    fn base_word(&self, level: u32, a: &LieElement) -> Result<Option<Word>> {
        if level > self.table.cutoff {
            return Ok(None);
        }
        match self.table.method {
            BaseMethod::FullBfs => {
                let g = lift_class(a, level, self.table.root_level)?;
                let w = self.table.root_word(&g).ok_or_else(|| {
                    Error::NotGenerating(format!("no table word for {g}"))
                })?;
                Ok(Some(w.clone()))
            }
            BaseMethod::Bidirectional => {
                let layer = &self.table.layers[level as usize - 1];
                debug_assert_eq!(layer.level, level);
                Ok(layer.lookup(self.datum.encode(a.matrix()), &self.datum))
            }
        }
    }

    /// A verified word for `target ∈ G_n`.
    pub fn synthesize(&self, target: &ModMatrix) -> Result<Synthesis> {
        self.check_element(target)?;
        let n = self.spec().n();
        let base = target.project(self.table.root_level)?;
        let mut word = self
            .table
            .root_word(&base)
            .ok_or_else(|| Error::NotGenerating(format!("no table word for {base}")))?
            .clone();
        let mut residual = self.gens.evaluate(&word)?.inv()?.mul(target);
        let mut memo = Memo::new();
        let mut passes = Vec::new();
        let mut last = 0;
        loop {
            let level = residual.congruence_level();
            if level >= n {
                break;
            }
            if level <= last && !passes.is_empty() {
                return Err(Error::VerificationFailed(format!(
                    "residual level did not increase past {last}"
                )));
            }
            let a = level_datum(&residual, level)?;
            let node = self.realize(level, self.datum.encode(a.matrix()), &mut memo)?;
            word.extend(&node.word);
            residual = node.value.inv()?.mul(&residual);
            passes.push((level, node.word.len()));
            last = level;
        }
        let raw_len = word.len();
        let reduced = word.free_reduce();
        let value = self.gens.evaluate(&reduced)?;
        if &value != target {
            return Err(Error::VerificationFailed(format!(
                "synthesized word evaluates to {value}, expected {target}"
            )));
        }
        Ok(Synthesis {
            word: reduced,
            raw_len,
            passes,
        })
    }
}

/// Result of checking a word against a target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    pub raw_len: usize,
    pub reduced_len: usize,
}

/// Exact check that `word` evaluates to `target` in `G_n`.
pub fn verify(gens: &GeneratingSet, target: &ModMatrix, word: &Word) -> Result<Verification> {
    let value = gens.evaluate(word)?;
    Ok(Verification {
        ok: &value == target,
        raw_len: word.len(),
        reduced_len: word.free_reduce().len(),
    })
}

#[cfg(test)]
mod tests;
