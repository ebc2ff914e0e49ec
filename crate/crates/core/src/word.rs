//! Words over `S ∪ S^-1` and their exact evaluation in `G_n`.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::residue::GroupSpec;

/// A word in the generators: letter `i > 0` is `s_i`, letter `-i` is `s_i^-1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn new(letters: Vec<i32>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::BadIndex { letter: 0, count: 0 });
        }
        Ok(Word(letters))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: i32) -> Self {
        assert_ne!(l, 0, "letters are nonzero");
        Word(vec![l])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: i32) {
        assert_ne!(letter, 0, "letters are nonzero");
        self.0.push(letter);
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        Word(out)
    }

    /// `w1^-1 w2^-1 w1 w2`, unreduced: its length is exactly `2(|w1| + |w2|)`.
    pub fn commutator(w1: &Word, w2: &Word) -> Word {
        let mut out = Vec::with_capacity(2 * (w1.len() + w2.len()));
        out.extend(w1.0.iter().rev().map(|&l| -l));
        out.extend(w2.0.iter().rev().map(|&l| -l));
        out.extend_from_slice(&w1.0);
        out.extend_from_slice(&w2.0);
        Word(out)
    }

    /// Cancels adjacent `x x^-1` pairs until none remain.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<i32> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if stack.last() == Some(&-l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let letters = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i32>()
                    .map_err(|e| Error::Parse(format!("bad letter {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters).map_err(|_| Error::Parse("letter 0 is not allowed".into()))
    }
}

/// An ordered generating set for `G_n` with cached inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingSet {
    spec: GroupSpec,
    gens: Vec<ModMatrix>,
    inverses: Vec<ModMatrix>,
}

impl GeneratingSet {
    /// Every generator must be an `m x m` matrix over `Z/p^n Z` with determinant 1.
    pub fn new(spec: GroupSpec, gens: Vec<ModMatrix>) -> Result<Self> {
        let ring = spec.ring();
        let mut inverses = Vec::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            if g.dim() != spec.m() {
                return Err(Error::DimensionMismatch {
                    expected: spec.m(),
                    got: g.dim(),
                });
            }
            if g.ring() != ring {
                return Err(Error::InvalidGroupSpec(format!(
                    "generator {} is not reduced modulo {}",
                    i + 1,
                    ring.modulus()
                )));
            }
            if g.det() != ring.one() {
                return Err(Error::InvalidGroupSpec(format!(
                    "generator {} has determinant {} != 1",
                    i + 1,
                    g.det()
                )));
            }
            inverses.push(g.inv()?);
        }
        Ok(GeneratingSet {
            spec,
            gens,
            inverses,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[ModMatrix] {
        &self.gens
    }

    /// Letters in search order: `1, -1, 2, -2, ...`.
    pub fn alphabet(&self) -> Vec<i32> {
        (1..=self.gens.len() as i32).flat_map(|i| [i, -i]).collect()
    }

    pub fn element(&self, letter: i32) -> Result<&ModMatrix> {
        let idx = letter.unsigned_abs() as usize;
        if letter == 0 || idx > self.gens.len() {
            return Err(Error::BadIndex {
                letter,
                count: self.gens.len(),
            });
        }
        Ok(if letter > 0 {
            &self.gens[idx - 1]
        } else {
            &self.inverses[idx - 1]
        })
    }

    /// The same generators reduced to level `k`.
    pub fn project(&self, k: u32) -> Result<GeneratingSet> {
        let spec = self.spec.at_level(k)?;
        let gens = self
            .gens
            .iter()
            .map(|g| g.project(k))
            .collect::<Result<Vec<_>>>()?;
        let inverses = self
            .inverses
            .iter()
            .map(|g| g.project(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(GeneratingSet {
            spec,
            gens,
            inverses,
        })
    }

    /// Left-to-right product of the word's letters at level `n`; the empty
    /// word evaluates to the identity.
    pub fn evaluate(&self, w: &Word) -> Result<ModMatrix> {
        let mut acc = ModMatrix::identity(self.spec.m(), self.spec.ring());
        for &l in w.letters() {
            acc = acc.mul(self.element(l)?);
        }
        Ok(acc)
    }

    /// Evaluation reduced to level `k <= n`.
    pub fn evaluate_at(&self, w: &Word, k: u32) -> Result<ModMatrix> {
        if k == self.spec.n() {
            return self.evaluate(w);
        }
        self.project(k)?.evaluate(w)
    }

    /// Content hash of the generators reduced to level `k`.
    pub fn content_hash(&self, k: u32) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.spec.p().to_le_bytes());
        h.update((self.spec.m() as u64).to_le_bytes());
        h.update(k.to_le_bytes());
        for g in &self.gens {
            for &x in g.project(k)?.entries() {
                h.update(x.to_le_bytes());
            }
        }
        Ok(hex::encode(h.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn standard_pair(n: u32) -> GeneratingSet {
        let spec = GroupSpec::new(3, 2, n).unwrap();
        let r = spec.ring();
        let a = ModMatrix::from_rows(r, &[vec![1, 1], vec![0, 1]]).unwrap();
        let b = ModMatrix::from_rows(r, &[vec![1, 0], vec![1, 1]]).unwrap();
        GeneratingSet::new(spec, vec![a, b]).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let s = standard_pair(1);
        assert!(s.evaluate(&Word::empty()).unwrap().is_identity());
        assert!(s.evaluate(&Word::new(vec![1, -1]).unwrap()).unwrap().is_identity());
        let want = ModMatrix::from_rows(s.spec().ring(), &[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(s.evaluate(&Word::new(vec![1, 2]).unwrap()).unwrap(), want);
        assert_eq!(
            s.evaluate(&Word::new(vec![3]).unwrap()),
            Err(Error::BadIndex { letter: 3, count: 2 })
        );
    }

    #[test]
    fn word_examples() {
        let w = Word::new(vec![1, 2]).unwrap();
        assert_eq!(w.inverse(), Word::new(vec![-2, -1]).unwrap());
        assert_eq!(Word::new(vec![1, -1, 2]).unwrap().free_reduce(), Word::letter(2));
        assert_eq!(Word::commutator(&Word::empty(), &w).free_reduce(), Word::empty());
        assert_eq!(Word::commutator(&w, &Word::letter(1)).len(), 6);
        assert!(Word::new(vec![0]).is_err());
    }

    #[test]
    fn serialization() {
        let w: Word = "1,-2,1,1".parse().unwrap();
        assert_eq!(w.letters(), &[1, -2, 1, 1]);
        assert_eq!(w.to_string(), "1,-2,1,1");
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
        assert!("1,,2".parse::<Word>().is_err());
        assert!("1,0".parse::<Word>().is_err());
    }

    #[test]
    fn rejects_bad_generators() {
        let spec = GroupSpec::new(3, 2, 2).unwrap();
        let r = spec.ring();
        let bad = ModMatrix::from_rows(r, &[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(GeneratingSet::new(spec, vec![bad]).is_err());
    }

    fn arb_word(max_gen: i32, max_len: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec((1..=max_gen, any::<bool>()), 0..max_len)
            .prop_map(|v| Word(v.into_iter().map(|(g, s)| if s { g } else { -g }).collect()))
    }

    proptest! {
        #[test]
        fn evaluation_is_a_homomorphism(w1 in arb_word(2, 40), w2 in arb_word(2, 40)) {
            let s = standard_pair(4);
            let e1 = s.evaluate(&w1).unwrap();
            let e2 = s.evaluate(&w2).unwrap();
            prop_assert_eq!(s.evaluate(&w1.concat(&w2)).unwrap(), e1.mul(&e2));
            prop_assert_eq!(s.evaluate(&w1.inverse()).unwrap(), e1.inv().unwrap());
            let red = w1.free_reduce();
            prop_assert!(red.len() <= w1.len());
            prop_assert_eq!(s.evaluate(&red).unwrap(), e1.clone());
            let c = Word::commutator(&w1, &w2);
            prop_assert_eq!(c.len(), 2 * (w1.len() + w2.len()));
            prop_assert_eq!(s.evaluate(&c).unwrap(), e1.commutator(&e2).unwrap());
            for k in 1..=4 {
                prop_assert_eq!(s.evaluate_at(&w1, k).unwrap(), e1.project(k).unwrap());
            }
        }

        #[test]
        fn display_parse_round_trip(w in arb_word(5, 30)) {
            prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        }
    }
}
