//! Breadth-first growth of Cayley-graph balls with compact element keys.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::residue::ResidueRing;
use crate::word::{GeneratingSet, Word};

/// Packs matrices over a fixed ring into `u128` keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyCodec {
    m: usize,
    ring: ResidueRing,
    bits: u32,
}

impl KeyCodec {
    pub fn new(m: usize, ring: ResidueRing) -> Result<Self> {
        let bits = 64 - (ring.modulus().saturating_sub(1)).leading_zeros();
        let bits = bits.max(1);
        if bits as usize * m * m > 128 {
            return Err(Error::TooLarge {
                order: format!("{m}x{m} matrices mod {}", ring.modulus()),
                budget: 128,
            });
        }
        Ok(KeyCodec { m, ring, bits })
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    pub fn encode(&self, g: &ModMatrix) -> u128 {
        debug_assert_eq!(g.ring(), self.ring);
        g.entries()
            .iter()
            .fold(0u128, |acc, &x| (acc << self.bits) | x as u128)
    }

    pub fn decode(&self, mut key: u128) -> ModMatrix {
        let n = self.m * self.m;
        let mask = (1u128 << self.bits) - 1;
        let mut entries = vec![0u64; n];
        for slot in entries.iter_mut().rev() {
            *slot = (key & mask) as u64;
            key >>= self.bits;
        }
        ModMatrix::from_raw(self.m, self.ring, entries)
    }
}

/// A BFS ball around the identity in the Cayley graph of `gens` (right
/// multiplication by `S ∪ S^-1`), stored as a parent-pointer tree.
///
/// Letters are tried in the order `1, -1, 2, -2, ...` and layers are expanded
/// in discovery order, so every stored word is the lexicographically
/// smallest geodesic under that letter order.
pub struct CayleyBall {
    codec: KeyCodec,
    letters: Vec<(i32, ModMatrix)>,
    index: HashMap<u128, u32>,
    keys: Vec<u128>,
    parent: Vec<u32>,
    letter: Vec<i32>,
    layer_starts: Vec<usize>,
}

impl CayleyBall {
    pub fn new(gens: &GeneratingSet) -> Result<Self> {
        let spec = gens.spec();
        let codec = KeyCodec::new(spec.m(), spec.ring())?;
        let letters = gens
            .alphabet()
            .into_iter()
            .map(|l| Ok((l, gens.element(l)?.clone())))
            .collect::<Result<Vec<_>>>()?;
        let id = codec.encode(&ModMatrix::identity(spec.m(), spec.ring()));
        let mut index = HashMap::new();
        index.insert(id, 0);
        Ok(CayleyBall {
            codec,
            letters,
            index,
            keys: vec![id],
            parent: vec![u32::MAX],
            letter: vec![0],
            layer_starts: vec![0, 1],
        })
    }

    pub fn codec(&self) -> &KeyCodec {
        &self.codec
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Radius of the completed layers.
    pub fn radius(&self) -> u32 {
        (self.layer_starts.len() - 2) as u32
    }

    /// Adds the next sphere; returns `false` once nothing new was found.
    pub fn expand_layer(&mut self) -> bool {
        let start = self.layer_starts[self.layer_starts.len() - 2];
        let end = self.layer_starts[self.layer_starts.len() - 1];
        for idx in start..end {
            let g = self.codec.decode(self.keys[idx]);
            for (l, s) in &self.letters {
                let key = self.codec.encode(&g.mul(s));
                if let std::collections::hash_map::Entry::Vacant(e) = self.index.entry(key) {
                    e.insert(self.keys.len() as u32);
                    self.keys.push(key);
                    self.parent.push(idx as u32);
                    self.letter.push(*l);
                }
            }
        }
        let grew = self.keys.len() > end;
        if grew {
            self.layer_starts.push(self.keys.len());
        }
        grew
    }

    /// Expands until the graph is exhausted or `max_states` is reached at a
    /// layer boundary.
    pub fn fill(&mut self, max_states: usize) {
        while self.len() < max_states && self.expand_layer() {}
    }

    pub fn find(&self, g: &ModMatrix) -> Option<u32> {
        self.index.get(&self.codec.encode(g)).copied()
    }

    pub fn element(&self, idx: u32) -> ModMatrix {
        self.codec.decode(self.keys[idx as usize])
    }

    pub fn key(&self, idx: u32) -> u128 {
        self.keys[idx as usize]
    }

    pub fn depth(&self, idx: u32) -> u32 {
        let idx = idx as usize;
        (self.layer_starts.partition_point(|&s| s <= idx) - 1) as u32
    }

    pub fn word(&self, idx: u32) -> Word {
        let mut letters = Vec::new();
        let mut cur = idx as usize;
        while cur != 0 {
            letters.push(self.letter[cur]);
            cur = self.parent[cur] as usize;
        }
        letters.reverse();
        Word::new(letters).expect("tree letters are nonzero")
    }

    /// Distances of all stored elements, in storage order.
    pub fn depths(&self) -> impl Iterator<Item = u32> + '_ {
        self.layer_starts
            .windows(2)
            .enumerate()
            .flat_map(|(d, w)| std::iter::repeat_n(d as u32, w[1] - w[0]))
    }
}
