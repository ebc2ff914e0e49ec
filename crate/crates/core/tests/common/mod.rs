//! Independent oracles: plain integer matrices reduced mod q, written
//! without the library's arithmetic.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use shortword::{GeneratingSet, LieElement, ModMatrix, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    pub m: usize,
    pub q: i128,
    pub e: Vec<i128>,
}

impl Mat {
    pub fn new(m: usize, q: i128, e: Vec<i128>) -> Mat {
        Mat {
            m,
            q,
            e: e.into_iter().map(|x| x.rem_euclid(q)).collect(),
        }
    }

    pub fn identity(m: usize, q: i128) -> Mat {
        let mut e = vec![0; m * m];
        for i in 0..m {
            e[i * m + i] = 1;
        }
        Mat::new(m, q, e)
    }

    pub fn from_lib(a: &ModMatrix) -> Mat {
        Mat::new(
            a.dim(),
            a.ring().modulus() as i128,
            a.entries().iter().map(|&x| x as i128).collect(),
        )
    }

    pub fn from_lie(a: &LieElement) -> Mat {
        Mat::from_lib(a.matrix())
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let m = self.m;
        let mut e = vec![0i128; m * m];
        for i in 0..m {
            for j in 0..m {
                let mut s = 0i128;
                for k in 0..m {
                    s = (s + self.e[i * m + k] * o.e[k * m + j]) % self.q;
                }
                e[i * m + j] = s;
            }
        }
        Mat::new(m, self.q, e)
    }

    pub fn add(&self, o: &Mat) -> Mat {
        Mat::new(self.m, self.q, self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        Mat::new(self.m, self.q, self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: i128) -> Mat {
        Mat::new(self.m, self.q, self.e.iter().map(|a| a * (c.rem_euclid(self.q))).collect())
    }

    pub fn bracket(&self, o: &Mat) -> Mat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> i128 {
        (0..self.m).map(|i| self.e[i * self.m + i]).sum::<i128>().rem_euclid(self.q)
    }

    pub fn det2(&self) -> i128 {
        (self.e[0] * self.e[3] - self.e[1] * self.e[2]).rem_euclid(self.q)
    }

    pub fn reduce(&self, q: i128) -> Mat {
        Mat::new(self.m, q, self.e.clone())
    }
}

/// Left-to-right product of the word's letters.
pub fn evaluate(gens: &GeneratingSet, w: &Word) -> Mat {
    let spec = gens.spec();
    let q = spec.ring().modulus() as i128;
    let mats: Vec<Mat> = gens.generators().iter().map(Mat::from_lib).collect();
    let invs: Vec<Mat> = mats.iter().map(adjugate).collect();
    let mut acc = Mat::identity(spec.m(), q);
    for &l in w.letters() {
        let i = l.unsigned_abs() as usize - 1;
        acc = acc.mul(if l > 0 { &mats[i] } else { &invs[i] });
    }
    acc
}

/// Adjugate by cofactors (`m <= 3`), which is the inverse when `det = 1`.
pub fn adjugate(g: &Mat) -> Mat {
    let m = g.m;
    let at = |i: usize, j: usize| g.e[i * m + j];
    let e = match m {
        2 => vec![at(1, 1), -at(0, 1), -at(1, 0), at(0, 0)],
        3 => {
            let mut e = vec![0i128; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    e[i * 3 + j] = at(r0, c0) * at(r1, c1) - at(r0, c1) * at(r1, c0);
                }
            }
            e
        }
        _ => panic!("adjugate oracle covers m <= 3"),
    };
    Mat::new(m, g.q, e)
}

/// `(I + N)^-1 = Σ (-N)^t` for `N = g - I` nilpotent modulo `q`.
pub fn unipotent_inverse(g: &Mat) -> Mat {
    let id = Mat::identity(g.m, g.q);
    let minus_n = id.sub(g);
    let mut term = id.clone();
    let mut sum = id.clone();
    loop {
        term = term.mul(&minus_n);
        if term.e.iter().all(|&x| x == 0) {
            return sum;
        }
        sum = sum.add(&term);
    }
}

/// All of `SL_2(Z/q)` by enumeration.
pub fn all_sl2(q: i128) -> Vec<Mat> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if (a * d - b * c).rem_euclid(q) == 1 {
                        out.push(Mat::new(2, q, vec![a, b, c, d]));
                    }
                }
            }
        }
    }
    out
}

/// BFS distances from the identity in the Cayley graph of `SL_2(Z/q)` with
/// respect to `gens` and their inverses; `None` for unreachable elements.
pub struct Sl2Distances {
    index: HashMap<Mat, usize>,
    dist: Vec<Option<u32>>,
}

impl Sl2Distances {
    pub fn new(gens: &[Mat]) -> Sl2Distances {
        let q = gens[0].q;
        let all = all_sl2(q);
        let index: HashMap<Mat, usize> = all.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let mut moves: Vec<Mat> = gens.to_vec();
        moves.extend(gens.iter().map(adjugate));
        let mut dist = vec![None; all.len()];
        let start = index[&Mat::identity(2, q)];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let d = dist[i].unwrap();
            for s in &moves {
                let j = index[&all[i].mul(s)];
                if dist[j].is_none() {
                    dist[j] = Some(d + 1);
                    queue.push_back(j);
                }
            }
        }
        Sl2Distances { index, dist }
    }

    pub fn distance(&self, g: &Mat) -> Option<u32> {
        self.dist[self.index[g]]
    }

    pub fn diameter(&self) -> Option<u32> {
        self.dist.iter().try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }
}
