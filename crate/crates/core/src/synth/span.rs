//! Incremental row echelon form over `F_p` with coefficient tracking.

use crate::residue::ResidueRing;

#[derive(Clone, Debug)]
struct Row {
    pivot: usize,
    vec: Vec<u64>,
    /// Coefficients of this row in terms of the inserted vectors.
    combo: Vec<u64>,
}

#[derive(Clone, Debug)]
pub(crate) struct LinearSpan {
    field: ResidueRing,
    dim: usize,
    rows: Vec<Row>,
}

impl LinearSpan {
    pub(crate) fn new(p: u64, dim: usize) -> Self {
        LinearSpan {
            field: ResidueRing::new(p, 1).expect("p fits"),
            dim,
            rows: Vec::new(),
        }
    }

    pub(crate) fn p(&self) -> u64 {
        self.field.p()
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the current rows; returns the remainder and the
    /// combination of basis vectors that was subtracted.
    fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let f = &self.field;
        let mut v: Vec<u64> = v.iter().map(|&x| x % f.p()).collect();
        let mut used = vec![0u64; self.rows.len()];
        for row in &self.rows {
            let c = v[row.pivot];
            if c == 0 {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(&row.vec) {
                *x = f.sub_raw(*x, f.mul_raw(c, r));
            }
            for (u, &r) in used.iter_mut().zip(&row.combo) {
                *u = f.add_raw(*u, f.mul_raw(c, r));
            }
        }
        (v, used)
    }

    /// Adds `v` if it is independent of the span; returns whether it was.
    pub(crate) fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let f = self.field;
        let (mut rem, used) = self.reduce(v);
        let Some(pivot) = rem.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inverse_raw(rem[pivot]).expect("nonzero mod p");
        for x in rem.iter_mut() {
            *x = f.mul_raw(*x, inv);
        }
        // rem = v - Σ used_i b_i, so the new row is inv * (e_new - used).
        let k = self.rows.len();
        let mut combo: Vec<u64> = used.iter().map(|&u| f.mul_raw(f.neg_raw(u), inv)).collect();
        combo.push(inv);
        for row in &mut self.rows {
            row.combo.push(0);
        }
        // Keep earlier rows reduced at the new pivot so `reduce` stays a
        // single pass.
        for i in 0..k {
            let row = &mut self.rows[i];
            let c = row.vec[pivot];
            if c == 0 {
                continue;
            }
            for (x, &r) in row.vec.iter_mut().zip(&rem) {
                *x = f.sub_raw(*x, f.mul_raw(c, r));
            }
            for (x, &r) in row.combo.iter_mut().zip(&combo) {
                *x = f.sub_raw(*x, f.mul_raw(c, r));
            }
        }
        self.rows.push(Row {
            pivot,
            vec: rem,
            combo,
        });
        true
    }

    /// Coefficients `c` with `Σ c_i b_i = t` over the inserted vectors `b_i`,
    /// or `None` if `t` is outside the span.
    pub(crate) fn express(&self, t: &[u64]) -> Option<Vec<u64>> {
        let (rem, used) = self.reduce(t);
        rem.iter().all(|&x| x == 0).then_some(used)
    }
}
