//! TOML problem files.
//!
//! ```toml
//! p = 3
//! m = 2
//! n = 6
//! generators = [
//!   [[1, 1], [0, 1]],
//!   [[1, 0], [1, 1]],
//! ]
//! target = [[2, 1], [1, 1]]   # optional
//! ```
//!
//! Entries are arbitrary integers and are reduced modulo `p^n`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::residue::{GroupSpec, ResidueRing};
use crate::word::GeneratingSet;

type RawMatrix = Vec<Vec<i64>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    p: i64,
    m: i64,
    n: i64,
    generators: Vec<RawMatrix>,
    target: Option<RawMatrix>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub gens: GeneratingSet,
    pub target: Option<ModMatrix>,
}

impl Problem {
    pub fn spec(&self) -> &GroupSpec {
        self.gens.spec()
    }

    pub fn from_path(path: &Path) -> Result<Problem> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }
}

fn to_u(x: i64, what: &str) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::Parse(format!("{what} must be nonnegative, got {x}")))
}

fn matrix(ring: ResidueRing, m: usize, rows: &RawMatrix, what: &str) -> Result<ModMatrix> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(Error::Parse(format!("{what} must be {m}x{m}, got row lengths {shape:?}")));
    }
    let g = ModMatrix::from_rows(ring, rows)?;
    if g.det() != ring.one() {
        return Err(Error::InvalidGroupSpec(format!(
            "{what} has determinant {} != 1 mod {}",
            g.det(),
            ring.modulus()
        )));
    }
    Ok(g)
}

/// Parses a single matrix written as a TOML array, e.g. `[[1, 2], [0, 1]]`.
pub fn parse_matrix(spec: &GroupSpec, text: &str) -> Result<ModMatrix> {
    #[derive(Deserialize)]
    struct Wrap {
        t: RawMatrix,
    }
    let w: Wrap = toml::from_str(&format!("t = {text}")).map_err(|e| Error::Parse(e.to_string()))?;
    matrix(spec.ring(), spec.m(), &w.t, "target")
}

impl std::str::FromStr for Problem {
    type Err = Error;

    fn from_str(text: &str) -> Result<Problem> {
        let raw: RawProblem = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = u32::try_from(to_u(raw.n, "n")?).map_err(|_| Error::Parse("n is too large".into()))?;
        let spec = GroupSpec::new(to_u(raw.p, "p")?, to_u(raw.m, "m")? as usize, n)?;
        let gens = raw
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| matrix(spec.ring(), spec.m(), g, &format!("generator {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        let gens = GeneratingSet::new(spec, gens)?;
        let target = raw
            .target
            .as_ref()
            .map(|t| matrix(spec.ring(), spec.m(), t, "target"))
            .transpose()?;
        Ok(Problem { gens, target })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "p = 3\nm = 2\nn = 2\ngenerators = [[[1, 1], [0, 1]], [[1, 0], [-8, 1]]]\ntarget = [[2, 1], [1, 1]]\n";

    #[test]
    fn parses_and_reduces() {
        let pr: Problem = GOOD.parse().unwrap();
        assert_eq!(pr.spec().n(), 2);
        assert_eq!(pr.gens.generators()[1].raw(1, 0), 1);
        assert_eq!(pr.target.unwrap().raw(0, 0), 2);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let bad_shape = GOOD.replace("[[2, 1], [1, 1]]", "[[2, 1, 0], [1, 1]]");
        assert!(matches!(bad_shape.parse::<Problem>(), Err(Error::Parse(_))));
        let even = GOOD.replace("p = 3", "p = 2");
        assert!(matches!(even.parse::<Problem>(), Err(Error::InvalidGroupSpec(_))));
        let small = "p = 3\nm = 5\nn = 1\ngenerators = []\n";
        assert!(matches!(small.parse::<Problem>(), Err(Error::InvalidGroupSpec(_))));
        let det = GOOD.replace("[[2, 1], [1, 1]]", "[[2, 0], [0, 1]]");
        assert!(matches!(det.parse::<Problem>(), Err(Error::InvalidGroupSpec(_))));
        assert!(matches!("p = 3\n".parse::<Problem>(), Err(Error::Parse(_))));
        let extra = format!("{GOOD}q = 1\n");
        assert!(extra.parse::<Problem>().is_err());
    }

    #[test]
    fn inline_matrix() {
        let spec = GroupSpec::new(5, 2, 3).unwrap();
        let g = parse_matrix(&spec, "[[1, 5], [0, 1]]").unwrap();
        assert_eq!(g.raw(0, 1), 5);
        assert!(parse_matrix(&spec, "[[1, 5]]").is_err());
        assert!(parse_matrix(&spec, "nonsense").is_err());
    }
}
