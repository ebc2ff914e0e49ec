//! Binary persistence for base tables.
//!
//! A file is a sequence of sections. Each section starts with the magic
//! `SWBT1`, then `p: u64`, `m: u32`, `level: u32`, `count: u64`, followed by
//! `count` records of the form `len: u32` and `len` bytes holding `m * m`
//! little-endian `u64` entries mod `p^level` and the word's `i32` letters.
//! A single section is an exhaustive table; further sections at level
//! `ℓ + 1` hold the class words of `Γ_ℓ/Γ_(ℓ+1)` as elements `I + p^ℓ A`.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{datum_codec, level_datum, lift_class, BaseMethod, BaseTable, Layer, SynthConfig};
use crate::error::{Error, Result};
use crate::matrix::ModMatrix;
use crate::residue::ResidueRing;
use crate::search::KeyCodec;
use crate::word::{GeneratingSet, Word};

const MAGIC: &[u8; 5] = b"SWBT1";

/// Cache file for `gens` under `cfg` inside `dir`.
pub fn cache_path(dir: &Path, gens: &GeneratingSet, cfg: &SynthConfig) -> Result<PathBuf> {
    let spec = gens.spec();
    let level = (cfg.base_cutoff + 1).min(spec.n());
    let hash = gens.content_hash(level)?;
    Ok(dir.join(format!(
        "swbt-p{}-m{}-n0{}-s{}-{}.bin",
        spec.p(),
        spec.m(),
        cfg.base_cutoff,
        cfg.search_states,
        &hash[..16]
    )))
}

fn write_section<W: Write>(
    out: &mut W,
    p: u64,
    m: usize,
    level: u32,
    mut records: Vec<(ModMatrix, &Word)>,
) -> Result<()> {
    records.sort_by(|a, b| a.0.entries().cmp(b.0.entries()));
    out.write_all(MAGIC)?;
    out.write_all(&p.to_le_bytes())?;
    out.write_all(&(m as u32).to_le_bytes())?;
    out.write_all(&level.to_le_bytes())?;
    out.write_all(&(records.len() as u64).to_le_bytes())?;
    for (g, w) in records {
        let len = 8 * m * m + 4 * w.len();
        out.write_all(&(len as u32).to_le_bytes())?;
        for &x in g.entries() {
            out.write_all(&x.to_le_bytes())?;
        }
        for &l in w.letters() {
            out.write_all(&l.to_le_bytes())?;
        }
    }
    Ok(())
}

impl BaseTable {
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        {
            let mut out = BufWriter::new(fs::File::create(&tmp)?);
            let codec = self.root_codec();
            let root = self.root.iter().map(|(k, w)| (codec.decode(*k), w)).collect();
            write_section(&mut out, self.p, self.m, self.root_level, root)?;
            let datum = datum_codec(self.p, self.m);
            for layer in &self.layers {
                let records = layer
                    .found
                    .iter()
                    .map(|(k, w)| {
                        let a = crate::lie::LieElement::new(datum.decode(*k))?;
                        Ok((lift_class(&a, layer.level, layer.level + 1)?, w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                write_section(&mut out, self.p, self.m, layer.level + 1, records)?;
            }
            out.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Reads a table and re-verifies every stored word against `gens`.
    pub fn load(path: &Path, gens: &GeneratingSet) -> Result<BaseTable> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let spec = gens.spec();
        let (p, m) = (spec.p(), spec.m());
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        let mut sections = Vec::new();
        while cur.pos < bytes.len() {
            sections.push(read_section(&mut cur, gens)?);
        }
        let Some((root_level, root_records)) = sections.first() else {
            return Err(Error::Cache("empty cache file".into()));
        };
        let root_level = *root_level;
        let root_codec = KeyCodec::new(m, ResidueRing::new(p, root_level)?)?;
        let root: HashMap<u128, Word> = root_records
            .iter()
            .map(|(g, w)| (root_codec.encode(g), w.clone()))
            .collect();
        if sections.len() == 1 {
            return Ok(BaseTable {
                method: BaseMethod::FullBfs,
                p,
                m,
                root_level,
                cutoff: root_level - 1,
                root,
                layers: Vec::new(),
            });
        }
        if root_level != 1 {
            return Err(Error::Cache("layered table must start at level 1".into()));
        }
        let datum = datum_codec(p, m);
        let mut layers = Vec::new();
        for (i, (level, records)) in sections.iter().enumerate().skip(1) {
            if *level != i as u32 + 1 {
                return Err(Error::Cache(format!("unexpected section level {level}")));
            }
            let found = records
                .iter()
                .map(|(g, w)| Ok((datum.encode(level_datum(g, level - 1)?.matrix()), w.clone())))
                .collect::<Result<HashMap<_, _>>>()?;
            layers.push(Layer::from_found(level - 1, p, m, &datum, found));
        }
        Ok(BaseTable {
            method: BaseMethod::Bidirectional,
            p,
            m,
            root_level,
            cutoff: layers.len() as u32,
            root,
            layers,
        })
    }
}

/// Loads the cached table for `gens` from `dir`, or builds and stores it.
pub fn load_or_build(gens: &GeneratingSet, cfg: &SynthConfig, dir: &Path) -> Result<BaseTable> {
    let path = cache_path(dir, gens, cfg)?;
    if path.exists() {
        if let Ok(table) = BaseTable::load(&path, gens) {
            return Ok(table);
        }
    }
    let table = super::build_base_table(gens, cfg)?;
    table.save(&path)?;
    Ok(table)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Cache("truncated cache file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

type Section = (u32, Vec<(ModMatrix, Word)>);

fn read_section(cur: &mut Cursor<'_>, gens: &GeneratingSet) -> Result<Section> {
    let spec = gens.spec();
    if cur.take(5)? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let p = cur.u64()?;
    let m = cur.u32()? as usize;
    let level = cur.u32()?;
    let count = cur.u64()?;
    if p != spec.p() || m != spec.m() || level == 0 || level > spec.n() {
        return Err(Error::Cache(format!(
            "section for p = {p}, m = {m}, level {level} does not fit this generating set"
        )));
    }
    let ring = ResidueRing::new(p, level)?;
    let projected = gens.project(level)?;
    let mut records = Vec::new();
    for _ in 0..count {
        let len = cur.u32()? as usize;
        let head = 8 * m * m;
        if len < head || !(len - head).is_multiple_of(4) {
            return Err(Error::Cache(format!("bad record length {len}")));
        }
        let entries = (0..m * m)
            .map(|_| {
                let x = cur.u64()?;
                if x >= ring.modulus() {
                    return Err(Error::Cache(format!("entry {x} out of range")));
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        let letters = (0..(len - head) / 4)
            .map(|_| Ok(cur.u32()? as i32))
            .collect::<Result<Vec<_>>>()?;
        let g = ModMatrix::from_raw(m, ring, entries);
        let w = Word::new(letters).map_err(|_| Error::Cache("letter 0 in cached word".into()))?;
        if projected.evaluate(&w).ok().as_ref() != Some(&g) {
            return Err(Error::Cache(format!("cached word {w} does not evaluate to {g}")));
        }
        records.push((g, w));
    }
    Ok((level, records))
}
