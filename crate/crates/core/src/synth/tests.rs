use super::*;
use crate::lab::{random_element, random_generating_set};
use crate::logexp::trunc_log;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn standard_pair(p: u64, n: u32) -> GeneratingSet {
    let spec = GroupSpec::new(p, 2, n).unwrap();
    let r = spec.ring();
    let a = ModMatrix::from_rows(r, &[vec![1, 1], vec![0, 1]]).unwrap();
    let b = ModMatrix::from_rows(r, &[vec![1, 0], vec![1, 1]]).unwrap();
    GeneratingSet::new(spec, vec![a, b]).unwrap()
}

fn layered_cfg() -> SynthConfig {
    SynthConfig {
        base_cutoff: 1,
        memory_budget: 100,
        search_states: 2_000,
    }
}

#[test]
fn full_table_covers_g2() {
    let gens = standard_pair(3, 4);
    let table = build_base_table(&gens, &SynthConfig::default()).unwrap();
    assert_eq!(table.method(), BaseMethod::FullBfs);
    assert_eq!(table.root_level(), 2);
    assert_eq!(table.root_len(), 648);
    let id = ModMatrix::identity(2, ResidueRing::new(3, 2).unwrap());
    assert_eq!(table.root_word(&id), Some(&Word::empty()));
    let g2 = gens.project(2).unwrap();
    let codec = table.root_codec();
    for (k, w) in &table.root {
        assert_eq!(g2.evaluate(w).unwrap(), codec.decode(*k));
    }
}

#[test]
fn non_generating_sets_are_rejected() {
    for cfg in [SynthConfig::default(), layered_cfg()] {
        let spec = GroupSpec::new(3, 2, 4).unwrap();
        let id = ModMatrix::identity(2, spec.ring());
        let s = GeneratingSet::new(spec, vec![id]).unwrap();
        assert!(matches!(build_base_table(&s, &cfg), Err(Error::NotGenerating(_))));
        let u = ModMatrix::from_rows(spec.ring(), &[vec![1, 1], vec![0, 1]]).unwrap();
        let s = GeneratingSet::new(spec, vec![u]).unwrap();
        assert!(matches!(build_base_table(&s, &cfg), Err(Error::NotGenerating(_))));
    }
}

#[test]
fn identity_and_generators() {
    let gens = standard_pair(3, 6);
    let syn = Synthesizer::new(gens.clone(), &SynthConfig::default()).unwrap();
    let id = ModMatrix::identity(2, gens.spec().ring());
    assert_eq!(syn.synthesize(&id).unwrap().word, Word::empty());
    for (i, g) in gens.generators().iter().enumerate() {
        let out = syn.synthesize(g).unwrap();
        assert_eq!(gens.evaluate(&out.word).unwrap(), *g);
        assert_eq!(out.word, Word::letter(i as i32 + 1));
    }
    let r = verify(&gens, &id, &Word::empty()).unwrap();
    assert!(r.ok && r.raw_len == 0);
    let r = verify(&gens, &gens.generators()[0], &Word::letter(2)).unwrap();
    assert!(!r.ok);
}

#[test]
fn every_second_level_class_is_one_commutator() {
    let gens = standard_pair(3, 3);
    let syn = Synthesizer::new(gens.clone(), &SynthConfig::default()).unwrap();
    let f3 = ResidueRing::new(3, 1).unwrap();
    let mut seen = 0;
    for code in 0..27i64 {
        let entries = [code % 3, code / 3 % 3, code / 9 % 3, 0];
        let a = LieElement::from_i64_normalized(2, f3, &entries).unwrap();
        let delta = lift_class(&a, 2, 3).unwrap();
        let w = syn.realize_level(&delta, 2).unwrap();
        assert_eq!(gens.evaluate_at(&w, 3).unwrap(), delta);
        if !a.is_zero() {
            let pair = solve_bracket_sl2(&a).unwrap();
            let l1 = syn.base_word(1, &pair.first).unwrap().unwrap();
            let l2 = syn.base_word(1, &pair.second).unwrap().unwrap();
            assert_eq!(w, Word::commutator(&l1, &l2));
        }
        seen += 1;
    }
    assert_eq!(seen, 27);
}

fn predicted_len(syn: &Synthesizer, level: u32, a: &LieElement) -> usize {
    if a.is_zero() {
        return 0;
    }
    if let Some(w) = syn.base_word(level, a).unwrap() {
        return w.len();
    }
    let pairs = if a.dim() == 2 {
        vec![solve_bracket_sl2(a).unwrap()]
    } else {
        let q = solve_two_brackets(a).unwrap();
        vec![q.diagonal, q.off_diagonal]
    };
    pairs
        .iter()
        .map(|pr| 2 * (predicted_len(syn, level.div_ceil(2), &pr.first) + predicted_len(syn, level / 2, &pr.second)))
        .sum()
}

#[test]
fn length_recurrence_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (p, n) in [(3, 12), (5, 7)] {
        let gens = standard_pair(p, n);
        let syn = Synthesizer::new(gens, &SynthConfig::default()).unwrap();
        let f = ResidueRing::new(p, 1).unwrap();
        for level in 1..n {
            for _ in 0..10 {
                let a = crate::logexp::random_lie(2, f, &mut rng);
                let delta = lift_class(&a, level, level + 1).unwrap();
                let w = syn.realize_level(&delta, level).unwrap();
                assert_eq!(w.len(), predicted_len(&syn, level, &a), "p={p} level={level}");
            }
        }
    }
}

#[test]
fn random_targets_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = GroupSpec::new(3, 2, 8).unwrap();
    let cfg = SynthConfig::default();
    let gens = random_generating_set(&spec, 2, &cfg, &mut rng).unwrap();
    let syn = Synthesizer::new(gens.clone(), &cfg).unwrap();
    for _ in 0..1000 {
        let t = random_element(&spec, &mut rng);
        let out = syn.synthesize(&t).unwrap();
        assert_eq!(gens.evaluate(&out.word).unwrap(), t);
        assert!(out.word.len() <= out.raw_len);
        let levels: Vec<u32> = out.passes.iter().map(|x| x.0).collect();
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn synthesis_is_deterministic() {
    let spec = GroupSpec::new(5, 2, 5).unwrap();
    let cfg = SynthConfig::default();
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let gens = random_generating_set(&spec, 2, &cfg, &mut rng).unwrap();
        let syn = Synthesizer::new(gens, &cfg).unwrap();
        (0..20)
            .map(|_| syn.synthesize(&random_element(&spec, &mut rng)).unwrap().word)
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn layered_mode_matches_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gens = standard_pair(3, 6);
    let syn = Synthesizer::new(gens.clone(), &layered_cfg()).unwrap();
    assert_eq!(syn.table().method(), BaseMethod::Bidirectional);
    assert_eq!(syn.table().root_len(), 24);
    for _ in 0..200 {
        let t = random_element(gens.spec(), &mut rng);
        let out = syn.synthesize(&t).unwrap();
        assert_eq!(gens.evaluate(&out.word).unwrap(), t);
    }
}

#[test]
fn layered_mode_sl3() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = GroupSpec::new(5, 3, 3).unwrap();
    let cfg = SynthConfig {
        base_cutoff: 1,
        memory_budget: 500_000,
        search_states: 20_000,
    };
    let gens = random_generating_set(&spec, 2, &cfg, &mut rng).unwrap();
    let syn = Synthesizer::new(gens.clone(), &cfg).unwrap();
    assert_eq!(syn.table().method(), BaseMethod::Bidirectional);
    for _ in 0..20 {
        let t = random_element(&spec, &mut rng);
        let out = syn.synthesize(&t).unwrap();
        assert_eq!(gens.evaluate(&out.word).unwrap(), t);
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [SynthConfig::default(), layered_cfg()] {
        let gens = standard_pair(3, 5);
        let built = load_or_build(&gens, &cfg, dir.path()).unwrap();
        let path = cache_path(dir.path(), &gens, &cfg).unwrap();
        assert!(path.exists());
        let loaded = BaseTable::load(&path, &gens).unwrap();
        assert_eq!(loaded.method(), built.method());
        assert_eq!(loaded.root, built.root);
        assert_eq!(loaded.layer_sizes(), built.layer_sizes());
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..5], b"SWBT1");

        let a = Synthesizer::with_table(gens.clone(), built).unwrap();
        let b = Synthesizer::with_table(gens.clone(), loaded).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let t = random_element(gens.spec(), &mut rng);
            assert_eq!(a.synthesize(&t).unwrap(), b.synthesize(&t).unwrap());
        }
    }
}

#[test]
fn corrupted_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let gens = standard_pair(3, 3);
    let table = build_base_table(&gens, &SynthConfig::default()).unwrap();
    let path = dir.path().join("t.bin");
    table.save(&path).unwrap();
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 1;
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(BaseTable::load(&path, &gens), Err(Error::Cache(_))));
    std::fs::write(&path, b"SWBT0").unwrap();
    assert!(BaseTable::load(&path, &gens).is_err());
}

#[test]
fn datum_agrees_with_log() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (p, m) in [(3, 2), (5, 3)] {
        for _ in 0..100 {
            let level = 1 + rand::Rng::gen_range(&mut rng, 0..4u32);
            let f = ResidueRing::new(p, 1).unwrap();
            let a = crate::logexp::random_lie(m, f, &mut rng);
            let b = crate::logexp::random_lie(m, f, &mut rng);
            let delta = lift_class(&a, level, 6).unwrap().mul(&lift_class(&b, level + 1, 6).unwrap());
            let datum = level_datum(&delta, level).unwrap();
            let log = trunc_log(&delta, level + 1).unwrap();
            let via_log = log.matrix().div_p_pow(level).unwrap();
            assert_eq!(datum.matrix(), &via_log);
        }
    }
}

/// `(I + p^ℓ X)(I + p^ℓ Y) ≡ I + p^ℓ (X + Y)` and the depth-one commutator
/// congruence, exhaustively over `sl_2(F_3)` pairs.
#[test]
fn depth_one_congruences() {
    let f3 = ResidueRing::new(3, 1).unwrap();
    let all: Vec<LieElement> = (0..27i64)
        .map(|c| LieElement::from_i64_normalized(2, f3, &[c % 3, c / 3 % 3, c / 9 % 3, 0]).unwrap())
        .collect();
    for a in 1..=3u32 {
        for b in 1..=a {
            let k = a + b + 1;
            for x in &all {
                for y in &all {
                    let gx = lift_class(x, a, k).unwrap();
                    let gy = lift_class(y, b, k).unwrap();
                    let want = lift_class(&crate::lie::bracket(x, y), a + b, k).unwrap();
                    assert_eq!(gx.commutator(&gy).unwrap(), want);
                    if a == b {
                        let prod = gx.mul(&gy).project(a + 1).unwrap();
                        assert_eq!(prod, lift_class(&x.add(y), a, a + 1).unwrap());
                    }
                }
            }
        }
    }
}
