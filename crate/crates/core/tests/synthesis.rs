mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{evaluate, Mat};
use shortword::lab::{random_element, random_synthesizer};
use shortword::{GroupSpec, SynthConfig};

fn check(p: u64, m: usize, n: u32, size: usize, seed: u64, targets: usize) -> Result<(), TestCaseError> {
    let spec = GroupSpec::new(p, m, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let syn = random_synthesizer(&spec, size, &SynthConfig::default(), &mut rng).unwrap();
    for _ in 0..targets {
        let t = random_element(&spec, &mut rng);
        let out = syn.synthesize(&t).unwrap();
        prop_assert_eq!(evaluate(syn.gens(), &out.word), Mat::from_lib(&t));
        prop_assert!(out.word.len() <= out.raw_len);
        prop_assert!(out.passes.len() < n as usize);
        prop_assert!(out.passes.windows(2).all(|w| w[0].0 < w[1].0));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sl2_words_verify(p in prop::sample::select(vec![3u64, 5, 7]), n in 2u32..9, size in 2usize..4, seed in any::<u64>()) {
        check(p, 2, n, size, seed, 10)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn sl3_words_verify(n in 2u32..5, seed in any::<u64>()) {
        check(5, 3, n, 2, seed, 5)?;
    }
}
