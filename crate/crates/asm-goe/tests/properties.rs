use asm_goe::combinatorics::{
    asm_to_gog, asm_to_pcsm, enumerate_asm, gog_to_asm, pcsm_to_asm, top_path, x_gog,
};
use asm_goe::goetw::{f1, QuadratureRule};
use asm_goe::kernel::{gap_probability, law_of_max_t, KernelTables, PrecisionPolicy};
use asm_goe::numeric::{rat, Rational};
use asm_goe::sampler::GlauberChain;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn asms(n: usize) -> &'static [asm_goe::combinatorics::AsmMatrix] {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<Vec<asm_goe::combinatorics::AsmMatrix>>> = OnceLock::new();
    &CACHE.get_or_init(|| (0..=5).map(|k| if k < 2 { vec![] } else { enumerate_asm(k, 6).unwrap() }).collect())[n]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bijections_round_trip(n in 2usize..=5, pick in any::<prop::sample::Index>()) {
        let a = pick.get(asms(n));
        let c = asm_to_pcsm(a).unwrap();
        prop_assert_eq!(&pcsm_to_asm(&c).unwrap(), a);
        prop_assert_eq!(&gog_to_asm(&asm_to_gog(a).unwrap()).unwrap(), a);
        let t = top_path(&c);
        prop_assert_eq!(t.max(), c.size() as i64 - x_gog(&c) as i64);
        prop_assert!(t.values().windows(2).all(|w| (w[1] - w[0]).abs() <= 1));
    }

    #[test]
    fn gaps_decrease_in_the_window(n in 1usize..=6) {
        let mut prev = Rational::one();
        for s in 0..=n {
            let g = gap_probability(n, s).unwrap();
            prop_assert!(g <= prev && g >= Rational::zero());
            prev = g;
        }
        prop_assert!(prev > rat(0, 1));
    }

    #[test]
    fn big_float_gaps_match_exact(n in 1usize..=12, bits in 64usize..=200) {
        let policy = PrecisionPolicy::big_float(bits);
        let approx = KernelTables::big_float(n, bits).gap_probabilities(&policy).unwrap();
        for (s, a) in approx.iter().enumerate() {
            let e = asm_goe::numeric::rational_to_f64(&gap_probability(n, s).unwrap());
            prop_assert!((a.to_f64() - e).abs() < 1e-15, "n {} s {}", n, s);
        }
    }

    #[test]
    fn max_law_is_a_distribution(n in 1usize..=25) {
        let law = law_of_max_t(n, &PrecisionPolicy::big_float(128)).unwrap();
        let total: f64 = law.table.iter().map(|p| p.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(law.table.iter().all(|p| p.1 >= 0.0));
        prop_assert_eq!(law.table.first().unwrap().0, -1);
        prop_assert_eq!(law.table.last().unwrap().0, n as i64 - 1);
    }

    #[test]
    fn f1_is_monotone(s in -6.0f64..4.0, d in 0.0f64..2.0) {
        let rule = QuadratureRule::default_rule();
        let a = f1(s, &rule).unwrap().value;
        let b = f1(s + d, &rule).unwrap().value;
        prop_assert!(b >= a - 1e-13);
        prop_assert!((0.0..=1.0 + 1e-13).contains(&a));
    }

    #[test]
    fn chain_stays_a_monotone_triangle(n in 2usize..=12, seed in any::<u64>(), steps in 0usize..3000) {
        let mut c = GlauberChain::new(n, seed, 0).unwrap();
        for _ in 0..steps {
            c.step();
        }
        prop_assert!(c.triangle().is_ok());
        for i in 1..=n {
            for j in 1..=i {
                let (lo, hi) = c.allowed(i, j);
                prop_assert!(lo <= hi);
            }
        }
    }

    #[test]
    fn chains_are_reproducible(n in 2usize..=10, seed in any::<u64>(), stream in 0u64..8) {
        let mut a = GlauberChain::new(n, seed, stream).unwrap();
        let mut b = GlauberChain::new(n, seed, stream).unwrap();
        a.sweeps(5);
        b.sweeps(5);
        prop_assert_eq!(a.triangle().unwrap(), b.triangle().unwrap());
    }
}
