use dsc_core::metrics::{
    build_report_with, check_distribution, delta_affine, error_probability_exact,
    key_preimage_partition_verify_all, lemma1_verify, MetricPath, PathChoice,
};
use dsc_core::{AffineEncoderPair, BlockDistribution, Cryptosystem, Field, JointPmf, Thresholds};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pmf(f1: Field, f2: Field, weights: &[f64]) -> JointPmf {
    let total: f64 = weights.iter().sum();
    JointPmf::new(f1, f2, weights.iter().map(|w| w / total).collect()).unwrap()
}

#[derive(Debug, Clone)]
struct Case {
    q1: u32,
    q2: u32,
    n: usize,
    m1: usize,
    m2: usize,
    seed: u64,
    src: Vec<f64>,
    keys: Vec<f64>,
}

fn case() -> impl Strategy<Value = Case> {
    (
        prop_oneof![Just((2u32, 2u32, 4usize)), Just((3, 3, 2)), Just((2, 3, 2))],
        any::<u64>(),
    )
        .prop_flat_map(|((q1, q2, n), seed)| {
            let cells = (q1 * q2) as usize;
            (
                1..=n,
                1..=n,
                prop::collection::vec(0.0f64..1.0, cells),
                prop::collection::vec(0.0f64..1.0, cells),
            )
                .prop_map(move |(m1, m2, mut src, mut keys)| {
                    // keep at least one cell positive
                    src[0] += 0.05;
                    keys[0] += 0.05;
                    Case {
                        q1,
                        q2,
                        n,
                        m1,
                        m2,
                        seed,
                        src,
                        keys,
                    }
                })
        })
}

struct Built {
    sys: Cryptosystem,
    src: BlockDistribution,
    keys: BlockDistribution,
}

fn build(c: &Case) -> Built {
    let (f1, f2) = (Field::new(c.q1).unwrap(), Field::new(c.q2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let enc = AffineEncoderPair::random(&mut rng, c.n, c.m1, c.m2, f1, f2)
        .unwrap()
        .with_random_offsets(&mut rng)
        .unwrap();
    Built {
        sys: Cryptosystem::new(enc).unwrap(),
        src: BlockDistribution::new(pmf(f1, f2, &c.src), c.n).unwrap(),
        keys: BlockDistribution::new(pmf(f1, f2, &c.keys), c.n).unwrap(),
    }
}

const T: Thresholds = Thresholds {
    epsilon: 0.1,
    delta: 0.1,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decoder_structure(c in case()) {
        let b = build(&c);
        let set = b.sys.decoding_set();
        let expected = (c.q1 as usize).pow(c.m1 as u32) * (c.q2 as usize).pow(c.m2 as u32);
        prop_assert_eq!(set.len(), expected);
        prop_assert!(b.sys.table().is_injective());
        prop_assert!(b.sys.table().reencodes(b.sys.encoders()));
        prop_assert!(key_preimage_partition_verify_all(&b.sys, &set).unwrap().holds());
    }

    #[test]
    fn unit_sums_and_uniform_check(c in case()) {
        let b = build(&c);
        let set = b.sys.decoding_set();
        prop_assert!(lemma1_verify(&b.sys, &b.keys, &set).unwrap().max_deviation < 1e-12);
        prop_assert!(check_distribution(&b.sys, &b.keys, &set).unwrap().max_deviation < 1e-12);
    }

    #[test]
    fn report_invariants(c in case()) {
        let b = build(&c);
        let r = build_report_with(&b.sys, &b.src, &b.keys, T, PathChoice::Force(MetricPath::Enumeration)).unwrap();
        prop_assert!(r.invariant_violations(1e-9).is_empty(), "{:?}", r.invariant_violations(1e-9));
        prop_assert!(r.delta >= r.key_bound.reported - 1e-9);
        prop_assert!((r.delta - delta_affine(b.sys.encoders(), &b.keys).unwrap()).abs() < 1e-9);
        let s = build_report_with(&b.sys, &b.src, &b.keys, T, PathChoice::Force(MetricPath::AffineStructure)).unwrap();
        prop_assert!((r.delta_mi - s.delta_mi).abs() < 1e-9);
        prop_assert!((r.div_cipher_uniform - s.div_cipher_uniform).abs() < 1e-9);
        prop_assert!(r.p_e >= 0.0 && r.p_e <= 1.0);
    }

    #[test]
    fn delta_is_invariant_to_offsets(c in case(), seed in any::<u64>()) {
        let b = build(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shifted = b.sys.encoders().clone().with_random_offsets(&mut rng).unwrap();
        let d0 = delta_affine(b.sys.encoders(), &b.keys).unwrap();
        let d1 = delta_affine(&shifted, &b.keys).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_error_rate_matches_exact() {
    let f = Field::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let enc = AffineEncoderPair::random(&mut rng, 6, 4, 4, f, f).unwrap();
    let sys = Cryptosystem::new(enc).unwrap();
    let src = BlockDistribution::new(JointPmf::dsbs(0.11).unwrap(), 6).unwrap();
    let keys = BlockDistribution::new(pmf(f, f, &[0.4, 0.1, 0.1, 0.4]), 6).unwrap();
    let exact = error_probability_exact(&src, &sys.decoding_set());
    let trials = 20_000;
    let failures = (0..trials)
        .filter(|_| !sys.roundtrip_trial(&src, &keys, &mut rng).unwrap().success)
        .count();
    let estimate = failures as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!(
        (estimate - exact).abs() <= 4.0 * sigma + 1e-9,
        "{estimate} vs {exact}"
    );
}
