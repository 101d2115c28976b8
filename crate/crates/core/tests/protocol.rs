use pirlab_core::codes::{grs_code, GrsSpec, LinearCode};
use pirlab_core::collusion::CollusionPattern;
use pirlab_core::field::PrimeField;
use pirlab_core::rate::rate;
use pirlab_core::schemes::{
    build_infoset_scheme, build_partition_scheme, build_striped_partition_scheme, build_tpir_scheme,
    scheme_secure_against, RetrievalScheme,
};
use pirlab_core::simulator::{encode_storage, run_retrieval};
use pirlab_core::verifier::{verify_scheme, OracleVerdict, DEFAULT_ORACLE_CAP};
use proptest::prelude::*;

fn grs(p: u64, n: usize, k: usize) -> LinearCode {
    grs_code(&GrsSpec::new(PrimeField::new(p).unwrap(), n, k)).unwrap()
}

fn random_files(p: u32, m: usize, len: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..m)
        .map(|_| {
            (0..len)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    ((state >> 33) % p as u64) as u32
                })
                .collect()
        })
        .collect()
}

fn round_trips(scheme: &RetrievalScheme, m: usize, seeds: u64) {
    let code = scheme.storage_code();
    let k = code.k();
    let p = code.field().modulus();
    let files = random_files(p, m, k * scheme.blocks(), seeds);
    let system = encode_storage(&files, code, scheme.blocks()).unwrap();
    for (i, file) in files.iter().enumerate() {
        for seed in 0..seeds {
            let t = run_retrieval(&system, scheme, i, seed).unwrap();
            assert_eq!(&t.reconstructed, file);
            assert_eq!(t.downloads, scheme.downloads());
            assert_eq!(rate(t.decoded_symbols() as u64, t.downloads as u64), scheme.rate());
        }
    }
}

#[test]
fn tpir_round_trips_across_parameters() {
    for (p, n, k, t) in [
        (5, 5, 2, 2),
        (5, 5, 1, 3),
        (7, 7, 3, 2),
        (7, 7, 2, 1),
        (11, 8, 3, 2),
        (11, 10, 4, 3),
    ] {
        let s = build_tpir_scheme(&grs(p, n, k), t).unwrap();
        assert_eq!(s.rate(), rate((n - k - t + 1) as u64, n as u64));
        assert_eq!(s.retrieval_code().k(), t);
        round_trips(&s, 3, 10);
    }
}

#[test]
fn infoset_round_trips_on_non_uniform_patterns() {
    let cases: Vec<(LinearCode, CollusionPattern)> = vec![
        (
            grs(5, 5, 2),
            CollusionPattern::uniform(5, 2)
                .unwrap()
                .join(&CollusionPattern::from_maximal(5, &[vec![2, 3, 4]]).unwrap())
                .unwrap(),
        ),
        (
            grs(7, 6, 2),
            CollusionPattern::from_maximal(6, &[vec![2, 3, 4, 5]]).unwrap(),
        ),
        (
            grs(11, 8, 2),
            CollusionPattern::from_maximal(8, &[vec![0, 1], vec![4, 5, 6, 7]]).unwrap(),
        ),
    ];
    for (c, pattern) in cases {
        let s = build_infoset_scheme(&c, &pattern).unwrap();
        assert!(scheme_secure_against(&s, &pattern));
        round_trips(&s, 2, 10);
        let report = verify_scheme(&s, &pattern, 2, DEFAULT_ORACLE_CAP).unwrap();
        assert!(report.overall);
    }
}

#[test]
fn partition_and_striped_round_trips() {
    let c = grs(7, 6, 3);
    let parts = CollusionPattern::from_maximal(6, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let s = build_partition_scheme(&c, &parts).unwrap();
    assert_eq!(s.rate(), rate(1, 2));
    round_trips(&s, 3, 10);

    let c = grs(11, 9, 3);
    let parts = CollusionPattern::from_maximal(9, &[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap();
    let s = build_striped_partition_scheme(&c, &parts).unwrap();
    assert_eq!(s.rate(), rate(2, 3));
    round_trips(&s, 2, 10);

    let c = grs(11, 10, 2);
    let parts = CollusionPattern::from_maximal(10, &[vec![0, 1, 2], vec![3, 4], vec![5, 6, 7, 8, 9]]).unwrap();
    let s = build_striped_partition_scheme(&c, &parts).unwrap();
    assert_eq!(s.retained_servers(), &[0, 1, 3, 4, 5, 6]);
    assert_eq!(s.rate(), rate(2, 3));
    round_trips(&s, 2, 10);
}

#[test]
fn single_server_views_are_uniform() {
    let s = build_tpir_scheme(&grs(5, 5, 2), 2).unwrap();
    let pattern = CollusionPattern::no_collusion(5);
    let report = verify_scheme(&s, &pattern, 2, DEFAULT_ORACLE_CAP).unwrap();
    assert!(report.sets.iter().all(|r| r.oracle == OracleVerdict::Equal));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tpir_random_round_trip(
        (p, n, k, t) in prop_oneof![Just(7u64), Just(11)]
            .prop_flat_map(|p| (Just(p), 3..=(p as usize).min(9)))
            .prop_flat_map(|(p, n)| (Just(p), Just(n), 1..n))
            .prop_flat_map(|(p, n, k)| (Just(p), Just(n), Just(k), 1..=n - k)),
        seed in any::<u64>(),
    ) {
        let s = build_tpir_scheme(&grs(p, n, k), t).unwrap();
        prop_assert!(s.retrieval_code().k() >= t);
        let files = random_files(p as u32, 2, k * s.blocks(), seed);
        let system = encode_storage(&files, s.storage_code(), s.blocks()).unwrap();
        for (i, file) in files.iter().enumerate() {
            prop_assert_eq!(&run_retrieval(&system, &s, i, seed).unwrap().reconstructed, file);
        }
    }

    #[test]
    fn methods_agree_on_small_schemes(
        n in 3usize..6,
        k in 1usize..3,
        sets in prop::collection::vec(prop::collection::btree_set(0usize..5, 1..4), 0..3),
    ) {
        prop_assume!(k < n);
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().filter(|&j| j < n).collect::<Vec<_>>()).filter(|s: &Vec<usize>| !s.is_empty()).collect();
        let pattern = CollusionPattern::from_maximal(n, &sets).unwrap();
        let s = build_tpir_scheme(&grs(5, n, k), 1);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let report = verify_scheme(&s, &pattern, 2, DEFAULT_ORACLE_CAP);
        prop_assert!(report.is_ok());
        let report = report.unwrap();
        prop_assert_eq!(report.overall, scheme_secure_against(&s, &pattern));
    }
}
