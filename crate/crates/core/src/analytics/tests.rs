use proptest::prelude::*;

use super::*;

#[test]
fn identical_samples() {
    let a = [1.0, 2.0, 3.5, 4.0];
    let test = welch_t(&a, &a).test().unwrap();
    assert_eq!(test.t, 0.0);
    assert!((test.p - 1.0).abs() < 1e-12);
}

#[test]
fn zero_variance_limits() {
    let test = welch_t(&[3.0, 3.0, 3.0], &[1.0, 1.0]).test().unwrap();
    assert_eq!(test.t, f64::INFINITY);
    assert_eq!(test.p, 0.0);
    let test = welch_t(&[1.0, 1.0], &[3.0, 3.0, 3.0]).test().unwrap();
    assert_eq!(test.t, f64::NEG_INFINITY);
    let test = welch_t(&[2.0, 2.0], &[2.0, 2.0]).test().unwrap();
    assert_eq!((test.t, test.p), (0.0, 1.0));
}

#[test]
fn short_samples_are_not_testable() {
    assert_eq!(welch_t(&[1.0], &[1.0, 2.0, 3.0]), WelchOutcome::NotTestable);
    assert_eq!(welch_t(&[1.0, 2.0], &[]), WelchOutcome::NotTestable);
}

#[test]
fn groups_from_ids() {
    assert_eq!(group_of("GEN1_3"), "GEN1");
    assert_eq!(group_of("WIND"), "WIND");
}

proptest! {
    #[test]
    fn swapping_samples_negates_t(
        a in prop::collection::vec(-100.0..100.0f64, 2..30),
        b in prop::collection::vec(-100.0..100.0f64, 2..30),
    ) {
        let (x, y) = (welch_t(&a, &b).test().unwrap(), welch_t(&b, &a).test().unwrap());
        prop_assert!((x.t + y.t).abs() <= 1e-12 * x.t.abs().max(1.0));
        prop_assert!((x.p - y.p).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p));
    }

    #[test]
    fn order_of_samples_is_irrelevant(
        a in prop::collection::vec(-100.0..100.0f64, 2..30),
        b in prop::collection::vec(-100.0..100.0f64, 2..30),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.shuffle(&mut rng);
        b2.shuffle(&mut rng);
        let (x, y) = (welch_t(&a, &b).test().unwrap(), welch_t(&a2, &b2).test().unwrap());
        prop_assert!((x.t - y.t).abs() <= 1e-9 * x.t.abs().max(1.0));
        prop_assert!((x.p - y.p).abs() <= 1e-9);
    }
}
