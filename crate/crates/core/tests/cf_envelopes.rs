mod common;

use std::sync::{Arc, Mutex};

use cfreal::cf::sample_pairs;
use cfreal::funclib::{exp_fn, lift_to_oracle_machine, sin_fn};
use cfreal::{check_consistency, integrate_oracle, node_oracle, CauchyReal, Dyadic};
use common::*;
use proptest::prelude::*;

/// An oracle for `d` that records every precision it is asked for.
fn logged(d: Dyadic) -> (CauchyReal, Arc<Mutex<Vec<u32>>>) {
    let log = Arc::new(Mutex::new(Vec::new()));
    let sink = Arc::clone(&log);
    let x = CauchyReal::from_fn_unchecked(None, move |n| {
        sink.lock().unwrap().push(n);
        d.round_to(n + 1)
    });
    (x, log)
}

proptest! {
    #[test]
    fn node_oracles_track_exact_nodes(
        num in 0u64..=1024,
        log2_k in 0u32..=12,
        i_frac in 0.0f64..=1.0,
        n in 0u32..=40,
    ) {
        let k = 1u64 << log2_k;
        let i = ((k as f64) * i_frac).round() as u64;
        let x = Dyadic::new(num, -10);
        let t = node_oracle(&CauchyReal::constant(x.clone()), i, k).unwrap();
        let exact = to_rational(&x) * ratio(i as i64, k as i64);
        let got = t.approx(n);
        prop_assert!(Enclosure::exact(exact).certifies(&got, n as i64));
        prop_assert!(got.frac_bits() <= n as u64 + 1);
    }

    #[test]
    fn constants_meet_envelope(m in -1_000_000i64..1_000_000, e in -40i64..4, n in 0u32..=40) {
        let d = Dyadic::new(m, e);
        let got = CauchyReal::constant(d.clone()).approx(n);
        prop_assert!(Enclosure::exact(to_rational(&d)).certifies(&got, n as i64));
    }
}

#[test]
fn lifted_functions_query_input_boundedly() {
    // sin has b1 = 1, so queries stay within a fixed offset of n
    let (x, log) = logged(Dyadic::new(5, -3));
    let y = lift_to_oracle_machine(&sin_fn()).apply(&x);
    for n in [0, 10, 35] {
        log.lock().unwrap().clear();
        y.approx(n);
        assert!(
            log.lock().unwrap().iter().all(|&q| q <= n + 2),
            "{:?}",
            log.lock().unwrap()
        );
    }
}

#[test]
fn integral_queries_input_boundedly() {
    let (x, log) = logged(Dyadic::new(3, -2));
    for n in [1, 6, 10] {
        log.lock().unwrap().clear();
        integrate_oracle(&exp_fn(), &x, n).unwrap();
        let queries = log.lock().unwrap().clone();
        assert_eq!(queries.len(), 1);
        assert!(queries[0] <= n + 4);
    }
}

#[test]
fn adversarial_approximator_is_flagged() {
    // converges to 0 for even n, but odd n jump to 1/4
    let liar = CauchyReal::from_fn_unchecked(None, |n| {
        if n % 2 == 1 {
            Dyadic::new(1, -2)
        } else {
            Dyadic::zero()
        }
    });
    let report = check_consistency(&liar, &sample_pairs(100, 40, 3));
    assert!(!report.is_consistent());
    assert!(report.violations.iter().all(|v| v.gap > v.allowed));
}
