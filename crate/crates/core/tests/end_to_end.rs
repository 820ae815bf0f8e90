use qmac_core::protocols::{qsk_prod_stream, qsk_sum, DataMatrix, ProtocolRun};
use qmac_core::verify::{reconcile_rate, verify_exhaustive, ProtocolParams, DEFAULT_LIMIT};
use qmac_core::{build_field, Session, SimMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_stream(rng: &mut ChaCha8Rng, k: usize, n: usize, d: u32) -> DataMatrix {
    DataMatrix::new(k, n, d, (0..k * n).map(|_| rng.gen_range(0..d)).collect()).unwrap()
}

fn decoded(runs: &[ProtocolRun]) -> Vec<u32> {
    runs.iter().flat_map(|r| r.output.iter().copied()).collect()
}

#[test]
fn long_sum_streams_decode_in_both_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (d, k) in [(2, 2), (3, 3), (5, 4), (4, 5), (7, 7)] {
        let n = 12;
        let w = random_stream(&mut rng, k, n, d);
        let want: Vec<u32> = (0..n).map(|l| (0..k).map(|u| w.get(u + 1, l + 1)).sum::<u32>() % d).collect();
        let mut abs = Session::new(SimMode::Abstract);
        let runs = qsk_sum(&mut abs, d, k, &w, &mut ChaCha8Rng::seed_from_u64(2), false).unwrap();
        assert_eq!(decoded(&runs), want, "d={d} K={k}");
        let mut qv = Session::new(SimMode::QuantumVerified);
        let qruns = qsk_sum(&mut qv, d, k, &w, &mut ChaCha8Rng::seed_from_u64(2), false).unwrap();
        assert_eq!(qruns, runs);
        let summary = qv.close().unwrap();
        assert_eq!(summary.ledger, abs.close().unwrap().ledger);
        assert!(!summary.padding_divergent);
    }
}

#[test]
fn long_prod_streams_decode() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, r, k) in [(2, 1, 4), (3, 1, 3), (2, 3, 2), (3, 2, 5), (11, 1, 3)] {
        let field = build_field(p, r).unwrap();
        let d = p.pow(r);
        let n = 6;
        let w = random_stream(&mut rng, k, n, d);
        let want: Vec<u32> = (0..n)
            .map(|l| (0..k).fold(1, |acc, u| field.mul_repr(acc, w.get(u + 1, l + 1))))
            .collect();
        let mut s = Session::new(SimMode::QuantumVerified).with_padding(true);
        let runs = qsk_prod_stream(&mut s, &field, k, &w, &mut rng).unwrap();
        assert_eq!(decoded(&runs), want, "GF({d}) K={k}");
        s.close().unwrap();
    }
}

#[test]
fn every_family_verifies_at_a_small_size() {
    let params = [
        ProtocolParams::Qs2AndCited,
        ProtocolParams::Qs2AndNew,
        ProtocolParams::DotDemo,
        ProtocolParams::QskSum { d: 3, k: 1 },
        ProtocolParams::QskSum { d: 3, k: 4 },
        ProtocolParams::QskProd { p: 2, r: 2, k: 3 },
        ProtocolParams::QskAnd { k: 3 },
        ProtocolParams::QskAnd { k: 4 },
    ];
    for p in params {
        let v = verify_exhaustive(p.scheme().unwrap().as_ref(), DEFAULT_LIMIT).unwrap();
        assert!(v.passed(), "{p:?}");
        let rate = reconcile_rate(&p).unwrap();
        assert!(rate.verdict.passed, "{p:?}");
        assert!(rate.achieved.approx <= 2.0 / p.users() as f64 + 1e-12);
    }
}

#[test]
fn broken_sum_fails_only_for_three_or_more_users() {
    for k in 2..=4 {
        let p = ProtocolParams::BrokenQskSum { d: 3, k };
        let v = verify_exhaustive(p.scheme().unwrap().as_ref(), DEFAULT_LIMIT).unwrap();
        assert_eq!(v.passed(), k == 2, "K={k}");
        assert!(v.correctness.passed);
    }
}

#[test]
fn reports_serialize() {
    let p = ProtocolParams::QskProd { p: 3, r: 1, k: 2 };
    let v = verify_exhaustive(p.scheme().unwrap().as_ref(), DEFAULT_LIMIT).unwrap();
    let text = serde_json::to_string(&v).unwrap();
    assert_eq!(serde_json::from_str::<qmac_core::verify::Verification>(&text).unwrap(), v);
    let r = reconcile_rate(&p).unwrap();
    let back: qmac_core::verify::RateReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    let params: ProtocolParams = serde_json::from_str(r#"{"protocol":"qsk-sum","d":3,"k":5}"#).unwrap();
    assert_eq!(params, ProtocolParams::QskSum { d: 3, k: 5 });
}
