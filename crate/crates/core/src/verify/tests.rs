use super::*;
use crate::algebra::build_field;
use std::collections::BTreeMap;

const LIMIT: u128 = DEFAULT_LIMIT;

/// Independent oracle: I(W; Y | F) from full joint maps, in nats.
fn brute_cmi(s: &dyn Scheme) -> f64 {
    let radices = s.data_radices();
    let mut data = vec![0u32; radices.len()];
    let mut per_data: Vec<(Vec<u32>, BTreeMap<Vec<u32>, f64>)> = Vec::new();
    loop {
        let mut f = Vec::new();
        s.truth(&data, &mut f);
        let mut m: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let lists: Vec<Vec<(Vec<u32>, u64)>> = (0..s.segment_count())
            .map(|seg| {
                let mut v = Vec::new();
                s.outcomes(&data, seg, &mut |t, w| v.push((t.to_vec(), w)));
                v
            })
            .collect();
        let mut idx = vec![0u32; lists.len()];
        loop {
            let mut t = Vec::new();
            let mut w = 1.0;
            for (l, &i) in lists.iter().zip(&idx) {
                t.extend_from_slice(&l[i as usize].0);
                w *= l[i as usize].1 as f64;
            }
            *m.entry(t).or_default() += w;
            if !schemes::advance(&mut idx, |j| lists[j].len() as u32) {
                break;
            }
        }
        let total: f64 = m.values().sum();
        m.values_mut().for_each(|v| *v /= total);
        per_data.push((f, m));
        if !schemes::advance(&mut data, |i| radices[i]) {
            break;
        }
    }
    let n = per_data.len() as f64;
    let h = |m: &BTreeMap<Vec<u32>, f64>| -m.values().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    let h_yw: f64 = per_data.iter().map(|(_, m)| h(m)).sum::<f64>() / n;
    let mut by_f: BTreeMap<Vec<u32>, (f64, BTreeMap<Vec<u32>, f64>)> = BTreeMap::new();
    for (f, m) in &per_data {
        let e = by_f.entry(f.clone()).or_default();
        e.0 += 1.0;
        for (t, p) in m {
            *e.1.entry(t.clone()).or_default() += p;
        }
    }
    let h_yf: f64 = by_f
        .values()
        .map(|(c, m)| {
            let norm: BTreeMap<_, _> = m.iter().map(|(k, v)| (k.clone(), v / c)).collect();
            c / n * h(&norm)
        })
        .sum();
    h_yf - h_yw
}

#[test]
fn cited_and_is_correct_and_secure() {
    let v = verify_exhaustive(&CitedAnd, LIMIT).unwrap();
    assert!(v.passed());
    assert_eq!(v.correctness.data_points, 4);
    let zero = &v.security.segments[0].groups[0];
    assert_eq!(zero.f, vec![0]);
    assert_eq!(zero.data_tuples, 3);
    let counts: Vec<_> = zero.counts.as_ref().unwrap().iter().map(|c| (c.transcript.clone(), c.count)).collect();
    assert_eq!(counts, vec![(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 0], 1)]);
    assert_eq!(v.security.segments[0].denominator, 3);
}

#[test]
fn new_and_is_correct_and_secure() {
    let v = verify_exhaustive(&NewAnd, LIMIT).unwrap();
    assert!(v.passed());
    let zero = &v.security.segments[0].groups[0];
    let counts: Vec<_> = zero.counts.as_ref().unwrap().iter().map(|c| (c.transcript.clone(), c.count)).collect();
    assert_eq!(counts, vec![(vec![1], 1), (vec![2], 1)]);
}

#[test]
fn dot_demo_is_correct_and_secure() {
    let v = verify_exhaustive(&DotDemo, LIMIT).unwrap();
    assert!(v.passed());
    let groups = &v.security.segments[0].groups;
    assert_eq!(groups[0].data_tuples, 10);
    assert_eq!(groups[1].data_tuples, 6);
    let ys = |g: &GroupDistribution| g.counts.as_ref().unwrap().iter().map(|c| c.transcript[0]).collect::<Vec<_>>();
    assert_eq!(ys(&groups[0]), vec![1, 3, 4, 5, 9]);
    assert_eq!(ys(&groups[1]), vec![2, 6, 7, 8, 10]);
}

#[test]
fn sum_small_grid() {
    for d in 2..=4 {
        for k in 1..=5 {
            let v = verify_exhaustive(&Sum::new(d, k), LIMIT).unwrap();
            assert!(v.passed(), "d={d} k={k}: {v:?}");
        }
    }
}

#[test]
fn odd_sum_examples() {
    let v = verify_exhaustive(&Sum::new(2, 3), LIMIT).unwrap();
    assert_eq!(v.correctness.data_points, 64);
    assert_eq!(v.correctness.checks, 64);
    assert!(v.passed());
    assert_eq!(v.cmi.per_segment, vec![0.0]);
    let v = verify_exhaustive(&Sum::new(3, 3), LIMIT).unwrap();
    assert_eq!(v.security.verdict, SecurityVerdict::Secure);
}

#[test]
fn broken_sum_is_rejected_with_witness() {
    let v = verify_exhaustive(&Sum::broken(2, 4), LIMIT).unwrap();
    assert!(v.correctness.passed);
    assert_eq!(v.security.verdict, SecurityVerdict::Insecure);
    let w = v.security.witness.as_ref().unwrap();
    let sum = |x: &[u32]| x.iter().sum::<u32>() % 2;
    assert_eq!(sum(&w.data_a), sum(&w.data_b));
    assert_ne!(w.count_a, w.count_b);
    // Y1 reveals W1 + W2
    assert_ne!(sum(&w.data_a[..2]), sum(&w.data_b[..2]));
    assert!(!v.cmi.exactly_zero);
    assert!(v.cmi.upper > 0.0);
    // with K = 4 over bits, Y1 is a uniform bit independent of F
    assert!((v.cmi.upper - 1.0).abs() < 1e-12);
}

#[test]
fn corrupted_decode_fails_with_counterexample() {
    let v = verify_exhaustive(&CorruptedDecode(Sum::new(3, 3)), LIMIT).unwrap();
    assert!(!v.correctness.passed);
    assert_eq!(v.correctness.failures, v.correctness.checks);
    let c = v.correctness.first_counterexample.unwrap();
    assert_eq!(c.data, vec![0; 6]);
    assert_eq!(c.expected, vec![0, 0]);
    assert_eq!(c.decoded, vec![1, 0]);
    let v = verify_exhaustive(&CorruptedDecode(NewAnd), LIMIT).unwrap();
    assert!(!v.correctness.passed);
}

#[test]
fn prod_small_fields() {
    for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
        for k in 1..=3 {
            let v = verify_exhaustive(&Prod::new(build_field(p, r).unwrap(), k), LIMIT).unwrap();
            assert!(v.passed(), "p={p} r={r} k={k}");
        }
    }
}

#[test]
fn factorized_pass_matches_joint_pass() {
    let cases: Vec<(u32, u32, usize)> = vec![(3, 1, 2), (2, 2, 2), (3, 1, 3), (5, 1, 2)];
    for (p, r, k) in cases {
        let f = build_field(p, r).unwrap();
        let split = verify_exhaustive(&Prod::new(f.clone(), k), LIMIT).unwrap();
        let joint = verify_exhaustive(&Joint(Prod::new(f, k)), LIMIT).unwrap();
        assert_eq!(split.correctness.failures, joint.correctness.failures);
        assert_eq!(split.security.verdict, joint.security.verdict);
        assert_eq!(split.cmi.exactly_zero, joint.cmi.exactly_zero);
        assert_eq!(joint.cmi.per_segment, vec![0.0]);
    }
}

#[test]
fn cmi_matches_brute_force_oracle() {
    let schemes: Vec<Box<dyn Scheme>> = vec![
        Box::new(Sum::broken(2, 4)),
        Box::new(Sum::broken(3, 3)),
        Box::new(Sum::broken(3, 2)),
        Box::new(Sum::new(3, 3)),
        Box::new(CitedAnd),
        Box::new(Joint(Prod::new(build_field(3, 1).unwrap(), 2))),
    ];
    for s in &schemes {
        let v = verify_exhaustive(s.as_ref(), LIMIT).unwrap();
        let oracle = brute_cmi(s.as_ref()) / (s.reference_dimension() as f64).ln();
        assert!((v.cmi.upper - oracle.max(0.0)).abs() < 1e-9, "{}: {} vs {}", s.label(), v.cmi.upper, oracle);
        assert_eq!(v.cmi.exactly_zero, oracle.abs() < 1e-12, "{}", s.label());
        // security and zero CMI agree
        assert_eq!(v.cmi.exactly_zero, v.security.verdict == SecurityVerdict::Secure);
    }
}

#[test]
fn broken_two_user_sum_is_still_secure() {
    // with K = 2 the only output is the sum itself
    let v = verify_exhaustive(&Sum::broken(3, 2), LIMIT).unwrap();
    assert!(v.passed());
}

#[test]
fn limit_is_enforced() {
    let err = verify_exhaustive(&Sum::new(5, 5), LIMIT).unwrap_err();
    match err {
        VerifyError::LimitExceeded { evaluations, limit } => {
            assert_eq!(evaluations, 5u128.pow(10) * 125);
            assert_eq!(limit, LIMIT);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sampling_is_marked_non_exhaustive() {
    let r = check_correctness_sampled(&Sum::new(5, 5), 200, 1, LIMIT).unwrap();
    assert!(!r.exhaustive);
    assert!(r.passed);
    assert_eq!(r.data_points, 200);
    let r = check_correctness_sampled(&CorruptedDecode(Sum::new(5, 5)), 5, 1, LIMIT).unwrap();
    assert!(!r.passed);
    let f = build_field(3, 2).unwrap();
    assert!(check_correctness_sampled(&Prod::new(f, 3), 20, 2, LIMIT).unwrap().passed);
}

#[test]
fn reports_are_deterministic() {
    let f = build_field(2, 2).unwrap();
    let a = verify_exhaustive(&Prod::new(f.clone(), 3), LIMIT).unwrap();
    let b = verify_exhaustive(&Prod::new(f, 3), LIMIT).unwrap();
    assert_eq!(a, b);
}

#[test]
fn separate_entry_points_agree() {
    let s = Sum::new(3, 4);
    let v = verify_exhaustive(&s, LIMIT).unwrap();
    assert_eq!(check_correctness_exhaustive(&s, LIMIT).unwrap(), v.correctness);
    assert_eq!(check_security_exhaustive(&s, LIMIT).unwrap(), v.security);
    assert_eq!(conditional_mutual_information(&s, LIMIT).unwrap(), v.cmi);
}

#[test]
fn large_segments_are_summarized() {
    let s = Sum::new(4, 5);
    let listed = assemble(&s, engine::run_pass(&s, LIMIT).unwrap(), 16 * 64);
    assert!(listed.security.segments[0].groups[0].counts.is_some());
    let v = assemble(&s, engine::run_pass(&s, LIMIT).unwrap(), 16 * 64 - 1);
    assert!(v.passed());
    let g = &v.security.segments[0].groups[0];
    assert!(g.counts.is_none());
    assert_eq!(g.support, 64);
    assert_eq!(v.security.segments[0].groups.len(), 16);
}
