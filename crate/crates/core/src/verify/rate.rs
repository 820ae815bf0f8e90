//! Achieved rate against the capacity bounds.

use super::params::ProtocolParams;
use crate::channel::{ledger_rate, CostLedger, RateExpr, Session, SimMode};
use crate::protocols::ProtocolError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Tolerance for comparing double-precision rates.
pub const RATE_TOLERANCE: f64 = 1e-12;

/// Representative batches; two so that every 2-sum pairs up.
const BATCHES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCost {
    pub qudits: BTreeMap<u32, u64>,
    pub two_sum_invocations: u64,
    /// Rate over the qudits the quantum simulation actually used.
    pub rate: RateExpr,
    pub padding_divergent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateVerdict {
    pub within_upper_bound: bool,
    pub above_lower_bound: bool,
    pub matches_construction: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub protocol: String,
    pub computations: u64,
    pub ledger: CostLedger,
    pub achieved: RateExpr,
    pub achieved_symbolic: String,
    pub expected: f64,
    pub physical: PhysicalCost,
    pub upper_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    pub verdict: RateVerdict,
}

/// Runs representative batches in both simulation modes and checks the
/// achieved rate against `2/K` and, for the product family, the
/// achievability bound.
pub fn reconcile_rate(params: &ProtocolParams) -> Result<RateReport, ProtocolError> {
    let base = params.dimension();

    let mut session = Session::new(SimMode::Abstract);
    let runs = params.run_batches(&mut session, BATCHES, &mut ChaCha8Rng::seed_from_u64(0))?;
    let computations: u64 = runs.iter().map(|r| r.computations()).sum();
    let ledger = session.close()?.ledger;
    let achieved = ledger.rate_expr(computations, base);
    let approx = ledger_rate(&ledger, computations, base)?;

    let mut quantum = Session::new(SimMode::QuantumVerified).with_padding(true);
    let qruns = params.run_batches(&mut quantum, BATCHES, &mut ChaCha8Rng::seed_from_u64(0))?;
    if qruns != runs {
        return Err(ProtocolError::InvalidParameter(
            "quantum-verified runs differ from abstract runs".into(),
        ));
    }
    let summary = quantum.close()?;
    let physical = PhysicalCost {
        rate: RateExpr::new(computations, base, &summary.physical_qudits),
        qudits: summary.physical_qudits,
        two_sum_invocations: summary.two_sum_invocations,
        padding_divergent: summary.padding_divergent,
    };

    let upper_bound = params.upper_bound();
    let lower_bound = params.lower_bound();
    let expected = params.expected_rate();
    let within_upper_bound = approx <= upper_bound + RATE_TOLERANCE;
    let above_lower_bound = lower_bound.map_or(true, |lb| approx >= lb - RATE_TOLERANCE);
    let matches_construction = (approx - expected).abs() <= RATE_TOLERANCE;
    Ok(RateReport {
        protocol: params.name().to_string(),
        computations,
        achieved_symbolic: achieved.symbolic(),
        achieved,
        ledger,
        expected,
        physical,
        upper_bound,
        lower_bound,
        verdict: RateVerdict {
            within_upper_bound,
            above_lower_bound,
            matches_construction,
            passed: within_upper_bound && above_lower_bound && matches_construction,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_k5_d3_is_tight() {
        let r = reconcile_rate(&ProtocolParams::QskSum { d: 3, k: 5 }).unwrap();
        assert!((r.achieved.approx - 0.4).abs() < 1e-12);
        assert!((r.upper_bound - 0.4).abs() < 1e-12);
        assert!(r.verdict.passed);
        assert!(!r.physical.padding_divergent);
        assert_eq!(r.physical.qudits.get(&3), Some(&10));
    }

    #[test]
    fn prod_gf3_k2() {
        let r = reconcile_rate(&ProtocolParams::QskProd { p: 3, r: 1, k: 2 }).unwrap();
        let want = 3f64.ln() / 6f64.ln();
        assert!((r.achieved.approx - want).abs() < 1e-12);
        assert!((r.lower_bound.unwrap() - want).abs() < 1e-12);
        assert!(r.verdict.passed);
        assert_eq!(r.achieved_symbolic, "2 / (2*log_3(2) + 2*log_3(3))");
    }

    #[test]
    fn new_and_rate() {
        let r = reconcile_rate(&ProtocolParams::Qs2AndNew).unwrap();
        assert!((r.achieved.approx - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!(r.verdict.passed);
        assert_eq!(r.physical.two_sum_invocations, 1);
    }

    #[test]
    fn every_family_stays_below_two_over_k() {
        let mut all = vec![
            ProtocolParams::Qs2AndCited,
            ProtocolParams::Qs2AndNew,
            ProtocolParams::DotDemo,
        ];
        for k in 1..=6 {
            all.push(ProtocolParams::QskSum { d: 4, k });
            all.push(ProtocolParams::QskProd { p: 2, r: 3, k });
            all.push(ProtocolParams::QskAnd { k });
        }
        for p in all {
            let r = reconcile_rate(&p).unwrap();
            assert!(r.verdict.passed, "{p:?}: {r:?}");
            assert!(r.achieved.approx <= r.upper_bound + 1e-12);
        }
    }

    #[test]
    fn single_user_direct_sends_are_not_paired() {
        let r = reconcile_rate(&ProtocolParams::QskSum { d: 5, k: 1 }).unwrap();
        assert_eq!(r.physical.two_sum_invocations, 0);
        assert_eq!(r.physical.qudits.get(&5), Some(&2));
    }
}
