//! Exhaustive correctness, exact security, conditional mutual information
//! and rate reconciliation.
//!
//! Security is checked at the transcript level: a protocol is secure when,
//! for every value of `F`, all data tuples with that value induce the same
//! count vector of server transcripts over the enumerated randomness.
//! Counts are integers throughout; only the CMI value itself is a float, and
//! its zero test is done in integers.

mod engine;
mod params;
mod rate;
mod schemes;

pub use params::ProtocolParams;
pub use rate::{reconcile_rate, PhysicalCost, RateReport, RateVerdict, RATE_TOLERANCE};
pub use schemes::{CitedAnd, CorruptedDecode, DotDemo, Joint, NewAnd, Prod, Scheme, Sum, Tap};

use crate::protocols::{ProtocolError, ProtocolId};
use engine::{distribution, run_pass, unkey, unrank, PassResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on channel-output evaluations per exhaustive pass.
pub const DEFAULT_LIMIT: u128 = 100_000_000;

/// Count vectors larger than this are summarized rather than listed.
pub const DISTRIBUTION_ENTRY_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("exhaustive enumeration needs {evaluations} evaluations, above the limit of {limit}; use smaller parameters or sampling")]
    LimitExceeded { evaluations: u128, limit: u128 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("internal check failed: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub d: u32,
    pub k: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub data: Vec<u32>,
    pub expected: Vec<u32>,
    pub decoded: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectnessReport {
    pub protocol: ProtocolId,
    pub exhaustive: bool,
    pub data_points: u64,
    /// Decoded outputs compared with the truth.
    pub checks: u64,
    pub failures: u64,
    pub first_counterexample: Option<Counterexample>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountEntry {
    pub transcript: Vec<u32>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDistribution {
    pub f: Vec<u32>,
    pub data_tuples: u64,
    pub support: u64,
    /// Listed only when the segment is small enough.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<CountEntry>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDistributions {
    pub name: String,
    /// Total weight of every count vector in this segment.
    pub denominator: u64,
    pub groups: Vec<GroupDistribution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecurityVerdict {
    Secure,
    Insecure,
}

/// Two data tuples with the same `F` but different transcript counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub segment: String,
    pub f: Vec<u32>,
    pub data_a: Vec<u32>,
    pub data_b: Vec<u32>,
    pub transcript: Vec<u32>,
    pub count_a: u64,
    pub count_b: u64,
    pub denominator: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub protocol: ProtocolId,
    pub params: SchemeParams,
    pub segments: Vec<SegmentDistributions>,
    pub verdict: SecurityVerdict,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmiReport {
    pub protocol: ProtocolId,
    /// Logarithm base of the values below.
    pub base: u32,
    pub per_segment: Vec<f64>,
    /// Sum over segments; bounds the joint value from above.
    pub upper: f64,
    /// Largest segment value; bounds the joint value from below.
    pub lower: f64,
    /// Decided in integer arithmetic.
    pub exactly_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub label: String,
    pub data_points: u64,
    pub evaluations: u128,
    pub correctness: CorrectnessReport,
    pub security: SecurityReport,
    pub cmi: CmiReport,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.correctness.passed && self.security.verdict == SecurityVerdict::Secure && self.cmi.exactly_zero
    }
}

/// Runs correctness, security and CMI in one exhaustive pass.
pub fn verify_exhaustive(scheme: &dyn Scheme, limit: u128) -> Result<Verification, VerifyError> {
    let pass = run_pass(scheme, limit)?;
    Ok(assemble(scheme, pass, DISTRIBUTION_ENTRY_LIMIT))
}

pub fn check_correctness_exhaustive(scheme: &dyn Scheme, limit: u128) -> Result<CorrectnessReport, VerifyError> {
    Ok(verify_exhaustive(scheme, limit)?.correctness)
}

pub fn check_security_exhaustive(scheme: &dyn Scheme, limit: u128) -> Result<SecurityReport, VerifyError> {
    Ok(verify_exhaustive(scheme, limit)?.security)
}

pub fn conditional_mutual_information(scheme: &dyn Scheme, limit: u128) -> Result<CmiReport, VerifyError> {
    Ok(verify_exhaustive(scheme, limit)?.cmi)
}

/// Correctness on `samples` uniformly drawn data tuples, each with every
/// randomness point. Reported as non-exhaustive.
pub fn check_correctness_sampled(
    scheme: &dyn Scheme,
    samples: u64,
    seed: u64,
    limit: u128,
) -> Result<CorrectnessReport, VerifyError> {
    let per: u128 = (0..scheme.segment_count())
        .map(|s| scheme.randomness_points(s) as u128)
        .sum();
    let needed = per * samples as u128;
    if needed > limit {
        return Err(VerifyError::LimitExceeded {
            evaluations: needed,
            limit,
        });
    }
    let radices = scheme.data_radices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint = JointRef(scheme);
    let mut report = CorrectnessReport {
        protocol: scheme.protocol(),
        exhaustive: false,
        data_points: samples,
        checks: 0,
        failures: 0,
        first_counterexample: None,
        passed: true,
    };
    let mut f = Vec::new();
    for _ in 0..samples {
        let data: Vec<u32> = radices.iter().map(|&r| rng.gen_range(0..r)).collect();
        scheme.truth(&data, &mut f);
        joint.each_output(&data, &mut |out| {
            report.checks += 1;
            if out != f.as_slice() {
                report.failures += 1;
                report.first_counterexample.get_or_insert_with(|| Counterexample {
                    data: data.clone(),
                    expected: f.clone(),
                    decoded: out.to_vec(),
                });
            }
        });
    }
    report.passed = report.failures == 0;
    Ok(report)
}

/// Decodes every combination of segment outcomes for one data tuple.
struct JointRef<'a>(&'a dyn Scheme);

impl JointRef<'_> {
    fn each_output(&self, data: &[u32], sink: &mut dyn FnMut(&[u32])) {
        let s = self.0;
        let partials: Vec<Vec<Vec<u32>>> = (0..s.segment_count())
            .map(|seg| {
                let mut v: Vec<Vec<u32>> = Vec::new();
                let mut part = Vec::new();
                s.outcomes(data, seg, &mut |t, _| {
                    s.decode_segment(seg, t, &mut part);
                    if !v.contains(&part) {
                        v.push(part.clone());
                    }
                });
                v
            })
            .collect();
        let mut pick = vec![0u32; partials.len()];
        let mut out = Vec::new();
        loop {
            let chosen: Vec<Vec<u32>> = partials
                .iter()
                .zip(&pick)
                .map(|(p, &i)| p[i as usize].clone())
                .collect();
            s.combine(&chosen, &mut out);
            sink(&out);
            if !schemes::advance(&mut pick, |i| partials[i].len() as u32) {
                break;
            }
        }
    }
}

fn assemble(scheme: &dyn Scheme, pass: PassResult, listed: usize) -> Verification {
    let radices = scheme.data_radices();
    let protocol = scheme.protocol();
    let data_of = |idx: u64| {
        let mut d = vec![0u32; radices.len()];
        unrank(idx, &radices, &mut d);
        d
    };

    let first_counterexample = pass.first_failure.as_ref().map(|fail| {
        let data = data_of(fail.data);
        let mut expected = Vec::new();
        scheme.truth(&data, &mut expected);
        Counterexample {
            data,
            expected,
            decoded: fail.decoded.clone(),
        }
    });
    let correctness = CorrectnessReport {
        protocol,
        exhaustive: true,
        data_points: pass.data_points,
        checks: pass.combinations,
        failures: pass.failures,
        first_counterexample,
        passed: pass.failures == 0,
    };

    let total_entries: usize = pass
        .segments
        .iter()
        .map(|s| s.references.iter().map(Vec::len).sum::<usize>())
        .sum();
    let list = total_entries <= listed;
    let mut t = Vec::new();
    let segments = pass
        .segments
        .iter()
        .map(|seg| SegmentDistributions {
            name: seg.name.clone(),
            denominator: seg.denominator,
            groups: pass
                .groups
                .iter()
                .zip(&seg.references)
                .map(|((f, _, members), dist)| GroupDistribution {
                    f: f.clone(),
                    data_tuples: *members,
                    support: dist.len() as u64,
                    counts: list.then(|| {
                        dist.iter()
                            .map(|&(key, count)| {
                                unkey(key, &seg.radices, &mut t);
                                CountEntry {
                                    transcript: t.clone(),
                                    count,
                                }
                            })
                            .collect()
                    }),
                })
                .collect(),
        })
        .collect();

    let witness = pass.mismatch.as_ref().map(|m| {
        let seg = &pass.segments[m.segment];
        let data_a = data_of(m.reference);
        let data_b = data_of(m.other);
        let mut da = Vec::new();
        let mut db = Vec::new();
        distribution(scheme, &data_a, m.segment, &seg.radices, &mut da);
        distribution(scheme, &data_b, m.segment, &seg.radices, &mut db);
        let (key, count_a, count_b) = first_difference(&da, &db);
        unkey(key, &seg.radices, &mut t);
        Witness {
            segment: seg.name.clone(),
            f: pass.groups[m.group].0.clone(),
            data_a,
            data_b,
            transcript: t.clone(),
            count_a,
            count_b,
            denominator: seg.denominator,
        }
    });
    let security = SecurityReport {
        protocol,
        params: scheme.params(),
        segments,
        verdict: if witness.is_none() {
            SecurityVerdict::Secure
        } else {
            SecurityVerdict::Insecure
        },
        witness,
    };

    let per_segment: Vec<f64> = pass.segments.iter().map(|s| s.cmi).collect();
    let cmi = CmiReport {
        protocol,
        base: scheme.reference_dimension(),
        upper: per_segment.iter().sum(),
        lower: per_segment.iter().copied().fold(0.0, f64::max),
        per_segment,
        exactly_zero: pass.segments.iter().all(|s| s.exactly_zero),
    };

    Verification {
        label: scheme.label(),
        data_points: pass.data_points,
        evaluations: pass.evaluations,
        correctness,
        security,
        cmi,
    }
}

/// First transcript key where two sorted count vectors disagree.
fn first_difference(a: &[(u64, u64)], b: &[(u64, u64)]) -> (u64, u64, u64) {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (Some(&(ka, ca)), Some(&(kb, cb))) if ka == kb => {
                if ca != cb {
                    return (ka, ca, cb);
                }
                i += 1;
                j += 1;
            }
            (Some(&(ka, ca)), Some(&(kb, _))) if ka < kb => return (ka, ca, 0),
            (Some(_), Some(&(kb, cb))) => return (kb, 0, cb),
            (Some(&(ka, ca)), None) => return (ka, ca, 0),
            (None, Some(&(kb, cb))) => return (kb, 0, cb),
            (None, None) => unreachable!("count vectors differ"),
        }
    }
}

#[cfg(test)]
mod tests;
