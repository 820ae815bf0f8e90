//! The single exhaustive pass behind correctness, security and CMI.
//!
//! Per data tuple and segment the engine collects the weighted transcripts,
//! merges them into a sorted count vector, compares it with the reference
//! vector of the tuple's F-group, and accumulates `S_f(y) = sum c` and
//! `Q_f(y) = sum c^2` over the group. Conditional mutual information is zero
//! exactly when `N_f Q_f(y) = S_f(y)^2` everywhere, i.e. every member of the
//! group has the same count vector.
//!
//! Work is split into a fixed number of chunks of the data space; integer
//! accumulators merge in any order and floating-point partial sums are added
//! in chunk order, so results do not depend on the thread count.

use super::schemes::{advance, Scheme};
use super::VerifyError;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

const CHUNKS: u64 = 64;
const DENSE_CELLS: u128 = 1 << 18;
const CLNC_TABLE: u64 = 1 << 22;

/// Sorted `(transcript key, count)` pairs.
pub(crate) type Dist = Vec<(u64, u64)>;

pub(crate) struct SegmentResult {
    pub name: String,
    pub radices: Vec<u32>,
    pub denominator: u64,
    /// Reference count vector per F-group, in group order.
    pub references: Vec<Dist>,
    pub cmi: f64,
    pub exactly_zero: bool,
}

pub(crate) struct Mismatch {
    pub segment: usize,
    pub group: usize,
    pub reference: u64,
    pub other: u64,
}

pub(crate) struct Failure {
    pub data: u64,
    pub decoded: Vec<u32>,
}

pub(crate) struct PassResult {
    pub data_points: u64,
    pub evaluations: u128,
    /// `(F value, index of its first data tuple, member count)` in F order.
    pub groups: Vec<(Vec<u32>, u64, u64)>,
    pub segments: Vec<SegmentResult>,
    pub mismatch: Option<Mismatch>,
    pub combinations: u64,
    pub failures: u64,
    pub first_failure: Option<Failure>,
}

pub(crate) fn data_space(scheme: &dyn Scheme) -> Result<u64, VerifyError> {
    let n: u128 = scheme.data_radices().iter().map(|&r| r as u128).product();
    u64::try_from(n).map_err(|_| VerifyError::LimitExceeded {
        evaluations: u128::MAX,
        limit: 0,
    })
}

pub(crate) fn unrank(mut idx: u64, radices: &[u32], out: &mut [u32]) {
    for i in (0..radices.len()).rev() {
        out[i] = (idx % radices[i] as u64) as u32;
        idx /= radices[i] as u64;
    }
}

#[inline]
fn key_of(t: &[u32], radices: &[u32]) -> u64 {
    t.iter().zip(radices).fold(0u64, |k, (&y, &r)| k * r as u64 + y as u64)
}

pub(crate) fn unkey(mut key: u64, radices: &[u32], out: &mut Vec<u32>) {
    out.clear();
    out.resize(radices.len(), 0);
    for i in (0..radices.len()).rev() {
        out[i] = (key % radices[i] as u64) as u32;
        key /= radices[i] as u64;
    }
}

fn f_index(f: &[u32], alphabet: u32) -> u64 {
    f.iter().fold(0u64, |k, &v| k * alphabet as u64 + v as u64)
}

/// The count vector of one data tuple for one segment.
pub(crate) fn distribution(scheme: &dyn Scheme, data: &[u32], seg: usize, radices: &[u32], buf: &mut Dist) {
    buf.clear();
    scheme.outcomes(data, seg, &mut |t, w| buf.push((key_of(t, radices), w)));
    buf.sort_unstable_by_key(|e| e.0);
    let mut out = 0;
    for i in 0..buf.len() {
        if out > 0 && buf[out - 1].0 == buf[i].0 {
            buf[out - 1].1 += buf[i].1;
        } else {
            buf[out] = buf[i];
            out += 1;
        }
    }
    buf.truncate(out);
}

enum Moments {
    Dense { space: u64, s: Vec<u64>, q: Vec<u128> },
    Sparse(HashMap<(usize, u64), (u64, u128)>),
}

impl Moments {
    fn new(groups: usize, space: u128) -> Self {
        if space * groups as u128 <= DENSE_CELLS {
            let cells = space as usize * groups;
            Moments::Dense {
                space: space as u64,
                s: vec![0; cells],
                q: vec![0; cells],
            }
        } else {
            Moments::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn add(&mut self, group: usize, key: u64, c: u64) {
        match self {
            Moments::Dense { space, s, q } => {
                let i = group * *space as usize + key as usize;
                s[i] += c;
                q[i] += c as u128 * c as u128;
            }
            Moments::Sparse(m) => {
                let e = m.entry((group, key)).or_insert((0, 0));
                e.0 += c;
                e.1 += c as u128 * c as u128;
            }
        }
    }

    fn merge(&mut self, other: Moments) {
        match (self, other) {
            (Moments::Dense { s, q, .. }, Moments::Dense { s: s2, q: q2, .. }) => {
                s.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
                q.iter_mut().zip(q2).for_each(|(a, b)| *a += b);
            }
            (Moments::Sparse(m), Moments::Sparse(m2)) => {
                for (k, (s, q)) in m2 {
                    let e = m.entry(k).or_insert((0, 0));
                    e.0 += s;
                    e.1 += q;
                }
            }
            _ => unreachable!("moment stores share a layout"),
        }
    }

    /// `(group, S, Q)` for every touched cell, ordered by group then key.
    fn cells(&self) -> Vec<(usize, u64, u128)> {
        match self {
            Moments::Dense { space, s, q } => s
                .iter()
                .zip(q)
                .enumerate()
                .filter(|(_, (&s, _))| s > 0)
                .map(|(i, (&s, &q))| (i / *space as usize, s, q))
                .collect(),
            Moments::Sparse(m) => {
                let mut v: Vec<_> = m.iter().map(|(&(g, k), &(s, q))| (g, k, s, q)).collect();
                v.sort_unstable_by_key(|e| (e.0, e.1));
                v.into_iter().map(|(g, _, s, q)| (g, s, q)).collect()
            }
        }
    }
}

struct Acc {
    moments: Vec<Moments>,
    /// `(chunk, per-segment sum of c ln c)`.
    clnc: Vec<(u64, Vec<f64>)>,
    members: Vec<u64>,
    mismatch: Option<(u64, usize)>,
    combinations: u64,
    failures: u64,
    first_failure: Option<(u64, Vec<u32>)>,
    bad_weight: Option<(u64, usize, u64)>,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.moments.iter_mut().zip(other.moments) {
            a.merge(b);
        }
        self.clnc.extend(other.clnc);
        self.members.iter_mut().zip(&other.members).for_each(|(a, b)| *a += b);
        self.mismatch = min_by_key(self.mismatch, other.mismatch, |m| m.0);
        self.combinations += other.combinations;
        self.failures += other.failures;
        self.first_failure = min_by_key(self.first_failure, other.first_failure, |f| f.0);
        self.bad_weight = min_by_key(self.bad_weight, other.bad_weight, |b| b.0);
        self
    }
}

fn min_by_key<T, K: Ord>(a: Option<T>, b: Option<T>, key: impl Fn(&T) -> K) -> Option<T> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if key(&b) < key(&a) { b } else { a }),
        (a, b) => a.or(b),
    }
}

fn clnc(c: u64, table: Option<&[f64]>) -> f64 {
    match table {
        Some(t) => t[c as usize],
        None => {
            let c = c as f64;
            c * c.ln()
        }
    }
}

pub(crate) fn run_pass(scheme: &dyn Scheme, limit: u128) -> Result<PassResult, VerifyError> {
    let evaluations = scheme.evaluations();
    if evaluations > limit {
        return Err(VerifyError::LimitExceeded { evaluations, limit });
    }
    let radices = scheme.data_radices();
    let n = data_space(scheme)?;
    let alphabet = scheme.output_alphabet();
    let segs = scheme.segment_count();
    let seg_radices: Vec<Vec<u32>> = (0..segs).map(|s| scheme.transcript_radices(s)).collect();

    // first data tuple of every F value, in F order
    let mut data = vec![0u32; radices.len()];
    let mut f = Vec::new();
    let mut firsts: BTreeMap<u64, (Vec<u32>, u64)> = BTreeMap::new();
    let reachable = (alphabet as u128).pow({
        scheme.truth(&data, &mut f);
        f.len() as u32
    });
    for idx in 0..n {
        if idx > 0 {
            advance(&mut data, |i| radices[i]);
        }
        scheme.truth(&data, &mut f);
        firsts.entry(f_index(&f, alphabet)).or_insert_with(|| (f.clone(), idx));
        if firsts.len() as u128 == reachable {
            break;
        }
    }
    let group_of: HashMap<u64, usize> = firsts.keys().enumerate().map(|(g, &k)| (k, g)).collect();
    let group_list: Vec<(Vec<u32>, u64)> = firsts.into_values().collect();
    let groups = group_list.len();

    let mut references: Vec<Vec<Dist>> = vec![Vec::with_capacity(groups); segs];
    for (_, idx) in &group_list {
        unrank(*idx, &radices, &mut data);
        for (s, refs) in references.iter_mut().enumerate() {
            let mut d = Vec::new();
            distribution(scheme, &data, s, &seg_radices[s], &mut d);
            refs.push(d);
        }
    }
    let denominators: Vec<u64> = references
        .iter()
        .map(|r| r[0].iter().map(|e| e.1).sum())
        .collect();
    let tables: Vec<Option<Vec<f64>>> = denominators
        .iter()
        .map(|&t| {
            (t <= CLNC_TABLE).then(|| {
                (0..=t)
                    .map(|c| if c == 0 { 0.0 } else { c as f64 * (c as f64).ln() })
                    .collect()
            })
        })
        .collect();
    let spaces: Vec<u128> = seg_radices
        .iter()
        .map(|r| r.iter().map(|&x| x as u128).product())
        .collect();
    if spaces.iter().any(|&s| s > u64::MAX as u128 / groups.max(1) as u128) {
        return Err(VerifyError::Internal("transcript space does not fit in 64-bit keys".into()));
    }

    let chunks = CHUNKS.min(n).max(1);
    let new_acc = || Acc {
        moments: spaces.iter().map(|&s| Moments::new(groups, s)).collect(),
        clnc: Vec::new(),
        members: vec![0; groups],
        mismatch: None,
        combinations: 0,
        failures: 0,
        first_failure: None,
        bad_weight: None,
    };

    // one accumulator per worker, not per chunk
    let per_worker = (chunks as usize).div_ceil(rayon::current_num_threads()).max(1);
    let acc = (0..chunks as usize)
        .into_par_iter()
        .map(|c| c as u64)
        .with_min_len(per_worker)
        .fold(new_acc, |mut acc, chunk| {
            let start = n * chunk / chunks;
            let end = n * (chunk + 1) / chunks;
            let mut data = vec![0u32; radices.len()];
            unrank(start, &radices, &mut data);
            let mut f = Vec::new();
            let mut buf: Dist = Vec::new();
            let mut t = Vec::new();
            let mut part = Vec::new();
            let mut out = Vec::new();
            let mut partials: Vec<Vec<Vec<u32>>> = vec![Vec::new(); segs];
            let mut sums = vec![0f64; segs];
            let mut pick = vec![0u32; segs];
            let mut chosen: Vec<Vec<u32>> = vec![Vec::new(); segs];
            for idx in start..end {
                if idx > start {
                    advance(&mut data, |i| radices[i]);
                }
                scheme.truth(&data, &mut f);
                let g = group_of[&f_index(&f, alphabet)];
                acc.members[g] += 1;
                for s in 0..segs {
                    distribution(scheme, &data, s, &seg_radices[s], &mut buf);
                    if buf != references[s][g] && acc.mismatch.map_or(true, |m| idx < m.0) {
                        acc.mismatch = Some((idx, s));
                    }
                    let total: u64 = buf.iter().map(|e| e.1).sum();
                    if total != denominators[s] && acc.bad_weight.is_none() {
                        acc.bad_weight = Some((idx, s, total));
                    }
                    let table = tables[s].as_deref();
                    partials[s].clear();
                    for &(key, c) in &buf {
                        acc.moments[s].add(g, key, c);
                        sums[s] += clnc(c, table);
                        unkey(key, &seg_radices[s], &mut t);
                        scheme.decode_segment(s, &t, &mut part);
                        if !partials[s].contains(&part) {
                            partials[s].push(part.clone());
                        }
                    }
                }
                // every combination of segment decodes is reachable
                pick.iter_mut().for_each(|p| *p = 0);
                loop {
                    for s in 0..segs {
                        chosen[s].clone_from(&partials[s][pick[s] as usize]);
                    }
                    scheme.combine(&chosen, &mut out);
                    acc.combinations += 1;
                    if out != f {
                        acc.failures += 1;
                        if acc.first_failure.as_ref().map_or(true, |e| idx < e.0) {
                            acc.first_failure = Some((idx, out.clone()));
                        }
                    }
                    if !advance(&mut pick, |s| partials[s].len() as u32) {
                        break;
                    }
                }
            }
            acc.clnc.push((chunk, sums));
            acc
        })
        .reduce(new_acc, Acc::merge);

    let mut acc = acc;
    if let Some((idx, s, total)) = acc.bad_weight {
        return Err(VerifyError::Internal(format!(
            "data tuple {idx} has total weight {total} in segment {s}, expected {}",
            denominators[s]
        )));
    }
    acc.clnc.sort_by_key(|e| e.0);

    let ln_base = (scheme.reference_dimension() as f64).ln();
    let nf = n as f64;
    let mut segments = Vec::with_capacity(segs);
    for (s, refs) in references.into_iter().enumerate() {
        let t = denominators[s];
        let tf = t as f64;
        let within: f64 = acc.clnc.iter().map(|e| e.1[s]).sum();
        let h_given_w = tf.ln() - within / (nf * tf);
        let cells = acc.moments[s].cells();
        let mut exactly_zero = true;
        let mut group_clnc = vec![0f64; groups];
        for &(g, sum, sq) in &cells {
            if acc.members[g] as u128 * sq != sum as u128 * sum as u128 {
                exactly_zero = false;
            }
            let sf = sum as f64;
            group_clnc[g] += sf * sf.ln();
        }
        let mut h_given_f = 0.0;
        for g in 0..groups {
            let mass = acc.members[g] as f64 * tf;
            if mass > 0.0 {
                h_given_f += (acc.members[g] as f64 / nf) * (mass.ln() - group_clnc[g] / mass);
            }
        }
        let cmi = if exactly_zero {
            0.0
        } else {
            ((h_given_f - h_given_w) / ln_base).max(0.0)
        };
        segments.push(SegmentResult {
            name: scheme.segment_name(s),
            radices: seg_radices[s].clone(),
            denominator: t,
            references: refs,
            cmi,
            exactly_zero,
        });
    }

    let mismatch = acc.mismatch.map(|(idx, s)| {
        let mut data = vec![0u32; radices.len()];
        let mut f = Vec::new();
        unrank(idx, &radices, &mut data);
        scheme.truth(&data, &mut f);
        let g = group_of[&f_index(&f, alphabet)];
        Mismatch {
            segment: s,
            group: g,
            reference: group_list[g].1,
            other: idx,
        }
    });

    Ok(PassResult {
        data_points: n,
        evaluations,
        groups: group_list
            .into_iter()
            .zip(&acc.members)
            .map(|((f, first), &m)| (f, first, m))
            .collect(),
        segments,
        mismatch,
        combinations: acc.combinations,
        failures: acc.failures,
        first_failure: acc.first_failure.map(|(data, decoded)| Failure { data, decoded }),
    })
}
