//! Enumerable views of the protocols.
//!
//! A [`Scheme`] exposes the data space, the truth function, and for each
//! data tuple the weighted list of server transcripts over all common
//! randomness. Protocols whose randomness splits into independent parts
//! (the two phases of the product scheme) expose one *segment* per part;
//! the transcript distribution given the data is then the product of the
//! segment distributions.

use super::SchemeParams;
use crate::algebra::{bertrand_prime, FieldSpec};
use crate::channel::{AdditiveChannel, ChannelError};
use crate::protocols::{
    batch_len, cited_and_decode, cited_and_uses, dot_decode, dot_uses, new_and_decode,
    new_and_uses, phase_one_inputs, phase_two_inputs, prod_combine, sum_decode_into, sum_uses,
    uses_per_batch, ProtocolId, SumRandomness, CITED_AND_RANDOMNESS, DOT_MASKS, DOT_MODULUS,
    NEW_AND_RANDOMNESS,
};

pub trait Scheme: Sync {
    fn protocol(&self) -> ProtocolId;

    fn label(&self) -> String {
        self.protocol().name().to_string()
    }

    fn params(&self) -> SchemeParams;

    /// Radix of each data position; the data space is their product, enumerated
    /// lexicographically with position 0 most significant.
    fn data_radices(&self) -> Vec<u32>;

    /// The function the protocol must compute, written independently of it.
    fn truth(&self, data: &[u32], out: &mut Vec<u32>);

    fn output_alphabet(&self) -> u32;

    fn segment_count(&self) -> usize {
        1
    }

    fn segment_name(&self, _seg: usize) -> String {
        "transcript".into()
    }

    /// Upper bound on the randomness points enumerated per data tuple.
    fn randomness_points(&self, seg: usize) -> u64;

    fn transcript_radices(&self, seg: usize) -> Vec<u32>;

    /// Calls `sink(transcript, weight)` once per enumerated randomness point.
    fn outcomes(&self, data: &[u32], seg: usize, sink: &mut dyn FnMut(&[u32], u64));

    fn decode_segment(&self, seg: usize, transcript: &[u32], out: &mut Vec<u32>);

    fn combine(&self, partials: &[Vec<u32>], out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&partials[0]);
    }

    /// Logarithm base for entropies.
    fn reference_dimension(&self) -> u32;

    /// Channel-output evaluations an exhaustive pass performs.
    fn evaluations(&self) -> u128 {
        let n: u128 = self.data_radices().iter().map(|&r| r as u128).product();
        let per: u128 = (0..self.segment_count())
            .map(|s| self.randomness_points(s) as u128)
            .sum();
        n * per
    }
}

/// An [`AdditiveChannel`] that only records outputs.
#[derive(Debug, Default, Clone)]
pub struct Tap {
    pub outputs: Vec<u32>,
}

impl AdditiveChannel for Tap {
    #[inline]
    fn transmit(&mut self, _pair: (usize, usize), d: u32, a: u32, b: u32) -> Result<u32, ChannelError> {
        let y = (a + b) % d;
        self.outputs.push(y);
        Ok(y)
    }

    #[inline]
    fn send_direct(&mut self, _user: usize, _d: u32, value: u32) -> Result<u32, ChannelError> {
        self.outputs.push(value);
        Ok(value)
    }
}

/// Advances `digits` as a mixed-radix counter; false once it wraps to zero.
#[inline]
pub(crate) fn advance(digits: &mut [u32], radix: impl Fn(usize) -> u32) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

pub struct CitedAnd;

impl Scheme for CitedAnd {
    fn protocol(&self) -> ProtocolId {
        ProtocolId::Qs2AndCited
    }
    fn params(&self) -> SchemeParams {
        SchemeParams { d: 2, k: 2, l: 1 }
    }
    fn data_radices(&self) -> Vec<u32> {
        vec![2, 2]
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.push(data[0] & data[1]);
    }
    fn output_alphabet(&self) -> u32 {
        2
    }
    fn randomness_points(&self, _seg: usize) -> u64 {
        CITED_AND_RANDOMNESS.len() as u64
    }
    fn transcript_radices(&self, _seg: usize) -> Vec<u32> {
        vec![2, 2]
    }
    fn outcomes(&self, data: &[u32], _seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        let mut tap = Tap::default();
        for z in CITED_AND_RANDOMNESS {
            tap.outputs.clear();
            cited_and_uses(&mut tap, data[0], data[1], z).expect("inputs are in range");
            sink(&tap.outputs, 1);
        }
    }
    fn decode_segment(&self, _seg: usize, t: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.push(cited_and_decode(t));
    }
    fn reference_dimension(&self) -> u32 {
        2
    }
}

pub struct NewAnd;

impl Scheme for NewAnd {
    fn protocol(&self) -> ProtocolId {
        ProtocolId::Qs2AndNew
    }
    fn params(&self) -> SchemeParams {
        SchemeParams { d: 3, k: 2, l: 1 }
    }
    fn data_radices(&self) -> Vec<u32> {
        vec![2, 2]
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.push(data[0] & data[1]);
    }
    fn output_alphabet(&self) -> u32 {
        2
    }
    fn randomness_points(&self, _seg: usize) -> u64 {
        NEW_AND_RANDOMNESS.len() as u64
    }
    fn transcript_radices(&self, _seg: usize) -> Vec<u32> {
        vec![3]
    }
    fn outcomes(&self, data: &[u32], _seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        let mut tap = Tap::default();
        for z in NEW_AND_RANDOMNESS {
            tap.outputs.clear();
            new_and_uses(&mut tap, data[0], data[1], z).expect("inputs are in range");
            sink(&tap.outputs, 1);
        }
    }
    fn decode_segment(&self, _seg: usize, t: &[u32], out: &mut Vec<u32>) {
        out.clear();
        out.push(new_and_decode(t));
    }
    fn reference_dimension(&self) -> u32 {
        3
    }
}

pub struct DotDemo;

impl Scheme for DotDemo {
    fn protocol(&self) -> ProtocolId {
        ProtocolId::DotProduct
    }
    fn params(&self) -> SchemeParams {
        SchemeParams {
            d: DOT_MODULUS,
            k: 2,
            l: 1,
        }
    }
    /// Each user's 2-bit vector as the index `2 v_1 + v_2`.
    fn data_radices(&self) -> Vec<u32> {
        vec![4, 4]
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        let (a, b) = (data[0], data[1]);
        out.clear();
        out.push(((a >> 1) * (b >> 1) + (a & 1) * (b & 1)) % 2);
    }
    fn output_alphabet(&self) -> u32 {
        2
    }
    fn randomness_points(&self, _seg: usize) -> u64 {
        DOT_MASKS.len() as u64
    }
    fn transcript_radices(&self, _seg: usize) -> Vec<u32> {
        vec![DOT_MODULUS]
    }
    fn outcomes(&self, data: &[u32], _seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        let mut tap = Tap::default();
        for r in DOT_MASKS {
            tap.outputs.clear();
            dot_uses(&mut tap, data[0], data[1], r).expect("inputs are in range");
            sink(&tap.outputs, 1);
        }
    }
    fn decode_segment(&self, _seg: usize, t: &[u32], out: &mut Vec<u32>) {
        out.clear();
        // an unreachable output decodes to a value outside {0, 1}
        out.push(dot_decode(t[0]).unwrap_or(2));
    }
    fn reference_dimension(&self) -> u32 {
        DOT_MODULUS
    }
}

/// The modular sum scheme; `broken` forces every mask to zero.
pub struct Sum {
    pub d: u32,
    pub k: usize,
    pub broken: bool,
}

impl Sum {
    pub fn new(d: u32, k: usize) -> Self {
        Self { d, k, broken: false }
    }

    pub fn broken(d: u32, k: usize) -> Self {
        Self { d, k, broken: true }
    }

    fn free_count(&self) -> usize {
        if self.broken {
            0
        } else {
            SumRandomness::free_count(self.k)
        }
    }
}

impl Scheme for Sum {
    fn protocol(&self) -> ProtocolId {
        match (self.broken, self.k) {
            (true, _) => ProtocolId::BrokenQskSum,
            (false, 1) => ProtocolId::QskSumSingle,
            (false, k) if k % 2 == 0 => ProtocolId::QskSumEven,
            _ => ProtocolId::QskSumOdd,
        }
    }
    fn params(&self) -> SchemeParams {
        SchemeParams {
            d: self.d,
            k: self.k,
            l: batch_len(self.k),
        }
    }
    fn data_radices(&self) -> Vec<u32> {
        vec![self.d; self.k * batch_len(self.k)]
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        let l = batch_len(self.k);
        out.clear();
        for inst in 0..l {
            let s: u64 = (0..self.k).map(|u| data[u * l + inst] as u64).sum();
            out.push((s % self.d as u64) as u32);
        }
    }
    fn output_alphabet(&self) -> u32 {
        self.d
    }
    fn randomness_points(&self, _seg: usize) -> u64 {
        (self.d as u64).pow(self.free_count() as u32)
    }
    fn transcript_radices(&self, _seg: usize) -> Vec<u32> {
        vec![self.d; uses_per_batch(self.k)]
    }
    fn outcomes(&self, data: &[u32], _seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        let mut z = SumRandomness::zeroed(self.k);
        let mut free = vec![0u32; self.free_count()];
        let mut tap = Tap {
            outputs: Vec::with_capacity(uses_per_batch(self.k)),
        };
        loop {
            if !self.broken {
                z.set_free(self.d, &free);
            }
            tap.outputs.clear();
            sum_uses(&mut tap, self.d, self.k, data, &z).expect("inputs are in range");
            sink(&tap.outputs, 1);
            if !advance(&mut free, |_| self.d) {
                break;
            }
        }
    }
    fn decode_segment(&self, _seg: usize, t: &[u32], out: &mut Vec<u32>) {
        sum_decode_into(self.d, self.k, t, out);
    }
    fn reference_dimension(&self) -> u32 {
        self.d
    }
}

/// The field product scheme. Segment 0 is Phase I (masks `R` and the
/// `Z_p` sum masks); segment 1, present when `d > 2`, is Phase II (the
/// `Z_{d-1}` sum masks and the substitutes `W~`). Substitutes only matter at
/// zero data positions, so the others are fixed and weighted by `d - 1`.
pub struct Prod {
    pub field: FieldSpec,
    pub k: usize,
    pub id: ProtocolId,
}

impl Prod {
    pub fn new(field: FieldSpec, k: usize) -> Self {
        Self {
            field,
            k,
            id: ProtocolId::QskProd,
        }
    }

    fn d(&self) -> u32 {
        self.field.order()
    }

    fn p(&self) -> u32 {
        bertrand_prime(self.k as u32)
    }

    fn l(&self) -> usize {
        batch_len(self.k)
    }

    fn phase_two(&self) -> bool {
        self.k >= 2 && self.d() > 2
    }
}

impl Scheme for Prod {
    fn protocol(&self) -> ProtocolId {
        self.id
    }
    fn params(&self) -> SchemeParams {
        SchemeParams {
            d: self.d(),
            k: self.k,
            l: self.l(),
        }
    }
    fn data_radices(&self) -> Vec<u32> {
        vec![self.d(); self.k * self.l()]
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        let l = self.l();
        out.clear();
        for inst in 0..l {
            out.push((0..self.k).fold(1, |acc, u| self.field.mul_reference(acc, data[u * l + inst])));
        }
    }
    fn output_alphabet(&self) -> u32 {
        self.d()
    }
    fn segment_count(&self) -> usize {
        1 + usize::from(self.phase_two())
    }
    fn segment_name(&self, seg: usize) -> String {
        match (self.k, seg) {
            (1, _) => "transcript".into(),
            (_, 0) => "phase-1".into(),
            _ => "phase-2".into(),
        }
    }
    fn randomness_points(&self, seg: usize) -> u64 {
        let fc = SumRandomness::free_count(self.k) as u32;
        match (self.k, seg) {
            (1, _) => 1,
            (_, 0) => ((self.p() - 1) as u64).pow(self.l() as u32) * (self.p() as u64).pow(fc),
            _ => ((self.d() - 1) as u64).pow(fc + (self.k * self.l()) as u32),
        }
    }
    fn evaluations(&self) -> u128 {
        let n = (self.d() as u128).pow((self.k * self.l()) as u32);
        let mut total = n * self.randomness_points(0) as u128;
        if self.phase_two() {
            // sum over data of (d-1)^{#zeros} is (2(d-1))^{KL}
            let fc = SumRandomness::free_count(self.k) as u32;
            let g = (self.d() - 1) as u128;
            total += g.pow(fc) * (2 * g).pow((self.k * self.l()) as u32);
        }
        total
    }
    fn transcript_radices(&self, seg: usize) -> Vec<u32> {
        match (self.k, seg) {
            (1, _) => vec![self.d()],
            (_, 0) => vec![self.p(); uses_per_batch(self.k)],
            _ => vec![self.d() - 1; uses_per_batch(self.k)],
        }
    }
    fn outcomes(&self, data: &[u32], seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        let k = self.k;
        if k == 1 {
            sink(&data[..1], 1);
            return;
        }
        let l = self.l();
        let mut tap = Tap {
            outputs: Vec::with_capacity(uses_per_batch(k)),
        };
        let mut inputs = Vec::with_capacity(data.len());
        let mut z = SumRandomness::zeroed(k);
        let mut free = vec![0u32; SumRandomness::free_count(k)];
        if seg == 0 {
            let p = self.p();
            let mut mask = vec![1u32; l];
            loop {
                phase_one_inputs(p, data, &mask, &mut inputs);
                loop {
                    z.set_free(p, &free);
                    tap.outputs.clear();
                    sum_uses(&mut tap, p, k, &inputs, &z).expect("inputs are in range");
                    sink(&tap.outputs, 1);
                    if !advance(&mut free, |_| p) {
                        break;
                    }
                }
                // masks run over 1..p
                let mut carry = true;
                for m in mask.iter_mut().rev() {
                    *m += 1;
                    if *m < p {
                        carry = false;
                        break;
                    }
                    *m = 1;
                }
                if carry {
                    break;
                }
            }
            return;
        }
        let g = self.d() - 1;
        let zeros: Vec<usize> = (0..data.len()).filter(|&i| data[i] == 0).collect();
        let weight = (g as u64).pow((data.len() - zeros.len()) as u32);
        let mut fill = vec![1u32; data.len()];
        let mut sub = vec![0u32; zeros.len()];
        loop {
            for (&pos, &s) in zeros.iter().zip(&sub) {
                fill[pos] = s + 1;
            }
            phase_two_inputs(&self.field, data, &fill, &mut inputs);
            loop {
                z.set_free(g, &free);
                tap.outputs.clear();
                sum_uses(&mut tap, g, k, &inputs, &z).expect("inputs are in range");
                sink(&tap.outputs, weight);
                if !advance(&mut free, |_| g) {
                    break;
                }
            }
            if !advance(&mut sub, |_| g) {
                break;
            }
        }
    }
    fn decode_segment(&self, seg: usize, t: &[u32], out: &mut Vec<u32>) {
        match (self.k, seg) {
            (1, _) => {
                out.clear();
                out.push(t[0]);
            }
            (_, 0) => sum_decode_into(self.p(), self.k, t, out),
            _ => sum_decode_into(self.d() - 1, self.k, t, out),
        }
    }
    fn combine(&self, partials: &[Vec<u32>], out: &mut Vec<u32>) {
        out.clear();
        if self.k == 1 {
            out.extend_from_slice(&partials[0]);
            return;
        }
        let empty = Vec::new();
        out.extend(prod_combine(&self.field, &partials[0], partials.get(1).unwrap_or(&empty)));
    }
    fn reference_dimension(&self) -> u32 {
        self.d()
    }
}

/// Merges all segments of `S` into one by enumerating their product.
/// Only feasible for small parameters; used to cross-check the factorized pass.
pub struct Joint<S>(pub S);

impl<S: Scheme> Scheme for Joint<S> {
    fn protocol(&self) -> ProtocolId {
        self.0.protocol()
    }
    fn label(&self) -> String {
        format!("{} (joint)", self.0.label())
    }
    fn params(&self) -> SchemeParams {
        self.0.params()
    }
    fn data_radices(&self) -> Vec<u32> {
        self.0.data_radices()
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        self.0.truth(data, out)
    }
    fn output_alphabet(&self) -> u32 {
        self.0.output_alphabet()
    }
    fn randomness_points(&self, _seg: usize) -> u64 {
        (0..self.0.segment_count())
            .map(|s| self.0.randomness_points(s))
            .product()
    }
    fn evaluations(&self) -> u128 {
        let n: u128 = self.data_radices().iter().map(|&r| r as u128).product();
        n * self.randomness_points(0) as u128
    }
    fn transcript_radices(&self, _seg: usize) -> Vec<u32> {
        (0..self.0.segment_count())
            .flat_map(|s| self.0.transcript_radices(s))
            .collect()
    }
    fn outcomes(&self, data: &[u32], _seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        let lists: Vec<Vec<(Vec<u32>, u64)>> = (0..self.0.segment_count())
            .map(|s| {
                let mut v = Vec::new();
                self.0.outcomes(data, s, &mut |t, w| v.push((t.to_vec(), w)));
                v
            })
            .collect();
        let mut idx = vec![0u32; lists.len()];
        let mut t = Vec::new();
        loop {
            t.clear();
            let mut w = 1;
            for (list, &i) in lists.iter().zip(&idx) {
                t.extend_from_slice(&list[i as usize].0);
                w *= list[i as usize].1;
            }
            sink(&t, w);
            if !advance(&mut idx, |j| lists[j].len() as u32) {
                break;
            }
        }
    }
    fn decode_segment(&self, _seg: usize, t: &[u32], out: &mut Vec<u32>) {
        let mut partials = Vec::new();
        let mut rest = t;
        for s in 0..self.0.segment_count() {
            let n = self.0.transcript_radices(s).len();
            let mut part = Vec::new();
            self.0.decode_segment(s, &rest[..n], &mut part);
            partials.push(part);
            rest = &rest[n..];
        }
        self.0.combine(&partials, out);
    }
    fn reference_dimension(&self) -> u32 {
        self.0.reference_dimension()
    }
}

/// Negative control: shifts the first decoded symbol.
pub struct CorruptedDecode<S>(pub S);

impl<S: Scheme> Scheme for CorruptedDecode<S> {
    fn protocol(&self) -> ProtocolId {
        self.0.protocol()
    }
    fn label(&self) -> String {
        format!("{} (corrupted decode)", self.0.label())
    }
    fn params(&self) -> SchemeParams {
        self.0.params()
    }
    fn data_radices(&self) -> Vec<u32> {
        self.0.data_radices()
    }
    fn truth(&self, data: &[u32], out: &mut Vec<u32>) {
        self.0.truth(data, out)
    }
    fn output_alphabet(&self) -> u32 {
        self.0.output_alphabet()
    }
    fn segment_count(&self) -> usize {
        self.0.segment_count()
    }
    fn segment_name(&self, seg: usize) -> String {
        self.0.segment_name(seg)
    }
    fn randomness_points(&self, seg: usize) -> u64 {
        self.0.randomness_points(seg)
    }
    fn evaluations(&self) -> u128 {
        self.0.evaluations()
    }
    fn transcript_radices(&self, seg: usize) -> Vec<u32> {
        self.0.transcript_radices(seg)
    }
    fn outcomes(&self, data: &[u32], seg: usize, sink: &mut dyn FnMut(&[u32], u64)) {
        self.0.outcomes(data, seg, sink)
    }
    fn decode_segment(&self, seg: usize, t: &[u32], out: &mut Vec<u32>) {
        self.0.decode_segment(seg, t, out)
    }
    fn combine(&self, partials: &[Vec<u32>], out: &mut Vec<u32>) {
        self.0.combine(partials, out);
        out[0] = (out[0] + 1) % self.output_alphabet();
    }
    fn reference_dimension(&self) -> u32 {
        self.0.reference_dimension()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_field;
    use crate::protocols::{qsk_prod, sum_decode, DataMatrix, ProdRandomness};
    use crate::channel::Session;
    use std::collections::BTreeMap;

    fn collect(s: &dyn Scheme, data: &[u32], seg: usize) -> BTreeMap<Vec<u32>, u64> {
        let mut m = BTreeMap::new();
        s.outcomes(data, seg, &mut |t, w| *m.entry(t.to_vec()).or_insert(0) += w);
        m
    }

    #[test]
    fn advance_counts_mixed_radix() {
        let mut d = vec![0, 0];
        let mut seen = vec![d.clone()];
        while advance(&mut d, |i| [2, 3][i]) {
            seen.push(d.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[3], vec![1, 0]);
        let mut empty: Vec<u32> = vec![];
        assert!(!advance(&mut empty, |_| 2));
    }

    #[test]
    fn sum_outcome_counts() {
        let s = Sum::new(3, 5);
        let data = vec![0; 10];
        let mut n = 0;
        s.outcomes(&data, 0, &mut |t, w| {
            assert_eq!(t.len(), 5);
            n += w;
        });
        assert_eq!(n, 27);
        assert_eq!(s.evaluations(), 3u128.pow(10) * 27);
        let b = Sum::broken(3, 5);
        assert_eq!(collect(&b, &data, 0).len(), 1);
    }

    #[test]
    fn prod_segment_weights_are_constant() {
        let f = build_field(2, 2).unwrap();
        let s = Prod::new(f, 3);
        for data in [[0u32, 0, 0, 0, 0, 0], [1, 2, 3, 0, 1, 2], [1, 1, 1, 1, 1, 1]] {
            let total: u64 = collect(&s, &data, 1).values().sum();
            // (d-1)^{free Z} times (d-1)^{KL} substitutes
            assert_eq!(total, 3u64.pow(1 + 6));
            let total: u64 = collect(&s, &data, 0).values().sum();
            assert_eq!(total, 4 * 4 * 5);
        }
    }

    #[test]
    fn substitutes_at_nonzero_positions_do_not_matter() {
        // the marginalization above relies on this
        let f = build_field(7, 1).unwrap();
        let data = [3u32, 0, 5];
        let mut seen = BTreeMap::new();
        for a in 1..7 {
            for b in 1..7 {
                for c in 1..7 {
                    let mut inputs = Vec::new();
                    phase_two_inputs(&f, &data, &[a, b, c], &mut inputs);
                    seen.entry(b).or_insert_with(Vec::new).push(inputs);
                }
            }
        }
        for list in seen.values() {
            assert!(list.iter().all(|x| x == &list[0]));
        }
    }

    #[test]
    fn prod_outcomes_match_protocol_runs() {
        let f = build_field(5, 1).unwrap();
        let s = Prod::new(f.clone(), 2);
        let data = [2u32, 0];
        let phase_one = collect(&s, &data, 0);
        let phase_two = collect(&s, &data, 1);
        let mut from_runs: BTreeMap<(Vec<u32>, Vec<u32>), u64> = BTreeMap::new();
        // p = 3 for K = 2, so R runs over {1, 2}
        for r in 1..3 {
            for fill0 in 1..5 {
                for fill1 in 1..5 {
                    let rand = ProdRandomness {
                        mask: vec![r],
                        phase_one: SumRandomness::zeroed(2),
                        phase_two: Some(SumRandomness::zeroed(2)),
                        fill: vec![fill0, fill1],
                    };
                    let mut sess = Session::default();
                    let w = DataMatrix::column(5, &data).unwrap();
                    let run = qsk_prod(&mut sess, &f, 2, &w, &rand).unwrap();
                    let ys = run.transcript.outputs();
                    *from_runs.entry((ys[..1].to_vec(), ys[1..].to_vec())).or_insert(0) += 1;
                }
            }
        }
        let runs: u64 = from_runs.values().sum();
        let mut p1: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        let mut p2: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for ((a, b), c) in &from_runs {
            *p1.entry(a.clone()).or_insert(0) += c;
            *p2.entry(b.clone()).or_insert(0) += c;
        }
        for (seg, marginal) in [(&phase_one, &p1), (&phase_two, &p2)] {
            let total: u64 = seg.values().sum();
            assert_eq!(seg.keys().collect::<Vec<_>>(), marginal.keys().collect::<Vec<_>>());
            for (t, c) in seg {
                assert_eq!(c * runs, marginal[t] * total);
            }
        }
        // the two phases are independent given the data
        for ((a, b), c) in &from_runs {
            assert_eq!(c * runs, p1[a] * p2[b]);
        }
    }

    #[test]
    fn joint_concatenates_segments() {
        let f = build_field(3, 1).unwrap();
        let j = Joint(Prod::new(f, 2));
        let mut total = 0;
        j.outcomes(&[1, 2], 0, &mut |t, w| {
            assert_eq!(t.len(), 2);
            let mut out = Vec::new();
            j.decode_segment(0, t, &mut out);
            assert_eq!(out, vec![2]);
            total += w;
        });
        assert_eq!(total, 2 * 2 * 2);
    }

    #[test]
    fn corrupted_decode_shifts_output() {
        let c = CorruptedDecode(Sum::new(4, 2));
        let mut out = Vec::new();
        c.combine(&[sum_decode(4, 2, &[3])], &mut out);
        assert_eq!(out, vec![0]);
    }
}
