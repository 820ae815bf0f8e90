//! Secure K-user modular sum.
//!
//! Even `K`: users `(2i-1, 2i)` share one channel use carrying
//! `W_{2i-1} + W_{2i} + Z_i`, with the `Z_i` summing to zero, so `K/2` uses
//! deliver one sum.
//!
//! Odd `K >= 3`: two instances are encoded together in `K` uses. Users 1, 2
//! and 3 use the channel once per pair with the cross terms and the shared
//! `Z_0` arranged so that both instance sums are recoverable; the remaining
//! pairs `(2i, 2i+1)` send each instance masked by `Z_i(l)`, where
//! `Z_1(l) + ... + Z_{(K-1)/2}(l) = 0`.

use super::{finish_run, CommonRandomness, DataMatrix, ProtocolError, ProtocolId, ProtocolRun};
use crate::algebra::{add_mod, neg_mod, sub_mod};
use crate::channel::{AdditiveChannel, ChannelError, Session};
use rand::Rng;

/// Instances encoded together: 2 for odd `K >= 3`, otherwise 1.
pub fn batch_len(k: usize) -> usize {
    if k >= 3 && k % 2 == 1 {
        2
    } else {
        1
    }
}

/// Channel uses spent on one batch.
pub fn uses_per_batch(k: usize) -> usize {
    match k {
        0 | 1 => 1,
        k if k % 2 == 0 => k / 2,
        k => k,
    }
}

/// Masks for one batch of the sum scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SumRandomness {
    /// `K = 1`: nothing to hide.
    Single,
    /// `Z_1..Z_{K/2}` with zero sum.
    Even { z: Vec<u32> },
    /// `Z_0` and `Z_i(l)` for `i = 1..(K-1)/2`, `l = 1, 2`; each column sums to zero.
    Odd { z0: u32, z: Vec<[u32; 2]> },
}

impl SumRandomness {
    /// Number of free uniform symbols (`Z_1` is determined by the rest).
    pub fn free_count(k: usize) -> usize {
        match k {
            0 | 1 => 0,
            k if k % 2 == 0 => k / 2 - 1,
            k => k - 2,
        }
    }

    /// All-zero masks; the broken negative-control variant uses these.
    pub fn zeroed(k: usize) -> Self {
        match k {
            0 | 1 => SumRandomness::Single,
            k if k % 2 == 0 => SumRandomness::Even { z: vec![0; k / 2] },
            k => SumRandomness::Odd {
                z0: 0,
                z: vec![[0, 0]; (k - 1) / 2],
            },
        }
    }

    /// Builds masks from the free symbols, in the order
    /// even: `Z_2..Z_{K/2}`; odd: `Z_0, Z_2(1), Z_2(2), Z_3(1), ...`.
    pub fn from_free(d: u32, k: usize, free: &[u32]) -> Result<Self, ProtocolError> {
        if free.len() != Self::free_count(k) {
            return Err(ProtocolError::InvalidRandomness(format!(
                "K = {k} needs {} free symbols, got {}",
                Self::free_count(k),
                free.len()
            )));
        }
        if let Some(&v) = free.iter().find(|&&v| v >= d) {
            return Err(ProtocolError::InvalidRandomness(format!(
                "randomness symbol {v} outside Z_{d}"
            )));
        }
        let mut out = Self::zeroed(k);
        out.set_free(d, free);
        Ok(out)
    }

    /// In-place version of [`SumRandomness::from_free`] without checks.
    pub fn set_free(&mut self, d: u32, free: &[u32]) {
        match self {
            SumRandomness::Single => {}
            SumRandomness::Even { z } => {
                let mut acc = 0;
                for (slot, &v) in z[1..].iter_mut().zip(free) {
                    *slot = v;
                    acc = add_mod(acc, v, d);
                }
                z[0] = neg_mod(acc, d);
            }
            SumRandomness::Odd { z0, z } => {
                *z0 = free[0];
                let mut acc = [0, 0];
                for (slot, pair) in z[1..].iter_mut().zip(free[1..].chunks_exact(2)) {
                    *slot = [pair[0], pair[1]];
                    acc[0] = add_mod(acc[0], pair[0], d);
                    acc[1] = add_mod(acc[1], pair[1], d);
                }
                z[0] = [neg_mod(acc[0], d), neg_mod(acc[1], d)];
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(d: u32, k: usize, rng: &mut R) -> Self {
        let free: Vec<u32> = (0..Self::free_count(k)).map(|_| rng.gen_range(0..d)).collect();
        let mut out = Self::zeroed(k);
        out.set_free(d, &free);
        out
    }

    /// Checks the variant, lengths, ranges and the zero-sum constraint.
    pub fn validate(&self, d: u32, k: usize) -> Result<(), ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::InvalidRandomness(msg));
        match (self, k) {
            (SumRandomness::Single, 1) => Ok(()),
            (SumRandomness::Even { z }, k) if k >= 2 && k % 2 == 0 => {
                if z.len() != k / 2 {
                    return bad(format!("expected {} masks, got {}", k / 2, z.len()));
                }
                if z.iter().any(|&v| v >= d) {
                    return bad(format!("mask outside Z_{d}"));
                }
                if z.iter().fold(0, |acc, &v| add_mod(acc, v, d)) != 0 {
                    return bad("masks do not sum to zero".into());
                }
                Ok(())
            }
            (SumRandomness::Odd { z0, z }, k) if k >= 3 && k % 2 == 1 => {
                if z.len() != (k - 1) / 2 {
                    return bad(format!("expected {} mask pairs, got {}", (k - 1) / 2, z.len()));
                }
                if *z0 >= d || z.iter().flatten().any(|&v| v >= d) {
                    return bad(format!("mask outside Z_{d}"));
                }
                for l in 0..2 {
                    if z.iter().fold(0, |acc, pair| add_mod(acc, pair[l], d)) != 0 {
                        return bad(format!("masks for instance {} do not sum to zero", l + 1));
                    }
                }
                Ok(())
            }
            _ => bad(format!("randomness variant does not match K = {k}")),
        }
    }

    pub fn record(&self, into: CommonRandomness, prefix: &str) -> CommonRandomness {
        match self {
            SumRandomness::Single => into,
            SumRandomness::Even { z } => into.with(&format!("{prefix}Z"), z.clone()),
            SumRandomness::Odd { z0, z } => into
                .with(&format!("{prefix}Z0"), vec![*z0])
                .with(&format!("{prefix}Z(1)"), z.iter().map(|p| p[0]).collect())
                .with(&format!("{prefix}Z(2)"), z.iter().map(|p| p[1]).collect()),
        }
    }
}

/// Pushes one batch through the channel. `w` is user-major `K x batch_len(K)`.
pub fn sum_uses<C: AdditiveChannel>(
    ch: &mut C,
    d: u32,
    k: usize,
    w: &[u32],
    z: &SumRandomness,
) -> Result<(), ChannelError> {
    match z {
        SumRandomness::Single => {
            ch.send_direct(1, d, w[0])?;
        }
        SumRandomness::Even { z } => {
            for i in 1..=k / 2 {
                let a = add_mod(w[2 * i - 2], z[i - 1], d);
                ch.transmit((2 * i - 1, 2 * i), d, a, w[2 * i - 1])?;
            }
        }
        SumRandomness::Odd { z0, z } => {
            let m = (k - 1) / 2;
            // W_k(l) for 1-based user k and instance l
            let at = |user: usize, l: usize| w[(user - 1) * 2 + (l - 1)];
            let z0 = *z0;
            ch.transmit(
                (1, 2),
                d,
                sub_mod(at(1, 1), at(1, 2), d),
                add_mod(add_mod(at(2, 1), z0, d), z[0][0], d),
            )?;
            ch.transmit(
                (2, 3),
                d,
                add_mod(add_mod(at(2, 2), z0, d), z[0][1], d),
                sub_mod(at(3, 2), at(3, 1), d),
            )?;
            ch.transmit((1, 3), d, at(1, 2), sub_mod(at(3, 1), z0, d))?;
            for l in 1..=2 {
                for i in 2..=m {
                    ch.transmit(
                        (2 * i, 2 * i + 1),
                        d,
                        add_mod(at(2 * i, l), z[i - 1][l - 1], d),
                        at(2 * i + 1, l),
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Recovers the batch's sums from the channel outputs.
pub fn sum_decode_into(d: u32, k: usize, ys: &[u32], out: &mut Vec<u32>) {
    out.clear();
    if k < 3 || k % 2 == 0 {
        out.push(ys.iter().fold(0, |acc, &y| add_mod(acc, y, d)));
        return;
    }
    let m = (k - 1) / 2;
    let sum = |s: &[u32]| s.iter().fold(0, |acc, &y| add_mod(acc, y, d));
    // F(1) = Y1 + Y3 + Y4 + ... + Y_{2+m}; F(2) = Y2 + Y3 + Y_{3+m} + ... + Y_K
    out.push(add_mod(add_mod(ys[0], ys[2], d), sum(&ys[3..2 + m]), d));
    out.push(add_mod(add_mod(ys[1], ys[2], d), sum(&ys[2 + m..k]), d));
}

pub fn sum_decode(d: u32, k: usize, ys: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(2);
    sum_decode_into(d, k, ys, &mut out);
    out
}

fn check_data(d: u32, k: usize, w: &DataMatrix) -> Result<(), ProtocolError> {
    if d < 2 {
        return Err(ProtocolError::InvalidParameter(format!("modulus must be >= 2, got {d}")));
    }
    w.expect_shape(k, batch_len(k))?;
    if w.alphabet() != d {
        return Err(ProtocolError::InvalidParameter(format!(
            "data alphabet {} does not match modulus {d}",
            w.alphabet()
        )));
    }
    Ok(())
}

fn run_batch(
    session: &mut Session,
    id: ProtocolId,
    d: u32,
    k: usize,
    w: &DataMatrix,
    z: &SumRandomness,
) -> Result<ProtocolRun, ProtocolError> {
    check_data(d, k, w)?;
    z.validate(d, k)?;
    let mark = session.uses().len();
    sum_uses(session, d, k, w.entries(), z)?;
    let ys: Vec<u32> = session.uses_since(mark).iter().map(|u| u.output).collect();
    let output = sum_decode(d, k, &ys);
    Ok(finish_run(
        session,
        mark,
        id,
        d,
        w.clone(),
        z.record(CommonRandomness::default(), ""),
        output,
    ))
}

/// Even `K`: one instance over `K/2` channel uses.
pub fn qsk_sum_even(
    session: &mut Session,
    d: u32,
    k: usize,
    w: &DataMatrix,
    z: &SumRandomness,
) -> Result<ProtocolRun, ProtocolError> {
    if k < 2 || k % 2 == 1 {
        return Err(ProtocolError::InvalidParameter(format!("even-K scheme needs even K >= 2, got {k}")));
    }
    run_batch(session, ProtocolId::QskSumEven, d, k, w, z)
}

/// Odd `K >= 3`: two instances over `K` channel uses.
pub fn qsk_sum_odd(
    session: &mut Session,
    d: u32,
    k: usize,
    w: &DataMatrix,
    z: &SumRandomness,
) -> Result<ProtocolRun, ProtocolError> {
    if k < 3 || k % 2 == 0 {
        return Err(ProtocolError::InvalidParameter(format!("odd-K scheme needs odd K >= 3, got {k}")));
    }
    run_batch(session, ProtocolId::QskSumOdd, d, k, w, z)
}

/// `K = 1`: the lone user sends its symbol.
pub fn qsk_sum_single(session: &mut Session, d: u32, w: &DataMatrix) -> Result<ProtocolRun, ProtocolError> {
    run_batch(session, ProtocolId::QskSumSingle, d, 1, w, &SumRandomness::Single)
}

/// Runs the sum scheme over a stream of `n` instances (`stream` is `K x n`),
/// sampling fresh masks per batch. Odd `K >= 3` needs `n` even. With
/// `broken` set, all masks are zero; this is the negative control.
pub fn qsk_sum<R: Rng + ?Sized>(
    session: &mut Session,
    d: u32,
    k: usize,
    stream: &DataMatrix,
    rng: &mut R,
    broken: bool,
) -> Result<Vec<ProtocolRun>, ProtocolError> {
    if k < 1 {
        return Err(ProtocolError::InvalidParameter("K must be at least 1".into()));
    }
    if stream.users() != k {
        return Err(ProtocolError::InvalidParameter(format!(
            "stream has {} users, K = {k}",
            stream.users()
        )));
    }
    let n = stream.instances();
    let step = batch_len(k);
    if n % step != 0 {
        return Err(ProtocolError::UnpairedInstance(n));
    }
    let id = match (broken, k) {
        (true, _) => ProtocolId::BrokenQskSum,
        (false, 1) => ProtocolId::QskSumSingle,
        (false, k) if k % 2 == 0 => ProtocolId::QskSumEven,
        _ => ProtocolId::QskSumOdd,
    };
    (0..n)
        .step_by(step)
        .map(|start| {
            let batch = stream.slice_instances(start, step);
            let z = if broken {
                SumRandomness::zeroed(k)
            } else {
                SumRandomness::sample(d, k, rng)
            };
            run_batch(session, id, d, k, &batch, &z)
        })
        .collect()
}
