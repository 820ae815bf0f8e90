//! Secure K-user product over `F_d`.
//!
//! Phase I decides whether any input is zero: every user sends
//! `R(1 - 1(W_k))` through the sum scheme over `Z_p`, `p` a prime in
//! `(K, 2K)`, so the sum is zero exactly when all inputs are nonzero and is
//! otherwise uniform on `Z_p \ {0}`. Phase II sums discrete logs over
//! `Z_{d-1}`; a user holding zero substitutes a uniform `W~_k`, which makes
//! the decoded element uniform on `F_d^x` whenever Phase I reports a zero.

use super::sum::{batch_len, sum_decode, sum_uses, uses_per_batch, SumRandomness};
use super::{finish_run, CommonRandomness, DataMatrix, ProtocolError, ProtocolId, ProtocolRun};
use crate::algebra::{bertrand_prime, build_field, FieldSpec};
use crate::channel::{AdditiveChannel, Session};
use rand::Rng;

/// Masks for one batch of the product scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProdRandomness {
    /// `R(l)` in `Z_p \ {0}`, one per instance.
    pub mask: Vec<u32>,
    pub phase_one: SumRandomness,
    /// `None` when `d = 2`.
    pub phase_two: Option<SumRandomness>,
    /// `W~_k(l)` as nonzero field representations, user-major `K x L`.
    pub fill: Vec<u32>,
}

impl ProdRandomness {
    /// Randomness for `K = 1`, which needs none.
    pub fn identity() -> Self {
        Self {
            mask: Vec::new(),
            phase_one: SumRandomness::Single,
            phase_two: None,
            fill: Vec::new(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(field: &FieldSpec, k: usize, rng: &mut R) -> Self {
        if k < 2 {
            return Self::identity();
        }
        let d = field.order();
        let p = bertrand_prime(k as u32);
        let l = batch_len(k);
        let mask = (0..l).map(|_| rng.gen_range(1..p)).collect();
        let phase_one = SumRandomness::sample(p, k, rng);
        let phase_two = (d > 2).then(|| SumRandomness::sample(d - 1, k, rng));
        let fill = if d > 2 {
            (0..k * l).map(|_| rng.gen_range(1..d)).collect()
        } else {
            vec![1; k * l]
        };
        Self {
            mask,
            phase_one,
            phase_two,
            fill,
        }
    }

    pub fn validate(&self, field: &FieldSpec, k: usize) -> Result<(), ProtocolError> {
        if k < 2 {
            return Ok(());
        }
        let d = field.order();
        let p = bertrand_prime(k as u32);
        let l = batch_len(k);
        if self.mask.len() != l || self.mask.iter().any(|&r| r == 0 || r >= p) {
            return Err(ProtocolError::InvalidRandomness(format!(
                "need {l} masks R in Z_{p} \\ {{0}}"
            )));
        }
        self.phase_one.validate(p, k)?;
        match (&self.phase_two, d > 2) {
            (Some(z), true) => z.validate(d - 1, k)?,
            (None, false) => {}
            _ => {
                return Err(ProtocolError::InvalidRandomness(
                    "Phase II randomness present exactly when d > 2".into(),
                ))
            }
        }
        if self.fill.len() != k * l || self.fill.iter().any(|&f| f == 0 || f >= d) {
            return Err(ProtocolError::InvalidRandomness(format!(
                "need {} nonzero substitutes in F_{d}",
                k * l
            )));
        }
        Ok(())
    }

    fn record(&self, field: &FieldSpec) -> CommonRandomness {
        let mut out = CommonRandomness::default().with("R", self.mask.clone());
        out = self.phase_one.record(out, "phase1.");
        if let Some(z) = &self.phase_two {
            out = z.record(out, "phase2.");
        }
        if field.order() > 2 {
            out = out.with("W~", self.fill.clone());
        }
        out
    }
}

/// Phase I inputs `R(l)(1 - 1(W_k(l))) mod p`; `w` and `out` are user-major with `l` instances.
pub fn phase_one_inputs(p: u32, w: &[u32], mask: &[u32], out: &mut Vec<u32>) {
    let l = mask.len();
    out.clear();
    out.extend(
        w.iter()
            .enumerate()
            .map(|(i, &x)| if x == 0 { mask[i % l] % p } else { 0 }),
    );
}

/// Phase II inputs: `dlog(W_k)`, or `dlog(W~_k)` where `W_k = 0`.
pub fn phase_two_inputs(field: &FieldSpec, w: &[u32], fill: &[u32], out: &mut Vec<u32>) {
    out.clear();
    out.extend(w.iter().zip(fill).map(|(&x, &f)| {
        let v = if x == 0 { f } else { x };
        field.dlog_repr(v).unwrap_or(0)
    }));
}

/// Combines the decoded Phase I sums and Phase II exponents into field reprs.
/// An empty `exponents` means Phase II was skipped (`d = 2`).
pub fn prod_combine(field: &FieldSpec, and_sums: &[u32], exponents: &[u32]) -> Vec<u32> {
    and_sums
        .iter()
        .enumerate()
        .map(|(i, &s)| match (s, exponents.get(i)) {
            (0, Some(&e)) => field.exp_repr(e),
            (0, None) => 1,
            _ => 0,
        })
        .collect()
}

/// Pushes one batch of both phases through the channel.
pub fn prod_uses<C: AdditiveChannel>(
    ch: &mut C,
    field: &FieldSpec,
    k: usize,
    w: &[u32],
    r: &ProdRandomness,
) -> Result<(), ProtocolError> {
    if k < 2 {
        ch.send_direct(1, field.order(), w[0])?;
        return Ok(());
    }
    let p = bertrand_prime(k as u32);
    let mut inputs = Vec::with_capacity(w.len());
    phase_one_inputs(p, w, &r.mask, &mut inputs);
    sum_uses(ch, p, k, &inputs, &r.phase_one)?;
    if let Some(z) = &r.phase_two {
        phase_two_inputs(field, w, &r.fill, &mut inputs);
        sum_uses(ch, field.order() - 1, k, &inputs, z)?;
    }
    Ok(())
}

/// Decodes one batch from the outputs of [`prod_uses`].
pub fn prod_decode(field: &FieldSpec, k: usize, ys: &[u32]) -> Vec<u32> {
    if k < 2 {
        return vec![ys[0]];
    }
    let p = bertrand_prime(k as u32);
    let n = uses_per_batch(k);
    let and_sums = sum_decode(p, k, &ys[..n]);
    let exponents = if field.order() > 2 {
        sum_decode(field.order() - 1, k, &ys[n..2 * n])
    } else {
        Vec::new()
    };
    prod_combine(field, &and_sums, &exponents)
}

/// One batch (`batch_len(K)` instances) of the product scheme. `K = 1` is the
/// identity: the user sends its element directly.
pub fn qsk_prod(
    session: &mut Session,
    field: &FieldSpec,
    k: usize,
    w: &DataMatrix,
    r: &ProdRandomness,
) -> Result<ProtocolRun, ProtocolError> {
    run(session, ProtocolId::QskProd, field, k, w, r)
}

fn run(
    session: &mut Session,
    id: ProtocolId,
    field: &FieldSpec,
    k: usize,
    w: &DataMatrix,
    r: &ProdRandomness,
) -> Result<ProtocolRun, ProtocolError> {
    if k < 1 {
        return Err(ProtocolError::InvalidParameter("K must be at least 1".into()));
    }
    let d = field.order();
    if w.users() != k || w.instances() != batch_len(k) || w.alphabet() != d {
        return Err(ProtocolError::InvalidParameter(format!(
            "expected a {k} x {} data matrix over F_{d}, got {} x {} over an alphabet of {}",
            batch_len(k),
            w.users(),
            w.instances(),
            w.alphabet()
        )));
    }
    r.validate(field, k)?;
    let mark = session.uses().len();
    prod_uses(session, field, k, w.entries(), r)?;
    let ys: Vec<u32> = session.uses_since(mark).iter().map(|u| u.output).collect();
    let output = prod_decode(field, k, &ys);
    Ok(finish_run(session, mark, id, d, w.clone(), r.record(field), output))
}

/// Runs the product scheme over a `K x n` stream, sampling fresh randomness per batch.
pub fn qsk_prod_stream<R: Rng + ?Sized>(
    session: &mut Session,
    field: &FieldSpec,
    k: usize,
    stream: &DataMatrix,
    rng: &mut R,
) -> Result<Vec<ProtocolRun>, ProtocolError> {
    stream_runs(session, ProtocolId::QskProd, field, k, stream, rng)
}

fn stream_runs<R: Rng + ?Sized>(
    session: &mut Session,
    id: ProtocolId,
    field: &FieldSpec,
    k: usize,
    stream: &DataMatrix,
    rng: &mut R,
) -> Result<Vec<ProtocolRun>, ProtocolError> {
    let step = batch_len(k);
    let n = stream.instances();
    if n % step != 0 {
        return Err(ProtocolError::UnpairedInstance(n));
    }
    (0..n)
        .step_by(step)
        .map(|start| {
            let r = ProdRandomness::sample(field, k, rng);
            run(session, id, field, k, &stream.slice_instances(start, step), &r)
        })
        .collect()
}

/// Logical AND of `K` bits: the product scheme over `GF(2)`.
pub fn qsk_and(
    session: &mut Session,
    k: usize,
    w: &DataMatrix,
    r: &ProdRandomness,
) -> Result<ProtocolRun, ProtocolError> {
    let gf2 = build_field(2, 1)?;
    run(session, ProtocolId::QskAnd, &gf2, k, w, r)
}

pub fn qsk_and_stream<R: Rng + ?Sized>(
    session: &mut Session,
    k: usize,
    stream: &DataMatrix,
    rng: &mut R,
) -> Result<Vec<ProtocolRun>, ProtocolError> {
    let gf2 = build_field(2, 1)?;
    stream_runs(session, ProtocolId::QskAnd, &gf2, k, stream, rng)
}
