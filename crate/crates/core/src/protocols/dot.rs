//! Two-user dot product of 2-bit vectors over `Z_2`, via one use over `F_11`.
//!
//! Alice and Bob map their vectors through fixed tables into `F_11` so that
//! `A' + B'` lands in the quadratic non-residues exactly when `A.B = 1`.
//! Multiplying both sides by a common residue `R` preserves the class and
//! makes `Y` uniform within it.

use super::{finish_run, CommonRandomness, DataMatrix, ProtocolError, ProtocolId, ProtocolRun};
use crate::algebra::mul_mod;
use crate::channel::{AdditiveChannel, ChannelError, Session};

pub const DOT_MODULUS: u32 = 11;
/// Nonzero squares of `F_11`; the common mask `R` is drawn from these.
pub const DOT_MASKS: [u32; 5] = [1, 3, 4, 5, 9];
/// Outputs decoding to 0.
pub const S0: [u32; 5] = [1, 3, 4, 5, 9];
/// Outputs decoding to 1.
pub const S1: [u32; 5] = [2, 6, 7, 8, 10];

const A_TABLE: [u32; 4] = [1, 6, 2, 0];
const B_TABLE: [u32; 4] = [3, 2, 8, 4];

/// `A'` for the vector with index `2 A_1 + A_2`.
pub fn expand_a(index: u32) -> u32 {
    A_TABLE[index as usize]
}

/// `B'` for the vector with index `2 B_1 + B_2`.
pub fn expand_b(index: u32) -> u32 {
    B_TABLE[index as usize]
}

/// One use over `F_11` carrying `R A' + R B'`.
pub fn dot_uses<C: AdditiveChannel>(ch: &mut C, a: u32, b: u32, r: u32) -> Result<(), ChannelError> {
    ch.transmit(
        (1, 2),
        DOT_MODULUS,
        mul_mod(r, expand_a(a), DOT_MODULUS),
        mul_mod(r, expand_b(b), DOT_MODULUS),
    )?;
    Ok(())
}

pub fn dot_decode(y: u32) -> Result<u32, ProtocolError> {
    if S1.contains(&y) {
        Ok(1)
    } else if S0.contains(&y) {
        Ok(0)
    } else {
        Err(ProtocolError::UnreachableOutput(y))
    }
}

/// `a` and `b` are `[bit_1, bit_2]`.
pub fn dot_product_demo(
    session: &mut Session,
    a: [u32; 2],
    b: [u32; 2],
    r: u32,
) -> Result<ProtocolRun, ProtocolError> {
    for (v, name) in a.iter().zip(["A1", "A2"]).chain(b.iter().zip(["B1", "B2"])) {
        super::check_bit(*v, name)?;
    }
    if !DOT_MASKS.contains(&r) {
        return Err(ProtocolError::InvalidRandomness(format!(
            "R must be in {{1,3,4,5,9}}, got {r}"
        )));
    }
    let (ia, ib) = (2 * a[0] + a[1], 2 * b[0] + b[1]);
    let mark = session.uses().len();
    dot_uses(session, ia, ib, r)?;
    let f = dot_decode(session.uses_since(mark)[0].output)?;
    Ok(finish_run(
        session,
        mark,
        ProtocolId::DotProduct,
        2,
        DataMatrix::column(4, &[ia, ib])?,
        CommonRandomness::default().with("R", vec![r]),
        vec![f],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn squares() -> BTreeSet<u32> {
        (1..11).map(|x| x * x % 11).collect()
    }

    #[test]
    fn masks_are_the_nonzero_squares() {
        assert_eq!(DOT_MASKS.iter().copied().collect::<BTreeSet<_>>(), squares());
        assert_eq!(S0.iter().copied().collect::<BTreeSet<_>>(), squares());
        let s1: BTreeSet<u32> = (1..11).filter(|y| !squares().contains(y)).collect();
        assert_eq!(S1.iter().copied().collect::<BTreeSet<_>>(), s1);
    }

    #[test]
    fn examples() {
        let mut s = Session::default();
        let run = dot_product_demo(&mut s, [1, 0], [1, 0], 1).unwrap();
        assert_eq!(run.transcript.outputs(), vec![10]);
        assert_eq!(run.output, vec![1]);
        let run = dot_product_demo(&mut s, [1, 1], [1, 1], 1).unwrap();
        assert_eq!(run.transcript.outputs(), vec![4]);
        assert_eq!(run.output, vec![0]);
        assert!((run.rate().approx - 1.0 / 11f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_classes() {
        let mut s = Session::default();
        let mut ones = 0;
        for ia in 0..4 {
            for ib in 0..4 {
                let a = [ia / 2, ia % 2];
                let b = [ib / 2, ib % 2];
                let f = (a[0] * b[0] + a[1] * b[1]) % 2;
                ones += f;
                let mut ys = BTreeSet::new();
                for r in DOT_MASKS {
                    let run = dot_product_demo(&mut s, a, b, r).unwrap();
                    assert_eq!(run.output, vec![f]);
                    ys.insert(run.transcript.outputs()[0]);
                }
                let want = if f == 1 { S1 } else { S0 };
                assert_eq!(ys, want.iter().copied().collect());
            }
        }
        assert_eq!(ones, 6);
    }

    #[test]
    fn zero_output_is_flagged() {
        assert_eq!(dot_decode(0), Err(ProtocolError::UnreachableOutput(0)));
        let mut s = Session::default();
        assert!(dot_product_demo(&mut s, [0, 0], [0, 0], 2).is_err());
        assert!(dot_product_demo(&mut s, [2, 0], [0, 0], 1).is_err());
    }
}
