//! Two-user secure AND.
//!
//! The cited scheme spends one full 2-sum over qubits per AND. The new scheme
//! sends `Z(1-A) + Z(1-B)` over one qutrit use with `Z` uniform on `{1, 2}`;
//! the sum is zero exactly when `A = B = 1` and uniform on `{1, 2}` otherwise.

use super::{check_bit, finish_run, CommonRandomness, DataMatrix, ProtocolError, ProtocolId, ProtocolRun};
use crate::channel::{AdditiveChannel, ChannelError, Session};

/// Values `Z` takes in the cited scheme.
pub const CITED_AND_RANDOMNESS: [u32; 3] = [1, 2, 3];
/// Values `Z` takes in the new scheme.
pub const NEW_AND_RANDOMNESS: [u32; 2] = [1, 2];

const ALICE: usize = 1;
const BOB: usize = 2;

/// Inputs of the 2-sum for each `Z`, as `((A1, A2), (B1, B2))`.
fn cited_inputs(a: u32, b: u32, z: u32) -> ((u32, u32), (u32, u32)) {
    match z {
        1 => ((a, 0), (0, b)),
        2 => ((0, a), (b, (b + 1) % 2)),
        _ => (((a + 1) % 2, a), (b, 0)),
    }
}

/// Two qubit uses between Alice and Bob, i.e. one 2-sum.
pub fn cited_and_uses<C: AdditiveChannel>(
    ch: &mut C,
    a: u32,
    b: u32,
    z: u32,
) -> Result<(), ChannelError> {
    let ((a1, a2), (b1, b2)) = cited_inputs(a, b, z);
    ch.transmit((ALICE, BOB), 2, a1, b1)?;
    ch.transmit((ALICE, BOB), 2, a2, b2)?;
    Ok(())
}

pub fn cited_and_decode(outputs: &[u32]) -> u32 {
    u32::from(outputs == [1, 1])
}

pub fn qs2_and_cited(session: &mut Session, a: u32, b: u32, z: u32) -> Result<ProtocolRun, ProtocolError> {
    check_bit(a, "A")?;
    check_bit(b, "B")?;
    if !CITED_AND_RANDOMNESS.contains(&z) {
        return Err(ProtocolError::InvalidRandomness(format!("Z must be in {{1,2,3}}, got {z}")));
    }
    let mark = session.uses().len();
    cited_and_uses(session, a, b, z)?;
    let outputs: Vec<u32> = session.uses_since(mark).iter().map(|u| u.output).collect();
    let f = cited_and_decode(&outputs);
    Ok(finish_run(
        session,
        mark,
        ProtocolId::Qs2AndCited,
        2,
        DataMatrix::column(2, &[a, b])?,
        CommonRandomness::default().with("Z", vec![z]),
        vec![f],
    ))
}

/// One qutrit use carrying `Z(1-A) + Z(1-B) mod 3`.
pub fn new_and_uses<C: AdditiveChannel>(
    ch: &mut C,
    a: u32,
    b: u32,
    z: u32,
) -> Result<(), ChannelError> {
    ch.transmit((ALICE, BOB), 3, z * (1 - a) % 3, z * (1 - b) % 3)?;
    Ok(())
}

pub fn new_and_decode(outputs: &[u32]) -> u32 {
    u32::from(outputs[0] == 0)
}

pub fn qs2_and_new(session: &mut Session, a: u32, b: u32, z: u32) -> Result<ProtocolRun, ProtocolError> {
    check_bit(a, "A")?;
    check_bit(b, "B")?;
    if !NEW_AND_RANDOMNESS.contains(&z) {
        return Err(ProtocolError::InvalidRandomness(format!("Z must be in {{1,2}}, got {z}")));
    }
    let mark = session.uses().len();
    new_and_uses(session, a, b, z)?;
    let f = new_and_decode(&[session.uses_since(mark)[0].output]);
    Ok(finish_run(
        session,
        mark,
        ProtocolId::Qs2AndNew,
        2,
        DataMatrix::column(2, &[a, b])?,
        CommonRandomness::default().with("Z", vec![z]),
        vec![f],
    ))
}
