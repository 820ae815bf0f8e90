//! Secure multi-user computation over a quantum multiple-access channel.
//!
//! Users share Bell pairs with a server; every two qudits downloaded deliver
//! two modular sums (the 2-sum protocol). The modules build up from there:
//!
//! - [`algebra`]: `Z_d` and `GF(p^r)` arithmetic
//! - [`quditsim`]: state-vector simulation of the 2-sum protocol
//! - [`channel`]: the additive channel abstraction with cost accounting
//! - [`protocols`]: the secure AND, sum, product and dot-product schemes
//! - [`verify`]: exhaustive correctness, security, CMI and rate checks

pub mod algebra;
pub mod channel;
pub mod protocols;
pub mod quditsim;
pub mod verify;

pub use algebra::{bertrand_prime, build_field, AlgebraError, FieldSpec, Zmod};
pub use channel::{AdditiveChannel, ChannelError, CostLedger, RateExpr, Session, SimMode};
pub use protocols::{DataMatrix, ProtocolError, ProtocolId, ProtocolRun};
