//! The modulo-d 2-sum protocol and the additive channel built on it.
//!
//! One 2-sum invocation lets two users holding halves of a Bell pair deliver
//! two modular sums for two qudits of cost. Viewed per sum, that is a
//! classical additive channel `(a, b) -> a + b mod d` at one qudit per use,
//! which is what the protocols are written against.
//!
//! A [`Session`] in [`SimMode::QuantumVerified`] queues uses per
//! `(pair, dimension)` and realizes every two of them with one simulated
//! 2-sum, checking that the measured outcome matches what was delivered.

use crate::quditsim::{self, LocalUnitary, PureState, QuditError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("channel input {value} is out of range for dimension {dimension}")]
    InputOutOfRange { value: u32, dimension: u32 },
    #[error("channel dimension must be at least 2, got {0}")]
    BadDimension(u32),
    #[error("an additive-channel use needs two distinct users, got ({0}, {0})")]
    SameUser(usize),
    #[error("session is closed")]
    SessionClosed,
    #[error("unpaired channel use between users {pair:?} at dimension {dimension}")]
    UnpairedUse { pair: (usize, usize), dimension: u32 },
    #[error("Bell measurement was not deterministic (simulator bug)")]
    NonDeterministic,
    #[error("quantum outcome {quantum:?} disagrees with delivered sums {delivered:?}")]
    OutcomeMismatch {
        quantum: (u32, u32),
        delivered: (u32, u32),
    },
    #[error("cost ledger is empty")]
    EmptyLedger,
    #[error("rate needs at least one computation")]
    NoComputations,
    #[error(transparent)]
    Qudit(#[from] QuditError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    #[default]
    Abstract,
    QuantumVerified,
}

/// One invocation of the additive channel. Users are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelUse {
    pub pair: (usize, usize),
    pub dimension: u32,
    pub inputs: (u32, u32),
    pub output: u32,
    /// A single user sending a value directly (the `K = 1` degenerate case).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub direct: bool,
}

/// Qudit costs per dimension. Protocol uses are charged one qudit each;
/// padding added to complete a 2-sum batch is kept apart so both the
/// protocol rate and the padded total can be reported.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub uses: BTreeMap<u32, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub padding: BTreeMap<u32, u64>,
}

impl CostLedger {
    pub fn charge(&mut self, dimension: u32, count: u64) {
        *self.uses.entry(dimension).or_default() += count;
    }

    pub fn charge_padding(&mut self, dimension: u32, count: u64) {
        *self.padding.entry(dimension).or_default() += count;
    }

    pub fn merge(&mut self, other: &CostLedger) {
        for (&d, &n) in &other.uses {
            self.charge(d, n);
        }
        for (&d, &n) in &other.padding {
            self.charge_padding(d, n);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.uses.values().all(|&n| n == 0) && self.padding.values().all(|&n| n == 0)
    }

    pub fn use_count(&self) -> u64 {
        self.uses.values().sum()
    }

    pub fn padding_count(&self) -> u64 {
        self.padding.values().sum()
    }

    /// Protocol cost in `base`-dits: `sum count * log_base(dimension)`, padding excluded.
    pub fn qudits(&self, base: u32) -> f64 {
        weighted_log(&self.uses, base)
    }

    /// Cost including padding charges.
    pub fn total_qudits(&self, base: u32) -> f64 {
        weighted_log(&self.uses, base) + weighted_log(&self.padding, base)
    }

    /// Exact form of `computations / cost`.
    pub fn rate_expr(&self, computations: u64, base: u32) -> RateExpr {
        RateExpr::new(computations, base, &self.uses)
    }
}

fn weighted_log(map: &BTreeMap<u32, u64>, base: u32) -> f64 {
    map.iter()
        .map(|(&d, &n)| n as f64 * (d as f64).ln() / (base as f64).ln())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTerm {
    pub count: u64,
    pub dimension: u32,
}

/// `computations / sum_i count_i * log_base(dimension_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateExpr {
    pub computations: u64,
    pub log_base: u32,
    pub cost_terms: Vec<CostTerm>,
    pub approx: f64,
}

impl RateExpr {
    pub fn new(computations: u64, base: u32, costs: &BTreeMap<u32, u64>) -> Self {
        let cost_terms: Vec<_> = costs
            .iter()
            .filter(|(&d, &n)| n > 0 && d > 1)
            .map(|(&dimension, &count)| CostTerm { count, dimension })
            .collect();
        let denom = weighted_log(costs, base);
        let approx = if denom > 0.0 {
            computations as f64 / denom
        } else {
            f64::INFINITY
        };
        Self {
            computations,
            log_base: base,
            cost_terms,
            approx,
        }
    }

    pub fn symbolic(&self) -> String {
        let terms: Vec<_> = self
            .cost_terms
            .iter()
            .map(|t| format!("{}*log_{}({})", t.count, self.log_base, t.dimension))
            .collect();
        format!("{} / ({})", self.computations, terms.join(" + "))
    }
}

/// Rate of `computations` instances over the ledger, in computations per `d`-dit.
pub fn ledger_rate(ledger: &CostLedger, computations: u64, d: u32) -> Result<f64, ChannelError> {
    if computations == 0 {
        return Err(ChannelError::NoComputations);
    }
    if ledger.use_count() == 0 {
        return Err(ChannelError::EmptyLedger);
    }
    Ok(computations as f64 / ledger.qudits(d))
}

/// Something the protocols can push additive-channel uses through.
pub trait AdditiveChannel {
    /// Users `pair.0` and `pair.1` send `a` and `b`; returns `a + b mod d`.
    fn transmit(&mut self, pair: (usize, usize), d: u32, a: u32, b: u32)
        -> Result<u32, ChannelError>;

    /// A lone user sends `value` on one qudit.
    fn send_direct(&mut self, user: usize, d: u32, value: u32) -> Result<u32, ChannelError>;
}

/// The 2-sum protocol: returns `(A1 + B1, A2 + B2) mod d` for two qudits.
///
/// In [`SimMode::QuantumVerified`] the sums are read off a simulated Bell
/// measurement after Alice applies `X^A1 Z^A2` and Bob `X^-B1 Z^B2`.
pub fn run_two_sum(
    d: u32,
    mode: SimMode,
    alice: (u32, u32),
    bob: (u32, u32),
) -> Result<(u32, u32), ChannelError> {
    check_dimension(d)?;
    for v in [alice.0, alice.1, bob.0, bob.1] {
        check_input(v, d)?;
    }
    match mode {
        SimMode::Abstract => Ok(((alice.0 + bob.0) % d, (alice.1 + bob.1) % d)),
        SimMode::QuantumVerified => two_sum_quantum(d as usize, alice, bob),
    }
}

fn two_sum_quantum(d: usize, alice: (u32, u32), bob: (u32, u32)) -> Result<(u32, u32), ChannelError> {
    let a_gate = quditsim::pauli_x(d, alice.0 as i64).mul(&quditsim::pauli_z(d, alice.1 as i64));
    let b_gate = quditsim::pauli_x(d, -(bob.0 as i64)).mul(&quditsim::pauli_z(d, bob.1 as i64));
    let state = quditsim::bell_pair(d)?;
    let state = quditsim::apply_local(&state, &LocalUnitary::new(0, a_gate)?)?;
    let state = quditsim::apply_local(&state, &LocalUnitary::new(1, b_gate)?)?;
    let probs = quditsim::measure_bell_basis(&state)?;
    let label = quditsim::deterministic_outcome(&probs).ok_or(ChannelError::NonDeterministic)?;
    Ok((label.x as u32, label.y as u32))
}

fn direct_quantum(d: usize, value: u32) -> Result<u32, ChannelError> {
    let state = PureState::basis(vec![d], &[0])?;
    let state = quditsim::apply_local(
        &state,
        &LocalUnitary::new(0, quditsim::pauli_x(d, value as i64))?,
    )?;
    let probs = state.computational_probabilities(0)?;
    probs
        .iter()
        .position(|&p| p > 1.0 - quditsim::TOLERANCE)
        .map(|v| v as u32)
        .ok_or(ChannelError::NonDeterministic)
}

fn check_dimension(d: u32) -> Result<(), ChannelError> {
    if d < 2 {
        return Err(ChannelError::BadDimension(d));
    }
    Ok(())
}

#[inline]
fn check_input(value: u32, dimension: u32) -> Result<(), ChannelError> {
    if value >= dimension {
        return Err(ChannelError::InputOutOfRange { value, dimension });
    }
    Ok(())
}

/// What a closed session consumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub mode: SimMode,
    pub ledger: CostLedger,
    /// Qudits the quantum-verified mode actually simulated, per dimension.
    pub physical_qudits: BTreeMap<u32, u64>,
    pub two_sum_invocations: u64,
    /// Padding was needed, so the simulated cost exceeds the protocol accounting.
    pub padding_divergent: bool,
}

/// A single-owner sequence of channel uses with its cost accounting.
#[derive(Debug, Clone)]
pub struct Session {
    mode: SimMode,
    allow_padding: bool,
    uses: Vec<ChannelUse>,
    ledger: CostLedger,
    physical: BTreeMap<u32, u64>,
    pending: BTreeMap<(usize, usize, u32), usize>,
    two_sums: u64,
    divergent: bool,
    closed: bool,
}

impl Default for Session {
    fn default() -> Self {
        Self::new(SimMode::Abstract)
    }
}

impl Session {
    pub fn new(mode: SimMode) -> Self {
        Self {
            mode,
            allow_padding: false,
            uses: Vec::new(),
            ledger: CostLedger::default(),
            physical: BTreeMap::new(),
            pending: BTreeMap::new(),
            two_sums: 0,
            divergent: false,
            closed: false,
        }
    }

    /// Pad unpaired uses with a zero use on close instead of failing.
    pub fn with_padding(mut self, allow: bool) -> Self {
        self.allow_padding = allow;
        self
    }

    pub fn mode(&self) -> SimMode {
        self.mode
    }

    pub fn uses(&self) -> &[ChannelUse] {
        &self.uses
    }

    /// Uses recorded since `mark` (an earlier `uses().len()`).
    pub fn uses_since(&self, mark: usize) -> &[ChannelUse] {
        &self.uses[mark..]
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Same as [`AdditiveChannel::transmit`]; kept under the protocol's name.
    pub fn additive_channel_use(
        &mut self,
        pair: (usize, usize),
        d: u32,
        a: u32,
        b: u32,
    ) -> Result<u32, ChannelError> {
        self.transmit(pair, d, a, b)
    }

    fn realize_pair(&mut self, first: usize, second: usize) -> Result<(), ChannelError> {
        let (u1, u2) = (&self.uses[first], &self.uses[second]);
        let d = u1.dimension;
        // orient both uses so that the lower-indexed user plays Alice
        let orient = |u: &ChannelUse| {
            if u.pair.0 <= u.pair.1 {
                u.inputs
            } else {
                (u.inputs.1, u.inputs.0)
            }
        };
        let (a1, b1) = orient(u1);
        let (a2, b2) = orient(u2);
        let delivered = (u1.output, u2.output);
        let quantum = run_two_sum(d, SimMode::QuantumVerified, (a1, a2), (b1, b2))?;
        self.two_sums += 1;
        *self.physical.entry(d).or_default() += 2;
        if quantum != delivered {
            return Err(ChannelError::OutcomeMismatch { quantum, delivered });
        }
        Ok(())
    }

    /// Flushes the queue. Unpaired uses are an error unless padding is enabled.
    pub fn close(&mut self) -> Result<SessionSummary, ChannelError> {
        if self.closed {
            return Err(ChannelError::SessionClosed);
        }
        if let Some((&(lo, hi, d), _)) = self.pending.iter().next() {
            if !self.allow_padding {
                return Err(ChannelError::UnpairedUse {
                    pair: (lo, hi),
                    dimension: d,
                });
            }
        }
        let pending = std::mem::take(&mut self.pending);
        for ((_, _, d), idx) in pending {
            let u = &self.uses[idx];
            let (a, b) = if u.pair.0 <= u.pair.1 {
                u.inputs
            } else {
                (u.inputs.1, u.inputs.0)
            };
            let quantum = run_two_sum(d, SimMode::QuantumVerified, (a, 0), (b, 0))?;
            self.two_sums += 1;
            *self.physical.entry(d).or_default() += 2;
            if quantum.0 != u.output {
                return Err(ChannelError::OutcomeMismatch {
                    quantum,
                    delivered: (u.output, 0),
                });
            }
            self.ledger.charge_padding(d, 1);
            self.divergent = true;
        }
        self.closed = true;
        Ok(SessionSummary {
            mode: self.mode,
            ledger: self.ledger.clone(),
            physical_qudits: self.physical.clone(),
            two_sum_invocations: self.two_sums,
            padding_divergent: self.divergent,
        })
    }
}

impl AdditiveChannel for Session {
    fn transmit(
        &mut self,
        pair: (usize, usize),
        d: u32,
        a: u32,
        b: u32,
    ) -> Result<u32, ChannelError> {
        if self.closed {
            return Err(ChannelError::SessionClosed);
        }
        check_dimension(d)?;
        check_input(a, d)?;
        check_input(b, d)?;
        if pair.0 == pair.1 {
            return Err(ChannelError::SameUser(pair.0));
        }
        let output = (a + b) % d;
        self.uses.push(ChannelUse {
            pair,
            dimension: d,
            inputs: (a, b),
            output,
            direct: false,
        });
        self.ledger.charge(d, 1);
        if self.mode == SimMode::QuantumVerified {
            let idx = self.uses.len() - 1;
            let key = (pair.0.min(pair.1), pair.0.max(pair.1), d);
            match self.pending.remove(&key) {
                Some(first) => self.realize_pair(first, idx)?,
                None => {
                    self.pending.insert(key, idx);
                }
            }
        }
        Ok(output)
    }

    fn send_direct(&mut self, user: usize, d: u32, value: u32) -> Result<u32, ChannelError> {
        if self.closed {
            return Err(ChannelError::SessionClosed);
        }
        check_dimension(d)?;
        check_input(value, d)?;
        let mut output = value;
        if self.mode == SimMode::QuantumVerified {
            output = direct_quantum(d as usize, value)?;
            *self.physical.entry(d).or_default() += 1;
        }
        self.uses.push(ChannelUse {
            pair: (user, user),
            dimension: d,
            inputs: (value, 0),
            output,
            direct: true,
        });
        self.ledger.charge(d, 1);
        Ok(output)
    }
}
