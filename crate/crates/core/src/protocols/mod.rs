//! Secure computation schemes built on the additive channel.
//!
//! Every scheme is split into an *encoder* that pushes channel uses through
//! any [`AdditiveChannel`](crate::channel::AdditiveChannel) and a *decoder*
//! that maps the channel outputs to `F^(L)`. The public run functions wrap
//! both around a [`Session`] and package the result as a [`ProtocolRun`];
//! the verifier drives the same encoders and decoders directly.

mod and2;
mod dot;
mod prod;
mod sum;

pub use and2::{
    cited_and_decode, cited_and_uses, new_and_decode, new_and_uses, qs2_and_cited, qs2_and_new,
    CITED_AND_RANDOMNESS, NEW_AND_RANDOMNESS,
};
pub use dot::{
    dot_decode, dot_product_demo, dot_uses, expand_a, expand_b, DOT_MASKS, DOT_MODULUS, S0, S1,
};
pub use prod::{
    phase_one_inputs, phase_two_inputs, prod_combine, prod_decode, prod_uses, qsk_and,
    qsk_and_stream, qsk_prod, qsk_prod_stream, ProdRandomness,
};
pub use sum::{
    batch_len, qsk_sum, qsk_sum_even, qsk_sum_odd, qsk_sum_single, sum_decode, sum_decode_into,
    sum_uses, uses_per_batch, SumRandomness,
};

use crate::algebra::AlgebraError;
use crate::channel::{ChannelError, ChannelUse, CostLedger, RateExpr, Session};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("data entry {value} at user {user}, instance {instance} is outside the alphabet of size {alphabet}")]
    DataOutOfRange {
        user: usize,
        instance: usize,
        value: u32,
        alphabet: u32,
    },
    #[error("invalid common randomness: {0}")]
    InvalidRandomness(String),
    #[error("odd-K batches need an even number of instances, got {0}")]
    UnpairedInstance(usize),
    #[error("channel output {0} cannot occur for any valid input (implementation bug)")]
    UnreachableOutput(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    Qs2AndCited,
    Qs2AndNew,
    QskSumSingle,
    QskSumEven,
    QskSumOdd,
    BrokenQskSum,
    QskProd,
    QskAnd,
    DotProduct,
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::Qs2AndCited => "qs2-and-cited",
            ProtocolId::Qs2AndNew => "qs2-and-new",
            ProtocolId::QskSumSingle => "qsk-sum-single",
            ProtocolId::QskSumEven => "qsk-sum-even",
            ProtocolId::QskSumOdd => "qsk-sum-odd",
            ProtocolId::BrokenQskSum => "broken-qsk-sum",
            ProtocolId::QskProd => "qsk-prod",
            ProtocolId::QskAnd => "qsk-and",
            ProtocolId::DotProduct => "dot-demo",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `W_k(l)` for `K` users and `L` instances, stored user-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataMatrix {
    users: usize,
    instances: usize,
    alphabet: u32,
    entries: Vec<u32>,
}

impl DataMatrix {
    /// `entries[k * instances + l]` is user `k + 1`'s instance `l + 1`.
    pub fn new(
        users: usize,
        instances: usize,
        alphabet: u32,
        entries: Vec<u32>,
    ) -> Result<Self, ProtocolError> {
        if entries.len() != users * instances {
            return Err(ProtocolError::InvalidParameter(format!(
                "data has {} entries, expected {users} x {instances}",
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|&v| v >= alphabet) {
            return Err(ProtocolError::DataOutOfRange {
                user: pos / instances + 1,
                instance: pos % instances + 1,
                value: entries[pos],
                alphabet,
            });
        }
        Ok(Self {
            users,
            instances,
            alphabet,
            entries,
        })
    }

    /// One instance: `column[k]` is user `k + 1`'s symbol.
    pub fn column(alphabet: u32, column: &[u32]) -> Result<Self, ProtocolError> {
        Self::new(column.len(), 1, alphabet, column.to_vec())
    }

    /// Instances given as columns, each listing all users' symbols.
    pub fn from_columns(alphabet: u32, columns: &[Vec<u32>]) -> Result<Self, ProtocolError> {
        let users = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != users) {
            return Err(ProtocolError::InvalidParameter(
                "columns have different lengths".into(),
            ));
        }
        let instances = columns.len();
        let mut entries = vec![0; users * instances];
        for (l, col) in columns.iter().enumerate() {
            for (k, &v) in col.iter().enumerate() {
                entries[k * instances + l] = v;
            }
        }
        Self::new(users, instances, alphabet, entries)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// 1-based user, 1-based instance.
    pub fn get(&self, user: usize, instance: usize) -> u32 {
        self.entries[(user - 1) * self.instances + (instance - 1)]
    }

    /// Instances `start..start + len` as a new matrix.
    pub fn slice_instances(&self, start: usize, len: usize) -> DataMatrix {
        let mut entries = Vec::with_capacity(self.users * len);
        for k in 0..self.users {
            let row = &self.entries[k * self.instances..(k + 1) * self.instances];
            entries.extend_from_slice(&row[start..start + len]);
        }
        DataMatrix {
            users: self.users,
            instances: len,
            alphabet: self.alphabet,
            entries,
        }
    }

    pub(crate) fn expect_shape(&self, users: usize, instances: usize) -> Result<(), ProtocolError> {
        if self.users != users || self.instances != instances {
            return Err(ProtocolError::InvalidParameter(format!(
                "expected a {users} x {instances} data matrix, got {} x {}",
                self.users, self.instances
            )));
        }
        Ok(())
    }
}

/// Named randomness components recorded with a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonRandomness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub components: BTreeMap<String, Vec<u32>>,
}

impl CommonRandomness {
    pub fn with(mut self, name: &str, values: Vec<u32>) -> Self {
        self.components.insert(name.to_string(), values);
        self
    }

    pub fn seeded(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// The server's view: ordered channel outputs with their cost.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub uses: Vec<ChannelUse>,
    pub ledger: CostLedger,
}

impl Transcript {
    pub fn from_uses(uses: &[ChannelUse]) -> Self {
        let mut ledger = CostLedger::default();
        for u in uses {
            ledger.charge(u.dimension, 1);
        }
        Self {
            uses: uses.to_vec(),
            ledger,
        }
    }

    pub fn outputs(&self) -> Vec<u32> {
        self.uses.iter().map(|u| u.output).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub protocol: ProtocolId,
    /// Dimension `d` in which the rate is measured (computations per `d`-dit).
    pub rate_base: u32,
    pub data: DataMatrix,
    pub randomness: CommonRandomness,
    pub transcript: Transcript,
    pub output: Vec<u32>,
}

impl ProtocolRun {
    pub fn computations(&self) -> u64 {
        self.output.len() as u64
    }

    pub fn rate(&self) -> RateExpr {
        self.transcript
            .ledger
            .rate_expr(self.computations(), self.rate_base)
    }
}

pub(crate) fn finish_run(
    session: &Session,
    mark: usize,
    protocol: ProtocolId,
    rate_base: u32,
    data: DataMatrix,
    randomness: CommonRandomness,
    output: Vec<u32>,
) -> ProtocolRun {
    ProtocolRun {
        protocol,
        rate_base,
        data,
        randomness,
        transcript: Transcript::from_uses(session.uses_since(mark)),
        output,
    }
}

pub(crate) fn check_bit(v: u32, what: &str) -> Result<(), ProtocolError> {
    if v > 1 {
        return Err(ProtocolError::InvalidParameter(format!(
            "{what} must be a bit, got {v}"
        )));
    }
    Ok(())
}
