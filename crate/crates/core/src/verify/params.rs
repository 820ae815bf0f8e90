//! Protocol families with their parameters, as the CLI and the rate checks see them.

use super::schemes::{CitedAnd, DotDemo, NewAnd, Prod, Scheme, Sum};
use crate::algebra::{bertrand_prime, build_field, is_prime, FieldSpec};
use crate::channel::Session;
use crate::protocols::{
    batch_len, dot_product_demo, qs2_and_cited, qs2_and_new, qsk_and_stream, qsk_prod_stream,
    qsk_sum, DataMatrix, ProtocolError, ProtocolId, ProtocolRun, CITED_AND_RANDOMNESS, DOT_MASKS,
    NEW_AND_RANDOMNESS,
};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum ProtocolParams {
    Qs2AndCited,
    Qs2AndNew,
    QskSum { d: u32, k: usize },
    BrokenQskSum { d: u32, k: usize },
    QskProd { p: u32, r: u32, k: usize },
    QskAnd { k: usize },
    DotDemo,
}

fn invalid(msg: String) -> ProtocolError {
    ProtocolError::InvalidParameter(msg)
}

impl ProtocolParams {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolParams::Qs2AndCited => "qs2-and-cited",
            ProtocolParams::Qs2AndNew => "qs2-and-new",
            ProtocolParams::QskSum { .. } => "qsk-sum",
            ProtocolParams::BrokenQskSum { .. } => "broken-qsk-sum",
            ProtocolParams::QskProd { .. } => "qsk-prod",
            ProtocolParams::QskAnd { .. } => "qsk-and",
            ProtocolParams::DotDemo => "dot-demo",
        }
    }

    /// Names accepted by [`ProtocolParams::from_name`].
    pub fn names() -> [&'static str; 7] {
        [
            "qs2-and-cited",
            "qs2-and-new",
            "qsk-sum",
            "broken-qsk-sum",
            "qsk-prod",
            "qsk-and",
            "dot-demo",
        ]
    }

    /// Builds parameters from a family name; `d` doubles as `p^r` for the product.
    pub fn from_name(name: &str, d: u32, k: usize) -> Result<Self, ProtocolError> {
        let out = match name {
            "qs2-and-cited" => ProtocolParams::Qs2AndCited,
            "qs2-and-new" => ProtocolParams::Qs2AndNew,
            "qsk-sum" => ProtocolParams::QskSum { d, k },
            "broken-qsk-sum" => ProtocolParams::BrokenQskSum { d, k },
            "qsk-prod" => {
                let (p, r) = crate::algebra::prime_power(d)
                    .ok_or_else(|| invalid(format!("qsk-prod needs a prime power d, got {d}")))?;
                ProtocolParams::QskProd { p, r, k }
            }
            "qsk-and" => ProtocolParams::QskAnd { k },
            "dot-demo" => ProtocolParams::DotDemo,
            other => return Err(invalid(format!("unknown protocol {other:?}"))),
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match *self {
            ProtocolParams::QskSum { d, k } | ProtocolParams::BrokenQskSum { d, k } => {
                if d < 2 {
                    return Err(invalid(format!("d must be at least 2, got {d}")));
                }
                if k < 1 {
                    return Err(invalid("K must be at least 1".into()));
                }
                if matches!(self, ProtocolParams::BrokenQskSum { .. }) && k < 2 {
                    return Err(invalid("the broken variant needs K >= 2".into()));
                }
            }
            ProtocolParams::QskProd { p, r, k } => {
                if !is_prime(p) {
                    return Err(invalid(format!("p must be prime, got {p}")));
                }
                if k < 1 {
                    return Err(invalid("K must be at least 1".into()));
                }
                build_field(p, r)?;
            }
            ProtocolParams::QskAnd { k } => {
                if k < 1 {
                    return Err(invalid("K must be at least 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        match *self {
            ProtocolParams::QskSum { k, .. }
            | ProtocolParams::BrokenQskSum { k, .. }
            | ProtocolParams::QskProd { k, .. }
            | ProtocolParams::QskAnd { k } => k,
            _ => 2,
        }
    }

    /// Dimension in which rates are counted.
    pub fn dimension(&self) -> u32 {
        match *self {
            ProtocolParams::QskSum { d, .. } | ProtocolParams::BrokenQskSum { d, .. } => d,
            ProtocolParams::QskProd { p, r, .. } => p.pow(r),
            _ => 2,
        }
    }

    /// Instances computed per batch.
    pub fn batch_instances(&self) -> usize {
        match *self {
            ProtocolParams::QskSum { k, .. }
            | ProtocolParams::BrokenQskSum { k, .. }
            | ProtocolParams::QskProd { k, .. }
            | ProtocolParams::QskAnd { k } => batch_len(k),
            _ => 1,
        }
    }

    pub fn field(&self) -> Result<Option<FieldSpec>, ProtocolError> {
        match *self {
            ProtocolParams::QskProd { p, r, .. } => Ok(Some(build_field(p, r)?)),
            ProtocolParams::QskAnd { .. } => Ok(Some(build_field(2, 1)?)),
            _ => Ok(None),
        }
    }

    pub fn scheme(&self) -> Result<Box<dyn Scheme>, ProtocolError> {
        self.validate()?;
        Ok(match *self {
            ProtocolParams::Qs2AndCited => Box::new(CitedAnd),
            ProtocolParams::Qs2AndNew => Box::new(NewAnd),
            ProtocolParams::QskSum { d, k } => Box::new(Sum::new(d, k)),
            ProtocolParams::BrokenQskSum { d, k } => Box::new(Sum::broken(d, k)),
            ProtocolParams::QskProd { p, r, k } => Box::new(Prod::new(build_field(p, r)?, k)),
            ProtocolParams::QskAnd { k } => Box::new(Prod {
                field: build_field(2, 1)?,
                k,
                id: ProtocolId::QskAnd,
            }),
            ProtocolParams::DotDemo => Box::new(DotDemo),
        })
    }

    /// `2/K`, the converse bound shared by the sum and product capacities.
    pub fn upper_bound(&self) -> f64 {
        2.0 / self.users() as f64
    }

    /// `(2/K) / (log_d(2K-1) + log_d(d-1))` for the product family, `K >= 2`.
    pub fn lower_bound(&self) -> Option<f64> {
        let k = match *self {
            ProtocolParams::QskProd { k, .. } | ProtocolParams::QskAnd { k } if k >= 2 => k,
            _ => return None,
        };
        let d = self.dimension() as f64;
        let log = |x: f64| x.ln() / d.ln();
        Some((2.0 / k as f64) / (log(2.0 * k as f64 - 1.0) + log(d - 1.0)))
    }

    /// The rate the construction is designed to reach.
    pub fn expected_rate(&self) -> f64 {
        let log2 = |x: f64| x.log2();
        match *self {
            ProtocolParams::Qs2AndCited => 0.5,
            ProtocolParams::Qs2AndNew => 1.0 / log2(3.0),
            ProtocolParams::DotDemo => 1.0 / log2(11.0),
            ProtocolParams::QskSum { k: 1, .. }
            | ProtocolParams::BrokenQskSum { k: 1, .. }
            | ProtocolParams::QskProd { k: 1, .. }
            | ProtocolParams::QskAnd { k: 1 } => 1.0,
            ProtocolParams::QskSum { k, .. } | ProtocolParams::BrokenQskSum { k, .. } => 2.0 / k as f64,
            ProtocolParams::QskProd { k, .. } | ProtocolParams::QskAnd { k } => {
                let d = self.dimension() as f64;
                let log = |x: f64| x.ln() / d.ln();
                let p = bertrand_prime(k as u32) as f64;
                (2.0 / k as f64) / (log(p) + log(d - 1.0))
            }
        }
    }

    /// Runs `batches` batches with uniform data and freshly sampled randomness.
    pub fn run_batches<R: Rng + ?Sized>(
        &self,
        session: &mut Session,
        batches: usize,
        rng: &mut R,
    ) -> Result<Vec<ProtocolRun>, ProtocolError> {
        self.validate()?;
        let mut runs = Vec::new();
        match *self {
            ProtocolParams::Qs2AndCited => {
                for _ in 0..batches {
                    let z = *CITED_AND_RANDOMNESS.choose(rng).expect("nonempty");
                    runs.push(qs2_and_cited(session, rng.gen_range(0..2), rng.gen_range(0..2), z)?);
                }
            }
            ProtocolParams::Qs2AndNew => {
                for _ in 0..batches {
                    let z = *NEW_AND_RANDOMNESS.choose(rng).expect("nonempty");
                    runs.push(qs2_and_new(session, rng.gen_range(0..2), rng.gen_range(0..2), z)?);
                }
            }
            ProtocolParams::DotDemo => {
                for _ in 0..batches {
                    let a = [rng.gen_range(0..2), rng.gen_range(0..2)];
                    let b = [rng.gen_range(0..2), rng.gen_range(0..2)];
                    let r = *DOT_MASKS.choose(rng).expect("nonempty");
                    runs.push(dot_product_demo(session, a, b, r)?);
                }
            }
            _ => {
                let k = self.users();
                let n = batches * self.batch_instances();
                let d = self.dimension();
                let entries = (0..k * n).map(|_| rng.gen_range(0..d)).collect();
                let stream = DataMatrix::new(k, n, d, entries)?;
                runs = self.run_stream(session, &stream, rng)?;
            }
        }
        Ok(runs)
    }

    /// Runs a `K x n` data stream (sum and product families only).
    pub fn run_stream<R: Rng + ?Sized>(
        &self,
        session: &mut Session,
        stream: &DataMatrix,
        rng: &mut R,
    ) -> Result<Vec<ProtocolRun>, ProtocolError> {
        match *self {
            ProtocolParams::QskSum { d, k } => qsk_sum(session, d, k, stream, rng, false),
            ProtocolParams::BrokenQskSum { d, k } => qsk_sum(session, d, k, stream, rng, true),
            ProtocolParams::QskProd { p, r, k } => qsk_prod_stream(session, &build_field(p, r)?, k, stream, rng),
            ProtocolParams::QskAnd { k } => qsk_and_stream(session, k, stream, rng),
            _ => Err(invalid(format!("{} takes no data stream", self.name()))),
        }
    }
}
