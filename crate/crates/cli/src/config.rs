use crate::args::{Common, Mode, ProtocolArg};
use crate::error::CliError;
use qmac_core::verify::{ProtocolParams, DEFAULT_LIMIT};
use qmac_core::SimMode;
use serde::Serialize;

pub fn protocol_name(arg: &ProtocolArg) -> Result<String, CliError> {
    match (&arg.positional, &arg.flag) {
        (Some(a), Some(b)) if a != b => Err(CliError::config(format!(
            "protocol given twice: {a:?} and --protocol {b:?}"
        ))),
        (Some(a), _) | (None, Some(a)) => Ok(a.clone()),
        (None, None) => Err(CliError::config(format!(
            "no protocol given; choose one of {}",
            ProtocolParams::names().join(", ")
        ))),
    }
}

fn is_fixed(name: &str) -> bool {
    matches!(name, "qs2-and-cited" | "qs2-and-new" | "dot-demo")
}

/// Resolves the family parameters. `--r` is the extension degree only for qsk-prod.
pub fn params(name: &str, d: Option<u32>, p: Option<u32>, r: Option<u32>, k: Option<usize>) -> Result<ProtocolParams, CliError> {
    let k = k.unwrap_or(2);
    if name == "qsk-prod" {
        let params = match (p, d) {
            (Some(p), d) => {
                let r = r.unwrap_or(1);
                if let Some(d) = d {
                    if p.checked_pow(r) != Some(d) {
                        return Err(CliError::config(format!("--d {d} disagrees with --p {p} --r {r}")));
                    }
                }
                let params = ProtocolParams::QskProd { p, r, k };
                params.validate()?;
                params
            }
            (None, Some(d)) => {
                if r.is_some() {
                    return Err(CliError::config("--r needs --p for qsk-prod"));
                }
                ProtocolParams::from_name(name, d, k)?
            }
            (None, None) => return Err(CliError::config("qsk-prod needs --d or --p")),
        };
        return Ok(params);
    }
    if p.is_some() {
        return Err(CliError::config(format!("--p applies only to qsk-prod, not {name}")));
    }
    if r.is_some() && name != "dot-demo" {
        return Err(CliError::config(format!("--r applies only to qsk-prod and dot-demo, not {name}")));
    }
    Ok(ProtocolParams::from_name(name, d.unwrap_or(2), k)?)
}

/// Parses `1000000`, `1e8` or `2.5e9`.
pub fn parse_limit(raw: Option<&str>) -> Result<u128, CliError> {
    let Some(raw) = raw else { return Ok(DEFAULT_LIMIT) };
    let raw = raw.trim().replace('_', "");
    if let Ok(v) = raw.parse::<u128>() {
        return Ok(v);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < 1e38 => Ok(v as u128),
        _ => Err(CliError::config(format!("invalid limit {raw:?}"))),
    }
}

/// Comma-separated numbers and inclusive ranges `a-b`; an empty string is an empty grid.
pub fn parse_grid(raw: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::config(format!("invalid grid entry {part:?}"));
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.dedup();
    Ok(out)
}

/// Grid cells in order: `d` outer, `K` inner. Fixed two-user protocols take one cell.
pub fn grid(name: &str, ds: &[u64], ks: &[u64]) -> Vec<(u32, usize)> {
    if ds.is_empty() || ks.is_empty() {
        return Vec::new();
    }
    if is_fixed(name) {
        return vec![(2, 2)];
    }
    ds.iter()
        .flat_map(|&d| ks.iter().map(move |&k| (d.min(u32::MAX as u64) as u32, k as usize)))
        .collect()
}

pub fn sim_mode(mode: Mode) -> SimMode {
    match mode {
        Mode::Abstract => SimMode::Abstract,
        Mode::Quantum => SimMode::QuantumVerified,
    }
}

/// Echo of the resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub protocol: String,
    pub params: ProtocolParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    pub mode: SimMode,
    pub seed: u64,
    pub limit: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<u32>,
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<Self, CliError> {
        let protocol = protocol_name(&c.protocol)?;
        let params = params(&protocol, c.d, c.p, c.r, c.k)?;
        Ok(Self {
            mask: if protocol == "dot-demo" { c.r } else { None },
            protocol,
            params,
            instances: None,
            mode: sim_mode(c.mode),
            seed: c.seed,
            limit: parse_limit(c.limit.as_deref())?,
            a: None,
            b: None,
            z: None,
        })
    }
}
