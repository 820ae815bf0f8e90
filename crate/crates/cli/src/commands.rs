use crate::args::{Format, ListArgs, RunArgs, SweepArgs, VerifyArgs};
use crate::config::{self, RunConfig};
use crate::error::{CliError, Kind};
use qmac_core::channel::{RateExpr, SessionSummary};
use qmac_core::protocols::{
    dot_product_demo, qs2_and_cited, qs2_and_new, DataMatrix, ProtocolRun, CITED_AND_RANDOMNESS,
    DOT_MASKS, NEW_AND_RANDOMNESS,
};
use qmac_core::verify::{reconcile_rate, verify_exhaustive, ProtocolParams, RateReport, Verification};
use qmac_core::{CostLedger, Session, SimMode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

pub const SCHEMA_VERSION: &str = "qmac-seccomp/1";
const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
struct Timing {
    elapsed_ms: f64,
}

impl Timing {
    fn since(start: Instant) -> Self {
        Self { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }
    }
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'static str,
    tool_version: &'static str,
    command: &'static str,
    #[serde(flatten)]
    body: &'a T,
    timing: Timing,
}

fn emit<T: Serialize>(command: &'static str, body: &T, start: Instant, out: Option<&Path>) -> Result<(), CliError> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        command,
        body,
        timing: Timing::since(start),
    };
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    write_out(text.as_bytes(), out)
}

fn write_out(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn json_only(format: Format, command: &str) -> Result<(), CliError> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::config(format!("{command} reports are JSON only; CSV is for sweep"))),
    }
}

fn bit(raw: &str, name: &str) -> Result<u32, CliError> {
    match raw {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(CliError::config(format!("--{name} must be 0 or 1, got {raw:?}"))),
    }
}

fn bit_pair(raw: &str, name: &str) -> Result<[u32; 2], CliError> {
    let bits: Vec<_> = raw.chars().map(|c| bit(&c.to_string(), name)).collect::<Result<_, _>>()?;
    match bits[..] {
        [x, y] => Ok([x, y]),
        _ => Err(CliError::config(format!("--{name} must be two bits such as 10, got {raw:?}"))),
    }
}

#[derive(Debug, Serialize)]
struct RunBody {
    config: RunConfig,
    runs: Vec<ProtocolRun>,
    /// Decoded `F`, one entry per run.
    outputs: Vec<Vec<u32>>,
    computations: u64,
    ledger: CostLedger,
    rate: RateExpr,
    rate_symbolic: String,
    session: SessionSummary,
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let start = Instant::now();
    json_only(args.common.format, "run")?;
    let mut config = RunConfig::from_common(&args.common)?;
    config.instances = args.instances;
    config.a = args.a.clone();
    config.b = args.b.clone();
    config.z = args.z;
    let params = config.params;
    let fixed = matches!(params, ProtocolParams::Qs2AndCited | ProtocolParams::Qs2AndNew | ProtocolParams::DotDemo);
    if fixed && args.instances.is_some() {
        return Err(CliError::config(format!("{} runs one instance; --instances does not apply", params.name())));
    }
    if !fixed && (args.a.is_some() || args.b.is_some()) {
        return Err(CliError::config(format!("--a/--b apply only to the two-user protocols, not {}", params.name())));
    }
    if args.z.is_some() && !matches!(params, ProtocolParams::Qs2AndCited | ProtocolParams::Qs2AndNew) {
        return Err(CliError::config("--z applies only to qs2-and-cited and qs2-and-new"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut session = Session::new(config.mode).with_padding(config.mode == SimMode::QuantumVerified);
    let runs = match params {
        ProtocolParams::Qs2AndCited | ProtocolParams::Qs2AndNew => {
            let a = match &args.a {
                Some(a) => bit(a, "a")?,
                None => rng.gen_range(0..2),
            };
            let b = match &args.b {
                Some(b) => bit(b, "b")?,
                None => rng.gen_range(0..2),
            };
            let table: &[u32] = if params == ProtocolParams::Qs2AndCited { &CITED_AND_RANDOMNESS } else { &NEW_AND_RANDOMNESS };
            let z = args.z.unwrap_or_else(|| *table.choose(&mut rng).expect("nonempty"));
            let run = if params == ProtocolParams::Qs2AndCited { qs2_and_cited } else { qs2_and_new };
            vec![run(&mut session, a, b, z)?]
        }
        ProtocolParams::DotDemo => {
            let a = match &args.a {
                Some(a) => bit_pair(a, "a")?,
                None => [rng.gen_range(0..2), rng.gen_range(0..2)],
            };
            let b = match &args.b {
                Some(b) => bit_pair(b, "b")?,
                None => [rng.gen_range(0..2), rng.gen_range(0..2)],
            };
            let r = config.mask.unwrap_or_else(|| *DOT_MASKS.choose(&mut rng).expect("nonempty"));
            vec![dot_product_demo(&mut session, a, b, r)?]
        }
        _ => {
            let n = args.instances.unwrap_or_else(|| params.batch_instances());
            if n == 0 {
                return Err(CliError::config("--instances must be at least 1"));
            }
            let k = params.users();
            let alphabet = params.dimension();
            let entries = (0..k * n).map(|_| rng.gen_range(0..alphabet)).collect();
            let stream = DataMatrix::new(k, n, alphabet, entries)?;
            params.run_stream(&mut session, &stream, &mut rng)?
        }
    };
    let summary = session.close()?;
    let computations: u64 = runs.iter().map(ProtocolRun::computations).sum();
    let base = runs[0].rate_base;
    let rate = summary.ledger.rate_expr(computations, base);
    let body = RunBody {
        outputs: runs.iter().map(|r| r.output.clone()).collect(),
        rate_symbolic: rate.symbolic(),
        ledger: summary.ledger.clone(),
        rate,
        computations,
        session: summary,
        runs,
        config,
    };
    emit("run", &body, start, args.common.out.as_deref())
}

#[derive(Debug, Serialize)]
struct Checks {
    correctness: bool,
    security: bool,
    cmi_zero: bool,
    rate: bool,
}

impl Checks {
    fn new(v: &Verification, rate: &RateReport) -> Self {
        Self {
            correctness: v.correctness.passed,
            security: v.security.verdict == qmac_core::verify::SecurityVerdict::Secure,
            cmi_zero: v.cmi.exactly_zero,
            rate: rate.verdict.passed,
        }
    }

    fn passed(&self) -> bool {
        self.correctness && self.security && self.cmi_zero && self.rate
    }

    fn failing(&self) -> Vec<&'static str> {
        [
            (self.correctness, "correctness"),
            (self.security, "security"),
            (self.cmi_zero, "cmi"),
            (self.rate, "rate"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

#[derive(Debug, Serialize)]
struct VerifyBody {
    config: RunConfig,
    passed: bool,
    checks: Checks,
    verification: Verification,
    rate: RateReport,
}

fn verify_params(params: &ProtocolParams, limit: u128) -> Result<(Verification, RateReport), CliError> {
    let scheme = params.scheme()?;
    let verification = verify_exhaustive(scheme.as_ref(), limit)?;
    let rate = reconcile_rate(params)?;
    Ok((verification, rate))
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    json_only(args.common.format, "verify")?;
    let config = RunConfig::from_common(&args.common)?;
    if config.mask.is_some() {
        return Err(CliError::config("verify enumerates every mask; --r does not apply to dot-demo here"));
    }
    let (verification, rate) = verify_params(&config.params, config.limit)?;
    let checks = Checks::new(&verification, &rate);
    let failing = checks.failing();
    let body = VerifyBody {
        passed: checks.passed(),
        checks,
        verification,
        rate,
        config,
    };
    emit("verify", &body, start, args.common.out.as_deref())?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::failed(format!("{} failed: {}", body.verification.label, failing.join(", "))))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub protocol: String,
    pub d: u32,
    pub k: usize,
    pub status: &'static str,
    pub correctness: Option<bool>,
    pub security: Option<bool>,
    pub cmi_zero: Option<bool>,
    pub rate_ok: Option<bool>,
    pub rate: Option<f64>,
    pub rate_symbolic: Option<String>,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    pub evaluations: Option<u128>,
    pub detail: String,
}

fn sweep_cell(name: &str, d: u32, k: usize, limit: u128) -> (SweepRow, Option<Kind>) {
    let mut row = SweepRow {
        protocol: name.to_string(),
        d,
        k,
        status: "pass",
        correctness: None,
        security: None,
        cmi_zero: None,
        rate_ok: None,
        rate: None,
        rate_symbolic: None,
        upper_bound: None,
        lower_bound: None,
        evaluations: None,
        detail: String::new(),
    };
    let outcome = config::params(name, Some(d), None, None, Some(k)).and_then(|p| verify_params(&p, limit));
    match outcome {
        Ok((v, rate)) => {
            let checks = Checks::new(&v, &rate);
            row.correctness = Some(checks.correctness);
            row.security = Some(checks.security);
            row.cmi_zero = Some(checks.cmi_zero);
            row.rate_ok = Some(checks.rate);
            row.rate = Some(rate.achieved.approx);
            row.rate_symbolic = Some(rate.achieved_symbolic.clone());
            row.upper_bound = Some(rate.upper_bound);
            row.lower_bound = rate.lower_bound;
            row.evaluations = Some(v.evaluations);
            if checks.passed() {
                (row, None)
            } else {
                row.status = Kind::Verification.label();
                row.detail = format!("failed: {}", checks.failing().join(", "));
                (row, Some(Kind::Verification))
            }
        }
        Err(e) => {
            row.status = e.kind.label();
            row.detail = e.message;
            (row, Some(e.kind))
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepConfig {
    protocol: String,
    d: Vec<u64>,
    k: Vec<u64>,
    limit: u128,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    cells: usize,
    passed: usize,
    failed: usize,
}

#[derive(Debug, Serialize)]
struct SweepBody {
    config: SweepConfig,
    summary: SweepSummary,
    rows: Vec<SweepRow>,
}

fn csv_cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "protocol", "d", "k", "status", "correctness", "security", "cmi_zero", "rate_ok", "rate", "rate_symbolic",
        "upper_bound", "lower_bound", "evaluations", "detail",
    ])?;
    for r in rows {
        w.write_record([
            r.protocol.clone(),
            r.d.to_string(),
            r.k.to_string(),
            r.status.to_string(),
            csv_cell(&r.correctness),
            csv_cell(&r.security),
            csv_cell(&r.cmi_zero),
            csv_cell(&r.rate_ok),
            csv_cell(&r.rate),
            csv_cell(&r.rate_symbolic),
            csv_cell(&r.upper_bound),
            csv_cell(&r.lower_bound),
            csv_cell(&r.evaluations),
            r.detail.clone(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::internal(format!("CSV output failed: {e}")))
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let name = config::protocol_name(&args.protocol)?;
    if !ProtocolParams::names().contains(&name.as_str()) {
        return Err(CliError::config(format!("unknown protocol {name:?}")));
    }
    let ds = config::parse_grid(&args.d)?;
    let ks = config::parse_grid(&args.k)?;
    let limit = config::parse_limit(args.limit.as_deref())?;
    let cells = config::grid(&name, &ds, &ks);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::internal(e.to_string()))?;
    let results: Vec<(SweepRow, Option<Kind>)> =
        pool.install(|| cells.par_iter().map(|&(d, k)| sweep_cell(&name, d, k, limit)).collect());

    let worst = results.iter().filter_map(|(_, k)| *k).max();
    let rows: Vec<SweepRow> = results.into_iter().map(|(r, _)| r).collect();
    let passed = rows.iter().filter(|r| r.status == "pass").count();
    match args.format {
        Format::Csv => write_out(&sweep_csv(&rows)?, args.out.as_deref())?,
        Format::Json => {
            let body = SweepBody {
                config: SweepConfig { protocol: name, d: ds, k: ks, limit },
                summary: SweepSummary { cells: rows.len(), passed, failed: rows.len() - passed },
                rows,
            };
            emit("sweep", &body, start, args.out.as_deref())?;
        }
    }
    match worst {
        None => Ok(()),
        Some(kind) => Err(CliError { kind, message: format!("sweep: {} of {} cells did not pass", cells.len() - passed, cells.len()) }),
    }
}

#[derive(Debug, Serialize)]
struct ProtocolInfo {
    name: &'static str,
    parameters: &'static str,
    description: &'static str,
}

const PROTOCOLS: [ProtocolInfo; 7] = [
    ProtocolInfo { name: "qs2-and-cited", parameters: "--a --b --z", description: "two-user AND, three-valued randomness, rate 1/2" },
    ProtocolInfo { name: "qs2-and-new", parameters: "--a --b --z", description: "two-user AND over one qutrit use, rate 1/log2(3)" },
    ProtocolInfo { name: "qsk-sum", parameters: "--d --k --instances", description: "K-user sum over Z_d at rate 2/K" },
    ProtocolInfo { name: "broken-qsk-sum", parameters: "--d --k --instances", description: "qsk-sum with its randomness forced to zero; insecure for K >= 3" },
    ProtocolInfo { name: "qsk-prod", parameters: "--d | --p --r, --k --instances", description: "K-user product over GF(d), d a prime power" },
    ProtocolInfo { name: "qsk-and", parameters: "--k --instances", description: "K-user AND, the product over GF(2)" },
    ProtocolInfo { name: "dot-demo", parameters: "--a --b --r", description: "inner product of two 2-bit vectors over Z_11" },
];

pub fn list(args: ListArgs) -> Result<(), CliError> {
    debug_assert_eq!(PROTOCOLS.map(|p| p.name), ProtocolParams::names());
    match args.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&PROTOCOLS)?;
            text.push('\n');
            write_out(text.as_bytes(), None)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "parameters", "description"])?;
            for p in &PROTOCOLS {
                w.write_record([p.name, p.parameters, p.description])?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
            write_out(&bytes, None)
        }
    }
}
