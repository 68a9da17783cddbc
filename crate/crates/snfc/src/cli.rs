//! The `snfc` command line: load networks and codes, compute bounds,
//! construct and verify secure codes, run the brute-force oracle, and emit
//! deterministic JSON reports.
//!
//! Exit codes: 0 all requested checks pass, 2 insecure or incomputable,
//! 3 construction failure, 4 input error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{self, BoundMode};
use crate::code::{CodeFile, LinearCode};
use crate::construct::{self, Construction, TransformMode};
use crate::fixtures;
use crate::gf::FieldSpec;
use crate::network::{EdgeId, Limits, NetError, Network, NetworkFile};
use crate::oracle::{self, SecurityCriterion, Statistic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INSECURE: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "snfc",
    version,
    about = "Secure network function computation for sums over GF(q)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct NetworkArg {
    /// Network JSON file.
    #[arg(value_name = "NETWORK", required_unless_present_any = ["fixture", "network_flag"])]
    pub network: Option<PathBuf>,
    /// Network JSON file (flag form).
    #[arg(long = "network", value_name = "PATH", conflicts_with = "network")]
    pub network_flag: Option<PathBuf>,
    /// Embedded example network: rbfly or toy2.
    #[arg(long, conflicts_with_all = ["network", "network_flag"])]
    pub fixture: Option<String>,
}

#[derive(Debug, Args)]
pub struct CodeArg {
    /// Code JSON file.
    #[arg(long, required_unless_present = "code_fixture")]
    pub code: Option<PathBuf>,
    /// Embedded example code: rbfly-base, rbfly-secure, or toy2-sum.
    #[arg(long, conflicts_with = "code")]
    pub code_fixture: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundModeArg {
    Exhaustive,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructModeArg {
    Target,
    SourceGen,
    SourceLegacy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SecurityArg {
    Target,
    Source,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity bounds for one security level.
    Bound {
        #[command(flatten)]
        net: NetworkArg,
        /// Security level (max wiretap set size).
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = BoundModeArg::Exhaustive)]
        mode: BoundModeArg,
        /// Cap on edges for exhaustive enumeration.
        #[arg(long)]
        max_enum_edges: Option<usize>,
    },
    /// Construct a secure code and verify it end to end.
    Construct {
        #[command(flatten)]
        net: NetworkArg,
        /// Base-code rate (messages plus keys per source).
        #[arg(long = "R", value_name = "R")]
        big_rate: usize,
        /// Security level.
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = ConstructModeArg::Target)]
        mode: ConstructModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the constructed code (with provenance) here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Select against the reduced wiretap collection (default) or the
        /// full one.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        reduce_wiretaps: bool,
        /// Override the field carried by the network file.
        #[arg(long)]
        field: Option<u64>,
        #[arg(long)]
        max_enum_edges: Option<usize>,
    },
    /// Check computability and security of an existing code.
    Verify {
        #[command(flatten)]
        net: NetworkArg,
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = SecurityArg::Both)]
        security: SecurityArg,
        /// Cross-check every verdict with the brute-force oracle.
        #[arg(long)]
        oracle: bool,
        /// Scan the reduced wiretap collection instead of the full one.
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        reduce_wiretaps: bool,
        #[arg(long)]
        max_enum_edges: Option<usize>,
    },
    /// Run a code on one assignment and show every edge symbol.
    Simulate {
        #[command(flatten)]
        net: NetworkArg,
        #[command(flatten)]
        code: CodeArg,
        /// Source messages, flattened source-major (s times ell values).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = false)]
        messages: Vec<u64>,
        /// Source keys, flattened source-major (sum of z values); omit for
        /// keyless codes.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        keys: Vec<u64>,
    },
    /// Reduce the wiretap collection to its self-primary members.
    Reduce {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        max_enum_edges: Option<usize>,
    },
    /// Count the admissible transform sets behind both constructions.
    Count {
        #[command(flatten)]
        net: NetworkArg,
        #[arg(long = "R", value_name = "R")]
        big_rate: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the field carried by the network file.
        #[arg(long)]
        field: Option<u64>,
    },
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: Value,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub kind: &'static str,
    pub source: String,
    pub sha256: String,
}

/// A command failure carrying the proper exit code.
#[derive(Debug)]
pub struct Failure {
    pub exit: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn construction(message: impl Into<String>) -> Self {
        Failure {
            exit: EXIT_CONSTRUCTION,
            message: message.into(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn oracle_cap() -> u64 {
    std::env::var("SNFC_MAX_ORACLE")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(oracle::DEFAULT_ORACLE_CAP)
}

struct LoadedNetwork {
    net: Network,
    field: FieldSpec,
    record: InputRecord,
}

fn load_network(arg: &NetworkArg) -> Result<LoadedNetwork, Failure> {
    let path_arg = arg.network.as_ref().or(arg.network_flag.as_ref());
    let (text, source) = match (path_arg, &arg.fixture) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            (text, path.display().to_string())
        }
        (None, Some(name)) => {
            let text = fixtures::network_fixture(name).ok_or_else(|| {
                Failure::input(format!(
                    "unknown network fixture `{name}`; available: {}",
                    fixtures::NETWORK_FIXTURES.join(", ")
                ))
            })?;
            (text.to_string(), format!("fixture:{name}"))
        }
        _ => return Err(Failure::input("give a network path or --fixture")),
    };
    let file = NetworkFile::parse(&text).map_err(|e| Failure::input(e.to_string()))?;
    let (net, field) = file
        .to_network()
        .map_err(|e| Failure::input(e.to_string()))?;
    let record = InputRecord {
        kind: "network",
        source,
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok(LoadedNetwork { net, field, record })
}

fn load_code(arg: &CodeArg, net: &Network) -> Result<(LinearCode, InputRecord), Failure> {
    let (text, source) = match (&arg.code, &arg.code_fixture) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            (text, path.display().to_string())
        }
        (None, Some(name)) => {
            let text = fixtures::code_fixture(name).ok_or_else(|| {
                Failure::input(format!(
                    "unknown code fixture `{name}`; available: {}",
                    fixtures::CODE_FIXTURES.join(", ")
                ))
            })?;
            (text.to_string(), format!("fixture:{name}"))
        }
        _ => return Err(Failure::input("give --code or --code-fixture")),
    };
    let file = CodeFile::parse(&text).map_err(|e| Failure::input(e.to_string()))?;
    let code = file
        .to_code(net)
        .map_err(|e| Failure::input(e.to_string()))?;
    let record = InputRecord {
        kind: "code",
        source,
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((code, record))
}

fn limits_with(max_enum_edges: Option<usize>) -> Limits {
    let mut limits = Limits::default();
    if let Some(cap) = max_enum_edges {
        limits.max_enum_edges = cap;
    }
    limits
}

fn edge_names(net: &Network, set: &[EdgeId]) -> Vec<String> {
    set.iter().map(|&e| net.edge(e).id.clone()).collect()
}

fn witness_json(net: &Network, w: &Option<bounds::WitnessPair>) -> Value {
    match w {
        Some(pair) => json!({
            "cut": edge_names(net, &pair.cut),
            "wiretap": edge_names(net, &pair.wiretap),
        }),
        None => Value::Null,
    }
}

/// Parses and runs, printing the report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok((report, exit)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            exit
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.exit
        }
    }
}

/// Runs one command and returns the report plus the exit code.
pub fn execute(command: Command) -> Result<(RunReport, i32), Failure> {
    match command {
        Command::Bound {
            net,
            r,
            mode,
            max_enum_edges,
        } => cmd_bound(net, r, mode, max_enum_edges),
        Command::Construct {
            net,
            big_rate,
            r,
            mode,
            seed,
            out,
            reduce_wiretaps,
            field,
            max_enum_edges,
        } => cmd_construct(
            net,
            big_rate,
            r,
            mode,
            seed,
            out,
            reduce_wiretaps,
            field,
            max_enum_edges,
        ),
        Command::Verify {
            net,
            code,
            r,
            security,
            oracle,
            reduce_wiretaps,
            max_enum_edges,
        } => cmd_verify(
            net,
            code,
            r,
            security,
            oracle,
            reduce_wiretaps,
            max_enum_edges,
        ),
        Command::Simulate {
            net,
            code,
            messages,
            keys,
        } => cmd_simulate(net, code, messages, keys),
        Command::Reduce {
            net,
            r,
            max_enum_edges,
        } => cmd_reduce(net, r, max_enum_edges),
        Command::Count {
            net,
            big_rate,
            r,
            seed,
            field,
        } => cmd_count(net, big_rate, r, seed, field),
    }
}

fn cmd_bound(
    net_arg: NetworkArg,
    r: usize,
    mode: BoundModeArg,
    max_enum_edges: Option<usize>,
) -> Result<(RunReport, i32), Failure> {
    let loaded = load_network(&net_arg)?;
    let limits = limits_with(max_enum_edges);
    let mut warnings = Vec::new();
    let mut mode = match mode {
        BoundModeArg::Exhaustive => BoundMode::Exhaustive,
        BoundModeArg::ClosedForm => BoundMode::ClosedForm,
    };
    let report = match bounds::bound_report(&loaded.net, r, mode, &limits) {
        Ok(rep) => rep,
        Err(NetError::TooLarge(msg)) => {
            warnings.push(format!(
                "exhaustive enumeration skipped ({msg}); closed form only"
            ));
            mode = BoundMode::ClosedForm;
            bounds::bound_report(&loaded.net, r, mode, &limits)
                .map_err(|e| Failure::input(e.to_string()))?
        }
        Err(e) => return Err(Failure::input(e.to_string())),
    };
    let results = json!({
        "r": report.r,
        "mode": report.mode,
        "c_min": report.c_min,
        "c_min_s": report.c_min_s,
        "target_bound": report.target_bound,
        "closed_lower": report.closed_lower,
        "closed_upper": report.closed_upper,
        "source_bound": report.source_bound,
        "target_witness": witness_json(&loaded.net, &report.target_witness),
        "source_witness": witness_json(&loaded.net, &report.source_witness),
    });
    Ok((
        RunReport {
            command: "bound".into(),
            inputs: vec![loaded.record],
            seed: None,
            results,
            warnings,
        },
        EXIT_OK,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_construct(
    net_arg: NetworkArg,
    big_rate: usize,
    r: usize,
    mode: ConstructModeArg,
    seed: u64,
    out: Option<PathBuf>,
    reduce_wiretaps: bool,
    field_override: Option<u64>,
    max_enum_edges: Option<usize>,
) -> Result<(RunReport, i32), Failure> {
    let loaded = load_network(&net_arg)?;
    let field = match field_override {
        Some(q) => FieldSpec::from_order(q).map_err(|e| Failure::input(e.to_string()))?,
        None => loaded.field.clone(),
    };
    let net = &loaded.net;
    let limits = limits_with(max_enum_edges);
    let c_min = net.c_min();
    if r > big_rate || big_rate > c_min {
        return Err(Failure::input(format!(
            "need r <= R <= C_min, got r={r}, R={big_rate}, C_min={c_min}"
        )));
    }
    let mut warnings = Vec::new();
    let need = construct::required_field_size(net, r, reduce_wiretaps, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let wiretaps = net
        .wiretap_collection(r, reduce_wiretaps, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    // The guaranteed-sufficient field size differs per mode: wiretap count
    // plus sources for the per-source transform, sources times wiretap count
    // for the shared one.
    let mode_hint = match mode {
        ConstructModeArg::Target => need.threshold,
        _ => net.source_count() as u64 * need.counted_sets as u64,
    };
    let built: Construction = match mode {
        ConstructModeArg::Target => construct::construct_target(net, &field, big_rate, r, seed, &wiretaps),
        ConstructModeArg::SourceGen => {
            construct::construct_source_generalized(net, &field, big_rate, r, seed, &wiretaps)
        }
        ConstructModeArg::SourceLegacy => {
            construct::construct_source_legacy(net, &field, big_rate, r, seed, &wiretaps)
        }
    }
    .map_err(|e| {
        let (degree, order) = construct::extension_plan(field.order(), mode_hint);
        let lift = if degree > 1 {
            format!(
                "; lifting to GF({}^{degree}) = GF({order}) gives an ({}, {degree}) code at the same rate",
                field.order(),
                (big_rate - r) * degree as usize
            )
        } else {
            String::new()
        };
        Failure::construction(format!("{e}; guaranteed for field size q > {mode_hint}{lift}"))
    })?;

    let code = &built.code;
    if code.ell() == 0 {
        warnings.push(
            "constructed rate is 0; codes beating the C_min - r guarantee may still exist \
             and can be checked with `verify`"
                .into(),
        );
    }
    // Full verification before declaring success.
    let full = net
        .wiretap_collection(r, false, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let computable = code.check_computability(net).is_some();
    let target = code.check_target_security(net, &full);
    let source_secure = match mode {
        ConstructModeArg::Target => None,
        _ => Some(code.check_source_security(net, &full).secure),
    };
    let cap = oracle_cap();
    let dim_cost = (field.order() as u128).checked_pow(code.dim() as u32);
    let oracle_secure = if dim_cost.is_some_and(|c| c <= cap as u128) {
        match oracle::oracle_security(code, &full, Statistic::TargetFn, cap) {
            Ok(rep) => Some(rep.secure),
            Err(e) => {
                warnings.push(format!("oracle skipped: {e}"));
                None
            }
        }
    } else {
        warnings.push("oracle skipped: assignment space exceeds the cap".to_string());
        None
    };
    if !computable || !target.secure || source_secure == Some(false) || oracle_secure == Some(false)
    {
        return Err(Failure::construction(
            "constructed code failed its own verification",
        ));
    }

    let mode_name = match built.kit.mode {
        TransformMode::Target => "target",
        TransformMode::SourceGeneralized => "source-gen",
        TransformMode::SourceLegacy => "source-legacy",
    };
    // How the achieved rate compares against the enumerated bound; the gap
    // is open when the two min cuts differ, so tightness is only a claim
    // when they coincide or the bound is met.
    let bound_context = match bounds::target_bound(net, r, &limits) {
        Ok((tb, _)) => json!({
            "target_bound": tb,
            "achieved_rate": code.ell(),
            "certified_tight": code.ell() == tb,
            "closed_form": bounds::closed_form(net, r),
        }),
        Err(_) => json!({ "closed_form": bounds::closed_form(net, r) }),
    };
    let mut results = json!({
        "bound_context": bound_context,
        "mode": mode_name,
        "rate": code.ell(),
        "ell": code.ell(),
        "z": code.z(),
        "field": field.order(),
        "field_size_threshold": need,
        "checks": {
            "computable": computable,
            "target_secure": target.secure,
            "source_secure": source_secure,
            "oracle_target_secure": oracle_secure,
        },
    });
    if let Some(path) = out {
        let mut file = CodeFile::from_code(net, code);
        let base_file = CodeFile::from_code(net, &built.base);
        let base_json = serde_json::to_string(&base_file).expect("base serializes");
        file.provenance = Some(json!({
            "seed": seed,
            "base_sha256": sha256_hex(base_json.as_bytes()),
            "kit": {
                "mode": mode_name,
                "r": built.kit.r,
                "blocks": built.kit.blocks().iter().map(|b| {
                    (0..b.rows()).map(|i| b.row(i).to_vec()).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            },
            "wiretap_collection": {
                "r": built.wiretaps.r,
                "reduced": built.wiretaps.reduced,
                "sets": built.wiretaps.sets.iter().map(|w| edge_names(net, w)).collect::<Vec<_>>(),
            },
        }));
        let text = serde_json::to_string_pretty(&file).expect("code serializes");
        std::fs::write(&path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
        results["out"] = json!(path.display().to_string());
    }
    Ok((
        RunReport {
            command: "construct".into(),
            inputs: vec![loaded.record],
            seed: Some(seed),
            results,
            warnings,
        },
        EXIT_OK,
    ))
}

fn cmd_verify(
    net_arg: NetworkArg,
    code_arg: CodeArg,
    r: usize,
    security: SecurityArg,
    with_oracle: bool,
    reduce_wiretaps: bool,
    max_enum_edges: Option<usize>,
) -> Result<(RunReport, i32), Failure> {
    let loaded = load_network(&net_arg)?;
    let net = &loaded.net;
    let (code, code_record) = load_code(&code_arg, net)?;
    if code.field() != &loaded.field {
        return Err(Failure::input(format!(
            "code field GF({}) does not match network field GF({})",
            code.field().order(),
            loaded.field.order()
        )));
    }
    let limits = limits_with(max_enum_edges);
    let wiretaps = net
        .wiretap_collection(r, reduce_wiretaps, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let mut warnings = Vec::new();
    let cap = oracle_cap();

    let decoder = code.check_computability(net);
    let computable = decoder.is_some();
    let decoder_json = decoder
        .map(|d| Value::Array((0..d.rows()).map(|i| json!(d.row(i).to_vec())).collect()))
        .unwrap_or(Value::Null);

    let mut all_secure = computable;
    let mut scan = |criterion: SecurityCriterion| -> Value {
        let report = match criterion {
            SecurityCriterion::TargetFunction => code.check_target_security(net, &wiretaps),
            SecurityCriterion::Source => code.check_source_security(net, &wiretaps),
        };
        if !report.secure {
            all_secure = false;
        }
        let oracle_verdict = if with_oracle {
            let stat = match criterion {
                SecurityCriterion::TargetFunction => Statistic::TargetFn,
                SecurityCriterion::Source => Statistic::FullSources,
            };
            match oracle::oracle_security(&code, &wiretaps, stat, cap) {
                Ok(rep) => {
                    if rep.secure != report.secure {
                        warnings.push("oracle disagrees with the subspace check".into());
                        all_secure = false;
                    }
                    Some(rep.secure)
                }
                Err(e) => {
                    warnings.push(format!("oracle skipped: {e}"));
                    None
                }
            }
        } else {
            None
        };
        json!({
            "secure": report.secure,
            "witness": report.witness.map(|w| json!({
                "wiretap": edge_names(net, &w.wiretap),
                "vector": w.vector,
            })).unwrap_or(Value::Null),
            "oracle_secure": oracle_verdict,
        })
    };

    let target_json = match security {
        SecurityArg::Target | SecurityArg::Both => scan(SecurityCriterion::TargetFunction),
        SecurityArg::Source => Value::Null,
    };
    let source_json = match security {
        SecurityArg::Source | SecurityArg::Both => scan(SecurityCriterion::Source),
        SecurityArg::Target => Value::Null,
    };

    let results = json!({
        "r": r,
        "wiretap_sets_checked": wiretaps.len(),
        "reduced_collection": wiretaps.reduced,
        "computable": computable,
        "decoder": decoder_json,
        "target": target_json,
        "source": source_json,
    });
    let exit = if all_secure { EXIT_OK } else { EXIT_INSECURE };
    Ok((
        RunReport {
            command: "verify".into(),
            inputs: vec![loaded.record, code_record],
            seed: None,
            results,
            warnings,
        },
        exit,
    ))
}

fn cmd_simulate(
    net_arg: NetworkArg,
    code_arg: CodeArg,
    messages: Vec<u64>,
    keys: Vec<u64>,
) -> Result<(RunReport, i32), Failure> {
    let loaded = load_network(&net_arg)?;
    let net = &loaded.net;
    let (code, code_record) = load_code(&code_arg, net)?;
    let s = code.source_count();
    let ell = code.ell();
    if messages.len() != s * ell {
        return Err(Failure::input(format!(
            "--messages needs {} values ({} sources x {} messages)",
            s * ell,
            s,
            ell
        )));
    }
    let total_keys: usize = code.z().iter().sum();
    if keys.len() != total_keys {
        return Err(Failure::input(format!(
            "--keys needs {total_keys} values (z = {:?})",
            code.z()
        )));
    }
    let m_rows: Vec<Vec<u64>> = (0..s)
        .map(|i| messages[i * ell..(i + 1) * ell].to_vec())
        .collect();
    let mut k_rows = Vec::with_capacity(s);
    let mut off = 0;
    for &zi in code.z() {
        k_rows.push(keys[off..off + zi].to_vec());
        off += zi;
    }
    let eval = code
        .evaluate(net, &m_rows, &k_rows)
        .map_err(|e| Failure::input(e.to_string()))?;
    let f = code.field();
    let expected: Vec<u64> = (0..ell)
        .map(|k| m_rows.iter().fold(0, |acc, row| f.add(acc, row[k])))
        .collect();
    let symbols: Vec<Value> = net
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| json!({"edge": e.id, "symbol": eval.edge_symbols[i]}))
        .collect();
    let results = json!({
        "edge_symbols": symbols,
        "decoded": eval.decoded,
        "expected_sum": expected,
        "decoded_matches_sum": eval.decoded == expected,
    });
    let exit = if eval.decoded == expected {
        EXIT_OK
    } else {
        EXIT_INSECURE
    };
    Ok((
        RunReport {
            command: "simulate".into(),
            inputs: vec![loaded.record, code_record],
            seed: None,
            results,
            warnings: Vec::new(),
        },
        exit,
    ))
}

fn cmd_reduce(
    net_arg: NetworkArg,
    r: usize,
    max_enum_edges: Option<usize>,
) -> Result<(RunReport, i32), Failure> {
    let loaded = load_network(&net_arg)?;
    let net = &loaded.net;
    let limits = limits_with(max_enum_edges);
    let reduced = net
        .wiretap_collection(r, true, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let full = net
        .wiretap_collection(r, false, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let need_reduced = construct::required_field_size(net, r, true, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let need_full = construct::required_field_size(net, r, false, &limits)
        .map_err(|e| Failure::input(e.to_string()))?;
    let results = json!({
        "r": r,
        "full_size": full.len(),
        "reduced_size": reduced.len(),
        "reduced_sets": reduced.sets.iter().map(|w| edge_names(net, w)).collect::<Vec<_>>(),
        "field_size_threshold": { "reduced": need_reduced, "full": need_full },
    });
    Ok((
        RunReport {
            command: "reduce".into(),
            inputs: vec![loaded.record],
            seed: None,
            results,
            warnings: Vec::new(),
        },
        EXIT_OK,
    ))
}

fn cmd_count(
    net_arg: NetworkArg,
    big_rate: usize,
    r: usize,
    seed: u64,
    field_override: Option<u64>,
) -> Result<(RunReport, i32), Failure> {
    let loaded = load_network(&net_arg)?;
    let net = &loaded.net;
    let field = match field_override {
        Some(q) => FieldSpec::from_order(q).map_err(|e| Failure::input(e.to_string()))?,
        None => loaded.field.clone(),
    };
    if r > big_rate || big_rate > net.c_min() {
        return Err(Failure::input(format!(
            "need r <= R <= C_min, got r={r}, R={big_rate}, C_min={}",
            net.c_min()
        )));
    }
    let base = construct::construct_base(net, &field, big_rate, seed, 500)
        .map_err(|e| Failure::construction(e.to_string()))?;
    let full = net
        .wiretap_collection(r, false, &Limits::default())
        .map_err(|e| Failure::input(e.to_string()))?;
    let sets = oracle::enumerate_transform_sets(net, &base, r, &full, 5_000_000)
        .map_err(|e| Failure::input(e.to_string()))?;
    let results = json!({
        "field": field.order(),
        "R": big_rate,
        "r": r,
        "invertible_blocks": sets.invertible_count,
        "count_bhat": sets.count_bhat(),
        "count_ahat": sets.count_ahat(),
        "lower_bound_bhat": sets.lower_bound_bhat.to_string(),
        "lower_bound_positive": sets.lower_bound_bhat > 0,
    });
    Ok((
        RunReport {
            command: "count".into(),
            inputs: vec![loaded.record],
            seed: Some(seed),
            results,
            warnings: Vec::new(),
        },
        EXIT_OK,
    ))
}
