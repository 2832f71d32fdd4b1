//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal or verification failure, 2 bad input,
//! 3 KD-positive but outside the pure hull, 4 not KD-positive, 5 not a state,
//! 6 KD-positive but no nonnegative decomposition exists.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::counterexamples::{self, VerificationReport};
use crate::error::KdError;
use crate::group::{all_subgroups, is_chain, GroupSpec, SubgroupRepr, DEFAULT_MAX_ORDER};
use crate::hull::{self, HullMembership, PeriodicDecomposition, RealTable};
use crate::kd::{self, KdDistribution, KdDistributionJson, Operator, OperatorJson, StateVectorJson};
use crate::positivity::{self, DEFAULT_EPS};
use crate::sampling::DEFAULT_SEED;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_OUTSIDE_HULL: i32 = 3;
pub const EXIT_NOT_KD_POSITIVE: i32 = 4;
pub const EXIT_NOT_A_STATE: i32 = 5;
pub const EXIT_DECOMPOSITION_INFEASIBLE: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Z6,
    Z2z2,
    All,
}

#[derive(Debug, Parser)]
#[command(name = "kd-abelian", version, about = "Kirkwood-Dirac positivity on finite abelian groups")]
pub struct Cli {
    /// Group orders, comma separated (e.g. 2,4)
    #[arg(long, global = true, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Positivity tolerance
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest accepted group order
    #[arg(long, global = true, env = "KD_ABELIAN_MAX_ORDER", default_value_t = DEFAULT_MAX_ORDER, hide = true)]
    pub max_order: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order, subgroups with annihilators, and the pure KD-positive count
    GroupInfo {
        /// Cyclic orders (alternative to --orders)
        #[arg(value_name = "ORDERS")]
        positional: Vec<usize>,
    },
    /// Enumerate the pure KD-positive states with their KD tables
    PureStates {
        #[arg(value_name = "ORDERS")]
        positional: Vec<usize>,
    },
    /// KD symbol of an operator file, or the operator of a KD table with --inverse
    KdSymbol {
        file: PathBuf,
        #[arg(long)]
        inverse: bool,
        /// Use the unnormalized symbol N Q
        #[arg(long)]
        upper: bool,
    },
    /// Classify a state: in the pure hull, outside it, not KD-positive, not a state
    Check {
        file: PathBuf,
        /// Where to write the witness (default: next to the input)
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Nonnegative periodic decomposition of a KD-positive state
    Decompose {
        file: PathBuf,
        /// Use hull LP weights instead of the chain repair
        #[arg(long)]
        lp: bool,
    },
    /// Frobenius pairing of a witness table with a state (operator or KD table)
    Pair { witness: PathBuf, state: PathBuf },
    /// Recompute the Z6 and Z2 x Z2 counterexample claims
    VerifyPaper {
        #[arg(value_enum, default_value_t = Which::All)]
        which: Which,
        /// Mixing parameter for the Z2 x Z2 family
        #[arg(long, default_value_t = 0.05)]
        lambda: f64,
    },
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_BAD_INPUT, message)
    }
}

impl From<KdError> for CliError {
    fn from(e: KdError) -> Self {
        let code = match e {
            KdError::EmptyGroup
            | KdError::InvalidOrder(_)
            | KdError::GroupTooLarge { .. }
            | KdError::DimensionMismatch { .. }
            | KdError::CoordinateOutOfRange { .. }
            | KdError::GroupMismatch
            | KdError::InvalidSubgroup(_)
            | KdError::Json(_) => EXIT_BAD_INPUT,
            KdError::NotHermitian(_) | KdError::NotAState(_) => EXIT_NOT_A_STATE,
            _ => EXIT_FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// What a subcommand produced: a JSON value, its text rendering, an exit code.
struct Output {
    json: Value,
    text: String,
    code: i32,
}

/// Parses `args` (including the program name) and runs the command.
/// Output goes to `stdout` (or `--out`), diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_BAD_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli) {
        Ok(out) => match emit(&cli, &out, stdout) {
            Ok(()) => out.code,
            Err(e) => {
                let _ = writeln!(stderr, "error: {}", e.message);
                e.code
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn emit(cli: &Cli, out: &Output, stdout: &mut dyn Write) -> CliResult<()> {
    let body = match cli.format {
        Format::Json => to_pretty(&out.json)? + "\n",
        Format::Text => out.text.clone(),
    };
    match &cli.out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display()))),
        None => stdout.write_all(body.as_bytes()).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string())),
    }
}

fn to_pretty<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))
}

fn execute(cli: &Cli) -> CliResult<Output> {
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(CliError::input(format!("--tol must be positive, got {}", cli.tol)));
    }
    match &cli.command {
        Command::GroupInfo { positional } => group_info(&group_from_args(cli, positional)?),
        Command::PureStates { positional } => pure_states(&group_from_args(cli, positional)?),
        Command::KdSymbol { file, inverse, upper } => kd_symbol(cli, file, *inverse, *upper),
        Command::Check { file, witness } => check(cli, file, witness.as_deref()),
        Command::Decompose { file, lp } => decompose(cli, file, *lp),
        Command::Pair { witness, state } => pair(cli, witness, state),
        Command::VerifyPaper { which, lambda } => verify_paper(cli, *which, *lambda),
    }
}

fn group_from_args(cli: &Cli, positional: &[usize]) -> CliResult<GroupSpec> {
    let orders = match (&cli.orders, positional.is_empty()) {
        (Some(o), true) => o.clone(),
        (None, false) => positional.to_vec(),
        (Some(o), false) if o == positional => o.clone(),
        (Some(_), false) => return Err(CliError::input("conflicting positional orders and --orders")),
        (None, true) => return Err(CliError::input("no group orders given")),
    };
    Ok(GroupSpec::with_max_order(&orders, cli.max_order)?)
}

/// Enforces the size cap and any `--orders` given alongside a file.
fn check_file_group(cli: &Cli, group: &GroupSpec) -> CliResult<()> {
    if group.order() > cli.max_order {
        return Err(KdError::GroupTooLarge { order: group.order(), cap: cli.max_order }.into());
    }
    if let Some(o) = &cli.orders {
        if o.as_slice() != group.orders() {
            return Err(CliError::input(format!("file group {group} does not match --orders {o:?}")));
        }
    }
    Ok(())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_operator(cli: &Cli, path: &Path) -> CliResult<Operator> {
    let j: OperatorJson =
        serde_json::from_str(&read_file(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    check_file_group(cli, &j.group)?;
    Ok(Operator::try_from(j)?)
}

fn read_distribution(cli: &Cli, path: &Path) -> CliResult<KdDistribution> {
    let j: KdDistributionJson =
        serde_json::from_str(&read_file(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    check_file_group(cli, &j.group)?;
    Ok(KdDistribution::try_from(j)?)
}

fn group_info(g: &GroupSpec) -> CliResult<Output> {
    let subs = all_subgroups(g);
    let chain = is_chain(&subs);
    let mut text = format!(
        "group {g}\norder {}\nexponent {}\nsubgroups {}\nchain {chain}\npure KD-positive states {}\n",
        g.order(),
        g.exponent(),
        subs.len(),
        g.order() * subs.len()
    );
    let mut list = Vec::new();
    for h in &subs {
        let perp = h.annihilator();
        text.push_str(&format!(
            "  |H| = {:<3} H = <{}>  H^perp = <{}>\n",
            h.len(),
            join(h.generators().iter()),
            join(perp.generators().iter())
        ));
        list.push(json!({
            "order": h.len(),
            "generators": h.generators(),
            "elements": h.elements(),
            "annihilator": {"generators": perp.generators(), "elements": perp.elements()},
        }));
    }
    let json = json!({
        "group": g,
        "order": g.order(),
        "exponent": g.exponent(),
        "subgroup_count": subs.len(),
        "chain": chain,
        "pure_positive_count": g.order() * subs.len(),
        "subgroups": list,
    });
    Ok(Output { json, text, code: EXIT_OK })
}

fn join<T: std::fmt::Display>(it: impl Iterator<Item = T>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn pure_states(g: &GroupSpec) -> CliResult<Output> {
    let states = positivity::pure_positive_states(g)?;
    let mut text = format!("{} pure KD-positive states on {g}\n", states.len());
    let mut list = Vec::new();
    for s in &states {
        text.push_str(&s.label());
        text.push('\n');
        list.push(json!({
            "label": s.label(),
            "subgroup": SubgroupRepr::from(&s.subgroup),
            "g0": g.element(s.g0),
            "chi0": g.element(s.chi0),
            "vector": StateVectorJson::from(&s.vector),
            "eta": KdDistributionJson::from(&s.eta()),
        }));
    }
    Ok(Output { json: json!({"group": g, "count": states.len(), "states": list}), text, code: EXIT_OK })
}

fn kd_symbol(cli: &Cli, file: &Path, inverse: bool, upper: bool) -> CliResult<Output> {
    if inverse {
        let f = read_distribution(cli, file)?;
        let op = if upper { kd::kd_upper_inverse(&f) } else { kd::kd_lower_inverse(&f) };
        let text = matrix_text(op.dim(), &op.entries);
        return Ok(Output { json: serde_json::to_value(OperatorJson::from(&op)).expect("plain data"), text, code: EXIT_OK });
    }
    let op = read_operator(cli, file)?;
    let f = if upper { kd::kd_upper(&op) } else { kd::kd_lower(&op) };
    let text = matrix_text(f.group.order(), &f.values);
    Ok(Output { json: serde_json::to_value(KdDistributionJson::from(&f)).expect("plain data"), text, code: EXIT_OK })
}

fn matrix_text(n: usize, data: &[num_complex::Complex64]) -> String {
    let mut s = String::new();
    for row in data.chunks(n) {
        let cells: Vec<String> = row
            .iter()
            .map(|z| if z.im == 0.0 { format!("{:>12.6}", z.re) } else { format!("{:>12.6}{:+.6}i", z.re, z.im) })
            .collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

fn default_witness_path(file: &Path) -> PathBuf {
    let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "state".into());
    file.with_file_name(format!("{stem}.witness.json"))
}

fn check(cli: &Cli, file: &Path, witness_path: Option<&Path>) -> CliResult<Output> {
    let rho = read_operator(cli, file)?;
    let report = positivity::check_kd_positive(&rho, cli.tol);
    let mut json = json!({"group": rho.group, "positivity": report});
    if !report.is_state {
        let text = format!(
            "not a state (hermitian error {:e}, trace error {:e}, min eigenvalue {:e})\n",
            report.hermitian_error, report.trace_error, report.min_eigenvalue
        );
        json["verdict"] = json!("not_a_state");
        return Ok(Output { json, text, code: EXIT_NOT_A_STATE });
    }
    if !report.verdict {
        let text = format!(
            "state is not KD-positive (min Re Q {:e}, max |Im Q| {:e})\n",
            report.min_kd_value, report.max_imag_kd
        );
        json["verdict"] = json!("not_kd_positive");
        return Ok(Output { json, text, code: EXIT_NOT_KD_POSITIVE });
    }
    let states = positivity::pure_positive_states(&rho.group)?;
    match hull::membership_with_states(&states, &rho)? {
        HullMembership::Feasible { weights } => {
            let terms: Vec<Value> = states
                .iter()
                .zip(&weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(s, &w)| json!({"state": s.label(), "weight": w}))
                .collect();
            let mut text = format!("KD-positive, in the hull of pure KD-positive states ({} terms)\n", terms.len());
            for t in &terms {
                text.push_str(&format!("  {:.12} {}\n", t["weight"].as_f64().unwrap_or(0.0), t["state"].as_str().unwrap_or("")));
            }
            json["verdict"] = json!("in_hull");
            json["decomposition"] = Value::Array(terms);
            Ok(Output { json, text, code: EXIT_OK })
        }
        HullMembership::Infeasible { witness, .. } => {
            let path = witness_path.map(Path::to_path_buf).unwrap_or_else(|| default_witness_path(file));
            let body = to_pretty(&KdDistributionJson::from(&witness))? + "\n";
            fs::write(&path, body).map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
            let value = witness.pairing(&kd::kd_lower(&rho))?.re;
            let text = format!(
                "KD-positive but outside the hull of pure KD-positive states\n  witness pairing {value:.12e}\n  witness written to {}\n",
                path.display()
            );
            json["verdict"] = json!("outside_hull");
            json["witness_pairing"] = json!(value);
            json["witness_file"] = json!(path.display().to_string());
            Ok(Output { json, text, code: EXIT_OUTSIDE_HULL })
        }
    }
}

fn decomposition_output(mut json: Value, dec: &PeriodicDecomposition, target: &RealTable, mode: &str) -> Output {
    let kept = PeriodicDecomposition {
        parts: dec.parts.iter().filter(|(_, t)| t.values.iter().any(|v| v.abs() > hull::NONNEG_TOL)).cloned().collect(),
    };
    let resum = dec.total().map(|t| t.max_abs_diff(target)).unwrap_or(0.0);
    let mut text = format!("{mode} decomposition into {} nonnegative periodic parts (re-sum error {resum:e})\n", kept.parts.len());
    for (h, t) in &kept.parts {
        let mass: f64 = t.values.iter().sum();
        text.push_str(&format!("  |H| = {:<3} H = <{}>  mass {mass:.12}\n", h.len(), join(h.generators().iter())));
    }
    json["mode"] = json!(mode);
    json["resum_error"] = json!(resum);
    json["min_entry"] = json!(dec.min_entry());
    json["parts"] = serde_json::to_value(kept.to_json()).expect("plain data");
    Output { json, text, code: EXIT_OK }
}

fn decompose(cli: &Cli, file: &Path, use_lp: bool) -> CliResult<Output> {
    let rho = read_operator(cli, file)?;
    let g = rho.group.clone();
    let report = positivity::check_kd_positive(&rho, cli.tol);
    if !report.is_state {
        return Err(CliError::new(EXIT_NOT_A_STATE, format!("not a state (min eigenvalue {:e})", report.min_eigenvalue)));
    }
    if !report.verdict {
        return Err(CliError::new(EXIT_NOT_KD_POSITIVE, format!("not KD-positive (min Re Q {:e})", report.min_kd_value)));
    }
    let q = kd::kd_lower(&rho);
    let target = RealTable::from_kd(&q)?;
    let json = json!({"group": g});
    if use_lp {
        let states = positivity::pure_positive_states(&g)?;
        return match hull::membership_with_states(&states, &rho)? {
            HullMembership::Feasible { weights } => {
                let dec = hull::decomposition_from_weights(&states, &weights);
                Ok(decomposition_output(json, &dec, &target, "lp"))
            }
            HullMembership::Infeasible { witness, .. } => {
                let mut json = json;
                let value = witness.pairing(&q)?.re;
                json["mode"] = json!("lp");
                json["infeasible"] = json!(true);
                json["witness_pairing"] = json!(value);
                json["witness"] = serde_json::to_value(KdDistributionJson::from(&witness)).expect("plain data");
                let text = format!("KD-positive but no convex decomposition into pure KD-positive states\n  witness pairing {value:.12e}\n");
                Ok(Output { json, text, code: EXIT_DECOMPOSITION_INFEASIBLE })
            }
        };
    }
    let subs = all_subgroups(&g);
    if !is_chain(&subs) {
        return Err(CliError::input(format!(
            "the subgroups of {g} do not form a chain, so the greedy repair does not apply; rerun with --lp"
        )));
    }
    let raw = hull::decompose_into_periodic(&target, &subs)?;
    let dec = hull::greedy_nonnegative_repair(&target, &raw)?;
    Ok(decomposition_output(json, &dec, &target, "chain"))
}

fn pair(cli: &Cli, witness: &Path, state: &Path) -> CliResult<Output> {
    let w = read_distribution(cli, witness)?;
    let text = read_file(state)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", state.display())))?;
    let q = if value.get("entries").is_some() {
        kd::kd_lower(&read_operator(cli, state)?)
    } else {
        read_distribution(cli, state)?
    };
    if q.group != w.group {
        return Err(KdError::GroupMismatch.into());
    }
    let p = w.pairing(&q)?;
    let json = json!({"pairing": [p.re, p.im], "negative": p.re < 0.0});
    Ok(Output { json, text: format!("{:.12e} {:+.12e}i\n", p.re, p.im), code: EXIT_OK })
}

fn verify_paper(cli: &Cli, which: Which, lambda: f64) -> CliResult<Output> {
    let mut reports: Vec<VerificationReport> = Vec::new();
    if matches!(which, Which::Z6 | Which::All) {
        reports.push(counterexamples::verify_z6()?);
    }
    if matches!(which, Which::Z2z2 | Which::All) {
        reports.push(counterexamples::verify_z2z2(lambda).map_err(|e| CliError::input(e.to_string()))?);
    }
    let passed = reports.iter().all(|r| r.passed);
    let mut text: String = reports.iter().map(VerificationReport::to_text).collect();
    if !passed {
        text.push_str("failing checks:\n");
        for r in &reports {
            for c in r.failures() {
                text.push_str(&format!("  {}: {} ({})\n", r.name, c.label, c.claim));
            }
        }
    }
    let json = json!({"seed": cli.seed, "passed": passed, "reports": reports});
    Ok(Output { json, text, code: if passed { EXIT_OK } else { EXIT_FAILURE } })
}
