//! `eb2alloy`: translate Event-B machines to Alloy, or check them directly.
//!
//! Exit status: 0 success or no violation, 1 error, 2 invariant violation,
//! 3 node budget exceeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eventb_alloy::alloy::{print_module, print_paragraph, Paragraph, DEFAULT_BITWIDTH};
use eventb_alloy::checker::{self, CheckError, Scope, TraceFormat, Verdict, DEFAULT_NODE_BUDGET};
use eventb_alloy::encoder::{encode, EncodeOptions};
use eventb_alloy::frontend::{parse_source, Context, Machine, Model};
use eventb_alloy::typing::TypedModel;

#[derive(Parser, Debug)]
#[command(
    name = "eb2alloy",
    version,
    about = "Event-B to Alloy translator and bounded checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Translate a machine into an Alloy module.
    Translate {
        /// Machine source, optionally followed by context sources.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file; the module goes to standard output when omitted.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Number of State atoms, at least 2.
        #[arg(long)]
        states: Option<u32>,
        /// Atoms of a carrier set, as NAME=K. Repeatable.
        #[arg(long = "scope", value_parser = parse_scope)]
        scopes: Vec<(String, u32)>,
        #[arg(long, default_value_t = DEFAULT_BITWIDTH)]
        bitwidth: u32,
        /// Name of the generated assertion.
        #[arg(long)]
        assert_name: Option<String>,
    },
    /// Search for an invariant violation by breadth-first exploration.
    Check {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Maximum number of transitions.
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "scope", value_parser = parse_scope)]
        scopes: Vec<(String, u32)>,
        #[arg(long, default_value_t = DEFAULT_BITWIDTH)]
        bitwidth: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        trace_format: Format,
        /// Maximum number of distinct states.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Structured,
}

fn parse_scope(s: &str) -> Result<(String, u32), String> {
    let (name, k) = s.split_once('=').ok_or_else(|| format!("expected NAME=K, got '{s}'"))?;
    let k = k.trim().parse().map_err(|_| format!("'{k}' is not a count"))?;
    Ok((name.trim().to_string(), k))
}

const ERROR: u8 = 1;
const VIOLATION: u8 = 2;
const BUDGET: u8 = 3;

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parses the inputs and resolves the seen context. A context not among the
/// inputs is looked up as `<Name>.ebm` next to the machine.
fn load(inputs: &[PathBuf]) -> Result<TypedModel, String> {
    let mut machines: Vec<(Machine, &Path)> = Vec::new();
    let mut contexts: Vec<Context> = Vec::new();
    for path in inputs {
        let file = parse_source(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        machines.extend(file.machines.into_iter().map(|m| (m, path.as_path())));
        contexts.extend(file.contexts);
    }
    if machines.len() != 1 {
        return Err(format!(
            "expected exactly one MACHINE in the inputs, found {}",
            machines.len()
        ));
    }
    let (machine, path) = machines.pop().unwrap();
    let context = match &machine.sees {
        None => None,
        Some(name) => match contexts.into_iter().find(|c| c.name.node == name.node) {
            Some(c) => Some(c),
            None => {
                let companion = path.with_file_name(format!("{}.ebm", name.node));
                if companion.exists() {
                    let file = parse_source(&read(&companion)?).map_err(|e| format!("{}: {e}", companion.display()))?;
                    file.contexts.into_iter().find(|c| c.name.node == name.node)
                } else {
                    None
                }
            }
        },
    };
    let model = Model::new(machine, context).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", path.display())).collect();
        lines.join("\n")
    })?;
    TypedModel::new(model).map_err(|e| format!("{}: {e}", path.display()))
}

fn translate(
    inputs: &[PathBuf],
    output: Option<&Path>,
    states: Option<u32>,
    scopes: BTreeMap<String, u32>,
    bitwidth: u32,
    assert_name: Option<String>,
) -> Result<u8, String> {
    let tm = load(inputs)?;
    let states = states.ok_or("--states is required")?;
    let mut opts = EncodeOptions::new(states, scopes);
    opts.bitwidth = bitwidth;
    opts.assertion_name = assert_name;
    let encoded = encode(&tm, &opts).map_err(|e| e.to_string())?;
    for w in &encoded.warnings {
        eprintln!("warning: {w}");
    }
    let text = print_module(&encoded.module);
    match output {
        None => print!("{text}"),
        Some(out) => {
            std::fs::write(out, &text).map_err(|e| format!("{}: {e}", out.display()))?;
            let m = &encoded.module;
            println!("wrote {}", out.display());
            println!("sigs: {}", m.sig_names().collect::<Vec<_>>().join(", "));
            println!(
                "preds: {}",
                m.preds().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ")
            );
            for c in m.checks() {
                println!("{}", print_paragraph(&Paragraph::Check(c.clone())).trim_end());
            }
        }
    }
    Ok(0)
}

fn check(
    inputs: &[PathBuf],
    depth: Option<u32>,
    scopes: BTreeMap<String, u32>,
    bitwidth: u32,
    format: Format,
    node_budget: usize,
) -> Result<u8, String> {
    let tm = load(inputs)?;
    let depth = depth.ok_or("--depth is required")?;
    let scope = Scope {
        sets: scopes,
        depth,
        bitwidth,
    };
    let result = match checker::check(&tm, &scope, node_budget) {
        Ok(r) => r,
        Err(CheckError::NodeBudget(n)) => {
            eprintln!("inconclusive: explored more than {n} states without finishing depth {depth}");
            return Ok(BUDGET);
        }
        Err(e) => return Err(e.to_string()),
    };
    let format = match format {
        Format::Text => TraceFormat::Text,
        Format::Structured => TraceFormat::Structured,
    };
    print!("{}", checker::format_trace(&tm, &scope, &result, format));
    Ok(match result.verdict {
        Verdict::NoViolationWithinDepth(_) => 0,
        Verdict::Violation { .. } => VIOLATION,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = !e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { ERROR });
        }
    };
    let status = match cli.command {
        Command::Translate {
            inputs,
            output,
            states,
            scopes,
            bitwidth,
            assert_name,
        } => translate(
            &inputs,
            output.as_deref(),
            states,
            scopes.into_iter().collect(),
            bitwidth,
            assert_name,
        ),
        Command::Check {
            inputs,
            depth,
            scopes,
            bitwidth,
            trace_format,
            node_budget,
        } => check(
            &inputs,
            depth,
            scopes.into_iter().collect(),
            bitwidth,
            trace_format,
            node_budget,
        ),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(ERROR)
        }
    }
}
