//! Human-readable and machine-readable renderings of a check result.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{CheckResult, Scope, Verdict};
use crate::typing::TypedModel;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScopeReport {
    pub sets: BTreeMap<String, u32>,
    pub depth: u32,
    pub bitwidth: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub name: String,
    pub value: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub event: String,
    pub params: Vec<ParamReport>,
    pub state: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub machine: String,
    pub scope: ScopeReport,
    /// `"violation"` or `"no-violation"`.
    pub verdict: String,
    /// Transitions in the trace, or the bound searched when there is none.
    pub depth: u32,
    /// Index and text of the violated invariant.
    pub invariant: Option<(usize, String)>,
    pub states_explored: usize,
    pub constants: BTreeMap<String, serde_json::Value>,
    pub trace: Vec<StepReport>,
}

/// Scalars as strings or numbers, maplets as flat arrays, sets as arrays of
/// members in sorted order.
pub fn value_json(v: &Value) -> serde_json::Value {
    use serde_json::Value as J;
    match v {
        Value::Elem(e) => J::String(e.name().to_string()),
        Value::Int(i) => J::from(*i),
        Value::Pair(..) => {
            let mut parts = Vec::new();
            let mut cur = v;
            // Maplets nest to the left: a |-> b |-> c is (a |-> b) |-> c.
            while let Value::Pair(a, b) = cur {
                parts.push(value_json(b));
                cur = a;
            }
            parts.push(value_json(cur));
            parts.reverse();
            J::Array(parts)
        }
        Value::Set(s) => J::Array(s.iter().map(value_json).collect()),
    }
}

impl TraceReport {
    pub fn new(tm: &TypedModel, scope: &Scope, result: &CheckResult) -> Self {
        let m = tm.model.machine();
        let (verdict, invariant, trace) = match &result.verdict {
            Verdict::NoViolationWithinDepth(_) => ("no-violation", None, None),
            Verdict::Violation { trace, invariant } => (
                "violation",
                Some((*invariant, m.invariants[*invariant].node.to_string())),
                Some(trace),
            ),
        };
        TraceReport {
            machine: m.name.node.clone(),
            scope: ScopeReport {
                sets: scope.sets.clone(),
                depth: scope.depth,
                bitwidth: scope.bitwidth,
            },
            verdict: verdict.to_string(),
            depth: trace.map_or(scope.depth, |t| t.depth() as u32),
            invariant,
            states_explored: result.stats.states,
            constants: trace
                .map(|t| t.constants.iter().map(|(k, v)| (k.clone(), value_json(v))).collect())
                .unwrap_or_default(),
            trace: trace
                .map(|t| {
                    t.steps
                        .iter()
                        .map(|s| StepReport {
                            event: s.event.clone(),
                            params: s
                                .params
                                .iter()
                                .map(|(n, v)| ParamReport {
                                    name: n.clone(),
                                    value: value_json(v),
                                })
                                .collect(),
                            state: s.state.iter().map(|(k, v)| (k.clone(), value_json(v))).collect(),
                        })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

fn states(n: usize) -> String {
    if n == 1 {
        "1 state".to_string()
    } else {
        format!("{n} states")
    }
}

fn text(tm: &TypedModel, result: &CheckResult) -> String {
    let m = tm.model.machine();
    let mut out = String::new();
    match &result.verdict {
        Verdict::NoViolationWithinDepth(d) => {
            let _ = writeln!(
                out,
                "{}: no invariant violation within depth {d} ({})",
                m.name.node,
                states(result.stats.states)
            );
        }
        Verdict::Violation { trace, invariant } => {
            let inv = &m.invariants[*invariant];
            let _ = writeln!(
                out,
                "{}: invariant {} violated at depth {} ({})",
                m.name.node,
                invariant + 1,
                trace.depth(),
                states(result.stats.states)
            );
            let _ = writeln!(out, "  {}: {}", inv.pos, inv.node);
            if !trace.constants.is_empty() {
                let cs: Vec<String> = trace.constants.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                let _ = writeln!(out, "constants: {}", cs.join(", "));
            }
            for (i, s) in trace.steps.iter().enumerate() {
                let params: Vec<String> = s.params.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                if params.is_empty() {
                    let _ = writeln!(out, "step {i}: {}", s.event);
                } else {
                    let _ = writeln!(out, "step {i}: {}({})", s.event, params.join(", "));
                }
                for (k, v) in &s.state {
                    let _ = writeln!(out, "  {k} = {v}");
                }
            }
        }
    }
    out
}

pub fn format_trace(tm: &TypedModel, scope: &Scope, result: &CheckResult, format: TraceFormat) -> String {
    match format {
        TraceFormat::Text => text(tm, result),
        TraceFormat::Structured => {
            let mut s = serde_json::to_string_pretty(&TraceReport::new(tm, scope, result)).expect("report serializes");
            s.push('\n');
            s
        }
    }
}
