//! The `annograph` command line.
//!
//! Artifacts are given either as paths to JSON files or as names resolved
//! in the workspace loaded with `--workspace`. Every command prints one JSON
//! object on stdout. Exit codes: 0 success, 1 a check failed or a rule was
//! not applicable, 2 bad input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::adapt::{apply_with_repairs, AdaptError, Policy, RepairStrategy, Strategy, TypeChangeRule};
use crate::annotation::{check_type_correctness, check_well_formed, TypeAnnotatedGraph};
use crate::functor::{build_correspondences, extract_typed, satisfies_ann_type_patterns, type_ann_ob, TypedGraph};
use crate::graph::{BGraph, ElementId};
use crate::io::{body_of, graph_doc, typed_graph_doc, IoError, Workspace};
use crate::matching::{find_matches, find_matches_with, MatchOptions};
use crate::patterns::{check_all, classify_constraint_form, Constraint};
use crate::rewrite::{applicable_matches, apply_rule, Rule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "annograph", version, about = "Type annotations, rewriting and repair on graphs with boxes")]
pub struct Cli {
    /// Directory (or file) of JSON artifacts that names are resolved in.
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks annotation well-formedness and type correctness of a graph.
    Validate { graph: String },
    /// Evaluates constraints on a graph, in order.
    Check {
        graph: String,
        #[arg(required = true)]
        constraints: Vec<String>,
    },
    /// Lists the matches of a pattern graph into a host graph.
    Match {
        pattern: String,
        graph: String,
        #[arg(long)]
        non_injective: bool,
    },
    /// Applies a rule at one of its applicable matches.
    Apply {
        rule: String,
        graph: String,
        #[arg(long, default_value_t = 0)]
        match_index: usize,
    },
    /// Turns a typed graph into its type-annotated image.
    Typeann { typed_graph: String },
    /// Recovers typed graphs from a type-annotated graph.
    Extract { graph: String },
    /// Builds the correspondences of a typed graph and checks the
    /// composition patterns.
    TripleCheck { typed_graph: String },
    /// Applies a type-change rule and repairs the constraints it breaks.
    Adapt {
        rule: String,
        graph: String,
        #[arg(long, num_args = 1.., required = true)]
        constraints: Vec<String>,
        #[arg(long, default_value = "post")]
        policy: Strategy,
        #[arg(long, default_value_t = 8)]
        max_cascade: usize,
        #[arg(long, default_value_t = 0)]
        match_index: usize,
        /// Preference among second-form repairs, most preferred first.
        #[arg(long, value_delimiter = ',')]
        order: Vec<RepairStrategy>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("no {kind} named {name}")]
    Unknown { kind: &'static str, name: String },
    #[error("{path} contains no {kind}")]
    Missing { kind: &'static str, path: PathBuf },
    #[error(transparent)]
    Adapt(#[from] AdaptError),
    #[error("{0}")]
    Input(String),
}

struct Context {
    workspace: Workspace,
}

impl Context {
    fn file(&self, arg: &str) -> Result<Option<Workspace>, CliError> {
        let p = Path::new(arg);
        if p.is_file() {
            Ok(Some(Workspace::load(p)?))
        } else {
            Ok(None)
        }
    }

    fn graph(&self, arg: &str) -> Result<(String, TypeAnnotatedGraph), CliError> {
        match self.file(arg)? {
            Some(ws) => ws
                .graphs
                .into_iter()
                .next()
                .ok_or(CliError::Missing { kind: "graph", path: arg.into() }),
            None => self
                .workspace
                .graphs
                .get(arg)
                .map(|g| (arg.to_owned(), g.clone()))
                .ok_or_else(|| CliError::Unknown { kind: "graph", name: arg.to_owned() }),
        }
    }

    /// A graph, or the premise of a constraint.
    fn pattern(&self, arg: &str) -> Result<(String, TypeAnnotatedGraph), CliError> {
        match self.graph(arg) {
            Ok(x) => Ok(x),
            Err(e @ (CliError::Unknown { .. } | CliError::Missing { .. })) => match self.constraints(&[arg.to_owned()]) {
                Ok(cs) => {
                    let c = &cs[0];
                    Ok((c.name.clone(), TypeAnnotatedGraph::new(c.premise().clone())))
                }
                Err(_) => Err(e),
            },
            Err(e) => Err(e),
        }
    }

    fn typed(&self, arg: &str) -> Result<(String, TypedGraph), CliError> {
        match self.file(arg)? {
            Some(ws) => ws
                .typed_graphs
                .into_iter()
                .next()
                .ok_or(CliError::Missing { kind: "typed graph", path: arg.into() }),
            None => self
                .workspace
                .typed_graphs
                .get(arg)
                .map(|g| (arg.to_owned(), g.clone()))
                .ok_or_else(|| CliError::Unknown { kind: "typed graph", name: arg.to_owned() }),
        }
    }

    fn rule(&self, arg: &str) -> Result<Rule, CliError> {
        match self.file(arg)? {
            Some(ws) => ws.rules.into_values().next().ok_or(CliError::Missing { kind: "rule", path: arg.into() }),
            None => self
                .workspace
                .rules
                .get(arg)
                .cloned()
                .ok_or_else(|| CliError::Unknown { kind: "rule", name: arg.to_owned() }),
        }
    }

    /// All constraints of a file, or the named one.
    fn constraints(&self, args: &[String]) -> Result<Vec<Constraint>, CliError> {
        let mut out = Vec::new();
        for arg in args {
            match self.file(arg)? {
                Some(ws) if ws.constraints.is_empty() => {
                    return Err(CliError::Missing { kind: "constraint", path: arg.into() })
                }
                Some(ws) => out.extend(ws.constraints),
                None => out.push(
                    self.workspace
                        .constraint(arg)
                        .cloned()
                        .ok_or_else(|| CliError::Unknown { kind: "constraint", name: arg.to_owned() })?,
                ),
            }
        }
        Ok(out)
    }
}

fn describe(g: &BGraph, ids: &[ElementId]) -> Vec<Value> {
    ids.iter()
        .map(|x| {
            let l = g.label(*x);
            json!({ "id": x, "kind": l.map(|l| l.kind), "name": l.and_then(|l| l.name.clone()) })
        })
        .collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn run_command(cmd: Command, ctx: &Context) -> Result<(i32, Value), CliError> {
    match cmd {
        Command::Validate { graph } => {
            let (name, g) = ctx.graph(&graph)?;
            let mut report = check_well_formed(&g);
            report.extend(check_type_correctness(&g));
            let ok = report.is_empty();
            Ok((
                if ok { EXIT_OK } else { EXIT_FAILED },
                json!({ "command": "validate", "graph": name, "ok": ok, "violations": report }),
            ))
        }
        Command::Check { graph, constraints } => {
            let (name, g) = ctx.graph(&graph)?;
            let cs = ctx.constraints(&constraints)?;
            let verdicts = check_all(&g, &cs);
            let ok = verdicts.iter().all(|v| v.satisfied);
            let forms: Vec<Value> = cs
                .iter()
                .map(|c| match classify_constraint_form(c) {
                    Ok(k) => to_value(&k.form),
                    Err(e) => json!({ "ambiguous": e.to_string() }),
                })
                .collect();
            Ok((
                if ok { EXIT_OK } else { EXIT_FAILED },
                json!({ "command": "check", "graph": name, "ok": ok, "verdicts": verdicts, "forms": forms }),
            ))
        }
        Command::Match { pattern, graph, non_injective } => {
            let (pname, p) = ctx.pattern(&pattern)?;
            let (gname, g) = ctx.graph(&graph)?;
            let opts = if non_injective { MatchOptions::non_injective() } else { MatchOptions::injective() };
            let ms = find_matches_with(&p, &g, &opts);
            Ok((
                if ms.is_empty() { EXIT_FAILED } else { EXIT_OK },
                json!({ "command": "match", "pattern": pname, "graph": gname, "count": ms.len(), "matches": ms }),
            ))
        }
        Command::Apply { rule, graph, match_index } => {
            let r = ctx.rule(&rule)?;
            let (gname, g) = ctx.graph(&graph)?;
            let ms = applicable_matches(&r, &g, &Default::default());
            let Some(m) = ms.get(match_index) else {
                let total = find_matches(&r.lhs, &g, true).len();
                return Ok((
                    EXIT_FAILED,
                    json!({ "command": "apply", "rule": r.name, "graph": gname, "applied": false,
                            "matches": total, "applicable": ms.len(), "match_index": match_index }),
                ));
            };
            let d = apply_rule(&r, &g, m).map_err(|e| CliError::Input(e.to_string()))?;
            let result = g.replace_graph(d.graph.clone());
            Ok((
                EXIT_OK,
                json!({ "command": "apply", "rule": r.name, "graph": gname, "applied": true,
                        "applicable": ms.len(), "match": m,
                        "deleted": describe(&g, &d.deleted), "created": describe(&d.graph, &d.created),
                        "result": graph_doc(&format!("{gname}-{}", r.name), &result) }),
            ))
        }
        Command::Typeann { typed_graph } => {
            let (name, t) = ctx.typed(&typed_graph)?;
            let img = type_ann_ob(&t).map_err(|e| CliError::Input(e.to_string()))?;
            let check = img.check(&t);
            Ok((
                if check.is_empty() { EXIT_OK } else { EXIT_FAILED },
                json!({ "command": "typeann", "typed_graph": name, "ok": check.is_empty(), "violations": check,
                        "fg": img.fg, "ft": img.ft, "result": graph_doc(&format!("{name}-annotated"), &img.h) }),
            ))
        }
        Command::Extract { graph } => {
            let (name, g) = ctx.graph(&graph)?;
            let ts = extract_typed(&g).map_err(|e| CliError::Input(e.to_string()))?;
            let docs: Vec<_> = ts.iter().enumerate().map(|(i, t)| typed_graph_doc(&format!("{name}-{i}"), t)).collect();
            Ok((
                if ts.is_empty() { EXIT_FAILED } else { EXIT_OK },
                json!({ "command": "extract", "graph": name, "count": ts.len(), "typed_graphs": docs }),
            ))
        }
        Command::TripleCheck { typed_graph } => {
            let (name, t) = ctx.typed(&typed_graph)?;
            let img = type_ann_ob(&t).map_err(|e| CliError::Input(e.to_string()))?;
            let (tt, ti) = build_correspondences(&t, &img).map_err(|e| CliError::Input(e.to_string()))?;
            let check = satisfies_ann_type_patterns(&t, &img, &tt, &ti);
            let per_sort: serde_json::Map<String, Value> =
                check.witnesses_per_sort.iter().map(|(s, n)| (s.to_string(), json!(n))).collect();
            Ok((
                if check.satisfied { EXIT_OK } else { EXIT_FAILED },
                json!({ "command": "triple-check", "typed_graph": name, "satisfied": check.satisfied,
                        "witnesses": check.witnesses.len(), "per_sort": per_sort, "failing": check.failing,
                        "type_correspondences": tt.corr.len(), "instance_correspondences": ti.corr.len() }),
            ))
        }
        Command::Adapt { rule, graph, constraints, policy, max_cascade, match_index, order } => {
            let r = TypeChangeRule::from_rule(ctx.rule(&rule)?)?;
            let (gname, g) = ctx.graph(&graph)?;
            let cs = ctx.constraints(&constraints)?;
            let mut pol = Policy::new(policy, max_cascade);
            if !order.is_empty() {
                pol.option_order = order;
            }
            let ms = applicable_matches(&r.rule, &g, &Default::default());
            let Some(m) = ms.get(match_index) else {
                return Ok((
                    EXIT_FAILED,
                    json!({ "command": "adapt", "rule": r.name(), "graph": gname, "applied": false,
                            "applicable": ms.len(), "match_index": match_index }),
                ));
            };
            let out = apply_with_repairs(&g, &r, m, &cs, &pol)?;
            let removed: Vec<ElementId> = g.elements().filter(|x| !out.graph.contains(*x)).collect();
            let ok = out.status == crate::adapt::Status::Converged;
            Ok((
                if ok { EXIT_OK } else { EXIT_FAILED },
                json!({ "command": "adapt", "rule": r.name(), "graph": gname, "applied": true,
                        "match": m, "outcome": out, "removed": describe(&g, &removed),
                        "result": { "kind": "graph", "name": format!("{gname}-adapted"), "body": body_of(&out.graph) } }),
            ))
        }
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its JSON output to `out`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    let result = (|| {
        let workspace = match &cli.workspace {
            Some(p) => Workspace::load(p)?,
            None => Workspace::new(),
        };
        run_command(cli.command, &Context { workspace })
    })();
    let (code, value) = match result {
        Ok(x) => x,
        Err(e) => (EXIT_INPUT, json!({ "error": e.to_string() })),
    };
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"));
    code
}
