use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::annotation::{check_well_formed, TypeAnnotatedGraph};
use crate::graph::{BGraph, ElementId};
use crate::morphism::GraphMorphism;
use crate::patterns::{check_constraint, extensions, Constraint, ConstraintVerdict, Form};
use crate::rewrite::{apply_rule, check_conditions};

use super::pbar::build_pbar;
use super::repair::{
    apply_with_cleanup, extend_rhs, handle_form1, handle_form2, handle_form3, synthesize_extend_rule_all, Artifact,
    RepairPlan, RepairStrategy,
};
use super::{causes, detect_violations, AdaptError, Cause, TypeChangeRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Fold first- and third-form repairs into the type-change rule.
    Extend,
    /// Apply the rule, then repair.
    Post,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "extend" => Ok(Strategy::Extend),
            "post" => Ok(Strategy::Post),
            _ => Err(format!("unknown policy {s}; expected extend or post")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    pub strategy: Strategy,
    /// Preference among second-form options.
    pub option_order: Vec<RepairStrategy>,
    pub max_cascade: usize,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            strategy: Strategy::Post,
            option_order: vec![
                RepairStrategy::AddTypeAnnotation,
                RepairStrategy::CreateTypedElement,
                RepairStrategy::BlockNac,
            ],
            max_cascade: 8,
        }
    }
}

impl Policy {
    pub fn new(strategy: Strategy, max_cascade: usize) -> Self {
        Policy { strategy, max_cascade, ..Policy::default() }
    }

    fn rank(&self, s: RepairStrategy) -> usize {
        match s {
            RepairStrategy::PostRepair => 0,
            RepairStrategy::ExtendRule => usize::MAX,
            other => 1 + self.option_order.iter().position(|o| *o == other).unwrap_or(self.option_order.len()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converged,
    Unconverged,
    /// A negative condition refused the change; the graph is unchanged.
    Blocked,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceAction {
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<Form>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cause: Option<Cause>,
    pub options: Vec<RepairStrategy>,
    pub chosen: Option<RepairStrategy>,
    pub deleted: Vec<ElementId>,
    pub created: Vec<ElementId>,
    /// Annotations removed because their target was deleted.
    pub cleaned: Vec<ElementId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TraceAction {
    fn plain(rule: &str) -> Self {
        TraceAction {
            rule: rule.to_owned(),
            constraint: None,
            form: None,
            cause: None,
            options: Vec::new(),
            chosen: None,
            deleted: Vec::new(),
            created: Vec::new(),
            cleaned: Vec::new(),
            note: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub round: usize,
    pub actions: Vec<TraceAction>,
    /// SHA-256 of the canonical form of the graph after the round.
    pub hash: String,
    /// Annotation well-formedness of the graph after the round.
    pub well_formed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptOutcome {
    pub status: Status,
    #[serde(skip)]
    pub graph: BGraph,
    /// The type change itself.
    pub initial: TraceEntry,
    /// One entry per repair round.
    pub rounds: Vec<TraceEntry>,
    /// Constraints that held before the change and fail on `graph`.
    pub residual: Vec<ConstraintVerdict>,
}

/// Hex SHA-256 over a canonical line-based rendering of the graph.
pub fn graph_hash(g: &BGraph) -> String {
    let mut text = String::new();
    for (id, label) in g.labels() {
        let _ = write!(text, "{id}\t{}\t{}", label.kind, label.name.as_deref().unwrap_or(""));
        if let Some((s, t)) = g.ends(*id) {
            let _ = write!(text, "\t{s}\t{t}");
        }
        text.push('\n');
    }
    for (b, inner) in g.all_contents() {
        for x in inner {
            let _ = writeln!(text, "{b}>{x}");
        }
    }
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn entry(round: usize, actions: Vec<TraceAction>, g: &BGraph) -> TraceEntry {
    TraceEntry {
        round,
        actions,
        hash: graph_hash(g),
        well_formed: check_well_formed(&TypeAnnotatedGraph::new(g.clone())).is_empty(),
    }
}

fn still_witness(c: &Constraint, g: &BGraph, w: &GraphMorphism) -> bool {
    w.image().iter().all(|y| g.contains(*y)) && extensions(c, g, w).is_empty()
}

fn residual(g: &BGraph, constraints: &[Constraint], targets: &[usize]) -> Vec<ConstraintVerdict> {
    targets
        .iter()
        .map(|i| check_constraint(g, &constraints[*i]))
        .filter(|v| !v.satisfied)
        .collect()
}

/// The type change at `m` followed by repair rounds until every constraint
/// that held on `g` holds again or `max_cascade` rounds have run.
pub fn apply_with_repairs(
    g: &BGraph,
    rule: &TypeChangeRule,
    m: &GraphMorphism,
    constraints: &[Constraint],
    policy: &Policy,
) -> Result<AdaptOutcome, AdaptError> {
    let plain = apply_rule(&rule.rule, g, m)?;
    let targets: Vec<usize> = (0..constraints.len())
        .filter(|i| check_constraint(g, &constraints[*i]).satisfied)
        .collect();
    let target_list: Vec<Constraint> = targets.iter().map(|i| constraints[*i].clone()).collect();

    let mut action = TraceAction::plain(rule.name());
    let mut derivation = plain.clone();
    if policy.strategy == Strategy::Extend {
        let violations = detect_violations(g, rule, m, &target_list)?;
        let here = plain.comatch.at(rule.element_in_rhs());
        let mut firsts = BTreeMap::new();
        let mut thirds = BTreeMap::new();
        for v in &violations {
            let Some(cls) = &v.classification else { continue };
            let Some(e) = cls.element else { continue };
            match (cls.form, v.cause) {
                (Form::F1, Cause::LostRequiredType) if v.witness.at(e) == here => {
                    firsts.entry(v.index).or_insert(e);
                }
                (Form::F3, Cause::PremiseNowHolds) if v.witness.at(e) == here => {
                    thirds.entry(v.index).or_insert(cls.clone());
                }
                _ => {}
            }
        }
        let pbars: Vec<_> = firsts
            .iter()
            .map(|(i, e)| build_pbar(&target_list[*i], *e).map(|p| (*i, p)))
            .collect::<Result<_, _>>()?;
        let parts: Vec<_> = pbars.iter().map(|(i, p)| (&target_list[*i], p)).collect();
        let mut ext = synthesize_extend_rule_all(rule, &parts)?;
        for (i, cls) in &thirds {
            match extend_rhs(&ext, rule.element, &target_list[*i], cls) {
                Some(r) => ext = r,
                None => action.note = Some(format!("{} left to repair rounds", target_list[*i].name)),
            }
        }
        if !parts.is_empty() || !thirds.is_empty() {
            match apply_with_cleanup(&ext, g, m) {
                Ok(d) => {
                    action.rule = ext.name.clone();
                    action.chosen = Some(RepairStrategy::ExtendRule);
                    action.cleaned = d.cleaned;
                    derivation = d.derivation;
                }
                Err(e) => action.note = Some(format!("extended rule not applicable ({e}); applied the plain rule")),
            }
        }
    }
    action.deleted = derivation.deleted.clone();
    action.created = derivation.created.clone();
    let comatch = derivation.comatch.clone();
    let mut graph = derivation.graph;
    let initial = entry(0, vec![action], &graph);

    let mut rounds = Vec::new();
    for round in 1..=policy.max_cascade {
        let failing: Vec<(usize, ConstraintVerdict)> = targets
            .iter()
            .map(|i| (*i, check_constraint(&graph, &constraints[*i])))
            .filter(|(_, v)| !v.satisfied)
            .collect();
        if failing.is_empty() {
            break;
        }
        let mut actions = Vec::new();
        let mut progress = false;
        for (i, verdict) in failing {
            let c = &constraints[i];
            for w in &verdict.witnesses {
                if !still_witness(c, &graph, w) {
                    continue;
                }
                let v = causes(g, i, c, std::slice::from_ref(w)).remove(0);
                let plan: Option<RepairPlan> = match v.classification.as_ref().map(|k| k.form) {
                    Some(Form::F1) => Some(handle_form1(rule, c, &v, &comatch, &graph)?),
                    Some(Form::F2) => Some(handle_form2(rule, c, &v, &graph)?),
                    Some(Form::F3) => Some(handle_form3(rule, c, &v)?),
                    _ => None,
                };
                let mut act = TraceAction::plain(&c.name);
                act.constraint = Some(c.name.clone());
                act.form = v.classification.as_ref().map(|k| k.form);
                act.cause = Some(v.cause);
                let Some(plan) = plan else {
                    act.note = Some("no repair available".into());
                    actions.push(act);
                    continue;
                };
                act.options = plan.strategies();
                let choice = plan
                    .options
                    .iter()
                    .filter(|o| o.strategy != RepairStrategy::ExtendRule)
                    .min_by_key(|o| policy.rank(o.strategy));
                let Some(choice) = choice else {
                    act.note = Some("no applicable option".into());
                    actions.push(act);
                    continue;
                };
                act.chosen = Some(choice.strategy);
                match &choice.artifact {
                    Artifact::Repair(r) => {
                        act.rule = r.rule.name.clone();
                        match apply_with_cleanup(&r.rule, &graph, &r.seed) {
                            Ok(d) => {
                                act.deleted = d.derivation.deleted;
                                act.created = d.derivation.created;
                                act.cleaned = d.cleaned;
                                graph = d.derivation.graph;
                                progress = true;
                            }
                            Err(e) => act.note = Some(e.to_string()),
                        }
                    }
                    Artifact::Blocking(blocked) => {
                        act.rule = blocked.name.clone();
                        let refused = check_conditions(blocked, g, m).is_err();
                        act.note = Some(if refused {
                            "the change is refused at the original match".into()
                        } else {
                            "the negative condition does not refuse the match".into()
                        });
                        actions.push(act);
                        if refused {
                            rounds.push(entry(round, actions, g));
                            return Ok(AdaptOutcome {
                                status: Status::Blocked,
                                graph: g.clone(),
                                initial,
                                rounds,
                                residual: Vec::new(),
                            });
                        }
                        continue;
                    }
                    Artifact::Extended(_) => unreachable!("filtered above"),
                }
                actions.push(act);
            }
        }
        rounds.push(entry(round, actions, &graph));
        if !progress {
            break;
        }
    }
    let residual = residual(&graph, constraints, &targets);
    let status = if residual.is_empty() { Status::Converged } else { Status::Unconverged };
    Ok(AdaptOutcome { status, graph, initial, rounds, residual })
}
