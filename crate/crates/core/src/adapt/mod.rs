//! Dynamic typing: rules that change a type annotation, the violations they
//! cause and the repairs that restore the constraints.

mod cascade;
mod pbar;
mod repair;

pub use cascade::{apply_with_repairs, graph_hash, AdaptOutcome, Policy, Status, Strategy, TraceAction, TraceEntry};
pub use pbar::{build_pbar, colimit_union, connecting_elements, PBar};
pub use repair::{
    apply_with_cleanup, conclusion_repair, handle_form1, handle_form2, handle_form3, synthesize_extend_rule,
    synthesize_extend_rule_all, synthesize_post_repair, Artifact, CleanDerivation, RepairOption, RepairPlan,
    RepairRule, RepairStrategy,
};

use serde::Serialize;
use thiserror::Error;

use crate::annotation::{annotations, Annotation};
use crate::graph::{BGraph, ElementId, Kind, Label, Sort};
use crate::morphism::{GraphMorphism, PushoutError};
use crate::patterns::{
    check_constraint, classify_constraint_form, Classification, Constraint, FormError,
};
use crate::report::Report;
use crate::rewrite::{apply_rule, Polarity, RewriteError, Rule};

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("rule is invalid: {0}")]
    InvalidRule(Report),
    #[error("rule {rule} does not change a type annotation: {reason}")]
    NotTypeChange { rule: String, reason: String },
    #[error("rule is not applicable: {0}")]
    Inapplicable(#[from] RewriteError),
    #[error("constraint {name} has form {found}, expected {expected}")]
    WrongForm { name: String, found: String, expected: String },
    #[error("{element} is not an element of the premise of {name}")]
    NotInPremise { name: String, element: ElementId },
    #[error("cannot glue at {0}")]
    GluePoint(String),
    #[error(transparent)]
    Pushout(#[from] PushoutError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A type-change rule: `L \ K` and `R \ K` are single annotation patterns
/// on the same element with different types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeChangeRule {
    pub rule: Rule,
    pub sort: Sort,
    /// The retyped element, as an id of `L` (also of `K` and `R`).
    pub element: ElementId,
    pub old_type: ElementId,
    pub new_type: ElementId,
    /// The deleted annotation (ids of `L`).
    pub removed: Annotation,
    /// The created annotation (ids of `R`).
    pub added: Annotation,
}

/// Names of an edge type and its endpoint types.
#[derive(Clone, Copy, Debug)]
pub struct EdgeTypeRef<'a> {
    pub name: &'a str,
    pub src: &'a str,
    pub tgt: &'a str,
}

fn add_vertex(g: &mut BGraph, sort: Sort, label: Label) -> ElementId {
    match sort {
        Sort::Box => g.add_box(label),
        _ => g.add_node(label),
    }
}

impl TypeChangeRule {
    /// Changes the type of a node or box from `old` to `new`. The rule also
    /// carries a negative condition refusing elements already typed `new`.
    pub fn new(name: &str, sort: Sort, old: &str, new: &str) -> Result<Self, AdaptError> {
        if sort == Sort::Edge {
            return Err(AdaptError::NotTypeChange {
                rule: name.to_owned(),
                reason: "edge type changes need endpoint types; use TypeChangeRule::for_edge".into(),
            });
        }
        let mut l = BGraph::new();
        let x = add_vertex(&mut l, sort, Label::instance());
        let old_t = add_vertex(&mut l, sort, Label::ty(old));
        let new_t = add_vertex(&mut l, sort, Label::ty(new));
        Self::assemble(name, l, x, old_t, new_t)
    }

    pub fn for_edge(name: &str, old: EdgeTypeRef<'_>, new: EdgeTypeRef<'_>) -> Result<Self, AdaptError> {
        let mut l = BGraph::new();
        let s = l.add_node(Label::instance());
        let t = l.add_node(Label::instance());
        let x = l.add_edge(Label::instance(), s, t);
        let mut types = std::collections::BTreeMap::new();
        let mut type_node = |l: &mut BGraph, n: &str| *types.entry(n.to_owned()).or_insert_with(|| l.add_node(Label::ty(n)));
        let (os, ot) = (type_node(&mut l, old.src), type_node(&mut l, old.tgt));
        let old_t = l.add_edge(Label::ty(old.name), os, ot);
        let (ns, nt) = (type_node(&mut l, new.src), type_node(&mut l, new.tgt));
        let new_t = l.add_edge(Label::ty(new.name), ns, nt);
        Self::assemble(name, l, x, old_t, new_t)
    }

    fn assemble(name: &str, mut l: BGraph, x: ElementId, old_t: ElementId, new_t: ElementId) -> Result<Self, AdaptError> {
        let k = l.clone();
        crate::annotation::attach(&mut l, x, old_t);
        let mut r = k.clone();
        // keep R's fresh ids clear of L's
        while r.next_index() < l.next_index() {
            r.fresh(Sort::Node);
        }
        crate::annotation::attach(&mut r, x, new_t);
        let mut nac = l.clone();
        crate::annotation::attach(&mut nac, x, new_t);
        let rule = Rule::from_graphs(name, l, k, r).with_condition(Polarity::Negative, nac);
        Self::from_rule(rule)
    }

    /// Recognises a type-change rule.
    pub fn from_rule(rule: Rule) -> Result<Self, AdaptError> {
        let report = rule.validate();
        if !report.is_empty() {
            return Err(AdaptError::InvalidRule(report));
        }
        let bad = |reason: &str| AdaptError::NotTypeChange { rule: rule.name.clone(), reason: reason.to_owned() };
        let single = |g: &BGraph, ids: &std::collections::BTreeSet<ElementId>, side: &str| {
            let found: Vec<Annotation> = annotations(g).into_iter().filter(|a| ids.contains(&a.node)).collect();
            match found.as_slice() {
                [a] if ids.len() == 3
                    && ids.contains(&a.annotates)
                    && ids.contains(&a.with)
                    && g.kind(a.value) == Some(Kind::Type) =>
                {
                    Ok(*a)
                }
                _ => Err(bad(&format!("{side} must be exactly one type annotation"))),
            }
        };
        let removed = single(&rule.lhs, &rule.deleted(), "L \\ K")?;
        let added = single(&rule.rhs, &rule.created(), "R \\ K")?;
        let l_inv = rule.left.inverse().expect("injective span");
        let to_r = |lx: ElementId| l_inv.get(lx).map(|k| rule.right.at(k));
        if to_r(removed.target) != Some(added.target) {
            return Err(bad("the annotated elements differ"));
        }
        let Some(old_in_r) = to_r(removed.value) else {
            return Err(bad("the old type must be preserved"));
        };
        if old_in_r == added.value {
            return Err(bad("old and new type coincide"));
        }
        let r_inv = rule.right.inverse().expect("injective span");
        let Some(new_in_l) = r_inv.get(added.value).map(|k| rule.left.at(k)) else {
            return Err(bad("the new type must be preserved"));
        };
        Ok(TypeChangeRule {
            sort: removed.target.sort(),
            element: removed.target,
            old_type: removed.value,
            new_type: new_in_l,
            removed,
            added,
            rule,
        })
    }

    pub fn name(&self) -> &str {
        &self.rule.name
    }

    pub fn old_type_name(&self) -> Option<&str> {
        self.rule.lhs.name(self.old_type)
    }

    pub fn new_type_name(&self) -> Option<&str> {
        self.rule.lhs.name(self.new_type)
    }

    /// The retyped element as an id of `R` (the rule's co-match domain).
    pub fn element_in_rhs(&self) -> ElementId {
        self.added.target
    }
}

/// Why a constraint broke.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cause {
    /// An element lost the type a first-form constraint requires.
    LostRequiredType,
    /// The retyped element was the only witness of a second-form constraint.
    LostSoleWitness,
    /// The new annotation completed a premise that lacks its conclusion.
    PremiseNowHolds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectedViolation {
    /// Index into the constraint list.
    pub index: usize,
    pub constraint: String,
    pub classification: Option<Classification>,
    /// Premise match into the rewritten graph.
    pub witness: GraphMorphism,
    pub cause: Cause,
}

/// Classifies each witness of a failing constraint in `after`.
pub(crate) fn causes(
    before: &BGraph,
    index: usize,
    c: &Constraint,
    witnesses: &[GraphMorphism],
) -> Vec<DetectedViolation> {
    let classification = classify_constraint_form(c).ok();
    let form = classification.as_ref().map(|k| k.form);
    witnesses
        .iter()
        .map(|w| {
            let old = w.image().iter().all(|y| before.contains(*y));
            let cause = match (old, form) {
                (true, Some(crate::patterns::Form::F2)) => Cause::LostSoleWitness,
                (true, _) => Cause::LostRequiredType,
                (false, _) => Cause::PremiseNowHolds,
            };
            DetectedViolation {
                index,
                constraint: c.name.clone(),
                classification: classification.clone(),
                witness: w.clone(),
                cause,
            }
        })
        .collect()
}

/// Constraints that hold on `before` but fail once the rule is applied at
/// `m`, one entry per violating premise match.
pub fn detect_violations(
    before: &BGraph,
    rule: &TypeChangeRule,
    m: &GraphMorphism,
    constraints: &[Constraint],
) -> Result<Vec<DetectedViolation>, AdaptError> {
    let after = apply_rule(&rule.rule, before, m)?.graph;
    let mut out = Vec::new();
    for (i, c) in constraints.iter().enumerate() {
        if !check_constraint(before, c).satisfied {
            continue;
        }
        let v = check_constraint(&after, c);
        out.extend(causes(before, i, c, &v.witnesses));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::attach;
    use crate::matching::{find_matches_with, MatchOptions};

    pub(crate) fn bruce(can_drive: bool) -> (BGraph, Constraint) {
        let mut g = BGraph::new();
        let bruce = g.add_node(Label::named("Bruce"));
        let male = g.add_node(Label::ty("Male"));
        g.add_node(Label::ty("Female"));
        attach(&mut g, bruce, male);
        if can_drive {
            let t = g.add_node(Label::named("true"));
            g.add_edge(Label::named("canDrive"), bruce, t);
        }
        let mut p = BGraph::new();
        let x = p.add_node(Label::instance());
        let t = p.add_node(Label::named("true"));
        p.add_edge(Label::named("canDrive"), x, t);
        let mut c = p.clone();
        let m = c.add_node(Label::ty("Male"));
        attach(&mut c, x, m);
        (g, Constraint::inclusion("DriverIsMale", p, c))
    }

    pub(crate) fn gender_rule() -> TypeChangeRule {
        TypeChangeRule::new("FromMaleToFemale", Sort::Node, "Male", "Female").unwrap()
    }

    pub(crate) fn only_match(r: &TypeChangeRule, g: &BGraph) -> GraphMorphism {
        let ms = find_matches_with(&r.rule.lhs, g, &MatchOptions::injective());
        assert_eq!(ms.len(), 1);
        ms.into_iter().next().unwrap()
    }

    #[test]
    fn recognises_shape() {
        let r = gender_rule();
        assert_eq!(r.old_type_name(), Some("Male"));
        assert_eq!(r.new_type_name(), Some("Female"));
        assert_eq!(r.rule.deleted().len(), 3);
        assert_eq!(r.rule.created().len(), 3);
        let id = Rule::identity("id", &r.rule.lhs);
        assert!(TypeChangeRule::from_rule(id).is_err());
    }

    #[test]
    fn edge_rule_is_recognised() {
        let r = TypeChangeRule::for_edge(
            "promote",
            EdgeTypeRef { name: "knows", src: "Person", tgt: "Person" },
            EdgeTypeRef { name: "trusts", src: "Person", tgt: "Person" },
        )
        .unwrap();
        assert_eq!(r.sort, Sort::Edge);
    }

    #[test]
    fn driver_violation_detected() {
        let (g, c) = bruce(true);
        let r = gender_rule();
        let m = only_match(&r, &g);
        let v = detect_violations(&g, &r, &m, std::slice::from_ref(&c)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].cause, Cause::LostRequiredType);
        let (g, c) = bruce(false);
        let m = only_match(&r, &g);
        assert!(detect_violations(&g, &r, &m, &[c]).unwrap().is_empty());
    }
}
