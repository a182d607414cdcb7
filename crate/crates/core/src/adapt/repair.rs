use std::collections::BTreeSet;

use serde::Serialize;

use crate::annotation::{annotations, detach, Annotation};
use crate::graph::{BGraph, ElementId, Kind};
use crate::matching::{find_matches_with, MatchOptions};
use crate::morphism::{pushout, GraphMorphism};
use crate::patterns::{Classification, Constraint, ConstraintKind, Form};
use crate::report::Report;
use crate::rewrite::{apply_rule, ApplicationCondition, Derivation, Polarity, RewriteError, Rule};

use super::pbar::build_pbar;
use super::{AdaptError, Cause, DetectedViolation, PBar, TypeChangeRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum RepairStrategy {
    ExtendRule,
    PostRepair,
    BlockNac,
    CreateTypedElement,
    AddTypeAnnotation,
}

impl std::fmt::Display for RepairStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RepairStrategy::ExtendRule => "extendRule",
            RepairStrategy::PostRepair => "postRepair",
            RepairStrategy::BlockNac => "blockNAC",
            RepairStrategy::CreateTypedElement => "createTypedElement",
            RepairStrategy::AddTypeAnnotation => "addTypeAnnotation",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for RepairStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            RepairStrategy::ExtendRule,
            RepairStrategy::PostRepair,
            RepairStrategy::BlockNac,
            RepairStrategy::CreateTypedElement,
            RepairStrategy::AddTypeAnnotation,
        ]
        .into_iter()
        .find(|r| r.to_string().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown repair strategy {s}"))
    }
}

/// A repair rule with the partial match it must be applied at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairRule {
    pub rule: Rule,
    /// Partial `L -> H`.
    pub seed: GraphMorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Artifact {
    /// Replaces the type-change rule.
    Extended(Rule),
    /// Applied after the type change.
    Repair(RepairRule),
    /// The type-change rule with an extra negative condition.
    Blocking(Rule),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairOption {
    pub strategy: RepairStrategy,
    pub artifact: Artifact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairPlan {
    pub constraint: String,
    pub form: Form,
    pub cause: Cause,
    pub witness: GraphMorphism,
    pub options: Vec<RepairOption>,
}

impl RepairPlan {
    pub fn strategies(&self) -> Vec<RepairStrategy> {
        self.options.iter().map(|o| o.strategy).collect()
    }

    pub fn option(&self, s: RepairStrategy) -> Option<&RepairOption> {
        self.options.iter().find(|o| o.strategy == s)
    }
}

fn glue_error(msg: impl Into<String>) -> AdaptError {
    AdaptError::GluePoint(msg.into())
}

/// Identifies elements of `from` with elements of `into`: `e` with `x`
/// (and their endpoints), same-named types, and annotations of `e` whose
/// value is identified with the value of an annotation of `x`.
fn gluing(from: &BGraph, e: ElementId, into: &BGraph, x: ElementId) -> Result<GraphMorphism, AdaptError> {
    if e.sort() != x.sort() {
        return Err(glue_error(format!("{e} and {x} have different sorts")));
    }
    let mut phi = GraphMorphism::new();
    phi.insert(e, x);
    if let (Some((s, t)), Some((xs, xt))) = (from.ends(e), into.ends(x)) {
        phi.insert(s, xs);
        if t != s {
            phi.insert(t, xt);
        }
    }
    let mut used: BTreeSet<ElementId> = phi.image();
    let type_named = |g: &BGraph, sort, name: Option<&str>| {
        g.elements_of(sort).find(|y| g.kind(*y) == Some(Kind::Type) && g.name(*y) == name)
    };
    for t in from.elements().filter(|t| t.is_vertex() && from.kind(*t) == Some(Kind::Type)) {
        if let Some(y) = type_named(into, t.sort(), from.name(t)) {
            if used.insert(y) {
                phi.insert(t, y);
            }
        }
    }
    for t in from.edges().filter(|t| from.kind(*t) == Some(Kind::Type)) {
        let (s, u) = from.ends(t).expect("edge ends");
        let (Some(ys), Some(yu)) = (phi.get(s), phi.get(u)) else { continue };
        let found = into.edges().find(|y| {
            into.kind(*y) == Some(Kind::Type) && into.name(*y) == from.name(t) && into.ends(*y) == Some((ys, yu))
        });
        if let Some(y) = found {
            if used.insert(y) {
                phi.insert(t, y);
            }
        }
    }
    let theirs: Vec<Annotation> = annotations(into).into_iter().filter(|a| a.target == x).collect();
    for a in annotations(from).into_iter().filter(|a| a.target == e) {
        let Some(v) = phi.get(a.value) else { continue };
        if let Some(b) = theirs.iter().find(|b| b.value == v && !used.contains(&b.node)) {
            used.insert(b.node);
            phi.insert(a.node, b.node);
            phi.insert(a.annotates, b.annotates);
            phi.insert(a.with, b.with);
        }
    }
    Ok(phi)
}

/// Pushout of `into <- apex -> from` where the apex is the domain of `phi`.
fn glue(into: &BGraph, from: &BGraph, phi: &GraphMorphism) -> Result<(BGraph, GraphMorphism), AdaptError> {
    let apex = from.restrict(&phi.domain().collect());
    let phi = phi.restrict(&apex.elements().collect());
    let incl = GraphMorphism::identity(&apex);
    let po = pushout(&apex, into, from, &phi, &incl)?;
    Ok((po.graph, po.from_right))
}

/// Transports the conditions of `base` along `L ⊆ L'`.
fn transport_conditions(base: &Rule, lhs: &BGraph) -> Result<Vec<ApplicationCondition>, AdaptError> {
    base.conditions
        .iter()
        .map(|ac| {
            let incl = GraphMorphism::identity(&base.lhs);
            let po = pushout(&base.lhs, lhs, &ac.graph, &incl, &ac.morphism)?;
            Ok(ApplicationCondition {
                polarity: ac.polarity,
                graph: po.graph,
                morphism: GraphMorphism::identity(lhs),
            })
        })
        .collect()
}

/// `L ⊕_e P <- K ⊕_e P̄ -> R ⊕_e P̄` for a rule whose left-hand side holds
/// `x`.
fn extend_with_premise(base: &Rule, x: ElementId, p: &BGraph, pbar: &PBar) -> Result<Rule, AdaptError> {
    if !base.lhs.contains(x) {
        return Err(glue_error(format!("{x} is not in the left-hand side of {}", base.name)));
    }
    let phi = gluing(p, pbar.element, &base.lhs, x)?;
    let (lhs, into_l) = glue(&base.lhs, p, &phi)?;
    let deleted = base.deleted();
    let mut keep: BTreeSet<ElementId> = base.left.image();
    keep.extend(pbar.graph.elements().map(|y| into_l.at(y)));
    keep.retain(|y| !deleted.contains(y));
    let interface = lhs.restrict(&keep);
    // R' = K' +_K R
    let po = pushout(&base.interface, &interface, &base.rhs, &base.left, &base.right)?;
    let conditions = transport_conditions(base, &lhs)?;
    let mut rule = Rule::from_graphs(&format!("{}+{}", base.name, "P"), lhs, interface, po.graph);
    rule.conditions = conditions;
    let report = rule.validate();
    if !report.is_empty() {
        return Err(AdaptError::InvalidRule(report));
    }
    Ok(rule)
}

/// Glues the premise into `L` and `P̄` into `K` and `R` at the retyped
/// element.
pub fn synthesize_extend_rule(rule: &TypeChangeRule, c: &Constraint, pbar: &PBar) -> Result<Rule, AdaptError> {
    let mut out = extend_with_premise(&rule.rule, rule.element, c.premise(), pbar)?;
    out.name = format!("{}+{}", rule.name(), c.name);
    Ok(out)
}

/// Iterated gluing of several premises at the same element.
pub fn synthesize_extend_rule_all(rule: &TypeChangeRule, parts: &[(&Constraint, &PBar)]) -> Result<Rule, AdaptError> {
    let mut out = rule.rule.clone();
    let base_name = rule.name().to_owned();
    for (c, pbar) in parts {
        out = extend_with_premise(&out, rule.element, c.premise(), pbar)?;
    }
    let names: Vec<&str> = parts.iter().map(|(c, _)| c.name.as_str()).collect();
    out.name = std::iter::once(base_name.as_str()).chain(names).collect::<Vec<_>>().join("+");
    Ok(out)
}

/// `P <- P̄ -> P̄`, anchored at the retyped element of the rewritten graph.
pub fn synthesize_post_repair(
    rule: &TypeChangeRule,
    c: &Constraint,
    pbar: &PBar,
    comatch: &GraphMorphism,
) -> RepairRule {
    let p = c.premise().clone();
    let rule_out = Rule::from_graphs(&format!("disrupt-{}", c.name), p, pbar.graph.clone(), pbar.graph.clone());
    let seed = [(pbar.element, comatch.at(rule.element_in_rhs()))].into_iter().collect();
    RepairRule { rule: rule_out, seed }
}

fn positive_parts(c: &Constraint) -> Option<(&BGraph, &BGraph, &GraphMorphism)> {
    match &c.kind {
        ConstraintKind::Positive { premise, conclusion, morphism } => Some((premise, conclusion, morphism)),
        ConstraintKind::Forbidden { .. } => None,
    }
}

/// Conclusion elements a repair must find rather than create: the premise
/// image and every type element.
fn conclusion_context(c: &Constraint) -> Option<BTreeSet<ElementId>> {
    let (_, conclusion, morphism) = positive_parts(c)?;
    let mut keep = morphism.image();
    keep.extend(conclusion.elements().filter(|y| conclusion.kind(*y) == Some(Kind::Type)));
    Some(keep)
}

fn seed_from_witness(c: &Constraint, witness: &GraphMorphism) -> GraphMorphism {
    match positive_parts(c) {
        Some((_, _, morphism)) => morphism.iter().map(|(x, y)| (y, witness.at(x))).collect(),
        None => GraphMorphism::new(),
    }
}

/// `C|ctx <- C|ctx -> C` with a negative condition on `C`: creates what the
/// conclusion lacks at a premise match, and nothing if it is already there.
pub fn conclusion_repair(c: &Constraint, witness: &GraphMorphism) -> Option<RepairRule> {
    let (_, conclusion, _) = positive_parts(c)?;
    let lhs = conclusion.restrict(&conclusion_context(c)?);
    let rule = Rule::from_graphs(&format!("complete-{}", c.name), lhs.clone(), lhs, conclusion.clone())
        .with_condition(Polarity::Negative, conclusion.clone());
    Some(RepairRule { rule, seed: seed_from_witness(c, witness) })
}

/// Adds only the required annotation, to an element already connected as
/// the conclusion demands.
fn annotation_repair(c: &Constraint, cls: &Classification, witness: &GraphMorphism) -> Option<RepairRule> {
    let (_, conclusion, _) = positive_parts(c)?;
    let atom = cls.atom?;
    let keep: BTreeSet<ElementId> = conclusion
        .elements()
        .filter(|y| ![atom.annotation, atom.annotates, atom.with].contains(y))
        .collect();
    let lhs = conclusion.restrict(&keep);
    let mut nac = lhs.clone();
    crate::annotation::attach(&mut nac, atom.element, atom.ty);
    let rule = Rule::from_graphs(&format!("annotate-{}", c.name), lhs.clone(), lhs, conclusion.clone())
        .with_condition(Polarity::Negative, nac);
    Some(RepairRule { rule, seed: seed_from_witness(c, witness) })
}

/// Result of [`apply_with_cleanup`].
#[derive(Clone, Debug)]
pub struct CleanDerivation {
    pub derivation: Derivation,
    /// Annotation nodes removed because their target was deleted.
    pub cleaned: Vec<ElementId>,
}

/// Applies `rule` at the first injective match extending `seed`. Annotations
/// of deleted elements that the rule does not mention are removed first.
pub fn apply_with_cleanup(rule: &Rule, host: &BGraph, seed: &GraphMorphism) -> Result<CleanDerivation, RewriteError> {
    let opts = MatchOptions::injective().seeded(seed.clone());
    let mut last = None;
    for m in find_matches_with(&rule.lhs, host, &opts) {
        let deleted: BTreeSet<ElementId> = rule.deleted().into_iter().map(|x| m.at(x)).collect();
        let image = m.image();
        let mut scratch = host.clone();
        let mut cleaned = Vec::new();
        for a in annotations(host) {
            if deleted.contains(&a.target) && !image.contains(&a.node) {
                detach(&mut scratch, &a);
                cleaned.push(a.node);
            }
        }
        match apply_rule(rule, &scratch, &m) {
            Ok(derivation) => return Ok(CleanDerivation { derivation, cleaned }),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| {
        let mut r = Report::new();
        r.push("noMatch", [], format!("{} has no match extending the seed", rule.name));
        RewriteError::InvalidMatch(r)
    }))
}

fn applicable(r: &RepairRule, host: &BGraph) -> bool {
    apply_with_cleanup(&r.rule, host, &r.seed).is_ok()
}

/// Options for a first-form violation.
pub fn handle_form1(
    rule: &TypeChangeRule,
    c: &Constraint,
    v: &DetectedViolation,
    comatch: &GraphMorphism,
    host: &BGraph,
) -> Result<RepairPlan, AdaptError> {
    let cls = v.classification.clone().ok_or_else(|| glue_error("unclassified constraint"))?;
    let mut options = Vec::new();
    match v.cause {
        Cause::PremiseNowHolds => {
            if let Some(r) = annotation_repair(c, &cls, &v.witness).filter(|r| applicable(r, host)) {
                options.push(RepairOption { strategy: RepairStrategy::AddTypeAnnotation, artifact: Artifact::Repair(r) });
            }
        }
        _ => {
            let e = cls.element.ok_or_else(|| glue_error("no distinguished element"))?;
            let pbar = build_pbar(c, e)?;
            if v.witness.at(e) == comatch.at(rule.element_in_rhs()) {
                if let Ok(ext) = synthesize_extend_rule(rule, c, &pbar) {
                    options.push(RepairOption { strategy: RepairStrategy::ExtendRule, artifact: Artifact::Extended(ext) });
                }
            }
            let mut post = synthesize_post_repair(rule, c, &pbar, comatch);
            post.seed = [(e, v.witness.at(e))].into_iter().collect();
            if v.witness.is_injective() {
                post.seed = v.witness.clone();
            }
            options.push(RepairOption { strategy: RepairStrategy::PostRepair, artifact: Artifact::Repair(post) });
        }
    }
    Ok(RepairPlan { constraint: c.name.clone(), form: Form::F1, cause: v.cause, witness: v.witness.clone(), options })
}

/// Options for a second-form violation.
pub fn handle_form2(
    rule: &TypeChangeRule,
    c: &Constraint,
    v: &DetectedViolation,
    host: &BGraph,
) -> Result<RepairPlan, AdaptError> {
    let cls = v.classification.clone().ok_or_else(|| glue_error("unclassified constraint"))?;
    let mut options = Vec::new();
    if let Some(r) = annotation_repair(c, &cls, &v.witness).filter(|r| applicable(r, host)) {
        options.push(RepairOption { strategy: RepairStrategy::AddTypeAnnotation, artifact: Artifact::Repair(r) });
    }
    if let Some(r) = conclusion_repair(c, &v.witness) {
        options.push(RepairOption { strategy: RepairStrategy::CreateTypedElement, artifact: Artifact::Repair(r) });
    }
    if v.cause == Cause::LostSoleWitness {
        let (_, conclusion, _) = positive_parts(c).expect("positive");
        let y = cls.element.ok_or_else(|| glue_error("no distinguished element"))?;
        let phi = gluing(conclusion, y, &rule.rule.lhs, rule.element)?;
        let (nac, _) = glue(&rule.rule.lhs, conclusion, &phi)?;
        let blocked = rule.rule.clone().with_condition(Polarity::Negative, nac);
        options.push(RepairOption { strategy: RepairStrategy::BlockNac, artifact: Artifact::Blocking(blocked) });
    }
    Ok(RepairPlan { constraint: c.name.clone(), form: Form::F2, cause: v.cause, witness: v.witness.clone(), options })
}

/// `R ⊕_e C`: the conclusion pattern is created together with the new
/// annotation. Only offered when the premise is the element and its type.
pub(crate) fn extend_rhs(base: &Rule, x: ElementId, c: &Constraint, cls: &Classification) -> Option<Rule> {
    let (premise, conclusion, morphism) = positive_parts(c)?;
    let e = cls.element?;
    let phi = gluing(conclusion, morphism.at(e), &base.rhs, x).ok()?;
    let premise_glued = premise.elements().all(|p| phi.contains(morphism.at(p)));
    let types_glued = conclusion
        .elements()
        .filter(|y| conclusion.kind(*y) == Some(Kind::Type))
        .all(|y| phi.contains(y));
    if !premise_glued || !types_glued {
        return None;
    }
    let (rhs, _) = glue(&base.rhs, conclusion, &phi).ok()?;
    let out = Rule { name: format!("{}+{}", base.name, c.name), rhs, ..base.clone() };
    out.validate().is_empty().then_some(out)
}

/// Options for a third-form violation.
pub fn handle_form3(rule: &TypeChangeRule, c: &Constraint, v: &DetectedViolation) -> Result<RepairPlan, AdaptError> {
    let cls = v.classification.clone().ok_or_else(|| glue_error("unclassified constraint"))?;
    let mut options = Vec::new();
    if let Some(ext) = extend_rhs(&rule.rule, rule.element_in_rhs(), c, &cls) {
        options.push(RepairOption { strategy: RepairStrategy::ExtendRule, artifact: Artifact::Extended(ext) });
    }
    if let Some(r) = conclusion_repair(c, &v.witness) {
        options.push(RepairOption { strategy: RepairStrategy::PostRepair, artifact: Artifact::Repair(r) });
    }
    Ok(RepairPlan { constraint: c.name.clone(), form: Form::F3, cause: v.cause, witness: v.witness.clone(), options })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::tests::{bruce, gender_rule, only_match};
    use crate::adapt::detect_violations;
    use crate::matching::is_isomorphic;
    use crate::patterns::check_constraint;
    use crate::rewrite::applicable_matches;

    #[test]
    fn extend_and_post_agree_on_bruce() {
        let (g, c) = bruce(true);
        let r = gender_rule();
        let m = only_match(&r, &g);
        let pbar = build_pbar(&c, ElementId::node(0)).unwrap();

        let ext = synthesize_extend_rule(&r, &c, &pbar).unwrap();
        let ms = applicable_matches(&ext, &g, &m);
        assert_eq!(ms.len(), 1);
        let h1 = apply_rule(&ext, &g, &ms[0]).unwrap().graph;
        assert!(check_constraint(&h1, &c).satisfied);

        let d = apply_rule(&r.rule, &g, &m).unwrap();
        let post = synthesize_post_repair(&r, &c, &pbar, &d.comatch);
        let h2 = apply_with_cleanup(&post.rule, &d.graph, &post.seed).unwrap().derivation.graph;
        assert!(check_constraint(&h2, &c).satisfied);
        assert!(is_isomorphic(&h1, &h2));
        assert_eq!(h2.len(), g.len() - 1);
    }

    #[test]
    fn form1_plan_offers_both() {
        let (g, c) = bruce(true);
        let r = gender_rule();
        let m = only_match(&r, &g);
        let v = detect_violations(&g, &r, &m, std::slice::from_ref(&c)).unwrap();
        let d = apply_rule(&r.rule, &g, &m).unwrap();
        let plan = handle_form1(&r, &c, &v[0], &d.comatch, &d.graph).unwrap();
        assert_eq!(plan.strategies(), vec![RepairStrategy::ExtendRule, RepairStrategy::PostRepair]);
    }
}
