//! Double-pushout rule application.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{validate_bgraph, BGraph, ElementId};
use crate::matching::{find_matches_with, has_match, MatchOptions};
use crate::morphism::{creation_order, labels_compatible, validate_morphism, GraphMorphism};
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

/// `ac: L -> AC`. A positive condition needs an extension of the match to
/// `AC`; a negative one forbids it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApplicationCondition {
    pub polarity: Polarity,
    pub graph: BGraph,
    pub morphism: GraphMorphism,
}

/// A span `L <-l- K -r-> R` with application conditions on `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: BGraph,
    pub interface: BGraph,
    pub rhs: BGraph,
    pub left: GraphMorphism,
    pub right: GraphMorphism,
    pub conditions: Vec<ApplicationCondition>,
}

impl Rule {
    /// The rule `g <- g -> g`.
    pub fn identity(name: &str, g: &BGraph) -> Rule {
        let id = GraphMorphism::identity(g);
        Rule {
            name: name.to_owned(),
            lhs: g.clone(),
            interface: g.clone(),
            rhs: g.clone(),
            left: id.clone(),
            right: id,
            conditions: Vec::new(),
        }
    }

    /// Builds a rule whose interface is embedded in `lhs` and `rhs` under
    /// identical ids (the usual way to write rules by hand).
    pub fn from_graphs(name: &str, lhs: BGraph, interface: BGraph, rhs: BGraph) -> Rule {
        let id = GraphMorphism::identity(&interface);
        Rule {
            name: name.to_owned(),
            lhs,
            interface,
            rhs,
            left: id.clone(),
            right: id,
            conditions: Vec::new(),
        }
    }

    /// Adds a condition whose graph extends `lhs` under identical ids.
    pub fn with_condition(mut self, polarity: Polarity, graph: BGraph) -> Rule {
        let morphism = GraphMorphism::identity(&self.lhs);
        self.conditions.push(ApplicationCondition {
            polarity,
            graph,
            morphism,
        });
        self
    }

    pub fn validate(&self) -> Report {
        let mut report = Report::new();
        for (g, what) in [(&self.lhs, "L"), (&self.interface, "K"), (&self.rhs, "R")] {
            for v in validate_bgraph(g).violations() {
                report.push(&v.constraint, v.elements.clone(), format!("{what}: {}", v.message));
            }
        }
        for (m, tgt, what) in [(&self.left, &self.lhs, "l"), (&self.right, &self.rhs, "r")] {
            for v in validate_morphism(&self.interface, tgt, m).violations() {
                report.push(&v.constraint, v.elements.clone(), format!("{what}: {}", v.message));
            }
            if !m.is_injective() {
                report.push("injectiveSpan", [], format!("{what} is not injective"));
            }
        }
        for (i, ac) in self.conditions.iter().enumerate() {
            for v in validate_morphism(&self.lhs, &ac.graph, &ac.morphism).violations() {
                report.push(&v.constraint, v.elements.clone(), format!("ac{i}: {}", v.message));
            }
            if !ac.morphism.is_injective() {
                report.push("injectiveCondition", [], format!("ac{i} is not injective"));
            }
        }
        report
    }

    /// Elements of `L` outside `l(K)`.
    pub fn deleted(&self) -> BTreeSet<ElementId> {
        let kept = self.left.image();
        self.lhs.elements().filter(|x| !kept.contains(x)).collect()
    }

    /// Elements of `R` outside `r(K)`.
    pub fn created(&self) -> BTreeSet<ElementId> {
        let kept = self.right.image();
        self.rhs.elements().filter(|x| !kept.contains(x)).collect()
    }
}

/// Outcome of a successful application.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub graph: BGraph,
    /// `R -> H`.
    pub comatch: GraphMorphism,
    pub deleted: Vec<ElementId>,
    pub created: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("invalid rule: {0}")]
    InvalidRule(Report),
    #[error("invalid match: {0}")]
    InvalidMatch(Report),
    #[error("gluing condition fails: {referrer} refers to deleted element {element}")]
    Dangling {
        element: ElementId,
        referrer: ElementId,
    },
    #[error("application condition {index} ({polarity:?}) fails")]
    ConditionFailed { index: usize, polarity: Polarity },
}

/// Checks the application conditions of `rule` at `m`.
pub fn check_conditions(rule: &Rule, host: &BGraph, m: &GraphMorphism) -> Result<(), RewriteError> {
    for (index, ac) in rule.conditions.iter().enumerate() {
        let seed: GraphMorphism = ac.morphism.iter().map(|(x, y)| (y, m.at(x))).collect();
        let opts = MatchOptions::injective().seeded(seed);
        let found = has_match(&ac.graph, host, &opts);
        let ok = match ac.polarity {
            Polarity::Positive => found,
            Polarity::Negative => !found,
        };
        if !ok {
            return Err(RewriteError::ConditionFailed {
                index,
                polarity: ac.polarity,
            });
        }
    }
    Ok(())
}

/// Applies `rule` at the injective match `m: L -> host`.
pub fn apply_rule(rule: &Rule, host: &BGraph, m: &GraphMorphism) -> Result<Derivation, RewriteError> {
    let r = rule.validate();
    if !r.is_empty() {
        return Err(RewriteError::InvalidRule(r));
    }
    let mut r = validate_morphism(&rule.lhs, host, m);
    if r.is_empty() && !m.is_injective() {
        r.push("injectiveMatch", [], "match is not injective");
    }
    if r.is_empty() && !labels_compatible(&rule.lhs, host, m) {
        r.push("labelMatch", [], "match does not respect labels");
    }
    if !r.is_empty() {
        return Err(RewriteError::InvalidMatch(r));
    }
    check_conditions(rule, host, m)?;

    let deleted: BTreeSet<ElementId> = rule.deleted().into_iter().map(|x| m.at(x)).collect();
    for e in host.edges() {
        if deleted.contains(&e) {
            continue;
        }
        let (s, t) = host.ends(e).expect("edge ends");
        for end in [s, t] {
            if deleted.contains(&end) {
                return Err(RewriteError::Dangling {
                    element: end,
                    referrer: e,
                });
            }
        }
    }
    for b in &deleted {
        if let Some(inner) = host.contents(*b) {
            if let Some(x) = inner.iter().find(|x| !deleted.contains(x)) {
                return Err(RewriteError::Dangling {
                    element: *b,
                    referrer: *x,
                });
            }
        }
    }

    let mut graph = host.clone();
    for e in deleted.iter().filter(|x| !x.is_vertex()) {
        graph.remove(*e);
    }
    for v in deleted.iter().filter(|x| x.is_vertex()) {
        graph.remove(*v);
    }

    let mut comatch = GraphMorphism::new();
    for (k, rk) in rule.right.iter() {
        comatch.insert(rk, m.at(rule.left.at(k)));
    }
    let mut created = Vec::new();
    for x in creation_order(&rule.rhs, &rule.created()) {
        let y = graph.fresh(x.sort());
        comatch.insert(x, y);
        created.push(y);
        let label = rule.rhs.label(x).expect("label").clone();
        match rule.rhs.ends(x) {
            Some((s, t)) => graph.insert_edge(y, label, comatch.at(s), comatch.at(t)),
            None => graph.insert(y, label),
        }
    }
    for (b, inner) in rule.rhs.all_contents() {
        let hb = comatch.at(*b);
        let mut content = graph.contents(hb).cloned().unwrap_or_default();
        content.extend(inner.iter().map(|x| comatch.at(*x)));
        graph.set_contents_raw(hb, content);
    }
    graph.close_containment();

    Ok(Derivation {
        graph,
        comatch,
        deleted: deleted.into_iter().collect(),
        created,
    })
}

/// Injective matches of the rule's left-hand side at which the rule can be
/// applied (conditions hold, gluing condition satisfied), in match order.
pub fn applicable_matches(rule: &Rule, host: &BGraph, seed: &GraphMorphism) -> Vec<GraphMorphism> {
    let opts = MatchOptions::injective().seeded(seed.clone());
    find_matches_with(&rule.lhs, host, &opts)
        .into_iter()
        .filter(|m| apply_rule(rule, host, m).is_ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;
    use crate::matching::{find_matches, is_isomorphic};

    fn edge_graph() -> (BGraph, ElementId, ElementId, ElementId) {
        let mut g = BGraph::new();
        let a = g.add_node(Label::instance());
        let b = g.add_node(Label::instance());
        let e = g.add_edge(Label::instance(), a, b);
        (g, a, b, e)
    }

    #[test]
    fn identity_rule_leaves_host_unchanged() {
        let (host, ..) = edge_graph();
        let (pattern, ..) = edge_graph();
        let rule = Rule::identity("id", &pattern);
        let m = &find_matches(&pattern, &host, true)[0];
        let d = apply_rule(&rule, &host, m).unwrap();
        assert!(is_isomorphic(&d.graph, &host));
        assert!(d.deleted.is_empty() && d.created.is_empty());
    }

    #[test]
    fn deleting_node_with_foreign_edge_is_dangling() {
        let (host, a, _, e) = edge_graph();
        let mut lhs = BGraph::new();
        let x = lhs.add_node(Label::instance());
        let rule = Rule::from_graphs("del", lhs, BGraph::new(), BGraph::new());
        let m: GraphMorphism = [(x, a)].into_iter().collect();
        let err = apply_rule(&rule, &host, &m).unwrap_err();
        assert_eq!(err, RewriteError::Dangling { element: a, referrer: e });
    }

    #[test]
    fn deleting_box_with_surviving_content_is_dangling() {
        let mut host = BGraph::new();
        let b = host.add_box(Label::instance());
        let n = host.add_node(Label::instance());
        host.contain(b, n);
        let mut lhs = BGraph::new();
        let x = lhs.add_box(Label::instance());
        let rule = Rule::from_graphs("del", lhs, BGraph::new(), BGraph::new());
        let m: GraphMorphism = [(x, b)].into_iter().collect();
        assert!(matches!(
            apply_rule(&rule, &host, &m),
            Err(RewriteError::Dangling { element, referrer }) if element == b && referrer == n
        ));
    }

    #[test]
    fn created_elements_get_fresh_ids_and_interface_is_preserved() {
        let (host, a, b, e) = edge_graph();
        let mut k = BGraph::new();
        let x = k.add_node(Label::instance());
        let lhs = k.clone();
        let mut rhs = k.clone();
        let y = rhs.add_node(Label::named("new"));
        rhs.add_edge(Label::instance(), x, y);
        let rule = Rule::from_graphs("grow", lhs, k, rhs);
        let m: GraphMorphism = [(x, b)].into_iter().collect();
        let d = apply_rule(&rule, &host, &m).unwrap();
        assert_eq!(d.created.len(), 2);
        assert!(d.created.iter().all(|c| c.index() >= host.next_index()));
        for old in [a, b, e] {
            assert_eq!(d.graph.label(old), host.label(old));
        }
        assert!(validate_bgraph(&d.graph).is_empty());
    }

    #[test]
    fn negative_condition_blocks() {
        let (host, a, ..) = edge_graph();
        let mut lhs = BGraph::new();
        let x = lhs.add_node(Label::instance());
        let mut nac = lhs.clone();
        let y = nac.add_node(Label::instance());
        nac.add_edge(Label::instance(), x, y);
        let rule = Rule::identity("guarded", &lhs).with_condition(Polarity::Negative, nac);
        let m: GraphMorphism = [(x, a)].into_iter().collect();
        assert!(matches!(
            apply_rule(&rule, &host, &m),
            Err(RewriteError::ConditionFailed { index: 0, .. })
        ));
        assert_eq!(applicable_matches(&rule, &host, &GraphMorphism::new()).len(), 1);
    }
}
