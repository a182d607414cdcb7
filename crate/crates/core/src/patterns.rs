//! Tree patterns, graph constraints and the classifier for typed
//! constraint forms.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::annotation::annotations;
use crate::graph::{BGraph, ElementId, Kind};
use crate::matching::{find_matches_with, MatchOptions};
use crate::morphism::{validate_morphism, GraphMorphism};
use crate::report::Report;

/// `graphs[parent] -> graphs[child]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternLink {
    pub parent: usize,
    pub child: usize,
    pub morphism: GraphMorphism,
}

/// Graphs `G1..Gn` with injective morphisms arranged as a tree rooted at
/// `graphs[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub graphs: Vec<BGraph>,
    pub links: Vec<PatternLink>,
    /// Whether the collection morphisms into a host must be injective.
    pub injective: bool,
}

impl Pattern {
    pub fn single(g: BGraph) -> Self {
        Pattern { graphs: vec![g], links: Vec::new(), injective: true }
    }

    /// A chain `G1 -> G2 -> ... -> Gn`.
    pub fn chain(graphs: Vec<BGraph>, morphisms: Vec<GraphMorphism>) -> Self {
        let links = morphisms
            .into_iter()
            .enumerate()
            .map(|(i, morphism)| PatternLink { parent: i, child: i + 1, morphism })
            .collect();
        Pattern { graphs, links, injective: true }
    }

    pub fn validate(&self) -> Report {
        let mut report = Report::new();
        let n = self.graphs.len();
        if n == 0 {
            report.push("patternEmpty", [], "a pattern needs at least one graph");
            return report;
        }
        let mut parent = vec![None; n];
        for (k, l) in self.links.iter().enumerate() {
            if l.parent >= n || l.child >= n {
                report.push("patternLinkIndex", [], format!("link {k} refers to a missing graph"));
                continue;
            }
            if l.child == 0 {
                report.push("patternRoot", [], format!("link {k} targets the root"));
            } else if parent[l.child].replace(l.parent).is_some() {
                report.push("patternTree", [], format!("graph {} has two parents", l.child));
            }
            let r = validate_morphism(&self.graphs[l.parent], &self.graphs[l.child], &l.morphism);
            for v in r.violations() {
                report.push(&v.constraint, v.elements.clone(), format!("link {k}: {}", v.message));
            }
            if !l.morphism.is_injective() {
                report.push("patternInjective", [], format!("link {k} is not injective"));
            }
        }
        for (i, p) in parent.iter().enumerate().skip(1) {
            if p.is_none() {
                report.push("patternTree", [], format!("graph {i} is not reached by any link"));
            }
        }
        // a parent chain must reach the root
        for start in 1..n {
            let mut seen = BTreeSet::new();
            let mut cur = start;
            while let Some(p) = parent[cur] {
                if !seen.insert(cur) {
                    report.push("patternTree", [], format!("graph {start} lies on a cycle"));
                    break;
                }
                cur = p;
            }
        }
        report
    }

    /// Graph indices in an order where every parent precedes its children.
    fn order(&self) -> Vec<(usize, Option<&PatternLink>)> {
        let mut out = vec![(0, None)];
        let mut i = 0;
        while i < out.len() {
            let g = out[i].0;
            for l in self.links.iter().filter(|l| l.parent == g) {
                out.push((l.child, Some(l)));
            }
            i += 1;
        }
        out
    }
}

/// Morphisms `Gi -> host`, indexed like the pattern's graphs.
pub type Collection = Vec<GraphMorphism>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternVerdict {
    pub satisfied: bool,
    pub collections: Vec<Collection>,
}

/// All collections `S_{π,G}`: one morphism per pattern graph such that
/// `m_child ∘ link = m_parent` for every link.
pub fn satisfies_pattern(host: &BGraph, p: &Pattern) -> PatternVerdict {
    let order = p.order();
    let mut partial: Vec<Vec<Option<GraphMorphism>>> = vec![vec![None; p.graphs.len()]];
    let opts = if p.injective { MatchOptions::injective() } else { MatchOptions::non_injective() };
    for (g, link) in order {
        let mut next = Vec::new();
        for coll in partial {
            let seed = match link {
                None => GraphMorphism::new(),
                Some(l) => {
                    let parent = coll[l.parent].as_ref().expect("parent matched first");
                    l.morphism.iter().map(|(x, y)| (y, parent.at(x))).collect()
                }
            };
            for m in find_matches_with(&p.graphs[g], host, &opts.clone().seeded(seed)) {
                let mut c = coll.clone();
                c[g] = Some(m);
                next.push(c);
            }
        }
        partial = next;
    }
    let collections: Vec<Collection> = partial
        .into_iter()
        .map(|c| c.into_iter().map(|m| m.expect("all graphs matched")).collect())
        .collect();
    PatternVerdict { satisfied: !collections.is_empty(), collections }
}

/// Per-graph maps `π.graphs[i] -> π'.graphs[graph_map[i]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternMorphism {
    pub graph_map: Vec<usize>,
    pub maps: Vec<GraphMorphism>,
}

/// Checks injectivity, tree preservation and commutation with the links.
pub fn validate_pattern_morphism(src: &Pattern, tgt: &Pattern, m: &PatternMorphism) -> Report {
    let mut report = Report::new();
    if m.graph_map.len() != src.graphs.len() || m.maps.len() != src.graphs.len() {
        report.push("patternMorphismArity", [], "one map per source graph is required");
        return report;
    }
    for (i, (&j, f)) in m.graph_map.iter().zip(&m.maps).enumerate() {
        if j >= tgt.graphs.len() {
            report.push("patternMorphismIndex", [], format!("graph {i} maps to missing graph {j}"));
            return report;
        }
        report.extend(validate_morphism(&src.graphs[i], &tgt.graphs[j], f));
        if !f.is_injective() {
            report.push("patternMorphismInjective", [], format!("map of graph {i} is not injective"));
        }
    }
    for l in &src.links {
        let (pi, ci) = (m.graph_map[l.parent], m.graph_map[l.child]);
        // the image of a link is a composite of target links from pi down to ci
        let mut path = GraphMorphism::identity(&tgt.graphs[ci]);
        let mut cur = ci;
        let mut ok = true;
        while cur != pi {
            match tgt.links.iter().find(|t| t.child == cur) {
                Some(t) => {
                    path = t.morphism.then(&path);
                    cur = t.parent;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            report.push(
                "patternMorphismTree",
                [],
                format!("link {}->{} has no image path", l.parent, l.child),
            );
            continue;
        }
        let lhs = l.morphism.then(&m.maps[l.child]);
        let rhs = m.maps[l.parent].then(&path);
        if lhs != rhs {
            report.push(
                "patternMorphismCommutes",
                [],
                format!("link {}->{} image not preserved", l.parent, l.child),
            );
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `c: premise -> conclusion`.
    Positive { premise: BGraph, conclusion: BGraph, morphism: GraphMorphism },
    Forbidden { graph: BGraph },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub kind: ConstraintKind,
    /// Premise and conclusion matches must be injective.
    pub injective: bool,
}

impl Constraint {
    pub fn positive(name: &str, premise: BGraph, conclusion: BGraph, morphism: GraphMorphism) -> Self {
        Constraint {
            name: name.to_owned(),
            kind: ConstraintKind::Positive { premise, conclusion, morphism },
            injective: false,
        }
    }

    /// Premise included in the conclusion by identity on shared ids.
    pub fn inclusion(name: &str, premise: BGraph, conclusion: BGraph) -> Self {
        let morphism = GraphMorphism::identity(&premise);
        Self::positive(name, premise, conclusion, morphism)
    }

    pub fn forbidden(name: &str, graph: BGraph) -> Self {
        Constraint { name: name.to_owned(), kind: ConstraintKind::Forbidden { graph }, injective: false }
    }

    pub fn injective(mut self) -> Self {
        self.injective = true;
        self
    }

    pub fn premise(&self) -> &BGraph {
        match &self.kind {
            ConstraintKind::Positive { premise, .. } => premise,
            ConstraintKind::Forbidden { graph } => graph,
        }
    }

    pub fn validate(&self) -> Report {
        let mut report = Report::new();
        if let ConstraintKind::Positive { premise, conclusion, morphism } = &self.kind {
            report.extend(validate_morphism(premise, conclusion, morphism));
            if !morphism.is_injective() {
                report.push("constraintInjective", [], format!("{} is not injective", self.name));
            }
        }
        report
    }

    fn options(&self) -> MatchOptions {
        if self.injective { MatchOptions::injective() } else { MatchOptions::non_injective() }
    }

    /// The premise as a two-graph pattern `P -> C`.
    pub fn as_pattern(&self) -> Pattern {
        match &self.kind {
            ConstraintKind::Positive { premise, conclusion, morphism } => Pattern {
                graphs: vec![premise.clone(), conclusion.clone()],
                links: vec![PatternLink { parent: 0, child: 1, morphism: morphism.clone() }],
                injective: self.injective,
            },
            ConstraintKind::Forbidden { graph } => Pattern {
                injective: self.injective,
                ..Pattern::single(graph.clone())
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintVerdict {
    pub constraint: String,
    pub satisfied: bool,
    /// Premise matches without a commuting conclusion match (positive) or
    /// matches of the forbidden graph.
    pub witnesses: Vec<GraphMorphism>,
}

/// Conclusion matches extending the premise match `m`.
pub fn extensions(c: &Constraint, host: &BGraph, m: &GraphMorphism) -> Vec<GraphMorphism> {
    match &c.kind {
        ConstraintKind::Positive { conclusion, morphism, .. } => {
            let seed: GraphMorphism = morphism.iter().map(|(x, y)| (y, m.at(x))).collect();
            find_matches_with(conclusion, host, &c.options().seeded(seed))
        }
        ConstraintKind::Forbidden { .. } => Vec::new(),
    }
}

/// An empty premise has exactly one (empty) match, so the conclusion must
/// occur at least once.
pub fn check_constraint(host: &BGraph, c: &Constraint) -> ConstraintVerdict {
    let opts = c.options();
    let premise_matches = find_matches_with(c.premise(), host, &opts);
    let witnesses: Vec<GraphMorphism> = match &c.kind {
        ConstraintKind::Forbidden { .. } => premise_matches,
        ConstraintKind::Positive { conclusion, morphism, .. } => premise_matches
            .into_iter()
            .filter(|m| {
                let seed: GraphMorphism = morphism.iter().map(|(x, y)| (y, m.at(x))).collect();
                crate::matching::first_match(conclusion, host, &opts.clone().seeded(seed)).is_none()
            })
            .collect(),
    };
    ConstraintVerdict { constraint: c.name.clone(), satisfied: witnesses.is_empty(), witnesses }
}

/// Evaluates an ordered list of constraints.
pub fn check_all(host: &BGraph, cs: &[Constraint]) -> Vec<ConstraintVerdict> {
    cs.iter().map(|c| check_constraint(host, c)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Form {
    /// An element in a pattern must carry a type.
    F1,
    /// A (typed) pattern must be related to an element carrying a type.
    F2,
    /// A typed element must be connected to a pattern.
    F3,
    #[serde(rename = "untyped")]
    Untyped,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Form::F1 => "F1",
            Form::F2 => "F2",
            Form::F3 => "F3",
            Form::Untyped => "untyped",
        };
        f.write_str(s)
    }
}

/// A type annotation inside a constraint graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TypeAtom {
    pub annotation: ElementId,
    pub annotates: ElementId,
    pub with: ElementId,
    pub element: ElementId,
    pub ty: ElementId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub form: Form,
    /// The distinguished element: a premise id for F1 and F3, a conclusion
    /// id for F2.
    pub element: Option<ElementId>,
    /// Name of the required (F1, F2) or premised (F3) type.
    pub required_type: Option<String>,
    /// The required type annotation in the conclusion (F1, F2).
    pub atom: Option<TypeAtom>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("constraint {name} is ambiguous: {reason}")]
    Ambiguous { name: String, reason: String },
}

pub fn type_atoms(g: &BGraph) -> Vec<TypeAtom> {
    annotations(g)
        .into_iter()
        .filter(|a| g.kind(a.value) == Some(Kind::Type))
        .map(|a| TypeAtom {
            annotation: a.node,
            annotates: a.annotates,
            with: a.with,
            element: a.target,
            ty: a.value,
        })
        .collect()
}

fn touches(g: &BGraph, x: ElementId, set: &BTreeSet<ElementId>) -> bool {
    let by_edge = g.incident_edges(x).into_iter().any(|e| {
        set.contains(&e) || g.ends(e).is_some_and(|(s, t)| set.contains(&s) || set.contains(&t))
    });
    let by_box = g.contents(x).is_some_and(|c| c.iter().any(|y| set.contains(y)))
        || g.containers_of(x).any(|b| set.contains(&b));
    by_edge || by_box
}

/// Locates the distinguished element and the type requirement.
pub fn classify_constraint_form(c: &Constraint) -> Result<Classification, FormError> {
    let untyped = Classification { form: Form::Untyped, element: None, required_type: None, atom: None };
    let ConstraintKind::Positive { premise, conclusion, morphism } = &c.kind else {
        return Ok(untyped);
    };
    let ambiguous = |reason: &str| FormError::Ambiguous { name: c.name.clone(), reason: reason.to_owned() };
    let image = morphism.image();
    let premise_atoms = type_atoms(premise);
    let new_atoms: Vec<TypeAtom> =
        type_atoms(conclusion).into_iter().filter(|a| !image.contains(&a.annotation)).collect();
    let inverse = morphism.inverse().ok_or_else(|| ambiguous("the constraint morphism is not injective"))?;

    match new_atoms.as_slice() {
        [] if premise_atoms.is_empty() => Ok(untyped),
        [] => {
            let new: BTreeSet<ElementId> = conclusion.elements().filter(|x| !image.contains(x)).collect();
            if new.is_empty() {
                return Err(ambiguous("typed premise with nothing required"));
            }
            let mut typed: Vec<&TypeAtom> = premise_atoms.iter().collect();
            typed.dedup_by_key(|a| a.element);
            let connected: Vec<&TypeAtom> = typed
                .iter()
                .copied()
                .filter(|a| touches(conclusion, morphism.at(a.element), &new))
                .collect();
            let chosen = match (connected.as_slice(), typed.as_slice()) {
                ([a], _) => *a,
                (_, [a]) => *a,
                _ => return Err(ambiguous("several typed premise elements could own the pattern")),
            };
            Ok(Classification {
                form: Form::F3,
                element: Some(chosen.element),
                required_type: premise.name(chosen.ty).map(str::to_owned),
                atom: None,
            })
        }
        [a] => {
            let required_type = conclusion.name(a.ty).map(str::to_owned);
            match inverse.get(a.element) {
                Some(pe) => Ok(Classification { form: Form::F1, element: Some(pe), required_type, atom: Some(*a) }),
                None => Ok(Classification { form: Form::F2, element: Some(a.element), required_type, atom: Some(*a) }),
            }
        }
        _ => Err(ambiguous("the conclusion requires several type annotations; use cascaded constraints")),
    }
}
