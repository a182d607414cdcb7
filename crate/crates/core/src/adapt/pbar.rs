use std::collections::BTreeSet;

use crate::graph::{BGraph, ElementId, Kind};
use crate::morphism::GraphMorphism;
use crate::patterns::{classify_constraint_form, satisfies_pattern, Constraint, Form, Pattern};

use super::AdaptError;

/// The premise restricted by removing what connects the retyped element to
/// the rest of the pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PBar {
    pub graph: BGraph,
    /// `P̄ -> P` (an inclusion on ids).
    pub embedding: GraphMorphism,
    /// The retyped element, as a premise id.
    pub element: ElementId,
    /// Premise elements absent from `P̄`.
    pub removed: BTreeSet<ElementId>,
    /// Number of maximal occurrences glued into the colimit.
    pub occurrences: usize,
}

fn is_machinery(g: &BGraph, x: ElementId) -> bool {
    g.kind(x).is_some_and(Kind::is_machinery)
}

/// `e` together with its endpoints when `e` is an edge.
fn mel(p: &BGraph, e: ElementId) -> BTreeSet<ElementId> {
    let mut out = BTreeSet::from([e]);
    if let Some((s, t)) = p.ends(e) {
        out.extend([s, t]);
    }
    out
}

/// Non-annotation edges attached to `e` (or to its endpoints), closed under
/// edges hanging off removed edges and the annotations of removed elements.
pub fn connecting_elements(p: &BGraph, e: ElementId) -> BTreeSet<ElementId> {
    let core = mel(p, e);
    let mut removed: BTreeSet<ElementId> = core
        .iter()
        .flat_map(|v| p.incident_edges(*v))
        .filter(|x| *x != e && !is_machinery(p, *x))
        .collect();
    loop {
        let before = removed.len();
        for x in p.edges() {
            if removed.contains(&x) {
                continue;
            }
            let (s, t) = p.ends(x).expect("edge ends");
            if removed.contains(&s) || removed.contains(&t) {
                removed.insert(x);
            }
        }
        // an annotation whose target goes takes its node and `with` edge along
        for a in p.nodes().filter(|n| p.kind(*n) == Some(Kind::Annotation)) {
            if removed.contains(&a) {
                continue;
            }
            let dangling = p
                .out_edges(a)
                .any(|x| p.kind(x) == Some(Kind::Annotates) && removed.contains(&x));
            if dangling {
                removed.insert(a);
            }
        }
        if removed.len() == before {
            break;
        }
    }
    removed
}

/// The colimit of subgraphs of one ambient graph, glued along their common
/// elements.
pub fn colimit_union(parts: &[BGraph]) -> BGraph {
    BGraph::union(parts)
}

/// Builds `P̄` for a first-form constraint and the premise element `e`.
///
/// The pattern `mel -> mel ∪ els -> P` is matched into the premise at `e`;
/// each occurrence contributes the image of `mel ∪ els`, and the results are
/// glued.
pub fn build_pbar(c: &Constraint, e: ElementId) -> Result<PBar, AdaptError> {
    let form = classify_constraint_form(c)?;
    if form.form != Form::F1 {
        return Err(AdaptError::WrongForm {
            name: c.name.clone(),
            found: form.form.to_string(),
            expected: Form::F1.to_string(),
        });
    }
    let p = c.premise();
    if !p.contains(e) {
        return Err(AdaptError::NotInPremise { name: c.name.clone(), element: e });
    }
    let removed = connecting_elements(p, e);
    let els: BTreeSet<ElementId> = p.elements().filter(|x| !removed.contains(x)).collect();
    let g1 = p.restrict(&mel(p, e));
    let g2 = p.restrict(&els);
    let pattern = Pattern::chain(
        vec![g1.clone(), g2.clone(), p.clone()],
        vec![GraphMorphism::identity(&g1), GraphMorphism::identity(&g2)],
    );
    let occurrences: Vec<BTreeSet<ElementId>> = satisfies_pattern(p, &pattern)
        .collections
        .into_iter()
        .filter(|coll| coll[0].at(e) == e)
        .map(|coll| coll[1].image())
        .collect();
    let maximal: Vec<&BTreeSet<ElementId>> = occurrences
        .iter()
        .filter(|o| !occurrences.iter().any(|q| q.len() > o.len() && o.is_subset(q)))
        .collect();
    let parts: Vec<BGraph> = maximal.iter().map(|o| p.restrict(o)).collect();
    let graph = colimit_union(&parts);
    let embedding = GraphMorphism::identity(&graph);
    let removed = p.elements().filter(|x| !graph.contains(*x)).collect();
    Ok(PBar { graph, embedding, element: e, removed, occurrences: parts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::tests::bruce;
    use crate::annotation::attach;
    use crate::graph::Label;

    #[test]
    fn driver_pbar_drops_can_drive() {
        let (_, c) = bruce(true);
        let pb = build_pbar(&c, ElementId::node(0)).unwrap();
        assert_eq!(pb.graph.count(crate::graph::Sort::Node), 2);
        assert_eq!(pb.graph.count(crate::graph::Sort::Edge), 0);
        assert_eq!(pb.removed.len(), 1);
        assert!(pb.graph.is_subgraph_of(c.premise()));
    }

    #[test]
    fn unconnected_element_keeps_premise() {
        let mut p = BGraph::new();
        let x = p.add_node(Label::instance());
        let a = p.add_node(Label::named("a"));
        let b = p.add_node(Label::named("b"));
        p.add_edge(Label::instance(), a, b);
        let mut c = p.clone();
        let t = c.add_node(Label::ty("T"));
        attach(&mut c, x, t);
        let pb = build_pbar(&Constraint::inclusion("k", p.clone(), c), x).unwrap();
        assert_eq!(pb.graph, p);
    }

    #[test]
    fn rejects_missing_element() {
        let (_, c) = bruce(true);
        assert!(matches!(build_pbar(&c, ElementId::node(40)), Err(AdaptError::NotInPremise { .. })));
    }
}
