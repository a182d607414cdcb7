//! Graph morphisms, coproducts and pushouts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{BGraph, ElementId, Sort};
use crate::report::Report;

/// A sort-respecting element map `source -> target`, stored as one map over
/// all three sorts. The graphs themselves are not owned; validation takes
/// them as arguments.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraphMorphism {
    map: BTreeMap<ElementId, ElementId>,
}

impl GraphMorphism {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(g: &BGraph) -> Self {
        g.elements().map(|x| (x, x)).collect()
    }

    pub fn get(&self, x: ElementId) -> Option<ElementId> {
        self.map.get(&x).copied()
    }

    /// Like [`get`](Self::get) but panics on a missing element.
    pub fn at(&self, x: ElementId) -> ElementId {
        self.map[&x]
    }

    pub fn insert(&mut self, x: ElementId, y: ElementId) -> Option<ElementId> {
        self.map.insert(x, y)
    }

    pub fn remove(&mut self, x: ElementId) -> Option<ElementId> {
        self.map.remove(&x)
    }

    pub fn contains(&self, x: ElementId) -> bool {
        self.map.contains_key(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ElementId, ElementId)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn domain(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.map.keys().copied()
    }

    pub fn image(&self) -> BTreeSet<ElementId> {
        self.map.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.map.len()
    }

    /// `then ∘ self`: first `self`, then `then`. Elements whose image is not
    /// in `then`'s domain are dropped.
    pub fn then(&self, then: &GraphMorphism) -> GraphMorphism {
        self.iter()
            .filter_map(|(x, y)| then.get(y).map(|z| (x, z)))
            .collect()
    }

    /// Inverse of an injective map.
    pub fn inverse(&self) -> Option<GraphMorphism> {
        let inv: GraphMorphism = self.iter().map(|(a, b)| (b, a)).collect();
        (inv.len() == self.len()).then_some(inv)
    }

    pub fn restrict(&self, domain: &BTreeSet<ElementId>) -> GraphMorphism {
        self.iter().filter(|(x, _)| domain.contains(x)).collect()
    }

    /// Image values in source-id order; the key used for deterministic
    /// ordering of match lists.
    pub fn image_key(&self) -> Vec<ElementId> {
        self.map.values().copied().collect()
    }
}

impl FromIterator<(ElementId, ElementId)> for GraphMorphism {
    fn from_iter<I: IntoIterator<Item = (ElementId, ElementId)>>(iter: I) -> Self {
        GraphMorphism {
            map: iter.into_iter().collect(),
        }
    }
}

/// Checks that `m` is a total, sort-respecting map from `source` to `target`
/// preserving source, target and containment. Labels are not inspected.
pub fn validate_morphism(source: &BGraph, target: &BGraph, m: &GraphMorphism) -> Report {
    let mut report = Report::new();
    for x in source.elements() {
        match m.get(x) {
            None => report.push("totality", [x], format!("{x} is not mapped")),
            Some(y) if y.sort() != x.sort() => {
                report.push("sortPreservation", [x, y], format!("{x} mapped to {y} of another sort"))
            }
            Some(y) if !target.contains(y) => {
                report.push("imageExists", [x, y], format!("image {y} of {x} is not in the target"))
            }
            Some(_) => {}
        }
    }
    for x in m.domain() {
        if !source.contains(x) {
            report.push("domain", [x], format!("{x} is mapped but not in the source"));
        }
    }
    if !report.is_empty() {
        return report;
    }
    for e in source.edges() {
        let (s, t) = source.ends(e).expect("edge ends");
        let fe = m.at(e);
        let (fs, ft) = target.ends(fe).expect("edge ends");
        if m.get(s) != Some(fs) {
            report.push("sourcePreservation", [e], format!("source not preserved at {e}"));
        }
        if m.get(t) != Some(ft) {
            report.push("targetPreservation", [e], format!("target not preserved at {e}"));
        }
    }
    for (b, inner) in source.all_contents() {
        let fb = m.at(*b);
        let outer = target.contents(fb);
        for x in inner {
            let fx = m.at(*x);
            if !outer.is_some_and(|o| o.contains(&fx)) {
                report.push(
                    "containmentPreservation",
                    [*b, *x],
                    format!("{x} in {b} but {fx} not in {fb}"),
                );
            }
        }
    }
    report
}

/// Whether every element's label is compatible with its image's label.
pub fn labels_compatible(source: &BGraph, target: &BGraph, m: &GraphMorphism) -> bool {
    m.iter().all(|(x, y)| match (source.label(x), target.label(y)) {
        (Some(a), Some(b)) => a.matches(b),
        _ => false,
    })
}

/// Orders elements so that vertices come first and every edge follows the
/// edges it is attached to.
pub(crate) fn creation_order(g: &BGraph, ids: &BTreeSet<ElementId>) -> Vec<ElementId> {
    let mut order: Vec<ElementId> = ids.iter().copied().filter(|x| x.is_vertex()).collect();
    let mut placed: BTreeSet<ElementId> = order.iter().copied().collect();
    let mut pending: Vec<ElementId> = ids.iter().copied().filter(|x| !x.is_vertex()).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|e| {
            let (s, t) = g.ends(*e).expect("edge ends");
            let ready = |y: ElementId| y.is_vertex() || placed.contains(&y) || !ids.contains(&y);
            if ready(s) && ready(t) {
                order.push(*e);
                placed.insert(*e);
                false
            } else {
                true
            }
        });
        assert!(pending.len() < before, "cyclic edge-on-edge attachment");
    }
    order
}

/// Disjoint union with its two injections.
#[derive(Clone, Debug)]
pub struct Coproduct {
    pub graph: BGraph,
    pub in1: GraphMorphism,
    pub in2: GraphMorphism,
}

/// `g1 ⊕ g2`. Elements of `g1` keep their ids; elements of `g2` are shifted
/// past `g1`'s fresh counter.
pub fn coproduct(g1: &BGraph, g2: &BGraph) -> Coproduct {
    let mut graph = g1.clone();
    let offset = g1.next_index();
    let shift = |x: ElementId| ElementId::new(x.sort(), x.index() + offset);
    let in1 = GraphMorphism::identity(g1);
    let mut in2 = GraphMorphism::new();
    for x in g2.elements() {
        let y = shift(x);
        in2.insert(x, y);
        let label = g2.label(x).expect("label").clone();
        match g2.ends(x) {
            Some((s, t)) => graph.insert_edge(y, label, shift(s), shift(t)),
            None => graph.insert(y, label),
        }
    }
    for (b, inner) in g2.all_contents() {
        graph.set_contents_raw(shift(*b), inner.iter().map(|x| shift(*x)).collect());
    }
    // keep the counter beyond both halves even if g2 ends with unused indices
    let reserve = offset + g2.next_index();
    while graph.next_index() < reserve {
        graph.fresh(Sort::Node);
    }
    Coproduct { graph, in1, in2 }
}

/// The mediating morphism `[h1, h2]: g1 ⊕ g2 -> H` of the universal property.
pub fn copair(co: &Coproduct, h1: &GraphMorphism, h2: &GraphMorphism) -> GraphMorphism {
    let inv1 = co.in1.inverse().expect("injection");
    let inv2 = co.in2.inverse().expect("injection");
    co.graph
        .elements()
        .map(|z| match inv1.get(z) {
            Some(x) => (z, h1.at(x)),
            None => (z, h2.at(inv2.at(z))),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Pushout {
    pub graph: BGraph,
    /// `B -> D`; the identity on ids.
    pub from_left: GraphMorphism,
    /// `C -> D`.
    pub from_right: GraphMorphism,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PushoutError {
    #[error("pushout span leg is not injective")]
    NotInjective,
    #[error("pushout span leg is not a valid morphism: {0}")]
    Invalid(Report),
}

/// Pushout of the span `left <-f- apex -g-> right` for injective `f`, `g`.
///
/// The result extends `left` (ids preserved); elements of `right` outside
/// `g(apex)` are added under fresh ids. Glued elements keep `left`'s labels.
pub fn pushout(
    apex: &BGraph,
    left: &BGraph,
    right: &BGraph,
    f: &GraphMorphism,
    g: &GraphMorphism,
) -> Result<Pushout, PushoutError> {
    for (m, tgt) in [(f, left), (g, right)] {
        let r = validate_morphism(apex, tgt, m);
        if !r.is_empty() {
            return Err(PushoutError::Invalid(r));
        }
        if !m.is_injective() {
            return Err(PushoutError::NotInjective);
        }
    }
    let g_inv = g.inverse().expect("injective");
    let mut graph = left.clone();
    let mut from_right = GraphMorphism::new();
    for (c, a) in g_inv.iter() {
        from_right.insert(c, f.at(a));
    }
    let fresh: BTreeSet<ElementId> = right.elements().filter(|c| !g_inv.contains(*c)).collect();
    for c in creation_order(right, &fresh) {
        let d = graph.fresh(c.sort());
        from_right.insert(c, d);
        let label = right.label(c).expect("label").clone();
        match right.ends(c) {
            Some((s, t)) => graph.insert_edge(d, label, from_right.at(s), from_right.at(t)),
            None => graph.insert(d, label),
        }
    }
    for (b, inner) in right.all_contents() {
        let db = from_right.at(*b);
        let mut content = graph.contents(db).cloned().unwrap_or_default();
        content.extend(inner.iter().map(|x| from_right.at(*x)));
        graph.set_contents_raw(db, content);
    }
    graph.close_containment();
    Ok(Pushout {
        from_left: GraphMorphism::identity(left),
        graph,
        from_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate_bgraph, Label};

    fn path(n: usize) -> BGraph {
        let mut g = BGraph::new();
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(Label::instance())).collect();
        for w in nodes.windows(2) {
            g.add_edge(Label::instance(), w[0], w[1]);
        }
        g
    }

    #[test]
    fn identity_is_valid() {
        let g = path(3);
        assert!(validate_morphism(&g, &g, &GraphMorphism::identity(&g)).is_empty());
    }

    #[test]
    fn broken_source_is_reported() {
        let g = path(3);
        let mut m = GraphMorphism::identity(&g);
        // n0 -> n1 but the edge n0->n1 is still sent to itself
        m.insert(ElementId::node(0), ElementId::node(1));
        let r = validate_morphism(&g, &g, &m);
        assert!(r.has("sourcePreservation"));
        assert!(r.violations()[0].message.contains("source not preserved at e"));
    }

    #[test]
    fn coproduct_counts_add_up() {
        let a = path(2);
        let b = path(3);
        let co = coproduct(&a, &b);
        assert_eq!(co.graph.count(Sort::Node), 5);
        assert_eq!(co.graph.count(Sort::Edge), 3);
        assert!(co.in1.image().is_disjoint(&co.in2.image()));
        assert!(validate_bgraph(&co.graph).is_empty());
        assert!(validate_morphism(&a, &co.graph, &co.in1).is_empty());
        assert!(validate_morphism(&b, &co.graph, &co.in2).is_empty());
    }

    #[test]
    fn coproduct_with_empty_is_isomorphic() {
        let g = path(3);
        let co = coproduct(&BGraph::new(), &g);
        assert_eq!(co.graph.len(), g.len());
        assert_eq!(co.in2.len(), g.len());
        assert!(co.in2.is_injective());
    }

    #[test]
    fn pushout_glues_shared_node() {
        // two edges glued at their middle node
        let mut apex = BGraph::new();
        let shared = apex.add_node(Label::instance());
        let left = path(2);
        let right = path(2);
        let f: GraphMorphism = [(shared, ElementId::node(1))].into_iter().collect();
        let g: GraphMorphism = [(shared, ElementId::node(0))].into_iter().collect();
        let po = pushout(&apex, &left, &right, &f, &g).unwrap();
        assert_eq!(po.graph.count(Sort::Node), 3);
        assert_eq!(po.graph.count(Sort::Edge), 2);
        assert!(validate_bgraph(&po.graph).is_empty());
        assert!(validate_morphism(&right, &po.graph, &po.from_right).is_empty());
        assert_eq!(f.then(&po.from_left), g.then(&po.from_right));
    }
}
