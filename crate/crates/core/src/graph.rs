//! Graphs with boxes.
//!
//! A [`BGraph`] has three sorts of elements: nodes, edges and boxes. Edges
//! run between nodes and boxes; boxes contain nodes and other boxes. The
//! containment relation is kept transitively closed by every mutator, so
//! transitivity is a property of the representation rather than something
//! callers must re-establish.
//!
//! Every element also carries a [`Label`]: its role in the metamodel
//! ([`Kind`]) and an optional name. Two relaxations of the plain structure
//! exist so that annotations can reach every sort:
//!
//! * `annotates`/`with` edges may target edges as well as nodes and boxes;
//! * type-bundle boxes may contain edge types.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::report::Report;

/// The three element sorts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sort {
    Node,
    Edge,
    Box,
}

impl Sort {
    pub const ALL: [Sort; 3] = [Sort::Node, Sort::Edge, Sort::Box];

    fn prefix(self) -> char {
        match self {
            Sort::Node => 'n',
            Sort::Edge => 'e',
            Sort::Box => 'b',
        }
    }

    /// Capitalised name used in violation codes (`annNodeInstance`, ...).
    pub fn title(self) -> &'static str {
        match self {
            Sort::Node => "Node",
            Sort::Edge => "Edge",
            Sort::Box => "Box",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Node => "node",
            Sort::Edge => "edge",
            Sort::Box => "box",
        })
    }
}

/// Identifier of a graph element. The sort is part of the identifier, so ids
/// of different sorts can never collide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId {
    sort: Sort,
    index: u32,
}

impl ElementId {
    pub const fn new(sort: Sort, index: u32) -> Self {
        ElementId { sort, index }
    }

    pub const fn node(index: u32) -> Self {
        Self::new(Sort::Node, index)
    }

    pub const fn edge(index: u32) -> Self {
        Self::new(Sort::Edge, index)
    }

    pub const fn boxed(index: u32) -> Self {
        Self::new(Sort::Box, index)
    }

    pub fn sort(self) -> Sort {
        self.sort
    }

    pub fn index(self) -> u32 {
        self.index
    }

    /// Nodes and boxes; the things edges normally attach to.
    pub fn is_vertex(self) -> bool {
        self.sort != Sort::Edge
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sort.prefix(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed element id `{0}` (expected n<k>, e<k> or b<k>)")]
pub struct ParseIdError(pub String);

impl FromStr for ElementId {
    type Err = ParseIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let sort = match chars.next() {
            Some('n') => Sort::Node,
            Some('e') => Sort::Edge,
            Some('b') => Sort::Box,
            _ => return Err(ParseIdError(s.to_owned())),
        };
        let index = chars
            .as_str()
            .parse::<u32>()
            .map_err(|_| ParseIdError(s.to_owned()))?;
        Ok(ElementId::new(sort, index))
    }
}

impl Serialize for ElementId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ElementId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Role of an element with respect to the annotation metamodel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Model element (also used for value-domain elements such as `true`).
    Instance,
    /// Type element; always named.
    Type,
    /// Annotation node (node sort only).
    Annotation,
    /// Type-bundle box (box sort only).
    Bundle,
    /// `annotates` edge from an annotation node to the annotated element.
    Annotates,
    /// `with` edge from an annotation node to the annotation value.
    With,
}

impl Kind {
    /// Whether an element of this kind may have the given sort.
    pub fn allows(self, sort: Sort) -> bool {
        match self {
            Kind::Instance | Kind::Type => true,
            Kind::Annotation => sort == Sort::Node,
            Kind::Bundle => sort == Sort::Box,
            Kind::Annotates | Kind::With => sort == Sort::Edge,
        }
    }

    /// Annotation machinery: annotation nodes, bundles and the two edge kinds.
    pub fn is_machinery(self) -> bool {
        !matches!(self, Kind::Instance | Kind::Type)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Instance => "instance",
            Kind::Type => "type",
            Kind::Annotation => "annotation",
            Kind::Bundle => "bundle",
            Kind::Annotates => "annotates",
            Kind::With => "with",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub kind: Kind,
    pub name: Option<String>,
}

impl Label {
    pub fn new(kind: Kind, name: Option<&str>) -> Self {
        Label {
            kind,
            name: name.map(str::to_owned),
        }
    }

    /// Anonymous instance element; matches any instance in a host.
    pub fn instance() -> Self {
        Self::new(Kind::Instance, None)
    }

    pub fn named(name: &str) -> Self {
        Self::new(Kind::Instance, Some(name))
    }

    pub fn ty(name: &str) -> Self {
        Self::new(Kind::Type, Some(name))
    }

    pub fn annotation() -> Self {
        Self::new(Kind::Annotation, None)
    }

    pub fn annotates() -> Self {
        Self::new(Kind::Annotates, None)
    }

    pub fn with() -> Self {
        Self::new(Kind::With, None)
    }

    pub fn bundle() -> Self {
        Self::new(Kind::Bundle, None)
    }

    /// Pattern-to-host compatibility: kinds agree, and a named pattern
    /// element only matches an equally named host element.
    pub fn matches(&self, host: &Label) -> bool {
        self.kind == host.kind
            && match &self.name {
                None => true,
                Some(n) => host.name.as_deref() == Some(n.as_str()),
            }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{}:{n}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl Default for Label {
    fn default() -> Self {
        Label::instance()
    }
}

/// A graph with boxes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BGraph {
    labels: BTreeMap<ElementId, Label>,
    ends: BTreeMap<ElementId, (ElementId, ElementId)>,
    contents: BTreeMap<ElementId, BTreeSet<ElementId>>,
    next: u32,
}

impl BGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Next fresh index. Indices are shared across sorts and never reused.
    pub fn next_index(&self) -> u32 {
        self.next
    }

    pub fn fresh(&mut self, sort: Sort) -> ElementId {
        let id = ElementId::new(sort, self.next);
        self.next += 1;
        id
    }

    fn bump(&mut self, id: ElementId) {
        self.next = self.next.max(id.index + 1);
    }

    pub fn add_node(&mut self, label: Label) -> ElementId {
        let id = self.fresh(Sort::Node);
        self.labels.insert(id, label);
        id
    }

    pub fn add_box(&mut self, label: Label) -> ElementId {
        let id = self.fresh(Sort::Box);
        self.labels.insert(id, label);
        self.contents.insert(id, BTreeSet::new());
        id
    }

    /// Adds an edge between two existing elements.
    ///
    /// Panics if either endpoint is missing; use [`BGraph::insert_edge`] for
    /// unchecked construction.
    pub fn add_edge(&mut self, label: Label, src: ElementId, tgt: ElementId) -> ElementId {
        assert!(self.contains(src), "edge source {src} not in graph");
        assert!(self.contains(tgt), "edge target {tgt} not in graph");
        let id = self.fresh(Sort::Edge);
        self.labels.insert(id, label);
        self.ends.insert(id, (src, tgt));
        id
    }

    /// Inserts a node or box under a given id, without any check.
    pub fn insert(&mut self, id: ElementId, label: Label) {
        debug_assert!(id.sort != Sort::Edge, "use insert_edge for edges");
        self.bump(id);
        self.labels.insert(id, label);
        if id.sort == Sort::Box {
            self.contents.entry(id).or_default();
        }
    }

    /// Inserts an edge under a given id, without any check.
    pub fn insert_edge(&mut self, id: ElementId, label: Label, src: ElementId, tgt: ElementId) {
        debug_assert_eq!(id.sort, Sort::Edge);
        self.bump(id);
        self.labels.insert(id, label);
        self.ends.insert(id, (src, tgt));
    }

    /// Puts `x` inside box `b` and re-closes containment.
    pub fn contain(&mut self, b: ElementId, x: ElementId) {
        self.contents.entry(b).or_default().insert(x);
        self.close_containment();
    }

    /// Replaces the content of `b` verbatim, without closing. Used by
    /// deserialisation and tests; validation reports any missing closure.
    pub fn set_contents_raw(&mut self, b: ElementId, content: BTreeSet<ElementId>) {
        self.contents.insert(b, content);
    }

    pub fn close_containment(&mut self) {
        loop {
            let mut additions: Vec<(ElementId, ElementId)> = Vec::new();
            for (b, inner) in &self.contents {
                for x in inner {
                    if let Some(deeper) = self.contents.get(x) {
                        for y in deeper {
                            if !inner.contains(y) {
                                additions.push((*b, *y));
                            }
                        }
                    }
                }
            }
            if additions.is_empty() {
                return;
            }
            for (b, y) in additions {
                self.contents.entry(b).or_default().insert(y);
            }
        }
    }

    /// Removes one element. Incident edges are left alone, so callers that
    /// remove vertices must remove edges first or the result is invalid.
    pub fn remove(&mut self, id: ElementId) -> Option<Label> {
        let label = self.labels.remove(&id)?;
        self.ends.remove(&id);
        self.contents.remove(&id);
        for inner in self.contents.values_mut() {
            inner.remove(&id);
        }
        Some(label)
    }

    pub fn set_label(&mut self, id: ElementId, label: Label) {
        if let Some(l) = self.labels.get_mut(&id) {
            *l = label;
        }
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.labels.contains_key(&id)
    }

    pub fn label(&self, id: ElementId) -> Option<&Label> {
        self.labels.get(&id)
    }

    pub fn kind(&self, id: ElementId) -> Option<Kind> {
        self.labels.get(&id).map(|l| l.kind)
    }

    pub fn name(&self, id: ElementId) -> Option<&str> {
        self.labels.get(&id).and_then(|l| l.name.as_deref())
    }

    pub fn labels(&self) -> &BTreeMap<ElementId, Label> {
        &self.labels
    }

    /// All elements in id order (nodes, then edges, then boxes).
    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.labels.keys().copied()
    }

    pub fn elements_of(&self, sort: Sort) -> impl Iterator<Item = ElementId> + '_ {
        self.labels.keys().copied().filter(move |id| id.sort == sort)
    }

    pub fn nodes(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elements_of(Sort::Node)
    }

    pub fn edges(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elements_of(Sort::Edge)
    }

    pub fn boxes(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elements_of(Sort::Box)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count(&self, sort: Sort) -> usize {
        self.elements_of(sort).count()
    }

    pub fn ends(&self, edge: ElementId) -> Option<(ElementId, ElementId)> {
        self.ends.get(&edge).copied()
    }

    pub fn src(&self, edge: ElementId) -> Option<ElementId> {
        self.ends.get(&edge).map(|e| e.0)
    }

    pub fn tgt(&self, edge: ElementId) -> Option<ElementId> {
        self.ends.get(&edge).map(|e| e.1)
    }

    /// Stored content of a box (transitively closed unless built raw).
    pub fn contents(&self, b: ElementId) -> Option<&BTreeSet<ElementId>> {
        self.contents.get(&b)
    }

    pub fn all_contents(&self) -> &BTreeMap<ElementId, BTreeSet<ElementId>> {
        &self.contents
    }

    pub fn containment_pairs(&self) -> usize {
        self.contents.values().map(BTreeSet::len).sum()
    }

    pub fn containers_of(&self, x: ElementId) -> impl Iterator<Item = ElementId> + '_ {
        self.contents
            .iter()
            .filter(move |(_, inner)| inner.contains(&x))
            .map(|(b, _)| *b)
    }

    pub fn out_edges(&self, x: ElementId) -> impl Iterator<Item = ElementId> + '_ {
        self.ends
            .iter()
            .filter(move |(_, (s, _))| *s == x)
            .map(|(e, _)| *e)
    }

    pub fn in_edges(&self, x: ElementId) -> impl Iterator<Item = ElementId> + '_ {
        self.ends
            .iter()
            .filter(move |(_, (_, t))| *t == x)
            .map(|(e, _)| *e)
    }

    /// Edges having `x` as source or target (a loop is listed once).
    pub fn incident_edges(&self, x: ElementId) -> Vec<ElementId> {
        self.ends
            .iter()
            .filter(|(_, (s, t))| *s == x || *t == x)
            .map(|(e, _)| *e)
            .collect()
    }

    /// The subgraph on `keep`. Edges whose endpoints are dropped are dropped
    /// as well; containment is restricted.
    pub fn restrict(&self, keep: &BTreeSet<ElementId>) -> BGraph {
        let mut out = BGraph {
            next: self.next,
            ..BGraph::default()
        };
        for (id, label) in &self.labels {
            if !keep.contains(id) {
                continue;
            }
            match self.ends.get(id) {
                Some(&(s, t)) => {
                    if keep.contains(&s) && keep.contains(&t) {
                        out.insert_edge(*id, label.clone(), s, t);
                    }
                }
                None => out.insert(*id, label.clone()),
            }
        }
        for (b, inner) in &self.contents {
            if out.contains(*b) {
                let kept = inner.iter().copied().filter(|x| out.contains(*x)).collect();
                out.contents.insert(*b, kept);
            }
        }
        out
    }

    /// True when every element, edge end and containment pair of `self`
    /// appears identically in `other`.
    pub fn is_subgraph_of(&self, other: &BGraph) -> bool {
        self.labels.iter().all(|(id, l)| other.label(*id) == Some(l))
            && self.ends.iter().all(|(e, ends)| other.ends(*e) == Some(*ends))
            && self.contents.iter().all(|(b, inner)| {
                other
                    .contents(*b)
                    .is_some_and(|o| inner.iter().all(|x| o.contains(x)))
            })
    }

    /// Union of graphs sharing one id space (typically subgraphs of a
    /// common ambient graph).
    pub fn union<'a>(parts: impl IntoIterator<Item = &'a BGraph>) -> BGraph {
        let mut out = BGraph::new();
        for part in parts {
            for (id, label) in &part.labels {
                match part.ends.get(id) {
                    Some(&(s, t)) => out.insert_edge(*id, label.clone(), s, t),
                    None => out.insert(*id, label.clone()),
                }
            }
            for (b, inner) in &part.contents {
                out.contents.entry(*b).or_default().extend(inner.iter().copied());
            }
            out.next = out.next.max(part.next);
        }
        out.close_containment();
        out
    }
}

/// One line per element: `n0 instance:Bruce`, `e2 instance:knows n0 -> n1`,
/// `b3 bundle {n4, n5}`.
impl fmt::Display for BGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, l)) in self.labels.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{x} {l}")?;
            if let Some((s, t)) = self.ends.get(x) {
                write!(f, " {s} -> {t}")?;
            }
            if let Some(c) = self.contents.get(x) {
                let items: Vec<String> = c.iter().map(ToString::to_string).collect();
                write!(f, " {{{}}}", items.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Checks every structural invariant of a graph with boxes.
pub fn validate_bgraph(g: &BGraph) -> Report {
    let mut report = Report::new();
    for (id, label) in &g.labels {
        if !label.kind.allows(id.sort) {
            report.push(
                "kindSort",
                [*id],
                format!("{id} is a {} but has kind {}", id.sort, label.kind),
            );
        }
        if label.kind == Kind::Type && label.name.as_deref().is_none_or(str::is_empty) {
            report.push("typeName", [*id], format!("type element {id} has no name"));
        }
    }
    for e in g.edges() {
        let Some((s, t)) = g.ends(e) else {
            report.push("edgeEnds", [e], format!("edge {e} has no source/target"));
            continue;
        };
        let lenient = matches!(g.kind(e), Some(Kind::Annotates | Kind::With));
        for (end, role) in [(s, "source"), (t, "target")] {
            if !g.contains(end) {
                report.push(
                    "danglingEnd",
                    [e, end],
                    format!("{role} {end} of edge {e} is not in the graph"),
                );
            } else if !end.is_vertex() && !lenient {
                report.push(
                    "edgeEndSort",
                    [e, end],
                    format!("{role} of edge {e} is the edge {end}"),
                );
            }
        }
    }
    for (b, inner) in &g.contents {
        if b.sort != Sort::Box || !g.contains(*b) {
            report.push("containerSort", [*b], format!("{b} has content but is not a box"));
            continue;
        }
        let bundle = g.kind(*b) == Some(Kind::Bundle);
        for x in inner {
            if x == b {
                report.push("selfContainment", [*b], format!("self-containment at {b}"));
            } else if !g.contains(*x) {
                report.push(
                    "danglingContent",
                    [*b, *x],
                    format!("box {b} contains missing element {x}"),
                );
            } else if !x.is_vertex() && !bundle {
                report.push(
                    "contentSort",
                    [*b, *x],
                    format!("box {b} contains the edge {x}"),
                );
            }
        }
    }
    for (b1, inner) in &g.contents {
        for b2 in inner {
            let Some(deeper) = g.contents.get(b2) else {
                continue;
            };
            for x in deeper {
                if !inner.contains(x) {
                    report.push(
                        "containmentTransitivity",
                        [*b1, *b2, *x],
                        format!("{x} in {b2} and {b2} in {b1}, but {x} not in {b1}"),
                    );
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_strings() {
        for id in [ElementId::node(0), ElementId::edge(17), ElementId::boxed(3)] {
            assert_eq!(id.to_string().parse::<ElementId>().unwrap(), id);
        }
        assert!("x1".parse::<ElementId>().is_err());
        assert!("n".parse::<ElementId>().is_err());
    }

    #[test]
    fn empty_graph_is_valid() {
        assert!(validate_bgraph(&BGraph::new()).is_empty());
    }

    #[test]
    fn self_containment_is_reported() {
        let mut g = BGraph::new();
        let b = g.add_box(Label::instance());
        g.set_contents_raw(b, [b].into());
        let r = validate_bgraph(&g);
        assert!(r.has("selfContainment"));
        assert!(r.violations()[0].message.contains("self-containment at b0"));
    }

    #[test]
    fn contain_closes_transitively() {
        let mut g = BGraph::new();
        let outer = g.add_box(Label::instance());
        let inner = g.add_box(Label::instance());
        let n = g.add_node(Label::instance());
        g.contain(inner, n);
        g.contain(outer, inner);
        assert!(g.contents(outer).unwrap().contains(&n));
        assert!(validate_bgraph(&g).is_empty());
    }

    #[test]
    fn containment_cycle_shows_up_as_self_containment() {
        let mut g = BGraph::new();
        let a = g.add_box(Label::instance());
        let b = g.add_box(Label::instance());
        g.contain(a, b);
        g.contain(b, a);
        assert!(validate_bgraph(&g).has("selfContainment"));
    }

    #[test]
    fn edges_between_edges_only_for_annotation_edges() {
        let mut g = BGraph::new();
        let x = g.add_node(Label::instance());
        let y = g.add_node(Label::instance());
        let e = g.add_edge(Label::instance(), x, y);
        let a = g.add_node(Label::annotation());
        g.add_edge(Label::annotates(), a, e);
        assert!(validate_bgraph(&g).is_empty());
        g.add_edge(Label::instance(), x, e);
        assert!(validate_bgraph(&g).has("edgeEndSort"));
    }

    #[test]
    fn restrict_drops_dangling_edges() {
        let mut g = BGraph::new();
        let x = g.add_node(Label::instance());
        let y = g.add_node(Label::instance());
        g.add_edge(Label::instance(), x, y);
        let sub = g.restrict(&[x].into());
        assert_eq!(sub.len(), 1);
        assert!(sub.is_subgraph_of(&g));
        assert!(validate_bgraph(&sub).is_empty());
    }
}
