//! Type information carried inside the graph.
//!
//! An annotation is the three-element shape `x <-annotates- a -with-> y`.
//! When `y` is a type element, `x` is typed by `y`; when `y` is a type-bundle
//! box, `x` is typed by every type in the bundle (an inheritance chain ending
//! at the top type of its sort). Any other `y` is an ordinary value
//! annotation and is invisible to the type validators.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use crate::graph::{validate_bgraph, BGraph, ElementId, Kind, Label, Sort};
use crate::report::Report;

/// Single-inheritance hierarchy with one top type per sort.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeHierarchy {
    parent: BTreeMap<ElementId, ElementId>,
    tops: BTreeMap<Sort, ElementId>,
}

impl TypeHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `top` as the top type of its sort.
    pub fn with_top(mut self, top: ElementId) -> Self {
        self.tops.insert(top.sort(), top);
        self
    }

    /// Declares `child <= parent`.
    pub fn with_parent(mut self, child: ElementId, parent: ElementId) -> Self {
        self.parent.insert(child, parent);
        self
    }

    pub fn top(&self, sort: Sort) -> Option<ElementId> {
        self.tops.get(&sort).copied()
    }

    pub fn is_top(&self, t: ElementId) -> bool {
        self.tops.get(&t.sort()) == Some(&t)
    }

    pub fn parent(&self, t: ElementId) -> Option<ElementId> {
        self.parent.get(&t).copied()
    }

    pub fn contains(&self, t: ElementId) -> bool {
        self.is_top(t) || self.parent.contains_key(&t)
    }

    pub fn types(&self) -> BTreeSet<ElementId> {
        self.parent
            .keys()
            .chain(self.tops.values())
            .copied()
            .collect()
    }

    pub fn parents(&self) -> &BTreeMap<ElementId, ElementId> {
        &self.parent
    }

    pub fn tops(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.tops.values().copied()
    }

    /// The chain `leaf <= ... <= top`, or `None` when `leaf` is unknown or
    /// its ancestry does not reach the top (cycle, missing link).
    pub fn chain(&self, leaf: ElementId) -> Option<Vec<ElementId>> {
        if !self.contains(leaf) {
            return None;
        }
        let mut chain = vec![leaf];
        let mut cur = leaf;
        while !self.is_top(cur) {
            cur = self.parent(cur)?;
            if chain.contains(&cur) {
                return None;
            }
            chain.push(cur);
        }
        Some(chain)
    }

    /// `a <= b`.
    pub fn le(&self, a: ElementId, b: ElementId) -> bool {
        self.chain(a).is_some_and(|c| c.contains(&b))
    }

    pub fn validate(&self) -> Report {
        let mut report = Report::new();
        for (child, parent) in &self.parent {
            if child.sort() != parent.sort() {
                report.push(
                    "hierarchySort",
                    [*child, *parent],
                    format!("{child} inherits from {parent} of another sort"),
                );
            }
        }
        for t in self.parent.keys() {
            if self.chain(*t).is_none() {
                report.push(
                    "hierarchyRoot",
                    [*t],
                    format!("ancestry of {t} does not reach the top type (cycle or missing top)"),
                );
            }
        }
        report
    }
}

/// One well-formed annotation occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Annotation {
    pub node: ElementId,
    pub annotates: ElementId,
    pub with: ElementId,
    /// The annotated element.
    pub target: ElementId,
    /// The annotation value (type, bundle box, or plain value).
    pub value: ElementId,
}

/// A graph whose typing is expressed by annotations, together with the
/// inheritance hierarchy used by its type bundles (if any).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeAnnotatedGraph {
    graph: BGraph,
    hierarchy: Option<TypeHierarchy>,
}

impl TypeAnnotatedGraph {
    pub fn new(graph: BGraph) -> Self {
        TypeAnnotatedGraph {
            graph,
            hierarchy: None,
        }
    }

    pub fn with_hierarchy(mut self, hierarchy: TypeHierarchy) -> Self {
        self.hierarchy = Some(hierarchy);
        self
    }

    pub fn graph(&self) -> &BGraph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut BGraph {
        &mut self.graph
    }

    pub fn into_graph(self) -> BGraph {
        self.graph
    }

    pub fn hierarchy(&self) -> Option<&TypeHierarchy> {
        self.hierarchy.as_ref()
    }

    /// Replaces the carrier graph, keeping the hierarchy.
    pub fn replace_graph(&self, graph: BGraph) -> Self {
        TypeAnnotatedGraph {
            graph,
            hierarchy: self.hierarchy.clone(),
        }
    }

    /// Type element with the given name and sort.
    pub fn type_named(&self, sort: Sort, name: &str) -> Option<ElementId> {
        self.graph
            .elements_of(sort)
            .find(|x| self.graph.kind(*x) == Some(Kind::Type) && self.graph.name(*x) == Some(name))
    }

    /// Instance element with the given name and sort.
    pub fn instance_named(&self, sort: Sort, name: &str) -> Option<ElementId> {
        self.graph.elements_of(sort).find(|x| {
            self.graph.kind(*x) == Some(Kind::Instance) && self.graph.name(*x) == Some(name)
        })
    }
}

impl Deref for TypeAnnotatedGraph {
    type Target = BGraph;

    fn deref(&self) -> &BGraph {
        &self.graph
    }
}

impl From<BGraph> for TypeAnnotatedGraph {
    fn from(graph: BGraph) -> Self {
        TypeAnnotatedGraph::new(graph)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("{0} is not a type element")]
    NotAType(ElementId),
    #[error("annotation sort violation: {element} cannot be typed by {ty}")]
    SortViolation { element: ElementId, ty: ElementId },
    #[error("notTypedTwice violation: {element} is already annotated with {ty}")]
    NotTypedTwice { element: ElementId, ty: ElementId },
    #[error("mixedAnnotationRegime: {element} cannot carry both plain and bundle type annotations")]
    MixedRegime { element: ElementId },
    #[error("{element} is annotation machinery and cannot be annotated")]
    Machinery { element: ElementId },
    #[error("type {0} is not in the hierarchy")]
    UnknownLeaf(ElementId),
    #[error("the graph carries a different type hierarchy")]
    HierarchyMismatch,
    #[error("the graph has no type hierarchy")]
    NoHierarchy,
    #[error("annotations with a bundle containing only the top type {top} can never be removed (element {element})")]
    TopRemoval { element: ElementId, top: ElementId },
}

/// All well-formed annotation occurrences, ordered by annotation node.
pub fn annotations(g: &BGraph) -> Vec<Annotation> {
    let mut annotates: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
    let mut with: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
    for e in g.edges() {
        let (s, _) = g.ends(e).expect("edge ends");
        match g.kind(e) {
            Some(Kind::Annotates) => annotates.entry(s).or_default().push(e),
            Some(Kind::With) => with.entry(s).or_default().push(e),
            _ => {}
        }
    }
    g.nodes()
        .filter(|n| g.kind(*n) == Some(Kind::Annotation))
        .filter_map(|n| {
            let (a, w) = (annotates.get(&n)?, with.get(&n)?);
            if a.len() != 1 || w.len() != 1 {
                return None;
            }
            Some(Annotation {
                node: n,
                annotates: a[0],
                with: w[0],
                target: g.tgt(a[0])?,
                value: g.tgt(w[0])?,
            })
        })
        .collect()
}

pub fn annotations_of(g: &BGraph, x: ElementId) -> Vec<Annotation> {
    annotations(g).into_iter().filter(|a| a.target == x).collect()
}

/// Types carried directly (not through bundles).
pub fn plain_types(g: &BGraph, x: ElementId) -> BTreeSet<ElementId> {
    annotations_of(g, x)
        .into_iter()
        .filter(|a| g.kind(a.value) == Some(Kind::Type))
        .map(|a| a.value)
        .collect()
}

/// Bundle annotations of `x`, as (annotation, bundle box).
pub fn bundles_of(g: &BGraph, x: ElementId) -> Vec<Annotation> {
    annotations_of(g, x)
        .into_iter()
        .filter(|a| g.kind(a.value) == Some(Kind::Bundle))
        .collect()
}

fn bundle_types(g: &BGraph, bundle: ElementId) -> BTreeSet<ElementId> {
    g.contents(bundle)
        .map(|c| {
            c.iter()
                .copied()
                .filter(|t| g.kind(*t) == Some(Kind::Type))
                .collect()
        })
        .unwrap_or_default()
}

/// `annType(x)`: every type annotating `x`, directly or through bundles.
pub fn ann_type(g: &BGraph, x: ElementId) -> BTreeSet<ElementId> {
    let mut out = BTreeSet::new();
    for a in annotations_of(g, x) {
        match g.kind(a.value) {
            Some(Kind::Type) => {
                out.insert(a.value);
            }
            Some(Kind::Bundle) => out.extend(bundle_types(g, a.value)),
            _ => {}
        }
    }
    out
}

/// `annType` for every element at once.
pub fn ann_types(g: &BGraph) -> BTreeMap<ElementId, BTreeSet<ElementId>> {
    let mut out: BTreeMap<ElementId, BTreeSet<ElementId>> = BTreeMap::new();
    for a in annotations(g) {
        match g.kind(a.value) {
            Some(Kind::Type) => {
                out.entry(a.target).or_default().insert(a.value);
            }
            Some(Kind::Bundle) => out
                .entry(a.target)
                .or_default()
                .extend(bundle_types(g, a.value)),
            _ => {}
        }
    }
    out
}

/// Adds one annotation pattern `x <- a -> value` and returns it. No checks.
pub fn attach(g: &mut BGraph, x: ElementId, value: ElementId) -> Annotation {
    let node = g.add_node(Label::annotation());
    let annotates = g.add_edge(Label::annotates(), node, x);
    let with = g.add_edge(Label::with(), node, value);
    Annotation {
        node,
        annotates,
        with,
        target: x,
        value,
    }
}

/// Removes an annotation occurrence (node and both edges).
pub fn detach(g: &mut BGraph, a: &Annotation) {
    g.remove(a.annotates);
    g.remove(a.with);
    g.remove(a.node);
}

/// Annotates the instance `x` with the type `ty`.
pub fn annotate(
    g: &TypeAnnotatedGraph,
    x: ElementId,
    ty: ElementId,
) -> Result<TypeAnnotatedGraph, AnnotationError> {
    let kx = g.kind(x).ok_or(AnnotationError::UnknownElement(x))?;
    let kt = g.kind(ty).ok_or(AnnotationError::UnknownElement(ty))?;
    if kt != Kind::Type {
        return Err(AnnotationError::NotAType(ty));
    }
    if kx.is_machinery() {
        return Err(AnnotationError::Machinery { element: x });
    }
    if kx != Kind::Instance || x.sort() != ty.sort() {
        return Err(AnnotationError::SortViolation { element: x, ty });
    }
    if !bundles_of(g, x).is_empty() {
        return Err(AnnotationError::MixedRegime { element: x });
    }
    if plain_types(g, x).contains(&ty) {
        return Err(AnnotationError::NotTypedTwice { element: x, ty });
    }
    let mut out = g.clone();
    attach(out.graph_mut(), x, ty);
    Ok(out)
}

/// Attaches a non-type value to `x` (attribute-style annotation).
pub fn annotate_value(
    g: &TypeAnnotatedGraph,
    x: ElementId,
    value: ElementId,
) -> Result<TypeAnnotatedGraph, AnnotationError> {
    let kx = g.kind(x).ok_or(AnnotationError::UnknownElement(x))?;
    g.kind(value).ok_or(AnnotationError::UnknownElement(value))?;
    if kx.is_machinery() {
        return Err(AnnotationError::Machinery { element: x });
    }
    let mut out = g.clone();
    attach(out.graph_mut(), x, value);
    Ok(out)
}

/// Annotates `x` with a fresh bundle holding the chain `leaf <= ... <= top`.
pub fn annotate_with_bundle(
    g: &TypeAnnotatedGraph,
    x: ElementId,
    hierarchy: &TypeHierarchy,
    leaf: ElementId,
) -> Result<TypeAnnotatedGraph, AnnotationError> {
    let kx = g.kind(x).ok_or(AnnotationError::UnknownElement(x))?;
    let chain = hierarchy
        .chain(leaf)
        .ok_or(AnnotationError::UnknownLeaf(leaf))?;
    if let Some(own) = &g.hierarchy {
        if own != hierarchy {
            return Err(AnnotationError::HierarchyMismatch);
        }
    }
    if kx.is_machinery() {
        return Err(AnnotationError::Machinery { element: x });
    }
    if kx != Kind::Instance || x.sort() != leaf.sort() {
        return Err(AnnotationError::SortViolation { element: x, ty: leaf });
    }
    if !plain_types(g, x).is_empty() {
        return Err(AnnotationError::MixedRegime { element: x });
    }
    let wanted: BTreeSet<ElementId> = chain.iter().copied().collect();
    if bundles_of(g, x)
        .iter()
        .any(|a| bundle_types(g, a.value) == wanted)
    {
        return Err(AnnotationError::NotTypedTwice { element: x, ty: leaf });
    }
    let mut out = g.clone();
    if out.hierarchy.is_none() {
        out.hierarchy = Some(hierarchy.clone());
    }
    add_bundle(out.graph_mut(), x, &chain);
    Ok(out)
}

fn add_bundle(g: &mut BGraph, x: ElementId, chain: &[ElementId]) -> ElementId {
    let bundle = g.add_box(Label::bundle());
    g.set_contents_raw(bundle, chain.iter().copied().collect());
    attach(g, x, bundle);
    bundle
}

/// What [`remove_annotation_at`] did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Removal {
    /// The bundle was replaced by one holding the chain above the removed type.
    Truncated {
        removed: Vec<ElementId>,
        kept: Vec<ElementId>,
        bundle: ElementId,
    },
    /// The type is not in any bundle of the element; nothing changed.
    NotInChain,
}

/// Removes the annotation of `x` with `ty`, together with every annotation
/// below it in the chain; the chain from the parent of `ty` stays.
pub fn remove_annotation_at(
    g: &TypeAnnotatedGraph,
    x: ElementId,
    ty: ElementId,
) -> Result<(TypeAnnotatedGraph, Removal), AnnotationError> {
    g.kind(x).ok_or(AnnotationError::UnknownElement(x))?;
    let hierarchy = g.hierarchy.as_ref().ok_or(AnnotationError::NoHierarchy)?;
    if hierarchy.is_top(ty) {
        return Err(AnnotationError::TopRemoval { element: x, top: ty });
    }
    let Some(ann) = bundles_of(g, x)
        .into_iter()
        .find(|a| bundle_types(g, a.value).contains(&ty))
    else {
        return Ok((g.clone(), Removal::NotInChain));
    };
    let parent = hierarchy.parent(ty).ok_or(AnnotationError::UnknownLeaf(ty))?;
    let kept = hierarchy
        .chain(parent)
        .ok_or(AnnotationError::UnknownLeaf(parent))?;
    let old: BTreeSet<ElementId> = bundle_types(g, ann.value);
    let removed = old.iter().copied().filter(|t| !kept.contains(t)).collect();

    let mut out = g.clone();
    let graph = out.graph_mut();
    detach(graph, &ann);
    if graph.in_edges(ann.value).next().is_none() {
        graph.remove(ann.value);
    }
    let bundle = add_bundle(graph, x, &kept);
    Ok((
        out,
        Removal::Truncated {
            removed,
            kept,
            bundle,
        },
    ))
}

fn sort_code(prefix: &str, sort: Sort, suffix: &str) -> String {
    format!("{prefix}{}{suffix}", sort.title())
}

/// Checks every annotation well-formedness constraint.
///
/// Reported constraint names: `annPatternUnique`, `annEdgeSource`,
/// `annotatedMachinery`, `ann{Node,Edge,Box}Instance`,
/// `ann{Node,Edge,Box}Type`, `notTypedTwice`, `mixedAnnotationRegime`,
/// `edgeTypeConsistency`, `bundleChain`, plus the structural codes of
/// [`validate_bgraph`] and the hierarchy codes.
pub fn check_well_formed(g: &TypeAnnotatedGraph) -> Report {
    let graph = g.graph();
    let mut report = validate_bgraph(graph);
    if let Some(h) = &g.hierarchy {
        report.extend(h.validate());
    }

    for e in graph.edges() {
        if matches!(graph.kind(e), Some(Kind::Annotates | Kind::With)) {
            let s = graph.src(e).expect("edge ends");
            if graph.kind(s) != Some(Kind::Annotation) {
                report.push(
                    "annEdgeSource",
                    [e, s],
                    format!("{e} leaves {s}, which is not an annotation node"),
                );
            }
        }
    }
    for a in graph.nodes().filter(|n| graph.kind(*n) == Some(Kind::Annotation)) {
        let outs: Vec<ElementId> = graph.out_edges(a).collect();
        let n_ann = outs.iter().filter(|e| graph.kind(**e) == Some(Kind::Annotates)).count();
        let n_with = outs.iter().filter(|e| graph.kind(**e) == Some(Kind::With)).count();
        if n_ann != 1 || n_with != 1 || outs.len() != 2 {
            report.push(
                "annPatternUnique",
                [a],
                format!(
                    "annotation node {a} has {n_ann} annotates and {n_with} with edges ({} outgoing)",
                    outs.len()
                ),
            );
        }
        if graph.in_edges(a).next().is_some() {
            report.push(
                "annotatedMachinery",
                [a],
                format!("annotation node {a} is the target of an edge"),
            );
        }
    }

    let all = annotations(graph);
    let mut plain: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
    let mut bundled: BTreeMap<ElementId, Vec<BTreeSet<ElementId>>> = BTreeMap::new();
    for ann in &all {
        let x = ann.target;
        let kx = graph.kind(x).expect("annotated element");
        if kx.is_machinery() {
            report.push(
                "annotatedMachinery",
                [x, ann.node],
                format!("{x} ({kx}) is annotated by {}", ann.node),
            );
            continue;
        }
        let value_sort = match graph.kind(ann.value) {
            Some(Kind::Type) => {
                plain.entry(x).or_default().push(ann.value);
                Some(ann.value.sort())
            }
            Some(Kind::Bundle) => {
                let types = bundle_types(graph, ann.value);
                let content = graph.contents(ann.value).cloned().unwrap_or_default();
                let sorts: BTreeSet<Sort> = types.iter().map(|t| t.sort()).collect();
                if types.is_empty() || types.len() != content.len() || sorts.len() != 1 {
                    report.push(
                        "bundleChain",
                        [ann.value],
                        format!("bundle {} must hold type elements of a single sort", ann.value),
                    );
                } else if let Some(h) = &g.hierarchy {
                    let is_chain = types.iter().any(|t| {
                        h.chain(*t)
                            .is_some_and(|c| c.iter().copied().collect::<BTreeSet<_>>() == types)
                    });
                    if !is_chain {
                        report.push(
                            "bundleChain",
                            [ann.value],
                            format!("bundle {} is not a contiguous chain ending at the top type", ann.value),
                        );
                    }
                }
                bundled.entry(x).or_default().push(types);
                sorts.into_iter().next()
            }
            _ => None,
        };
        let Some(ts) = value_sort else {
            continue;
        };
        if kx == Kind::Instance {
            if x.sort() != ts {
                report.push(
                    &sort_code("ann", x.sort(), "Instance"),
                    [x, ann.value],
                    format!("{} instance {x} is annotated with the {ts} type {}", x.sort(), ann.value),
                );
            }
        } else {
            report.push(
                &sort_code("ann", ts, "Type"),
                [x, ann.value],
                format!("{ts} type {} annotates {x}, which is not a {ts} instance", ann.value),
            );
        }
    }
    for (x, types) in &plain {
        let mut seen = BTreeSet::new();
        for t in types {
            if !seen.insert(*t) {
                report.push(
                    "notTypedTwice",
                    [*x, *t],
                    format!("{x} is typed by {t} twice"),
                );
            }
        }
        if bundled.contains_key(x) {
            report.push(
                "mixedAnnotationRegime",
                [*x],
                format!("{x} has both plain and bundle type annotations"),
            );
        }
    }
    for (x, bundles) in &bundled {
        for (i, b) in bundles.iter().enumerate() {
            if bundles[..i].contains(b) {
                report.push(
                    "notTypedTwice",
                    [*x],
                    format!("{x} carries two bundles with the same types"),
                );
            }
        }
    }

    // edges sharing an edge type must agree on the types of their ends
    let types = ann_types(graph);
    let empty = BTreeSet::new();
    type Ends<'a> = (&'a BTreeSet<ElementId>, &'a BTreeSet<ElementId>);
    let mut signatures: BTreeMap<ElementId, BTreeMap<Ends, Vec<ElementId>>> = BTreeMap::new();
    for e in graph.edges().filter(|e| graph.kind(*e) == Some(Kind::Instance)) {
        let (s, t) = graph.ends(e).expect("edge ends");
        let sig = (types.get(&s).unwrap_or(&empty), types.get(&t).unwrap_or(&empty));
        for et in types.get(&e).into_iter().flatten() {
            if et.sort() == Sort::Edge {
                signatures.entry(*et).or_default().entry(sig).or_default().push(e);
            }
        }
    }
    for (et, groups) in signatures {
        if groups.len() > 1 {
            let edges: Vec<ElementId> = groups.values().flatten().copied().collect();
            report.push(
                "edgeTypeConsistency",
                edges.iter().copied(),
                format!("edges typed {et} have ends annotated with different types"),
            );
        }
    }
    report
}

/// Correctness under type annotation: every typed edge connects elements
/// annotated with the source and target of its edge type, and every typed
/// box holds only elements whose types its box type may contain.
pub fn check_type_correctness(g: &BGraph) -> Report {
    let mut report = Report::new();
    let types = ann_types(g);
    let empty = BTreeSet::new();
    for e in g.edges().filter(|e| g.kind(*e) == Some(Kind::Instance)) {
        let (s, t) = g.ends(e).expect("edge ends");
        for et in types.get(&e).into_iter().flatten() {
            let Some((ts, tt)) = g.ends(*et) else { continue };
            if !types.get(&s).unwrap_or(&empty).contains(&ts) {
                report.push(
                    "edgeTypeRestriction",
                    [e, s],
                    format!("source {s} of {e} is not annotated with {ts}, the source of {et}"),
                );
            }
            if !types.get(&t).unwrap_or(&empty).contains(&tt) {
                report.push(
                    "edgeTypeRestriction",
                    [e, t],
                    format!("target {t} of {e} is not annotated with {tt}, the target of {et}"),
                );
            }
        }
    }
    for b in g.boxes().filter(|b| g.kind(*b) == Some(Kind::Instance)) {
        let box_types: Vec<ElementId> = types
            .get(&b)
            .into_iter()
            .flatten()
            .copied()
            .filter(|t| t.sort() == Sort::Box)
            .collect();
        if box_types.is_empty() {
            continue;
        }
        for x in g.contents(b).into_iter().flatten() {
            let Some(xt) = types.get(x) else { continue };
            for bt in &box_types {
                let allowed = g.contents(*bt);
                if !xt.iter().any(|t| allowed.is_some_and(|a| a.contains(t))) {
                    report.push(
                        "boxContentRestriction",
                        [b, *x],
                        format!("{x} in {b}: none of its types may be contained in {bt}"),
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

    fn person_world() -> (TypeAnnotatedGraph, ElementId, ElementId, ElementId, ElementId) {
        let mut g = BGraph::new();
        let n = g.add_node(Label::named("Bruce"));
        let person = g.add_node(Label::ty("Person"));
        let male = g.add_node(Label::ty("Male"));
        let female = g.add_node(Label::ty("Female"));
        (g.into(), n, person, male, female)
    }

    #[test]
    fn annotate_creates_one_pattern() {
        let (g, n, person, ..) = person_world();
        let g = annotate(&g, n, person).unwrap();
        assert_eq!(annotations(&g).len(), 1);
        assert_eq!(ann_type(&g, n), [person].into());
        assert!(check_well_formed(&g).is_empty());
    }

    #[test]
    fn annotating_twice_with_one_type_is_refused() {
        let (g, n, person, ..) = person_world();
        let g = annotate(&g, n, person).unwrap();
        assert_eq!(
            annotate(&g, n, person).unwrap_err(),
            AnnotationError::NotTypedTwice { element: n, ty: person }
        );
    }

    #[test]
    fn multiple_typing_is_allowed() {
        let (g, n, _, male, female) = person_world();
        let g = annotate(&g, n, male).unwrap();
        let g = annotate(&g, n, female).unwrap();
        assert_eq!(ann_type(&g, n), [male, female].into());
        assert!(check_well_formed(&g).is_empty());
    }

    #[test]
    fn unannotated_element_has_no_types() {
        let (g, n, ..) = person_world();
        assert!(ann_type(&g, n).is_empty());
    }

    #[test]
    fn sort_mismatch_is_refused_and_reported() {
        let (mut g, n, person, ..) = person_world();
        let knows = g.graph_mut().add_edge(Label::ty("knows"), person, person);
        assert!(matches!(
            annotate(&g, n, knows),
            Err(AnnotationError::SortViolation { .. })
        ));
        attach(g.graph_mut(), n, knows);
        let r = check_well_formed(&g);
        assert!(r.has("annNodeInstance"), "{r}");
    }

    #[test]
    fn type_annotating_a_type_is_reported() {
        let (mut g, _, person, male, _) = person_world();
        attach(g.graph_mut(), male, person);
        assert!(check_well_formed(&g).has("annNodeType"));
    }

    #[test]
    fn annotation_node_with_two_with_edges() {
        let (mut g, n, person, male, _) = person_world();
        let a = attach(g.graph_mut(), n, person);
        g.graph_mut().add_edge(Label::with(), a.node, male);
        assert!(check_well_formed(&g).has("annPatternUnique"));
    }

    #[test]
    fn duplicate_raw_annotation_reported_as_not_typed_twice() {
        let (mut g, n, person, ..) = person_world();
        attach(g.graph_mut(), n, person);
        attach(g.graph_mut(), n, person);
        assert!(check_well_formed(&g).has("notTypedTwice"));
    }

    #[test]
    fn annotating_machinery_is_refused() {
        let (g, n, person, male, _) = person_world();
        let g = annotate(&g, n, person).unwrap();
        let a = annotations(&g)[0].node;
        assert!(matches!(
            annotate(&g, a, male),
            Err(AnnotationError::Machinery { .. })
        ));
    }

    fn chain_world() -> (TypeAnnotatedGraph, TypeHierarchy, ElementId, [ElementId; 4]) {
        let mut g = BGraph::new();
        let x = g.add_node(Label::named("x"));
        let top = g.add_node(Label::ty("Top"));
        let c = g.add_node(Label::ty("C"));
        let b = g.add_node(Label::ty("B"));
        let a = g.add_node(Label::ty("A"));
        let h = TypeHierarchy::new()
            .with_top(top)
            .with_parent(c, top)
            .with_parent(b, c)
            .with_parent(a, b);
        (g.into(), h, x, [a, b, c, top])
    }

    #[test]
    fn bundle_of_top_only() {
        let (g, h, x, [.., top]) = chain_world();
        let g = annotate_with_bundle(&g, x, &h, top).unwrap();
        assert_eq!(ann_type(&g, x), [top].into());
        assert!(check_well_formed(&g).is_empty());
    }

    #[test]
    fn remove_middle_of_chain() {
        let (g, h, x, [a, b, c, top]) = chain_world();
        let g = annotate_with_bundle(&g, x, &h, a).unwrap();
        assert_eq!(ann_type(&g, x), [a, b, c, top].into());
        let (g2, removal) = remove_annotation_at(&g, x, b).unwrap();
        assert_eq!(ann_type(&g2, x), [c, top].into());
        assert!(matches!(removal, Removal::Truncated { .. }));
        assert!(check_well_formed(&g2).is_empty(), "{}", check_well_formed(&g2));
        let (g3, _) = remove_annotation_at(&g2, x, c).unwrap();
        assert_eq!(ann_type(&g3, x), [top].into());
    }

    #[test]
    fn removing_top_is_refused() {
        let (g, h, x, [a, .., top]) = chain_world();
        let g = annotate_with_bundle(&g, x, &h, a).unwrap();
        assert!(matches!(
            remove_annotation_at(&g, x, top),
            Err(AnnotationError::TopRemoval { .. })
        ));
    }

    #[test]
    fn removing_absent_type_is_a_no_op() {
        let (g, h, x, [_, b, c, _]) = chain_world();
        let g = annotate_with_bundle(&g, x, &h, c).unwrap();
        let (g2, removal) = remove_annotation_at(&g, x, b).unwrap();
        assert_eq!(removal, Removal::NotInChain);
        assert_eq!(g2, g);
    }

    #[test]
    fn mixing_regimes_is_refused() {
        let (g, h, x, [a, b, ..]) = chain_world();
        let g2 = annotate(&g, x, b).unwrap();
        assert!(matches!(
            annotate_with_bundle(&g2, x, &h, a),
            Err(AnnotationError::MixedRegime { .. })
        ));
        let g3 = annotate_with_bundle(&g, x, &h, a).unwrap();
        assert!(matches!(
            annotate(&g3, x, b),
            Err(AnnotationError::MixedRegime { .. })
        ));
    }

    #[test]
    fn non_contiguous_bundle_is_reported() {
        let (mut g, h, x, [a, _, c, top]) = chain_world();
        g = g.with_hierarchy(h);
        let graph = g.graph_mut();
        let bundle = graph.add_box(Label::bundle());
        graph.set_contents_raw(bundle, [a, c, top].into());
        attach(graph, x, bundle);
        assert!(check_well_formed(&g).has("bundleChain"));
    }

    #[test]
    fn edge_type_consistency() {
        let mut g = BGraph::new();
        let person = g.add_node(Label::ty("Person"));
        let robot = g.add_node(Label::ty("Robot"));
        let knows = g.add_edge(Label::ty("knows"), person, person);
        let p = g.add_node(Label::instance());
        let q = g.add_node(Label::instance());
        let r = g.add_node(Label::instance());
        let e1 = g.add_edge(Label::instance(), p, q);
        let e2 = g.add_edge(Label::instance(), r, q);
        for (x, t) in [(p, person), (q, person), (r, robot), (e1, knows), (e2, knows)] {
            attach(&mut g, x, t);
        }
        let g = TypeAnnotatedGraph::new(g);
        let report = check_well_formed(&g);
        assert!(report.has("edgeTypeConsistency"));
        assert!(check_type_correctness(&g).has("edgeTypeRestriction"));
    }
}
