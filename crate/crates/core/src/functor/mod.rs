//! From typing morphisms to type annotations and back.
//!
//! [`type_ann_ob`] embeds a typed graph `G` and its type graph `TG`
//! disjointly into one graph `H` and records the typing `tp` as one type
//! annotation per element of `G`. [`type_ann_hom`] carries type-preserving
//! morphisms along, and [`extract_typed`] recovers typed graphs from an
//! annotated one.

mod triple;

pub use triple::{
    ann_type_patterns, build_correspondences, satisfies_ann_type_patterns, satisfies_composition,
    MapAtom, PatternComposition, CompositionCheck, TripleGraph, TriplePattern, Witness,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::annotation::{
    ann_type, annotations, attach, check_well_formed, Annotation, TypeAnnotatedGraph,
};
use crate::graph::{validate_bgraph, BGraph, ElementId, Kind, Label, Sort};
use crate::matching::is_isomorphic;
use crate::morphism::{coproduct, labels_compatible, validate_morphism, GraphMorphism};
use crate::report::Report;

/// A graph `instance` typed over `type_graph` by the morphism `typing`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedGraph {
    pub instance: BGraph,
    pub type_graph: BGraph,
    pub typing: GraphMorphism,
}

impl TypedGraph {
    pub fn new(instance: BGraph, type_graph: BGraph, typing: GraphMorphism) -> Self {
        TypedGraph {
            instance,
            type_graph,
            typing,
        }
    }

    pub fn validate(&self) -> Report {
        let mut report = validate_bgraph(&self.instance);
        report.extend(validate_bgraph(&self.type_graph));
        report.extend(validate_morphism(&self.instance, &self.type_graph, &self.typing));
        for x in self.instance.elements() {
            if self.instance.kind(x) != Some(Kind::Instance) {
                report.push("instanceKind", [x], format!("{x} in the instance graph is not an instance element"));
            }
        }
        let mut names: BTreeSet<(Sort, &str)> = BTreeSet::new();
        for t in self.type_graph.elements() {
            if self.type_graph.kind(t) != Some(Kind::Type) {
                report.push("typeGraphKind", [t], format!("{t} in the type graph is not a type element"));
            }
            match self.type_graph.name(t) {
                Some(n) if !n.is_empty() => {
                    if !names.insert((t.sort(), n)) {
                        report.push("typeGraphName", [t], format!("type name `{n}` is used twice for {}s", t.sort()));
                    }
                }
                _ => report.push("typeGraphName", [t], format!("type {t} has no name")),
            }
        }
        report
    }

    pub fn type_of(&self, x: ElementId) -> Option<ElementId> {
        self.typing.get(x)
    }

    /// The instance graph with every element's name extended by the name of
    /// its type, so that label-exact isomorphism respects typing.
    pub fn flattened(&self) -> BGraph {
        let mut g = self.instance.clone();
        for x in self.instance.elements() {
            let own = self.instance.name(x).unwrap_or("");
            let ty = self
                .typing
                .get(x)
                .and_then(|t| self.type_graph.name(t))
                .unwrap_or("?");
            g.set_label(x, Label::new(Kind::Instance, Some(&format!("{own}:{ty}"))));
        }
        g
    }

    /// Isomorphism of typed graphs: isomorphic type graphs (names are unique
    /// per sort, so this is name-wise) and isomorphic instances with
    /// corresponding types.
    pub fn is_isomorphic(&self, other: &TypedGraph) -> bool {
        is_isomorphic(&self.type_graph, &other.type_graph)
            && is_isomorphic(&self.flattened(), &other.flattened())
    }
}

/// `H(G, tp)` together with the immersions of `G` and `TG`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedImage {
    pub h: TypeAnnotatedGraph,
    /// `G -> H`.
    pub fg: GraphMorphism,
    /// `TG -> H`.
    pub ft: GraphMorphism,
}

impl AnnotatedImage {
    /// Checks the defining conditions of the construction against `t`.
    pub fn check(&self, t: &TypedGraph) -> Report {
        let mut report = Report::new();
        let h = self.h.graph();
        report.extend(validate_morphism(&t.instance, h, &self.fg));
        report.extend(validate_morphism(&t.type_graph, h, &self.ft));
        if !self.fg.is_injective() || !self.ft.is_injective() {
            report.push("immersion", [], "immersions must be injective");
        }
        if !self.fg.image().is_disjoint(&self.ft.image()) {
            report.push("immersion", [], "immersions must be disjoint");
        }
        for x in t.instance.elements() {
            let hx = self.fg.at(x);
            let expected: BTreeSet<ElementId> = [self.ft.at(t.typing.at(x))].into();
            if ann_type(h, hx) != expected {
                report.push(
                    "singleTypeAnnotation",
                    [hx],
                    format!("{hx} must be annotated exactly with {:?}", expected),
                );
            }
        }
        let expected_size = t.instance.len() * 4 + t.type_graph.len();
        if h.len() != expected_size {
            report.push(
                "minimality",
                [],
                format!("H has {} elements, the construction needs {expected_size}", h.len()),
            );
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunctorError {
    #[error("invalid typed graph: {0}")]
    InvalidTyped(Report),
    #[error("graph is not well-formed: {0}")]
    IllFormed(Report),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(Report),
    #[error("morphism is not type-preserving at {0}")]
    NotTypePreserving(ElementId),
    #[error("typed graphs are over different type graphs")]
    TypeGraphMismatch,
    #[error("annotated image does not fit its typed graph: {0}")]
    ImageMismatch(Report),
}

/// Builds `H(G, tp)`: the coproduct `G ⊕ TG` plus one type annotation per
/// element of `G`.
pub fn type_ann_ob(t: &TypedGraph) -> Result<AnnotatedImage, FunctorError> {
    let r = t.validate();
    if !r.is_empty() {
        return Err(FunctorError::InvalidTyped(r));
    }
    let co = coproduct(&t.instance, &t.type_graph);
    let mut h = co.graph;
    for x in t.instance.elements() {
        attach(&mut h, co.in1.at(x), co.in2.at(t.typing.at(x)));
    }
    Ok(AnnotatedImage {
        h: TypeAnnotatedGraph::new(h),
        fg: co.in1,
        ft: co.in2,
    })
}

/// Carries a type-preserving `m: G -> G'` to `m': H -> H'` with
/// `m'(fg(x)) = fg'(m(x))`, fixing the type graph and mapping annotation
/// patterns onto annotation patterns.
pub fn type_ann_hom(
    m: &GraphMorphism,
    src: &TypedGraph,
    dst: &TypedGraph,
    img_src: &AnnotatedImage,
    img_dst: &AnnotatedImage,
) -> Result<GraphMorphism, FunctorError> {
    if src.type_graph != dst.type_graph {
        return Err(FunctorError::TypeGraphMismatch);
    }
    let r = validate_morphism(&src.instance, &dst.instance, m);
    if !r.is_empty() {
        return Err(FunctorError::InvalidMorphism(r));
    }
    for x in src.instance.elements() {
        if dst.typing.get(m.at(x)) != src.typing.get(x) {
            return Err(FunctorError::NotTypePreserving(x));
        }
    }
    let dst_ann: BTreeMap<(ElementId, ElementId), Annotation> = annotations(img_dst.h.graph())
        .into_iter()
        .map(|a| ((a.target, a.value), a))
        .collect();
    let fg_inv = img_src.fg.inverse().expect("injective immersion");
    let ft_inv = img_src.ft.inverse().expect("injective immersion");

    let mut out = GraphMorphism::new();
    for x in src.instance.elements() {
        out.insert(img_src.fg.at(x), img_dst.fg.at(m.at(x)));
    }
    for t in src.type_graph.elements() {
        out.insert(img_src.ft.at(t), img_dst.ft.at(t));
    }
    for a in annotations(img_src.h.graph()) {
        let (Some(x), Some(t)) = (fg_inv.get(a.target), ft_inv.get(a.value)) else {
            return Err(FunctorError::ImageMismatch(Report::new()));
        };
        let key = (img_dst.fg.at(m.at(x)), img_dst.ft.at(t));
        let Some(b) = dst_ann.get(&key) else {
            let mut r = Report::new();
            r.push("singleTypeAnnotation", [key.0], format!("{} lacks its type annotation", key.0));
            return Err(FunctorError::ImageMismatch(r));
        };
        out.insert(a.node, b.node);
        out.insert(a.annotates, b.annotates);
        out.insert(a.with, b.with);
    }
    Ok(out)
}

/// Checks that `m: H -> H'` is a label-respecting morphism and that every
/// type-annotated element keeps exactly its types: `annType(m(y)) = m(annType(y))`.
pub fn type_annotation_preserving(h: &BGraph, h2: &BGraph, m: &GraphMorphism) -> Report {
    let mut report = validate_morphism(h, h2, m);
    if !report.is_empty() {
        return report;
    }
    if !labels_compatible(h, h2, m) {
        report.push("labelMatch", [], "morphism does not respect labels");
    }
    for y in h.elements() {
        let types = ann_type(h, y);
        if types.is_empty() {
            continue;
        }
        let mapped: BTreeSet<ElementId> = types.iter().map(|t| m.at(*t)).collect();
        let there = ann_type(h2, m.at(y));
        if mapped != there {
            report.push(
                "typeAnnotationPreserving",
                [y],
                format!("{y} has types {:?} but its image {} has {:?}", mapped, m.at(y), there),
            );
        }
    }
    report
}

/// Recovers typed graphs from a well-formed annotated graph.
///
/// Type elements form the type graph. Every instance element with at least
/// one type annotation is kept; one typed graph is produced per choice of a
/// type for each element. Under a given choice, edges whose ends are typed
/// inconsistently with the edge's type are dropped, as are containment pairs
/// the type graph does not allow, so each result is a valid typed graph on a
/// subgraph of the input.
pub fn extract_typed(h: &TypeAnnotatedGraph) -> Result<Vec<TypedGraph>, FunctorError> {
    let wf = check_well_formed(h);
    if !wf.is_empty() {
        return Err(FunctorError::IllFormed(wf));
    }
    let g = h.graph();
    let type_ids: BTreeSet<ElementId> = g.elements().filter(|x| g.kind(*x) == Some(Kind::Type)).collect();
    let type_graph = g.restrict(&type_ids);
    let choices: Vec<(ElementId, Vec<ElementId>)> = g
        .elements()
        .filter(|x| g.kind(*x) == Some(Kind::Instance))
        .filter_map(|x| {
            let ts: Vec<ElementId> = ann_type(g, x).into_iter().filter(|t| t.sort() == x.sort()).collect();
            (!ts.is_empty()).then_some((x, ts))
        })
        .collect();
    let kept: BTreeSet<ElementId> = choices.iter().map(|(x, _)| *x).collect();
    let base = g.restrict(&kept);

    let mut out = Vec::new();
    let mut pick = vec![0usize; choices.len()];
    loop {
        let typing: GraphMorphism = choices.iter().zip(&pick).map(|((x, ts), i)| (*x, ts[*i])).collect();
        out.push(typed_under(&base, &type_graph, typing));
        // odometer over the choice vector
        let mut i = pick.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < choices[i].1.len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

fn typed_under(base: &BGraph, type_graph: &BGraph, typing: GraphMorphism) -> TypedGraph {
    let mut instance = base.clone();
    let mut typing = typing;
    for e in base.edges() {
        let (s, t) = base.ends(e).expect("edge ends");
        let te = typing.at(e);
        let consistent = type_graph.ends(te) == Some((typing.at(s), typing.at(t)));
        if !consistent {
            instance.remove(e);
            typing.remove(e);
        }
    }
    for (b, inner) in base.all_contents() {
        let allowed = type_graph.contents(typing.at(*b));
        let content = inner
            .iter()
            .copied()
            .filter(|x| allowed.is_some_and(|a| a.contains(&typing.at(*x))))
            .collect();
        instance.set_contents_raw(*b, content);
    }
    TypedGraph {
        instance,
        type_graph: type_graph.clone(),
        typing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{annotate, check_type_correctness};

    pub(crate) fn bruce_typed() -> TypedGraph {
        let mut tg = BGraph::new();
        let person = tg.add_node(Label::ty("Person"));
        let mut g = BGraph::new();
        let bruce = g.add_node(Label::named("Bruce"));
        TypedGraph::new(g, tg, [(bruce, person)].into_iter().collect())
    }

    #[test]
    fn empty_instance_gives_only_type_graph() {
        let mut tg = BGraph::new();
        tg.add_node(Label::ty("T"));
        let t = TypedGraph::new(BGraph::new(), tg.clone(), GraphMorphism::new());
        let img = type_ann_ob(&t).unwrap();
        assert_eq!(img.h.len(), tg.len());
        assert!(annotations(&img.h).is_empty());
    }

    #[test]
    fn bruce_gets_one_annotation() {
        let t = bruce_typed();
        let img = type_ann_ob(&t).unwrap();
        assert!(img.check(&t).is_empty(), "{}", img.check(&t));
        assert_eq!(annotations(&img.h).len(), 1);
        assert!(check_well_formed(&img.h).is_empty());
        assert!(check_type_correctness(&img.h).is_empty());
        let bruce = img.fg.at(ElementId::node(0));
        let person = img.ft.at(ElementId::node(0));
        assert_eq!(ann_type(&img.h, bruce), [person].into());
    }

    #[test]
    fn invalid_typing_is_rejected() {
        let mut t = bruce_typed();
        t.typing = GraphMorphism::new();
        assert!(matches!(type_ann_ob(&t), Err(FunctorError::InvalidTyped(_))));
    }

    #[test]
    fn round_trip_on_bruce() {
        let t = bruce_typed();
        let img = type_ann_ob(&t).unwrap();
        let back = extract_typed(&img.h).unwrap();
        assert_eq!(back.len(), 1);
        assert!(back[0].is_isomorphic(&t));
    }

    #[test]
    fn double_annotation_gives_two_typings() {
        let mut tg = BGraph::new();
        let male = tg.add_node(Label::ty("Male"));
        tg.add_node(Label::ty("Female"));
        let mut g = BGraph::new();
        let x = g.add_node(Label::named("x"));
        let t = TypedGraph::new(g, tg, [(x, male)].into_iter().collect());
        let img = type_ann_ob(&t).unwrap();
        let female = img.h.type_named(Sort::Node, "Female").unwrap();
        let h = annotate(&img.h, img.fg.at(x), female).unwrap();
        assert_eq!(extract_typed(&h).unwrap().len(), 2);
    }

    #[test]
    fn identity_maps_to_identity_on_instance_part() {
        let t = bruce_typed();
        let img = type_ann_ob(&t).unwrap();
        let id = GraphMorphism::identity(&t.instance);
        let m2 = type_ann_hom(&id, &t, &t, &img, &img).unwrap();
        assert_eq!(m2, GraphMorphism::identity(&img.h));
        assert!(type_annotation_preserving(&img.h, &img.h, &m2).is_empty());
    }
}
