//! Triple graphs relating `TG` and `G` to the annotated graph `H`, and the
//! family of triple-pattern compositions that characterise typing by
//! annotation.
//!
//! A composition has two triple patterns on a common target: the type side
//! `TG-part <- TypeCorr-part -> H-part` and the instance side
//! `G-part <- InstCorr-part -> H-part`, plus a formula `Γ` made of
//! map-membership atoms `(instance, type) ∈ tp`. Node and edge compositions
//! follow the published pictures; box compositions are derived by analogy,
//! and edge compositions are instantiated once per combination of endpoint
//! sorts and loop structure.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{BGraph, ElementId, Kind, Label, Sort};
use crate::matching::{find_matches, find_matches_with, MatchOptions};
use crate::morphism::{labels_compatible, validate_morphism, GraphMorphism};
use crate::report::Report;

use super::{AnnotatedImage, FunctorError, TypedGraph};

/// `source <-left- corr -right-> target` with a discrete correspondence graph.
/// The correspondence maps relate elements of any sort to correspondence
/// nodes, so they are element maps rather than sort-respecting morphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleGraph {
    pub source: BGraph,
    pub corr: BGraph,
    pub target: BGraph,
    pub left: GraphMorphism,
    pub right: GraphMorphism,
}

impl TripleGraph {
    pub fn validate(&self) -> Report {
        let mut report = Report::new();
        if self.corr.count(Sort::Edge) + self.corr.count(Sort::Box) > 0 {
            report.push("discreteCorrespondence", [], "correspondence graph must only contain nodes");
        }
        for (map, graph, side) in [(&self.left, &self.source, "left"), (&self.right, &self.target, "right")] {
            for c in self.corr.elements() {
                match map.get(c) {
                    None => report.push("totality", [c], format!("{side} map misses {c}")),
                    Some(x) if !graph.contains(x) => {
                        report.push("imageExists", [c, x], format!("{side} image {x} of {c} missing"))
                    }
                    Some(_) => {}
                }
            }
            if !map.is_injective() {
                report.push("injectiveCorrespondence", [], format!("{side} map is not injective"));
            }
        }
        report
    }
}

/// `(instance, type)` belongs to the typing map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapAtom {
    pub instance: ElementId,
    pub ty: ElementId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriplePattern {
    pub trip: TripleGraph,
    /// Conjunction of atoms over this pattern's own elements; empty for the
    /// patterns built here, whose formula lives on the composition.
    pub gamma: Vec<MapAtom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternComposition {
    pub name: String,
    pub sort: Sort,
    pub instance_side: TriplePattern,
    pub type_side: TriplePattern,
    /// `Γ`: instance-part element / type-part element pairs of the typing map.
    pub typing: Vec<MapAtom>,
    /// The element of the instance part the composition is about.
    pub distinguished: ElementId,
    /// True for compositions obtained by analogy (boxes).
    pub by_analogy: bool,
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Vertex(Sort),
    Edge { src: Sort, tgt: Sort, loop_instance: bool, loop_type: bool },
}

struct Part {
    graph: BGraph,
    // element of the part -> its copy in the common target
    copy: GraphMorphism,
    main: ElementId,
    src: Option<ElementId>,
    tgt: Option<ElementId>,
}

fn add_star(g: &mut BGraph, label: Label, shape: Shape, looped: bool) -> (ElementId, Option<ElementId>, Option<ElementId>) {
    match shape {
        Shape::Vertex(Sort::Box) => (g.add_box(label), None, None),
        Shape::Vertex(_) => (g.add_node(label), None, None),
        Shape::Edge { src, tgt, .. } => {
            let add = |g: &mut BGraph, sort: Sort| match sort {
                Sort::Box => g.add_box(label.clone()),
                _ => g.add_node(label.clone()),
            };
            let s = add(g, src);
            let t = if looped { s } else { add(g, tgt) };
            (g.add_edge(label.clone(), s, t), Some(s), Some(t))
        }
    }
}

fn build_part(shape: Shape, kind: Kind, looped: bool, target: &mut BGraph) -> Part {
    let label = Label::new(kind, None);
    let mut graph = BGraph::new();
    let (main, src, tgt) = add_star(&mut graph, label.clone(), shape, looped);
    let (tmain, tsrc, ttgt) = add_star(target, label, shape, looped);
    let mut copy: GraphMorphism = [(main, tmain)].into_iter().collect();
    if let (Some(s), Some(ts)) = (src, tsrc) {
        copy.insert(s, ts);
    }
    if let (Some(t), Some(tt)) = (tgt, ttgt) {
        copy.insert(t, tt);
    }
    Part { graph, copy, main, src, tgt }
}

fn corr_side(part: &Part, target: &BGraph) -> TriplePattern {
    let mut corr = BGraph::new();
    let mut left = GraphMorphism::new();
    let mut right = GraphMorphism::new();
    for x in part.graph.elements() {
        let c = corr.add_node(Label::instance());
        left.insert(c, x);
        right.insert(c, part.copy.at(x));
    }
    TriplePattern {
        trip: TripleGraph {
            source: part.graph.clone(),
            corr,
            target: target.clone(),
            left,
            right,
        },
        gamma: Vec::new(),
    }
}

fn composition(name: &str, shape: Shape) -> PatternComposition {
    let (loop_instance, loop_type) = match shape {
        Shape::Edge { loop_instance, loop_type, .. } => (loop_instance, loop_type),
        Shape::Vertex(_) => (false, false),
    };
    let mut target = BGraph::new();
    let inst = build_part(shape, Kind::Instance, loop_instance, &mut target);
    let ty = build_part(shape, Kind::Type, loop_type, &mut target);
    let a = target.add_node(Label::annotation());
    target.add_edge(Label::annotates(), a, inst.copy.at(inst.main));
    target.add_edge(Label::with(), a, ty.copy.at(ty.main));

    let mut typing = vec![MapAtom { instance: inst.main, ty: ty.main }];
    if let (Some(s), Some(t), Some(ts), Some(tt)) = (inst.src, inst.tgt, ty.src, ty.tgt) {
        typing.push(MapAtom { instance: s, ty: ts });
        if t != s {
            typing.push(MapAtom { instance: t, ty: tt });
        }
    }
    let sort = match shape {
        Shape::Vertex(s) => s,
        Shape::Edge { .. } => Sort::Edge,
    };
    PatternComposition {
        name: name.to_owned(),
        sort,
        instance_side: corr_side(&inst, &target),
        type_side: corr_side(&ty, &target),
        typing,
        distinguished: inst.main,
        by_analogy: sort == Sort::Box,
    }
}

/// The set of compositions: one for nodes, one for boxes, and one per edge
/// shape (endpoint sorts × loop structure of the instance and of its type).
pub fn ann_type_patterns() -> Vec<PatternComposition> {
    let mut out = vec![
        composition("node", Shape::Vertex(Sort::Node)),
        composition("box", Shape::Vertex(Sort::Box)),
    ];
    for src in [Sort::Node, Sort::Box] {
        for tgt in [Sort::Node, Sort::Box] {
            let mut variants = vec![(false, false)];
            if src == tgt {
                variants.extend([(false, true), (true, true)]);
            }
            for (loop_instance, loop_type) in variants {
                let name = format!(
                    "edge:{src}->{tgt}{}{}",
                    if loop_instance { ":loop" } else { "" },
                    if loop_type && !loop_instance { ":loop-type" } else { "" }
                );
                out.push(composition(
                    &name,
                    Shape::Edge { src, tgt, loop_instance, loop_type },
                ));
            }
        }
    }
    out
}

fn correspondence(source: &BGraph, target: &BGraph, into: &GraphMorphism, tag: &str) -> TripleGraph {
    let mut corr = BGraph::new();
    let mut left = GraphMorphism::new();
    let mut right = GraphMorphism::new();
    for x in source.elements() {
        let c = corr.add_node(Label::named(&format!("{tag}:{x}")));
        left.insert(c, x);
        right.insert(c, into.at(x));
    }
    TripleGraph {
        source: source.clone(),
        corr,
        target: target.clone(),
        left,
        right,
    }
}

/// `TriType = TG <- TypeCorr -> H` and `TriInst = G <- InstCorr -> H`, one
/// correspondence node per element of `TG` (resp. `G`).
pub fn build_correspondences(
    t: &TypedGraph,
    img: &AnnotatedImage,
) -> Result<(TripleGraph, TripleGraph), FunctorError> {
    let r = img.check(t);
    if !r.is_empty() {
        return Err(FunctorError::ImageMismatch(r));
    }
    let h = img.h.graph();
    Ok((
        correspondence(&t.type_graph, h, &img.ft, "T"),
        correspondence(&t.instance, h, &img.fg, "I"),
    ))
}

/// One satisfying assignment of a composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub composition: usize,
    pub element: ElementId,
    pub instance_match: GraphMorphism,
    pub type_match: GraphMorphism,
    pub target_match: GraphMorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionCheck {
    pub satisfied: bool,
    pub witnesses: Vec<Witness>,
    /// First element of `G` (in id order) without a witness.
    pub failing: Option<ElementId>,
    pub witnesses_per_sort: BTreeMap<Sort, usize>,
}

fn corr_image(
    pattern: &TripleGraph,
    host: &TripleGraph,
    host_left_inv: &GraphMorphism,
    source_match: &GraphMorphism,
    seed: &mut GraphMorphism,
) -> bool {
    for c in pattern.corr.elements() {
        let Some(hc) = host_left_inv.get(source_match.at(pattern.left.at(c))) else {
            return false;
        };
        let want = host.right.at(hc);
        let key = pattern.right.at(c);
        match seed.get(key) {
            Some(existing) if existing != want => return false,
            _ => {
                seed.insert(key, want);
            }
        }
    }
    true
}

/// All witnesses of one composition against the composed triple graphs.
pub fn satisfies_composition(
    index: usize,
    comp: &PatternComposition,
    t: &TypedGraph,
    img: &AnnotatedImage,
    tri_type: &TripleGraph,
    tri_inst: &TripleGraph,
) -> Vec<Witness> {
    let inst_inv = tri_inst.left.inverse().unwrap_or_default();
    let type_inv = tri_type.left.inverse().unwrap_or_default();
    let tg_part = &comp.type_side.trip.source;
    let mut out = Vec::new();
    for mg in find_matches(&comp.instance_side.trip.source, &t.instance, true) {
        // Γ fixes the type-side match
        let mut mt = GraphMorphism::new();
        let mut consistent = true;
        for atom in &comp.typing {
            let Some(ty) = t.typing.get(mg.at(atom.instance)) else {
                consistent = false;
                break;
            };
            if mt.insert(atom.ty, ty).is_some_and(|prev| prev != ty) {
                consistent = false;
            }
        }
        if !consistent
            || !validate_morphism(tg_part, &t.type_graph, &mt).is_empty()
            || !mt.is_injective()
            || !labels_compatible(tg_part, &t.type_graph, &mt)
        {
            continue;
        }
        let mut seed = GraphMorphism::new();
        if !corr_image(&comp.instance_side.trip, tri_inst, &inst_inv, &mg, &mut seed)
            || !corr_image(&comp.type_side.trip, tri_type, &type_inv, &mt, &mut seed)
        {
            continue;
        }
        let opts = MatchOptions::injective().seeded(seed);
        for mh in find_matches_with(&comp.instance_side.trip.target, img.h.graph(), &opts) {
            out.push(Witness {
                composition: index,
                element: mg.at(comp.distinguished),
                instance_match: mg.clone(),
                type_match: mt.clone(),
                target_match: mh,
            });
        }
    }
    out
}

/// Evaluates every composition; satisfied iff each element of `G` has a
/// witness.
pub fn satisfies_ann_type_patterns(
    t: &TypedGraph,
    img: &AnnotatedImage,
    tri_type: &TripleGraph,
    tri_inst: &TripleGraph,
) -> CompositionCheck {
    let witnesses: Vec<Witness> = ann_type_patterns()
        .iter()
        .enumerate()
        .flat_map(|(i, c)| satisfies_composition(i, c, t, img, tri_type, tri_inst))
        .collect();
    let covered: BTreeSet<ElementId> = witnesses.iter().map(|w| w.element).collect();
    let failing = t.instance.elements().find(|x| !covered.contains(x));
    let mut witnesses_per_sort = BTreeMap::new();
    for w in &witnesses {
        *witnesses_per_sort.entry(w.element.sort()).or_insert(0) += 1;
    }
    CompositionCheck {
        satisfied: failing.is_none(),
        witnesses,
        failing,
        witnesses_per_sort,
    }
}
