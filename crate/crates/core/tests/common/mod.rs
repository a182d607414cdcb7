//! Seeded generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use annograph::functor::TypedGraph;
use annograph::graph::{BGraph, ElementId, Label, Sort};
use annograph::morphism::GraphMorphism;
use annograph::patterns::{Constraint, ConstraintKind, Pattern};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAMES: [Option<&str>; 3] = [None, Some("a"), Some("b")];

/// An instance-only graph with at most `max` elements: nodes, boxes, edges
/// between vertices and box containment.
pub fn random_bgraph(rng: &mut ChaCha8Rng, max: usize) -> BGraph {
    let mut g = BGraph::new();
    let vertices = rng.gen_range(1..=max.min(5));
    let mut vs = Vec::new();
    for _ in 0..vertices {
        let label = Label::new(annograph::graph::Kind::Instance, *NAMES.choose(rng).unwrap());
        vs.push(if rng.gen_bool(0.25) { g.add_box(label) } else { g.add_node(label) });
    }
    let boxes: Vec<ElementId> = g.boxes().collect();
    let nodes: Vec<ElementId> = g.nodes().collect();
    for b in &boxes {
        for n in &nodes {
            if rng.gen_bool(0.3) {
                g.contain(*b, *n);
            }
        }
    }
    let edges = rng.gen_range(0..=max - vertices);
    for _ in 0..edges {
        let s = *vs.choose(rng).unwrap();
        let t = *vs.choose(rng).unwrap();
        let name = [Some("r"), Some("s"), None].choose(rng).unwrap().to_owned();
        g.add_edge(Label::new(annograph::graph::Kind::Instance, name), s, t);
    }
    g
}

/// A pattern for `host`: either an unrelated random graph or a random
/// subgraph of the host with some names forgotten.
pub fn random_pattern(rng: &mut ChaCha8Rng, host: &BGraph, max: usize) -> BGraph {
    if rng.gen_bool(0.3) {
        return random_bgraph(rng, max);
    }
    let mut p = random_subgraph(rng, host, max);
    let ids: Vec<ElementId> = p.elements().collect();
    for x in ids {
        if rng.gen_bool(0.3) {
            p.set_label(x, Label::instance());
        }
    }
    p
}

/// A random subgraph of `g` on at most `max` elements, closed under edge ends.
pub fn random_subgraph(rng: &mut ChaCha8Rng, host: &BGraph, max: usize) -> BGraph {
    let mut keep: BTreeSet<ElementId> = host.elements().filter(|x| x.is_vertex() && rng.gen_bool(0.6)).collect();
    for e in host.edges() {
        let (s, t) = host.ends(e).unwrap();
        if keep.contains(&s) && keep.contains(&t) && rng.gen_bool(0.6) {
            keep.insert(e);
        }
    }
    while keep.len() > max {
        let x = *keep.iter().next_back().unwrap();
        keep.remove(&x);
        let dangling: Vec<ElementId> =
            keep.iter().copied().filter(|e| host.ends(*e).is_some_and(|(s, t)| s == x || t == x)).collect();
        for e in dangling {
            keep.remove(&e);
        }
    }
    host.restrict(&keep)
}

/// Every morphism `p -> h` by enumeration of all sort-respecting maps,
/// filtered afterwards. Independent of the backtracking matcher.
pub fn brute_force_matches(p: &BGraph, h: &BGraph, injective: bool) -> BTreeSet<Vec<(ElementId, ElementId)>> {
    let dom: Vec<ElementId> = p.elements().collect();
    let cands: Vec<Vec<ElementId>> = dom.iter().map(|x| h.elements().filter(|y| y.sort() == x.sort()).collect()).collect();
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; dom.len()];
    if cands.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let m: Vec<(ElementId, ElementId)> = dom.iter().zip(&pick).enumerate().map(|(i, (x, k))| (*x, cands[i][*k])).collect();
        if is_morphism(p, h, &m, injective) {
            out.insert(m);
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < cands[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn is_morphism(p: &BGraph, h: &BGraph, m: &[(ElementId, ElementId)], injective: bool) -> bool {
    let f = |x: ElementId| m.iter().find(|(a, _)| *a == x).map(|(_, b)| *b).unwrap();
    if injective {
        let img: BTreeSet<ElementId> = m.iter().map(|(_, y)| *y).collect();
        if img.len() != m.len() {
            return false;
        }
    }
    for (x, y) in m {
        let (lp, lh) = (p.label(*x).unwrap(), h.label(*y).unwrap());
        if lp.kind != lh.kind || lp.name.as_ref().is_some_and(|n| lh.name.as_ref() != Some(n)) {
            return false;
        }
        if let Some((s, t)) = p.ends(*x) {
            if h.ends(*y) != Some((f(s), f(t))) {
                return false;
            }
        }
    }
    for (b, inner) in p.all_contents() {
        let hb = h.contents(f(*b));
        if inner.iter().any(|x| !hb.is_some_and(|c| c.contains(&f(*x)))) {
            return false;
        }
    }
    true
}

pub fn as_pairs(m: &GraphMorphism) -> Vec<(ElementId, ElementId)> {
    m.iter().collect()
}

/// Every collection of a tree pattern: the product of the per-graph match
/// sets, filtered by commutativity along the links.
pub fn brute_force_collections(host: &BGraph, p: &Pattern) -> BTreeSet<Vec<Vec<(ElementId, ElementId)>>> {
    let per: Vec<Vec<Vec<(ElementId, ElementId)>>> =
        p.graphs.iter().map(|g| brute_force_matches(g, host, p.injective).into_iter().collect()).collect();
    let mut out = BTreeSet::new();
    if per.iter().any(Vec::is_empty) {
        return out;
    }
    let mut pick = vec![0usize; per.len()];
    loop {
        let coll: Vec<Vec<(ElementId, ElementId)>> = pick.iter().enumerate().map(|(i, k)| per[i][*k].clone()).collect();
        let at = |i: usize, x: ElementId| coll[i].iter().find(|(a, _)| *a == x).map(|(_, b)| *b);
        if p.links.iter().all(|l| l.morphism.iter().all(|(x, y)| at(l.child, y) == at(l.parent, x))) {
            out.insert(coll);
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < per[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Constraint satisfaction by enumeration: every premise match extends
/// along the constraint morphism to a conclusion match; a forbidden graph
/// has no match at all.
pub fn brute_force_satisfied(host: &BGraph, c: &Constraint) -> bool {
    match &c.kind {
        ConstraintKind::Forbidden { graph } => brute_force_matches(graph, host, c.injective).is_empty(),
        ConstraintKind::Positive { premise, conclusion, morphism } => {
            let qs = brute_force_matches(conclusion, host, c.injective);
            brute_force_matches(premise, host, c.injective).iter().all(|m| {
                qs.iter().any(|q| {
                    m.iter().all(|(x, y)| {
                        let cx = morphism.at(*x);
                        q.iter().any(|(a, b)| *a == cx && b == y)
                    })
                })
            })
        }
    }
}

/// A type graph with 2-3 node types, at most one box type, and a few edge
/// types between vertex types. Boxes may contain nodes.
pub fn random_type_graph(rng: &mut ChaCha8Rng) -> BGraph {
    let mut tg = BGraph::new();
    for i in 0..rng.gen_range(2..=3) {
        tg.add_node(Label::ty(&format!("T{i}")));
    }
    if rng.gen_bool(0.5) {
        let b = tg.add_box(Label::ty("B0"));
        let nodes: Vec<ElementId> = tg.nodes().collect();
        for n in nodes {
            if rng.gen_bool(0.5) {
                tg.contain(b, n);
            }
        }
    }
    let vs: Vec<ElementId> = tg.elements().filter(|x| x.is_vertex()).collect();
    for i in 0..rng.gen_range(1..=3) {
        let s = *vs.choose(rng).unwrap();
        let t = *vs.choose(rng).unwrap();
        tg.add_edge(Label::ty(&format!("r{i}")), s, t);
    }
    tg
}

/// A valid typed graph with at most `max` instance elements. Instance
/// elements are anonymous when `anonymous` holds, otherwise named.
pub fn random_typed_graph(rng: &mut ChaCha8Rng, max: usize, anonymous: bool) -> TypedGraph {
    let tg = random_type_graph(rng);
    grow(rng, TypedGraph::new(BGraph::new(), tg, GraphMorphism::new()), max, anonymous)
}

/// Adds random vertices, edges and containment to `t` until it has up to
/// `max` instance elements, keeping the typing valid.
pub fn grow(rng: &mut ChaCha8Rng, mut t: TypedGraph, max: usize, anonymous: bool) -> TypedGraph {
    let tvs: Vec<ElementId> = t.type_graph.elements().filter(|x| x.is_vertex()).collect();
    let tes: Vec<ElementId> = t.type_graph.edges().collect();
    let budget = max.saturating_sub(t.instance.len());
    if budget == 0 {
        return t;
    }
    let vertices = rng.gen_range(1..=budget.min(4));
    for i in 0..vertices {
        let ty = *tvs.choose(rng).unwrap();
        let label = if anonymous { Label::instance() } else { Label::named(&format!("x{}", t.instance.next_index() + i as u32)) };
        let x = match ty.sort() {
            Sort::Box => t.instance.add_box(label),
            _ => t.instance.add_node(label),
        };
        t.typing.insert(x, ty);
    }
    for _ in 0..(max - t.instance.len()) {
        let te = *tes.choose(rng).unwrap();
        let (ts, tt) = t.type_graph.ends(te).unwrap();
        let of = |ty: ElementId| -> Vec<ElementId> { t.instance.elements().filter(|x| t.typing.get(*x) == Some(ty)).collect() };
        let (ss, st) = (of(ts), of(tt));
        if ss.is_empty() || st.is_empty() || rng.gen_bool(0.2) {
            continue;
        }
        let (s, d) = (*ss.choose(rng).unwrap(), *st.choose(rng).unwrap());
        let label = if anonymous { Label::instance() } else { Label::named(t.type_graph.name(te).unwrap()) };
        let e = t.instance.add_edge(label, s, d);
        t.typing.insert(e, te);
    }
    let boxes: Vec<ElementId> = t.instance.boxes().collect();
    let nodes: Vec<ElementId> = t.instance.nodes().collect();
    for b in &boxes {
        for n in &nodes {
            let allowed = t.type_graph.contents(t.typing.at(*b)).is_some_and(|c| c.contains(&t.typing.at(*n)));
            if allowed && rng.gen_bool(0.5) {
                t.instance.contain(*b, *n);
            }
        }
    }
    t
}
