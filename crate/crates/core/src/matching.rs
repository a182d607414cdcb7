//! Backtracking enumeration of graph morphisms.
//!
//! Pattern elements are visited in a connectivity-first order: an edge is
//! placed as soon as both of its ends are placed, and the next vertex is the
//! one most connected to what is already placed. Vertex candidates are drawn
//! from the host neighbourhood of an already-matched element whenever one
//! exists, which keeps the search close to linear on connected patterns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use crate::graph::{BGraph, ElementId, Label, Sort};
use crate::morphism::GraphMorphism;

/// How element labels constrain a match.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LabelMode {
    /// Kinds must agree; a named pattern element needs an equally named host
    /// element.
    #[default]
    Compatible,
    /// Labels must be identical (used for isomorphism).
    Exact,
    /// Labels are ignored; plain B-graph morphisms.
    Ignore,
}

impl LabelMode {
    fn accepts(self, p: &Label, h: &Label) -> bool {
        match self {
            LabelMode::Compatible => p.matches(h),
            LabelMode::Exact => p == h,
            LabelMode::Ignore => true,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct MatchOptions {
    pub injective: bool,
    pub labels: LabelMode,
    /// Partial assignment every result must extend.
    pub seed: GraphMorphism,
}

impl MatchOptions {
    pub fn injective() -> Self {
        MatchOptions {
            injective: true,
            ..Default::default()
        }
    }

    pub fn non_injective() -> Self {
        Self::default()
    }

    pub fn seeded(mut self, seed: GraphMorphism) -> Self {
        self.seed = seed;
        self
    }
}

/// All morphisms `pattern -> host` with compatible labels, injective when
/// asked, sorted lexicographically by their image vectors.
pub fn find_matches(pattern: &BGraph, host: &BGraph, injective: bool) -> Vec<GraphMorphism> {
    let opts = MatchOptions {
        injective,
        ..Default::default()
    };
    find_matches_with(pattern, host, &opts)
}

pub fn find_matches_with(pattern: &BGraph, host: &BGraph, opts: &MatchOptions) -> Vec<GraphMorphism> {
    let mut out = Vec::new();
    let _ = Search::new(pattern, host, opts).run(&mut |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out.sort_by_cached_key(GraphMorphism::image_key);
    out
}

/// The first match in deterministic order, if any.
pub fn first_match(pattern: &BGraph, host: &BGraph, opts: &MatchOptions) -> Option<GraphMorphism> {
    find_matches_with(pattern, host, opts).into_iter().next()
}

/// Whether any match exists; stops at the first one found.
pub fn has_match(pattern: &BGraph, host: &BGraph, opts: &MatchOptions) -> bool {
    Search::new(pattern, host, opts)
        .run(&mut |_| ControlFlow::Break(()))
        .is_break()
}

/// An isomorphism `a -> b` preserving labels exactly.
pub fn find_isomorphism(a: &BGraph, b: &BGraph) -> Option<GraphMorphism> {
    let same_shape = Sort::ALL.iter().all(|s| a.count(*s) == b.count(*s))
        && a.containment_pairs() == b.containment_pairs();
    if !same_shape {
        return None;
    }
    let opts = MatchOptions {
        injective: true,
        labels: LabelMode::Exact,
        seed: GraphMorphism::new(),
    };
    let mut found = None;
    let _ = Search::new(a, b, &opts).run(&mut |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    found
}

pub fn is_isomorphic(a: &BGraph, b: &BGraph) -> bool {
    find_isomorphism(a, b).is_some()
}

struct Search<'a> {
    pattern: &'a BGraph,
    host: &'a BGraph,
    opts: &'a MatchOptions,
    order: Vec<ElementId>,
    by_ends: HashMap<(ElementId, ElementId), Vec<ElementId>>,
    out_nb: HashMap<ElementId, BTreeSet<ElementId>>,
    in_nb: HashMap<ElementId, BTreeSet<ElementId>>,
    host_by_sort: BTreeMap<Sort, Vec<ElementId>>,
    pattern_containers: HashMap<ElementId, Vec<ElementId>>,
    incident: HashMap<ElementId, Vec<ElementId>>,
    assign: GraphMorphism,
    used: HashMap<ElementId, usize>,
}

impl<'a> Search<'a> {
    fn new(pattern: &'a BGraph, host: &'a BGraph, opts: &'a MatchOptions) -> Self {
        let mut by_ends: HashMap<_, Vec<_>> = HashMap::new();
        let mut out_nb: HashMap<_, BTreeSet<_>> = HashMap::new();
        let mut in_nb: HashMap<_, BTreeSet<_>> = HashMap::new();
        for e in host.edges() {
            let (s, t) = host.ends(e).expect("edge ends");
            by_ends.entry((s, t)).or_default().push(e);
            out_nb.entry(s).or_default().insert(t);
            in_nb.entry(t).or_default().insert(s);
        }
        let mut host_by_sort: BTreeMap<Sort, Vec<ElementId>> = BTreeMap::new();
        for x in host.elements() {
            host_by_sort.entry(x.sort()).or_default().push(x);
        }
        let mut pattern_containers: HashMap<_, Vec<_>> = HashMap::new();
        for (b, inner) in pattern.all_contents() {
            for x in inner {
                pattern_containers.entry(*x).or_default().push(*b);
            }
        }
        let mut incident: HashMap<_, Vec<_>> = HashMap::new();
        for e in pattern.edges() {
            let (s, t) = pattern.ends(e).expect("edge ends");
            incident.entry(s).or_default().push(e);
            if t != s {
                incident.entry(t).or_default().push(e);
            }
        }
        let mut search = Search {
            pattern,
            host,
            opts,
            order: Vec::new(),
            by_ends,
            out_nb,
            in_nb,
            host_by_sort,
            pattern_containers,
            incident,
            assign: GraphMorphism::new(),
            used: HashMap::new(),
        };
        search.order = search.plan();
        search
    }

    fn plan(&self) -> Vec<ElementId> {
        let p = self.pattern;
        let mut placed: BTreeSet<ElementId> = BTreeSet::new();
        let mut order = Vec::with_capacity(p.len());
        let mut vertices: BTreeSet<ElementId> = p.elements().filter(|x| x.is_vertex()).collect();
        let mut edges: BTreeSet<ElementId> = p.edges().collect();
        let seeded: Vec<ElementId> = p
            .elements()
            .filter(|x| x.is_vertex() && self.opts.seed.contains(*x))
            .collect();
        for v in seeded {
            vertices.remove(&v);
            placed.insert(v);
            order.push(v);
        }
        loop {
            let ready = edges.iter().copied().find(|e| {
                let (s, t) = p.ends(*e).expect("edge ends");
                placed.contains(&s) && placed.contains(&t)
            });
            if let Some(e) = ready {
                edges.remove(&e);
                placed.insert(e);
                order.push(e);
                continue;
            }
            let next = vertices.iter().copied().max_by_key(|v| {
                let links = self
                    .incident
                    .get(v)
                    .map_or(0, |es| {
                        es.iter()
                            .filter(|e| {
                                let (s, t) = p.ends(**e).expect("edge ends");
                                placed.contains(&s) || placed.contains(&t)
                            })
                            .count()
                    });
                let named = p.name(*v).is_some();
                let degree = self.incident.get(v).map_or(0, Vec::len);
                (links, named, degree, std::cmp::Reverse(*v))
            });
            match next {
                Some(v) => {
                    vertices.remove(&v);
                    placed.insert(v);
                    order.push(v);
                }
                None => break,
            }
        }
        // edges attached to unplaceable ends (invalid patterns) still get visited
        order.extend(edges);
        order
    }

    fn run(&mut self, emit: &mut dyn FnMut(&GraphMorphism) -> ControlFlow<()>) -> ControlFlow<()> {
        for (x, y) in self.opts.seed.iter() {
            if !self.pattern.contains(x) || !self.host.contains(y) || x.sort() != y.sort() {
                return ControlFlow::Continue(());
            }
        }
        self.step(0, emit)
    }

    fn step(
        &mut self,
        depth: usize,
        emit: &mut dyn FnMut(&GraphMorphism) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(&x) = self.order.get(depth) else {
            return emit(&self.assign);
        };
        for h in self.candidates(x) {
            if !self.feasible(x, h) {
                continue;
            }
            self.assign.insert(x, h);
            *self.used.entry(h).or_default() += 1;
            let flow = self.step(depth + 1, emit);
            self.assign.remove(x);
            *self.used.get_mut(&h).expect("used") -= 1;
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn candidates(&self, x: ElementId) -> Vec<ElementId> {
        if let Some(h) = self.opts.seed.get(x) {
            return vec![h];
        }
        if !x.is_vertex() {
            let (s, t) = self.pattern.ends(x).expect("edge ends");
            let (Some(hs), Some(ht)) = (self.assign.get(s), self.assign.get(t)) else {
                return Vec::new();
            };
            return self.by_ends.get(&(hs, ht)).cloned().unwrap_or_default();
        }
        // neighbourhood of an already matched element
        if let Some(es) = self.incident.get(&x) {
            for e in es {
                let (s, t) = self.pattern.ends(*e).expect("edge ends");
                if s == x && t != x {
                    if let Some(ht) = self.assign.get(t) {
                        let nb = self.in_nb.get(&ht);
                        return nb.map_or_else(Vec::new, |n| n.iter().copied().filter(|h| h.sort() == x.sort()).collect());
                    }
                } else if t == x && s != x {
                    if let Some(hs) = self.assign.get(s) {
                        let nb = self.out_nb.get(&hs);
                        return nb.map_or_else(Vec::new, |n| n.iter().copied().filter(|h| h.sort() == x.sort()).collect());
                    }
                }
            }
        }
        self.host_by_sort.get(&x.sort()).cloned().unwrap_or_default()
    }

    fn feasible(&self, x: ElementId, h: ElementId) -> bool {
        if h.sort() != x.sort() {
            return false;
        }
        let (Some(pl), Some(hl)) = (self.pattern.label(x), self.host.label(h)) else {
            return false;
        };
        if !self.opts.labels.accepts(pl, hl) {
            return false;
        }
        if self.opts.injective && self.used.get(&h).copied().unwrap_or(0) > 0 {
            return false;
        }
        if x.is_vertex() {
            // every pattern edge between x and placed elements must be realisable
            if let Some(es) = self.incident.get(&x) {
                for e in es {
                    let (s, t) = self.pattern.ends(*e).expect("edge ends");
                    let hs = if s == x { Some(h) } else { self.assign.get(s) };
                    let ht = if t == x { Some(h) } else { self.assign.get(t) };
                    if let (Some(hs), Some(ht)) = (hs, ht) {
                        let pel = self.pattern.label(*e).expect("label");
                        let ok = self.by_ends.get(&(hs, ht)).is_some_and(|cands| {
                            cands.iter().any(|c| {
                                self.opts.labels.accepts(pel, self.host.label(*c).expect("label"))
                            })
                        });
                        if !ok {
                            return false;
                        }
                    }
                }
            }
            if x.sort() == Sort::Box {
                if let Some(inner) = self.pattern.contents(x) {
                    let hin = self.host.contents(h);
                    for y in inner {
                        if let Some(hy) = self.assign.get(*y) {
                            if !hin.is_some_and(|c| c.contains(&hy)) {
                                return false;
                            }
                        }
                    }
                }
            }
        } else {
            let (s, t) = self.pattern.ends(x).expect("edge ends");
            let (Some(hs), Some(ht)) = (self.assign.get(s), self.assign.get(t)) else {
                return false;
            };
            if self.host.ends(h) != Some((hs, ht)) {
                return false;
            }
        }
        if let Some(boxes) = self.pattern_containers.get(&x) {
            for b in boxes {
                if let Some(hb) = self.assign.get(*b) {
                    if !self.host.contents(hb).is_some_and(|c| c.contains(&h)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
