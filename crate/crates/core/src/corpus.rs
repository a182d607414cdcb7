//! The case-study fixtures: gender change, astronomical reclassification,
//! credentials, and a few small graphs that exercise each repair form.
//!
//! [`files`] lays them out as JSON documents; `examples/write_corpus.rs`
//! writes that layout to `fixtures/`.

use std::path::PathBuf;

use crate::adapt::TypeChangeRule;
use crate::annotation::{annotate, annotate_with_bundle, attach, TypeAnnotatedGraph, TypeHierarchy};
use crate::functor::TypedGraph;
use crate::graph::{BGraph, ElementId, Label, Sort};
use crate::io::{constraint_doc, graph_doc, rule_doc, typed_graph_doc, Document};
use crate::matching::{find_matches_with, MatchOptions};
use crate::patterns::Constraint;
use crate::rewrite::{apply_rule, Polarity};

fn typed(g: &mut BGraph, x: ElementId, ty: ElementId) {
    attach(g, x, ty);
}

/// Premise `x` plus a type annotation on `x`, as a conclusion.
fn requiring(premise: &BGraph, x: ElementId, ty: &str) -> BGraph {
    let mut c = premise.clone();
    let t = c.add_node(Label::ty(ty));
    typed(&mut c, x, t);
    c
}

/// `x` annotated with `ty`, with `x` unnamed.
fn typed_element(ty: &str) -> (BGraph, ElementId) {
    let mut p = BGraph::new();
    let x = p.add_node(Label::instance());
    let t = p.add_node(Label::ty(ty));
    typed(&mut p, x, t);
    (p, x)
}

/// Bruce, a Male person, optionally with a driving licence.
pub fn bruce(can_drive: bool) -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let bruce = g.add_node(Label::named("Bruce"));
    let male = g.add_node(Label::ty("Male"));
    g.add_node(Label::ty("Female"));
    let boolean = g.add_node(Label::ty("Boolean"));
    let t = g.add_node(Label::named("true"));
    typed(&mut g, bruce, male);
    typed(&mut g, t, boolean);
    if can_drive {
        g.add_edge(Label::named("canDrive"), bruce, t);
    }
    TypeAnnotatedGraph::new(g)
}

pub fn from_male_to_female() -> TypeChangeRule {
    TypeChangeRule::new("FromMaleToFemale", Sort::Node, "Male", "Female").expect("well-formed rule")
}

/// Whoever can drive must be annotated `Male`.
pub fn driver_is_male() -> Constraint {
    let mut p = BGraph::new();
    let x = p.add_node(Label::instance());
    let t = p.add_node(Label::named("true"));
    p.add_edge(Label::named("canDrive"), x, t);
    let c = requiring(&p, x, "Male");
    Constraint::inclusion("DriverIsMale", p, c)
}

fn body(g: &mut BGraph, name: &str, sun: ElementId, t: ElementId, f: ElementId, hydro: bool, cleared: bool) -> ElementId {
    let x = g.add_node(Label::named(name));
    g.add_edge(Label::named("orbits"), x, sun);
    g.add_edge(Label::named("hydrostaticEquilibrium"), x, if hydro { t } else { f });
    g.add_edge(Label::named("clearedNeighbourhood"), x, if cleared { t } else { f });
    x
}

/// The Sun with Earth and Pluto, both still classified as planets.
pub fn solar_system() -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let sun = g.add_node(Label::named("Sun"));
    let t = g.add_node(Label::named("true"));
    let f = g.add_node(Label::named("false"));
    let planet = g.add_node(Label::ty("Planet"));
    g.add_node(Label::ty("DwarfPlanet"));
    g.add_node(Label::ty("SSSB"));
    let earth = body(&mut g, "Earth", sun, t, f, true, true);
    let pluto = body(&mut g, "Pluto", sun, t, f, true, false);
    typed(&mut g, earth, planet);
    typed(&mut g, pluto, planet);
    TypeAnnotatedGraph::new(g)
}

/// Changes `Planet` to `DwarfPlanet` for bodies that have not cleared their
/// neighbourhood.
pub fn from_planet_to_dwarf() -> TypeChangeRule {
    let base = TypeChangeRule::new("fromPlanetToDwarf", Sort::Node, "Planet", "DwarfPlanet").expect("rule");
    let mut pac = base.rule.lhs.clone();
    let f = pac.add_node(Label::named("false"));
    pac.add_edge(Label::named("clearedNeighbourhood"), base.element, f);
    TypeChangeRule::from_rule(base.rule.with_condition(Polarity::Positive, pac)).expect("rule")
}

/// The solar system after reclassifying Pluto.
pub fn solar_system_post() -> TypeAnnotatedGraph {
    let g = solar_system();
    let r = from_planet_to_dwarf();
    let m = find_matches_with(&r.rule.lhs, &g, &MatchOptions::injective())
        .into_iter()
        .find(|m| apply_rule(&r.rule, &g, m).is_ok())
        .expect("Pluto matches");
    g.replace_graph(apply_rule(&r.rule, &g, &m).expect("applicable").graph)
}

fn criteria(name: &str, hydro: bool, cleared: Option<bool>, ty: &str) -> Constraint {
    let mut p = BGraph::new();
    let x = p.add_node(Label::instance());
    let sun = p.add_node(Label::named("Sun"));
    p.add_edge(Label::named("orbits"), x, sun);
    let v = |b: bool| if b { "true" } else { "false" };
    let h = p.add_node(Label::named(v(hydro)));
    p.add_edge(Label::named("hydrostaticEquilibrium"), x, h);
    if let Some(c) = cleared {
        let target = if c == hydro { h } else { p.add_node(Label::named(v(c))) };
        p.add_edge(Label::named("clearedNeighbourhood"), x, target);
    }
    let c = requiring(&p, x, ty);
    Constraint::inclusion(name, p, c)
}

pub fn is_planet() -> Constraint {
    criteria("isPlanet", true, Some(true), "Planet")
}

pub fn is_dwarf_planet() -> Constraint {
    criteria("isDwarfPlanet", true, Some(false), "DwarfPlanet")
}

pub fn is_sssb() -> Constraint {
    criteria("isSSSB", false, None, "SSSB")
}

/// No element is annotated twice with the same type.
pub fn not_typed_twice() -> Constraint {
    let mut g = BGraph::new();
    let x = g.add_node(Label::instance());
    let t = g.add_node(Label::new(crate::graph::Kind::Type, None));
    typed(&mut g, x, t);
    typed(&mut g, x, t);
    Constraint::forbidden("notTypedTwice", g).injective()
}

/// Chiron, classified both as a minor planet and as a comet.
pub fn chiron() -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let chiron = g.add_node(Label::named("Chiron"));
    let sun = g.add_node(Label::named("Sun"));
    g.add_edge(Label::named("orbits"), chiron, sun);
    let minor = g.add_node(Label::ty("MinorPlanet"));
    let comet = g.add_node(Label::ty("Comet"));
    typed(&mut g, chiron, minor);
    typed(&mut g, chiron, comet);
    TypeAnnotatedGraph::new(g)
}

/// An element annotated twice with the same type.
pub fn typed_twice() -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let x = g.add_node(Label::named("Bruce"));
    let t = g.add_node(Label::ty("Male"));
    typed(&mut g, x, t);
    typed(&mut g, x, t);
    TypeAnnotatedGraph::new(g)
}

/// `A <= B <= C <= Top` and one element annotated with the full chain.
pub fn inheritance_chain() -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let x = g.add_node(Label::named("x"));
    let top = g.add_node(Label::ty("Top"));
    let c = g.add_node(Label::ty("C"));
    let b = g.add_node(Label::ty("B"));
    let a = g.add_node(Label::ty("A"));
    let h = TypeHierarchy::new().with_top(top).with_parent(c, top).with_parent(b, c).with_parent(a, b);
    annotate_with_bundle(&TypeAnnotatedGraph::new(g), x, &h, a).expect("bundle")
}

/// A subject holding agency and arbitration credentials, each as its own
/// bundle under a common top.
pub fn credentials() -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let dana = g.add_node(Label::named("Dana"));
    let top = g.add_node(Label::ty("Credential"));
    let staff = g.add_node(Label::ty("AgencyStaff"));
    let manager = g.add_node(Label::ty("AgencyManager"));
    let arbitrator = g.add_node(Label::ty("Arbitrator"));
    let h = TypeHierarchy::new()
        .with_top(top)
        .with_parent(staff, top)
        .with_parent(manager, staff)
        .with_parent(arbitrator, top);
    let g = annotate_with_bundle(&TypeAnnotatedGraph::new(g), dana, &h, manager).expect("bundle");
    annotate_with_bundle(&g, dana, &h, arbitrator).expect("bundle")
}

/// Two second-form constraints that keep asking for each other:
/// every `A` needs a `next` `B` and every `B` needs a `next` `A`.
pub fn ping_pong() -> (TypeAnnotatedGraph, TypeChangeRule, Vec<Constraint>) {
    let mut g = BGraph::new();
    let n = g.add_node(Label::named("n"));
    g.add_node(Label::ty("A"));
    g.add_node(Label::ty("B"));
    let c = g.add_node(Label::ty("C"));
    typed(&mut g, n, c);
    let rule = TypeChangeRule::new("fromCToA", Sort::Node, "C", "A").expect("rule");
    let needs = |name: &str, from: &str, to: &str| {
        let (p, x) = typed_element(from);
        let mut c = p.clone();
        let y = c.add_node(Label::instance());
        c.add_edge(Label::named("next"), x, y);
        let t = c.add_node(Label::ty(to));
        typed(&mut c, y, t);
        Constraint::inclusion(name, p, c)
    };
    (TypeAnnotatedGraph::new(g), rule, vec![needs("AneedsB", "A", "B"), needs("BneedsA", "B", "A")])
}

/// A contractor becoming an employee must get an office.
pub fn office() -> (TypeAnnotatedGraph, TypeChangeRule, Constraint) {
    let mut g = BGraph::new();
    let sam = g.add_node(Label::named("Sam"));
    let contractor = g.add_node(Label::ty("Contractor"));
    g.add_node(Label::ty("Employee"));
    typed(&mut g, sam, contractor);
    let rule = TypeChangeRule::new("hire", Sort::Node, "Contractor", "Employee").expect("rule");
    let (p, x) = typed_element("Employee");
    let mut c = p.clone();
    let o = c.add_node(Label::instance());
    c.add_edge(Label::named("worksIn"), x, o);
    (TypeAnnotatedGraph::new(g), rule, Constraint::inclusion("EmployeeHasOffice", p, c))
}

/// A team with a single leader; demoting the leader removes the only
/// witness of `TeamHasLeader`.
pub fn team() -> (TypeAnnotatedGraph, TypeChangeRule, Constraint) {
    let mut g = BGraph::new();
    let team = g.add_node(Label::named("Core"));
    let lee = g.add_node(Label::named("Lee"));
    g.add_edge(Label::named("has"), team, lee);
    let team_t = g.add_node(Label::ty("Team"));
    let leader = g.add_node(Label::ty("Leader"));
    g.add_node(Label::ty("Member"));
    typed(&mut g, team, team_t);
    typed(&mut g, lee, leader);
    let rule = TypeChangeRule::new("demote", Sort::Node, "Leader", "Member").expect("rule");
    let (p, x) = typed_element("Team");
    let mut c = p.clone();
    let y = c.add_node(Label::instance());
    c.add_edge(Label::named("has"), x, y);
    let t = c.add_node(Label::ty("Leader"));
    typed(&mut c, y, t);
    (TypeAnnotatedGraph::new(g), rule, Constraint::inclusion("TeamHasLeader", p, c))
}

/// Two people who know each other, typed by a type graph.
pub fn persons_typed() -> TypedGraph {
    let mut tg = BGraph::new();
    let person = tg.add_node(Label::ty("Person"));
    let knows = tg.add_edge(Label::ty("knows"), person, person);
    let mut g = BGraph::new();
    let bruce = g.add_node(Label::named("Bruce"));
    let ann = g.add_node(Label::named("Ann"));
    let e = g.add_edge(Label::named("knows"), bruce, ann);
    TypedGraph::new(g, tg, [(bruce, person), (ann, person), (e, knows)].into_iter().collect())
}

/// A graph where Bruce is annotated `Person` and additionally `Male`: two
/// extraction choices.
pub fn bruce_doubly_typed() -> TypeAnnotatedGraph {
    let mut g = BGraph::new();
    let bruce = g.add_node(Label::named("Bruce"));
    let person = g.add_node(Label::ty("Person"));
    let male = g.add_node(Label::ty("Male"));
    let g = annotate(&TypeAnnotatedGraph::new(g), bruce, person).expect("annotate");
    annotate(&g, bruce, male).expect("annotate")
}

/// The fixture files, relative to the fixture root.
pub fn files() -> Vec<(PathBuf, Vec<Document>)> {
    let g = |name: &str, t: &TypeAnnotatedGraph| graph_doc(name, t);
    let r = |t: &TypeChangeRule| rule_doc(&t.rule, true);
    let c = constraint_doc;
    let (pp_graph, pp_rule, pp_cs) = ping_pong();
    let (office_g, office_r, office_c) = office();
    let (team_g, team_r, team_c) = team();
    let mut out = vec![
        ("driver/bruce.json", vec![g("bruce", &bruce(true))]),
        ("driver/bruce-no-license.json", vec![g("bruce-no-license", &bruce(false))]),
        ("driver/FromMaleToFemale.json", vec![r(&from_male_to_female())]),
        ("driver/DriverIsMale.json", vec![c(&driver_is_male())]),
        (
            "driver/driver.json",
            vec![g("bruce", &bruce(true)), r(&from_male_to_female()), c(&driver_is_male())],
        ),
        ("planets/pluto.json", vec![g("pluto", &solar_system())]),
        ("planets/pluto-post.json", vec![g("pluto-post", &solar_system_post())]),
        ("planets/fromPlanetToDwarf.json", vec![r(&from_planet_to_dwarf())]),
        ("planets/isPlanet.json", vec![c(&is_planet())]),
        ("planets/isDwarfPlanet.json", vec![c(&is_dwarf_planet())]),
        ("planets/isSSSB.json", vec![c(&is_sssb())]),
        ("planets/classification.json", vec![c(&is_planet()), c(&is_dwarf_planet()), c(&is_sssb())]),
        ("planets/chiron.json", vec![g("chiron", &chiron())]),
        ("planets/notTypedTwice.json", vec![c(&not_typed_twice())]),
        ("credentials/credentials.json", vec![g("credentials", &credentials())]),
        ("credentials/chain.json", vec![g("chain", &inheritance_chain())]),
        (
            "cascade/ping-pong.json",
            std::iter::once(g("ping-pong", &pp_graph))
                .chain(std::iter::once(r(&pp_rule)))
                .chain(pp_cs.iter().map(c))
                .collect(),
        ),
        ("cascade/office.json", vec![g("office", &office_g), r(&office_r), c(&office_c)]),
        ("cascade/team.json", vec![g("team", &team_g), r(&team_r), c(&team_c)]),
        ("typing/persons-typed.json", vec![typed_graph_doc("persons-typed", &persons_typed())]),
        ("typing/bruce-doubly-typed.json", vec![g("bruce-doubly-typed", &bruce_doubly_typed())]),
        ("typing/typed-twice.json", vec![g("typed-twice", &typed_twice())]),
    ];
    out.sort_by(|a, b| a.0.cmp(b.0));
    out.into_iter().map(|(p, d)| (PathBuf::from(p), d)).collect()
}
