//! Tree patterns, positive and forbidden constraints, and the form of a
//! typed constraint.

use annograph::corpus;
use annograph::graph::{BGraph, Label};
use annograph::morphism::GraphMorphism;
use annograph::patterns::{check_all, classify_constraint_form, satisfies_pattern, Constraint, Pattern};

fn main() {
    // Somebody knows somebody who knows somebody, as a chain of three graphs.
    let mut g0 = BGraph::new();
    let a = g0.add_node(Label::instance());
    let mut g1 = g0.clone();
    let b = g1.add_node(Label::instance());
    g1.add_edge(Label::named("knows"), a, b);
    let mut g2 = g1.clone();
    let c = g2.add_node(Label::instance());
    g2.add_edge(Label::named("knows"), b, c);
    let p = Pattern::chain(
        vec![g0.clone(), g1.clone(), g2.clone()],
        vec![GraphMorphism::identity(&g0), GraphMorphism::identity(&g1)],
    );

    let mut host = BGraph::new();
    let ann = host.add_node(Label::named("Ann"));
    let bob = host.add_node(Label::named("Bob"));
    let cy = host.add_node(Label::named("Cy"));
    host.add_edge(Label::named("knows"), ann, bob);
    host.add_edge(Label::named("knows"), bob, cy);
    let v = satisfies_pattern(&host, &p);
    println!("chain pattern satisfied: {} ({} collection(s))", v.satisfied, v.collections.len());

    // Everybody who is known knows somebody back; nobody knows themself.
    let mut pre = BGraph::new();
    let x = pre.add_node(Label::instance());
    let y = pre.add_node(Label::instance());
    pre.add_edge(Label::named("knows"), x, y);
    let mut con = pre.clone();
    con.add_edge(Label::named("knows"), y, x);
    let mut lp = BGraph::new();
    let z = lp.add_node(Label::instance());
    lp.add_edge(Label::named("knows"), z, z);
    let cs = vec![Constraint::inclusion("knowsBack", pre, con), Constraint::forbidden("noSelfKnowledge", lp)];
    for v in check_all(&host, &cs) {
        println!("{}: {} ({} witness(es))", v.constraint, v.satisfied, v.witnesses.len());
    }

    println!();
    for c in [corpus::driver_is_male(), corpus::is_planet(), corpus::not_typed_twice()] {
        match classify_constraint_form(&c) {
            Ok(k) => match k.element {
                Some(e) => println!("{} is {} at {e}", c.name, k.form),
                None => println!("{} is {}", c.name, k.form),
            },
            Err(e) => println!("{}: {e}", c.name),
        }
    }
    let (_, _, team) = corpus::team();
    let (_, _, office) = corpus::office();
    for c in [team, office] {
        let k = classify_constraint_form(&c).expect("typed");
        println!("{} is {}", c.name, k.form);
    }
}
