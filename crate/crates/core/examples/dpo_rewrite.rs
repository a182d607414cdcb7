//! Double-pushout rewriting with a negative application condition, and the
//! gluing condition refusing a rule that would leave a dangling edge.

use annograph::graph::{BGraph, ElementId, Label};
use annograph::matching::find_matches;
use annograph::rewrite::{apply_rule, applicable_matches, Polarity, Rule};

fn main() {
    // Ann knows Bob; Bob knows Cy.
    let mut host = BGraph::new();
    let ann = host.add_node(Label::named("Ann"));
    let bob = host.add_node(Label::named("Bob"));
    let cy = host.add_node(Label::named("Cy"));
    host.add_edge(Label::named("knows"), ann, bob);
    host.add_edge(Label::named("knows"), bob, cy);
    println!("host:\n{host}\n");

    // Replace `x knows y` by `x met y`, unless y already knows someone.
    let mut lhs = BGraph::new();
    let x = lhs.add_node(Label::instance());
    let y = lhs.add_node(Label::instance());
    lhs.add_edge(Label::named("knows"), x, y);
    let mut interface = BGraph::new();
    interface.insert(x, Label::instance());
    interface.insert(y, Label::instance());
    let mut rhs = interface.clone();
    rhs.add_edge(Label::named("met"), x, y);
    let mut nac = lhs.clone();
    let z = nac.add_node(Label::instance());
    nac.add_edge(Label::named("knows"), y, z);
    let rule = Rule::from_graphs("knowsToMet", lhs.clone(), interface, rhs).with_condition(Polarity::Negative, nac);
    assert!(rule.validate().is_empty(), "{}", rule.validate());

    let all = find_matches(&lhs, &host, true);
    let ok = applicable_matches(&rule, &host, &Default::default());
    println!("{} matches, {} pass the condition", all.len(), ok.len());
    let d = apply_rule(&rule, &host, &ok[0]).expect("applicable");
    println!("deleted {}, created {}\nresult:\n{}\n", list(&d.deleted), list(&d.created), d.graph);

    // Deleting a node that still has edges is refused.
    let mut lhs = BGraph::new();
    lhs.add_node(Label::named("Bob"));
    let rule = Rule::from_graphs("dropBob", lhs.clone(), BGraph::new(), BGraph::new());
    let m = &find_matches(&lhs, &host, true)[0];
    match apply_rule(&rule, &host, m) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("dropBob: {e}"),
    }
}

fn list(ids: &[ElementId]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}
