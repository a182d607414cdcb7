//! Bruce changes gender while a constraint says every driver is male.
//! Shows the violation, the P-bar graph, the extended rule and the
//! post-repair rule, and runs both policies to the same result.

use annograph::adapt::{
    apply_with_repairs, build_pbar, detect_violations, synthesize_extend_rule, synthesize_post_repair, Policy,
    Strategy,
};
use annograph::corpus;
use annograph::graph::{BGraph, ElementId};
use annograph::matching::is_isomorphic;
use annograph::patterns::classify_constraint_form;
use annograph::rewrite::{apply_rule, applicable_matches};

fn main() {
    let g = corpus::bruce(true);
    let rule = corpus::from_male_to_female();
    let c = corpus::driver_is_male();
    let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);

    for v in detect_violations(&g, &rule, &m, std::slice::from_ref(&c)).expect("applicable") {
        println!("{} broken ({:?})", c.name, v.cause);
    }

    let k = classify_constraint_form(&c).expect("typed");
    let pbar = build_pbar(&c, k.element.expect("first form")).expect("pbar");
    println!("\nP-bar:\n{}\n", pbar.graph);

    let ext = synthesize_extend_rule(&rule, &c, &pbar).expect("extend");
    println!("extended rule {} deletes {}", ext.name, describe(&ext.lhs, ext.deleted()));

    let d = apply_rule(&rule.rule, &g, &m).expect("applicable");
    let post = synthesize_post_repair(&rule, &c, &pbar, &d.comatch);
    println!("post-repair rule {} deletes {}\n", post.rule.name, describe(&post.rule.lhs, post.rule.deleted()));

    let mut results = Vec::new();
    for s in [Strategy::Extend, Strategy::Post] {
        let out = apply_with_repairs(&g, &rule, &m, std::slice::from_ref(&c), &Policy::new(s, 8)).expect("adapt");
        println!("{s:?}: {:?} after {} round(s)", out.status, out.rounds.len());
        results.push(out.graph);
    }
    println!("same result: {}", is_isomorphic(&results[0], &results[1]));
    println!("\nBruce afterwards:\n{}", results[1]);
}

fn describe(g: &BGraph, ids: impl IntoIterator<Item = ElementId>) -> String {
    let parts: Vec<String> = ids.into_iter().map(|x| format!("{x} {}", g.label(x).expect("in graph"))).collect();
    parts.join(", ")
}
