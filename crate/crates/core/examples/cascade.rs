//! Repairs that trigger further repairs: a bounded ping-pong, a missing
//! office created after a promotion, and a team that loses its only leader.

use annograph::adapt::{apply_with_repairs, AdaptOutcome, Policy, RepairStrategy, Strategy};
use annograph::corpus;
use annograph::rewrite::applicable_matches;

fn show(label: &str, out: &AdaptOutcome) {
    let residual: Vec<&str> = out.residual.iter().map(|v| v.constraint.as_str()).collect();
    println!("{label}: {:?} after {} round(s), still failing {residual:?}", out.status, out.rounds.len());
    for e in &out.rounds {
        for a in &e.actions {
            let chosen = a.chosen.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
            println!("  round {}: {} via {chosen} (created {})", e.round, a.rule, a.created.len());
        }
    }
}

fn main() {
    let (g, rule, cs) = corpus::ping_pong();
    let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);
    for budget in [2, 5] {
        let out = apply_with_repairs(&g, &rule, &m, &cs, &Policy::new(Strategy::Post, budget)).expect("adapt");
        show(&format!("ping-pong with budget {budget}"), &out);
    }

    let (g, rule, c) = corpus::office();
    let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);
    for s in [Strategy::Extend, Strategy::Post] {
        let out = apply_with_repairs(&g, &rule, &m, std::slice::from_ref(&c), &Policy::new(s, 8)).expect("adapt");
        show(&format!("office, {s:?}"), &out);
    }

    let (g, rule, c) = corpus::team();
    let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);
    for first in [RepairStrategy::CreateTypedElement, RepairStrategy::BlockNac] {
        let mut policy = Policy::new(Strategy::Post, 8);
        policy.option_order.retain(|s| *s != first);
        policy.option_order.insert(0, first);
        let out = apply_with_repairs(&g, &rule, &m, std::slice::from_ref(&c), &policy).expect("adapt");
        show(&format!("team, preferring {first}"), &out);
    }
}
