//! Pluto loses its planet status. A positive condition restricts the
//! reclassification to bodies that have not cleared their neighbourhood.
//! Chiron carries two unrelated types at once.

use annograph::adapt::{apply_with_repairs, Policy, Strategy};
use annograph::annotation::{ann_type, check_well_formed};
use annograph::corpus;
use annograph::graph::{BGraph, Sort};
use annograph::matching::{find_matches, is_isomorphic};
use annograph::patterns::{check_all, Constraint};
use annograph::rewrite::applicable_matches;

fn types(g: &BGraph, name: &str) -> Vec<String> {
    let x = g.labels().iter().find(|(_, l)| l.name.as_deref() == Some(name)).map(|(x, _)| *x).expect(name);
    ann_type(g, x).into_iter().filter_map(|t| g.name(t).map(str::to_owned)).collect()
}

fn report(g: &BGraph, cs: &[Constraint]) {
    for v in check_all(g, cs) {
        println!("  {}: {}", v.constraint, if v.satisfied { "holds" } else { "fails" });
    }
}

fn main() {
    let g = corpus::solar_system();
    let rule = corpus::from_planet_to_dwarf();
    let cs = vec![corpus::is_planet(), corpus::is_dwarf_planet(), corpus::is_sssb(), corpus::not_typed_twice()];
    println!("before: Earth {:?}, Pluto {:?}", types(&g, "Earth"), types(&g, "Pluto"));
    report(&g, &cs);

    let candidates = find_matches(&rule.rule.lhs, &g, true).len();
    let ms = applicable_matches(&rule.rule, &g, &Default::default());
    println!("{candidates} planets match the rule, {} pass its condition", ms.len());

    let out = apply_with_repairs(&g, &rule, &ms[0], &cs, &Policy::new(Strategy::Post, 8)).expect("adapt");
    println!("{:?} after {} round(s)", out.status, out.rounds.len());
    println!("after: Earth {:?}, Pluto {:?}", types(&out.graph, "Earth"), types(&out.graph, "Pluto"));
    report(&out.graph, &cs);
    println!("equals the reference: {}", is_isomorphic(&out.graph, &corpus::solar_system_post()));

    let chiron = corpus::chiron();
    let x = chiron.instance_named(Sort::Node, "Chiron").expect("Chiron");
    let names: Vec<_> = ann_type(&chiron, x).into_iter().filter_map(|t| chiron.name(t)).collect();
    println!("\nChiron is {names:?}; well formed: {}", check_well_formed(&chiron));
    report(&chiron, &[corpus::not_typed_twice()]);
}
