//! Type bundles along an inheritance chain, and removing a type together
//! with everything below it.

use annograph::annotation::{ann_type, check_well_formed, remove_annotation_at, Removal};
use annograph::corpus;
use annograph::graph::{BGraph, ElementId, Sort};

fn names(g: &BGraph, ids: impl IntoIterator<Item = ElementId>) -> Vec<String> {
    ids.into_iter().map(|t| g.name(t).unwrap_or("?").to_owned()).collect()
}

fn main() {
    let g = corpus::inheritance_chain();
    let x = g.instance_named(Sort::Node, "x").expect("x");
    println!("x has types {:?}; well formed: {}", names(&g, ann_type(&g, x)), check_well_formed(&g));

    let b = g.type_named(Sort::Node, "B").expect("B");
    let (after, removal) = remove_annotation_at(&g, x, b).expect("removable");
    if let Removal::Truncated { removed, kept, .. } = &removal {
        println!("remove B: dropped {:?}, kept {:?}", names(&g, removed.clone()), names(&g, kept.clone()));
    }
    println!("x now has types {:?}", names(&after, ann_type(&after, x)));

    let top = g.type_named(Sort::Node, "Top").expect("Top");
    println!("remove Top: {}", remove_annotation_at(&g, x, top).unwrap_err());

    // Two independent bundles under one top.
    let c = corpus::credentials();
    let dana = c.instance_named(Sort::Node, "Dana").expect("Dana");
    println!("\nDana has types {:?}", names(&c, ann_type(&c, dana)));
    let staff = c.type_named(Sort::Node, "AgencyStaff").expect("AgencyStaff");
    let (c2, _) = remove_annotation_at(&c, dana, staff).expect("removable");
    println!("after removing AgencyStaff: {:?}; well formed: {}", names(&c2, ann_type(&c2, dana)), check_well_formed(&c2));
}
