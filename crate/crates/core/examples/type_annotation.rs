//! From a typed graph to a type-annotated graph and back.

use annograph::annotation::{annotate, check_well_formed};
use annograph::corpus;
use annograph::functor::{extract_typed, type_ann_ob};
use annograph::graph::Sort;

fn main() {
    let t = corpus::persons_typed();
    let img = type_ann_ob(&t).expect("well-typed");
    println!("annotated image:\n{}\n", img.h.graph());
    println!("image check: {}", img.check(&t));

    let back = extract_typed(&img.h).expect("extract");
    println!("extracted {} typed graph(s); isomorphic to the input: {}", back.len(), back[0].is_isomorphic(&t));

    // Every extra plain type doubles the number of typed graphs.
    let g = corpus::bruce_doubly_typed();
    println!("\nBruce annotated Person and Male -> {} typed graphs", extract_typed(&g).expect("extract").len());

    // Annotating twice with the same type is refused, and a graph that
    // does it anyway is not well formed.
    let bruce = g.instance_named(Sort::Node, "Bruce").expect("Bruce");
    let male = g.type_named(Sort::Node, "Male").expect("Male");
    println!("annotate again: {}", annotate(&g, bruce, male).unwrap_err());
    println!("typed-twice fixture: {}", check_well_formed(&corpus::typed_twice()));
}
