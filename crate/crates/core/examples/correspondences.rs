//! Correspondence graphs between a typed graph and its annotated image, and
//! the composition patterns every element must satisfy.

use annograph::corpus;
use annograph::functor::{ann_type_patterns, build_correspondences, satisfies_ann_type_patterns, type_ann_ob};

fn main() {
    let t = corpus::persons_typed();
    let img = type_ann_ob(&t).expect("well-typed");
    let (tri_type, tri_inst) = build_correspondences(&t, &img).expect("correspondences");
    println!("type correspondence:\n{}\n", tri_type.corr);
    println!("instance correspondence:\n{}\n", tri_inst.corr);
    println!("type triple: {}; instance triple: {}", tri_type.validate(), tri_inst.validate());

    for (i, c) in ann_type_patterns().iter().enumerate() {
        let note = if c.by_analogy { " (by analogy)" } else { "" };
        println!("  {i}: {} on {}{note}", c.name, c.sort);
    }
    let check = satisfies_ann_type_patterns(&t, &img, &tri_type, &tri_inst);
    println!("satisfied: {}; witnesses per sort: {:?}", check.satisfied, check.witnesses_per_sort);
    for w in &check.witnesses {
        println!("  {} by {}", w.element, ann_type_patterns()[w.composition].name);
    }
}
