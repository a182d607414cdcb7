//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use annograph::adapt::{apply_with_repairs, detect_violations, Policy, Status, Strategy};
use annograph::annotation::{
    ann_type, annotate, bundles_of, check_type_correctness, check_well_formed, remove_annotation_at, TypeAnnotatedGraph,
};
use annograph::corpus;
use annograph::functor::{
    build_correspondences, extract_typed, satisfies_ann_type_patterns, type_ann_hom, type_ann_ob,
    type_annotation_preserving,
};
use annograph::graph::{BGraph, ElementId, Sort};
use annograph::io::{read_documents, render_documents, Workspace};
use annograph::matching::{find_matches, find_matches_with, is_isomorphic, MatchOptions};
use annograph::patterns::{check_constraint, satisfies_pattern, Pattern, PatternLink};
use annograph::morphism::GraphMorphism;
use annograph::rewrite::{apply_rule, applicable_matches};
use common::*;
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn annotated_image_suite() -> Outcome {
    let start = Instant::now();
    let n = 500;
    for seed in 0..n {
        let mut r = rng(1_000_000 + seed);
        let t = random_typed_graph(&mut r, 8, seed % 2 == 0);
        ensure(t.validate().is_empty(), || format!("seed {seed}: generator produced {}", t.validate()))?;
        let img = type_ann_ob(&t).map_err(|e| format!("seed {seed}: {e}"))?;
        let wf = check_well_formed(&img.h);
        ensure(wf.is_empty(), || format!("seed {seed}: {wf}"))?;
        let tc = check_type_correctness(img.h.graph());
        ensure(tc.is_empty(), || format!("seed {seed}: {tc}"))?;
        let ck = img.check(&t);
        ensure(ck.is_empty(), || format!("seed {seed}: {ck}"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("{n} typed graphs in {took:.2?}"))
}

fn morphism_suite() -> Outcome {
    let mut checked = 0;
    let mut non_injective = 0;
    let mut seed = 0;
    while checked < 200 {
        seed += 1;
        let mut r = rng(2_000_000 + seed);
        let src = random_typed_graph(&mut r, 5, true);
        let dst = grow(&mut r, src.clone(), 8, true);
        let ms = find_matches(&src.flattened(), &dst.flattened(), false);
        ensure(!ms.is_empty(), || format!("seed {seed}: the inclusion is missing"))?;
        let (img_src, img_dst) = (type_ann_ob(&src).unwrap(), type_ann_ob(&dst).unwrap());
        for m in ms.choose_multiple(&mut r, 2) {
            let h = type_ann_hom(m, &src, &dst, &img_src, &img_dst).map_err(|e| format!("seed {seed}: {e}"))?;
            let rep = type_annotation_preserving(img_src.h.graph(), img_dst.h.graph(), &h);
            ensure(rep.is_empty(), || format!("seed {seed}: {rep}"))?;
            checked += 1;
            non_injective += usize::from(!m.is_injective());
        }
    }
    Ok(format!("{checked} morphisms ({non_injective} non-injective)"))
}

fn round_trip_suite() -> Outcome {
    for seed in 0..100 {
        let mut r = rng(3_000_000 + seed);
        let t = random_typed_graph(&mut r, 8, false);
        let back = extract_typed(&type_ann_ob(&t).unwrap().h).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back.len() == 1 && back[0].is_isomorphic(&t), || format!("seed {seed}: {} results", back.len()))?;
    }
    let mut cases = 0;
    let mut seed = 0;
    for k in 0..=4u32 {
        let mut done = 0;
        while done < 10 {
            seed += 1;
            let mut r = rng(3_100_000 + seed);
            let t = random_typed_graph(&mut r, 8, false);
            // a second type at an end of an edge whose type other edges share
            // breaks edge consistency, so those nodes are not candidates
            let shared = |e: ElementId| t.instance.edges().filter(|f| t.typing.get(*f) == t.typing.get(e)).count() > 1;
            let nodes: Vec<ElementId> =
                t.instance.nodes().filter(|x| !t.instance.incident_edges(*x).into_iter().any(shared)).collect();
            if nodes.len() < k as usize {
                continue;
            }
            let img = type_ann_ob(&t).unwrap();
            let mut h = img.h.clone();
            for x in nodes.choose_multiple(&mut r, k as usize) {
                let own = t.typing.at(*x);
                let others: Vec<ElementId> = t.type_graph.nodes().filter(|y| *y != own).collect();
                let extra = img.ft.at(*others.choose(&mut r).unwrap());
                h = annotate(&h, img.fg.at(*x), extra).map_err(|e| format!("seed {seed}: {e}"))?;
            }
            let n = extract_typed(&h).map_err(|e| format!("seed {seed}: {e}"))?.len();
            ensure(n == 1 << k, || format!("seed {seed}: k={k} gave {n}"))?;
            done += 1;
            cases += 1;
        }
    }
    Ok(format!("100 singly typed round trips, {cases} doubly annotated inputs with k <= 4"))
}

fn correspondence_suite() -> Outcome {
    let n = 200;
    let mut witnesses = 0;
    for seed in 0..n {
        let mut r = rng(4_000_000 + seed);
        let t = random_typed_graph(&mut r, 8, seed % 2 == 1);
        let img = type_ann_ob(&t).unwrap();
        let (tt, ti) = build_correspondences(&t, &img).map_err(|e| format!("seed {seed}: {e}"))?;
        let check = satisfies_ann_type_patterns(&t, &img, &tt, &ti);
        ensure(check.satisfied, || format!("seed {seed}: fails at {:?}", check.failing))?;
        for sort in [Sort::Node, Sort::Edge, Sort::Box] {
            let got = check.witnesses_per_sort.get(&sort).copied().unwrap_or(0);
            let want = t.instance.count(sort);
            ensure(got == want, || format!("seed {seed}: {got} {sort} witnesses for {want} elements"))?;
        }
        witnesses += check.witnesses.len();
    }
    Ok(format!("{n} pipelines, {witnesses} witnesses"))
}

fn oracle_suite() -> Outcome {
    let mut pairs = 0;
    for seed in 0..1000 {
        let mut r = rng(5_000_000 + seed);
        let host = random_bgraph(&mut r, 8);
        let p = random_pattern(&mut r, &host, 5);
        for inj in [true, false] {
            let ours: BTreeSet<_> = find_matches(&p, &host, inj).iter().map(as_pairs).collect();
            ensure(ours == brute_force_matches(&p, &host, inj), || format!("match seed {seed}"))?;
        }
        pairs += 1;
    }
    for seed in 0..300 {
        let mut r = rng(5_100_000 + seed);
        let host = random_bgraph(&mut r, 7);
        let g1 = random_subgraph(&mut r, &host, 5);
        let g0 = random_subgraph(&mut r, &g1, 3);
        let p = Pattern {
            graphs: vec![g0.clone(), g1],
            links: vec![PatternLink { parent: 0, child: 1, morphism: GraphMorphism::identity(&g0) }],
            injective: r.gen_bool(0.5),
        };
        let ours: BTreeSet<_> =
            satisfies_pattern(&host, &p).collections.iter().map(|c| c.iter().map(as_pairs).collect::<Vec<_>>()).collect();
        ensure(ours == brute_force_collections(&host, &p), || format!("pattern seed {seed}"))?;
        pairs += 1;
    }
    Ok(format!("{pairs} (pattern, host) pairs"))
}

fn driver_scenario() -> Outcome {
    let g = corpus::bruce(true);
    let rule = corpus::from_male_to_female();
    let c = corpus::driver_is_male();
    let cs = std::slice::from_ref(&c);
    ensure(check_constraint(&g, &c).satisfied, || "DriverIsMale fails before the change".into())?;
    let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);
    let plain = apply_rule(&rule.rule, &g, &m).map_err(|e| e.to_string())?;
    ensure(!check_constraint(&plain.graph, &c).satisfied, || "the change does not violate DriverIsMale".into())?;
    ensure(!detect_violations(&g, &rule, &m, cs).map_err(|e| e.to_string())?.is_empty(), || "no violation detected".into())?;

    let mut results = Vec::new();
    for s in [Strategy::Extend, Strategy::Post] {
        let out = apply_with_repairs(&g, &rule, &m, cs, &Policy::new(s, 8)).map_err(|e| e.to_string())?;
        ensure(out.status == Status::Converged, || format!("{s:?}: {:?}", out.status))?;
        ensure(check_constraint(&out.graph, &c).satisfied, || format!("{s:?}: DriverIsMale still fails"))?;
        results.push(out.graph);
    }
    ensure(is_isomorphic(&results[0], &results[1]), || "strategies disagree".into())?;
    let post = &results[1];
    let can_drive: Vec<ElementId> = plain.graph.edges().filter(|e| plain.graph.name(*e) == Some("canDrive")).collect();
    ensure(can_drive.len() == 1, || "fixture must have one canDrive edge".into())?;
    let expected: BTreeSet<ElementId> = plain.graph.elements().filter(|x| *x != can_drive[0]).collect();
    let got: BTreeSet<ElementId> = post.elements().collect();
    ensure(got == expected && post.is_subgraph_of(&plain.graph), || "post-repair changed more than canDrive".into())?;
    Ok("violation found, both strategies converge to isomorphic graphs, only canDrive removed".into())
}

fn planet_scenario() -> Outcome {
    let g = corpus::solar_system();
    let pluto = g.instance_named(Sort::Node, "Pluto").unwrap();
    let is_planet = corpus::is_planet();
    let premise_at_pluto = find_matches_with(is_planet.premise(), &g, &MatchOptions::non_injective())
        .iter()
        .any(|m| m.image().contains(&pluto));
    ensure(!premise_at_pluto, || "Pluto meets the planet criteria".into())?;

    let rule = corpus::from_planet_to_dwarf();
    let cs = vec![is_planet, corpus::is_dwarf_planet(), corpus::is_sssb(), corpus::not_typed_twice()];
    let m = applicable_matches(&rule.rule, &g, &Default::default());
    ensure(m.len() == 1, || format!("{} applicable matches", m.len()))?;
    let out = apply_with_repairs(&g, &rule, &m[0], &cs, &Policy::new(Strategy::Post, 8)).map_err(|e| e.to_string())?;
    let after = TypeAnnotatedGraph::new(out.graph.clone());
    ensure(check_constraint(&after, &cs[1]).satisfied, || "isDwarfPlanet fails".into())?;
    let wf = check_well_formed(&after);
    ensure(wf.is_empty(), || wf.to_string())?;

    let chiron = corpus::chiron();
    let x = chiron.instance_named(Sort::Node, "Chiron").unwrap();
    ensure(check_constraint(&chiron, &corpus::not_typed_twice()).satisfied, || "Chiron fails notTypedTwice".into())?;
    ensure(ann_type(&chiron, x).len() == 2, || "Chiron needs two types".into())?;
    Ok("Pluto not a planet, reclassified dwarf planet, Chiron dual-typed".into())
}

fn upward_closed(g: &TypeAnnotatedGraph) -> bool {
    let Some(h) = g.hierarchy() else { return true };
    g.graph().elements().all(|x| {
        bundles_of(g, x).iter().all(|a| {
            let inside = g.contents(a.value).cloned().unwrap_or_default();
            inside.iter().all(|t| h.parent(*t).is_none_or(|p| inside.contains(&p)))
        })
    })
}

fn inheritance() -> Outcome {
    let g = corpus::inheritance_chain();
    let x = g.instance_named(Sort::Node, "x").unwrap();
    let names = |g: &BGraph, ts: BTreeSet<ElementId>| -> BTreeSet<String> {
        ts.into_iter().filter_map(|t| g.name(t).map(str::to_owned)).collect()
    };
    let b = g.type_named(Sort::Node, "B").unwrap();
    let (after, _) = remove_annotation_at(&g, x, b).map_err(|e| e.to_string())?;
    let want: BTreeSet<String> = ["C", "Top"].map(String::from).into();
    ensure(names(&after, ann_type(&after, x)) == want, || format!("{:?}", names(&after, ann_type(&after, x))))?;
    let bundles = bundles_of(&after, x);
    ensure(bundles.len() == 1, || "one bundle expected".into())?;
    let inside = after.contents(bundles[0].value).cloned().unwrap_or_default();
    ensure(names(&after, inside) == want, || "bundle contents differ".into())?;
    let top = g.type_named(Sort::Node, "Top").unwrap();
    ensure(remove_annotation_at(&g, x, top).is_err(), || "removing the top was allowed".into())?;
    let fixtures = [g.clone(), after, corpus::credentials()];
    ensure(fixtures.iter().all(upward_closed), || "a bundle is not upward closed".into())?;
    Ok("remove at B keeps {C, Top}; top removal refused; bundles upward closed".into())
}

fn cascade_control() -> Outcome {
    let (g, rule, cs) = corpus::ping_pong();
    let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);
    let out = apply_with_repairs(&g, &rule, &m, &cs, &Policy::new(Strategy::Post, 2)).map_err(|e| e.to_string())?;
    ensure(out.status == Status::Unconverged && out.rounds.len() == 2, || {
        format!("{:?} after {} rounds", out.status, out.rounds.len())
    })?;
    let driver = (corpus::bruce(true), corpus::from_male_to_female(), vec![corpus::driver_is_male()]);
    let planets = (
        corpus::solar_system(),
        corpus::from_planet_to_dwarf(),
        vec![corpus::is_planet(), corpus::is_dwarf_planet(), corpus::is_sssb(), corpus::not_typed_twice()],
    );
    for (name, (g, rule, cs)) in [("driver", driver), ("planets", planets)] {
        let m = applicable_matches(&rule.rule, &g, &Default::default()).remove(0);
        for s in [Strategy::Extend, Strategy::Post] {
            let out = apply_with_repairs(&g, &rule, &m, &cs, &Policy::new(s, 8)).map_err(|e| e.to_string())?;
            ensure(out.status == Status::Converged && out.rounds.len() <= 1, || {
                format!("{name} {s:?}: {:?} after {} rounds", out.status, out.rounds.len())
            })?;
        }
    }
    Ok("ping-pong unconverged after exactly 2 rounds; driver and planets converge within 1".into())
}

fn fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn serialization() -> Outcome {
    let root = fixture_root();
    let files = corpus::files();
    for (rel, docs) in &files {
        let path = root.join(rel);
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(text == render_documents(docs), || format!("{} is stale", rel.display()))?;
        let parsed = read_documents(&path).map_err(|e| e.to_string())?;
        ensure(render_documents(&parsed) == text, || format!("{} is not canonical", rel.display()))?;
        let ws = Workspace::load(&path).map_err(|e| e.to_string())?;
        let mut a: Vec<String> = ws.documents().iter().map(|d| render_documents(std::slice::from_ref(d))).collect();
        let mut b: Vec<String> = parsed.iter().map(|d| render_documents(std::slice::from_ref(d))).collect();
        a.sort();
        b.sort();
        ensure(a == b, || format!("{}: load changes the artifacts", rel.display()))?;
    }
    let ws = Workspace::load(&root).map_err(|e| e.to_string())?;
    let tmp = std::env::temp_dir().join(format!("annograph-acceptance-{}", std::process::id()));
    let written = ws.save(&tmp).map_err(|e| e.to_string())?;
    let again = Workspace::load(&tmp).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&tmp);
    ensure(again.documents() == ws.documents(), || "save then load differs".into())?;

    let cli = cli_matrix()?;
    Ok(format!("{} fixture files canonical, {} artifacts round trip, {cli}", files.len(), written.len()))
}

fn cli_matrix() -> Outcome {
    let f = |p: &str| fixture_root().join(p).display().to_string();
    let ws = fixture_root().display().to_string();
    let bad = std::env::temp_dir().join(format!("annograph-bad-{}.json", std::process::id()));
    std::fs::write(&bad, "{\"kind\": \"graph\",\n \"name\": 3}").map_err(|e| e.to_string())?;
    let bad = bad.display().to_string();
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["validate".into(), f("driver/bruce.json")], 0),
        (vec!["validate".into(), f("typing/typed-twice.json")], 1),
        (vec!["validate".into(), "nosuch".into()], 2),
        (vec!["validate".into(), bad.clone()], 2),
        (vec!["check".into(), f("driver/bruce.json"), f("driver/DriverIsMale.json")], 0),
        (vec!["check".into(), f("planets/pluto.json"), f("planets/isDwarfPlanet.json")], 1),
        (vec!["--workspace".into(), ws.clone(), "check".into(), "pluto-post".into(), "isDwarfPlanet".into()], 0),
        (vec!["match".into(), f("driver/DriverIsMale.json"), f("driver/bruce.json")], 0),
        (vec!["match".into(), f("driver/DriverIsMale.json"), f("driver/bruce-no-license.json")], 1),
        (vec!["apply".into(), f("driver/FromMaleToFemale.json"), f("driver/bruce.json")], 0),
        (vec!["apply".into(), f("driver/FromMaleToFemale.json"), f("planets/pluto.json")], 1),
        (vec!["typeann".into(), f("typing/persons-typed.json")], 0),
        (vec!["extract".into(), f("typing/bruce-doubly-typed.json")], 0),
        (vec!["triple-check".into(), f("typing/persons-typed.json")], 0),
        (vec!["triple-check".into(), f("driver/bruce.json")], 2),
        (
            vec!["--workspace".into(), ws.clone(), "adapt".into(), "FromMaleToFemale".into(), "bruce".into(),
                 "--constraints".into(), "DriverIsMale".into(), "--policy".into(), "extend".into()],
            0,
        ),
        (
            vec!["--workspace".into(), ws.clone(), "adapt".into(), "fromCToA".into(), "ping-pong".into(),
                 "--constraints".into(), "AneedsB".into(), "BneedsA".into(), "--max-cascade".into(), "2".into()],
            1,
        ),
        (
            vec!["--workspace".into(), ws.clone(), "adapt".into(), "FromMaleToFemale".into(), "bruce".into(),
                 "--constraints".into(), "DriverIsMale".into(), "--policy".into(), "sideways".into()],
            2,
        ),
        (vec!["frobnicate".into()], 2),
    ];
    let exe = env!("CARGO_BIN_EXE_annograph");
    let mut codes = BTreeMap::new();
    for (args, want) in &cases {
        let out = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        let got = out.status.code().unwrap_or(-1);
        ensure(got == *want, || {
            format!("`annograph {}` exited {got}, expected {want}: {}", args.join(" "), String::from_utf8_lossy(&out.stdout))
        })?;
        // argument errors come from the parser as plain usage text
        let usage_error = args.iter().any(|a| a == "frobnicate" || a == "sideways");
        let json: Result<serde_json::Value, _> = serde_json::from_slice(&out.stdout);
        ensure(usage_error || json.is_ok(), || format!("`{}` printed non-JSON", args.join(" ")))?;
        *codes.entry(want).or_insert(0) += 1;
    }
    let _ = std::fs::remove_file(&bad);
    Ok(format!("{} CLI invocations with expected exit codes {codes:?}", cases.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("annotated image well formed", annotated_image_suite),
        ("morphism image preserves type annotations", morphism_suite),
        ("extraction round trip", round_trip_suite),
        ("correspondence compositions", correspondence_suite),
        ("match and pattern oracles", oracle_suite),
        ("driver scenario", driver_scenario),
        ("planet scenario", planet_scenario),
        ("inheritance", inheritance),
        ("cascade control", cascade_control),
        ("serialization and CLI", serialization),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
