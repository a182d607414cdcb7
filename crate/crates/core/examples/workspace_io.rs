//! Loads the fixture directory, lists what it holds and writes it back out.
//!
//! `cargo run --example workspace_io [DIR]`

use std::path::PathBuf;

use annograph::io::Workspace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let ws = Workspace::load(&dir)?;
    println!("graphs: {:?}", ws.graphs.keys().collect::<Vec<_>>());
    println!("typed graphs: {:?}", ws.typed_graphs.keys().collect::<Vec<_>>());
    println!("rules: {:?}", ws.rules.keys().collect::<Vec<_>>());
    println!("constraints: {:?}", ws.constraints.iter().map(|c| &c.name).collect::<Vec<_>>());

    let out = std::env::temp_dir().join(format!("annograph-workspace-{}", std::process::id()));
    ws.save(&out)?;
    let again = Workspace::load(&out)?;
    println!("saved to {} and reloaded; same artifacts: {}", out.display(), again.documents() == ws.documents());
    std::fs::remove_dir_all(&out)?;

    // Problems are reported with their location.
    let bad = r#"{"kind": "graph", "name": "broken", "nodes": [], "edges": [{"id": "e0", "kind": "instance", "src": "n9"}]}"#;
    let path = std::env::temp_dir().join(format!("annograph-broken-{}.json", std::process::id()));
    std::fs::write(&path, bad)?;
    if let Err(e) = Workspace::load(&path) {
        println!("{e}");
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
