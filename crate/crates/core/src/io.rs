//! JSON documents for graphs, typed graphs, rules and constraints, and the
//! workspace that loads them.
//!
//! A file holds one document or an array of documents. Every document has a
//! `"kind"` tag (`graph`, `typed_graph`, `rule`, `constraint`) and a `name`.
//! Element ids are strings such as `n0`, `e3`, `b1`; morphisms are arrays of
//! `[source, target]` id pairs. Annotations are written out as ordinary
//! annotation nodes with their `annotates` and `with` edges.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::adapt::TypeChangeRule;
use crate::annotation::{TypeAnnotatedGraph, TypeHierarchy};
use crate::functor::TypedGraph;
use crate::graph::{validate_bgraph, BGraph, ElementId, Kind, Label, Sort};
use crate::morphism::GraphMorphism;
use crate::patterns::{Constraint, ConstraintKind};
use crate::report::Report;
use crate::rewrite::{ApplicationCondition, Polarity, Rule};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Schema { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {artifact}: {message}")]
    Malformed { path: PathBuf, artifact: String, message: String },
    #[error("{path}: {artifact} is invalid: {report}")]
    Invalid { path: PathBuf, artifact: String, report: Report },
    #[error("{path}: duplicate {what} {name}")]
    Duplicate { path: PathBuf, what: &'static str, name: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: ElementId,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: ElementId,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub src: Option<ElementId>,
    pub tgt: Option<ElementId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxDoc {
    pub id: ElementId,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<ElementId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphBody {
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub boxes: Vec<BoxDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyDoc {
    pub tops: Vec<ElementId>,
    #[serde(default)]
    pub parents: BTreeMap<ElementId, ElementId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub name: String,
    #[serde(flatten)]
    pub body: GraphBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyDoc>,
}

pub type Pairs = Vec<(ElementId, ElementId)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedGraphDoc {
    pub name: String,
    pub instance: GraphBody,
    pub type_graph: GraphBody,
    pub typing: Pairs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionDoc {
    pub polarity: Polarity,
    pub graph: GraphBody,
    pub morphism: Pairs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub name: String,
    /// Declares the rule a type change; loading then checks its shape.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub type_change: bool,
    pub lhs: GraphBody,
    pub interface: GraphBody,
    pub rhs: GraphBody,
    pub left: Pairs,
    pub right: Pairs,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<ConditionDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub injective: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forbidden: Option<GraphBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise: Option<GraphBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<GraphBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<Pairs>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Graph(GraphDoc),
    TypedGraph(TypedGraphDoc),
    Rule(RuleDoc),
    Constraint(ConstraintDoc),
}

impl Document {
    pub fn name(&self) -> &str {
        match self {
            Document::Graph(d) => &d.name,
            Document::TypedGraph(d) => &d.name,
            Document::Rule(d) => &d.name,
            Document::Constraint(d) => &d.name,
        }
    }
}

pub fn body_of(g: &BGraph) -> GraphBody {
    let mut body = GraphBody::default();
    for (id, label) in g.labels() {
        let (kind, name) = (label.kind, label.name.clone());
        match id.sort() {
            Sort::Node => body.nodes.push(NodeDoc { id: *id, kind, name }),
            Sort::Edge => {
                let (s, t) = g.ends(*id).expect("edge ends");
                body.edges.push(EdgeDoc { id: *id, kind, name, src: Some(s), tgt: Some(t) });
            }
            Sort::Box => {
                let contains = g.contents(*id).map(|c| c.iter().copied().collect()).unwrap_or_default();
                body.boxes.push(BoxDoc { id: *id, kind, name, contains });
            }
        }
    }
    body
}

/// Builds the graph of a body. Structural problems that cannot be
/// represented (missing edge ends, ids of the wrong sort) are reported as
/// messages; the rest is left to [`validate_bgraph`].
pub fn graph_of(body: &GraphBody) -> Result<BGraph, String> {
    let mut g = BGraph::new();
    let check = |id: ElementId, sort: Sort| {
        if id.sort() == sort {
            Ok(())
        } else {
            Err(format!("{id} is listed as a {sort}"))
        }
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut fresh = |id: ElementId| if seen.insert(id) { Ok(()) } else { Err(format!("duplicate id {id}")) };
    for n in &body.nodes {
        check(n.id, Sort::Node)?;
        fresh(n.id)?;
        g.insert(n.id, Label::new(n.kind, n.name.as_deref()));
    }
    for b in &body.boxes {
        check(b.id, Sort::Box)?;
        fresh(b.id)?;
        g.insert(b.id, Label::new(b.kind, b.name.as_deref()));
    }
    for e in &body.edges {
        check(e.id, Sort::Edge)?;
        fresh(e.id)?;
        let src = e.src.ok_or_else(|| format!("edge {} has no src", e.id))?;
        let tgt = e.tgt.ok_or_else(|| format!("edge {} has no tgt", e.id))?;
        g.insert_edge(e.id, Label::new(e.kind, e.name.as_deref()), src, tgt);
    }
    for b in &body.boxes {
        g.set_contents_raw(b.id, b.contains.iter().copied().collect());
    }
    Ok(g)
}

fn pairs(m: &GraphMorphism) -> Pairs {
    m.iter().collect()
}

fn morphism(p: &Pairs) -> GraphMorphism {
    p.iter().copied().collect()
}

pub fn graph_doc(name: &str, g: &TypeAnnotatedGraph) -> Document {
    Document::Graph(GraphDoc {
        name: name.to_owned(),
        body: body_of(g.graph()),
        hierarchy: g.hierarchy().map(|h| HierarchyDoc {
            tops: h.tops().collect(),
            parents: h.parents().clone(),
        }),
    })
}

pub fn typed_graph_doc(name: &str, t: &TypedGraph) -> Document {
    Document::TypedGraph(TypedGraphDoc {
        name: name.to_owned(),
        instance: body_of(&t.instance),
        type_graph: body_of(&t.type_graph),
        typing: pairs(&t.typing),
    })
}

pub fn rule_doc(rule: &Rule, type_change: bool) -> Document {
    Document::Rule(RuleDoc {
        name: rule.name.clone(),
        type_change,
        lhs: body_of(&rule.lhs),
        interface: body_of(&rule.interface),
        rhs: body_of(&rule.rhs),
        left: pairs(&rule.left),
        right: pairs(&rule.right),
        conditions: rule
            .conditions
            .iter()
            .map(|ac| ConditionDoc { polarity: ac.polarity, graph: body_of(&ac.graph), morphism: pairs(&ac.morphism) })
            .collect(),
    })
}

pub fn constraint_doc(c: &Constraint) -> Document {
    let mut doc = ConstraintDoc {
        name: c.name.clone(),
        injective: c.injective,
        forbidden: None,
        premise: None,
        conclusion: None,
        morphism: None,
    };
    match &c.kind {
        ConstraintKind::Forbidden { graph } => doc.forbidden = Some(body_of(graph)),
        ConstraintKind::Positive { premise, conclusion, morphism } => {
            doc.premise = Some(body_of(premise));
            doc.conclusion = Some(body_of(conclusion));
            doc.morphism = Some(pairs(morphism));
        }
    }
    Document::Constraint(doc)
}

/// Loaded artifacts, keyed by name.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub graphs: BTreeMap<String, TypeAnnotatedGraph>,
    pub typed_graphs: BTreeMap<String, TypedGraph>,
    pub rules: BTreeMap<String, Rule>,
    /// Rules declared as type changes, by name.
    pub type_changes: BTreeMap<String, TypeChangeRule>,
    /// In load order; cascaded constraints are evaluated in this order.
    pub constraints: Vec<Constraint>,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses a file's text. Diagnostics carry the line and column in `text`.
pub fn parse_documents(path: &Path, text: &str) -> Result<Vec<Document>, IoError> {
    let schema = |offset: usize, e: serde_json::Error| {
        // serde positions are 1-based within the parsed slice
        let (line, column) = if e.line() == 0 {
            position(text, offset)
        } else {
            let (l0, c0) = position(text, offset);
            (l0 + e.line() - 1, if e.line() == 1 { c0 + e.column() - 1 } else { e.column() })
        };
        IoError::Schema { path: path.to_owned(), line, column, message: e.to_string() }
    };
    let raws: Vec<&RawValue> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| schema(0, e))?
    } else {
        vec![serde_json::from_str(text).map_err(|e| schema(0, e))?]
    };
    let base = text.as_ptr() as usize;
    raws.into_iter()
        .map(|raw| {
            let offset = raw.get().as_ptr() as usize - base;
            let src = raw.get();
            let kind = serde_json::from_str::<KindOnly>(src).map_err(|e| schema(offset, e))?.kind;
            let doc = match kind.as_str() {
                "graph" => serde_json::from_str(src).map(Document::Graph),
                "typed_graph" => serde_json::from_str(src).map(Document::TypedGraph),
                "rule" => serde_json::from_str(src).map(Document::Rule),
                "constraint" => serde_json::from_str(src).map(Document::Constraint),
                other => {
                    let (line, column) = position(text, offset);
                    return Err(IoError::Schema {
                        path: path.to_owned(),
                        line,
                        column,
                        message: format!("unknown document kind {other:?}"),
                    });
                }
            };
            doc.map_err(|e| schema(offset, e))
        })
        .collect()
}

#[derive(Deserialize)]
struct KindOnly {
    kind: String,
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_owned(), source })?;
    parse_documents(path, &text)
}

/// Canonical text: pretty JSON with a trailing newline; a single document
/// is written bare.
pub fn render_documents(docs: &[Document]) -> String {
    let mut s = match docs {
        [one] => serde_json::to_string_pretty(one),
        many => serde_json::to_string_pretty(many),
    }
    .expect("documents serialize");
    s.push('\n');
    s
}

pub fn write_documents(path: &Path, docs: &[Document]) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.to_owned(), source })?;
    }
    fs::write(path, render_documents(docs)).map_err(|source| IoError::Io { path: path.to_owned(), source })
}

fn json_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), IoError> {
    let entries = fs::read_dir(dir).map_err(|source| IoError::Io { path: dir.to_owned(), source })?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        if p.is_dir() {
            json_files(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    Ok(())
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a file or every `.json` file below a directory.
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let mut ws = Workspace::new();
        ws.load_into(path)?;
        Ok(ws)
    }

    pub fn load_into(&mut self, path: &Path) -> Result<(), IoError> {
        let mut files = Vec::new();
        if path.is_dir() {
            json_files(path, &mut files)?;
        } else {
            files.push(path.to_owned());
        }
        for f in files {
            for doc in read_documents(&f)? {
                self.register(&f, doc)?;
            }
        }
        Ok(())
    }

    /// Validates one document and adds it. Re-registering an identical
    /// artifact under the same name is a no-op.
    pub fn register(&mut self, path: &Path, doc: Document) -> Result<(), IoError> {
        let name = doc.name().to_owned();
        let malformed = |message: String| IoError::Malformed { path: path.to_owned(), artifact: name.clone(), message };
        let invalid = |report: Report| IoError::Invalid { path: path.to_owned(), artifact: name.clone(), report };
        let duplicate = |what| IoError::Duplicate { path: path.to_owned(), what, name: name.clone() };
        // constraint graphs may use unnamed types as wildcards
        let structural = |g: &BGraph, report: &mut Report| {
            for v in validate_bgraph(g).violations().iter().filter(|v| v.constraint != "typeName") {
                report.push(&v.constraint, v.elements.clone(), v.message.clone());
            }
        };
        match doc {
            Document::Graph(d) => {
                let graph = graph_of(&d.body).map_err(malformed)?;
                let mut report = validate_bgraph(&graph);
                let mut tag = TypeAnnotatedGraph::new(graph);
                if let Some(h) = d.hierarchy {
                    let hierarchy = h.tops.iter().fold(TypeHierarchy::new(), |acc, t| acc.with_top(*t));
                    let hierarchy = h.parents.iter().fold(hierarchy, |acc, (c, p)| acc.with_parent(*c, *p));
                    report.extend(hierarchy.validate());
                    tag = tag.with_hierarchy(hierarchy);
                }
                if !report.is_empty() {
                    return Err(invalid(report));
                }
                if self.graphs.get(&name).is_some_and(|old| *old != tag) {
                    return Err(duplicate("graph"));
                }
                self.graphs.insert(name, tag);
            }
            Document::TypedGraph(d) => {
                let instance = graph_of(&d.instance).map_err(malformed)?;
                let type_graph = graph_of(&d.type_graph).map_err(malformed)?;
                let t = TypedGraph::new(instance, type_graph, morphism(&d.typing));
                let report = t.validate();
                if !report.is_empty() {
                    return Err(invalid(report));
                }
                if self.typed_graphs.get(&name).is_some_and(|old| *old != t) {
                    return Err(duplicate("typed graph"));
                }
                self.typed_graphs.insert(name, t);
            }
            Document::Rule(d) => {
                let mut rule = Rule {
                    name: d.name.clone(),
                    lhs: graph_of(&d.lhs).map_err(malformed)?,
                    interface: graph_of(&d.interface).map_err(malformed)?,
                    rhs: graph_of(&d.rhs).map_err(malformed)?,
                    left: morphism(&d.left),
                    right: morphism(&d.right),
                    conditions: Vec::new(),
                };
                for c in &d.conditions {
                    rule.conditions.push(ApplicationCondition {
                        polarity: c.polarity,
                        graph: graph_of(&c.graph).map_err(malformed)?,
                        morphism: morphism(&c.morphism),
                    });
                }
                let report = rule.validate();
                if !report.is_empty() {
                    return Err(invalid(report));
                }
                if d.type_change {
                    let tcr = TypeChangeRule::from_rule(rule.clone()).map_err(|e| malformed(e.to_string()))?;
                    self.type_changes.insert(name.clone(), tcr);
                }
                if self.rules.get(&name).is_some_and(|old| *old != rule) {
                    return Err(duplicate("rule"));
                }
                self.rules.insert(name, rule);
            }
            Document::Constraint(d) => {
                let c = match (&d.forbidden, &d.premise, &d.conclusion) {
                    (Some(f), None, None) => Constraint::forbidden(&d.name, graph_of(f).map_err(malformed)?),
                    (None, Some(p), Some(c)) => {
                        let premise = graph_of(p).map_err(malformed)?;
                        let m = match &d.morphism {
                            Some(m) => morphism(m),
                            None => GraphMorphism::identity(&premise),
                        };
                        Constraint::positive(&d.name, premise, graph_of(c).map_err(malformed)?, m)
                    }
                    _ => return Err(malformed("give either forbidden or premise and conclusion".into())),
                };
                let c = Constraint { injective: d.injective, ..c };
                let mut report = c.validate();
                match &c.kind {
                    ConstraintKind::Forbidden { graph } => structural(graph, &mut report),
                    ConstraintKind::Positive { premise, conclusion, .. } => {
                        structural(premise, &mut report);
                        structural(conclusion, &mut report);
                    }
                }
                if !report.is_empty() {
                    return Err(invalid(report));
                }
                match self.constraints.iter().find(|k| k.name == name) {
                    Some(old) if *old != c => return Err(duplicate("constraint")),
                    Some(_) => {}
                    None => self.constraints.push(c),
                }
            }
        }
        Ok(())
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    /// Every artifact, each kind sorted by name.
    pub fn documents(&self) -> Vec<Document> {
        let mut out = Vec::new();
        out.extend(self.graphs.iter().map(|(n, g)| graph_doc(n, g)));
        out.extend(self.typed_graphs.iter().map(|(n, t)| typed_graph_doc(n, t)));
        out.extend(self.rules.values().map(|r| rule_doc(r, self.type_changes.contains_key(&r.name))));
        let mut cs: Vec<&Constraint> = self.constraints.iter().collect();
        cs.sort_by(|a, b| a.name.cmp(&b.name));
        out.extend(cs.into_iter().map(constraint_doc));
        out
    }

    /// Writes one canonical file per artifact into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
        let mut written = Vec::new();
        for doc in self.documents() {
            let path = dir.join(format!("{}.json", doc.name()));
            write_documents(&path, std::slice::from_ref(&doc))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_tgt_names_the_edge() {
        let text = r#"{"kind":"graph","name":"g","nodes":[{"id":"n0","kind":"instance"}],
            "edges":[{"id":"e1","kind":"instance","src":"n0"}]}"#;
        let docs = parse_documents(Path::new("x.json"), text).unwrap();
        let err = Workspace::new().register(Path::new("x.json"), docs[0].clone()).unwrap_err();
        assert!(err.to_string().contains("edge e1 has no tgt"), "{err}");
    }

    #[test]
    fn schema_error_has_position() {
        let err = parse_documents(Path::new("x.json"), "{\"kind\":\"graph\",\n\"name\": 3}").unwrap_err();
        assert!(matches!(err, IoError::Schema { line: 2, .. }), "{err}");
    }

    #[test]
    fn graph_round_trip() {
        let mut g = BGraph::new();
        let b = g.add_box(Label::bundle());
        let t = g.add_node(Label::ty("T"));
        let x = g.add_node(Label::named("x"));
        g.contain(b, t);
        crate::annotation::attach(&mut g, x, b);
        let doc = graph_doc("g", &TypeAnnotatedGraph::new(g.clone()));
        let text = render_documents(std::slice::from_ref(&doc));
        let back = parse_documents(Path::new("g.json"), &text).unwrap();
        assert_eq!(back, vec![doc]);
        let mut ws = Workspace::new();
        ws.register(Path::new("g.json"), back[0].clone()).unwrap();
        assert_eq!(ws.graphs["g"].graph(), &g);
    }
}
