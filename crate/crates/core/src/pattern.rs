//! Syntactic-semantic tree patterns and their construction from a verbal
//! entry and a diathesis model.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fs::{Feature, PatternBundle, ValueExpr};
use crate::lexicon::{role_family, DiathesisModel, ModelSet, RoleSpec, Transitivity, VerbalEntry};
use crate::sexpr::{self, Pos, RawNode, SyntaxError};

pub type PatternNodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternNode {
    pub bundle: PatternBundle,
    pub role: Option<String>,
    pub optional: bool,
    pub coref: Option<String>,
    pub children: Vec<PatternNodeId>,
    pub parent: Option<PatternNodeId>,
    subtree_end: PatternNodeId,
}

impl PatternNode {
    pub fn agr(&self) -> Option<&str> {
        self.bundle.agr.as_deref()
    }
}

/// Nested description of a pattern node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternNodeBuilder {
    pub bundle: PatternBundle,
    pub role: Option<String>,
    pub optional: bool,
    pub coref: Option<String>,
    pub children: Vec<PatternNodeBuilder>,
}

impl PatternNodeBuilder {
    pub fn new(bundle: PatternBundle) -> Self {
        PatternNodeBuilder {
            bundle,
            ..Default::default()
        }
    }

    pub fn role(mut self, name: impl Into<String>) -> Self {
        self.role = Some(name.into());
        self
    }

    pub fn optional(mut self, optional: bool) -> Self {
        self.optional = optional;
        self
    }

    pub fn child(mut self, child: PatternNodeBuilder) -> Self {
        self.children.push(child);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {message}")]
    Attr { pos: Pos, message: String },
    #[error("duplicate role `{0}` in pattern")]
    DuplicateRole(String),
    #[error("combining {lemma} ({entry}) with model {model} ({model_trans}): transitivity differs")]
    TransitivityMismatch {
        lemma: String,
        entry: Transitivity,
        model: String,
        model_trans: Transitivity,
    },
}

/// A compiled pattern: a preorder arena whose node 0 is the sentence-level
/// root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub model_id: String,
    pub verb_lemma: String,
    nodes: Vec<PatternNode>,
}

impl Pattern {
    pub fn from_builder(
        model_id: impl Into<String>,
        verb_lemma: impl Into<String>,
        root: PatternNodeBuilder,
    ) -> Result<Self, PatternError> {
        let mut p = Pattern {
            model_id: model_id.into(),
            verb_lemma: verb_lemma.into(),
            nodes: Vec::new(),
        };
        p.push(root, None);
        let mut seen = BTreeSet::new();
        for n in &p.nodes {
            if let Some(r) = &n.role {
                if !seen.insert(r.as_str()) {
                    return Err(PatternError::DuplicateRole(r.clone()));
                }
            }
        }
        Ok(p)
    }

    fn push(&mut self, b: PatternNodeBuilder, parent: Option<PatternNodeId>) -> PatternNodeId {
        let id = self.nodes.len();
        self.nodes.push(PatternNode {
            bundle: b.bundle,
            role: b.role,
            optional: b.optional,
            coref: b.coref,
            children: Vec::new(),
            parent,
            subtree_end: id + 1,
        });
        let children: Vec<_> = b.children.into_iter().map(|c| self.push(c, Some(id))).collect();
        let end = self.nodes.len();
        let node = &mut self.nodes[id];
        node.children = children;
        node.subtree_end = end;
        id
    }

    pub fn root(&self) -> &PatternNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: PatternNodeId) -> &PatternNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[PatternNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_ancestor(&self, ancestor: PatternNodeId, descendant: PatternNodeId) -> bool {
        ancestor < descendant && descendant < self.nodes[ancestor].subtree_end
    }

    /// Preorder ids of the subtree rooted at `id`, including `id`.
    pub fn subtree(&self, id: PatternNodeId) -> std::ops::Range<PatternNodeId> {
        id..self.nodes[id].subtree_end
    }

    /// Role-bearing nodes in preorder.
    pub fn roles(&self) -> impl Iterator<Item = (PatternNodeId, &PatternNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.role.is_some())
    }

    pub fn role(&self, name: &str) -> Option<&PatternNode> {
        self.nodes.iter().find(|n| n.role.as_deref() == Some(name))
    }

    pub fn role_count(&self) -> usize {
        self.roles().count()
    }

    /// A printable name for a node: its role, or `#<id>`.
    pub fn label(&self, id: PatternNodeId) -> String {
        match &self.nodes[id].role {
            Some(r) => r.clone(),
            None => format!("#{id}"),
        }
    }

    pub fn to_builder(&self) -> PatternNodeBuilder {
        self.builder_at(0)
    }

    fn builder_at(&self, id: PatternNodeId) -> PatternNodeBuilder {
        let n = &self.nodes[id];
        PatternNodeBuilder {
            bundle: n.bundle.clone(),
            role: n.role.clone(),
            optional: n.optional,
            coref: n.coref.clone(),
            children: n.children.iter().map(|c| self.builder_at(*c)).collect(),
        }
    }
}

/// Settings for combining entries with models.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuilderConfig {
    /// Entry roles that are never appended when the model lacks them.
    pub protected_roles: BTreeSet<String>,
    /// Role whose node is anchored to the verb lemma.
    pub anchor_role: Option<String>,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig {
            protected_roles: ["entidad", "iniciador", "meta"]
                .into_iter()
                .map(String::from)
                .collect(),
            anchor_role: Some("event".to_string()),
        }
    }
}

/// Merges one field: the model's value stands unless it is unspecified, in
/// which case the entry's value is used. When both are symbol sets and
/// the entry's alternatives include every symbol of the model's value,
/// the entry's fuller list is taken.
pub fn merge_field(model: &ValueExpr, entry: &ValueExpr) -> ValueExpr {
    if model.is_unspecified() {
        return entry.clone();
    }
    if let (Some(m), Some(e)) = (model.symbols(), entry.symbols()) {
        if m.iter().all(|s| e.contains(s)) {
            return entry.clone();
        }
    }
    model.clone()
}

fn role_bundle(spec: &RoleSpec) -> PatternBundle {
    let mut b = PatternBundle::new()
        .with(Feature::Cat, spec.syn.clone())
        .with(Feature::Prep, spec.prep.clone())
        .with(Feature::Sem, spec.sem.clone());
    for (f, e) in &spec.morph {
        b.set(*f, e.clone());
    }
    b.agr = spec.agr.clone();
    b
}

fn merged_role(model_role: &RoleSpec, entry_role: Option<&RoleSpec>) -> RoleSpec {
    let Some(er) = entry_role else {
        return model_role.clone();
    };
    let mut out = model_role.clone();
    out.syn = merge_field(&model_role.syn, &er.syn);
    out.prep = merge_field(&model_role.prep, &er.prep);
    out.sem = merge_field(&model_role.sem, &er.sem);
    for (f, e) in &er.morph {
        out.morph.entry(*f).or_insert_with(|| e.clone());
    }
    out
}

fn entry_role_for<'a>(entry: &'a VerbalEntry, name: &str) -> Option<&'a RoleSpec> {
    entry.role(name).or_else(|| {
        let family = role_family(name);
        (family != name).then(|| entry.role(family)).flatten()
    })
}

/// Combines one entry with one model of the same transitivity.
pub fn combine(
    entry: &VerbalEntry,
    model: &DiathesisModel,
    config: &BuilderConfig,
) -> Result<Pattern, PatternError> {
    if entry.transitivity != model.transitivity {
        return Err(PatternError::TransitivityMismatch {
            lemma: entry.lemma.clone(),
            entry: entry.transitivity,
            model: model.id.clone(),
            model_trans: model.transitivity,
        });
    }
    let mut root = PatternNodeBuilder::default();
    for mr in &model.roles {
        let spec = merged_role(mr, entry_role_for(entry, &mr.name));
        let mut bundle = role_bundle(&spec);
        if config.anchor_role.as_deref() == Some(mr.name.as_str())
            && bundle.get(Feature::Lemma).is_unspecified()
        {
            bundle.set(Feature::Lemma, ValueExpr::atom(&entry.lemma));
        }
        root.children.push(PatternNodeBuilder {
            bundle,
            role: Some(spec.name.clone()),
            optional: spec.optional,
            coref: spec.coref.clone(),
            children: Vec::new(),
        });
    }
    for er in &entry.roles {
        if model.roles.iter().any(|r| r.name == er.name) || config.protected_roles.contains(&er.name) {
            continue;
        }
        let mut bundle = role_bundle(er);
        bundle.agr = None;
        root.children.push(PatternNodeBuilder {
            bundle,
            role: Some(er.name.clone()),
            optional: true,
            coref: None,
            children: Vec::new(),
        });
    }
    Pattern::from_builder(&model.id, &entry.lemma, root)
}

/// One pattern per model whose transitivity equals the entry's.
pub fn build_patterns(entry: &VerbalEntry, models: &ModelSet, config: &BuilderConfig) -> Vec<Pattern> {
    models
        .iter()
        .filter(|m| m.transitivity == entry.transitivity)
        .map(|m| combine(entry, m, config).expect("transitivity checked"))
        .collect()
}

fn encode_node(p: &Pattern, id: PatternNodeId, depth: usize, out: &mut String) {
    let n = p.node(id);
    out.push_str(&"  ".repeat(depth));
    out.push('(');
    out.push_str(&n.bundle.get(Feature::Cat).to_string());
    if id == 0 {
        let _ = write!(out, " model={} verb={}", p.model_id, p.verb_lemma);
    }
    for (f, e) in n.bundle.specified() {
        if f != Feature::Cat {
            let _ = write!(out, " {f}={e}");
        }
    }
    if let Some(r) = &n.role {
        let _ = write!(out, " role={r}");
    }
    if let Some(a) = &n.bundle.agr {
        let _ = write!(out, " agr={a}");
    }
    if let Some(c) = &n.coref {
        let _ = write!(out, " coref={c}");
    }
    if n.role.is_some() || n.optional {
        let _ = write!(out, " opt={}", n.optional);
    }
    for c in &n.children {
        out.push('\n');
        encode_node(p, *c, depth + 1, out);
    }
    out.push(')');
}

pub fn encode_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    encode_node(p, 0, 0, &mut out);
    out.push('\n');
    out
}

/// One block per pattern, separated by blank lines.
pub fn encode_patterns(patterns: &[Pattern]) -> String {
    patterns
        .iter()
        .map(encode_pattern)
        .collect::<Vec<_>>()
        .join("\n")
}

fn attr_err(pos: Pos, message: impl Into<String>) -> PatternError {
    PatternError::Attr {
        pos,
        message: message.into(),
    }
}

fn raw_to_builder(
    raw: &RawNode,
    is_root: bool,
    header: &mut (Option<String>, Option<String>),
) -> Result<PatternNodeBuilder, PatternError> {
    let parse = |text: &str, pos: Pos| -> Result<ValueExpr, PatternError> {
        text.parse().map_err(|e| attr_err(pos, format!("{e}")))
    };
    let mut b = PatternNodeBuilder::new(PatternBundle::new().with(Feature::Cat, parse(&raw.head, raw.pos)?));
    let mut seen = BTreeSet::new();
    for a in &raw.attrs {
        if !seen.insert(a.key.as_str()) {
            return Err(attr_err(a.pos, format!("`{}` given twice", a.key)));
        }
        match a.key.as_str() {
            "model" if is_root => header.0 = Some(a.value.clone()),
            "verb" if is_root => header.1 = Some(a.value.clone()),
            "role" => b.role = Some(a.value.clone()),
            "agr" => b.bundle.agr = Some(a.value.clone()),
            "coref" => b.coref = Some(a.value.clone()),
            "opt" => {
                b.optional = match a.value.as_str() {
                    "true" => true,
                    "false" => false,
                    v => return Err(attr_err(a.pos, format!("opt must be true or false, found `{v}`"))),
                }
            }
            "cat" => return Err(attr_err(a.pos, "category is given by the node head")),
            key => {
                let f: Feature = key
                    .parse()
                    .map_err(|_| attr_err(a.pos, format!("unknown key `{key}`")))?;
                b.bundle.set(f, parse(&a.value, a.pos)?);
            }
        }
    }
    for c in &raw.children {
        b.children.push(raw_to_builder(c, false, header)?);
    }
    Ok(b)
}

pub fn decode_patterns(text: &str) -> Result<Vec<Pattern>, PatternError> {
    sexpr::read_items(text)?
        .iter()
        .map(|item| {
            let mut header = (None, None);
            let root = raw_to_builder(&item.node, true, &mut header)?;
            let model = header
                .0
                .ok_or_else(|| attr_err(item.node.pos, "pattern root needs model="))?;
            Pattern::from_builder(model, header.1.unwrap_or_default(), root)
        })
        .collect()
}
