//! Ordered feature-structure parse trees.
//!
//! Trees are stored as a preorder arena: node ids are dense, a parent's id
//! precedes its descendants, and each node records the half-open preorder
//! range of its subtree so ancestor tests are constant time.

use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

use crate::fs::{Feature, TreeBundle, ValueExpr};
use crate::sexpr::{self, Pos, RawNode, SyntaxError};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub id: NodeId,
    pub bundle: TreeBundle,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    /// Token indices covered by this node.
    pub token_span: Range<usize>,
    subtree_end: NodeId,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Nested description of a tree, used to build a [`ParseTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeBuilder {
    pub bundle: TreeBundle,
    pub children: Vec<NodeBuilder>,
}

impl NodeBuilder {
    pub fn new(bundle: TreeBundle) -> Self {
        NodeBuilder {
            bundle,
            children: Vec::new(),
        }
    }

    pub fn child(mut self, child: NodeBuilder) -> Self {
        self.children.push(child);
        self
    }

    /// A token node of category `cat`.
    pub fn word(cat: &str, lemma: &str, form: &str) -> Self {
        NodeBuilder::new(
            TreeBundle::new()
                .with(Feature::Cat, cat)
                .with(Feature::Lemma, lemma)
                .with(Feature::Form, form),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {message}")]
    Attr { pos: Pos, message: String },
    #[error("{pos}: `{value}` is not a ground value")]
    NotGround { pos: Pos, value: String },
    #[error("{0}: childless node has no word form")]
    EmptyLeaf(Pos),
    #[error("leaf node without a word form")]
    MissingForm,
    #[error("no tree found")]
    Empty,
    #[error("expected a single tree, found {0}")]
    MultipleTrees(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    nodes: Vec<TreeNode>,
    tokens: Vec<String>,
}

impl ParseTree {
    pub fn from_builder(root: NodeBuilder) -> Result<Self, TreeError> {
        let mut tree = ParseTree {
            nodes: Vec::new(),
            tokens: Vec::new(),
        };
        tree.push(root, None)?;
        Ok(tree)
    }

    fn push(&mut self, b: NodeBuilder, parent: Option<NodeId>) -> Result<NodeId, TreeError> {
        let id = self.nodes.len();
        let start = self.tokens.len();
        if b.children.is_empty() {
            match b.bundle.get(Feature::Form) {
                Some(form) if !form.is_empty() => self.tokens.push(form.to_string()),
                _ => return Err(TreeError::MissingForm),
            }
        }
        self.nodes.push(TreeNode {
            id,
            bundle: b.bundle,
            children: Vec::new(),
            parent,
            token_span: start..start,
            subtree_end: id + 1,
        });
        let mut children = Vec::with_capacity(b.children.len());
        for child in b.children {
            children.push(self.push(child, Some(id))?);
        }
        let end = self.tokens.len();
        let subtree_end = self.nodes.len();
        let node = &mut self.nodes[id];
        node.children = children;
        node.token_span = start..end;
        node.subtree_end = subtree_end;
        Ok(id)
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Strict ancestor test.
    pub fn is_ancestor(&self, ancestor: NodeId, descendant: NodeId) -> bool {
        ancestor < descendant && descendant < self.nodes[ancestor].subtree_end
    }

    /// Nodes strictly between `upper` and `lower` on the path from the
    /// root; `upper = None` means "above the root".
    pub fn between(&self, upper: Option<NodeId>, lower: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.nodes[lower].parent;
        while let Some(id) = cur {
            if Some(id) == upper {
                break;
            }
            out.push(id);
            cur = self.nodes[id].parent;
        }
        out
    }

    /// The original word forms under `id`, joined by single spaces.
    pub fn surface_span(&self, id: NodeId) -> String {
        self.tokens[self.nodes[id].token_span.clone()].join(" ")
    }

    pub fn to_builder(&self) -> NodeBuilder {
        self.builder_at(0)
    }

    fn builder_at(&self, id: NodeId) -> NodeBuilder {
        let node = &self.nodes[id];
        NodeBuilder {
            bundle: node.bundle.clone(),
            children: node.children.iter().map(|c| self.builder_at(*c)).collect(),
        }
    }
}

/// A tree from a corpus file together with its sentence id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tree: ParseTree,
}

fn ground(value: &str, pos: Pos) -> Result<Option<String>, TreeError> {
    let expr: ValueExpr = value.parse().map_err(|e| TreeError::Attr {
        pos,
        message: format!("{e}"),
    })?;
    match expr {
        ValueExpr::Unspecified => Ok(None),
        ValueExpr::Atom(a) => Ok(Some(a)),
        _ => Err(TreeError::NotGround {
            pos,
            value: value.to_string(),
        }),
    }
}

fn sem_set(value: &str, pos: Pos) -> Result<Vec<String>, TreeError> {
    let expr: ValueExpr = value.parse().map_err(|e| TreeError::Attr {
        pos,
        message: format!("{e}"),
    })?;
    match expr {
        ValueExpr::Unspecified => Ok(Vec::new()),
        ValueExpr::Atom(a) => Ok(vec![a]),
        ValueExpr::Disjunction(alts) => Ok(alts),
        _ => Err(TreeError::NotGround {
            pos,
            value: value.to_string(),
        }),
    }
}

fn raw_to_builder(raw: &RawNode) -> Result<NodeBuilder, TreeError> {
    let mut bundle = TreeBundle::new();
    if raw.head != "leaf" {
        if let Some(cat) = ground(&raw.head, raw.pos)? {
            bundle.set(Feature::Cat, cat);
        }
    }
    let mut seen = Vec::new();
    for attr in &raw.attrs {
        let key = if attr.key == "pos" { "cat" } else { attr.key.as_str() };
        let feature: Feature = key.parse().map_err(|_| TreeError::Attr {
            pos: attr.pos,
            message: format!("unknown key `{}`", attr.key),
        })?;
        if seen.contains(&feature) || (feature == Feature::Cat && bundle.cat().is_some()) {
            return Err(TreeError::Attr {
                pos: attr.pos,
                message: format!("feature `{feature}` given twice"),
            });
        }
        seen.push(feature);
        if feature == Feature::Sem {
            bundle.sem_mut().extend(sem_set(&attr.value, attr.pos)?);
        } else if let Some(v) = ground(&attr.value, attr.pos)? {
            bundle.set(feature, v);
        }
    }
    if raw.children.is_empty() && bundle.get(Feature::Form).is_none() {
        return Err(TreeError::EmptyLeaf(raw.pos));
    }
    let children = raw
        .children
        .iter()
        .map(raw_to_builder)
        .collect::<Result<_, _>>()?;
    Ok(NodeBuilder { bundle, children })
}

fn sentence_id(comments: &[String]) -> Option<String> {
    comments.iter().rev().find_map(|c| {
        c.strip_prefix("sentence")
            .filter(|rest| rest.starts_with(char::is_whitespace))
            .map(|rest| rest.trim().to_string())
            .filter(|id| !id.is_empty())
    })
}

/// Decodes a file holding exactly one tree.
pub fn decode_tree(text: &str) -> Result<ParseTree, TreeError> {
    let mut sentences = decode_corpus(text)?;
    match sentences.len() {
        0 => Err(TreeError::Empty),
        1 => Ok(sentences.pop().unwrap().tree),
        n => Err(TreeError::MultipleTrees(n)),
    }
}

/// Decodes a corpus file. A `# sentence <id>` comment names the tree that
/// follows it; unnamed trees are numbered from 1.
pub fn decode_corpus(text: &str) -> Result<Vec<Sentence>, TreeError> {
    let items = sexpr::read_items(text)?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let tree = ParseTree::from_builder(raw_to_builder(&item.node)?)?;
            let id = sentence_id(&item.comments).unwrap_or_else(|| (i + 1).to_string());
            Ok(Sentence { id, tree })
        })
        .collect()
}

fn encode_node(tree: &ParseTree, id: NodeId, depth: usize, out: &mut String) {
    let node = tree.node(id);
    let b = &node.bundle;
    let head = match b.cat() {
        Some(cat) => cat,
        None if node.is_leaf() => "leaf",
        None => "*",
    };
    out.push_str(&"  ".repeat(depth));
    out.push('(');
    out.push_str(head);
    for f in &Feature::SCALAR[1..] {
        if let Some(v) = b.get(*f) {
            let _ = write!(out, " {}={}", f.name(), v);
        }
    }
    if !b.sem().is_empty() {
        let _ = write!(out, " sem={}", b.display_value(Feature::Sem));
    }
    for child in &node.children {
        out.push('\n');
        encode_node(tree, *child, depth + 1, out);
    }
    out.push(')');
}

/// Canonical serialization: category as head, attributes in feature
/// order, unspecified features omitted, children indented two spaces.
pub fn encode_tree(tree: &ParseTree) -> String {
    let mut out = String::new();
    encode_node(tree, 0, 0, &mut out);
    out.push('\n');
    out
}

pub fn encode_corpus(sentences: &[Sentence]) -> String {
    sentences
        .iter()
        .map(|s| format!("# sentence {}\n{}", s.id, encode_tree(&s.tree)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Convenience wrapper around [`ParseTree::surface_span`].
pub fn surface_span(tree: &ParseTree, node: NodeId) -> String {
    tree.surface_span(node)
}
