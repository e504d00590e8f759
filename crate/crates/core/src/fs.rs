//! Flat feature structures: value expressions, ground bundles, agreement
//! bindings and node-level unification.
//!
//! Pattern nodes carry [`PatternBundle`]s whose features are arbitrary
//! [`ValueExpr`]s. Parse-tree nodes carry [`TreeBundle`]s that only hold
//! ground values (plus a set of ontology labels). [`unify_node`] decides
//! whether a pattern node can stand for a tree node, possibly after
//! relabelling some features.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The closed set of features a node may carry, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Cat,
    Prep,
    Lemma,
    Form,
    Gender,
    Number,
    Person,
    Sem,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::Cat,
        Feature::Prep,
        Feature::Lemma,
        Feature::Form,
        Feature::Gender,
        Feature::Number,
        Feature::Person,
        Feature::Sem,
    ];

    /// Features that hold a single ground symbol on the tree side.
    pub const SCALAR: [Feature; 7] = [
        Feature::Cat,
        Feature::Prep,
        Feature::Lemma,
        Feature::Form,
        Feature::Gender,
        Feature::Number,
        Feature::Person,
    ];

    /// Morphological features (the `morph` part of a role description).
    pub const MORPH: [Feature; 5] = [
        Feature::Lemma,
        Feature::Form,
        Feature::Gender,
        Feature::Number,
        Feature::Person,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Cat => "cat",
            Feature::Prep => "prep",
            Feature::Lemma => "lemma",
            Feature::Form => "form",
            Feature::Gender => "gender",
            Feature::Number => "number",
            Feature::Person => "person",
            Feature::Sem => "sem",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown feature `{0}`")]
pub struct UnknownFeature(pub String);

impl FromStr for Feature {
    type Err = UnknownFeature;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFeature(s.to_string()))
    }
}

/// Parses a `|`-separated feature list such as `number|person`.
pub fn parse_feature_set(text: &str) -> Result<BTreeSet<Feature>, UnknownFeature> {
    text.split('|')
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_feature_set(set: &BTreeSet<Feature>) -> String {
    set.iter().map(|f| f.name()).collect::<Vec<_>>().join("|")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("expression `{0}` contains whitespace")]
    Whitespace(String),
    #[error("disjunction `{0}` has an empty alternative")]
    EmptyAlternative(String),
    #[error("disjunction `{0}` repeats `{1}`")]
    DuplicateAlternative(String, String),
    #[error("disjunction alternative `{0}` must be a plain symbol")]
    ComplexAlternative(String),
    #[error("negation of `*` is not allowed")]
    NegatedUnspecified,
    #[error("negated expression `{0}` may not contain a variable")]
    NegatedVariable(String),
    #[error("`{0}` is not a valid variable name")]
    BadVariable(String),
    #[error("`{0}` is not a ground value")]
    NotGround(String),
}

/// Pattern-side feature value.
///
/// Text syntax: `*` unspecified, `a` atom, `a|b` disjunction, `!e`
/// negation, `^txt` prefix, `?name` agreement variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum ValueExpr {
    #[default]
    Unspecified,
    Atom(String),
    Disjunction(Vec<String>),
    Negation(Box<ValueExpr>),
    Prefix(String),
    Variable(String),
}

fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_')
}

fn is_plain_symbol(s: &str) -> bool {
    !s.is_empty() && !s.starts_with(['*', '!', '^', '?'])
}

impl ValueExpr {
    pub fn atom(s: impl Into<String>) -> Self {
        ValueExpr::Atom(s.into())
    }

    /// Builds a disjunction, collapsing a single alternative to an atom.
    pub fn one_of<I, S>(alternatives: I) -> Result<Self, ExprError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let alts: Vec<String> = alternatives.into_iter().map(Into::into).collect();
        let joined = alts.join("|");
        let mut seen = BTreeSet::new();
        for a in &alts {
            if a.is_empty() {
                return Err(ExprError::EmptyAlternative(joined));
            }
            if !is_plain_symbol(a) {
                return Err(ExprError::ComplexAlternative(a.clone()));
            }
            if !seen.insert(a.as_str()) {
                return Err(ExprError::DuplicateAlternative(joined, a.clone()));
            }
        }
        match alts.len() {
            0 => Err(ExprError::Empty),
            1 => Ok(ValueExpr::Atom(alts.into_iter().next().unwrap())),
            _ => Ok(ValueExpr::Disjunction(alts)),
        }
    }

    pub fn is_unspecified(&self) -> bool {
        matches!(self, ValueExpr::Unspecified)
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, ValueExpr::Unspecified | ValueExpr::Atom(_))
    }

    pub fn contains_variable(&self) -> bool {
        match self {
            ValueExpr::Variable(_) => true,
            ValueExpr::Negation(inner) => inner.contains_variable(),
            _ => false,
        }
    }

    /// The symbols an atom or disjunction admits; `None` for anything else.
    pub fn symbols(&self) -> Option<Vec<&str>> {
        match self {
            ValueExpr::Atom(a) => Some(vec![a.as_str()]),
            ValueExpr::Disjunction(alts) => Some(alts.iter().map(String::as_str).collect()),
            _ => None,
        }
    }
}

impl FromStr for ValueExpr {
    type Err = ExprError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if text.is_empty() {
            return Err(ExprError::Empty);
        }
        if text.chars().any(char::is_whitespace) {
            return Err(ExprError::Whitespace(text.to_string()));
        }
        if text == "*" {
            return Ok(ValueExpr::Unspecified);
        }
        if let Some(rest) = text.strip_prefix('!').filter(|r| !r.is_empty()) {
            let inner: ValueExpr = rest.parse()?;
            if inner.is_unspecified() {
                return Err(ExprError::NegatedUnspecified);
            }
            if inner.contains_variable() {
                return Err(ExprError::NegatedVariable(text.to_string()));
            }
            return Ok(ValueExpr::Negation(Box::new(inner)));
        }
        if let Some(rest) = text.strip_prefix('^').filter(|r| !r.is_empty()) {
            return Ok(ValueExpr::Prefix(rest.to_string()));
        }
        if let Some(rest) = text.strip_prefix('?').filter(|r| !r.is_empty()) {
            if !is_identifier(rest) {
                return Err(ExprError::BadVariable(rest.to_string()));
            }
            return Ok(ValueExpr::Variable(rest.to_string()));
        }
        if text.len() > 1 && text.contains('|') {
            return ValueExpr::one_of(text.split('|'));
        }
        Ok(ValueExpr::Atom(text.to_string()))
    }
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Unspecified => f.write_str("*"),
            ValueExpr::Atom(a) => f.write_str(a),
            ValueExpr::Disjunction(alts) => f.write_str(&alts.join("|")),
            ValueExpr::Negation(inner) => write!(f, "!{inner}"),
            ValueExpr::Prefix(p) => write!(f, "^{p}"),
            ValueExpr::Variable(v) => write!(f, "?{v}"),
        }
    }
}

/// Values pinned by an agreement variable, one slot per agreement feature.
pub type GroundTuple = Vec<Option<String>>;

/// Variable environment threaded through unification.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bindings(BTreeMap<String, GroundTuple>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&GroundTuple> {
        self.0.get(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &GroundTuple)> {
        self.0.iter()
    }

    /// Binds `var` to `value` if unbound; otherwise checks equality.
    /// The environment is left untouched on failure.
    pub fn bind(&mut self, var: &str, value: GroundTuple) -> bool {
        match self.0.get(var) {
            Some(existing) => *existing == value,
            None => {
                self.0.insert(var.to_string(), value);
                true
            }
        }
    }
}

impl<const N: usize> From<[(&str, GroundTuple); N]> for Bindings {
    fn from(pairs: [(&str, GroundTuple); N]) -> Self {
        Bindings(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

fn eval_in_place(expr: &ValueExpr, value: Option<&str>, env: &mut Bindings) -> bool {
    match expr {
        ValueExpr::Unspecified => true,
        ValueExpr::Atom(a) => value == Some(a.as_str()),
        ValueExpr::Disjunction(alts) => value.is_some_and(|v| alts.iter().any(|a| a == v)),
        ValueExpr::Negation(inner) => {
            // inner is variable-free, so this never touches env
            !eval_in_place(inner, value, env)
        }
        ValueExpr::Prefix(p) => value.is_some_and(|v| v.starts_with(p.as_str())),
        ValueExpr::Variable(name) => env.bind(name, vec![value.map(str::to_string)]),
    }
}

/// Evaluates a pattern expression against a ground value (or its absence).
pub fn eval_expr(expr: &ValueExpr, value: Option<&str>, env: &Bindings) -> (bool, Bindings) {
    let mut next = env.clone();
    if eval_in_place(expr, value, &mut next) {
        (true, next)
    } else {
        (false, env.clone())
    }
}

fn sem_in_place(constraint: &ValueExpr, labels: &BTreeSet<String>, env: &mut Bindings) -> bool {
    match constraint {
        ValueExpr::Unspecified => true,
        ValueExpr::Atom(a) => labels.contains(a),
        ValueExpr::Disjunction(alts) => alts.iter().any(|a| labels.contains(a)),
        ValueExpr::Negation(inner) => !sem_in_place(inner, labels, env),
        ValueExpr::Prefix(p) => labels.iter().any(|l| l.starts_with(p.as_str())),
        ValueExpr::Variable(name) => env.bind(name, vec![Some(join_labels(labels))]),
    }
}

/// Evaluates a semantic-label constraint against a node's label set.
pub fn sem_match(constraint: &ValueExpr, labels: &BTreeSet<String>) -> bool {
    sem_in_place(constraint, labels, &mut Bindings::new())
}

pub fn join_labels(labels: &BTreeSet<String>) -> String {
    if labels.is_empty() {
        "*".to_string()
    } else {
        labels.iter().map(String::as_str).collect::<Vec<_>>().join("|")
    }
}

/// Ground feature bundle of a parse-tree node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TreeBundle {
    values: BTreeMap<Feature, String>,
    sem: BTreeSet<String>,
}

impl TreeBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, feature: Feature, value: impl Into<String>) -> Self {
        self.set(feature, value);
        self
    }

    pub fn with_sem<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.sem = labels.into_iter().map(Into::into).collect();
        self
    }

    /// Sets a scalar feature. Setting `Sem` adds a single label.
    pub fn set(&mut self, feature: Feature, value: impl Into<String>) {
        let value = value.into();
        if feature == Feature::Sem {
            self.sem.insert(value);
        } else {
            self.values.insert(feature, value);
        }
    }

    pub fn get(&self, feature: Feature) -> Option<&str> {
        self.values.get(&feature).map(String::as_str)
    }

    pub fn cat(&self) -> Option<&str> {
        self.get(Feature::Cat)
    }

    pub fn sem(&self) -> &BTreeSet<String> {
        &self.sem
    }

    pub fn sem_mut(&mut self) -> &mut BTreeSet<String> {
        &mut self.sem
    }

    /// Text of a feature as it appears in a relabel operation.
    pub fn display_value(&self, feature: Feature) -> String {
        match feature {
            Feature::Sem => join_labels(&self.sem),
            f => self.get(f).unwrap_or("*").to_string(),
        }
    }
}

/// Pattern-side feature bundle: one expression per feature plus an
/// optional agreement variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PatternBundle {
    exprs: BTreeMap<Feature, ValueExpr>,
    pub agr: Option<String>,
}

impl PatternBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, feature: Feature, expr: ValueExpr) -> Self {
        self.set(feature, expr);
        self
    }

    pub fn with_agr(mut self, var: impl Into<String>) -> Self {
        self.agr = Some(var.into());
        self
    }

    pub fn set(&mut self, feature: Feature, expr: ValueExpr) {
        if expr.is_unspecified() {
            self.exprs.remove(&feature);
        } else {
            self.exprs.insert(feature, expr);
        }
    }

    pub fn get(&self, feature: Feature) -> &ValueExpr {
        const UNSPECIFIED: ValueExpr = ValueExpr::Unspecified;
        self.exprs.get(&feature).unwrap_or(&UNSPECIFIED)
    }

    /// Specified features in evaluation order.
    pub fn specified(&self) -> impl Iterator<Item = (Feature, &ValueExpr)> {
        self.exprs.iter().map(|(f, e)| (*f, e))
    }

    /// A pattern bundle that demands exactly the ground values of `tree`.
    pub fn from_ground(tree: &TreeBundle) -> Self {
        let mut out = PatternBundle::new();
        for f in Feature::SCALAR {
            if let Some(v) = tree.get(f) {
                out.set(f, ValueExpr::atom(v));
            }
        }
        match tree.sem().len() {
            0 => {}
            1 => out.set(Feature::Sem, ValueExpr::atom(tree.sem().iter().next().unwrap())),
            _ => out.set(
                Feature::Sem,
                ValueExpr::Disjunction(tree.sem().iter().cloned().collect()),
            ),
        }
        out
    }
}

/// Knobs shared by unification and matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifyConfig {
    /// Features whose mismatch can be repaired by a relabel.
    pub relabelable: BTreeSet<Feature>,
    /// Features an agreement variable pins.
    pub agreement_features: Vec<Feature>,
}

impl Default for UnifyConfig {
    fn default() -> Self {
        UnifyConfig {
            relabelable: BTreeSet::from([Feature::Sem]),
            agreement_features: vec![Feature::Number, Feature::Person],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnifyOutcome {
    Exact(Bindings),
    NeedsRelabel(BTreeSet<Feature>, Bindings),
    Fail,
}

impl UnifyOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, UnifyOutcome::Fail)
    }

    pub fn bindings(&self) -> Option<&Bindings> {
        match self {
            UnifyOutcome::Exact(b) | UnifyOutcome::NeedsRelabel(_, b) => Some(b),
            UnifyOutcome::Fail => None,
        }
    }

    pub fn relabels(&self) -> usize {
        match self {
            UnifyOutcome::NeedsRelabel(fs, _) => fs.len(),
            _ => 0,
        }
    }
}

/// Unifies a pattern bundle against a tree bundle.
///
/// Features are evaluated in [`Feature::ALL`] order, then the agreement
/// variable (if any) binds the tuple of agreement features. Failures on
/// relabelable features yield [`UnifyOutcome::NeedsRelabel`], dropping any
/// bindings they would have made.
pub fn unify_node(
    pattern: &PatternBundle,
    tree: &TreeBundle,
    env: &Bindings,
    config: &UnifyConfig,
) -> UnifyOutcome {
    let mut env = env.clone();
    let mut failing = BTreeSet::new();
    for (feature, expr) in pattern.specified() {
        let ok = if feature == Feature::Sem {
            let mut trial = env.clone();
            let ok = sem_in_place(expr, tree.sem(), &mut trial);
            if ok {
                env = trial;
            }
            ok
        } else {
            eval_in_place(expr, tree.get(feature), &mut env)
        };
        if !ok {
            if !config.relabelable.contains(&feature) {
                return UnifyOutcome::Fail;
            }
            failing.insert(feature);
        }
    }
    if let Some(var) = &pattern.agr {
        let tuple = config
            .agreement_features
            .iter()
            .map(|f| tree.get(*f).map(str::to_string))
            .collect();
        if !env.bind(var, tuple) {
            return UnifyOutcome::Fail;
        }
    }
    if failing.is_empty() {
        UnifyOutcome::Exact(env)
    } else {
        UnifyOutcome::NeedsRelabel(failing, env)
    }
}
