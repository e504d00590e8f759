//! Verbal entries, class defaults and diathesis models.
//!
//! Both lexicon and model files use the same line-oriented record format:
//!
//! ```text
//! # comment
//! verb susurrar trans class=communication
//! role iniciador syn=sn|psubj sem=Human
//! role medio syn=sp prep=con|por|a_través_de sem=Instrument
//!
//! model trans trans.passive
//! role entidad syn=sn agr=i opt=false
//! role vaux syn=vser agr=i
//! ```
//!
//! A record is a header line followed by `role` lines and ends at a blank
//! line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use log::warn;
use thiserror::Error;

use crate::fs::{ExprError, Feature, ValueExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transitivity {
    Intransitive,
    Transitive,
    TransitivePp,
}

impl Transitivity {
    pub fn as_str(self) -> &'static str {
        match self {
            Transitivity::Intransitive => "intrans",
            Transitivity::Transitive => "trans",
            Transitivity::TransitivePp => "trans_pp",
        }
    }
}

impl fmt::Display for Transitivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transitivity {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "intrans" | "intransitive" => Ok(Transitivity::Intransitive),
            "trans" | "transitive" => Ok(Transitivity::Transitive),
            "trans_pp" | "transitive_pp" => Ok(Transitivity::TransitivePp),
            _ => Err(()),
        }
    }
}

/// One argument slot of a verbal entry or diathesis model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoleSpec {
    pub name: String,
    pub syn: ValueExpr,
    pub prep: ValueExpr,
    /// Ground constraints on lemma, form, gender, number, person.
    pub morph: BTreeMap<Feature, ValueExpr>,
    pub sem: ValueExpr,
    pub agr: Option<String>,
    pub coref: Option<String>,
    pub optional: bool,
}

impl RoleSpec {
    pub fn new(name: impl Into<String>) -> Self {
        RoleSpec {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Name with any `.N` repetition suffix removed.
    pub fn family(&self) -> &str {
        role_family(&self.name)
    }
}

pub fn role_family(name: &str) -> &str {
    match name.rsplit_once('.') {
        Some((base, n)) if !base.is_empty() && !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) => base,
        _ => name,
    }
}

/// Role names are identifiers with an optional `.N` repetition suffix.
pub fn is_valid_role_name(name: &str) -> bool {
    let base = role_family(name);
    !base.is_empty()
        && base
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbalEntry {
    pub lemma: String,
    pub transitivity: Transitivity,
    pub class: Option<String>,
    pub roles: Vec<RoleSpec>,
}

impl VerbalEntry {
    pub fn role(&self, name: &str) -> Option<&RoleSpec> {
        self.roles.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiathesisModel {
    pub id: String,
    pub transitivity: Transitivity,
    /// Canonical surface order of the diathesis.
    pub roles: Vec<RoleSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: bad expression: {source}")]
    Expr { line: usize, source: ExprError },
    #[error("line {line}: unknown transitivity `{value}`")]
    UnknownTransitivity { line: usize, value: String },
    #[error("line {line}: duplicate role `{role}`")]
    DuplicateRole { line: usize, role: String },
    #[error("line {line}: duplicate {kind} `{name}`")]
    DuplicateRecord { line: usize, kind: &'static str, name: String },
    #[error("line {line}: record has more than one {kind} chain ({names})")]
    MultipleChains { line: usize, kind: &'static str, names: String },
    #[error("unknown verb `{lemma}`{}", class.as_ref().map(|c| format!(" (class `{c}` is not defined)")).unwrap_or_default())]
    UnknownVerb { lemma: String, class: Option<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HeaderKind {
    Verb,
    Class,
    Model,
}

impl HeaderKind {
    fn label(self) -> &'static str {
        match self {
            HeaderKind::Verb => "verb",
            HeaderKind::Class => "class",
            HeaderKind::Model => "model",
        }
    }
}

struct RawRecord {
    kind: HeaderKind,
    line: usize,
    name: String,
    transitivity: Transitivity,
    class: Option<String>,
    roles: Vec<(usize, RoleSpec, bool)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_trans(line: usize, value: &str) -> Result<Transitivity, LexiconError> {
    value.parse().map_err(|_| LexiconError::UnknownTransitivity {
        line,
        value: value.to_string(),
    })
}

fn parse_header(line: usize, words: &[&str]) -> Result<RawRecord, LexiconError> {
    let kind = match words[0] {
        "verb" => HeaderKind::Verb,
        "class" => HeaderKind::Class,
        "model" => HeaderKind::Model,
        other => return Err(parse_err(line, format!("expected a record header, found `{other}`"))),
    };
    let mut rest = words[1..].iter();
    let mut positional = Vec::new();
    let mut class = None;
    for w in rest.by_ref() {
        match w.split_once('=') {
            Some(("class", c)) if kind == HeaderKind::Verb && !c.is_empty() => {
                class = Some(c.to_string())
            }
            Some(_) => return Err(parse_err(line, format!("unexpected attribute `{w}`"))),
            None => positional.push(*w),
        }
    }
    if positional.len() != 2 {
        return Err(parse_err(
            line,
            format!("`{}` header takes two fields", kind.label()),
        ));
    }
    let (name, trans) = match kind {
        HeaderKind::Model => (positional[1], positional[0]),
        _ => (positional[0], positional[1]),
    };
    Ok(RawRecord {
        kind,
        line,
        name: name.to_string(),
        transitivity: parse_trans(line, trans)?,
        class,
        roles: Vec::new(),
    })
}

fn expr(line: usize, text: &str) -> Result<ValueExpr, LexiconError> {
    text.parse()
        .map_err(|source| LexiconError::Expr { line, source })
}

fn chain_name(line: usize, text: &str) -> Result<String, LexiconError> {
    let name = text.strip_prefix('?').unwrap_or(text);
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(parse_err(line, format!("`{text}` is not a valid chain name")));
    }
    Ok(name.to_string())
}

/// Parses a `role` line. The flag reports whether `opt=` was present.
fn parse_role(line: usize, words: &[&str]) -> Result<(RoleSpec, bool), LexiconError> {
    let Some(name) = words.get(1) else {
        return Err(parse_err(line, "role line needs a name"));
    };
    if !is_valid_role_name(name) {
        return Err(parse_err(line, format!("`{name}` is not a valid role name")));
    }
    let mut role = RoleSpec::new(*name);
    let mut opt_given = false;
    let mut seen = BTreeSet::new();
    for w in &words[2..] {
        if *w == "morph" {
            continue;
        }
        let Some((key, value)) = w.split_once('=') else {
            return Err(parse_err(line, format!("expected key=value, found `{w}`")));
        };
        if !seen.insert(key) {
            return Err(parse_err(line, format!("`{key}` given twice")));
        }
        match key {
            "syn" => role.syn = expr(line, value)?,
            "prep" => role.prep = expr(line, value)?,
            "sem" => role.sem = expr(line, value)?,
            "agr" => role.agr = Some(chain_name(line, value)?),
            "coref" => role.coref = Some(chain_name(line, value)?),
            "opt" => {
                role.optional = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(parse_err(line, format!("opt must be true or false, found `{value}`"))),
                };
                opt_given = true;
            }
            other => {
                let feature = other
                    .parse::<Feature>()
                    .ok()
                    .filter(|f| Feature::MORPH.contains(f))
                    .ok_or_else(|| parse_err(line, format!("unknown role attribute `{other}`")))?;
                let e = expr(line, value)?;
                if !e.is_ground() {
                    return Err(LexiconError::Expr {
                        line,
                        source: ExprError::NotGround(value.to_string()),
                    });
                }
                if !e.is_unspecified() {
                    role.morph.insert(feature, e);
                }
            }
        }
    }
    Ok((role, opt_given))
}

fn read_records(text: &str) -> Result<Vec<RawRecord>, LexiconError> {
    let mut records = Vec::new();
    let mut current: Option<RawRecord> = None;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            records.extend(current.take());
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        if words[0] == "role" {
            let Some(rec) = current.as_mut() else {
                return Err(parse_err(line, "role line outside a record"));
            };
            let (role, opt_given) = parse_role(line, &words)?;
            rec.roles.push((line, role, opt_given));
        } else {
            if current.is_some() {
                return Err(parse_err(line, "a blank line must end the previous record"));
            }
            current = Some(parse_header(line, &words)?);
        }
    }
    records.extend(current);
    for rec in &records {
        validate(rec)?;
    }
    Ok(records)
}

fn validate(rec: &RawRecord) -> Result<(), LexiconError> {
    let mut names = BTreeSet::new();
    for (line, role, _) in &rec.roles {
        if !names.insert(role.name.as_str()) {
            return Err(LexiconError::DuplicateRole {
                line: *line,
                role: role.name.clone(),
            });
        }
    }
    let chains = |pick: fn(&RoleSpec) -> Option<&String>| -> BTreeSet<&String> {
        rec.roles.iter().filter_map(|(_, r, _)| pick(r)).collect()
    };
    for (kind, set) in [
        ("agreement", chains(|r| r.agr.as_ref())),
        ("co-reference", chains(|r| r.coref.as_ref())),
    ] {
        if set.len() > 1 {
            return Err(LexiconError::MultipleChains {
                line: rec.line,
                kind,
                names: set.into_iter().cloned().collect::<Vec<_>>().join(", "),
            });
        }
    }
    Ok(())
}

/// Verbal entries and class defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    verbs: BTreeMap<String, VerbalEntry>,
    classes: BTreeMap<String, VerbalEntry>,
}

impl Lexicon {
    pub fn verbs(&self) -> impl Iterator<Item = &VerbalEntry> {
        self.verbs.values()
    }

    pub fn classes(&self) -> impl Iterator<Item = &VerbalEntry> {
        self.classes.values()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty() && self.classes.is_empty()
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.verbs.contains_key(lemma)
    }

    /// Resolves a verb: its own record when it lists roles, otherwise the
    /// record of its class with the lemma substituted.
    pub fn lookup_entry(&self, lemma: &str) -> Result<VerbalEntry, LexiconError> {
        let unknown = |class: Option<&String>| LexiconError::UnknownVerb {
            lemma: lemma.to_string(),
            class: class.cloned(),
        };
        let entry = self.verbs.get(lemma).ok_or_else(|| unknown(None))?;
        if !entry.roles.is_empty() {
            return Ok(entry.clone());
        }
        match &entry.class {
            Some(class) => self
                .lookup_in_class(lemma, class)
                .ok_or_else(|| unknown(Some(class))),
            None => Ok(entry.clone()),
        }
    }

    /// A class default instantiated for `lemma`.
    pub fn lookup_in_class(&self, lemma: &str, class: &str) -> Option<VerbalEntry> {
        self.classes.get(class).map(|c| VerbalEntry {
            lemma: lemma.to_string(),
            transitivity: c.transitivity,
            class: Some(class.to_string()),
            roles: c.roles.clone(),
        })
    }
}

pub fn load_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut lex = Lexicon::default();
    for rec in read_records(text)? {
        let roles = rec
            .roles
            .into_iter()
            .map(|(line, mut role, opt_given)| {
                if opt_given {
                    warn!("line {line}: `opt` on verbal-entry role `{}` is ignored; optionality comes from the diathesis model", role.name);
                    role.optional = false;
                }
                role
            })
            .collect();
        let entry = VerbalEntry {
            lemma: rec.name.clone(),
            transitivity: rec.transitivity,
            class: rec.class,
            roles,
        };
        let map = match rec.kind {
            HeaderKind::Verb => &mut lex.verbs,
            HeaderKind::Class => &mut lex.classes,
            HeaderKind::Model => {
                return Err(parse_err(rec.line, "model records belong in a model file"))
            }
        };
        if map.insert(rec.name.clone(), entry).is_some() {
            return Err(LexiconError::DuplicateRecord {
                line: rec.line,
                kind: rec.kind.label(),
                name: rec.name,
            });
        }
    }
    Ok(lex)
}

/// Diathesis models in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelSet {
    models: Vec<DiathesisModel>,
}

impl ModelSet {
    pub fn new(models: Vec<DiathesisModel>) -> Self {
        ModelSet { models }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DiathesisModel> {
        self.models.iter()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&DiathesisModel> {
        self.models.iter().find(|m| m.id == id)
    }
}

impl<'a> IntoIterator for &'a ModelSet {
    type Item = &'a DiathesisModel;
    type IntoIter = std::slice::Iter<'a, DiathesisModel>;

    fn into_iter(self) -> Self::IntoIter {
        self.models.iter()
    }
}

pub fn load_models(text: &str) -> Result<ModelSet, LexiconError> {
    let mut models: Vec<DiathesisModel> = Vec::new();
    for rec in read_records(text)? {
        if rec.kind != HeaderKind::Model {
            return Err(parse_err(
                rec.line,
                format!("{} records belong in a lexicon file", rec.kind.label()),
            ));
        }
        if models.iter().any(|m| m.id == rec.name) {
            return Err(LexiconError::DuplicateRecord {
                line: rec.line,
                kind: "model",
                name: rec.name,
            });
        }
        models.push(DiathesisModel {
            id: rec.name,
            transitivity: rec.transitivity,
            roles: rec.roles.into_iter().map(|(_, r, _)| r).collect(),
        });
    }
    Ok(ModelSet { models })
}
