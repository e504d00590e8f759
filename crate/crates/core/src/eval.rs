//! Corpus scoring: model identification and role recall/precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use num_rational::Ratio;
use thiserror::Error;

use crate::lexicon::is_valid_role_name;

/// One `sentence <id>` block of a gold or prediction file. A block with no
/// `model=` line is a sentence the analyser produced nothing for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub sentence_id: String,
    pub model_id: Option<String>,
    pub roles: BTreeMap<String, String>,
}

pub type GoldRecord = SentenceRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("prediction for sentence `{0}` has no gold record")]
    UnknownSentence(String),
    #[error("sentence id mismatch: prediction `{pred}`, gold `{gold}`")]
    IdMismatch { pred: String, gold: String },
    #[error("gold sentence `{0}` has no model")]
    GoldWithoutModel(String),
    #[error("empty corpus")]
    EmptyCorpus,
}

/// Parses blank-line separated records. Lines other than `sentence`,
/// `model=` and `role` (costs, edit operations) are skipped.
pub fn parse_records(text: &str) -> Result<Vec<SentenceRecord>, EvalError> {
    let mut out: Vec<SentenceRecord> = Vec::new();
    let mut current: Option<SentenceRecord> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| EvalError::Parse { line, message };
        let l = raw.trim_end_matches('\r');
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(id) = l.strip_prefix("sentence ") {
            let id = id.trim();
            if id.is_empty() {
                return Err(err("empty sentence id".into()));
            }
            out.extend(current.take());
            current = Some(SentenceRecord {
                sentence_id: id.to_string(),
                model_id: None,
                roles: BTreeMap::new(),
            });
            continue;
        }
        let Some(rec) = current.as_mut() else {
            return Err(err(format!("`{l}` before any `sentence` line")));
        };
        if let Some(m) = l.strip_prefix("model=") {
            if rec.model_id.is_some() {
                return Err(err("second model= line in one record".into()));
            }
            rec.model_id = Some(m.trim().to_string());
        } else if let Some(rest) = l.strip_prefix("role ") {
            let (name, filler) = rest
                .split_once('\t')
                .ok_or_else(|| err("role line needs `role <name>\\t<filler>`".into()))?;
            if !is_valid_role_name(name) {
                return Err(err(format!("invalid role name `{name}`")));
            }
            if filler.trim().is_empty() {
                return Err(err(format!("empty filler for role `{name}`")));
            }
            if rec.roles.insert(name.to_string(), filler.trim().to_string()).is_some() {
                return Err(err(format!("role `{name}` given twice")));
            }
        }
    }
    out.extend(current);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ScoreCounts {
    pub correct_roles: u64,
    pub missing_roles: u64,
    pub spurious_roles: u64,
    pub model_correct: u64,
    /// Sentences with a predicted model.
    pub model_total: u64,
    pub sentences_covered: u64,
    pub sentences_total: u64,
}

impl Add for ScoreCounts {
    type Output = ScoreCounts;

    fn add(self, o: ScoreCounts) -> ScoreCounts {
        ScoreCounts {
            correct_roles: self.correct_roles + o.correct_roles,
            missing_roles: self.missing_roles + o.missing_roles,
            spurious_roles: self.spurious_roles + o.spurious_roles,
            model_correct: self.model_correct + o.model_correct,
            model_total: self.model_total + o.model_total,
            sentences_covered: self.sentences_covered + o.sentences_covered,
            sentences_total: self.sentences_total + o.sentences_total,
        }
    }
}

impl AddAssign for ScoreCounts {
    fn add_assign(&mut self, o: ScoreCounts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ScoreCounts {
    fn sum<I: Iterator<Item = ScoreCounts>>(iter: I) -> Self {
        iter.fold(ScoreCounts::default(), Add::add)
    }
}

fn same_filler(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

/// Scores one sentence; `pred` is `None` when nothing was produced.
pub fn score_sentence(
    pred: Option<&SentenceRecord>,
    gold: &GoldRecord,
) -> Result<ScoreCounts, EvalError> {
    let mut c = ScoreCounts {
        sentences_total: 1,
        ..ScoreCounts::default()
    };
    let pred = match pred {
        Some(p) if p.sentence_id != gold.sentence_id => {
            return Err(EvalError::IdMismatch {
                pred: p.sentence_id.clone(),
                gold: gold.sentence_id.clone(),
            })
        }
        Some(p) if p.model_id.is_some() => p,
        _ => {
            c.missing_roles = gold.roles.len() as u64;
            return Ok(c);
        }
    };
    c.sentences_covered = 1;
    c.model_total = 1;
    if pred.model_id == gold.model_id {
        c.model_correct = 1;
    }
    for (role, filler) in &gold.roles {
        match pred.roles.get(role) {
            Some(p) if same_filler(p, filler) => c.correct_roles += 1,
            Some(_) => {
                c.missing_roles += 1;
                c.spurious_roles += 1;
            }
            None => c.missing_roles += 1,
        }
    }
    c.spurious_roles += pred.roles.keys().filter(|r| !gold.roles.contains_key(*r)).count() as u64;
    Ok(c)
}

/// An exact ratio; `None` when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metric(pub Option<Ratio<u64>>);

impl Metric {
    fn of(num: u64, den: u64) -> Self {
        Metric((den > 0).then(|| Ratio::new_raw(num, den)))
    }

    /// Percentage rounded half up.
    pub fn percent(&self) -> Option<u64> {
        self.0.map(|r| (200 * r.numer() + r.denom()) / (2 * r.denom()))
    }

    pub fn reduced(&self) -> Option<Ratio<u64>> {
        self.0.map(|r| Ratio::new(*r.numer(), *r.denom()))
    }

    /// `num/den` as counted (not reduced), or `n/a`.
    pub fn fraction(&self) -> String {
        match self.0 {
            Some(r) => format!("{}/{}", r.numer(), r.denom()),
            None => "n/a".into(),
        }
    }

    pub fn percent_text(&self) -> String {
        self.percent().map_or("n/a".into(), |p| format!("{p}%"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub counts: ScoreCounts,
    pub role_recall: Metric,
    pub role_precision: Metric,
    pub model_recall: Metric,
    pub model_precision: Metric,
    pub coverage: Metric,
    /// Gold sentences that received no analysis.
    pub uncovered: Vec<String>,
}

pub fn aggregate(counts: ScoreCounts) -> Result<Report, EvalError> {
    if counts.sentences_total == 0 {
        return Err(EvalError::EmptyCorpus);
    }
    let c = counts;
    Ok(Report {
        counts: c,
        role_recall: Metric::of(c.correct_roles, c.correct_roles + c.missing_roles),
        role_precision: Metric::of(c.correct_roles, c.correct_roles + c.spurious_roles),
        model_recall: Metric::of(c.model_correct, c.sentences_total),
        model_precision: Metric::of(c.model_correct, c.model_total),
        coverage: Metric::of(c.sentences_covered, c.sentences_total),
        uncovered: Vec::new(),
    })
}

/// Scores a prediction corpus against gold. Predictions are matched by
/// sentence id; the first block per id counts.
pub fn evaluate(gold: &[GoldRecord], pred: &[SentenceRecord]) -> Result<Report, EvalError> {
    let gold_ids: BTreeSet<&str> = gold.iter().map(|g| g.sentence_id.as_str()).collect();
    let mut by_id: BTreeMap<&str, &SentenceRecord> = BTreeMap::new();
    for p in pred {
        if !gold_ids.contains(p.sentence_id.as_str()) {
            return Err(EvalError::UnknownSentence(p.sentence_id.clone()));
        }
        by_id.entry(p.sentence_id.as_str()).or_insert(p);
    }
    let mut total = ScoreCounts::default();
    let mut uncovered = Vec::new();
    for g in gold {
        if g.model_id.is_none() {
            return Err(EvalError::GoldWithoutModel(g.sentence_id.clone()));
        }
        let c = score_sentence(by_id.get(g.sentence_id.as_str()).copied(), g)?;
        if c.sentences_covered == 0 {
            uncovered.push(g.sentence_id.clone());
        }
        total += c;
    }
    let mut report = aggregate(total)?;
    report.uncovered = uncovered;
    Ok(report)
}

impl Report {
    fn rows(&self) -> [(&'static str, &Metric); 5] {
        [
            ("role_recall", &self.role_recall),
            ("role_precision", &self.role_precision),
            ("model_recall", &self.model_recall),
            ("model_precision", &self.model_precision),
            ("coverage", &self.coverage),
        ]
    }

    /// Aligned table followed by `key=value` lines.
    pub fn render(&self) -> String {
        let mut out = format!("{:<16} {:>9} {:>7}\n", "metric", "ratio", "percent");
        for (name, m) in self.rows() {
            let _ = writeln!(out, "{:<16} {:>9} {:>7}", name, m.fraction(), m.percent_text());
        }
        if !self.uncovered.is_empty() {
            let _ = writeln!(out, "unanalysed sentences (gold roles counted missing): {}", self.uncovered.join(" "));
        }
        out.push('\n');
        out.push_str(&self.render_key_values());
        out
    }

    pub fn render_key_values(&self) -> String {
        let c = &self.counts;
        let mut out = String::new();
        for (k, v) in [
            ("correct_roles", c.correct_roles),
            ("missing_roles", c.missing_roles),
            ("spurious_roles", c.spurious_roles),
            ("model_correct", c.model_correct),
            ("model_total", c.model_total),
            ("sentences_covered", c.sentences_covered),
            ("sentences_total", c.sentences_total),
        ] {
            let _ = writeln!(out, "{k}={v}");
        }
        for (name, m) in self.rows() {
            let _ = writeln!(out, "{name}={}", m.fraction());
            let _ = writeln!(out, "{name}_pct={}", m.percent().map_or("n/a".into(), |p| p.to_string()));
        }
        let _ = writeln!(out, "uncovered={}", self.uncovered.join(","));
        out
    }
}
