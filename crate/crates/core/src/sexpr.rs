//! Reader for the parenthesized node syntax shared by parse trees and
//! patterns: `(HEAD key=value … child…)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attr {
    pub key: String,
    pub value: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawNode {
    pub head: String,
    pub pos: Pos,
    pub attrs: Vec<Attr>,
    pub children: Vec<RawNode>,
}

/// A top-level item: a node together with the `#` comment lines that
/// directly precede it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub comments: Vec<String>,
    pub node: RawNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
    Comment(String),
}

fn lex(text: &str) -> Vec<(Tok, Pos)> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            let col = line.len() - line.trim_start().len() + 1;
            out.push((Tok::Comment(rest.trim().to_string()), Pos { line: line_no, col }));
            continue;
        }
        let mut chars = line.char_indices().peekable();
        let mut col = 0;
        while let Some((_, c)) = chars.next() {
            col += 1;
            let pos = Pos { line: line_no, col };
            match c {
                '(' => out.push((Tok::Open, pos)),
                ')' => out.push((Tok::Close, pos)),
                c if c.is_whitespace() => {}
                c => {
                    let mut word = String::from(c);
                    while let Some(&(_, n)) = chars.peek() {
                        if n == '(' || n == ')' || n.is_whitespace() {
                            break;
                        }
                        word.push(n);
                        chars.next();
                        col += 1;
                    }
                    out.push((Tok::Word(word), pos));
                }
            }
        }
    }
    out
}

struct Reader {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Reader {
    fn peek(&self) -> Option<&(Tok, Pos)> {
        self.toks.get(self.at)
    }

    fn node(&mut self) -> Result<RawNode, SyntaxError> {
        let open_pos = match self.peek() {
            Some((Tok::Open, p)) => *p,
            Some((_, p)) => return Err(SyntaxError::new(*p, "expected `(`")),
            None => return Err(SyntaxError::new(self.end, "expected `(`")),
        };
        self.at += 1;
        let (head, pos) = match self.peek().cloned() {
            Some((Tok::Word(w), p)) if !w.contains('=') => (w, p),
            Some((_, p)) => return Err(SyntaxError::new(p, "expected a node head")),
            None => return Err(SyntaxError::new(self.end, "unterminated node")),
        };
        self.at += 1;
        let mut node = RawNode {
            head,
            pos,
            attrs: Vec::new(),
            children: Vec::new(),
        };
        loop {
            match self.peek().cloned() {
                Some((Tok::Close, _)) => {
                    self.at += 1;
                    return Ok(node);
                }
                Some((Tok::Open, _)) => node.children.push(self.node()?),
                Some((Tok::Word(w), p)) => {
                    if !node.children.is_empty() {
                        return Err(SyntaxError::new(p, "attribute after child node"));
                    }
                    let Some((key, value)) = w.split_once('=') else {
                        return Err(SyntaxError::new(p, format!("expected key=value, found `{w}`")));
                    };
                    if key.is_empty() || value.is_empty() {
                        return Err(SyntaxError::new(p, format!("malformed attribute `{w}`")));
                    }
                    node.attrs.push(Attr {
                        key: key.to_string(),
                        value: value.to_string(),
                        pos: p,
                    });
                    self.at += 1;
                }
                Some((Tok::Comment(_), p)) => {
                    return Err(SyntaxError::new(p, "comment inside a node"));
                }
                None => {
                    return Err(SyntaxError::new(
                        open_pos,
                        "unterminated node (missing `)`)",
                    ))
                }
            }
        }
    }
}

/// Reads every top-level node in `text`.
pub fn read_items(text: &str) -> Result<Vec<Item>, SyntaxError> {
    let toks = lex(text);
    let end = Pos {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut reader = Reader { toks, at: 0, end };
    let mut items = Vec::new();
    let mut comments = Vec::new();
    while let Some((tok, pos)) = reader.peek().cloned() {
        match tok {
            Tok::Comment(c) => {
                comments.push(c);
                reader.at += 1;
            }
            Tok::Open => {
                let node = reader.node()?;
                items.push(Item {
                    comments: std::mem::take(&mut comments),
                    node,
                });
            }
            Tok::Close => return Err(SyntaxError::new(pos, "unbalanced `)`")),
            Tok::Word(w) => {
                return Err(SyntaxError::new(pos, format!("unexpected `{w}` outside a node")))
            }
        }
    }
    Ok(items)
}
