//! Shared tokenizer and feature-structure description syntax.
//!
//! Grammar, lexicon and rule files share one lexical layer: `%` comments,
//! identifiers, `'quoted'` atoms, `"strings"` and Prolog-like operators.
//! Feature-structure descriptions look like
//! `rightfunctor [stem: #1, affix: "+t", arg: msign [stem: #1]]`, with
//! `<a, b | T>` as list sugar.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Quoted(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Quoted(w) => write!(f, "'{w}'"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const PUNCTS: &[&str] = &[
    "::=", "===>", "===", "==>", "<=>", "::", ":=", ":-", "=>", "<=", "=", ":", ",", ".", "[", "]", "{",
    "}", "(", ")", "<", ">", "|", ";", "#", "$", "_",
];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits `text` into tokens. With `digraphs`, `"a`, `"o` and `"u` (and
/// their capitals) read as the umlaut letters, as in two-level rule files.
pub fn tokenize(text: &str, digraphs: bool) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let err = |line, message: String| SyntaxError { line, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if digraphs && c == '"' {
            let umlaut = match chars.get(i + 1) {
                Some('a') => Some('ä'),
                Some('o') => Some('ö'),
                Some('u') => Some('ü'),
                Some('A') => Some('Ä'),
                Some('O') => Some('Ö'),
                Some('U') => Some('Ü'),
                _ => None,
            };
            if let Some(u) = umlaut {
                out.push((Tok::Word(u.to_string()), line));
                i += 2;
                continue;
            }
        }
        if c == '"' || c == '\'' {
            let quote = c;
            let start_line = line;
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(start_line, "unterminated quotation".into())),
                    Some(&ch) if ch == quote => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some(&e) => s.push(e),
                            None => return Err(err(line, "dangling escape".into())),
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        if ch == '\n' {
                            line += 1;
                        }
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push((
                if quote == '"' {
                    Tok::Str(s)
                } else {
                    Tok::Quoted(s)
                },
                start_line,
            ));
            continue;
        }
        if is_word_char(c) && !(c == '_' && !chars.get(i + 1).copied().is_some_and(is_word_char)) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Word(chars[start..i].iter().collect()), line));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                out.push((Tok::Punct(p), line));
                i += p.chars().count();
            }
            None => return Err(err(line, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, line));
    Ok(out)
}

/// A feature-structure description as written in grammar and lexicon files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Desc {
    pub tag: Option<u32>,
    pub body: DescBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescBody {
    /// Bare tag reference, `#1`.
    Any,
    /// Optional type with optional feature list.
    Avm {
        ty: Option<String>,
        feats: Vec<(Vec<String>, Desc)>,
    },
    Str(String),
    List {
        items: Vec<Desc>,
        tail: Option<Box<Desc>>,
    },
}

impl Desc {
    pub fn ty(name: &str) -> Desc {
        Desc {
            tag: None,
            body: DescBody::Avm {
                ty: Some(name.to_string()),
                feats: Vec::new(),
            },
        }
    }

    pub fn string(s: &str) -> Desc {
        Desc {
            tag: None,
            body: DescBody::Str(s.to_string()),
        }
    }

    pub fn avm(ty: Option<&str>, feats: Vec<(&str, Desc)>) -> Desc {
        Desc {
            tag: None,
            body: DescBody::Avm {
                ty: ty.map(str::to_string),
                feats: feats
                    .into_iter()
                    .map(|(p, d)| (p.split([':', '|']).map(str::to_string).collect(), d))
                    .collect(),
            },
        }
    }

    pub fn list(items: Vec<Desc>) -> Desc {
        Desc {
            tag: None,
            body: DescBody::List { items, tail: None },
        }
    }

    pub fn tagged(mut self, tag: u32) -> Desc {
        self.tag = Some(tag);
        self
    }
}

fn needs_quotes(name: &str) -> bool {
    name.is_empty()
        || !name.chars().all(is_word_char)
        || name.starts_with(|c: char| c.is_uppercase())
}

pub fn quote_atom(name: &str) -> String {
    if needs_quotes(name) {
        format!("'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        name.to_string()
    }
}

pub fn quote_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl fmt::Display for Desc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(t) = self.tag {
            write!(f, "#{t}")?;
            if !matches!(self.body, DescBody::Any) {
                write!(f, " ")?;
            }
        }
        match &self.body {
            DescBody::Any => Ok(()),
            DescBody::Str(s) => write!(f, "{}", quote_string(s)),
            DescBody::Avm { ty, feats } => {
                if let Some(ty) = ty {
                    write!(f, "{}", quote_atom(ty))?;
                }
                if !feats.is_empty() || ty.is_none() {
                    if ty.is_some() {
                        write!(f, " ")?;
                    }
                    write!(f, "[")?;
                    for (i, (path, d)) in feats.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}: {d}", path.join(":"))?;
                    }
                    write!(f, "]")?;
                }
                Ok(())
            }
            DescBody::List { items, tail } => {
                write!(f, "<")?;
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{d}")?;
                }
                if let Some(t) = tail {
                    write!(f, " | {t}")?;
                }
                write!(f, ">")
            }
        }
    }
}

/// Token cursor with the description sub-grammar.
pub struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str, digraphs: bool) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text, digraphs)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub fn line(&self) -> usize {
        self.toks[self.pos].1
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            line: self.line(),
            message: message.into(),
        })
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.error(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    pub fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    /// An identifier or quoted atom.
    pub fn atom(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Word(w) | Tok::Quoted(w) => {
                self.next();
                Ok(w)
            }
            other => self.error(format!("expected a name, found {other}")),
        }
    }

    pub fn word(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.next();
                Ok(w)
            }
            other => self.error(format!("expected an identifier, found {other}")),
        }
    }

    pub fn string(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected a string, found {other}")),
        }
    }

    /// `feat(:feat)*`, also accepting `|` as separator.
    pub fn path(&mut self) -> Result<Vec<String>, SyntaxError> {
        let mut path = vec![self.word()?];
        while (self.is_punct(":") || self.is_punct("|")) && matches!(self.peek_at(1), Tok::Word(_)) {
            self.next();
            path.push(self.word()?);
        }
        Ok(path)
    }

    /// A path inside an AVM, where the final `:` separates the value.
    fn avm_path(&mut self) -> Result<Vec<String>, SyntaxError> {
        let mut path = vec![self.word()?];
        loop {
            let more = match self.peek() {
                Tok::Punct("|") => true,
                Tok::Punct(":") => {
                    matches!(self.peek_at(1), Tok::Word(_))
                        && matches!(self.peek_at(2), Tok::Punct(":") | Tok::Punct("|"))
                }
                _ => false,
            };
            if !more {
                break;
            }
            self.next();
            path.push(self.word()?);
        }
        Ok(path)
    }

    pub fn desc(&mut self) -> Result<Desc, SyntaxError> {
        let mut tag = None;
        if self.eat("#") {
            match self.next() {
                Tok::Word(w) => match w.parse::<u32>() {
                    Ok(n) => tag = Some(n),
                    Err(_) => return self.error(format!("bad tag `{w}`")),
                },
                other => return self.error(format!("expected tag number, found {other}")),
            }
        }
        let body = match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                DescBody::Str(s)
            }
            Tok::Punct("<") => {
                self.next();
                let mut items = Vec::new();
                let mut tail = None;
                if !self.is_punct(">") {
                    loop {
                        items.push(self.desc()?);
                        if self.eat(",") {
                            continue;
                        }
                        if self.eat("|") {
                            tail = Some(Box::new(self.desc()?));
                        }
                        break;
                    }
                }
                self.expect(">")?;
                DescBody::List { items, tail }
            }
            Tok::Punct("[") => DescBody::Avm {
                ty: None,
                feats: self.feature_list()?,
            },
            Tok::Word(_) | Tok::Quoted(_) => {
                let ty = self.atom()?;
                let feats = if self.is_punct("[") {
                    self.feature_list()?
                } else {
                    Vec::new()
                };
                DescBody::Avm {
                    ty: Some(ty),
                    feats,
                }
            }
            _ if tag.is_some() => DescBody::Any,
            other => return self.error(format!("expected a description, found {other}")),
        };
        Ok(Desc { tag, body })
    }

    fn feature_list(&mut self) -> Result<Vec<(Vec<String>, Desc)>, SyntaxError> {
        self.expect("[")?;
        let mut feats = Vec::new();
        if !self.is_punct("]") {
            loop {
                let path = self.avm_path()?;
                self.expect(":")?;
                feats.push((path, self.desc()?));
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("]")?;
        Ok(feats)
    }
}

pub fn parse_desc(text: &str) -> Result<Desc, SyntaxError> {
    let mut p = Parser::new(text, false)?;
    let d = p.desc()?;
    if !p.at_eof() {
        return p.error(format!("trailing input: {}", p.peek()));
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_operators_longest_first() {
        let toks: Vec<Tok> = tokenize("X::=a ==> X::b:c===H. <=> => <=", false)
            .unwrap()
            .into_iter()
            .map(|t| t.0)
            .collect();
        assert_eq!(toks[1], Tok::Punct("::="));
        assert_eq!(toks[3], Tok::Punct("==>"));
        assert!(toks.contains(&Tok::Punct("===")));
        assert!(toks.contains(&Tok::Punct("<=>")));
        assert!(toks.contains(&Tok::Punct("=>")));
        assert!(toks.contains(&Tok::Punct("<=")));
    }

    #[test]
    fn digraphs_only_in_rule_mode() {
        let toks = tokenize("A:\"a", true).unwrap();
        assert_eq!(toks[2].0, Tok::Word("ä".into()));
        assert!(tokenize("A:\"a", false).is_err());
    }

    #[test]
    fn underscore_alone_is_punct() {
        let toks = tokenize("_ tense_pres", false).unwrap();
        assert_eq!(toks[0].0, Tok::Punct("_"));
        assert_eq!(toks[1].0, Tok::Word("tense_pres".into()));
    }

    #[test]
    fn parses_functor_entry() {
        let d = parse_desc(
            "rightfunctor [stem: #1, affix: \"+t\", mhead: verb_form[epenthese: #3 boolean, person: 3], arg: msign[stem: #1]]",
        )
        .unwrap();
        let DescBody::Avm { ty, feats } = &d.body else {
            panic!()
        };
        assert_eq!(ty.as_deref(), Some("rightfunctor"));
        assert_eq!(feats.len(), 4);
        assert_eq!(feats[0].1.tag, Some(1));
        assert_eq!(feats[0].1.body, DescBody::Any);
    }

    #[test]
    fn display_reparses() {
        let text = "word [phon: \"r\\\"t\", morph:mhead: #2 '-', synsem: <np, #2 | elist>]";
        let d = parse_desc(text).unwrap();
        assert_eq!(parse_desc(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn comments_and_lines() {
        let err = parse_desc("% comment\n\n[a: ]").unwrap_err();
        assert_eq!(err.line, 3);
    }
}
