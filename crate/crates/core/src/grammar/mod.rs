//! Grammar files and the word-level engine.
//!
//! A grammar file declares the type hierarchy followed by principles and
//! relations:
//!
//! ```text
//! type sign [phon: string, synsem: synsem].
//! atom '+' < boolean.
//! head_feature_principle(X) :-
//!     X ::= headed_phrase
//!     ===> X::synsem:loc:cat:head === H,
//!          X::dtrs:head_dtr:synsem:loc:cat:head === H.
//! ```
mod engine;
mod search;

pub use engine::{check, demo, Analysis, CheckReport, Engine, EngineConfig, Generation, Source};

use crate::constraints::ConstraintSet;
use crate::error::LoadError;
use crate::syntax::{Parser, Tok};
use crate::type_system::TypeHierarchy;

/// Types and constraints; immutable once loaded.
#[derive(Debug, Clone)]
pub struct Grammar {
    pub types: TypeHierarchy,
    pub constraints: ConstraintSet,
}

impl Grammar {
    pub fn parse(text: &str, file: &str) -> Result<Grammar, LoadError> {
        let mut p = Parser::new(text, false).map_err(|e| LoadError::syntax(file, e))?;
        let mut types = TypeHierarchy::new();
        let mut constraints = ConstraintSet::new();
        while !p.at_eof() {
            let line = p.line();
            if p.is_word("type") || p.is_word("atom") {
                let atomic = p.is_word("atom");
                p.next();
                let (name, parents, feats) =
                    parse_type_decl(&mut p).map_err(|e| LoadError::syntax(file, e))?;
                let parents: Vec<&str> = parents.iter().map(String::as_str).collect();
                let feats: Vec<(&str, &str)> =
                    feats.iter().map(|(f, t)| (f.as_str(), t.as_str())).collect();
                types
                    .declare_type(&name, &parents, &feats, atomic)
                    .map_err(|e| LoadError::invalid(file, line, e.to_string()))?;
            } else if matches!(p.peek(), Tok::Word(_)) && matches!(p.peek_at(1), Tok::Punct("(")) {
                constraints
                    .parse_definition(&mut p, &types)
                    .map_err(|e| LoadError::syntax(file, e))?;
            } else {
                return Err(LoadError::syntax(
                    file,
                    p.error::<()>(format!("expected a declaration, found {}", p.peek()))
                        .unwrap_err(),
                ));
            }
        }
        types.finalize();
        constraints
            .resolve()
            .map_err(|(line, msg)| LoadError::invalid(file, line, msg))?;
        Ok(Grammar { types, constraints })
    }
}

type TypeDecl = (String, Vec<String>, Vec<(String, String)>);

fn parse_type_decl(p: &mut Parser) -> Result<TypeDecl, crate::syntax::SyntaxError> {
    let name = p.atom()?;
    let mut parents = Vec::new();
    if p.eat("<") {
        loop {
            parents.push(p.atom()?);
            if !p.eat(",") {
                break;
            }
        }
    }
    let mut feats = Vec::new();
    if p.eat("[") {
        if !p.is_punct("]") {
            loop {
                let f = p.word()?;
                p.expect(":")?;
                let t = p.atom()?;
                feats.push((f, t));
                if !p.eat(",") {
                    break;
                }
            }
        }
        p.expect("]")?;
    }
    p.expect(".")?;
    Ok((name, parents, feats))
}
