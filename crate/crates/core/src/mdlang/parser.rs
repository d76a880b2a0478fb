//! Rule syntax:
//!
//! ```text
//! file  = { md } ;
//! md    = "md" NAME ":" item { "," item } "->" "ident" "(" VAR "," VAR ")" [ ";" ] ;
//! item  = atom | sim ;
//! atom  = REL "(" VAR { "," VAR } ")" ;
//! sim   = "sim" "(" TAG ":" VAR "," VAR ")" ;
//! ```
//!
//! The first two relational atoms are the leading atoms. A repeated variable
//! is an equality, `_` is a fresh variable, `#` starts a comment.

use std::collections::BTreeSet;

use super::model::{Atom, MatchDependency, SimAtom};
use super::MdError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Sym(&'static str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

impl<'a> Lexer<'a> {
    fn skip_trivia(&mut self) {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, MdError> {
        self.skip_trivia();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        if rest.starts_with("->") {
            self.pos += 2;
            return Ok(Some((start, Tok::Sym("->"))));
        }
        for sym in ["(", ")", ",", ":", ";"] {
            if rest.starts_with(sym) {
                self.pos += 1;
                return Ok(Some((start, Tok::Sym(sym))));
            }
        }
        if word_char(c) {
            let len = rest.find(|ch: char| !word_char(ch)).unwrap_or(rest.len());
            self.pos += len;
            return Ok(Some((start, Tok::Word(rest[..len].to_string()))));
        }
        Err(MdError::SyntaxError {
            pos: start,
            expected: "identifier or punctuation".into(),
            found: c.to_string(),
        })
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    fresh: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, MdError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut toks = Vec::new();
        while let Some(t) = lx.next()? {
            toks.push(t);
        }
        Ok(Parser {
            toks,
            at: 0,
            end: src.len(),
            fresh: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn error(&self, expected: &str) -> MdError {
        let (pos, found) = match self.toks.get(self.at) {
            Some((p, Tok::Word(w))) => (*p, w.clone()),
            Some((p, Tok::Sym(s))) => (*p, s.to_string()),
            None => (self.end, "end of input".to_string()),
        };
        MdError::SyntaxError {
            pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn sym(&mut self, s: &'static str) -> Result<(), MdError> {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.error(&format!("'{s}'")))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, MdError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.at += 1;
                Ok(w)
            }
            _ => Err(self.error(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), MdError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.at += 1;
                Ok(())
            }
            _ => Err(self.error(&format!("'{kw}'"))),
        }
    }

    fn var(&mut self) -> Result<String, MdError> {
        let v = self.word("variable")?;
        if v.contains('.') {
            self.at -= 1;
            return Err(self.error("variable"));
        }
        if v == "_" {
            self.fresh += 1;
            return Ok(format!("_#{}", self.fresh));
        }
        Ok(v)
    }

    fn md(&mut self) -> Result<MatchDependency, MdError> {
        self.keyword("md")?;
        self.fresh = 0;
        let name = self.word("rule name")?;
        self.sym(":")?;
        let mut atoms = Vec::new();
        let mut sims = Vec::new();
        loop {
            let head = self.word("atom or sim(...)")?;
            self.sym("(")?;
            if head == "sim" {
                let tag = self.word("similarity tag")?;
                self.sym(":")?;
                let left = self.var()?;
                self.sym(",")?;
                let right = self.var()?;
                self.sym(")")?;
                sims.push(SimAtom { tag, left, right });
            } else {
                let mut vars = vec![self.var()?];
                while self.peek() == Some(&Tok::Sym(",")) {
                    self.at += 1;
                    vars.push(self.var()?);
                }
                self.sym(")")?;
                atoms.push(Atom {
                    relation: head,
                    vars,
                });
            }
            if self.peek() == Some(&Tok::Sym(",")) {
                self.at += 1;
            } else {
                break;
            }
        }
        self.sym("->")?;
        self.keyword("ident")?;
        self.sym("(")?;
        let y1 = self.var()?;
        self.sym(",")?;
        let y2 = self.var()?;
        self.sym(")")?;
        if self.peek() == Some(&Tok::Sym(";")) {
            self.at += 1;
        }
        if atoms.len() < 2 {
            return Err(MdError::MissingLeadingAtoms { md: name });
        }
        let mut rest = atoms.split_off(2);
        let second = atoms.pop().unwrap();
        let first = atoms.pop().unwrap();
        rest.shrink_to_fit();
        MatchDependency::new(&name, [first, second], rest, sims, (&y1, &y2))
    }
}

pub fn parse_md(text: &str) -> Result<MatchDependency, MdError> {
    let mut p = Parser::new(text)?;
    let md = p.md()?;
    if p.at != p.toks.len() {
        return Err(p.error("end of input"));
    }
    Ok(md)
}

pub fn parse_mds(text: &str) -> Result<Vec<MatchDependency>, MdError> {
    let mut p = Parser::new(text)?;
    let mut out: Vec<MatchDependency> = Vec::new();
    let mut names = BTreeSet::new();
    while p.at < p.toks.len() {
        let md = p.md()?;
        if !names.insert(md.name.clone()) {
            return Err(MdError::DuplicateName(md.name));
        }
        out.push(md);
    }
    Ok(out)
}
