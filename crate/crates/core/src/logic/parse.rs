//! Recursive-descent parser for sentences.
//!
//! ```text
//! sentence := quant+ body
//! quant    := ("sup" | "inf") IDENT ":" sort "."
//! sort     := "ball1(A^" INT ")" | "posball1(A)"
//! body     := bprod (("+" | "-") bprod)*
//! bprod    := NUMBER ("*" bprod)? | batom
//! batom    := "max(" body "," body ")" | "min(" body "," body ")"
//!           | "tsub(" body "," body ")" | "norm(" term ")" | "(" body ")"
//! term     := tprod ("+" tprod)*
//! tprod    := NUMBER "*" tprod | tatom ("*" tatom)*
//! tatom    := IDENT | "one" | "adj(" term ")" | "tuple(" term ("," term)* ")"
//!           | "sub(" term "," term ")" | "(" term ")"
//! ```
//! A `-` directly before a number at the start of an operand is a sign.

use std::collections::HashMap;

use super::ast::{Binding, Body, Formula, Quantifier, Sort, Term};
use crate::{Error, Result};

const KEYWORDS: [&str; 12] = [
    "sup", "inf", "max", "min", "tsub", "norm", "one", "adj", "tuple", "sub", "ball1", "posball1",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Plus,
    Minus,
    Star,
    Caret,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(x) => format!("number {x}"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b':' => Tok::Colon,
            b'.' => Tok::Dot,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let value: f64 = text[start..i].parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: "malformed number".into(),
                })?;
                out.push((Tok::Number(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character {:?}", text[start..].chars().next().unwrap_or('?')),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", describe(&want), describe(self.peek())))
        }
    }

    fn keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn expect_keyword(&mut self, word: &str) -> Result<()> {
        if self.keyword(word) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{word}', found {}", describe(self.peek())))
        }
    }

    fn is_keyword_call(&self, word: &str) -> bool {
        self.keyword(word) && *self.peek_at(1) == Tok::LParen
    }

    /// A number literal, optionally preceded by a sign.
    fn signed_number(&mut self) -> Option<f64> {
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::Number(x), _) => {
                self.bump();
                Some(x)
            }
            (Tok::Minus, Tok::Number(x)) => {
                self.bump();
                self.bump();
                Some(-x)
            }
            _ => None,
        }
    }

    fn sentence(&mut self) -> Result<(Formula, Vec<usize>)> {
        let mut bindings = Vec::new();
        let mut offsets = Vec::new();
        while self.keyword("sup") || self.keyword("inf") {
            let quantifier = if self.keyword("sup") {
                Quantifier::Sup
            } else {
                Quantifier::Inf
            };
            self.bump();
            offsets.push(self.offset());
            let var = match self.bump() {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => s,
                other => {
                    self.pos -= 1;
                    return self.error(format!("expected a variable name, found {}", describe(&other)));
                }
            };
            self.expect(Tok::Colon)?;
            let sort = self.sort()?;
            self.expect(Tok::Dot)?;
            bindings.push(Binding { quantifier, var, sort });
        }
        if bindings.is_empty() {
            return self.error("a sentence starts with 'sup' or 'inf'");
        }
        let body = self.body()?;
        if *self.peek() != Tok::End {
            return self.error(format!("unexpected {} after formula", describe(self.peek())));
        }
        Ok((Formula { bindings, body }, offsets))
    }

    fn sort(&mut self) -> Result<Sort> {
        if self.keyword("ball1") {
            self.bump();
            self.expect(Tok::LParen)?;
            self.expect_keyword("A")?;
            self.expect(Tok::Caret)?;
            let n = match self.peek().clone() {
                Tok::Number(x) if x >= 1.0 && x.fract() == 0.0 && x < 1e6 => x as usize,
                other => return self.error(format!("expected a positive integer, found {}", describe(&other))),
            };
            self.bump();
            self.expect(Tok::RParen)?;
            Ok(Sort::Ball { n })
        } else if self.keyword("posball1") {
            self.bump();
            self.expect(Tok::LParen)?;
            self.expect_keyword("A")?;
            self.expect(Tok::RParen)?;
            Ok(Sort::PosBall)
        } else {
            self.error(format!("expected a sort, found {}", describe(self.peek())))
        }
    }

    fn body(&mut self) -> Result<Body> {
        let mut acc = self.body_product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = Body::Add(Box::new(acc), Box::new(self.body_product()?));
                }
                Tok::Minus => {
                    self.bump();
                    acc = Body::Sub(Box::new(acc), Box::new(self.body_product()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn body_product(&mut self) -> Result<Body> {
        if let Some(c) = self.signed_number() {
            if *self.peek() == Tok::Star {
                self.bump();
                return Ok(Body::Scale(c, Box::new(self.body_product()?)));
            }
            return Ok(Body::Const(c));
        }
        self.body_atom()
    }

    fn binary_body(&mut self) -> Result<(Body, Body)> {
        self.bump();
        self.expect(Tok::LParen)?;
        let l = self.body()?;
        self.expect(Tok::Comma)?;
        let r = self.body()?;
        self.expect(Tok::RParen)?;
        Ok((l, r))
    }

    fn body_atom(&mut self) -> Result<Body> {
        if self.is_keyword_call("max") {
            let (l, r) = self.binary_body()?;
            Ok(Body::Max(Box::new(l), Box::new(r)))
        } else if self.is_keyword_call("min") {
            let (l, r) = self.binary_body()?;
            Ok(Body::Min(Box::new(l), Box::new(r)))
        } else if self.is_keyword_call("tsub") {
            let (l, r) = self.binary_body()?;
            Ok(Body::TSub(Box::new(l), Box::new(r)))
        } else if self.is_keyword_call("norm") {
            self.bump();
            self.bump();
            let t = self.term()?;
            self.expect(Tok::RParen)?;
            Ok(Body::Norm(t))
        } else if *self.peek() == Tok::LParen {
            self.bump();
            let b = self.body()?;
            self.expect(Tok::RParen)?;
            Ok(b)
        } else {
            self.error(format!("expected a formula, found {}", describe(self.peek())))
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut acc = self.term_product()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            acc = Term::Add(Box::new(acc), Box::new(self.term_product()?));
        }
        Ok(acc)
    }

    fn term_product(&mut self) -> Result<Term> {
        if let Some(c) = self.signed_number() {
            self.expect(Tok::Star)?;
            return Ok(Term::Scale(c, Box::new(self.term_product()?)));
        }
        let mut acc = self.term_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = Term::Mul(Box::new(acc), Box::new(self.term_atom()?));
        }
        Ok(acc)
    }

    fn term_atom(&mut self) -> Result<Term> {
        if self.is_keyword_call("adj") {
            self.bump();
            self.bump();
            let t = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok(Term::Adj(Box::new(t)));
        }
        if self.is_keyword_call("sub") {
            self.bump();
            self.bump();
            let l = self.term()?;
            self.expect(Tok::Comma)?;
            let r = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok(Term::Sub(Box::new(l), Box::new(r)));
        }
        if self.is_keyword_call("tuple") {
            self.bump();
            self.bump();
            let mut parts = vec![self.term()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                parts.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
            return Ok(Term::Tuple(parts));
        }
        match self.peek().clone() {
            Tok::Ident(s) if s == "one" => {
                self.bump();
                Ok(Term::One)
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Term::Var(s))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => self.error(format!("expected a term, found {}", describe(&other))),
        }
    }
}

/// Block shape of a term, checking that every operation is well sorted.
pub fn term_shape(t: &Term, env: &HashMap<String, Sort>) -> Result<(usize, usize)> {
    match t {
        Term::Var(v) => env
            .get(v)
            .map(Sort::shape)
            .ok_or_else(|| Error::UnboundVariable(v.clone())),
        Term::One => Ok((1, 1)),
        Term::Add(l, r) | Term::Sub(l, r) => {
            let (a, b) = (term_shape(l, env)?, term_shape(r, env)?);
            if a != b {
                return Err(Error::SortMismatch(format!(
                    "cannot combine shapes {a:?} and {b:?} in '{t}'"
                )));
            }
            Ok(a)
        }
        Term::Scale(_, x) => term_shape(x, env),
        Term::Mul(l, r) => {
            let (a, b) = (term_shape(l, env)?, term_shape(r, env)?);
            if a.1 != b.0 {
                return Err(Error::SortMismatch(format!(
                    "cannot multiply shapes {a:?} and {b:?} in '{t}'"
                )));
            }
            Ok((a.0, b.1))
        }
        Term::Adj(x) => term_shape(x, env).map(|(r, c)| (c, r)),
        Term::Tuple(parts) => {
            let mut rows = 0;
            for p in parts {
                let s = term_shape(p, env)?;
                if s.1 != 1 {
                    return Err(Error::SortMismatch(format!("tuple entry '{p}' is not a column")));
                }
                rows += s.0;
            }
            Ok((rows, 1))
        }
    }
}

fn check_body(b: &Body, env: &HashMap<String, Sort>) -> Result<()> {
    match b {
        Body::Const(_) => Ok(()),
        Body::Norm(t) => term_shape(t, env).map(|_| ()),
        Body::Max(l, r) | Body::Min(l, r) | Body::TSub(l, r) | Body::Add(l, r) | Body::Sub(l, r) => {
            check_body(l, env)?;
            check_body(r, env)
        }
        Body::Scale(_, x) => check_body(x, env),
    }
}

/// Checks that a formula is a well-sorted sentence with distinct bound
/// variables.
pub fn check_sentence(f: &Formula) -> Result<()> {
    check_with_offsets(f, &vec![0; f.bindings.len()])
}

fn check_with_offsets(f: &Formula, offsets: &[usize]) -> Result<()> {
    if f.bindings.is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "a sentence needs at least one quantifier".into(),
        });
    }
    let mut env = HashMap::new();
    for (b, &off) in f.bindings.iter().zip(offsets) {
        if let Sort::Ball { n: 0 } = b.sort {
            return Err(Error::SortMismatch("ball1(A^0) is not a sort".into()));
        }
        if env.insert(b.var.clone(), b.sort).is_some() {
            return Err(Error::Syntax {
                offset: off,
                message: format!("variable '{}' is bound twice", b.var),
            });
        }
    }
    check_body(&f.body, &env)
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let (f, offsets) = p.sentence()?;
    check_with_offsets(&f, &offsets)?;
    Ok(f)
}
