use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    Sup,
    Inf,
}

/// Quantifier domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sort {
    /// Unit ball of `A^n`; `n = 1` is the unit ball of `A`.
    Ball { n: usize },
    /// Positive part of the unit ball of `A`.
    PosBall,
}

impl Sort {
    /// Block shape `(rows, cols)` of elements of this sort.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            Sort::Ball { n } => (n, 1),
            Sort::PosBall => (1, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Binding {
    pub quantifier: Quantifier,
    pub var: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Term {
    Var(String),
    One,
    Add(Box<Term>, Box<Term>),
    Scale(f64, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Adj(Box<Term>),
    Tuple(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
}

/// Real-valued part of a formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Body {
    Const(f64),
    Norm(Term),
    Max(Box<Body>, Box<Body>),
    Min(Box<Body>, Box<Body>),
    /// Truncated subtraction `max(l − r, 0)`.
    TSub(Box<Body>, Box<Body>),
    Add(Box<Body>, Box<Body>),
    Sub(Box<Body>, Box<Body>),
    Scale(f64, Box<Body>),
}

/// A sentence: a nonempty quantifier prefix over a body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Formula {
    pub bindings: Vec<Binding>,
    pub body: Body,
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn mul(l: Term, r: Term) -> Self {
        Term::Mul(Box::new(l), Box::new(r))
    }

    pub fn sub(l: Term, r: Term) -> Self {
        Term::Sub(Box::new(l), Box::new(r))
    }

    pub fn adj(t: Term) -> Self {
        Term::Adj(Box::new(t))
    }
}

impl Body {
    pub fn max(l: Body, r: Body) -> Self {
        Body::Max(Box::new(l), Box::new(r))
    }
}

/// `sup x. inf v. inf y. max(‖x − v·y‖, ‖v*v − 1‖)` over the unit balls of
/// `A^n`, `A^n` and the positive unit ball of `A`.
pub fn build_phi_n(n: usize) -> Formula {
    assert!(n >= 1, "φ_n needs n ≥ 1");
    let (x, v, y) = (Term::var("x"), Term::var("v"), Term::var("y"));
    Formula {
        bindings: vec![
            Binding {
                quantifier: Quantifier::Sup,
                var: "x".into(),
                sort: Sort::Ball { n },
            },
            Binding {
                quantifier: Quantifier::Inf,
                var: "v".into(),
                sort: Sort::Ball { n },
            },
            Binding {
                quantifier: Quantifier::Inf,
                var: "y".into(),
                sort: Sort::PosBall,
            },
        ],
        body: Body::max(
            Body::Norm(Term::sub(x, Term::mul(v.clone(), y))),
            Body::Norm(Term::sub(Term::mul(Term::adj(v.clone()), v), Term::One)),
        ),
    }
}

fn number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that round-trips.
    write!(f, "{c:?}")
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Ball { n } => write!(f, "ball1(A^{n})"),
            Sort::PosBall => write!(f, "posball1(A)"),
        }
    }
}

impl Term {
    fn is_sum(&self) -> bool {
        matches!(self, Term::Add(..))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, t: &Term, wrap: bool| {
            if wrap {
                write!(f, "({t})")
            } else {
                write!(f, "{t}")
            }
        };
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::One => write!(f, "one"),
            Term::Add(l, r) => {
                write!(f, "{l} + ")?;
                paren(f, r, r.is_sum())
            }
            Term::Scale(c, t) => {
                number(f, *c)?;
                write!(f, "*")?;
                paren(f, t, t.is_sum())
            }
            Term::Mul(l, r) => {
                paren(f, l, matches!(**l, Term::Add(..) | Term::Scale(..)))?;
                write!(f, "*")?;
                paren(f, r, matches!(**r, Term::Add(..) | Term::Scale(..) | Term::Mul(..)))
            }
            Term::Adj(t) => write!(f, "adj({t})"),
            Term::Tuple(ts) => {
                write!(f, "tuple(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Term::Sub(l, r) => write!(f, "sub({l}, {r})"),
        }
    }
}

impl Body {
    fn is_sum(&self) -> bool {
        matches!(self, Body::Add(..) | Body::Sub(..))
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, b: &Body, wrap: bool| {
            if wrap {
                write!(f, "({b})")
            } else {
                write!(f, "{b}")
            }
        };
        match self {
            Body::Const(c) => number(f, *c),
            Body::Norm(t) => write!(f, "norm({t})"),
            Body::Max(l, r) => write!(f, "max({l}, {r})"),
            Body::Min(l, r) => write!(f, "min({l}, {r})"),
            Body::TSub(l, r) => write!(f, "tsub({l}, {r})"),
            Body::Add(l, r) => {
                write!(f, "{l} + ")?;
                paren(f, r, r.is_sum())
            }
            Body::Sub(l, r) => {
                write!(f, "{l} - ")?;
                paren(f, r, r.is_sum())
            }
            Body::Scale(c, b) => {
                number(f, *c)?;
                write!(f, "*")?;
                paren(f, b, b.is_sum())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bindings {
            let q = match b.quantifier {
                Quantifier::Sup => "sup",
                Quantifier::Inf => "inf",
            };
            write!(f, "{q} {}:{}. ", b.var, b.sort)?;
        }
        write!(f, "{}", self.body)
    }
}
