//! The regular fragment of the internal language of a doctrine.
//!
//! Formulas are built from `T`, relation symbols, equations `t = u`,
//! conjunction `&` and existential quantification `E x:A. phi`; terms are
//! variables and applications of function symbols. A formula in a typing
//! context `x1:A1, ..., xn:An` evaluates to an element of the fiber over the
//! left-associated product `((A1 x A2) x ...) x An`:
//!
//! ```text
//! T          top
//! R(t, ..)   <t, ..>* R
//! t = u      <t, u>* δ_A
//! p & q      meet
//! E x:A. p   ∃ along the projection dropping x
//! ```
//!
//! The grammar is in `docs/grammar.md`. `E` binds as far to the right as
//! possible, so `E x:X. p & q` quantifies over the conjunction.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::doctrine::{equality_predicate, Doctrine};
use crate::fincat::{Context, FincatError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    fn to(self, other: Span) -> Span {
        Span::new(self.start, other.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntlangError {
    #[error("lex error at {pos}: unexpected character {ch:?}")]
    Lex { pos: usize, ch: char },
    #[error("parse error at {at}: expected {expected}, found {found}")]
    Parse { at: String, expected: String, found: String },
    #[error("unknown {kind} {name:?} at {span}")]
    UnknownSymbol { kind: &'static str, name: String, span: Span },
    #[error("{name} takes {expected} argument(s), given {found} at {span}")]
    Arity { name: String, expected: usize, found: usize, span: Span },
    #[error("type error at {span}: {term} has sort {found}, expected {expected}")]
    Type { term: String, expected: String, found: String, span: Span },
    #[error("variable {0} listed twice in the context")]
    DuplicateVariable(String),
    #[error("malformed context entry {0:?}")]
    MalformedContext(String),
    #[error("signature: {0}")]
    Signature(String),
    #[error(transparent)]
    Fincat(#[from] FincatError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var { name: String, span: Span },
    App { name: String, args: Vec<Term>, span: Span },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegularFormula {
    Top { span: Span },
    Rel { name: String, args: Vec<Term>, span: Span },
    Eq { left: Term, right: Term, span: Span },
    And { left: Box<RegularFormula>, right: Box<RegularFormula>, span: Span },
    Exists { var: String, sort: String, body: Box<RegularFormula>, span: Span },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var { name: name.into(), span: Span::default() }
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App { name: name.into(), args, span: Span::default() }
    }

    pub fn span(&self) -> Span {
        match self {
            Term::Var { span, .. } | Term::App { span, .. } => *span,
        }
    }

    pub fn without_spans(&self) -> Term {
        match self {
            Term::Var { name, .. } => Term::var(name),
            Term::App { name, args, .. } => Term::app(name, args.iter().map(Term::without_spans).collect()),
        }
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Var { name, span } if name == from => Term::Var { name: to.into(), span: *span },
            Term::Var { .. } => self.clone(),
            Term::App { name, args, span } => {
                Term::App { name: name.clone(), args: args.iter().map(|t| t.rename(from, to)).collect(), span: *span }
            }
        }
    }

    fn mentions(&self, v: &str) -> bool {
        match self {
            Term::Var { name, .. } => name == v,
            Term::App { args, .. } => args.iter().any(|t| t.mentions(v)),
        }
    }
}

impl RegularFormula {
    pub fn top() -> Self {
        RegularFormula::Top { span: Span::default() }
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Self {
        RegularFormula::Rel { name: name.into(), args, span: Span::default() }
    }

    pub fn eq(left: Term, right: Term) -> Self {
        RegularFormula::Eq { left, right, span: Span::default() }
    }

    pub fn and(left: Self, right: Self) -> Self {
        RegularFormula::And { left: Box::new(left), right: Box::new(right), span: Span::default() }
    }

    pub fn exists(var: &str, sort: &str, body: Self) -> Self {
        RegularFormula::Exists { var: var.into(), sort: sort.into(), body: Box::new(body), span: Span::default() }
    }

    pub fn span(&self) -> Span {
        match self {
            RegularFormula::Top { span }
            | RegularFormula::Rel { span, .. }
            | RegularFormula::Eq { span, .. }
            | RegularFormula::And { span, .. }
            | RegularFormula::Exists { span, .. } => *span,
        }
    }

    /// The same tree with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Self {
        match self {
            RegularFormula::Top { .. } => Self::top(),
            RegularFormula::Rel { name, args, .. } => Self::rel(name, args.iter().map(Term::without_spans).collect()),
            RegularFormula::Eq { left, right, .. } => Self::eq(left.without_spans(), right.without_spans()),
            RegularFormula::And { left, right, .. } => Self::and(left.without_spans(), right.without_spans()),
            RegularFormula::Exists { var, sort, body, .. } => Self::exists(var, sort, body.without_spans()),
        }
    }

    /// Free occurrences of `from` renamed to `to`. The caller keeps `to` fresh.
    pub fn rename_free(&self, from: &str, to: &str) -> Self {
        match self {
            RegularFormula::Top { .. } => self.clone(),
            RegularFormula::Rel { name, args, span } => RegularFormula::Rel {
                name: name.clone(),
                args: args.iter().map(|t| t.rename(from, to)).collect(),
                span: *span,
            },
            RegularFormula::Eq { left, right, span } => {
                RegularFormula::Eq { left: left.rename(from, to), right: right.rename(from, to), span: *span }
            }
            RegularFormula::And { left, right, span } => RegularFormula::And {
                left: Box::new(left.rename_free(from, to)),
                right: Box::new(right.rename_free(from, to)),
                span: *span,
            },
            RegularFormula::Exists { var, .. } if var == from => self.clone(),
            RegularFormula::Exists { var, sort, body, span } => RegularFormula::Exists {
                var: var.clone(),
                sort: sort.clone(),
                body: Box::new(body.rename_free(from, to)),
                span: *span,
            },
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        match self {
            RegularFormula::Top { .. } => false,
            RegularFormula::Rel { args, .. } => args.iter().any(|t| t.mentions(v)),
            RegularFormula::Eq { left, right, .. } => left.mentions(v) || right.mentions(v),
            RegularFormula::And { left, right, .. } => left.mentions(v) || right.mentions(v),
            RegularFormula::Exists { var, body, .. } => var == v || body.mentions(v),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } => f.write_str(name),
            Term::App { name, args, .. } if args.is_empty() => f.write_str(name),
            Term::App { name, args, .. } => {
                write!(f, "{name}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for RegularFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularFormula::Top { .. } => f.write_str("T"),
            RegularFormula::Rel { name, args, .. } => write!(f, "{}", Term::app(name, args.clone())),
            RegularFormula::Eq { left, right, .. } => write!(f, "{left} = {right}"),
            RegularFormula::And { left, right, .. } => {
                match **left {
                    RegularFormula::Exists { .. } => write!(f, "({left})")?,
                    _ => write!(f, "{left}")?,
                }
                f.write_str(" & ")?;
                match **right {
                    RegularFormula::And { .. } => write!(f, "({right})"),
                    _ => write!(f, "{right}"),
                }
            }
            RegularFormula::Exists { var, sort, body, .. } => write!(f, "E {var}:{sort}. {body}"),
        }
    }
}

pub struct FunctionSymbol<O, M> {
    pub args: Vec<String>,
    pub result: String,
    /// From the context object of `args` to the result sort.
    pub morphism: M,
    _obj: std::marker::PhantomData<O>,
}

pub struct RelationSymbol<E> {
    pub args: Vec<String>,
    /// Over the context object of `args`.
    pub predicate: E,
}

/// Sorts, function symbols and relation symbols over a doctrine.
pub struct Signature<D: Doctrine> {
    sorts: BTreeMap<String, D::Obj>,
    functions: BTreeMap<String, FunctionSymbol<D::Obj, D::Mor>>,
    relations: BTreeMap<String, RelationSymbol<D::Elem>>,
}

pub fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphanumeric() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && s != "T"
        && s != "E"
}

impl<D: Doctrine> Signature<D> {
    pub fn empty() -> Self {
        Self { sorts: BTreeMap::new(), functions: BTreeMap::new(), relations: BTreeMap::new() }
    }

    /// Every object as a sort named by its rendering, when that is an
    /// identifier, and by `A<i>` for its position in the universe. Every
    /// morphism with an identifier name between named sorts becomes a unary
    /// function symbol. Hom-sets with more than 4096 candidates are skipped.
    pub fn of(d: &D) -> Self {
        let mut sig = Self::empty();
        let objs = d.universe();
        for a in &objs {
            let name = d.render_obj(a);
            if is_identifier(&name) {
                sig.sorts.entry(name).or_insert_with(|| a.clone());
            }
        }
        for (i, a) in objs.iter().enumerate() {
            sig.sorts.entry(format!("A{i}")).or_insert_with(|| a.clone());
        }
        let names: Vec<String> = objs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let r = d.render_obj(a);
                if is_identifier(&r) {
                    r
                } else {
                    format!("A{i}")
                }
            })
            .collect();
        for (a, an) in objs.iter().zip(&names) {
            for (b, bn) in objs.iter().zip(&names) {
                if d.hom_cost(a, b) > 4096 {
                    continue;
                }
                for f in d.hom(a, b) {
                    let name = d.render_mor(&f);
                    if is_identifier(&name) && !sig.functions.contains_key(&name) && !sig.sorts.contains_key(&name) {
                        sig.insert_function(&name, vec![an.clone()], bn.clone(), f);
                    }
                }
            }
        }
        sig
    }

    fn check_name(&self, name: &str) -> Result<(), IntlangError> {
        if !is_identifier(name) {
            return Err(IntlangError::Signature(format!("{name:?} is not an identifier")));
        }
        if self.functions.contains_key(name) || self.relations.contains_key(name) {
            return Err(IntlangError::Signature(format!("symbol {name} declared twice")));
        }
        Ok(())
    }

    fn sort_obj(&self, name: &str) -> Result<&D::Obj, IntlangError> {
        self.sorts.get(name).ok_or_else(|| IntlangError::Signature(format!("unknown sort {name}")))
    }

    fn insert_function(&mut self, name: &str, args: Vec<String>, result: String, morphism: D::Mor) {
        self.functions.insert(name.into(), FunctionSymbol { args, result, morphism, _obj: std::marker::PhantomData });
    }

    pub fn with_sort(mut self, name: &str, a: D::Obj) -> Result<Self, IntlangError> {
        if !is_identifier(name) {
            return Err(IntlangError::Signature(format!("{name:?} is not an identifier")));
        }
        if self.sorts.insert(name.into(), a).is_some() {
            return Err(IntlangError::Signature(format!("sort {name} declared twice")));
        }
        Ok(self)
    }

    /// A function symbol `name: args -> result`; `f` must go from the context
    /// object of `args` to `result`.
    pub fn with_function(
        mut self,
        d: &D,
        name: &str,
        args: &[&str],
        result: &str,
        f: D::Mor,
    ) -> Result<Self, IntlangError> {
        self.check_name(name)?;
        let sorts: Vec<D::Obj> = args.iter().map(|s| self.sort_obj(s).cloned()).collect::<Result<_, _>>()?;
        let ctx = Context::new(d, &sorts)?;
        if d.dom(&f) != ctx.object || d.cod(&f) != *self.sort_obj(result)? {
            return Err(IntlangError::Signature(format!(
                "{name}: {} does not go from ({}) to {result}",
                d.render_mor(&f),
                args.join(", ")
            )));
        }
        self.insert_function(name, args.iter().map(|s| s.to_string()).collect(), result.into(), f);
        Ok(self)
    }

    /// A relation symbol over the context object of `args`.
    pub fn with_relation(mut self, name: &str, args: &[&str], predicate: D::Elem) -> Result<Self, IntlangError> {
        self.check_name(name)?;
        for s in args {
            self.sort_obj(s)?;
        }
        self.relations
            .insert(name.into(), RelationSymbol { args: args.iter().map(|s| s.to_string()).collect(), predicate });
        Ok(self)
    }

    pub fn sort(&self, name: &str) -> Option<&D::Obj> {
        self.sorts.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSymbol<D::Obj, D::Mor>> {
        self.functions.get(name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSymbol<D::Elem>> {
        self.relations.get(name)
    }

    pub fn sorts(&self) -> impl Iterator<Item = &str> {
        self.sorts.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Exists,
    Amp,
    Equals,
    Colon,
    Dot,
    Comma,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::Top => f.write_str("\"T\""),
            Tok::Exists => f.write_str("\"E\""),
            Tok::Amp => f.write_str("\"&\""),
            Tok::Equals => f.write_str("\"=\""),
            Tok::Colon => f.write_str("\":\""),
            Tok::Dot => f.write_str("\".\""),
            Tok::Comma => f.write_str("\",\""),
            Tok::LParen => f.write_str("\"(\""),
            Tok::RParen => f.write_str("\")\""),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, IntlangError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let single = match c {
            '&' => Some(Tok::Amp),
            '=' => Some(Tok::Equals),
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            it.next();
            out.push((t, Span::new(i, i + 1)));
            continue;
        }
        if !(c.is_ascii_alphanumeric() || c == '_') {
            return Err(IntlangError::Lex { pos: i, ch: c });
        }
        let mut end = i;
        while let Some(&(j, c)) = it.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                end = j + c.len_utf8();
                it.next();
            } else {
                break;
            }
        }
        let word = &src[i..end];
        let tok = match word {
            "T" => Tok::Top,
            "E" => Tok::Exists,
            _ => Tok::Ident(word.to_string()),
        };
        out.push((tok, Span::new(i, end)));
    }
    out.push((Tok::End, Span::new(src.len(), src.len())));
    Ok(out)
}

struct Parser<'a, D: Doctrine> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    sig: &'a Signature<D>,
    bound: Vec<String>,
}

impl<D: Doctrine> Parser<'_, D> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> IntlangError {
        let (tok, span) = &self.toks[self.pos];
        let at = match tok {
            Tok::End => "end of input".to_string(),
            _ => format!("position {}", span.start),
        };
        IntlangError::Parse { at, expected: expected.into(), found: tok.to_string() }
    }

    fn expect(&mut self, t: Tok) -> Result<Span, IntlangError> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            Err(self.error(&t.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), IntlangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            _ => Err(self.error(what)),
        }
    }

    fn formula(&mut self) -> Result<RegularFormula, IntlangError> {
        let mut left = self.atom()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.atom()?;
            let span = left.span().to(right.span());
            left = RegularFormula::And { left: Box::new(left), right: Box::new(right), span };
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<RegularFormula, IntlangError> {
        match self.peek().clone() {
            Tok::Top => Ok(RegularFormula::Top { span: self.bump().1 }),
            Tok::Exists => {
                let start = self.bump().1;
                let (var, _) = self.ident("a variable")?;
                self.expect(Tok::Colon)?;
                let (sort, sspan) = self.ident("a sort")?;
                if self.sig.sort(&sort).is_none() {
                    return Err(IntlangError::UnknownSymbol { kind: "sort", name: sort, span: sspan });
                }
                self.expect(Tok::Dot)?;
                self.bound.push(var.clone());
                let body = self.formula();
                self.bound.pop();
                let body = body?;
                let span = start.to(body.span());
                Ok(RegularFormula::Exists { var, sort, body: Box::new(body), span })
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) if self.sig.relation(&name).is_some() && !self.bound.contains(&name) => {
                let (_, start) = self.bump();
                let (args, span) = self.arguments(start)?;
                let expected = self.sig.relation(&name).map_or(0, |r| r.args.len());
                if args.len() != expected {
                    return Err(IntlangError::Arity { name, expected, found: args.len(), span });
                }
                Ok(RegularFormula::Rel { name, args, span })
            }
            Tok::Ident(_) => {
                let left = self.term()?;
                if *self.peek() != Tok::Equals {
                    return Err(self.error("\"=\""));
                }
                self.bump();
                let right = self.term()?;
                let span = left.span().to(right.span());
                Ok(RegularFormula::Eq { left, right, span })
            }
            _ => Err(self.error("a formula")),
        }
    }

    fn arguments(&mut self, start: Span) -> Result<(Vec<Term>, Span), IntlangError> {
        if *self.peek() != Tok::LParen {
            return Ok((vec![], start));
        }
        self.bump();
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
        }
        let end = self.expect(Tok::RParen)?;
        Ok((args, start.to(end)))
    }

    fn term(&mut self) -> Result<Term, IntlangError> {
        let (name, start) = self.ident("a term")?;
        let is_bound = self.bound.contains(&name);
        if *self.peek() == Tok::LParen {
            let (args, span) = self.arguments(start)?;
            let Some(fs) = self.sig.function(&name) else {
                return Err(IntlangError::UnknownSymbol { kind: "function symbol", name, span: start });
            };
            if args.len() != fs.args.len() {
                return Err(IntlangError::Arity { name, expected: fs.args.len(), found: args.len(), span });
            }
            return Ok(Term::App { name, args, span });
        }
        match self.sig.function(&name) {
            Some(fs) if fs.args.is_empty() && !is_bound => Ok(Term::App { name, args: vec![], span: start }),
            _ => Ok(Term::Var { name, span: start }),
        }
    }
}

/// Parses `src` against `sig`. Bare identifiers that are neither bound nor
/// nullary function symbols are free variables, resolved at evaluation.
pub fn parse_formula<D: Doctrine>(src: &str, sig: &Signature<D>) -> Result<RegularFormula, IntlangError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, sig, bound: vec![] };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error("\"&\" or end of input"));
    }
    Ok(f)
}

/// An ordered list of typed variables with its product object.
pub struct TypingContext<D: Doctrine> {
    pub vars: Vec<(String, String)>,
    pub context: Context<D::Obj, D::Mor>,
}

impl<D: Doctrine> Clone for TypingContext<D> {
    fn clone(&self) -> Self {
        Self { vars: self.vars.clone(), context: self.context.clone() }
    }
}

impl<D: Doctrine> TypingContext<D> {
    pub fn new(d: &D, sig: &Signature<D>, vars: &[(&str, &str)]) -> Result<Self, IntlangError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut sorts = Vec::new();
        for (v, s) in vars {
            if !is_identifier(v) {
                return Err(IntlangError::MalformedContext(format!("{v}:{s}")));
            }
            if !seen.insert(*v) {
                return Err(IntlangError::DuplicateVariable(v.to_string()));
            }
            let a = sig.sort(s).ok_or_else(|| IntlangError::UnknownSymbol {
                kind: "sort",
                name: s.to_string(),
                span: Span::default(),
            })?;
            sorts.push(a.clone());
        }
        Ok(Self {
            vars: vars.iter().map(|(v, s)| (v.to_string(), s.to_string())).collect(),
            context: Context::new(d, &sorts)?,
        })
    }

    /// `"y:Y, a:A"`; the empty string is the empty context.
    pub fn parse(d: &D, sig: &Signature<D>, src: &str) -> Result<Self, IntlangError> {
        let mut vars = Vec::new();
        for entry in src.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (v, s) = entry.split_once(':').ok_or_else(|| IntlangError::MalformedContext(entry.into()))?;
            vars.push((v.trim(), s.trim()));
        }
        Self::new(d, sig, &vars)
    }

    pub fn object(&self) -> &D::Obj {
        &self.context.object
    }

    /// This context followed by `var:sort`.
    pub fn extend(&self, d: &D, sig: &Signature<D>, var: &str, sort: &str) -> Result<Self, IntlangError> {
        let mut vars: Vec<(&str, &str)> = self.vars.iter().map(|(v, s)| (v.as_str(), s.as_str())).collect();
        vars.push((var, sort));
        Self::new(d, sig, &vars)
    }

    /// The projection from this context onto its first `n` variables.
    pub fn dropping(&self, d: &D, sig: &Signature<D>, n: usize) -> Result<(Self, D::Mor), IntlangError> {
        let vars: Vec<(&str, &str)> = self.vars[..n].iter().map(|(v, s)| (v.as_str(), s.as_str())).collect();
        let smaller = Self::new(d, sig, &vars)?;
        let p = self.context.select(d, &smaller.context, &(0..n).collect::<Vec<_>>())?;
        Ok((smaller, p))
    }
}

struct Env<D: Doctrine> {
    vars: Vec<(String, String)>,
    sorts: Vec<D::Obj>,
    context: Context<D::Obj, D::Mor>,
}

fn type_error(t: &Term, expected: &str, found: &str) -> IntlangError {
    IntlangError::Type { term: t.to_string(), expected: expected.into(), found: found.into(), span: t.span() }
}

fn eval_term<D: Doctrine>(d: &D, sig: &Signature<D>, env: &Env<D>, t: &Term) -> Result<(D::Mor, String), IntlangError> {
    match t {
        Term::Var { name, span } => {
            if let Some(i) = env.vars.iter().rposition(|(v, _)| v == name) {
                return Ok((env.context.projections[i].clone(), env.vars[i].1.clone()));
            }
            match sig.function(name) {
                Some(fs) if fs.args.is_empty() => {
                    eval_term(d, sig, env, &Term::App { name: name.clone(), args: vec![], span: *span })
                }
                _ => Err(IntlangError::UnknownSymbol { kind: "variable", name: name.clone(), span: *span }),
            }
        }
        Term::App { name, args, span } => {
            let fs = sig.function(name).ok_or_else(|| IntlangError::UnknownSymbol {
                kind: "function symbol",
                name: name.clone(),
                span: *span,
            })?;
            if args.len() != fs.args.len() {
                return Err(IntlangError::Arity {
                    name: name.clone(),
                    expected: fs.args.len(),
                    found: args.len(),
                    span: *span,
                });
            }
            let mut maps = Vec::with_capacity(args.len());
            let mut sorts = Vec::with_capacity(args.len());
            for (arg, want) in args.iter().zip(&fs.args) {
                let (m, s) = eval_term(d, sig, env, arg)?;
                if s != *want {
                    return Err(type_error(arg, want, &s));
                }
                maps.push(m);
                sorts.push(sig.sort(want).cloned().expect("declared sort"));
            }
            let args_ctx = Context::new(d, &sorts)?;
            let tuple = args_ctx.tuple(d, &env.context.object, &maps)?;
            Ok((d.compose(&fs.morphism, &tuple), fs.result.clone()))
        }
    }
}

fn eval<D: Doctrine>(d: &D, sig: &Signature<D>, env: &Env<D>, phi: &RegularFormula) -> Result<D::Elem, IntlangError> {
    let obj = &env.context.object;
    match phi {
        RegularFormula::Top { .. } => Ok(d.top(obj)),
        RegularFormula::Rel { name, args, span } => {
            let r = sig.relation(name).ok_or_else(|| IntlangError::UnknownSymbol {
                kind: "relation symbol",
                name: name.clone(),
                span: *span,
            })?;
            if args.len() != r.args.len() {
                return Err(IntlangError::Arity {
                    name: name.clone(),
                    expected: r.args.len(),
                    found: args.len(),
                    span: *span,
                });
            }
            let mut maps = Vec::new();
            let mut sorts = Vec::new();
            for (arg, want) in args.iter().zip(&r.args) {
                let (m, s) = eval_term(d, sig, env, arg)?;
                if s != *want {
                    return Err(type_error(arg, want, &s));
                }
                maps.push(m);
                sorts.push(sig.sort(want).cloned().expect("declared sort"));
            }
            let tuple = Context::new(d, &sorts)?.tuple(d, obj, &maps)?;
            Ok(d.reindex(&tuple, &r.predicate))
        }
        RegularFormula::Eq { left, right, .. } => {
            let (l, ls) = eval_term(d, sig, env, left)?;
            let (r, rs) = eval_term(d, sig, env, right)?;
            if ls != rs {
                return Err(type_error(right, &ls, &rs));
            }
            let a = sig.sort(&ls).cloned().expect("declared sort");
            let tuple = Context::new(d, &[a.clone(), a.clone()])?.tuple(d, obj, &[l, r])?;
            Ok(d.reindex(&tuple, &equality_predicate(d, &a)?))
        }
        RegularFormula::And { left, right, .. } => {
            let l = eval(d, sig, env, left)?;
            let r = eval(d, sig, env, right)?;
            Ok(d.meet(obj, &l, &r))
        }
        RegularFormula::Exists { var, sort, body, span } => {
            let a = sig.sort(sort).ok_or_else(|| IntlangError::UnknownSymbol {
                kind: "sort",
                name: sort.clone(),
                span: *span,
            })?;
            let mut sorts = env.sorts.clone();
            sorts.push(a.clone());
            let mut vars = env.vars.clone();
            vars.push((var.clone(), sort.clone()));
            let inner = Env { vars, context: Context::new(d, &sorts)?, sorts };
            let n = env.sorts.len();
            let drop = inner.context.select(d, &env.context, &(0..n).collect::<Vec<_>>())?;
            let v = eval(d, sig, &inner, body)?;
            Ok(d.exists(&drop, &v))
        }
    }
}

/// The value of `phi` in the fiber over the context object.
pub fn evaluate<D: Doctrine>(
    d: &D,
    sig: &Signature<D>,
    ctx: &TypingContext<D>,
    phi: &RegularFormula,
) -> Result<D::Elem, IntlangError> {
    let env = Env { vars: ctx.vars.clone(), sorts: ctx.context.sorts.clone(), context: ctx.context.clone() };
    eval(d, sig, &env, phi)
}

/// Whether `phi <= psi` in the fiber over the context object.
pub fn entails<D: Doctrine>(
    d: &D,
    sig: &Signature<D>,
    ctx: &TypingContext<D>,
    phi: &RegularFormula,
    psi: &RegularFormula,
) -> Result<bool, IntlangError> {
    let a = evaluate(d, sig, ctx, phi)?;
    let b = evaluate(d, sig, ctx, psi)?;
    Ok(d.leq(ctx.object(), &a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::Func;
    use crate::fixtures::LocalicDoctrine;

    fn sub() -> LocalicDoctrine {
        LocalicDoctrine::finset_sub(vec![1, 2, 4])
    }

    fn sig(d: &LocalicDoctrine) -> Signature<LocalicDoctrine> {
        Signature::empty()
            .with_sort("One", 1)
            .unwrap()
            .with_sort("Two", 2)
            .unwrap()
            .with_function(d, "f", &["Two"], "One", Func::new(2, 1, vec![0, 0]))
            .unwrap()
            .with_function(d, "neg", &["Two"], "Two", Func::new(2, 2, vec![1, 0]))
            .unwrap()
            .with_function(d, "zero", &[], "Two", Func::new(1, 2, vec![0]))
            .unwrap()
            .with_relation("R", &["Two"], vec![1, 1])
            .unwrap()
            .with_relation("Z", &["Two"], vec![1, 0])
            .unwrap()
    }

    #[test]
    fn top_parses() {
        let d = sub();
        let s = sig(&d);
        assert_eq!(parse_formula("T", &s).unwrap().without_spans(), RegularFormula::top());
    }

    #[test]
    fn quantifier_scopes_over_the_conjunction() {
        let d = sub();
        let s = sig(&d);
        let phi = parse_formula("E x:Two. neg(x) = y & f(x) = s", &s).unwrap();
        let expected = RegularFormula::exists(
            "x",
            "Two",
            RegularFormula::and(
                RegularFormula::eq(Term::app("neg", vec![Term::var("x")]), Term::var("y")),
                RegularFormula::eq(Term::app("f", vec![Term::var("x")]), Term::var("s")),
            ),
        );
        assert_eq!(phi.without_spans(), expected);
        assert_eq!(phi.span(), Span::new(0, 30));
    }

    #[test]
    fn incomplete_equation_fails_at_end_of_input() {
        let d = sub();
        let s = sig(&d);
        let e = parse_formula("x = ", &s).unwrap_err();
        assert!(matches!(&e, IntlangError::Parse { at, .. } if at == "end of input"), "{e}");
    }

    #[test]
    fn errors_carry_positions() {
        let d = sub();
        let s = sig(&d);
        assert!(matches!(parse_formula("x = $", &s), Err(IntlangError::Lex { pos: 4, ch: '$' })));
        assert!(matches!(
            parse_formula("g(x) = x", &s),
            Err(IntlangError::UnknownSymbol { span: Span { start: 0, end: 1 }, .. })
        ));
        assert!(matches!(parse_formula("neg(x, x) = x", &s), Err(IntlangError::Arity { expected: 1, found: 2, .. })));
        assert!(matches!(parse_formula("E x:Three. T", &s), Err(IntlangError::UnknownSymbol { kind: "sort", .. })));
        let ctx = TypingContext::parse(&d, &s, "x:Two").unwrap();
        let phi = parse_formula("f(x) = x", &s).unwrap();
        let e = evaluate(&d, &s, &ctx, &phi).unwrap_err();
        assert!(matches!(&e, IntlangError::Type { span: Span { start: 7, end: 8 }, .. }), "{e}");
    }

    #[test]
    fn equation_of_variables_is_equality_predicate() {
        let d = sub();
        let s = sig(&d);
        let ctx = TypingContext::parse(&d, &s, "x:Two, x':Two").unwrap();
        let v = evaluate(&d, &s, &ctx, &parse_formula("x = x'", &s).unwrap()).unwrap();
        assert_eq!(v, equality_predicate(&d, &2).unwrap());
    }

    #[test]
    fn existential_of_constant_map_is_top() {
        let d = sub();
        let s = sig(&d);
        let ctx = TypingContext::parse(&d, &s, "y:One").unwrap();
        let v = evaluate(&d, &s, &ctx, &parse_formula("E x:Two. f(x) = y", &s).unwrap()).unwrap();
        assert_eq!(v, d.top(&1));
    }

    #[test]
    fn constants_and_shadowing() {
        let d = sub();
        let s = sig(&d);
        let ctx = TypingContext::parse(&d, &s, "x:Two").unwrap();
        let at_zero = evaluate(&d, &s, &ctx, &parse_formula("x = zero", &s).unwrap()).unwrap();
        assert_eq!(at_zero, vec![1, 0]);
        let shadowed = evaluate(&d, &s, &ctx, &parse_formula("E x:Two. x = zero", &s).unwrap()).unwrap();
        assert_eq!(shadowed, d.top(&2));
    }

    #[test]
    fn entailment() {
        let d = sub();
        let s = sig(&d);
        let ctx = TypingContext::parse(&d, &s, "x:Two, x':Two").unwrap();
        let p = |src: &str| parse_formula(src, &s).unwrap();
        assert!(entails(&d, &s, &ctx, &p("Z(x)"), &p("T")).unwrap());
        assert!(entails(&d, &s, &ctx, &p("x = x' & Z(x)"), &p("Z(x')")).unwrap());
        assert!(!entails(&d, &s, &ctx, &p("R(x)"), &p("x = x'")).unwrap());
    }

    #[test]
    fn display_round_trips() {
        let d = sub();
        let s = sig(&d);
        for src in ["T", "(E x:Two. Z(x)) & T", "Z(y) & (T & x = neg(zero))", "E x:Two. E y:One. f(x) = y & R(x)"] {
            let phi = parse_formula(src, &s).unwrap();
            assert_eq!(phi.to_string(), src);
            assert_eq!(parse_formula(&phi.to_string(), &s).unwrap().without_spans(), phi.without_spans());
        }
    }

    #[test]
    fn contexts_reject_duplicates() {
        let d = sub();
        let s = sig(&d);
        assert!(matches!(TypingContext::parse(&d, &s, "x:Two, x:One"), Err(IntlangError::DuplicateVariable(_))));
        assert!(matches!(TypingContext::parse(&d, &s, "x"), Err(IntlangError::MalformedContext(_))));
        assert_eq!(TypingContext::parse(&d, &s, "").unwrap().object(), &1);
    }
}
