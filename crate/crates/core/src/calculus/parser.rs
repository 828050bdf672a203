//! Recursive-descent parser for the calculus surface syntax.
//!
//! ```text
//! query    := '{' ident (',' ident)* '|' formula '}'
//! formula  := conj ('||' conj)*
//! conj     := unary ('&&' unary)*
//! unary    := '!' unary | quant | '(' formula ')' | atom
//! quant    := ('forall' | 'exists') ident 'in' setexpr ':' formula
//! setexpr  := setterm (('|' | '&' | '-') setterm)*
//! setterm  := ident | '(' setexpr ')'
//! atom     := 'true' | 'false'
//!           | 'reach' '(' x ',' y ',' E ')' | 'nhop' '(' n ',' x ',' y ',' E ')'
//!           | ('isParent' | 'isAncestor' | 'isSibling') '(' x ',' y ')'
//!           | ident 'in' setexpr
//!           | ident '=' '(' ident (',' ident)* ')' 'in' ident
//!           | term cmp term
//! term     := ident '(' ident ')' | ident '.' ident | ident | constant
//! ```
//!
//! Top-level conjuncts of the form `x in ...` become range terms and
//! `r = (x, y) in R` become relationship memberships; everything else forms
//! the matrix.

use super::ast::*;
use super::lexer::{tokenize, Spanned, Tok};
use super::ParseError;
use crate::algebra::CmpOp;
use crate::value::{Decimal, Value};

pub const KEYWORDS: &[&str] = &[
    "in", "forall", "exists", "true", "false", "reach", "nhop", "isParent", "isAncestor", "isSibling",
];

pub fn parse(src: &str) -> Result<CalculusQuery, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    let q = p.query()?;
    p.expect(&Tok::Eof)?;
    Ok(q)
}

/// Parses a bare formula, as printed for intermediate forms.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    let f = p.formula()?;
    p.expect(&Tok::Eof)?;
    Ok(f)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

enum ParsedTerm {
    Plain(Term),
    Image { morphism: String, var: String },
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            col: s.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{kw}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w)
            }
            Tok::Quoted(w) => {
                self.bump();
                Ok(w)
            }
            other => Err(self.error_here(format!("expected {what}, found {other}"))),
        }
    }

    fn query(&mut self) -> Result<CalculusQuery, ParseError> {
        self.expect(&Tok::LBrace)?;
        let mut targets = vec![self.ident("a target variable")?];
        while self.peek() == &Tok::Comma {
            self.bump();
            targets.push(self.ident("a target variable")?);
        }
        self.expect(&Tok::Bar)?;
        let body = self.formula()?;
        self.expect(&Tok::RBrace)?;
        Ok(assemble(targets, body))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == &Tok::OrOr {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { flatten_or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == &Tok::AndAnd {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { flatten_and(parts) })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::negate(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(w) if w == "forall" || w == "exists" => {
                let q = if w == "forall" { Quantifier::Forall } else { Quantifier::Exists };
                self.bump();
                let var = self.ident("a quantified variable")?;
                self.eat_keyword("in")?;
                let range = self.set_expr()?;
                self.expect(&Tok::Colon)?;
                let body = self.formula()?;
                Ok(Formula::quant(q, var, range, body))
            }
            _ => self.atom(),
        }
    }

    fn set_expr(&mut self) -> Result<RangeExpr, ParseError> {
        let mut acc = self.set_term()?;
        loop {
            let op = self.peek().clone();
            match op {
                Tok::Bar | Tok::Amp | Tok::Minus => {
                    self.bump();
                    let rhs = self.set_term()?;
                    acc = match op {
                        Tok::Bar => acc.or(rhs),
                        Tok::Amp => acc.and(rhs),
                        _ => acc.and_not(rhs),
                    };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn set_term(&mut self) -> Result<RangeExpr, ParseError> {
        if self.peek() == &Tok::LParen {
            self.bump();
            let e = self.set_expr()?;
            self.expect(&Tok::RParen)?;
            Ok(e)
        } else {
            Ok(RangeExpr::In(self.ident("an object name")?))
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let next_is_cmp = matches!(self.peek_at(1), Tok::Cmp(_) | Tok::Assign);
        if let Tok::Ident(w) = self.peek().clone() {
            match w.as_str() {
                "true" | "false" if !next_is_cmp => {
                    self.bump();
                    return Ok(if w == "true" { Formula::True } else { Formula::False });
                }
                "reach" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let x = self.ident("a variable")?;
                    self.expect(&Tok::Comma)?;
                    let y = self.ident("a variable")?;
                    self.expect(&Tok::Comma)?;
                    let edges = self.ident("an edge set")?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Formula::Reach { x, y, edges });
                }
                "nhop" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let n = match self.bump() {
                        Tok::Int(n) if n >= 1 && n <= u32::MAX as i64 => n as u32,
                        _ => {
                            self.pos -= 1;
                            return Err(self.error_here("nhop expects a positive hop count"));
                        }
                    };
                    self.expect(&Tok::Comma)?;
                    let x = self.ident("a variable")?;
                    self.expect(&Tok::Comma)?;
                    let y = self.ident("a variable")?;
                    self.expect(&Tok::Comma)?;
                    let edges = self.ident("an edge set")?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Formula::NHop { n, x, y, edges });
                }
                "isParent" | "isAncestor" | "isSibling" => {
                    let axis = match w.as_str() {
                        "isParent" => TreeAxis::Parent,
                        "isAncestor" => TreeAxis::Ancestor,
                        _ => TreeAxis::Sibling,
                    };
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let x = self.ident("a variable")?;
                    self.expect(&Tok::Comma)?;
                    let y = self.ident("a variable")?;
                    self.expect(&Tok::RParen)?;
                    return Ok(Formula::Tree { axis, x, y });
                }
                _ => {}
            }
        }
        let name = match self.peek() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => Some(w.clone()),
            Tok::Quoted(w) => Some(w.clone()),
            _ => None,
        };
        if let Some(var) = name {
            if matches!(self.peek_at(1), Tok::Ident(k) if k == "in") {
                self.bump();
                self.bump();
                let range = self.set_expr()?;
                return Ok(Formula::In { var, range });
            }
            if self.peek_at(1) == &Tok::Assign && self.peek_at(2) == &Tok::LParen {
                return self.membership();
            }
        }
        self.comparison()
    }

    fn membership(&mut self) -> Result<Formula, ParseError> {
        let var = self.ident("a relationship variable")?;
        self.expect(&Tok::Assign)?;
        self.expect(&Tok::LParen)?;
        let mut components = vec![self.ident("a component variable")?];
        while self.peek() == &Tok::Comma {
            self.bump();
            components.push(self.ident("a component variable")?);
        }
        self.expect(&Tok::RParen)?;
        self.eat_keyword("in")?;
        let object = self.ident("a relationship object")?;
        Ok(Formula::Member(RelationshipMembership { var, components, object }))
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Assign => CmpOp::Eq,
            Tok::Cmp(s) => CmpOp::from_symbol(s).unwrap(),
            other => return Err(self.error_here(format!("expected a comparison operator, found {other}"))),
        };
        self.bump();
        let rhs = self.term()?;
        let equality = |f: Formula| match op {
            CmpOp::Eq => Ok(f),
            CmpOp::Ne => Ok(Formula::negate(f)),
            _ => Err(()),
        };
        let morph = |morphism: String, arg: String, result: String| Formula::MorphEq { morphism, arg, result };
        let result = match (lhs, rhs) {
            (ParsedTerm::Image { morphism, var }, ParsedTerm::Plain(Term::Var(y)))
            | (ParsedTerm::Plain(Term::Var(y)), ParsedTerm::Image { morphism, var }) => equality(morph(morphism, var, y)),
            (ParsedTerm::Plain(Term::Attr { var, attr }), ParsedTerm::Plain(Term::Var(y)))
            | (ParsedTerm::Plain(Term::Var(y)), ParsedTerm::Plain(Term::Attr { var, attr })) => {
                equality(morph(attr, var, y))
            }
            (ParsedTerm::Plain(lhs), ParsedTerm::Plain(rhs)) => Ok(Formula::Cmp { lhs, op, rhs }),
            _ => Err(()),
        };
        result.map_err(|()| {
            let s = &self.toks[start];
            ParseError {
                line: s.line,
                col: s.col,
                message: "morphism images can only be compared to a variable with = or !=".into(),
            }
        })
    }

    fn term(&mut self) -> Result<ParsedTerm, ParseError> {
        let tok = self.peek().clone();
        let constant = |v: Value| Ok(ParsedTerm::Plain(Term::Const(v)));
        match tok {
            Tok::Int(i) => {
                self.bump();
                constant(Value::Int(i))
            }
            Tok::Decimal(d) => {
                self.bump();
                constant(Value::Decimal(d.parse().map_err(|_| self.error_here("invalid decimal"))?))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Int(i) => constant(Value::Int(-i)),
                    Tok::Decimal(d) => {
                        let v: Decimal = format!("-{d}").parse().map_err(|_| self.error_here("invalid decimal"))?;
                        constant(Value::Decimal(v))
                    }
                    _ => {
                        self.pos -= 1;
                        Err(self.error_here("expected a number after `-`"))
                    }
                }
            }
            Tok::Str(s) => {
                self.bump();
                constant(Value::Text(s))
            }
            Tok::Typed(kind, s) => {
                let v = if kind == "dewey" {
                    s.parse().map(Value::Dewey).map_err(|e| self.error_here(format!("{e}")))?
                } else {
                    s.parse().map(Value::Decimal).map_err(|e| self.error_here(format!("{e}")))?
                };
                self.bump();
                constant(v)
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                constant(Value::Bool(w == "true"))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let name = self.ident("a variable")?;
                match self.peek() {
                    Tok::Dot => {
                        self.bump();
                        let attr = self.ident("an attribute name")?;
                        Ok(ParsedTerm::Plain(Term::Attr { var: name, attr }))
                    }
                    Tok::LParen => {
                        self.bump();
                        let var = self.ident("a variable")?;
                        self.expect(&Tok::RParen)?;
                        Ok(ParsedTerm::Image { morphism: name, var })
                    }
                    _ => Ok(ParsedTerm::Plain(Term::Var(name))),
                }
            }
            other => Err(self.error_here(format!("expected a term, found {other}"))),
        }
    }
}

fn flatten_and(parts: Vec<Formula>) -> Formula {
    let mut flat = Vec::new();
    for p in parts {
        match p {
            Formula::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    Formula::And(flat)
}

fn flatten_or(parts: Vec<Formula>) -> Formula {
    let mut flat = Vec::new();
    for p in parts {
        match p {
            Formula::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    Formula::Or(flat)
}

/// Converts a formula built only from `var in ...` atoms into a range
/// expression over `var`.
fn as_range(f: &Formula, var: &str) -> Option<RangeExpr> {
    match f {
        Formula::In { var: v, range } if v == var => Some(range.clone()),
        Formula::Or(parts) => {
            let mut it = parts.iter().map(|p| as_range(p, var));
            let first = it.next()??;
            it.try_fold(first, |acc, r| Some(acc.or(r?)))
        }
        Formula::And(parts) => {
            let (neg, pos): (Vec<&Formula>, Vec<&Formula>) = parts.iter().partition(|p| matches!(p, Formula::Not(_)));
            let mut it = pos.iter().map(|p| as_range(p, var));
            let first = it.next()??;
            let acc = it.try_fold(first, |acc, r| Some(acc.and(r?)))?;
            neg.iter().try_fold(acc, |acc, n| match n {
                Formula::Not(inner) => Some(acc.and_not(as_range(inner, var)?)),
                _ => None,
            })
        }
        _ => None,
    }
}

fn range_var(f: &Formula) -> Option<&str> {
    match f {
        Formula::In { var, .. } => Some(var),
        Formula::Not(inner) => range_var(inner),
        Formula::And(parts) | Formula::Or(parts) => parts.first().and_then(range_var),
        _ => None,
    }
}

/// Splits the body's top-level conjuncts into ranges, memberships and matrix.
fn assemble(targets: Vec<String>, body: Formula) -> CalculusQuery {
    let conjuncts = match body {
        Formula::And(parts) => parts,
        other => vec![other],
    };
    let mut positive: Vec<(String, RangeExpr)> = Vec::new();
    let mut negative: Vec<(String, RangeExpr, Formula)> = Vec::new();
    let mut memberships = Vec::new();
    let mut matrix = Vec::new();
    for c in conjuncts {
        if let Formula::Member(m) = c {
            memberships.push(m);
            continue;
        }
        let Some(var) = range_var(&c).map(str::to_string) else {
            matrix.push(c);
            continue;
        };
        if let Formula::Not(inner) = &c {
            if let Some(r) = as_range(inner, &var) {
                negative.push((var, r, c));
                continue;
            }
        } else if let Some(r) = as_range(&c, &var) {
            match positive.iter_mut().find(|(v, _)| *v == var) {
                Some((_, acc)) => *acc = acc.clone().and(r),
                None => positive.push((var, r)),
            }
            continue;
        }
        matrix.push(c);
    }
    for (var, r, original) in negative {
        match positive.iter_mut().find(|(v, _)| *v == var) {
            Some((_, acc)) => *acc = acc.clone().and_not(r),
            None => matrix.push(original),
        }
    }
    let matrix = match matrix.len() {
        0 => Formula::True,
        1 => matrix.pop().unwrap(),
        _ => Formula::And(matrix),
    };
    CalculusQuery {
        targets,
        ranges: positive.into_iter().map(|(var, range)| RangeTerm { var, range }).collect(),
        memberships,
        matrix,
    }
}
