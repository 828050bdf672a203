//! Pretty-printing in the surface syntax. Output always reparses to the
//! same tree.

use std::borrow::Cow;
use std::fmt;

use super::ast::*;
use super::lexer::{is_ident_char, is_ident_start};
use super::parser::KEYWORDS;

/// A name as it must be written in query text: bare when it lexes as an
/// identifier, backquoted otherwise.
pub fn quote_ident(name: &str) -> Cow<'_, str> {
    let mut chars = name.chars();
    let plain = chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char) && !KEYWORDS.contains(&name);
    if plain {
        Cow::Borrowed(name)
    } else {
        Cow::Owned(format!("`{name}`"))
    }
}

impl fmt::Display for RangeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, op, b) = match self {
            RangeExpr::In(o) => return f.write_str(&quote_ident(o)),
            RangeExpr::Or(a, b) => (a, '|', b),
            RangeExpr::And(a, b) => (a, '&', b),
            RangeExpr::AndNot(a, b) => (a, '-', b),
        };
        write!(f, "({a} {op} {b})")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Attr { var, attr } => write!(f, "{}.{}", quote_ident(var), quote_ident(attr)),
            Term::Var(v) => f.write_str(&quote_ident(v)),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for RangeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", quote_ident(&self.var), self.range)
    }
}

impl fmt::Display for RelationshipMembership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.components.iter().map(|c| quote_ident(c)).collect();
        write!(f, "{} = ({}) in {}", quote_ident(&self.var), parts.join(", "), quote_ident(&self.object))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    And,
    Or,
    Not,
}

fn write_formula(f: &mut fmt::Formatter<'_>, formula: &Formula, ctx: Ctx) -> fmt::Result {
    let q = |s: &str| quote_ident(s).into_owned();
    match formula {
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::Cmp { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
        Formula::MorphEq { morphism, arg, result } => write!(f, "{}({}) = {}", q(morphism), q(arg), q(result)),
        Formula::Tree { axis, x, y } => write!(f, "{}({}, {})", axis.keyword(), q(x), q(y)),
        Formula::Reach { x, y, edges } => write!(f, "reach({}, {}, {})", q(x), q(y), q(edges)),
        Formula::NHop { n, x, y, edges } => write!(f, "nhop({n}, {}, {}, {})", q(x), q(y), q(edges)),
        Formula::In { var, range } => write!(f, "{} in {range}", q(var)),
        Formula::Member(m) => write!(f, "{m}"),
        Formula::Not(inner) => {
            f.write_str("!")?;
            write_formula(f, inner, Ctx::Not)
        }
        Formula::And(parts) => {
            let paren = ctx == Ctx::Not;
            if paren {
                f.write_str("(")?;
            }
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" && ")?;
                }
                write_formula(f, p, Ctx::And)?;
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Or(parts) => {
            let paren = ctx != Ctx::Top;
            if paren {
                f.write_str("(")?;
            }
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" || ")?;
                }
                write_formula(f, p, Ctx::Or)?;
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Quant { q: quant, var, range, body } => {
            let paren = ctx != Ctx::Top;
            if paren {
                f.write_str("(")?;
            }
            write!(f, "{} {} in {range} : ", quant.keyword(), q(var))?;
            write_formula(f, body, Ctx::Top)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, Ctx::Top)
    }
}

impl fmt::Display for CalculusQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let targets: Vec<_> = self.targets.iter().map(|t| quote_ident(t)).collect();
        write!(f, "{{ {} | ", targets.join(", "))?;
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if std::mem::replace(&mut first, false) {
                Ok(())
            } else {
                f.write_str(" && ")
            }
        };
        for r in &self.ranges {
            sep(f)?;
            write!(f, "{r}")?;
        }
        for m in &self.memberships {
            sep(f)?;
            write!(f, "{m}")?;
        }
        let conjuncts: &[Formula] = match &self.matrix {
            Formula::True => &[],
            Formula::And(parts) => parts,
            other => std::slice::from_ref(other),
        };
        for c in conjuncts {
            sep(f)?;
            write_formula(f, c, Ctx::And)?;
        }
        if first {
            f.write_str("true")?;
        }
        f.write_str(" }")
    }
}
