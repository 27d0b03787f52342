use std::fmt;
use std::sync::Arc;

use crate::term::{Iri, Term};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Var {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Select(SelectQuery),
    InsertWhere(InsertQuery),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectQuery {
    pub distinct: bool,
    pub projection: Projection,
    pub pattern: GroupPattern,
    pub group_by: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InsertQuery {
    pub template: Vec<TriplePattern>,
    pub pattern: GroupPattern,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    All,
    Items(Vec<ProjectionItem>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionItem {
    Var(Var),
    Expr { expr: Expr, alias: Var },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupPattern {
    Elements(Vec<PatternElement>),
    SubSelect(Box<SelectQuery>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatternElement {
    Triple(TriplePattern),
    Filter(Expr),
    Bind(Expr, Var),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatternTerm {
    Var(Var),
    Term(Term),
    Quoted(Box<TriplePattern>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    Sum,
    Min,
    Max,
    Avg,
}

impl AggFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "COUNT",
            AggFunc::Sum => "SUM",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
            AggFunc::Avg => "AVG",
        }
    }

    pub fn from_name(name: &str) -> Option<AggFunc> {
        match name.to_ascii_uppercase().as_str() {
            "COUNT" => Some(AggFunc::Count),
            "SUM" => Some(AggFunc::Sum),
            "MIN" => Some(AggFunc::Min),
            "MAX" => Some(AggFunc::Max),
            "AVG" => Some(AggFunc::Avg),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub func: AggFunc,
    pub distinct: bool,
    /// `None` stands for `*` (only valid with COUNT).
    pub arg: Option<Box<Expr>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(Var),
    Const(Term),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Aggregate(Aggregate),
}

impl Expr {
    pub fn contains_aggregate(&self) -> bool {
        match self {
            Expr::Aggregate(_) => true,
            Expr::Var(_) | Expr::Const(_) => false,
            Expr::Binary(_, a, b) => a.contains_aggregate() || b.contains_aggregate(),
            Expr::Not(a) | Expr::Neg(a) => a.contains_aggregate(),
            Expr::If(a, b, c) => {
                a.contains_aggregate() || b.contains_aggregate() || c.contains_aggregate()
            }
        }
    }

    /// Variables referenced, including inside aggregates.
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Expr::Const(_) => {}
            Expr::Binary(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Not(a) | Expr::Neg(a) => a.vars(out),
            Expr::If(a, b, c) => {
                a.vars(out);
                b.vars(out);
                c.vars(out);
            }
            Expr::Aggregate(a) => {
                if let Some(e) = &a.arg {
                    e.vars(out)
                }
            }
        }
    }

    fn map_iris(&mut self, f: &dyn Fn(&Iri) -> Option<Iri>) {
        match self {
            Expr::Const(t) => map_term(t, f),
            Expr::Var(_) => {}
            Expr::Binary(_, a, b) => {
                a.map_iris(f);
                b.map_iris(f);
            }
            Expr::Not(a) | Expr::Neg(a) => a.map_iris(f),
            Expr::If(a, b, c) => {
                a.map_iris(f);
                b.map_iris(f);
                c.map_iris(f);
            }
            Expr::Aggregate(a) => {
                if let Some(e) = &mut a.arg {
                    e.map_iris(f)
                }
            }
        }
    }
}

fn map_term(t: &mut Term, f: &dyn Fn(&Iri) -> Option<Iri>) {
    match t {
        Term::Iri(i) => {
            if let Some(n) = f(i) {
                *i = n;
            }
        }
        Term::Literal(_) => {}
        Term::Quoted(q) => {
            let (mut s, p, mut o) = (**q).clone().into_parts();
            map_term(&mut s, f);
            map_term(&mut o, f);
            let p = f(&p).unwrap_or(p);
            if let Ok(t2) = crate::term::Triple::new(s, p, o) {
                *q = Arc::new(t2);
            }
        }
    }
}

impl TriplePattern {
    pub fn vars(&self, out: &mut Vec<Var>) {
        for p in [&self.subject, &self.predicate, &self.object] {
            p.vars(out);
        }
    }

    fn map_iris(&mut self, f: &dyn Fn(&Iri) -> Option<Iri>) {
        for p in [&mut self.subject, &mut self.predicate, &mut self.object] {
            match p {
                PatternTerm::Term(t) => map_term(t, f),
                PatternTerm::Quoted(q) => q.map_iris(f),
                PatternTerm::Var(_) => {}
            }
        }
    }
}

impl PatternTerm {
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            PatternTerm::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            PatternTerm::Term(_) => {}
            PatternTerm::Quoted(q) => q.vars(out),
        }
    }
}

impl GroupPattern {
    /// Variables visible to an enclosing projection, in first-appearance order.
    pub fn visible_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match self {
            GroupPattern::Elements(els) => {
                for e in els {
                    match e {
                        PatternElement::Triple(t) => t.vars(&mut out),
                        PatternElement::Bind(_, v) => {
                            if !out.contains(v) {
                                out.push(v.clone())
                            }
                        }
                        PatternElement::Filter(_) => {}
                    }
                }
            }
            GroupPattern::SubSelect(s) => out = s.output_vars(),
        }
        out
    }

    fn map_iris(&mut self, f: &dyn Fn(&Iri) -> Option<Iri>) {
        match self {
            GroupPattern::Elements(els) => {
                for e in els {
                    match e {
                        PatternElement::Triple(t) => t.map_iris(f),
                        PatternElement::Filter(x) => x.map_iris(f),
                        PatternElement::Bind(x, _) => x.map_iris(f),
                    }
                }
            }
            GroupPattern::SubSelect(s) => s.map_iris(f),
        }
    }
}

impl SelectQuery {
    /// Output column order.
    pub fn output_vars(&self) -> Vec<Var> {
        match &self.projection {
            Projection::All => self.pattern.visible_vars(),
            Projection::Items(items) => items
                .iter()
                .map(|i| match i {
                    ProjectionItem::Var(v) => v.clone(),
                    ProjectionItem::Expr { alias, .. } => alias.clone(),
                })
                .collect(),
        }
    }

    pub fn is_aggregate(&self) -> bool {
        !self.group_by.is_empty()
            || matches!(&self.projection, Projection::Items(items) if items.iter().any(|i| matches!(i, ProjectionItem::Expr { expr, .. } if expr.contains_aggregate())))
    }

    fn map_iris(&mut self, f: &dyn Fn(&Iri) -> Option<Iri>) {
        if let Projection::Items(items) = &mut self.projection {
            for i in items {
                if let ProjectionItem::Expr { expr, .. } = i {
                    expr.map_iris(f)
                }
            }
        }
        self.pattern.map_iris(f);
    }
}

impl Query {
    /// Rewrites every IRI constant for which `f` returns a replacement.
    pub fn map_iris(&mut self, f: &dyn Fn(&Iri) -> Option<Iri>) {
        match self {
            Query::Select(s) => s.map_iris(f),
            Query::InsertWhere(i) => {
                for t in &mut i.template {
                    t.map_iris(f);
                }
                i.pattern.map_iris(f);
            }
        }
    }
}

// Serialization back to query text (full IRIs, no prefixes).

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "{v}"),
            PatternTerm::Term(t) => write!(f, "{t}"),
            PatternTerm::Quoted(q) => write!(f, "<< {} {} {} >>", q.subject, q.predicate, q.object),
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(Term::Literal(crate::term::Literal::Integer(i))) if *i < 0 => {
                write!(f, "({i})")
            }
            Expr::Const(Term::Literal(crate::term::Literal::Double(d))) if *d < 0.0 || (*d == 0.0 && d.is_sign_negative()) => {
                write!(f, "({})", crate::term::format_double(*d))
            }
            Expr::Const(t) => write!(f, "{t}"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Not(a) => write!(f, "(!{a})"),
            Expr::Neg(a) => write!(f, "(-({a}))"),
            Expr::If(a, b, c) => write!(f, "IF({a}, {b}, {c})"),
            Expr::Aggregate(a) => {
                write!(f, "{}(", a.func.name())?;
                if a.distinct {
                    write!(f, "DISTINCT ")?;
                }
                match &a.arg {
                    Some(e) => write!(f, "{e})"),
                    None => write!(f, "*)"),
                }
            }
        }
    }
}

impl fmt::Display for GroupPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{{")?;
        match self {
            GroupPattern::Elements(els) => {
                for e in els {
                    match e {
                        PatternElement::Triple(t) => writeln!(f, "  {t}")?,
                        PatternElement::Filter(x) => writeln!(f, "  FILTER ({x})")?,
                        PatternElement::Bind(x, v) => writeln!(f, "  BIND ({x} AS {v})")?,
                    }
                }
            }
            GroupPattern::SubSelect(s) => writeln!(f, "{s}")?,
        }
        write!(f, "}}")
    }
}

impl fmt::Display for SelectQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT ")?;
        if self.distinct {
            write!(f, "DISTINCT ")?;
        }
        match &self.projection {
            Projection::All => write!(f, "*")?,
            Projection::Items(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        ProjectionItem::Var(v) => v.to_string(),
                        ProjectionItem::Expr { expr, alias } => format!("({expr} AS {alias})"),
                    })
                    .collect();
                write!(f, "{}", parts.join(" "))?;
            }
        }
        write!(f, " WHERE {}", self.pattern)?;
        if !self.group_by.is_empty() {
            let vs: Vec<String> = self.group_by.iter().map(|v| v.to_string()).collect();
            write!(f, " GROUP BY {}", vs.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Select(s) => write!(f, "{s}"),
            Query::InsertWhere(i) => {
                writeln!(f, "INSERT {{")?;
                for t in &i.template {
                    writeln!(f, "  {t}")?;
                }
                write!(f, "}} WHERE {}", i.pattern)
            }
        }
    }
}
