use crate::error::SyntaxError;
use crate::lexer::{tokenize, Mode, Tok, Token};
use crate::term::{Iri, Literal, Term, RDF_TYPE};
use crate::turtle::{literal_from_tokens, resolve_pname, Prefixes};

use super::ast::*;
use super::QueryError;

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL", "UNION", "MINUS", "GRAPH", "SERVICE", "VALUES", "DELETE", "CONSTRUCT", "ASK",
    "DESCRIBE", "ORDER", "LIMIT", "OFFSET", "HAVING", "EXISTS", "NOT", "BASE", "DATA", "FROM",
    "LOAD", "CLEAR", "WITH", "REDUCED",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prefixes: Prefixes,
}

type PResult<T> = Result<T, QueryError>;

fn unsupported(t: &Token, keyword: &str) -> QueryError {
    QueryError::Unsupported {
        keyword: keyword.to_string(),
        line: t.line,
        column: t.column,
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> QueryError {
        QueryError::Syntax(self.peek().error(msg))
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.peek().is_punct(p) {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.peek().is_word(w) {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected `{w}`")))
        }
    }

    fn check_unsupported(&self) -> PResult<()> {
        let t = self.peek();
        if let Tok::Word(w) = &t.tok {
            let up = w.to_ascii_uppercase();
            if UNSUPPORTED.contains(&up.as_str()) {
                return Err(unsupported(t, &up));
            }
        }
        Ok(())
    }

    fn var(&mut self) -> PResult<Var> {
        match &self.peek().tok {
            Tok::Var(v) => {
                let v = Var::new(v);
                self.next();
                Ok(v)
            }
            _ => Err(self.err("expected variable")),
        }
    }

    fn prologue(&mut self) -> PResult<()> {
        loop {
            let is_prefix = self.peek().is_word("PREFIX")
                || matches!(&self.peek().tok, Tok::LangTag(w) if w == "prefix");
            if !is_prefix {
                self.check_unsupported()?;
                return Ok(());
            }
            let at_form = matches!(&self.peek().tok, Tok::LangTag(_));
            self.next();
            let t = self.next();
            let Tok::PName { prefix, local } = &t.tok else {
                return Err(QueryError::Syntax(t.error("expected prefix label")));
            };
            if !local.is_empty() {
                return Err(QueryError::Syntax(t.error("expected prefix label")));
            }
            let iri = self.next();
            let Tok::IriRef(ns) = &iri.tok else {
                return Err(QueryError::Syntax(iri.error("expected namespace IRI")));
            };
            self.prefixes.insert(prefix, ns);
            if at_form {
                self.expect_punct(".")?;
            }
        }
    }

    fn query(&mut self) -> PResult<Query> {
        self.prologue()?;
        let q = if self.peek().is_word("SELECT") {
            Query::Select(self.select(0)?)
        } else if self.peek().is_word("INSERT") {
            Query::InsertWhere(self.insert()?)
        } else {
            self.check_unsupported()?;
            return Err(self.err("expected SELECT or INSERT"));
        };
        self.check_unsupported()?;
        if self.peek().tok != Tok::Eof {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(q)
    }

    fn insert(&mut self) -> PResult<InsertQuery> {
        self.expect_word("INSERT")?;
        self.check_unsupported()?;
        self.expect_punct("{")?;
        let mut template = Vec::new();
        loop {
            if self.peek().is_punct("}") {
                self.next();
                break;
            }
            if self.peek().is_punct(".") {
                self.next();
                continue;
            }
            self.triples_block(&mut template)?;
        }
        self.expect_word("WHERE")?;
        let pattern = self.group(0)?;
        Ok(InsertQuery { template, pattern })
    }

    fn select(&mut self, depth: usize) -> PResult<SelectQuery> {
        self.expect_word("SELECT")?;
        self.check_unsupported()?;
        let distinct = if self.peek().is_word("DISTINCT") {
            self.next();
            true
        } else {
            false
        };
        let projection = if self.peek().is_punct("*") {
            self.next();
            Projection::All
        } else {
            let mut items = Vec::new();
            loop {
                if self.peek().is_punct(",") && !items.is_empty() {
                    self.next();
                    continue;
                }
                match &self.peek().tok {
                    Tok::Var(_) => items.push(ProjectionItem::Var(self.var()?)),
                    Tok::Punct("(") => {
                        self.next();
                        let expr = self.expr()?;
                        self.expect_word("AS")?;
                        let alias = self.var()?;
                        self.expect_punct(")")?;
                        items.push(ProjectionItem::Expr { expr, alias });
                    }
                    Tok::Word(w) if AggFunc::from_name(w).is_some() || w.eq_ignore_ascii_case("IF") => {
                        // bare `AGG(...) AS ?v` form
                        let expr = self.expr()?;
                        self.expect_word("AS")?;
                        let alias = self.var()?;
                        items.push(ProjectionItem::Expr { expr, alias });
                    }
                    _ => break,
                }
            }
            if items.is_empty() {
                return Err(self.err("expected projection"));
            }
            Projection::Items(items)
        };
        self.check_unsupported()?;
        if self.peek().is_word("WHERE") {
            self.next();
        }
        let pattern = self.group(depth)?;
        let mut group_by = Vec::new();
        if self.peek().is_word("GROUP") {
            self.next();
            self.expect_word("BY")?;
            loop {
                match &self.peek().tok {
                    Tok::Var(_) => group_by.push(self.var()?),
                    Tok::Punct("(") if matches!(self.peek_at(1).tok, Tok::Var(_)) => {
                        self.next();
                        group_by.push(self.var()?);
                        self.expect_punct(")")?;
                    }
                    _ => break,
                }
            }
            if group_by.is_empty() {
                return Err(self.err("expected GROUP BY variable"));
            }
        }
        Ok(SelectQuery {
            distinct,
            projection,
            pattern,
            group_by,
        })
    }

    fn group(&mut self, depth: usize) -> PResult<GroupPattern> {
        self.expect_punct("{")?;
        if self.peek().is_word("SELECT") {
            if depth >= 1 {
                let t = self.peek().clone();
                return Err(unsupported(&t, "nested subquery"));
            }
            let sub = self.select(depth + 1)?;
            self.check_unsupported()?;
            self.expect_punct("}")?;
            return Ok(GroupPattern::SubSelect(Box::new(sub)));
        }
        let mut els = Vec::new();
        loop {
            self.check_unsupported()?;
            let t = self.peek().clone();
            match &t.tok {
                Tok::Punct("}") => {
                    self.next();
                    break;
                }
                Tok::Punct(".") => {
                    self.next();
                }
                Tok::Punct("{") => return Err(unsupported(&t, "nested group")),
                Tok::Word(w) if w.eq_ignore_ascii_case("FILTER") => {
                    self.next();
                    self.check_unsupported()?;
                    let e = if self.peek().is_punct("(") {
                        self.next();
                        let e = self.expr()?;
                        self.expect_punct(")")?;
                        e
                    } else {
                        self.primary()?
                    };
                    els.push(PatternElement::Filter(e));
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("BIND") => {
                    self.next();
                    self.expect_punct("(")?;
                    let e = self.expr()?;
                    self.expect_word("AS")?;
                    let v = self.var()?;
                    self.expect_punct(")")?;
                    els.push(PatternElement::Bind(e, v));
                }
                Tok::Eof => return Err(self.err("unterminated group")),
                _ => {
                    let mut ts = Vec::new();
                    self.triples_block(&mut ts)?;
                    els.extend(ts.into_iter().map(PatternElement::Triple));
                }
            }
        }
        Ok(GroupPattern::Elements(els))
    }

    /// subject predicate-object-list, without the terminating dot.
    fn triples_block(&mut self, out: &mut Vec<TriplePattern>) -> PResult<()> {
        let subject = self.subject()?;
        loop {
            let predicate = self.verb()?;
            let t = self.peek().clone();
            if let Tok::Punct(p @ ("/" | "|" | "^" | "*" | "+")) = &t.tok {
                let _ = p;
                return Err(unsupported(&t, "property path"));
            }
            loop {
                let object = self.object()?;
                out.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek().is_punct(",") {
                    self.next();
                } else {
                    break;
                }
            }
            if self.peek().is_punct(";") {
                while self.peek().is_punct(";") {
                    self.next();
                }
                if self.peek().is_punct(".") || self.peek().is_punct("}") || self.peek().is_punct(">>") {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }

    fn iri(&mut self) -> PResult<Option<Iri>> {
        let t = self.peek().clone();
        let iri = match &t.tok {
            Tok::IriRef(i) => Iri::new(i),
            Tok::PName { prefix, local } => resolve_pname(&self.prefixes, &t, prefix, local)?,
            _ => return Ok(None),
        };
        self.next();
        Ok(Some(iri))
    }

    fn reject_blank(&self) -> PResult<()> {
        let t = self.peek();
        match &t.tok {
            Tok::BlankLabel(_) | Tok::Punct("[") => Err(unsupported(t, "blank node")),
            Tok::Punct("(") => Err(unsupported(t, "collection")),
            _ => Ok(()),
        }
    }

    fn subject(&mut self) -> PResult<PatternTerm> {
        self.reject_blank()?;
        if let Tok::Var(_) = self.peek().tok {
            return Ok(PatternTerm::Var(self.var()?));
        }
        if let Some(i) = self.iri()? {
            return Ok(PatternTerm::Term(Term::Iri(i)));
        }
        if self.peek().is_punct("<<") {
            return self.quoted();
        }
        Err(self.err("expected subject"))
    }

    fn verb(&mut self) -> PResult<PatternTerm> {
        if matches!(&self.peek().tok, Tok::Word(w) if w == "a") {
            self.next();
            return Ok(PatternTerm::Term(Term::iri(RDF_TYPE)));
        }
        if let Tok::Var(_) = self.peek().tok {
            return Ok(PatternTerm::Var(self.var()?));
        }
        if let Some(i) = self.iri()? {
            return Ok(PatternTerm::Term(Term::Iri(i)));
        }
        if self.peek().is_punct("^") {
            let t = self.peek().clone();
            return Err(unsupported(&t, "property path"));
        }
        Err(self.err("expected predicate"))
    }

    fn literal(&mut self, negate: bool) -> PResult<Option<Literal>> {
        let mut pos = self.pos;
        let lit = literal_from_tokens(&self.toks, &mut pos, &self.prefixes, negate)?;
        if lit.is_some() {
            self.pos = pos;
        }
        Ok(lit)
    }

    fn object(&mut self) -> PResult<PatternTerm> {
        self.reject_blank()?;
        if let Tok::Var(_) = self.peek().tok {
            return Ok(PatternTerm::Var(self.var()?));
        }
        if let Some(i) = self.iri()? {
            return Ok(PatternTerm::Term(Term::Iri(i)));
        }
        if self.peek().is_punct("<<") {
            return self.quoted();
        }
        if self.peek().is_punct("-")
            && matches!(self.peek_at(1).tok, Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_))
        {
            self.next();
            let l = self.literal(true)?.expect("number follows");
            return Ok(PatternTerm::Term(Term::Literal(l)));
        }
        match self.literal(false)? {
            Some(l) => Ok(PatternTerm::Term(Term::Literal(l))),
            None => Err(self.err("expected object")),
        }
    }

    fn quoted(&mut self) -> PResult<PatternTerm> {
        let open = self.next();
        let s = self.subject()?;
        let p = self.verb()?;
        let o = self.object()?;
        self.expect_punct(">>")?;
        let tp = TriplePattern {
            subject: s,
            predicate: p,
            object: o,
        };
        if pattern_depth(&tp) > crate::term::MAX_QUOTE_DEPTH {
            return Err(QueryError::Syntax(open.error("quoted pattern nested too deeply")));
        }
        Ok(PatternTerm::Quoted(Box::new(tp)))
    }

    // expressions

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek().is_punct("||") {
            self.next();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.rel_expr()?;
        while self.peek().is_punct("&&") {
            self.next();
            let rhs = self.rel_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn rel_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match &self.peek().tok {
            Tok::Punct("=") => BinOp::Eq,
            Tok::Punct("!=") => BinOp::Ne,
            Tok::Punct("<") => BinOp::Lt,
            Tok::Punct("<=") => BinOp::Le,
            Tok::Punct(">") => BinOp::Gt,
            Tok::Punct(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.add_expr()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Punct("+") => BinOp::Add,
                Tok::Punct("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Punct("*") => BinOp::Mul,
                Tok::Punct("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        match &self.peek().tok {
            Tok::Punct("!") => {
                self.next();
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Tok::Punct("-") => {
                self.next();
                if matches!(self.peek().tok, Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_)) {
                    let l = self.literal(true)?.expect("number");
                    return Ok(Expr::Const(Term::Literal(l)));
                }
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Punct("+") => {
                self.next();
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        self.check_unsupported()?;
        let t = self.peek().clone();
        match &t.tok {
            Tok::Punct("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Var(_) => Ok(Expr::Var(self.var()?)),
            Tok::IriRef(_) | Tok::PName { .. } => {
                let i = self.iri()?.expect("iri token");
                Ok(Expr::Const(Term::Iri(i)))
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("IF") => {
                self.next();
                self.expect_punct("(")?;
                let c = self.expr()?;
                self.expect_punct(",")?;
                let a = self.expr()?;
                self.expect_punct(",")?;
                let b = self.expr()?;
                self.expect_punct(")")?;
                Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
            }
            Tok::Word(w) if AggFunc::from_name(w).is_some() => {
                let func = AggFunc::from_name(w).expect("checked");
                self.next();
                self.expect_punct("(")?;
                let distinct = if self.peek().is_word("DISTINCT") {
                    self.next();
                    true
                } else {
                    false
                };
                let arg = if self.peek().is_punct("*") {
                    if func != AggFunc::Count {
                        return Err(self.err("`*` is only valid in COUNT"));
                    }
                    self.next();
                    None
                } else {
                    Some(Box::new(self.expr()?))
                };
                self.expect_punct(")")?;
                Ok(Expr::Aggregate(Aggregate {
                    func,
                    distinct,
                    arg,
                }))
            }
            Tok::Word(w) if w != "true" && w != "false" => {
                Err(QueryError::Syntax(t.error(format!("unknown name `{w}`"))))
            }
            _ => match self.literal(false)? {
                Some(l) => Ok(Expr::Const(Term::Literal(l))),
                None => Err(self.err("expected expression")),
            },
        }
    }
}

fn pattern_depth(tp: &TriplePattern) -> usize {
    fn d(p: &PatternTerm) -> usize {
        match p {
            PatternTerm::Quoted(q) => 1 + pattern_depth(q),
            PatternTerm::Term(t) => t.depth(),
            PatternTerm::Var(_) => 0,
        }
    }
    d(&tp.subject).max(d(&tp.object))
}

impl From<SyntaxError> for QueryError {
    fn from(e: SyntaxError) -> Self {
        QueryError::Syntax(e)
    }
}

pub(crate) fn parse(text: &str, prefixes: &Prefixes) -> Result<Query, QueryError> {
    let toks = tokenize(text, Mode::Query)?;
    let mut p = Parser {
        toks,
        pos: 0,
        prefixes: prefixes.clone(),
    };
    let q = p.query()?;
    validate(&q)?;
    Ok(q)
}

fn invalid(msg: impl Into<String>) -> QueryError {
    QueryError::Invalid(msg.into())
}

fn validate_group(g: &GroupPattern) -> Result<(), QueryError> {
    match g {
        GroupPattern::SubSelect(s) => validate_select(s),
        GroupPattern::Elements(els) => {
            let mut scope: Vec<Var> = Vec::new();
            for e in els {
                match e {
                    PatternElement::Triple(t) => {
                        if matches!(t.subject, PatternTerm::Term(Term::Literal(_))) {
                            return Err(invalid("literal in subject position"));
                        }
                        t.vars(&mut scope);
                    }
                    PatternElement::Filter(x) => {
                        if x.contains_aggregate() {
                            return Err(invalid("aggregate inside FILTER"));
                        }
                    }
                    PatternElement::Bind(x, v) => {
                        if x.contains_aggregate() {
                            return Err(invalid("aggregate inside BIND"));
                        }
                        if scope.contains(v) {
                            return Err(invalid(format!("BIND target {v} is already in scope")));
                        }
                        scope.push(v.clone());
                    }
                }
            }
            Ok(())
        }
    }
}

fn check_nested_aggregates(e: &Expr, inside: bool) -> Result<(), QueryError> {
    match e {
        Expr::Aggregate(a) => {
            if inside {
                return Err(invalid("nested aggregate"));
            }
            if let Some(x) = &a.arg {
                check_nested_aggregates(x, true)?;
            }
            Ok(())
        }
        Expr::Var(_) | Expr::Const(_) => Ok(()),
        Expr::Binary(_, a, b) => {
            check_nested_aggregates(a, inside)?;
            check_nested_aggregates(b, inside)
        }
        Expr::Not(a) | Expr::Neg(a) => check_nested_aggregates(a, inside),
        Expr::If(a, b, c) => {
            check_nested_aggregates(a, inside)?;
            check_nested_aggregates(b, inside)?;
            check_nested_aggregates(c, inside)
        }
    }
}

fn validate_select(s: &SelectQuery) -> Result<(), QueryError> {
    validate_group(&s.pattern)?;
    let visible = s.pattern.visible_vars();
    for v in &s.group_by {
        if !visible.contains(v) {
            return Err(invalid(format!("GROUP BY variable {v} is not bound in WHERE")));
        }
    }
    match &s.projection {
        Projection::All => {
            if !s.group_by.is_empty() {
                return Err(invalid("SELECT * cannot be combined with GROUP BY"));
            }
        }
        Projection::Items(items) => {
            let mut known = visible.clone();
            let mut has_agg = false;
            let mut has_plain = false;
            for item in items {
                match item {
                    ProjectionItem::Var(v) => {
                        if !known.contains(v) {
                            return Err(invalid(format!("projected variable {v} is not bound in WHERE")));
                        }
                        has_plain = true;
                    }
                    ProjectionItem::Expr { expr, alias } => {
                        check_nested_aggregates(expr, false)?;
                        let mut used = Vec::new();
                        expr.vars(&mut used);
                        if let Some(v) = used.iter().find(|v| !known.contains(v)) {
                            return Err(invalid(format!("variable {v} is not bound in WHERE")));
                        }
                        if known.contains(alias) {
                            return Err(invalid(format!("alias {alias} is already in scope")));
                        }
                        if expr.contains_aggregate() {
                            has_agg = true;
                        } else {
                            has_plain = true;
                        }
                        known.push(alias.clone());
                    }
                }
            }
            if has_agg && has_plain && s.group_by.is_empty() {
                return Err(invalid(
                    "projection mixes aggregates and plain values without GROUP BY",
                ));
            }
        }
    }
    Ok(())
}

fn validate(q: &Query) -> Result<(), QueryError> {
    match q {
        Query::Select(s) => validate_select(s),
        Query::InsertWhere(i) => {
            validate_group(&i.pattern)?;
            let visible = i.pattern.visible_vars();
            for t in &i.template {
                let mut vs = Vec::new();
                t.vars(&mut vs);
                if let Some(v) = vs.iter().find(|v| !visible.contains(v)) {
                    return Err(invalid(format!("template variable {v} is not bound in WHERE")));
                }
                if matches!(t.subject, PatternTerm::Term(Term::Literal(_))) {
                    return Err(invalid("literal in template subject"));
                }
            }
            Ok(())
        }
    }
}
