//! Naive reference evaluator: full scans, nested-loop joins in written order,
//! every FILTER after the joins, and its own expression semantics.

use std::collections::BTreeMap;

use scdm_kg::query::ast::{
    AggFunc, BinOp, Expr, GroupPattern, PatternElement, PatternTerm, Projection, ProjectionItem,
    Query, SelectQuery, TriplePattern, Var,
};
use scdm_kg::query::{Binding, Solutions};
use scdm_kg::{Graph, Literal, Term, Triple};

type Mu = BTreeMap<Var, Term>;

pub fn select(graph: &Graph, q: &Query, seed: &Binding) -> Solutions {
    let all: Vec<Triple> = graph.iter().collect();
    match q {
        Query::Select(s) => run_select(&all, s, seed),
        Query::InsertWhere(_) => panic!("oracle handles SELECT only"),
    }
}

fn term_match(p: &PatternTerm, t: &Term, mu: &mut Mu) -> bool {
    match p {
        PatternTerm::Var(v) => match mu.get(v) {
            Some(x) => x == t,
            None => {
                mu.insert(v.clone(), t.clone());
                true
            }
        },
        PatternTerm::Term(c) => c == t,
        PatternTerm::Quoted(q) => match t {
            Term::Quoted(inner) => triple_match(q, inner, mu),
            _ => false,
        },
    }
}

fn triple_match(p: &TriplePattern, t: &Triple, mu: &mut Mu) -> bool {
    term_match(&p.subject, t.subject(), mu)
        && term_match(&p.predicate, &Term::Iri(t.predicate().clone()), mu)
        && term_match(&p.object, t.object(), mu)
}

fn where_rows(all: &[Triple], g: &GroupPattern, seed: &Binding) -> Vec<Mu> {
    match g {
        GroupPattern::SubSelect(s) => {
            let sol = run_select(all, s, seed);
            sol.rows
                .iter()
                .map(|r| {
                    let mut mu: Mu = seed.clone();
                    for (v, c) in sol.variables.iter().zip(r) {
                        if let Some(t) = c {
                            mu.insert(v.clone(), t.clone());
                        }
                    }
                    mu
                })
                .collect()
        }
        GroupPattern::Elements(els) => {
            let mut rows: Vec<Mu> = vec![seed.clone()];
            for e in els {
                match e {
                    PatternElement::Triple(tp) => {
                        let mut next = Vec::new();
                        for mu in &rows {
                            for t in all {
                                let mut m = mu.clone();
                                if triple_match(tp, t, &mut m) {
                                    next.push(m);
                                }
                            }
                        }
                        rows = next;
                    }
                    PatternElement::Bind(x, v) => {
                        for mu in rows.iter_mut() {
                            if let Some(t) = value(x, mu, None) {
                                mu.insert(v.clone(), t);
                            }
                        }
                    }
                    PatternElement::Filter(_) => {}
                }
            }
            for e in els {
                if let PatternElement::Filter(x) = e {
                    rows.retain(|mu| value(x, mu, None).and_then(|t| truth(&t)) == Some(true));
                }
            }
            rows
        }
    }
}

fn cell_key(c: &Option<Term>) -> String {
    c.as_ref().map(|t| t.to_string()).unwrap_or_default()
}

fn run_select(all: &[Triple], s: &SelectQuery, seed: &Binding) -> Solutions {
    let mut rows = where_rows(all, &s.pattern, seed);
    let visible = s.pattern.visible_vars();
    let outputs = s.output_vars();
    let items: Vec<ProjectionItem> = match &s.projection {
        Projection::All => outputs.iter().cloned().map(ProjectionItem::Var).collect(),
        Projection::Items(i) => i.clone(),
    };
    let mut table: Vec<Vec<Option<Term>>> = Vec::new();
    if s.is_aggregate() {
        let mut groups: BTreeMap<Vec<String>, Vec<Mu>> = BTreeMap::new();
        if s.group_by.is_empty() {
            groups.insert(vec![], vec![]);
        }
        for mu in rows.drain(..) {
            let key: Vec<String> = s.group_by.iter().map(|v| cell_key(&mu.get(v).cloned())).collect();
            groups.entry(key).or_default().push(mu);
        }
        let mut names: Vec<Var> = visible.clone();
        for v in seed.keys() {
            if !names.contains(v) {
                names.push(v.clone());
            }
        }
        names.sort_by(|a, b| a.name().cmp(b.name()));
        for (_, mut members) in groups {
            members.sort_by_key(|mu| names.iter().map(|v| cell_key(&mu.get(v).cloned())).collect::<Vec<_>>());
            let mut env: Mu = members.first().cloned().unwrap_or_default();
            let mut out = Vec::new();
            for it in &items {
                match it {
                    ProjectionItem::Var(v) => out.push(env.get(v).cloned()),
                    ProjectionItem::Expr { expr, alias } => {
                        let r = value(expr, &env, Some(&members));
                        if let Some(t) = &r {
                            env.insert(alias.clone(), t.clone());
                        }
                        out.push(r);
                    }
                }
            }
            table.push(out);
        }
    } else {
        for mut mu in rows {
            let mut out = Vec::new();
            for it in &items {
                match it {
                    ProjectionItem::Var(v) => out.push(mu.get(v).cloned()),
                    ProjectionItem::Expr { expr, alias } => {
                        let r = value(expr, &mu, None);
                        if let Some(t) = &r {
                            mu.insert(alias.clone(), t.clone());
                        }
                        out.push(r);
                    }
                }
            }
            table.push(out);
        }
    }
    table.sort_by_key(|r| r.iter().map(cell_key).collect::<Vec<_>>());
    if s.distinct {
        table.dedup();
    }
    Solutions { variables: outputs, rows: table }
}

#[derive(Clone, Copy, Debug)]
enum N {
    Int(i64),
    Dbl(f64),
}

fn num(t: &Term) -> Option<N> {
    match t.as_literal()? {
        Literal::Integer(i) => Some(N::Int(*i)),
        Literal::Double(d) => Some(N::Dbl(*d)),
        _ => None,
    }
}

fn as_f(n: N) -> f64 {
    match n {
        N::Int(i) => i as f64,
        N::Dbl(d) => d,
    }
}

fn dbl(v: f64) -> Option<Term> {
    v.is_finite().then(|| Term::double(v))
}

fn truth(t: &Term) -> Option<bool> {
    match t.as_literal()? {
        Literal::Boolean(b) => Some(*b),
        Literal::Integer(i) => Some(*i != 0),
        Literal::Double(d) => Some(*d != 0.0),
        Literal::String(s) => Some(!s.is_empty()),
        _ => None,
    }
}

/// -1, 0, 1 for orderable pairs; `Some(None)` for equality-only pairs.
fn order(a: &Term, b: &Term) -> Option<Option<i8>> {
    let sign = |o: std::cmp::Ordering| o as i8;
    if let (Some(x), Some(y)) = (num(a), num(b)) {
        return match (x, y) {
            (N::Int(i), N::Int(j)) => Some(Some(sign(i.cmp(&j)))),
            _ => as_f(x).partial_cmp(&as_f(y)).map(|o| Some(sign(o))),
        };
    }
    match (a.as_literal(), b.as_literal()) {
        (Some(Literal::String(x)), Some(Literal::String(y))) => Some(Some(sign(x.cmp(y)))),
        (Some(Literal::Date(x)), Some(Literal::Date(y))) => Some(Some(sign(x.cmp(y)))),
        (Some(Literal::DateTime(x)), Some(Literal::DateTime(y))) => Some(Some(sign(x.cmp(y)))),
        (Some(Literal::Boolean(x)), Some(Literal::Boolean(y))) => Some(Some(sign(x.cmp(y)))),
        (Some(_), Some(_)) => None,
        _ => Some(None),
    }
}

fn add_days(d: scdm_kg::Date, n: i64) -> Option<Term> {
    d.add_days(n).map(Term::date)
}

fn arith(op: BinOp, a: &Term, b: &Term) -> Option<Term> {
    if let (Some(x), Some(y)) = (num(a), num(b)) {
        if op == BinOp::Div {
            return if as_f(y) == 0.0 { None } else { dbl(as_f(x) / as_f(y)) };
        }
        if let (N::Int(i), N::Int(j)) = (x, y) {
            return match op {
                BinOp::Add => i.checked_add(j),
                BinOp::Sub => i.checked_sub(j),
                _ => i.checked_mul(j),
            }
            .map(Term::integer);
        }
        return dbl(match op {
            BinOp::Add => as_f(x) + as_f(y),
            BinOp::Sub => as_f(x) - as_f(y),
            _ => as_f(x) * as_f(y),
        });
    }
    let (da, db) = (a.as_date(), b.as_date());
    let (ia, ib) = (a.as_i64().filter(|_| num(a).is_some_and(|n| matches!(n, N::Int(_)))), b.as_i64().filter(|_| num(b).is_some_and(|n| matches!(n, N::Int(_)))));
    match (op, da, db, ia, ib) {
        (BinOp::Add, Some(d), None, None, Some(n)) => add_days(d, n),
        (BinOp::Add, None, Some(d), Some(n), None) => add_days(d, n),
        (BinOp::Sub, Some(d), Some(e), _, _) => Some(Term::integer(d.days() - e.days())),
        (BinOp::Sub, Some(d), None, None, Some(n)) => n.checked_neg().and_then(|n| add_days(d, n)),
        _ => {
            let dt = |t: &Term| match t.as_literal() {
                Some(Literal::DateTime(x)) => Some(*x),
                _ => None,
            };
            match (op, dt(a), dt(b), ia, ib) {
                (BinOp::Add, Some(x), None, None, Some(n)) | (BinOp::Add, None, Some(x), Some(n), None) => x
                    .secs()
                    .checked_add(n)
                    .and_then(scdm_kg::DateTime::from_secs)
                    .map(|d| Term::Literal(Literal::DateTime(d))),
                (BinOp::Sub, Some(x), Some(y), _, _) => x.secs().checked_sub(y.secs()).map(Term::integer),
                (BinOp::Sub, Some(x), None, None, Some(n)) => x
                    .secs()
                    .checked_sub(n)
                    .and_then(scdm_kg::DateTime::from_secs)
                    .map(|d| Term::Literal(Literal::DateTime(d))),
                _ => None,
            }
        }
    }
}

fn value(e: &Expr, mu: &Mu, group: Option<&[Mu]>) -> Option<Term> {
    match e {
        Expr::Var(v) => mu.get(v).cloned(),
        Expr::Const(t) => Some(t.clone()),
        Expr::Not(a) => Some(Term::boolean(!truth(&value(a, mu, group)?)?)),
        Expr::Neg(a) => match num(&value(a, mu, group)?)? {
            N::Int(i) => i.checked_neg().map(Term::integer),
            N::Dbl(d) => Some(Term::double(-d)),
        },
        Expr::If(c, a, b) => {
            if truth(&value(c, mu, group)?)? {
                value(a, mu, group)
            } else {
                value(b, mu, group)
            }
        }
        Expr::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
            let x = value(a, mu, group).and_then(|t| truth(&t));
            let y = value(b, mu, group).and_then(|t| truth(&t));
            let dominant = *op == BinOp::Or;
            if x == Some(dominant) || y == Some(dominant) {
                Some(Term::boolean(dominant))
            } else if x.is_some() && y.is_some() {
                Some(Term::boolean(!dominant))
            } else {
                None
            }
        }
        Expr::Binary(op, a, b) => {
            let x = value(a, mu, group)?;
            let y = value(b, mu, group)?;
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => arith(*op, &x, &y),
                _ => {
                    let r = match order(&x, &y)? {
                        Some(c) => match op {
                            BinOp::Eq => c == 0,
                            BinOp::Ne => c != 0,
                            BinOp::Lt => c < 0,
                            BinOp::Le => c <= 0,
                            BinOp::Gt => c > 0,
                            _ => c >= 0,
                        },
                        None => match op {
                            BinOp::Eq => x == y,
                            BinOp::Ne => x != y,
                            _ => return None,
                        },
                    };
                    Some(Term::boolean(r))
                }
            }
        }
        Expr::Aggregate(agg) => {
            let members = group?;
            let mut vals: Vec<Option<Term>> = match &agg.arg {
                None => {
                    let mut m: Vec<&Mu> = members.iter().collect();
                    if agg.distinct {
                        m.dedup();
                    }
                    m.iter().map(|_| Some(Term::boolean(true))).collect()
                }
                Some(x) => members.iter().map(|m| value(x, m, None)).collect(),
            };
            if agg.distinct && agg.arg.is_some() {
                let mut seen: Vec<Term> = vec![];
                vals.retain(|v| match v {
                    Some(t) if seen.contains(t) => false,
                    Some(t) => {
                        seen.push(t.clone());
                        true
                    }
                    None => true,
                });
            }
            match agg.func {
                AggFunc::Count => Some(Term::integer(vals.iter().flatten().count() as i64)),
                AggFunc::Sum | AggFunc::Avg => {
                    let n = vals.len();
                    let mut acc = Term::integer(0);
                    for v in vals {
                        let v = v?;
                        num(&v)?;
                        acc = arith(BinOp::Add, &acc, &v)?;
                    }
                    if agg.func == AggFunc::Avg && n > 0 {
                        arith(BinOp::Div, &acc, &Term::integer(n as i64))
                    } else {
                        Some(acc)
                    }
                }
                AggFunc::Min | AggFunc::Max => {
                    let want: i8 = if agg.func == AggFunc::Min { -1 } else { 1 };
                    let mut best: Option<Term> = None;
                    for v in vals {
                        let v = v?;
                        order(&v, &v)??;
                        best = match best {
                            None => Some(v),
                            Some(b) => {
                                if order(&v, &b)?? == want {
                                    Some(v)
                                } else {
                                    Some(b)
                                }
                            }
                        };
                    }
                    best
                }
            }
        }
    }
}
