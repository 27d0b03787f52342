use std::collections::BTreeMap;

use crate::graph::{Graph, PatternTerm as GPattern, QuotedPattern};
use crate::term::{Iri, Term, Triple};

use super::ast::*;
use super::expr::{ebv, eval, fold_aggregate, Env, EvalError, EvalResult};
use super::{Binding, Solutions};

type Row = Vec<Option<Term>>;

/// Variable-to-slot table for one group evaluation.
struct Slots(Vec<Var>);

impl Slots {
    fn index(&self, v: &Var) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }

    fn add(&mut self, v: &Var) -> usize {
        match self.index(v) {
            Some(i) => i,
            None => {
                self.0.push(v.clone());
                self.0.len() - 1
            }
        }
    }
}

struct RowEnv<'a> {
    slots: &'a Slots,
    row: &'a Row,
}

impl Env for RowEnv<'_> {
    fn var(&self, v: &Var) -> Option<Term> {
        self.slots.index(v).and_then(|i| self.row[i].clone())
    }

    fn aggregate(&self, _: &Aggregate) -> EvalResult {
        Err(EvalError)
    }
}

fn bound(p: &PatternTerm, slots: &Slots, row: &Row) -> bool {
    match p {
        PatternTerm::Var(v) => slots.index(v).is_some_and(|i| row[i].is_some()),
        PatternTerm::Term(_) => true,
        PatternTerm::Quoted(q) => [&q.subject, &q.predicate, &q.object]
            .iter()
            .all(|x| bound(x, slots, row)),
    }
}

/// Substitutes row values. `Err(())` means no triple can match.
fn to_graph_pattern(p: &PatternTerm, slots: &Slots, row: &Row) -> Result<GPattern, ()> {
    match p {
        PatternTerm::Var(v) => Ok(match slots.index(v).and_then(|i| row[i].clone()) {
            Some(t) => GPattern::Exact(t),
            None => GPattern::Any,
        }),
        PatternTerm::Term(t) => Ok(GPattern::Exact(t.clone())),
        PatternTerm::Quoted(q) => {
            let s = to_graph_pattern(&q.subject, slots, row)?;
            let o = to_graph_pattern(&q.object, slots, row)?;
            let p = match to_graph_pattern(&q.predicate, slots, row)? {
                GPattern::Exact(Term::Iri(i)) => Some(i),
                GPattern::Any => None,
                _ => return Err(()),
            };
            if let (GPattern::Exact(s), Some(p), GPattern::Exact(o)) = (&s, &p, &o) {
                let t = Triple::new(s.clone(), p.clone(), o.clone()).map_err(|_| ())?;
                return Ok(GPattern::Exact(Term::quoted(t)));
            }
            Ok(GPattern::Quoted(Box::new(QuotedPattern {
                subject: s,
                predicate: p,
                object: o,
            })))
        }
    }
}

fn unify(p: &PatternTerm, t: &Term, slots: &Slots, row: &mut Row) -> bool {
    match p {
        PatternTerm::Var(v) => {
            let i = slots.index(v).expect("slot allocated");
            match &row[i] {
                Some(x) => x == t,
                None => {
                    row[i] = Some(t.clone());
                    true
                }
            }
        }
        PatternTerm::Term(x) => x == t,
        PatternTerm::Quoted(q) => match t {
            Term::Quoted(tr) => {
                unify(&q.subject, tr.subject(), slots, row)
                    && unify(&q.predicate, &Term::Iri(tr.predicate().clone()), slots, row)
                    && unify(&q.object, tr.object(), slots, row)
            }
            _ => false,
        },
    }
}

fn match_triple(graph: &Graph, tp: &TriplePattern, slots: &Slots, row: &Row, out: &mut Vec<Row>) {
    let (Ok(s), Ok(o)) = (
        to_graph_pattern(&tp.subject, slots, row),
        to_graph_pattern(&tp.object, slots, row),
    ) else {
        return;
    };
    let p: Option<Iri> = match to_graph_pattern(&tp.predicate, slots, row) {
        Ok(GPattern::Exact(Term::Iri(i))) => Some(i),
        Ok(GPattern::Any) => None,
        _ => return,
    };
    let ground = |g: &GPattern| match g {
        GPattern::Exact(t) => Some(t.clone()),
        _ => None,
    };
    let (sg, og) = (ground(&s), ground(&o));
    for t in graph.lookup(sg.as_ref(), p.as_ref(), og.as_ref()) {
        if !s.matches(t.subject()) || !o.matches(t.object()) {
            continue;
        }
        let mut r = row.clone();
        if unify(&tp.subject, t.subject(), slots, &mut r)
            && unify(&tp.predicate, &Term::Iri(t.predicate().clone()), slots, &mut r)
            && unify(&tp.object, t.object(), slots, &mut r)
        {
            out.push(r);
        }
    }
}

fn bound_positions(tp: &TriplePattern, slots: &Slots, row: &Row) -> usize {
    [&tp.subject, &tp.predicate, &tp.object]
        .iter()
        .filter(|p| bound(p, slots, row))
        .count()
}

fn estimate(graph: &Graph, tp: &TriplePattern, slots: &Slots, row: &Row) -> usize {
    let g = |p: &PatternTerm| match to_graph_pattern(p, slots, row) {
        Ok(GPattern::Exact(t)) => Some(t),
        _ => None,
    };
    let (s, p, o) = (g(&tp.subject), g(&tp.predicate), g(&tp.object));
    let p = p.and_then(|t| t.as_iri().cloned());
    graph.estimate(s.as_ref(), p.as_ref(), o.as_ref())
}

struct Filter<'a> {
    expr: &'a Expr,
    vars: Vec<Var>,
    applied: bool,
}

fn passes(e: &Expr, slots: &Slots, row: &Row) -> bool {
    eval(e, &RowEnv { slots, row }).and_then(|t| ebv(&t)) == Ok(true)
}

fn eval_elements(graph: &Graph, els: &[PatternElement], seed: &Binding) -> (Slots, Vec<Row>) {
    let mut slots = Slots(Vec::new());
    for v in seed.keys() {
        slots.add(v);
    }
    for e in els {
        match e {
            PatternElement::Triple(t) => {
                let mut vs = Vec::new();
                t.vars(&mut vs);
                for v in &vs {
                    slots.add(v);
                }
            }
            PatternElement::Bind(_, v) => {
                slots.add(v);
            }
            PatternElement::Filter(_) => {}
        }
    }
    let width = slots.0.len();
    let mut seed_row: Row = vec![None; width];
    for (v, t) in seed {
        seed_row[slots.index(v).expect("seed slot")] = Some(t.clone());
    }
    let mut rows = vec![seed_row];
    // variables bound in every row so far
    let mut certain: Vec<Var> = seed.keys().cloned().collect();
    let mut filters: Vec<Filter> = els
        .iter()
        .filter_map(|e| match e {
            PatternElement::Filter(x) => {
                let mut vars = Vec::new();
                x.vars(&mut vars);
                Some(Filter {
                    expr: x,
                    vars,
                    applied: false,
                })
            }
            _ => None,
        })
        .collect();
    let push_down = |filters: &mut Vec<Filter>, certain: &Vec<Var>, rows: &mut Vec<Row>| {
        for f in filters.iter_mut() {
            if !f.applied && f.vars.iter().all(|v| certain.contains(v)) {
                rows.retain(|r| passes(f.expr, &slots, r));
                f.applied = true;
            }
        }
    };
    push_down(&mut filters, &certain, &mut rows);

    let mut i = 0;
    while i < els.len() {
        match &els[i] {
            PatternElement::Filter(_) => i += 1,
            PatternElement::Bind(x, v) => {
                let k = slots.index(v).expect("bind slot");
                for r in rows.iter_mut() {
                    r[k] = eval(x, &RowEnv { slots: &slots, row: r }).ok();
                }
                i += 1;
            }
            PatternElement::Triple(_) => {
                let mut seg: Vec<&TriplePattern> = Vec::new();
                while let Some(PatternElement::Triple(t)) = els.get(i) {
                    seg.push(t);
                    i += 1;
                }
                while !seg.is_empty() {
                    if rows.is_empty() {
                        break;
                    }
                    let probe = &rows[0];
                    let pick = (0..seg.len())
                        .min_by_key(|&j| {
                            (
                                std::cmp::Reverse(bound_positions(seg[j], &slots, probe)),
                                estimate(graph, seg[j], &slots, probe),
                                j,
                            )
                        })
                        .expect("non-empty segment");
                    let tp = seg.remove(pick);
                    let mut next = Vec::new();
                    for r in &rows {
                        match_triple(graph, tp, &slots, r, &mut next);
                    }
                    rows = next;
                    tp.vars(&mut certain);
                    push_down(&mut filters, &certain, &mut rows);
                }
            }
        }
    }
    for f in filters.iter().filter(|f| !f.applied) {
        rows.retain(|r| passes(f.expr, &slots, r));
    }
    (slots, rows)
}

fn eval_group(graph: &Graph, g: &GroupPattern, seed: &Binding) -> (Slots, Vec<Row>) {
    match g {
        GroupPattern::Elements(els) => eval_elements(graph, els, seed),
        GroupPattern::SubSelect(sub) => {
            let sol = evaluate_select(graph, sub, seed);
            let mut slots = Slots(sol.variables.clone());
            let extra: Vec<(usize, Term)> = seed
                .iter()
                .filter(|(v, _)| !sol.variables.contains(v))
                .map(|(v, t)| (slots.add(v), t.clone()))
                .collect();
            let width = slots.0.len();
            let rows = sol
                .rows
                .into_iter()
                .map(|mut r| {
                    r.resize(width, None);
                    for (i, t) in &extra {
                        r[*i] = Some(t.clone());
                    }
                    r
                })
                .collect();
            (slots, rows)
        }
    }
}

/// Sort key making row order independent of join order.
fn canonical_key(slots: &Slots, row: &Row) -> Vec<String> {
    let mut idx: Vec<usize> = (0..slots.0.len()).collect();
    idx.sort_by(|a, b| slots.0[*a].name().cmp(slots.0[*b].name()));
    idx.into_iter()
        .map(|i| row[i].as_ref().map(|t| t.to_string()).unwrap_or_default())
        .collect()
}

struct GroupEnv<'a> {
    slots: &'a Slots,
    rows: &'a [Row],
    sample: &'a Row,
}

impl Env for GroupEnv<'_> {
    fn var(&self, v: &Var) -> Option<Term> {
        self.slots.index(v).and_then(|i| self.sample.get(i).cloned().flatten())
    }

    fn aggregate(&self, a: &Aggregate) -> EvalResult {
        let mut values: Vec<Result<Term, EvalError>> = match &a.arg {
            None => {
                let mut rows: Vec<&Row> = self.rows.iter().collect();
                if a.distinct {
                    rows.dedup();
                }
                rows.iter().map(|_| Ok(Term::boolean(true))).collect()
            }
            Some(x) => self
                .rows
                .iter()
                .map(|r| eval(x, &RowEnv { slots: self.slots, row: r }))
                .collect(),
        };
        if a.distinct && a.arg.is_some() {
            let mut seen: Vec<Term> = Vec::new();
            values.retain(|v| match v {
                Ok(t) if seen.contains(t) => false,
                Ok(t) => {
                    seen.push(t.clone());
                    true
                }
                Err(_) => true,
            });
        }
        fold_aggregate(a.func, values)
    }
}

pub(crate) fn evaluate_select(graph: &Graph, q: &SelectQuery, seed: &Binding) -> Solutions {
    let (mut slots, mut rows) = eval_group(graph, &q.pattern, seed);
    let variables = q.output_vars();
    let items: Vec<ProjectionItem> = match &q.projection {
        Projection::All => variables.iter().cloned().map(ProjectionItem::Var).collect(),
        Projection::Items(items) => items.clone(),
    };
    let aliases: Vec<usize> = items
        .iter()
        .filter_map(|i| match i {
            ProjectionItem::Expr { alias, .. } => Some(slots.add(alias)),
            _ => None,
        })
        .collect();
    let width = slots.0.len();
    for r in rows.iter_mut() {
        r.resize(width, None);
    }
    let _ = aliases;

    let mut out: Vec<Row> = Vec::new();
    if q.is_aggregate() {
        let key_idx: Vec<usize> = q
            .group_by
            .iter()
            .map(|v| slots.index(v).expect("group var"))
            .collect();
        let mut groups: BTreeMap<Vec<Option<Term>>, Vec<Row>> = BTreeMap::new();
        if q.group_by.is_empty() {
            groups.insert(Vec::new(), Vec::new());
        }
        for r in rows {
            let k = key_idx.iter().map(|&i| r[i].clone()).collect();
            groups.entry(k).or_default().push(r);
        }
        for (_, mut grows) in groups {
            grows.sort_by_cached_key(|r| canonical_key(&slots, r));
            let mut sample: Row = grows.first().cloned().unwrap_or_else(|| vec![None; width]);
            let mut cells = Vec::with_capacity(items.len());
            for item in &items {
                match item {
                    ProjectionItem::Var(v) => {
                        cells.push(slots.index(v).and_then(|i| sample[i].clone()));
                    }
                    ProjectionItem::Expr { expr, alias } => {
                        let env = GroupEnv {
                            slots: &slots,
                            rows: &grows,
                            sample: &sample,
                        };
                        let val = eval(expr, &env).ok();
                        let i = slots.index(alias).expect("alias slot");
                        sample[i] = val.clone();
                        cells.push(val);
                    }
                }
            }
            out.push(cells);
        }
    } else {
        for mut r in rows {
            let mut cells = Vec::with_capacity(items.len());
            for item in &items {
                match item {
                    ProjectionItem::Var(v) => {
                        cells.push(slots.index(v).and_then(|i| r[i].clone()));
                    }
                    ProjectionItem::Expr { expr, alias } => {
                        let val = eval(expr, &RowEnv { slots: &slots, row: &r }).ok();
                        let i = slots.index(alias).expect("alias slot");
                        r[i] = val.clone();
                        cells.push(val);
                    }
                }
            }
            out.push(cells);
        }
    }
    let mut keyed: Vec<(Vec<String>, Row)> = out
        .into_iter()
        .map(|r| {
            let k = r
                .iter()
                .map(|c| c.as_ref().map(|t| t.to_string()).unwrap_or_default())
                .collect();
            (k, r)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    if q.distinct {
        keyed.dedup_by(|a, b| a.1 == b.1);
    }
    Solutions {
        variables,
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
    }
}

fn instantiate(p: &PatternTerm, slots: &Slots, row: &Row) -> Result<Term, String> {
    match p {
        PatternTerm::Var(v) => slots
            .index(v)
            .and_then(|i| row[i].clone())
            .ok_or_else(|| format!("{v} is unbound")),
        PatternTerm::Term(t) => Ok(t.clone()),
        PatternTerm::Quoted(q) => instantiate_triple(q, slots, row).map(Term::quoted),
    }
}

fn instantiate_triple(tp: &TriplePattern, slots: &Slots, row: &Row) -> Result<Triple, String> {
    let s = instantiate(&tp.subject, slots, row)?;
    let p = match instantiate(&tp.predicate, slots, row)? {
        Term::Iri(i) => i,
        other => return Err(format!("predicate {other} is not an IRI")),
    };
    let o = instantiate(&tp.object, slots, row)?;
    Triple::new(s, p, o).map_err(|e| e.to_string())
}

/// Returns the new triples and one diagnostic per skipped template instance.
pub(crate) fn evaluate_insert(
    graph: &Graph,
    q: &InsertQuery,
    seed: &Binding,
) -> (Vec<Triple>, Vec<String>) {
    let (slots, mut rows) = eval_group(graph, &q.pattern, seed);
    rows.sort_by_cached_key(|r| canonical_key(&slots, r));
    let mut triples = Vec::new();
    let mut diagnostics = Vec::new();
    for r in &rows {
        for tp in &q.template {
            match instantiate_triple(tp, &slots, r) {
                Ok(t) => triples.push(t),
                Err(e) => diagnostics.push(format!("skipped `{tp}`: {e}")),
            }
        }
    }
    (triples, diagnostics)
}
