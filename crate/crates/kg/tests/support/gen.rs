//! Random graphs and random query texts for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;
use scdm_kg::{Date, Graph, Iri, Term, Triple};

pub const NS: &str = "http://t.example/";

fn iri(local: &str) -> Iri {
    Iri::new(format!("{NS}{local}"))
}

fn random_object<R: Rng>(rng: &mut R) -> Term {
    match rng.gen_range(0..7) {
        0 | 1 => Term::Iri(iri(&format!("s{}", rng.gen_range(0..40)))),
        2 => Term::integer(rng.gen_range(-5..20)),
        3 => Term::double(rng.gen_range(-10..40) as f64 * 0.5),
        4 => Term::string(["a", "b", "c", "", "dd"][rng.gen_range(0..5)]),
        5 => Term::date(Date::parse("2021-01-01").unwrap().add_days(rng.gen_range(0..30)).unwrap()),
        _ => Term::boolean(rng.gen()),
    }
}

/// At most `max` triples; about a tenth are annotations on quoted triples.
pub fn random_graph<R: Rng>(rng: &mut R, max: usize) -> Graph {
    let n = rng.gen_range(1..=max);
    let mut g = Graph::new();
    let mut plain: Vec<Triple> = Vec::new();
    for _ in 0..n {
        let t = if !plain.is_empty() && rng.gen_bool(0.1) {
            let inner = plain.choose(rng).unwrap().clone();
            Triple::new(
                Term::quoted(inner),
                iri(&format!("q{}", rng.gen_range(0..2))),
                random_object(rng),
            )
            .unwrap()
        } else {
            let t = Triple::new(
                Term::Iri(iri(&format!("s{}", rng.gen_range(0..40)))),
                iri(&format!("p{}", rng.gen_range(0..6))),
                random_object(rng),
            )
            .unwrap();
            plain.push(t.clone());
            t
        };
        g.insert(t);
    }
    g
}

fn constant<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..6) {
        0 => format!(":s{}", rng.gen_range(0..40)),
        1 => format!("{}", rng.gen_range(-5..20)),
        2 => format!("{:.1}", rng.gen_range(-10..40) as f64 * 0.5),
        3 => format!("\"{}\"", ["a", "b", "c", "", "dd"][rng.gen_range(0..5)]),
        4 => format!(
            "\"2021-01-{:02}\"^^xsd:date",
            rng.gen_range(1..=30)
        ),
        _ => ["true", "false"][rng.gen_range(0..2)].to_string(),
    }
}

struct Q {
    used: Vec<String>,
    next: usize,
}

impl Q {
    fn fresh(&mut self) -> String {
        let v = format!("?v{}", self.next);
        self.next += 1;
        v
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> String {
        self.used.choose(rng).unwrap().clone()
    }

    fn note(&mut self, v: &str) {
        if v.starts_with('?') && !self.used.iter().any(|u| u == v) {
            self.used.push(v.to_string());
        }
    }
}

fn operand<R: Rng>(rng: &mut R, q: &Q) -> String {
    if rng.gen_bool(0.6) {
        q.pick(rng)
    } else {
        constant(rng)
    }
}

fn expr<R: Rng>(rng: &mut R, q: &Q, depth: u32) -> String {
    if depth == 0 {
        return operand(rng, q);
    }
    match rng.gen_range(0..8) {
        0 => format!("({} && {})", expr(rng, q, depth - 1), expr(rng, q, depth - 1)),
        1 => format!("({} || {})", expr(rng, q, depth - 1), expr(rng, q, depth - 1)),
        2 => format!("!({})", expr(rng, q, depth - 1)),
        3 => {
            let op = ["+", "-", "*", "/"].choose(rng).unwrap();
            format!("({} {op} {})", expr(rng, q, depth - 1), expr(rng, q, depth - 1))
        }
        4 => format!(
            "IF({}, {}, {})",
            expr(rng, q, depth - 1),
            expr(rng, q, depth - 1),
            expr(rng, q, depth - 1)
        ),
        5 => format!("-{}", operand(rng, q)),
        _ => {
            let op = ["=", "!=", "<", "<=", ">", ">="].choose(rng).unwrap();
            format!("({} {op} {})", expr(rng, q, depth - 1), expr(rng, q, depth - 1))
        }
    }
}

fn patterns<R: Rng>(rng: &mut R, q: &mut Q) -> Vec<String> {
    let mut out = Vec::new();
    let n = rng.gen_range(1..=3);
    for i in 0..n {
        let subj = if i == 0 {
            q.fresh()
        } else {
            q.pick(rng)
        };
        let pred = if i > 0 && rng.gen_bool(0.1) {
            q.fresh()
        } else {
            format!(":p{}", rng.gen_range(0..6))
        };
        let obj = match rng.gen_range(0..5) {
            0 => constant(rng),
            1 if i > 0 => q.pick(rng),
            _ => q.fresh(),
        };
        let text = if rng.gen_bool(0.2) {
            let ann = if rng.gen_bool(0.8) { q.fresh() } else { constant(rng) };
            let t = format!("<< {subj} {pred} {obj} >> :q{} {ann}", rng.gen_range(0..2));
            q.note(&ann);
            t
        } else {
            format!("{subj} {pred} {obj}")
        };
        q.note(&subj);
        q.note(&pred);
        q.note(&obj);
        out.push(text);
    }
    out
}

fn body<R: Rng>(rng: &mut R, q: &mut Q) -> String {
    let mut els = patterns(rng, q);
    let mut extra = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let d = rng.gen_range(0..=2);
        let e = expr(rng, q, d);
        extra.push(format!("FILTER({e})"));
    }
    if rng.gen_bool(0.4) {
        let d = rng.gen_range(0..=2);
        let e = expr(rng, q, d);
        let v = q.fresh();
        extra.push(format!("BIND({e} AS {v})"));
        q.note(&v);
    }
    // patterns stay in written (connected) order
    for x in extra {
        let at = rng.gen_range(0..=els.len());
        els.insert(at, x);
    }
    els.join(" . ")
}

fn aggregate<R: Rng>(rng: &mut R, q: &Q) -> String {
    let f = ["SUM", "COUNT", "MIN", "MAX", "AVG"].choose(rng).unwrap();
    let d = if rng.gen_bool(0.25) { "DISTINCT " } else { "" };
    if *f == "COUNT" && rng.gen_bool(0.3) {
        return format!("COUNT({d}*)");
    }
    let arg = if rng.gen_bool(0.7) { q.pick(rng) } else { expr(rng, q, 1) };
    format!("{f}({d}{arg})")
}

fn select_text<R: Rng>(rng: &mut R, q: &mut Q, allow_sub: bool) -> String {
    if allow_sub && rng.gen_bool(0.1) {
        let b = body(rng, q);
        let g = q.pick(rng);
        let x = q.pick(rng);
        let inner = format!("SELECT {g} (MAX({x}) AS ?m) WHERE {{ {b} }} GROUP BY {g}");
        let f = ["SUM", "COUNT", "MIN", "MAX", "AVG"].choose(rng).unwrap();
        return if rng.gen_bool(0.5) {
            format!("SELECT ({f}(?m) AS ?t) WHERE {{ {inner} }}")
        } else {
            format!("SELECT ?m ({f}({g}) AS ?t) WHERE {{ {inner} }} GROUP BY ?m")
        };
    }
    let b = body(rng, q);
    match rng.gen_range(0..5) {
        0 => format!("SELECT * WHERE {{ {b} }}"),
        1 | 2 => {
            let mut vs: Vec<String> = q.used.clone();
            vs.shuffle(rng);
            vs.truncate(rng.gen_range(1..=vs.len()));
            let d = if rng.gen_bool(0.3) { "DISTINCT " } else { "" };
            let extra = if rng.gen_bool(0.3) {
                format!(" ({} AS ?w)", expr(rng, q, 1))
            } else {
                String::new()
            };
            format!("SELECT {d}{}{extra} WHERE {{ {b} }}", vs.join(" "))
        }
        3 => {
            let g = q.pick(rng);
            let a1 = aggregate(rng, q);
            let a2 = aggregate(rng, q);
            format!("SELECT {g} ({a1} AS ?x1) ({a2} AS ?x2) WHERE {{ {b} }} GROUP BY {g}")
        }
        _ => {
            let a1 = aggregate(rng, q);
            format!("SELECT ({a1} AS ?x1) WHERE {{ {b} }}")
        }
    }
}

pub fn random_query<R: Rng>(rng: &mut R) -> String {
    let mut q = Q { used: vec![], next: 0 };
    let sel = select_text(rng, &mut q, true);
    format!("PREFIX : <{NS}>\nPREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n{sel}")
}
