//! Turtle-star reading and canonical writing.
//!
//! The reader accepts prefixes (`@prefix` and `PREFIX`), predicate/object
//! lists, quoted triples in subject and object position, typed literals and
//! the numeric/boolean short forms. Blank nodes, collections, language tags
//! and `@base` are rejected.

use std::collections::BTreeMap;

use crate::error::{KgError, SyntaxError};
use crate::graph::Graph;
use crate::lexer::{tokenize, Mode, Tok, Token};
use crate::term::{escape_string, Iri, Literal, Term, Triple, RDF_TYPE, XSD};

/// Prefix table: prefix label (without colon) to namespace IRI.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Prefixes(BTreeMap<String, String>);

impl Prefixes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, prefix: &str, ns: &str) -> Self {
        self.insert(prefix, ns);
        self
    }

    pub fn insert(&mut self, prefix: &str, ns: &str) {
        self.0.insert(prefix.to_string(), ns.to_string());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.0.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Compact form `prefix:local` using the longest matching namespace.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.0
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()))
            .max_by_key(|(_, ns)| ns.len())
            .and_then(|(p, ns)| {
                let local = &iri[ns.len()..];
                is_plain_local(local).then(|| format!("{p}:{local}"))
            })
    }
}

fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub(crate) fn resolve_pname(
    prefixes: &Prefixes,
    tok: &Token,
    prefix: &str,
    local: &str,
) -> Result<Iri, SyntaxError> {
    match prefixes.get(prefix) {
        Some(ns) => Ok(Iri::new(format!("{ns}{local}"))),
        None => Err(tok.error(format!("undeclared prefix `{prefix}:`"))),
    }
}

/// Builds a literal from a token sequence position. Shared with the query parser.
pub(crate) fn literal_from_tokens(
    toks: &[Token],
    pos: &mut usize,
    prefixes: &Prefixes,
    negate: bool,
) -> Result<Option<Literal>, SyntaxError> {
    let tok = &toks[*pos];
    let sign = if negate { "-" } else { "" };
    let lit = match &tok.tok {
        Tok::Integer(s) => Literal::from_lexical(&format!("{sign}{s}"), "integer"),
        Tok::Decimal(s) | Tok::Double(s) => Literal::from_lexical(&format!("{sign}{s}"), "double"),
        Tok::Word(w) if !negate && w == "true" => Ok(Literal::Boolean(true)),
        Tok::Word(w) if !negate && w == "false" => Ok(Literal::Boolean(false)),
        Tok::Str(s) if !negate => {
            *pos += 1;
            let next = &toks[*pos];
            if let Tok::LangTag(_) = next.tok {
                return Err(next.error("language-tagged literals are not supported"));
            }
            if !next.is_punct("^^") {
                return Ok(Some(Literal::string(s)));
            }
            *pos += 1;
            let dt_tok = &toks[*pos];
            let dt = match &dt_tok.tok {
                Tok::IriRef(i) => Iri::new(i),
                Tok::PName { prefix, local } => resolve_pname(prefixes, dt_tok, prefix, local)?,
                _ => return Err(dt_tok.error("expected datatype IRI")),
            };
            let local = dt
                .as_str()
                .strip_prefix(XSD)
                .ok_or_else(|| dt_tok.error("unsupported datatype"))?;
            let lit = Literal::from_lexical(s, local).map_err(|e| dt_tok.error(e.to_string()))?;
            *pos += 1;
            return Ok(Some(lit));
        }
        _ => return Ok(None),
    };
    let lit = lit.map_err(|e| tok.error(e.to_string()))?;
    *pos += 1;
    Ok(Some(lit))
}

struct TurtleParser {
    toks: Vec<Token>,
    pos: usize,
    prefixes: Prefixes,
    graph: Graph,
}

impl TurtleParser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        let t = self.next();
        if t.is_punct(p) {
            Ok(())
        } else {
            Err(t.error(format!("expected `{p}`")))
        }
    }

    fn document(&mut self) -> Result<(), SyntaxError> {
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), SyntaxError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LangTag(w) if w == "prefix" => {
                self.next();
                self.prefix_decl()?;
                self.expect(".")
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                self.next();
                self.prefix_decl()
            }
            Tok::LangTag(w) if w == "base" => Err(t.error("@base is not supported")),
            Tok::Word(w) if w.eq_ignore_ascii_case("base") => Err(t.error("BASE is not supported")),
            _ => {
                let subject = self.subject()?;
                self.predicate_object_list(&subject)?;
                self.expect(".")
            }
        }
    }

    fn prefix_decl(&mut self) -> Result<(), SyntaxError> {
        let t = self.next();
        let Tok::PName { prefix, local } = &t.tok else {
            return Err(t.error("expected prefix label"));
        };
        if !local.is_empty() {
            return Err(t.error("expected prefix label"));
        }
        let iri_tok = self.next();
        let Tok::IriRef(ns) = &iri_tok.tok else {
            return Err(iri_tok.error("expected namespace IRI"));
        };
        self.prefixes.insert(prefix, ns);
        Ok(())
    }

    fn iri(&mut self) -> Result<Option<Iri>, SyntaxError> {
        let t = self.peek().clone();
        let iri = match &t.tok {
            Tok::IriRef(i) => Iri::new(i),
            Tok::PName { prefix, local } => resolve_pname(&self.prefixes, &t, prefix, local)?,
            _ => return Ok(None),
        };
        self.next();
        Ok(Some(iri))
    }

    fn reject_blank(&self) -> Result<(), SyntaxError> {
        let t = self.peek();
        match &t.tok {
            Tok::BlankLabel(_) => Err(t.error("blank nodes are not supported")),
            Tok::Punct("[") => Err(t.error("blank nodes are not supported")),
            Tok::Punct("(") => Err(t.error("collections are not supported")),
            _ => Ok(()),
        }
    }

    fn subject(&mut self) -> Result<Term, SyntaxError> {
        self.reject_blank()?;
        if let Some(i) = self.iri()? {
            return Ok(Term::Iri(i));
        }
        if self.peek().is_punct("<<") {
            return self.quoted();
        }
        Err(self.peek().error("expected subject"))
    }

    fn verb(&mut self) -> Result<Iri, SyntaxError> {
        if self.peek().is_word("a") && matches!(&self.peek().tok, Tok::Word(w) if w == "a") {
            self.next();
            return Ok(Iri::new(RDF_TYPE));
        }
        self.iri()?
            .ok_or_else(|| self.peek().error("expected predicate"))
    }

    fn object(&mut self) -> Result<Term, SyntaxError> {
        self.reject_blank()?;
        if let Some(i) = self.iri()? {
            return Ok(Term::Iri(i));
        }
        if self.peek().is_punct("<<") {
            return self.quoted();
        }
        let mut pos = self.pos;
        match literal_from_tokens(&self.toks, &mut pos, &self.prefixes, false)? {
            Some(l) => {
                self.pos = pos;
                Ok(Term::Literal(l))
            }
            None => Err(self.peek().error("expected object")),
        }
    }

    fn quoted(&mut self) -> Result<Term, SyntaxError> {
        let open = self.next();
        let s = self.subject()?;
        let p = self.verb()?;
        let o = self.object()?;
        self.expect(">>")?;
        Triple::new(s, p, o)
            .map(Term::quoted)
            .map_err(|e| open.error(e.to_string()))
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), SyntaxError> {
        loop {
            let verb = self.verb()?;
            loop {
                let at = self.peek().clone();
                let o = self.object()?;
                let t = Triple::new(subject.clone(), verb.clone(), o).map_err(|e| at.error(e.to_string()))?;
                self.graph.insert(t);
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
                if self.peek().is_punct(".") {
                    return Ok(());
                }
            } else {
                return Ok(());
            }
        }
    }
}

/// Parses a Turtle-star document.
pub fn parse_turtle_star(text: &str) -> Result<Graph, KgError> {
    parse_turtle_star_with_prefixes(text).map(|(g, _)| g)
}

/// Parses a Turtle-star document, also returning the declared prefixes.
pub fn parse_turtle_star_with_prefixes(text: &str) -> Result<(Graph, Prefixes), KgError> {
    let toks = tokenize(text, Mode::Turtle)?;
    let mut p = TurtleParser {
        toks,
        pos: 0,
        prefixes: Prefixes::new(),
        graph: Graph::new(),
    };
    p.document()?;
    Ok((p.graph, p.prefixes))
}

fn write_iri(iri: &str, prefixes: &Prefixes, out: &mut String) {
    match prefixes.compact(iri) {
        Some(c) => out.push_str(&c),
        None => {
            out.push('<');
            out.push_str(iri);
            out.push('>');
        }
    }
}

fn write_term(t: &Term, prefixes: &Prefixes, out: &mut String) {
    match t {
        Term::Iri(i) => write_iri(i.as_str(), prefixes, out),
        Term::Literal(l) => match l {
            Literal::String(s) => escape_string(s, out),
            Literal::Integer(_) | Literal::Double(_) | Literal::Boolean(_) => {
                out.push_str(&l.lexical())
            }
            Literal::Date(_) | Literal::DateTime(_) => {
                out.push('"');
                out.push_str(&l.lexical());
                out.push_str("\"^^");
                write_iri(&l.datatype_iri(), prefixes, out);
            }
        },
        Term::Quoted(q) => {
            out.push_str("<< ");
            write_term(q.subject(), prefixes, out);
            out.push(' ');
            write_iri(q.predicate().as_str(), prefixes, out);
            out.push(' ');
            write_term(q.object(), prefixes, out);
            out.push_str(" >>");
        }
    }
}

/// Canonical Turtle-star: the full prefix table, a blank line, then one
/// triple per line sorted lexicographically. Equal graphs give equal bytes.
pub fn serialize_turtle_star(graph: &Graph, prefixes: &Prefixes) -> String {
    let mut lines: Vec<String> = graph
        .iter()
        .map(|t| {
            let mut line = String::new();
            write_term(t.subject(), prefixes, &mut line);
            line.push(' ');
            if t.predicate().as_str() == RDF_TYPE {
                line.push('a');
            } else {
                write_iri(t.predicate().as_str(), prefixes, &mut line);
            }
            line.push(' ');
            write_term(t.object(), prefixes, &mut line);
            line.push_str(" .");
            line
        })
        .collect();
    lines.sort();
    let mut out = String::new();
    for (p, ns) in prefixes.iter() {
        out.push_str(&format!("@prefix {p}: <{ns}> .\n"));
    }
    if !prefixes.0.is_empty() {
        out.push('\n');
    }
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
