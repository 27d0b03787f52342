use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::KgError;

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Maximum nesting of quoted triples inside a term.
pub const MAX_QUOTE_DEPTH: usize = 2;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(iri: impl AsRef<str>) -> Self {
        Iri(Arc::from(iri.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

/// Calendar date stored as days since 1970-01-01.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Date(i32);

impl Date {
    pub const MIN_DAYS: i32 = -719_162; // 0001-01-01
    pub const MAX_DAYS: i32 = 2_932_896; // 9999-12-31

    pub fn from_days(days: i64) -> Option<Date> {
        if days < Self::MIN_DAYS as i64 || days > Self::MAX_DAYS as i64 {
            None
        } else {
            Some(Date(days as i32))
        }
    }

    pub fn days(self) -> i64 {
        self.0 as i64
    }

    pub fn parse(s: &str) -> Option<Date> {
        let d = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
        if s.len() != 10 {
            return None;
        }
        Date::from_days((d - epoch()).num_days())
    }

    pub fn from_naive(d: NaiveDate) -> Option<Date> {
        Date::from_days((d - epoch()).num_days())
    }

    pub fn to_naive(self) -> NaiveDate {
        epoch() + chrono::Duration::days(self.0 as i64)
    }

    pub fn add_days(self, n: i64) -> Option<Date> {
        Date::from_days(self.days().checked_add(n)?)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_naive().format("%Y-%m-%d"))
    }
}

/// UTC timestamp stored as seconds since the Unix epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DateTime(i64);

impl DateTime {
    const MIN_SECS: i64 = Date::MIN_DAYS as i64 * 86_400;
    const MAX_SECS: i64 = Date::MAX_DAYS as i64 * 86_400 + 86_399;

    pub fn from_secs(secs: i64) -> Option<DateTime> {
        (Self::MIN_SECS..=Self::MAX_SECS)
            .contains(&secs)
            .then_some(DateTime(secs))
    }

    pub fn secs(self) -> i64 {
        self.0
    }

    pub fn parse(s: &str) -> Option<DateTime> {
        let body = s.strip_suffix('Z').unwrap_or(s);
        let dt = NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S").ok()?;
        if body.len() != 19 {
            return None;
        }
        DateTime::from_secs(dt.and_utc().timestamp())
    }
}

impl fmt::Display for DateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dt = chrono::DateTime::from_timestamp(self.0, 0).expect("in range");
        write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%SZ"))
    }
}

/// A typed literal. Values are kept in parsed form; the lexical form is the
/// canonical rendering of the value.
#[derive(Clone, Debug)]
pub enum Literal {
    String(Arc<str>),
    Integer(i64),
    Double(f64),
    Date(Date),
    DateTime(DateTime),
    Boolean(bool),
}

impl Literal {
    pub fn string(s: impl AsRef<str>) -> Literal {
        Literal::String(Arc::from(s.as_ref()))
    }

    /// Builds a double literal; NaN and infinities have no place in the store.
    pub fn double(v: f64) -> Result<Literal, KgError> {
        if v.is_finite() {
            Ok(Literal::Double(v))
        } else {
            Err(KgError::InvalidLiteral {
                lexical: v.to_string(),
                datatype: "double".into(),
            })
        }
    }

    pub fn datatype(&self) -> &'static str {
        match self {
            Literal::String(_) => "string",
            Literal::Integer(_) => "integer",
            Literal::Double(_) => "double",
            Literal::Date(_) => "date",
            Literal::DateTime(_) => "dateTime",
            Literal::Boolean(_) => "boolean",
        }
    }

    pub fn datatype_iri(&self) -> String {
        format!("{XSD}{}", self.datatype())
    }

    /// Parses a lexical form for one of the supported XSD datatypes (local name).
    pub fn from_lexical(lexical: &str, datatype: &str) -> Result<Literal, KgError> {
        let bad = || KgError::InvalidLiteral {
            lexical: lexical.to_string(),
            datatype: datatype.to_string(),
        };
        match datatype {
            "string" => Ok(Literal::string(lexical)),
            "integer" | "int" | "long" => {
                let t = lexical.strip_prefix('+').unwrap_or(lexical);
                t.parse::<i64>().map(Literal::Integer).map_err(|_| bad())
            }
            "double" | "decimal" | "float" => {
                let ok = !lexical.is_empty()
                    && lexical
                        .chars()
                        .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
                if !ok {
                    return Err(bad());
                }
                let v: f64 = lexical.parse().map_err(|_| bad())?;
                Literal::double(v).map_err(|_| bad())
            }
            "date" => Date::parse(lexical).map(Literal::Date).ok_or_else(bad),
            "dateTime" => DateTime::parse(lexical)
                .map(Literal::DateTime)
                .ok_or_else(bad),
            "boolean" => match lexical {
                "true" | "1" => Ok(Literal::Boolean(true)),
                "false" | "0" => Ok(Literal::Boolean(false)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    pub fn lexical(&self) -> String {
        match self {
            Literal::String(s) => s.to_string(),
            Literal::Integer(i) => i.to_string(),
            Literal::Double(d) => format_double(*d),
            Literal::Date(d) => d.to_string(),
            Literal::DateTime(d) => d.to_string(),
            Literal::Boolean(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Literal::Integer(i) => Some(*i as f64),
            Literal::Double(d) => Some(*d),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Literal::String(_) => 0,
            Literal::Integer(_) => 1,
            Literal::Double(_) => 2,
            Literal::Date(_) => 3,
            Literal::DateTime(_) => 4,
            Literal::Boolean(_) => 5,
        }
    }
}

/// Shortest round-tripping decimal form that still reads back as a double
/// (always contains `.` or an exponent).
pub fn format_double(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Literal::String(s) => s.hash(state),
            Literal::Integer(i) => i.hash(state),
            Literal::Double(d) => d.to_bits().hash(state),
            Literal::Date(d) => d.hash(state),
            Literal::DateTime(d) => d.hash(state),
            Literal::Boolean(b) => b.hash(state),
        }
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Literal::String(a), Literal::String(b)) => a.cmp(b),
            (Literal::Integer(a), Literal::Integer(b)) => a.cmp(b),
            (Literal::Double(a), Literal::Double(b)) => a.total_cmp(b),
            (Literal::Date(a), Literal::Date(b)) => a.cmp(b),
            (Literal::DateTime(a), Literal::DateTime(b)) => a.cmp(b),
            (Literal::Boolean(a), Literal::Boolean(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

/// An RDF-star term. Ordering and equality are structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Quoted(Arc<Triple>),
}

impl Term {
    pub fn iri(iri: impl AsRef<str>) -> Term {
        Term::Iri(Iri::new(iri))
    }

    pub fn string(s: impl AsRef<str>) -> Term {
        Term::Literal(Literal::string(s))
    }

    pub fn integer(i: i64) -> Term {
        Term::Literal(Literal::Integer(i))
    }

    /// Panics on non-finite input; use [`Literal::double`] for fallible construction.
    pub fn double(v: f64) -> Term {
        Term::Literal(Literal::double(v).expect("finite double"))
    }

    pub fn date(d: Date) -> Term {
        Term::Literal(Literal::Date(d))
    }

    pub fn boolean(b: bool) -> Term {
        Term::Literal(Literal::Boolean(b))
    }

    pub fn quoted(t: Triple) -> Term {
        Term::Quoted(Arc::new(t))
    }

    /// Quoted-triple nesting depth: 0 for atoms.
    pub fn depth(&self) -> usize {
        match self {
            Term::Quoted(t) => 1 + t.subject.depth().max(t.object.depth()),
            _ => 0,
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_triple(&self) -> Option<&Triple> {
        match self {
            Term::Quoted(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.as_literal().and_then(Literal::as_f64)
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Term::Literal(Literal::Integer(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<Date> {
        match self {
            Term::Literal(Literal::Date(d)) => Some(*d),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Term::Literal(Literal::String(s)) => Some(s),
            _ => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

pub(crate) fn escape_string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => {
                let mut out = String::new();
                escape_string(s, &mut out);
                f.write_str(&out)
            }
            Literal::Integer(_) | Literal::Double(_) | Literal::Boolean(_) => {
                f.write_str(&self.lexical())
            }
            Literal::Date(_) | Literal::DateTime(_) => {
                write!(f, "\"{}\"^^<{}>", self.lexical(), self.datatype_iri())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "{i}"),
            Term::Literal(l) => write!(f, "{l}"),
            Term::Quoted(t) => write!(f, "<< {} {} {} >>", t.subject, t.predicate, t.object),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A validated RDF-star triple: the subject is never a literal and quoted
/// terms nest at most [`MAX_QUOTE_DEPTH`] levels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Triple, KgError> {
        if matches!(subject, Term::Literal(_)) {
            return Err(KgError::Structural(format!(
                "literal subject {subject}"
            )));
        }
        let depth = subject.depth().max(object.depth());
        if depth > MAX_QUOTE_DEPTH {
            return Err(KgError::Structural(format!(
                "quoted triple nesting depth {depth} exceeds {MAX_QUOTE_DEPTH}"
            )));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub(crate) fn new_unchecked(subject: Term, predicate: Iri, object: Term) -> Triple {
        Triple {
            subject,
            predicate,
            object,
        }
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Iri, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
