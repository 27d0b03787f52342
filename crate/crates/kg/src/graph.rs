//! Indexed triple set with subject-, predicate- and object-first indexes.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::KgError;
use crate::term::{Iri, Term, Triple};

type Index = BTreeMap<Term, BTreeMap<Term, BTreeSet<Term>>>;

/// In-memory RDF-star graph with set semantics.
///
/// Mutation needs `&mut`; shared references may be read from any number of
/// threads at once.
#[derive(Clone, Default)]
pub struct Graph {
    spo: Index,
    pos: Index,
    osp: Index,
    len: usize,
}

/// A position in a [`match_pattern`](Graph::match_pattern) query.
#[derive(Clone, Debug, PartialEq)]
pub enum PatternTerm {
    Any,
    Exact(Term),
    Quoted(Box<QuotedPattern>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuotedPattern {
    pub subject: PatternTerm,
    pub predicate: Option<Iri>,
    pub object: PatternTerm,
}

impl PatternTerm {
    fn ground(&self) -> Option<&Term> {
        match self {
            PatternTerm::Exact(t) => Some(t),
            _ => None,
        }
    }

    pub fn matches(&self, term: &Term) -> bool {
        match self {
            PatternTerm::Any => true,
            PatternTerm::Exact(t) => t == term,
            PatternTerm::Quoted(q) => match term {
                Term::Quoted(t) => {
                    q.predicate.as_ref().is_none_or(|p| p == t.predicate())
                        && q.subject.matches(t.subject())
                        && q.object.matches(t.object())
                }
                _ => false,
            },
        }
    }
}

fn add(index: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
    index
        .entry(a.clone())
        .or_default()
        .entry(b.clone())
        .or_default()
        .insert(c.clone())
}

fn del(index: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
    let Some(level1) = index.get_mut(a) else {
        return false;
    };
    let Some(level2) = level1.get_mut(b) else {
        return false;
    };
    let removed = level2.remove(c);
    if level2.is_empty() {
        level1.remove(b);
    }
    if level1.is_empty() {
        index.remove(a);
    }
    removed
}

fn flatten(index: &Index) -> impl Iterator<Item = (&Term, &Term, &Term)> {
    index
        .iter()
        .flat_map(|(a, m)| m.iter().flat_map(move |(b, s)| s.iter().map(move |c| (a, b, c))))
}

fn iri_of(t: &Term) -> Iri {
    match t {
        Term::Iri(i) => i.clone(),
        _ => unreachable!("predicate index keys are IRIs"),
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Inserts a triple; returns `true` iff it was absent.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let p = Term::Iri(triple.predicate().clone());
        let (s, o) = (triple.subject(), triple.object());
        if !add(&mut self.spo, s, &p, o) {
            return false;
        }
        add(&mut self.pos, &p, o, s);
        add(&mut self.osp, o, s, &p);
        self.len += 1;
        true
    }

    /// Validates the parts and inserts. Fails on a literal subject or
    /// excessive quoting depth.
    pub fn insert_parts(&mut self, s: Term, p: Iri, o: Term) -> Result<bool, KgError> {
        Ok(self.insert(Triple::new(s, p, o)?))
    }

    /// Removes a triple; returns `true` iff it was present.
    pub fn remove(&mut self, triple: &Triple) -> bool {
        let p = Term::Iri(triple.predicate().clone());
        let (s, o) = (triple.subject(), triple.object());
        if !del(&mut self.spo, s, &p, o) {
            return false;
        }
        del(&mut self.pos, &p, o, s);
        del(&mut self.osp, o, s, &p);
        self.len -= 1;
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let p = Term::Iri(triple.predicate().clone());
        self.spo
            .get(triple.subject())
            .and_then(|m| m.get(&p))
            .is_some_and(|s| s.contains(triple.object()))
    }

    /// All triples in structural order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        flatten(&self.spo).map(|(s, p, o)| Triple::new_unchecked(s.clone(), iri_of(p), o.clone()))
    }

    /// Index lookup on ground positions; `None` is a wildcard.
    pub fn lookup<'a>(
        &'a self,
        s: Option<&'a Term>,
        p: Option<&'a Iri>,
        o: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = Triple> + 'a> {
        let pt = p.map(|p| Term::Iri(p.clone()));
        let mk = |s: &Term, p: &Term, o: &Term| Triple::new_unchecked(s.clone(), iri_of(p), o.clone());
        match (s, pt, o) {
            (Some(s), Some(p), Some(o)) => {
                let hit = self
                    .spo
                    .get(s)
                    .and_then(|m| m.get(&p))
                    .is_some_and(|set| set.contains(o));
                let t = hit.then(|| mk(s, &p, o));
                Box::new(t.into_iter())
            }
            (Some(s), Some(p), None) => match self.spo.get(s).and_then(|m| m.get(&p)) {
                Some(set) => Box::new(set.iter().map(move |o| mk(s, &p, o))),
                None => Box::new(std::iter::empty()),
            },
            (Some(s), None, Some(o)) => match self.osp.get(o).and_then(|m| m.get(s)) {
                Some(set) => Box::new(set.iter().map(move |p| mk(s, p, o))),
                None => Box::new(std::iter::empty()),
            },
            (Some(s), None, None) => match self.spo.get(s) {
                Some(m) => Box::new(
                    m.iter()
                        .flat_map(move |(p, set)| set.iter().map(move |o| mk(s, p, o))),
                ),
                None => Box::new(std::iter::empty()),
            },
            (None, Some(p), Some(o)) => match self.pos.get(&p).and_then(|m| m.get(o)) {
                Some(set) => {
                    let v: Vec<Triple> = set.iter().map(|s| mk(s, &p, o)).collect();
                    Box::new(v.into_iter())
                }
                None => Box::new(std::iter::empty()),
            },
            (None, Some(p), None) => match self.pos.get(&p) {
                Some(m) => {
                    let v: Vec<Triple> = m
                        .iter()
                        .flat_map(|(o, set)| set.iter().map(|s| mk(s, &p, o)))
                        .collect();
                    Box::new(v.into_iter())
                }
                None => Box::new(std::iter::empty()),
            },
            (None, None, Some(o)) => match self.osp.get(o) {
                Some(m) => Box::new(
                    m.iter()
                        .flat_map(move |(s, set)| set.iter().map(move |p| mk(s, p, o))),
                ),
                None => Box::new(std::iter::empty()),
            },
            (None, None, None) => Box::new(self.iter()),
        }
    }

    /// Cheap upper bound on the number of triples a lookup returns.
    pub fn estimate(&self, s: Option<&Term>, p: Option<&Iri>, o: Option<&Term>) -> usize {
        let pt = p.map(|p| Term::Iri(p.clone()));
        match (s, pt, o) {
            (Some(s), Some(p), _) => self.spo.get(s).and_then(|m| m.get(&p)).map_or(0, |x| x.len()),
            (Some(s), None, _) => self.spo.get(s).map_or(0, |m| m.values().map(|x| x.len()).sum()),
            (None, Some(p), Some(o)) => self.pos.get(&p).and_then(|m| m.get(o)).map_or(0, |x| x.len()),
            (None, Some(p), None) => self.pos.get(&p).map_or(0, |m| m.len().max(1) * 2),
            (None, None, Some(o)) => self.osp.get(o).map_or(0, |m| m.len()),
            (None, None, None) => self.len,
        }
    }

    /// Triples matching every bound position, ordered by their serialized form.
    /// Quoted positions may carry wildcards inside.
    pub fn match_pattern(
        &self,
        s: &PatternTerm,
        p: Option<&Iri>,
        o: &PatternTerm,
    ) -> Vec<Triple> {
        let mut out: Vec<(String, Triple)> = self
            .lookup(s.ground(), p, o.ground())
            .filter(|t| s.matches(t.subject()) && o.matches(t.object()))
            .map(|t| (t.to_string(), t))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.into_iter().map(|(_, t)| t).collect()
    }

    /// Objects of `(s, p, ?)` in structural order.
    pub fn objects<'a>(&'a self, s: &'a Term, p: &'a Iri) -> impl Iterator<Item = Term> + 'a {
        self.lookup(Some(s), Some(p), None).map(|t| t.into_parts().2)
    }

    /// First object of `(s, p, ?)`, if any.
    pub fn object(&self, s: &Term, p: &Iri) -> Option<Term> {
        self.objects(s, p).next()
    }

    /// Subjects of `(?, p, o)`.
    pub fn subjects(&self, p: &Iri, o: &Term) -> Vec<Term> {
        self.lookup(None, Some(p), Some(o))
            .map(|t| t.into_parts().0)
            .collect()
    }

    /// Replaces every `(s, p, *)` triple with the single triple `(s, p, o)`.
    pub fn set_object(&mut self, s: &Term, p: &Iri, o: Term) -> Result<(), KgError> {
        let old: Vec<Triple> = self.lookup(Some(s), Some(p), None).collect();
        for t in &old {
            self.remove(t);
        }
        self.insert_parts(s.clone(), p.clone(), o)?;
        Ok(())
    }

    /// Checks that all three indexes hold exactly the same triple set.
    pub fn audit(&self) -> Result<(), KgError> {
        let from_spo: BTreeSet<(Term, Term, Term)> = flatten(&self.spo)
            .map(|(s, p, o)| (s.clone(), p.clone(), o.clone()))
            .collect();
        let from_pos: BTreeSet<(Term, Term, Term)> = flatten(&self.pos)
            .map(|(p, o, s)| (s.clone(), p.clone(), o.clone()))
            .collect();
        let from_osp: BTreeSet<(Term, Term, Term)> = flatten(&self.osp)
            .map(|(o, s, p)| (s.clone(), p.clone(), o.clone()))
            .collect();
        if from_spo.len() != self.len {
            return Err(KgError::Audit(format!(
                "subject index has {} triples, counter says {}",
                from_spo.len(),
                self.len
            )));
        }
        if from_spo != from_pos {
            return Err(KgError::Audit("predicate index diverges".into()));
        }
        if from_spo != from_osp {
            return Err(KgError::Audit("object index diverges".into()));
        }
        Ok(())
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.spo == other.spo
    }
}

impl Eq for Graph {}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}
