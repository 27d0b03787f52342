//! Typed views over the graph and their inverse.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use scdm_kg::{Date, Graph, Iri, Term, Triple, RDF_TYPE};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::vocab::{self as v, iri, local_of, node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Supplier,
    Oem,
    Customer,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Supplier => "supplier",
            Tier::Oem => "oem",
            Tier::Customer => "customer",
        }
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "supplier" => Ok(Tier::Supplier),
            "oem" => Ok(Tier::Oem),
            "customer" => Ok(Tier::Customer),
            _ => Err(format!("unknown tier `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SeverityLevel {
    Low,
    Medium,
    High,
}

impl SeverityLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            SeverityLevel::Low => "Low",
            SeverityLevel::Medium => "Medium",
            SeverityLevel::High => "High",
        }
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeverityLevel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Low" | "low" => Ok(SeverityLevel::Low),
            "Medium" | "medium" => Ok(SeverityLevel::Medium),
            "High" | "high" => Ok(SeverityLevel::High),
            _ => Err(CoreError::Config(format!("unknown severity level `{s}`"))),
        }
    }
}

/// Remaining-capacity fraction per severity level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverityTable {
    #[serde(rename = "Low")]
    pub low: f64,
    #[serde(rename = "Medium")]
    pub medium: f64,
    #[serde(rename = "High")]
    pub high: f64,
}

impl Default for SeverityTable {
    fn default() -> Self {
        SeverityTable {
            low: 0.9,
            medium: 0.5,
            high: 0.1,
        }
    }
}

impl SeverityTable {
    pub fn factor(&self, level: SeverityLevel) -> f64 {
        match level {
            SeverityLevel::Low => self.low,
            SeverityLevel::Medium => self.medium,
            SeverityLevel::High => self.high,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("Low", self.low), ("Medium", self.medium), ("High", self.high)] {
            if !(0.0..=1.0).contains(&f) {
                return Err(CoreError::Config(format!("severity factor {name}={f} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

pub fn severity_to_factor(level: &str, table: &SeverityTable) -> Result<f64> {
    Ok(table.factor(level.parse()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cause {
    Internal,
    External,
    Mixed,
}

impl Cause {
    pub fn as_str(self) -> &'static str {
        match self {
            Cause::Internal => "internal",
            Cause::External => "external",
            Cause::Mixed => "mixed",
        }
    }

    fn types(self) -> &'static [&'static str] {
        match self {
            Cause::Internal => &["internal"],
            Cause::External => &["external"],
            Cause::Mixed => &["external", "internal"],
        }
    }
}

impl FromStr for Cause {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "internal" => Ok(Cause::Internal),
            "external" => Ok(Cause::External),
            "mixed" => Ok(Cause::Mixed),
            _ => Err(CoreError::Config(format!("unknown cause `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoRect {
    pub min_lon: f64,
    pub max_lon: f64,
    pub min_lat: f64,
    pub max_lat: f64,
}

impl GeoRect {
    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.min_lon..=self.max_lon).contains(&p.lon) && (self.min_lat..=self.max_lat).contains(&p.lat)
    }

    /// Small square centred on a point.
    pub fn around(p: GeoPoint, half: f64) -> GeoRect {
        GeoRect {
            min_lon: p.lon - half,
            max_lon: p.lon + half,
            min_lat: p.lat - half,
            max_lat: p.lat + half,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    pub id: String,
    pub product: String,
    pub date: Date,
    /// Current load, stored as `hasQuantity`.
    pub load: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stock {
    pub id: String,
    pub product: String,
    pub date: Date,
    pub quantity: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportMode {
    pub id: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partner {
    pub id: String,
    pub tier: Tier,
    pub location: GeoPoint,
    pub group: Option<String>,
    pub priority: Option<i64>,
    pub saturation: Option<f64>,
    pub capacities: Vec<Capacity>,
    pub stock: Vec<Stock>,
    pub transport_modes: Vec<TransportMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub partner: String,
    pub product: String,
    pub timestamp: Date,
    pub quantity: f64,
    pub unit_price: f64,
    pub disrupted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupplyPlan {
    pub id: String,
    pub allocations: Vec<Allocation>,
    pub is_disrupted: bool,
    pub recovered_by: Option<String>,
    pub to_recover: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Order {
    pub id: String,
    pub customer: String,
    pub product: String,
    pub delivery: Date,
    pub quantity: i64,
    pub original_price: f64,
    pub plan: SupplyPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disruption {
    pub id: String,
    pub cause: Cause,
    pub scope: String,
    pub severity: SeverityLevel,
    pub severity_factor: f64,
    pub begin: Date,
    pub end: Option<Date>,
    pub region: GeoRect,
    pub affected_partners: Vec<String>,
    pub affected_plan_count: Option<i64>,
}

impl Disruption {
    pub fn duration_days(&self) -> Option<i64> {
        self.end.map(|e| e.days() - self.begin.days())
    }
}

/// Every typed record of a graph. Vectors are sorted by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Snapshot {
    pub partners: Vec<Partner>,
    pub orders: Vec<Order>,
    pub disruptions: Vec<Disruption>,
}

impl Snapshot {
    pub fn partner(&self, id: &str) -> Option<&Partner> {
        self.partners.iter().find(|p| p.id == id)
    }

    pub fn disruption(&self, id: &str) -> Option<&Disruption> {
        self.disruptions.iter().find(|d| d.id == id)
    }

    pub fn sort(&mut self) {
        self.partners.sort_by(|a, b| a.id.cmp(&b.id));
        for p in &mut self.partners {
            p.capacities.sort_by(|a, b| a.id.cmp(&b.id));
            p.stock.sort_by(|a, b| a.id.cmp(&b.id));
            p.transport_modes.sort_by(|a, b| a.id.cmp(&b.id));
        }
        self.orders.sort_by(|a, b| a.id.cmp(&b.id));
        for o in &mut self.orders {
            o.plan.allocations.sort_by(|a, b| a.partner.cmp(&b.partner));
        }
        self.disruptions.sort_by(|a, b| a.id.cmp(&b.id));
        for d in &mut self.disruptions {
            d.affected_partners.sort();
        }
    }
}

/// Entities excluded by `load_views`, one line each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViewReport {
    pub issues: Vec<String>,
}

impl ViewReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

pub const TRUE_MARK: &str = "True";

/// Rewrites alias predicates (also inside quoted triples) to canonical ones.
pub fn canonicalize(graph: &Graph) -> Graph {
    fn term(t: &Term) -> Term {
        match t {
            Term::Quoted(q) => Term::quoted(triple(q)),
            other => other.clone(),
        }
    }
    fn triple(t: &Triple) -> Triple {
        let p = v::canonical(t.predicate()).unwrap_or_else(|| t.predicate().clone());
        Triple::new(term(t.subject()), p, term(t.object())).expect("rewriting keeps shape")
    }
    graph.iter().map(|t| triple(&t)).collect()
}

// ---- emit ----

struct Emitter {
    g: Graph,
}

impl Emitter {
    fn add(&mut self, s: Term, p: &str, o: Term) {
        self.g.insert(Triple::new(s, iri(p), o).expect("emitted subjects are IRIs or quoted"));
    }
}

fn dbl(entity: &str, field: &str, v: f64) -> Result<Term> {
    if v.is_finite() {
        Ok(Term::double(v))
    } else {
        Err(CoreError::invalid(entity, field, "not a finite number"))
    }
}

fn check_id(entity: &str, id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.chars().next().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(CoreError::invalid(entity, "id", format!("`{id}` is not a plain local name")))
    }
}

pub fn allocation_term(plan: &str, partner: &str) -> Term {
    Term::quoted(Triple::new(node(plan), iri(v::NEEDS_PARTNER), node(partner)).expect("iri subject"))
}

pub fn emit_views(snapshot: &Snapshot) -> Result<Graph> {
    let mut e = Emitter { g: Graph::new() };
    let ty = || Iri::new(RDF_TYPE);
    for p in &snapshot.partners {
        check_id("partner", &p.id)?;
        let s = node(&p.id);
        e.g.insert(Triple::new(s.clone(), ty(), node(v::PARTNER)).expect("iri"));
        e.add(s.clone(), v::HAS_TIER, Term::string(p.tier.as_str()));
        e.add(s.clone(), v::HAS_LONGITUDE, dbl(&p.id, "longitude", p.location.lon)?);
        e.add(s.clone(), v::HAS_LATITUDE, dbl(&p.id, "latitude", p.location.lat)?);
        if let Some(g) = &p.group {
            check_id(&p.id, g)?;
            e.add(s.clone(), v::HAS_GROUP, node(g));
        }
        if let Some(pr) = p.priority {
            if pr < 1 {
                return Err(CoreError::invalid(&p.id, "priority", "must be at least 1"));
            }
            e.add(s.clone(), v::HAS_PRIORITY, Term::integer(pr));
        }
        if let Some(sat) = p.saturation {
            if sat <= 0.0 {
                return Err(CoreError::invalid(&p.id, "saturation", "must be positive"));
            }
            e.add(s.clone(), v::HAS_CAPACITY_SATURATION, dbl(&p.id, "saturation", sat)?);
        }
        for c in &p.capacities {
            check_id(&p.id, &c.id)?;
            if let Some(sat) = p.saturation {
                if c.load > sat {
                    return Err(CoreError::invalid(&c.id, "load", format!("{} exceeds saturation {sat}", c.load)));
                }
            }
            if c.load < 0.0 {
                return Err(CoreError::invalid(&c.id, "load", "negative"));
            }
            let n = node(&c.id);
            e.add(s.clone(), v::HAS_CAPACITY, n.clone());
            e.add(n.clone(), v::HAS_PRODUCT, node(&c.product));
            e.add(n.clone(), v::HAS_TIME_STAMP, Term::date(c.date));
            e.add(n.clone(), v::HAS_QUANTITY, dbl(&c.id, "load", c.load)?);
            e.add(n, v::HAS_PRICE, dbl(&c.id, "price", c.price)?);
        }
        for st in &p.stock {
            check_id(&p.id, &st.id)?;
            if st.quantity < 0.0 {
                return Err(CoreError::invalid(&st.id, "quantity", "negative stock"));
            }
            let n = node(&st.id);
            e.add(s.clone(), v::HAS_STRATEGIC_STOCK, n.clone());
            e.add(n.clone(), v::HAS_PRODUCT, node(&st.product));
            e.add(n.clone(), v::HAS_TIME_STAMP, Term::date(st.date));
            e.add(n.clone(), v::HAS_QUANTITY, dbl(&st.id, "quantity", st.quantity)?);
            e.add(n, v::HAS_PRICE, dbl(&st.id, "price", st.price)?);
        }
        for m in &p.transport_modes {
            check_id(&p.id, &m.id)?;
            let n = node(&m.id);
            e.add(s.clone(), v::HAS_TRANSPORT_MODE, n.clone());
            e.add(n, v::HAS_COST, dbl(&m.id, "cost", m.cost)?);
        }
    }
    for o in &snapshot.orders {
        check_id("order", &o.id)?;
        check_id(&o.id, &o.plan.id)?;
        if o.quantity <= 0 {
            return Err(CoreError::invalid(&o.id, "quantity", "must be positive"));
        }
        let s = node(&o.id);
        e.g.insert(Triple::new(s.clone(), ty(), node(v::ORDER)).expect("iri"));
        e.add(node(&o.customer), v::MAKES, s.clone());
        e.add(s.clone(), v::HAS_PRODUCT, node(&o.product));
        e.add(s.clone(), v::HAS_DELIVERY_TIME, Term::date(o.delivery));
        e.add(s.clone(), v::HAS_QUANTITY, Term::integer(o.quantity));
        e.add(s.clone(), v::HAS_ORIGINAL_PRICE, dbl(&o.id, "original price", o.original_price)?);
        let plan = &o.plan;
        let ps = node(&plan.id);
        e.add(s, v::HAS_SUPPLY_PLAN, ps.clone());
        e.g.insert(Triple::new(ps.clone(), ty(), node(v::SUPPLY_PLAN)).expect("iri"));
        if plan.is_disrupted {
            e.add(ps.clone(), v::IS_DISRUPTED, Term::string(TRUE_MARK));
        }
        if plan.to_recover.is_some() != plan.is_disrupted {
            return Err(CoreError::invalid(&plan.id, "to_recover", "present iff the plan is disrupted"));
        }
        if let Some(r) = plan.to_recover {
            if r < 0.0 {
                return Err(CoreError::invalid(&plan.id, "to_recover", "negative"));
            }
            e.add(ps.clone(), v::HAS_TO_RECOVER, dbl(&plan.id, "to_recover", r)?);
        }
        if let Some(by) = &plan.recovered_by {
            e.add(ps.clone(), v::IS_RECOVERED_BY, Term::string(by));
        }
        let mut seen = BTreeSet::new();
        for a in &plan.allocations {
            if !seen.insert(&a.partner) {
                return Err(CoreError::invalid(&plan.id, "allocations", format!("partner {} listed twice", a.partner)));
            }
            if a.quantity < 0.0 {
                return Err(CoreError::invalid(&plan.id, "allocation quantity", "negative"));
            }
            e.add(ps.clone(), v::NEEDS_PARTNER, node(&a.partner));
            let q = allocation_term(&plan.id, &a.partner);
            e.add(q.clone(), v::GETS_PRODUCT, node(&a.product));
            e.add(q.clone(), v::HAS_TIME_STAMP, Term::date(a.timestamp));
            e.add(q.clone(), v::HAS_QUANTITY, dbl(&plan.id, "allocation quantity", a.quantity)?);
            e.add(q.clone(), v::HAS_UNIT_PRICE, dbl(&plan.id, "unit price", a.unit_price)?);
            if a.disrupted {
                e.add(q, v::IS_DISRUPTED, Term::string(TRUE_MARK));
            }
        }
    }
    for d in &snapshot.disruptions {
        check_id("disruption", &d.id)?;
        let s = node(&d.id);
        if let Some(end) = d.end {
            if end < d.begin {
                return Err(CoreError::invalid(&d.id, "end", "before begin"));
            }
        }
        if !(0.0..=1.0).contains(&d.severity_factor) {
            return Err(CoreError::invalid(&d.id, "severity_factor", "outside [0, 1]"));
        }
        let r = d.region;
        if r.min_lon > r.max_lon || r.min_lat > r.max_lat {
            return Err(CoreError::invalid(&d.id, "region", "min exceeds max"));
        }
        e.g.insert(Triple::new(s.clone(), ty(), node(v::DISRUPTION)).expect("iri"));
        let cause = node(&format!("{}_cause", d.id));
        e.add(s.clone(), v::HAS_CAUSE, cause.clone());
        for t in d.cause.types() {
            e.add(cause.clone(), v::HAS_CAUSE_TYPE, Term::string(t));
        }
        e.add(cause, v::HAS_SCOPE, Term::string(&d.scope));
        e.add(s.clone(), v::HAS_SEVERITY, Term::string(d.severity.as_str()));
        e.add(s.clone(), v::HAS_SEVERITY_FACTOR, dbl(&d.id, "severity_factor", d.severity_factor)?);
        e.add(s.clone(), v::HAS_BEGIN_DATE, Term::date(d.begin));
        if let Some(end) = d.end {
            e.add(s.clone(), v::HAS_END_DATE, Term::date(end));
            e.add(s.clone(), v::HAS_DURATION, Term::integer(end.days() - d.begin.days()));
        }
        e.add(s.clone(), v::HAS_MIN_LONGITUDE, dbl(&d.id, "region", r.min_lon)?);
        e.add(s.clone(), v::HAS_MAX_LONGITUDE, dbl(&d.id, "region", r.max_lon)?);
        e.add(s.clone(), v::HAS_MIN_LATITUDE, dbl(&d.id, "region", r.min_lat)?);
        e.add(s.clone(), v::HAS_MAX_LATITUDE, dbl(&d.id, "region", r.max_lat)?);
        for p in &d.affected_partners {
            e.add(s.clone(), v::AFFECTS_PARTNER, node(p));
        }
        if let Some(n) = d.affected_plan_count {
            e.add(s, v::AFFECTS_PLAN, Term::integer(n));
        }
    }
    Ok(e.g)
}

// ---- load ----

struct Reader<'g> {
    g: &'g Graph,
}

type Field<T> = std::result::Result<T, String>;

impl Reader<'_> {
    fn all(&self, s: &Term, p: &str) -> Vec<Term> {
        self.g.objects(s, &iri(p)).collect()
    }

    fn opt(&self, s: &Term, p: &str) -> Field<Option<Term>> {
        let mut it = self.all(s, p).into_iter();
        let first = it.next();
        if it.next().is_some() {
            return Err(format!("{p} has several values"));
        }
        Ok(first)
    }

    fn one(&self, s: &Term, p: &str) -> Field<Term> {
        self.opt(s, p)?.ok_or_else(|| format!("missing {p}"))
    }

    fn id(&self, t: &Term, what: &str) -> Field<String> {
        local_of(t)
            .map(str::to_string)
            .ok_or_else(|| format!("{what} {t} is outside the vocabulary namespace"))
    }

    fn one_id(&self, s: &Term, p: &str) -> Field<String> {
        let t = self.one(s, p)?;
        self.id(&t, p)
    }

    fn num(&self, s: &Term, p: &str) -> Field<f64> {
        self.one(s, p)?.as_f64().ok_or_else(|| format!("{p} is not numeric"))
    }

    fn opt_num(&self, s: &Term, p: &str) -> Field<Option<f64>> {
        match self.opt(s, p)? {
            Some(t) => t.as_f64().map(Some).ok_or_else(|| format!("{p} is not numeric")),
            None => Ok(None),
        }
    }

    fn int(&self, s: &Term, p: &str) -> Field<i64> {
        self.one(s, p)?.as_i64().ok_or_else(|| format!("{p} is not an integer"))
    }

    fn opt_int(&self, s: &Term, p: &str) -> Field<Option<i64>> {
        match self.opt(s, p)? {
            Some(t) => t.as_i64().map(Some).ok_or_else(|| format!("{p} is not an integer")),
            None => Ok(None),
        }
    }

    fn date(&self, s: &Term, p: &str) -> Field<Date> {
        self.one(s, p)?.as_date().ok_or_else(|| format!("{p} is not a date"))
    }

    fn opt_date(&self, s: &Term, p: &str) -> Field<Option<Date>> {
        match self.opt(s, p)? {
            Some(t) => t.as_date().map(Some).ok_or_else(|| format!("{p} is not a date")),
            None => Ok(None),
        }
    }

    fn string(&self, s: &Term, p: &str) -> Field<String> {
        self.one(s, p)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| format!("{p} is not a string"))
    }

    fn opt_string(&self, s: &Term, p: &str) -> Field<Option<String>> {
        match self.opt(s, p)? {
            Some(t) => t.as_str().map(|x| Some(x.to_string())).ok_or_else(|| format!("{p} is not a string")),
            None => Ok(None),
        }
    }

    fn flag(&self, s: &Term, p: &str) -> bool {
        self.all(s, p).iter().any(|t| t.as_str() == Some(TRUE_MARK))
    }

    fn instances(&self, class: &str) -> Vec<Term> {
        let mut v = self.g.subjects(&Iri::new(RDF_TYPE), &node(class));
        v.sort();
        v
    }

    fn partner(&self, s: &Term) -> Field<Partner> {
        let id = self.id(s, "partner")?;
        let tier: Tier = self.string(s, v::HAS_TIER)?.parse()?;
        let location = GeoPoint {
            lon: self.num(s, v::HAS_LONGITUDE)?,
            lat: self.num(s, v::HAS_LATITUDE)?,
        };
        let group = match self.opt(s, v::HAS_GROUP)? {
            Some(t) => Some(self.id(&t, "group")?),
            None => None,
        };
        let mut capacities = Vec::new();
        for c in self.all(s, v::HAS_CAPACITY) {
            capacities.push(Capacity {
                id: self.id(&c, "capacity")?,
                product: self.one_id(&c, v::HAS_PRODUCT)?,
                date: self.date(&c, v::HAS_TIME_STAMP)?,
                load: self.num(&c, v::HAS_QUANTITY)?,
                price: self.num(&c, v::HAS_PRICE)?,
            });
        }
        let mut stock = Vec::new();
        for c in self.all(s, v::HAS_STRATEGIC_STOCK) {
            let quantity = self.num(&c, v::HAS_QUANTITY)?;
            if quantity < 0.0 {
                return Err("negative stock quantity".into());
            }
            stock.push(Stock {
                id: self.id(&c, "stock")?,
                product: self.one_id(&c, v::HAS_PRODUCT)?,
                date: self.date(&c, v::HAS_TIME_STAMP)?,
                quantity,
                price: self.num(&c, v::HAS_PRICE)?,
            });
        }
        let mut transport_modes = Vec::new();
        for m in self.all(s, v::HAS_TRANSPORT_MODE) {
            transport_modes.push(TransportMode {
                id: self.id(&m, "transport mode")?,
                cost: self.num(&m, v::HAS_COST)?,
            });
        }
        let priority = self.opt_int(s, v::HAS_PRIORITY)?;
        if priority.is_some_and(|p| p < 1) {
            return Err("priority below 1".into());
        }
        Ok(Partner {
            id,
            tier,
            location,
            group,
            priority,
            saturation: self.opt_num(s, v::HAS_CAPACITY_SATURATION)?,
            capacities,
            stock,
            transport_modes,
        })
    }

    fn order(&self, s: &Term) -> Field<Order> {
        let id = self.id(s, "order")?;
        let makers = self.g.subjects(&iri(v::MAKES), s);
        let customer = match makers.as_slice() {
            [c] => self.id(c, "customer")?,
            [] => return Err("no customer makes it".into()),
            _ => return Err("several customers make it".into()),
        };
        let plan_term = self.one(s, v::HAS_SUPPLY_PLAN)?;
        let plan_id = self.id(&plan_term, "plan")?;
        let mut allocations = Vec::new();
        for p in self.all(&plan_term, v::NEEDS_PARTNER) {
            let partner = self.id(&p, "partner")?;
            let q = allocation_term(&plan_id, &partner);
            let quantity = self.num(&q, v::HAS_QUANTITY)?;
            if quantity < 0.0 {
                return Err("negative allocation quantity".into());
            }
            allocations.push(Allocation {
                partner,
                product: self.one_id(&q, v::GETS_PRODUCT)?,
                timestamp: self.date(&q, v::HAS_TIME_STAMP)?,
                quantity,
                unit_price: self.num(&q, v::HAS_UNIT_PRICE)?,
                disrupted: self.flag(&q, v::IS_DISRUPTED),
            });
        }
        let is_disrupted = self.flag(&plan_term, v::IS_DISRUPTED);
        let to_recover = self.opt_num(&plan_term, v::HAS_TO_RECOVER)?;
        if to_recover.is_some() != is_disrupted {
            return Err("hasToRecover present iff the plan is disrupted".into());
        }
        let quantity = self.int(s, v::HAS_QUANTITY)?;
        if quantity <= 0 {
            return Err("non-positive quantity".into());
        }
        Ok(Order {
            id,
            customer,
            product: self.one_id(s, v::HAS_PRODUCT)?,
            delivery: self.date(s, v::HAS_DELIVERY_TIME)?,
            quantity,
            original_price: self.num(s, v::HAS_ORIGINAL_PRICE)?,
            plan: SupplyPlan {
                id: plan_id,
                allocations,
                is_disrupted,
                recovered_by: self.opt_string(&plan_term, v::IS_RECOVERED_BY)?,
                to_recover,
            },
        })
    }

    fn disruption(&self, s: &Term) -> Field<Disruption> {
        let id = self.id(s, "disruption")?;
        let cause_node = self.one(s, v::HAS_CAUSE)?;
        let mut types: Vec<String> = self
            .all(&cause_node, v::HAS_CAUSE_TYPE)
            .iter()
            .filter_map(|t| t.as_str().map(str::to_string))
            .collect();
        types.sort();
        let cause = match types.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["internal"] => Cause::Internal,
            ["external"] => Cause::External,
            ["external", "internal"] => Cause::Mixed,
            other => return Err(format!("unrecognised cause types {other:?}")),
        };
        let severity: SeverityLevel = self.string(s, v::HAS_SEVERITY)?.parse().map_err(|e: CoreError| e.to_string())?;
        let severity_factor = self.num(s, v::HAS_SEVERITY_FACTOR)?;
        if !(0.0..=1.0).contains(&severity_factor) {
            return Err("severity factor outside [0, 1]".into());
        }
        let begin = self.date(s, v::HAS_BEGIN_DATE)?;
        let end = self.opt_date(s, v::HAS_END_DATE)?;
        if end.is_some_and(|e| e < begin) {
            return Err("end before begin".into());
        }
        let region = GeoRect {
            min_lon: self.num(s, v::HAS_MIN_LONGITUDE)?,
            max_lon: self.num(s, v::HAS_MAX_LONGITUDE)?,
            min_lat: self.num(s, v::HAS_MIN_LATITUDE)?,
            max_lat: self.num(s, v::HAS_MAX_LATITUDE)?,
        };
        if region.min_lon > region.max_lon || region.min_lat > region.max_lat {
            return Err("region min exceeds max".into());
        }
        let mut affected_partners = Vec::new();
        for p in self.all(s, v::AFFECTS_PARTNER) {
            affected_partners.push(self.id(&p, "partner")?);
        }
        Ok(Disruption {
            id,
            cause,
            scope: self.string(&cause_node, v::HAS_SCOPE)?,
            severity,
            severity_factor,
            begin,
            end,
            region,
            affected_partners,
            affected_plan_count: self.opt_int(s, v::AFFECTS_PLAN)?,
        })
    }
}

/// Materializes every well-formed entity; malformed ones are reported and skipped.
pub fn load_views(graph: &Graph) -> (Snapshot, ViewReport) {
    let canon;
    let g = if graph.iter().any(|t| has_alias(&t)) {
        canon = canonicalize(graph);
        &canon
    } else {
        graph
    };
    let r = Reader { g };
    let mut snap = Snapshot::default();
    let mut report = ViewReport::default();
    let mut note = |kind: &str, t: &Term, e: String| report.issues.push(format!("{kind} {t}: {e}"));
    for s in r.instances(v::PARTNER) {
        match r.partner(&s) {
            Ok(p) => snap.partners.push(p),
            Err(e) => note("partner", &s, e),
        }
    }
    for s in r.instances(v::ORDER) {
        match r.order(&s) {
            Ok(o) => snap.orders.push(o),
            Err(e) => note("order", &s, e),
        }
    }
    for s in r.instances(v::DISRUPTION) {
        match r.disruption(&s) {
            Ok(d) => snap.disruptions.push(d),
            Err(e) => note("disruption", &s, e),
        }
    }
    snap.sort();
    (snap, report)
}

fn has_alias(t: &Triple) -> bool {
    let nested = |x: &Term| x.as_triple().is_some_and(has_alias);
    v::canonical(t.predicate()).is_some() || nested(t.subject()) || nested(t.object())
}

/// Customer priority by customer id.
pub fn priorities(snapshot: &Snapshot) -> BTreeMap<String, i64> {
    snapshot
        .partners
        .iter()
        .filter(|p| p.tier == Tier::Customer)
        .map(|p| (p.id.clone(), p.priority.unwrap_or(i64::MAX)))
        .collect()
}
