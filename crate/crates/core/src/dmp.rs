//! Impact assessment and query-driven recovery.
//!
//! Every strategy reads through a listing query and writes through a [`Tx`],
//! so a plan that cannot be fully covered is rolled back to its assessed state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use scdm_kg::query::ast::{Projection, SelectQuery};
use scdm_kg::query::{evaluate_select_with, execute_insert_with, Binding, Query, Solutions, Var};
use scdm_kg::{Date, Graph, Iri, Term, Triple, RDF_TYPE};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ontology::{allocation_term, Cause, SeverityTable, Tier, TRUE_MARK};
use crate::queries;
use crate::vocab::{self as v, iri, local_of, node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "S1", alias = "StrategicStock")]
    StrategicStock,
    #[serde(rename = "S2", alias = "AlternativeShipment")]
    AlternativeShipment,
    #[serde(rename = "S3", alias = "DelayedRecovery")]
    DelayedRecovery,
    #[serde(rename = "S4", alias = "AlternativeSupplier")]
    AlternativeSupplier,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::StrategicStock => "S1",
            Strategy::AlternativeShipment => "S2",
            Strategy::DelayedRecovery => "S3",
            Strategy::AlternativeSupplier => "S4",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Label stored on plans that needed nothing (factor 1).
pub const NOTHING_TO_RECOVER: &str = "none";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Policy {
    pub internal: Vec<Strategy>,
    pub external: Vec<Strategy>,
    pub max_delay_days: i64,
    /// Relative surcharge of alternative suppliers over their capacity price.
    pub markup: f64,
    pub allow_partial_combination: bool,
    pub severity_factors: SeverityTable,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            internal: vec![Strategy::StrategicStock, Strategy::AlternativeShipment, Strategy::DelayedRecovery],
            external: vec![Strategy::AlternativeSupplier],
            max_delay_days: 5,
            markup: 0.2,
            allow_partial_combination: true,
            severity_factors: SeverityTable::default(),
        }
    }
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        self.severity_factors.validate()?;
        if self.max_delay_days < 1 {
            return Err(CoreError::Config("max_delay_days must be at least 1".into()));
        }
        if !(self.markup >= 0.0 && self.markup.is_finite()) {
            return Err(CoreError::Config("markup must be non-negative".into()));
        }
        Ok(())
    }

    /// Mixed causes run the internal sequence, then the external one.
    pub fn sequence(&self, cause: Cause) -> Vec<Strategy> {
        let mut seq = match cause {
            Cause::Internal => self.internal.clone(),
            Cause::External => self.external.clone(),
            Cause::Mixed => self.internal.iter().chain(&self.external).copied().collect(),
        };
        let mut seen = BTreeSet::new();
        seq.retain(|s| seen.insert(*s));
        seq
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessedAllocation {
    pub plan: String,
    pub partner: String,
    pub product: String,
    pub timestamp: String,
    pub quantity: f64,
    pub factor: f64,
    pub reduced: f64,
    pub to_recover: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub disruption: String,
    pub affected_partners: Vec<String>,
    pub affected_plans: Vec<String>,
    pub allocations: Vec<AssessedAllocation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryAction {
    pub strategy: Strategy,
    pub plan: String,
    pub provider: String,
    pub disrupted_partner: String,
    pub product: String,
    pub quantity: f64,
    pub unit_price: f64,
    pub original_unit_price: f64,
    pub date: String,
    pub delay_days: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecoveryOutcome {
    pub disruption: String,
    pub actions: Vec<RecoveryAction>,
    /// Plan ids in processing order.
    pub recovered: Vec<String>,
    pub unrecovered: Vec<String>,
}

/// Graph writes with an undo journal.
pub struct Tx<'g> {
    graph: &'g mut Graph,
    journal: Vec<(Triple, bool)>,
}

impl<'g> Tx<'g> {
    pub fn new(graph: &'g mut Graph) -> Self {
        Tx {
            graph,
            journal: Vec::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn insert(&mut self, t: Triple) {
        if self.graph.insert(t.clone()) {
            self.journal.push((t, true));
        }
    }

    pub fn remove(&mut self, t: &Triple) {
        if self.graph.remove(t) {
            self.journal.push((t.clone(), false));
        }
    }

    pub fn set_object(&mut self, s: &Term, p: &Iri, o: Term) -> Result<()> {
        let old: Vec<Triple> = self.graph.lookup(Some(s), Some(p), None).collect();
        for t in &old {
            self.remove(t);
        }
        self.insert(Triple::new(s.clone(), p.clone(), o)?);
        Ok(())
    }

    /// Restores the graph to its state at `mark`.
    pub fn rollback_to(&mut self, mark: usize) {
        while self.journal.len() > mark {
            let (t, inserted) = self.journal.pop().expect("len > mark");
            if inserted {
                self.graph.remove(&t);
            } else {
                self.graph.insert(t);
            }
        }
    }

    pub fn mark(&self) -> usize {
        self.journal.len()
    }
}

fn listing(slot: &'static OnceLock<Query>, text: &str) -> &'static Query {
    slot.get_or_init(|| queries::parse(text).expect("bundled query parses"))
}

macro_rules! bundled {
    ($name:ident, $text:expr) => {
        fn $name() -> &'static Query {
            static Q: OnceLock<Query> = OnceLock::new();
            listing(&Q, $text)
        }
    };
}

bundled!(identify, queries::LISTING1_IDENTIFY);
bundled!(impact, queries::LISTING2_IMPACT);
bundled!(stock_query, queries::LISTING3_STOCK);
bundled!(shipment_query, queries::LISTING4_SHIPMENT);
bundled!(delayed_query, queries::LISTING5_DELAYED);
bundled!(supplier_query, queries::LISTING6_SUPPLIER);

/// The WHERE part of the identification listing as a SELECT.
fn identify_where() -> &'static Query {
    static Q: OnceLock<Query> = OnceLock::new();
    Q.get_or_init(|| match identify() {
        Query::InsertWhere(i) => Query::Select(SelectQuery {
            distinct: false,
            projection: Projection::All,
            pattern: i.pattern.clone(),
            group_by: Vec::new(),
        }),
        Query::Select(_) => unreachable!("listing 1 is an INSERT"),
    })
}

fn seed(pairs: &[(&str, Term)]) -> Binding {
    pairs.iter().map(|(k, t)| (Var::new(k), t.clone())).collect()
}

fn select(graph: &Graph, q: &Query, b: &Binding) -> Result<Solutions> {
    Ok(evaluate_select_with(graph, q, b)?)
}

fn id_of(t: &Term) -> Result<String> {
    local_of(t)
        .map(str::to_string)
        .ok_or_else(|| CoreError::Validation(format!("{t} is outside the vocabulary namespace")))
}

fn cell<'a>(s: &'a Solutions, row: usize, var: &str) -> Result<&'a Term> {
    s.get(row, var)
        .ok_or_else(|| CoreError::Validation(format!("query row {row} leaves ?{var} unbound")))
}

fn num(s: &Solutions, row: usize, var: &str) -> Result<f64> {
    cell(s, row, var)?
        .as_f64()
        .ok_or_else(|| CoreError::Validation(format!("?{var} is not numeric")))
}

fn date(s: &Solutions, row: usize, var: &str) -> Result<Date> {
    cell(s, row, var)?
        .as_date()
        .ok_or_else(|| CoreError::Validation(format!("?{var} is not a date")))
}

fn disruption_term(graph: &Graph, id: &str) -> Result<Term> {
    let d = node(id);
    let ty = Triple::new(d.clone(), Iri::new(RDF_TYPE), node(v::DISRUPTION))?;
    if graph.contains(&ty) {
        Ok(d)
    } else {
        Err(CoreError::NotFound(format!("disruption {id}")))
    }
}

/// Cause and scope as recorded on the disruption's cause node.
pub fn disruption_cause(graph: &Graph, id: &str) -> Result<(Cause, String)> {
    let d = disruption_term(graph, id)?;
    let c = graph
        .object(&d, &iri(v::HAS_CAUSE))
        .ok_or_else(|| CoreError::invalid(id, "cause", "missing"))?;
    let mut types: Vec<String> = graph
        .objects(&c, &iri(v::HAS_CAUSE_TYPE))
        .filter_map(|t| t.as_str().map(str::to_string))
        .collect();
    types.sort();
    let cause = match types.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["internal"] => Cause::Internal,
        ["external"] => Cause::External,
        ["external", "internal"] => Cause::Mixed,
        _ => return Err(CoreError::invalid(id, "cause", format!("unrecognised cause types {types:?}"))),
    };
    let scope = graph
        .object(&c, &iri(v::HAS_SCOPE))
        .and_then(|t| t.as_str().map(str::to_string))
        .ok_or_else(|| CoreError::invalid(id, "scope", "missing"))?;
    Ok((cause, scope))
}

/// Listing-2 rows for this disruption restricted to the allocations it hits.
fn impact_rows(graph: &Graph, d: &Term) -> Result<Vec<AssessedAllocation>> {
    let b = seed(&[("disruption", d.clone())]);
    let hit: BTreeSet<(String, String)> = {
        let s = select(graph, identify_where(), &b)?;
        (0..s.len())
            .map(|r| Ok((id_of(cell(&s, r, "plan")?)?, id_of(cell(&s, r, "partner")?)?)))
            .collect::<Result<_>>()?
    };
    let s = select(graph, impact(), &b)?;
    let mut out = Vec::new();
    for r in 0..s.len() {
        let plan = id_of(cell(&s, r, "plan")?)?;
        let partner = id_of(cell(&s, r, "partner")?)?;
        if !hit.contains(&(plan.clone(), partner.clone())) {
            continue;
        }
        out.push(AssessedAllocation {
            plan,
            partner,
            product: id_of(cell(&s, r, "product")?)?,
            timestamp: date(&s, r, "t")?.to_string(),
            quantity: num(&s, r, "q")?,
            factor: num(&s, r, "factor")?,
            reduced: num(&s, r, "reduced")?,
            to_recover: num(&s, r, "toRecover")?,
        });
    }
    out.sort_by(|a, b| (&a.plan, &a.partner).cmp(&(&b.plan, &b.partner)));
    out.dedup_by(|a, b| a.plan == b.plan && a.partner == b.partner);
    Ok(out)
}

/// Marks hit plans, records the plan count and per-plan quantity to recover.
pub fn assess(graph: &mut Graph, disruption: &str) -> Result<AssessmentReport> {
    let d = disruption_term(graph, disruption)?;
    execute_insert_with(graph, identify(), &seed(&[("disruption", d.clone())]))?;
    let allocations = impact_rows(graph, &d)?;
    let mut per_plan: BTreeMap<String, f64> = BTreeMap::new();
    for a in &allocations {
        *per_plan.entry(a.plan.clone()).or_insert(0.0) += a.to_recover;
    }
    for (plan, r) in &per_plan {
        graph.set_object(&node(plan), &iri(v::HAS_TO_RECOVER), Term::double(*r))?;
    }
    graph.set_object(&d, &iri(v::AFFECTS_PLAN), Term::integer(per_plan.len() as i64))?;
    let affected_partners: BTreeSet<String> = allocations.iter().map(|a| a.partner.clone()).collect();
    Ok(AssessmentReport {
        disruption: disruption.to_string(),
        affected_partners: affected_partners.into_iter().collect(),
        affected_plans: per_plan.into_keys().collect(),
        allocations,
    })
}

/// What one disrupted allocation still lacks.
#[derive(Debug, Clone)]
pub struct Need {
    pub plan: String,
    pub partner: String,
    pub product: String,
    pub time: Date,
    pub quantity: f64,
    pub original_unit_price: f64,
}

/// Scenario-wide inputs shared by all strategies.
pub struct Context<'a> {
    pub policy: &'a Policy,
    pub scope: String,
    /// Partners hit by the disruption; never used as alternatives.
    pub disrupted: BTreeSet<String>,
    pub stock_holders: Vec<String>,
}

struct Candidate {
    provider: String,
    record: Term,
    available: f64,
    price: f64,
    day: Date,
}

fn min_take(ctx: &Context, remaining: f64) -> f64 {
    if ctx.policy.allow_partial_combination {
        remaining.min(1.0)
    } else {
        remaining
    }
}

/// Whole units from a partial source; the last take is the exact remainder.
fn take_amount(available: f64, remaining: f64) -> f64 {
    if available >= remaining {
        remaining
    } else {
        available.floor()
    }
}

fn action(strategy: Strategy, need: &Need, provider: &str, quantity: f64, unit_price: f64, day: Date) -> RecoveryAction {
    RecoveryAction {
        strategy,
        plan: need.plan.clone(),
        provider: provider.to_string(),
        disrupted_partner: need.partner.clone(),
        product: need.product.clone(),
        quantity,
        unit_price,
        original_unit_price: need.original_unit_price,
        date: day.to_string(),
        delay_days: day.days() - need.time.days(),
    }
}

/// Draws from candidates in order, adjusting each record's quantity by `sign`.
fn consume(
    tx: &mut Tx,
    ctx: &Context,
    need: &Need,
    strategy: Strategy,
    candidates: Vec<Candidate>,
    sign: f64,
    markup: f64,
) -> Result<Vec<RecoveryAction>> {
    let mut remaining = need.quantity;
    let mut out = Vec::new();
    for c in candidates {
        if remaining <= 0.0 {
            break;
        }
        if c.available < min_take(ctx, remaining) {
            continue;
        }
        let take = take_amount(c.available, remaining);
        if take <= 0.0 {
            continue;
        }
        let qty_term = tx.graph().object(&c.record, &iri(v::HAS_QUANTITY));
        let current = qty_term.and_then(|t| t.as_f64()).unwrap_or(0.0);
        tx.set_object(&c.record, &iri(v::HAS_QUANTITY), Term::double(current + sign * take))?;
        out.push(action(strategy, need, &c.provider, take, c.price * (1.0 + markup), c.day));
        remaining -= take;
        if !ctx.policy.allow_partial_combination {
            break;
        }
    }
    Ok(out)
}

pub fn recover_strategic_stock(tx: &mut Tx, ctx: &Context, need: &Need) -> Result<Vec<RecoveryAction>> {
    let mut candidates = Vec::new();
    for holder in &ctx.stock_holders {
        let b = seed(&[
            ("Partner", node(holder)),
            ("P", node(&need.product)),
            ("T", Term::date(need.time)),
            ("Q", Term::double(min_take(ctx, need.quantity))),
        ]);
        let s = select(tx.graph(), stock_query(), &b)?;
        for r in 0..s.len() {
            candidates.push(Candidate {
                provider: holder.clone(),
                record: cell(&s, r, "stock")?.clone(),
                available: num(&s, r, "q")?,
                price: num(&s, r, "price")?,
                day: need.time,
            });
        }
    }
    candidates.sort_by(|a, b| {
        a.price
            .total_cmp(&b.price)
            .then(date_of(tx.graph(), &a.record).cmp(&date_of(tx.graph(), &b.record)))
            .then(a.record.cmp(&b.record))
    });
    consume(tx, ctx, need, Strategy::StrategicStock, candidates, -1.0, 0.0)
}

fn date_of(g: &Graph, record: &Term) -> Option<Date> {
    g.object(record, &iri(v::HAS_TIME_STAMP)).and_then(|t| t.as_date())
}

/// Switches the disrupted partner to its cheapest non-primary mode; flat cost per plan.
pub fn recover_alt_shipment(tx: &mut Tx, ctx: &Context, need: &Need) -> Result<Vec<RecoveryAction>> {
    if ctx.scope != "logistics" || need.quantity <= 0.0 {
        return Ok(Vec::new());
    }
    let s = select(tx.graph(), shipment_query(), &seed(&[("Partner", node(&need.partner))]))?;
    let mut modes = Vec::new();
    for r in 0..s.len() {
        modes.push((cell(&s, r, "mode")?.clone(), num(&s, r, "cost")?));
    }
    modes.sort_by(|a, b| a.0.cmp(&b.0));
    if modes.len() < 2 {
        return Ok(Vec::new());
    }
    let (_, cost) = modes[1..]
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("at least one alternative");
    let price = need.original_unit_price + cost / need.quantity;
    Ok(vec![action(Strategy::AlternativeShipment, need, &need.partner, need.quantity, price, need.time)])
}

pub fn recover_delayed(tx: &mut Tx, ctx: &Context, need: &Need) -> Result<Vec<RecoveryAction>> {
    let b = seed(&[
        ("Partner", node(&need.partner)),
        ("P", node(&need.product)),
        ("T", Term::date(need.time)),
        ("Q", Term::double(min_take(ctx, need.quantity))),
        ("maxDelay", Term::integer(ctx.policy.max_delay_days)),
    ]);
    let s = select(tx.graph(), delayed_query(), &b)?;
    let mut candidates = Vec::new();
    for r in 0..s.len() {
        candidates.push(Candidate {
            provider: need.partner.clone(),
            record: cell(&s, r, "cap")?.clone(),
            available: num(&s, r, "sat")? - num(&s, r, "q")?,
            price: num(&s, r, "price")?,
            day: date(&s, r, "t_future")?,
        });
    }
    candidates.sort_by(|a, b| a.day.cmp(&b.day).then(a.record.cmp(&b.record)));
    consume(tx, ctx, need, Strategy::DelayedRecovery, candidates, 1.0, 0.0)
}

pub fn recover_alt_supplier(tx: &mut Tx, ctx: &Context, need: &Need) -> Result<Vec<RecoveryAction>> {
    let b = seed(&[
        ("Partner", node(&need.partner)),
        ("P", node(&need.product)),
        ("T", Term::date(need.time)),
        ("Q", Term::double(min_take(ctx, need.quantity))),
    ]);
    let s = select(tx.graph(), supplier_query(), &b)?;
    let mut candidates = Vec::new();
    for r in 0..s.len() {
        let provider = id_of(cell(&s, r, "supplier")?)?;
        if ctx.disrupted.contains(&provider) {
            continue;
        }
        candidates.push(Candidate {
            provider,
            record: cell(&s, r, "cap")?.clone(),
            available: num(&s, r, "sat")? - num(&s, r, "q")?,
            price: num(&s, r, "price")?,
            day: need.time,
        });
    }
    candidates.sort_by(|a, b| a.price.total_cmp(&b.price).then(a.provider.cmp(&b.provider)));
    consume(tx, ctx, need, Strategy::AlternativeSupplier, candidates, 1.0, ctx.policy.markup)
}

fn run_strategy(s: Strategy, tx: &mut Tx, ctx: &Context, need: &Need) -> Result<Vec<RecoveryAction>> {
    match s {
        Strategy::StrategicStock => recover_strategic_stock(tx, ctx, need),
        Strategy::AlternativeShipment => recover_alt_shipment(tx, ctx, need),
        Strategy::DelayedRecovery => recover_delayed(tx, ctx, need),
        Strategy::AlternativeSupplier => recover_alt_supplier(tx, ctx, need),
    }
}

/// Rewrites the plan's allocations to reflect the actions for one disrupted slot.
fn apply_to_plan(tx: &mut Tx, alloc: &AssessedAllocation, p0: f64, actions: &[RecoveryAction]) -> Result<()> {
    let plan = &alloc.plan;
    let qp = iri(v::HAS_QUANTITY);
    let pp = iri(v::HAS_UNIT_PRICE);
    let tp = iri(v::HAS_TIME_STAMP);
    // (quantity, value, latest date) merged per partner slot
    let mut merged: BTreeMap<String, (f64, f64, Date)> = BTreeMap::new();
    let t0 = Date::parse(&alloc.timestamp).expect("assessed timestamp");
    merged.insert(alloc.partner.clone(), (alloc.reduced, alloc.reduced * p0, t0));
    for a in actions {
        let target = if a.strategy == Strategy::AlternativeSupplier {
            a.provider.clone()
        } else {
            alloc.partner.clone()
        };
        let day = Date::parse(&a.date).expect("action date");
        let e = merged.entry(target.clone()).or_insert_with(|| {
            let existing = allocation_term(plan, &target);
            let g = tx.graph();
            match (g.object(&existing, &qp).and_then(|t| t.as_f64()), g.object(&existing, &pp).and_then(|t| t.as_f64())) {
                (Some(q), Some(p)) => (q, q * p, date_of(g, &existing).unwrap_or(day)),
                _ => (0.0, 0.0, day),
            }
        });
        e.0 += a.quantity;
        e.1 += a.quantity * a.unit_price;
        e.2 = e.2.max(day);
    }
    for (partner, (q, value, when)) in merged {
        let term = allocation_term(plan, &partner);
        let price = if q > 0.0 { value / q } else { p0 };
        if partner != alloc.partner && tx.graph().object(&term, &qp).is_none() {
            tx.insert(Triple::new(node(plan), iri(v::NEEDS_PARTNER), node(&partner))?);
            tx.insert(Triple::new(term.clone(), iri(v::GETS_PRODUCT), node(&alloc.product))?);
        }
        tx.set_object(&term, &qp, Term::double(q))?;
        tx.set_object(&term, &pp, Term::double(price))?;
        tx.set_object(&term, &tp, Term::date(when))?;
    }
    Ok(())
}

struct PlanWork {
    key: (i64, Date, String),
    allocations: Vec<AssessedAllocation>,
}

fn plan_key(graph: &Graph, plan: &str) -> Result<(i64, Date, String)> {
    let orders = graph.subjects(&iri(v::HAS_SUPPLY_PLAN), &node(plan));
    let order = orders
        .first()
        .ok_or_else(|| CoreError::invalid(plan, "order", "no order owns this plan"))?;
    let delivery = graph
        .object(order, &iri(v::HAS_DELIVERY_TIME))
        .and_then(|t| t.as_date())
        .ok_or_else(|| CoreError::invalid(plan, "delivery", "order has no delivery date"))?;
    let priority = graph
        .subjects(&iri(v::MAKES), order)
        .first()
        .and_then(|c| graph.object(c, &iri(v::HAS_PRIORITY)))
        .and_then(|t| t.as_i64())
        .unwrap_or(i64::MAX);
    Ok((priority, delivery, plan.to_string()))
}

fn stock_holders(graph: &Graph) -> Vec<String> {
    let mut out: Vec<String> = graph
        .subjects(&iri(v::HAS_TIER), &Term::string(Tier::Oem.as_str()))
        .iter()
        .filter_map(|t| local_of(t).map(str::to_string))
        .collect();
    out.sort();
    out
}

/// Recovers every assessed, not yet recovered plan of the disruption.
pub fn orchestrate(graph: &mut Graph, disruption: &str, policy: &Policy) -> Result<RecoveryOutcome> {
    policy.validate()?;
    let d = disruption_term(graph, disruption)?;
    let (cause, scope) = disruption_cause(graph, disruption)?;
    let rows = impact_rows(graph, &d)?;
    let disrupted: BTreeSet<String> = graph
        .objects(&d, &iri(v::AFFECTS_PARTNER))
        .filter_map(|t| local_of(&t).map(str::to_string))
        .collect();
    let mut plans: BTreeMap<String, Vec<AssessedAllocation>> = BTreeMap::new();
    for r in rows {
        plans.entry(r.plan.clone()).or_default().push(r);
    }
    let mut work = Vec::new();
    for (plan, allocations) in plans {
        if graph.object(&node(&plan), &iri(v::IS_RECOVERED_BY)).is_some() {
            continue;
        }
        work.push(PlanWork {
            key: plan_key(graph, &plan)?,
            allocations,
        });
    }
    work.sort_by(|a, b| a.key.cmp(&b.key));

    let ctx = Context {
        policy,
        scope,
        disrupted,
        stock_holders: stock_holders(graph),
    };
    let sequence = policy.sequence(cause);
    let mut outcome = RecoveryOutcome {
        disruption: disruption.to_string(),
        ..Default::default()
    };
    let mut tx = Tx::new(graph);
    for w in work {
        let plan = w.key.2.clone();
        let mark = tx.mark();
        let mut plan_actions = Vec::new();
        let mut ok = true;
        for alloc in &w.allocations {
            let slot = allocation_term(&plan, &alloc.partner);
            let p0 = tx
                .graph()
                .object(&slot, &iri(v::HAS_UNIT_PRICE))
                .and_then(|t| t.as_f64())
                .ok_or_else(|| CoreError::invalid(&plan, "unit price", format!("missing for {}", alloc.partner)))?;
            let mut need = Need {
                plan: plan.clone(),
                partner: alloc.partner.clone(),
                product: alloc.product.clone(),
                time: Date::parse(&alloc.timestamp).expect("assessed timestamp"),
                quantity: alloc.to_recover,
                original_unit_price: p0,
            };
            let mut slot_actions = Vec::new();
            for s in &sequence {
                if need.quantity <= 0.0 {
                    break;
                }
                // Without partial combination every strategy covers all or nothing.
                for a in run_strategy(*s, &mut tx, &ctx, &need)? {
                    need.quantity -= a.quantity;
                    slot_actions.push(a);
                }
            }
            if need.quantity > 0.0 {
                ok = false;
                break;
            }
            apply_to_plan(&mut tx, alloc, p0, &slot_actions)?;
            plan_actions.extend(slot_actions);
        }
        if !ok {
            tx.rollback_to(mark);
            outcome.unrecovered.push(plan);
            continue;
        }
        let mut labels: Vec<&str> = Vec::new();
        for a in &plan_actions {
            if !labels.contains(&a.strategy.label()) {
                labels.push(a.strategy.label());
            }
        }
        let label = if labels.is_empty() {
            NOTHING_TO_RECOVER.to_string()
        } else {
            labels.join(",")
        };
        tx.insert(Triple::new(node(&plan), iri(v::IS_RECOVERED_BY), Term::string(label))?);
        outcome.recovered.push(plan);
        outcome.actions.extend(plan_actions);
    }
    Ok(outcome)
}

/// True when `plan` carries the disruption mark.
pub fn is_disrupted(graph: &Graph, plan: &str) -> bool {
    graph.objects(&node(plan), &iri(v::IS_DISRUPTED)).any(|t| t.as_str() == Some(TRUE_MARK))
}
