//! Resilience metrics read back from the post-recovery graph.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use scdm_kg::query::{evaluate_select, Query, Solutions};
use scdm_kg::{Graph, Term};
use serde::{Deserialize, Serialize};

use crate::dmp::{RecoveryAction, Strategy};
use crate::error::{CoreError, Result};
use crate::ontology::Tier;
use crate::queries;
use crate::vocab::{self as v, iri, local_of, node};

fn parsed(slot: &'static OnceLock<Query>, text: &str) -> &'static Query {
    slot.get_or_init(|| queries::parse(text).expect("bundled query parses"))
}

macro_rules! bundled {
    ($name:ident, $text:expr) => {
        fn $name() -> &'static Query {
            static Q: OnceLock<Query> = OnceLock::new();
            parsed(&Q, $text)
        }
    };
}

bundled!(cost_query, queries::COST_BY_ORDER);
bundled!(speed_query, queries::SPEED_BY_CUSTOMER);
bundled!(disrupted_query, queries::DISRUPTED_BY_CUSTOMER);
bundled!(recovered_query, queries::RECOVERED_BY_CUSTOMER);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostIncrease {
    pub absolute: f64,
    pub percent: f64,
    /// Sum of original prices of the affected orders.
    pub base: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Speed {
    pub late_orders: i64,
    pub ontime_orders: i64,
    pub total_delay_days: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CustomerRow {
    pub customer: String,
    pub priority: i64,
    pub affected_plans: i64,
    pub non_recovered_plans: i64,
    pub cost_increase: f64,
    pub late_orders: i64,
    pub delay_days: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResilienceRow {
    pub id: String,
    pub duration_days: Option<i64>,
    pub severity_level: String,
    pub affected_plans: i64,
    pub non_recovered_plans: i64,
    pub cost_increase_absolute: f64,
    pub cost_increase_percent: f64,
    pub late_orders: i64,
    pub ontime_orders: i64,
    pub total_delay_days: i64,
    /// Mean delay over late orders.
    pub mean_delay_days: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub resilience: ResilienceRow,
    pub customers: Vec<CustomerRow>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResilienceReport {
    pub scenarios: Vec<ScenarioReport>,
}

fn run(graph: &Graph, q: &Query) -> Result<Solutions> {
    Ok(evaluate_select(graph, q)?)
}

fn customer_of(s: &Solutions, row: usize) -> Result<String> {
    s.get(row, "customer")
        .and_then(local_of)
        .map(str::to_string)
        .ok_or_else(|| CoreError::Validation(format!("metric row {row} has no customer")))
}

fn int(s: &Solutions, row: usize, var: &str) -> Result<i64> {
    s.get(row, var)
        .and_then(Term::as_i64)
        .ok_or_else(|| CoreError::Validation(format!("metric ?{var} is not an integer")))
}

fn float(s: &Solutions, row: usize, var: &str) -> Result<f64> {
    s.get(row, var)
        .and_then(Term::as_f64)
        .ok_or_else(|| CoreError::Validation(format!("metric ?{var} is not numeric")))
}

fn counts(graph: &Graph, q: &Query) -> Result<BTreeMap<String, i64>> {
    let s = run(graph, q)?;
    (0..s.len()).map(|r| Ok((customer_of(&s, r)?, int(&s, r, "plans")?))).collect()
}

/// Orders of disrupted plans that lack an original price.
fn check_original_prices(graph: &Graph) -> Result<()> {
    let marked = graph.subjects(&iri(v::IS_DISRUPTED), &Term::string(crate::ontology::TRUE_MARK));
    for plan in marked.iter().filter(|t| t.as_iri().is_some()) {
        for order in graph.subjects(&iri(v::HAS_SUPPLY_PLAN), plan) {
            if graph.object(&order, &iri(v::HAS_ORIGINAL_PRICE)).is_none() {
                let id = local_of(&order).unwrap_or("?").to_string();
                return Err(CoreError::Validation(format!("order {id} has no hasOriginalPrice")));
            }
        }
    }
    Ok(())
}

/// (absolute increase, original base) per customer over disrupted plans.
fn cost_by_customer(graph: &Graph) -> Result<BTreeMap<String, (f64, f64)>> {
    check_original_prices(graph)?;
    let s = run(graph, cost_query())?;
    let mut out: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for r in 0..s.len() {
        let original = float(&s, r, "originalPrice")?;
        let current = float(&s, r, "currentPrice")?;
        let e = out.entry(customer_of(&s, r)?).or_default();
        e.0 += current - original;
        e.1 += original;
    }
    Ok(out)
}

fn speed_by_customer(graph: &Graph) -> Result<BTreeMap<String, Speed>> {
    let s = run(graph, speed_query())?;
    (0..s.len())
        .map(|r| {
            Ok((
                customer_of(&s, r)?,
                Speed {
                    late_orders: int(&s, r, "late")?,
                    ontime_orders: int(&s, r, "ontime")?,
                    total_delay_days: int(&s, r, "delay")?,
                },
            ))
        })
        .collect()
}

fn percent(absolute: f64, base: f64) -> f64 {
    if base > 0.0 {
        100.0 * absolute / base
    } else {
        0.0
    }
}

pub fn cost_increase(graph: &Graph) -> Result<CostIncrease> {
    let (absolute, base) = cost_by_customer(graph)?
        .values()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    Ok(CostIncrease {
        absolute,
        percent: percent(absolute, base),
        base,
    })
}

/// Partition over fully recovered plans only.
pub fn recovery_speed(graph: &Graph) -> Result<Speed> {
    Ok(speed_by_customer(graph)?.values().fold(Speed::default(), |a, s| Speed {
        late_orders: a.late_orders + s.late_orders,
        ontime_orders: a.ontime_orders + s.ontime_orders,
        total_delay_days: a.total_delay_days + s.total_delay_days,
    }))
}

/// Disrupted plans without a recovery mark.
pub fn unsuccessful(graph: &Graph) -> Result<i64> {
    let d: i64 = counts(graph, disrupted_query())?.values().sum();
    let r: i64 = counts(graph, recovered_query())?.values().sum();
    Ok(d - r)
}

/// One row per customer, sorted by priority then id.
pub fn customer_impact(graph: &Graph) -> Result<Vec<CustomerRow>> {
    let disrupted = counts(graph, disrupted_query())?;
    let recovered = counts(graph, recovered_query())?;
    let cost = cost_by_customer(graph)?;
    let speed = speed_by_customer(graph)?;
    let mut rows = Vec::new();
    for c in graph.subjects(&iri(v::HAS_TIER), &Term::string(Tier::Customer.as_str())) {
        let Some(id) = local_of(&c).map(str::to_string) else {
            continue;
        };
        let priority = graph
            .object(&c, &iri(v::HAS_PRIORITY))
            .and_then(|t| t.as_i64())
            .unwrap_or(i64::MAX);
        let d = disrupted.get(&id).copied().unwrap_or(0);
        let s = speed.get(&id).copied().unwrap_or_default();
        rows.push(CustomerRow {
            priority,
            affected_plans: d,
            non_recovered_plans: d - recovered.get(&id).copied().unwrap_or(0),
            cost_increase: cost.get(&id).map_or(0.0, |c| c.0),
            late_orders: s.late_orders,
            delay_days: s.total_delay_days,
            customer: id,
        });
    }
    rows.sort_by(|a, b| (a.priority, &a.customer).cmp(&(b.priority, &b.customer)));
    Ok(rows)
}

/// Metrics of one scenario graph, labelled with the disruption's facts.
pub fn evaluate(graph: &Graph, disruption: &str) -> Result<ScenarioReport> {
    let d = node(disruption);
    let cost = cost_increase(graph)?;
    let speed = recovery_speed(graph)?;
    let affected: i64 = counts(graph, disrupted_query())?.values().sum();
    let non_recovered = unsuccessful(graph)?;
    let resilience = ResilienceRow {
        id: disruption.to_string(),
        duration_days: graph.object(&d, &iri(v::HAS_DURATION)).and_then(|t| t.as_i64()),
        severity_level: graph
            .object(&d, &iri(v::HAS_SEVERITY))
            .and_then(|t| t.as_str().map(str::to_string))
            .unwrap_or_default(),
        affected_plans: affected,
        non_recovered_plans: non_recovered,
        cost_increase_absolute: cost.absolute,
        cost_increase_percent: cost.percent,
        late_orders: speed.late_orders,
        ontime_orders: speed.ontime_orders,
        total_delay_days: speed.total_delay_days,
        mean_delay_days: if speed.late_orders > 0 {
            speed.total_delay_days as f64 / speed.late_orders as f64
        } else {
            0.0
        },
    };
    Ok(ScenarioReport {
        resilience,
        customers: customer_impact(graph)?,
    })
}

/// Totals implied by an action log: (cost increase, late orders, delay days).
pub fn ledger_totals(actions: &[RecoveryAction]) -> (f64, i64, i64) {
    let cost = actions.iter().map(|a| a.quantity * (a.unit_price - a.original_unit_price)).sum();
    let mut worst: BTreeMap<&str, i64> = BTreeMap::new();
    for a in actions.iter().filter(|a| a.strategy == Strategy::DelayedRecovery) {
        let e = worst.entry(&a.plan).or_insert(0);
        *e = (*e).max(a.delay_days);
    }
    let late = worst.values().filter(|d| **d > 0).count() as i64;
    (cost, late, worst.values().sum())
}

fn f2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

const RESILIENCE_COLUMNS: &str = "disruption,duration_days,severity,affected_plans,non_recovered_plans,cost_increase,cost_increase_percent,late_orders,ontime_orders,total_delay_days";
const CUSTOMER_COLUMNS: &str = "disruption,customer,priority,affected_plans,non_recovered_plans,cost_increase,late_orders,delay_days";

fn resilience_cells(r: &ResilienceRow) -> Vec<String> {
    vec![
        r.id.clone(),
        r.duration_days.map(|d| d.to_string()).unwrap_or_default(),
        r.severity_level.clone(),
        r.affected_plans.to_string(),
        r.non_recovered_plans.to_string(),
        f2(r.cost_increase_absolute),
        f2(r.cost_increase_percent),
        r.late_orders.to_string(),
        r.ontime_orders.to_string(),
        r.total_delay_days.to_string(),
    ]
}

fn customer_cells(d: &str, c: &CustomerRow) -> Vec<String> {
    vec![
        d.to_string(),
        c.customer.clone(),
        c.priority.to_string(),
        c.affected_plans.to_string(),
        c.non_recovered_plans.to_string(),
        f2(c.cost_increase),
        c.late_orders.to_string(),
        c.delay_days.to_string(),
    ]
}

impl ResilienceReport {
    pub fn resilience_csv(&self) -> String {
        let mut out = format!("{RESILIENCE_COLUMNS}\n");
        for s in &self.scenarios {
            out.push_str(&resilience_cells(&s.resilience).join(","));
            out.push('\n');
        }
        out
    }

    pub fn customers_csv(&self) -> String {
        let mut out = format!("{CUSTOMER_COLUMNS}\n");
        for s in &self.scenarios {
            for c in &s.customers {
                out.push_str(&customer_cells(&s.resilience.id, c).join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        fn table(out: &mut String, head: &str, rows: Vec<Vec<String>>) {
            let cols: Vec<&str> = head.split(',').collect();
            let _ = writeln!(out, "| {} |", cols.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(cols.len()));
            for r in rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
        }
        let mut out = String::from("## Resilience\n\n");
        table(
            &mut out,
            RESILIENCE_COLUMNS,
            self.scenarios.iter().map(|s| resilience_cells(&s.resilience)).collect(),
        );
        out.push_str("\n## Customer impact\n\n");
        table(
            &mut out,
            CUSTOMER_COLUMNS,
            self.scenarios
                .iter()
                .flat_map(|s| s.customers.iter().map(|c| customer_cells(&s.resilience.id, c)))
                .collect(),
        );
        out
    }
}
