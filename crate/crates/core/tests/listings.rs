mod support;

use scdm_core::dmp::{assess, orchestrate, Policy, Strategy};
use scdm_core::metrics::{cost_increase, customer_impact, recovery_speed, unsuccessful};
use scdm_core::ontology::canonicalize;
use scdm_core::queries;
use scdm_core::vocab::{iri, node};
use scdm_kg::query::execute_insert;
use scdm_kg::parse_turtle_star;
use support::listings::{check, fixture};

#[test]
fn listing1_marks_disrupted_allocations() {
    check(1).unwrap();
}

#[test]
fn listing2_computes_reduced_and_remaining_quantity() {
    check(2).unwrap();
}

#[test]
fn listing3_finds_sufficient_earlier_stock() {
    check(3).unwrap();
}

#[test]
fn listing4_lists_transport_modes() {
    check(4).unwrap();
}

#[test]
fn listing5_finds_later_capacity_within_window() {
    check(5).unwrap();
}

#[test]
fn listing6_finds_same_group_suppliers() {
    check(6).unwrap();
}

#[test]
fn listing7_sums_cost_increase() {
    check(7).unwrap();
}

#[test]
fn listing8_counts_late_and_ontime_allocations() {
    check(8).unwrap();
}

#[test]
fn single_allocation_in_region_yields_three_triples() {
    let ttl = r#"
@prefix : <http://mare.example/sc#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
:A :hasLongitude 1.0 ; :hasLatitude 1.0 .
<< :Plan :needsPartner :A >> :hasTimeStamp "2021-01-02"^^xsd:date .
:D :hasMinLongitude 0.0 ; :hasMaxLongitude 2.0 ; :hasMinLatitude 0.0 ; :hasMaxLatitude 2.0 ;
   :hasStartTime "2021-01-01"^^xsd:date ; :hasEndTime "2021-01-03"^^xsd:date .
"#;
    let mut g = canonicalize(&parse_turtle_star(ttl).unwrap());
    let q = queries::parse(queries::LISTING1_IDENTIFY).unwrap();
    assert_eq!(execute_insert(&mut g, &q).unwrap().inserted, 3);
}

#[test]
fn full_pipeline_on_ten_plans() {
    let mut g = fixture();
    let report = assess(&mut g, "D").unwrap();
    assert_eq!(report.affected_plans, ["Plan01", "Plan02", "Plan06", "Plan09"]);
    assert_eq!(g.object(&node("D"), &iri("affectsPlan")).and_then(|t| t.as_i64()), Some(4));

    let out = orchestrate(&mut g, "D", &Policy::default()).unwrap();
    assert_eq!(out.recovered, ["Plan01", "Plan02", "Plan09", "Plan06"]);
    assert!(out.unrecovered.is_empty());
    let steps: Vec<(Strategy, &str, &str, f64)> = out
        .actions
        .iter()
        .map(|a| (a.strategy, a.plan.as_str(), a.provider.as_str(), a.quantity))
        .collect();
    assert_eq!(
        steps,
        [
            (Strategy::StrategicStock, "Plan01", "OEM", 5.0),
            (Strategy::StrategicStock, "Plan02", "OEM", 10.0),
            (Strategy::StrategicStock, "Plan09", "OEM", 3.0),
            (Strategy::DelayedRecovery, "Plan09", "OEM", 4.0),
            (Strategy::StrategicStock, "Plan06", "OEM", 2.5),
        ]
    );
    let label = |p: &str| g.object(&node(p), &iri("isRecoveredBy")).and_then(|t| t.as_str().map(String::from));
    assert_eq!(label("Plan09").as_deref(), Some("S1,S3"));
    assert_eq!(label("Plan01").as_deref(), Some("S1"));

    let qty = |s: &str| g.object(&node(s), &iri("hasQuantity")).and_then(|t| t.as_f64());
    assert_eq!(qty("OEM_stock1"), Some(0.0));
    assert_eq!(qty("OEM_stock2"), Some(40.0));
    assert_eq!(qty("OEM_stock3"), Some(0.5));
    assert_eq!(qty("OEM_F1_d06"), Some(99.0));

    let cost = cost_increase(&g).unwrap();
    assert!((cost.absolute - 121.0).abs() < 1e-9, "{cost:?}");
    assert!((cost.base - 1191.0).abs() < 1e-9);
    let speed = recovery_speed(&g).unwrap();
    assert_eq!((speed.late_orders, speed.ontime_orders, speed.total_delay_days), (1, 3, 1));
    assert_eq!(unsuccessful(&g).unwrap(), 0);

    let rows = customer_impact(&g).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].customer.as_str(), rows[0].affected_plans, rows[0].late_orders), ("C1", 2, 0));
    assert!((rows[0].cost_increase - 80.0).abs() < 1e-9);
    assert_eq!((rows[1].customer.as_str(), rows[1].affected_plans, rows[1].late_orders, rows[1].delay_days), ("C2", 2, 1, 1));
    assert!((rows[1].cost_increase - 41.0).abs() < 1e-9);
}
