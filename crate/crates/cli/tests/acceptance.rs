//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any criterion fails.

mod support;

#[path = "../../kg/tests/support/gen.rs"]
mod gen;
#[path = "../../core/tests/support/listings.rs"]
mod listings;
#[path = "../../kg/tests/support/oracle.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scdm_core::dmp::{AssessmentReport, RecoveryOutcome, Strategy};
use scdm_core::generator::{build_disruption_fixtures, GenConfig};
use scdm_core::metrics::ResilienceReport;
use scdm_core::ontology::{emit_views, load_views, Tier};
use scdm_core::scenario::{build_snapshot, ScenarioConfig, SCARCITY};
use scdm_core::vocab::prefixes;
use scdm_kg::query::{evaluate_select_with, parse_query, Binding};
use scdm_kg::{parse_turtle_star, serialize_turtle_star};
use support::{code, hash_dir, s, scdm};

type Outcome = Result<String, String>;

/// Query engine and oracle agree on every table; 30 s budget.
const QUERY_BUDGET: Duration = Duration::from_secs(30);
/// All eight reference scenarios; 60 s budget.
const RUN_BUDGET: Duration = Duration::from_secs(60);
/// Absolute tolerance between the recovered sum and q(1 - factor) computed as a product.
const PRODUCT_FORM_TOLERANCE: f64 = 1e-9;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn query_oracle() -> Outcome {
    let start = Instant::now();
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = gen::random_graph(&mut rng, 2000);
        let text = gen::random_query(&mut rng);
        let q = parse_query(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        let got = evaluate_select_with(&graph, &q, &Binding::new()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(got == oracle::select(&graph, &q, &Binding::new()), || format!("seed {seed} differs:\n{text}"))?;
    }
    let t = start.elapsed();
    ensure(t < QUERY_BUDGET, || format!("took {t:?}"))?;
    Ok(format!("200 queries identical in {:.2}s", t.as_secs_f64()))
}

fn run_shape(out: &Path) -> Outcome {
    let start = Instant::now();
    let o = scdm(&["run", "--out", s(out)]);
    let t = start.elapsed();
    ensure(code(&o) == 0, || String::from_utf8_lossy(&o.stderr).into_owned())?;
    ensure(t < RUN_BUDGET, || format!("took {t:?}"))?;
    let (snap, issues) = load_views(&parse_turtle_star(&read(&out.join("store.ttl"))?).map_err(|e| e.to_string())?);
    ensure(issues.issues.is_empty(), || format!("{:?}", issues.issues))?;
    let tiers = |t: Tier| snap.partners.iter().filter(|p| p.tier == t).count();
    let shape = (snap.orders.len(), tiers(Tier::Supplier), tiers(Tier::Oem), tiers(Tier::Customer));
    ensure(shape == (400, 4, 1, 4), || format!("orders/suppliers/oems/customers = {shape:?}"))?;
    let manifest: serde_json::Value = json(&out.join("manifest.json"))?;
    ensure(manifest["horizon_days"] == 178, || format!("horizon {}", manifest["horizon_days"]))?;
    let start_day = scdm_kg::Date::parse("2021-01-01").unwrap();
    let last = snap.orders.iter().map(|o| o.delivery.days() - start_day.days()).max().unwrap_or(0);
    ensure(last <= 178, || format!("delivery on day {last}"))?;
    let report: ResilienceReport = json(&out.join("report.json"))?;
    ensure(report.scenarios.len() == 8, || format!("{} scenarios", report.scenarios.len()))?;
    Ok(format!("400 orders, 178 days, 4+1+4 partners, 8 scenarios in {:.2}s", t.as_secs_f64()))
}

fn orderings(out: &Path) -> Outcome {
    let report: ResilienceReport = json(&out.join("report.json"))?;
    let m: BTreeMap<&str, (f64, i64)> = report
        .scenarios
        .iter()
        .map(|s| (s.resilience.id.as_str(), (s.resilience.cost_increase_absolute, s.resilience.total_delay_days)))
        .collect();
    let get = |id: &str| m.get(id).copied().ok_or_else(|| format!("missing {id}"));
    let (d1, d2, d3, d4) = (get("Disr1")?, get("Disr2")?, get("Disr3")?, get("Disr4")?);
    let (d5, d6, d7, d8) = (get("Disr5")?, get("Disr6")?, get("Disr7")?, get("Disr8")?);
    for (name, x) in [("Disr1", d1), ("Disr3", d3)] {
        ensure(d2.0 < x.0 && d2.1 < x.1, || format!("(a) Disr2 {d2:?} vs {name} {x:?}"))?;
    }
    for (name, x) in [("Disr1", d1), ("Disr2", d2), ("Disr3", d3)] {
        ensure(d4.0 > x.0 && d4.1 > x.1, || format!("(b) Disr4 {d4:?} vs {name} {x:?}"))?;
    }
    for (name, x) in [("Disr5", d5), ("Disr6", d6)] {
        let actions: RecoveryOutcome = json(&out.join("scenarios").join(name).join("actions.json"))?;
        let delayed = actions.actions.iter().filter(|a| a.strategy == Strategy::DelayedRecovery).count();
        ensure(x.0 > 0.0 && x.1 == 0 && delayed == 0, || format!("(c) {name} {x:?}, {delayed} delayed actions"))?;
    }
    ensure(d8.1 >= d7.1 && d8.0 >= d7.0, || format!("(d) Disr8 {d8:?} vs Disr7 {d7:?}"))?;
    Ok(format!(
        "cost/delay D1 {d1:?} D2 {d2:?} D3 {d3:?} D4 {d4:?} D5 {d5:?} D6 {d6:?} D7 {d7:?} D8 {d8:?}"
    ))
}

fn priority_skew(dir: &Path) -> Outcome {
    let cfg = dir.join("scarcity.toml");
    fs::write(&cfg, SCARCITY).map_err(|e| e.to_string())?;
    let out = dir.join("scarcity");
    let o = scdm(&["run", "--config", s(&cfg), "--out", s(&out)]);
    ensure(code(&o) == 0, || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let report: ResilienceReport = json(&out.join("report.json"))?;
    ensure(!report.scenarios.is_empty(), || "no scenario".into())?;
    let mut lines = Vec::new();
    for sc in &report.scenarios {
        let c = &sc.customers;
        let ids: Vec<&str> = c.iter().map(|r| r.customer.as_str()).collect();
        ensure(ids == ["C1", "C2", "C3", "C4"], || format!("customers {ids:?}"))?;
        let nonrec: Vec<i64> = c.iter().map(|r| r.non_recovered_plans).collect();
        ensure(nonrec.windows(2).all(|w| w[0] <= w[1]), || format!("{} non-recovered {nonrec:?}", sc.resilience.id))?;
        ensure(c[3].delay_days >= c[0].delay_days, || {
            format!("{} delay C1 {} > C4 {}", sc.resilience.id, c[0].delay_days, c[3].delay_days)
        })?;
        lines.push(format!("{} non-recovered {nonrec:?}, delay C1 {} C4 {}", sc.resilience.id, c[0].delay_days, c[3].delay_days));
    }
    Ok(lines.join("; "))
}

fn conservation_in(out: &Path) -> Result<(usize, usize), String> {
    let report: ResilienceReport = json(&out.join("report.json"))?;
    let (mut slots, mut records) = (0, 0);
    for sc in &report.scenarios {
        let dir = out.join("scenarios").join(&sc.resilience.id);
        let assessment: AssessmentReport = json(&dir.join("assessment.json"))?;
        let outcome: RecoveryOutcome = json(&dir.join("actions.json"))?;
        let mut sums: BTreeMap<(&str, &str), f64> = BTreeMap::new();
        for a in &outcome.actions {
            *sums.entry((&a.plan, &a.disrupted_partner)).or_default() += a.quantity;
        }
        for a in assessment.allocations.iter().filter(|a| outcome.recovered.contains(&a.plan)) {
            let got = sums.get(&(a.plan.as_str(), a.partner.as_str())).copied().unwrap_or(0.0);
            let lost = a.quantity - a.quantity * a.factor;
            ensure(got == lost && a.to_recover == lost, || {
                format!("{} {} {}: recovered {got}, lost {lost}", sc.resilience.id, a.plan, a.partner)
            })?;
            let product_form = a.quantity * (1.0 - a.factor);
            ensure((got - product_form).abs() <= PRODUCT_FORM_TOLERANCE, || {
                format!("{} {}: {got} vs {product_form}", sc.resilience.id, a.plan)
            })?;
            slots += 1;
        }
        let store = parse_turtle_star(&read(&dir.join("store.ttl"))?).map_err(|e| e.to_string())?;
        let (snap, _) = load_views(&store);
        for p in &snap.partners {
            for st in &p.stock {
                ensure(st.quantity >= 0.0, || format!("{} stock {} = {}", sc.resilience.id, st.id, st.quantity))?;
                records += 1;
            }
            let sat = p.saturation.unwrap_or(f64::INFINITY);
            for c in &p.capacities {
                ensure(c.load >= 0.0 && c.load <= sat, || format!("{} capacity {} load {} of {sat}", sc.resilience.id, c.id, c.load))?;
                records += 1;
            }
        }
    }
    Ok((slots, records))
}

fn conservation(reference: &Path, scarcity: &Path) -> Outcome {
    let (a, b) = conservation_in(reference)?;
    let (c, d) = conservation_in(scarcity)?;
    Ok(format!("{} recovered slots exact, {} stock/capacity records within bounds", a + c, b + d))
}

fn determinism(dir: &Path) -> Outcome {
    let mut hashes = Vec::new();
    for n in ["1", "4", "1"] {
        let out = dir.join(format!("det{}", hashes.len()));
        let o = scdm(&["run", "--out", s(&out), "--parallel", n]);
        ensure(code(&o) == 0, || String::from_utf8_lossy(&o.stderr).into_owned())?;
        hashes.push(hash_dir(&out));
    }
    ensure(hashes.windows(2).all(|w| w[0] == w[1]), || format!("{hashes:?}"))?;
    Ok(format!("sha256 {} for --parallel 1, 4, 1", &hashes[0][..16]))
}

fn config(i: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        generator: GenConfig {
            seed: 1000 + i,
            num_orders: 5 + 4 * (i % 40) as usize,
            num_suppliers: if i.is_multiple_of(5) { 2 } else { 4 },
            num_customers: 1 + (i % 4) as usize,
            horizon_days: 46 + (i % 60) as i64,
            ..GenConfig::default()
        },
        ..ScenarioConfig::default()
    };
    if cfg.generator.num_suppliers == 4 {
        cfg.disruptions = build_disruption_fixtures(cfg.generator.horizon_days).unwrap();
    }
    cfg
}

fn round_trip() -> Outcome {
    let p = prefixes();
    for i in 0..100 {
        let g = emit_views(&build_snapshot(&config(i)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let text = serialize_turtle_star(&g, &p);
        let back = parse_turtle_star(&text).map_err(|e| format!("store {i}: {e}"))?;
        ensure(back == g && serialize_turtle_star(&back, &p) == text, || format!("store {i} changed"))?;
    }
    for i in 0..50 {
        let snap = build_snapshot(&config(i)).map_err(|e| e.to_string())?;
        let (back, report) = load_views(&emit_views(&snap).map_err(|e| e.to_string())?);
        ensure(report.issues.is_empty() && back == snap, || format!("snapshot {i} changed: {:?}", report.issues))?;
    }
    Ok("100 stores fixpoint, 50 snapshots identical".into())
}

fn listing_fidelity() -> Outcome {
    let mut failed = Vec::new();
    for (n, r) in listings::check_all() {
        if let Err(e) = r {
            failed.push(format!("listing {n}: {e}"));
        }
    }
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok("8 listings parse and match the ten-plan expectations".into())
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let reference = tmp.path().join("reference");
    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "query oracle", query_oracle()),
        (2, "run shape", run_shape(&reference)),
        (3, "qualitative orderings", orderings(&reference)),
        (4, "priority skew", priority_skew(tmp.path())),
        (5, "conservation", conservation(&reference, &tmp.path().join("scarcity"))),
        (6, "determinism", determinism(tmp.path())),
        (7, "round-trip", round_trip()),
        (8, "listing fidelity", listing_fidelity()),
    ];
    let mut failures = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {n} ({name}): {why}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
