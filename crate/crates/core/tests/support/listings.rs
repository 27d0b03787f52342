//! Hand-enumerated results of the eight query fixtures on the ten-plan store.

use scdm_core::ontology::canonicalize;
use scdm_core::queries;
use scdm_core::vocab::{iri, local_of, node, NS};
use scdm_kg::query::{evaluate_select_with, execute_insert, Binding, Solutions, Var};
use scdm_kg::{parse_turtle_star, Date, Graph, Term, Triple};

pub const FIXTURE: &str = include_str!("../fixtures/ten_plans.ttl");

/// The fixture spells some predicates by alias; stores are canonicalized on load.
pub fn fixture() -> Graph {
    canonicalize(&parse_turtle_star(FIXTURE).expect("fixture parses"))
}

fn day(d: &str) -> Term {
    Term::date(Date::parse(d).expect("valid date"))
}

fn seed(pairs: &[(&str, Term)]) -> Binding {
    pairs.iter().map(|(k, t)| (Var::new(k), t.clone())).collect()
}

fn select(g: &Graph, n: usize, b: &Binding) -> Result<Solutions, String> {
    let q = queries::parse(queries::LISTINGS[n - 1].1).map_err(|e| e.to_string())?;
    evaluate_select_with(g, &q, b).map_err(|e| e.to_string())
}

/// Sorted local names bound to `var`.
fn ids(s: &Solutions, var: &str) -> Vec<String> {
    let mut v: Vec<String> = s.values(var).filter_map(local_of).map(str::to_string).collect();
    v.sort();
    v
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

/// Plan id with its q, reduced and toRecover cells.
type ImpactRow = (String, Option<f64>, Option<f64>, Option<f64>);

fn marked_plans(g: &Graph) -> Vec<String> {
    let mut v: Vec<String> = g
        .subjects(&iri("isDisrupted"), &Term::string("True"))
        .iter()
        .filter_map(local_of)
        .map(str::to_string)
        .collect();
    v.sort();
    v
}

fn run_identify(g: &mut Graph) -> Result<usize, String> {
    let q = queries::parse(queries::LISTING1_IDENTIFY).map_err(|e| e.to_string())?;
    Ok(execute_insert(g, &q).map_err(|e| e.to_string())?.inserted)
}

const HIT: [&str; 4] = ["Plan01", "Plan02", "Plan06", "Plan09"];

pub fn check(n: usize) -> Result<(), String> {
    let mut g = fixture();
    match n {
        1 => {
            expect("inserted", run_identify(&mut g)?, 9)?;
            expect("marked plans", marked_plans(&g), HIT.map(String::from).to_vec())?;
            for p in HIT {
                let q = Term::quoted(Triple::new(node(p), iri("needsPartner"), node("OEM")).unwrap());
                let t = Triple::new(q, iri("isDisrupted"), Term::string("True")).unwrap();
                expect(&format!("allocation mark on {p}"), g.contains(&t), true)?;
            }
            let partners: Vec<Term> = g.objects(&node("D"), &iri("affectsPartner")).collect();
            expect("affected partners", partners, vec![node("OEM")])?;
            expect("second run", run_identify(&mut g)?, 0)
        }
        2 => {
            run_identify(&mut g)?;
            let s = select(&g, 2, &Binding::new())?;
            expect("partners", ids(&s, "partner"), vec!["OEM".to_string(); 4])?;
            let num = |row: usize, v: &str| s.get(row, v).and_then(Term::as_f64);
            let mut rows: Vec<ImpactRow> = (0..s.len())
                .map(|r| {
                    let plan = s.get(r, "plan").and_then(local_of).unwrap_or_default().to_string();
                    (plan, num(r, "q"), num(r, "reduced"), num(r, "toRecover"))
                })
                .collect();
            rows.sort_by(|a, b| a.0.cmp(&b.0));
            let want = [(10.0, 5.0), (20.0, 10.0), (5.0, 2.5), (14.0, 7.0)];
            let want: Vec<_> = HIT
                .iter()
                .zip(want)
                .map(|(p, (q, r))| (p.to_string(), Some(q), Some(r), Some(q - r)))
                .collect();
            expect("impact rows", rows, want)
        }
        3 => {
            let cases = [
                ("F1", "2021-01-05", 5.0, vec!["OEM_stock1"]),
                ("F1", "2021-01-05", 20.0, vec![]),
                ("F1", "2021-01-07", 20.0, vec!["OEM_stock2"]),
                ("F1", "2021-01-07", 5.0, vec!["OEM_stock1", "OEM_stock2"]),
                ("F2", "2021-01-06", 1.0, vec!["OEM_stock3"]),
            ];
            for (p, t, q, want) in cases {
                let b = seed(&[("Partner", node("OEM")), ("P", node(p)), ("T", day(t)), ("Q", Term::double(q))]);
                let s = select(&g, 3, &b)?;
                expect(&format!("stock {p} {t} {q}"), ids(&s, "stock"), want.iter().map(|x| x.to_string()).collect())?;
            }
            Ok(())
        }
        4 => {
            let s = select(&g, 4, &seed(&[("Partner", node("S1"))]))?;
            expect("S1 modes", ids(&s, "mode"), vec!["S1_mode1".into(), "S1_mode2".into()])?;
            let mut costs: Vec<f64> = s.values("cost").filter_map(Term::as_f64).collect();
            costs.sort_by(f64::total_cmp);
            expect("S1 costs", costs, vec![30.0, 70.0])?;
            expect("OEM modes", select(&g, 4, &seed(&[("Partner", node("OEM"))]))?.len(), 1)?;
            expect("all modes", select(&g, 4, &Binding::new())?.len(), 4)
        }
        5 => {
            let cases = [
                (10.0, 5, vec!["OEM_F1_d07", "OEM_F1_d09"]),
                (1.0, 5, vec!["OEM_F1_d06", "OEM_F1_d07", "OEM_F1_d08", "OEM_F1_d09"]),
                (1.0, 2, vec!["OEM_F1_d06"]),
            ];
            for (q, max, want) in cases {
                let b = seed(&[
                    ("Partner", node("OEM")),
                    ("P", node("F1")),
                    ("T", day("2021-01-05")),
                    ("Q", Term::double(q)),
                    ("maxDelay", Term::integer(max)),
                ]);
                let s = select(&g, 5, &b)?;
                expect(&format!("capacity Q={q} max={max}"), ids(&s, "cap"), want.iter().map(|x| x.to_string()).collect())?;
            }
            Ok(())
        }
        6 => {
            let cases = [("S1", 8.0, vec!["S2"]), ("S1", 12.0, vec![]), ("S2", 8.0, vec!["S1"])];
            for (partner, q, want) in cases {
                let b = seed(&[
                    ("Partner", node(partner)),
                    ("P", node("P1")),
                    ("T", day("2021-01-06")),
                    ("Q", Term::double(q)),
                ]);
                let s = select(&g, 6, &b)?;
                expect(&format!("peers of {partner} Q={q}"), ids(&s, "supplier"), want.iter().map(|x| x.to_string()).collect())?;
            }
            Ok(())
        }
        7 => {
            let s = select(&g, 7, &Binding::new())?;
            expect("rows", s.len(), 1)?;
            expect("costIncrease", s.get(0, "costIncrease").and_then(Term::as_f64), Some(-12.0))
        }
        8 => {
            let s = select(&g, 8, &Binding::new())?;
            expect("rows", s.len(), 1)?;
            expect("lateorders", s.get(0, "lateorders").and_then(Term::as_i64), Some(1))?;
            expect("ontimeorders", s.get(0, "ontimeorders").and_then(Term::as_i64), Some(11))?;
            expect("delay", s.get(0, "delay").and_then(Term::as_i64), Some(0))
        }
        _ => Err(format!("no listing {n} (namespace {NS})")),
    }
}

/// Parse check plus expected results, one entry per listing.
pub fn check_all() -> Vec<(usize, Result<(), String>)> {
    (1..=8)
        .map(|n| {
            let parsed = queries::parse(queries::LISTINGS[n - 1].1).map(|_| ()).map_err(|e| e.to_string());
            (n, parsed.and_then(|_| check(n)))
        })
        .collect()
}
