//! Seeded synthetic three-tier network: suppliers, one OEM, customers, orders.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scdm_kg::{Date, Graph};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ontology::{
    emit_views, Allocation, Capacity, Cause, Disruption, GeoPoint, GeoRect, Order, Partner,
    SeverityLevel, SeverityTable, Snapshot, Stock, SupplyPlan, Tier, TransportMode,
};

pub const OEM: &str = "OEM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub start_date: String,
    pub horizon_days: i64,
    pub num_orders: usize,
    pub num_suppliers: usize,
    pub num_customers: usize,
    pub quantity_min: i64,
    pub quantity_max: i64,
    /// Unit price range of supplier parts.
    pub part_price: [f64; 2],
    /// Unit price range of OEM final products.
    pub final_price: [f64; 2],
    pub supplier_saturation: f64,
    pub oem_saturation: f64,
    /// Relative surcharge on spare capacity prices.
    pub capacity_premium: f64,
    /// Relative surcharge on strategic stock prices.
    pub stock_premium: f64,
    /// Share of products (sorted by id) stocked at the OEM.
    pub stock_fraction: f64,
    pub stock_depth: f64,
    pub mode_cost: f64,
    /// Transport modes per partner id; absent partners have one.
    pub transport_modes: BTreeMap<String, usize>,
    /// Coordinate overrides per partner id.
    pub locations: BTreeMap<String, [f64; 2]>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 42,
            start_date: "2021-01-01".into(),
            horizon_days: 178,
            num_orders: 400,
            num_suppliers: 4,
            num_customers: 4,
            quantity_min: 10,
            quantity_max: 60,
            part_price: [8.0, 9.0],
            final_price: [20.0, 22.0],
            supplier_saturation: 200.0,
            oem_saturation: 400.0,
            capacity_premium: 0.1,
            stock_premium: 0.3,
            stock_fraction: 0.5,
            stock_depth: 30.0,
            mode_cost: 50.0,
            transport_modes: BTreeMap::new(),
            locations: BTreeMap::new(),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> CoreError {
    CoreError::Config(msg.into())
}

impl GenConfig {
    pub fn start(&self) -> Result<Date> {
        Date::parse(&self.start_date).ok_or_else(|| cfg_err(format!("bad start_date `{}`", self.start_date)))
    }

    pub fn validate(&self) -> Result<()> {
        self.start()?;
        if self.horizon_days < 1 {
            return Err(cfg_err("horizon_days must be at least 1"));
        }
        if self.num_suppliers < 2 || self.num_customers < 1 {
            return Err(cfg_err("need at least 2 suppliers and 1 customer"));
        }
        if self.quantity_min < 1 || self.quantity_max < self.quantity_min {
            return Err(cfg_err("quantity range must satisfy 1 <= min <= max"));
        }
        for (name, [lo, hi]) in [("part_price", self.part_price), ("final_price", self.final_price)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(cfg_err(format!("{name} must be a positive range")));
            }
        }
        if !(self.supplier_saturation > 0.0 && self.oem_saturation > 0.0) {
            return Err(cfg_err("saturations must be positive"));
        }
        if self.capacity_premium < 0.0 || self.stock_premium < 0.0 || self.mode_cost < 0.0 {
            return Err(cfg_err("premiums and mode cost must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.stock_fraction) || self.stock_depth < 0.0 {
            return Err(cfg_err("stock_fraction must lie in [0, 1] and stock_depth be non-negative"));
        }
        if self.transport_modes.values().any(|&n| n == 0) {
            return Err(cfg_err("every partner needs at least one transport mode"));
        }
        Ok(())
    }

    pub fn supplier_ids(&self) -> Vec<String> {
        (1..=self.num_suppliers).map(|i| format!("S{i}")).collect()
    }

    pub fn customer_ids(&self) -> Vec<String> {
        (1..=self.num_customers).map(|i| format!("C{i}")).collect()
    }

    /// Supplier index to group index; the first half forms group 0.
    fn group_of(&self, supplier: usize) -> usize {
        supplier * 2 / self.num_suppliers
    }

    /// Default grid: suppliers at lon 0, OEM at lon 4, customers at lon 8, 2 degrees apart.
    pub fn location(&self, id: &str) -> GeoPoint {
        if let Some([lon, lat]) = self.locations.get(id) {
            return GeoPoint { lon: *lon, lat: *lat };
        }
        let idx = |p: &str| id.strip_prefix(p).and_then(|n| n.parse::<f64>().ok()).map(|n| 2.0 * (n - 1.0));
        if id == OEM {
            GeoPoint { lon: 4.0, lat: (self.num_suppliers as f64 - 1.0) }
        } else if let Some(lat) = idx("S") {
            GeoPoint { lon: 0.0, lat }
        } else if let Some(lat) = idx("C") {
            GeoPoint { lon: 8.0, lat }
        } else {
            GeoPoint { lon: 0.0, lat: 0.0 }
        }
    }
}

pub fn part_product(group: usize) -> String {
    format!("P{}", group + 1)
}

pub fn final_product(group: usize) -> String {
    format!("F{}", group + 1)
}

fn width(n: usize) -> usize {
    n.to_string().len().max(3)
}

pub fn capacity_id(partner: &str, product: &str, day: i64, horizon: i64) -> String {
    format!("{partner}_{product}_d{day:0w$}", w = width(horizon as usize))
}

struct Ledger {
    horizon: i64,
    /// (partner, product) -> load per day 0..=horizon
    load: BTreeMap<(String, String), Vec<f64>>,
}

impl Ledger {
    fn free(&self, partner: &str, product: &str, day: i64, sat: f64, q: f64) -> bool {
        self.load[&(partner.to_string(), product.to_string())][day as usize] + q <= sat
    }

    fn add(&mut self, partner: &str, product: &str, day: i64, q: f64) {
        self.load.get_mut(&(partner.to_string(), product.to_string())).expect("declared capacity")[day as usize] += q;
    }
}

fn draw(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    // Cents keep prices short in the store and sums of two terms exact enough.
    let v = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    (v * 100.0).round() / 100.0
}

/// Builds the network as typed records (no disruptions).
pub fn generate_snapshot(cfg: &GenConfig) -> Result<Snapshot> {
    cfg.validate()?;
    let start = cfg.start()?;
    let h = cfg.horizon_days;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let suppliers = cfg.supplier_ids();
    let customers = cfg.customer_ids();
    let groups = 2usize;
    let date = |d: i64| start.add_days(d).ok_or_else(|| cfg_err("date out of range"));

    let mut base_price: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (i, s) in suppliers.iter().enumerate() {
        base_price.insert((s.clone(), part_product(cfg.group_of(i))), draw(&mut rng, cfg.part_price));
    }
    for g in 0..groups {
        base_price.insert((OEM.to_string(), final_product(g)), draw(&mut rng, cfg.final_price));
    }
    let mut ledger = Ledger {
        horizon: h,
        load: base_price.keys().map(|k| (k.clone(), vec![0.0; h as usize + 1])).collect(),
    };

    let mut orders = Vec::with_capacity(cfg.num_orders);
    let ow = width(cfg.num_orders);
    for n in 1..=cfg.num_orders {
        let customer = &customers[rng.gen_range(0..customers.len())];
        let g = rng.gen_range(0..groups);
        let drawn = rng.gen_range(0..h);
        let q = rng.gen_range(cfg.quantity_min..=cfg.quantity_max);
        let qf = q as f64;
        let members: Vec<usize> = (0..suppliers.len()).filter(|&i| cfg.group_of(i) == g).collect();
        let first = members[rng.gen_range(0..members.len())];
        let part = part_product(g);
        let fin = final_product(g);
        let mut order_of_try = vec![first];
        order_of_try.extend(members.iter().copied().filter(|&m| m != first));
        // Saturated days push the order to the next day with room, wrapping once.
        let mut oem_blocked = false;
        let mut placed = None;
        for shift in 0..h {
            let day = (drawn + shift) % h;
            let Some(i) = order_of_try
                .iter()
                .copied()
                .find(|&i| ledger.free(&suppliers[i], &part, day, cfg.supplier_saturation, qf))
            else {
                continue;
            };
            if !ledger.free(OEM, &fin, day, cfg.oem_saturation, qf) {
                oem_blocked = true;
                continue;
            }
            placed = Some((i, day));
            break;
        }
        let Some((chosen, day)) = placed else {
            let what = if oem_blocked {
                format!("OEM capacity for {fin}")
            } else {
                format!("supplier group {} for {part}", g + 1)
            };
            return Err(CoreError::Infeasible(format!("{what} saturated on every day (order {n}, quantity {q})")));
        };
        let sup = &suppliers[chosen];
        ledger.add(sup, &part, day, qf);
        ledger.add(OEM, &fin, day, qf);
        let when = date(day)?;
        let sp = base_price[&(sup.clone(), part.clone())];
        let fp = base_price[&(OEM.to_string(), fin.clone())];
        let allocations = vec![
            Allocation {
                partner: OEM.into(),
                product: fin.clone(),
                timestamp: when,
                quantity: qf,
                unit_price: fp,
                disrupted: false,
            },
            Allocation {
                partner: sup.clone(),
                product: part,
                timestamp: when,
                quantity: qf,
                unit_price: sp,
                disrupted: false,
            },
        ];
        let original_price = allocations.iter().map(|a| a.quantity * a.unit_price).sum();
        orders.push(Order {
            id: format!("O{n:0ow$}"),
            customer: customer.clone(),
            product: fin,
            delivery: when,
            quantity: q,
            original_price,
            plan: SupplyPlan {
                id: format!("Plan{n:0ow$}"),
                allocations,
                is_disrupted: false,
                recovered_by: None,
                to_recover: None,
            },
        });
    }

    let modes = |id: &str| -> Vec<TransportMode> {
        let n = cfg.transport_modes.get(id).copied().unwrap_or(1);
        (1..=n)
            .map(|k| TransportMode {
                id: format!("{id}_mode{k}"),
                cost: cfg.mode_cost * k as f64,
            })
            .collect()
    };
    let capacities = |id: &str, ledger: &Ledger| -> Result<Vec<Capacity>> {
        let mut out = Vec::new();
        for ((p, product), loads) in &ledger.load {
            if p != id {
                continue;
            }
            let price = base_price[&(p.clone(), product.clone())] * (1.0 + cfg.capacity_premium);
            for (day, load) in loads.iter().enumerate() {
                let day = day as i64;
                out.push(Capacity {
                    id: capacity_id(id, product, day, ledger.horizon),
                    product: product.clone(),
                    date: date(day)?,
                    load: *load,
                    price,
                });
            }
        }
        Ok(out)
    };

    let mut partners = Vec::new();
    for (i, s) in suppliers.iter().enumerate() {
        partners.push(Partner {
            id: s.clone(),
            tier: Tier::Supplier,
            location: cfg.location(s),
            group: Some(format!("G{}", cfg.group_of(i) + 1)),
            priority: None,
            saturation: Some(cfg.supplier_saturation),
            capacities: capacities(s, &ledger)?,
            stock: Vec::new(),
            transport_modes: modes(s),
        });
    }

    // Products sorted by id; the first share is stocked at the OEM.
    let mut products: Vec<String> = (0..groups).flat_map(|g| [part_product(g), final_product(g)]).collect();
    products.sort();
    let stocked = (cfg.stock_fraction * products.len() as f64).ceil() as usize;
    let mut stock = Vec::new();
    for product in products.iter().take(stocked) {
        let base = base_price
            .iter()
            .filter(|((_, p), _)| p == product)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        stock.push(Stock {
            id: format!("{OEM}_stock_{product}"),
            product: product.clone(),
            date: start,
            quantity: cfg.stock_depth,
            price: base * (1.0 + cfg.stock_premium),
        });
    }
    partners.push(Partner {
        id: OEM.into(),
        tier: Tier::Oem,
        location: cfg.location(OEM),
        group: None,
        priority: None,
        saturation: Some(cfg.oem_saturation),
        capacities: capacities(OEM, &ledger)?,
        stock,
        transport_modes: modes(OEM),
    });
    for (i, c) in customers.iter().enumerate() {
        partners.push(Partner {
            id: c.clone(),
            tier: Tier::Customer,
            location: cfg.location(c),
            group: None,
            priority: Some(i as i64 + 1),
            saturation: None,
            capacities: Vec::new(),
            stock: Vec::new(),
            transport_modes: Vec::new(),
        });
    }

    let mut snap = Snapshot {
        partners,
        orders,
        disruptions: Vec::new(),
    };
    snap.sort();
    Ok(snap)
}

pub fn generate(cfg: &GenConfig) -> Result<Graph> {
    emit_views(&generate_snapshot(cfg)?)
}

/// A disruption as configured: day offsets from the start date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisruptionConfig {
    pub id: String,
    pub cause: Cause,
    pub scope: String,
    pub severity: SeverityLevel,
    pub begin_day: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_days: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_day: Option<i64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub open_ended: bool,
    pub region: GeoRect,
}

impl DisruptionConfig {
    /// Open-ended disruptions end at the horizon.
    pub fn end_day(&self, horizon: i64) -> Result<i64> {
        let err = |m: &str| cfg_err(format!("disruption {}: {m}", self.id));
        let end = match (self.duration_days, self.end_day, self.open_ended) {
            (Some(d), None, false) => {
                if d < 0 {
                    return Err(err("negative duration"));
                }
                self.begin_day + d
            }
            (None, Some(e), false) => e,
            (None, None, true) => horizon,
            _ => return Err(err("exactly one of duration_days, end_day, open_ended is required")),
        };
        if self.begin_day < 0 || end < self.begin_day {
            return Err(err("requires 0 <= begin_day <= end"));
        }
        if end > horizon {
            return Err(err("ends after the horizon"));
        }
        Ok(end)
    }

    pub fn to_disruption(&self, start: Date, horizon: i64, severities: &SeverityTable) -> Result<Disruption> {
        let end = self.end_day(horizon)?;
        let r = self.region;
        if !(r.min_lon <= r.max_lon && r.min_lat <= r.max_lat) {
            return Err(cfg_err(format!("disruption {}: region min exceeds max", self.id)));
        }
        let day = |d: i64| start.add_days(d).ok_or_else(|| cfg_err("date out of range"));
        Ok(Disruption {
            id: self.id.clone(),
            cause: self.cause,
            scope: self.scope.clone(),
            severity: self.severity,
            severity_factor: severities.factor(self.severity),
            begin: day(self.begin_day)?,
            end: Some(day(end)?),
            region: self.region,
            affected_partners: Vec::new(),
            affected_plan_count: None,
        })
    }
}

/// The eight reference scenarios for the default layout.
pub fn build_disruption_fixtures(horizon: i64) -> Result<Vec<DisruptionConfig>> {
    if horizon < 46 {
        return Err(cfg_err(format!("horizon {horizon} is shorter than 46 days")));
    }
    let layout = GenConfig::default();
    let at = |id: &str| GeoRect::around(layout.location(id), 0.5);
    let span = (horizon - 46) as f64;
    let begin = |frac: f64| (span * frac).round() as i64;
    let oem = at(OEM);
    let mixed = GeoRect {
        min_lon: -0.5,
        max_lon: 4.5,
        min_lat: 2.5,
        max_lat: 4.5,
    };
    let g1 = GeoRect {
        min_lon: -0.5,
        max_lon: 0.5,
        min_lat: -0.5,
        max_lat: 2.5,
    };
    let def = |id: &str, cause, scope: &str, severity, b: i64, d: Option<i64>, region| DisruptionConfig {
        id: id.into(),
        cause,
        scope: scope.into(),
        severity,
        begin_day: b,
        duration_days: d,
        end_day: None,
        open_ended: d.is_none(),
        region,
    };
    use Cause::*;
    use SeverityLevel::*;
    Ok(vec![
        def("Disr1", Internal, "production", Medium, begin(0.1), Some(3), oem),
        def("Disr2", Internal, "production", Low, begin(0.2), Some(1), oem),
        def("Disr3", Internal, "production", Medium, begin(0.3), Some(5), oem),
        def("Disr4", Internal, "logistics", High, begin(0.4), Some(45), g1),
        def("Disr5", External, "supply", Medium, begin(0.9), None, at("S3")),
        def("Disr6", External, "supply", Medium, begin(0.5), Some(10), at("S2")),
        def("Disr7", Mixed, "production", Medium, begin(0.7), Some(3), mixed),
        def("Disr8", Mixed, "production", High, begin(0.7), Some(6), mixed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::load_views;

    #[test]
    fn default_shape() {
        let snap = generate_snapshot(&GenConfig::default()).unwrap();
        assert_eq!(snap.orders.len(), 400);
        assert_eq!(snap.partners.len(), 9);
        for o in &snap.orders {
            assert!(o.plan.allocations.len() >= 2);
            let total: f64 = o.plan.allocations.iter().map(|a| a.quantity * a.unit_price).sum();
            assert_eq!(total, o.original_price);
            assert!(o.plan.allocations.iter().all(|a| a.timestamp <= o.delivery));
        }
    }

    #[test]
    fn no_orders_gives_partners_only() {
        let cfg = GenConfig {
            num_orders: 0,
            ..GenConfig::default()
        };
        let (snap, report) = load_views(&generate(&cfg).unwrap());
        assert!(report.is_clean());
        assert!(snap.orders.is_empty());
        assert_eq!(snap.partners.len(), 9);
    }

    #[test]
    fn saturation_failure_names_the_bottleneck() {
        let cfg = GenConfig {
            supplier_saturation: 15.0,
            quantity_min: 20,
            quantity_max: 20,
            ..GenConfig::default()
        };
        match generate(&cfg) {
            Err(CoreError::Infeasible(m)) => assert!(m.contains("supplier group"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixtures_follow_the_published_durations() {
        let f = build_disruption_fixtures(178).unwrap();
        assert_eq!(f.len(), 8);
        assert_eq!((f[1].duration_days, f[1].severity), (Some(1), SeverityLevel::Low));
        assert_eq!((f[3].duration_days, f[3].severity), (Some(45), SeverityLevel::High));
        assert!(f[4].open_ended);
        assert_eq!(f[4].end_day(178).unwrap(), 178);
        for d in &f {
            assert!(d.end_day(178).is_ok(), "{}", d.id);
        }
        assert!(build_disruption_fixtures(45).is_err());
    }

    #[test]
    fn every_fixture_region_covers_a_partner() {
        let cfg = GenConfig::default();
        let mut ids = cfg.supplier_ids();
        ids.push(OEM.into());
        ids.extend(cfg.customer_ids());
        for d in build_disruption_fixtures(178).unwrap() {
            assert!(ids.iter().any(|p| d.region.contains(cfg.location(p))), "{}", d.id);
        }
    }
}
