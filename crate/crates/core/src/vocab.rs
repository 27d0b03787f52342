//! Vocabulary of the supply-chain and disruption schema.

use scdm_kg::{Iri, Prefixes, Term, XSD};

pub const NS: &str = "http://mare.example/sc#";

pub const ORDER: &str = "Order";
pub const SUPPLY_PLAN: &str = "SupplyPlan";
pub const PARTNER: &str = "Partner";
pub const DISRUPTION: &str = "Disruption";

pub const MAKES: &str = "makes";
pub const HAS_PRODUCT: &str = "hasProduct";
pub const HAS_DELIVERY_TIME: &str = "hasDeliveryTime";
pub const HAS_QUANTITY: &str = "hasQuantity";
pub const HAS_PRIORITY: &str = "hasPriority";
pub const HAS_SUPPLY_PLAN: &str = "hasSupplyPlan";
pub const NEEDS_PARTNER: &str = "needsPartner";
pub const GETS_PRODUCT: &str = "getsProduct";
pub const HAS_TIME_STAMP: &str = "hasTimeStamp";
pub const HAS_UNIT_PRICE: &str = "hasUnitPrice";
pub const HAS_ORIGINAL_PRICE: &str = "hasOriginalPrice";
pub const HAS_CAUSE: &str = "hasCause";
pub const HAS_CAUSE_TYPE: &str = "hasCauseType";
pub const HAS_SCOPE: &str = "hasScope";
pub const HAS_SEVERITY: &str = "hasSeverity";
pub const HAS_SEVERITY_FACTOR: &str = "hasSeverityFactor";
pub const HAS_BEGIN_DATE: &str = "hasBeginDate";
pub const HAS_END_DATE: &str = "hasEndDate";
pub const HAS_DURATION: &str = "hasDuration";
pub const HAS_LONGITUDE: &str = "hasLongitude";
pub const HAS_LATITUDE: &str = "hasLatitude";
pub const HAS_MIN_LONGITUDE: &str = "hasMinLongitude";
pub const HAS_MAX_LONGITUDE: &str = "hasMaxLongitude";
pub const HAS_MIN_LATITUDE: &str = "hasMinLatitude";
pub const HAS_MAX_LATITUDE: &str = "hasMaxLatitude";
pub const IS_DISRUPTED: &str = "isDisrupted";
pub const AFFECTS_PARTNER: &str = "affectsPartner";
pub const AFFECTS_PLAN: &str = "affectsPlan";
pub const IS_RECOVERED_BY: &str = "isRecoveredBy";
pub const HAS_TO_RECOVER: &str = "hasToRecover";
pub const HAS_STRATEGIC_STOCK: &str = "hasStrategicStock";
pub const HAS_PRICE: &str = "hasPrice";
pub const HAS_TRANSPORT_MODE: &str = "hasTransportMode";
pub const HAS_COST: &str = "hasCost";
pub const HAS_CAPACITY: &str = "hasCapacity";
pub const HAS_CAPACITY_SATURATION: &str = "hasCapacitySaturation";
pub const HAS_GROUP: &str = "hasGroup";
pub const HAS_TIER: &str = "hasTier";

/// Every canonical predicate.
pub const PREDICATES: &[&str] = &[
    MAKES,
    HAS_PRODUCT,
    HAS_DELIVERY_TIME,
    HAS_QUANTITY,
    HAS_PRIORITY,
    HAS_SUPPLY_PLAN,
    NEEDS_PARTNER,
    GETS_PRODUCT,
    HAS_TIME_STAMP,
    HAS_UNIT_PRICE,
    HAS_ORIGINAL_PRICE,
    HAS_CAUSE,
    HAS_CAUSE_TYPE,
    HAS_SCOPE,
    HAS_SEVERITY,
    HAS_SEVERITY_FACTOR,
    HAS_BEGIN_DATE,
    HAS_END_DATE,
    HAS_DURATION,
    HAS_LONGITUDE,
    HAS_LATITUDE,
    HAS_MIN_LONGITUDE,
    HAS_MAX_LONGITUDE,
    HAS_MIN_LATITUDE,
    HAS_MAX_LATITUDE,
    IS_DISRUPTED,
    AFFECTS_PARTNER,
    AFFECTS_PLAN,
    IS_RECOVERED_BY,
    HAS_TO_RECOVER,
    HAS_STRATEGIC_STOCK,
    HAS_PRICE,
    HAS_TRANSPORT_MODE,
    HAS_COST,
    HAS_CAPACITY,
    HAS_CAPACITY_SATURATION,
    HAS_GROUP,
    HAS_TIER,
];

/// Alternative spellings and their canonical predicate.
pub const ALIASES: &[(&str, &str)] = &[
    ("hasPlan", HAS_SUPPLY_PLAN),
    ("hasStartTime", HAS_BEGIN_DATE),
    ("hasEndTime", HAS_END_DATE),
    ("hasStartegicStock", HAS_STRATEGIC_STOCK),
    ("hasDeliverDate", HAS_DELIVERY_TIME),
];

pub fn iri(local: &str) -> Iri {
    Iri::new(format!("{NS}{local}"))
}

pub fn node(local: &str) -> Term {
    Term::Iri(iri(local))
}

/// Local name of an IRI in the namespace.
pub fn local(iri: &Iri) -> Option<&str> {
    iri.as_str().strip_prefix(NS)
}

pub fn local_of(term: &Term) -> Option<&str> {
    term.as_iri().and_then(local)
}

/// Canonical replacement for an alias IRI.
pub fn canonical(iri: &Iri) -> Option<Iri> {
    let l = local(iri)?;
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == l)
        .map(|(_, c)| self::iri(c))
}

pub fn prefixes() -> Prefixes {
    Prefixes::new().with("", NS).with("xsd", XSD)
}
