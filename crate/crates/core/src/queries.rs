//! Query fixtures used by the pipeline, parsed once per call site.

use scdm_kg::query::{parse_query_with, Query};

use crate::error::Result;
use crate::vocab;

pub const LISTING1_IDENTIFY: &str = include_str!("../queries/listing1.rq");
pub const LISTING2_IMPACT: &str = include_str!("../queries/listing2.rq");
pub const LISTING3_STOCK: &str = include_str!("../queries/listing3.rq");
pub const LISTING4_SHIPMENT: &str = include_str!("../queries/listing4.rq");
pub const LISTING5_DELAYED: &str = include_str!("../queries/listing5.rq");
pub const LISTING6_SUPPLIER: &str = include_str!("../queries/listing6.rq");
pub const LISTING7_COST: &str = include_str!("../queries/listing7.rq");
pub const LISTING8_SPEED: &str = include_str!("../queries/listing8.rq");

pub const COST_BY_ORDER: &str = include_str!("../queries/cost_by_order.rq");
pub const SPEED_BY_CUSTOMER: &str = include_str!("../queries/speed_by_customer.rq");
pub const DISRUPTED_BY_CUSTOMER: &str = include_str!("../queries/disrupted_by_customer.rq");
pub const RECOVERED_BY_CUSTOMER: &str = include_str!("../queries/recovered_by_customer.rq");

/// The eight listings in order, with their file names.
pub const LISTINGS: [(&str, &str); 8] = [
    ("listing1.rq", LISTING1_IDENTIFY),
    ("listing2.rq", LISTING2_IMPACT),
    ("listing3.rq", LISTING3_STOCK),
    ("listing4.rq", LISTING4_SHIPMENT),
    ("listing5.rq", LISTING5_DELAYED),
    ("listing6.rq", LISTING6_SUPPLIER),
    ("listing7.rq", LISTING7_COST),
    ("listing8.rq", LISTING8_SPEED),
];

/// Parses with the schema prefixes and rewrites alias predicates.
pub fn parse(text: &str) -> Result<Query> {
    let mut q = parse_query_with(text, &vocab::prefixes())?;
    q.map_iris(&vocab::canonical);
    Ok(q)
}
