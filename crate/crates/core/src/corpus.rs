//! Bundled example specifications.

use crate::dsl::{elaborate, parse, ElaborateOptions, Spec};
use crate::sync::FeaturedSyncSpec;
use crate::system::FeaturedSystem;

pub const ACCESS_MANAGEMENT: &str = include_str!("../models/access_management.feta");
pub const BROADCAST: &str = include_str!("../models/broadcast.feta");
pub const LOGGING: &str = include_str!("../models/logging.feta");
pub const TOKEN_RING: &str = include_str!("../models/token_ring.feta");
pub const PRODUCER_CONSUMER: &str = include_str!("../models/producer_consumer.feta");
pub const FAULTY_HANDSHAKE: &str = include_str!("../models/faulty_handshake.feta");

/// Every bundled specification with its file stem.
pub const ALL: [(&str, &str); 6] = [
    ("access_management", ACCESS_MANAGEMENT),
    ("broadcast", BROADCAST),
    ("logging", LOGGING),
    ("token_ring", TOKEN_RING),
    ("producer_consumer", PRODUCER_CONSUMER),
    ("faulty_handshake", FAULTY_HANDSHAKE),
];

/// Parses and elaborates a bundled specification with default options.
///
/// # Panics
///
/// If `text` is not a valid specification.
pub fn load(text: &str) -> Spec {
    let doc = parse(text).unwrap_or_else(|d| panic!("bundled specification does not parse: {d:?}"));
    elaborate(&doc, &ElaborateOptions::default())
        .unwrap_or_else(|d| panic!("bundled specification does not elaborate: {d:?}"))
}

/// The user/server access management family.
pub fn access_management() -> (FeaturedSystem, FeaturedSyncSpec) {
    let spec = load(ACCESS_MANAGEMENT);
    (spec.system, spec.sync)
}
