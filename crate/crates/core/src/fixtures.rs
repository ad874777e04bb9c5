//! Shipped example diagrams; each document names the figure it encodes.

use crate::diagram::{parse_diagram, Diagram};

pub const PSEUDO_TREFOIL: &str = include_str!("../fixtures/pseudo_trefoil.json");
pub const CLASSICAL_TREFOIL: &str = include_str!("../fixtures/classical_trefoil.json");
pub const KINK: &str = include_str!("../fixtures/kink.json");
pub const ANNULAR_PSEUDO_TREFOIL: &str = include_str!("../fixtures/annular_pseudo_trefoil.json");
pub const ANNULAR_TREFOIL: &str = include_str!("../fixtures/annular_trefoil.json");
pub const ESSENTIAL_UNKNOT: &str = include_str!("../fixtures/essential_unknot.json");
pub const TOROIDAL_KL: &str = include_str!("../fixtures/toroidal_trefoil_kl.json");
pub const TOROIDAL_KR: &str = include_str!("../fixtures/toroidal_kr.json");
pub const TOROIDAL_L1: &str = include_str!("../fixtures/toroidal_l1.json");
pub const TOROIDAL_L2: &str = include_str!("../fixtures/toroidal_l2.json");

/// Every shipped fixture by name.
pub const ALL: [(&str, &str); 10] = [
    ("pseudo_trefoil", PSEUDO_TREFOIL),
    ("classical_trefoil", CLASSICAL_TREFOIL),
    ("kink", KINK),
    ("annular_pseudo_trefoil", ANNULAR_PSEUDO_TREFOIL),
    ("annular_trefoil", ANNULAR_TREFOIL),
    ("essential_unknot", ESSENTIAL_UNKNOT),
    ("toroidal_trefoil_kl", TOROIDAL_KL),
    ("toroidal_kr", TOROIDAL_KR),
    ("toroidal_l1", TOROIDAL_L1),
    ("toroidal_l2", TOROIDAL_L2),
];

pub fn load(text: &str) -> Diagram {
    parse_diagram(text).expect("shipped fixture is valid")
}

pub fn by_name(name: &str) -> Option<Diagram> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| load(t))
}

pub fn all() -> Vec<(&'static str, Diagram)> {
    ALL.iter().map(|(n, t)| (*n, load(t))).collect()
}
