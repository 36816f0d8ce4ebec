//! Task files bundled with the binary.

pub const SHIPPED: &[(&str, &str)] = &[
    ("p1-dubrovin-flatness", include_str!("../../../tasks/p1-dubrovin-flatness.json")),
    ("hoch-identity-suite", include_str!("../../../tasks/hoch-identity-suite.json")),
    ("kx2-cyclic-homology", include_str!("../../../tasks/kx2-cyclic-homology.json")),
    ("kx2-gapped-connections", include_str!("../../../tasks/kx2-gapped-connections.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
