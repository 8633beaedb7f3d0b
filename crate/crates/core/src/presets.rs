//! Built-in mollifier coefficient presets.

use crate::kernels::Polynomial;

/// A named `(r, P1, P2)` choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub r: usize,
    pub p1: Polynomial,
    pub p2: Polynomial,
}

pub const PUBLISHED_R2_M10: &str = "paper-2009-r2-m10";

const PUBLISHED_P1: [f64; 11] = [
    -3.0, 97.0, -1730.0, 14830.0, -70248.0, 172217.0, -154805.0, -109555.0, 188895.0, 130288.0,
    -186298.0,
];

const PUBLISHED_P2: [f64; 11] = [
    -258.0, 9245.0, -96770.0, 428888.0, -856147.0, 592829.0, 169210.0, 94624.0, -716274.0,
    230263.0, 154420.0,
];

/// The degree-10 pair for `r = 2` with `h(3.033π) ≈ 0.998885`.
pub fn published_r2_m10() -> Preset {
    Preset {
        name: PUBLISHED_R2_M10,
        r: 2,
        p1: Polynomial::new(PUBLISHED_P1.to_vec()),
        p2: Polynomial::new(PUBLISHED_P2.to_vec()),
    }
}

pub fn lookup(name: &str) -> Option<Preset> {
    match name {
        PUBLISHED_R2_M10 => Some(published_r2_m10()),
        _ => None,
    }
}

pub fn names() -> &'static [&'static str] {
    &[PUBLISHED_R2_M10]
}
