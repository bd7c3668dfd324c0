//! Shared meshes and closed-form oracles for the integration tests.
#![allow(dead_code)]

use sbarrier::geometry::{build_mesh, DomainKind, DomainSpec, GammaSelector, Mesh};

/// Mesh size of the barrier, Hardy and singular cases.
pub const BARRIER_H: f64 = 1.0 / 64.0;

/// Ring mesh of the disk of radius `r` centered at the origin.
pub fn disk(r: f64, h: f64) -> Mesh {
    let spec = DomainSpec::new(DomainKind::Disk { center: [0.0, 0.0], radius: r }, GammaSelector::All);
    build_mesh(&spec, h).unwrap()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Radial flux law in the plane: `r |u'|^{p−1}` is constant, so
/// `|u'| ∝ r^{−1/(p−1)}`.
fn radial_speed(p: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| r.powf(-1.0 / (p - 1.0))
}

/// p-capacity of `B̄(0,a)` in `B(0,b)`.
pub fn radial_capacity(p: f64, a: f64, b: f64) -> f64 {
    let i = simpson(radial_speed(p), a, b, 2000);
    std::f64::consts::TAU * i.powf(1.0 - p)
}

/// Capacity potential of `B̄(0,a)` in `B(0,b)` at radius `r ∈ [a, b]`.
pub fn radial_potential(p: f64, a: f64, b: f64, r: f64) -> f64 {
    simpson(radial_speed(p), r, b, 2000) / simpson(radial_speed(p), a, b, 2000)
}
