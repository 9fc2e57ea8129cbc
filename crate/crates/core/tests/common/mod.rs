#![allow(dead_code)]

use proptest::prelude::*;

use kmb_core::Instance;

/// Costs drawn from a coarse grid so that ties are common.
fn cost() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..8).prop_map(|q| q as f64 * 0.25),
        0.0f64..4.0,
    ]
}

/// `|U| ≤ 8`, `6 ≤ n ≤ 15`, `2 ≤ k ≤ n/3`, every customer served.
pub fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..=8, 6usize..=15)
        .prop_flat_map(|(u, n)| {
            let cells = prop::collection::vec(prop::option::weighted(0.55, cost()), u * n);
            let fallback = prop::collection::vec((0..u, cost()), n);
            (Just(u), Just(n), 2usize..=n / 3, cells, fallback)
        })
        .prop_map(|(u, n, k, cells, fallback)| {
            let mut edges = Vec::new();
            for (idx, c) in cells.into_iter().enumerate() {
                if let Some(c) = c {
                    edges.push((idx / n, idx % n, c));
                }
            }
            for (j, (i, c)) in fallback.into_iter().enumerate() {
                edges.push((i, j, c + 4.0));
            }
            Instance::new(u, n, k, edges).unwrap()
        })
}

pub fn rel_le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * b.abs().max(1.0)
}
