use alloc::vec::Vec;

use crate::{Error, Result};

/// Node count used for spectral integrals.
pub const DEFAULT_QUADRATURE_NODES: usize = 2001;

/// Composite Simpson nodes and weights on `[a, b]`.
///
/// An even node count is bumped by one. All weights are positive, so a
/// weighted sum of a nonnegative density stays nonnegative.
pub fn simpson_rule(a: f64, b: f64, nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a < b) {
        return Err(Error::invalid("quadrature interval", alloc::format!("need a < b, got [{a}, {b}]")));
    }
    if nodes < 2 {
        return Err(Error::invalid("quadrature nodes", alloc::format!("need at least 2, got {nodes}")));
    }
    let n = if nodes.is_multiple_of(2) { nodes + 1 } else { nodes };
    let intervals = n - 1;
    let h = (b - a) / intervals as f64;
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        xs.push(if i == intervals { b } else { a + h * i as f64 });
        let c = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        ws.push(c * h / 3.0);
    }
    Ok((xs, ws))
}

/// Composite Simpson estimate of `∫_a^b f`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> Result<f64> {
    let (xs, ws) = simpson_rule(a, b, nodes)?;
    Ok(xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum())
}
