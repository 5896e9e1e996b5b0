//! Integer-order Bessel functions of the first kind.
//!
//! All orders `J_0..=J_N` at one argument come from a single Miller backward
//! recurrence normalised with `J_0 + 2 Σ J_2k = 1`. The recurrence is stable
//! for every order, which matters here because sideband combs need the whole
//! ladder of orders at once, and it stays accurate to a few ulp up to |x| ≈ 1000.

use crate::error::{domain, Result};

/// Largest order accepted by [`bessel_j`].
pub const MAX_ORDER: u32 = 60;
/// Largest |x| accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 50.0;

const RESCALE_ABOVE: f64 = 1e250;
const SMALL_ARGUMENT: f64 = 1e-6;

/// `J_n(x)` for `n ≤ 60`, `|x| ≤ 50`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return domain(format!("Bessel order {n} exceeds {MAX_ORDER}"));
    }
    if !(x.abs() <= MAX_ARGUMENT) {
        return domain(format!("Bessel argument {x} outside [-{MAX_ARGUMENT}, {MAX_ARGUMENT}]"));
    }
    Ok(bessel_j_orders(n as usize, x)[n as usize])
}

/// `[J_0(x), J_1(x), …, J_{n_max}(x)]`.
///
/// No range checks; callers inside the crate use this for sideband ladders
/// whose truncation order can exceed [`MAX_ORDER`].
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    let ax = x.abs();
    if ax == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if ax < SMALL_ARGUMENT {
        small_argument_series(ax, &mut out);
    } else {
        miller(ax, &mut out);
    }
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    out
}

/// Derivatives `J_n'(x)` for `n = 0..=n_max` from the orders `0..=n_max+1`.
pub(crate) fn bessel_j_derivatives(orders: &[f64]) -> Vec<f64> {
    let n_max = orders.len() - 2;
    (0..=n_max).map(|n| if n == 0 { -orders[1] } else { 0.5 * (orders[n - 1] - orders[n + 1]) }).collect()
}

fn small_argument_series(ax: f64, out: &mut [f64]) {
    // J_n(x) ≈ (x/2)^n / n! · (1 - (x/2)^2 / (n+1)); the next term is O(x^4).
    let half = 0.5 * ax;
    let mut lead = 1.0;
    for (n, v) in out.iter_mut().enumerate() {
        if n > 0 {
            lead *= half / n as f64;
        }
        *v = lead * (1.0 - half * half / (n as f64 + 1.0));
    }
}

fn miller(ax: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    let top = n_max.max(ax.ceil() as usize);
    let mut start = top + 20 + (10.0 * ((top + 1) as f64).sqrt()) as usize;
    start += start % 2;

    let mut j_next = 0.0;
    let mut j = 1.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += 2.0 * j;
        }
        let j_prev = (2.0 * k as f64 / ax) * j - j_next;
        j_next = j;
        j = j_prev;
        if j.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            j *= s;
            j_next *= s;
            norm *= s;
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
    out[0] = j;
    norm += j;
    out.iter_mut().for_each(|v| *v /= norm);
}
