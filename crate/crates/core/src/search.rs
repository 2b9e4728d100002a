//! One-dimensional search helpers used by the field finders.

use crate::error::Result;
use crate::scalar::{lit, Real};

/// Uniform grid of `points` values spanning `[lo, hi]`.
pub fn linspace<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / lit::<T>((points - 1) as f64);
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo + step * lit::<T>(i as f64) })
                .collect()
        }
    }
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`, stopping
/// once the bracket is narrower than `tol`.
pub fn golden_section_min<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = lit::<T>((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = (a + b) / lit::<T>(2.0);
    let fx = f(x)?;
    // the midpoint can be marginally worse than an interior probe
    let best = [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |acc, p| if p.1 < acc.1 { p } else { acc });
    Ok(best)
}

/// Bisection for the first sign change of `f` on `[lo, hi]`, where
/// `f(lo) < 0 <= f(hi)`. Returns the upper end of the final bracket.
pub fn bisect_threshold<T, F>(mut f: F, mut lo: T, mut hi: T, tol: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<bool>,
{
    while (hi - lo).abs() > tol {
        let mid = (lo + hi) / lit::<T>(2.0);
        if f(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
