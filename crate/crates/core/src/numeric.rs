//! Bracketing searches used by the oracles and threshold locators.

/// Smallest `x` in `[lo, hi]` for which the monotone predicate `pred` holds,
/// to absolute tolerance `tol`. `pred(hi)` must be true; if `pred(lo)` is
/// already true, `lo` is returned unchanged.
pub fn bisect_threshold<F>(mut pred: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64
where
    F: FnMut(f64) -> bool,
{
    if pred(lo) {
        return lo;
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Maximizer of a unimodal function on `[a, b]` by golden-section search.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// SplitMix64 finalizer, used to derive independent per-item seeds from a
/// base seed and an index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
