//! Adaptive Simpson quadrature.

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
///
/// `panels` equal initial subintervals guard against aliasing on oscillatory
/// integrands; the per-panel budget is tol/panels.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
    max_depth: u32,
) -> f64 {
    assert!(panels >= 1 && b >= a);
    let h = (b - a) / panels as f64;
    let per = tol / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        let x1 = if i + 1 == panels { b } else { x0 + h };
        let whole = simpson(f, x0, x1);
        total += asr(f, x0, x1, per, whole, max_depth);
    }
    total
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
}

fn asr<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let left = simpson(f, a, c);
    let right = simpson(f, c, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        asr(f, a, c, 0.5 * eps, left, depth - 1) + asr(f, c, b, 0.5 * eps, right, depth - 1)
    }
}
