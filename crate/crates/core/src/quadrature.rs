//! Composite Simpson rule.

/// Integrates `f` over `[lo, hi]` with `panels` Simpson panels (2·panels subintervals).
pub fn simpson<F>(f: F, lo: f64, hi: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    assert!(panels > 0, "simpson needs at least one panel");
    let n = 2 * panels;
    let h = (hi - lo) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = lo + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(lo) + f(hi) + 4.0 * odd + 2.0 * even)
}
