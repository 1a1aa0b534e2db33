//! Bracketing root finders shared by the coupling and algebraic layers.

/// `n` points spaced uniformly in `log τ` on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| (a + step * i as f64).exp()).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

/// Bisection on a bracket `[a, b]` with `f(a) * f(b) <= 0`.
///
/// Stops when the bracket is narrower than `xtol * |x|` or after 200
/// halvings. Returns the final bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut fa = f(a);
    if fa == 0.0 {
        return (a, a);
    }
    let fb = f(b);
    if fb == 0.0 {
        return (b, b);
    }
    debug_assert!(fa.signum() != fb.signum(), "bisect needs a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= xtol * mid.abs() || mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return (mid, mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    (a, b)
}

/// Newton polish of `x0` that never leaves `[a, b]` and only accepts steps
/// that reduce `|f|`. Falls back to `x0` if nothing improves.
pub fn newton_polish<F, D>(f: F, df: D, x0: f64, a: f64, b: f64, max_iter: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..max_iter {
        if fx == 0.0 {
            break;
        }
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next >= a && next <= b) || next == x {
            break;
        }
        let fn_ = f(next);
        if !(fn_.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

/// Indices `i` such that `values[i]` and `values[i + 1]` have strictly
/// opposite signs, plus indices where `values[i] == 0`.
///
/// Zeros are reported once; a sign change straddling an exact zero is not
/// double counted. Infinite samples carry their sign; NaN breaks brackets.
pub fn sign_change_brackets(values: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        if v == 0.0 {
            out.push(Bracket::Exact(i));
            i += 1;
            continue;
        }
        if i + 1 < values.len() {
            let w = values[i + 1];
            if !v.is_nan() && !w.is_nan() && w != 0.0 && v.signum() != w.signum() {
                out.push(Bracket::Between(i));
            }
        }
        i += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    /// The sample at this index is exactly zero.
    Exact(usize),
    /// A sign change between this index and the next.
    Between(usize),
}
