//! Reference integrators used only by the tests. Deliberately naive: fixed
//! composite rules, no adaptivity, nothing shared with the library.

#![allow(dead_code)]

/// Composite Simpson rule with `2n` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `(int_a^b |rho|^q)^(1/q)` with the jump at `x` handled by splitting.
pub fn kernel_norm_oracle(rho: impl Fn(f64) -> f64, a: f64, b: f64, x: f64, q: f64) -> f64 {
    let g = |t: f64| rho(t).abs().powf(q);
    let left = simpson(g, a, x, 20_000);
    // Evaluate the right piece from just inside so t = x takes the right branch.
    let eps = (b - x) * 1e-15;
    let right = simpson(|t: f64| g(t.max(x + eps)), x, b, 20_000);
    (left + right).powf(1.0 / q)
}

/// Sup of `|g|` on a uniform grid.
pub fn grid_sup(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    (0..=n).map(|i| g(a + (b - a) * i as f64 / n as f64).abs()).fold(0.0, f64::max)
}
