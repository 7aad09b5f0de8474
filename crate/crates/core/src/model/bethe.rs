//! Ground-state energy density of the infinite half-filled chain,
//! `e(U/t) = -4 int_0^inf J0(w) J1(w) / (w (1 + exp(w U / 2t))) dw`.
//!
//! Bessel functions use the power series below `x = 15` and the Hankel
//! asymptotic expansion (Abramowitz and Stegun 9.2.5, 9.2.9, 9.2.10) above;
//! both are accurate to better than 1e-10 on their ranges. The integral is
//! summed over panels of width pi/2 with adaptive Gauss-Kronrod (7, 15) and
//! truncated at a cutoff chosen from a certified tail bound.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{bail, Result};

const CROSSOVER: f64 = 15.0;
const TAIL_TARGET: f64 = 1e-9;
const PANEL_TOL: f64 = 1e-14;

fn series(n: u32, x: f64) -> f64 {
    let h = x / 2.0;
    let mut term = if n == 0 { 1.0 } else { h };
    let mut sum = term;
    let q = -h * h;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60u32 {
        // a_k = prod_{i<=k} (mu - (2i-1)^2) / (k! (8x)^k)
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (n as f64) * FRAC_PI_2 - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn bessel(n: u32, x: f64) -> f64 {
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let x = x.abs();
    sign * if x < CROSSOVER { series(n, x) } else { hankel(n, x) }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel(1, x)
}

/// `1 / (1 + e^x)` without overflow.
fn logistic_tail(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

fn integrand(w: f64, a: f64) -> f64 {
    let r = if w < 1e-8 { 0.5 - w * w * 3.0 / 16.0 } else { bessel_j0(w) * bessel_j1(w) / w };
    r * logistic_tail(a * w)
}

/// Upper bound on `|4 int_W^inf integrand|`.
///
/// For `W >= 20`, `J0 J1 = -cos(2w) / (pi w) + r(w)` with `|r| <= 0.5 / w^2`.
/// The cosine part is bounded by the second mean value theorem (the weight
/// `g(w) / w^2` is positive and decreasing), the remainder by direct
/// integration. For `U > 0` the cruder `|J0 J1| <= 1` bound with the
/// exponential decay of `g` is also available; the smaller one is used.
fn tail_bound(cut: f64, a: f64) -> f64 {
    let g = logistic_tail(a * cut);
    let oscillatory = 4.0 * g * (1.0 / (PI * cut * cut) + 0.5 / (2.0 * cut * cut));
    if a > 0.0 {
        oscillatory.min(4.0 * (-a * cut).exp() / (a * cut))
    } else {
        oscillatory
    }
}

/// Integration cutoff for `U/t`: the smallest multiple of pi/2 at or above 20
/// whose tail bound is below 1e-9.
pub fn bethe_cutoff(u_over_t: f64) -> f64 {
    let a = u_over_t / 2.0;
    let mut panels = (20.0 / FRAC_PI_2).ceil();
    while tail_bound(panels * FRAC_PI_2, a) > TAIL_TARGET {
        panels = (panels * 1.05).ceil();
    }
    panels * FRAC_PI_2
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, lo, hi);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (lo + hi);
    adaptive(f, lo, mid, tol / 2.0, depth - 1) + adaptive(f, mid, hi, tol / 2.0, depth - 1)
}

/// `E0 / (L t)` of the infinite chain at half filling.
pub fn bethe_energy_density(u_over_t: f64) -> Result<f64> {
    if !u_over_t.is_finite() || u_over_t < 0.0 {
        bail!(Argument, "U/t must be finite and non-negative, got {u_over_t}");
    }
    let a = u_over_t / 2.0;
    let cut = bethe_cutoff(u_over_t);
    let f = |w: f64| integrand(w, a);
    let panels = (cut / FRAC_PI_2).round() as usize;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = k as f64 * FRAC_PI_2;
        total += adaptive(&f, lo, lo + FRAC_PI_2, PANEL_TOL, 12);
    }
    Ok(-4.0 * total)
}
