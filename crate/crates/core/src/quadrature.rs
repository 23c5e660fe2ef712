//! One-dimensional adaptive quadrature and the Epstein zeta function of `Z^3`.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, gamma_ur};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subintervals are bisected until the local error estimate falls below
/// the tolerance share of that subinterval, or the depth limit is reached.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(&f, a, b, tol, 40)
}

/// Upper incomplete gamma `Γ(a, x)` for `a > -1`, `x > 0`.
fn upper_gamma(a: f64, x: f64) -> f64 {
    if a > 0.0 {
        gamma_ur(a, x) * gamma(a)
    } else if a == 0.0 {
        // E_1(x); only reached for s = 0, which is special-cased by the caller.
        unreachable!("upper_gamma(0, x)")
    } else {
        (upper_gamma(a + 1.0, x) - x.powf(a) * (-x).exp()) / a
    }
}

/// Epstein zeta function `Z(s) = Σ_{n ∈ Z^3 \ 0} |n|^-s`, analytically
/// continued to `s < 3` via Ewald's splitting. Valid for `-2 < s < 3`.
pub fn epstein_zeta(s: f64) -> f64 {
    assert!(s > -2.0 && s < 3.0, "epstein_zeta defined here for -2 < s < 3");
    if s.abs() < 1e-12 {
        return -1.0;
    }
    let reach: i64 = 5;
    let mut direct = 0.0;
    let mut dual = 0.0;
    let a1 = 0.5 * s;
    let a2 = 0.5 * (3.0 - s);
    for i in -reach..=reach {
        for j in -reach..=reach {
            for k in -reach..=reach {
                let n2 = (i * i + j * j + k * k) as f64;
                if n2 == 0.0 || n2 > (reach * reach) as f64 {
                    continue;
                }
                let x = PI * n2;
                direct += upper_gamma(a1, x) * x.powf(-a1);
                dual += upper_gamma(a2, x) * x.powf(-a2);
            }
        }
    }
    PI.powf(a1) / gamma(a1) * (direct + dual - 2.0 / s - 2.0 / (3.0 - s))
}
