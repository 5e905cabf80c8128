//! Special functions and summation/quadrature helpers shared by the
//! analytic law families.

use quadrature::double_exponential;

const MACHEP: f64 = 1.11022302462515654042e-16;

// Euler-Maclaurin coefficients (2k)!/B_2k used by the Hurwitz zeta routine.
const ZETA_A: [f64; 12] = [
    12.0,
    -720.0,
    30240.0,
    -1209600.0,
    47900160.0,
    -1.8924375803183791606e9,
    7.47242496e10,
    -2.950130727918164224e12,
    1.1646782814350067249e14,
    -4.5979787224074726105e15,
    1.8152105401943546773e17,
    -7.1661652561756670113e18,
];

/// Hurwitz zeta function `sum_{k>=0} (k + q)^(-s)` for `s > 1`, `q > 0`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    assert!(s > 1.0 && q > 0.0, "hurwitz_zeta needs s > 1, q > 0");
    if q.is_infinite() {
        return 0.0;
    }
    let mut sum = q.powf(-s);
    let mut a = q;
    let mut b = 0.0;
    let mut i = 0;
    while i < 9 || a <= 9.0 {
        i += 1;
        a += 1.0;
        b = a.powf(-s);
        sum += b;
        if (b / sum).abs() < MACHEP {
            return sum;
        }
    }
    let w = a;
    sum += b * w / (s - 1.0);
    sum -= 0.5 * b;
    let mut fac = 1.0;
    let mut k = 0.0;
    for coef in ZETA_A {
        fac *= s + k;
        b /= w;
        let t = fac * b / coef;
        sum += t;
        if (t / sum).abs() < MACHEP {
            break;
        }
        k += 1.0;
        fac *= s + k;
        b /= w;
        k += 1.0;
    }
    sum
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// A value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integral of `f` over `[a, b]`, split at the given interior breakpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Estimate {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let pieces = (pts.len() - 1).max(1) as f64;
    let mut out = Estimate { value: 0.0, error: 0.0 };
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = double_exponential::integrate(&f, w[0], w[1], tol / pieces);
        out.value += r.integral;
        out.error += r.error_estimate;
    }
    out
}

/// Integral of `f` over `[a, inf)`.
///
/// Uses `t = a + scale * (e^y - 1)` so algebraic tails decay exponentially in
/// `y`, then `y = v / (1 - v)` onto `[0, 1)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, tol: f64) -> Estimate {
    let g = |v: f64| {
        let one_minus = 1.0 - v;
        if one_minus <= 0.0 {
            return 0.0;
        }
        let y = v / one_minus;
        let ey = y.exp();
        let t = a + scale * (ey - 1.0);
        if !t.is_finite() {
            return 0.0;
        }
        let jac = scale * ey / (one_minus * one_minus);
        let r = f(t) * jac;
        if r.is_finite() {
            r
        } else {
            0.0
        }
    };
    let r = double_exponential::integrate(g, 0.0, 1.0, tol);
    Estimate { value: r.integral, error: r.error_estimate }
}

/// `sum_{j >= 0} f(start + j)` for a smooth, eventually monotone, summable `f`.
///
/// Terms are summed directly for `direct` indices and the remainder is
/// replaced by its Euler-Maclaurin expansion (integral plus two derivative
/// corrections). The reported error is the magnitude of the last correction
/// plus the quadrature error estimate.
pub fn series_tail<F: Fn(f64) -> f64>(f: F, start: f64, direct: u64) -> Estimate {
    let mut head = 0.0;
    let mut comp = 0.0;
    // Kahan: the direct block can be long.
    for j in 0..direct {
        let y = f(start + j as f64) - comp;
        let t = head + y;
        comp = (t - head) - y;
        head = t;
    }
    let n0 = start + direct as f64;
    let h = 1.0_f64.min(n0 / 8.0).max(0.25);
    let (fm2, fm1, f0, fp1, fp2) = (f(n0 - 2.0 * h), f(n0 - h), f(n0), f(n0 + h), f(n0 + 2.0 * h));
    let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    let d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
    let tol = (f0.abs() * 1e-14).max(f64::MIN_POSITIVE);
    let integral = integrate_to_infinity(&f, n0, n0.max(1.0), tol);
    let corr3 = d3 / 720.0;
    Estimate {
        value: head + integral.value + f0 / 2.0 - d1 / 12.0 + corr3,
        error: corr3.abs() + integral.error + head.abs() * 1e-16 * direct as f64,
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`, `a > 0`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(a, x)
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
