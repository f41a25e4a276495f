//! Quadrature rules: Gauss–Legendre, Gauss–Chebyshev, Gauss–Jacobi.
//!
//! The singular rules exist for integrands with inverse-square-root endpoint
//! behavior, which is exactly the local behavior of `1/√𝓡` at a branch
//! point: the caller supplies the smooth factor, the rule supplies the
//! weight. `cut_integral` pairs a rule with a doubled-order refinement to
//! produce an error estimate, and `escalate` drives the order up until the
//! refinement delta is below a relative tolerance.

use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Where the integrand carries an inverse-square-root singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointSingularity {
    /// `f(s)/√((b−s)(s−a))` — Gauss–Chebyshev.
    Both,
    /// `f(s)/√(s−a)` — Gauss–Jacobi with the weight on the lower endpoint.
    Left,
    /// `f(s)/√(b−s)` — Gauss–Jacobi with the weight on the upper endpoint.
    Right,
}

/// A quadrature value with its refinement-based error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence from Chebyshev-like initial
/// guesses; accurate to a few ulp for the orders used here (≤ 1024).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // initial guess (A&S 25.4.30 flavor)
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by upward recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n, p0 = P_{n-1}
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one polishing step after convergence
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                pp = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                x -= q1 / pp;
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // the middle node is exactly zero; recompute its weight cleanly
        let x = 0.0;
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (pp * pp);
    }
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with an `n`-point Gauss–Legendre rule.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// `∫_a^b f(s)/√((b−s)(s−a)) ds` with an `n`-point Gauss–Chebyshev rule.
///
/// The affine map `s = m + h t` sends the Chebyshev weight to the interval
/// weight with no leftover Jacobian, so the rule is `(π/n) Σ f(s_i)`.
pub fn chebyshev_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..n {
        let t = (PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64)).cos();
        acc += f(mid + half * t);
    }
    acc * PI / n as f64
}

/// Gauss–Jacobi nodes and weights on `[-1, 1]` for the weight
/// `(1−x)^α (1+x)^β`, via Golub–Welsch on the symmetric Jacobi matrix.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    // total mass of the weight: 2^{α+β+1} B(α+1, β+1)
    let ln_mu0 = (alpha + beta + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(alpha + beta + 2.0);
    let mu0 = ln_mu0.exp();
    // three-term recurrence coefficients of the monic polynomials
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let den = (2.0 * kf + alpha + beta) * (2.0 * kf + alpha + beta + 2.0);
        *d = if k == 0 {
            (beta - alpha) / (alpha + beta + 2.0)
        } else {
            (beta * beta - alpha * alpha) / den
        };
    }
    for k in 1..n {
        let kf = k as f64;
        let num = 4.0 * kf * (kf + alpha) * (kf + beta) * (kf + alpha + beta);
        let d = 2.0 * kf + alpha + beta;
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta)
                / ((alpha + beta + 2.0).powi(2) * (alpha + beta + 3.0))
        } else {
            num / (d * d * (d + 1.0) * (d - 1.0))
        };
        off[k - 1] = b2.sqrt();
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag[k];
    }
    for k in 0..n - 1 {
        j[(k, k + 1)] = off[k];
        j[(k + 1, k)] = off[k];
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}

fn jacobi_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, sing: EndpointSingularity) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // weight (1−t)^{-1/2}: singularity at t = +1, i.e. at s = b
    let (xs, ws) = gauss_jacobi(n, -0.5, 0.0);
    let mut acc = 0.0;
    match sing {
        EndpointSingularity::Right => {
            // ∫ f/√(b−s) ds = √h Σ w_i f(mid + h t_i)
            for (x, w) in xs.iter().zip(ws.iter()) {
                acc += w * f(mid + half * x);
            }
        }
        EndpointSingularity::Left => {
            // mirror t → −t
            for (x, w) in xs.iter().zip(ws.iter()) {
                acc += w * f(mid - half * x);
            }
        }
        EndpointSingularity::Both => unreachable!(),
    }
    acc * half.sqrt()
}

/// Segment integral against an inverse-square-root endpoint weight.
///
/// `f` is the smooth factor after the weight is taken out:
/// * `Both`  — computes `∫_a^b f(s)/√((b−s)(s−a)) ds`,
/// * `Left`  — computes `∫_a^b f(s)/√(s−a) ds`,
/// * `Right` — computes `∫_a^b f(s)/√(b−s) ds`.
///
/// The error estimate is the difference against the same rule at twice the
/// order.
pub fn cut_integral<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    order: usize,
    sing: EndpointSingularity,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Domain(format!(
            "cut_integral requires finite a < b, got [{a}, {b}]"
        )));
    }
    if order < 4 {
        return Err(Error::Domain(format!("cut_integral order must be >= 4, got {order}")));
    }
    let (coarse, fine) = match sing {
        EndpointSingularity::Both => (
            chebyshev_integrate(&f, a, b, order),
            chebyshev_integrate(&f, a, b, 2 * order),
        ),
        _ => (
            jacobi_integrate(&f, a, b, order, sing),
            jacobi_integrate(&f, a, b, 2 * order, sing),
        ),
    };
    Ok(Quadrature {
        value: fine,
        err_estimate: (fine - coarse).abs(),
    })
}

/// Relative tolerance for escalated segment integrals.
pub(crate) const SEGMENT_REL_TOL: f64 = 1e-12;

/// Run `cut_integral` with order escalation 32 → 64 → 128 (→ 512 as a
/// guard) until the refinement delta is below `rel_tol` relative to the
/// value (or an absolute floor for values near zero).
pub(crate) fn escalate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    sing: EndpointSingularity,
    rel_tol: f64,
    scale_hint: f64,
) -> Result<f64> {
    let mut last = None;
    for order in [32usize, 64, 128, 256, 512] {
        let q = cut_integral(&f, a, b, order, sing)?;
        let floor = rel_tol * (q.value.abs().max(scale_hint.abs()) + f64::MIN_POSITIVE);
        if q.err_estimate <= floor {
            return Ok(q.value);
        }
        last = Some(q);
    }
    let q = last.unwrap();
    Err(Error::Convergence(format!(
        "segment integral on [{a}, {b}] stalled at err {:.3e} (value {:.6e})",
        q.err_estimate, q.value
    )))
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9); only used for Jacobi rule
/// normalization so double precision is ample.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}
