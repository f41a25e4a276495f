//! Complete elliptic integrals in the modulus convention `K(k)`, `E(k)`
//! (not the parameter `m = k²`), by arithmetic–geometric mean iteration.

use crate::{Error, Result};
use std::f64::consts::PI;

const MAX_AGM_ITER: usize = 40;

/// Complete elliptic integral of the first kind,
/// `K(k) = ∫_0^{π/2} dt / √(1 - k² sin²t)` for modulus `k ∈ [0, 1)`.
pub fn ellint_k(k: f64) -> Result<f64> {
    if !k.is_finite() || !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!(
            "ellint_k requires modulus k in [0, 1), got {k} (K diverges at k = 1)"
        )));
    }
    let (a, _) = agm(1.0, (1.0 - k * k).sqrt());
    Ok(PI / (2.0 * a))
}

/// Complete elliptic integral of the second kind,
/// `E(k) = ∫_0^{π/2} √(1 - k² sin²t) dt` for modulus `k ∈ [0, 1]`.
pub fn ellint_e(k: f64) -> Result<f64> {
    if !k.is_finite() || !(0.0..=1.0).contains(&k) {
        return Err(Error::Domain(format!(
            "ellint_e requires modulus k in [0, 1], got {k}"
        )));
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    // E = K (1 - Σ_{n≥0} 2^{n-1} c_n²) with c_0 = k, c_{n+1} = (a_n - b_n)/2
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut sum = 0.5 * k * k;
    let mut pow2 = 0.5;
    for _ in 0..MAX_AGM_ITER {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        pow2 *= 2.0;
        sum += pow2 * c * c;
        a = an;
        b = bn;
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
    }
    Ok(PI / (2.0 * a) * (1.0 - sum))
}

fn agm(mut a: f64, mut b: f64) -> (f64, usize) {
    let mut iters = 0;
    for _ in 0..MAX_AGM_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        iters += 1;
        if (an - bn).abs() <= f64::EPSILON * an {
            return (an, iters);
        }
        a = an;
        b = bn;
    }
    (0.5 * (a + b), iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn values_at_zero_modulus() {
        assert_relative_eq!(ellint_k(0.0).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(ellint_e(0.0).unwrap(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn lemniscatic_value() {
        // K(1/√2) = Γ(1/4)² / (4 √π)
        let v = ellint_k(1.0 / 2f64.sqrt()).unwrap();
        assert_relative_eq!(v, 1.854_074_677_301_372, epsilon = 1e-14);
    }

    #[test]
    fn legendre_relation() {
        // E(k)K(k') + E(k')K(k) - K(k)K(k') = π/2 at k = 0.6
        let k: f64 = 0.6;
        let kp = (1.0 - k * k).sqrt();
        let lhs = ellint_e(k).unwrap() * ellint_k(kp).unwrap()
            + ellint_e(kp).unwrap() * ellint_k(k).unwrap()
            - ellint_k(k).unwrap() * ellint_k(kp).unwrap();
        assert_relative_eq!(lhs, PI / 2.0, epsilon = 1e-14);
    }

    use crate::quad::test_support::adaptive_simpson;

    #[test]
    fn against_defining_integral() {
        // AGM matches adaptive refinement of the defining integrals to 1e-12
        for k in [0.1, 0.5, 0.9, 0.99] {
            let kk = ellint_k(k).unwrap();
            let ee = ellint_e(k).unwrap();
            let kq = adaptive_simpson(
                &|t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
                0.0,
                PI / 2.0,
                1e-14,
            );
            let eq = adaptive_simpson(
                &|t: f64| (1.0 - k * k * t.sin().powi(2)).sqrt(),
                0.0,
                PI / 2.0,
                1e-14,
            );
            assert_relative_eq!(kk, kq, epsilon = 1e-12);
            assert_relative_eq!(ee, eq, epsilon = 1e-12);
        }
    }

    #[test]
    fn e_at_unit_modulus() {
        assert_eq!(ellint_e(1.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(ellint_k(1.0).is_err());
        assert!(ellint_k(-0.1).is_err());
        assert!(ellint_e(1.0 + 1e-12).is_err());
        assert!(ellint_e(f64::NAN).is_err());
    }
}
