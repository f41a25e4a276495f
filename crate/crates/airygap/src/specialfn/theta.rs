//! Genus-g Riemann theta function
//! `θ(z; τ) = Σ_{n ∈ Z^g} exp(iπ(nᵀτn + 2nᵀz))`
//! as a truncated lattice sum, with term-by-term derivatives at genus 1.

use crate::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

const MAX_RADIUS: usize = 400;

/// Evaluation state for a fixed period matrix: the truncation radius is
/// derived from the requested tolerance and `λ_min(Im τ)` once, at
/// construction.
///
/// Summation runs over the half-lattice in a fixed lexicographic order,
/// adding each `n`, `−n` pair together before accumulation, so `θ(−z)`
/// is bit-identical to `θ(z)` and results are deterministic.
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    tau: DMatrix<Complex64>,
    im_tau: DMatrix<f64>,
    tol: f64,
    radius: i64,
    lambda_min: f64,
    purely_imaginary: bool,
    half_lattice: Vec<Vec<i64>>,
}

impl ThetaEvaluator {
    /// Validate `τ` (symmetric within `tol`, positive definite imaginary
    /// part) and pick the truncation radius: the discarded tail over the
    /// shells `|n|_∞ = m > radius` is bounded by
    /// `Σ_m ((2m+1)^g − (2m−1)^g) e^{−π λ_min m²}`, a geometrically
    /// decaying series with ratio ≤ `e^{−π λ_min}`, and the radius is the
    /// smallest one pushing that bound below `tol` (plus a two-shell
    /// safety margin).
    pub fn new(tau: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        let g = tau.nrows();
        if g == 0 || tau.ncols() != g {
            return Err(Error::Domain(format!(
                "period matrix must be square and nonempty, got {}x{}",
                tau.nrows(),
                tau.ncols()
            )));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Domain(format!("theta tolerance must be positive, got {tol}")));
        }
        let mut max_entry = 0.0f64;
        let mut sym_err = 0.0f64;
        let mut max_re = 0.0f64;
        for j in 0..g {
            for k in 0..g {
                let t = tau[(j, k)];
                if !t.re.is_finite() || !t.im.is_finite() {
                    return Err(Error::Domain("period matrix has non-finite entries".into()));
                }
                max_entry = max_entry.max(t.norm());
                sym_err = sym_err.max((t - tau[(k, j)]).norm());
                max_re = max_re.max(t.re.abs());
            }
        }
        if sym_err > tol.max(1e-12) * max_entry.max(1.0) {
            return Err(Error::Domain(format!(
                "period matrix not symmetric: max asymmetry {sym_err:.3e}"
            )));
        }
        let im_tau = DMatrix::from_fn(g, g, |j, k| 0.5 * (tau[(j, k)].im + tau[(k, j)].im));
        let eig = SymmetricEigen::new(im_tau.clone());
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lambda_min > 0.0) {
            return Err(Error::Domain(format!(
                "imaginary part of the period matrix is not positive definite (lambda_min = {lambda_min:.3e})"
            )));
        }
        let radius = Self::pick_radius(g, lambda_min, tol)?;
        let half_lattice = half_lattice(g, radius);
        Ok(ThetaEvaluator {
            tau,
            im_tau,
            tol,
            radius,
            lambda_min,
            purely_imaginary: max_re <= tol.max(1e-12) * max_entry.max(1.0),
            half_lattice,
        })
    }

    fn pick_radius(g: usize, lambda_min: f64, tol: f64) -> Result<i64> {
        let shell = |m: f64| -> f64 {
            let count = (2.0 * m + 1.0).powi(g as i32) - (2.0 * m - 1.0).powi(g as i32);
            count * (-PI * lambda_min * m * m).exp()
        };
        for r in 1..=MAX_RADIUS {
            let mut tail = 0.0;
            let mut m = (r + 1) as f64;
            loop {
                let t = shell(m);
                tail += t;
                if t < tol * 1e-3 || m > 4.0 * MAX_RADIUS as f64 {
                    break;
                }
                m += 1.0;
            }
            if tail < 0.5 * tol {
                return Ok((r + 2) as i64);
            }
        }
        Err(Error::Domain(format!(
            "cannot reach tolerance {tol:.3e} with lattice radius <= {MAX_RADIUS} (lambda_min = {lambda_min:.3e})"
        )))
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn tau(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    /// θ(z) for a complex argument vector of length g.
    ///
    /// For purely imaginary τ and real z the lattice sum is real, and the
    /// returned value has an exactly zero imaginary component.
    pub fn theta(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_arg(z)?;
        if self.purely_imaginary && z.iter().all(|c| c.im == 0.0) {
            let zr: Vec<f64> = z.iter().map(|c| c.re).collect();
            return Ok(Complex64::new(self.theta_real_unchecked(&zr), 0.0));
        }
        let mut total = Complex64::new(1.0, 0.0);
        for n in &self.half_lattice {
            let (w, nz) = self.quadratic_and_linear(n, z);
            let e_plus = (Complex64::i() * PI * w + Complex64::i() * 2.0 * PI * nz).exp();
            let e_minus = (Complex64::i() * PI * w - Complex64::i() * 2.0 * PI * nz).exp();
            total += e_plus + e_minus;
        }
        Ok(total)
    }

    /// θ(z) for real z; requires purely imaginary τ (the only case where
    /// the sum is guaranteed real).
    pub fn theta_real(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.genus() {
            return Err(Error::Domain(format!(
                "theta argument length {} does not match genus {}",
                z.len(),
                self.genus()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("theta argument must be finite".into()));
        }
        if !self.purely_imaginary {
            return Err(Error::Domain(
                "theta_real requires a purely imaginary period matrix".into(),
            ));
        }
        Ok(self.theta_real_unchecked(z))
    }

    fn theta_real_unchecked(&self, z: &[f64]) -> f64 {
        let mut total = 1.0;
        for n in &self.half_lattice {
            let mut q = 0.0; // n' Im(tau) n
            let mut nz = 0.0;
            for (j, &nj) in n.iter().enumerate() {
                nz += nj as f64 * z[j];
                let mut row = 0.0;
                for (k, &nk) in n.iter().enumerate() {
                    row += self.im_tau[(j, k)] * nk as f64;
                }
                q += nj as f64 * row;
            }
            total += 2.0 * (-PI * q).exp() * (2.0 * PI * nz).cos();
        }
        total
    }

    /// k-th derivative of the genus-1 theta function in z, term-by-term:
    /// `θ^(k)(z) = Σ_n (2πin)^k exp(iπ(n²τ + 2nz))`. Supported for k ≤ 3.
    pub fn theta_derivs_g1(&self, z: Complex64, order: u32) -> Result<Complex64> {
        if self.genus() != 1 {
            return Err(Error::Domain(format!(
                "theta_derivs_g1 requires genus 1, evaluator has genus {}",
                self.genus()
            )));
        }
        if order > 3 {
            return Err(Error::Unsupported(format!(
                "theta derivatives of order {order} > 3 are not supported"
            )));
        }
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain("theta argument must be finite".into()));
        }
        let tau = self.tau[(0, 0)];
        let mut total = if order == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        for m in 1..=self.radius {
            let n = m as f64;
            let q = (Complex64::i() * PI * n * n * tau).exp();
            let factor_plus = (Complex64::i() * 2.0 * PI * n).powu(order);
            let factor_minus = (-Complex64::i() * 2.0 * PI * n).powu(order);
            let e_plus = (Complex64::i() * 2.0 * PI * n * z).exp();
            let e_minus = (-Complex64::i() * 2.0 * PI * n * z).exp();
            total += q * (factor_plus * e_plus + factor_minus * e_minus);
        }
        Ok(total)
    }

    fn check_arg(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.genus() {
            return Err(Error::Domain(format!(
                "theta argument length {} does not match genus {}",
                z.len(),
                self.genus()
            )));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("theta argument must be finite".into()));
        }
        Ok(())
    }

    fn quadratic_and_linear(&self, n: &[i64], z: &[Complex64]) -> (Complex64, Complex64) {
        let g = self.genus();
        let mut w = Complex64::new(0.0, 0.0);
        let mut nz = Complex64::new(0.0, 0.0);
        for j in 0..g {
            let nj = n[j] as f64;
            nz += nj * z[j];
            let mut row = Complex64::new(0.0, 0.0);
            for (k, &nk) in n.iter().enumerate() {
                row += self.tau[(j, k)] * nk as f64;
            }
            w += nj * row;
        }
        (w, nz)
    }
}

/// All lattice points in `{-r..r}^g` whose first nonzero coordinate is
/// positive, in lexicographic order: one representative per `{n, -n}` pair.
fn half_lattice(g: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut n = vec![-r; g];
    loop {
        if n.iter().find(|&&v| v != 0).map(|&v| v > 0).unwrap_or(false) {
            out.push(n.clone());
        }
        // odometer increment
        let mut j = g;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if n[j] < r {
                n[j] += 1;
                for v in n.iter_mut().skip(j + 1) {
                    *v = -r;
                }
                break;
            }
        }
    }
}

/// Convenience: a genus-1 evaluator from the single entry τ ∈ C.
#[cfg(test)]
pub(crate) fn genus1_evaluator(tau: Complex64, tol: f64) -> Result<ThetaEvaluator> {
    ThetaEvaluator::new(DMatrix::from_element(1, 1, tau), tol)
}
