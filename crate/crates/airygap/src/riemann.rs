//! Hyperelliptic-surface numerics for `√𝓡(z) = Π_{j=0}^{2g} √(z − x_j)`.
//!
//! Terminology used throughout: the branch points are ordered
//! `x₀ > x₁ > … > x_{2g}`. The *gaps* are the intervals
//! `(x_{2i}, x_{2i−1})`, `i = 1..g`, where `√𝓡` is analytic and real; the
//! *bands* are the cuts `(x_{2b−1}, x_{2b−2})`, `b = 1..g`, plus
//! `(−∞, x_{2g}]`, where boundary values from above are purely imaginary.
//!
//! Sign tracking: `√𝓡 > 0` on `(x₀, ∞)`; each branch point crossed moving
//! left multiplies the boundary value from above by `i`. Hence on gap `i`
//! (2i crossings) the sign is `(−1)^i`, and on band `b` (2b−1 crossings)
//! the boundary value from above is `i(−1)^{b−1} √|𝓡|`.
//!
//! A-cycles follow `∮_{A_j} = 2 Σ_{l=j}^{g} ∫_{x_{2l−1}}^{x_{2l}}`, i.e.
//! `𝔸 = −2 U M` with `U` the upper-triangular all-ones matrix and `M` the
//! gap moment matrix. B-cycle `j` is a loop around band `j` alone;
//! contracted onto the cut it gives `τ_{jk} = −2 ∫_{band j} ω_{k,+}`, which
//! is purely imaginary with `Im τ_{jk} = 2(−1)^{j−1} ∫_{band j} P_k/√|𝓡|`.

use crate::quad::{self, EndpointSingularity};
use crate::specialfn::{ellint_k, ThetaEvaluator};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Relative separation below which two branch points are considered
/// coincident and the surface degenerate.
const DEGENERACY_REL_TOL: f64 = 1e-8;

/// Condition-number ceiling for the A-cycle matrix.
const MAX_CONDITION: f64 = 1e12;

/// Symmetry tolerance (relative to scale) for the period matrix.
const TAU_SYMMETRY_TOL: f64 = 1e-8;

/// Branch points of the genus-g surface: `x0` and the gap endpoints
/// `x₁ > x₂ > … > x_{2g}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoints {
    x0: f64,
    xs: Vec<f64>,
}

impl BranchPoints {
    /// `xs` holds `x₁, …, x_{2g}` in strictly decreasing order, and `x0`
    /// must satisfy `x0 > max(x₁, 0)`. Configurations with two branch
    /// points closer than `1e-8` relative to the scale are rejected (the
    /// surface degenerates and τ diverges).
    pub fn new(x0: f64, xs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() % 2 != 0 {
            return Err(Error::Domain(format!(
                "need an even, positive number of gap endpoints, got {}",
                xs.len()
            )));
        }
        if !x0.is_finite() || xs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("branch points must be finite".into()));
        }
        let mut all = Vec::with_capacity(xs.len() + 1);
        all.push(x0);
        all.extend_from_slice(&xs);
        let scale = all.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for w in all.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Domain(format!(
                    "branch points must be strictly decreasing: {} >= {}",
                    w[1], w[0]
                )));
            }
            if (w[0] - w[1]).abs() < DEGENERACY_REL_TOL * scale {
                return Err(Error::Degenerate(format!(
                    "branch points {} and {} are within 1e-8 of each other (relative to scale {scale:.3e})",
                    w[1], w[0]
                )));
            }
        }
        if x0 <= xs[0].max(0.0) {
            return Err(Error::Domain(format!(
                "x0 = {x0} must exceed max(x1, 0) = {}",
                xs[0].max(0.0)
            )));
        }
        Ok(BranchPoints { x0, xs })
    }

    pub fn genus(&self) -> usize {
        self.xs.len() / 2
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Branch point `x_j` with the ordering convention above, `j = 0..=2g`.
    pub fn point(&self, j: usize) -> f64 {
        if j == 0 {
            self.x0
        } else {
            self.xs[j - 1]
        }
    }

    /// Gap endpoints `x₁, …, x_{2g}`.
    pub fn gap_endpoints(&self) -> &[f64] {
        &self.xs
    }

    /// Gap `i = 1..=g` as `(lo, hi) = (x_{2i}, x_{2i−1})`.
    pub fn gap(&self, i: usize) -> (f64, f64) {
        (self.point(2 * i), self.point(2 * i - 1))
    }

    /// Band `b = 1..=g` as `(lo, hi) = (x_{2b−1}, x_{2b−2})`.
    pub fn band(&self, b: usize) -> (f64, f64) {
        (self.point(2 * b - 1), self.point(2 * b - 2))
    }

    pub fn scale(&self) -> f64 {
        self.x0
            .abs()
            .max(self.xs.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    fn all_points(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.x0).chain(self.xs.iter().copied())
    }

    /// `√(Π_{j∉skip} |s − x_j|)` — the smooth positive factor left after
    /// the two adjacent endpoint roots are absorbed into the quadrature
    /// weight.
    fn sqrt_abs_rest(&self, s: f64, skip: (usize, usize)) -> f64 {
        let mut p = 1.0;
        for (j, x) in self.all_points().enumerate() {
            if j != skip.0 && j != skip.1 {
                p *= (s - x).abs();
            }
        }
        p.sqrt()
    }
}

/// Which sheet of the surface to evaluate on; the second sheet negates the
/// square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    /// `√𝓡 > 0` on `(x₀, ∞)`.
    UpperFirst,
    Lower,
}

/// `√𝓡(z)` as the product of principal-branch square roots, on the chosen
/// sheet. For real `z` on a cut this returns the boundary value from above
/// (an argument with `im == +0.0` lands on that side automatically).
/// Exactly at a branch point the value is 0.
pub fn sqrt_r(z: Complex64, bp: &BranchPoints, sheet: Sheet) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for x in bp.all_points() {
        p *= (z - x).sqrt();
    }
    match sheet {
        Sheet::UpperFirst => p,
        Sheet::Lower => -p,
    }
}

/// Real value of `√𝓡` on gap `i` (sign `(−1)^i` times `√|𝓡|`).
#[cfg(test)]
fn sqrt_r_gap(bp: &BranchPoints, i: usize, s: f64) -> f64 {
    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
    let (lo, hi) = bp.gap(i);
    sign * ((hi - s) * (s - lo)).sqrt() * bp.sqrt_abs_rest(s, (2 * i - 1, 2 * i))
}

/// Moment data of the system: `M[i][j] = ∫_{gap i} s^{j−1}/√𝓡 ds` and
/// `m̃[i] = −∫_{gap i} (q_{g+1} s^{g+1} + q_g s^g)/√𝓡 ds` with
/// `q_{g+1} = −1`, `q_g = ½ Σ_{j=0}^{2g} x_j`, both to relative accuracy
/// 1e−10 or better (order escalation, refinement-delta controlled).
pub fn moments(bp: &BranchPoints) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let g = bp.genus();
    let qg = 0.5 * bp.all_points().sum::<f64>();
    let mut m = DMatrix::zeros(g, g);
    let mut mt = DVector::zeros(g);
    for i in 1..=g {
        let (lo, hi) = bp.gap(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let skip = (2 * i - 1, 2 * i);
        for j in 1..=g {
            let v = quad::escalate(
                |s| s.powi(j as i32 - 1) / bp.sqrt_abs_rest(s, skip),
                lo,
                hi,
                EndpointSingularity::Both,
                quad::SEGMENT_REL_TOL,
                0.0,
            )?;
            m[(i - 1, j - 1)] = sign * v;
        }
        let v = quad::escalate(
            |s| (s.powi(g as i32 + 1) - qg * s.powi(g as i32)) / bp.sqrt_abs_rest(s, skip),
            lo,
            hi,
            EndpointSingularity::Both,
            quad::SEGMENT_REL_TOL,
            0.0,
        )?;
        mt[i - 1] = sign * v;
    }
    Ok((m, mt))
}

/// The A-cycle matrix `𝔸_{jk} = 2 Σ_{l=j}^{g} ∫_{x_{2l−1}}^{x_{2l}}
/// s^{k−1}/√𝓡 ds = −2 Σ_{l≥j} M_{lk}`.
pub fn a_cycle_matrix(bp: &BranchPoints) -> Result<DMatrix<f64>> {
    let (m, _) = moments(bp)?;
    a_cycle_from_moments(&m)
}

pub(crate) fn a_cycle_from_moments(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let g = m.nrows();
    let mut a = DMatrix::zeros(g, g);
    for j in 0..g {
        for k in 0..g {
            let mut acc = 0.0;
            for l in j..g {
                acc += m[(l, k)];
            }
            a[(j, k)] = -2.0 * acc;
        }
    }
    let cond = condition_number(&a);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::Degenerate(format!(
            "A-cycle matrix is numerically singular (condition number {cond:.3e})"
        )));
    }
    Ok(a)
}

pub(crate) fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    smax / smin
}

/// Period matrix `τ_{jk} = ∮_{B_j} ω_k`, with
/// `(ω₁ … ω_g) = (dz/√𝓡)(1, z, …, z^{g−1}) 𝔸^{−1}` and `B_j` a loop
/// around band `j`. Purely imaginary; symmetrized on return, with symmetry
/// deviation and positive definiteness checked. If `Im τ` comes out
/// negative definite the global B orientation is flipped (only the
/// positive-definite orientation is canonical); an indefinite result is an
/// error.
pub fn period_matrix(bp: &BranchPoints, a: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let g = bp.genus();
    if a.nrows() != g || a.ncols() != g {
        return Err(Error::Domain("A-cycle matrix has wrong dimensions".into()));
    }
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("A-cycle matrix is not invertible".into()))?;
    // Im τ_{jk} = 2 (−1)^{j−1} ∫_{band j} P_k(s)/√|𝓡| ds
    let mut t = DMatrix::zeros(g, g);
    for j in 1..=g {
        let (lo, hi) = bp.band(j);
        let skip = (2 * j - 1, 2 * j - 2);
        let band_sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        for k in 1..=g {
            let poly = |s: f64| {
                let mut acc = 0.0;
                for i in (0..g).rev() {
                    acc = acc * s + a_inv[(i, k - 1)];
                }
                acc
            };
            let v = quad::escalate(
                |s| poly(s) / bp.sqrt_abs_rest(s, skip),
                lo,
                hi,
                EndpointSingularity::Both,
                quad::SEGMENT_REL_TOL,
                0.0,
            )?;
            t[(j - 1, k - 1)] = 2.0 * band_sign * v;
        }
    }
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let sym_err = (0..g)
        .flat_map(|j| (0..g).map(move |k| (j, k)))
        .fold(0.0f64, |m, (j, k)| m.max((t[(j, k)] - t[(k, j)]).abs()));
    if sym_err > TAU_SYMMETRY_TOL * scale {
        return Err(Error::InconsistentHomology(format!(
            "period matrix asymmetry {sym_err:.3e} exceeds {TAU_SYMMETRY_TOL:.0e} (scale {scale:.3e})"
        )));
    }
    let mut t_sym = DMatrix::from_fn(g, g, |j, k| 0.5 * (t[(j, k)] + t[(k, j)]));
    let eig = SymmetricEigen::new(t_sym.clone());
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_eig < 0.0 {
        t_sym.neg_mut();
    } else if min_eig <= 0.0 {
        return Err(Error::InconsistentHomology(format!(
            "Im tau is indefinite (eigenvalues in [{min_eig:.3e}, {max_eig:.3e}])"
        )));
    }
    Ok(DMatrix::from_fn(g, g, |j, k| {
        Complex64::new(0.0, t_sym[(j, k)])
    }))
}

/// Borrowed view of the surface data needed by [`omega_frequencies`]; the
/// owned struct in `asympt` converts into this.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceDataParts<'a> {
    pub bp: &'a BranchPoints,
    /// `q_0, …, q_{g+1}` with `q_{g+1} = −1`.
    pub q: &'a [f64],
}

/// Frequencies `Ω_j = 2i ∫_{x_{2j+1}}^{x_{2j}} q(ξ)/√𝓡₊(ξ) dξ`,
/// `j = 0..g−1`, evaluated as `2(−1)^j ∫_{band j+1} q/√|𝓡| dξ`. All must
/// come out positive; a nonpositive frequency means the (x₀, q) solve is
/// inconsistent.
pub fn omega_frequencies(sd: &SurfaceDataParts<'_>) -> Result<Vec<f64>> {
    let bp = sd.bp;
    let g = bp.genus();
    if sd.q.len() != g + 2 {
        return Err(Error::Domain(format!(
            "coefficient vector must have length g+2 = {}, got {}",
            g + 2,
            sd.q.len()
        )));
    }
    let qpoly = |s: f64| {
        let mut acc = 0.0;
        for j in (0..sd.q.len()).rev() {
            acc = acc * s + sd.q[j];
        }
        acc
    };
    let mut omega = Vec::with_capacity(g);
    for j in 0..g {
        let band = j + 1;
        let (lo, hi) = bp.band(band);
        let skip = (2 * band - 1, 2 * band - 2);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let v = quad::escalate(
            |s| qpoly(s) / bp.sqrt_abs_rest(s, skip),
            lo,
            hi,
            EndpointSingularity::Both,
            quad::SEGMENT_REL_TOL,
            0.0,
        )?;
        let om = 2.0 * sign * v;
        if !(om > 0.0) {
            return Err(Error::SolverInconsistency(format!(
                "Omega_{j} = {om:.6e} is not positive"
            )));
        }
        omega.push(om);
    }
    Ok(omega)
}

/// Genus-1 Abel map `φ(x) = ∫_{x₀}^x c₀/√𝓡(s) ds` on the upper sheet for
/// `x ≥ x₀`, with `c₀ = 1/𝔸₁₁ = √(x₀−x₂)/(4K(k))`. Monotone increasing
/// from `φ(x₀) = 0` to the limit `1/2` at infinity.
///
/// The substitution `ξ = x₀ + β tan²θ`, `β = x₀ − x₂`, absorbs both the
/// endpoint singularity and the infinite tail: the θ-integrand is analytic
/// on `[0, π/2]`, so Gauss–Legendre converges spectrally even for `x = ∞`.
pub fn abel_map_g1(bp: &BranchPoints, c0: f64, x: f64) -> Result<f64> {
    if bp.genus() != 1 {
        return Err(Error::Domain(format!(
            "abel_map_g1 requires genus 1, got genus {}",
            bp.genus()
        )));
    }
    if !(x >= bp.x0()) {
        return Err(Error::Domain(format!(
            "abel_map_g1 requires x >= x0 = {}, got {x}",
            bp.x0()
        )));
    }
    let x0 = bp.x0();
    let x1 = bp.point(1);
    let x2 = bp.point(2);
    let beta = x0 - x2;
    let theta_max = if x.is_infinite() {
        std::f64::consts::FRAC_PI_2
    } else {
        (((x - x0) / beta).sqrt()).atan()
    };
    if theta_max == 0.0 {
        return Ok(0.0);
    }
    let integrand = |theta: f64| {
        let c = theta.cos();
        let s = theta.sin();
        // ξ − x0 = β tan²θ; the θ = π/2 endpoint is finite in this form:
        // sec²θ / √((ξ−x1)(ξ−x2)) = 1/√((c²(x0−x1) + β s²)(c²(x0−x2) + β s²))
        let f1 = c * c * (x0 - x1) + beta * s * s;
        let f2 = c * c * (x0 - x2) + beta * s * s;
        2.0 * c0 * beta.sqrt() / (f1 * f2).sqrt()
    };
    let mut last = f64::NAN;
    for order in [32usize, 64, 128, 256] {
        let v = quad::gl_integrate(integrand, 0.0, theta_max, order);
        if (v - last).abs() <= 1e-13 * v.abs().max(1.0) {
            return Ok(v);
        }
        last = v;
    }
    Ok(last)
}

/// Genus-1 normalization constant `c₀ = 1/𝔸₁₁`; equal to
/// `√(x₀−x₂)/(4K(k))` by the classical elliptic reduction.
pub fn abel_c0(bp: &BranchPoints, a: &DMatrix<f64>) -> Result<f64> {
    if bp.genus() != 1 {
        return Err(Error::Domain("c0 is defined for genus 1 only".into()));
    }
    Ok(1.0 / a[(0, 0)])
}

/// Elliptic modulus `k = √((x₁−x₂)/(x₀−x₂))` of a genus-1 configuration.
pub fn modulus_g1(bp: &BranchPoints) -> Result<f64> {
    if bp.genus() != 1 {
        return Err(Error::Domain("modulus is defined for genus 1 only".into()));
    }
    Ok(((bp.point(1) - bp.point(2)) / (bp.x0() - bp.point(2))).sqrt())
}

/// Genus-1 closed form of the period: `τ = i K(k′)/K(k)`.
pub fn period_g1_closed_form(bp: &BranchPoints) -> Result<Complex64> {
    let k = modulus_g1(bp)?;
    let kp = (1.0 - k * k).sqrt();
    Ok(Complex64::new(0.0, ellint_k(kp)? / ellint_k(k)?))
}

/// Theta evaluator attached to a period matrix.
pub fn theta_evaluator(tau: &DMatrix<Complex64>, tol: f64) -> Result<ThetaEvaluator> {
    ThetaEvaluator::new(tau.clone(), tol)
}
