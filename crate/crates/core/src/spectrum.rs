//! Bound states of `H^{CD}` in the gap `(-m, m)`.
//!
//! `λ` is an eigenvalue iff `D M(λ+i0) - C` is singular, with multiplicity
//! `dim ker(D M(λ+i0) - C)`. Substituting `t = sqrt((m-λ)/(m+λ))` turns
//! `M(λ+i0)` into `diag(-t, 1/t)/2`, and the singularity condition into a
//! quadratic in `t` for each class of pair.

use crate::algebra::{Mat2C, Vec2};
use crate::error::{Error, Result};
use crate::extensions::{classify, BoundaryPair, PairClass};
use crate::tol;
use crate::weyl_green::{gamma_vectors, EnergyPoint};

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    pub t_root: f64,
    pub kernel_basis: Vec<Vec2>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Eigenvalue>,
    pub total_count: usize,
    pub pair_class: PairClass,
}

pub fn lambda_of_t(t: f64, m: f64) -> f64 {
    m * (1.0 - t * t) / (1.0 + t * t)
}

pub fn t_of_lambda(lambda: f64, m: f64) -> f64 {
    ((m - lambda) / (m + lambda)).sqrt()
}

/// `D M(λ+i0) - C` written in the `t` variable.
pub fn gap_matrix(pair: &BoundaryPair, t: f64) -> Mat2C {
    pair.d * Mat2C::diag_real(-0.5 * t, 0.5 / t) - pair.c
}

/// Positive roots of `a t^2 + b t + c = 0`, a double root reported once.
fn positive_roots(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::DegenerateQuadratic);
    }
    let (a, b, c) = (a / scale, b / scale, c / scale);
    let tiny = 1e-14;
    let roots = if a.abs() <= tiny {
        if b.abs() <= tiny {
            return Ok(Vec::new());
        }
        vec![-c / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        let disc_tol = 1e-12 * (b * b + (4.0 * a * c).abs());
        if disc < -disc_tol {
            Vec::new()
        } else if disc <= disc_tol {
            vec![-b / (2.0 * a)]
        } else {
            // cancellation-free pair of roots
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
            vec![r1, r2]
        }
    };
    let mut out: Vec<f64> = roots
        .into_iter()
        .filter(|t| *t > 0.0 && t.is_finite())
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(out)
}

/// Coefficients `(a, b, c)` of the case equation `a t^2 + b t + c = 0`.
pub fn case_quadratic(class: &PairClass) -> Option<(f64, f64, f64)> {
    match class {
        PairClass::InvertibleD { l11, l12, l22, .. } => {
            let det = l11 * l22 - l12.norm_sqr();
            Some((0.5 * l22, det - 0.25, -0.5 * l11))
        }
        PairClass::RankOneD { p, ell, .. } => Some((p[1].norm_sqr(), 2.0 * ell, -p[0].norm_sqr())),
        PairClass::ZeroD => None,
    }
}

/// Number of eigenvalues (with multiplicity) predicted directly from the
/// entries of `D^{-1} C`, or from `ker D` and `tr(C D^*)`.
pub fn predicted_count(class: &PairClass, zero_tol: f64) -> usize {
    match class {
        PairClass::InvertibleD { l11, l22, .. } => {
            if *l11 < 0.0 && *l22 > 0.0 {
                2
            } else if *l11 >= 0.0 && *l22 <= 0.0 {
                0
            } else {
                1
            }
        }
        PairClass::RankOneD {
            p, trace_cd_star, ..
        } => {
            let p1_zero = p[0].norm() <= zero_tol;
            let p2_zero = p[1].norm() <= zero_tol;
            let one = (!p1_zero && !p2_zero)
                || (p2_zero && *trace_cd_star > 0.0)
                || (p1_zero && *trace_cd_star < 0.0);
            usize::from(one)
        }
        PairClass::ZeroD => 0,
    }
}

pub fn eigenvalues_closed_form(pair: &BoundaryPair) -> Result<SpectralReport> {
    eigenvalues_closed_form_with(pair, tol::CLASS)
}

/// As [`eigenvalues_closed_form`] with an explicit classification tolerance.
pub fn eigenvalues_closed_form_with(pair: &BoundaryPair, class_tol: f64) -> Result<SpectralReport> {
    let class = classify(pair, class_tol)?;
    let m = pair.mass;
    let mut eigenvalues = Vec::new();
    if let Some((a, b, c)) = case_quadratic(&class) {
        let edge = tol::THRESHOLD_EDGE * m;
        let kernel_tol = tol::KERNEL * pair.scale();
        for t in positive_roots(a, b, c)? {
            let lambda = lambda_of_t(t, m);
            if !(lambda.abs() < m - edge) {
                continue;
            }
            let kernel_basis = gap_matrix(pair, t).kernel_basis(kernel_tol, true);
            eigenvalues.push(Eigenvalue {
                lambda,
                multiplicity: kernel_basis.len(),
                t_root: t,
                kernel_basis,
            });
        }
    }
    eigenvalues.sort_by(|x, y| x.lambda.partial_cmp(&y.lambda).unwrap());
    let total_count = eigenvalues.iter().map(|e| e.multiplicity).sum();
    Ok(SpectralReport {
        eigenvalues,
        total_count,
        pair_class: class,
    })
}

const SCAN_HALF_WIDTH: f64 = 15.0;
const SCAN_ACCEPT: f64 = 1e-10;

/// Scale-free smallest singular value of `D M - C` at `t = e^u`.
fn scan_objective(pair: &BoundaryPair, u: f64) -> f64 {
    let (s_max, s_min) = gap_matrix(pair, u.exp()).singular_values();
    s_min / s_max.max(pair.scale())
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Gap energies where `D M(λ+i0) - C` becomes singular, located by a
/// singular-value scan in `u = ln t` followed by golden-section refinement.
/// Independent of the case equations; cannot resolve multiplicity.
pub fn eigenvalue_oracle_scan(pair: &BoundaryPair, grid_points: usize) -> Vec<f64> {
    let n = grid_points.max(1000);
    let m = pair.mass;
    let du = 2.0 * SCAN_HALF_WIDTH / (n - 1) as f64;
    let us: Vec<f64> = (0..n).map(|i| -SCAN_HALF_WIDTH + i as f64 * du).collect();
    let vals: Vec<f64> = us.iter().map(|u| scan_objective(pair, *u)).collect();
    let mut found: Vec<f64> = Vec::new();
    for i in 1..n - 1 {
        if !(vals[i] < vals[i - 1] && vals[i] <= vals[i + 1]) {
            continue;
        }
        let u = golden_section(|u| scan_objective(pair, u), us[i - 1], us[i + 1]);
        if scan_objective(pair, u) < SCAN_ACCEPT {
            found.push(lambda_of_t(u.exp(), m));
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());
    found.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * m);
    found
}

/// Normalized eigenfunction `γ(λ) ξ / ||γ(λ) ξ||`.
#[derive(Clone, Debug)]
pub struct Eigenfunction {
    pub lambda: f64,
    pub xi: Vec2,
    pub mass: f64,
    pub norm: f64,
}

impl Eigenfunction {
    pub fn new(pair: &BoundaryPair, eig: &Eigenvalue, kernel_index: usize) -> Result<Self> {
        let xi = *eig.kernel_basis.get(kernel_index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "kernel index {kernel_index} >= multiplicity {}",
                eig.multiplicity
            ))
        })?;
        let mut f = Self {
            lambda: eig.lambda,
            xi,
            mass: pair.mass,
            norm: 1.0,
        };
        f.norm = f.l2_norm_quadrature()?.sqrt();
        Ok(f)
    }

    /// Decay rate `sqrt(m^2 - λ^2)`.
    pub fn decay_rate(&self) -> f64 {
        ((self.mass - self.lambda) * (self.mass + self.lambda)).sqrt()
    }

    fn raw(&self, x: f64) -> Result<Vec2> {
        let g = gamma_vectors(EnergyPoint::plus(self.lambda), self.mass, x)?;
        Ok(g.combine(self.xi))
    }

    pub fn eval(&self, x: f64) -> Result<Vec2> {
        let v = self.raw(x)?;
        Ok([v[0] / self.norm, v[1] / self.norm])
    }

    /// Squared L^2 norm by adaptive Simpson on `|x| <= 40/κ`; the neglected
    /// tail is below `e^{-80}` relative.
    fn l2_norm_quadrature(&self) -> Result<f64> {
        let kappa = self.decay_rate();
        let width = 40.0 / kappa;
        // one-sided limits at the origin
        let density = |x: f64, side: f64| -> f64 {
            let v = self.raw(side * x.max(f64::MIN_POSITIVE)).expect("x != 0");
            v[0].norm_sqr() + v[1].norm_sqr()
        };
        let right = adaptive_simpson(&|x| density(x, 1.0), 0.0, width, 1e-14);
        let left = adaptive_simpson(&|x| density(x, -1.0), 0.0, width, 1e-14);
        let total = right + left;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidInput("eigenfunction has zero norm".into()));
        }
        Ok(total)
    }
}

pub fn eigenfunction(
    pair: &BoundaryPair,
    eig: &Eigenvalue,
    kernel_index: usize,
    x: f64,
) -> Result<Vec2> {
    Eigenfunction::new(pair, eig, kernel_index)?.eval(x)
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Mat2C;

    fn pair(c: Mat2C, d: Mat2C) -> BoundaryPair {
        BoundaryPair::new(c, d, 1.0).unwrap()
    }

    #[test]
    fn double_eigenvalue_at_zero() {
        let p = pair(Mat2C::diag_real(-0.5, 0.5), Mat2C::identity());
        let rep = eigenvalues_closed_form(&p).unwrap();
        assert_eq!(rep.total_count, 2);
        assert_eq!(rep.eigenvalues.len(), 1);
        let e = &rep.eigenvalues[0];
        assert!(e.lambda.abs() < 1e-12);
        assert!((e.t_root - 1.0).abs() < 1e-12);
        assert_eq!(e.multiplicity, 2);
        let scan = eigenvalue_oracle_scan(&p, 2000);
        assert_eq!(scan.len(), 1);
        assert!(scan[0].abs() < 1e-8);
    }

    #[test]
    fn kirchhoff_pair_has_no_bound_states() {
        let p = pair(Mat2C::zero(), Mat2C::identity());
        let rep = eigenvalues_closed_form(&p).unwrap();
        assert_eq!(rep.total_count, 0);
        assert!(eigenvalue_oracle_scan(&p, 1000).is_empty());
    }

    #[test]
    fn rank_one_example() {
        let p = pair(Mat2C::diag_real(-1.0, 1.0), Mat2C::diag_real(1.0, 0.0));
        let rep = eigenvalues_closed_form(&p).unwrap();
        assert_eq!(rep.total_count, 1);
        let e = &rep.eigenvalues[0];
        assert!((e.t_root - 2.0).abs() < 1e-14);
        assert!((e.lambda + 0.6).abs() < 1e-14);
        assert_eq!(e.multiplicity, 1);
        // reduced scalar equation -t/2 - ell = 0 with ell = -1
        let scan = eigenvalue_oracle_scan(&p, 1000);
        assert_eq!(scan.len(), 1);
        assert!((scan[0] + 0.6).abs() < 1e-8);
        assert_eq!(predicted_count(&rep.pair_class, tol::CLASS), 1);
    }

    #[test]
    fn free_pair_has_no_bound_states() {
        let p = BoundaryPair::free(1.0);
        let rep = eigenvalues_closed_form(&p).unwrap();
        assert_eq!(rep.total_count, 0);
        assert_eq!(rep.pair_class, PairClass::ZeroD);
        assert!(eigenvalue_oracle_scan(&p, 1000).is_empty());
    }

    #[test]
    fn linear_case_when_l22_vanishes() {
        // l22 = 0, l11 < 0: one eigenvalue
        let p = pair(Mat2C::diag_real(-0.5, 0.0), Mat2C::identity());
        let rep = eigenvalues_closed_form(&p).unwrap();
        assert_eq!(rep.total_count, 1);
        assert!(rep.eigenvalues[0].lambda.abs() < 1e-14);
        // l22 = 0, l11 > 0: none
        let p = pair(Mat2C::diag_real(0.5, 0.0), Mat2C::identity());
        assert_eq!(eigenvalues_closed_form(&p).unwrap().total_count, 0);
    }

    #[test]
    fn eigenfunction_decay_and_norm() {
        let p = pair(Mat2C::diag_real(-0.5, 0.5), Mat2C::identity());
        let rep = eigenvalues_closed_form(&p).unwrap();
        let e = &rep.eigenvalues[0];
        for k in 0..2 {
            let f = Eigenfunction::new(&p, e, k).unwrap();
            assert!((f.decay_rate() - 1.0).abs() < 1e-12);
            let a = f.eval(2.0).unwrap();
            let b = f.eval(3.0).unwrap();
            let ratio = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt()
                / (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
            assert!((ratio - (-1f64).exp()).abs() < 1e-12);
            // |raw(x)|^2 decays like e^{-2κ|x|} on each half-line
            let kappa = f.decay_rate();
            let sq = |v: Vec2| v[0].norm_sqr() + v[1].norm_sqr();
            let analytic = (sq(f.raw(1.0).unwrap()) + sq(f.raw(-1.0).unwrap()))
                * (2.0 * kappa).exp()
                / (2.0 * kappa);
            assert!((f.norm * f.norm - analytic).abs() < 1e-12 * analytic);
        }
        assert!(eigenfunction(&p, e, 2, 1.0).is_err());
        assert!(matches!(
            eigenfunction(&p, e, 0, 0.0),
            Err(Error::OriginEvaluation)
        ));
    }

    #[test]
    fn quadrature_matches_exponential_integral() {
        let v = adaptive_simpson(&|x: f64| (-2.0 * x).exp(), 0.0, 20.0, 1e-14);
        assert!((v - 0.5 * (1.0 - (-40f64).exp())).abs() < 1e-13);
    }
}
