//! 2x2 complex matrices and Laurent polynomials in one real variable.
//!
//! Every matrix in the model (boundary pair, Weyl function, scattering
//! matrices, winding-loop values) is 2x2, so inversion goes through the
//! adjugate and determinant rather than any elimination scheme.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Column vector in C^2.
pub type Vec2 = [Complex; 2];

pub const I: Complex = Complex::new(0.0, 1.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const ZERO: Complex = Complex::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Row-major 2x2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C {
    pub a11: Complex,
    pub a12: Complex,
    pub a21: Complex,
    pub a22: Complex,
}

impl Default for Mat2C {
    fn default() -> Self {
        Self::zero()
    }
}

impl Mat2C {
    pub const fn new(a11: Complex, a12: Complex, a21: Complex, a22: Complex) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Self::new(r(rows[0][0]), r(rows[0][1]), r(rows[1][0]), r(rows[1][1]))
    }

    pub fn from_rows(rows: [[Complex; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[Complex; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn scalar(z: Complex) -> Self {
        Self::new(z, ZERO, ZERO, z)
    }

    pub fn diag(d1: Complex, d2: Complex) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn diag_real(d1: f64, d2: f64) -> Self {
        Self::diag(r(d1), r(d2))
    }

    /// `u v^*` for column vectors `u`, `v`.
    pub fn outer(u: Vec2, v: Vec2) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex {
        self.rows()[i][j]
    }

    pub fn det(&self) -> Complex {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Complex {
        self.a11 + self.a22
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.a11.conj(),
            self.a21.conj(),
            self.a12.conj(),
            self.a22.conj(),
        )
    }

    pub fn adjugate(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    pub fn scale(&self, z: Complex) -> Self {
        Self::new(self.a11 * z, self.a12 * z, self.a21 * z, self.a22 * z)
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(r(x))
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Singular values `(s_max, s_min)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let f2 = self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let d = self.det().norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        let s_max = ((f2 + disc) / 2.0).sqrt();
        // s_min = |det| / s_max is far more accurate than the difference form
        let s_min = if s_max > 0.0 { d / s_max } else { 0.0 };
        (s_max, s_min)
    }

    /// Inverse through the adjugate, failing when `|det|` falls below
    /// `1e-12` times the squared entry scale.
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_with_tol(crate::tol::ARITHMETIC)
    }

    pub fn inverse_with_tol(&self, rel_tol: f64) -> Result<Self> {
        let det = self.det();
        let scale = self.max_abs();
        if !(det.norm() > rel_tol * scale * scale) {
            return Err(Error::Singular { det: det.norm() });
        }
        Ok(self.adjugate().scale(det.inv()))
    }

    /// `max |M - M^*|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |M M^* - 1|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint() - Self::identity()).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (*self - *other).max_abs() <= tol
    }

    /// Orthonormal basis of the numerical kernel: singular directions whose
    /// singular value is at most `tol`. Always returns at least the smallest
    /// right singular vector when `force_one` is set.
    pub fn kernel_basis(&self, tol: f64, force_one: bool) -> Vec<Vec2> {
        let (s_max, s_min) = self.singular_values();
        if s_max <= tol {
            return vec![[ONE, ZERO], [ZERO, ONE]];
        }
        if s_min > tol && !force_one {
            return Vec::new();
        }
        // For rank one, the kernel is orthogonal to the dominant row.
        let rows = [[self.a11, self.a12], [self.a21, self.a22]];
        let row = if vec_norm(rows[0]) >= vec_norm(rows[1]) {
            rows[0]
        } else {
            rows[1]
        };
        // A v = 0 for v orthogonal to conj(row): v = (-row[1], row[0])
        let v = [-row[1], row[0]];
        vec![normalize(v)]
    }
}

pub fn vec_norm(v: Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub fn normalize(v: Vec2) -> Vec2 {
    let n = vec_norm(v);
    [v[0] / n, v[1] / n]
}

/// `<u, v>` conjugate-linear in the first slot.
pub fn inner(u: Vec2, v: Vec2) -> Complex {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 - o.a11,
            self.a12 - o.a12,
            self.a21 - o.a21,
            self.a22 - o.a22,
        )
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        self.scale(r(-1.0))
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, o: Mat2C) -> Mat2C {
        Mat2C::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

/// Free-standing forms of the matrix predicates.
pub fn inverse2(m: &Mat2C) -> Result<Mat2C> {
    m.inverse()
}

pub fn is_hermitian(m: &Mat2C, tol: f64) -> bool {
    m.is_hermitian(tol)
}

pub fn is_unitary(m: &Mat2C, tol: f64) -> bool {
    m.is_unitary(tol)
}

pub const LAURENT_MIN_DEG: i32 = -4;
pub const LAURENT_MAX_DEG: i32 = 4;
const LAURENT_LEN: usize = (LAURENT_MAX_DEG - LAURENT_MIN_DEG + 1) as usize;

/// Complex Laurent polynomial in one real variable `s`, degrees in `[-4, 4]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaurentPoly {
    coeffs: [Complex; LAURENT_LEN],
}

impl Default for LaurentPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl LaurentPoly {
    pub const fn zero() -> Self {
        Self {
            coeffs: [ZERO; LAURENT_LEN],
        }
    }

    pub fn constant(z: Complex) -> Self {
        Self::monomial(z, 0)
    }

    /// `z * s^deg`. Panics if `deg` is outside the window.
    pub fn monomial(z: Complex, deg: i32) -> Self {
        let mut p = Self::zero();
        p.set(deg, z);
        p
    }

    pub fn coeff(&self, deg: i32) -> Complex {
        if (LAURENT_MIN_DEG..=LAURENT_MAX_DEG).contains(&deg) {
            self.coeffs[(deg - LAURENT_MIN_DEG) as usize]
        } else {
            ZERO
        }
    }

    pub fn set(&mut self, deg: i32, z: Complex) {
        assert!(
            (LAURENT_MIN_DEG..=LAURENT_MAX_DEG).contains(&deg),
            "degree {deg} outside the Laurent window"
        );
        self.coeffs[(deg - LAURENT_MIN_DEG) as usize] = z;
    }

    pub fn degrees() -> impl Iterator<Item = i32> {
        LAURENT_MIN_DEG..=LAURENT_MAX_DEG
    }

    pub fn scale(&self, z: Complex) -> Self {
        let mut p = *self;
        p.coeffs.iter_mut().for_each(|c| *c *= z);
        p
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Product, or `None` when a nonzero coefficient would leave the window.
    pub fn checked_mul(&self, o: &Self) -> Option<Self> {
        let mut p = Self::zero();
        for i in Self::degrees() {
            let a = self.coeff(i);
            if a == ZERO {
                continue;
            }
            for j in Self::degrees() {
                let b = o.coeff(j);
                if b == ZERO {
                    continue;
                }
                let d = i + j;
                if !(LAURENT_MIN_DEG..=LAURENT_MAX_DEG).contains(&d) {
                    return None;
                }
                p.coeffs[(d - LAURENT_MIN_DEG) as usize] += a * b;
            }
        }
        Some(p)
    }

    /// Direct evaluation; requires `s != 0` when negative degrees are present.
    pub fn eval(&self, s: f64) -> Complex {
        Self::degrees().map(|d| self.coeff(d) * s.powi(d)).sum()
    }

    /// `s^shift * p(s)` evaluated without forming negative powers of zero.
    fn eval_shifted(&self, s: f64, shift: i32) -> Complex {
        Self::degrees()
            .filter(|d| self.coeff(*d) != ZERO)
            .map(|d| self.coeff(d) * s.powi(d + shift))
            .sum()
    }

    /// Lowest degree whose coefficient exceeds `tol`.
    fn lowest_degree(&self, tol: f64) -> Option<i32> {
        Self::degrees().find(|d| self.coeff(*d).norm() > tol)
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: Self) -> Self {
        let mut p = self;
        p.coeffs
            .iter_mut()
            .zip(o.coeffs.iter())
            .for_each(|(a, b)| *a += b);
        p
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, o: Self) -> Self {
        let mut p = self;
        p.coeffs
            .iter_mut()
            .zip(o.coeffs.iter())
            .for_each(|(a, b)| *a -= b);
        p
    }
}

/// 2x2 array of Laurent polynomials.
pub type LaurentMat = [[LaurentPoly; 2]; 2];

/// Relative size below which a Laurent coefficient counts as vanished.
pub const LAURENT_ZERO_TOL: f64 = 1e-12;

/// Entrywise value of `num / den` at `s` in `[0, 1]`.
///
/// Both are multiplied by the power of `s` that turns the lowest surviving
/// degree of `den` into its constant term; at `s = 0` the quotient of those
/// leading coefficients is the limit.
pub fn laurent_ratio_limit(num: &LaurentMat, den: &LaurentPoly, s: f64) -> Result<Mat2C> {
    let den_scale = den.max_abs();
    let num_scale = num
        .iter()
        .flatten()
        .map(LaurentPoly::max_abs)
        .fold(0.0, f64::max);
    let Some(lead) = den.lowest_degree(LAURENT_ZERO_TOL * den_scale) else {
        return Err(Error::DegenerateLimit(
            "denominator vanishes identically".into(),
        ));
    };
    let shift = -lead;
    let den_val = if s == 0.0 {
        den.coeff(lead)
    } else {
        den.eval_shifted(s, shift)
    };
    if den_val == ZERO {
        return Err(Error::DegenerateLimit(format!(
            "denominator vanishes at s = {s}"
        )));
    }
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in num.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let v = if s == 0.0 {
                // any numerator term below the leading denominator degree diverges
                let tol = LAURENT_ZERO_TOL * num_scale.max(den_scale);
                if let Some(d) = p.lowest_degree(tol) {
                    if d < lead {
                        return Err(Error::DegenerateLimit(format!(
                            "numerator degree {d} below denominator degree {lead}"
                        )));
                    }
                }
                p.coeff(lead)
            } else {
                p.eval_shifted(s, shift)
            };
            out[i][j] = v / den_val;
        }
    }
    Ok(Mat2C::from_rows(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat2C {
        Mat2C::new(c(1.0, 2.0), c(-0.5, 0.3), c(0.7, -1.1), c(2.0, 0.0))
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse2(&Mat2C::identity()).unwrap(), Mat2C::identity());
        let inv = inverse2(&Mat2C::diag_real(2.0, 4.0)).unwrap();
        assert!(inv.approx_eq(&Mat2C::diag_real(0.5, 0.25), 1e-15));
        let singular = Mat2C::from_real([[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(inverse2(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn hermitian_examples() {
        assert!(is_hermitian(&Mat2C::diag_real(1.0, -3.0), 1e-12));
        let m = Mat2C::new(r(1.0), I, -I, r(2.0));
        assert!(is_hermitian(&m, 1e-12));
        assert!(!is_hermitian(
            &Mat2C::from_real([[0.0, 1.0], [0.0, 0.0]]),
            1e-12
        ));
    }

    #[test]
    fn unitary_examples() {
        assert!(is_unitary(&Mat2C::identity(), 1e-15));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let n = Mat2C::new(r(h), r(h), c(0.0, -h), c(0.0, h));
        assert!(is_unitary(&n, 1e-15));
        assert!(!is_unitary(&Mat2C::diag_real(2.0, 1.0), 1e-12));
    }

    #[test]
    fn adjugate_identity() {
        let m = sample();
        let lhs = m * m.adjugate();
        assert!(lhs.approx_eq(&Mat2C::scalar(m.det()), 1e-13));
    }

    #[test]
    fn singular_values_match_definition() {
        let m = sample();
        let (smax, smin) = m.singular_values();
        // eigenvalues of M M^* are the squared singular values
        let g = m * m.adjoint();
        let tr = g.trace().re;
        let det = g.det().re;
        assert!((smax * smax + smin * smin - tr).abs() < 1e-12);
        assert!((smax * smax * smin * smin - det).abs() < 1e-12);
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = Mat2C::new(c(1.0, 1.0), c(2.0, 0.0), c(0.5, 0.5), c(1.0, 0.0));
        let k = m.kernel_basis(1e-10, false);
        assert_eq!(k.len(), 1);
        let v = m.mul_vec(k[0]);
        assert!(vec_norm(v) < 1e-14);
        assert_eq!(Mat2C::zero().kernel_basis(1e-10, false).len(), 2);
        assert!(Mat2C::identity().kernel_basis(1e-10, false).is_empty());
    }

    fn const_mat(a: Mat2C, deg: i32) -> LaurentMat {
        let rows = a.rows();
        let mut out = [[LaurentPoly::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = LaurentPoly::monomial(rows[i][j], deg);
            }
        }
        out
    }

    #[test]
    fn ratio_limit_examples() {
        let a = sample();
        let num = const_mat(a, 2);
        let den = LaurentPoly::monomial(ONE, 2);
        assert!(laurent_ratio_limit(&num, &den, 0.0)
            .unwrap()
            .approx_eq(&a, 1e-15));

        let num = const_mat(a, -1);
        let den = LaurentPoly::monomial(ONE, -2);
        assert!(laurent_ratio_limit(&num, &den, 0.0)
            .unwrap()
            .approx_eq(&Mat2C::zero(), 0.0));

        let num = const_mat(a, 0);
        let den = LaurentPoly::constant(ONE);
        assert!(laurent_ratio_limit(&num, &den, 0.5)
            .unwrap()
            .approx_eq(&a, 1e-15));
    }

    #[test]
    fn ratio_limit_errors() {
        let a = sample();
        let err = laurent_ratio_limit(&const_mat(a, 0), &LaurentPoly::zero(), 0.3);
        assert!(matches!(err, Err(Error::DegenerateLimit(_))));
        // numerator vanishes slower than the denominator: no finite limit
        let err = laurent_ratio_limit(&const_mat(a, -2), &LaurentPoly::monomial(ONE, -1), 0.0);
        assert!(matches!(err, Err(Error::DegenerateLimit(_))));
    }

    #[test]
    fn checked_mul_window() {
        let p = LaurentPoly::monomial(ONE, 3);
        assert!(p.checked_mul(&LaurentPoly::monomial(ONE, 1)).is_some());
        assert!(p.checked_mul(&LaurentPoly::monomial(ONE, 2)).is_none());
        let q = LaurentPoly::monomial(r(2.0), -2) + LaurentPoly::constant(r(1.0));
        let pq = q.checked_mul(&q).unwrap();
        assert_eq!(pq.coeff(-4), r(4.0));
        assert_eq!(pq.coeff(-2), r(4.0));
        assert_eq!(pq.coeff(0), r(1.0));
    }
}
