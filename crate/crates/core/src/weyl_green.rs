//! Momentum branch, Weyl function, γ-field vectors and resolvent kernels.
//!
//! Free operator: `H0 = [[0, -1], [1, 0]] d/dx + diag(m, -m)` on `L^2(R; C^2)`,
//! with spectrum `(-inf, -m] ∪ [m, inf)`. For `z` off the spectrum the branch
//! `k(z) = sqrt(z^2 - m^2)` is fixed by `Im k > 0`.

use crate::algebra::{c, r, Complex, Mat2C, Vec2, I};
use crate::error::{Error, Result};
use crate::extensions::BoundaryPair;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    PlusI0,
    MinusI0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Gap,
    Continuum,
}

/// Boundary value `lambda ± i0` on the real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyPoint {
    pub lambda: f64,
    pub side: Side,
}

impl EnergyPoint {
    pub fn new(lambda: f64, side: Side) -> Self {
        Self { lambda, side }
    }

    pub fn plus(lambda: f64) -> Self {
        Self::new(lambda, Side::PlusI0)
    }

    pub fn regime(&self, m: f64) -> Regime {
        if self.lambda.abs() < m {
            Regime::Gap
        } else {
            Regime::Continuum
        }
    }
}

/// Either a point off the real spectrum or a boundary value on the axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Energy {
    Off(Complex),
    Boundary(EnergyPoint),
}

impl From<Complex> for Energy {
    fn from(z: Complex) -> Self {
        Energy::Off(z)
    }
}

impl From<EnergyPoint> for Energy {
    fn from(p: EnergyPoint) -> Self {
        Energy::Boundary(p)
    }
}

impl Energy {
    /// The value entering `m + z`.
    pub fn z(&self) -> Complex {
        match self {
            Energy::Off(z) => *z,
            Energy::Boundary(p) => r(p.lambda),
        }
    }

    pub fn k(&self, m: f64) -> Result<Complex> {
        match self {
            Energy::Off(z) => k_of_z(*z, m),
            Energy::Boundary(p) => k_boundary(p.lambda, p.side, m),
        }
    }
}

/// Square root with `Im > 0`; on the positive real axis (only reachable as a
/// limit) the principal value is returned.
fn sqrt_upper(w: Complex) -> Complex {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && w.re < 0.0) {
        -s
    } else {
        s
    }
}

pub fn k_of_z(z: Complex, m: f64) -> Result<Complex> {
    if z.im == 0.0 && z.re.abs() >= m {
        return Err(Error::OnSpectrum(z));
    }
    // (z - m)(z + m) keeps relative accuracy near the thresholds
    let w = (z - m) * (z + m);
    Ok(sqrt_upper(w))
}

pub fn k_boundary(lambda: f64, side: Side, m: f64) -> Result<Complex> {
    let a = lambda.abs();
    if a == m {
        return Err(Error::AtThreshold(lambda));
    }
    if a > m {
        let v = ((a - m) * (a + m)).sqrt() * lambda.signum();
        Ok(match side {
            Side::PlusI0 => r(v),
            Side::MinusI0 => r(-v),
        })
    } else {
        Ok(c(0.0, ((m - a) * (m + a)).sqrt()))
    }
}

/// `M(z) = diag(ik/(2(m+z)), i(m+z)/(2k))`.
pub fn weyl_m(e: impl Into<Energy>, m: f64) -> Result<Mat2C> {
    let e = e.into();
    if let Energy::Boundary(p) = e {
        let lam = p.lambda;
        if lam.abs() == m {
            return Err(Error::AtThreshold(lam));
        }
        if lam.abs() < m {
            // real diagonal on both sides of the gap
            let a = ((m - lam) / (m + lam)).sqrt();
            return Ok(Mat2C::diag_real(-0.5 * a, 0.5 / a));
        }
        let a = ((lam - m) / (lam + m)).sqrt();
        let sign = match p.side {
            Side::PlusI0 => 0.5,
            Side::MinusI0 => -0.5,
        };
        return Ok(Mat2C::diag(c(0.0, sign * a), c(0.0, sign / a)));
    }
    let z = e.z();
    let mz = z + m;
    if mz.norm() == 0.0 {
        return Err(Error::PoleAtMinusM);
    }
    let k = e.k(m)?;
    Ok(Mat2C::diag(I * k / (mz * 2.0), I * mz / (k * 2.0)))
}

/// `B(lambda) = 2^{-1/2} diag(((λ-m)/(λ+m))^{1/4}, ((λ+m)/(λ-m))^{1/4})`.
pub fn b_matrix(lambda: f64, m: f64) -> Result<Mat2C> {
    if lambda.abs() <= m {
        return Err(Error::InGap(lambda));
    }
    let q = ((lambda - m) / (lambda + m)).powf(0.25);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ok(Mat2C::diag_real(h * q, h / q))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaVectors {
    pub h1: Vec2,
    pub h2: Vec2,
}

impl GammaVectors {
    /// `ξ1 h1 + ξ2 h2`, the value of `γ(z) ξ` at the sample point.
    pub fn combine(&self, xi: Vec2) -> Vec2 {
        [
            xi[0] * self.h1[0] + xi[1] * self.h2[0],
            xi[0] * self.h1[1] + xi[1] * self.h2[1],
        ]
    }
}

pub fn gamma_vectors(e: impl Into<Energy>, m: f64, x: f64) -> Result<GammaVectors> {
    if x == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    let e = e.into();
    let k = e.k(m)?;
    let mz = e.z() + m;
    if mz.norm() == 0.0 {
        return Err(Error::PoleAtMinusM);
    }
    let sgn = r(x.signum());
    let half = (I * k * x.abs()).exp() * 0.5;
    Ok(GammaVectors {
        h1: [half * sgn, half * I * k / mz],
        h2: [half * I * mz / k, -half * sgn],
    })
}

pub fn green_free(x: f64, y: f64, z: Complex, m: f64) -> Result<Mat2C> {
    if x == y {
        return Err(Error::DiagonalPoint);
    }
    let k = k_of_z(z, m)?;
    let mz = z + m;
    if mz.norm() == 0.0 {
        return Err(Error::PoleAtMinusM);
    }
    let sgn = r((x - y).signum());
    let f = (I * k * (x - y).abs()).exp() * 0.5;
    Ok(Mat2C::new(I * mz / k, sgn, -sgn, I * k / mz).scale(f))
}

/// `(D M(z) - C)^{-1} D`, the coefficient matrix in the resolvent difference.
pub fn krein_coefficient(pair: &BoundaryPair, z: Complex) -> Result<Mat2C> {
    let mz = weyl_m(z, pair.mass)?;
    let a = pair.d * mz - pair.c;
    let scale = a.max_abs().max(pair.scale());
    let det = a.det().norm();
    if det <= tol::ARITHMETIC * scale * scale {
        return Err(Error::NearEigenvalue(det));
    }
    Ok(a.adjugate().scale(a.det().inv()) * pair.d)
}

/// Resolvent kernel of `H^{CD}` at `z`, assembled from the free kernel and
/// the rank-two correction `γ(z) A γ(z̄)^*`.
pub fn green_perturbed(x: f64, y: f64, z: Complex, pair: &BoundaryPair) -> Result<Mat2C> {
    if x == 0.0 || y == 0.0 {
        return Err(Error::OriginEvaluation);
    }
    let m = pair.mass;
    let g0 = green_free(x, y, z, m)?;
    let a = krein_coefficient(pair, z)?;
    let gx = gamma_vectors(z, m, x)?;
    let gy = gamma_vectors(z.conj(), m, y)?;
    let hx = [gx.h1, gx.h2];
    let hy = [gy.h1, gy.h2];
    let arows = a.rows();
    let mut corr = Mat2C::zero();
    for (j, row) in arows.iter().enumerate() {
        for (l, ajl) in row.iter().enumerate() {
            corr = corr + Mat2C::outer(hx[j], hy[l]).scale(*ajl);
        }
    }
    Ok(g0 - corr)
}

/// Boundary maps `(Γ1 f, Γ2 f)` from the one-sided values `f(-0)`, `f(+0)`.
pub fn boundary_traces(f_minus: Vec2, f_plus: Vec2) -> (Vec2, Vec2) {
    let g1 = [f_plus[0] - f_minus[0], f_minus[1] - f_plus[1]];
    let g2 = [
        (f_minus[1] + f_plus[1]) * 0.5,
        (f_minus[0] + f_plus[0]) * 0.5,
    ];
    (g1, g2)
}

/// `|C Γ1 f - D Γ2 f|` (max norm) from one-sided samples.
pub fn boundary_residual(pair: &BoundaryPair, f_minus: Vec2, f_plus: Vec2) -> f64 {
    let (g1, g2) = boundary_traces(f_minus, f_plus);
    let lhs = pair.c.mul_vec(g1);
    let rhs = pair.d.mul_vec(g2);
    (lhs[0] - rhs[0]).norm().max((lhs[1] - rhs[1]).norm())
}

/// `H0 f` at `x` via second-order central differences of step `h`.
pub fn dirac_apply_fd(f: impl Fn(f64) -> Vec2, x: f64, h: f64, m: f64) -> Vec2 {
    let fp = f(x + h);
    let fm = f(x - h);
    let f0 = f(x);
    let d1 = (fp[1] - fm[1]) / (2.0 * h);
    let d0 = (fp[0] - fm[0]) / (2.0 * h);
    [-d1 + f0[0] * m, d0 - f0[1] * m]
}
