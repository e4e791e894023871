//! Admissible boundary pairs `(C, D)` and their classification.
//!
//! The extension `H^{CD}` is the restriction of the adjoint to functions with
//! `C Γ1 f = D Γ2 f`. It is self-adjoint exactly when `C D^*` is hermitian and
//! `C C^* + D D^*` is invertible. Two pairs give the same operator when they
//! differ by a common invertible left factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::algebra::{c, inner, normalize, Complex, Mat2C, Vec2};
use crate::error::{Error, Result};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPair {
    pub c: Mat2C,
    pub d: Mat2C,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairClass {
    /// `det D != 0`; `lambda_matrix = D^{-1} C` is hermitian.
    InvertibleD {
        lambda_matrix: Mat2C,
        l11: f64,
        l12: Complex,
        l22: f64,
    },
    /// `ker D` is spanned by the unit vector `p`; `ell` is the reduced
    /// scalar on `ker(D)^⊥`.
    RankOneD {
        p: Vec2,
        ell: f64,
        trace_cd_star: f64,
    },
    ZeroD,
}

impl PairClass {
    pub fn name(&self) -> &'static str {
        match self {
            PairClass::InvertibleD { .. } => "InvertibleD",
            PairClass::RankOneD { .. } => "RankOneD",
            PairClass::ZeroD => "ZeroD",
        }
    }
}

/// Hermiticity defect of `C D^*` and `det(C C^* + D D^*)`.
pub fn admissibility_diagnostics(c: &Mat2C, d: &Mat2C) -> (f64, Complex) {
    let cd = *c * d.adjoint();
    let gram = *c * c.adjoint() + *d * d.adjoint();
    (cd.hermiticity_defect(), gram.det())
}

pub fn check_admissible(c: &Mat2C, d: &Mat2C, tol: f64) -> bool {
    let (herm, det) = admissibility_diagnostics(c, d);
    herm <= tol && det.norm() > tol
}

impl BoundaryPair {
    /// Admissibility is judged on the pair rescaled to unit entry size, so
    /// `(C, D)` and `(kC, kD)` are accepted or rejected together.
    pub fn new(c: Mat2C, d: Mat2C, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(c.is_finite() && d.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let scale = c.max_abs().max(d.max_abs());
        if scale == 0.0 {
            return Err(Error::NotAdmissible);
        }
        let k = 1.0 / scale;
        if !check_admissible(&c.scale_real(k), &d.scale_real(k), 1e-10) {
            return Err(Error::NotAdmissible);
        }
        Ok(Self { c, d, mass })
    }

    /// The unperturbed operator, `(C, D) = (1, 0)`.
    pub fn free(mass: f64) -> Self {
        Self {
            c: Mat2C::identity(),
            d: Mat2C::zero(),
            mass,
        }
    }

    pub fn scale(&self) -> f64 {
        self.c.max_abs().max(self.d.max_abs())
    }

    /// `(K C, K D)`, the same extension for invertible `K`.
    pub fn left_multiply(&self, k: &Mat2C) -> Self {
        Self {
            c: *k * self.c,
            d: *k * self.d,
            mass: self.mass,
        }
    }

    pub fn with_mass(self, mass: f64) -> Self {
        Self { mass, ..self }
    }
}

/// `C = (1 - U)/2`, `D = (i/2)(1 + U)`.
pub fn from_unitary(u: &Mat2C, mass: f64) -> Result<BoundaryPair> {
    let defect = u.unitarity_defect();
    if defect > 1e-10 {
        return Err(Error::NotUnitary { defect });
    }
    let one = Mat2C::identity();
    let cm = (one - *u).scale_real(0.5);
    let dm = (one + *u).scale(c(0.0, 0.5));
    BoundaryPair::new(cm, dm, mass)
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-distributed element of U(2): Gram-Schmidt on two complex Gaussian
/// columns, then a uniform global phase.
pub fn haar_unitary<R: Rng>(rng: &mut R) -> Mat2C {
    let v1 = normalize([complex_gaussian(rng), complex_gaussian(rng)]);
    let w = [complex_gaussian(rng), complex_gaussian(rng)];
    let proj = inner(v1, w);
    let v2 = normalize([w[0] - proj * v1[0], w[1] - proj * v1[1]]);
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let phase = Complex::from_polar(1.0, theta);
    Mat2C::new(v1[0], v2[0], v1[1], v2[1]).scale(phase)
}

/// Seed of the `index`-th pair in a sweep started from `base`.
pub fn sweep_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer on the combined counter
    let mut z = base
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_unitary(seed: u64) -> Mat2C {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    haar_unitary(&mut rng)
}

pub fn random_admissible(seed: u64, mass: f64) -> Result<BoundaryPair> {
    from_unitary(&random_unitary(seed), mass)
}

/// Unit vector orthogonal to `p`.
pub fn orthogonal_unit(p: Vec2) -> Vec2 {
    [-p[1].conj(), p[0].conj()]
}

pub fn classify(pair: &BoundaryPair, class_tol: f64) -> Result<PairClass> {
    let scale = pair.scale();
    let (s_max, s_min) = pair.d.singular_values();
    let hi = class_tol * scale;
    let lo = tol::ARITHMETIC * scale;
    if s_max <= lo {
        return Ok(PairClass::ZeroD);
    }
    if s_max <= hi || (s_min > lo && s_min <= hi) {
        return Err(Error::ClassificationAmbiguous { s_max, s_min });
    }
    if s_min > hi {
        let lambda_matrix = pair.d.inverse()? * pair.c;
        return Ok(PairClass::InvertibleD {
            lambda_matrix,
            l11: lambda_matrix.a11.re,
            l12: lambda_matrix.a12,
            l22: lambda_matrix.a22.re,
        });
    }
    let p = pair.d.kernel_basis(lo, true)[0];
    let ell = rank_one_ell(pair, p);
    let trace_cd_star = (pair.c * pair.d.adjoint()).trace().re;
    Ok(PairClass::RankOneD {
        p,
        ell,
        trace_cd_star,
    })
}

/// `ell = (D I)^{-1} C I` with `I` the inclusion of `ker(D)^⊥`. Both `D q`
/// and `C q` lie in the one-dimensional range of `D`, so `ell` is their ratio.
pub fn rank_one_ell(pair: &BoundaryPair, p: Vec2) -> f64 {
    let q = orthogonal_unit(p);
    let dq = pair.d.mul_vec(q);
    let cq = pair.c.mul_vec(q);
    (inner(dq, cq) / inner(dq, dq)).re
}

/// Orthogonal projector blocks onto the row space of `[C D]`.
fn row_space_projector(pair: &BoundaryPair) -> Result<[Mat2C; 4]> {
    let g = (pair.c * pair.c.adjoint() + pair.d * pair.d.adjoint()).inverse()?;
    let (ca, da) = (pair.c.adjoint(), pair.d.adjoint());
    Ok([
        ca * g * pair.c,
        ca * g * pair.d,
        da * g * pair.c,
        da * g * pair.d,
    ])
}

pub fn equivalent(a: &BoundaryPair, b: &BoundaryPair, tol: f64) -> bool {
    match (row_space_projector(a), row_space_projector(b)) {
        (Ok(pa), Ok(pb)) => pa.iter().zip(pb.iter()).all(|(x, y)| x.approx_eq(y, tol)),
        _ => false,
    }
}
