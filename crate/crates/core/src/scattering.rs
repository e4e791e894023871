//! On-shell matrices `T_ε`, `T0`, the scattering matrix, and the free fibers.
//!
//! Points of the continuum are addressed as `(branch, s)` with `s` in `[0, 1]`:
//! on the positive branch `s = ((λ-m)/(λ+m))^{1/4}`, on the negative branch
//! `s = ((λ+m)/(λ-m))^{1/4}`. Both thresholds sit at `s = 0` and both
//! infinities at `s = 1`. In this variable `B = 2^{-1/2} diag(s, 1/s)` and
//! `M(λ+i0) = i B^2` on the positive branch (slots swapped on the negative
//! one), so every entry of `T0` is a ratio of Laurent polynomials in `s`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::algebra::{c, laurent_ratio_limit, r, LaurentMat, LaurentPoly, Mat2C, Vec2, I};
use crate::error::{Error, Result};
use crate::extensions::{classify, orthogonal_unit, BoundaryPair, PairClass};
use crate::tol;
use crate::weyl_green::{b_matrix, weyl_m, EnergyPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `λ < -m`
    Neg,
    /// `λ > m`
    Pos,
}

impl Branch {
    pub fn sign(&self) -> f64 {
        match self {
            Branch::Neg => -1.0,
            Branch::Pos => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Branch::Neg => "neg",
            Branch::Pos => "pos",
        }
    }
}

/// A point of `[-inf, -m] ∪ [m, inf]` in compact coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuumPoint {
    pub branch: Branch,
    pub s: f64,
}

impl ContinuumPoint {
    pub fn new(branch: Branch, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("s = {s} outside [0, 1]")));
        }
        Ok(Self { branch, s })
    }

    pub fn threshold(branch: Branch) -> Self {
        Self { branch, s: 0.0 }
    }

    pub fn infinity(branch: Branch) -> Self {
        Self { branch, s: 1.0 }
    }

    /// Accepts `±inf`; `|lambda| = m` maps to the threshold.
    pub fn from_lambda(lambda: f64, m: f64) -> Result<Self> {
        if lambda.is_nan() || lambda.abs() < m {
            return Err(Error::InGap(lambda));
        }
        let branch = if lambda > 0.0 {
            Branch::Pos
        } else {
            Branch::Neg
        };
        if lambda.is_infinite() {
            return Ok(Self::infinity(branch));
        }
        let a = lambda.abs();
        let s = ((a - m) / (a + m)).powf(0.25);
        Ok(Self { branch, s })
    }

    /// Energy of the point; `±inf` at `s = 1`.
    pub fn lambda(&self, m: f64) -> f64 {
        if self.s >= 1.0 {
            return self.branch.sign() * f64::INFINITY;
        }
        let s4 = self.s.powi(4);
        self.branch.sign() * m * (1.0 + s4) / (1.0 - s4)
    }

    /// Position in the upside-down representation, `x = ln((λ+m)/(λ-m))`:
    /// `s = exp(-|x|/4)` with the sign of `x` given by the branch.
    pub fn from_position(x: f64) -> Self {
        let branch = if x >= 0.0 { Branch::Pos } else { Branch::Neg };
        Self {
            branch,
            s: (-x.abs() / 4.0).exp(),
        }
    }
}

/// `B` and `M(λ+i0)` diagonals as Laurent monomials: `(B11, B22, M11, M22)`.
fn branch_monomials(branch: Branch) -> [LaurentPoly; 4] {
    let h = r(FRAC_1_SQRT_2);
    let half_i = c(0.0, 0.5);
    let (b1, b2, m1, m2) = match branch {
        Branch::Pos => (1, -1, 2, -2),
        Branch::Neg => (-1, 1, -2, 2),
    };
    [
        LaurentPoly::monomial(h, b1),
        LaurentPoly::monomial(h, b2),
        LaurentPoly::monomial(half_i, m1),
        LaurentPoly::monomial(half_i, m2),
    ]
}

/// Numerator matrix and denominator of `T0` on one branch.
#[derive(Clone, Copy, Debug)]
pub struct T0Laurent {
    pub num: LaurentMat,
    pub den: LaurentPoly,
}

impl T0Laurent {
    pub fn new(pair: &BoundaryPair, branch: Branch) -> Self {
        let [b1, b2, m1, m2] = branch_monomials(branch);
        let (cm, dm) = (pair.c.rows(), pair.d.rows());
        let mdiag = [m1, m2];
        let mut x = [[LaurentPoly::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                x[i][j] = mdiag[j].scale(dm[i][j]) - LaurentPoly::constant(cm[i][j]);
            }
        }
        let mul = |a: &LaurentPoly, b: &LaurentPoly| {
            a.checked_mul(b)
                .expect("degrees of DM - C stay within [-2, 2]")
        };
        let den = mul(&x[0][0], &x[1][1]) - mul(&x[0][1], &x[1][0]);
        let adj = [
            [x[1][1], x[0][1].scale(r(-1.0))],
            [x[1][0].scale(r(-1.0)), x[0][0]],
        ];
        let bdiag = [b1, b2];
        let mut num = [[LaurentPoly::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let nij = adj[i][0].scale(dm[0][j]) + adj[i][1].scale(dm[1][j]);
                let sandwich = mul(&mul(&bdiag[i], &bdiag[j]), &nij);
                num[i][j] = sandwich.scale(c(0.0, -2.0));
            }
        }
        Self { num, den }
    }

    pub fn eval(&self, s: f64) -> Result<Mat2C> {
        laurent_ratio_limit(&self.num, &self.den, s)
    }
}

/// `T0` on both branches for one pair, ready for repeated evaluation.
#[derive(Clone, Copy, Debug)]
pub struct T0Evaluator {
    neg: T0Laurent,
    pos: T0Laurent,
}

impl T0Evaluator {
    pub fn new(pair: &BoundaryPair) -> Self {
        Self {
            neg: T0Laurent::new(pair, Branch::Neg),
            pos: T0Laurent::new(pair, Branch::Pos),
        }
    }

    pub fn branch(&self, branch: Branch) -> &T0Laurent {
        match branch {
            Branch::Neg => &self.neg,
            Branch::Pos => &self.pos,
        }
    }

    pub fn eval(&self, p: ContinuumPoint) -> Result<Mat2C> {
        self.branch(p.branch).eval(p.s)
    }
}

pub fn t0(point: ContinuumPoint, pair: &BoundaryPair) -> Result<Mat2C> {
    T0Laurent::new(pair, point.branch).eval(point.s)
}

/// `T_ε(λ) = -2i B (D M(λ+iε) - C)^{-1} D B` evaluated directly.
pub fn t_eps(lambda: f64, eps: f64, pair: &BoundaryPair) -> Result<Mat2C> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let b = b_matrix(lambda, pair.mass)?;
    Ok((b * krein_eps(lambda, eps, pair)? * b).scale(c(0.0, -2.0)))
}

/// `(D M(λ+iε) - C)^{-1} D`; `eps` may be negative for the lower boundary value.
pub fn krein_eps(lambda: f64, eps: f64, pair: &BoundaryPair) -> Result<Mat2C> {
    let m = weyl_m(c(lambda, eps), pair.mass)?;
    let a = pair.d * m - pair.c;
    let inv = a
        .inverse_with_tol(tol::ARITHMETIC)
        .map_err(|_| Error::NearSingular)?;
    Ok(inv * pair.d)
}

/// `K(λ, ε) = M(λ+iε) - i B(λ)^2`.
pub fn weyl_remainder(lambda: f64, eps: f64, m: f64) -> Result<Mat2C> {
    let b = b_matrix(lambda, m)?;
    Ok(weyl_m(c(lambda, eps), m)? - (b * b).scale(I))
}

/// Fiber change of basis relating `T0` to the scattering matrix.
pub fn n_for_branch(branch: Branch) -> Mat2C {
    let h = FRAC_1_SQRT_2;
    match branch {
        Branch::Neg => Mat2C::new(r(h), r(h), c(0.0, -h), c(0.0, h)),
        Branch::Pos => Mat2C::new(c(0.0, -h), c(0.0, h), r(h), r(h)),
    }
}

pub fn n_matrix(lambda: f64, m: f64) -> Result<Mat2C> {
    if lambda.abs() <= m {
        return Err(Error::InGap(lambda));
    }
    Ok(n_for_branch(if lambda > 0.0 {
        Branch::Pos
    } else {
        Branch::Neg
    }))
}

/// `S = 1 + N^* T0 N`.
pub fn s_from_t0(branch: Branch, t0: &Mat2C) -> Mat2C {
    let n = n_for_branch(branch);
    Mat2C::identity() + n.adjoint() * *t0 * n
}

pub fn s_matrix(point: ContinuumPoint, pair: &BoundaryPair) -> Result<Mat2C> {
    Ok(s_from_t0(point.branch, &t0(point, pair)?))
}

/// `T0` at an interior point through the scalar reduction available when
/// `ker D` is one-dimensional: `(DM - C)^{-1} D = q (q^* M q - ℓ)^{-1} q^*`
/// with `q` spanning `ker(D)^⊥`.
pub fn t0_rank_one(point: ContinuumPoint, pair: &BoundaryPair) -> Result<Mat2C> {
    let PairClass::RankOneD { p, ell, .. } = classify(pair, tol::CLASS)? else {
        return Err(Error::InvalidInput(
            "pair does not have a rank-one D".into(),
        ));
    };
    if !(point.s > 0.0 && point.s < 1.0) {
        return Err(Error::InvalidInput(
            "scalar reduction needs an interior point".into(),
        ));
    }
    let lambda = point.lambda(pair.mass);
    let b = b_matrix(lambda, pair.mass)?;
    let m = weyl_m(EnergyPoint::plus(lambda), pair.mass)?;
    let q = orthogonal_unit(p);
    let mq = m.mul_vec(q);
    let reduced = q[0].conj() * mq[0] + q[1].conj() * mq[1] - ell;
    Ok((b * Mat2C::outer(q, q) * b).scale(c(0.0, -2.0) / reduced))
}

/// Eigenvectors of `h(p) = [[m, -ip], [ip, -m]]` for the energies `±sqrt(p^2+m^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeFiber {
    pub p: f64,
    pub xi_plus: Vec2,
    pub xi_minus: Vec2,
    pub energy: f64,
}

pub fn h_matrix(p: f64, m: f64) -> Mat2C {
    Mat2C::new(r(m), c(0.0, -p), c(0.0, p), r(-m))
}

pub fn free_fiber(p: f64, m: f64) -> Result<FreeFiber> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass must be positive, got {m}"
        )));
    }
    let energy = p.hypot(m);
    let norm = (2.0 * (p * p + m * m + m * energy)).sqrt();
    let a = r((m + energy) / norm);
    let b = c(0.0, p / norm);
    Ok(FreeFiber {
        p,
        xi_plus: [a, b],
        xi_minus: [b, a],
        energy,
    })
}

pub fn unitarity_defect_of(t0: &Mat2C) -> f64 {
    (Mat2C::identity() + *t0).unitarity_defect()
}
