//! Wave operator `W₋` in the upside-down representation.
//!
//! After the change of variables `x = ln((λ+m)/(λ-m))` the thresholds sit
//! at `±inf` and both infinities at `x = 0`. There `W₋ - 1` factorizes as
//! `R(D) T0(λ(X))`, a position multiplier followed by a momentum
//! multiplier with `D = -i d/dx`. This module realizes that product on a
//! uniform grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::algebra::{c, Complex, Mat2C, Vec2, ZERO};
use crate::error::{Error, Result};
use crate::extensions::BoundaryPair;
use crate::scattering::{ContinuumPoint, T0Evaluator};
use crate::topology::r_matrix;

/// `λ(x) = m (e^x + 1)/(e^x - 1)`.
pub fn lambda_of_x(x: f64, m: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::OriginOrThreshold);
    }
    // coth(x/2) avoids cancellation for small |x|
    Ok(m / (0.5 * x).tanh())
}

/// `x(λ) = ln((λ+m)/(λ-m))`.
pub fn x_of_lambda(lambda: f64, m: f64) -> Result<f64> {
    if !(lambda.abs() > m) || !lambda.is_finite() {
        return Err(Error::OriginOrThreshold);
    }
    Ok(((lambda + m) / (lambda - m)).ln())
}

/// Jacobian weight `sqrt(2m) e^{x/2}/(e^x - 1)` of the change of variables.
pub fn jacobian_weight(x: f64, m: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::OriginOrThreshold);
    }
    Ok((2.0 * m).sqrt() / (2.0 * (0.5 * x).sinh()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
    pub spacing: f64,
    /// `(j + 1/2) h - L`, so no node sits at the origin.
    pub x_nodes: Vec<f64>,
    /// `(k - N/2 + 1/2) π/L`, symmetric about zero.
    pub momentum_nodes: Vec<f64>,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidInput(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size must be a power of two, got {points}"
            )));
        }
        let h = 2.0 * half_width / points as f64;
        let dk = PI / half_width;
        let x_nodes = (0..points)
            .map(|j| (j as f64 + 0.5) * h - half_width)
            .collect();
        let half = (points / 2) as f64;
        let momentum_nodes = (0..points).map(|k| (k as f64 - half + 0.5) * dk).collect();
        Ok(Self {
            half_width,
            points,
            spacing: h,
            x_nodes,
            momentum_nodes,
        })
    }

    /// The grid used for the isometry acceptance check.
    pub fn standard() -> Self {
        Self::new(40.0, 4096).expect("valid grid")
    }
}

/// `C²`-valued samples on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub values: Vec<Vec2>,
}

impl GridFunction {
    pub fn new(values: Vec<Vec2>) -> Result<Self> {
        if values
            .iter()
            .flatten()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidInput(
                "grid function has non-finite entries".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: vec![[ZERO; 2]; grid.points],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64) -> Vec2) -> Self {
        Self {
            values: grid.x_nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Centered Gaussian of unit width with amplitudes `(1, i/2)`.
    pub fn gaussian_probe(grid: &GridSpec) -> Self {
        Self::gaussian(grid, 0.0, 1.0, [c(1.0, 0.0), c(0.0, 0.5)])
    }

    pub fn gaussian(grid: &GridSpec, center: f64, width: f64, amp: Vec2) -> Self {
        Self::from_fn(grid, |x| {
            let g = (-0.5 * ((x - center) / width).powi(2)).exp();
            [amp[0] * g, amp[1] * g]
        })
    }

    /// Discrete `L²` norm `sqrt(h Σ |f_j|²)`.
    pub fn norm(&self, grid: &GridSpec) -> f64 {
        (grid.spacing * self.sum_sq()).sqrt()
    }

    fn sum_sq(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn add(&self, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| [a[0] + b[0], a[1] + b[1]])
            .collect();
        Self { values }
    }
}

/// DFT on the shifted lattices `x_j`, `ξ_k`, built from a standard FFT with
/// twiddles before and after.
struct Transform {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `e^{-i ξ_0 x_j}`
    pre: Vec<Complex>,
    /// `e^{-i k Δξ x_0}`
    post: Vec<Complex>,
}

impl Transform {
    fn new(grid: &GridSpec) -> Self {
        let n = grid.points;
        let mut planner = FftPlanner::new();
        let xi0 = grid.momentum_nodes[0];
        let x0 = grid.x_nodes[0];
        let dk = PI / grid.half_width;
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            pre: grid
                .x_nodes
                .iter()
                .map(|&x| Complex::from_polar(1.0, -xi0 * x))
                .collect(),
            post: (0..n)
                .map(|k| Complex::from_polar(1.0, -(k as f64) * dk * x0))
                .collect(),
        }
    }

    /// `f̂_k = Σ_j f_j e^{-i ξ_k x_j}`
    fn forward(&self, buf: &mut [Complex]) {
        for (v, w) in buf.iter_mut().zip(&self.pre) {
            *v *= w;
        }
        self.fwd.process(buf);
        for (v, w) in buf.iter_mut().zip(&self.post) {
            *v *= w;
        }
    }

    /// `f_j = N⁻¹ Σ_k f̂_k e^{i ξ_k x_j}`
    fn inverse(&self, buf: &mut [Complex]) {
        for (v, w) in buf.iter_mut().zip(&self.post) {
            *v *= w.conj();
        }
        self.inv.process(buf);
        let scale = 1.0 / buf.len() as f64;
        for (v, w) in buf.iter_mut().zip(&self.pre) {
            *v *= w.conj() * scale;
        }
    }
}

fn check_len(f: &GridFunction, grid: &GridSpec) -> Result<()> {
    if f.len() != grid.points {
        return Err(Error::InvalidInput(format!(
            "grid function has {} samples, grid has {}",
            f.len(),
            grid.points
        )));
    }
    Ok(())
}

/// `T0(λ(x_j))` at every node.
pub fn t_of_position(pair: &BoundaryPair, grid: &GridSpec) -> Result<Vec<Mat2C>> {
    let ev = T0Evaluator::new(pair);
    grid.x_nodes
        .iter()
        .map(|&x| ev.eval(ContinuumPoint::from_position(x)))
        .collect()
}

fn multiplier_apply(tr: &Transform, f: &GridFunction, grid: &GridSpec) -> GridFunction {
    let n = grid.points;
    let mut comps: Vec<Vec<Complex>> = (0..2)
        .map(|i| f.values.iter().map(|v| v[i]).collect())
        .collect();
    for (i, buf) in comps.iter_mut().enumerate() {
        tr.forward(buf);
        for (v, &xi) in buf.iter_mut().zip(&grid.momentum_nodes) {
            *v *= r_matrix(xi).entry(i, i);
        }
        tr.inverse(buf);
    }
    GridFunction {
        values: (0..n).map(|j| [comps[0][j], comps[1][j]]).collect(),
    }
}

/// Applies the momentum multiplier `R(D)` componentwise.
pub fn apply_r_multiplier_checked(f: &GridFunction, grid: &GridSpec) -> Result<GridFunction> {
    check_len(f, grid)?;
    Ok(multiplier_apply(&Transform::new(grid), f, grid))
}

pub fn apply_r_multiplier(f: &GridFunction, grid: &GridSpec) -> GridFunction {
    apply_r_multiplier_checked(f, grid).expect("grid function length matches the grid")
}

/// Grid realization of `W₋` for one pair, reusable across inputs.
pub struct WaveOperator {
    grid: GridSpec,
    t_samples: Vec<Mat2C>,
    transform: Transform,
    trivial: bool,
}

impl WaveOperator {
    pub fn new(pair: &BoundaryPair, grid: &GridSpec) -> Result<Self> {
        let t_samples = t_of_position(pair, grid)?;
        let trivial = t_samples.iter().all(|t| *t == Mat2C::zero());
        Ok(Self {
            grid: grid.clone(),
            t_samples,
            transform: Transform::new(grid),
            trivial,
        })
    }

    pub fn t_samples(&self) -> &[Mat2C] {
        &self.t_samples
    }

    /// `f + R(D) T0(λ(X)) f`
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        check_len(f, &self.grid)?;
        if self.trivial {
            return Ok(f.clone());
        }
        let tf = GridFunction {
            values: self
                .t_samples
                .iter()
                .zip(&f.values)
                .map(|(t, v)| t.mul_vec(*v))
                .collect(),
        };
        Ok(f.add(&multiplier_apply(&self.transform, &tf, &self.grid)))
    }
}

pub fn wave_operator_apply(
    pair: &BoundaryPair,
    f: &GridFunction,
    grid: &GridSpec,
) -> Result<GridFunction> {
    WaveOperator::new(pair, grid)?.apply(f)
}

/// `|‖Wf‖ - ‖f‖| / ‖f‖`
pub fn isometry_defect(pair: &BoundaryPair, f: &GridFunction, grid: &GridSpec) -> Result<f64> {
    let w = wave_operator_apply(pair, f, grid)?;
    let n0 = f.norm(grid);
    if n0 == 0.0 {
        return Err(Error::InvalidInput("probe has zero norm".into()));
    }
    Ok((w.norm(grid) - n0).abs() / n0)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TraceReport {
    pub trace: f64,
    /// Always true: periodic discretization distorts this quantity.
    pub exploratory: bool,
}

/// Largest grid accepted by [`bound_state_trace`].
pub const TRACE_MAX_POINTS: usize = 1024;

/// `trace(1 - W W†)` of the discretized operator, assembled column by
/// column. Only a soft indicator of the bound-state count.
pub fn bound_state_trace(pair: &BoundaryPair, grid: &GridSpec) -> Result<TraceReport> {
    if grid.points > TRACE_MAX_POINTS {
        return Err(Error::InvalidInput(format!(
            "trace diagnostic needs N <= {TRACE_MAX_POINTS}, got {}",
            grid.points
        )));
    }
    let w = WaveOperator::new(pair, grid)?;
    let n = grid.points;
    // trace(W W†) is the squared Frobenius norm, basis independent
    let frob: f64 = (0..2 * n)
        .into_par_iter()
        .map(|col| {
            let mut e = GridFunction::zeros(grid);
            e.values[col % n][col / n] = c(1.0, 0.0);
            w.apply(&e).map(|v| v.sum_sq())
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    Ok(TraceReport {
        trace: 2.0 * n as f64 - frob,
        exploratory: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::I;

    #[test]
    fn coordinate_maps() {
        let e = std::f64::consts::E;
        let lam = (e + 1.0) / (e - 1.0);
        assert!((x_of_lambda(lam, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((lambda_of_x(1.0, 1.0).unwrap() - lam).abs() < 1e-14);
        assert!(lambda_of_x(40.0, 1.0).unwrap() - 1.0 < 1e-15);
        assert!(lambda_of_x(1e-9, 1.0).unwrap() > 1e8);
        assert!(matches!(
            lambda_of_x(0.0, 1.0),
            Err(Error::OriginOrThreshold)
        ));
        assert!(matches!(
            x_of_lambda(1.0, 1.0),
            Err(Error::OriginOrThreshold)
        ));
        assert!(matches!(
            x_of_lambda(0.3, 1.0),
            Err(Error::OriginOrThreshold)
        ));
        assert!(
            (jacobian_weight(1.0, 1.0).unwrap() - 2f64.sqrt() * 0.5f64.exp() / (e - 1.0)).abs()
                < 1e-14
        );
    }

    #[test]
    fn grid_layout() {
        let g = GridSpec::new(4.0, 8).unwrap();
        assert!((g.spacing * 8.0 - 8.0).abs() < 1e-15);
        assert!(g.x_nodes.iter().all(|&x| x != 0.0));
        for k in 0..8 {
            assert!((g.momentum_nodes[k] + g.momentum_nodes[7 - k]).abs() < 1e-15);
        }
        assert!(GridSpec::new(4.0, 12).is_err());
        assert!(GridSpec::new(-1.0, 8).is_err());
    }

    #[test]
    fn transform_round_trip_and_plane_wave() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let tr = Transform::new(&g);
        let k0 = 37;
        let xi = g.momentum_nodes[k0];
        let mut buf: Vec<Complex> = g
            .x_nodes
            .iter()
            .map(|&x| Complex::from_polar(1.0, xi * x))
            .collect();
        let orig = buf.clone();
        tr.forward(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            let expect = if k == k0 { 64.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-10, "k = {k}");
        }
        tr.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
        let f = GridFunction::from_fn(&g, |x| [Complex::from_polar(1.0, xi * x), ZERO]);
        let rf = apply_r_multiplier(&f, &g);
        let r11 = r_matrix(xi).a11;
        for (a, b) in rf.values.iter().zip(&f.values) {
            assert!((a[0] - r11 * b[0]).norm() < 1e-10);
            assert!(a[1].norm() < 1e-10);
        }
    }

    #[test]
    fn t_samples_trivial_pairs() {
        let g = GridSpec::new(40.0, 256).unwrap();
        let free = t_of_position(&BoundaryPair::free(1.0), &g).unwrap();
        assert!(free.iter().all(|t| *t == Mat2C::zero()));
        let k = BoundaryPair::new(Mat2C::zero(), Mat2C::identity(), 1.0).unwrap();
        for t in t_of_position(&k, &g).unwrap() {
            assert!(t.approx_eq(&Mat2C::scalar(c(-2.0, 0.0)), 1e-12));
        }
    }

    #[test]
    fn kirchhoff_is_unimodular() {
        let g = GridSpec::new(40.0, 1024).unwrap();
        let k = BoundaryPair::new(Mat2C::zero(), Mat2C::identity(), 1.0).unwrap();
        let f = GridFunction::gaussian(&g, 1.0, 0.7, [c(1.0, 0.0), I]);
        assert!(isometry_defect(&k, &f, &g).unwrap() < 1e-10);
    }

    #[test]
    fn free_pair_is_identity() {
        let g = GridSpec::new(40.0, 256).unwrap();
        let f = GridFunction::gaussian_probe(&g);
        assert_eq!(
            wave_operator_apply(&BoundaryPair::free(1.0), &f, &g).unwrap(),
            f
        );
        let t = bound_state_trace(&BoundaryPair::free(1.0), &g).unwrap();
        assert!(t.trace.abs() < 0.05 && t.exploratory);
    }

    #[test]
    fn trace_rejects_large_grid() {
        let g = GridSpec::new(40.0, 2048).unwrap();
        assert!(bound_state_trace(&BoundaryPair::free(1.0), &g).is_err());
    }
}
