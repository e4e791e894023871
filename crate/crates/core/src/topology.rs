//! Boundary loop `Γ^{CD}` on the compactified square and its winding number.
//!
//! `Γ(x, y) = 1 + R(y) T0(λ(x))` with `λ(x) = m (e^x + 1)/(e^x - 1)`. On the
//! boundary of `[-inf, inf]^2` it reduces to four edges:
//!
//! * `B1`: `1 + R(y) T0(m)`
//! * `B2`: `1 + T0(λ(x))`, i.e. `1 + T0` along the whole continuum
//! * `B3`: `1 + R(y) T0(-m)`
//! * `B4`: `1`
//!
//! Every value is unitary, so `det Γ` lives on the unit circle and its
//! winding along the loop equals minus the number of bound states.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::algebra::{c, Complex, Mat2C};
use crate::error::{Error, Result};
use crate::extensions::BoundaryPair;
use crate::scattering::{Branch, ContinuumPoint, T0Evaluator};
use crate::spectrum::eigenvalues_closed_form;
use crate::tol;

/// Point of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        Self::from_f64(v)
    }
}

/// `R(y) = (diag(tanh(2πy) - i sech(2πy), tanh(2πy) + i sech(2πy)) + 1) / 2`.
pub fn r_matrix(y: impl Into<ExtReal>) -> Mat2C {
    match y.into() {
        ExtReal::NegInf => Mat2C::zero(),
        ExtReal::PosInf => Mat2C::identity(),
        ExtReal::Finite(y) => {
            let th = (TAU * y).tanh();
            let sech = 1.0 / (TAU * y).cosh();
            Mat2C::diag(
                c(0.5 * (th + 1.0), -0.5 * sech),
                c(0.5 * (th + 1.0), 0.5 * sech),
            )
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Edge {
    B1,
    B2,
    B3,
    B4,
}

/// Continuum point reached by `λ(x)`; `x = 0` is the glued point `±inf`.
pub fn continuum_point_of_x(x: ExtReal) -> ContinuumPoint {
    match x {
        ExtReal::PosInf => ContinuumPoint::threshold(Branch::Pos),
        ExtReal::NegInf => ContinuumPoint::threshold(Branch::Neg),
        ExtReal::Finite(x) => ContinuumPoint::from_position(x),
    }
}

/// Edge value with `T0` taken from a prepared evaluator.
pub fn gamma_edge_with(ev: &T0Evaluator, edge: Edge, param: ExtReal) -> Result<Mat2C> {
    let one = Mat2C::identity();
    Ok(match edge {
        Edge::B1 => one + r_matrix(param) * ev.eval(ContinuumPoint::threshold(Branch::Pos))?,
        Edge::B2 => one + ev.eval(continuum_point_of_x(param))?,
        Edge::B3 => one + r_matrix(param) * ev.eval(ContinuumPoint::threshold(Branch::Neg))?,
        Edge::B4 => one,
    })
}

pub fn gamma_edge(pair: &BoundaryPair, edge: Edge, param: impl Into<ExtReal>) -> Result<Mat2C> {
    gamma_edge_with(&T0Evaluator::new(pair), edge, param.into())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopSample {
    pub edge: Edge,
    /// `y` on B1/B3, `x` on B2 and B4; infinite at corners.
    pub param: f64,
    pub gamma: Mat2C,
    pub det: Complex,
    pub unwrapped_phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLoop {
    pub samples: Vec<LoopSample>,
    pub winding: i64,
    pub closure_residual: f64,
    /// Largest `||det Γ| - 1|` over the samples.
    pub max_modulus_defect: f64,
    /// Largest phase increment between consecutive samples.
    pub max_phase_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopOptions {
    /// Cap on the phase increment between consecutive samples.
    pub phase_cap: f64,
    /// Initial samples on `y ∈ [-Y, Y]` for B1 and B3.
    pub edge_points: usize,
    pub edge_half_width: f64,
    /// Initial samples in `s ∈ [0, 1]` per continuum branch on B2.
    pub branch_points: usize,
    pub max_depth: u32,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self {
            phase_cap: FRAC_PI_2,
            edge_points: 31,
            edge_half_width: 3.0,
            branch_points: 33,
            max_depth: 40,
        }
    }
}

struct Raw {
    edge: Edge,
    param: f64,
    gamma: Mat2C,
}

fn step_phase(a: Complex, b: Complex) -> f64 {
    (b / a).arg()
}

/// Samples `f` on `[a, b]` from `n` uniform points, bisecting until each
/// phase increment of `det f` is below the cap.
fn adaptive_segment(
    f: &dyn Fn(f64) -> Result<Mat2C>,
    a: f64,
    b: f64,
    n: usize,
    opts: &LoopOptions,
) -> Result<Vec<(f64, Mat2C)>> {
    let n = n.max(2);
    let mut init = Vec::with_capacity(n);
    for i in 0..n {
        let u = a + (b - a) * i as f64 / (n - 1) as f64;
        init.push((u, f(u)?));
    }
    let mut out = vec![init[0]];
    for w in init.windows(2) {
        bisect(f, w[0], w[1], opts, opts.max_depth, &mut out)?;
    }
    Ok(out)
}

fn bisect(
    f: &dyn Fn(f64) -> Result<Mat2C>,
    left: (f64, Mat2C),
    right: (f64, Mat2C),
    opts: &LoopOptions,
    depth: u32,
    out: &mut Vec<(f64, Mat2C)>,
) -> Result<()> {
    let jump = step_phase(left.1.det(), right.1.det()).abs();
    if jump < opts.phase_cap || depth == 0 {
        out.push(right);
        return Ok(());
    }
    let mid_u = 0.5 * (left.0 + right.0);
    let mid = (mid_u, f(mid_u)?);
    bisect(f, left, mid, opts, depth - 1, out)?;
    bisect(f, mid, right, opts, depth - 1, out)
}

/// Position `x` of a continuum point, `±inf` at the thresholds.
fn x_of(p: ContinuumPoint) -> f64 {
    let x = -4.0 * p.s.ln();
    match p.branch {
        Branch::Pos => x,
        Branch::Neg => -x,
    }
}

/// Traverses B1 (`y: -inf → +inf`), B2 (from `λ = m` up through `±inf` down
/// to `λ = -m`, i.e. `x: +inf → -inf`), B3 (`y: +inf → -inf`) and B4, which
/// is the clockwise orientation.
pub fn winding_with(pair: &BoundaryPair, opts: &LoopOptions) -> Result<BoundaryLoop> {
    let ev = T0Evaluator::new(pair);
    let t_plus = ev.eval(ContinuumPoint::threshold(Branch::Pos))?;
    let t_minus = ev.eval(ContinuumPoint::threshold(Branch::Neg))?;
    let one = Mat2C::identity();
    let yw = opts.edge_half_width;
    let mut raw: Vec<Raw> = Vec::new();
    let mut push = |edge: Edge, param: f64, gamma: Mat2C| raw.push(Raw { edge, param, gamma });

    // B1
    let b1 = |y: f64| Ok(one + r_matrix(y) * t_plus);
    push(
        Edge::B1,
        f64::NEG_INFINITY,
        one + r_matrix(ExtReal::NegInf) * t_plus,
    );
    for (y, g) in adaptive_segment(&b1, -yw, yw, opts.edge_points, opts)? {
        push(Edge::B1, y, g);
    }
    push(Edge::B1, f64::INFINITY, one + t_plus);

    // B2, positive branch from threshold to infinity, then the negative one back
    let pos = |s: f64| {
        Ok(one
            + ev.eval(ContinuumPoint {
                branch: Branch::Pos,
                s,
            })?)
    };
    for (s, g) in adaptive_segment(&pos, 0.0, 1.0, opts.branch_points, opts)? {
        push(
            Edge::B2,
            x_of(ContinuumPoint {
                branch: Branch::Pos,
                s,
            }),
            g,
        );
    }
    let neg = |s: f64| {
        Ok(one
            + ev.eval(ContinuumPoint {
                branch: Branch::Neg,
                s,
            })?)
    };
    for (s, g) in adaptive_segment(&neg, 1.0, 0.0, opts.branch_points, opts)? {
        push(
            Edge::B2,
            x_of(ContinuumPoint {
                branch: Branch::Neg,
                s,
            }),
            g,
        );
    }

    // B3
    let b3 = |y: f64| Ok(one + r_matrix(y) * t_minus);
    push(Edge::B3, f64::INFINITY, one + t_minus);
    for (y, g) in adaptive_segment(&b3, yw, -yw, opts.edge_points, opts)? {
        push(Edge::B3, y, g);
    }
    push(
        Edge::B3,
        f64::NEG_INFINITY,
        one + r_matrix(ExtReal::NegInf) * t_minus,
    );

    // B4 is constant; its two corners close the loop
    push(Edge::B4, f64::NEG_INFINITY, one);

    assemble(raw)
}

fn assemble(raw: Vec<Raw>) -> Result<BoundaryLoop> {
    let mut samples = Vec::with_capacity(raw.len());
    let mut phase = 0.0;
    let mut max_step: f64 = 0.0;
    let mut max_mod: f64 = 0.0;
    let mut prev: Option<Complex> = None;
    for s in raw {
        let det = s.gamma.det();
        max_mod = max_mod.max((det.norm() - 1.0).abs());
        match prev {
            None => phase = det.arg(),
            Some(p) => {
                let step = step_phase(p, det);
                max_step = max_step.max(step.abs());
                phase += step;
            }
        }
        prev = Some(det);
        samples.push(LoopSample {
            edge: s.edge,
            param: s.param,
            gamma: s.gamma,
            det,
            unwrapped_phase: phase,
        });
    }
    let total = samples.last().unwrap().unwrapped_phase - samples[0].unwrapped_phase;
    let turns = total / TAU;
    let winding = turns.round() as i64;
    let mut closure_residual = (turns - winding as f64).abs();
    if max_step >= PI - 1e-9 {
        // a half-turn step cannot be lifted unambiguously
        closure_residual = closure_residual.max(0.5);
    }
    if closure_residual >= tol::LOOP_CLOSURE {
        return Err(Error::NonClosure(closure_residual));
    }
    Ok(BoundaryLoop {
        samples,
        winding,
        closure_residual,
        max_modulus_defect: max_mod,
        max_phase_step: max_step,
    })
}

pub fn winding(pair: &BoundaryPair, refine_tol: f64) -> Result<BoundaryLoop> {
    winding_with(
        pair,
        &LoopOptions {
            phase_cap: refine_tol,
            ..LoopOptions::default()
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct LevinsonReport {
    pub winding: i64,
    pub eigen_count: usize,
    pub holds: bool,
}

/// Levinson check plus the loop diagnostics that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct LevinsonVerdict {
    pub report: LevinsonReport,
    pub closure_residual: f64,
    pub samples_used: usize,
    pub max_modulus_defect: f64,
}

pub fn levinson_verdict(pair: &BoundaryPair) -> Result<LevinsonVerdict> {
    let lp = winding(pair, FRAC_PI_2)?;
    let spectrum = eigenvalues_closed_form(pair)?;
    let eigen_count = spectrum.total_count;
    Ok(LevinsonVerdict {
        report: LevinsonReport {
            winding: lp.winding,
            eigen_count,
            holds: lp.winding == -(eigen_count as i64),
        },
        closure_residual: lp.closure_residual,
        samples_used: lp.samples.len(),
        max_modulus_defect: lp.max_modulus_defect,
    })
}
