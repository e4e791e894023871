//! Command-line front end.
//!
//! Every command writes a single JSON document (or CSV table) and maps
//! library errors onto exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, including negative findings such as a non-admissible pair |
//! | 2 | malformed matrix or config |
//! | 3 | invalid input or non-admissible pair |
//! | 4 | verification failure |
//! | 5 | numerical degeneracy |

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, Complex, Mat2C};
use crate::error::Error;
use crate::extensions::{
    admissibility_diagnostics, check_admissible, classify, random_admissible, sweep_seed,
    BoundaryPair,
};
use crate::scattering::{s_from_t0, unitarity_defect_of, Branch, ContinuumPoint, T0Evaluator};
use crate::spectrum::{eigenvalue_oracle_scan, eigenvalues_closed_form_with, SpectralReport};
use crate::tol;
use crate::topology::levinson_verdict;
use crate::waveop::{bound_state_trace, GridFunction, GridSpec, WaveOperator};
use crate::weyl_green::{boundary_residual, green_free, green_perturbed};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

/// JSON encoding of a 2x2 complex matrix, row-major `[re, im]` pairs.
pub type MatrixJson = [[[f64; 2]; 2]; 2];

pub fn matrix_to_json(m: &Mat2C) -> MatrixJson {
    let e = |z: Complex| [z.re, z.im];
    [[e(m.a11), e(m.a12)], [e(m.a21), e(m.a22)]]
}

pub fn matrix_from_json(j: &MatrixJson) -> Mat2C {
    let z = |p: [f64; 2]| c(p[0], p[1]);
    Mat2C::new(z(j[0][0]), z(j[0][1]), z(j[1][0]), z(j[1][1]))
}

/// Byte offset of a 1-based line/column pair.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    start + column.saturating_sub(1)
}

/// Parses `[[[re,im],[re,im]],[[re,im],[re,im]]]`; errors carry the byte
/// offset of the offending token.
pub fn parse_matrix(text: &str) -> Result<Mat2C, Error> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        position: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let m = matrix_from_json(&j);
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    Ok(m)
}

fn parse_complex(text: &str) -> Result<Complex, Error> {
    let p: [f64; 2] = serde_json::from_str(text).map_err(|e| Error::Parse {
        position: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    Ok(c(p[0], p[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub arithmetic: f64,
    pub class: f64,
    pub loop_closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            arithmetic: tol::ARITHMETIC,
            class: tol::CLASS,
            loop_closure: tol::LOOP_CLOSURE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub count: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            count: 500,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            points: 4096,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mass: f64,
    pub tolerances: Tolerances,
    pub sweep: SweepConfig,
    pub grid: GridConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            tolerances: Tolerances::default(),
            sweep: SweepConfig::default(),
            grid: GridConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            position: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if self.sweep.count < 1 {
            return Err(Error::InvalidInput("sweep count must be at least 1".into()));
        }
        if !self.grid.points.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid N must be a power of two, got {}",
                self.grid.points
            )));
        }
        let t = &self.tolerances;
        if [t.arithmetic, t.class, t.loop_closure]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "diracpoint",
    version,
    about = "Point interactions for the 1-D Dirac operator"
)]
pub struct Cli {
    /// Mass `m > 0`; overrides the config file.
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    /// Matrix C as `[[[re,im],[re,im]],[[re,im],[re,im]]]`.
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: String,
    /// Matrix D, same encoding.
    #[arg(long = "D", allow_hyphen_values = true)]
    pub d: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check admissibility and classify a pair.
    Admissible(PairArgs),
    /// Bound states in the gap.
    Eigs {
        #[command(flatten)]
        pair: PairArgs,
        /// Cross-check against the singular-value scan and eigenfunction residuals.
        #[arg(long)]
        verify: bool,
    },
    /// `T0` and `S` along both continuum branches.
    Smatrix {
        #[command(flatten)]
        pair: PairArgs,
        /// Points per branch in the compact coordinate `s ∈ [0, 1]`.
        #[arg(long, default_value_t = 33)]
        samples: usize,
    },
    /// Winding number versus bound-state count.
    Levinson(PairArgs),
    /// Levinson check over random admissible pairs.
    Sweep {
        #[arg(long)]
        count: Option<usize>,
        /// Include one verdict per pair.
        #[arg(long)]
        per_pair: bool,
    },
    /// Isometry defect of the wave operator on a Gaussian probe.
    Waveop {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long = "L")]
        half_width: Option<f64>,
        #[arg(long = "N")]
        points: Option<usize>,
        /// Also report the exploratory trace diagnostic (needs N <= 1024).
        #[arg(long)]
        trace: bool,
    },
    /// Resolvent kernel at `(x, y, z)`.
    Green {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        /// Spectral parameter as `[re, im]`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
}

/// Result of one invocation: exit code, report body and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::NotAdmissible
        | Error::NotUnitary { .. }
        | Error::InvalidInput(_)
        | Error::OnSpectrum(_)
        | Error::AtThreshold(_)
        | Error::PoleAtMinusM
        | Error::InGap(_)
        | Error::OriginEvaluation
        | Error::DiagonalPoint
        | Error::OriginOrThreshold => EXIT_INVALID,
        Error::NonClosure(_) => EXIT_VERIFY,
        Error::Singular { .. }
        | Error::DegenerateLimit(_)
        | Error::ClassificationAmbiguous { .. }
        | Error::NearEigenvalue(_)
        | Error::NearSingular
        | Error::DegenerateQuadratic => EXIT_DEGENERATE,
    }
}

struct Ctx {
    cfg: RunConfig,
    format: Option<Format>,
}

struct Report {
    body: String,
    code: i32,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

impl Ctx {
    fn pair(&self, args: &PairArgs) -> Result<BoundaryPair, Failure> {
        let cm = parse_matrix(&args.c)?;
        let dm = parse_matrix(&args.d)?;
        Ok(BoundaryPair::new(cm, dm, self.cfg.mass)?)
    }

    fn json_only(&self) -> Result<(), Failure> {
        match self.format {
            Some(Format::Csv) => {
                Err(Error::InvalidInput("this command only emits JSON".into()).into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Serialize)]
struct PairJson {
    #[serde(rename = "C")]
    c: MatrixJson,
    #[serde(rename = "D")]
    d: MatrixJson,
    mass: f64,
}

impl From<&BoundaryPair> for PairJson {
    fn from(p: &BoundaryPair) -> Self {
        Self {
            c: matrix_to_json(&p.c),
            d: matrix_to_json(&p.d),
            mass: p.mass,
        }
    }
}

#[derive(Serialize)]
struct AdmissibleJson {
    admissible: bool,
    class: Option<&'static str>,
    hermiticity_defect: f64,
    det_ccdd: [f64; 2],
}

fn cmd_admissible(ctx: &Ctx, args: &PairArgs) -> Result<Report, Failure> {
    ctx.json_only()?;
    let cm = parse_matrix(&args.c)?;
    let dm = parse_matrix(&args.d)?;
    let (herm, det) = admissibility_diagnostics(&cm, &dm);
    let admissible =
        check_admissible(&cm, &dm, 1e-10) && BoundaryPair::new(cm, dm, ctx.cfg.mass).is_ok();
    let class = if admissible {
        let pair = BoundaryPair::new(cm, dm, ctx.cfg.mass)?;
        Some(classify(&pair, ctx.cfg.tolerances.class)?.name())
    } else {
        None
    };
    let body = json(&AdmissibleJson {
        admissible,
        class,
        hermiticity_defect: herm,
        det_ccdd: [det.re, det.im],
    });
    Ok(Report {
        body,
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct EigJson {
    lambda: f64,
    multiplicity: usize,
    t: f64,
}

#[derive(Serialize)]
struct VerifyJson {
    oracle_agreement: bool,
    oracle_lambdas: Vec<f64>,
    max_location_error: f64,
    max_dirac_residual: f64,
    max_boundary_residual: f64,
}

#[derive(Serialize)]
struct EigsJson {
    count: usize,
    class: &'static str,
    eigenvalues: Vec<EigJson>,
    #[serde(skip_serializing_if = "Option::is_none", flatten)]
    verify: Option<VerifyJson>,
}

/// Oracle agreement and eigenfunction residuals for a spectral report.
pub fn verify_spectrum(
    pair: &BoundaryPair,
    rep: &SpectralReport,
) -> Result<(bool, Vec<f64>, f64, f64, f64), Error> {
    let m = pair.mass;
    let oracle = eigenvalue_oracle_scan(pair, 4000);
    let closed: Vec<f64> = rep.eigenvalues.iter().map(|e| e.lambda).collect();
    let mut max_err: f64 = 0.0;
    let mut agree = oracle.len() == closed.len();
    if agree {
        for (a, b) in oracle.iter().zip(&closed) {
            max_err = max_err.max((a - b).abs());
        }
        agree = max_err < 1e-8 * m;
    } else {
        max_err = f64::INFINITY;
    }
    let h = 1e-4;
    let mut dirac: f64 = 0.0;
    let mut bdry: f64 = 0.0;
    for e in &rep.eigenvalues {
        for idx in 0..e.multiplicity {
            let ef = crate::spectrum::Eigenfunction::new(pair, e, idx)?;
            for x in [-1.3, -0.4, 0.35, 1.1] {
                let f = |y: f64| ef.eval(y).expect("off-origin evaluation");
                let hf = crate::weyl_green::dirac_apply_fd(f, x, h, m);
                let fx = f(x);
                let r = ((hf[0] - fx[0] * e.lambda).norm_sqr()
                    + (hf[1] - fx[1] * e.lambda).norm_sqr())
                .sqrt();
                dirac = dirac.max(r);
            }
            let fm = ef.eval(-f64::MIN_POSITIVE)?;
            let fp = ef.eval(f64::MIN_POSITIVE)?;
            bdry = bdry.max(boundary_residual(pair, fm, fp));
        }
    }
    let ok = agree && dirac < 1e-6 && bdry < 1e-8;
    Ok((ok, oracle, max_err, dirac, bdry))
}

fn cmd_eigs(ctx: &Ctx, args: &PairArgs, verify: bool) -> Result<Report, Failure> {
    ctx.json_only()?;
    let pair = ctx.pair(args)?;
    let rep = eigenvalues_closed_form_with(&pair, ctx.cfg.tolerances.class)?;
    let mut code = EXIT_OK;
    let verify = if verify {
        let (ok, oracle, err, dirac, bdry) = verify_spectrum(&pair, &rep)?;
        if !ok {
            code = EXIT_VERIFY;
        }
        Some(VerifyJson {
            oracle_agreement: ok,
            oracle_lambdas: oracle,
            max_location_error: if err.is_finite() { err } else { f64::MAX },
            max_dirac_residual: dirac,
            max_boundary_residual: bdry,
        })
    } else {
        None
    };
    let body = json(&EigsJson {
        count: rep.total_count,
        class: rep.pair_class.name(),
        eigenvalues: rep
            .eigenvalues
            .iter()
            .map(|e| EigJson {
                lambda: e.lambda,
                multiplicity: e.multiplicity,
                t: e.t_root,
            })
            .collect(),
        verify,
    });
    Ok(Report { body, code })
}

/// One row of the scattering table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmatrixRow {
    pub branch: &'static str,
    pub s: f64,
    /// `±inf` at `s = 1`; serialized as `null` in JSON.
    pub lambda: f64,
    pub t0: MatrixJson,
    pub s_matrix: MatrixJson,
    pub unitarity_defect: f64,
}

pub fn smatrix_rows(pair: &BoundaryPair, samples: usize) -> Result<Vec<SmatrixRow>, Error> {
    if samples < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 samples per branch".into(),
        ));
    }
    let ev = T0Evaluator::new(pair);
    let mut rows = Vec::with_capacity(2 * samples);
    for branch in [Branch::Neg, Branch::Pos] {
        for i in 0..samples {
            let s = i as f64 / (samples - 1) as f64;
            let p = ContinuumPoint::new(branch, s)?;
            let t0 = ev.eval(p)?;
            let sm = s_from_t0(branch, &t0);
            rows.push(SmatrixRow {
                branch: branch.name(),
                s,
                lambda: p.lambda(pair.mass),
                t0: matrix_to_json(&t0),
                s_matrix: matrix_to_json(&sm),
                unitarity_defect: unitarity_defect_of(&t0).max(sm.unitarity_defect()),
            });
        }
    }
    Ok(rows)
}

pub fn smatrix_csv(rows: &[SmatrixRow]) -> String {
    let mut out = String::from("branch,s,lambda");
    for name in ["t0", "s"] {
        for ij in ["11", "12", "21", "22"] {
            out.push_str(&format!(",{name}{ij}_re,{name}{ij}_im"));
        }
    }
    out.push_str(",unitarity_defect\n");
    for r in rows {
        out.push_str(&format!("{},{:?},{:?}", r.branch, r.s, r.lambda));
        for m in [&r.t0, &r.s_matrix] {
            for row in m {
                for z in row {
                    out.push_str(&format!(",{:?},{:?}", z[0], z[1]));
                }
            }
        }
        out.push_str(&format!(",{:?}\n", r.unitarity_defect));
    }
    out
}

fn cmd_smatrix(ctx: &Ctx, args: &PairArgs, samples: usize) -> Result<Report, Failure> {
    let pair = ctx.pair(args)?;
    let rows = smatrix_rows(&pair, samples)?;
    let body = match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => smatrix_csv(&rows),
        Format::Json => json(&rows),
    };
    Ok(Report {
        body,
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct LevinsonJson {
    winding: i64,
    eigen_count: usize,
    holds: bool,
    closure_residual: f64,
    samples_used: usize,
    max_modulus_defect: f64,
}

fn cmd_levinson(ctx: &Ctx, args: &PairArgs) -> Result<Report, Failure> {
    ctx.json_only()?;
    let pair = ctx.pair(args)?;
    let v = levinson_verdict(&pair)?;
    let within = v.closure_residual < ctx.cfg.tolerances.loop_closure;
    let holds = v.report.holds && within;
    let body = json(&LevinsonJson {
        winding: v.report.winding,
        eigen_count: v.report.eigen_count,
        holds,
        closure_residual: v.closure_residual,
        samples_used: v.samples_used,
        max_modulus_defect: v.max_modulus_defect,
    });
    Ok(Report {
        body,
        code: if holds { EXIT_OK } else { EXIT_VERIFY },
    })
}

/// Verdict for one sweep item.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepItem {
    pub index: usize,
    pub seed: u64,
    pub winding: Option<i64>,
    pub eigen_count: Option<usize>,
    pub holds: bool,
    pub degenerate: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub total: usize,
    pub holds: usize,
    pub degenerate_skipped: usize,
    pub failures: Vec<SweepItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<SweepItem>>,
}

fn sweep_item(index: usize, base: u64, mass: f64, closure_tol: f64) -> SweepItem {
    let seed = sweep_seed(base, index as u64);
    let mut item = SweepItem {
        index,
        seed,
        winding: None,
        eigen_count: None,
        holds: false,
        degenerate: false,
        error: None,
    };
    let verdict = random_admissible(seed, mass).and_then(|p| levinson_verdict(&p));
    match verdict {
        Ok(v) => {
            item.winding = Some(v.report.winding);
            item.eigen_count = Some(v.report.eigen_count);
            item.holds = v.report.holds && v.closure_residual < closure_tol;
        }
        Err(e) => {
            item.degenerate = exit_code(&e) == EXIT_DEGENERATE;
            item.error = Some(e.to_string());
        }
    }
    item
}

/// Levinson sweep over `count` pairs; item `i` uses `sweep_seed(seed, i)`.
pub fn run_sweep(
    count: usize,
    seed: u64,
    mass: f64,
    closure_tol: f64,
    per_pair: bool,
) -> SweepReport {
    let mut items: Vec<SweepItem> = (0..count)
        .into_par_iter()
        .map(|i| sweep_item(i, seed, mass, closure_tol))
        .collect();
    items.sort_by_key(|it| it.index);
    let holds = items.iter().filter(|it| it.holds).count();
    let degenerate_skipped = items.iter().filter(|it| it.degenerate).count();
    let failures = items
        .iter()
        .filter(|it| !it.holds && !it.degenerate)
        .cloned()
        .collect();
    SweepReport {
        total: count,
        holds,
        degenerate_skipped,
        failures,
        pairs: per_pair.then_some(items),
    }
}

fn cmd_sweep(ctx: &Ctx, count: Option<usize>, per_pair: bool) -> Result<Report, Failure> {
    ctx.json_only()?;
    let count = count.unwrap_or(ctx.cfg.sweep.count);
    if count < 1 {
        return Err(Error::InvalidInput("sweep count must be at least 1".into()).into());
    }
    let rep = run_sweep(
        count,
        ctx.cfg.sweep.seed,
        ctx.cfg.mass,
        ctx.cfg.tolerances.loop_closure,
        per_pair,
    );
    let code = if rep.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    };
    Ok(Report {
        body: json(&rep),
        code,
    })
}

#[derive(Serialize)]
struct TraceJson {
    value: f64,
    exploratory: bool,
    note: &'static str,
}

#[derive(Serialize)]
struct WaveopJson {
    defect: f64,
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    points: usize,
    pair: PairJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceJson>,
}

fn cmd_waveop(
    ctx: &Ctx,
    args: &PairArgs,
    half_width: Option<f64>,
    points: Option<usize>,
    trace: bool,
) -> Result<Report, Failure> {
    let pair = ctx.pair(args)?;
    let grid = GridSpec::new(
        half_width.unwrap_or(ctx.cfg.grid.half_width),
        points.unwrap_or(ctx.cfg.grid.points),
    )?;
    let w = WaveOperator::new(&pair, &grid)?;
    let f = GridFunction::gaussian_probe(&grid);
    let wf = w.apply(&f)?;
    let n0 = f.norm(&grid);
    let defect = (wf.norm(&grid) - n0).abs() / n0;
    let body = match ctx.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut out = String::from("x,f_sq,wf_sq\n");
            for ((x, a), b) in grid.x_nodes.iter().zip(&f.values).zip(&wf.values) {
                let fa = a[0].norm_sqr() + a[1].norm_sqr();
                let fb = b[0].norm_sqr() + b[1].norm_sqr();
                out.push_str(&format!("{x:?},{fa:?},{fb:?}\n"));
            }
            out
        }
        Format::Json => {
            let trace = if trace {
                let t = bound_state_trace(&pair, &grid)?;
                Some(TraceJson {
                    value: t.trace,
                    exploratory: t.exploratory,
                    note: "periodic discretization of a non-periodic symbol; not a reliable count",
                })
            } else {
                None
            };
            json(&WaveopJson {
                defect,
                half_width: grid.half_width,
                points: grid.points,
                pair: (&pair).into(),
                trace,
            })
        }
    };
    Ok(Report {
        body,
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct GreenJson {
    x: f64,
    y: f64,
    z: [f64; 2],
    green: MatrixJson,
    green_free: MatrixJson,
}

fn cmd_green(ctx: &Ctx, args: &PairArgs, x: f64, y: f64, z: &str) -> Result<Report, Failure> {
    ctx.json_only()?;
    let pair = ctx.pair(args)?;
    let z = parse_complex(z)?;
    let g = green_perturbed(x, y, z, &pair)?;
    let g0 = green_free(x, y, z, pair.mass)?;
    let body = json(&GreenJson {
        x,
        y,
        z: [z.re, z.im],
        green: matrix_to_json(&g),
        green_free: matrix_to_json(&g0),
    });
    Ok(Report {
        body,
        code: EXIT_OK,
    })
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(m) = cli.mass {
        cfg.mass = m;
    }
    if let Some(s) = cli.seed {
        cfg.sweep.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.output.format = Some(f);
    }
    if let Some(p) = &cli.out {
        cfg.output.path = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<(Report, Option<PathBuf>), Failure> {
    let cfg = load_config(cli)?;
    let out = cfg.output.path.clone();
    let ctx = Ctx {
        format: cfg.output.format,
        cfg,
    };
    let rep = match &cli.command {
        Command::Admissible(p) => cmd_admissible(&ctx, p)?,
        Command::Eigs { pair, verify } => cmd_eigs(&ctx, pair, *verify)?,
        Command::Smatrix { pair, samples } => cmd_smatrix(&ctx, pair, *samples)?,
        Command::Levinson(p) => cmd_levinson(&ctx, p)?,
        Command::Sweep { count, per_pair } => cmd_sweep(&ctx, *count, *per_pair)?,
        Command::Waveop {
            pair,
            half_width,
            points,
            trace,
        } => cmd_waveop(&ctx, pair, *half_width, *points, *trace)?,
        Command::Green { pair, x, y, z } => cmd_green(&ctx, pair, *x, *y, z)?,
    };
    Ok((rep, out))
}

/// Runs the CLI on `args` (including the program name) without touching the
/// process; output files named by `--out` are written.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok((rep, Some(path))) => match std::fs::write(&path, &rep.body) {
            Ok(()) => Outcome {
                code: rep.code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome {
                code: EXIT_INVALID,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        Ok((rep, None)) => Outcome {
            code: rep.code,
            stdout: rep.body,
            stderr: String::new(),
        },
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}
