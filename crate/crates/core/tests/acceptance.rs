//! Acceptance criteria 1-8. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use diracpoint::algebra::{c, r, Mat2C, I};
use diracpoint::cli::{self, run_sweep, verify_spectrum};
use diracpoint::extensions::{from_unitary, random_admissible, random_unitary, sweep_seed};
use diracpoint::scattering::{krein_eps, s_matrix, t0, t0_rank_one, Branch, ContinuumPoint};
use diracpoint::spectrum::eigenvalues_closed_form;
use diracpoint::topology::winding;
use diracpoint::waveop::{isometry_defect, wave_operator_apply, GridFunction, GridSpec};
use diracpoint::weyl_green::{
    b_matrix, boundary_residual, dirac_apply_fd, green_free, green_perturbed, weyl_m, EnergyPoint,
};
use diracpoint::{BoundaryPair, Error};

const MASS: f64 = 1.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn pair(cm: Mat2C, dm: Mat2C) -> BoundaryPair {
    BoundaryPair::new(cm, dm, MASS).expect("admissible")
}

fn random_pairs(base: u64, n: usize) -> Vec<BoundaryPair> {
    (0..n)
        .map(|i| random_admissible(sweep_seed(base, i as u64), MASS).expect("Haar pair"))
        .collect()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn levinson_sweep() -> Outcome {
    let start = Instant::now();
    let rep = run_sweep(500, 7, MASS, 0.05, true);
    let secs = start.elapsed().as_secs_f64();
    let mut counts = [0usize; 3];
    for it in rep.pairs.as_ref().unwrap() {
        if let Some(n) = it.eigen_count {
            counts[n.min(2)] += 1;
        }
    }
    ensure(
        rep.failures.is_empty(),
        format!(
            "{} failures, first {:?}",
            rep.failures.len(),
            rep.failures.first()
        ),
    )?;
    ensure(
        rep.holds + rep.degenerate_skipped == 500,
        "items unaccounted for",
    )?;
    ensure(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "{}/500 hold, {} degenerate, eigen counts 0/1/2 = {}/{}/{}, {secs:.2} s",
        rep.holds, rep.degenerate_skipped, counts[0], counts[1], counts[2]
    ))
}

fn canonical_cases() -> Outcome {
    let one = Mat2C::identity();
    let zero = Mat2C::zero();
    let cases = [
        ("C=1,D=0", pair(one, zero), vec![], 0),
        ("C=0,D=1", pair(zero, one), vec![], 0),
        (
            "C=diag(-1/2,1/2),D=1",
            pair(Mat2C::diag_real(-0.5, 0.5), one),
            vec![(0.0, 2)],
            -2,
        ),
        (
            "C=diag(-1,1),D=diag(1,0)",
            pair(Mat2C::diag_real(-1.0, 1.0), Mat2C::diag_real(1.0, 0.0)),
            vec![(-0.6 * MASS, 1)],
            -1,
        ),
    ];
    for (name, p, eigs, w) in &cases {
        let rep = eigenvalues_closed_form(p).map_err(|e| format!("{name}: {e}"))?;
        let got: Vec<(f64, usize)> = rep
            .eigenvalues
            .iter()
            .map(|e| (e.lambda, e.multiplicity))
            .collect();
        ensure(
            got.len() == eigs.len(),
            format!("{name}: eigenvalues {got:?}"),
        )?;
        for ((l, k), (l0, k0)) in got.iter().zip(eigs) {
            ensure(
                (l - l0).abs() < 1e-8 && k == k0,
                format!("{name}: eigenvalues {got:?}"),
            )?;
        }
        let lp = winding(p, std::f64::consts::FRAC_PI_2).map_err(|e| format!("{name}: {e}"))?;
        ensure(lp.winding == *w, format!("{name}: winding {}", lp.winding))?;
    }
    let grid = GridSpec::new(40.0, 1024).unwrap();
    let f = GridFunction::gaussian_probe(&grid);
    ensure(
        wave_operator_apply(&cases[0].1, &f, &grid).unwrap() == f,
        "free W is not the identity",
    )?;
    for branch in [Branch::Neg, Branch::Pos] {
        for i in 0..=20 {
            let s = s_matrix(
                ContinuumPoint::new(branch, i as f64 / 20.0).unwrap(),
                &cases[1].1,
            )
            .unwrap();
            ensure(
                s.approx_eq(&Mat2C::scalar(r(-1.0)), 1e-12),
                "S is not -1 for C=0,D=1",
            )?;
        }
    }
    Ok("4 cases: locations, multiplicities and windings exact".into())
}

fn unitarity_suite() -> Outcome {
    let pairs = random_pairs(3, 500);
    let s_grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
    let mut worst_t: f64 = 0.0;
    let mut worst_s: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for p in &pairs {
        for branch in [Branch::Neg, Branch::Pos] {
            for &s in &s_grid {
                let pt = ContinuumPoint::new(branch, s).unwrap();
                let t = t0(pt, p).map_err(|e| e.to_string())?;
                worst_t = worst_t.max((Mat2C::identity() + t).unitarity_defect());
                worst_s = worst_s.max(s_matrix(pt, p).unwrap().unitarity_defect());
            }
        }
        let sm = s_matrix(ContinuumPoint::infinity(Branch::Neg), p).unwrap();
        let sp = s_matrix(ContinuumPoint::infinity(Branch::Pos), p).unwrap();
        worst_det = worst_det.max((sm.det() - sp.det()).norm());
    }
    ensure(worst_t < 1e-10, format!("1+T0 defect {worst_t:e}"))?;
    ensure(worst_s < 1e-10, format!("S defect {worst_s:e}"))?;
    ensure(worst_det < 1e-12, format!("det S(±inf) gap {worst_det:e}"))?;
    Ok(format!(
        "500 pairs, max defects 1+T0 {worst_t:.1e}, S {worst_s:.1e}, det gap {worst_det:.1e}"
    ))
}

/// Unitary with eigenvalue `-1`, giving a rank-one `D`.
fn rank_one_pair(seed: u64) -> BoundaryPair {
    let v = random_unitary(seed);
    let theta = (seed % 97) as f64 * 0.061 + 0.1;
    let u = v * Mat2C::diag(r(-1.0), c(theta.cos(), theta.sin())) * v.adjoint();
    from_unitary(&u, MASS).expect("admissible")
}

fn identity_suite() -> Outcome {
    let mut worst_b: f64 = 0.0;
    for i in 0..=60 {
        let a = 1.0 + 10f64.powf(-6.0 + 10.0 * i as f64 / 60.0);
        for lam in [a * MASS, -a * MASS] {
            let b = b_matrix(lam, MASS).unwrap();
            let lhs = (b * b).scale(I);
            let rhs = weyl_m(EnergyPoint::plus(lam), MASS).unwrap();
            worst_b = worst_b.max((lhs - rhs).max_abs() / rhs.max_abs());
        }
    }
    ensure(worst_b < 1e-12, format!("iB^2 vs M: {worst_b:e}"))?;

    let pairs = random_pairs(4, 100);
    let mut worst_adj: f64 = 0.0;
    let mut worst_inf: f64 = 0.0;
    for p in &pairs {
        for eps in [1e-2, 1e-6] {
            for lam in [-3.0, -1.2, -0.4, 0.3, 0.9, 1.7, 5.0] {
                let up = krein_eps(lam, eps, p).map_err(|e| e.to_string())?;
                let down = krein_eps(lam, -eps, p).map_err(|e| e.to_string())?;
                worst_adj = worst_adj.max((down.adjoint() - up).max_abs() / up.max_abs().max(1.0));
            }
        }
        let tm = t0(ContinuumPoint::infinity(Branch::Neg), p).unwrap();
        let tp = t0(ContinuumPoint::infinity(Branch::Pos), p).unwrap();
        worst_inf = worst_inf.max((tm - tp).max_abs());
    }
    ensure(worst_adj < 1e-12, format!("adjoint identity {worst_adj:e}"))?;
    ensure(
        worst_inf < 1e-12,
        format!("T0(-inf) vs T0(+inf) {worst_inf:e}"),
    )?;

    let mut worst_r1: f64 = 0.0;
    for seed in 0..50 {
        let p = rank_one_pair(seed);
        for branch in [Branch::Neg, Branch::Pos] {
            for s in [0.05, 0.3, 0.5, 0.8, 0.97] {
                let pt = ContinuumPoint::new(branch, s).unwrap();
                let full = t0(pt, &p).map_err(|e| e.to_string())?;
                let red = t0_rank_one(pt, &p).map_err(|e| e.to_string())?;
                worst_r1 = worst_r1.max((full - red).max_abs());
            }
        }
    }
    ensure(worst_r1 < 1e-12, format!("rank-one path {worst_r1:e}"))?;
    Ok(format!(
        "iB^2 {worst_b:.1e}, adjoint {worst_adj:.1e}, T0(±inf) {worst_inf:.1e}, rank-one {worst_r1:.1e}"
    ))
}

fn spectral_oracle() -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    let mut eigs = 0;
    let (mut err, mut dirac, mut bdry): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for p in random_pairs(5, 200) {
        let rep = match eigenvalues_closed_form(&p) {
            Ok(r) => r,
            Err(Error::ClassificationAmbiguous { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let (ok, oracle, e, d, b) = verify_spectrum(&p, &rep).map_err(|e| e.to_string())?;
        ensure(
            ok,
            format!(
                "closed form {:?} vs oracle {oracle:?}, residuals {d:e} {b:e}",
                rep.eigenvalues
            ),
        )?;
        checked += 1;
        eigs += rep.total_count;
        err = err.max(e);
        dirac = dirac.max(d);
        bdry = bdry.max(b);
    }
    ensure(
        checked + skipped == 200 && skipped <= 2,
        format!("{skipped} ambiguous pairs"),
    )?;
    Ok(format!(
        "{checked} pairs, {eigs} eigenvalues, location {err:.1e}, Dirac residual {dirac:.1e}, boundary {bdry:.1e}"
    ))
}

fn green_function() -> Outcome {
    let h = 1e-4;
    let zs = [
        c(0.3, 0.7),
        c(-0.2, 0.05),
        c(2.5, 1.0),
        c(-1.5, -0.4),
        c(0.0, -2.0),
    ];
    let pts = [(-1.3, 0.6), (0.4, 1.9), (-0.8, -0.3), (2.1, -0.5)];
    let mut ode: f64 = 0.0;
    let mut ode_pert: f64 = 0.0;
    let mut bc: f64 = 0.0;
    let mut adj: f64 = 0.0;
    let pairs = random_pairs(6, 20);
    for &z in &zs {
        for &(x, y) in &pts {
            for j in 0..2 {
                let col = |x: f64| {
                    let g = green_free(x, y, z, MASS).unwrap();
                    [g.entry(0, j), g.entry(1, j)]
                };
                let hf = dirac_apply_fd(col, x, h, MASS);
                let f = col(x);
                ode = ode.max((hf[0] - z * f[0]).norm().max((hf[1] - z * f[1]).norm()));
            }
        }
        for p in &pairs {
            for &(x, y) in &pts {
                let g = green_perturbed(x, y, z, p).map_err(|e| e.to_string())?;
                let gt = green_perturbed(y, x, z.conj(), p).map_err(|e| e.to_string())?;
                adj = adj.max((g.adjoint() - gt).max_abs() / g.max_abs());
                let gm = green_perturbed(-f64::MIN_POSITIVE, y, z, p).unwrap();
                let gp = green_perturbed(f64::MIN_POSITIVE, y, z, p).unwrap();
                for j in 0..2 {
                    let res = boundary_residual(
                        p,
                        [gm.entry(0, j), gm.entry(1, j)],
                        [gp.entry(0, j), gp.entry(1, j)],
                    );
                    bc = bc.max(res / p.scale());
                    let col = |x: f64| {
                        let g = green_perturbed(x, y, z, p).unwrap();
                        [g.entry(0, j), g.entry(1, j)]
                    };
                    let hf = dirac_apply_fd(col, x, h, MASS);
                    let f = col(x);
                    ode_pert =
                        ode_pert.max((hf[0] - z * f[0]).norm().max((hf[1] - z * f[1]).norm()));
                }
            }
        }
    }
    ensure(ode < 1e-6, format!("free ODE residual {ode:e}"))?;
    ensure(
        ode_pert < 1e-6,
        format!("perturbed ODE residual {ode_pert:e}"),
    )?;
    ensure(bc < 1e-6, format!("boundary relation {bc:e}"))?;
    ensure(adj < 1e-10, format!("adjoint symmetry {adj:e}"))?;
    Ok(format!(
        "ODE {ode:.1e} / {ode_pert:.1e}, boundary {bc:.1e}, adjoint {adj:.1e}"
    ))
}

fn wave_operator() -> Outcome {
    let grid = GridSpec::standard();
    let f = GridFunction::gaussian_probe(&grid);
    let free = BoundaryPair::free(MASS);
    ensure(
        wave_operator_apply(&free, &f, &grid).unwrap() == f,
        "free W is not the identity",
    )?;
    let k = pair(Mat2C::zero(), Mat2C::identity());
    let dk = isometry_defect(&k, &f, &grid).unwrap();
    ensure(dk < 1e-10, format!("C=0,D=1 defect {dk:e}"))?;
    let mut worst: f64 = 0.0;
    for p in random_pairs(8, 20) {
        worst = worst.max(isometry_defect(&p, &f, &grid).map_err(|e| e.to_string())?);
    }
    let p = pair(Mat2C::diag_real(-0.5, 0.5), Mat2C::identity());
    worst = worst.max(isometry_defect(&p, &f, &grid).unwrap());
    ensure(worst < 1e-3, format!("generic defect {worst:e}"))?;
    Ok(format!(
        "identity exact, C=0,D=1 defect {dk:.1e}, generic max defect {worst:.1e} (L=40, N=4096)"
    ))
}

fn determinism() -> Outcome {
    let one = "[[[1,0],[0,0]],[[0,0],[1,0]]]";
    let g = "[[[0.3,0],[0.2,0.1]],[[0.2,-0.1],[-0.7,0]]]";
    let cmds: Vec<Vec<&str>> = vec![
        vec!["admissible", "--C", g, "--D", one],
        vec!["eigs", "--C", g, "--D", one, "--verify"],
        vec!["smatrix", "--C", g, "--D", one],
        vec!["smatrix", "--C", g, "--D", one, "--format", "json"],
        vec!["levinson", "--C", g, "--D", one],
        vec!["sweep", "--count", "200", "--seed", "11", "--per-pair"],
        vec!["waveop", "--C", g, "--D", one, "--N", "1024"],
        vec![
            "green",
            "--C",
            g,
            "--D",
            one,
            "--x",
            "0.5",
            "--y",
            "-1",
            "--z",
            "[0.2,0.4]",
        ],
    ];
    for cmd in &cmds {
        let args = || std::iter::once("diracpoint").chain(cmd.iter().copied());
        let a = cli::run(args());
        let b = cli::run(args());
        ensure(
            a.code == 0 && !a.stdout.is_empty(),
            format!("{cmd:?} exited {}: {}", a.code, a.stderr),
        )?;
        ensure(a == b, format!("{cmd:?} is not reproducible"))?;
    }
    let bin = env!("CARGO_BIN_EXE_diracpoint");
    let run = || {
        std::process::Command::new(bin)
            .args(["sweep", "--count", "100", "--seed", "3"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    ensure(
        a.status.success() && a.stdout == b.stdout,
        "binary sweep output differs between runs",
    )?;
    Ok(format!(
        "{} commands byte-identical in-process, sweep identical across processes",
        cmds.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("Levinson sweep", levinson_sweep),
        ("canonical cases", canonical_cases),
        ("unitarity suite", unitarity_suite),
        ("identity suite", identity_suite),
        ("spectral oracle", spectral_oracle),
        ("Green function", green_function),
        ("wave operator", wave_operator),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
