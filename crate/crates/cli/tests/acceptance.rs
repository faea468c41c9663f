//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use geoecon::complexity::{
    brandt_rhs, cost, integrate_brandt, project_p, project_q, split_pq, HamiltonianPath, Normalization, PenaltyFactor,
    VariationState,
};
use geoecon::geometry::{christoffel, dual_coords, geodesic_residual, integrate_geodesic, metric};
use geoecon::open_system::{
    dissipation_integral, integrate_geodesic_open, quadratic_form, ConstantMetric, ControlPath, ExprMetric,
    InverseSquareMetric, MetricProvider,
};
use geoecon::qubit::{
    build_unitary, closed_form_q, evolve_density, exact_trajectory, integrate_q, paper_trajectory, phase_integral,
};
use geoecon::tomography::{direct_inversion, inversion_from_probabilities, outcome_probabilities, sample_counts};
use geoecon::{AlgebraElement, BlochState, ComplexMatrix, PauliString, WealthSpectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn geoecon(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_geoecon"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("geoecon {args:?}: {}", String::from_utf8_lossy(&out.stderr))
    })
}

/// `(r1, r2, A)` rows of a field CSV; `A = None` when masked.
fn field_rows(path: &Path) -> Vec<(f64, f64, Option<f64>)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("r1"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let a = if f[3] == "1" { None } else { Some(f[2].parse().unwrap()) };
            (f[0].parse().unwrap(), f[1].parse().unwrap(), a)
        })
        .collect()
}

const TIMES: [&str; 5] = ["0", "0.2", "0.4", "0.6", "0.8"];

fn criterion_1(dir: &Path) -> Outcome {
    let start = Instant::now();
    geoecon(
        dir,
        &[
            "sustainability-grid",
            "--out",
            "grid",
            "--delta",
            "0.1",
            "--threshold",
            "0.01",
            "--workers",
            "4",
        ],
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 60.0, || format!("runtime {elapsed:.1} s"))?;
    let mut fractions = Vec::new();
    for t in TIMES {
        let rows = field_rows(&dir.join(format!("grid/field_t{t}.csv")));
        check(rows.len() == 201 * 201, || format!("t={t}: {} cells", rows.len()))?;
        let shaded: Vec<_> = rows.iter().filter(|(_, _, a)| a.is_some_and(|a| a < 0.01)).collect();
        check(!shaded.is_empty(), || format!("t={t}: no shaded cells"))?;
        for &&(r1, r2, _) in &shaded {
            check(r1 * r1 + r2 * r2 < 1.0, || {
                format!("t={t}: shaded cell ({r1}, {r2}) outside the disc")
            })?;
        }
        for &(r1, r2, a) in &rows {
            if (r1 * r1 + r2 * r2).sqrt() <= 0.05 {
                check(a.is_some_and(|a| a < 0.01), || {
                    format!("t={t}: ({r1}, {r2}) near origin not shaded")
                })?;
            }
        }
        fractions.push(shaded.len() as f64 / rows.len() as f64);
    }
    Ok(format!(
        "5 fields of 201x201, runtime {elapsed:.2} s, shaded cell share {fractions:.3?}"
    ))
}

fn criterion_2(dir: &Path) -> Outcome {
    let text = fs::read_to_string(dir.join("grid/collapse.csv")).map_err(|e| e.to_string())?;
    let curve: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (d, f) = l.split_once(',').unwrap();
            (d.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    let deltas: Vec<f64> = curve.iter().map(|c| c.0).collect();
    check(deltas == [0.1, 0.2, 0.5, 1.0], || format!("deltas {deltas:?}"))?;
    for w in curve.windows(2) {
        check(w[1].1 <= w[0].1, || {
            format!("increase between Δ={} and Δ={}", w[0].0, w[1].0)
        })?;
    }
    check(curve.windows(2).any(|w| w[1].1 < w[0].1), || {
        "no strict decrease".into()
    })?;
    Ok(format!(
        "shaded fractions {:?}",
        curve.iter().map(|c| c.1).collect::<Vec<_>>()
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut q_err, mut u_err, mut n_err, mut p_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let e_d = rng.random_range(-2.0..2.0);
        let e_a = e_d + rng.random_range(0.05..3.0);
        let t = rng.random_range(0.0..20.0);
        let spec = WealthSpectrum::new(e_a, e_d).map_err(|e| e.to_string())?;
        let h = spec.coeffs();
        let q = integrate_q(&h, 0.0, t, 1e-3).map_err(|e| e.to_string())?;
        q_err = q_err.max(q.max_abs_diff(&closed_form_q(&spec, 0.0, t)));
        let u = build_unitary(&q, phase_integral(&h, 0.0, t, 1e-3)).map_err(|e| e.to_string())?;
        u_err = u_err.max(u.unitarity_error());
        let r0 = BlochState::new(oracle::point_in_shell(&mut rng, 0.0, 0.99)).unwrap();
        let r = evolve_density(&r0, &u).map_err(|e| e.to_string())?;
        n_err = n_err.max((r.norm() - r0.norm()).abs());

        let delta = spec.half_range();
        let period = PI / delta;
        let qp = integrate_q(&h, 0.0, period, 1e-3).map_err(|e| e.to_string())?;
        let up = build_unitary(&qp, 0.0).map_err(|e| e.to_string())?;
        let back = evolve_density(&r0, &up).map_err(|e| e.to_string())?;
        for (a, b) in [
            (back.r, r0.r),
            (
                paper_trajectory(&r0, delta, t + period).r,
                paper_trajectory(&r0, delta, t).r,
            ),
            (
                exact_trajectory(&r0, delta, t + period).r,
                exact_trajectory(&r0, delta, t).r,
            ),
        ] {
            for j in 0..3 {
                p_err = p_err.max((a[j] - b[j]).abs());
            }
        }
    }
    check(q_err < 1e-8, || format!("ODE vs closed form {q_err:e}"))?;
    check(u_err < 1e-10, || format!("unitarity {u_err:e}"))?;
    check(n_err < 1e-10, || format!("norm drift {n_err:e}"))?;
    check(p_err < 1e-9, || format!("period mismatch {p_err:e}"))?;
    Ok(format!(
        "max |q-q_cf| {q_err:.1e}, unitarity {u_err:.1e}, norm {n_err:.1e}, period {p_err:.1e}"
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut e_hess, mut e_inv, mut e_gamma, mut e_dual, mut e_sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let r = oracle::point_in_shell(&mut rng, 0.05, 0.9);
        let state = BlochState::new(r).unwrap();
        let m = metric(&state).map_err(|e| e.to_string())?;
        let gamma = christoffel(&state).map_err(|e| e.to_string())?;
        let hs = oracle::hessian(&oracle::entropy, r, 1e-4);
        let third = oracle::third_derivatives(&oracle::entropy, r, 1e-3);
        let chi = dual_coords(&state).map_err(|e| e.to_string())?.chi;
        let hf = oracle::hessian(&oracle::legendre_in_dual, chi, 1e-4);
        for j in 0..3 {
            for k in 0..3 {
                e_hess = e_hess.max((m.g_cov[j][k] + hs[j][k]).abs());
                let prod: f64 = (0..3).map(|l| m.g_cov[j][l] * m.g_contra[l][k]).sum();
                e_inv = e_inv.max((prod - if j == k { 1.0 } else { 0.0 }).abs());
                e_dual = e_dual.max((m.g_contra[j][k] - hf[j][k]).abs());
                for l in 0..3 {
                    let g = gamma[j][k][l];
                    e_gamma = e_gamma.max((g + 0.5 * third[j][k][l]).abs());
                    for p in [
                        gamma[j][l][k],
                        gamma[k][j][l],
                        gamma[k][l][j],
                        gamma[l][j][k],
                        gamma[l][k][j],
                    ] {
                        e_sym = e_sym.max((g - p).abs() / g.abs().max(1.0));
                    }
                }
            }
        }
    }
    check(e_hess < 1e-5, || format!("g vs -Hess S {e_hess:e}"))?;
    check(e_inv < 1e-8, || format!("g g^-1 - I {e_inv:e}"))?;
    check(e_gamma < 1e-4, || format!("Γ vs -½∂³S {e_gamma:e}"))?;
    check(e_dual < 1e-4, || format!("g^-1 vs Hess F {e_dual:e}"))?;
    check(e_sym < 1e-14, || format!("Γ symmetry {e_sym:e}"))?;
    Ok(format!(
        "Hess S {e_hess:.1e}, inverse {e_inv:.1e}, ∂³S {e_gamma:.1e}, Hess F (convex dual, + sign) {e_dual:.1e}, symmetry {e_sym:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-3;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let r0 = oracle::point_in_shell(&mut rng, 0.05, 0.6);
        let v0 = oracle::point_in_shell(&mut rng, 0.05, 0.3);
        let path = integrate_geodesic(&BlochState::new(r0).unwrap(), &v0, 1.0, h).map_err(|e| e.to_string())?;
        for i in 1..path.points.len() - 1 {
            let (p, c, n) = (path.points[i - 1].r, path.points[i].r, path.points[i + 1].r);
            let acc: [f64; 3] = std::array::from_fn(|j| (n[j] - 2.0 * c[j] + p[j]) / (h * h));
            let (_, a) = geodesic_residual(&path.points[i], &path.velocities[i], &acc).map_err(|e| e.to_string())?;
            worst = worst.max(a);
        }
    }
    check(worst < 1e-4, || format!("residual {worst:e}"))?;
    for _ in 0..20 {
        let r = BlochState::new(oracle::point_in_shell(&mut rng, 0.0, 0.95)).unwrap();
        let (_, a) = geodesic_residual(&r, &[0.0; 3], &[0.0; 3]).map_err(|e| e.to_string())?;
        check(a == 0.0, || format!("constant path A = {a:e}"))?;
    }
    Ok(format!("max geodesic residual {worst:.1e}; constant paths exactly 0"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut round = 0.0f64;
    for _ in 0..100 {
        let r = BlochState::new(oracle::point_in_shell(&mut rng, 0.0, 1.0)).unwrap();
        let rec = inversion_from_probabilities(outcome_probabilities(&r)).map_err(|e| e.to_string())?;
        for j in 0..3 {
            round = round.max((rec.state.r[j] - r.r[j]).abs());
        }
    }
    check(round < 1e-15, || format!("exact round trip {round:e}"))?;
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let r = BlochState::new(oracle::point_in_shell(&mut rng, 0.0, 1.0)).unwrap();
        let counts = sample_counts(&r, 100_000, &mut rng).map_err(|e| e.to_string())?;
        let est = direct_inversion(&counts).state;
        let err = (0..3).map(|j| (est.r[j] - r.r[j]).powi(2)).sum::<f64>().sqrt();
        if err < 0.02 {
            hits += 1;
        }
    }
    check(hits >= 99, || format!("{hits}/100 trials within 0.02"))?;
    Ok(format!("round trip {round:.1e}; {hits}/100 sampled trials within 0.02"))
}

fn criterion_7() -> Outcome {
    let flat =
        integrate_geodesic_open(&ConstantMetric::identity(1), &[0.5], &[1.5], 1.0, 1e-3).map_err(|e| e.to_string())?;
    let mut e_line = 0.0f64;
    for (t, p) in flat.path.times().iter().zip(flat.path.points()) {
        e_line = e_line.max((p[0] - (0.5 + 1.5 * t)).abs());
    }
    check(e_line < 1e-12, || format!("straight line {e_line:e}"))?;

    let inv = InverseSquareMetric { alpha: 1 };
    let mut e_exp = 0.0f64;
    for (l0, v0) in [(1.0, 1.0), (2.0, -0.5), (0.5, 0.3)] {
        let geo = integrate_geodesic_open(&inv, &[l0], &[v0], 1.0, 1e-3).map_err(|e| e.to_string())?;
        for (t, p) in geo.path.times().iter().zip(geo.path.points()) {
            e_exp = e_exp.max((p[0] - l0 * (v0 / l0 * t).exp()).abs());
        }
    }
    check(e_exp < 1e-6, || format!("exponential geodesic {e_exp:e}"))?;

    let m2 = InverseSquareMetric { alpha: 2 };
    let geo = integrate_geodesic_open(&m2, &[1.0, 2.0], &[0.8, -0.6], 1.0, 1e-3).map_err(|e| e.to_string())?;
    let base = dissipation_integral(&m2, &geo.path).map_err(|e| e.to_string())?;
    let times = geo.path.times().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let modes: Vec<(f64, f64, f64)> = (1..=3)
            .map(|k| (k as f64, rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
            .collect();
        let points = geo
            .path
            .points()
            .iter()
            .zip(&times)
            .map(|(p, &t)| {
                let mut q = p.clone();
                for &(k, a0, a1) in &modes {
                    let s = (k * PI * t).sin();
                    q[0] += a0 * s;
                    q[1] += a1 * s;
                }
                q
            })
            .collect();
        let d =
            dissipation_integral(&m2, &ControlPath::new(times.clone(), points).unwrap()).map_err(|e| e.to_string())?;
        margin = margin.min(d - base);
    }
    check(margin >= 0.0, || {
        format!("perturbation beat the geodesic by {:e}", -margin)
    })?;

    let curved = ExprMetric::parse(2, "1 + l1^2; 0.2*l1*l2; 0.2*l1*l2; 2 + sin(l2)").map_err(|e| e.to_string())?;
    let geo = integrate_geodesic_open(&curved, &[0.3, 0.7], &[0.4, -0.2], 2.0, 1e-3).map_err(|e| e.to_string())?;
    let speed = |i: usize| quadratic_form(&curved.metric(&geo.path.points()[i]).unwrap(), &geo.velocities[i]);
    let s0 = speed(0);
    let drift = (0..geo.velocities.len())
        .map(|i| (speed(i) - s0).abs() / s0)
        .fold(0.0, f64::max);
    check(drift < 1e-5, || format!("speed drift {drift:e}"))?;
    Ok(format!(
        "line {e_line:.1e}, exponential {e_exp:.1e}, min perturbation excess {margin:.2e}, speed drift {drift:.1e}"
    ))
}

fn pq(q: f64) -> PenaltyFactor {
    PenaltyFactor::new(q).unwrap()
}

fn random_element(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> AlgebraElement {
    let mut el = AlgebraElement::zero(n);
    for _ in 0..terms {
        let s = PauliString::from_index(n, rng.random_range(1..(1usize << (2 * n))));
        el.add_term(s, rng.random_range(-1.0..1.0)).unwrap();
    }
    el
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 1..=2 {
        for _ in 0..20 {
            let h = random_element(&mut rng, n, 6);
            for norm in [Normalization::Literal, Normalization::Symmetric] {
                let c = cost(&h, pq(1.0), norm);
                for q in [0.5, 10.0] {
                    check(cost(&h, pq(q), norm) == c, || format!("n={n} cost depends on q"))?;
                }
            }
        }
    }
    let mut e_proj = 0.0f64;
    for _ in 0..20 {
        let h = random_element(&mut rng, 3, 12);
        let split = split_pq(&h);
        check(split.p_part.axpy(1.0, &split.q_part).unwrap() == h, || {
            "P + Q != id".into()
        })?;
        check(
            split_pq(&split.p_part).q_part.is_empty() && split_pq(&split.q_part).p_part.is_empty(),
            || "P Q != 0".into(),
        )?;
        check(split_pq(&split.p_part).p_part == split.p_part, || "P P != P".into())?;
        let m = h.to_matrix();
        let (p, q) = (project_p(&m).unwrap(), project_q(&m).unwrap());
        for err in [
            project_p(&p).unwrap().max_abs_diff(&p),
            project_q(&q).unwrap().max_abs_diff(&q),
            project_p(&q).unwrap().max_abs(),
            project_q(&p).unwrap().max_abs(),
            (&p + &q).max_abs_diff(&m),
        ] {
            e_proj = e_proj.max(err);
        }
    }
    check(e_proj < 1e-12, || format!("matrix projectors {e_proj:e}"))?;

    for h in [
        AlgebraElement::from_terms(3, [("ZII", 1.0), ("XYI", 0.4)]).unwrap(),
        AlgebraElement::from_terms(3, [("XXX", 1.0), ("ZYZ", -0.3)]).unwrap(),
    ] {
        let states = integrate_brandt(|_| h.clone(), &VariationState::zero(3), pq(3.0), 10.0, 1e-2)
            .map_err(|e| e.to_string())?;
        check(states.iter().all(|s| s.k.max_abs() == 0.0), || {
            "K moved for a pure P or pure Q Hamiltonian".into()
        })?;
    }

    let h = AlgebraElement::from_terms(3, [("ZII", 1.0), ("XXX", 1.0)]).unwrap();
    let yxx = "YXX".parse::<PauliString>().unwrap().to_matrix();
    let mut e_rhs = 0.0f64;
    for q in [0.5, 1.0, 2.0, 10.0] {
        let out = brandt_rhs(&h, &ComplexMatrix::zeros(8), pq(q)).map_err(|e| e.to_string())?;
        e_rhs = e_rhs.max(out.max_abs_diff(&yxx.scale_real(2.0 / (q * q))));
    }
    check(e_rhs < 1e-10, || format!("hand-derived rhs {e_rhs:e}"))?;

    let blocks: Vec<(f64, AlgebraElement)> = (0..5)
        .map(|i| (20.0 * i as f64, random_element(&mut rng, 3, 4)))
        .collect();
    let path = HamiltonianPath::new(blocks).unwrap();
    let k0 = VariationState::from_element(&random_element(&mut rng, 3, 3), 0.0);
    let states = integrate_brandt(|t| path.at(t).clone(), &k0, pq(2.0), 100.0, 1e-2).map_err(|e| e.to_string())?;
    let structure = states.iter().map(VariationState::structure_error).fold(0.0, f64::max);
    check(structure < 1e-8, || format!("K structure error {structure:e}"))?;
    Ok(format!(
        "projectors {e_proj:.1e}, rhs {e_rhs:.1e}, K structure over t=100 {structure:.1e}"
    ))
}

fn same_files(a: &Path, b: &Path, names: &[String]) -> Result<(), String> {
    for n in names {
        let x = fs::read(a.join(n)).map_err(|e| format!("{n}: {e}"))?;
        let y = fs::read(b.join(n)).map_err(|e| format!("{n}: {e}"))?;
        check(x == y, || {
            format!("{n} differs between {} and {}", a.display(), b.display())
        })?;
    }
    Ok(())
}

fn criterion_9(dir: &Path) -> Outcome {
    geoecon(dir, &["sustainability-grid", "--out", "w1", "--workers", "1"])?;
    geoecon(dir, &["sustainability-grid", "--out", "w4", "--workers", "4"])?;
    geoecon(
        dir,
        &[
            "sustainability-grid",
            "--config",
            "w4/manifest.txt",
            "--out",
            "w4-rerun",
        ],
    )?;
    let mut names: Vec<String> = TIMES
        .iter()
        .flat_map(|t| [format!("field_t{t}.csv"), format!("field_t{t}.pgm")])
        .collect();
    names.push("collapse.csv".into());
    same_files(&dir.join("w1"), &dir.join("w4"), &names)?;
    same_files(&dir.join("w4"), &dir.join("w4-rerun"), &names)?;

    let others: [(&str, &[&str], &str); 3] = [
        ("tomography", &["--seed", "42", "--set", "trials=5"], "tomography.csv"),
        (
            "brandt",
            &["--set", "terms=ZII 1; XXX 1", "--set", "k0=XYZ 0.2", "--penalty", "2"],
            "brandt.csv",
        ),
        (
            "open-geodesic",
            &["--set", "metric.kind=inverse-square"],
            "open_geodesic.csv",
        ),
    ];
    for (cmd, extra, file) in others {
        let a = format!("{cmd}-a");
        let mut args = vec![cmd, "--out", a.as_str()];
        args.extend_from_slice(extra);
        geoecon(dir, &args)?;
        let b = format!("{cmd}-b");
        geoecon(dir, &[cmd, "--config", &format!("{a}/manifest.txt"), "--out", &b])?;
        same_files(&dir.join(&a), &dir.join(&b), &[file.to_string()])?;
    }
    Ok(format!(
        "{} grid outputs identical for workers 1 and 4; manifest reruns identical for 4 subcommands",
        names.len()
    ))
}

fn main() {
    let tmp = tempfile::TempDir::new().expect("temp dir");
    let dir = tmp.path();
    type Criterion<'a> = (u32, &'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        (1, "sustainability field reproduction", Box::new(|| criterion_1(dir))),
        (2, "collapse monotonicity", Box::new(|| criterion_2(dir))),
        (3, "evolution correctness", Box::new(criterion_3)),
        (4, "geometry oracles", Box::new(criterion_4)),
        (5, "geodesic self-consistency", Box::new(criterion_5)),
        (6, "tomography", Box::new(criterion_6)),
        (7, "open-system geometry", Box::new(criterion_7)),
        (8, "complexity suite", Box::new(criterion_8)),
        (9, "determinism", Box::new(|| criterion_9(dir))),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(&f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {n} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {n} {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
