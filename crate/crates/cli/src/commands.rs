//! One runner per subcommand. Each reads a resolved [`RunConfig`], writes its
//! outputs plus `manifest.txt` into the `out` directory and returns a short
//! summary for stdout.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use geoecon::circuit::{compile, Circuit};
use geoecon::complexity::{
    cost, integrate_brandt, split_pq, HamiltonianPath, Normalization, PenaltyFactor, VariationState,
};
use geoecon::geometry::{christoffel, dual_coords, entropy, integrate_geodesic, legendre_f, metric};
use geoecon::heatmap::render_heatmap;
use geoecon::open_system::{
    dissipation_integral, integrate_geodesic_open_with, ConstantMetric, ControlPath, ExprMetric, ExprRate,
    InverseSquareMetric, MetricProvider, RateMetric,
};
use geoecon::pauli::pauli_coefficients;
use geoecon::qubit::{build_unitary, closed_form_q, evolve_density, integrate_q, paper_trajectory, phase_integral};
use geoecon::sustainability::{collapse_csv, collapse_curve, sustainability_grid, GridSpec};
use geoecon::tomography::{direct_inversion, sample_counts, CountTriplet};
use geoecon::{AlgebraElement, BlochState, PauliString, TrajectorySource, WealthSpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{key, required, KeySpec, RunConfig};
use crate::CliError;

pub const MANIFEST: &str = "manifest.txt";

const OUT: KeySpec = key("out", "out", "output directory");

pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub schema: &'static [KeySpec],
    pub run: fn(&RunConfig, &Path) -> Result<String, CliError>,
}

const METRIC_KEYS: [KeySpec; 5] = [
    key("metric.kind", "constant", "constant | inverse-square | analytic | rate"),
    key("metric.alpha", "1", "number of control parameters"),
    key(
        "metric.expr",
        "",
        "`;`-separated metric entries in l1..lα (constant, analytic) or a rate in l1..lα, v1..vα (rate)",
    ),
    key("metric.beta", "1", "inverse temperature for the rate kind"),
    key(
        "fd_step",
        "1e-4",
        "finite-difference step for connections and rate Hessians",
    ),
];

macro_rules! schema {
    ($($k:expr),* $(; $arr:expr)?) => {
        &[OUT, $($k),* $(, $arr[0], $arr[1], $arr[2], $arr[3], $arr[4])?]
    };
}

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "evolve",
        about: "Single-qubit evolution: q, U and Bloch trajectories for a fixed wealth spectrum",
        schema: schema![
            key("mean", "0", "mean wealth E_m"),
            key("delta", "0.1", "half range Δ of the wealth spectrum"),
            key("r0", "0.5,0.3,0", "initial Bloch vector"),
            key("periods", "1", "duration in periods π/Δ"),
            key("samples", "101", "number of output rows"),
            key("step", "1e-3", "RK4 step")
        ],
        run: run_evolve,
    },
    CommandSpec {
        name: "entropy-map",
        about: "Entropy, dual coordinates, metric and Christoffel symbols at sample points",
        schema: schema![key(
            "points",
            "0,0,0; 0.3,0,0; 0.2,0.2,0.2; 0.5,-0.3,0.1; 0.9,0,0",
            "`;`-separated Bloch vectors"
        )],
        run: run_entropy_map,
    },
    CommandSpec {
        name: "geodesic",
        about: "Closed-system geodesic of the entropy metric",
        schema: schema![
            key("r0", "0.3,0.1,0", "initial Bloch vector"),
            key("v0", "0.1,0.2,0", "initial velocity"),
            key("duration", "5", "integration time"),
            key("step", "1e-3", "RK4 step"),
            key("stride", "10", "write every stride-th step")
        ],
        run: run_geodesic,
    },
    CommandSpec {
        name: "sustainability-grid",
        about: "Unsustainability fields over initial mixings, heatmaps and the collapse curve",
        schema: schema![
            key("delta", "0.1", "half range Δ"),
            key("times", "0,0.2,0.4,0.6,0.8", "evaluation times in periods π/Δ"),
            key("grid_step", "0.01", "grid spacing on [-1, 1]"),
            key("threshold", "0.01", "shading threshold on A"),
            key("r3_0", "0", "third Bloch component of every initial state"),
            key("source", "paper", "trajectory: paper | exact"),
            key("workers", "4", "worker threads"),
            key(
                "collapse_deltas",
                "0.1,0.2,0.5,1",
                "Δ sweep for collapse.csv (empty to skip)"
            )
        ],
        run: run_sustainability_grid,
    },
    CommandSpec {
        name: "tomography",
        about: "Direct-inversion tomography from a counts file or from seeded sampling",
        schema: schema![
            key(
                "counts",
                "",
                "counts file with lines `j N_a N_d`; empty to sample instead"
            ),
            key("r", "0.3,-0.2,0.5", "true Bloch vector for sampling"),
            key("shots", "100000", "shots per axis"),
            key("trials", "1", "number of sampled trials"),
            key("seed", "0", "random seed")
        ],
        run: run_tomography,
    },
    CommandSpec {
        name: "open-geodesic",
        about: "Geodesic of a thermodynamic-length metric and its dissipation",
        schema: schema![
            key("lambda0", "1", "initial control parameters"),
            key("v0", "1", "initial control velocity"),
            key("duration", "1", "protocol duration"),
            key("step", "1e-3", "RK4 step");
            METRIC_KEYS
        ],
        run: run_open_geodesic,
    },
    CommandSpec {
        name: "dissipation",
        about: "Integrated dissipation of a sampled control path",
        schema: schema![required("path", "control path CSV `t,lambda_1,...`"); METRIC_KEYS],
        run: run_dissipation,
    },
    CommandSpec {
        name: "complexity-cost",
        about: "Penalty-metric cost of an su(2^n) element",
        schema: schema![
            key("element", "", "file with `<pauli-word> <coefficient>` lines"),
            key("terms", "", "inline terms, `;`-separated (used when element is empty)"),
            key("penalty", "1", "comma-separated penalty factors q"),
            key("normalize_q_term", "false", "apply 1/2^n to the Q term as well")
        ],
        run: run_complexity_cost,
    },
    CommandSpec {
        name: "brandt",
        about: "Integrates the penalty-variation ODE for K along a Hamiltonian path",
        schema: schema![
            key("hpath", "", "Hamiltonian path file with `t=<time>` blocks"),
            key(
                "terms",
                "",
                "constant Hamiltonian, inline terms (used when hpath is empty)"
            ),
            key("k0", "", "initial K as inline terms; empty for zero"),
            key("penalty", "1", "penalty factor q"),
            key("duration", "1", "integration time"),
            key("step", "1e-2", "RK4 step"),
            key("stride", "10", "write every stride-th step")
        ],
        run: run_brandt,
    },
    CommandSpec {
        name: "compile-circuit",
        about: "Compiles a qudit circuit file to its unitary",
        schema: schema![required(
            "circuit",
            "circuit file (`n=<n> d=<d>` header, one gate per line)"
        )],
        run: run_compile_circuit,
    },
];

pub fn find(name: &str) -> Option<&'static CommandSpec> {
    COMMANDS.iter().find(|c| c.name == name)
}

/// Resolves the config, runs the command and writes the manifest.
pub fn execute(spec: &CommandSpec, cfg: &RunConfig) -> Result<String, CliError> {
    let out = PathBuf::from(cfg.raw("out"));
    fs::create_dir_all(&out).map_err(CliError::io(&out))?;
    let summary = (spec.run)(cfg, &out)?;
    write(&out, MANIFEST, &cfg.manifest())?;
    Ok(summary)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(CliError::io(path))
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(CliError::io(path))
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn physical(cfg: &RunConfig, k: &str) -> Result<BlochState, CliError> {
    BlochState::new(cfg.vec3(k)?).map_err(|e| cfg_err(format!("'{k}': {e}")))
}

fn inline_terms(text: &str) -> Result<AlgebraElement, CliError> {
    Ok(AlgebraElement::parse_text(&text.replace(';', "\n"))?)
}

fn run_evolve(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let mean = cfg.f64("mean")?;
    let delta = cfg.positive("delta")?;
    let r0 = physical(cfg, "r0")?;
    let periods = cfg.f64_where("periods", ">= 0", |x| x >= 0.0)?;
    let samples = cfg.count("samples", 2)?;
    let step = cfg.positive("step")?;
    let spec = WealthSpectrum::from_mean_half_range(mean, delta)?;
    let h = spec.coeffs();
    let t_end = periods * PI / delta;

    let mut csv = String::from(
        "t,u,v1,v2,v3,phase,U00_re,U00_im,U01_re,U01_im,U10_re,U10_im,U11_re,U11_im,r1,r2,r3,paper_r1,paper_r2,paper_r3,closed_form_diff\n",
    );
    let mut worst = 0.0f64;
    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        let q = integrate_q(&h, 0.0, t, step)?;
        let phase = phase_integral(&h, 0.0, t, step);
        let u = build_unitary(&q, phase)?;
        let r = evolve_density(&r0, &u)?;
        let paper = paper_trajectory(&r0, delta, t);
        let diff = q.max_abs_diff(&closed_form_q(&spec, 0.0, t));
        worst = worst.max(diff);
        let mut row = vec![t, q.u, q.v[0], q.v[1], q.v[2], phase];
        row.extend(u.entries().iter().flat_map(|z| [z.re, z.im]));
        row.extend(r.r);
        row.extend(paper.r);
        row.push(diff);
        csv.push_str(&row.into_iter().map(num).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    write(out, "evolve.csv", &csv)?;
    Ok(format!(
        "evolve: {samples} samples, max |q_ode - q_closed| = {worst:.3e}"
    ))
}

fn run_entropy_map(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let points = cfg
        .raw("points")
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v = crate::config::parse_list(s).map_err(|m| cfg_err(format!("'points': {m}")))?;
            let r = <[f64; 3]>::try_from(v.as_slice())
                .map_err(|_| cfg_err(format!("'points': '{s}' needs three components")))?;
            BlochState::new(r).map_err(|e| cfg_err(format!("'points': {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["r1,r2,r3,S,F,chi1,chi2,chi3".to_string()];
    for j in 0..3 {
        for k in j..3 {
            header.push(format!("g{}{}", j + 1, k + 1));
        }
    }
    let mut triples = Vec::new();
    for j in 0..3 {
        for k in j..3 {
            for l in k..3 {
                triples.push((j, k, l));
                header.push(format!("gamma{}{}{}", j + 1, k + 1, l + 1));
            }
        }
    }
    let mut csv = header.join(",") + "\n";
    for r in &points {
        let m = metric(r)?;
        let gamma = christoffel(r)?;
        let mut row = r.r.to_vec();
        row.push(entropy(r)?);
        row.push(legendre_f(r)?);
        row.extend(dual_coords(r)?.chi);
        for j in 0..3 {
            for k in j..3 {
                row.push(m.g_cov[j][k]);
            }
        }
        row.extend(triples.iter().map(|&(j, k, l)| gamma[j][k][l]));
        csv.push_str(&row.into_iter().map(num).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    write(out, "entropy_map.csv", &csv)?;
    Ok(format!("entropy-map: {} points", points.len()))
}

fn run_geodesic(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let r0 = physical(cfg, "r0")?;
    let v0 = cfg.vec3("v0")?;
    let duration = cfg.f64_where("duration", ">= 0", |x| x >= 0.0)?;
    let step = cfg.positive("step")?;
    let stride = cfg.count("stride", 1)?;
    let path = integrate_geodesic(&r0, &v0, duration, step)?;
    let mut csv = String::from("t,r1,r2,r3,v1,v2,v3,S\n");
    let last = path.points.len() - 1;
    for i in (0..=last).filter(|i| i % stride == 0 || *i == last) {
        let p = &path.points[i];
        let mut row = vec![path.times[i]];
        row.extend(p.r);
        row.extend(path.velocities[i]);
        row.push(entropy(p)?);
        csv.push_str(&row.into_iter().map(num).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    write(out, "geodesic.csv", &csv)?;
    Ok(format!(
        "geodesic: {} steps{}",
        last,
        if path.left_domain {
            ", stopped at the domain edge"
        } else {
            ""
        }
    ))
}

fn run_sustainability_grid(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let delta = cfg.positive("delta")?;
    let times = cfg.list("times")?;
    let grid_step = cfg.f64_where("grid_step", "in (0, 1]", |x| x > 0.0 && x <= 1.0)?;
    let threshold = cfg.positive("threshold")?;
    let r3_0 = cfg.f64_where("r3_0", "in (-1, 1)", |x| x.abs() < 1.0)?;
    let source: TrajectorySource = cfg.parse("source")?;
    let workers = cfg.count("workers", 1)?;
    let deltas = cfg.list("collapse_deltas")?;
    if times.is_empty() {
        return Err(cfg_err("'times' must list at least one time"));
    }
    if deltas.iter().any(|d| *d <= 0.0) {
        return Err(cfg_err("'collapse_deltas' must be positive"));
    }
    let mut template = GridSpec::new(delta, 0.0);
    template.grid_step = grid_step;
    template.r3_0 = r3_0;
    template.source = source;
    template.validate()?;

    let mut summary = String::from("sustainability-grid:");
    for frac in &times {
        let spec = GridSpec {
            eval_time: frac * PI / delta,
            ..template
        };
        let field = sustainability_grid(&spec, workers)?;
        let stem = format!("field_t{frac}");
        write(out, &format!("{stem}.csv"), &field.to_csv())?;
        write(out, &format!("{stem}.pgm"), &render_heatmap(&field, threshold))?;
        let _ = write!(
            summary,
            "\n  t = {frac} π/Δ: shaded fraction {:.4}",
            field.shaded_fraction(threshold)
        );
    }
    if !deltas.is_empty() {
        let curve = collapse_curve(&deltas, threshold, &template, workers)?;
        write(out, "collapse.csv", &collapse_csv(&curve))?;
        for (d, f) in curve {
            let _ = write!(summary, "\n  collapse Δ = {d}: {f:.4}");
        }
    }
    Ok(summary)
}

fn run_tomography(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let header = "trial,n_a1,n_d1,n_a2,n_d2,n_a3,n_d3,r1,r2,r3,valid,error\n";
    let mut csv = String::from(header);
    let row = |trial: usize, c: &CountTriplet, truth: Option<&BlochState>| {
        let rec = direct_inversion(c);
        let err = truth.map(|t| (0..3).map(|j| (rec.state.r[j] - t.r[j]).powi(2)).sum::<f64>().sqrt());
        let counts: Vec<String> = (0..3)
            .flat_map(|j| [c.n_a()[j], c.n_d()[j]])
            .map(|n| n.to_string())
            .collect();
        format!(
            "{trial},{},{},{},{},{},{}\n",
            counts.join(","),
            num(rec.state.r[0]),
            num(rec.state.r[1]),
            num(rec.state.r[2]),
            rec.valid,
            err.map(num).unwrap_or_else(|| "nan".into())
        )
    };
    let summary = if let Some(path) = cfg.optional("counts") {
        let counts = CountTriplet::parse_text(&read(path)?)?;
        csv.push_str(&row(0, &counts, None));
        let rec = direct_inversion(&counts);
        format!(
            "tomography: r = {:?} ({})",
            rec.state.r,
            if rec.valid { "physical" } else { "unphysical" }
        )
    } else {
        let truth = physical(cfg, "r")?;
        let shots: u64 = cfg.parse("shots")?;
        if shots == 0 {
            return Err(cfg_err("'shots' must be positive"));
        }
        let trials = cfg.count("trials", 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.parse("seed")?);
        for trial in 0..trials {
            let counts = sample_counts(&truth, shots, &mut rng)?;
            csv.push_str(&row(trial, &counts, Some(&truth)));
        }
        format!("tomography: {trials} sampled trials of {shots} shots per axis")
    };
    write(out, "tomography.csv", &csv)?;
    Ok(summary)
}

fn metric_provider(cfg: &RunConfig) -> Result<Box<dyn MetricProvider>, CliError> {
    let alpha = cfg.count("metric.alpha", 1)?;
    let expr = cfg.optional("metric.expr");
    let kind = cfg.raw("metric.kind");
    let need_expr = || expr.ok_or_else(|| cfg_err(format!("metric.kind = {kind} needs metric.expr")));
    Ok(match kind {
        "constant" => match expr {
            None => Box::new(ConstantMetric::identity(alpha)),
            Some(e) => Box::new(ExprMetric::parse(alpha, e)?),
        },
        "inverse-square" => Box::new(InverseSquareMetric { alpha }),
        "analytic" => Box::new(ExprMetric::parse(alpha, need_expr()?)?),
        "rate" => Box::new(RateMetric {
            model: ExprRate::parse(alpha, cfg.positive("metric.beta")?, need_expr()?)?,
            fd_step: cfg.positive("fd_step")?,
        }),
        other => return Err(cfg_err(format!("unknown metric.kind '{other}'"))),
    })
}

fn run_open_geodesic(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let provider = metric_provider(cfg)?;
    let lambda0 = cfg.list("lambda0")?;
    let v0 = cfg.list("v0")?;
    let alpha = provider.alpha();
    if lambda0.len() != alpha || v0.len() != alpha {
        return Err(cfg_err(format!("lambda0 and v0 need {alpha} components")));
    }
    let duration = cfg.positive("duration")?;
    let step = cfg.positive("step")?;
    let fd_step = cfg.positive("fd_step")?;
    let geo = integrate_geodesic_open_with(&*provider, &lambda0, &v0, duration, step, fd_step)?;
    write(out, "open_geodesic.csv", &geo.path.to_csv())?;
    let mut summary = format!("open-geodesic: {} samples", geo.path.len());
    if geo.path.len() >= 3 {
        let _ = write!(
            summary,
            ", dissipation {:.9e}",
            dissipation_integral(&*provider, &geo.path)?
        );
    }
    if geo.truncated {
        summary.push_str(", truncated at a singular metric");
    }
    Ok(summary)
}

fn run_dissipation(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let provider = metric_provider(cfg)?;
    let path = ControlPath::parse_csv(&read(cfg.raw("path"))?)?;
    let d = dissipation_integral(&*provider, &path)?;
    let duration = path.times().last().unwrap() - path.times()[0];
    let csv = format!(
        "quantity,value\ndissipation,{}\nsamples,{}\nduration,{}\n",
        num(d),
        path.len(),
        num(duration)
    );
    write(out, "dissipation.csv", &csv)?;
    Ok(format!("dissipation: {d:.9e} over {} samples", path.len()))
}

fn load_element(cfg: &RunConfig, file_key: &str) -> Result<AlgebraElement, CliError> {
    match (cfg.optional(file_key), cfg.optional("terms")) {
        (Some(path), None) => Ok(AlgebraElement::parse_text(&read(path)?)?),
        (None, Some(terms)) => inline_terms(terms),
        _ => Err(cfg_err(format!("set exactly one of '{file_key}' and 'terms'"))),
    }
}

fn penalty(q: f64) -> Result<PenaltyFactor, CliError> {
    PenaltyFactor::new(q).map_err(|e| cfg_err(format!("'penalty': {e}")))
}

fn run_complexity_cost(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let h = load_element(cfg, "element")?;
    let qs = cfg.list("penalty")?;
    if qs.is_empty() {
        return Err(cfg_err("'penalty' must list at least one value"));
    }
    let norm = Normalization::from_flag(cfg.bool("normalize_q_term")?);
    let split = split_pq(&h);
    let sq = |el: &AlgebraElement| el.terms().map(|(_, c)| c * c).sum::<f64>();
    let mut csv = String::from("q,normalization,p_norm2,q_norm2,cost\n");
    let mut summary = format!("complexity-cost: n = {}", h.n());
    for q in qs {
        let c = cost(&h, penalty(q)?, norm);
        let _ = writeln!(
            csv,
            "{},{norm},{},{},{}",
            num(q),
            num(sq(&split.p_part)),
            num(sq(&split.q_part)),
            num(c)
        );
        let _ = write!(summary, "\n  q = {q}: cost {c:.12e}");
    }
    write(out, "complexity_cost.csv", &csv)?;
    Ok(summary)
}

fn run_brandt(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let path = match (cfg.optional("hpath"), cfg.optional("terms")) {
        (Some(p), None) => HamiltonianPath::parse_text(&read(p)?)?,
        (None, Some(t)) => HamiltonianPath::constant(inline_terms(t)?),
        _ => return Err(cfg_err("set exactly one of 'hpath' and 'terms'")),
    };
    let n = path.n();
    let k0 = match cfg.optional("k0") {
        None => VariationState::zero(n),
        Some(t) => {
            let el = inline_terms(t)?;
            if el.n() != n {
                return Err(cfg_err(format!("'k0' acts on {} qubits, H on {n}", el.n())));
            }
            VariationState::from_element(&el, 0.0)
        }
    };
    let q = penalty(cfg.f64("penalty")?)?;
    let duration = cfg.f64_where("duration", ">= 0", |x| x >= 0.0)?;
    let step = cfg.positive("step")?;
    let stride = cfg.count("stride", 1)?;
    let states = integrate_brandt(|t| path.at(t).clone(), &k0, q, duration, step)?;
    let basis: Vec<PauliString> = PauliString::basis(n).collect();
    let mut csv = String::from("t");
    for s in &basis {
        let _ = write!(csv, ",{s}");
    }
    csv.push_str(",structure_error\n");
    let last = states.len() - 1;
    let mut worst = 0.0f64;
    for (i, st) in states.iter().enumerate() {
        worst = worst.max(st.structure_error());
        if i % stride != 0 && i != last {
            continue;
        }
        let coeffs = pauli_coefficients(&st.k, n)?;
        csv.push_str(&num(st.t));
        for (_, c) in coeffs.iter().filter(|(s, _)| !s.is_identity()) {
            csv.push(',');
            csv.push_str(&num(c.re));
        }
        let _ = writeln!(csv, ",{}", num(st.structure_error()));
    }
    write(out, "brandt.csv", &csv)?;
    Ok(format!("brandt: {last} steps, max structure error {worst:.3e}"))
}

fn run_compile_circuit(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let circuit = Circuit::parse_text(&read(cfg.raw("circuit"))?)?;
    let u = compile(&circuit)?;
    let mut csv = String::from("row,col,re,im\n");
    for r in 0..u.dim() {
        for c in 0..u.dim() {
            let z = u.get(r, c);
            let _ = writeln!(csv, "{r},{c},{},{}", num(z.re), num(z.im));
        }
    }
    write(out, "unitary.csv", &csv)?;
    Ok(format!(
        "compile-circuit: {} gates, dimension {}, unitarity error {:.3e}",
        circuit.gates().len(),
        u.dim(),
        u.unitarity_error()
    ))
}
