use std::error::Error as StdError;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracbq::io::{generate_data, read_field, write_field, DataFamily, DataSpec};
use fracbq::operators::{
    gaussian_kernel, heat_propagate, kernel_lp_norm, kernel_physical, leray_project, poisson_kernel_2d, KernelOptions, MultiplierSpec,
    PointLattice,
};
use fracbq::scaling::{
    check_besov_embedding, check_besov_maximality, check_heat_extension_equivalence, check_norm_criticality, check_solution_covariance,
    test_family,
};
use fracbq::solver::{estimate_constants_sweep, etd_reference_solve, picard_solve, BoussinesqState, ProblemData, SolverConfig, MIN_PROBES};
use fracbq::spaces::{graded_times, holder_check, parabolic_morrey_norm, parabolic_riesz, uniform_times, SupOptions, Trajectory};
use fracbq::spectral::divergence;
use fracbq::{make_grid, Field, ScalarField, SpectralGrid, VectorField};

type ClosedForm = fn(&[f64], f64) -> f64;
type Check = Result<(bool, String), Box<dyn StdError>>;
type Criterion = (&'static str, fn() -> Check);

fn rel_linf(values: &[f64], oracle: &[f64]) -> f64 {
    let peak = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.iter().zip(oracle).fold(0.0f64, |m, (v, o)| m.max((v - o).abs())) / peak
}

fn kernel_oracles() -> Check {
    let lattice = PointLattice::new(2, 256, 0.05)?;
    let spec = MultiplierSpec::radial_power(0.0);
    let mut worst = [0.0f64; 2];
    let mut slowest = [0.0f64; 2];
    let cases: [(f64, &[f64], ClosedForm); 2] = [
        (2.0, &[0.1, 0.25, 1.0], gaussian_kernel),
        (1.0, &[0.1, 0.15, 0.2], poisson_kernel_2d),
    ];
    for (c, (alpha, times, oracle)) in cases.iter().enumerate() {
        for &t in *times {
            let clock = Instant::now();
            let s = kernel_physical(&spec, *alpha, t, &lattice, KernelOptions::default())?;
            slowest[c] = slowest[c].max(clock.elapsed().as_secs_f64());
            let want: Vec<f64> = s.points.iter().map(|x| oracle(x, t)).collect();
            worst[c] = worst[c].max(rel_linf(&s.values, &want));
        }
    }
    let pass = worst.iter().all(|e| *e < 1e-6) && slowest.iter().all(|s| *s < 10.0);
    Ok((
        pass,
        format!(
            "256² lattice: gaussian err {:.2e} ({:.2}s), poisson err {:.2e} ({:.2}s)",
            worst[0], slowest[0], worst[1], slowest[1]
        ),
    ))
}

fn kernel_self_similarity() -> Check {
    let alpha = 1.5;
    let lattice = PointLattice::new(2, 64, 0.1)?;
    let opts = KernelOptions::default();
    let mut worst = 0.0f64;
    for rho in [0.0, 1.0] {
        let spec = MultiplierSpec::radial_power(rho);
        for t in [0.25, 1.0, 4.0] {
            let kt = kernel_physical(&spec, alpha, t, &lattice, opts)?;
            let k1 = kernel_physical(&spec, alpha, 1.0, &lattice.scaled(t.powf(-1.0 / alpha)), opts)?;
            let lhs: Vec<f64> = kt.values.iter().map(|v| v * t.powf((2.0 + rho) / alpha)).collect();
            worst = worst.max(rel_linf(&lhs, &k1.values));
        }
    }
    Ok((worst < 1e-6, format!("α=1.5, ρ∈{{0,1}}, t∈{{1/4,1,4}}: max rel err {worst:.2e}")))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn lp_scaling_law() -> Check {
    let alpha = 1.5;
    let d = 2.0;
    let grid = make_grid(2, 512, 64.0)?;
    let times = [0.25, 0.5, 1.0, 2.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for (rho, p) in [(0.0, 2.0), (1.0, 2.0), (1.0, 4.0)] {
        let spec = MultiplierSpec::radial_power(rho);
        let logs = times
            .iter()
            .map(|&t| kernel_lp_norm(&spec, alpha, t, &grid, p).map(f64::ln))
            .collect::<Result<Vec<_>, _>>()?;
        let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let got = slope(&lt, &logs);
        let want = -(rho + d * (1.0 - 1.0 / p)) / alpha;
        let rel = (got / want - 1.0).abs();
        pass &= rel < 0.02;
        parts.push(format!("(ρ={rho},p={p}) {got:.4} vs {want:.4}"));
    }
    Ok((pass, parts.join(", ")))
}

fn white_noise(g: &SpectralGrid, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField::new(g.clone(), (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("grid-sized")
}

fn leray_semigroup_algebra() -> Check {
    let clock = Instant::now();
    let g = make_grid(2, 64, 2.0 * PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut idem, mut div, mut semi) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let v = VectorField::new(vec![white_noise(&g, &mut rng), white_noise(&g, &mut rng)])?;
        let scale = v.max_abs();
        let pv = leray_project(&v);
        let ppv = leray_project(&pv);
        idem = idem.max(pv.combine(1.0, &ppv, -1.0)?.max_abs() / scale);
        div = div.max(divergence(&pv).max_abs() / scale);
        let f = white_noise(&g, &mut rng);
        let (s, t) = (rng.random_range(0.01..0.5), rng.random_range(0.01..0.5));
        let two = heat_propagate(&heat_propagate(&f, s, 1.5)?, t, 1.5)?;
        let one = heat_propagate(&f, s + t, 1.5)?;
        semi = semi.max(two.max_abs_diff(&one) / f.max_abs());
    }
    let secs = clock.elapsed().as_secs_f64();
    let pass = idem < 1e-12 && div < 1e-12 && semi < 1e-12 && secs < 5.0;
    Ok((
        pass,
        format!("50 fields on 64²: P²-P {idem:.1e}, div P {div:.1e}, semigroup {semi:.1e}, {secs:.2}s"),
    ))
}

fn fixed_point_machinery() -> Check {
    let clock = Instant::now();
    let config = SolverConfig {
        n: 64,
        nodes: 64,
        ..SolverConfig::default()
    };
    let grid = config.grid()?;
    let data = generate_data(
        &DataSpec::new(DataFamily::GaussianBump, 1e-3).with_forces(1e-3, 1e-3),
        5,
        &grid,
        &config.times()?,
    )?;
    let (_, diag) = picard_solve(&data, &config)?;
    let est = estimate_constants_sweep(&config, &[1.0, 4.0, 16.0], MIN_PROBES, 5)?;
    let ratios: Vec<f64> = est.windows(2).map(|e| e[0].linear / e[1].linear).collect();
    let secs = clock.elapsed().as_secs_f64();
    let pass = diag.contraction < 0.9
        && diag.final_residual < 1e-8
        && diag.bound_holds
        && est[2].linear < 1.0 / 3.0
        && ratios.iter().all(|r| (r / 4.0 - 1.0).abs() < 0.15)
        && secs < 120.0;
    Ok((
        pass,
        format!(
            "64²×64: {} iterations, ratio {:.3}, residual {:.1e}, ‖U‖_E {:.3e} ≤ 3δ {:.2}, C_L(16) {:.2e}, C_L ratios {:.3}/{:.3}, {:.1}s",
            diag.iterations,
            diag.contraction,
            diag.final_residual,
            diag.final_norm,
            3.0 * config.smallness,
            est[2].linear,
            ratios[0],
            ratios[1],
            secs
        ),
    ))
}

fn single_mode_data(grid: &SpectralGrid, amp: f64) -> ProblemData {
    let u0 = VectorField::from_fn(grid, |x| vec![amp * x[1].sin(), amp * x[0].sin()]);
    let th0 = ScalarField::from_fn(grid, |x| amp * (x[0] + x[1]).cos());
    ProblemData::unforced(u0, th0)
}

fn final_rel_l2(a: &BoussinesqState, b: &BoussinesqState) -> Result<f64, Box<dyn StdError>> {
    let sq = |f: &ScalarField| f.l2_norm().powi(2);
    let du = a.velocity.last().combine(1.0, b.velocity.last(), -1.0)?;
    let dt = a.temperature.last().combine(1.0, b.temperature.last(), -1.0)?;
    let diff: f64 = du.components().iter().map(sq).sum::<f64>() + sq(&dt);
    let size: f64 = b.velocity.last().components().iter().map(sq).sum::<f64>() + sq(b.temperature.last());
    Ok((diff / size).sqrt())
}

fn oracle_equivalence() -> Check {
    let base = SolverConfig {
        n: 32,
        nodes: 65,
        ..SolverConfig::default()
    };
    let data = single_mode_data(&base.grid()?, 1e-2);
    let levels = [SolverConfig { nodes: 33, ..base.clone() }, base.clone(), base.refined_in_time()];
    let mut picard = Vec::new();
    let mut etd = Vec::new();
    for c in &levels {
        picard.push(picard_solve(&data, c)?.0);
        etd.push(etd_reference_solve(&data, c)?);
    }
    let gap = final_rel_l2(&picard[1], &etd[1])?;
    let order = |s: &[BoussinesqState]| -> Result<f64, Box<dyn StdError>> {
        Ok((final_rel_l2(&s[0], &s[1])? / final_rel_l2(&s[1], &s[2])?).log2())
    };
    let (op, oe) = (order(&picard)?, order(&etd)?);
    Ok((
        gap < 1e-4 && op >= 1.9 && oe >= 1.9,
        format!("Picard vs ETD at t=1: {gap:.2e}; orders Picard {op:.2}, ETD {oe:.2}"),
    ))
}

fn bump_problem(config: &SolverConfig) -> Result<ProblemData, Box<dyn StdError>> {
    Ok(generate_data(
        &DataSpec::new(DataFamily::GaussianBump, 1e-3).with_forces(1e-3, 1e-3),
        7,
        &config.grid()?,
        &config.times()?,
    )?)
}

fn scaling_covariance() -> Check {
    let config = SolverConfig {
        n: 64,
        nodes: 64,
        ..SolverConfig::default()
    };
    let bump = bump_problem(&config)?;
    let mode = single_mode_data(&config.grid()?, 1e-3);
    let mut worst = 0.0f64;
    let mut pass = true;
    for lambda in [2.0, 0.5] {
        for data in [&bump, &mode] {
            let r = check_solution_covariance(data, lambda, &config)?;
            pass &= r.pass && r.max_deviation() < 1e-3;
            worst = worst.max(r.max_deviation());
        }
    }
    Ok((pass, format!("λ∈{{2,1/2}}, bump and single-mode data: max deviation {worst:.2e}")))
}

fn norm_criticality() -> Check {
    let config = SolverConfig {
        n: 64,
        nodes: 64,
        ..SolverConfig::default()
    };
    let data = bump_problem(&config)?;
    let (state, _) = picard_solve(&data, &config)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [2.0, 0.5] {
        let r = check_norm_criticality(&data, &state, lambda, &config)?;
        pass &= r.pass && r.entries.len() == 8 && r.max_deviation() < 0.03;
        parts.push(format!(
            "λ={lambda}: {} identities, max deviation {:.2e}",
            r.entries.len(),
            r.max_deviation()
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn random_trajectory(g: &SpectralGrid, rng: &mut ChaCha8Rng) -> Result<Trajectory<ScalarField>, Box<dyn StdError>> {
    let k0 = 2.0 * PI / g.length();
    let mut field = || {
        let modes: Vec<[f64; 4]> = (0..5)
            .map(|_| {
                [
                    rng.random_range(-3..=3) as f64,
                    rng.random_range(-3..=3) as f64,
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.0..2.0 * PI),
                ]
            })
            .collect();
        ScalarField::from_fn(g, move |x| {
            modes.iter().map(|m| m[2] * (k0 * (m[0] * x[0] + m[1] * x[1]) + m[3]).cos()).sum()
        })
    };
    let (a, b) = (field(), field());
    let rate = rng.random_range(0.2..2.0);
    Ok(Trajectory::from_fn(graded_times(2.0, 15, 2.0)?, |t| {
        a.zip_with(&b, |x, y| x * (-rate * t).exp() + y * t.sin()).expect("same grid")
    })?)
}

fn holder() -> Check {
    let g = make_grid(2, 32, 8.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = SupOptions::parabolic();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let f = random_trajectory(&g, &mut rng)?;
        let h = random_trajectory(&g, &mut rng)?;
        let p1 = rng.random_range(2.0..5.0);
        let p2 = rng.random_range(2.0..5.0);
        let q1 = p1 + rng.random_range(0.0..4.0);
        let q2 = p2 + rng.random_range(0.0..4.0);
        let r = holder_check(&f, &h, (p1, q1), (p2, q2), 1.5, &opts)?;
        worst = worst.max(r.ratio.ok_or("degenerate pair")?);
    }
    Ok((worst <= 1.0 + 1e-9, format!("50 pairs: max ratio {worst:.6}")))
}

fn compact_trajectory(g: &SpectralGrid, times: &[f64], rng: &mut ChaCha8Rng) -> Result<Trajectory<ScalarField>, Box<dyn StdError>> {
    let l = g.length();
    let center: Vec<f64> = (0..g.dim()).map(|_| rng.random_range(0.3..0.7) * l).collect();
    let radius = rng.random_range(0.6..1.6);
    let (t0, t1) = {
        let a = rng.random_range(0.0..1.0);
        (a, a + rng.random_range(0.3..1.0))
    };
    let shape = rng.random_range(0..3);
    let amp = rng.random_range(0.5..2.0);
    let noise: Vec<f64> = (0..g.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    Ok(Trajectory::from_fn(times.to_vec(), |t| {
        let mut f = ScalarField::from_fn(g, |x| {
            let r = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if r > radius || t < t0 || t > t1 {
                return 0.0;
            }
            match shape {
                0 => amp,
                1 => amp * (1.0 - r / radius),
                _ => amp,
            }
        });
        if shape == 2 {
            f = f
                .zip_with(&ScalarField::new(g.clone(), noise.clone()).expect("grid-sized"), |a, b| a * b)
                .expect("same grid");
        }
        f
    })?)
}

fn riesz_boundedness() -> Check {
    let (alpha, beta, p, q) = (1.5, 1.0, 2.0, 4.0);
    let g = make_grid(3, 16, 8.0)?;
    let d = 3.0;
    let lambda = 1.0 - beta * q / (d + alpha);
    let times = uniform_times(2.0, 12)?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let opts = SupOptions::parabolic();
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let psi = compact_trajectory(&g, &times, &mut rng)?;
        let out = parabolic_riesz(&psi, beta, alpha)?;
        let num = parabolic_morrey_norm(&out, p / lambda, q / lambda, alpha, &opts)?;
        let den = parabolic_morrey_norm(&psi, p, q, alpha, &opts)?;
        ratios.push(num / den);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let pass = ratios.iter().all(|r| r.is_finite() && *r > 0.0) && hi / lo < 10.0;
    Ok((
        pass,
        format!(
            "d=3, (p,q,β)=(2,4,1) into (p,q)/{lambda:.4}: ratios [{lo:.3e}, {hi:.3e}], spread {:.2}",
            hi / lo
        ),
    ))
}

fn equivalence() -> Check {
    let g = make_grid(2, 32, 2.0 * PI)?;
    let family = test_family(&g, 20, 3);
    let sweep = check_heat_extension_equivalence(&family, 1.5, 6.0, 7.0)?;
    let one_sided = 1.0 / sweep.min;
    let pass = sweep.rows.len() == 20 && sweep.min > 0.0 && one_sided <= 1.05 && sweep.spread() < 20.0;
    Ok((
        pass,
        format!(
            "20 fields: max parabolic/thermic {one_sided:.4} (≤ 1.05), thermic/parabolic in [{:.4}, {:.4}], spread {:.3}",
            sweep.min,
            sweep.max,
            sweep.spread()
        ),
    ))
}

fn besov_inequalities() -> Check {
    let g = make_grid(2, 32, 2.0 * PI)?;
    let family = test_family(&g, 20, 3);
    let a = check_besov_embedding(&family, 1.0, 1.5, 1.25)?;
    let b = check_besov_maximality(&family, 1.5, 3.5)?;
    let pass = a.all_finite() && b.all_finite() && a.rows.len() == 20 && b.rows.len() == 20 && a.spread() < 10.0 && b.spread() < 10.0;
    Ok((
        pass,
        format!("embedding spread {:.3}, maximality spread {:.3}", a.spread(), b.spread()),
    ))
}

fn write_config(dir: &Path, name: &str, json: &str) -> Result<std::path::PathBuf, Box<dyn StdError>> {
    let path = dir.join(name);
    std::fs::write(&path, json)?;
    Ok(path)
}

fn cli(config: &Path, out: &Path) -> Result<(i32, String), Box<dyn StdError>> {
    let o = Process::new(env!("CARGO_BIN_EXE_fracbq"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()?;
    Ok((o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned()))
}

fn io_contract() -> Check {
    let dir = tempfile::tempdir()?;
    let g = make_grid(2, 32, 2.0 * PI)?;
    let times = uniform_times(1.0, 8)?;
    let spec = DataSpec::new(DataFamily::GaussianBump, 0.3).with_forces(0.1, 0.1);
    let data = generate_data(&spec, 7, &g, &times)?;
    write_field(&data.u0, dir.path().join("u0.fbf"))?;
    write_field(&data.theta0, dir.path().join("th0.fbf"))?;
    let u: VectorField = read_field(dir.path().join("u0.fbf"))?;
    let th: ScalarField = read_field(dir.path().join("th0.fbf"))?;
    let bits = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()) && a.len() == b.len();
    let round_trip = u
        .scalar_components()
        .iter()
        .zip(data.u0.scalar_components())
        .all(|(a, b)| bits(a.samples(), b.samples()))
        && bits(th.samples(), data.theta0.samples());
    let again = generate_data(&spec, 7, &g, &times)?;
    write_field(&again.u0, dir.path().join("u0b.fbf"))?;
    let deterministic = std::fs::read(dir.path().join("u0.fbf"))? == std::fs::read(dir.path().join("u0b.fbf"))?;

    let kernel = write_config(
        dir.path(),
        "kernel.json",
        r#"{"command":"verify-kernel","alpha":2.0,"d":2,"kernel":{"rho":0.0,"times":[0.25,1.0],"points":64,"spacing":0.1}}"#,
    )?;
    let (kc, _) = cli(&kernel, &dir.path().join("kernel"))?;
    let kernel_ok = kc == 0 && dir.path().join("kernel/kernel_oracle.csv").exists();
    let bad = write_config(dir.path(), "bad.json", r#"{"command":"solve","alpha":1.5,"p":5.0}"#)?;
    let (bc, msg) = cli(&bad, &dir.path().join("bad"))?;
    let bad_ok = bc == 2 && msg.contains("(3α-2)/(α-1)");
    let scaling = write_config(
        dir.path(),
        "scaling.json",
        r#"{"command":"verify-scaling","n":32,"nt":17,"seed":7,"data":{"family":"gaussian-bump","amplitude":0.001}}"#,
    )?;
    let (sc, _) = cli(&scaling, &dir.path().join("scaling"))?;
    let scaling_ok = sc == 0 && dir.path().join("scaling/scaling_report.json").exists();
    let pass = round_trip && deterministic && kernel_ok && bad_ok && scaling_ok;
    Ok((
        pass,
        format!("round-trip {round_trip}, deterministic {deterministic}, exits: kernel {kc}, p=5 solve {bc}, scaling {sc}"),
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("kernel closed-form oracles", kernel_oracles),
        ("kernel self-similarity", kernel_self_similarity),
        ("kernel L^p scaling law", lp_scaling_law),
        ("Leray and semigroup algebra", leray_semigroup_algebra),
        ("fixed-point machinery", fixed_point_machinery),
        ("Picard vs exponential integrator", oracle_equivalence),
        ("scaling covariance", scaling_covariance),
        ("norm criticality", norm_criticality),
        ("parabolic Hölder inequality", holder),
        ("parabolic Riesz boundedness", riesz_boundedness),
        ("heat-extension norm equivalence", equivalence),
        ("Besov embedding and maximality", besov_inequalities),
        ("field files, generation and exit codes", io_contract),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:2}] {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            clock.elapsed().as_secs_f64()
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
