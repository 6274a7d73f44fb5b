//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use rand::Rng;
use serde_json::Value;

use sparsetrace::experiments::trace_table;
use sparsetrace::fixtures;
use sparsetrace::mixedvol::mixed_volume;
use sparsetrace::polysys::random_system;
use sparsetrace::rng::{derive_seed, stream};
use sparsetrace::solver::{is_bernstein_generic, solve_torus, SolverConfig};
use sparsetrace::supports::{
    has_positive_mixed_volume_by_defect, offset_collection, parse_rational, tal_candidate,
    unnecessary_candidate, LatticePoint, Support, SupportCollection,
};
use sparsetrace::tracetest::*;
use sparsetrace::{Point, System};

type Check = Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e(err: sparsetrace::Error) -> String {
    err.to_string()
}

fn within(secs: f64, limit: f64) -> Result<(), String> {
    ensure(secs < limit, format!("took {secs:.1} s, limit {limit} s"))
}

fn hexagon_rectangle() -> (SupportCollection, System, Vec<Point>) {
    let f = fixtures::hexagon_rectangle_f();
    let s = solve_torus(&f, 0, &SolverConfig::default()).expect("solve");
    (f.collection().clone(), f, s.points)
}

fn table1() -> Check {
    let start = Instant::now();
    let t = trace_table(0, &SolverConfig::default()).map_err(e)?;
    let secs = start.elapsed().as_secs_f64();
    let sigma1 = [
        3.921875, -0.578125, -5.078125, -9.578125, -14.078125, -18.578125,
    ];
    let sigma2 = [-0.200, -0.523, -8.135, 5.772, 1.974, 1.236];
    let dev = |got: &[sparsetrace::polysys::ComplexJson], want: &[f64]| {
        got.iter()
            .zip(want)
            .map(|(g, w)| (g.re - w).abs().max(g.im.abs()))
            .fold(0.0, f64::max)
    };
    let (d1, d2) = (dev(&t.sigma1, &sigma1), dev(&t.sigma2, &sigma2));
    ensure(
        t.counts.iter().all(|&c| c == 17),
        format!("counts {:?}", t.counts),
    )?;
    ensure(d1 <= 1e-3, format!("Σ1 deviation {d1:.2e}"))?;
    ensure(d2 <= 1e-2, format!("Σ2 deviation {d2:.2e}"))?;
    within(secs, 30.0)?;
    Ok(format!("max |ΔΣ1| {d1:.1e}, max |ΔΣ2| {d2:.1e}"))
}

fn soundness() -> Check {
    let start = Instant::now();
    let (c, f, s) = hexagon_rectangle();
    let mv = mixed_volume(&c).map_err(e)?;
    ensure(
        BigInt::from(s.len()) == mv,
        format!("{} points, MV {mv}", s.len()),
    )?;
    let tal = tal_candidate(&c).map_err(e)?;
    let un = unnecessary_candidate(&c).map_err(e)?;
    let plain = TraceConfig::default();
    let mut two_sided = TraceConfig::default();
    // The unnecessary candidate of this collection is not abundant.
    two_sided.options.require_abundant = false;
    let mut passes = [0; 2];
    for seed in 0..20 {
        let r = sparse_trace_test(&c, &f, &s, &tal, seed, &plain).map_err(e)?;
        passes[0] += usize::from(r.verdict == Verdict::Pass);
        let r = constant_sparse_trace_test(&c, &f, &s, &un, seed, &two_sided).map_err(e)?;
        passes[1] += usize::from(r.verdict == Verdict::Pass);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(passes == [20, 20], format!("passes {passes:?} of 20"))?;
    within(secs, 60.0)?;
    Ok(format!("{} = MV points, 20/20 and 20/20 Pass", s.len()))
}

fn completeness() -> Check {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut systems: Vec<(String, SupportCollection, System)> = Vec::new();
    let f = fixtures::hexagon_rectangle_f();
    systems.push((
        "fixed hexagon and rectangle".into(),
        f.collection().clone(),
        f,
    ));
    for (k, (name, c)) in fixtures::corpus().into_iter().enumerate() {
        for j in 0..2u64 {
            let seed = 1000 + 10 * k as u64 + j;
            systems.push((
                format!("{name} #{seed}"),
                c.clone(),
                random_system(&c, seed),
            ));
        }
    }
    let mut worst = 20;
    for (sys_index, (name, c, f)) in systems.iter().enumerate() {
        let solve_seed = derive_seed(7, sys_index as u64);
        let solved = solve_torus(f, solve_seed, &cfg).map_err(e)?;
        ensure(
            is_bernstein_generic(f, &solved),
            format!("{name} is not Bernstein-generic"),
        )?;
        let tal = tal_candidate(c).map_err(e)?;
        let mut fails = 0;
        for run in 0..20u64 {
            let seed = derive_seed(solve_seed, run);
            let idx = random_strict_subset(solved.len(), seed).map_err(e)?;
            let sub: Vec<Point> = idx.iter().map(|&i| solved.points[i].clone()).collect();
            // Any error counts against the criterion.
            if let Ok(r) = sparse_trace_test(c, f, &sub, &tal, seed, &TraceConfig::default()) {
                fails += usize::from(r.verdict == Verdict::Fail);
            }
        }
        ensure(fails >= 19, format!("{name}: {fails}/20 Fail"))?;
        worst = worst.min(fails);
    }
    let secs = start.elapsed().as_secs_f64();
    within(secs, 600.0)?;
    Ok(format!("{} systems, worst {worst}/20 Fail", systems.len()))
}

fn random_collection(seed: u64) -> SupportCollection {
    let mut rng = stream(seed, 100);
    let n = 3;
    let lists: Vec<Vec<Vec<i64>>> = (0..n)
        .map(|_| {
            let size = rng.random_range(1..=3);
            let mut pts = BTreeSet::new();
            while pts.len() < size {
                pts.insert(
                    (0..n)
                        .map(|_| rng.random_range(0..=2i64))
                        .collect::<Vec<_>>(),
                );
            }
            pts.into_iter().collect()
        })
        .collect();
    SupportCollection::from_lists(n, &lists).expect("valid lists")
}

fn mixed_volumes() -> Check {
    let mv = |c: &SupportCollection| mixed_volume(c).map_err(e);
    let quintic = mv(&fixtures::dilated_simplices(2, 5))?;
    ensure(
        quintic == BigInt::from(25),
        format!("MV(5Δ2, 5Δ2) = {quintic}"),
    )?;
    let truncated = mv(&fixtures::truncated_simplices(5, 3))?;
    ensure(
        truncated == BigInt::from(9),
        format!("truncation MV = {truncated}"),
    )?;
    for k1 in 1..=4 {
        for l1 in 1..=4 {
            for k2 in 1..=4 {
                for l2 in 1..=4 {
                    let got = mv(&fixtures::rectangles(k1, l1, k2, l2))?;
                    ensure(
                        got == BigInt::from(k1 * l2 + k2 * l1),
                        format!("rectangles ({k1},{l1}),({k2},{l2}) gave {got}"),
                    )?;
                }
            }
        }
    }
    let mut positive = 0;
    for seed in 0..200 {
        let c = random_collection(seed);
        let by_mv = mv(&c)? > BigInt::from(0);
        positive += usize::from(by_mv);
        ensure(
            has_positive_mixed_volume_by_defect(&c).map_err(e)? == by_mv,
            format!("defect test disagrees on {}", c.to_json()),
        )?;
    }
    Ok(format!(
        "25, 9, 256 rectangle pairs, 200 collections ({positive} with MV > 0)"
    ))
}

fn bkk_counts() -> Check {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, c) in fixtures::corpus() {
        let mv = mixed_volume(&c).map_err(e)?;
        for seed in 0..6 {
            let f = random_system::<f64>(&c, 200 + seed);
            let s = solve_torus(&f, seed, &cfg).map_err(e)?;
            ensure(
                BigInt::from(s.len()) == mv,
                format!("{name} seed {seed}: {} of {mv}", s.len()),
            )?;
            let r = s.residuals.iter().copied().fold(0.0, f64::max);
            ensure(r <= 1e-12, format!("{name} seed {seed}: residual {r:.1e}"))?;
            worst = worst.max(r);
            count += 1;
        }
    }
    Ok(format!("{count} systems at MV, max residual {worst:.1e}"))
}

fn linearity() -> Check {
    let f = fixtures::hexagon_rectangle_f();
    let c = f.collection().clone();
    let cfg = SolverConfig::default();
    let outside = |k: &str| -> Result<SupportCollection, String> {
        let q = parse_rational(k).map_err(e)?;
        Ok(c.difference(&offset_collection(&c, &q, 0).map_err(e)?))
    };
    // The vertex of the first support with the largest first coordinate.
    let vertex = Support::new(2, vec![LatticePoint::new(vec![3, 1])]).map_err(e)?;
    let single = SupportCollection::new(2, vec![vertex, Support::empty(2)]).map_err(e)?;
    let cases = [
        ("outside offset 1", outside("1")?, Linearity::Constant),
        (
            "outside offset 1/2",
            outside("1/2")?,
            Linearity::AffineLinear,
        ),
        ("vertex (3,1)", single, Linearity::Nonlinear),
    ];
    let mut got = Vec::new();
    for (name, perturb, want) in cases {
        let r = linearity_probe(&c, &f, &perturb, 7, 3, &cfg).map_err(e)?;
        ensure(
            r.class == want,
            format!("{name}: {:?}, expected {want:?}", r.class),
        )?;
        got.push(format!("{:?}", r.class));
    }
    Ok(got.join(", "))
}

fn trace_laws() -> Check {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..4 {
        let c = fixtures::lacunary_sheared();
        let r = lacunary_trace_check(&c, &random_system::<f64>(&c, seed), seed, &cfg).map_err(e)?;
        ensure(
            r.holds && r.factor == 0.0,
            format!("sheared lacunary seed {seed}: {r:?}"),
        )?;
        worst = worst.max(r.relative_error);

        let c = fixtures::lacunary_diagonal();
        let r = lacunary_trace_check(&c, &random_system::<f64>(&c, seed), seed, &cfg).map_err(e)?;
        ensure(
            r.holds && r.factor == 2.0,
            format!("diagonal lacunary seed {seed}: {r:?}"),
        )?;
        worst = worst.max(r.relative_error);

        for (c, factor) in [
            (fixtures::triangular_plane(), 2.0),
            (fixtures::triangular_box(), 3.0),
        ] {
            let r = triangular_trace_check(&c, &random_system::<f64>(&c, seed), None, seed, &cfg)
                .map_err(e)?;
            ensure(
                r.holds && r.factor == factor,
                format!("triangular factor {factor} seed {seed}: {r:?}"),
            )?;
            worst = worst.max(r.relative_error);
        }
    }
    Ok(format!(
        "4 seeds × 4 systems, max relative error {worst:.1e}"
    ))
}

fn monodromy() -> Check {
    let cfg = SolverConfig::default();
    let f = fixtures::hexagon_rectangle_f();
    let c = f.collection().clone();
    let tal = tal_candidate(&c).map_err(e)?;
    let r = monodromy_experiment(&c, &f, &tal, 100, 0, &cfg).map_err(e)?;
    ensure(r.fibre_size == 17, format!("fibre {}", r.fibre_size))?;
    ensure(
        r.transitive && r.two_transitive,
        format!(
            "transitive {} 2-transitive {}",
            r.transitive, r.two_transitive
        ),
    )?;
    let lac = fixtures::lacunary_diagonal();
    let g = random_system::<f64>(&lac, 6);
    let l = monodromy_experiment(&lac, &g, &lac, 100, 0, &cfg).map_err(e)?;
    ensure(!l.two_transitive, "lacunary action is 2-transitive")?;
    Ok(format!(
        "fibre 17: {}/100 loops, 2-transitive; lacunary fibre {}: not 2-transitive",
        r.loops_completed, l.fibre_size
    ))
}

fn first_coordinates() -> Check {
    let cfg = SolverConfig::default();
    let mut smallest = f64::INFINITY;
    let mut count = 0;
    for (name, c) in fixtures::corpus() {
        for seed in 0..6 {
            let f = random_system::<f64>(&c, 300 + seed);
            let s = solve_torus(&f, seed, &cfg).map_err(e)?;
            for (i, p) in s.points.iter().enumerate() {
                for q in &s.points[i + 1..] {
                    smallest = smallest.min((p.coords()[0] - q.coords()[0]).norm());
                }
            }
            ensure(
                smallest > 1e-6,
                format!("{name} seed {seed}: gap {smallest:.1e}"),
            )?;
            count += 1;
        }
    }
    Ok(format!("{count} systems, smallest gap {smallest:.1e}"))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(Vec<u8>, Value), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_sparsetrace"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|err| err.to_string())?;
    let code = status.code().unwrap_or(-1);
    let is_trace = args.contains(&"trace-test");
    ensure(
        code == 0 || (is_trace && code == 1),
        format!("{args:?} exited {code}"),
    )?;
    let bytes = fs::read(out).map_err(|err| err.to_string())?;
    let mut manifest = out.as_os_str().to_owned();
    manifest.push(".manifest.json");
    let manifest: Value =
        serde_json::from_slice(&fs::read(manifest).map_err(|err| err.to_string())?)
            .map_err(|err| err.to_string())?;
    Ok((bytes, manifest))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|err| err.to_string())?;
    let path = |name: &str| dir.path().join(name);
    fs::write(
        path("supports.json"),
        fixtures::hexagon_rectangle().to_json(),
    )
    .map_err(|err| err.to_string())?;
    fs::write(path("system.json"), fixtures::HEXAGON_RECTANGLE_F).map_err(|err| err.to_string())?;
    let (supports, system) = (path("supports.json"), path("system.json"));
    let (supports, system) = (supports.to_str().unwrap(), system.to_str().unwrap());
    let solutions = path("solutions.json");
    run_cli(&["--seed", "5", "solve", system], &solutions)?;
    let solutions = solutions.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec!["analyze", supports],
        vec!["mixedvol", supports],
        vec!["random", supports],
        vec!["solve", system],
        vec!["trace-test", system, solutions],
        vec![
            "trace-test",
            "--constant",
            "--allow-non-abundant",
            system,
            solutions,
        ],
        vec!["experiments", "table1"],
        vec!["experiments", "gallery"],
    ];
    for (k, cmd) in commands.iter().enumerate() {
        let mut args = vec!["--seed", "5"];
        args.extend(cmd);
        let (a, ma) = run_cli(&args, &path(&format!("{k}a.json")))?;
        let (b, mb) = run_cli(&args, &path(&format!("{k}b.json")))?;
        ensure(a == b, format!("{cmd:?}: outputs differ"))?;
        ensure(
            ma["output_digest"] == mb["output_digest"],
            format!("{cmd:?}: digests differ"),
        )?;
    }
    let (one, _) = run_cli(
        &["--seed", "5", "--jobs", "1", "solve", system],
        &path("jobs1.json"),
    )?;
    let (four, _) = run_cli(
        &["--seed", "5", "--jobs", "4", "solve", system],
        &path("jobs4.json"),
    )?;
    ensure(one == four, "solve output depends on --jobs")?;
    Ok(format!(
        "{} commands byte-identical, --jobs 1 and 4 agree",
        commands.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("trace table reproduction", table1),
        ("trace test soundness", soundness),
        ("trace test completeness", completeness),
        ("mixed volumes", mixed_volumes),
        ("BKK solution counts", bkk_counts),
        ("linearity probe", linearity),
        ("lacunary and triangular trace laws", trace_laws),
        ("monodromy action", monodromy),
        ("distinct first coordinates", first_coordinates),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1} s]", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
