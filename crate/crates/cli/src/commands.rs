//! Command implementations.

use std::path::Path;
use std::sync::Arc;

use densejump::dyadic::{z_point, Dyadic, LevelPartition, Staircase};
use densejump::flux::FluxFamily;
use densejump::multid::{analyze_component, tensor_solution, weak_residual_2d, dissipation_box_2d, Bump2};
use densejump::scalar::{self, build_initial_data, lax_oleinik_oracle, CharSpeedProfile, ExactScalarSolution, LimitFamily};
use densejump::system::{
    build_profile_gnl, build_profile_ld, build_states, claim_gap_system, front_track, scaled_partition, ProfileFile,
    SystemClaimConfig, SystemFamily, TrackerConfig,
};
use densejump::verify::{
    claim_gap, dissipation_box, kruzkov_residual, random_bumps, weak_residual, ClaimConfig, Entropy, LimitField,
    QuadSpec, SpaceTimeField,
};
use densejump::waves::{composite_curve, contact_curve, lambda, rarefaction, shock, HyperbolicSystem, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{diff, json as to_json, num, write_or_print, Csv};
use crate::parse;
use crate::*;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let js = cli.json;
    match &cli.group {
        Group::Dyadic { cmd: DyadicCmd::Dump(a) } => dyadic_dump(a),
        Group::Scalar { cmd } => match cmd {
            ScalarCmd::Build(a) => scalar_build(a, js),
            ScalarCmd::Evaluate(a) => scalar_evaluate(a, js),
            ScalarCmd::Verify { cmd: ScalarVerifyCmd::Claim(a) } => scalar_claim(a, js),
            ScalarCmd::Verify { cmd: ScalarVerifyCmd::Entropy(a) } => scalar_entropy(a, js),
            ScalarCmd::Dissipation(a) => scalar_dissipation(a, js),
        },
        Group::Multid { cmd } => match cmd {
            MultidCmd::Analyze(a) => multid_analyze(a, js),
            MultidCmd::Verify(a) => multid_verify(a, js),
        },
        Group::System { cmd } => match cmd {
            SystemCmd::Curves(a) => system_curves(a, js),
            SystemCmd::Build(a) => system_build(a, js),
            SystemCmd::Track(a) => system_track(a, js),
            SystemCmd::Verify { cmd: SystemVerifyCmd::Claim(a) } => system_claim(a, js),
            SystemCmd::BuildLd(a) => system_build_ld(a, js),
        },
    }
}

fn config<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn positive(v: f64, what: &str) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what}: must be positive, got {v}")))
    }
}

fn inside(t0: f64, horizon: f64) -> Result<(), Failure> {
    if t0 > 0.0 && t0 < horizon {
        Ok(())
    } else {
        Err(Failure::Usage(format!("t0: {t0} must lie in (0, {horizon})")))
    }
}

/// JSON rows when `--json`, CSV otherwise.
fn emit_table(js: bool, csv: &Csv, header: &[&str], rows: &[Vec<String>], out: Option<&Path>) -> Result<(), Failure> {
    if js {
        let objs: Vec<Value> = rows
            .iter()
            .map(|r| {
                let m: serde_json::Map<String, Value> = header
                    .iter()
                    .zip(r)
                    .map(|(h, c)| (h.to_string(), cell(c)))
                    .collect();
                Value::Object(m)
            })
            .collect();
        write_or_print(out, &to_json(&objs))
    } else {
        csv.emit(out)
    }
}

fn cell(c: &str) -> Value {
    if c.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = c.parse::<i64>() {
        return Value::from(i);
    }
    match c.parse::<f64>() {
        Ok(v) if v.is_finite() => Value::from(v),
        _ => Value::from(c),
    }
}

fn table(command: &str, cfg: &Value, header: &[&str], rows: &[Vec<String>]) -> Csv {
    let mut csv = Csv::new(command, cfg, header);
    for r in rows {
        csv.row(r);
    }
    csv
}

fn dyadic_dump(a: &DumpArgs) -> Result<(), Failure> {
    let part = LevelPartition::new(a.level, &Staircase::unit());
    let header = ["k", "r_k_num", "r_k_den", "y_k"];
    let rows: Vec<Vec<String>> = (1..=a.level as u64)
        .map(|k| {
            let d = Dyadic::nth(k);
            let y = part.y()[part.position_of(d).expect("r_k is a breakpoint of its level")];
            vec![k.to_string(), d.numerator().to_string(), d.denominator().to_string(), num(y)]
        })
        .collect();
    let csv = table("dyadic dump", &config(a), &header, &rows);
    match &a.check {
        Some(golden) => {
            let expected = std::fs::read_to_string(golden)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", golden.display())))?;
            match diff(&expected, csv.text()) {
                None => {
                    println!("golden file {} matches ({} rows)", golden.display(), a.level);
                    Ok(())
                }
                Some(report) => {
                    print!("{report}");
                    Err(Failure::Check(format!("golden file {} differs", golden.display())))
                }
            }
        }
        None => csv.emit(a.out.as_deref()),
    }
}

fn scalar_build(a: &ScalarBuildArgs, js: bool) -> Result<(), Failure> {
    positive(a.horizon, "horizon")?;
    let flux = parse::flux(&a.flux.flux, a.flux.domain.as_deref())?.convex()?;
    let profile = build_initial_data(&flux, a.level, a.horizon)?;
    let file = profile.to_file();
    write_or_print(Some(&a.out), &to_json(&file))?;
    let summary = json!({
        "out": a.out.display().to_string(),
        "level": a.level,
        "pieces": profile.pieces(),
        "tv_speed": profile.tv_speed(),
        "bound": 2.0 / a.horizon,
    });
    if js {
        print!("{}", to_json(&summary));
    } else {
        println!(
            "wrote {} (level {}, {} pieces, TV of speed {} vs 2/T = {})",
            a.out.display(),
            a.level,
            profile.pieces(),
            num(profile.tv_speed()),
            num(2.0 / a.horizon)
        );
    }
    Ok(())
}

fn scalar_evaluate(a: &EvaluateArgs, js: bool) -> Result<(), Failure> {
    let file: scalar::ProfileFile = parse::read_json(&a.profile)?;
    let profile = CharSpeedProfile::from_file(&file)?;
    let sol = ExactScalarSolution::new(profile.clone());
    let header = ["x", "t", "u", "y", "level"];
    let mut rows = Vec::new();
    for at in &a.at {
        let (x, t) = parse::pair(at, "at")?;
        let (u, y) = if a.oracle {
            let (u, rec) = lax_oleinik_oracle(&profile, x, t)?;
            (u, rec.y)
        } else {
            let u = sol.evaluate(x, t)?;
            // foot of the characteristic through (x, t)
            (u, x - t * profile.flux().df(u))
        };
        rows.push(vec![num(x), num(t), num(u), num(y), profile.level().to_string()]);
    }
    let csv = table("scalar evaluate", &config(a), &header, &rows);
    emit_table(js, &csv, &header, &rows, a.out.as_deref())
}

fn scalar_claim(a: &ScalarClaimArgs, js: bool) -> Result<(), Failure> {
    positive(a.horizon, "horizon")?;
    positive(a.tol, "tol")?;
    positive(a.stab_tol, "stab_tol")?;
    inside(a.t0, a.horizon)?;
    let flux = parse::flux(&a.flux.flux, a.flux.domain.as_deref())?.convex()?;
    let family = LimitFamily::new(flux, a.horizon)?;
    let cfg = ClaimConfig {
        horizon: a.horizon,
        j: a.j,
        t0: a.t0,
        tol: a.tol,
        stab_tol: a.stab_tol,
        max_level: a.max_level,
        seed: a.seed,
        ..ClaimConfig::new(a.j, a.t0)
    };
    let rep = claim_gap(&family, &cfg)?;
    if js {
        print!("{}", to_json(&rep));
    } else {
        println!(
            "z_{} = {} at t0 = {}; thresholds: stabilized {} witness {}",
            rep.j,
            num(rep.z),
            rep.t0,
            num(rep.claim_threshold),
            num(rep.witness_threshold)
        );
        println!("offset,left_speed,right_speed,gap,witness_level,witness_gap");
        for r in &rep.rows {
            println!(
                "{},{},{},{},{},{}",
                num(r.offset),
                num(r.left_speed),
                num(r.right_speed),
                num(r.gap),
                r.witness_level,
                num(r.witness_gap)
            );
        }
        if !rep.skipped.is_empty() {
            println!("not stabilized at offsets {:?}", rep.skipped);
        }
        println!("stabilized claim {}, witness {}", verdict(rep.claim_pass), verdict(rep.witness_pass));
    }
    if rep.claim_pass && rep.witness_pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("jump gap at z_{} below threshold", a.j)))
    }
}

fn verdict(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

fn scalar_entropy(a: &EntropyArgs, js: bool) -> Result<(), Failure> {
    positive(a.horizon, "horizon")?;
    positive(a.tol, "tol")?;
    let cfg = parse::flux(&a.flux.flux, a.flux.domain.as_deref())?;
    let flux = cfg.convex()?;
    let sol = ExactScalarSolution::new(build_initial_data(&flux, a.level, a.horizon)?);
    let t = a.horizon;
    let window = (-0.3, 1.3, 0.02 * t, 0.98 * t);
    let bumps = random_bumps(a.bumps, window, (0.25, 0.2 * t), a.seed);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for q in 0..=200 {
        let u = sol.evaluate(-0.3 + 1.6 * q as f64 / 200.0, 0.5 * t)?;
        lo = lo.min(u);
        hi = hi.max(u);
    }
    let span = (hi - lo).max(1e-3);
    let ms: Vec<f64> = (0..9).map(|k| lo - 0.1 * span + 1.2 * span * k as f64 / 8.0).collect();
    let f = cfg.flux()?;
    let k = kruzkov_residual(&sol, &f, &ms, &bumps, QuadSpec::default())?;
    let weak = weak_residual(&sol, &f, &random_bumps(a.bumps.div_ceil(2), window, (0.25, 0.2 * t), a.seed + 2), QuadSpec::default())?;
    let pass = k.min >= -a.tol && weak <= a.tol;
    if js {
        print!("{}", to_json(&json!({"kruzkov": k, "weak_residual": weak, "constants": ms, "pass": pass})));
    } else {
        println!("min Kruzkov functional {} (m = {}, test {})", num(k.min), num(k.argmin_m), k.argmin_test);
        println!("max weak residual {}", num(weak));
        println!("entropy check {}", verdict(pass));
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check("entropy residuals exceed the tolerance".into()))
    }
}

fn scalar_dissipation(a: &DissipationArgs, js: bool) -> Result<(), Failure> {
    positive(a.horizon, "horizon")?;
    positive(a.radius, "radius")?;
    positive(a.tol, "tol")?;
    inside(a.t0, a.horizon)?;
    let cfg = parse::flux(&a.flux.flux, a.flux.domain.as_deref())?;
    let flux = cfg.flux()?;
    let convex = cfg.convex()?;
    let family;
    let level_sol;
    let field: &dyn SpaceTimeField = match a.level {
        Some(k) => {
            level_sol = ExactScalarSolution::new(build_initial_data(&convex, k, a.horizon)?);
            &level_sol
        }
        None => {
            family = LimitFamily::new(convex, a.horizon)?;
            &LimitField { family: &family, tol: a.tol, max_level: (1 << 16) - 1 }
        }
    };
    let header = ["x", "r", "D", "density"];
    let mut rows = Vec::new();
    let mut push = |est: &[densejump::verify::DissipationEstimate]| {
        for e in est {
            rows.push(vec![num(e.x), num(e.radius), num(e.dissipation), num(e.density)]);
        }
    };
    if a.scan {
        for x in parse::range(&a.grid, "grid")? {
            push(&dissipation_box(field, &flux, (x, a.t0), &[a.radius], Entropy::Square)?);
        }
    } else {
        let radii: Vec<f64> = (5..=9).map(|m| 0.5f64.powi(m)).collect();
        for j in 1..=a.j_max {
            let z = z_point(&Staircase::unit(), j, a.t0, a.horizon)?;
            push(&dissipation_box(field, &flux, (z, a.t0), &radii, Entropy::Square)?);
        }
    }
    let csv = table("scalar dissipation", &config(a), &header, &rows);
    emit_table(js, &csv, &header, &rows, a.out.as_deref())
}

fn family_of(specs: &[String]) -> Result<FluxFamily, Failure> {
    let comps = specs.iter().map(|s| Ok(parse::flux(s, None)?.flux()?)).collect::<Result<Vec<_>, Failure>>()?;
    Ok(FluxFamily::new(comps)?)
}

fn multid_analyze(a: &AnalyzeArgs, js: bool) -> Result<(), Failure> {
    let family = family_of(&a.flux)?;
    let window = parse::pair(&a.window, "window")?;
    let reports = (0..family.dimension())
        .map(|k| analyze_component(&family, k, window, a.grid, a.floor))
        .collect::<Result<Vec<_>, _>>()?;
    if js {
        print!("{}", to_json(&reports));
    } else {
        for r in &reports {
            println!(
                "component {}: {:?} on [{}, {}], certificate {}",
                r.component,
                r.classification,
                num(r.interval.0),
                num(r.interval.1),
                num(r.certificate)
            );
        }
    }
    Ok(())
}

fn multid_verify(a: &MultidVerifyArgs, js: bool) -> Result<(), Failure> {
    positive(a.horizon, "horizon")?;
    positive(a.radius, "radius")?;
    positive(a.tol, "tol")?;
    inside(a.t0, a.horizon)?;
    if a.d == 0 {
        return Err(Failure::Usage("d: must be at least 1".into()));
    }
    let line = ExactScalarSolution::new(build_initial_data(&densejump::flux::ConvexFlux::burgers(), a.level, a.horizon)?);
    let sol = tensor_solution(line.clone(), a.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut constant = true;
    for _ in 0..1000 {
        let (x1, t) = (rng.gen_range(-0.3..1.3), rng.gen_range(0.01..1.0) * a.horizon);
        let mut p: Vec<f64> = (0..a.d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        p[0] = x1;
        let u = sol.evaluate(&p, t)?;
        constant &= u == line.evaluate(x1, t)?;
    }
    let header = ["x1", "x2", "t", "density"];
    let mut rows = Vec::new();
    let mut residual = None;
    if a.d == 2 {
        let family = family_of(&["burgers".to_string(), a.transverse_flux.clone()])?;
        let tests: Vec<Bump2> = random_bumps(6, (-0.2, 1.2, 0.05 * a.horizon, 0.95 * a.horizon), (0.25, 0.2 * a.horizon), a.seed)
            .into_iter()
            .map(|b| Bump2 { x1: b.x0, x2: rng.gen_range(-1.0..1.0), t: b.t0, r1: b.rx, r2: 0.3, rt: b.rt })
            .collect();
        residual = Some(weak_residual_2d(&sol, &family, &tests, QuadSpec::default())?);
        let x2s = parse::list(&a.x2, "x2")?;
        for x1 in parse::range(&a.grid, "grid")? {
            for &x2 in &x2s {
                let (_, density) = dissipation_box_2d(&sol, &family, (x1, x2, a.t0), a.radius)?;
                rows.push(vec![num(x1), num(x2), num(a.t0), num(density)]);
            }
        }
    }
    let pass = constant && residual.map_or(true, |r| r <= a.tol);
    let csv = table("multid verify", &config(a), &header, &rows);
    if let Some(out) = &a.out {
        csv.emit(Some(out))?;
    }
    if js {
        print!("{}", to_json(&json!({"transverse_constancy": constant, "weak_residual": residual, "pass": pass, "scan_rows": rows.len()})));
    } else {
        if a.out.is_none() {
            csv.emit(None)?;
        }
        eprintln!(
            "transverse constancy {constant}, weak residual {}: {}",
            residual.map_or("n/a (d != 2)".into(), num),
            verdict(pass)
        );
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check("tensor solution checks failed".into()))
    }
}

struct SystemSetup {
    fixture: densejump::waves::SystemFixture,
    sys: Box<dyn HyperbolicSystem>,
    base: State,
}

fn setup(f: &FixtureArgs, default_kind: &str) -> Result<SystemSetup, Failure> {
    let fixture = parse::fixture(f.fixture.as_deref().unwrap_or(default_kind), f.gamma, f.diagonal.as_deref())?;
    let sys = fixture.build()?;
    let base = parse::state(&fixture, f.state.as_deref())?;
    if base.len() != sys.dim() {
        return Err(Failure::Usage(format!("state: {} components given, system has {}", base.len(), sys.dim())));
    }
    Ok(SystemSetup { fixture, sys, base })
}

fn state_cells(u: &State) -> Vec<String> {
    u.iter().map(|v| num(*v)).collect()
}

fn state_header(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("u{k}")).collect()
}

fn system_curves(a: &CurvesArgs, js: bool) -> Result<(), Failure> {
    let s = setup(&a.system, "isentropic")?;
    let sys = s.sys.as_ref();
    let mut header = vec!["sigma".to_string()];
    header.extend(state_header(sys.dim()));
    header.extend(["speed".to_string(), "rh_residual".to_string()]);
    let mut rows = Vec::new();
    for sigma in parse::range(&a.sigma, "sigma")? {
        let p = match a.branch.as_str() {
            "shock" => shock(sys, &s.base, a.field, sigma)?,
            "rarefaction" => rarefaction(sys, &s.base, a.field, sigma)?,
            "composite" => composite_curve(sys, &s.base, a.field, sigma)?,
            "contact" => contact_curve(sys, &s.base, a.field, sigma)?,
            other => return Err(Failure::Usage(format!("branch: unknown {other:?}"))),
        };
        let mut row = vec![num(sigma)];
        row.extend(state_cells(&p.state));
        match p.speed {
            Some(v) => row.extend([num(v), num(p.rh_residual)]),
            None => row.extend([String::new(), String::new()]),
        }
        rows.push(row);
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = table("system curves", &config(a), &h, &rows);
    emit_table(js, &csv, &h, &rows, a.out.as_deref())
}

fn system_build(a: &SystemBuildArgs, js: bool) -> Result<(), Failure> {
    let s = setup(&a.system, "isentropic")?;
    let sys = s.sys.as_ref();
    let seq = build_states(sys, &s.base, a.field, &scaled_partition(a.sigma0, a.n)?, a.sigma0)?;
    let prof = build_profile_gnl(sys, &seq)?;
    let file = ProfileFile::new(&prof, s.fixture.clone(), a.sigma0, a.n);
    write_or_print(Some(&a.out), &to_json(&file))?;
    let tv = prof.tv();
    let disc = prof.discrepancies.iter().cloned().fold(0.0, f64::max);
    if js {
        print!(
            "{}",
            to_json(&json!({"out": a.out.display().to_string(), "jumps": prof.jumps(), "tv": tv, "bound": 2.0 * a.sigma0, "max_discrepancy": disc, "max_argument": seq.max_arg()}))
        );
    } else {
        println!(
            "wrote {} ({} jumps, TV(lambda) {} vs 2 sigma0 = {}, TV(state) {}, max pairwise discrepancy {})",
            a.out.display(),
            prof.jumps(),
            num(tv.tv_lambda),
            num(2.0 * a.sigma0),
            num(tv.tv_state),
            num(disc)
        );
    }
    Ok(())
}

fn system_track(a: &TrackArgs, js: bool) -> Result<(), Failure> {
    positive(a.eps_fan, "eps_fan")?;
    let file: ProfileFile = parse::read_json(&a.profile)?;
    let (sys, prof) = file.load()?;
    let times = match &a.snapshots {
        Some(s) => parse::list(s, "snapshots")?,
        None => Vec::new(),
    };
    let traj = front_track(sys.as_ref(), &prof, a.t_end, &TrackerConfig::new(a.eps_fan), &times, file.sigma0)?;
    let n = sys.dim();
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend(state_header(n));
    header.push("lambda".into());
    let mut rows = Vec::new();
    for snap in &traj.snapshots {
        let mut row = |x: String, u: &State| -> Result<(), Failure> {
            let mut r = vec![num(snap.time), x];
            r.extend(state_cells(u));
            r.push(num(lambda(sys.as_ref(), u, prof.field)?));
            rows.push(r);
            Ok(())
        };
        row("-inf".into(), &snap.far_left)?;
        for f in &snap.fronts {
            row(num(f.x), &f.right)?;
        }
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = table("system track", &config(a), &h, &rows);
    let d = &traj.diagnostics;
    if js {
        let body = json!({"diagnostics": d, "rows": rows.len()});
        if let Some(out) = &a.out {
            csv.emit(Some(out))?;
        }
        print!("{}", to_json(&body));
    } else {
        csv.emit(a.out.as_deref())?;
        eprintln!(
            "{} interactions, {} error fronts, shocks admissible {} (min margin {}), mass defect {}",
            d.interactions,
            d.error_fronts_created,
            d.shocks_admissible,
            num(d.min_shock_margin),
            num(d.mass_defect)
        );
    }
    if d.shocks_admissible {
        Ok(())
    } else {
        Err(Failure::Check("a shock front violated the Lax inequalities".into()))
    }
}

fn system_claim(a: &SystemClaimArgs, js: bool) -> Result<(), Failure> {
    positive(a.tol, "tol")?;
    positive(a.stab_tol, "stab_tol")?;
    inside(a.t0, 1.0)?;
    let s = setup(&a.system, "isentropic")?;
    let cfg_track = match a.eps_fan {
        Some(e) => {
            positive(e, "eps_fan")?;
            TrackerConfig::new(e)
        }
        None => TrackerConfig::for_sigma0(a.sigma0),
    };
    let family = SystemFamily::gnl(Arc::from(s.sys), s.base, a.field, a.sigma0, cfg_track)?;
    let cfg = SystemClaimConfig {
        tol: a.tol,
        stab_tol: a.stab_tol,
        max_depth: a.max_depth,
        seed: a.seed,
        ..SystemClaimConfig::new(a.j, a.t0, a.sigma0)
    };
    let rep = claim_gap_system(&family, &cfg)?;
    if js {
        print!("{}", to_json(&rep));
    } else {
        println!("z_{} = {} at t0 = {}; threshold {}", rep.j, num(rep.z), rep.t0, num(rep.threshold));
        println!("offset,left_lambda,right_lambda,gap,left_level,right_level,stabilized");
        for r in &rep.rows {
            println!(
                "{},{},{},{},{},{},{}",
                num(r.offset),
                num(r.left_lambda),
                num(r.right_lambda),
                num(r.gap),
                r.left_level,
                r.right_level,
                r.stabilized
            );
        }
        println!("claim {}", verdict(rep.claim_pass));
    }
    if rep.claim_pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("lambda gap at z_{} below threshold", a.j)))
    }
}

fn system_build_ld(a: &BuildLdArgs, js: bool) -> Result<(), Failure> {
    positive(a.delta0, "delta0")?;
    let s = setup(&a.system, "euler3")?;
    let sys = s.sys.as_ref();
    let ld = build_profile_ld(sys, &s.base, a.field, a.delta0, a.levels)?;
    let prof = ld.profile(sys)?;
    if let Some(out) = &a.out {
        write_or_print(Some(out), &to_json(&ProfileFile::new(&prof, s.fixture.clone(), 0.0, a.levels)))?;
    }
    let tv = prof.tv();
    let targets: Vec<f64> = (1..=ld.terms()).map(|k| a.delta0 * 0.5f64.powi(k as i32)).collect();
    if js {
        print!(
            "{}",
            to_json(&json!({"terms": ld.terms(), "speed": ld.speed, "jump_norms": ld.jump_norms, "targets": targets, "arclengths": ld.arclengths, "tv": tv}))
        );
    } else {
        println!("{} contact jumps moving at {}; TV(state) {} vs delta0 {}", ld.terms(), num(ld.speed), num(tv.tv_state), a.delta0);
        println!("k,arclength,jump_norm,target");
        for (k, (&n, &t)) in ld.jump_norms.iter().zip(&targets).enumerate() {
            println!("{},{},{},{}", k + 1, num(ld.arclengths[k]), num(n), num(t));
        }
    }
    Ok(())
}
