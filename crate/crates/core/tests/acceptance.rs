//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p densejump --test acceptance -- --include-ignored --nocapture`.

use std::sync::Arc;
use std::time::Instant;

use densejump::dyadic::{z_point, Staircase};
use densejump::flux::{least_squares_slope, ConvexFlux, Flux, FluxFamily};
use densejump::multid::{linear_transport_solution, tensor_solution, weak_residual_2d, Bump2};
use densejump::scalar::{build_initial_data, lax_oleinik_oracle, ExactScalarSolution, LimitFamily};
use densejump::system::{
    build_profile_gnl, build_profile_ld, build_states, claim_gap_system, front_track, scaled_partition, JumpKind,
    SystemClaimConfig, SystemFamily, TrackerConfig, TV_ROUNDING,
};
use densejump::verify::{
    claim_gap, dissipation_box, kruzkov_residual, random_bumps, weak_residual, ClaimConfig, Entropy, LimitField,
    QuadSpec,
};
use densejump::waves::{lambda, rarefaction, shock, Euler3, Isentropic, State, SystemFixture};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, pass: bool, detail: String) {
    println!("{} criterion {n}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n}: {detail}");
}

#[test]
fn criterion_01_backward_construction() {
    let start = Instant::now();
    let profile = build_initial_data(&ConvexFlux::burgers(), 32, 1.0).unwrap();
    let sol = ExactScalarSolution::new(profile.clone());
    let part = profile.partition().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut closed = 0.0f64;
    for _ in 0..1_000 {
        let x: f64 = rng.gen_range(-0.5..1.5);
        // G is the identity for Burgers
        let want = x - part.rho_level(x);
        closed = closed.max((sol.evaluate(x, 1.0).unwrap() - want).abs());
    }
    let mut oracle = 0.0f64;
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(-0.5..1.5);
        let t: f64 = rng.gen_range(1e-3..=1.0);
        let (u, _) = lax_oleinik_oracle(&profile, x, t).unwrap();
        oracle = oracle.max((sol.evaluate(x, t).unwrap() - u).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        closed <= 1e-12 && oracle <= 1e-8 && secs < 5.0,
        format!("closed-form error {closed:e}, oracle error {oracle:e}, {secs:.2} s"),
    );
}

#[test]
fn criterion_02_tv_bound() {
    let mut worst = f64::NEG_INFINITY;
    for &t in &[0.5, 1.0, 2.0] {
        for k in 1..=256 {
            let p = build_initial_data(&ConvexFlux::burgers(), k, t).unwrap();
            worst = worst.max(p.tv_speed() - 2.0 / t);
        }
    }
    report(2, worst <= TV_ROUNDING, format!("max TV(f'(u0_k)) - 2/T = {worst:e} over k <= 256"));
}

#[test]
#[ignore = "unattainable for this construction: see the decisions ledger"]
fn criterion_03_claim_thresholds() {
    let family = LimitFamily::new(ConvexFlux::burgers(), 1.0).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for j in 3..=5u64 {
        for &t0 in &[0.4, 0.5] {
            let start = Instant::now();
            let rep = claim_gap(&family, &ClaimConfig::new(j, t0)).unwrap();
            let secs = start.elapsed().as_secs_f64();
            let ok = rep.claim_pass && rep.witness_pass && secs < 60.0;
            pass &= ok;
            lines.push(format!(
                "j={j} t0={t0}: witness {:.6e} (>= {}), stabilized {:.6e} (>= {}), {} rows, {} skipped, {secs:.1} s",
                rep.min_witness_gap(),
                rep.witness_threshold,
                rep.min_gap(),
                rep.claim_threshold,
                rep.rows.len(),
                rep.skipped.len()
            ));
        }
    }
    report(3, pass, lines.join("; "));
}

#[test]
fn criterion_04_admissibility() {
    let sol = ExactScalarSolution::new(build_initial_data(&ConvexFlux::burgers(), 32, 1.0).unwrap());
    let window = (-0.3, 1.3, 0.02, 0.98);
    let bumps = random_bumps(20, window, (0.25, 0.2), 41);
    let ms: Vec<f64> = (0..9).map(|k| -0.2 + 0.15 * k as f64).collect();
    let k = kruzkov_residual(&sol, &Flux::Burgers, &ms, &bumps, QuadSpec::default()).unwrap();
    let weak = weak_residual(&sol, &Flux::Burgers, &random_bumps(10, window, (0.25, 0.2), 43), QuadSpec::default())
        .unwrap();
    report(
        4,
        k.min >= -1e-6 && weak <= 1e-6,
        format!("min Kruzkov {:e} (m = {}), weak residual {weak:e}", k.min, k.argmin_m),
    );
}

#[test]
#[ignore = "unattainable for this construction: see the decisions ledger"]
fn criterion_05_jump_density() {
    let family = LimitFamily::new(ConvexFlux::burgers(), 1.0).unwrap();
    let field = LimitField { family: &family, tol: 1e-6, max_level: (1 << 16) - 1 };
    let radii: Vec<f64> = (5..=9).map(|m| 0.5f64.powi(m)).collect();
    let t0 = 0.5;
    let mut pass = true;
    let mut lines = Vec::new();
    let mut z1_density = 0.0;
    for j in 1..=4u64 {
        let z = z_point(&Staircase::unit(), j, t0, 1.0).unwrap();
        let d: Vec<f64> =
            dissipation_box(&field, &Flux::Burgers, (z, t0), &radii, Entropy::Square).unwrap().iter().map(|e| e.density).collect();
        let mut sorted = d.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let stable = median > 0.0 && d.iter().all(|v| (v - median).abs() <= 0.5 * median);
        pass &= stable;
        if j == 1 {
            z1_density = median;
        }
        let shown: Vec<String> = d.iter().map(|v| format!("{v:.3e}")).collect();
        lines.push(format!("z_{j}={z:.6}: densities [{}]", shown.join(", ")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let r = 0.5f64.powi(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = rng.gen_range(-0.2..1.2);
        let e = dissipation_box(&field, &Flux::Burgers, (x, t0), &[r], Entropy::Square).unwrap();
        worst = worst.max(e[0].density);
    }
    let control_ok = z1_density > 0.0 && worst <= 1e-3 * z1_density;
    pass &= control_ok;
    lines.push(format!("max control density {worst:e} vs z_1 density {z1_density:e}"));
    report(5, pass, lines.join("; "));
}

#[test]
fn criterion_06_multid() {
    let line = ExactScalarSolution::new(build_initial_data(&ConvexFlux::burgers(), 16, 1.0).unwrap());
    let sol = tensor_solution(line.clone(), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut constant = true;
    for _ in 0..2_000 {
        let (x1, t) = (rng.gen_range(-0.3..1.3), rng.gen_range(0.01..1.0));
        let a = sol.evaluate(&[x1, rng.gen_range(-5.0..5.0)], t).unwrap();
        let b = sol.evaluate(&[x1, rng.gen_range(-5.0..5.0)], t).unwrap();
        constant &= a == b && a == line.evaluate(x1, t).unwrap();
    }
    let family = FluxFamily::new(vec![Flux::Burgers, Flux::Poly { coeffs: vec![0.0, 0.0, 0.0, 1.0] }]).unwrap();
    let tests: Vec<Bump2> = random_bumps(6, (-0.2, 1.2, 0.05, 0.95), (0.25, 0.2), 62)
        .into_iter()
        .map(|b| Bump2 { x1: b.x0, x2: rng.gen_range(-1.0..1.0), t: b.t0, r1: b.rx, r2: 0.3, rt: b.rt })
        .collect();
    let residual = weak_residual_2d(&sol, &family, &tests, QuadSpec::default()).unwrap();
    let tr = linear_transport_solution(Staircase::unit(), 0.0, 1.0, 0.7, (-1.0, 2.0)).unwrap();
    let tv0 = tr.total_variation(0.0);
    let tv_same = [0.25, 0.5, 1.0, 3.0].iter().all(|&t| tr.total_variation(t) == tv0);
    report(
        6,
        constant && residual <= 1e-6 && tv_same,
        format!("transverse constancy {constant}, 2D weak residual {residual:e}, transport TV {tv0} preserved {tv_same}"),
    );
}

#[test]
fn criterion_07_wave_curves() {
    let sys = Isentropic::new(1.4);
    let u0 = State::from_vec(vec![1.0, 0.0]);
    let (mut rh, mut param, mut retrace) = (0.0f64, 0.0f64, 0.0f64);
    for field in 1..=2 {
        let lam0 = lambda(&sys, &u0, field).unwrap();
        for q in -100..=100 {
            let sigma = 1e-3 * q as f64;
            let p = shock(&sys, &u0, field, sigma).unwrap();
            rh = rh.max(p.rh_residual);
            param = param.max((lambda(&sys, &p.state, field).unwrap() - lam0 - sigma).abs());
            let back = shock(&sys, &p.state, field, -sigma).unwrap();
            retrace = retrace.max((back.state - &u0).norm());
        }
    }
    let mut slope = f64::INFINITY;
    for field in 1..=2 {
        for sign in [-1.0, 1.0] {
            let pts: Vec<(f64, f64)> = (0..=8)
                .map(|k| {
                    let sigma = 1e-3 * 10f64.powf(2.0 * k as f64 / 8.0);
                    let s = shock(&sys, &u0, field, sign * sigma).unwrap().state;
                    let r = rarefaction(&sys, &u0, field, sign * sigma).unwrap().state;
                    (sigma.ln(), (s - r).norm().ln())
                })
                .collect();
            slope = slope.min(least_squares_slope(&pts).unwrap());
        }
    }
    report(
        7,
        rh <= 1e-10 && param <= 1e-8 && retrace <= 1e-8 && slope >= 2.7,
        format!("RH {rh:e}, parametrization {param:e}, retrace {retrace:e}, tangency slope {slope:.4}"),
    );
}

#[test]
fn criterion_08_system_gnl() {
    let sys = Isentropic::new(1.4);
    let u0 = State::from_vec(vec![1.0, 0.0]);
    let sigma0 = 0.05;
    let levels = [8usize, 16, 32, 64, 128];
    let seqs: Vec<_> =
        levels.iter().map(|&n| build_states(&sys, &u0, 1, &scaled_partition(sigma0, n).unwrap(), sigma0).unwrap()).collect();
    let mut tv_max = 0.0f64;
    let mut refine = 0.0f64;
    let mut admissible = true;
    let mut mass = 0.0f64;
    let mut secs128 = 0.0;
    for (idx, seq) in seqs.iter().enumerate() {
        let start = Instant::now();
        let prof = build_profile_gnl(&sys, seq).unwrap();
        tv_max = tv_max.max(prof.tv().tv_lambda);
        let traj = front_track(&sys, &prof, 0.9, &TrackerConfig::new(1e-3), &[0.3, 0.6], sigma0).unwrap();
        if levels[idx] == 128 {
            secs128 = start.elapsed().as_secs_f64();
        }
        admissible &= traj.diagnostics.shocks_admissible;
        mass = mass.max(traj.diagnostics.mass_defect);
        if let Some(coarse) = idx.checked_sub(1).map(|c| &seqs[c]) {
            for d in seq.partition.points() {
                if let Some(u) = coarse.state_at(*d) {
                    refine = refine.max((u - seq.state_at(*d).unwrap()).norm());
                }
            }
        }
    }
    report(
        8,
        tv_max <= 2.0 * sigma0 + TV_ROUNDING && refine <= 1e-10 && admissible && mass <= 1e-3 && secs128 < 120.0,
        format!(
            "max TV(lambda) {tv_max:.17}, refinement {refine:e}, shocks admissible {admissible}, mass defect {mass:e}, N=128 {secs128:.2} s"
        ),
    );
}

#[test]
fn criterion_09_system_ld() {
    let fixture = SystemFixture::Euler3 { gamma: 1.4 };
    let sys = Euler3 { gamma: 1.4 };
    let base = fixture.default_state();
    let delta0 = 0.1;
    let ld = build_profile_ld(&sys, &base, 2, delta0, 30).unwrap();
    let targets_ok = ld.jump_norms.iter().enumerate().all(|(k, &n)| {
        let bound = delta0 * 0.5f64.powi(k as i32 + 1);
        n <= bound && n >= 0.9 * bound
    });
    let prof = ld.profile(&sys).unwrap();
    let tv = prof.tv().tv_state;
    let contacts = prof.kinds.iter().all(|k| *k == JumpKind::Contact);
    let times = [0.25, 0.5, 1.0];
    let traj = front_track(&sys, &prof, 1.0, &TrackerConfig::new(1e-3), &times, 0.0).unwrap();
    let mut pos = 0.0f64;
    let mut states_equal = true;
    for snap in &traj.snapshots {
        states_equal &= snap.fronts.len() == prof.breakpoints.len();
        for (f, (&b, k)) in snap.fronts.iter().zip(prof.breakpoints.iter().zip(1..)) {
            pos = pos.max((f.x - (b + ld.speed * snap.time)).abs());
            states_equal &= f.right == prof.states[k];
        }
        for q in 0..200 {
            let x = -0.2 + 2.0 * (q as f64 + 0.37) / 200.0 + ld.speed * snap.time;
            states_equal &= snap.evaluate(x) == &ld.evaluate(x, snap.time);
        }
    }
    report(
        9,
        targets_ok && tv <= delta0 && contacts && pos <= 1e-12 && states_equal,
        format!(
            "{} terms within targets {targets_ok}, TV(V0) {tv:.6}, contacts {contacts}, front position error {pos:e}, translated states equal {states_equal}",
            ld.terms()
        ),
    );
}

#[test]
#[ignore = "unattainable for this construction: see the decisions ledger"]
fn criterion_10_system_claim() {
    let sigma0 = 0.05;
    let family = SystemFamily::gnl(
        Arc::new(Isentropic::new(1.4)),
        State::from_vec(vec![1.0, 0.0]),
        1,
        sigma0,
        TrackerConfig::for_sigma0(sigma0),
    )
    .unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for j in 3..=4u64 {
        let start = Instant::now();
        let rep = claim_gap_system(&family, &SystemClaimConfig::new(j, 0.5, sigma0)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        pass &= rep.claim_pass && secs < 300.0;
        let stable = rep.rows.iter().filter(|r| r.stabilized).count();
        let all: Vec<String> = rep.rows.iter().map(|r| format!("{:.2e}", r.gap)).collect();
        lines.push(format!(
            "j={j}: min stabilized gap {:?} (>= {}), {stable}/{} rows stabilized, gaps [{}], {secs:.1} s",
            rep.min_stabilized_gap(),
            rep.threshold,
            rep.rows.len(),
            all.join(", ")
        ));
    }
    report(10, pass, lines.join("; "));
}
