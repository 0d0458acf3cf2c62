//! Weak-form and entropy checks, jump-gap certification and box dissipation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{level_gap_bound, z_point, Staircase};
use crate::error::{usage, Result};
use crate::flux::Flux;
use crate::quadrature;
use crate::scalar::{ExactScalarSolution, LimitFamily, Region, MAX_DEPTH};

/// Polynomial bump `(1 - s^2)^3` on `|s| <= 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        w * w * w
    }
}

pub fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        -6.0 * s * w * w
    }
}

/// Tensor bump centred at `(x0, t0)` with radii `(rx, rt)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TestFunctionSpec {
    pub x0: f64,
    pub t0: f64,
    pub rx: f64,
    pub rt: f64,
}

impl TestFunctionSpec {
    pub fn new(x0: f64, t0: f64, rx: f64, rt: f64) -> Self {
        assert!(rx > 0.0 && rt > 0.0, "bump radii must be positive");
        TestFunctionSpec { x0, t0, rx, rt }
    }

    pub fn phi(&self, x: f64, t: f64) -> f64 {
        bump((x - self.x0) / self.rx) * bump((t - self.t0) / self.rt)
    }

    pub fn phi_x(&self, x: f64, t: f64) -> f64 {
        bump_prime((x - self.x0) / self.rx) / self.rx * bump((t - self.t0) / self.rt)
    }

    pub fn phi_t(&self, x: f64, t: f64) -> f64 {
        bump((x - self.x0) / self.rx) * bump_prime((t - self.t0) / self.rt) / self.rt
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x0 - self.rx, self.x0 + self.rx)
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t0 - self.rt, self.t0 + self.rt)
    }

    /// `int phi dt` along the line `x = a + s t`.
    pub fn line_mass(&self, a: f64, s: f64) -> f64 {
        let (lo, hi) = self.t_range();
        quadrature::integrate_panels(|t| self.phi(a + s * t, t), &[lo, hi], 32, 20)
    }
}

/// `n` random bumps with centres in `[x_lo, x_hi] x [t_lo, t_hi]` whose
/// supports stay inside that window.
pub fn random_bumps(n: usize, window: (f64, f64, f64, f64), radius: (f64, f64), seed: u64) -> Vec<TestFunctionSpec> {
    let (x_lo, x_hi, t_lo, t_hi) = window;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let rx = rng.gen_range(0.5 * radius.0..radius.0);
            let rt = rng.gen_range(0.5 * radius.1..radius.1);
            TestFunctionSpec::new(
                rng.gen_range(x_lo + rx..x_hi - rx),
                rng.gen_range(t_lo + rt..t_hi - rt),
                rx,
                rt,
            )
        })
        .collect()
}

/// A state field `u(x, t)` with known singular lines, for quadrature.
pub trait SpaceTimeField: Sync {
    fn state(&self, x: f64, t: f64) -> f64;

    /// Points at time `t` where `u` has a kink or jump, plus the points where
    /// `u` crosses `level` when one is given.
    fn breaks(&self, _t: f64, _level: Option<f64>) -> Vec<f64> {
        Vec::new()
    }

    /// Times in `[t_lo, t_hi]` at which a singular line crosses `x = x_lo` or
    /// `x = x_hi`.
    fn time_breaks(&self, _x_lo: f64, _x_hi: f64, _t_lo: f64, _t_hi: f64, _level: Option<f64>) -> Vec<f64> {
        Vec::new()
    }
}

impl SpaceTimeField for ExactScalarSolution {
    fn state(&self, x: f64, t: f64) -> f64 {
        self.evaluate(x, t).expect("time inside (0, T]")
    }

    fn breaks(&self, t: f64, level: Option<f64>) -> Vec<f64> {
        let mut out = self.breakpoints_at(t);
        if let Some(m) = level {
            out.extend(self.speed_crossings(t, self.profile().flux().df(m)));
        }
        out
    }

    fn time_breaks(&self, x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64, level: Option<f64>) -> Vec<f64> {
        let p = self.profile();
        let horizon = p.horizon();
        let (xs, ys) = (p.partition().x(), p.partition().y());
        // every singular line is x = a + b t
        let mut lines: Vec<(f64, f64)> = Vec::new();
        for j in 0..p.pieces() {
            lines.push((ys[j], (xs[j] - ys[j]) / horizon));
            lines.push((ys[j], (xs[j + 1] - ys[j]) / horizon));
        }
        lines.push((ys[p.pieces()], (xs[p.pieces()] - ys[p.pieces()]) / horizon));
        if let Some(m) = level {
            let c = p.flux().df(m);
            for j in 0..p.pieces() {
                let (lo, hi) = ((xs[j] - ys[j]) / horizon, (xs[j + 1] - ys[j]) / horizon);
                if c >= lo && c <= hi {
                    lines.push((ys[j], c));
                }
                let (a, b) = p.piece_speeds(j);
                if c <= a && c >= b {
                    let xi = xs[j + 1] - horizon * c;
                    lines.push((xi, (xs[j + 1] - xi) / horizon));
                }
            }
        }
        let mut out = Vec::new();
        for (a, b) in lines {
            if b == 0.0 {
                continue;
            }
            for edge in [x_lo, x_hi] {
                let t = (edge - a) / b;
                if t > t_lo && t < t_hi {
                    out.push(t);
                }
            }
        }
        out
    }
}

/// Constant state.
#[derive(Clone, Copy, Debug)]
pub struct ConstantField(pub f64);

impl SpaceTimeField for ConstantField {
    fn state(&self, _x: f64, _t: f64) -> f64 {
        self.0
    }
}

/// Single jump travelling at its Rankine–Hugoniot speed; `x = x0 + s t`.
#[derive(Clone, Debug)]
pub struct ShockFixture {
    pub flux: Flux,
    pub left: f64,
    pub right: f64,
    pub x0: f64,
}

impl ShockFixture {
    pub fn new(flux: Flux, left: f64, right: f64, x0: f64) -> Self {
        assert!(left != right, "shock fixture needs distinct states");
        ShockFixture { flux, left, right, x0 }
    }

    pub fn speed(&self) -> f64 {
        (self.flux.f(self.left) - self.flux.f(self.right)) / (self.left - self.right)
    }

    /// Same jump with the two states exchanged.
    pub fn flipped(&self) -> Self {
        ShockFixture::new(self.flux.clone(), self.right, self.left, self.x0)
    }

    /// `s (eta_R - eta_L) - (q_R - q_L)` for the Kružkov pair of constant `m`.
    pub fn kruzkov_dissipation(&self, m: f64) -> f64 {
        let (eta, q) = kruzkov_pair(&self.flux, m);
        self.speed() * (eta(self.right) - eta(self.left)) - (q(self.right) - q(self.left))
    }

    /// Closed-form Kružkov residual against `psi`.
    pub fn kruzkov_oracle(&self, m: f64, psi: &TestFunctionSpec) -> f64 {
        self.kruzkov_dissipation(m) * psi.line_mass(self.x0, self.speed())
    }
}

impl SpaceTimeField for ShockFixture {
    fn state(&self, x: f64, t: f64) -> f64 {
        if x < self.x0 + self.speed() * t {
            self.left
        } else {
            self.right
        }
    }

    fn breaks(&self, t: f64, _level: Option<f64>) -> Vec<f64> {
        vec![self.x0 + self.speed() * t]
    }

    fn time_breaks(&self, x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64, _level: Option<f64>) -> Vec<f64> {
        let s = self.speed();
        if s == 0.0 {
            return Vec::new();
        }
        [x_lo, x_hi]
            .iter()
            .map(|e| (e - self.x0) / s)
            .filter(|t| *t > t_lo && *t < t_hi)
            .collect()
    }
}

fn kruzkov_pair(flux: &Flux, m: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64 + '_) {
    let fm = flux.f(m);
    (move |u: f64| (u - m).abs(), move |u: f64| sgn(u - m) * (flux.f(u) - fm))
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Quadrature resolution for the space-time integrals.
#[derive(Clone, Copy, Debug)]
pub struct QuadSpec {
    pub t_panels: usize,
    pub x_panels: usize,
    pub order: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { t_panels: 8, x_panels: 2, order: 20 }
    }
}

fn sorted_breaks(lo: f64, hi: f64, inner: Vec<f64>) -> Vec<f64> {
    let mut b: Vec<f64> = inner.into_iter().filter(|p| *p > lo && *p < hi).collect();
    b.push(lo);
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

fn space_time_integral<F, G>(field: &F, spec: &TestFunctionSpec, level: Option<f64>, quad: QuadSpec, integrand: G) -> f64
where
    F: SpaceTimeField + ?Sized,
    G: Fn(f64, f64, f64) -> f64,
{
    let (x_lo, x_hi) = spec.x_range();
    let (t_lo, t_hi) = spec.t_range();
    let t_breaks = sorted_breaks(t_lo, t_hi, field.time_breaks(x_lo, x_hi, t_lo, t_hi, level));
    quadrature::integrate_panels(
        |t| {
            let xb = sorted_breaks(x_lo, x_hi, field.breaks(t, level));
            quadrature::integrate_panels(|x| integrand(field.state(x, t), x, t), &xb, quad.x_panels, quad.order)
        },
        &t_breaks,
        quad.t_panels,
        quad.order,
    )
}

/// `max over tests |int int u phi_t + f(u) phi_x|`.
pub fn weak_residual<F: SpaceTimeField + ?Sized>(field: &F, flux: &Flux, tests: &[TestFunctionSpec], quad: QuadSpec) -> Result<f64> {
    if let Some(bad) = tests.iter().find(|s| s.t_range().0 <= 0.0) {
        return usage(format!("test support reaches t = {} <= 0 and no initial data is supplied", bad.t_range().0));
    }
    Ok(tests
        .par_iter()
        .map(|spec| {
            space_time_integral(field, spec, None, quad, |u, x, t| u * spec.phi_t(x, t) + flux.f(u) * spec.phi_x(x, t)).abs()
        })
        .reduce(|| 0.0, f64::max))
}

/// Minimum of the Kružkov functional over constants and tests.
#[derive(Clone, Debug, Serialize)]
pub struct KruzkovReport {
    pub min: f64,
    pub argmin_m: f64,
    pub argmin_test: usize,
}

pub fn kruzkov_residual<F: SpaceTimeField + ?Sized>(
    field: &F,
    flux: &Flux,
    m_values: &[f64],
    tests: &[TestFunctionSpec],
    quad: QuadSpec,
) -> Result<KruzkovReport> {
    if m_values.is_empty() || tests.is_empty() {
        return usage("Kružkov check needs at least one constant and one test");
    }
    if let Some(bad) = tests.iter().find(|s| s.t_range().0 <= 0.0) {
        return usage(format!("test support reaches t = {} <= 0", bad.t_range().0));
    }
    let jobs: Vec<(usize, f64)> = (0..tests.len()).flat_map(|i| m_values.iter().map(move |&m| (i, m))).collect();
    let best = jobs
        .par_iter()
        .map(|&(i, m)| {
            let spec = &tests[i];
            let fm = flux.f(m);
            let v = space_time_integral(field, spec, Some(m), quad, |u, x, t| {
                (u - m).abs() * spec.phi_t(x, t) + sgn(u - m) * (flux.f(u) - fm) * spec.phi_x(x, t)
            });
            (v, m, i)
        })
        .reduce(|| (f64::INFINITY, 0.0, 0), |a, b| if b.0 < a.0 { b } else { a });
    Ok(KruzkovReport { min: best.0, argmin_m: best.1, argmin_test: best.2 })
}

/// Limit solution sampled through [`LimitFamily::limit_evaluate`].
#[derive(Debug)]
pub struct LimitField<'a> {
    pub family: &'a LimitFamily,
    pub tol: f64,
    pub max_level: usize,
}

impl SpaceTimeField for LimitField<'_> {
    fn state(&self, x: f64, t: f64) -> f64 {
        self.family
            .limit_evaluate(x, t, self.tol, self.max_level)
            .map(|v| v.state)
            .expect("time inside (0, T]")
    }
}

/// Entropy used by the box balance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Entropy {
    /// `u^2 / 2` with `q' = u f'`
    Square,
    /// `|u - m|`
    Kruzkov(f64),
}

fn entropy_pair(flux: &Flux, entropy: Entropy) -> (Box<dyn Fn(f64) -> f64 + Sync + '_>, Box<dyn Fn(f64) -> f64 + Sync + '_>) {
    match entropy {
        Entropy::Square => (Box::new(|u: f64| 0.5 * u * u), Box::new(move |u: f64| square_entropy_flux(flux, u))),
        Entropy::Kruzkov(m) => {
            let fm = flux.f(m);
            (Box::new(move |u: f64| (u - m).abs()), Box::new(move |u: f64| sgn(u - m) * (flux.f(u) - fm)))
        }
    }
}

/// `q(u) = int_0^u v f'(v) dv`.
pub fn square_entropy_flux(flux: &Flux, u: f64) -> f64 {
    match flux {
        Flux::Burgers => u * u * u / 3.0,
        Flux::Power { p } => u.signum() * u.abs().powf(p + 1.0) / (p + 1.0),
        _ => quadrature::integrate(|v| v * flux.df(v), 0.0, u, 20),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DissipationEstimate {
    pub x: f64,
    pub t: f64,
    pub radius: f64,
    pub entropy: Entropy,
    /// `int eta(bottom) - int eta(top) + int q(left) - int q(right)`
    pub dissipation: f64,
    /// `dissipation / radius`
    pub density: f64,
}

/// Edge quadrature resolution for boxes.
pub const BOX_PANELS: usize = 16;

/// Entropy dissipated inside `[x - r, x + r] x [t - r, t + r]` from the
/// boundary balance.
pub fn dissipation_box<F: SpaceTimeField + ?Sized>(
    field: &F,
    flux: &Flux,
    center: (f64, f64),
    radii: &[f64],
    entropy: Entropy,
) -> Result<Vec<DissipationEstimate>> {
    let (x, t) = center;
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0) || t - r <= 0.0) {
        return usage(format!("box of radius {r} at t = {t} leaves the upper half plane"));
    }
    let (eta, q) = entropy_pair(flux, entropy);
    Ok(radii
        .iter()
        .map(|&r| {
            let (xl, xr, tb, tt) = (x - r, x + r, t - r, t + r);
            let edge_x = |tt: f64| {
                let b = sorted_breaks(xl, xr, field.breaks(tt, None));
                quadrature::integrate_panels(|s| eta(field.state(s, tt)), &b, BOX_PANELS, 20)
            };
            let edge_t = |xx: f64| quadrature::integrate_panels(|s| q(field.state(xx, s)), &[tb, tt], BOX_PANELS, 20);
            let d = edge_x(tb) - edge_x(tt) + edge_t(xl) - edge_t(xr);
            DissipationEstimate { x, t, radius: r, entropy, dissipation: d, density: d / r }
        })
        .collect())
}

/// Grid abscissas in `[lo, hi]` whose box density at radius `r` exceeds
/// `threshold`.
pub fn jump_scan<F: SpaceTimeField + ?Sized>(
    field: &F,
    flux: &Flux,
    horizon: f64,
    t0: f64,
    grid: (f64, f64, f64),
    r: f64,
    threshold: f64,
) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t0 < horizon) {
        return usage(format!("scan time t0 = {t0} must lie in (0, {horizon})"));
    }
    if t0 + r > horizon || t0 - r <= 0.0 {
        return usage("scan boxes must fit inside (0, T)");
    }
    let (lo, hi, h) = grid;
    if !(h > 0.0) || hi < lo {
        return usage("scan grid must have positive spacing");
    }
    let n = ((hi - lo) / h).floor() as usize + 1;
    let hits: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = lo + h * i as f64;
            let est = dissipation_box(field, flux, (x, t0), &[r], Entropy::Square).ok()?;
            (est[0].density > threshold).then_some(x)
        })
        .collect();
    Ok(hits.into_iter().flatten().collect())
}

/// Settings of the scalar jump-gap certification.
#[derive(Clone, Debug)]
pub struct ClaimConfig {
    pub horizon: f64,
    pub j: u64,
    pub t0: f64,
    /// offsets `eps_m`, strictly decreasing
    pub offsets: Vec<f64>,
    /// pass tolerance on the gaps
    pub tol: f64,
    /// stabilization tolerance handed to the limit evaluation
    pub stab_tol: f64,
    pub max_level: usize,
    pub seed: u64,
}

impl ClaimConfig {
    pub fn new(j: u64, t0: f64) -> Self {
        ClaimConfig {
            horizon: 1.0,
            j,
            t0,
            offsets: (4..=12).map(|m| 0.5f64.powi(m)).collect(),
            tol: 1e-6,
            stab_tol: 1e-5,
            max_level: (1 << MAX_DEPTH) - 1,
            seed: 11,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub offset: f64,
    pub left_x: f64,
    pub right_x: f64,
    pub left_speed: f64,
    pub right_speed: f64,
    /// `|f'(u(right)) - f'(u(left))|`
    pub gap: f64,
    /// `f'(u(right)) - f'(u(left))`
    pub signed_gap: f64,
    pub witness_level: usize,
    pub witness_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub j: u64,
    pub t0: f64,
    pub horizon: f64,
    pub z: f64,
    /// `3 / (2^{j+3} T)`
    pub claim_threshold: f64,
    /// `7 / (2^{j+3} T)`
    pub witness_threshold: f64,
    pub rows: Vec<GapRow>,
    /// offsets dropped because an endpoint did not stabilize
    pub skipped: Vec<f64>,
    pub claim_pass: bool,
    pub witness_pass: bool,
    pub applicable: bool,
}

impl GapReport {
    pub fn min_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)
    }

    pub fn min_witness_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.witness_gap).fold(f64::INFINITY, f64::min)
    }
}

/// `a / (2^{j+3} T)`; exact for power-of-two horizons.
pub fn gap_threshold(a: f64, j: u64, horizon: f64) -> f64 {
    a * 0.5f64.powi(j as i32 + 3) / horizon
}

/// Speed gap across `z_j` at time `t0` for the limit solution and at the
/// witness level.
pub fn claim_gap(family: &LimitFamily, cfg: &ClaimConfig) -> Result<GapReport> {
    let horizon = family.horizon();
    if (cfg.horizon - horizon).abs() > 0.0 {
        return usage("claim horizon differs from the family horizon");
    }
    if cfg.j == 0 {
        return usage("j must be >= 1");
    }
    if cfg.offsets.is_empty() || cfg.offsets.windows(2).any(|w| w[1] >= w[0]) || cfg.offsets[0] <= 0.0 {
        return usage("offsets must be positive and strictly decreasing");
    }
    let z = z_point(&Staircase::unit(), cfg.j, cfg.t0, horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let witness_floor = 0.5f64.powi(cfg.j as i32 + 3);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &eps in &cfg.offsets {
        let left_x = z - eps - rng.gen_range(0.0..1e-12);
        let right_x = z + eps + rng.gen_range(0.0..1e-12);
        let l = family.limit_evaluate(left_x, cfg.t0, cfg.stab_tol, cfg.max_level)?;
        let r = family.limit_evaluate(right_x, cfg.t0, cfg.stab_tol, cfg.max_level)?;
        if !(l.converged && r.converged) {
            skipped.push(eps);
            continue;
        }
        // smallest full level fine enough and past both stabilization levels
        let mut depth = 1;
        while depth < MAX_DEPTH
            && (level_gap_bound(LimitFamily::level_of_depth(depth)) > witness_floor
                || LimitFamily::level_of_depth(depth) < l.level.max(r.level))
        {
            depth += 1;
        }
        let sol = family.solution(depth);
        let wl = sol.speed_at(left_x, cfg.t0)?;
        let wr = sol.speed_at(right_x, cfg.t0)?;
        rows.push(GapRow {
            offset: eps,
            left_x,
            right_x,
            left_speed: l.speed,
            right_speed: r.speed,
            gap: (r.speed - l.speed).abs(),
            signed_gap: r.speed - l.speed,
            witness_level: LimitFamily::level_of_depth(depth),
            witness_gap: (wr - wl).abs(),
        });
    }
    let claim_threshold = gap_threshold(3.0, cfg.j, horizon);
    let witness_threshold = gap_threshold(7.0, cfg.j, horizon);
    let claim_pass = !rows.is_empty() && rows.iter().all(|r| r.gap >= claim_threshold - cfg.tol);
    let witness_pass = !rows.is_empty() && rows.iter().all(|r| r.witness_gap >= witness_threshold - cfg.tol);
    Ok(GapReport {
        j: cfg.j,
        t0: cfg.t0,
        horizon,
        z,
        claim_threshold,
        witness_threshold,
        rows,
        skipped,
        claim_pass,
        witness_pass,
        applicable: true,
    })
}

/// Control run of the gap measurement on constant data: every gap is zero and
/// the claim does not apply.
pub fn claim_gap_control(value: f64, cfg: &ClaimConfig) -> Result<GapReport> {
    let z = z_point(&Staircase::unit(), cfg.j, cfg.t0, cfg.horizon)?;
    let field = ConstantField(value);
    let rows = cfg
        .offsets
        .iter()
        .map(|&eps| {
            let (a, b) = (field.state(z - eps, cfg.t0), field.state(z + eps, cfg.t0));
            GapRow {
                offset: eps,
                left_x: z - eps,
                right_x: z + eps,
                left_speed: a,
                right_speed: b,
                gap: (b - a).abs(),
                signed_gap: b - a,
                witness_level: 0,
                witness_gap: (b - a).abs(),
            }
        })
        .collect();
    Ok(GapReport {
        j: cfg.j,
        t0: cfg.t0,
        horizon: cfg.horizon,
        z,
        claim_threshold: gap_threshold(3.0, cfg.j, cfg.horizon),
        witness_threshold: gap_threshold(7.0, cfg.j, cfg.horizon),
        rows,
        skipped: Vec::new(),
        claim_pass: false,
        witness_pass: false,
        applicable: false,
    })
}

/// Region label of a query, for diagnostics.
pub fn region_label(sol: &ExactScalarSolution, x: f64, t: f64) -> Result<String> {
    Ok(match sol.region(x, t)? {
        Region::ExteriorLeft => "exterior-left".into(),
        Region::ExteriorRight => "exterior-right".into(),
        Region::Fan(j) => format!("fan {j}"),
        Region::Focus(j) => format!("focus {j}"),
    })
}
