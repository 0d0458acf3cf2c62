//! Staircase-driven data for one family of a strictly hyperbolic system: the
//! shock-curve state sequences and their initial profile for a genuinely
//! nonlinear family, the contact staircase for a linearly degenerate one, a
//! single-family front tracker, and the limit and gap measurements built on
//! it.
//!
//! Characteristic speeds are measured in the frame moving with `λ_i(U0)`:
//! the `U_m` piece carries `λ_i = λ_i(U0) + x_m − y_m`, so shocks land at
//! `x_m + λ_i(U0)` at time 1.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{z_point, Dyadic, LevelPartition, Staircase, DEFAULT_TRUNCATION};
use crate::error::{usage, Error, Result};
use crate::waves::{
    contact_curve, lambda, lax_admissible, nonlinearity, rarefaction, rh_residual, shock, shock_speed,
    shock_with_guess, HyperbolicSystem, LaxCheck, State, SystemFixture, DEGENERACY_TOL,
};

/// Floating-point allowance on total-variation bounds that hold with equality.
pub const TV_ROUNDING: f64 = 1e-12;
/// Staircase increments at or below this are invisible next to `O(1)`
/// characteristic speeds and produce no shock.
pub const SIGMA_FLOOR: f64 = 1e-13;
/// Latest time the genuinely nonlinear branch is evolved to.
pub const GNL_HORIZON_CAP: f64 = 0.999;

/// Level partition of `[0, σ0]` with images under the staircase of height `σ0`.
pub fn scaled_partition(sigma0: f64, level: usize) -> Result<LevelPartition> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return usage(format!("sigma0 must be positive, got {sigma0}"));
    }
    Ok(LevelPartition::new(level, &Staircase::new(sigma0, sigma0, DEFAULT_TRUNCATION)))
}

fn require_gnl<S: HyperbolicSystem + ?Sized>(sys: &S, u0: &State, i: usize) -> Result<()> {
    let k = nonlinearity(sys, u0, i)?;
    if k.abs() <= DEGENERACY_TOL {
        return usage(format!("family {i} is not genuinely nonlinear at U0 (∇λ·r = {k:e})"));
    }
    Ok(())
}

fn continuation_hint(e: Error, sigma0: f64) -> Error {
    match e {
        Error::Continuation { sigma, last_good, reason } => Error::Construction(format!(
            "shock curve stopped at sigma={last_good} while reaching {sigma} ({reason}); reduce sigma0 below {sigma0}"
        )),
        other => other,
    }
}

/// States `U_m = S_i(x_m − y_m)(U0)` and `U_{m+1/2} = S_i(x_m − y_{m+1})(U0)`
/// over a partition of `[0, σ0]`, indices 0-based.
#[derive(Debug, Clone)]
pub struct StateSequence {
    pub base: State,
    pub field: usize,
    pub sigma0: f64,
    pub partition: LevelPartition,
    pub args: Vec<f64>,
    pub half_args: Vec<f64>,
    pub states: Vec<State>,
    pub half_states: Vec<State>,
}

impl StateSequence {
    /// State at the breakpoint carrying dyadic `d`, if the partition has it.
    pub fn state_at(&self, d: Dyadic) -> Option<&State> {
        self.partition.position_of(d).map(|m| &self.states[m])
    }

    pub fn max_arg(&self) -> f64 {
        self.args.iter().chain(&self.half_args).fold(0.0, |a, b| a.max(b.abs()))
    }
}

pub fn build_states<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    i: usize,
    partition: &LevelPartition,
    sigma0: f64,
) -> Result<StateSequence> {
    if partition.scale() != sigma0 || partition.width() != sigma0 {
        return usage("partition must be scaled to [0, sigma0] with height sigma0");
    }
    require_gnl(sys, u0, i)?;
    let (x, y) = (partition.x(), partition.y());
    let p = partition.pieces();
    let args: Vec<f64> = (0..=p).map(|m| x[m] - y[m]).collect();
    let half_args: Vec<f64> = (0..p).map(|m| x[m] - y[m + 1]).collect();
    let bound = 2.0 * sigma0 * (1.0 + 1e-12);
    if let Some(a) = args.iter().chain(&half_args).find(|a| a.abs() > bound) {
        return Err(Error::Construction(format!("shock-curve argument {a} exceeds 2 sigma0")));
    }
    let solve = |a: &f64| shock(sys, u0, i, *a).map(|w| w.state).map_err(|e| continuation_hint(e, sigma0));
    let states = args.par_iter().map(solve).collect::<Result<Vec<_>>>()?;
    let half_states = half_args.par_iter().map(solve).collect::<Result<Vec<_>>>()?;
    Ok(StateSequence {
        base: u0.clone(),
        field: i,
        sigma0,
        partition: partition.clone(),
        args,
        half_args,
        states,
        half_states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpKind {
    Shock,
    Rarefaction,
    Contact,
}

/// Piecewise-constant data; `states[k]` holds between `breakpoints[k-1]` and
/// `breakpoints[k]`, the first and last states are the exterior ones.
#[derive(Debug, Clone)]
pub struct PiecewiseProfile {
    pub field: usize,
    pub base: State,
    pub breakpoints: Vec<f64>,
    pub states: Vec<State>,
    pub kinds: Vec<JumpKind>,
    pub lambdas: Vec<f64>,
    /// Per piece of the construction: distance between the pairwise
    /// re-solved state and the same-locus state `U_{m+1/2}`.
    pub discrepancies: Vec<f64>,
}

/// JSON form of a profile together with the system that generated it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileFile {
    pub fixture: SystemFixture,
    pub field: usize,
    /// Construction scale; `0` for the linearly degenerate branch.
    pub sigma0: f64,
    pub level: usize,
    pub base: Vec<f64>,
    pub breakpoints: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub kinds: Vec<JumpKind>,
}

impl ProfileFile {
    pub fn new(profile: &PiecewiseProfile, fixture: SystemFixture, sigma0: f64, level: usize) -> Self {
        ProfileFile {
            fixture,
            field: profile.field,
            sigma0,
            level,
            base: profile.base.iter().copied().collect(),
            breakpoints: profile.breakpoints.clone(),
            states: profile.states.iter().map(|u| u.iter().copied().collect()).collect(),
            kinds: profile.kinds.clone(),
        }
    }

    /// Rebuilds the system and the profile, validating shapes and domain.
    pub fn load(&self) -> Result<(Box<dyn HyperbolicSystem>, PiecewiseProfile)> {
        let sys = self.fixture.build()?;
        let n = sys.dim();
        if self.field == 0 || self.field > n {
            return usage(format!("field: {} out of range 1..={n}", self.field));
        }
        if self.states.len() != self.breakpoints.len() + 1 || self.kinds.len() != self.breakpoints.len() {
            return usage("states: expected one more state than breakpoints and one kind per breakpoint");
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) || self.breakpoints.windows(2).any(|w| w[0] > w[1]) {
            return usage("breakpoints: must be finite and nondecreasing");
        }
        if self.base.len() != n || self.states.iter().any(|u| u.len() != n) {
            return usage(format!("states: every state needs {n} components"));
        }
        let states: Vec<State> = self.states.iter().map(|u| State::from_vec(u.clone())).collect();
        let base = State::from_vec(self.base.clone());
        let lambdas = states.iter().map(|u| lambda(sys.as_ref(), u, self.field)).collect::<Result<Vec<_>>>()?;
        let profile = PiecewiseProfile {
            field: self.field,
            base,
            breakpoints: self.breakpoints.clone(),
            states,
            kinds: self.kinds.clone(),
            lambdas,
            discrepancies: Vec::new(),
        };
        Ok((sys, profile))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TvReport {
    pub tv_state: f64,
    pub tv_lambda: f64,
}

impl PiecewiseProfile {
    fn assemble<S: HyperbolicSystem + ?Sized>(
        sys: &S,
        field: usize,
        base: &State,
        pieces: Vec<(f64, State)>,
        discrepancies: Vec<f64>,
    ) -> Result<Self> {
        let mut breakpoints = Vec::new();
        let mut states = vec![base.clone()];
        let mut lambdas = vec![lambda(sys, base, field)?];
        let mut kinds = Vec::new();
        let mut push = |x: f64, u: State| -> Result<()> {
            let last = states.last().expect("nonempty");
            if *last == u {
                return Ok(());
            }
            let lam = lambda(sys, &u, field)?;
            let dl = lam - lambdas.last().expect("nonempty");
            kinds.push(if dl < -1e-14 {
                JumpKind::Shock
            } else if dl > 1e-14 {
                JumpKind::Rarefaction
            } else {
                JumpKind::Contact
            });
            breakpoints.push(x);
            states.push(u);
            lambdas.push(lam);
            Ok(())
        };
        for (x, u) in pieces {
            push(x, u)?;
        }
        Ok(PiecewiseProfile {
            field,
            base: base.clone(),
            breakpoints,
            states,
            kinds,
            lambdas,
            discrepancies,
        })
    }

    /// Right-continuous evaluation.
    pub fn evaluate(&self, x: f64) -> &State {
        &self.states[self.breakpoints.partition_point(|&b| b <= x)]
    }

    pub fn jumps(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn tv(&self) -> TvReport {
        TvReport {
            tv_state: self.states.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum(),
            tv_lambda: self.lambdas.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
        }
    }

    /// `Σ (U_k − base)·|piece k|` over the interior pieces.
    pub fn mass(&self) -> State {
        let mut m = State::zeros(self.base.len());
        for (k, w) in self.breakpoints.windows(2).enumerate() {
            m += (&self.states[k + 1] - &self.base) * (w[1] - w[0]);
        }
        m
    }
}

/// Lay the sequence out on the `y`-axis: `U_m` on `(y_m, y_{m+1/2})` and the
/// shock partner of `U_m` on `(y_{m+1/2}, y_{m+1})`, with `y_{m+1/2}` chosen
/// so that shock reaches `x_m + λ_i(U0)` at time 1.
pub fn build_profile_gnl<S: HyperbolicSystem + ?Sized>(sys: &S, seq: &StateSequence) -> Result<PiecewiseProfile> {
    let i = seq.field;
    let part = &seq.partition;
    let y = part.y();
    let p = part.pieces();
    let shocks = (0..p)
        .into_par_iter()
        .map(|m| {
            let w = shock(sys, &seq.states[m], i, -part.sigma(m).max(0.0)).map_err(|e| continuation_hint(e, seq.sigma0))?;
            let speed = w.speed.expect("shock branch carries a speed");
            let chk = lax_admissible(sys, &seq.states[m], &w.state, speed, i)?;
            Ok((w.state, speed, chk))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pieces = Vec::with_capacity(2 * p + 1);
    let mut discrepancies = Vec::with_capacity(p);
    for (m, (partner, speed, chk)) in shocks.into_iter().enumerate() {
        let sigma = part.sigma(m);
        if sigma <= SIGMA_FLOOR {
            // shock below floating resolution: the piece keeps U_m
            discrepancies.push((&seq.states[m] - &seq.half_states[m]).norm());
            pieces.push((y[m], seq.states[m].clone()));
            continue;
        }
        // x_m + λ_i(U0) − λ̄ written relative to y_m to avoid cancellation
        let theta = (lambda(sys, &seq.states[m], i)? - speed) / sigma;
        let y_half = y[m] + theta * sigma;
        if !(theta > 0.0 && theta < 1.0 && y_half > y[m] && y_half < y[m + 1]) {
            return Err(Error::Construction(format!(
                "intermediate point {y_half} outside ({}, {}) for piece {m}: shock speed {speed}",
                y[m],
                y[m + 1]
            )));
        }
        if !chk.admissible {
            return Err(Error::Construction(format!("shock of piece {m} violates the Lax condition: {chk:?}")));
        }
        discrepancies.push((&partner - &seq.half_states[m]).norm());
        pieces.push((y[m], seq.states[m].clone()));
        pieces.push((y_half, partner));
    }
    pieces.push((y[p], seq.states[p].clone()));
    pieces.push((y[p], seq.base.clone()));
    let profile = PiecewiseProfile::assemble(sys, i, &seq.base, pieces, discrepancies)?;
    let tv = profile.tv().tv_lambda;
    if tv > 2.0 * seq.sigma0 + TV_ROUNDING {
        return Err(Error::Construction(format!("TV of lambda_{i} is {tv}, above 2 sigma0")));
    }
    Ok(profile)
}

/// Contact staircase `U0 + Σ_k (S(σ_k) − S(σ_{k−1})) χ_{(−∞, r_k]}` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LdProfile {
    pub base: State,
    pub field: usize,
    pub delta0: f64,
    /// Arclength parameters `σ_1..σ_K`.
    pub arclengths: Vec<f64>,
    /// `S(σ_0) = U0, S(σ_1), …, S(σ_K)`.
    pub curve_states: Vec<State>,
    /// `|S(σ_k)(U0) − U0|` for `k = 1..=K`.
    pub jump_norms: Vec<f64>,
    pub speed: f64,
}

/// Largest number of staircase terms; beyond it the targets `δ0 2^-k` drop
/// below state resolution.
pub const LD_MAX_TERMS: usize = 40;

pub fn build_profile_ld<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    i: usize,
    delta0: f64,
    terms: usize,
) -> Result<LdProfile> {
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return usage(format!("delta0 must be positive, got {delta0}"));
    }
    if terms == 0 || terms > LD_MAX_TERMS {
        return Err(Error::Resolution(format!("number of staircase terms must lie in 1..={LD_MAX_TERMS}, got {terms}")));
    }
    let speed = lambda(sys, u0, i)?;
    let dist = |s: f64| -> Result<(f64, State)> {
        let w = contact_curve(sys, u0, i, s).map_err(|e| match e {
            Error::Continuation { last_good, .. } => Error::Domain(format!(
                "contact curve leaves the domain at arclength {last_good}; delta0 = {delta0} too large"
            )),
            other => other,
        })?;
        Ok(((&w.state - u0).norm(), w.state))
    };
    let mut arclengths = Vec::with_capacity(terms);
    let mut curve_states = vec![u0.clone()];
    let mut jump_norms = Vec::with_capacity(terms);
    for k in 1..=terms {
        let bound = delta0 * 0.5f64.powi(k as i32);
        let target = 0.95 * bound;
        let mut lo = 0.0;
        let mut hi = target;
        let mut grow = 0;
        while dist(hi)?.0 < target {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            if grow > 60 {
                return Err(Error::Domain(format!("contact curve never reaches distance {target}")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if dist(mid)?.0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (norm, state) = dist(hi)?;
        if !(norm >= 0.9 * bound && norm <= bound) {
            return Err(Error::Construction(format!(
                "term {k}: distance {norm} misses [0.9, 1.0] x {bound}"
            )));
        }
        arclengths.push(hi);
        curve_states.push(state);
        jump_norms.push(norm);
    }
    Ok(LdProfile {
        base: u0.clone(),
        field: i,
        delta0,
        arclengths,
        curve_states,
        jump_norms,
        speed,
    })
}

impl LdProfile {
    pub fn terms(&self) -> usize {
        self.arclengths.len()
    }

    /// The literal staircase sum at `x`.
    pub fn initial(&self, x: f64) -> State {
        let mut u = self.base.clone();
        if x <= 0.0 || x >= 1.0 {
            return u;
        }
        for k in 1..=self.terms() {
            if x <= Dyadic::nth(k as u64).to_f64() {
                u += &self.curve_states[k] - &self.curve_states[k - 1];
            }
        }
        u
    }

    /// Exact solution `V0(x − λ_i(U0) t)`.
    pub fn evaluate(&self, x: f64, t: f64) -> State {
        self.initial(x - self.speed * t)
    }

    pub fn profile<S: HyperbolicSystem + ?Sized>(&self, sys: &S) -> Result<PiecewiseProfile> {
        let mut pts: Vec<f64> = (1..=self.terms()).map(|k| Dyadic::nth(k as u64).to_f64()).collect();
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
        let mut pieces = Vec::with_capacity(pts.len());
        for (l, &p) in pts.iter().enumerate() {
            let next = pts.get(l + 1).copied().unwrap_or(1.0);
            // value on (p, next] from the literal sum at the right end
            pieces.push((p, self.initial(if next < 1.0 { next } else { 0.5 * (p + 1.0) })));
        }
        PiecewiseProfile::assemble(sys, self.field, &self.base, pieces, Vec::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrontKind {
    Shock,
    Rarefaction,
    Contact,
    /// Non-physical front carrying the residual between a wave-curve state
    /// and the actual neighbouring state.
    Error,
}

#[derive(Debug, Clone)]
pub struct Front {
    /// Position at time `born`.
    pub origin: f64,
    pub born: f64,
    pub speed: f64,
    pub left: State,
    pub right: State,
    pub kind: FrontKind,
    /// `λ_i(right) − λ_i(left)`.
    pub strength: f64,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        self.origin + self.speed * (t - self.born)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub eps_fan: f64,
    pub max_fronts: usize,
    pub max_events: u64,
    /// Largest tolerated non-i component of a jump.
    pub max_error_jump: f64,
    /// Jumps below this are folded into the neighbouring state.
    pub fold_tol: f64,
}

impl TrackerConfig {
    pub fn new(eps_fan: f64) -> Self {
        TrackerConfig {
            eps_fan,
            max_fronts: 200_000,
            max_events: 50_000_000,
            max_error_jump: 1e-3,
            fold_tol: 1e-12,
        }
    }

    /// `ε_fan = min(1e−3, σ0/100)`.
    pub fn for_sigma0(sigma0: f64) -> Self {
        Self::new(1e-3f64.min(sigma0 / 100.0))
    }
}

#[derive(Debug, Clone)]
pub struct FrontView {
    pub x: f64,
    pub speed: f64,
    pub kind: FrontKind,
    pub strength: f64,
    pub left: State,
    pub right: State,
    pub lax: Option<LaxCheck>,
}

/// Sorted fronts at one time.
#[derive(Debug, Clone)]
pub struct FrontTrackingState {
    pub time: f64,
    pub far_left: State,
    pub fronts: Vec<FrontView>,
    pub interactions: u64,
    pub eps_fan: f64,
}

impl FrontTrackingState {
    pub fn evaluate(&self, x: f64) -> &State {
        let k = self.fronts.partition_point(|f| f.x <= x);
        if k == 0 {
            &self.far_left
        } else {
            &self.fronts[k - 1].right
        }
    }

    pub fn positions_increasing(&self) -> bool {
        self.fronts.windows(2).all(|w| w[0].x <= w[1].x)
    }

    pub fn tv(&self) -> TvReport {
        TvReport {
            tv_state: self.fronts.iter().map(|f| (&f.right - &f.left).norm()).sum(),
            tv_lambda: self.fronts.iter().map(|f| f.strength.abs()).sum(),
        }
    }

    /// `∫_a^b (U − base) dx` for a window containing every front.
    pub fn mass(&self, base: &State, a: f64, b: f64) -> State {
        let mut m = State::zeros(base.len());
        let mut x = a;
        let mut u = &self.far_left;
        for f in &self.fronts {
            m += (u - base) * (f.x - x);
            x = f.x;
            u = &f.right;
        }
        m + (u - base) * (b - x)
    }

    pub fn far_right(&self) -> &State {
        self.fronts.last().map(|f| &f.right).unwrap_or(&self.far_left)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackDiagnostics {
    pub interactions: u64,
    pub events: u64,
    pub max_fronts: usize,
    pub error_fronts_created: u64,
    pub shocks_admissible: bool,
    pub min_shock_margin: f64,
    pub mass_defect: f64,
    pub tv_lambda_initial: f64,
    pub tv_lambda_max: f64,
    /// `tv_lambda_max > tv_lambda_initial + 10 σ0²` for the supplied `σ0`.
    pub tv_slack_exceeded: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<FrontTrackingState>,
    pub diagnostics: TrackDiagnostics,
}

impl Trajectory {
    pub fn last(&self) -> &FrontTrackingState {
        self.snapshots.last().expect("trajectory holds the final snapshot")
    }
}

const NIL: usize = usize::MAX;

struct Slot {
    front: Front,
    prev: usize,
    next: usize,
    version: u32,
    alive: bool,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    x: f64,
    a: usize,
    b: usize,
    va: u32,
    vb: u32,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: the heap pops the earliest time, then the leftmost position
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.x.total_cmp(&self.x))
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

struct Tracker<'a, S: HyperbolicSystem + ?Sized> {
    sys: &'a S,
    field: usize,
    cfg: TrackerConfig,
    degenerate: bool,
    slots: Vec<Slot>,
    free: Vec<usize>,
    head: usize,
    count: usize,
    queue: BinaryHeap<Event>,
    now: f64,
    t_end: f64,
    far_left: State,
    interactions: u64,
    events: u64,
    max_count: usize,
    errors_created: u64,
    admissible: bool,
    min_margin: f64,
    tv_lambda: f64,
    tv_lambda_max: f64,
}

impl<'a, S: HyperbolicSystem + ?Sized> Tracker<'a, S> {
    fn lam(&self, u: &State) -> Result<f64> {
        lambda(self.sys, u, self.field)
    }

    fn make(&self, x: f64, left: State, right: State, kind: FrontKind, speed: f64) -> Result<Front> {
        let strength = self.lam(&right)? - self.lam(&left)?;
        Ok(Front {
            origin: x,
            born: self.now,
            speed,
            left,
            right,
            kind,
            strength,
        })
    }

    fn error_front(&mut self, x: f64, left: State, right: State, speed: Option<f64>) -> Result<Front> {
        let jump = (&right - &left).norm();
        if jump > self.cfg.max_error_jump {
            return Err(Error::Structural(format!(
                "states {:?} and {:?} at x={x} are not joined by family {} (residual {jump:e})",
                left.as_slice(),
                right.as_slice(),
                self.field
            )));
        }
        let speed = match speed {
            Some(s) => s,
            None => shock_speed(self.sys, &left, &right)?.0,
        };
        self.errors_created += 1;
        self.make(x, left, right, FrontKind::Error, speed)
    }

    /// Family-`i` Riemann solve with the non-`i` remainder on an error front.
    fn riemann(&mut self, x: f64, left: &State, right: &State) -> Result<Vec<Front>> {
        let fold = self.cfg.fold_tol;
        if (right - left).norm() <= fold {
            return Ok(Vec::new());
        }
        let lam_l = self.lam(left)?;
        let lam_r = self.lam(right)?;
        if self.degenerate {
            let res = rh_residual(self.sys, left, right, lam_l);
            if res > 1e-8 || (lam_r - lam_l).abs() > 1e-8 {
                return Err(Error::Structural(format!(
                    "jump at x={x} between {:?} and {:?} is not a contact (RH residual {res:e})",
                    left.as_slice(),
                    right.as_slice()
                )));
            }
            return Ok(vec![self.make(x, left.clone(), right.clone(), FrontKind::Contact, lam_l)?]);
        }
        let sigma = lam_r - lam_l;
        let mut fronts = Vec::new();
        let mut w = left.clone();
        if sigma < -1e-14 {
            let sh = shock(self.sys, left, self.field, sigma)?;
            let speed = sh.speed.expect("shock speed");
            fronts.push(self.make(x, left.clone(), sh.state.clone(), FrontKind::Shock, speed)?);
            w = sh.state;
        } else if sigma > 1e-14 {
            let n = (sigma / self.cfg.eps_fan).ceil().max(1.0) as usize;
            let h = sigma / n as f64;
            for _ in 0..n {
                let next = rarefaction(self.sys, &w, self.field, h)?.state;
                let speed = self.lam(&w)?;
                fronts.push(self.make(x, w.clone(), next.clone(), FrontKind::Rarefaction, speed)?);
                w = next;
            }
        }
        if (&w - right).norm() <= fold {
            if let Some(last) = fronts.last_mut() {
                last.right = right.clone();
            }
        } else {
            let e = self.error_front(x, w, right.clone(), None)?;
            fronts.push(e);
        }
        Ok(fronts)
    }

    /// `i`-wave of the given kind and λ-increment starting at `from`.
    fn wave(&self, from: &State, kind: FrontKind, sigma: f64, guess: Option<(&State, f64)>) -> Result<(State, f64)> {
        match kind {
            FrontKind::Shock => {
                let w = shock_with_guess(self.sys, from, self.field, sigma, guess)?;
                Ok((w.state, w.speed.expect("shock speed")))
            }
            FrontKind::Rarefaction => Ok((rarefaction(self.sys, from, self.field, sigma)?.state, self.lam(from)?)),
            _ => Err(Error::Structural(format!("no {kind:?} wave curve in the tracked family"))),
        }
    }

    fn interact(&mut self, a: usize, b: usize) -> Result<Vec<Front>> {
        let fa = self.slots[a].front.clone();
        let fb = self.slots[b].front.clone();
        let x = fa.position(self.now);
        let (l, m, r) = (&fa.left, &fa.right, &fb.right);
        let fold = self.cfg.fold_tol;
        use FrontKind::{Contact, Error as Residual, Shock};
        match (fa.kind, fb.kind) {
            (Contact, _) | (_, Contact) => Err(Error::Structural(format!(
                "contact front meets a {:?} front at x={x}",
                if fa.kind == Contact { fb.kind } else { fa.kind }
            ))),
            (Residual, Residual) => {
                if (r - l).norm() <= fold {
                    Ok(Vec::new())
                } else {
                    Ok(vec![self.error_front(x, l.clone(), r.clone(), None)?])
                }
            }
            (Residual, k) => {
                // the faster error front passes; the i-wave keeps its strength
                let guess = r + (l - m);
                let (w, speed) = self.wave(l, k, fb.strength, Some((&guess, fb.speed)))?;
                let mut out = vec![self.make(x, l.clone(), w.clone(), k, speed)?];
                if (&w - r).norm() <= fold {
                    out[0].right = r.clone();
                } else {
                    out.push(self.error_front(x, w, r.clone(), Some(fa.speed))?);
                }
                Ok(out)
            }
            (k, Residual) => {
                let guess = l + (r - m);
                let (w, speed) = match k {
                    Shock => self.wave(r, k, -fa.strength, Some((&guess, fa.speed)))?,
                    _ => {
                        let w = rarefaction(self.sys, r, self.field, -fa.strength)?.state;
                        let s = self.lam(&w)?;
                        (w, s)
                    }
                };
                let mut out = Vec::new();
                let start = if (l - &w).norm() <= fold {
                    l.clone()
                } else {
                    out.push(self.error_front(x, l.clone(), w.clone(), Some(fb.speed))?);
                    w
                };
                out.push(self.make(x, start, r.clone(), k, speed)?);
                Ok(out)
            }
            _ => self.riemann(x, l, r),
        }
    }

    fn alloc(&mut self, front: Front) -> usize {
        let slot = Slot {
            front,
            prev: NIL,
            next: NIL,
            version: 0,
            alive: true,
        };
        match self.free.pop() {
            Some(k) => {
                let version = self.slots[k].version.wrapping_add(1);
                self.slots[k] = Slot { version, ..slot };
                k
            }
            None => {
                self.slots.push(slot);
                self.slots.len() - 1
            }
        }
    }

    fn record_shock(&mut self, k: usize) -> Result<()> {
        let f = &self.slots[k].front;
        if f.kind == FrontKind::Shock {
            let chk = lax_admissible(self.sys, &f.left, &f.right, f.speed, self.field)?;
            self.admissible &= chk.admissible;
            self.min_margin = self.min_margin.min(chk.left_margin.min(chk.right_margin));
        }
        Ok(())
    }

    /// Splice `fronts` between `prev` and `next`, returning the new indices.
    fn splice(&mut self, prev: usize, next: usize, fronts: Vec<Front>) -> Result<Vec<usize>> {
        let mut ids = Vec::with_capacity(fronts.len());
        let mut last = prev;
        for f in fronts {
            self.tv_lambda += f.strength.abs();
            let k = self.alloc(f);
            self.slots[k].prev = last;
            if last == NIL {
                self.head = k;
            } else {
                self.slots[last].next = k;
            }
            last = k;
            ids.push(k);
            self.count += 1;
            self.record_shock(k)?;
        }
        if last == NIL {
            self.head = next;
        } else {
            self.slots[last].next = next;
        }
        if next != NIL {
            self.slots[next].prev = last;
        }
        self.max_count = self.max_count.max(self.count);
        self.tv_lambda_max = self.tv_lambda_max.max(self.tv_lambda);
        if self.count > self.cfg.max_fronts {
            return Err(Error::Resource(format!("front count {} above cap {}", self.count, self.cfg.max_fronts)));
        }
        Ok(ids)
    }

    fn kill(&mut self, k: usize) {
        self.tv_lambda -= self.slots[k].front.strength.abs();
        self.slots[k].alive = false;
        self.count -= 1;
        self.free.push(k);
    }

    fn schedule(&mut self, a: usize) {
        if a == NIL {
            return;
        }
        let b = self.slots[a].next;
        if b == NIL {
            return;
        }
        let (fa, fb) = (&self.slots[a].front, &self.slots[b].front);
        if fa.speed <= fb.speed {
            return;
        }
        let gap = fb.position(self.now) - fa.position(self.now);
        let time = self.now + (gap / (fa.speed - fb.speed)).max(0.0);
        if time <= self.t_end {
            self.queue.push(Event {
                time,
                x: fa.position(time),
                a,
                b,
                va: self.slots[a].version,
                vb: self.slots[b].version,
            });
        }
    }

    fn valid(&self, e: &Event) -> bool {
        let (sa, sb) = (&self.slots[e.a], &self.slots[e.b]);
        sa.alive && sb.alive && sa.version == e.va && sb.version == e.vb && sa.next == e.b
    }

    fn snapshot(&self, t: f64) -> Result<FrontTrackingState> {
        let mut fronts = Vec::with_capacity(self.count);
        let mut k = self.head;
        while k != NIL {
            let f = &self.slots[k].front;
            let lax = if f.kind == FrontKind::Shock {
                Some(lax_admissible(self.sys, &f.left, &f.right, f.speed, self.field)?)
            } else {
                None
            };
            fronts.push(FrontView {
                x: f.position(t),
                speed: f.speed,
                kind: f.kind,
                strength: f.strength,
                left: f.left.clone(),
                right: f.right.clone(),
                lax,
            });
            k = self.slots[k].next;
        }
        Ok(FrontTrackingState {
            time: t,
            far_left: self.far_left.clone(),
            fronts,
            interactions: self.interactions,
            eps_fan: self.cfg.eps_fan,
        })
    }
}

/// Event-driven evolution of `profile` to `t_end ≤ 1` within the tracked
/// family; snapshots at each requested time `≤ t_end` and at `t_end`.
/// `sigma0` only sets the reported variation slack `10 σ0²`.
pub fn front_track<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    profile: &PiecewiseProfile,
    t_end: f64,
    cfg: &TrackerConfig,
    snapshot_times: &[f64],
    sigma0: f64,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end <= 1.0) {
        return usage(format!("t_end = {t_end} must lie in (0, 1]"));
    }
    if !(cfg.eps_fan > 0.0 && cfg.fold_tol >= 0.0 && cfg.max_error_jump > 0.0) {
        return usage("tracker tolerances must be positive");
    }
    let field = profile.field;
    let degenerate = nonlinearity(sys, &profile.base, field)?.abs() <= 1e-6;
    let mut tr = Tracker {
        sys,
        field,
        cfg: *cfg,
        degenerate,
        slots: Vec::new(),
        free: Vec::new(),
        head: NIL,
        count: 0,
        queue: BinaryHeap::new(),
        now: 0.0,
        t_end,
        far_left: profile.states[0].clone(),
        interactions: 0,
        events: 0,
        max_count: 0,
        errors_created: 0,
        admissible: true,
        min_margin: f64::INFINITY,
        tv_lambda: 0.0,
        tv_lambda_max: 0.0,
    };
    let mut initial = Vec::new();
    for (k, &x) in profile.breakpoints.iter().enumerate() {
        initial.extend(tr.riemann(x, &profile.states[k], &profile.states[k + 1])?);
    }
    tr.splice(NIL, NIL, initial)?;
    let tv_initial = tr.tv_lambda;
    let mut k = tr.head;
    while k != NIL {
        tr.schedule(k);
        k = tr.slots[k].next;
    }
    let start = tr.snapshot(0.0)?;
    let mut times: Vec<f64> = snapshot_times.iter().copied().filter(|&t| t >= 0.0 && t < t_end).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.push(t_end);
    let mut pending = times.into_iter().peekable();
    let mut snapshots = Vec::new();
    while let Some(ev) = tr.queue.pop() {
        if ev.time > t_end {
            break;
        }
        if !tr.valid(&ev) {
            continue;
        }
        while let Some(&t) = pending.peek() {
            if t < ev.time {
                snapshots.push(tr.snapshot(t)?);
                pending.next();
            } else {
                break;
            }
        }
        tr.now = ev.time;
        let out = tr.interact(ev.a, ev.b)?;
        let prev = tr.slots[ev.a].prev;
        let next = tr.slots[ev.b].next;
        tr.kill(ev.a);
        tr.kill(ev.b);
        let ids = tr.splice(prev, next, out)?;
        tr.schedule(prev);
        for &id in &ids {
            tr.schedule(id);
        }
        tr.interactions += 1;
        tr.events += 1;
        if tr.events > cfg.max_events {
            return Err(Error::Resource(format!("event count above cap {}", cfg.max_events)));
        }
    }
    for t in pending {
        snapshots.push(tr.snapshot(t)?);
    }
    let end = snapshots.last().expect("final snapshot");
    let flux_in = (sys.flux(&start.far_left) - sys.flux(start.far_right())) * t_end;
    let span = |s: &FrontTrackingState| s.fronts.iter().fold((0.0f64, 0.0f64), |(lo, hi), f| (lo.min(f.x), hi.max(f.x)));
    let (a0, b0) = span(&start);
    let (a1, b1) = span(end);
    let (a, b) = (a0.min(a1) - 1.0, b0.max(b1) + 1.0);
    let mass_defect = (end.mass(&profile.base, a, b) - start.mass(&profile.base, a, b) - flux_in).norm();
    let diagnostics = TrackDiagnostics {
        interactions: tr.interactions,
        events: tr.events,
        max_fronts: tr.max_count,
        error_fronts_created: tr.errors_created,
        shocks_admissible: tr.admissible,
        min_shock_margin: tr.min_margin,
        mass_defect,
        tv_lambda_initial: tv_initial,
        tv_lambda_max: tr.tv_lambda_max,
        tv_slack_exceeded: tr.tv_lambda_max > tv_initial + 10.0 * sigma0 * sigma0,
    };
    let mut all = Vec::with_capacity(snapshots.len() + 1);
    if snapshot_times.contains(&0.0) {
        all.push(start);
        snapshots.retain(|s| s.time != 0.0);
    }
    all.extend(snapshots);
    Ok(Trajectory {
        snapshots: all,
        diagnostics,
    })
}

/// Total variation of a profile or snapshot.
pub fn tv_state(source: TvSource<'_>) -> TvReport {
    match source {
        TvSource::Profile(p) => p.tv(),
        TvSource::Snapshot(s) => s.tv(),
    }
}

pub enum TvSource<'a> {
    Profile(&'a PiecewiseProfile),
    Snapshot(&'a FrontTrackingState),
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    Gnl { sigma0: f64 },
    Ld { delta0: f64 },
}

/// The sequence of tracked solutions at levels `N = 2^d − 1` for one base
/// state and family, cached per `(d, t)`.
pub struct SystemFamily {
    sys: Arc<dyn HyperbolicSystem>,
    base: State,
    field: usize,
    branch: Branch,
    cfg: TrackerConfig,
    cache: Mutex<HashMap<(u32, u64), Arc<FrontTrackingState>>>,
}

#[derive(Debug, Clone)]
pub struct HellyValue {
    pub state: State,
    pub lambda: f64,
    /// Level `N` of the first of the two agreeing evaluations.
    pub level: usize,
    pub levels_used: Vec<usize>,
    pub converged: bool,
}

/// Deepest level available to the contact staircase.
pub const LD_MAX_DEPTH: u32 = 5;

impl SystemFamily {
    pub fn gnl(sys: Arc<dyn HyperbolicSystem>, base: State, field: usize, sigma0: f64, cfg: TrackerConfig) -> Result<Self> {
        require_gnl(sys.as_ref(), &base, field)?;
        if !(sigma0 > 0.0) {
            return usage("sigma0 must be positive");
        }
        Ok(SystemFamily {
            sys,
            base,
            field,
            branch: Branch::Gnl { sigma0 },
            cfg,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn ld(sys: Arc<dyn HyperbolicSystem>, base: State, field: usize, delta0: f64) -> Result<Self> {
        Ok(SystemFamily {
            sys,
            base,
            field,
            branch: Branch::Ld { delta0 },
            cfg: TrackerConfig::new(1e-3),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn system(&self) -> &dyn HyperbolicSystem {
        self.sys.as_ref()
    }

    pub fn base(&self) -> &State {
        &self.base
    }

    pub fn field(&self) -> usize {
        self.field
    }

    pub fn sigma0(&self) -> Option<f64> {
        match self.branch {
            Branch::Gnl { sigma0 } => Some(sigma0),
            Branch::Ld { .. } => None,
        }
    }

    pub fn level_of_depth(depth: u32) -> usize {
        (1usize << depth) - 1
    }

    pub fn max_depth(&self) -> u32 {
        match self.branch {
            Branch::Gnl { .. } => 16,
            Branch::Ld { .. } => LD_MAX_DEPTH,
        }
    }

    pub fn profile(&self, depth: u32) -> Result<PiecewiseProfile> {
        let n = Self::level_of_depth(depth);
        let sys = self.sys.as_ref();
        match self.branch {
            Branch::Gnl { sigma0 } => {
                let part = scaled_partition(sigma0, n)?;
                let seq = build_states(sys, &self.base, self.field, &part, sigma0)?;
                build_profile_gnl(sys, &seq)
            }
            Branch::Ld { delta0 } => build_profile_ld(sys, &self.base, self.field, delta0, n)?.profile(sys),
        }
    }

    /// Tracked solution at level `2^depth − 1` and time `t` (capped at
    /// [`GNL_HORIZON_CAP`] on the nonlinear branch).
    pub fn snapshot(&self, depth: u32, t: f64) -> Result<Arc<FrontTrackingState>> {
        if depth == 0 || depth > self.max_depth() {
            return usage(format!("depth must lie in 1..={}", self.max_depth()));
        }
        if !(t > 0.0 && t <= 1.0) {
            return usage(format!("t = {t} must lie in (0, 1]"));
        }
        let t = match self.branch {
            Branch::Gnl { .. } => t.min(GNL_HORIZON_CAP),
            Branch::Ld { .. } => t,
        };
        let key = (depth, t.to_bits());
        if let Some(s) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let profile = self.profile(depth)?;
        let slack = self.sigma0().unwrap_or(0.0);
        let traj = front_track(self.sys.as_ref(), &profile, t, &self.cfg, &[], slack)?;
        let snap = Arc::new(traj.snapshots.into_iter().last().expect("final snapshot"));
        self.cache.lock().expect("cache lock").insert(key, snap.clone());
        Ok(snap)
    }

    /// Fill the cache for depths `1..=max_depth` at time `t` in parallel.
    pub fn prepare(&self, t: f64, max_depth: u32) -> Result<()> {
        (1..=max_depth)
            .into_par_iter()
            .map(|d| self.snapshot(d, t).map(|_| ()))
            .collect::<Result<Vec<_>>>()?;
        Ok(())
    }

    /// Evaluate at doubling levels until two successive states agree to `tol`.
    pub fn helly_limit_evaluate(&self, x: f64, t: f64, tol: f64, max_depth: u32) -> Result<HellyValue> {
        self.helly_limit_evaluate_from(x, t, tol, 1, max_depth)
    }

    /// As [`Self::helly_limit_evaluate`], accepting agreement only between
    /// depths `>= min_depth`.
    pub fn helly_limit_evaluate_from(&self, x: f64, t: f64, tol: f64, min_depth: u32, max_depth: u32) -> Result<HellyValue> {
        if !(tol > 0.0) {
            return usage("tol must be positive");
        }
        let max_depth = max_depth.min(self.max_depth());
        if max_depth == 0 {
            return usage("max_depth must be >= 1");
        }
        let mut used = Vec::new();
        let mut prev: Option<(usize, State)> = None;
        for d in 1..=max_depth {
            let n = Self::level_of_depth(d);
            let u = self.snapshot(d, t)?.evaluate(x).clone();
            used.push(n);
            if let Some((pn, pu)) = &prev {
                if d > min_depth && (&u - pu).norm() < tol {
                    let lam = lambda(self.sys.as_ref(), &u, self.field)?;
                    return Ok(HellyValue {
                        state: u,
                        lambda: lam,
                        level: *pn,
                        levels_used: used,
                        converged: true,
                    });
                }
            }
            prev = Some((n, u));
        }
        let (n, u) = prev.expect("at least one level");
        let lam = lambda(self.sys.as_ref(), &u, self.field)?;
        Ok(HellyValue {
            state: u,
            lambda: lam,
            level: n,
            levels_used: used,
            converged: false,
        })
    }

    /// `z_j` shifted into the moving frame: `x_j − (1−t0)(x_j − y_j + σ0 2^-j) + λ_i(U0) t0`.
    pub fn z_point(&self, j: u64, t0: f64) -> Result<f64> {
        let sigma0 = match self.branch {
            Branch::Gnl { sigma0 } => sigma0,
            Branch::Ld { .. } => return usage("z_j is defined for the genuinely nonlinear branch"),
        };
        let stair = Staircase::new(sigma0, sigma0, DEFAULT_TRUNCATION);
        Ok(z_point(&stair, j, t0, 1.0)? + lambda(self.sys.as_ref(), &self.base, self.field)? * t0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemClaimConfig {
    pub j: u64,
    pub t0: f64,
    /// Strictly decreasing offsets around `z_j`.
    pub offsets: Vec<f64>,
    pub tol: f64,
    pub stab_tol: f64,
    pub max_depth: u32,
    pub seed: u64,
}

impl SystemClaimConfig {
    /// Offsets `σ0 2^-m`, `m = 4..=12`, levels up to `2^9 − 1`.
    pub fn new(j: u64, t0: f64, sigma0: f64) -> Self {
        SystemClaimConfig {
            j,
            t0,
            offsets: (4..=12).map(|m| sigma0 * 0.5f64.powi(m)).collect(),
            tol: 1e-6,
            stab_tol: 1e-4,
            max_depth: 9,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemGapRow {
    pub offset: f64,
    pub left_x: f64,
    pub right_x: f64,
    pub left_lambda: f64,
    pub right_lambda: f64,
    /// `|λ_i(right) − λ_i(left)|`.
    pub gap: f64,
    pub signed_gap: f64,
    pub left_level: usize,
    pub right_level: usize,
    pub stabilized: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemGapReport {
    pub j: u64,
    pub t0: f64,
    pub sigma0: f64,
    pub z: f64,
    pub threshold: f64,
    pub rows: Vec<SystemGapRow>,
    pub claim_pass: bool,
    pub applicable: bool,
}

impl SystemGapReport {
    pub fn min_stabilized_gap(&self) -> Option<f64> {
        self.rows.iter().filter(|r| r.stabilized).map(|r| r.gap).reduce(f64::min)
    }
}

/// `3 σ0 / 2^(j+3)`.
pub fn system_gap_threshold(sigma0: f64, j: u64) -> f64 {
    3.0 * 0.5f64.powi(j as i32 + 3) * sigma0
}

/// Smallest depth whose partition contains `r_j` and has mesh at most `eps`.
pub fn resolving_depth(sigma0: f64, j: u64, eps: f64) -> u32 {
    let mut d = 1;
    while (SystemFamily::level_of_depth(d) as u64) < j || sigma0 * 0.5f64.powi(d as i32) > eps {
        d += 1;
        if d >= 62 {
            break;
        }
    }
    d
}

/// One-sided limits of `λ_i(U(·, t0))` around `z_j`. The claim passes when
/// every stabilized row clears the threshold and at least one row
/// stabilized.
pub fn claim_gap_system(family: &SystemFamily, cfg: &SystemClaimConfig) -> Result<SystemGapReport> {
    let sigma0 = family
        .sigma0()
        .ok_or_else(|| Error::Usage("the claim concerns the genuinely nonlinear branch".into()))?;
    if cfg.j == 0 {
        return usage("j must be >= 1");
    }
    if !(cfg.t0 > 0.0 && cfg.t0 < 1.0) {
        return usage(format!("t0 = {} must lie in (0, 1)", cfg.t0));
    }
    if cfg.offsets.is_empty() || cfg.offsets.windows(2).any(|w| w[1] >= w[0]) || cfg.offsets[0] <= 0.0 {
        return usage("offsets must be positive and strictly decreasing");
    }
    let z = family.z_point(cfg.j, cfg.t0)?;
    family.prepare(cfg.t0, cfg.max_depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for &eps in &cfg.offsets {
        let left_x = z - eps - rng.gen_range(0.0..1e-12);
        let right_x = z + eps + rng.gen_range(0.0..1e-12);
        let from = resolving_depth(sigma0, cfg.j, eps);
        let l = family.helly_limit_evaluate_from(left_x, cfg.t0, cfg.stab_tol, from, cfg.max_depth)?;
        let r = family.helly_limit_evaluate_from(right_x, cfg.t0, cfg.stab_tol, from, cfg.max_depth)?;
        rows.push(SystemGapRow {
            offset: eps,
            left_x,
            right_x,
            left_lambda: l.lambda,
            right_lambda: r.lambda,
            gap: (r.lambda - l.lambda).abs(),
            signed_gap: r.lambda - l.lambda,
            left_level: l.level,
            right_level: r.level,
            stabilized: l.converged && r.converged,
        });
    }
    let threshold = system_gap_threshold(sigma0, cfg.j);
    let stable: Vec<_> = rows.iter().filter(|r| r.stabilized).collect();
    let claim_pass = !stable.is_empty() && stable.iter().all(|r| r.gap >= threshold - cfg.tol);
    Ok(SystemGapReport {
        j: cfg.j,
        t0: cfg.t0,
        sigma0,
        z,
        threshold,
        rows,
        claim_pass,
        applicable: true,
    })
}

/// Control measurement on constant data: every gap is zero and the claim
/// does not apply.
pub fn claim_gap_system_control<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    state: &State,
    field: usize,
    sigma0: f64,
    cfg: &SystemClaimConfig,
) -> Result<SystemGapReport> {
    let stair = Staircase::new(sigma0, sigma0, DEFAULT_TRUNCATION);
    let z = z_point(&stair, cfg.j, cfg.t0, 1.0)?;
    let lam = lambda(sys, state, field)?;
    let rows = cfg
        .offsets
        .iter()
        .map(|&eps| SystemGapRow {
            offset: eps,
            left_x: z - eps,
            right_x: z + eps,
            left_lambda: lam,
            right_lambda: lam,
            gap: 0.0,
            signed_gap: 0.0,
            left_level: 0,
            right_level: 0,
            stabilized: true,
        })
        .collect();
    Ok(SystemGapReport {
        j: cfg.j,
        t0: cfg.t0,
        sigma0,
        z,
        threshold: system_gap_threshold(sigma0, cfg.j),
        rows,
        claim_pass: false,
        applicable: false,
    })
}
