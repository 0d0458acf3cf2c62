//! Focusing backward construction for a convex scalar law.
//!
//! On each piece `(y_j, y_{j+1})` of the level partition the initial speed is
//! `f'(u0) = (x_{j+1} - y) / T`, so every characteristic of the piece meets at
//! `(x_{j+1}, T)`; the upward speed jumps at the `y_j` open rarefaction fans.
//! At `t = T` the fan from `y_j` covers exactly `[x_j, x_{j+1}]`, giving
//! `u(x, T) = G((x - rho_k(x)) / T)`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, LevelPartition, Staircase};
use crate::error::{usage, Error, Result};
use crate::flux::{ConvexFlux, Flux, FluxConfig};
use crate::quadrature;

/// Initial data of the level-`k` construction, stored as its characteristic
/// speed field.
#[derive(Clone, Debug)]
pub struct CharSpeedProfile {
    flux: ConvexFlux,
    horizon: f64,
    partition: LevelPartition,
}

/// Builds the focusing profile of level `k` for horizon `T`.
pub fn build_initial_data(flux: &ConvexFlux, k: usize, horizon: f64) -> Result<CharSpeedProfile> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return usage(format!("horizon T = {horizon} must be positive"));
    }
    let partition = LevelPartition::new(k, &Staircase::unit());
    CharSpeedProfile::from_partition(flux.clone(), partition, horizon)
}

impl CharSpeedProfile {
    pub fn from_partition(flux: ConvexFlux, partition: LevelPartition, horizon: f64) -> Result<Self> {
        let (x, y) = (partition.x(), partition.y());
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for j in 0..partition.pieces() {
            lo = lo.min((x[j + 1] - y[j + 1]) / horizon).min((x[j] - y[j]) / horizon);
            hi = hi.max((x[j + 1] - y[j]) / horizon);
        }
        let (slo, shi) = flux.speed_range();
        if lo < slo || hi > shi {
            return Err(Error::Domain(format!(
                "flux speed range [{slo}, {shi}] does not contain the needed speeds [{lo}, {hi}]; widen the flux domain"
            )));
        }
        Ok(CharSpeedProfile { flux, horizon, partition })
    }

    pub fn flux(&self) -> &ConvexFlux {
        &self.flux
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn level(&self) -> usize {
        self.partition.level()
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn pieces(&self) -> usize {
        self.partition.pieces()
    }

    /// Piece containing `y` at `t = 0`, if any (`[y_j, y_{j+1})`).
    pub fn piece_of(&self, y: f64) -> Option<usize> {
        let ys = self.partition.y();
        if y < ys[0] || y >= ys[ys.len() - 1] {
            return None;
        }
        Some(ys.partition_point(|&p| p <= y) - 1)
    }

    /// Initial characteristic speed (right-continuous).
    pub fn speed(&self, y: f64) -> f64 {
        match self.piece_of(y) {
            Some(j) => (self.partition.x()[j + 1] - y) / self.horizon,
            None => 0.0,
        }
    }

    /// Initial state `G(speed(y))`.
    pub fn state(&self, y: f64) -> f64 {
        self.flux.g(self.speed(y))
    }

    /// `(speed at y_j^+, speed at y_{j+1}^-)` on piece `j`.
    pub fn piece_speeds(&self, j: usize) -> (f64, f64) {
        let (x, y) = (self.partition.x(), self.partition.y());
        ((x[j + 1] - y[j]) / self.horizon, (x[j + 1] - y[j + 1]) / self.horizon)
    }

    /// Total variation of the initial speed field: in-piece variation plus the
    /// upward jumps at every `y_j`.
    pub fn tv_speed(&self) -> f64 {
        let (x, y) = (self.partition.x(), self.partition.y());
        let mut prev = 0.0;
        let mut tv = 0.0;
        for j in 0..self.pieces() {
            let (a, b) = ((x[j + 1] - y[j]) / self.horizon, (x[j + 1] - y[j + 1]) / self.horizon);
            tv += (a - prev).abs() + (a - b).abs();
            prev = b;
        }
        tv + prev.abs()
    }

    pub fn to_file(&self) -> ProfileFile {
        let (x, y) = (self.partition.x(), self.partition.y());
        ProfileFile {
            flux: FluxConfig::from_flux(self.flux.flux(), Some(self.flux.domain())),
            horizon: self.horizon,
            level: self.level(),
            breakpoints: self.partition.points().iter().map(|d| d.to_string()).collect(),
            images: y.iter().map(|v| format!("{v:.17e}")).collect(),
            speeds: (0..self.pieces())
                .map(|j| format!("{:.17e}", (x[j + 1] - y[j]) / self.horizon))
                .collect(),
        }
    }

    /// Rebuilds a profile from its file form, checking the stored breakpoints.
    pub fn from_file(file: &ProfileFile) -> Result<Self> {
        let flux = file.flux.convex()?;
        let profile = build_initial_data(&flux, file.level, file.horizon)?;
        let stored = file
            .breakpoints
            .iter()
            .map(|s| s.parse::<Dyadic>().map_err(|e| Error::Usage(format!("breakpoints: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if stored.as_slice() != profile.partition.points() {
            return Err(Error::Usage("breakpoints: stored list does not match the level".into()));
        }
        Ok(profile)
    }
}

/// Serialized profile: exact rational breakpoints, decimal images and speeds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileFile {
    pub flux: FluxConfig,
    pub horizon: f64,
    pub level: usize,
    pub breakpoints: Vec<String>,
    pub images: Vec<String>,
    /// speed at the left end of each piece
    pub speeds: Vec<String>,
}

/// Region of the `(x, t)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    ExteriorLeft,
    /// fan centred at `y_j`
    Fan(usize),
    /// image of piece `j`, focusing towards `x_{j+1}`
    Focus(usize),
    ExteriorRight,
}

/// Closed-form entropy solution generated by a [`CharSpeedProfile`] on
/// `(0, T]`.
#[derive(Clone, Debug)]
pub struct ExactScalarSolution {
    profile: CharSpeedProfile,
}

impl ExactScalarSolution {
    pub fn new(profile: CharSpeedProfile) -> Self {
        ExactScalarSolution { profile }
    }

    pub fn profile(&self) -> &CharSpeedProfile {
        &self.profile
    }

    pub fn horizon(&self) -> f64 {
        self.profile.horizon
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.profile.horizon) {
            return usage(format!("t = {t} must lie in (0, {}]", self.profile.horizon));
        }
        Ok(())
    }

    /// Left edge of fan `j` at relative time `s = t/T`.
    fn left_edge(&self, j: usize, s: f64) -> f64 {
        let (x, y) = (self.profile.partition.x(), self.profile.partition.y());
        y[j] * (1.0 - s) + s * x[j]
    }

    fn right_edge(&self, j: usize, s: f64) -> f64 {
        let (x, y) = (self.profile.partition.x(), self.profile.partition.y());
        y[j] * (1.0 - s) + s * x[j + 1]
    }

    pub fn region(&self, x: f64, t: f64) -> Result<Region> {
        self.check_time(t)?;
        Ok(self.region_unchecked(x, t / self.profile.horizon))
    }

    fn region_unchecked(&self, x: f64, s: f64) -> Region {
        let p = self.profile.pieces();
        if x < self.left_edge(0, s) {
            return Region::ExteriorLeft;
        }
        // the left edges are nondecreasing in j; edge p is the right end
        let (mut lo, mut hi) = (0usize, p);
        if x >= self.left_edge(p, s) {
            return Region::ExteriorRight;
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.left_edge(mid, s) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if x <= self.right_edge(lo, s) {
            Region::Fan(lo)
        } else {
            Region::Focus(lo)
        }
    }

    /// Characteristic speed `f'(u(x, t))`.
    pub fn speed_at(&self, x: f64, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.speed_unchecked(x, t))
    }

    fn speed_unchecked(&self, x: f64, t: f64) -> f64 {
        let horizon = self.profile.horizon;
        let s = t / horizon;
        let (xs, ys) = (self.profile.partition.x(), self.profile.partition.y());
        match self.region_unchecked(x, s) {
            Region::ExteriorLeft | Region::ExteriorRight => 0.0,
            Region::Fan(j) => {
                if s == 1.0 {
                    (x - ys[j]) / horizon
                } else {
                    (x - ys[j]) / t
                }
            }
            Region::Focus(j) => {
                let xi = (x - s * xs[j + 1]) / (1.0 - s);
                (xs[j + 1] - xi) / horizon
            }
        }
    }

    /// `u(x, t)`; at `t = T` the breakpoints return their right limit.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.profile.flux.g(self.speed_at(x, t)?))
    }

    /// Sorted region boundaries at time `t`.
    pub fn breakpoints_at(&self, t: f64) -> Vec<f64> {
        let s = t / self.profile.horizon;
        let p = self.profile.pieces();
        let mut out = Vec::with_capacity(2 * p + 1);
        for j in 0..p {
            out.push(self.left_edge(j, s));
            out.push(self.right_edge(j, s));
        }
        out.push(self.left_edge(p, s));
        out
    }

    /// Points at time `t` where the speed equals `c` (one per monotone region
    /// whose speed range contains `c`).
    pub fn speed_crossings(&self, t: f64, c: f64) -> Vec<f64> {
        let horizon = self.profile.horizon;
        let s = t / horizon;
        let (xs, ys) = (self.profile.partition.x(), self.profile.partition.y());
        let mut out = Vec::new();
        for j in 0..self.profile.pieces() {
            let (lo, hi) = ((xs[j] - ys[j]) / horizon, (xs[j + 1] - ys[j]) / horizon);
            if c >= lo && c <= hi {
                out.push(ys[j] + t * c);
            }
            if s < 1.0 {
                let (a, b) = self.profile.piece_speeds(j);
                if c <= a && c >= b {
                    let xi = xs[j + 1] - horizon * c;
                    out.push(xi * (1.0 - s) + s * xs[j + 1]);
                }
            }
        }
        out
    }
}

/// One query of the variational oracle.
#[derive(Clone, Debug, Serialize)]
pub struct MinimizerRecord {
    pub x: f64,
    pub t: f64,
    /// leftmost global minimizer
    pub y: f64,
    pub value: f64,
    /// piece whose closure contains the minimizer; `None` in the exterior
    pub piece: Option<usize>,
    /// two minimizers further apart than `1e-9`
    pub shock: bool,
    pub left_state: f64,
    pub right_state: f64,
}

/// Independent Lax–Oleinik evaluation: minimizes `U0(y) + t f*((x - y)/t)`
/// over the piece endpoints, the per-piece critical points and the exterior
/// critical point, with `U0` the primitive of the initial state.
#[derive(Clone, Debug)]
pub struct LaxOleinikOracle {
    profile: CharSpeedProfile,
    // U0 at every y_j
    cumulative: Vec<f64>,
    exterior_state: f64,
}

impl LaxOleinikOracle {
    pub fn new(profile: &CharSpeedProfile) -> Self {
        let p = profile.pieces();
        let ys = profile.partition.y();
        let mut cumulative = Vec::with_capacity(p + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..p {
            acc += piece_primitive(profile, j, ys[j + 1]);
            cumulative.push(acc);
        }
        LaxOleinikOracle {
            profile: profile.clone(),
            cumulative,
            exterior_state: profile.flux.g(0.0),
        }
    }

    /// `U0(y) = int_0^y u0`.
    pub fn primitive(&self, y: f64) -> f64 {
        let ys = self.profile.partition.y();
        let last = ys.len() - 1;
        if y <= ys[0] {
            return self.exterior_state * (y - ys[0]);
        }
        if y >= ys[last] {
            return self.cumulative[last] + self.exterior_state * (y - ys[last]);
        }
        let j = ys.partition_point(|&p| p <= y) - 1;
        self.cumulative[j] + piece_primitive(&self.profile, j, y)
    }

    fn functional(&self, x: f64, t: f64, y: f64) -> f64 {
        self.primitive(y) + t * self.profile.flux.conjugate((x - y) / t)
    }

    pub fn query(&self, x: f64, t: f64) -> Result<(f64, MinimizerRecord)> {
        let horizon = self.profile.horizon;
        if !(t > 0.0 && t <= horizon) {
            return usage(format!("t = {t} must lie in (0, {horizon}]"));
        }
        let (xs, ys) = (self.profile.partition.x(), self.profile.partition.y());
        let p = self.profile.pieces();
        let mut cands: Vec<(f64, Option<usize>)> = Vec::with_capacity(2 * p + 2);
        for (j, &y) in ys.iter().enumerate() {
            cands.push((y, Some(j.min(p - 1))));
        }
        if t < horizon {
            let s = t / horizon;
            for j in 0..p {
                let xi = (x - s * xs[j + 1]) / (1.0 - s);
                if xi > ys[j] && xi < ys[j + 1] {
                    cands.push((xi, Some(j)));
                }
            }
        }
        if x < ys[0] || x > ys[p] {
            cands.push((x, None));
        }
        let scored: Vec<(f64, f64, Option<usize>)> =
            cands.into_iter().map(|(y, j)| (self.functional(x, t, y), y, j)).collect();
        let best = scored.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let tie = 1e-12 * (1.0 + best.abs());
        let mut minimizers: Vec<(f64, Option<usize>)> = scored
            .iter()
            .filter(|c| c.0 <= best + tie)
            .filter(|c| self.is_stationary(x, t, c.1))
            .map(|c| (c.1, c.2))
            .collect();
        if minimizers.is_empty() {
            // numerical near-tie without a certified KKT point: plain argmin
            let c = scored.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
            minimizers.push((c.1, c.2));
        }
        minimizers.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (y_left, piece) = minimizers[0];
        let y_right = minimizers[minimizers.len() - 1].0;
        let flux = &self.profile.flux;
        let left_state = flux.g((x - y_left) / t);
        let right_state = flux.g((x - y_right) / t);
        let record = MinimizerRecord {
            x,
            t,
            y: y_left,
            value: best,
            piece,
            shock: y_right - y_left > 1e-9,
            left_state,
            right_state,
        };
        Ok((left_state, record))
    }

    // subgradient condition u0(y-) <= G((x - y)/t) <= u0(y+), on speeds
    fn is_stationary(&self, x: f64, t: f64, y: f64) -> bool {
        let c = (x - y) / t;
        let right = self.profile.speed(y);
        let left = self.left_speed(y);
        let slack = 1e-9 * (1.0 + c.abs());
        left.min(right) - slack <= c && c <= left.max(right) + slack
    }

    fn left_speed(&self, y: f64) -> f64 {
        let ys = self.profile.partition.y();
        let last = ys.len() - 1;
        if y <= ys[0] || y > ys[last] {
            return 0.0;
        }
        let j = ys.partition_point(|&p| p < y) - 1;
        (self.profile.partition.x()[j + 1] - y) / self.profile.horizon
    }
}

fn piece_primitive(profile: &CharSpeedProfile, j: usize, upper: f64) -> f64 {
    let ys = profile.partition.y();
    let xr = profile.partition.x()[j + 1];
    let horizon = profile.horizon;
    let lo = ys[j];
    if upper <= lo {
        return 0.0;
    }
    if let Flux::Burgers = profile.flux.flux() {
        return (xr * (upper - lo) - 0.5 * (upper * upper - lo * lo)) / horizon;
    }
    let flux = &profile.flux;
    let mut f = |y: f64| flux.g((xr - y) / horizon);
    quadrature::integrate_checked(&mut f, lo, upper, 1e-10 * (upper - lo).max(f64::MIN_POSITIVE))
}

/// Convenience wrapper around [`LaxOleinikOracle`] for a single query.
pub fn lax_oleinik_oracle(profile: &CharSpeedProfile, x: f64, t: f64) -> Result<(f64, MinimizerRecord)> {
    LaxOleinikOracle::new(profile).query(x, t)
}

/// Finest dyadic depth kept by [`LimitFamily`]; depth `n` is the full level
/// `2^n - 1`.
pub const MAX_DEPTH: u32 = 20;

/// Solutions at the full dyadic levels `2^n - 1`, built on demand and shared.
#[derive(Debug)]
pub struct LimitFamily {
    flux: ConvexFlux,
    horizon: f64,
    cache: Vec<OnceLock<Arc<ExactScalarSolution>>>,
}

/// Result of [`LimitFamily::limit_evaluate`].
#[derive(Clone, Debug, Serialize)]
pub struct LimitValue {
    pub state: f64,
    pub speed: f64,
    /// coarsest level whose value already agrees with the next one
    pub level: usize,
    pub levels_used: usize,
    pub converged: bool,
}

impl LimitFamily {
    pub fn new(flux: ConvexFlux, horizon: f64) -> Result<Self> {
        // the finest level needs the widest speed range; check it up front
        build_initial_data(&flux, 1, horizon)?;
        let (slo, shi) = flux.speed_range();
        if slo > -1.0 / horizon || shi < 1.0 / horizon {
            return Err(Error::Domain(format!(
                "flux speed range [{slo}, {shi}] must contain [-1/T, 1/T] for the limit family"
            )));
        }
        Ok(LimitFamily {
            flux,
            horizon,
            cache: (0..=MAX_DEPTH).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn flux(&self) -> &ConvexFlux {
        &self.flux
    }

    pub fn level_of_depth(depth: u32) -> usize {
        (1usize << depth) - 1
    }

    /// Exact solution at depth `n` (level `2^n - 1`).
    pub fn solution(&self, depth: u32) -> Arc<ExactScalarSolution> {
        assert!(depth >= 1 && depth <= MAX_DEPTH);
        self.cache[depth as usize]
            .get_or_init(|| {
                let p = build_initial_data(&self.flux, Self::level_of_depth(depth), self.horizon)
                    .expect("speed range checked at construction");
                Arc::new(ExactScalarSolution::new(p))
            })
            .clone()
    }

    /// Evaluates the doubling sequence until two successive states differ by
    /// less than `tol`. Non-stabilization is reported, not raised.
    pub fn limit_evaluate(&self, x: f64, t: f64, tol: f64, max_level: usize) -> Result<LimitValue> {
        if !(t > 0.0 && t <= self.horizon) {
            return usage(format!("t = {t} must lie in (0, {}]", self.horizon));
        }
        if !(tol > 0.0) {
            return usage("tolerance must be positive");
        }
        let max_depth = (usize::BITS - (max_level.max(1) + 1).leading_zeros() - 1).clamp(1, MAX_DEPTH);
        let mut prev: Option<(usize, f64)> = None;
        let mut used = 0;
        for depth in 1..=max_depth {
            let sol = self.solution(depth);
            let speed = sol.speed_unchecked(x, t);
            let state = self.flux.g(speed);
            used += 1;
            if let Some((lvl, last)) = prev {
                if (state - last).abs() < tol {
                    return Ok(LimitValue { state, speed, level: lvl, levels_used: used, converged: true });
                }
            }
            prev = Some((Self::level_of_depth(depth), state));
        }
        let (lvl, state) = prev.expect("at least one level");
        let speed = self.flux.df(state);
        Ok(LimitValue { state, speed, level: lvl, levels_used: used, converged: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::z_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn burgers(k: usize) -> CharSpeedProfile {
        build_initial_data(&ConvexFlux::burgers(), k, 1.0).unwrap()
    }

    #[test]
    fn level_one_audit() {
        let p = burgers(1);
        assert_eq!(p.pieces(), 2);
        // first piece focuses to the single interior breakpoint 1/2
        assert_eq!(p.speed(0.0), 0.5);
        assert_eq!(p.speed(-0.1), 0.0);
        assert_eq!(p.speed(1.5), 0.0);
        let (x, y) = (p.partition().x(), p.partition().y());
        assert_eq!(p.piece_speeds(1), ((x[2] - y[1]), 0.0));
    }

    #[test]
    fn tv_of_speed_is_two_over_t() {
        for &t in &[0.5, 1.0, 2.0] {
            let p = build_initial_data(&ConvexFlux::burgers(), 32, t).unwrap();
            assert!((p.tv_speed() - 2.0 / t).abs() < 1e-12);
        }
    }

    #[test]
    fn narrow_domain_reports_needed_range() {
        let f = ConvexFlux::new(Flux::Burgers, -0.1, 0.1).unwrap();
        match build_initial_data(&f, 4, 1.0) {
            Err(Error::Domain(msg)) => assert!(msg.contains("needed speeds")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fan_and_exterior_values() {
        let sol = ExactScalarSolution::new(burgers(8));
        let p = sol.profile().clone();
        let (x, y) = (p.partition().x(), p.partition().y());
        let j = 3;
        let (lo, hi) = ((x[j] - y[j]), (x[j + 1] - y[j]));
        for i in 1..10 {
            let s = lo + (hi - lo) * i as f64 / 10.0;
            let u = sol.evaluate(y[j] + 0.3 * s, 0.3).unwrap();
            assert!((u - s).abs() < 1e-14);
        }
        assert_eq!(sol.evaluate(-3.0, 0.7).unwrap(), 0.0);
        assert!(sol.evaluate(0.5, 0.0).is_err());
    }

    #[test]
    fn terminal_profile_matches_staircase() {
        let sol = ExactScalarSolution::new(burgers(32));
        let part = sol.profile().partition().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-0.2..1.2);
            let want = x - part.rho_level(x);
            assert!((sol.evaluate(x, 1.0).unwrap() - want).abs() <= 1e-12);
        }
        // breakpoints return the right limit; the left side jumps down to it
        let xj = part.x()[5];
        let right = sol.evaluate(xj, 1.0).unwrap();
        let left = sol.evaluate(xj - 1e-12, 1.0).unwrap();
        assert!(left > right);
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let p = burgers(8);
        let sol = ExactScalarSolution::new(p.clone());
        let oracle = LaxOleinikOracle::new(&p);
        let (u, rec) = oracle.query(0.37, 0.6).unwrap();
        assert!((u - sol.evaluate(0.37, 0.6).unwrap()).abs() < 1e-8);
        assert!(!rec.shock);
        let (u, _) = oracle.query(0.6, 0.5).unwrap();
        assert!((u - sol.evaluate(0.6, 0.5).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn oracle_brute_force_grid() {
        // minimize the functional on a dense grid independently of the candidate list
        let p = burgers(8);
        let oracle = LaxOleinikOracle::new(&p);
        for &(x, t) in &[(0.37, 0.6), (0.81, 0.25), (0.05, 0.9)] {
            let n = 1_000_000;
            let (mut best, mut arg) = (f64::INFINITY, 0.0);
            for i in 0..=n {
                let y = -0.5 + 2.0 * i as f64 / n as f64;
                let v = oracle.functional(x, t, y);
                if v < best {
                    best = v;
                    arg = y;
                }
            }
            let (_, rec) = oracle.query(x, t).unwrap();
            assert!((rec.y - arg).abs() < 1e-5, "({x},{t}): {} vs {arg}", rec.y);
            assert!(rec.value <= best + 1e-12);
        }
    }

    #[test]
    fn oracle_terminal_minimizer_is_staircase() {
        let p = burgers(16);
        let oracle = LaxOleinikOracle::new(&p);
        for &x in &[0.1, 0.33, 0.77, 0.9] {
            let (_, rec) = oracle.query(x, 1.0).unwrap();
            assert!((rec.y - p.partition().rho_level(x)).abs() < 1e-12);
        }
        let xj = p.partition().x()[4];
        let (_, rec) = oracle.query(xj, 1.0).unwrap();
        assert!(rec.shock);
        assert!(rec.left_state > rec.right_state);
    }

    #[test]
    fn oracle_constant_data() {
        // a point far outside the construction sees the zero exterior state
        let p = burgers(4);
        let (u, rec) = lax_oleinik_oracle(&p, -2.0, 0.5).unwrap();
        assert_eq!(u, 0.0);
        assert_eq!(rec.y, -2.0);
    }

    #[test]
    fn oracle_general_flux() {
        let f = ConvexFlux::new(Flux::Power { p: 4.0 }, -3.0, 3.0).unwrap();
        let p = build_initial_data(&f, 8, 1.0).unwrap();
        let sol = ExactScalarSolution::new(p.clone());
        let oracle = LaxOleinikOracle::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (x, t) = (rng.gen_range(-0.1..1.1), rng.gen_range(0.05..1.0));
            let (u, _) = oracle.query(x, t).unwrap();
            assert!((u - sol.evaluate(x, t).unwrap()).abs() < 1e-8, "({x},{t})");
        }
    }

    #[test]
    fn minimizers_monotone_in_x() {
        let p = burgers(16);
        let oracle = LaxOleinikOracle::new(&p);
        for &t in &[0.2, 0.7, 1.0] {
            let mut last = f64::NEG_INFINITY;
            for i in 0..500 {
                let x = -0.1 + 1.2 * i as f64 / 499.0;
                let (_, rec) = oracle.query(x, t).unwrap();
                assert!(rec.y >= last);
                last = rec.y;
            }
        }
    }

    #[test]
    fn refinement_keeps_exterior_and_fan_structure() {
        let a = ExactScalarSolution::new(burgers(3));
        let b = ExactScalarSolution::new(burgers(7));
        // left of the first fan both solutions are the exterior state
        for &x in &[-1.0, -0.01] {
            assert_eq!(a.evaluate(x, 0.5).unwrap(), b.evaluate(x, 0.5).unwrap());
        }
    }

    #[test]
    fn crossings_hit_requested_speed() {
        let sol = ExactScalarSolution::new(burgers(8));
        for &c in &[0.05, 0.2, 0.31] {
            for x in sol.speed_crossings(0.6, c) {
                assert!((sol.speed_at(x, 0.6).unwrap() - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn limit_exterior_and_terminal() {
        let fam = LimitFamily::new(ConvexFlux::burgers(), 1.0).unwrap();
        let v = fam.limit_evaluate(-1.0, 0.5, 1e-9, 1 << 10).unwrap();
        assert!(v.converged);
        assert_eq!(v.level, 1);
        assert_eq!(v.state, 0.0);
        let x = std::f64::consts::FRAC_1_SQRT_2;
        let v = fam.limit_evaluate(x, 1.0, 1e-5, 1 << 18).unwrap();
        let exact = x - Staircase::unit().eval(x);
        // successive levels can agree early; the certified error is the level gap
        let bound = 1e-5 + crate::dyadic::level_gap_bound(v.level);
        assert!((v.state - exact).abs() <= bound, "{} vs {exact}", v.state);
    }

    #[test]
    fn limit_is_defined_near_z_points() {
        let fam = LimitFamily::new(ConvexFlux::burgers(), 1.0).unwrap();
        let z = z_point(&Staircase::unit(), 1, 0.5, 1.0).unwrap();
        let v = fam.limit_evaluate(z, 0.5, 1e-4, 1 << 16).unwrap();
        assert!(v.state.is_finite());
    }

    #[test]
    fn profile_file_roundtrip() {
        let p = burgers(5);
        let file = p.to_file();
        let text = serde_json::to_string(&file).unwrap();
        let back: ProfileFile = serde_json::from_str(&text).unwrap();
        let q = CharSpeedProfile::from_file(&back).unwrap();
        assert_eq!(q.partition().y(), p.partition().y());
        let mut bad = back.clone();
        bad.breakpoints[1] = "5/8".into();
        assert!(CharSpeedProfile::from_file(&bad).is_err());
    }
}
