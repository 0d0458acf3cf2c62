//! Dyadic rationals, the pure-jump staircase built on them, and the level
//! partitions used by the scalar and system constructions.
//!
//! The enumeration is level-major: level `n` lists the odd numerators
//! `q / 2^n` in increasing order, so `r_1 = 1/2, r_2 = 1/4, r_3 = 3/4,
//! r_4 = 1/8, ...`. Breakpoints are kept as exact rationals; floating point
//! only enters when a staircase value or a scaled position is requested.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Largest enumeration index whose weight `2^-k` is still a normal `f64`.
const MAX_TRUNCATION: usize = 1022;

/// Default truncation of the staircase series; the tail `2^-64` is below the
/// resolution of any value in `[0, 1]`.
pub const DEFAULT_TRUNCATION: usize = 64;

/// Exact dyadic rational `num / 2^exp`, stored in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    num: u64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: u64, exp: u32) -> Self {
        assert!(exp <= 63, "dyadic exponent {exp} too large");
        if num == 0 {
            return Self::ZERO;
        }
        let shift = num.trailing_zeros().min(exp);
        Dyadic {
            num: num >> shift,
            exp: exp - shift,
        }
    }

    /// The `k`-th element of the level-major enumeration (1-based).
    pub fn nth(k: u64) -> Self {
        assert!(k >= 1 && k < (1 << 62), "enumeration index out of range");
        let level = 64 - k.leading_zeros();
        let pos = k - (1u64 << (level - 1));
        Dyadic {
            num: 2 * pos + 1,
            exp: level,
        }
    }

    /// Inverse of [`Dyadic::nth`] for dyadics strictly inside `(0, 1)`.
    pub fn index(&self) -> Option<u64> {
        if self.exp == 0 || self.num == 0 || self.num >= (1 << self.exp) {
            return None;
        }
        Some((1u64 << (self.exp - 1)) + (self.num - 1) / 2)
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        1u64 << self.exp
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.denominator() as f64
    }

    fn scaled(&self) -> u128 {
        (self.num as u128) << (64 - self.exp)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.scaled().cmp(&other.scaled())
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.denominator())
    }
}

impl std::str::FromStr for Dyadic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let num: u64 = n.trim().parse().map_err(|e| format!("{s}: {e}"))?;
        let den: u64 = d.trim().parse().map_err(|e| format!("{s}: {e}"))?;
        if den == 0 || !den.is_power_of_two() {
            return Err(format!("{s}: denominator is not a power of two"));
        }
        Ok(Dyadic::new(num, den.trailing_zeros()))
    }
}

/// First `k` dyadics of the enumeration, `r_1 ..= r_k`.
pub fn enumerate(k: usize) -> Vec<Dyadic> {
    (1..=k as u64).map(Dyadic::nth).collect()
}

/// Increasing staircase with jump `scale * 2^-k` at `width * r_k`.
///
/// Left-continuous: the value at `x` sums the jumps at points strictly below
/// `x`. Identically `0` for `x <= 0` and `scale` for `x > width`.
#[derive(Clone, Debug)]
pub struct Staircase {
    scale: f64,
    width: f64,
    truncation: usize,
    // (r_k, 2^-k) for k <= truncation
    terms: Vec<(f64, f64)>,
}

impl Staircase {
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, DEFAULT_TRUNCATION)
    }

    /// Staircase of height `scale` on `[0, width]`, series truncated after
    /// `truncation` terms.
    pub fn new(scale: f64, width: f64, truncation: usize) -> Self {
        assert!(scale > 0.0 && width > 0.0, "staircase needs positive scale and width");
        let truncation = truncation.clamp(1, MAX_TRUNCATION);
        let terms = (1..=truncation as u64)
            .map(|k| (Dyadic::nth(k).to_f64(), 0.5f64.powi(k as i32)))
            .collect();
        Staircase {
            scale,
            width,
            truncation,
            terms,
        }
    }

    /// Same geometry with a different series truncation.
    pub fn with_truncation(&self, truncation: usize) -> Self {
        Self::new(self.scale, self.width, truncation)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Certified bound on `|eval(x) - staircase(x)|`.
    pub fn error_bound(&self) -> f64 {
        self.scale * 0.5f64.powi(self.truncation as i32)
    }

    /// Left-continuous value.
    pub fn eval(&self, x: f64) -> f64 {
        let s = x / self.width;
        if s <= 0.0 {
            return 0.0;
        }
        if s > 1.0 {
            return self.scale;
        }
        self.scale * self.terms.iter().filter(|(r, _)| *r < s).map(|(_, w)| w).sum::<f64>()
    }

    /// Right limit `lim_{h -> 0+} eval(x + h)`.
    pub fn eval_right(&self, x: f64) -> f64 {
        let s = x / self.width;
        if s < 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return self.scale;
        }
        self.scale * self.terms.iter().filter(|(r, _)| *r <= s).map(|(_, w)| w).sum::<f64>()
    }

    /// Right limit at an exact dyadic position `width * d`.
    pub fn eval_right_at(&self, d: Dyadic) -> f64 {
        if d >= Dyadic::ONE {
            return self.scale;
        }
        if d == Dyadic::ZERO {
            return 0.0;
        }
        // comparisons in exact arithmetic; the enumerated values are exact in f64
        self.scale
            * (1..=self.truncation as u64)
                .filter(|&k| Dyadic::nth(k) <= d)
                .map(|k| 0.5f64.powi(k as i32))
                .sum::<f64>()
    }

    /// Jump `scale * 2^-k` located at `width * r_k`.
    pub fn jump(&self, k: u64) -> (f64, f64) {
        (self.width * Dyadic::nth(k).to_f64(), self.scale * 0.5f64.powi(k as i32))
    }
}

/// Sorted breakpoints `0 = x_1 < ... < 1` of the dyadics through a level,
/// with their staircase images.
///
/// `y_j` is the right limit of the staircase at `x_j`, so that the
/// piecewise-constant approximation `rho_level` is right-continuous and
/// converges uniformly off the breakpoints.
#[derive(Clone, Debug)]
pub struct LevelPartition {
    level: usize,
    points: Vec<Dyadic>,
    x: Vec<f64>,
    y: Vec<f64>,
    scale: f64,
    width: f64,
}

impl LevelPartition {
    /// Breakpoints `{0, r_1, .., r_level, 1}`; `level = 0` gives `{0, 1}`.
    pub fn new(level: usize, stair: &Staircase) -> Self {
        let mut points = enumerate(level);
        points.push(Dyadic::ZERO);
        points.push(Dyadic::ONE);
        points.sort_unstable();
        let x = points.iter().map(|d| stair.width * d.to_f64()).collect();
        let y = points.iter().map(|&d| stair.eval_right_at(d)).collect();
        LevelPartition {
            level,
            points,
            x,
            y,
            scale: stair.scale,
            width: stair.width,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Number of intervals `[x_j, x_{j+1}]`.
    pub fn pieces(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Dyadic] {
        &self.points
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `sigma_j = y_{j+1} - y_j` (0-based `j`).
    pub fn sigma(&self, j: usize) -> f64 {
        self.y[j + 1] - self.y[j]
    }

    /// `delta_j = x_{j+1} - x_j` (0-based `j`).
    pub fn delta(&self, j: usize) -> f64 {
        self.x[j + 1] - self.x[j]
    }

    pub fn max_gap(&self) -> f64 {
        (0..self.pieces()).map(|j| self.delta(j)).fold(0.0, f64::max)
    }

    /// Position of the breakpoint carrying exact dyadic `d`, if present.
    pub fn position_of(&self, d: Dyadic) -> Option<usize> {
        self.points.binary_search(&d).ok()
    }

    /// Piecewise-constant approximation: `y_j` on `[x_j, x_{j+1})`, the
    /// identity outside `[0, width]`.
    pub fn rho_level(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.width {
            return x;
        }
        if x == self.width {
            return self.scale;
        }
        let j = self.x.partition_point(|&p| p <= x) - 1;
        self.y[j]
    }
}

/// Bound `2^-floor(log2 k)` on the breakpoint spacing at level `k >= 1`.
pub fn level_gap_bound(k: usize) -> f64 {
    assert!(k >= 1);
    let n = usize::BITS - 1 - k.leading_zeros();
    0.5f64.powi(n as i32)
}

/// Point at time `t0` on the segment from `(y_j - scale 2^-j, 0)` to
/// `(x_j, horizon)`, with `x_j = width * r_j` and `y_j` the left-continuous
/// staircase value there.
pub fn z_point(stair: &Staircase, j: u64, t0: f64, horizon: f64) -> Result<f64> {
    if j == 0 {
        return usage("z_point index j must be >= 1");
    }
    if !(t0 > 0.0 && t0 < horizon) {
        return usage(format!("t0 = {t0} must lie in (0, {horizon})"));
    }
    let x = stair.width * Dyadic::nth(j).to_f64();
    let y = stair.eval(x);
    let jump = stair.scale * 0.5f64.powi(j as i32);
    Ok(x - (horizon - t0) / horizon * (x - y + jump))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent truncated-series value of the left-continuous staircase at
    /// 1/2, summed over the first 60 enumeration indices.
    fn rho_half_oracle() -> f64 {
        let mut s = 0.0;
        for k in 1..=60u64 {
            let level = 64 - k.leading_zeros();
            let pos = k - (1 << (level - 1));
            let r = (2 * pos + 1) as f64 / (1u64 << level) as f64;
            if r < 0.5 {
                s += 0.5f64.powi(k as i32);
            }
        }
        s
    }

    // frozen from rho_half_oracle(): sum of 2^-k over r_k < 1/2, k <= 60
    const RHO_HALF: f64 = 0.35110461758448963;

    #[test]
    fn golden_rho_half() {
        assert_eq!(rho_half_oracle(), RHO_HALF);
        let st = Staircase::new(1.0, 1.0, 60);
        assert!((st.eval(0.5) - RHO_HALF).abs() <= st.error_bound());
    }

    #[test]
    fn enumeration_order() {
        let r = enumerate(3);
        assert_eq!(r, vec![Dyadic::new(1, 1), Dyadic::new(1, 2), Dyadic::new(3, 2)]);
        assert_eq!(enumerate(7)[6], Dyadic::new(7, 3));
        assert_eq!(enumerate(1), vec![Dyadic::new(1, 1)]);
        for k in 1..2000u64 {
            assert_eq!(Dyadic::nth(k).index(), Some(k));
        }
    }

    #[test]
    fn boundary_clauses() {
        let st = Staircase::unit();
        assert_eq!(st.eval(0.0), 0.0);
        assert_eq!(st.eval(-3.0), 0.0);
        assert_eq!(st.eval(2.0), 1.0);
        assert_eq!(st.eval_right(1.0), 1.0);
    }

    #[test]
    fn jump_audit() {
        let st = Staircase::new(1.0, 1.0, 60);
        let eps = 2f64.powi(-40);
        for k in 1..=12u64 {
            let (x, w) = st.jump(k);
            let d = st.eval(x + eps) - st.eval(x);
            // the only extra contribution comes from dyadics in (x, x+eps],
            // all of index > 2^39
            assert!((d - w).abs() < 1e-15, "k={k}: {d} vs {w}");
        }
    }

    #[test]
    fn level_partition_basics() {
        let st = Staircase::unit();
        let p = LevelPartition::new(1, &st);
        assert_eq!(p.x(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.y()[0], 0.0);
        assert_eq!(p.y()[2], 1.0);
        // right limit at 1/2 carries the jump 1/2
        assert!((p.y()[1] - (RHO_HALF + 0.5)).abs() < 1e-15);
        assert_eq!(p.rho_level(0.7), p.y()[1]);
        assert_eq!(p.rho_level(-3.0), -3.0);
        let total: f64 = (0..p.pieces()).map(|j| p.delta(j)).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn level_gap_and_uniform_rate() {
        let st = Staircase::unit();
        for k in 1..=256 {
            let p = LevelPartition::new(k, &st);
            assert!(p.max_gap() <= level_gap_bound(k));
            // compare against the right-continuous staircase off and on a fine grid
            let bound = level_gap_bound(k);
            let mut worst: f64 = 0.0;
            for i in 0..=4000 {
                let x = i as f64 / 4000.0 + 1e-9;
                if x > 1.0 {
                    continue;
                }
                worst = worst.max((st.eval_right(x) - p.rho_level(x)).abs());
            }
            assert!(worst <= bound, "k={k}: {worst} > {bound}");
        }
        // explicit case from the construction notes: k = 4, bound 1/4
        assert_eq!(level_gap_bound(4), 0.25);
    }

    #[test]
    fn refinement_consistency() {
        let st = Staircase::unit();
        let coarse = LevelPartition::new(13, &st);
        let fine = LevelPartition::new(200, &st);
        for (i, d) in coarse.points().iter().enumerate() {
            let j = fine.position_of(*d).expect("coarse point missing in refinement");
            assert_eq!(coarse.y()[i], fine.y()[j]);
        }
    }

    #[test]
    fn z_point_cases() {
        let st = Staircase::unit();
        let z = z_point(&st, 1, 0.5, 1.0).unwrap();
        assert!((z - st.eval(0.5) / 2.0).abs() < 1e-15);
        let near_t = z_point(&st, 3, 1.0 - 1e-12, 1.0).unwrap();
        assert!((near_t - 0.75).abs() < 1e-11);
        let near_0 = z_point(&st, 3, 1e-12, 1.0).unwrap();
        assert!((near_0 - (st.eval(0.75) - 0.125)).abs() < 1e-11);
        assert!(z_point(&st, 2, 1.0, 1.0).is_err());
        assert!(z_point(&st, 2, 0.0, 1.0).is_err());
        for j in 1..40 {
            let z = z_point(&st, j, 0.5, 1.0).unwrap();
            assert!(z > 0.0 && z < 1.0, "z_{j} = {z}");
        }
    }

    #[test]
    fn parse_display_roundtrip() {
        let d: Dyadic = "6/16".parse().unwrap();
        assert_eq!(d, Dyadic::new(3, 3));
        assert_eq!(d.to_string(), "3/8");
        assert!("1/3".parse::<Dyadic>().is_err());
    }
}
