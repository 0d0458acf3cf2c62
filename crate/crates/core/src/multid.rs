//! Several space dimensions: pick a convex, concave or linear working interval
//! for the first flux component and extend one-dimensional solutions
//! constantly in the transverse directions.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Staircase;
use crate::error::{usage, Error, Result};
use crate::flux::{ConvexFlux, Flux, FluxFamily};
use crate::quadrature;
use crate::verify::{bump, bump_prime, SpaceTimeField, QuadSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Convex,
    /// concave; handled through `u -> -u`
    Concave,
    Linear,
}

/// Sampling certificate for one flux component on a state window.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentAnalysis {
    pub component: usize,
    pub classification: Classification,
    pub interval: (f64, f64),
    /// `min f''` (convex), `min -f''` (concave) or `max |f''|` (linear) over
    /// the grid points of the interval
    pub certificate: f64,
    pub floor: f64,
    pub grid: usize,
}

/// Smallest grid accepted by [`analyze_component`].
pub const MIN_GRID: usize = 1 << 10;

/// Widest run of consecutive grid points satisfying `pred`, as index range.
fn widest_run(values: &[f64], pred: impl Fn(f64) -> bool) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &v) in values.iter().chain(std::iter::once(&f64::NAN)).enumerate() {
        if pred(v) {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            let e = i - 1;
            if e > s && best.map_or(true, |(a, b)| e - s > b - a) {
                best = Some((s, e));
            }
        }
    }
    best
}

pub fn analyze_component(
    family: &FluxFamily,
    component: usize,
    window: (f64, f64),
    grid: usize,
    floor: f64,
) -> Result<ComponentAnalysis> {
    if component >= family.dimension() {
        return usage(format!("component {component} out of range for dimension {}", family.dimension()));
    }
    if grid < MIN_GRID {
        return usage(format!("grid must have at least {MIN_GRID} points"));
    }
    if !(floor > 0.0) || !(window.0 < window.1) {
        return usage("need a positive floor and a proper window");
    }
    let f = family.component(component);
    let h = (window.1 - window.0) / (grid - 1) as f64;
    let u = |i: usize| window.0 + h * i as f64;
    let second: Vec<f64> = (0..grid).map(|i| f.d2f(u(i))).collect();

    let convex = widest_run(&second, |v| v >= floor);
    let concave = widest_run(&second, |v| v <= -floor);
    let pick = match (convex, concave) {
        (Some(a), Some(b)) if b.1 - b.0 > a.1 - a.0 => Some((b, Classification::Concave)),
        (Some(a), _) => Some((a, Classification::Convex)),
        (None, Some(b)) => Some((b, Classification::Concave)),
        (None, None) => None,
    };
    let (run, class) = match pick {
        Some(p) => p,
        None => match widest_run(&second, |v| v.abs() <= floor / 100.0) {
            Some(r) => (r, Classification::Linear),
            None => {
                return Err(Error::Resolution(format!(
                    "no certified convex, concave or linear interval on [{}, {}] at {grid} points; try a finer grid",
                    window.0, window.1
                )))
            }
        },
    };
    let vals = &second[run.0..=run.1];
    let certificate = match class {
        Classification::Convex => vals.iter().cloned().fold(f64::INFINITY, f64::min),
        Classification::Concave => vals.iter().map(|v| -v).fold(f64::INFINITY, f64::min),
        Classification::Linear => vals.iter().map(|v| v.abs()).fold(0.0, f64::max),
    };
    Ok(ComponentAnalysis {
        component,
        classification: class,
        interval: (u(run.0), u(run.1)),
        certificate,
        floor,
        grid,
    })
}

impl ComponentAnalysis {
    /// Convex flux to run the scalar construction with. A concave component
    /// `g` becomes `w -> -g(-w)` on the mirrored interval and solutions map
    /// back through `u = -w`.
    pub fn working_flux(&self, family: &FluxFamily) -> Result<ConvexFlux> {
        let f = family.component(self.component).clone();
        let (a, b) = self.interval;
        match self.classification {
            Classification::Convex => ConvexFlux::new(f, a, b),
            Classification::Concave => ConvexFlux::new(Flux::Reflected(Box::new(f)), -b, -a),
            Classification::Linear => Err(Error::Domain("linear interval: use the transport branch".into())),
        }
    }

    /// Slope of the component on a linear interval (central value).
    pub fn transport_speed(&self, family: &FluxFamily) -> f64 {
        let (a, b) = self.interval;
        family.component(self.component).df(0.5 * (a + b))
    }
}

/// `u(x, t) = v(x_1, t)` in `d` space dimensions.
#[derive(Clone, Debug)]
pub struct TensorSolution<F> {
    inner: F,
    dimension: usize,
    negate: bool,
}

pub fn tensor_solution<F: SpaceTimeField>(inner: F, dimension: usize) -> Result<TensorSolution<F>> {
    if dimension == 0 {
        return usage("dimension must be at least 1");
    }
    Ok(TensorSolution { inner, dimension, negate: false })
}

impl<F: SpaceTimeField> TensorSolution<F> {
    /// Wraps a solution of the reflected problem, returning `-w`.
    pub fn reflected(inner: F, dimension: usize) -> Result<Self> {
        let mut s = tensor_solution(inner, dimension)?;
        s.negate = true;
        Ok(s)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn evaluate(&self, x: &[f64], t: f64) -> Result<f64> {
        if x.len() != self.dimension {
            return usage(format!("point has {} coordinates, expected {}", x.len(), self.dimension));
        }
        Ok(self.line_value(x[0], t))
    }

    fn line_value(&self, x1: f64, t: f64) -> f64 {
        let v = self.inner.state(x1, t);
        if self.negate {
            -v
        } else {
            v
        }
    }

    fn line_breaks(&self, t: f64) -> Vec<f64> {
        self.inner.breaks(t, None)
    }
}

/// Product bump in `(x_1, x_2, t)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bump2 {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
    pub rt: f64,
}

impl Bump2 {
    fn parts(&self, x1: f64, x2: f64, t: f64) -> [f64; 6] {
        let (s1, s2, st) = ((x1 - self.x1) / self.r1, (x2 - self.x2) / self.r2, (t - self.t) / self.rt);
        [bump(s1), bump(s2), bump(st), bump_prime(s1) / self.r1, bump_prime(s2) / self.r2, bump_prime(st) / self.rt]
    }

    /// `int b(x_2) dx_2`.
    pub fn transverse_mass(&self) -> f64 {
        // int_{-1}^{1} (1 - s^2)^3 ds = 32/35
        self.r2 * 32.0 / 35.0
    }
}

/// `max over tests |int u phi_t + f_1(u) phi_{x_1} + f_2(u) phi_{x_2}|` by
/// full tensor quadrature in `(x_1, x_2, t)`.
pub fn weak_residual_2d<F: SpaceTimeField>(
    sol: &TensorSolution<F>,
    family: &FluxFamily,
    tests: &[Bump2],
    quad: QuadSpec,
) -> Result<f64> {
    if sol.dimension != 2 || family.dimension() != 2 {
        return usage("two-dimensional residual needs d = 2");
    }
    let (f1, f2) = (family.component(0), family.component(1));
    Ok(tests
        .par_iter()
        .map(|b| {
            let (t_lo, t_hi) = (b.t - b.rt, b.t + b.rt);
            let (a1, b1) = (b.x1 - b.r1, b.x1 + b.r1);
            quadrature::integrate_panels(
                |t| {
                    let mut xb: Vec<f64> = sol.line_breaks(t).into_iter().filter(|p| *p > a1 && *p < b1).collect();
                    xb.push(a1);
                    xb.push(b1);
                    xb.sort_by(f64::total_cmp);
                    quadrature::integrate_panels(
                        |x1| {
                            let u = sol.line_value(x1, t);
                            let (g1, g2) = (f1.f(u), f2.f(u));
                            quadrature::mapped(b.x2 - b.r2, b.x2 + b.r2, quad.order)
                                .map(|(x2, w)| {
                                    let [p1, p2, pt, d1, d2, dt] = b.parts(x1, x2, t);
                                    w * (u * p1 * p2 * dt + g1 * d1 * p2 * pt + g2 * p1 * d2 * pt)
                                })
                                .sum::<f64>()
                        },
                        &xb,
                        quad.x_panels,
                        quad.order,
                    )
                },
                &[t_lo, t_hi],
                quad.t_panels,
                quad.order,
            )
            .abs()
        })
        .reduce(|| 0.0, f64::max))
}

/// Box balance of the square entropy in `(x_1, x_2, t)`; density is
/// `dissipation / r^2`.
pub fn dissipation_box_2d<F: SpaceTimeField>(
    sol: &TensorSolution<F>,
    family: &FluxFamily,
    center: (f64, f64, f64),
    r: f64,
) -> Result<(f64, f64)> {
    if sol.dimension != 2 || family.dimension() != 2 {
        return usage("two-dimensional box needs d = 2");
    }
    let (x1, x2, t) = center;
    if t - r <= 0.0 {
        return usage("box leaves the upper half space");
    }
    let (f1, f2) = (family.component(0), family.component(1));
    let eta = |u: f64| 0.5 * u * u;
    let n = 20;
    let panels = 8;
    let line = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| quadrature::integrate_panels(g, &[lo, hi], panels, n);
    // t faces: integrate over (x1, x2)
    let t_face = |tt: f64| line(&|a: f64| eta(sol.line_value(a, tt)), x1 - r, x1 + r) * 2.0 * r;
    // x1 faces: q1 over (x2, t)
    let x1_face = |a: f64| {
        line(&|s: f64| crate::verify::square_entropy_flux(f1, sol.line_value(a, s)), t - r, t + r) * 2.0 * r
    };
    // x2 faces: q2 over (x1, t); u is the same on both faces
    let x2_face = |_b: f64| {
        line(
            &|s: f64| line(&|a: f64| crate::verify::square_entropy_flux(f2, sol.line_value(a, s)), x1 - r, x1 + r),
            t - r,
            t + r,
        )
    };
    let d = t_face(t - r) - t_face(t + r) + x1_face(x1 - r) - x1_face(x1 + r) + x2_face(x2 - r) - x2_face(x2 + r);
    Ok((d, d / (r * r)))
}

/// Staircase data `base + amplitude * rho(x_1)` transported at speed `a`.
#[derive(Clone, Debug)]
pub struct LinearTransport {
    stair: Staircase,
    base: f64,
    amplitude: f64,
    speed: f64,
}

pub fn linear_transport_solution(
    stair: Staircase,
    base: f64,
    amplitude: f64,
    speed: f64,
    interval: (f64, f64),
) -> Result<LinearTransport> {
    let (lo, hi) = (base.min(base + amplitude * stair.scale()), base.max(base + amplitude * stair.scale()));
    if lo < interval.0 || hi > interval.1 {
        return Err(Error::Domain(format!(
            "data range [{lo}, {hi}] leaves the linear interval [{}, {}]",
            interval.0, interval.1
        )));
    }
    Ok(LinearTransport { stair, base, amplitude, speed })
}

impl LinearTransport {
    pub fn initial(&self, x: f64) -> f64 {
        self.base + self.amplitude * self.stair.eval(x)
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Jump positions at time `t`, sorted.
    pub fn jumps_at(&self, t: f64) -> Vec<f64> {
        let mut out: Vec<f64> = (1..=self.stair.truncation() as u64)
            .map(|k| self.stair.jump(k).0 + self.speed * t)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Total variation in `x_1` at time `t`, measured from point values on
    /// either side of every jump.
    pub fn total_variation(&self, t: f64) -> f64 {
        let jumps = self.jumps_at(t);
        let mut pts = Vec::with_capacity(jumps.len() + 1);
        pts.push(jumps[0] - 1.0);
        for w in jumps.windows(2) {
            pts.push(0.5 * (w[0] + w[1]));
        }
        pts.push(jumps[jumps.len() - 1] + 1.0);
        pts.windows(2).map(|w| (self.state(w[1], t) - self.state(w[0], t)).abs()).sum()
    }
}

impl SpaceTimeField for LinearTransport {
    fn state(&self, x: f64, t: f64) -> f64 {
        self.initial(x - self.speed * t)
    }

    fn breaks(&self, t: f64, _level: Option<f64>) -> Vec<f64> {
        self.jumps_at(t)
    }

    fn time_breaks(&self, x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64, _level: Option<f64>) -> Vec<f64> {
        if self.speed == 0.0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for p in self.jumps_at(0.0) {
            for e in [x_lo, x_hi] {
                let t = (e - p) / self.speed;
                if t > t_lo && t < t_hi {
                    out.push(t);
                }
            }
        }
        out
    }
}
