//! Scalar fluxes: analytic built-ins, the convex working-interval wrapper
//! with its inverse-speed map and Legendre conjugate, flux families for the
//! multi-dimensional problem, and the non-degeneracy probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{usage, Error, Result};

/// Analytic scalar flux.
#[derive(Clone, Debug, PartialEq)]
pub enum Flux {
    /// `u^2 / 2`
    Burgers,
    /// `|u|^p / p`, `p > 1`
    Power { p: f64 },
    /// `e^u`
    Exp,
    /// `sum c_k u^k`
    Poly { coeffs: Vec<f64> },
    /// `sin u`
    Sin,
    /// `-g(-u)`: turns a concave `g` into a convex flux
    Reflected(Box<Flux>),
}

impl Flux {
    pub fn f(&self, u: f64) -> f64 {
        match self {
            Flux::Burgers => 0.5 * u * u,
            Flux::Power { p } => u.abs().powf(*p) / p,
            Flux::Exp => u.exp(),
            Flux::Poly { coeffs } => horner(coeffs, u),
            Flux::Sin => u.sin(),
            Flux::Reflected(g) => -g.f(-u),
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match self {
            Flux::Burgers => u,
            Flux::Power { p } => u.signum() * u.abs().powf(p - 1.0),
            Flux::Exp => u.exp(),
            Flux::Poly { coeffs } => horner(&derive(coeffs), u),
            Flux::Sin => u.cos(),
            Flux::Reflected(g) => g.df(-u),
        }
    }

    pub fn d2f(&self, u: f64) -> f64 {
        match self {
            Flux::Burgers => 1.0,
            Flux::Power { p } => (p - 1.0) * u.abs().powf(p - 2.0),
            Flux::Exp => u.exp(),
            Flux::Poly { coeffs } => horner(&derive(&derive(coeffs)), u),
            Flux::Sin => -u.sin(),
            Flux::Reflected(g) => -g.d2f(-u),
        }
    }

    /// Closed-form inverse of `df` where one exists.
    fn closed_inverse(&self, s: f64) -> Option<f64> {
        match self {
            Flux::Burgers => Some(s),
            Flux::Power { p } => Some(s.signum() * s.abs().powf(1.0 / (p - 1.0))),
            Flux::Exp => Some(s.ln()),
            Flux::Poly { .. } | Flux::Sin => None,
            Flux::Reflected(g) => g.closed_inverse(s).map(|v| -v),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Flux::Burgers => "burgers",
            Flux::Power { .. } => "power",
            Flux::Exp => "exp",
            Flux::Poly { .. } => "poly",
            Flux::Sin => "sin",
            Flux::Reflected(_) => "reflected",
        }
    }

    fn params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        match self {
            Flux::Power { p } => {
                m.insert("p".into(), Value::from(*p));
            }
            Flux::Poly { coeffs } => {
                m.insert("coeffs".into(), Value::from(coeffs.clone()));
            }
            Flux::Reflected(g) => {
                let inner = FluxConfig::from_flux(g, None);
                m.insert("inner".into(), serde_json::to_value(inner).expect("config serializes"));
            }
            _ => {}
        }
        m
    }
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
}

fn derive(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect()
}

/// Central second difference with step `h`; cross-check for analytic `d2f`.
pub fn fd_second(flux: &Flux, u: f64, h: f64) -> f64 {
    (flux.f(u + h) - 2.0 * flux.f(u) + flux.f(u - h)) / (h * h)
}

/// Central first difference with step `h`.
pub fn fd_first(flux: &Flux, u: f64, h: f64) -> f64 {
    (flux.f(u + h) - flux.f(u - h)) / (2.0 * h)
}

/// JSON description `{"kind": .., "params": {..}, "domain": [lo, hi]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FluxConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
}

/// Working interval used when a config omits `domain`.
pub const DEFAULT_DOMAIN: [f64; 2] = [-10.0, 10.0];

impl FluxConfig {
    pub fn flux(&self) -> Result<Flux> {
        let num = |key: &str| -> Result<f64> {
            self.params
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Usage(format!("params.{key}: missing or not a number")))
        };
        match self.kind.as_str() {
            "burgers" => Ok(Flux::Burgers),
            "power" => {
                let p = num("p")?;
                if p <= 1.0 {
                    return usage(format!("params.p: power flux needs p > 1, got {p}"));
                }
                Ok(Flux::Power { p })
            }
            "exp" => Ok(Flux::Exp),
            "sin" => Ok(Flux::Sin),
            "poly" => {
                let coeffs = self
                    .params
                    .get("coeffs")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Usage("params.coeffs: missing array".into()))?
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| Error::Usage("params.coeffs: non-numeric entry".into())))
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() {
                    return usage("params.coeffs: empty");
                }
                Ok(Flux::Poly { coeffs })
            }
            "reflected" => {
                let inner = self
                    .params
                    .get("inner")
                    .cloned()
                    .ok_or_else(|| Error::Usage("params.inner: missing flux".into()))?;
                let inner: FluxConfig = serde_json::from_value(inner)?;
                Ok(Flux::Reflected(Box::new(inner.flux()?)))
            }
            other => usage(format!("kind: unknown flux kind {other:?}")),
        }
    }

    pub fn convex(&self) -> Result<ConvexFlux> {
        let [lo, hi] = self.domain.unwrap_or(DEFAULT_DOMAIN);
        ConvexFlux::new(self.flux()?, lo, hi)
    }

    pub fn from_flux(flux: &Flux, domain: Option<(f64, f64)>) -> Self {
        FluxConfig {
            kind: flux.kind_name().into(),
            params: flux.params(),
            domain: domain.map(|(a, b)| [a, b]),
        }
    }
}

/// A flux restricted to a closed interval on which it is convex with
/// strictly increasing derivative.
#[derive(Clone, Debug)]
pub struct ConvexFlux {
    flux: Flux,
    lo: f64,
    hi: f64,
    floor: f64,
}

const CONVEXITY_SAMPLES: usize = 4097;

impl ConvexFlux {
    /// Certifies convexity by sampling `f''` on the interval. The recorded
    /// floor may be zero at isolated points (e.g. `u^4/4` at the origin);
    /// use [`ConvexFlux::is_uniformly_convex`] where a positive floor matters.
    pub fn new(flux: Flux, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return usage(format!("flux domain [{lo}, {hi}] is not a proper interval"));
        }
        let mut floor = f64::INFINITY;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..CONVEXITY_SAMPLES {
            let u = lo + (hi - lo) * i as f64 / (CONVEXITY_SAMPLES - 1) as f64;
            floor = floor.min(flux.d2f(u));
            let d = flux.df(u);
            if d <= prev {
                return Err(Error::Domain(format!(
                    "{} flux derivative not strictly increasing on [{lo}, {hi}] near u={u}",
                    flux.kind_name()
                )));
            }
            prev = d;
        }
        if floor < 0.0 {
            return Err(Error::Domain(format!(
                "{} flux is not convex on [{lo}, {hi}] (min f'' = {floor})",
                flux.kind_name()
            )));
        }
        Ok(ConvexFlux { flux, lo, hi, floor })
    }

    pub fn burgers() -> Self {
        Self::new(Flux::Burgers, DEFAULT_DOMAIN[0], DEFAULT_DOMAIN[1]).expect("burgers is convex")
    }

    pub fn flux(&self) -> &Flux {
        &self.flux
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn convexity_floor(&self) -> f64 {
        self.floor
    }

    pub fn is_uniformly_convex(&self) -> bool {
        self.floor > 0.0
    }

    pub fn f(&self, u: f64) -> f64 {
        self.flux.f(u)
    }

    pub fn df(&self, u: f64) -> f64 {
        self.flux.df(u)
    }

    pub fn d2f(&self, u: f64) -> f64 {
        self.flux.d2f(u)
    }

    /// `[f'(lo), f'(hi)]`.
    pub fn speed_range(&self) -> (f64, f64) {
        (self.flux.df(self.lo), self.flux.df(self.hi))
    }

    /// `G = (f')^{-1}`.
    pub fn inverse_speed(&self, s: f64) -> Result<f64> {
        let (slo, shi) = self.speed_range();
        let slack = 1e-12 * (1.0 + s.abs());
        if !(s >= slo - slack && s <= shi + slack) {
            return Err(Error::Range { value: s, lo: slo, hi: shi });
        }
        let s = s.clamp(slo, shi);
        let u = match self.flux.closed_inverse(s) {
            Some(u) if u.is_finite() => u,
            _ => self.bisect_speed(s),
        };
        let u = self.newton_polish(u, s);
        Ok(u.clamp(self.lo, self.hi))
    }

    /// Inverse speed for values already known to be inside the range; clamps
    /// rather than failing.
    pub fn g(&self, s: f64) -> f64 {
        let (slo, shi) = self.speed_range();
        let s = s.clamp(slo, shi);
        let u = match self.flux.closed_inverse(s) {
            Some(u) if u.is_finite() => u,
            _ => self.bisect_speed(s),
        };
        self.newton_polish(u, s).clamp(self.lo, self.hi)
    }

    fn bisect_speed(&self, s: f64) -> f64 {
        let (mut a, mut b) = (self.lo, self.hi);
        while b - a > 1e-13 * (1.0 + a.abs().max(b.abs())) {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.flux.df(m) < s {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn newton_polish(&self, u: f64, s: f64) -> f64 {
        let d2 = self.flux.d2f(u);
        if d2 > 0.0 {
            let v = u - (self.flux.df(u) - s) / d2;
            if v.is_finite() && (self.flux.df(v) - s).abs() <= (self.flux.df(u) - s).abs() {
                return v;
            }
        }
        u
    }

    /// Legendre conjugate `sup_{u in domain} (s u - f(u))`.
    pub fn conjugate(&self, s: f64) -> f64 {
        let (slo, shi) = self.speed_range();
        if s >= shi {
            return s * self.hi - self.flux.f(self.hi);
        }
        if s <= slo {
            return s * self.lo - self.flux.f(self.lo);
        }
        let u = self.g(s);
        s * u - self.flux.f(u)
    }
}

/// `d` scalar flux components `f_1 .. f_d`.
#[derive(Clone, Debug)]
pub struct FluxFamily {
    components: Vec<Flux>,
}

impl FluxFamily {
    pub fn new(components: Vec<Flux>) -> Result<Self> {
        if components.is_empty() {
            return usage("flux family needs at least one component");
        }
        Ok(FluxFamily { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize) -> &Flux {
        &self.components[k]
    }

    pub fn components(&self) -> &[Flux] {
        &self.components
    }

    /// `a(v) = f'(v)` componentwise.
    pub fn speeds(&self, v: f64) -> Vec<f64> {
        self.components.iter().map(|f| f.df(v)).collect()
    }
}

/// Settings for [`nondegeneracy_probe`].
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub r0: f64,
    pub deltas: Vec<f64>,
    /// uniformly spread directions on the unit sphere in `(tau, xi)`
    pub directions: usize,
    /// "resonant" directions `tau = -a(v) . xi` at this many `v` nodes
    pub resonant: usize,
    /// midpoint nodes for the indicator quadrature over `|v| < r0`
    pub v_nodes: usize,
    pub seed: u64,
    pub extra_directions: Vec<Vec<f64>>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            r0: 1.0,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            directions: 720,
            resonant: 401,
            v_nodes: 20_000,
            seed: 7,
            extra_directions: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub delta: f64,
    pub measure: f64,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// least-squares slope of `log measure` against `log delta`
    pub alpha: Option<f64>,
    pub degenerate: bool,
}

/// Lebesgue measure of `{|v| < r0 : |tau + a(v).xi| < delta}` by midpoint
/// quadrature of the indicator. `direction = (tau, xi_1, .., xi_d)`.
pub fn direction_measure(family: &FluxFamily, direction: &[f64], r0: f64, delta: f64, v_nodes: usize) -> f64 {
    let h = 2.0 * r0 / v_nodes as f64;
    let (tau, xi) = direction.split_first().expect("direction has a tau component");
    (0..v_nodes)
        .filter(|&i| {
            let v = -r0 + h * (i as f64 + 0.5);
            let dot: f64 = family.components.iter().zip(xi).map(|(f, x)| f.df(v) * x).sum();
            (tau + dot).abs() < delta
        })
        .count() as f64
        * h
}

/// Estimates the worst-direction measure for each `delta` and fits the
/// exponent `alpha` in `measure ~ C delta^alpha`.
pub fn nondegeneracy_probe(family: &FluxFamily, cfg: &ProbeConfig) -> Result<ProbeReport> {
    if cfg.deltas.is_empty() {
        return usage("nondegeneracy probe needs at least one delta");
    }
    if !(cfg.r0 > 0.0) {
        return usage("R0 must be positive");
    }
    if cfg.deltas.iter().any(|&d| !(d > 0.0)) || cfg.deltas.windows(2).any(|w| w[1] >= w[0]) {
        return usage("deltas must be positive and strictly decreasing");
    }
    let d = family.dimension();
    let dirs = probe_directions(family, cfg);
    for e in &cfg.extra_directions {
        if e.len() != d + 1 {
            return usage(format!("extra direction has {} components, expected {}", e.len(), d + 1));
        }
    }

    // precompute a(v) on the v nodes once
    let h = 2.0 * cfg.r0 / cfg.v_nodes as f64;
    let speeds: Vec<Vec<f64>> = (0..cfg.v_nodes)
        .map(|i| family.speeds(-cfg.r0 + h * (i as f64 + 0.5)))
        .collect();

    let mut best = vec![(0.0f64, Vec::new()); cfg.deltas.len()];
    let mut residuals = vec![0.0; cfg.v_nodes];
    for dir in dirs.iter().chain(cfg.extra_directions.iter().map(|v| normalize(v.clone())).collect::<Vec<_>>().iter()) {
        let (tau, xi) = dir.split_first().unwrap();
        for (r, a) in residuals.iter_mut().zip(&speeds) {
            *r = (tau + a.iter().zip(xi).map(|(a, x)| a * x).sum::<f64>()).abs();
        }
        for (slot, &delta) in best.iter_mut().zip(&cfg.deltas) {
            let m = residuals.iter().filter(|&&r| r < delta).count() as f64 * h;
            if m > slot.0 {
                *slot = (m, dir.clone());
            }
        }
    }

    let full = 2.0 * cfg.r0;
    let tol = 2.0 * h;
    let rows: Vec<ProbeRow> = best
        .into_iter()
        .zip(&cfg.deltas)
        .map(|((measure, direction), &delta)| ProbeRow { delta, measure, direction })
        .collect();
    let degenerate = rows.last().map(|r| r.measure >= full - tol).unwrap_or(false);
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.measure > 0.0 && r.measure < full - tol)
        .map(|r| (r.delta.ln(), r.measure.ln()))
        .collect();
    Ok(ProbeReport {
        alpha: least_squares_slope(&fit),
        rows,
        degenerate,
    })
}

fn probe_directions(family: &FluxFamily, cfg: &ProbeConfig) -> Vec<Vec<f64>> {
    let d = family.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dirs = Vec::with_capacity(cfg.directions + cfg.resonant);
    if d == 1 {
        // (tau, xi) and -(tau, xi) give the same set; half circle suffices
        for k in 0..cfg.directions {
            let th = std::f64::consts::PI * k as f64 / cfg.directions as f64;
            dirs.push(vec![th.cos(), th.sin()]);
        }
    } else {
        for _ in 0..cfg.directions {
            dirs.push(normalize((0..=d).map(|_| gaussian(&mut rng)).collect()));
        }
    }
    let n = cfg.resonant.max(2);
    for i in 0..cfg.resonant {
        let v = -cfg.r0 + 2.0 * cfg.r0 * i as f64 / (n - 1) as f64;
        let xi: Vec<f64> = if d == 1 {
            vec![1.0]
        } else {
            normalize((0..d).map(|_| gaussian(&mut rng)).collect())
        };
        let tau = -family.speeds(v).iter().zip(&xi).map(|(a, x)| a * x).sum::<f64>();
        let mut dir = vec![tau];
        dir.extend(xi);
        dirs.push(normalize(dir));
    }
    dirs
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Slope of the least-squares line through `(x, y)` pairs.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_speed_examples() {
        let b = ConvexFlux::burgers();
        assert_eq!(b.inverse_speed(1.5).unwrap(), 1.5);
        let p4 = ConvexFlux::new(Flux::Power { p: 4.0 }, 0.0, 3.0).unwrap();
        assert!((p4.inverse_speed(8.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(!p4.is_uniformly_convex());
        let e = ConvexFlux::new(Flux::Exp, -5.0, 5.0).unwrap();
        assert!(e.inverse_speed(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn inverse_speed_range_error_names_interval() {
        let p4 = ConvexFlux::new(Flux::Power { p: 4.0 }, 0.0, 3.0).unwrap();
        match p4.inverse_speed(30.0) {
            Err(Error::Range { lo, hi, .. }) => {
                assert_eq!(lo, 0.0);
                assert_eq!(hi, 27.0);
            }
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn conjugate_examples() {
        let b = ConvexFlux::burgers();
        assert_eq!(b.conjugate(2.0), 2.0);
        assert_eq!(b.conjugate(0.0), 0.0);
        let e = ConvexFlux::new(Flux::Exp, -5.0, 5.0).unwrap();
        assert!((e.conjugate(1.0) + 1.0).abs() < 1e-15);
        // clamped branch: sup attained at the right end of the domain
        assert_eq!(b.conjugate(20.0), 20.0 * 10.0 - 50.0);
    }

    #[test]
    fn polynomial_bisection_path() {
        // f = u^2/2 + u^4/12, f' = u + u^3/3
        let f = ConvexFlux::new(Flux::Poly { coeffs: vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0] }, -2.0, 2.0).unwrap();
        for &s in &[-3.0, -0.5, 0.0, 0.1, 1.7, 4.6] {
            let u = f.inverse_speed(s).unwrap();
            assert!((f.df(u) - s).abs() <= 1e-12 * (1.0 + s.abs()), "s={s}");
        }
    }

    #[test]
    fn analytic_second_derivatives_match_finite_differences() {
        let fluxes = [
            Flux::Burgers,
            Flux::Power { p: 3.5 },
            Flux::Exp,
            Flux::Poly { coeffs: vec![1.0, -2.0, 0.5, 0.25] },
            Flux::Sin,
        ];
        for f in &fluxes {
            for &u in &[0.3, 0.9, 1.7] {
                let e1 = (fd_second(f, u, 1e-3) - f.d2f(u)).abs();
                let e2 = (fd_second(f, u, 5e-4) - f.d2f(u)).abs();
                // O(h^2): halving h cuts the error by about 4
                assert!(e1 < 1e-5, "{f:?} u={u}: {e1}");
                assert!(e2 < e1 / 3.0 || e1 < 1e-9, "{f:?} u={u}: {e1} -> {e2}");
                assert!((fd_first(f, u, 1e-6) - f.df(u)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reflection_of_concave_flux() {
        let g = Flux::Reflected(Box::new(Flux::Sin));
        // sin is concave on (0, pi); its reflection is convex on (-pi, 0)
        let c = ConvexFlux::new(g.clone(), -3.0, -0.2).unwrap();
        assert!(c.is_uniformly_convex());
        for &u in &[-2.5, -1.0, -0.4] {
            assert!((fd_second(&g, u, 1e-4) - g.d2f(u)).abs() < 1e-6);
        }
        let cfg = FluxConfig::from_flux(&g, Some((-3.0, -0.2)));
        let back: FluxConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back.flux().unwrap(), g);
    }

    #[test]
    fn non_convex_rejected() {
        assert!(matches!(ConvexFlux::new(Flux::Sin, 0.5, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn config_parsing() {
        let cfg: FluxConfig = serde_json::from_str(r#"{"kind":"power","params":{"p":4},"domain":[0,3]}"#).unwrap();
        assert_eq!(cfg.flux().unwrap(), Flux::Power { p: 4.0 });
        let bad: FluxConfig = serde_json::from_str(r#"{"kind":"cubic"}"#).unwrap();
        assert!(bad.flux().is_err());
        assert!(serde_json::from_str::<FluxConfig>(r#"{"params":{}}"#).is_err());
    }

    #[test]
    fn probe_single_direction_burgers() {
        let fam = FluxFamily::new(vec![Flux::Burgers]).unwrap();
        let m = direction_measure(&fam, &[0.0, 1.0], 1.0, 0.1, 1_000_000);
        assert!((m - 0.2).abs() < 1e-5);
    }

    #[test]
    fn probe_linear_flux_degenerate() {
        let c = 0.7;
        let fam = FluxFamily::new(vec![Flux::Poly { coeffs: vec![0.0, c] }]).unwrap();
        let n = (1.0 + c * c).sqrt();
        for &delta in &[1e-1, 1e-3] {
            let m = direction_measure(&fam, &[-c / n, 1.0 / n], 1.0, delta, 10_000);
            assert!((m - 2.0).abs() < 1e-12);
        }
        let rep = nondegeneracy_probe(&fam, &ProbeConfig::default()).unwrap();
        assert!(rep.degenerate);
    }

    #[test]
    fn probe_burgers_exponent() {
        let fam = FluxFamily::new(vec![Flux::Burgers]).unwrap();
        let rep = nondegeneracy_probe(&fam, &ProbeConfig::default()).unwrap();
        let alpha = rep.alpha.unwrap();
        assert!(alpha >= 0.95 && alpha <= 1.05, "alpha = {alpha}");
        assert!(!rep.degenerate);
    }

    #[test]
    fn probe_quartic_cube_root_scaling() {
        // dense single-direction oracle at xi = 1: |v^3| < delta has length 2 delta^(1/3)
        let fam = FluxFamily::new(vec![Flux::Power { p: 4.0 }]).unwrap();
        for &delta in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let m = direction_measure(&fam, &[0.0, 1.0], 1.0, delta, 1_000_000);
            let exact = 2.0 * f64::cbrt(delta);
            assert!((m - exact).abs() < 1e-5, "delta={delta}: {m} vs {exact}");
        }
        let rep = nondegeneracy_probe(&fam, &ProbeConfig::default()).unwrap();
        let alpha = rep.alpha.unwrap();
        assert!((alpha - 1.0 / 3.0).abs() < 0.05, "alpha = {alpha}");
    }

    #[test]
    fn probe_rejects_empty_deltas() {
        let fam = FluxFamily::new(vec![Flux::Burgers]).unwrap();
        let cfg = ProbeConfig { deltas: vec![], ..Default::default() };
        assert!(matches!(nondegeneracy_probe(&fam, &cfg), Err(Error::Usage(_))));
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(s in -3.0f64..3.0) {
            let f = ConvexFlux::new(Flux::Poly { coeffs: vec![0.0, 0.0, 0.5, 0.0, 0.1] }, -3.0, 3.0).unwrap();
            let u = f.inverse_speed(s).unwrap();
            prop_assert!((f.df(u) - s).abs() <= 1e-10 * (1.0 + s.abs()));
            let back = f.inverse_speed(f.df(u)).unwrap();
            prop_assert!((back - u).abs() <= 1e-10);
        }

        #[test]
        fn conjugate_convex_and_young(s1 in -4.0f64..4.0, s2 in -4.0f64..4.0, th in 0.0f64..1.0) {
            let f = ConvexFlux::new(Flux::Exp, -3.0, 3.0).unwrap();
            let (lo, hi) = f.speed_range();
            let (a, b) = (lo + (hi - lo) * (s1 + 4.0) / 8.0, lo + (hi - lo) * (s2 + 4.0) / 8.0);
            let m = th * a + (1.0 - th) * b;
            prop_assert!(f.conjugate(m) <= th * f.conjugate(a) + (1.0 - th) * f.conjugate(b) + 1e-12);
            let u = f.g(a);
            prop_assert!((f.f(u) + f.conjugate(a) - a * u).abs() <= 1e-10);
        }
    }
}
