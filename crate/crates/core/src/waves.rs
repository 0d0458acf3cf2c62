//! Strictly hyperbolic systems: eigenstructure with gap certificates, field
//! classification, and the λ-parametrized shock and rarefaction curves of a
//! single characteristic family.
//!
//! Family indices are 1-based throughout (`i = 1` is the slowest family).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::flux::Flux;

pub type State = DVector<f64>;

/// Largest RK4 step along an integral curve.
pub const MAX_STEP: f64 = 1e-3;
/// `|∇λ_i·r_i|` below this counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Slack allowed in the Lax inequalities.
pub const ADMISSIBILITY_TOL: f64 = 1e-8;
/// Newton acceptance threshold for the Rankine–Hugoniot residual.
pub const RH_TOL: f64 = 1e-11;
/// Shocks below this strength take the midpoint speed.
pub const WEAK_SHOCK: f64 = 1e-6;

/// A system of conservation laws `U_t + F(U)_x = 0`.
pub trait HyperbolicSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn flux(&self, u: &State) -> State;

    /// Membership in the state domain Ω.
    fn in_domain(&self, u: &State) -> bool;

    /// Minimal certified spacing between consecutive eigenvalues.
    fn gap_floor(&self) -> f64 {
        1e-8
    }

    /// State scale used for finite-difference steps.
    fn scale(&self, u: &State) -> f64 {
        1.0 + u.amax()
    }

    fn jacobian(&self, u: &State) -> DMatrix<f64> {
        fd_jacobian(self, u)
    }

    /// Closed-form sorted eigenpairs, if known.
    fn eigen_closed(&self, _u: &State) -> Option<(Vec<f64>, Vec<State>)> {
        None
    }

    /// Closed-form `∇λ_i`, if known.
    fn grad_lambda_closed(&self, _u: &State, _i: usize) -> Option<State> {
        None
    }
}

/// Central differences with one Richardson extrapolation, step `1e-6·scale`.
pub fn fd_jacobian<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State) -> DMatrix<f64> {
    let n = sys.dim();
    let h = 1e-6 * sys.scale(u);
    let column = |j: usize, h: f64| {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[j] += h;
        dn[j] -= h;
        (sys.flux(&up) - sys.flux(&dn)) / (2.0 * h)
    };
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let coarse = column(j, h);
        let fine = column(j, 0.5 * h);
        a.set_column(j, &((fine * 4.0 - coarse) / 3.0));
    }
    a
}

/// Sorted eigenvalues with unit right eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub values: Vec<f64>,
    /// Unit vectors; sign chosen so the first component of magnitude above
    /// `1e-9` is positive.
    pub vectors: Vec<State>,
    pub jacobian_norm: f64,
    /// `min_i (λ_{i+1} − λ_i)`, infinite for scalar systems.
    pub gap: f64,
}

impl EigenStructure {
    pub fn lambda(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn r(&self, i: usize) -> &State {
        &self.vectors[i - 1]
    }
}

fn orient(mut v: State) -> State {
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    if let Some(&c) = v.iter().find(|c| c.abs() > 1e-9) {
        if c < 0.0 {
            v = -v;
        }
    }
    v
}

fn check_field<S: HyperbolicSystem + ?Sized>(sys: &S, i: usize) -> Result<()> {
    if i == 0 || i > sys.dim() {
        return usage(format!("family index {i} outside 1..={}", sys.dim()));
    }
    Ok(())
}

fn check_domain<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State) -> Result<()> {
    if u.len() != sys.dim() {
        return usage(format!("state has {} components, system has {}", u.len(), sys.dim()));
    }
    if !sys.in_domain(u) {
        return Err(Error::Domain(format!(
            "state {:?} outside the domain of {}",
            u.as_slice(),
            sys.name()
        )));
    }
    Ok(())
}

/// Eigenstructure at `u` with a strict-hyperbolicity certificate.
pub fn eigen<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State) -> Result<EigenStructure> {
    check_domain(sys, u)?;
    let n = sys.dim();
    let a = sys.jacobian(u);
    let norm = a.norm();
    let (values, vectors) = match sys.eigen_closed(u) {
        Some((vals, vecs)) => (vals, vecs.into_iter().map(orient).collect::<Vec<_>>()),
        None => numeric_eigen(&a, u)?,
    };
    let gap = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if values.iter().any(|v| !v.is_finite()) || (n > 1 && !(gap >= sys.gap_floor())) {
        return Err(Error::StrictHyperbolicity {
            state: u.as_slice().to_vec(),
            reason: format!("eigenvalue gap {gap:e} below floor {:e}", sys.gap_floor()),
        });
    }
    Ok(EigenStructure {
        values,
        vectors,
        jacobian_norm: norm,
        gap,
    })
}

fn numeric_eigen(a: &DMatrix<f64>, u: &State) -> Result<(Vec<f64>, Vec<State>)> {
    let n = a.nrows();
    let norm = a.norm();
    let complex = a.clone().complex_eigenvalues();
    let mut values = Vec::with_capacity(n);
    for z in complex.iter() {
        if z.im.abs() > 1e-10 * (1.0 + norm) {
            return Err(Error::StrictHyperbolicity {
                state: u.as_slice().to_vec(),
                reason: format!("complex eigenvalue {} + {}i", z.re, z.im),
            });
        }
        values.push(z.re);
    }
    values.sort_by(f64::total_cmp);
    let mut vectors = Vec::with_capacity(n);
    for &lam in &values {
        let shifted = a - DMatrix::identity(n, n) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("nonempty spectrum");
        vectors.push(orient(v_t.row(k).transpose()));
    }
    Ok((values, vectors))
}

pub fn lambda<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State, i: usize) -> Result<f64> {
    check_field(sys, i)?;
    Ok(eigen(sys, u)?.lambda(i))
}

/// `∇λ_i(u)`, closed form when available, otherwise Richardson-extrapolated
/// central differences of the eigenvalue.
pub fn grad_lambda<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State, i: usize) -> Result<State> {
    check_field(sys, i)?;
    if let Some(g) = sys.grad_lambda_closed(u, i) {
        return Ok(g);
    }
    let h = 1e-5 * sys.scale(u);
    let n = sys.dim();
    let mut g = State::zeros(n);
    for j in 0..n {
        let diff = |h: f64| -> Result<f64> {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += h;
            dn[j] -= h;
            Ok((lambda(sys, &up, i)? - lambda(sys, &dn, i)?) / (2.0 * h))
        };
        g[j] = (4.0 * diff(0.5 * h)? - diff(h)?) / 3.0;
    }
    Ok(g)
}

/// `∇λ_i·r_i` with the unit eigenvector of [`eigen`].
pub fn nonlinearity<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State, i: usize) -> Result<f64> {
    let es = eigen(sys, u)?;
    Ok(grad_lambda(sys, u, i)?.dot(es.r(i)))
}

/// `r_i / (∇λ_i·r_i)`, the field whose integral curves are λ-parametrized.
pub fn normalized_r<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State, i: usize) -> Result<State> {
    let es = eigen(sys, u)?;
    let r = es.r(i);
    let k = grad_lambda(sys, u, i)?.dot(r);
    if !(k.abs() > DEGENERACY_TOL) {
        return Err(Error::Continuation {
            sigma: f64::NAN,
            last_good: f64::NAN,
            reason: format!("∇λ_{i}·r_{i} = {k:e} at {:?}", u.as_slice()),
        });
    }
    Ok(r / k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldClass {
    GenuinelyNonlinear,
    LinearlyDegenerate,
    Neither,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldClassification {
    pub class: FieldClass,
    pub min: f64,
    pub max: f64,
}

/// Classify family `i` from the sign pattern of `∇λ_i·r_i` over `samples`.
pub fn classify_field<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    i: usize,
    samples: &[State],
) -> Result<FieldClassification> {
    check_field(sys, i)?;
    if samples.len() < 100 {
        return usage(format!("classification needs at least 100 samples, got {}", samples.len()));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for u in samples {
        let k = nonlinearity(sys, u, i)?;
        min = min.min(k);
        max = max.max(k);
    }
    let class = if min.abs() <= DEGENERACY_TOL && max.abs() <= DEGENERACY_TOL {
        FieldClass::LinearlyDegenerate
    } else if min > DEGENERACY_TOL || max < -DEGENERACY_TOL {
        FieldClass::GenuinelyNonlinear
    } else {
        FieldClass::Neither
    };
    Ok(FieldClassification { class, min, max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Shock,
    Rarefaction,
    Composite,
    Contact,
}

#[derive(Debug, Clone)]
pub struct WaveCurvePoint {
    pub sigma: f64,
    pub state: State,
    /// Shock speed on the shock branch.
    pub speed: Option<f64>,
    /// `‖F(U)−F(U0)−λ̄(U−U0)‖`, zero off the shock branch.
    pub rh_residual: f64,
    pub kind: CurveKind,
}

fn rk4<S, V>(sys: &S, u0: &State, total: f64, field: V) -> Result<State>
where
    S: HyperbolicSystem + ?Sized,
    V: Fn(&State) -> Result<State>,
{
    let steps = (total.abs() / MAX_STEP).ceil().max(1.0) as usize;
    let h = total / steps as f64;
    let mut u = u0.clone();
    let fail = |k: usize, e: Error| {
        let reason = match e {
            Error::Continuation { reason, .. } => reason,
            other => other.to_string(),
        };
        Error::Continuation {
            sigma: total,
            last_good: h * k as f64,
            reason,
        }
    };
    for k in 0..steps {
        let stage = |v: &State| -> Result<State> {
            if !sys.in_domain(v) {
                return Err(Error::Domain(format!("left the domain at {:?}", v.as_slice())));
            }
            field(v)
        };
        let k1 = stage(&u).map_err(|e| fail(k, e))?;
        let k2 = stage(&(&u + &k1 * (0.5 * h))).map_err(|e| fail(k, e))?;
        let k3 = stage(&(&u + &k2 * (0.5 * h))).map_err(|e| fail(k, e))?;
        let k4 = stage(&(&u + &k3 * h)).map_err(|e| fail(k, e))?;
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !sys.in_domain(&u) {
            return Err(fail(k, Error::Domain(format!("left the domain at {:?}", u.as_slice()))));
        }
    }
    Ok(u)
}

/// `R_i(σ)(U0)` with the normalization `λ_i(R_i(σ)(U0)) = λ_i(U0) + σ`.
pub fn rarefaction<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    i: usize,
    sigma: f64,
) -> Result<WaveCurvePoint> {
    check_field(sys, i)?;
    check_domain(sys, u0)?;
    let state = if sigma == 0.0 {
        u0.clone()
    } else {
        normalized_r(sys, u0, i).map_err(|e| with_sigma(e, sigma, 0.0))?;
        rk4(sys, u0, sigma, |v| normalized_r(sys, v, i))?
    };
    Ok(WaveCurvePoint {
        sigma,
        state,
        speed: None,
        rh_residual: 0.0,
        kind: CurveKind::Rarefaction,
    })
}

fn with_sigma(e: Error, sigma: f64, last_good: f64) -> Error {
    match e {
        Error::Continuation { reason, .. } => Error::Continuation {
            sigma,
            last_good,
            reason,
        },
        other => other,
    }
}

/// Arclength-parametrized integral curve of a linearly degenerate family.
/// The direction at `u0` is the oriented unit eigenvector; later steps keep
/// the sign continuous.
pub fn contact_curve<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    i: usize,
    s: f64,
) -> Result<WaveCurvePoint> {
    check_field(sys, i)?;
    let k = nonlinearity(sys, u0, i)?;
    if k.abs() > 1e-6 {
        return usage(format!("family {i} is not linearly degenerate at U0 (∇λ·r = {k:e})"));
    }
    let reference = eigen(sys, u0)?.r(i).clone();
    let state = if s == 0.0 {
        u0.clone()
    } else {
        rk4(sys, u0, s, |v| {
            let r = eigen(sys, v)?.r(i).clone();
            Ok(if r.dot(&reference) < 0.0 { -r } else { r })
        })?
    };
    Ok(WaveCurvePoint {
        sigma: s,
        state,
        speed: Some(lambda(sys, u0, i)?),
        rh_residual: 0.0,
        kind: CurveKind::Contact,
    })
}

pub fn rh_residual<S: HyperbolicSystem + ?Sized>(sys: &S, left: &State, right: &State, speed: f64) -> f64 {
    (sys.flux(right) - sys.flux(left) - (right - left) * speed).norm()
}

/// Newton on `(U, λ̄)` for the RH equations plus `λ_i(U) = λ_i(U0) + σ`.
fn newton_shock<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    f0: &State,
    i: usize,
    target: f64,
    mut u: State,
    mut s: f64,
) -> Option<(State, f64)> {
    let n = sys.dim();
    let residual = |u: &State, s: f64| -> Option<(DVector<f64>, f64)> {
        if !sys.in_domain(u) {
            return None;
        }
        let lam = lambda(sys, u, i).ok()?;
        let mut r = DVector::zeros(n + 1);
        r.rows_mut(0, n).copy_from(&(sys.flux(u) - f0 - (u - u0) * s));
        r[n] = lam - target;
        let norm = r.norm();
        Some((r, norm))
    };
    let (mut r, mut norm) = residual(&u, s)?;
    for _ in 0..60 {
        if norm <= 1e-14 * (1.0 + f0.norm()) {
            break;
        }
        let a = sys.jacobian(&u);
        let g = grad_lambda(sys, &u, i).ok()?;
        let mut j = DMatrix::zeros(n + 1, n + 1);
        j.view_mut((0, 0), (n, n)).copy_from(&(a - DMatrix::identity(n, n) * s));
        j.view_mut((0, n), (n, 1)).copy_from(&(-(&u - u0)));
        j.view_mut((n, 0), (1, n)).copy_from(&g.transpose());
        let step = j.lu().solve(&(-&r))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand_u = &u + step.rows(0, n) * t;
            let cand_s = s + step[n] * t;
            if let Some((cr, cn)) = residual(&cand_u, cand_s) {
                if cn < norm || cn <= 1e-14 * (1.0 + f0.norm()) {
                    u = cand_u;
                    s = cand_s;
                    r = cr;
                    norm = cn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let rh = rh_residual(sys, u0, &u, s);
    let lam_err = (lambda(sys, &u, i).ok()? - target).abs();
    (rh <= RH_TOL * (1.0 + f0.norm()) && lam_err <= RH_TOL && (&u - u0).norm() > 0.0).then_some((u, s))
}

/// `S_i(σ)(U0)` on the Hugoniot locus with the λ-parametrization.
pub fn shock<S: HyperbolicSystem + ?Sized>(sys: &S, u0: &State, i: usize, sigma: f64) -> Result<WaveCurvePoint> {
    shock_with_guess(sys, u0, i, sigma, None)
}

/// [`shock`] with an optional Newton predictor `(state, speed)`.
pub fn shock_with_guess<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    i: usize,
    sigma: f64,
    guess: Option<(&State, f64)>,
) -> Result<WaveCurvePoint> {
    check_field(sys, i)?;
    check_domain(sys, u0)?;
    let lam0 = lambda(sys, u0, i)?;
    if sigma == 0.0 {
        return Ok(WaveCurvePoint {
            sigma,
            state: u0.clone(),
            speed: Some(lam0),
            rh_residual: 0.0,
            kind: CurveKind::Shock,
        });
    }
    let f0 = sys.flux(u0);
    let target = lam0 + sigma;
    if sigma.abs() <= 1e-14 * (1.0 + lam0.abs()) {
        // below resolution the locus is its tangent line
        let u = u0 + normalized_r(sys, u0, i)? * sigma;
        let s = lam0 + 0.5 * sigma;
        return Ok(WaveCurvePoint {
            sigma,
            rh_residual: rh_residual(sys, u0, &u, s),
            state: u,
            speed: Some(s),
            kind: CurveKind::Shock,
        });
    }
    let point = |u: State, s: f64| {
        // weak shocks: the chord speed is rounding-dominated, the midpoint rule is second order
        let s = if sigma.abs() <= WEAK_SHOCK {
            lambda(sys, &u, i).map(|l| 0.5 * (lam0 + l)).unwrap_or(s)
        } else {
            s
        };
        WaveCurvePoint {
            sigma,
            rh_residual: rh_residual(sys, u0, &u, s),
            state: u,
            speed: Some(s),
            kind: CurveKind::Shock,
        }
    };
    if let Some((g, s)) = guess {
        if let Some((u, s)) = newton_shock(sys, u0, &f0, i, target, g.clone(), s) {
            return Ok(point(u, s));
        }
    }
    let tangent = |u: &State, lam: f64, ds: f64| -> Option<(State, f64)> {
        let pred = match rarefaction(sys, u, i, ds) {
            Ok(p) => p.state,
            Err(_) => u + normalized_r(sys, u, i).ok()? * ds,
        };
        Some((pred, lam + 0.5 * ds))
    };
    if let Some((pred, s)) = tangent(u0, lam0, sigma) {
        if let Some((u, s)) = newton_shock(sys, u0, &f0, i, target, pred, s) {
            return Ok(point(u, s));
        }
    }
    // step-halved continuation from U0
    let mut last_good = 0.0;
    for halvings in 1..=7 {
        let steps = 1usize << halvings;
        let h = sigma / steps as f64;
        let mut prev: Option<(State, f64)> = None;
        let mut before: Option<State> = None;
        let mut ok = true;
        for k in 1..=steps {
            let sk = h * k as f64;
            let (pred, s_pred) = match (&prev, &before) {
                (Some((u, s)), Some(b)) => (u * 2.0 - b, *s + 0.5 * h),
                (Some((u, s)), None) => (u + (u - u0), *s + 0.5 * h),
                _ => match tangent(u0, lam0, sk) {
                    Some(p) => p,
                    None => {
                        ok = false;
                        break;
                    }
                },
            };
            match newton_shock(sys, u0, &f0, i, lam0 + sk, pred, s_pred) {
                Some(sol) => {
                    if sk.abs() > f64::abs(last_good) {
                        last_good = sk;
                    }
                    before = prev.take().map(|p| p.0);
                    prev = Some(sol);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some((u, s)) = prev {
                return Ok(point(u, s));
            }
        }
    }
    Err(Error::Continuation {
        sigma,
        last_good,
        reason: "Newton iteration on the Hugoniot locus did not converge".into(),
    })
}

/// `Ψ_i(τ)`: the admissible shock branch for `τ < 0`, the rarefaction branch
/// for `τ ≥ 0`.
pub fn composite_curve<S: HyperbolicSystem + ?Sized>(sys: &S, u0: &State, i: usize, tau: f64) -> Result<WaveCurvePoint> {
    let mut p = if tau < 0.0 {
        shock(sys, u0, i, tau)?
    } else {
        rarefaction(sys, u0, i, tau)?
    };
    p.kind = CurveKind::Composite;
    Ok(p)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LaxCheck {
    pub admissible: bool,
    /// `λ_i(U−) − λ̄`.
    pub left_margin: f64,
    /// `λ̄ − λ_i(U+)`.
    pub right_margin: f64,
}

/// Lax inequalities `λ_i(U+) ≤ λ̄ ≤ λ_i(U−)`, each with slack
/// [`ADMISSIBILITY_TOL`].
pub fn lax_admissible<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u_minus: &State,
    u_plus: &State,
    speed: f64,
    i: usize,
) -> Result<LaxCheck> {
    let left_margin = lambda(sys, u_minus, i)? - speed;
    let right_margin = speed - lambda(sys, u_plus, i)?;
    Ok(LaxCheck {
        admissible: left_margin >= -ADMISSIBILITY_TOL && right_margin >= -ADMISSIBILITY_TOL,
        left_margin,
        right_margin,
    })
}

/// Least-squares speed of a jump and its RH residual.
pub fn shock_speed<S: HyperbolicSystem + ?Sized>(sys: &S, u_minus: &State, u_plus: &State) -> Result<(f64, f64)> {
    let du = u_plus - u_minus;
    let dd = du.dot(&du);
    if dd == 0.0 {
        return usage("shock_speed needs distinct states");
    }
    let df = sys.flux(u_plus) - sys.flux(u_minus);
    let s = df.dot(&du) / dd;
    Ok((s, (df - du * s).norm()))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuationRange {
    /// Most negative σ reached by both branches.
    pub negative: f64,
    pub positive: f64,
    /// `min(|negative|, positive, cap)`.
    pub working: f64,
}

/// March both curve branches outward in steps of `step` until one fails or
/// `cap` is reached.
pub fn continuation_range<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u0: &State,
    i: usize,
    cap: f64,
    step: f64,
) -> Result<ContinuationRange> {
    if !(step > 0.0 && cap > 0.0) {
        return usage("continuation_range needs positive step and cap");
    }
    let reach = |dir: f64| -> f64 {
        let mut good = 0.0;
        let mut s = step;
        while s <= cap + 1e-15 {
            let sigma = dir * s;
            if shock(sys, u0, i, sigma).is_err() || rarefaction(sys, u0, i, sigma).is_err() {
                break;
            }
            good = s;
            s += step;
        }
        good
    };
    let positive = reach(1.0);
    let negative = -reach(-1.0);
    Ok(ContinuationRange {
        negative,
        positive,
        working: positive.min(-negative).min(cap),
    })
}

/// Isentropic gas dynamics in `(ϱ, m = ϱu)` with `p = κϱ^γ`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Isentropic {
    pub gamma: f64,
    pub kappa: f64,
}

impl Isentropic {
    /// `κ = (γ−1)²/(4γ)`.
    pub fn new(gamma: f64) -> Self {
        Isentropic {
            gamma,
            kappa: (gamma - 1.0).powi(2) / (4.0 * gamma),
        }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.kappa * self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
    }
}

impl HyperbolicSystem for Isentropic {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        format!("isentropic(gamma={})", self.gamma)
    }

    fn flux(&self, u: &State) -> State {
        let (rho, m) = (u[0], u[1]);
        State::from_vec(vec![m, m * m / rho + self.pressure(rho)])
    }

    fn in_domain(&self, u: &State) -> bool {
        u.len() == 2 && u[0] > 1e-8 && u[0] < 1e8 && u[1].is_finite()
    }

    fn jacobian(&self, u: &State) -> DMatrix<f64> {
        let v = u[1] / u[0];
        let c2 = self.sound_speed(u[0]).powi(2);
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, c2 - v * v, 2.0 * v])
    }

    fn eigen_closed(&self, u: &State) -> Option<(Vec<f64>, Vec<State>)> {
        let v = u[1] / u[0];
        let c = self.sound_speed(u[0]);
        Some((
            vec![v - c, v + c],
            vec![State::from_vec(vec![1.0, v - c]), State::from_vec(vec![1.0, v + c])],
        ))
    }

    fn grad_lambda_closed(&self, u: &State, i: usize) -> Option<State> {
        let rho = u[0];
        let v = u[1] / rho;
        let dc = 0.5 * (self.gamma - 1.0) * self.sound_speed(rho) / rho;
        let sign = if i == 1 { -1.0 } else { 1.0 };
        Some(State::from_vec(vec![-v / rho + sign * dc, 1.0 / rho]))
    }
}

/// Ideal-gas Euler equations in `(ρ, m, E)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Euler3 {
    pub gamma: f64,
}

impl Euler3 {
    pub fn pressure(&self, u: &State) -> f64 {
        (self.gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
    }

    pub fn from_primitive(&self, rho: f64, v: f64, p: f64) -> State {
        State::from_vec(vec![rho, rho * v, p / (self.gamma - 1.0) + 0.5 * rho * v * v])
    }
}

impl HyperbolicSystem for Euler3 {
    fn dim(&self) -> usize {
        3
    }

    fn name(&self) -> String {
        format!("euler3(gamma={})", self.gamma)
    }

    fn flux(&self, u: &State) -> State {
        let v = u[1] / u[0];
        let p = self.pressure(u);
        State::from_vec(vec![u[1], u[1] * v + p, (u[2] + p) * v])
    }

    fn in_domain(&self, u: &State) -> bool {
        u.len() == 3 && u[0] > 1e-8 && u[0] < 1e8 && u.iter().all(|c| c.is_finite()) && self.pressure(u) > 1e-8
    }

    fn jacobian(&self, u: &State) -> DMatrix<f64> {
        let g = self.gamma;
        let v = u[1] / u[0];
        let h = (u[2] + self.pressure(u)) / u[0];
        DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                0.5 * (g - 3.0) * v * v,
                (3.0 - g) * v,
                g - 1.0,
                v * (0.5 * (g - 1.0) * v * v - h),
                h - (g - 1.0) * v * v,
                g * v,
            ],
        )
    }

    fn eigen_closed(&self, u: &State) -> Option<(Vec<f64>, Vec<State>)> {
        let v = u[1] / u[0];
        let p = self.pressure(u);
        let c = (self.gamma * p / u[0]).sqrt();
        let h = (u[2] + p) / u[0];
        Some((
            vec![v - c, v, v + c],
            vec![
                State::from_vec(vec![1.0, v - c, h - v * c]),
                State::from_vec(vec![1.0, v, 0.5 * v * v]),
                State::from_vec(vec![1.0, v + c, h + v * c]),
            ],
        ))
    }

    fn grad_lambda_closed(&self, u: &State, i: usize) -> Option<State> {
        (i == 2).then(|| State::from_vec(vec![-u[1] / (u[0] * u[0]), 1.0 / u[0], 0.0]))
    }
}

/// `F(U) = A U` with constant `A`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
}

impl LinearSystem {
    pub fn diagonal(entries: &[f64]) -> Self {
        LinearSystem {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
        }
    }
}

impl HyperbolicSystem for LinearSystem {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn name(&self) -> String {
        format!("linear(n={})", self.a.nrows())
    }

    fn flux(&self, u: &State) -> State {
        &self.a * u
    }

    fn in_domain(&self, u: &State) -> bool {
        u.len() == self.a.nrows() && u.iter().all(|c| c.is_finite())
    }

    fn jacobian(&self, _u: &State) -> DMatrix<f64> {
        self.a.clone()
    }

    fn grad_lambda_closed(&self, _u: &State, _i: usize) -> Option<State> {
        Some(State::zeros(self.a.nrows()))
    }
}

/// A scalar law viewed as a system with `n = 1`.
#[derive(Debug, Clone)]
pub struct ScalarSystem {
    pub flux: Flux,
}

impl HyperbolicSystem for ScalarSystem {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        format!("scalar({})", self.flux.kind_name())
    }

    fn flux(&self, u: &State) -> State {
        State::from_element(1, self.flux.f(u[0]))
    }

    fn in_domain(&self, u: &State) -> bool {
        u.len() == 1 && u[0].is_finite()
    }

    fn jacobian(&self, u: &State) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.flux.df(u[0]))
    }

    fn eigen_closed(&self, u: &State) -> Option<(Vec<f64>, Vec<State>)> {
        Some((vec![self.flux.df(u[0])], vec![State::from_element(1, 1.0)]))
    }

    fn grad_lambda_closed(&self, u: &State, _i: usize) -> Option<State> {
        Some(State::from_element(1, self.flux.d2f(u[0])))
    }
}

/// Serializable choice among the built-in systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemFixture {
    Isentropic { gamma: f64 },
    Euler3 { gamma: f64 },
    Linear { diagonal: Vec<f64> },
    Burgers,
}

impl SystemFixture {
    pub fn build(&self) -> Result<Box<dyn HyperbolicSystem>> {
        Ok(match self {
            SystemFixture::Isentropic { gamma } => {
                if !(*gamma > 1.0) {
                    return usage(format!("isentropic gamma must exceed 1, got {gamma}"));
                }
                Box::new(Isentropic::new(*gamma))
            }
            SystemFixture::Euler3 { gamma } => {
                if !(*gamma > 1.0) {
                    return usage(format!("euler gamma must exceed 1, got {gamma}"));
                }
                Box::new(Euler3 { gamma: *gamma })
            }
            SystemFixture::Linear { diagonal } => {
                if diagonal.is_empty() {
                    return usage("linear system needs at least one diagonal entry");
                }
                Box::new(LinearSystem::diagonal(diagonal))
            }
            SystemFixture::Burgers => Box::new(ScalarSystem { flux: Flux::Burgers }),
        })
    }

    /// Conventional base state: still gas at unit density, zero for the rest.
    pub fn default_state(&self) -> State {
        match self {
            SystemFixture::Isentropic { .. } => State::from_vec(vec![1.0, 0.0]),
            SystemFixture::Euler3 { gamma } => Euler3 { gamma: *gamma }.from_primitive(1.0, 0.0, 1.0),
            SystemFixture::Linear { diagonal } => State::zeros(diagonal.len()),
            SystemFixture::Burgers => State::from_element(1, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Forwards only the flux, so every derivative goes through the
    /// finite-difference and numeric-eigen paths.
    struct Opaque<S>(S);

    impl<S: HyperbolicSystem> HyperbolicSystem for Opaque<S> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn name(&self) -> String {
            format!("opaque {}", self.0.name())
        }
        fn flux(&self, u: &State) -> State {
            self.0.flux(u)
        }
        fn in_domain(&self, u: &State) -> bool {
            self.0.in_domain(u)
        }
    }

    fn v(xs: &[f64]) -> State {
        State::from_column_slice(xs)
    }

    fn gas() -> Isentropic {
        Isentropic::new(1.4)
    }

    fn u0() -> State {
        v(&[1.0, 0.0])
    }

    #[test]
    fn isentropic_gamma_two_speeds() {
        let sys = Isentropic::new(2.0);
        assert_eq!(sys.kappa, 0.125);
        let es = eigen(&sys, &u0()).unwrap();
        assert!((es.lambda(1) + 0.5).abs() < 1e-15);
        assert!((es.lambda(2) - 0.5).abs() < 1e-15);
        let numeric = eigen(&Opaque(sys), &u0()).unwrap();
        // characteristic polynomial λ² − tr A λ + det A of the FD Jacobian
        let a = fd_jacobian(&sys, &u0());
        let (tr, det) = (a.trace(), a.determinant());
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert!((numeric.lambda(1) - 0.5 * (tr - disc)).abs() < 1e-9);
        assert!((numeric.lambda(1) + 0.5).abs() < 1e-8);
        assert!((numeric.lambda(2) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn diagonal_linear_system() {
        let sys = LinearSystem::diagonal(&[1.0, 2.0]);
        let es = eigen(&sys, &v(&[0.3, -0.2])).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0]);
        assert!((es.r(1) - v(&[1.0, 0.0])).norm() < 1e-14);
        assert!((es.r(2) - v(&[0.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn gap_violation_is_reported() {
        let sys = LinearSystem::diagonal(&[1.0, 1.0]);
        match eigen(&sys, &v(&[0.0, 0.0])) {
            Err(Error::StrictHyperbolicity { state, .. }) => assert_eq!(state, vec![0.0, 0.0]),
            other => panic!("expected gap error, got {other:?}"),
        }
    }

    #[test]
    fn euler_middle_speed_is_velocity() {
        let sys = Euler3 { gamma: 1.4 };
        let u = sys.from_primitive(0.8, 0.3, 1.2);
        let es = eigen(&sys, &u).unwrap();
        assert!((es.lambda(2) - 0.3).abs() < 1e-14);
        let numeric = eigen(&Opaque(sys), &u).unwrap();
        for k in 0..3 {
            assert!((numeric.values[k] - es.values[k]).abs() < 1e-8);
        }
        let a = sys.jacobian(&u);
        assert!((a - fd_jacobian(&sys, &u)).norm() < 1e-8);
    }

    #[test]
    fn eigenresidual_at_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gas = gas();
        let euler = Euler3 { gamma: 1.4 };
        for _ in 0..1000 {
            let u = v(&[rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0)]);
            let es = eigen(&gas, &u).unwrap();
            let a = gas.jacobian(&u);
            for i in 1..=2 {
                let res = (&a * es.r(i) - es.r(i) * es.lambda(i)).norm();
                assert!(res <= 1e-9 * es.jacobian_norm);
            }
            let w = euler.from_primitive(rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
            let es = eigen(&euler, &w).unwrap();
            let a = euler.jacobian(&w);
            for i in 1..=3 {
                let res = (&a * es.r(i) - es.r(i) * es.lambda(i)).norm();
                assert!(res <= 1e-9 * es.jacobian_norm);
            }
        }
    }

    #[test]
    fn gnl_normalization_matches_directional_difference() {
        let sys = gas();
        let u = v(&[1.3, 0.4]);
        for i in 1..=2 {
            let r = normalized_r(&sys, &u, i).unwrap();
            let h = 1e-6;
            let d = (lambda(&sys, &(&u + &r * h), i).unwrap() - lambda(&sys, &(&u - &r * h), i).unwrap()) / (2.0 * h);
            assert!((d - 1.0).abs() < 1e-6, "field {i}: {d}");
        }
    }

    fn samples(n: usize, f: impl Fn(&mut ChaCha8Rng) -> State) -> Vec<State> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (0..n).map(|_| f(&mut rng)).collect()
    }

    #[test]
    fn field_classes() {
        let gas = gas();
        let s = samples(200, |r| v(&[r.gen_range(0.2..3.0), r.gen_range(-2.0..2.0)]));
        for i in 1..=2 {
            assert_eq!(classify_field(&gas, i, &s).unwrap().class, FieldClass::GenuinelyNonlinear);
        }
        let euler = Euler3 { gamma: 1.4 };
        let s3 = samples(200, |r| euler.from_primitive(r.gen_range(0.2..3.0), r.gen_range(-2.0..2.0), r.gen_range(0.2..3.0)));
        assert_eq!(classify_field(&euler, 2, &s3).unwrap().class, FieldClass::LinearlyDegenerate);
        assert_eq!(classify_field(&euler, 1, &s3).unwrap().class, FieldClass::GenuinelyNonlinear);
        let lin = LinearSystem::diagonal(&[1.0, 2.0]);
        for i in 1..=2 {
            assert_eq!(classify_field(&lin, i, &s).unwrap().class, FieldClass::LinearlyDegenerate);
        }
        assert!(classify_field(&gas, 1, &s[..50]).is_err());
    }

    #[test]
    fn rarefaction_parametrization_and_riemann_invariant() {
        let sys = gas();
        assert_eq!(rarefaction(&sys, &u0(), 1, 0.0).unwrap().state, u0());
        let lam0 = lambda(&sys, &u0(), 1).unwrap();
        let p = rarefaction(&sys, &u0(), 1, 0.05).unwrap();
        assert!((lambda(&sys, &p.state, 1).unwrap() - lam0 - 0.05).abs() < 1e-8);
        // u + 2c/(γ−1) is constant along 1-rarefactions; c0 = 0.2 at ϱ = 1
        for &sigma in &[-0.1, -0.03, 0.02, 0.1] {
            let p = rarefaction(&sys, &u0(), 1, sigma).unwrap();
            let c = (1.0 - lam0 - sigma) / 6.0;
            let vel = lam0 + sigma + c;
            let rho = (c / 0.2).powi(5);
            let exact = v(&[rho, rho * vel]);
            assert!((p.state - exact).norm() < 1e-7, "sigma={sigma}");
        }
    }

    #[test]
    fn shock_branch_residuals() {
        let sys = gas();
        let lam0 = lambda(&sys, &u0(), 1).unwrap();
        let s0 = shock(&sys, &u0(), 1, 0.0).unwrap();
        assert_eq!(s0.state, u0());
        assert_eq!(s0.speed, Some(lam0));
        for k in -20..=20 {
            let sigma = 0.005 * k as f64;
            if k == 0 {
                continue;
            }
            for i in 1..=2 {
                let p = shock(&sys, &u0(), i, sigma).unwrap();
                assert!(p.rh_residual <= 1e-10, "sigma={sigma} rh={}", p.rh_residual);
                let li = lambda(&sys, &u0(), i).unwrap();
                assert!((lambda(&sys, &p.state, i).unwrap() - li - sigma).abs() <= 1e-8);
                let back = shock(&sys, &p.state, i, -sigma).unwrap();
                assert!((back.state - u0()).norm() <= 1e-8);
            }
        }
        let _ = lam0;
    }

    #[test]
    fn shock_and_rarefaction_have_second_order_contact() {
        let sys = gas();
        let mut pts = Vec::new();
        for k in 0..=8 {
            let sigma = 1e-3 * 10f64.powf(2.0 * k as f64 / 8.0);
            let s = shock(&sys, &u0(), 1, -sigma).unwrap().state;
            let r = rarefaction(&sys, &u0(), 1, -sigma).unwrap().state;
            pts.push((sigma.ln(), (s - r).norm().ln()));
        }
        let slope = crate::flux::least_squares_slope(&pts).unwrap();
        assert!(slope >= 2.7, "slope {slope}");
    }

    #[test]
    fn composite_and_admissibility() {
        let sys = gas();
        assert_eq!(composite_curve(&sys, &u0(), 1, 0.0).unwrap().state, u0());
        let neg = composite_curve(&sys, &u0(), 1, -0.02).unwrap();
        assert_eq!(neg.kind, CurveKind::Composite);
        assert!(lax_admissible(&sys, &u0(), &neg.state, neg.speed.unwrap(), 1).unwrap().admissible);
        let pos = composite_curve(&sys, &u0(), 1, 0.02).unwrap();
        assert!(pos.speed.is_none());
        assert!((lambda(&sys, &pos.state, 1).unwrap() - lambda(&sys, &u0(), 1).unwrap() - 0.02).abs() < 1e-8);

        let s = shock(&sys, &u0(), 1, -0.05).unwrap();
        let chk = lax_admissible(&sys, &u0(), &s.state, s.speed.unwrap(), 1).unwrap();
        assert!(chk.admissible && chk.left_margin > 0.0 && chk.right_margin > 0.0);
        let s = shock(&sys, &u0(), 1, 0.05).unwrap();
        assert!(!lax_admissible(&sys, &u0(), &s.state, s.speed.unwrap(), 1).unwrap().admissible);

        let (lam, res) = shock_speed(&sys, &u0(), &shock(&sys, &u0(), 1, -0.05).unwrap().state).unwrap();
        assert!(res <= 1e-10);
        let st = shock(&sys, &u0(), 1, -0.05).unwrap().state;
        assert!(lambda(&sys, &st, 1).unwrap() < lam && lam < lambda(&sys, &u0(), 1).unwrap());
    }

    #[test]
    fn euler_contact_is_admissible_with_zero_margins() {
        let sys = Euler3 { gamma: 1.4 };
        let base = sys.from_primitive(1.0, 0.2, 1.0);
        let c = contact_curve(&sys, &base, 2, 0.3).unwrap();
        assert!((sys.pressure(&c.state) - 1.0).abs() < 1e-12);
        assert!((c.state[1] / c.state[0] - 0.2).abs() < 1e-12);
        assert!(((&c.state - &base).norm() - 0.3).abs() < 1e-12);
        let (speed, res) = shock_speed(&sys, &base, &c.state).unwrap();
        assert!(res < 1e-12);
        let chk = lax_admissible(&sys, &base, &c.state, speed, 2).unwrap();
        assert!(chk.admissible);
        assert!(chk.left_margin.abs() < 1e-12 && chk.right_margin.abs() < 1e-12);
        assert!(contact_curve(&sys, &base, 1, 0.1).is_err());
    }

    #[test]
    fn scalar_embedding_chord_speed() {
        let sys = ScalarSystem { flux: Flux::Burgers };
        let (s, res) = shock_speed(&sys, &v(&[1.0]), &v(&[0.0])).unwrap();
        assert!((s - 0.5).abs() < 1e-15 && res < 1e-15);
        assert!(shock_speed(&sys, &v(&[1.0]), &v(&[1.0])).is_err());
        let p = shock(&sys, &v(&[1.0]), 1, -0.4).unwrap();
        assert!((p.state[0] - 0.6).abs() < 1e-12);
        assert!((p.speed.unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn continuation_is_deterministic_and_range_reported() {
        let sys = gas();
        let a = shock(&sys, &u0(), 1, -0.07).unwrap();
        let b = shock(&sys, &u0(), 1, -0.07).unwrap();
        assert_eq!(a.state.as_slice(), b.state.as_slice());
        assert_eq!(a.speed.unwrap().to_bits(), b.speed.unwrap().to_bits());
        let range = continuation_range(&sys, &u0(), 1, 0.2, 0.05).unwrap();
        assert!(range.working >= 0.1 - 1e-12, "{range:?}");
    }

    #[test]
    fn leaving_the_domain_is_a_continuation_error() {
        let sys = gas();
        // the 1-rarefaction from (1,0) reaches vacuum at λ1 = 1
        match rarefaction(&sys, &u0(), 1, 1.5) {
            Err(Error::Continuation { last_good, .. }) => assert!(last_good > 1.0 && last_good < 1.2 + 1e-12),
            other => panic!("expected continuation error, got {other:?}"),
        }
    }

    #[test]
    fn fixtures_build() {
        for f in [
            SystemFixture::Isentropic { gamma: 1.4 },
            SystemFixture::Euler3 { gamma: 1.4 },
            SystemFixture::Linear { diagonal: vec![1.0, 2.0] },
            SystemFixture::Burgers,
        ] {
            let sys = f.build().unwrap();
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<SystemFixture>(&json).unwrap(), f);
            eigen(sys.as_ref(), &f.default_state()).unwrap();
        }
        assert!(SystemFixture::Isentropic { gamma: 1.0 }.build().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn retrace_identity(sigma in -0.1f64..0.1, field in 1usize..=2) {
            let sys = gas();
            let p = shock(&sys, &u0(), field, sigma).unwrap();
            let back = shock(&sys, &p.state, field, -sigma).unwrap();
            prop_assert!((back.state - u0()).norm() <= 1e-8);
            prop_assert!(p.rh_residual <= 1e-10);
        }

        #[test]
        fn rarefaction_reverses(sigma in -0.1f64..0.1) {
            let sys = gas();
            let p = rarefaction(&sys, &u0(), 2, sigma).unwrap();
            let back = rarefaction(&sys, &p.state, 2, -sigma).unwrap();
            prop_assert!((back.state - u0()).norm() <= 1e-9);
        }
    }
}
