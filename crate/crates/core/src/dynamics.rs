//! Maps on quaternion states and the orbits they generate.
//!
//! * [`map_s`]: the purification step (entrywise squaring of `ρ`),
//! * [`map_u`]: the Hamiltonian evolution `U ρ U†` as a quaternionic Möbius map,
//! * [`map_d`]: pure dephasing, a right rotation by `e^{ȷθ}`,
//! * [`map_du`]: the quaternionic generalisation of `u` that also decoheres.
//!
//! A [`System`] composes them into one iteration step: `d∘u∘s` for the dephasing
//! family and `p∘du∘s` for the `du` family, `p` being [`project_p`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quat::{Axis, Quaternion};
use crate::qubit_state::{observables, polar_decompose, project_p, rho_of, Observables};

/// Beyond this norm `u` and `du` are replaced by their `|ζ| → ∞` limits.
pub const R_MAX: f64 = 1e15;

/// Relative threshold for the `0/0` branch of [`map_s`].
pub const EPS_S: f64 = 1e-12;

/// Relative threshold for the pure-state branch of [`map_d`].
pub const EPS_D: f64 = 1e-12;

/// Denominators below this norm are poles.
pub const POLE_TOL: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub alpha: f64,
    /// Decoherence rate per step, `0 ≤ β < 1`.
    pub beta: f64,
    pub p: Complex64,
}

impl DephasingParams {
    pub fn new(alpha: f64, beta: f64, p: Complex64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        if !alpha.is_finite() || !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::InvalidParameter("alpha and p must be finite".into()));
        }
        Ok(Self { alpha, beta, p })
    }
}

/// Which angle sits in the middle factor of the `du` denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuInverseFactor {
    /// `e^{−kγ} e^{−ȷβ} e^{−ıα}`, the exact inverse of the numerator rotation.
    #[default]
    Inverse,
    /// `e^{−kγ} e^{−ȷγ} e^{−ıα}`, read literally from the printed formula.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub q: Quaternion,
    pub inverse_factor: DuInverseFactor,
}

impl DuParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, q: Quaternion) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParameter(
                "du parameters must be finite".into(),
            ));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            q,
            inverse_factor: DuInverseFactor::Inverse,
        })
    }

    pub fn with_inverse_factor(mut self, f: DuInverseFactor) -> Self {
        self.inverse_factor = f;
        self
    }

    /// `e^{ıα} e^{ȷβ} e^{kγ}`.
    pub fn rotation(&self) -> Quaternion {
        Quaternion::unit_exp(Axis::I, self.alpha)
            * Quaternion::unit_exp(Axis::J, self.beta)
            * Quaternion::unit_exp(Axis::K, self.gamma)
    }

    /// `e^{−kγ} e^{−ȷβ} e^{−ıα}` (or its literal variant).
    pub fn counter_rotation(&self) -> Quaternion {
        let middle = match self.inverse_factor {
            DuInverseFactor::Inverse => self.beta,
            DuInverseFactor::Literal => self.gamma,
        };
        Quaternion::unit_exp(Axis::K, -self.gamma)
            * Quaternion::unit_exp(Axis::J, -middle)
            * Quaternion::unit_exp(Axis::I, -self.alpha)
    }
}

/// One iteration rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    /// `d∘u∘s`.
    Dephasing(DephasingParams),
    /// `p∘du∘s`.
    Du(DuParams),
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Dephasing(_) => "dephasing",
            System::Du(_) => "du",
        }
    }
}

/// Purification step.
///
/// On the aligned representative `ζ = a + ıb + ȷc + kd` this is
/// `(Co ζ)² + ȷ Im₂((ζ − Co ζ) Co ζ) + k |ζ|² Im₂ζ / |Re ζ + ȷ Im₂ζ|`.
/// Where the last denominator vanishes the result is completed as `w e^{ȷμ}` with
/// `w = z²` and `cos μ = cos² λ`, which represents the same density matrix.
pub fn map_s(zeta: &Quaternion) -> Quaternion {
    let q = project_p(zeta);
    let n = q.norm();
    if n == 0.0 {
        return Quaternion::ZERO;
    }
    let den = q.a.hypot(q.c);
    if den > 0.0 && den >= EPS_S * n {
        let n2 = q.norm_sqr();
        Quaternion::new(
            q.a * q.a - q.b * q.b,
            2.0 * q.a * q.b,
            q.c * q.a + q.d * q.b,
            n2 * q.c / den,
        )
    } else {
        let s = polar_decompose(&q);
        let w = s.z * s.z;
        let cos_l = s.lambda.cos();
        let cos_mu = cos_l * cos_l;
        let sin_mu = (1.0 - cos_mu * cos_mu).max(0.0).sqrt();
        Quaternion::new(w.re * cos_mu, w.im * cos_mu, w.re * sin_mu, w.im * sin_mu)
    }
}

/// Hamiltonian evolution `(e^{ıα}ζ + p)(e^{−ıα} − p̄ζ)⁻¹`.
///
/// For `|ζ| > R_MAX` returns the limit `−e^{ıα} p/|p|²`; with `p = 0` there is no
/// finite limit and [`Error::Unbounded`] is returned.
pub fn map_u(zeta: &Quaternion, alpha: f64, p: Complex64) -> Result<Quaternion> {
    let e = Quaternion::unit_exp(Axis::I, alpha);
    let pq = Quaternion::from_complex(p);
    if !(zeta.norm() <= R_MAX) {
        let p2 = p.norm_sqr();
        if p2 == 0.0 {
            return Err(Error::Unbounded);
        }
        return Ok(-(e * pq).scale(1.0 / p2));
    }
    let num = e * *zeta + pq;
    let den = e.conj() - pq.conj() * *zeta;
    mobius_quotient(num, den)
}

fn mobius_quotient(num: Quaternion, den: Quaternion) -> Result<Quaternion> {
    let dn = den.norm();
    if dn < POLE_TOL {
        return Err(Error::Pole(dn));
    }
    Ok(num * den.inv()?)
}

/// Pure dephasing `ζ e^{ȷθ}` with `θ = β|Co ζ|/|ζ − Co ζ|`, or `θ = √(2β)` for
/// pure states. Acts on the aligned representative, so `λ` grows by `θ`.
pub fn map_d(zeta: &Quaternion, beta: f64) -> Quaternion {
    let q = project_p(zeta);
    let n = q.norm();
    if n == 0.0 {
        return Quaternion::ZERO;
    }
    let r = q.jk_norm();
    let theta = if r > 0.0 && r >= EPS_D * n {
        beta * q.co_norm() / r
    } else {
        (2.0 * beta).sqrt()
    };
    q * Quaternion::unit_exp(Axis::J, theta)
}

/// `(e^{ıα}e^{ȷβ}e^{kγ}ζ + q)(e^{−kγ}e^{−ȷβ}e^{−ıα} − q̄ζ)⁻¹`.
///
/// For `|ζ| > R_MAX` returns `−e^{ıα}e^{ȷβ}e^{kγ} q̄⁻¹`.
pub fn map_du(zeta: &Quaternion, prm: &DuParams) -> Result<Quaternion> {
    let rot = prm.rotation();
    if !(zeta.norm() <= R_MAX) {
        let qbar = prm.q.conj();
        if qbar.norm_sqr() == 0.0 {
            return Err(Error::Unbounded);
        }
        return Ok(-(rot * qbar.inv()?));
    }
    let num = rot * *zeta + prm.q;
    let den = prm.counter_rotation() - prm.q.conj() * *zeta;
    mobius_quotient(num, den)
}

/// Result of one iteration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Next(Quaternion),
    /// The state ran into `|0⟩⟨0|` (`|ζ| = ∞`) with no finite continuation.
    Absorbed,
}

pub fn step(zeta: &Quaternion, system: &System) -> StepOutcome {
    let s = map_s(zeta);
    let next = match system {
        System::Dephasing(prm) => map_u(&s, prm.alpha, prm.p).map(|u| map_d(&u, prm.beta)),
        System::Du(prm) => map_du(&s, prm).map(|du| project_p(&du)),
    };
    match next {
        Ok(z) => StepOutcome::Next(z),
        Err(_) => StepOutcome::Absorbed,
    }
}

/// `(z² e^{ıα} + p)/(e^{−ıα} − p̄ z²)`, evaluated in the same operation order as the
/// quaternion path so that complex orbits agree bit for bit.
pub fn f_complex(z: Complex64, alpha: f64, p: Complex64) -> Result<Complex64> {
    let e = Complex64::from_polar(1.0, alpha);
    let sq = Complex64::new(z.re * z.re - z.im * z.im, 2.0 * z.re * z.im);
    let num = e * sq + p;
    let den = e.conj() - p.conj() * sq;
    let dn = den.norm();
    if dn < POLE_TOL {
        return Err(Error::Pole(dn));
    }
    let inv = den.conj() * (1.0 / den.norm_sqr());
    Ok(num * inv)
}

/// `ζ₀ … ζ_N` with the observables of each state.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    pub states: Vec<Quaternion>,
    pub observables: Vec<Observables>,
    /// Step at which the orbit was absorbed into `|0⟩⟨0|`; states stop there.
    pub diverged_at: Option<usize>,
    /// Number of steps requested.
    pub steps: usize,
}

impl OrbitRecord {
    pub fn last(&self) -> &Quaternion {
        self.states
            .last()
            .expect("orbit always holds its initial state")
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().all(Quaternion::is_finite)
    }

    /// Purity of the final state; `1` for absorbed orbits.
    pub fn final_purity(&self) -> f64 {
        if self.diverged_at.is_some() {
            1.0
        } else {
            self.observables.last().map_or(f64::NAN, |o| o.purity)
        }
    }
}

pub fn iterate(zeta0: Quaternion, system: &System, steps: usize) -> OrbitRecord {
    let mut states = Vec::with_capacity(steps + 1);
    let mut obs = Vec::with_capacity(steps + 1);
    states.push(zeta0);
    obs.push(observables(&zeta0));
    let mut diverged_at = None;
    let mut z = zeta0;
    if z.is_finite() {
        for n in 1..=steps {
            match step(&z, system) {
                StepOutcome::Next(next) => {
                    z = next;
                    states.push(z);
                    obs.push(observables(&z));
                    if !z.is_finite() {
                        break;
                    }
                }
                StepOutcome::Absorbed => {
                    diverged_at = Some(n);
                    break;
                }
            }
        }
    }
    OrbitRecord {
        states,
        observables: obs,
        diverged_at,
        steps,
    }
}

/// Distance used to decide that an orbit has returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleMetric {
    /// Euclidean distance of the quaternions.
    #[default]
    Quaternion,
    /// Max-entry distance of the density matrices; blind to the representative.
    DensityMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleCriterion {
    pub max_period: usize,
    pub tol: f64,
    pub metric: CycleMetric,
}

impl Default for CycleCriterion {
    fn default() -> Self {
        Self {
            max_period: 5,
            tol: 1e-4,
            metric: CycleMetric::Quaternion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cycle {
    pub period: usize,
    /// Iterations needed to reach the cycle.
    pub entry_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleReport {
    pub cycle: Option<Cycle>,
    pub metric: CycleMetric,
    pub tol: f64,
}

impl CycleReport {
    pub fn found(&self) -> bool {
        self.cycle.is_some()
    }
}

/// Earliest index from which the orbit returns to itself after some period
/// `T ≤ max_period`, within `tol`, for every remaining recorded step.
///
/// Candidates must start no later than `N − max_period`. An absorbed orbit sits
/// on the `|0⟩⟨0|` fixed point from its absorption step on.
pub fn detect_cycle(orbit: &OrbitRecord, crit: &CycleCriterion) -> CycleReport {
    let report = |cycle| CycleReport {
        cycle,
        metric: crit.metric,
        tol: crit.tol,
    };
    if let Some(n) = orbit.diverged_at {
        return report(Some(Cycle {
            period: 1,
            entry_index: n,
        }));
    }
    let len = orbit.states.len();
    if crit.max_period == 0 || len < crit.max_period + 1 {
        return report(None);
    }
    let last = len - 1;
    let latest_entry = last - crit.max_period;

    let rhos: Vec<_> = match crit.metric {
        CycleMetric::DensityMatrix => orbit.states.iter().map(rho_of).collect(),
        CycleMetric::Quaternion => Vec::new(),
    };
    let dist = |i: usize, j: usize| match crit.metric {
        CycleMetric::Quaternion => orbit.states[i].dist(&orbit.states[j]),
        CycleMetric::DensityMatrix => rhos[i].max_entry_dist(&rhos[j]),
    };

    let mut best: Option<Cycle> = None;
    for period in 1..=crit.max_period {
        let last_fail = (0..=last - period)
            .rev()
            .find(|&m| !(dist(m + period, m) < crit.tol));
        let entry = last_fail.map_or(0, |m| m + 1);
        if entry > latest_entry {
            continue;
        }
        if best.is_none_or(|b| entry < b.entry_index) {
            best = Some(Cycle {
                period,
                entry_index: entry,
            });
        }
    }
    report(best)
}

/// Which process wins on a given orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Purification,
    Decoherence,
    Unresolved,
}

impl Regime {
    /// Gray level used in class rasters.
    pub fn gray(&self) -> u8 {
        match self {
            Regime::Purification => 255,
            Regime::Decoherence => 0,
            Regime::Unresolved => 128,
        }
    }
}

/// Mean purity over the last `window` states compared with `threshold`.
/// Absorbed orbits end on a pure state and count as purification.
pub fn classify(orbit: &OrbitRecord, window: usize, threshold: f64) -> Regime {
    if orbit.diverged_at.is_some() {
        return Regime::Purification;
    }
    if !orbit.is_finite() {
        return Regime::Unresolved;
    }
    let w = window.clamp(1, orbit.observables.len());
    let tail = &orbit.observables[orbit.observables.len() - w..];
    let mean = tail.iter().map(|o| o.purity).sum::<f64>() / w as f64;
    if !mean.is_finite() {
        Regime::Unresolved
    } else if mean >= threshold {
        Regime::Purification
    } else {
        Regime::Decoherence
    }
}
