//! The quaternion ↔ qubit mixed-state dictionary.
//!
//! A quaternion `ζ` stands for the density matrix
//!
//! ```text
//! ρ(ζ) = 1/(1+|ζ|²) · [[ |ζ|²,  Co ζ ],
//!                      [ Co ζ̄,  1    ]]
//! ```
//!
//! so only `Co ζ` and `|ζ|` matter: every `ζ` with the same complex part and norm
//! is the same state. The aligned representative `z e^{ȷλ} = z cos λ + ȷ z̄ sin λ`,
//! with `λ ∈ [0, π/2]`, is picked by [`project_p`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::reference_oracle::DensityMatrix;

/// Scale-relative threshold below which `Co ζ` counts as zero.
pub fn co_zero_tol(zeta: &Quaternion) -> f64 {
    1e-12 * zeta.norm().max(1.0)
}

/// `ζ = z e^{ȷλ}` with `λ ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub z: Complex64,
    pub lambda: f64,
}

impl PolarState {
    /// Builds a state, folding `λ` into `[0, π/2]`. Angles outside that range are
    /// mapped to the representative with the same density matrix, absorbing a sign
    /// into `z` when needed.
    pub fn new(z: Complex64, lambda: f64) -> Self {
        // reduce to (-π, π]
        let mut l = lambda.rem_euclid(2.0 * PI);
        if l > PI {
            l -= 2.0 * PI;
        }
        l = l.abs();
        let mut z = z;
        if l > FRAC_PI_2 {
            l = PI - l;
            z = -z;
        }
        Self { z, lambda: l }
    }
}

/// Populations, coherence and purity of `ρ(ζ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// `⟨0|ρ|0⟩ = |ζ|²/(1+|ζ|²)`.
    pub population: f64,
    /// `|ρ₀₁| = |Co ζ|/(1+|ζ|²)`.
    pub coherence: f64,
    /// `|Co ζ|`, unnormalised.
    pub coherence_raw: f64,
    /// `tr ρ² = (|ζ|⁴ + 2|Co ζ|² + 1)/(1+|ζ|²)²`.
    pub purity: f64,
    /// `|ζ − Co ζ|²`.
    pub concurrence_sq: f64,
}

/// Returns `(ρ₀₀, |ρ₀₁|/|Co ζ| scale factor, ρ₁₁)` without overflowing for huge `|ζ|`.
fn diag_and_offdiag_scale(zeta: &Quaternion) -> (f64, f64, f64) {
    let n = zeta.norm();
    if n <= 1.0 {
        let n2 = n * n;
        let den = 1.0 + n2;
        (n2 / den, 1.0 / den, 1.0 / den)
    } else {
        let t = 1.0 / n;
        let t2 = t * t;
        let den = 1.0 + t2;
        // 1/(1+n²) = t²/(1+t²)
        (1.0 / den, t2 / den, t2 / den)
    }
}

/// `ρ(ζ)`.
pub fn rho_of(zeta: &Quaternion) -> DensityMatrix {
    let (r00, scale, r11) = diag_and_offdiag_scale(zeta);
    DensityMatrix::new(r00, zeta.co() * scale, r11)
}

pub fn observables(zeta: &Quaternion) -> Observables {
    let (r00, scale, r11) = diag_and_offdiag_scale(zeta);
    let co = zeta.co_norm();
    let coherence = co * scale;
    let jk = zeta.jk_norm();
    Observables {
        population: r00,
        coherence,
        coherence_raw: co,
        purity: r00 * r00 + r11 * r11 + 2.0 * coherence * coherence,
        concurrence_sq: jk * jk,
    }
}

/// Purity only; same value as `observables(ζ).purity`.
pub fn purity(zeta: &Quaternion) -> f64 {
    observables(zeta).purity
}

/// Maps `ζ` to the aligned representative of its density matrix:
/// `Co ζ + (|ζ − Co ζ|/|Co ζ|)·Co ζ·ȷ`. Inputs with `Co ζ ≈ 0` are returned as is.
pub fn project_p(zeta: &Quaternion) -> Quaternion {
    let co = zeta.co_norm();
    if co <= co_zero_tol(zeta) {
        return *zeta;
    }
    let f = zeta.jk_norm() / co;
    Quaternion::new(zeta.a, zeta.b, f * zeta.a, f * zeta.b)
}

/// `(z, λ)` of the aligned representative of `ζ`.
///
/// `ζ = 0` decomposes as `z = 0, λ = 0`; states with `Co ζ = 0` get `λ = π/2`
/// and `z = Im₂ ζ + ı Im₃ ζ`.
pub fn polar_decompose(zeta: &Quaternion) -> PolarState {
    let q = project_p(zeta);
    let n = q.norm();
    if n == 0.0 {
        return PolarState {
            z: Complex64::new(0.0, 0.0),
            lambda: 0.0,
        };
    }
    let co = q.co_norm();
    if co <= co_zero_tol(&q) {
        return PolarState {
            z: Complex64::new(q.c, q.d),
            lambda: FRAC_PI_2,
        };
    }
    let lambda = q.jk_norm().atan2(co);
    PolarState {
        z: q.co() * (n / co),
        lambda,
    }
}

/// `z cos λ + ȷ z̄ sin λ`.
pub fn from_polar(s: &PolarState) -> Quaternion {
    let s = PolarState::new(s.z, s.lambda);
    let (sl, cl) = s.lambda.sin_cos();
    // ȷ z̄ = Re z ȷ + Im z k
    Quaternion::new(s.z.re * cl, s.z.im * cl, s.z.re * sl, s.z.im * sl)
}

/// Aligned state with complex part `w` and `|ζ − Co ζ| = jk_norm`.
///
/// This is the closed form of `from_polar` used for seeding scans:
/// `w + (jk_norm/|w|)·w·ȷ`, and `jk_norm·ȷ` when `w = 0`.
pub fn aligned_state(w: Complex64, jk_norm: f64) -> Quaternion {
    let m = w.norm();
    if jk_norm == 0.0 {
        return Quaternion::from_complex(w);
    }
    if m == 0.0 {
        return Quaternion::new(0.0, 0.0, jk_norm, 0.0);
    }
    let f = jk_norm / m;
    Quaternion::new(w.re, w.im, f * w.re, f * w.im)
}

/// Level splitting `ω`, transverse coupling `b` and step `Δt` of the qubit Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub omega: f64,
    pub b: Complex64,
    pub dt: f64,
}

/// Evolution-operator angles and the resulting map parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    pub alpha: f64,
    pub p: Complex64,
    pub x: f64,
    pub phi: f64,
    pub r: f64,
}

impl HamiltonianSpec {
    pub fn new(omega: f64, b: Complex64, dt: f64) -> Self {
        Self { omega, b, dt }
    }

    /// `(α, p)` of the one-step evolution.
    ///
    /// `r = √(ω²+|b|²)`, `tan x = |b| sin(rΔt/2) / √(|b|² cos²(rΔt/2) + ω²)`,
    /// `α` on the branch of `tan α = −(ω/r) tan(rΔt/2)` continuous in `Δt` with
    /// `α(0) = 0`, `φ = arg b − π/4` and `p = e^{ıφ} tan x`.
    pub fn evolution(&self) -> Result<EvolutionParams> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let bn = self.b.norm();
        let r = self.omega.hypot(bn);
        if r == 0.0 {
            return Ok(EvolutionParams {
                alpha: 0.0,
                p: Complex64::new(0.0, 0.0),
                x: 0.0,
                phi: -FRAC_PI_4,
                r,
            });
        }
        let (sh, ch) = (0.5 * r * self.dt).sin_cos();
        let den = (bn * bn * ch * ch + self.omega * self.omega).sqrt();
        if den == 0.0 {
            return Err(Error::InvalidParameter(
                "evolution exchanges |0> and |1>; tan x is infinite".into(),
            ));
        }
        let tan_x = bn * sh / den;
        let x = tan_x.atan();
        let alpha = (-(self.omega / r) * sh).atan2(ch);
        let phi = self.b.arg() - FRAC_PI_4;
        Ok(EvolutionParams {
            alpha,
            p: Complex64::from_polar(tan_x, phi),
            x,
            phi,
            r,
        })
    }
}
