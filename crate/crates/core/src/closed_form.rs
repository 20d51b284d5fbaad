//! Explicit scattering data for three exactly solvable initial profiles: the sech soliton,
//! the dark-soliton kink at finite density (defocusing) and the finite-density focusing
//! breather-like profile 1 − iA sech(Ax).
//!
//! The coupling argument is a general complex number here: the formulas are analytic in c
//! and are evaluated off the physical rays on purpose.
//!
//! Normalization: the plain functions return b as printed. Against the unit-determinant
//! data computed by direct scattering, that b is short by a factor c (sech), g (dark
//! background, c = ig) or α = (cρ/μ) sin(θ/2) (kink). The `_normalized` variants apply it.

use crate::error::{Error, Result};
use crate::mat2::{C64, I, ONE, ZERO};
use crate::model::{Asymptotics, Coupling, DiscreteEigenvalue, FieldProfile, DEFAULT_BOUNDARY_TOL};
use crate::specfun::{gamma_complex, hyp2f1, rgamma};
use crate::zs;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParamsRd {
    pub amplitude: f64,
    pub velocity: f64,
    pub phase: f64,
    pub shift: f64,
}

impl SolitonParamsRd {
    pub fn new(amplitude: f64, velocity: f64, phase: f64, shift: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(Error::InvalidInput(format!("amplitude {amplitude} must be positive")));
        }
        Ok(SolitonParamsRd { amplitude, velocity, phase, shift })
    }
    /// A = 1, at rest, centred.
    pub fn unit() -> Self {
        SolitonParamsRd { amplitude: 1.0, velocity: 0.0, phase: 0.0, shift: 0.0 }
    }
    /// k₁ = −V/2 + iA/2
    pub fn eigenvalue(&self) -> C64 {
        C64::new(-0.5 * self.velocity, 0.5 * self.amplitude)
    }
}

/// sech of a complex argument via exponentials; zero once the real part overflows.
pub fn sech(z: C64) -> C64 {
    if z.re.abs() > 700.0 {
        return ZERO;
    }
    let w = if z.re < 0.0 { -z } else { z };
    // 2e^{−w}/(1 + e^{−2w}) avoids overflow for large Re w
    let e = (-w).exp();
    2.0 * e / (ONE + e * e)
}

/// A e^{i(Vx+φ₀)} sech(A(x − x₀)) on n points of [−L, L].
pub fn soliton_profile_rd(params: &SolitonParamsRd, half_width: f64, n: usize) -> Result<FieldProfile> {
    let p = *params;
    FieldProfile::from_fn(half_width, n, Asymptotics::Schwartz, DEFAULT_BOUNDARY_TOL, |x| {
        C64::from_polar(p.amplitude, p.velocity * x + p.phase) * sech(C64::new(p.amplitude * (x - p.shift), 0.0))
    })
}

/// sin(iπc)/(ic), with the c → 0 value π.
fn sinc_factor(c: C64) -> C64 {
    if c.norm() < 1e-8 {
        // series: π(1 − (πc)²/6 ...) with sin(iπc)/(ic) = π·sinh(πc)/(πc)
        let z = PI * c;
        return PI * (ONE + z * z / 6.0);
    }
    (I * PI * c).sin() / (I * c)
}

/// (a, b) for the sech profile at coupling c, exactly as printed.
pub fn ab_rapid(k: C64, c: C64, params: &SolitonParamsRd) -> Result<(C64, C64)> {
    let kap = (k + 0.5 * params.velocity) / params.amplitude;
    let g = C64::new(0.5, 0.0) - I * kap;
    let num = gamma_complex(g).map_err(|_| Error::GammaPole(g))?;
    let a = num * num * rgamma(g - I * c) * rgamma(g + I * c);
    let b = -sinc_factor(c) * sech(PI * kap);
    Ok((a, b))
}

/// As [`ab_rapid`] with b multiplied by c, which restores |a|² − (c/c*)|b|² = 1.
/// At c → 0 this is the free limit b/c → −π sech, returned unscaled.
pub fn ab_rapid_normalized(k: C64, c: C64, params: &SolitonParamsRd) -> Result<(C64, C64)> {
    let (a, b) = ab_rapid(k, c, params)?;
    Ok((a, c * b))
}

/// Zeros of the closed-form a at c = iν. `marginal` is set when ν − ½ is an integer, which
/// puts a zero exactly on the real axis; that zero is left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RapidZeros {
    pub zeros: Vec<DiscreteEigenvalue>,
    pub marginal: bool,
}

/// k = −V/2 + iA(ν − n − ½) for every n ≥ 0 with ν − n − ½ > 0.
pub fn zeros_rapid(nu: f64, params: &SolitonParamsRd) -> Result<RapidZeros> {
    if !(nu > 0.0) {
        return Err(Error::InvalidInput(format!("nu = {nu} must be positive")));
    }
    let mut zeros = Vec::new();
    let mut marginal = false;
    for n in 0.. {
        let t = nu - n as f64 - 0.5;
        if t.abs() < 1e-12 {
            marginal = true;
            break;
        }
        if t < 0.0 {
            break;
        }
        zeros.push(DiscreteEigenvalue::new(C64::new(-0.5 * params.velocity, params.amplitude * t), 1)?);
    }
    Ok(RapidZeros { zeros, marginal })
}

/// Φ⁺₂₂ at x = 0 for the sech profile: ₂F₁(ic, −ic; ½ − iκ; ½), κ = (k + V/2)/A.
pub fn rapid_wavefunction_at_origin(k: f64, c: C64, params: &SolitonParamsRd) -> Result<C64> {
    let gamma = C64::new(0.5, 0.0) - I * (k + 0.5 * params.velocity) / params.amplitude;
    hyp2f1(I * c, -I * c, gamma, C64::new(0.5, 0.0))
}

/// Kink parameters: q = ρ(1 + e^{iθ}e^{νx})/(1 + e^{νx}) with ν = 2c₀ρ sin(θ/2), c₀ the
/// defocusing coupling the profile solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParamsFd {
    pub rho: f64,
    pub theta: f64,
    pub c0: f64,
}

impl SolitonParamsFd {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidInput(format!("rho = {rho} must be positive")));
        }
        if !(theta > 0.0 && theta < 2.0 * PI) {
            return Err(Error::DegeneratePhase(format!("theta = {theta} must lie in (0, 2pi)")));
        }
        Ok(SolitonParamsFd { rho, theta, c0: 1.0 })
    }
    pub fn nu(&self) -> f64 {
        2.0 * self.c0 * self.rho * (0.5 * self.theta).sin()
    }
    pub fn velocity(&self) -> f64 {
        -2.0 * self.c0 * self.rho * (0.5 * self.theta).cos()
    }
    pub fn asymptotics(&self) -> Asymptotics {
        Asymptotics::FiniteDensity { rho: self.rho, theta: self.theta }
    }
}

pub fn soliton_profile_fd_defocusing(params: &SolitonParamsFd, half_width: f64, n: usize) -> Result<FieldProfile> {
    let p = *params;
    let nu = p.nu();
    let tail = C64::from_polar(p.rho, p.theta);
    FieldProfile::from_fn(half_width, n, p.asymptotics(), DEFAULT_BOUNDARY_TOL, |x| {
        // logistic weight written to stay finite at both ends
        let s = 0.5 * (1.0 + (0.5 * nu * x).tanh());
        C64::new(p.rho, 0.0) * (1.0 - s) + tail * s
    })
}

/// β = cos(θ/2) + i(k/μ) sin(θ/2) and μ on the signed branch for coupling c.
fn beta_mu(k: C64, c: C64, params: &SolitonParamsFd) -> Result<(C64, C64)> {
    let m = fd_mu(k, c, params.rho)?;
    let half = 0.5 * params.theta;
    Ok((C64::new(half.cos(), 0.0) + I * k / m * half.sin(), m))
}

/// μ = k√(1 − c²ρ²/k²), continued to complex c.
fn fd_mu(k: C64, c: C64, rho: f64) -> Result<C64> {
    let c2r2 = c * c * rho * rho;
    if (k * k - c2r2).norm() < 1e-13 * (1.0 + c2r2.norm()) {
        return Err(Error::BranchPoint(k));
    }
    if k.norm() == 0.0 {
        return Ok((-c2r2).sqrt());
    }
    Ok(k * (ONE - c2r2 / (k * k)).sqrt())
}

/// (a, b) for the kink at coupling c.
///
/// a uses 1/β where the printed formula has 1/β*, and drops the printed overall minus sign.
/// Both changes are forced by the asymptotic frames: the printed expression tends to
/// −e^{iθ/2} at large k whereas S(k) → e^{iθσ₃/2} gives a → e^{−iθ/2}; with them the formula
/// reproduces the integer-c product formula and the numerically computed a. b is as printed.
pub fn ab_finite_defocusing(k: C64, c: C64, params: &SolitonParamsFd) -> Result<(C64, C64)> {
    let (beta, m) = beta_mu(k, c, params)?;
    let z = 2.0 * I * m / params.nu();
    let g = ONE - z;
    let num = gamma_complex(g).map_err(|_| Error::GammaPole(g))?;
    let a = (z - c) * (z + c) / (beta * z * z) * num * num * rgamma(g - c) * rgamma(g + c);
    let s = 2.0 * PI * m / params.nu();
    let sinc_c = if c.norm() < 1e-8 { ONE } else { (PI * c).sin() / (PI * c) };
    let b = sinc_c * s / s.sinh();
    Ok((a, b))
}

/// As [`ab_finite_defocusing`] with b multiplied by α = (cρ/μ) sin(θ/2).
pub fn ab_finite_defocusing_normalized(k: C64, c: C64, params: &SolitonParamsFd) -> Result<(C64, C64)> {
    let (a, b) = ab_finite_defocusing(k, c, params)?;
    let m = fd_mu(k, c, params.rho)?;
    Ok((a, b * c * params.rho / m * (0.5 * params.theta).sin()))
}

/// The printed kink formula for a, kept for the record (see [`ab_finite_defocusing`]).
pub fn ab_finite_defocusing_as_printed(k: C64, c: C64, params: &SolitonParamsFd) -> Result<C64> {
    let (beta, _) = beta_mu(k, c, params)?;
    let (a, _) = ab_finite_defocusing(k, c, params)?;
    Ok(-a * beta / beta_conj(k, c, params)?)
}

fn beta_conj(k: C64, c: C64, params: &SolitonParamsFd) -> Result<C64> {
    let m = fd_mu(k, c, params.rho)?;
    let half = 0.5 * params.theta;
    Ok(C64::new(half.cos(), 0.0) - I * k / m * half.sin())
}

/// a at integer c = n: (1/β)∏_{m=1}^{n}(2μ − imν)/(2μ + i(m−1)ν).
pub fn a_finite_defocusing_integer(k: C64, n: u32, params: &SolitonParamsFd) -> Result<C64> {
    let (beta, m) = beta_mu(k, C64::new(n as f64, 0.0), params)?;
    let nu = params.nu();
    let prod: C64 = (1..=n).map(|j| (2.0 * m - I * (j as f64) * nu) / (2.0 * m + I * (j as f64 - 1.0) * nu)).product();
    Ok(prod / beta)
}

/// A = Z − 1/Z for Z > 1.
pub fn focusing_amplitude(z: f64) -> Result<f64> {
    if !(z > 1.0) {
        return Err(Error::InvalidInput(format!("Z = {z} must exceed 1")));
    }
    Ok(z - 1.0 / z)
}

/// 1 − iA sech(Ax), density 1, no phase jump.
pub fn profile_fd_focusing(amplitude: f64, half_width: f64, n: usize) -> Result<FieldProfile> {
    let fd = Asymptotics::FiniteDensity { rho: 1.0, theta: 0.0 };
    FieldProfile::from_fn(half_width, n, fd, DEFAULT_BOUNDARY_TOL, |x| {
        ONE - I * amplitude * sech(C64::new(amplitude * x, 0.0))
    })
}

/// (a, b) for 1 − iA sech(Ax) at c = ig, as functions of k through μ² = k² + g².
pub fn ab_finite_focusing(k: C64, g: f64, amplitude: f64) -> Result<(C64, C64)> {
    let c = Coupling::focusing(g)?;
    let m = zs::mu(c, Asymptotics::FiniteDensity { rho: 1.0, theta: 0.0 }, k)?;
    let gm = C64::new(0.5, 0.0) - I * m / amplitude;
    let num = gamma_complex(gm).map_err(|_| Error::GammaPole(gm))?;
    let a = num * num * rgamma(gm - g) * rgamma(gm + g);
    let b = -((PI * g).sin() / g) * sech(PI * m / amplitude);
    Ok((a, b))
}

/// As [`ab_finite_focusing`] with b multiplied by g.
pub fn ab_finite_focusing_normalized(k: C64, g: f64, amplitude: f64) -> Result<(C64, C64)> {
    let (a, b) = ab_finite_focusing(k, g, amplitude)?;
    Ok((a, b * g))
}
