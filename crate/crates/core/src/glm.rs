//! Reconstruction of a rapidly decreasing field from zero-free scattering data: the
//! Neumann series of the GLM equation and its resummed operator (resolvent) form.
//!
//! Conventions, fixed once:
//! * cq(x) = 2K₂(x, x), so the Born term is q = −(2/c)∫(dk/2π) ρ(k) e^{−2ikx};
//! * time enters only through ρ(k, t) = e^{−4ik²t}ρ(k) (see [`crate::quench::evolve_data`]),
//!   with f(k) = e^{−ikx};
//! * the +i0 in 1/(ℓ − k + i0) is discretized either as a shift iε or, by default, as
//!   principal value plus −iπδ on a uniform grid.

use crate::error::{Error, Result};
use crate::mat2::{C64, I};
#[cfg(test)]
use crate::mat2::ZERO;
use crate::model::{Asymptotics, Coupling, FieldProfile, KGrid, Regime, ScatteringData};
use crate::quench::evolution_phase;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// ρ(k) = b/a on a spectral grid, for data whose a(k) has no zeros in the upper half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiativeData {
    pub kgrid: KGrid,
    pub rho: Vec<C64>,
    pub coupling: Coupling,
}

impl RadiativeData {
    pub fn new(kgrid: KGrid, rho: Vec<C64>, coupling: Coupling) -> Result<Self> {
        if rho.len() != kgrid.len() {
            return Err(Error::InvalidInput("rho and kgrid lengths differ".into()));
        }
        Ok(RadiativeData { kgrid, rho, coupling })
    }

    /// Refuses data that still carry discrete eigenvalues.
    pub fn from_scattering(sd: &ScatteringData) -> Result<Self> {
        if !sd.discrete.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} discrete eigenvalue(s) present; the radiative reconstruction needs zero-free data (strip the solitons first)",
                sd.discrete.len()
            )));
        }
        RadiativeData::new(sd.kgrid.clone(), sd.rho(), sd.coupling)
    }

    /// ρ(k, t) = e^{−4ik²t}ρ(k).
    pub fn at_time(&self, t: f64) -> RadiativeData {
        let rho = self.kgrid.samples().iter().zip(&self.rho).map(|(&k, r)| evolution_phase(C64::new(k, 0.0), t) * r).collect();
        RadiativeData { rho, ..self.clone() }
    }
}

/// How 1/(ℓ − k + i0) is put on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRule {
    /// 1/(ℓ − k + iε) with trapezoid weights.
    Shifted,
    /// Principal value (punctured trapezoid with a first-derivative correction) plus −iπδ.
    /// Needs a uniform grid.
    Sokhotski,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventConfig {
    /// Shift for the `Shifted` rule; `None` means the grid spacing.
    pub eps: Option<f64>,
    pub kernel: KernelRule,
    pub neumann_terms: usize,
    /// Early stop once a Neumann term is this small relative to the running sum.
    pub neumann_stop: f64,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        ResolventConfig { eps: None, kernel: KernelRule::Sokhotski, neumann_terms: 12, neumann_stop: 1e-12 }
    }
}

fn weights(ks: &[f64]) -> Vec<f64> {
    let n = ks.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { ks[j] - ks[j - 1] } else { 0.0 };
            let right = if j + 1 < n { ks[j + 1] - ks[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// F(x) = ∫(dk/2π) ρ(k) e^{−ikx}, trapezoid rule.
pub fn f_kernel(rd: &RadiativeData, x: f64) -> C64 {
    let ks = rd.kgrid.samples();
    let w = weights(ks);
    ks.iter().zip(&rd.rho).zip(&w).map(|((&k, r), &wk)| r * (-I * k * x).exp() * wk).sum::<C64>() / (2.0 * PI)
}

/// T[m][ℓ] ≈ weight × 1/(k_ℓ − k_m + i0), independent of x.
fn cauchy_matrix(ks: &[f64], cfg: &ResolventConfig) -> Result<DMatrix<C64>> {
    let n = ks.len();
    match cfg.kernel {
        KernelRule::Shifted => {
            let w = weights(ks);
            let eps = match cfg.eps {
                Some(e) if e > 0.0 => e,
                Some(e) => return Err(Error::InvalidInput(format!("eps = {e} must be positive"))),
                None => (ks[n - 1] - ks[0]) / (n - 1) as f64,
            };
            Ok(DMatrix::from_fn(n, n, |m, l| w[l] / C64::new(ks[l] - ks[m], eps)))
        }
        KernelRule::Sokhotski => {
            let grid = KGrid::from_samples(ks.to_vec())?;
            if grid.uniform_spacing().is_none() {
                return Err(Error::InvalidInput("the Sokhotski kernel needs a uniform k-grid".into()));
            }
            Ok(DMatrix::from_fn(n, n, |m, l| {
                let j = l as i64 - m as i64;
                match j {
                    0 => C64::new(0.0, -PI),
                    // the dropped j = 0 trapezoid node is h·g′(k_m) ≈ (g(k+h) − g(k−h))/2
                    1 => C64::new(if m > 0 { 1.5 } else { 1.0 }, 0.0),
                    -1 => C64::new(if m + 1 < n { -1.5 } else { -1.0 }, 0.0),
                    _ => C64::new(1.0 / j as f64, 0.0),
                }
            }))
        }
    }
}

struct Discretized {
    f: DVector<C64>,
    /// sO*O, with s = c/c*
    kernel: DMatrix<C64>,
    /// w f ρ, the outer bra
    bra: DVector<C64>,
    prefactor: C64,
}

fn discretize(rd: &RadiativeData, c0: Coupling, x: f64, cauchy: &DMatrix<C64>) -> Result<Discretized> {
    if c0.regime() == Regime::Free {
        return Err(Error::InvalidCoupling(c0.value()));
    }
    let ks = rd.kgrid.samples();
    let n = ks.len();
    let w = weights(ks);
    let f: Vec<C64> = ks.iter().map(|&k| (-I * k * x).exp()).collect();
    let rho = &rd.rho;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    // O[m][ℓ] = f*(m) f(ℓ) ρ(ℓ) T[m][ℓ] / 2πi;  O*[k][m] = −f(k) f*(m) ρ*(m) conj(T[k][m]) / 2πi
    let o = DMatrix::from_fn(n, n, |m, l| f[m].conj() * f[l] * rho[l] * cauchy[(m, l)] / two_pi_i);
    let os = DMatrix::from_fn(n, n, |k, m| -f[k] * f[m].conj() * rho[m].conj() * cauchy[(k, m)].conj() / two_pi_i);
    let s = C64::new(c0.sign(), 0.0);
    let kernel = (os * o) * s;
    let bra = DVector::from_fn(n, |k, _| w[k] * f[k] * rho[k]);
    Ok(Discretized { f: DVector::from_vec(f), kernel, bra, prefactor: -2.0 / (c0.value() * 2.0 * PI) })
}

/// q(x, 0) from the Neumann series u = Σₙ (sO*O)ⁿ f, truncated at cfg.neumann_terms.
pub fn glm_neumann(rd: &RadiativeData, c0: Coupling, x: f64, cfg: &ResolventConfig) -> Result<C64> {
    let cauchy = cauchy_matrix(rd.kgrid.samples(), cfg)?;
    neumann_with(rd, c0, x, cfg, &cauchy)
}

fn neumann_with(rd: &RadiativeData, c0: Coupling, x: f64, cfg: &ResolventConfig, cauchy: &DMatrix<C64>) -> Result<C64> {
    let d = discretize(rd, c0, x, cauchy)?;
    let mut term = d.f.clone();
    let mut sum = term.clone();
    let mut prev = term.norm();
    for _ in 0..cfg.neumann_terms {
        term = &d.kernel * term;
        let tn = term.norm();
        if prev > 0.0 && tn >= prev {
            return Err(Error::SeriesDiverging(tn / prev));
        }
        sum += &term;
        prev = tn;
        if tn <= cfg.neumann_stop * sum.norm() {
            break;
        }
    }
    Ok(d.prefactor * d.bra.dot(&sum))
}

/// q(x, t) from the resolvent (𝟙 − sO*O)⁻¹ by dense LU.
pub fn rosales_resummed(rd: &RadiativeData, c0: Coupling, x: f64, t: f64, cfg: &ResolventConfig) -> Result<C64> {
    let cauchy = cauchy_matrix(rd.kgrid.samples(), cfg)?;
    let rt = if t == 0.0 { rd.clone() } else { rd.at_time(t) };
    resolvent_with(&rt, c0, x, &cauchy)
}

/// Below this min/max pivot ratio the LU factors count as singular.
const PIVOT_RATIO: f64 = 1e-13;

fn resolvent_with(rd: &RadiativeData, c0: Coupling, x: f64, cauchy: &DMatrix<C64>) -> Result<C64> {
    let d = discretize(rd, c0, x, cauchy)?;
    let n = d.f.len();
    let a = DMatrix::<C64>::identity(n, n) - d.kernel;
    let lu = a.lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.norm()), hi.max(z.norm())));
    if !(lo > PIVOT_RATIO * hi) {
        return Err(Error::SingularResolvent(x));
    }
    let u = lu.solve(&d.f).ok_or(Error::SingularResolvent(x))?;
    let q = d.prefactor * d.bra.dot(&u);
    if !(q.re.is_finite() && q.im.is_finite()) {
        return Err(Error::SingularResolvent(x));
    }
    Ok(q)
}

/// Where to reconstruct: n points on [−L, L].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub half_width: f64,
    pub n: usize,
}

impl XGrid {
    pub fn points(&self) -> Vec<f64> {
        let h = 2.0 * self.half_width / (self.n.max(2) - 1) as f64;
        (0..self.n).map(|i| -self.half_width + i as f64 * h).collect()
    }
}

/// Boundary tolerance asserted on reconstructed profiles.
pub const RECONSTRUCTION_BOUNDARY_TOL: f64 = 1e-6;

/// The resolvent formula on every point of the x-grid (in parallel), as a Schwartz profile.
pub fn reconstruct_field(rd: &RadiativeData, c0: Coupling, xgrid: &XGrid, t: f64, cfg: &ResolventConfig) -> Result<FieldProfile> {
    let values = reconstruct_values(rd, c0, &xgrid.points(), t, cfg)?;
    FieldProfile::new(values, xgrid.half_width, Asymptotics::Schwartz, RECONSTRUCTION_BOUNDARY_TOL)
}

/// The resolvent formula at arbitrary points, without the profile checks.
pub fn reconstruct_values(rd: &RadiativeData, c0: Coupling, xs: &[f64], t: f64, cfg: &ResolventConfig) -> Result<Vec<C64>> {
    let cauchy = cauchy_matrix(rd.kgrid.samples(), cfg)?;
    let rt = if t == 0.0 { rd.clone() } else { rd.at_time(t) };
    xs.par_iter().map(|&x| resolvent_with(&rt, c0, x, &cauchy)).collect()
}

/// The truncated Neumann series at arbitrary points.
pub fn neumann_values(rd: &RadiativeData, c0: Coupling, xs: &[f64], cfg: &ResolventConfig) -> Result<Vec<C64>> {
    let cauchy = cauchy_matrix(rd.kgrid.samples(), cfg)?;
    xs.par_iter().map(|&x| neumann_with(rd, c0, x, cfg, &cauchy)).collect()
}

/// Born term −(2/c)∫(dk/2π) ρ e^{−2ikx}.
pub fn born(rd: &RadiativeData, c0: Coupling, x: f64) -> C64 {
    -2.0 / c0.value() * f_kernel(rd, 2.0 * x)
}
