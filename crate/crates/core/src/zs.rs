//! Numerical direct scattering for Ψ_x = (−ikσ₃ + W)Ψ, W = c[[0, q], [q*, 0]].
//!
//! Jost solutions are propagated between grid nodes with a fixed number of substeps,
//! q being interpolated between nodes. The default scheme is the fourth-order Magnus
//! integrator, which keeps det Ψ (and unitarity in the focusing case) to round-off;
//! classical RK4 is available for comparison.

use crate::error::{Error, Result};
use crate::mat2::{Mat2, C64, I, ONE, ZERO};
use crate::model::{Asymptotics, Coupling, FieldProfile, KGrid, Regime, ScatteringData, DEFAULT_DET_TOL};
use crate::zeros::{self, ZeroRegion};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Magnus4,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Requested h_ode; `None` means one step per grid cell. Rounded so that
    /// an integer number of steps spans each cell.
    pub step: Option<f64>,
    pub refinement_factor: usize,
    pub det_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { scheme: Scheme::Magnus4, step: None, refinement_factor: 2, det_tol: DEFAULT_DET_TOL }
    }
}

impl IntegratorConfig {
    pub fn with_substeps(self, h: f64, m: usize) -> Self {
        IntegratorConfig { step: Some(h / m as f64), ..self }
    }
    /// Steps per grid cell.
    pub fn substeps(&self, h: f64) -> usize {
        match self.step {
            None => 1,
            Some(s) => ((h / s) - 1e-9).ceil().max(1.0) as usize,
        }
    }
    /// The same configuration with h_ode divided by the refinement factor.
    pub fn refined(&self, h: f64) -> Self {
        let m = self.substeps(h) * self.refinement_factor.max(2);
        IntegratorConfig { step: Some(h / m as f64), ..*self }
    }
}

/// Dispersion μ(k), μ² = k² − c²ρ², with μ ~ k at large |k| and the cut on the segment
/// between the branch points ±cρ. Real k = 0 takes the k → 0⁺ value.
pub fn mu(c: Coupling, asym: Asymptotics, k: C64) -> Result<C64> {
    let rho = asym.rho();
    if rho == 0.0 || c.regime() == Regime::Free {
        return Ok(k);
    }
    let c2r2 = c.squared() * rho * rho;
    let m2 = k * k - c2r2;
    if m2.norm() < 1e-13 * (1.0 + c2r2.abs()) {
        return Err(Error::BranchPoint(k));
    }
    if k.norm() == 0.0 {
        // only reached when focusing (defocusing k = 0 is inside the gap)
        return Ok(m2.sqrt());
    }
    Ok(k * (ONE - c2r2 / (k * k)).sqrt())
}

/// Λ = μσ₃, P_±, with E_±(x) = P_± e^{−iμxσ₃}.
#[derive(Clone, Copy, Debug)]
pub struct AsymptoticFrame {
    pub mu: C64,
    pub p_minus: Mat2,
    pub p_plus: Mat2,
}

impl AsymptoticFrame {
    pub fn lambda(&self) -> Mat2 {
        Mat2::diag(self.mu, -self.mu)
    }
    fn phase(&self, x: f64) -> Mat2 {
        Mat2::diag((-I * self.mu * x).exp(), (I * self.mu * x).exp())
    }
    pub fn e_plus(&self, x: f64) -> Mat2 {
        self.p_plus * self.phase(x)
    }
    pub fn e_minus(&self, x: f64) -> Mat2 {
        self.p_minus * self.phase(x)
    }
}

pub fn asymptotic_frame(c: Coupling, asym: Asymptotics, k: C64) -> Result<AsymptoticFrame> {
    let m = mu(c, asym, k)?;
    let rho = asym.rho();
    if rho == 0.0 || c.regime() == Regime::Free {
        return Ok(AsymptoticFrame { mu: m, p_minus: Mat2::identity(), p_plus: Mat2::identity() });
    }
    let cr = c.value() * rho;
    // μ − k = −c²ρ²/(μ + k), free of cancellation
    let s = I * (-(cr * cr) / (m + k)) / cr;
    let p_minus = Mat2::new(ONE, s, -s, ONE);
    if p_minus.det().norm() < 1e-14 {
        return Err(Error::BranchPoint(k));
    }
    let half = asym.theta() / 2.0;
    let rot = Mat2::diag(C64::from_polar(1.0, half), C64::from_polar(1.0, -half));
    Ok(AsymptoticFrame { mu: m, p_minus, p_plus: rot * p_minus })
}

/// −ikσ₃ + W(x)
pub fn generator(p: &FieldProfile, c: Coupling, k: C64, x: f64) -> Mat2 {
    let q = p.sample(x);
    let cv = c.value();
    Mat2::new(-I * k, cv * q, cv * q.conj(), I * k)
}

const GAUSS_OFF: f64 = 0.288_675_134_594_812_9; // √3/6

/// One fourth-order Magnus step from x over signed length h.
pub(crate) fn magnus_step(gen: &impl Fn(f64) -> Mat2, x: f64, h: f64) -> Mat2 {
    let a1 = gen(x + h * (0.5 - GAUSS_OFF));
    let a2 = gen(x + h * (0.5 + GAUSS_OFF));
    let omega = (a1 + a2).scale(C64::new(0.5 * h, 0.0)) + a2.commutator(&a1).scale(C64::new(h * h * 3f64.sqrt() / 12.0, 0.0));
    omega.exp()
}

fn rk4_step(gen: &impl Fn(f64) -> Mat2, x: f64, h: f64, y: Mat2) -> Mat2 {
    let hc = C64::new(h, 0.0);
    let gm = gen(x + 0.5 * h);
    let k1 = gen(x) * y;
    let k2 = gm * (y + k1.scale(hc * 0.5));
    let k3 = gm * (y + k2.scale(hc * 0.5));
    let k4 = gen(x + h) * (y + k3.scale(hc));
    y + (k1 + k2.scale(C64::new(2.0, 0.0)) + k3.scale(C64::new(2.0, 0.0)) + k4).scale(hc / 6.0)
}

/// Propagate Y' = gen(x)Y from node `from` to node `to`. With `record`, returns the state
/// at every node indexed by node number (entries outside the traversed range are zero).
pub(crate) fn propagate(
    p: &FieldProfile,
    gen: &impl Fn(f64) -> Mat2,
    from: usize,
    to: usize,
    y0: Mat2,
    cfg: &IntegratorConfig,
    record: bool,
) -> Result<(Mat2, Vec<Mat2>)> {
    let m = cfg.substeps(p.h());
    let dir: isize = if to >= from { 1 } else { -1 };
    let hs = dir as f64 * p.h() / m as f64;
    let mut y = y0;
    let mut rec = if record { vec![Mat2::zero(); p.len()] } else { Vec::new() };
    let mut i = from;
    if record {
        rec[i] = y;
    }
    while i != to {
        let x0 = p.x(i);
        for s in 0..m {
            let x = x0 + s as f64 * hs;
            y = match cfg.scheme {
                Scheme::Magnus4 => magnus_step(gen, x, hs) * y,
                Scheme::Rk4 => rk4_step(gen, x, hs, y),
            };
        }
        i = (i as isize + dir) as usize;
        if !y.is_finite() || y.norm() > 1e200 {
            return Err(Error::IntegratorDiverged { x: p.x(i), k: ZERO });
        }
        if record {
            rec[i] = y;
        }
    }
    Ok((y, rec))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// Ψ^± sampled on the profile grid.
#[derive(Clone, Debug)]
pub struct JostSolution {
    pub k: f64,
    pub side: Side,
    pub samples: Vec<Mat2>,
}

impl JostSolution {
    /// max over nodes of |det Ψ(x) − det Ψ(x_ref)|.
    pub fn det_spread(&self) -> f64 {
        let d0 = self.samples[0].det();
        self.samples.iter().map(|m| (m.det() - d0).norm()).fold(0.0, f64::max)
    }
}

fn with_k(e: Error, k: C64) -> Error {
    match e {
        Error::IntegratorDiverged { x, .. } => Error::IntegratorDiverged { x, k },
        other => other,
    }
}

/// Ψ⁺ seeded with E₊ at the right end and integrated to the left end.
pub fn jost_plus(p: &FieldProfile, c: Coupling, k: f64, cfg: &IntegratorConfig) -> Result<JostSolution> {
    let kc = C64::new(k, 0.0);
    let fr = asymptotic_frame(c, p.asymptotics(), kc)?;
    let gen = |x: f64| generator(p, c, kc, x);
    let n = p.len();
    let (_, samples) = propagate(p, &gen, n - 1, 0, fr.e_plus(p.x_last()), cfg, true).map_err(|e| with_k(e, kc))?;
    Ok(JostSolution { k, side: Side::Plus, samples })
}

/// Ψ⁻ seeded with E₋ at the left end and integrated to the right end.
pub fn jost_minus(p: &FieldProfile, c: Coupling, k: f64, cfg: &IntegratorConfig) -> Result<JostSolution> {
    let kc = C64::new(k, 0.0);
    let fr = asymptotic_frame(c, p.asymptotics(), kc)?;
    let gen = |x: f64| generator(p, c, kc, x);
    let n = p.len();
    let (_, samples) = propagate(p, &gen, 0, n - 1, fr.e_minus(p.x_first()), cfg, true).map_err(|e| with_k(e, kc))?;
    Ok(JostSolution { k, side: Side::Minus, samples })
}

/// S(k) = E₋⁻¹Ψ⁺ at the left end of the grid, so that (b, a) is its second column.
pub fn scattering_matrix(p: &FieldProfile, c: Coupling, k: f64, cfg: &IntegratorConfig) -> Result<Mat2> {
    let kc = C64::new(k, 0.0);
    let fr = asymptotic_frame(c, p.asymptotics(), kc)?;
    let gen = |x: f64| generator(p, c, kc, x);
    let n = p.len();
    let (psi, _) = propagate(p, &gen, n - 1, 0, fr.e_plus(p.x_last()), cfg, false).map_err(|e| with_k(e, kc))?;
    let s = fr.e_minus(p.x_first()).inv() * psi;
    let drift = (s.det() - ONE).norm();
    if drift > cfg.det_tol {
        return Err(Error::DeterminantDrift { k, drift });
    }
    Ok(s)
}

/// S(k) at every grid point, in grid order.
pub fn scattering_matrices(p: &FieldProfile, c: Coupling, kgrid: &KGrid, cfg: &IntegratorConfig) -> Result<Vec<Mat2>> {
    kgrid.samples().par_iter().map(|&k| scattering_matrix(p, c, k, cfg)).collect()
}

/// a(k), b(k) on the grid plus the discrete spectrum found in the default search region.
pub fn scatter_grid(p: &FieldProfile, c: Coupling, kgrid: &KGrid, cfg: &IntegratorConfig) -> Result<ScatteringData> {
    let s = scattering_matrices(p, c, kgrid, cfg)?;
    let discrete = if c.regime() == Regime::Free {
        Vec::new()
    } else {
        let region = ZeroRegion::default_for(p, c, kgrid);
        zeros::find_zeros(p, c, &region, cfg)?
    };
    let a = s.iter().map(|m| m.0[1][1]).collect();
    let b = s.iter().map(|m| m.0[0][1]).collect();
    ScatteringData::new(kgrid.clone(), a, b, discrete, c, cfg.det_tol)
}

/// Scattering data on the real grid only, without the zero search.
pub fn scatter_continuous(p: &FieldProfile, c: Coupling, kgrid: &KGrid, cfg: &IntegratorConfig) -> Result<ScatteringData> {
    let s = scattering_matrices(p, c, kgrid, cfg)?;
    let a = s.iter().map(|m| m.0[1][1]).collect();
    let b = s.iter().map(|m| m.0[0][1]).collect();
    ScatteringData::new(kgrid.clone(), a, b, Vec::new(), c, cfg.det_tol)
}

/// Gauge-free columns in the upper half-plane: v = Ψ⁻₁e^{iμx} from the left end and
/// w = Ψ⁺₂e^{−iμx} from the right end, each integrated in its decaying direction.
#[derive(Clone, Debug)]
pub struct DecayingColumns {
    pub k: C64,
    pub mu: C64,
    pub det_p_minus: C64,
    pub v: Vec<[C64; 2]>,
    pub w: Vec<[C64; 2]>,
}

impl DecayingColumns {
    /// a(k) = det(Ψ⁻₁, Ψ⁺₂)/det P₋ evaluated at node i.
    pub fn a_at(&self, i: usize) -> C64 {
        let (v, w) = (self.v[i], self.w[i]);
        (v[0] * w[1] - v[1] * w[0]) / self.det_p_minus
    }
}

fn decaying_gen<'a>(p: &'a FieldProfile, c: Coupling, k: C64, shift: C64) -> impl Fn(f64) -> Mat2 + 'a {
    move |x| generator(p, c, k, x) + Mat2::diag(shift, shift)
}

/// Both decaying columns on the full grid.
pub fn decaying_columns(p: &FieldProfile, c: Coupling, k: C64, cfg: &IntegratorConfig) -> Result<DecayingColumns> {
    let fr = asymptotic_frame(c, p.asymptotics(), k)?;
    let n = p.len();
    let gv = decaying_gen(p, c, k, I * fr.mu);
    let gw = decaying_gen(p, c, k, -I * fr.mu);
    let (_, rv) = propagate(p, &gv, 0, n - 1, fr.p_minus, cfg, true).map_err(|e| with_k(e, k))?;
    let (_, rw) = propagate(p, &gw, n - 1, 0, fr.p_plus, cfg, true).map_err(|e| with_k(e, k))?;
    Ok(DecayingColumns {
        k,
        mu: fr.mu,
        det_p_minus: fr.p_minus.det(),
        v: rv.iter().map(|m| m.col(0)).collect(),
        w: rw.iter().map(|m| m.col(1)).collect(),
    })
}

/// Node closest to x = 0.
pub(crate) fn origin_node(p: &FieldProfile) -> usize {
    ((-p.x_first() / p.h()).round().max(0.0) as usize).min(p.len() - 1)
}

/// v and w at the node nearest x = 0, integrating only up to that node.
pub(crate) fn columns_at_origin(p: &FieldProfile, c: Coupling, k: C64, cfg: &IntegratorConfig) -> Result<(C64, [C64; 2], [C64; 2], C64, f64)> {
    let fr = asymptotic_frame(c, p.asymptotics(), k)?;
    let n = p.len();
    let mid = origin_node(p);
    let gv = decaying_gen(p, c, k, I * fr.mu);
    let gw = decaying_gen(p, c, k, -I * fr.mu);
    let (yv, _) = propagate(p, &gv, 0, mid, fr.p_minus, cfg, false).map_err(|e| with_k(e, k))?;
    let (yw, _) = propagate(p, &gw, n - 1, mid, fr.p_plus, cfg, false).map_err(|e| with_k(e, k))?;
    Ok((fr.mu, yv.col(0), yw.col(1), fr.p_minus.det(), p.x(mid)))
}

/// a(k) for Im k > 0 (real k is accepted and reproduces S₂₂).
pub fn analytic_continue_a(p: &FieldProfile, c: Coupling, k: C64, cfg: &IntegratorConfig) -> Result<C64> {
    if k.im < 0.0 {
        return Err(Error::InvalidInput(format!("k = {k} lies in the lower half-plane")));
    }
    let (_, v, w, det_p, _) = columns_at_origin(p, c, k, cfg)?;
    Ok((v[0] * w[1] - v[1] * w[0]) / det_p)
}

/// b₀ with Ψ⁺₂ = b₀Ψ⁻₁ at a zero k₀, read off at x = 0.
pub fn norming_constant(p: &FieldProfile, c: Coupling, k0: C64, cfg: &IntegratorConfig) -> Result<C64> {
    let (m, v, w, _, x) = columns_at_origin(p, c, k0, cfg)?;
    let vv = v[0].norm_sqr() + v[1].norm_sqr();
    let ratio = (w[0] * v[0].conj() + w[1] * v[1].conj()) / vv;
    Ok(ratio * (I * 2.0 * m * x).exp())
}
