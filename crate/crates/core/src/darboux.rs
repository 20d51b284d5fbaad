//! Darboux-Bäcklund dressing D = k𝟙 − Σ that adds or removes one simple zero of a(k) while
//! leaving b(k) untouched, and the dual quench map built from it.
//!
//! Σ = HΛH⁻¹ with H = [φ, φ̃], Λ = diag(k₀, k₀*), φ = (α, (c/c*)β)ᵀ a solution at k₀ and
//! φ̃ = (φ₂*, sφ₁*)ᵀ its partner at k₀*. The new potential follows from
//! W̃ = W − i[σ₃, Σ], i.e. q̃ = q − 2iΣ₁₂/c.
//!
//! The mixing coefficient μ enters through φ = Ψ⁻₁(k₀) − μΨ⁺₂(k₀). After an Add the new zero
//! satisfies Ψ̃⁻₁ = μΨ̃⁺₂, so in terms of the stored norming constant (Ψ⁺₂ = b₀Ψ⁻₁) it
//! carries b₀ = 1/μ.

use crate::error::{Error, Result};
use crate::glm::{self, RadiativeData, ResolventConfig, XGrid};
use crate::mat2::{Mat2, C64, I};
use crate::model::{Asymptotics, Coupling, DiscreteEigenvalue, FieldProfile, KGrid, Regime, ScatteringData};
use crate::zeros::{find_zeros, ZeroRegion};
use crate::zs::{analytic_continue_a, decaying_columns, norming_constant, scatter_continuous, IntegratorConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BtMode {
    Add,
    Remove,
}

/// One add/remove-zero transformation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarbouxStep {
    #[serde(with = "crate::io::cobj")]
    pub k0: C64,
    #[serde(with = "crate::io::cobj")]
    pub mu: C64,
    pub mode: BtMode,
}

impl DarbouxStep {
    pub fn new(k0: C64, mu: C64, mode: BtMode) -> Result<Self> {
        if !(k0.im > 0.0) {
            return Err(Error::InvalidInput(format!("k0 = {k0} must lie in the upper half-plane")));
        }
        if mu == C64::new(0.0, 0.0) || !(mu.re.is_finite() && mu.im.is_finite()) {
            return Err(Error::InvalidInput(format!("mixing coefficient {mu} must be finite and nonzero")));
        }
        Ok(DarbouxStep { k0, mu, mode })
    }

    /// Add with the default μ = 1.
    pub fn add(k0: C64) -> Result<Self> {
        DarbouxStep::new(k0, C64::new(1.0, 0.0), BtMode::Add)
    }

    /// Remove with the default μ = 1/b₀ + 1, b₀ the stored norming constant.
    pub fn remove(k0: C64, b0: C64) -> Result<Self> {
        DarbouxStep::new(k0, 1.0 / b0 + 1.0, BtMode::Remove)
    }
}

/// Tolerances and solvers shared by the Darboux operations.
#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxConfig {
    pub integrator: IntegratorConfig,
    /// |a(k₀)| below this counts as a zero.
    pub zero_tol: f64,
    /// Spectral grid for zero searches and radiative data.
    pub kgrid: KGrid,
    pub region: Option<ZeroRegion>,
    pub resolvent: ResolventConfig,
    pub dual_mode: DualMode,
    /// Return (c/c₀)q directly when c/c₀ is real (same W, same data).
    pub rescale_shortcut: bool,
}

impl DarbouxConfig {
    pub fn new(kgrid: KGrid) -> Self {
        DarbouxConfig {
            integrator: IntegratorConfig::default(),
            zero_tol: 1e-6,
            kgrid,
            region: None,
            resolvent: ResolventConfig::default(),
            dual_mode: DualMode::Direct,
            rescale_shortcut: true,
        }
    }
}

/// How the radiative part of the dual quench is rebuilt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMode {
    /// q̃_r = 𝒪_{c₀}(ρ) straight from the resolvent.
    Direct,
    /// q̃_r = (c/c₀)q_r + [𝒪_{c₀}(ρ) − (c/c₀)𝒪_c(ρ)]: the exact q_r anchors the result and the
    /// discretization error of the two reconstructions largely cancels.
    Anchored,
}

/// Σ from the solution φ = (D, N) at k₀.
fn sigma_from(d: C64, n: C64, k0: C64, s: f64, x: f64) -> Result<Mat2> {
    let (dd, nn) = (d.norm_sqr(), n.norm_sqr());
    let delta = dd - s * nn;
    if !(delta.abs() > 1e-13 * (dd + nn)) {
        return Err(Error::SingularH(x));
    }
    let kc = k0.conj();
    Ok(Mat2::new(
        (k0 * dd - kc * s * nn) / delta,
        (kc - k0) * s * n.conj() * d / delta,
        (k0 - kc) * n * d.conj() / delta,
        (kc * dd - k0 * s * nn) / delta,
    ))
}

fn require_schwartz(p: &FieldProfile, c: Coupling) -> Result<()> {
    if p.asymptotics() != Asymptotics::Schwartz {
        return Err(Error::UnsupportedBoundary("Darboux steps are implemented for rapidly decreasing fields".into()));
    }
    if c.regime() == Regime::Free {
        return Err(Error::InvalidCoupling(c.value()));
    }
    Ok(())
}

/// Confirms that k₀ is a simple zero of a for a Remove step.
fn check_remove(p: &FieldProfile, c: Coupling, step: &DarbouxStep, cfg: &DarbouxConfig) -> Result<()> {
    let a0 = analytic_continue_a(p, c, step.k0, &cfg.integrator)?;
    if a0.norm() > cfg.zero_tol {
        return Err(Error::RemoveNonexistentZero(step.k0));
    }
    let h = 1e-3 * step.k0.im.min(1.0);
    let da = (analytic_continue_a(p, c, step.k0 + h, &cfg.integrator)? - analytic_continue_a(p, c, step.k0 - h, &cfg.integrator)?) / (2.0 * h);
    if da.norm() < 1e3 * cfg.zero_tol {
        return Err(Error::HigherOrderZero(step.k0, 2));
    }
    let b0 = norming_constant(p, c, step.k0, &cfg.integrator)?;
    if (step.mu * b0 - 1.0).norm() < 1e-8 {
        return Err(Error::DegenerateMixing);
    }
    Ok(())
}

/// Σ at every grid node of p.
pub fn sigma_on_grid(p: &FieldProfile, c: Coupling, step: &DarbouxStep, cfg: &DarbouxConfig) -> Result<Vec<Mat2>> {
    require_schwartz(p, c)?;
    if step.mode == BtMode::Remove {
        check_remove(p, c, step, cfg)?;
    }
    let cols = decaying_columns(p, c, step.k0, &cfg.integrator)?;
    let (k0, mu, s) = (step.k0, step.mu, c.sign());
    (0..p.len())
        .into_par_iter()
        .map(|i| {
            let x = p.x(i);
            let (v, w) = (cols.v[i], cols.w[i]);
            // both columns are O(1) on the grid; only the exponential weight is chosen per side
            let (d, n) = match step.mode {
                BtMode::Add if x >= 0.0 => {
                    let e = (2.0 * I * k0 * x).exp();
                    (v[0] - mu * w[0] * e, v[1] - mu * w[1] * e)
                }
                BtMode::Add => {
                    let e = (-2.0 * I * k0 * x).exp();
                    (v[0] * e - mu * w[0], v[1] * e - mu * w[1])
                }
                // φ is the bound state itself: v on the left, w on the right
                BtMode::Remove if x >= 0.0 => (w[0], w[1]),
                BtMode::Remove => (v[0], v[1]),
            };
            sigma_from(d, n, k0, s, x)
        })
        .collect()
}

/// Σ(x), linearly interpolated between grid nodes.
pub fn sigma_matrix(p: &FieldProfile, c: Coupling, step: &DarbouxStep, x: f64, cfg: &DarbouxConfig) -> Result<Mat2> {
    if x < p.x_first() || x > p.x_last() {
        return Err(Error::InvalidInput(format!("x = {x} outside the profile grid")));
    }
    let sig = sigma_on_grid(p, c, step, cfg)?;
    let t = (x - p.x_first()) / p.h();
    let j = (t.floor() as usize).min(p.len() - 2);
    let f = t - j as f64;
    Ok(sig[j].scale(C64::new(1.0 - f, 0.0)) + sig[j + 1].scale(C64::new(f, 0.0)))
}

/// σ = β/α recovered from Σ: Σ₁₁ − k₀* = (k₀ − k₀*)|α|²/Δ and Σ₂₁ = (k₀ − k₀*)(c/c*)βα*/Δ.
pub fn sigma_ratio(sig: &Mat2, k0: C64, c: Coupling) -> C64 {
    c.sign() * sig.0[1][0] / (sig.0[0][0] - k0.conj())
}

/// The transformed field q̃ = q − 2iΣ₁₂/c on the same grid.
pub fn apply_bt(p: &FieldProfile, c: Coupling, step: &DarbouxStep, cfg: &DarbouxConfig) -> Result<FieldProfile> {
    let sig = sigma_on_grid(p, c, step, cfg)?;
    let cv = c.value();
    let values = p.values().iter().zip(&sig).map(|(q, s)| q - 2.0 * I * s.0[0][1] / cv).collect();
    p.with_values(values)
}

/// Predicted data after the step: a times the Blaschke factor, b unchanged, the discrete list
/// updated (an added zero carries b₀ = 1/μ; other norming constants are invariant).
pub fn bt_data_effect(sd: &ScatteringData, step: &DarbouxStep) -> Result<ScatteringData> {
    let k0 = step.k0;
    let mut discrete = sd.discrete.clone();
    let factor: Box<dyn Fn(f64) -> C64> = match step.mode {
        BtMode::Add => {
            let mut z = DiscreteEigenvalue::new(k0, 1)?;
            z.norming = Some(1.0 / step.mu);
            discrete.push(z);
            Box::new(move |k| (k - k0) / (k - k0.conj()))
        }
        BtMode::Remove => {
            let j = discrete
                .iter()
                .position(|z| (z.position - k0).norm() < 1e-6 * (1.0 + k0.norm()))
                .ok_or(Error::RemoveNonexistentZero(k0))?;
            if discrete[j].order > 1 {
                return Err(Error::HigherOrderZero(k0, discrete[j].order));
            }
            discrete.remove(j);
            Box::new(move |k| (k - k0.conj()) / (k - k0))
        }
    };
    discrete.sort_by(|a, b| b.position.im.total_cmp(&a.position.im));
    let a = sd.kgrid.samples().iter().zip(&sd.a).map(|(&k, a)| factor(k) * a).collect();
    Ok(ScatteringData { a, discrete, ..sd.clone() })
}

fn region_for(p: &FieldProfile, c: Coupling, cfg: &DarbouxConfig) -> ZeroRegion {
    cfg.region.unwrap_or_else(|| ZeroRegion::default_for(p, c, &cfg.kgrid))
}

/// Removes every zero of a (largest Im k₀ first) until the search comes back empty.
pub fn strip_solitons(p: &FieldProfile, c: Coupling, cfg: &DarbouxConfig) -> Result<(FieldProfile, Vec<DarbouxStep>)> {
    require_schwartz(p, c)?;
    let mut q = p.clone();
    let mut steps = Vec::new();
    let mut budget: Option<usize> = None;
    loop {
        let zeros = find_zeros(&q, c, &region_for(&q, c, cfg), &cfg.integrator)?;
        let Some(top) = zeros.first() else { break };
        if let Some(z) = zeros.iter().find(|z| z.order > 1) {
            return Err(Error::HigherOrderZero(z.position, z.order));
        }
        let left = budget.get_or_insert(zeros.len());
        if *left == 0 {
            return Err(Error::NonConvergent(format!("zero at {} survived its Remove step", top.position)));
        }
        *left -= 1;
        let b0 = match top.norming {
            Some(b) => b,
            None => norming_constant(&q, c, top.position, &cfg.integrator)?,
        };
        let step = DarbouxStep::remove(top.position, b0)?;
        q = apply_bt(&q, c, &step, cfg)?;
        // the recorded μ re-creates this zero with its original norming constant on Add
        steps.push(DarbouxStep { mu: 1.0 / b0, ..step });
    }
    Ok((q, steps))
}

/// The dual quench ℬ: the field whose data at coupling c₀ equal the data of p at c.
pub fn dual_quench(p: &FieldProfile, c: Coupling, c0: Coupling, xgrid: &XGrid, cfg: &DarbouxConfig) -> Result<FieldProfile> {
    require_schwartz(p, c)?;
    if c0.regime() == Regime::Free {
        return Err(Error::InvalidCoupling(c0.value()));
    }
    let ratio = c.value() / c0.value();
    if cfg.rescale_shortcut && ratio.im.abs() <= 1e-14 * ratio.norm() {
        // same W, same data
        let xs = xgrid.points();
        let values = xs.iter().map(|&x| ratio.re * p.sample(x)).collect();
        return FieldProfile::new(values, xgrid.half_width, Asymptotics::Schwartz, p.boundary_tol());
    }
    let (qr, steps) = strip_solitons(p, c, cfg)?;
    let sd = scatter_continuous(&qr, c, &cfg.kgrid, &cfg.integrator)?;
    let rd = RadiativeData::from_scattering(&sd)?;
    let xs = xgrid.points();
    let direct = glm::reconstruct_values(&rd, c0, &xs, 0.0, &cfg.resolvent)?;
    let values: Vec<C64> = match cfg.dual_mode {
        DualMode::Direct => direct,
        DualMode::Anchored => {
            let same = glm::reconstruct_values(&rd, c, &xs, 0.0, &cfg.resolvent)?;
            xs.iter().zip(direct.iter().zip(&same)).map(|(&x, (d, s))| ratio * qr.sample(x) + d - ratio * s).collect()
        }
    };
    let mut out = FieldProfile::new(values, xgrid.half_width, Asymptotics::Schwartz, p.boundary_tol().max(glm::RECONSTRUCTION_BOUNDARY_TOL))?;
    for step in steps.iter().rev() {
        let add = DarbouxStep::new(step.k0, step.mu, BtMode::Add)?;
        out = apply_bt(&out, c0, &add, cfg)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zs::scatter_grid;

    fn cfg() -> DarbouxConfig {
        DarbouxConfig::new(KGrid::uniform(4.0, 41).unwrap())
    }

    fn vacuum(l: f64, n: usize) -> FieldProfile {
        FieldProfile::from_fn(l, n, Asymptotics::Schwartz, 1e-6, |_| C64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn vacuum_add_gives_sech() {
        let p = vacuum(15.0, 1501);
        let c = Coupling::focusing(1.0).unwrap();
        let q = apply_bt(&p, c, &DarbouxStep::add(C64::new(0.0, 0.5)).unwrap(), &cfg()).unwrap();
        for (i, v) in q.values().iter().enumerate() {
            let x = q.x(i);
            assert!((v - I / x.cosh()).norm() < 1e-12, "x = {x}: {v}");
        }
    }

    #[test]
    fn sigma_limits_for_add() {
        let p = vacuum(10.0, 1001);
        let c = Coupling::focusing(1.0).unwrap();
        let k0 = C64::new(0.3, 0.7);
        let sig = sigma_on_grid(&p, c, &DarbouxStep::add(k0).unwrap(), &cfg()).unwrap();
        let right = sig[p.len() - 1];
        let left = sig[0];
        assert!((right.0[0][0] - k0).norm() < 1e-8 && (right.0[1][1] - k0.conj()).norm() < 1e-8);
        assert!((left.0[0][0] - k0.conj()).norm() < 1e-8 && (left.0[1][1] - k0).norm() < 1e-8);
    }

    #[test]
    fn blaschke_effect_on_trivial_data() {
        let kg = KGrid::uniform(3.0, 31).unwrap();
        let n = kg.len();
        let sd = ScatteringData::new(kg.clone(), vec![C64::new(1.0, 0.0); n], vec![C64::new(0.0, 0.0); n], vec![], Coupling::focusing(1.0).unwrap(), 1e-12).unwrap();
        let k0 = C64::new(0.0, 0.5);
        let added = bt_data_effect(&sd, &DarbouxStep::add(k0).unwrap()).unwrap();
        for (&k, a) in kg.samples().iter().zip(&added.a) {
            assert!((a - (k - k0) / (k + k0)).norm() < 1e-15);
        }
        assert_eq!(added.discrete.len(), 1);
        let back = bt_data_effect(&added, &DarbouxStep::remove(k0, C64::new(1.0, 0.0)).unwrap()).unwrap();
        for a in &back.a {
            assert!((a - 1.0).norm() < 1e-15);
        }
        assert!(back.discrete.is_empty());
        assert!(matches!(bt_data_effect(&back, &DarbouxStep::new(k0, C64::new(1.0, 0.0), BtMode::Remove).unwrap()), Err(Error::RemoveNonexistentZero(_))));
    }

    #[test]
    fn remove_sech_soliton() {
        let c = Coupling::focusing(1.0).unwrap();
        let p = FieldProfile::from_fn(15.0, 1501, Asymptotics::Schwartz, 1e-6, |x| C64::new(1.0 / x.cosh(), 0.0)).unwrap();
        let (q, steps) = strip_solitons(&p, c, &cfg()).unwrap();
        assert_eq!(steps.len(), 1);
        assert!((steps[0].k0 - C64::new(0.0, 0.5)).norm() < 1e-8);
        // Σ is diagonal at the ends, so the truncation level sech 15 ≈ 6e−7 stays there
        let m = (0..q.len()).filter(|&i| q.x(i).abs() < 10.0).map(|i| q.values()[i].norm()).fold(0.0, f64::max);
        assert!(m < 1e-7, "residual field {m}");
    }

    #[test]
    fn add_then_remove_restores_field() {
        let c = Coupling::focusing(1.0).unwrap();
        let p = FieldProfile::from_fn(12.0, 1201, Asymptotics::Schwartz, 1e-6, |x| C64::new(0.3 * (-x * x).exp(), 0.1 * x * (-x * x).exp())).unwrap();
        let k0 = C64::new(-0.2, 0.9);
        let cf = cfg();
        let q = apply_bt(&p, c, &DarbouxStep::add(k0).unwrap(), &cf).unwrap();
        let sd = scatter_grid(&q, c, &cf.kgrid, &cf.integrator).unwrap();
        assert_eq!(sd.discrete.len(), 1);
        let z = sd.discrete[0];
        assert!((z.position - k0).norm() < 1e-8);
        // the added zero carries b₀ = 1/μ = 1
        assert!((z.norming.unwrap() - 1.0).norm() < 1e-6);
        let back = apply_bt(&q, c, &DarbouxStep::remove(z.position, z.norming.unwrap()).unwrap(), &cf).unwrap();
        let err = back.values().iter().zip(p.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn remove_rejects_non_zero() {
        let c = Coupling::focusing(1.0).unwrap();
        let p = vacuum(8.0, 401);
        let step = DarbouxStep::new(C64::new(0.0, 0.5), C64::new(2.0, 0.0), BtMode::Remove).unwrap();
        assert!(matches!(apply_bt(&p, c, &step, &cfg()), Err(Error::RemoveNonexistentZero(_))));
    }

    #[test]
    fn defocusing_add_is_singular() {
        let c = Coupling::defocusing(1.0).unwrap();
        let p = vacuum(8.0, 401);
        assert!(matches!(apply_bt(&p, c, &DarbouxStep::add(C64::new(0.0, 0.5)).unwrap(), &cfg()), Err(Error::SingularH(_))));
    }

    #[test]
    fn same_regime_dual_quench_is_rescaling() {
        let c = Coupling::focusing(1.0).unwrap();
        let c0 = Coupling::focusing(2.0).unwrap();
        let p = FieldProfile::from_fn(15.0, 301, Asymptotics::Schwartz, 1e-6, |x| C64::new(1.0 / x.cosh(), 0.0)).unwrap();
        let xg = XGrid { half_width: 15.0, n: 301 };
        let q = dual_quench(&p, c, c0, &xg, &cfg()).unwrap();
        for (a, b) in q.values().iter().zip(p.values()) {
            assert!((a - 0.5 * b).norm() < 1e-14);
        }
    }
}
