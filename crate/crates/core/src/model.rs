//! Domain types shared by every module: couplings, sampled fields, spectral grids and scattering data.

use crate::error::{Error, Result};
use crate::mat2::{C64, ZERO};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Focusing,
    Defocusing,
    Free,
}

/// Classify c: focusing on iℝ⁺, defocusing on ℝ⁺, free at 0.
pub fn classify_regime(c: C64) -> Result<Regime> {
    let tiny = 1e-14 * (1.0 + c.norm());
    if c.norm() == 0.0 {
        Ok(Regime::Free)
    } else if c.re.abs() <= tiny && c.im > 0.0 {
        Ok(Regime::Focusing)
    } else if c.im.abs() <= tiny && c.re > 0.0 {
        Ok(Regime::Defocusing)
    } else {
        Err(Error::InvalidCoupling(c))
    }
}

/// The NLSE coupling c.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CouplingRepr", into = "CouplingRepr")]
pub struct Coupling {
    value: C64,
    regime: Regime,
}

#[derive(Serialize, Deserialize)]
struct CouplingRepr {
    re: f64,
    im: f64,
}

impl TryFrom<CouplingRepr> for Coupling {
    type Error = Error;
    fn try_from(r: CouplingRepr) -> Result<Self> {
        Coupling::new(C64::new(r.re, r.im))
    }
}

impl From<Coupling> for CouplingRepr {
    fn from(c: Coupling) -> Self {
        CouplingRepr { re: c.value.re, im: c.value.im }
    }
}

impl Coupling {
    pub fn new(value: C64) -> Result<Self> {
        let regime = classify_regime(value)?;
        // snap the rounding residue off the admissible ray
        let value = match regime {
            Regime::Focusing => C64::new(0.0, value.im),
            Regime::Defocusing => C64::new(value.re, 0.0),
            Regime::Free => ZERO,
        };
        Ok(Coupling { value, regime })
    }
    /// c = i·g
    pub fn focusing(g: f64) -> Result<Self> {
        Coupling::new(C64::new(0.0, g))
    }
    pub fn defocusing(c: f64) -> Result<Self> {
        Coupling::new(C64::new(c, 0.0))
    }
    pub fn free() -> Self {
        Coupling { value: ZERO, regime: Regime::Free }
    }
    pub fn value(&self) -> C64 {
        self.value
    }
    pub fn regime(&self) -> Regime {
        self.regime
    }
    /// c/c*: −1 focusing, +1 defocusing (and +1 by convention when free).
    pub fn sign(&self) -> f64 {
        match self.regime {
            Regime::Focusing => -1.0,
            _ => 1.0,
        }
    }
    /// c²: real on the admissible set.
    pub fn squared(&self) -> f64 {
        (self.value * self.value).re
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Asymptotics {
    Schwartz,
    FiniteDensity { rho: f64, theta: f64 },
}

impl Asymptotics {
    pub fn rho(&self) -> f64 {
        match *self {
            Asymptotics::Schwartz => 0.0,
            Asymptotics::FiniteDensity { rho, .. } => rho,
        }
    }
    pub fn theta(&self) -> f64 {
        match *self {
            Asymptotics::Schwartz => 0.0,
            Asymptotics::FiniteDensity { theta, .. } => theta,
        }
    }
    /// Limits (q(−∞), q(+∞)).
    pub fn limits(&self) -> (C64, C64) {
        match *self {
            Asymptotics::Schwartz => (ZERO, ZERO),
            Asymptotics::FiniteDensity { rho, theta } => (C64::new(rho, 0.0), C64::from_polar(rho, theta)),
        }
    }
}

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;
const MIN_SAMPLES: usize = 16;

/// Field samples q(xᵢ) on the uniform grid xᵢ = −L + i·h.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldProfile {
    half_width: f64,
    h: f64,
    values: Vec<C64>,
    asymptotics: Asymptotics,
    boundary_tol: f64,
}

impl FieldProfile {
    /// Samples on the closed interval [−L, L].
    pub fn new(values: Vec<C64>, half_width: f64, asymptotics: Asymptotics, boundary_tol: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!("need at least {MIN_SAMPLES} samples")));
        }
        let h = 2.0 * half_width / (values.len() - 1) as f64;
        Self::with_spacing(values, half_width, h, asymptotics, boundary_tol)
    }

    /// Samples at −L + i·h, not necessarily reaching +L (periodic grids stop at L − h).
    pub fn with_spacing(
        values: Vec<C64>,
        half_width: f64,
        h: f64,
        asymptotics: Asymptotics,
        boundary_tol: f64,
    ) -> Result<Self> {
        if values.len() < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!("{} samples, need at least {MIN_SAMPLES}", values.len())));
        }
        if !(half_width > 0.0 && h > 0.0 && boundary_tol > 0.0) {
            return Err(Error::InvalidInput("L, h and boundary_tol must be positive".into()));
        }
        if let Asymptotics::FiniteDensity { rho, theta } = asymptotics {
            if !(rho > 0.0) || !(0.0..2.0 * std::f64::consts::PI).contains(&theta) {
                return Err(Error::InvalidInput(format!("finite density needs rho > 0, theta in [0, 2pi): {rho}, {theta}")));
            }
        }
        let p = FieldProfile { half_width, h, values, asymptotics, boundary_tol };
        p.check_boundary()?;
        Ok(p)
    }

    /// Validate that explicit abscissae are uniform before accepting the samples.
    pub fn from_grid(xs: &[f64], values: Vec<C64>, asymptotics: Asymptotics, boundary_tol: f64) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < MIN_SAMPLES {
            return Err(Error::InvalidInput("grid and values must match and hold at least 16 samples".into()));
        }
        let n = xs.len();
        let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        let scale = xs[0].abs().max(xs[n - 1].abs()).max(1.0);
        let dev = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - (xs[0] + i as f64 * h)).abs())
            .fold(0.0, f64::max);
        if dev > 64.0 * f64::EPSILON * scale || h <= 0.0 {
            return Err(Error::NonUniformGrid(dev));
        }
        Self::with_spacing(values, -xs[0], h, asymptotics, boundary_tol)
    }

    /// Sample a function on n points of [−L, L].
    pub fn from_fn(half_width: f64, n: usize, asymptotics: Asymptotics, boundary_tol: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        let h = 2.0 * half_width / (n.max(2) - 1) as f64;
        let values = (0..n).map(|i| f(-half_width + i as f64 * h)).collect();
        Self::new(values, half_width, asymptotics, boundary_tol)
    }

    fn check_boundary(&self) -> Result<()> {
        let (lo, hi) = self.asymptotics.limits();
        let first = self.values[0];
        let last = *self.values.last().unwrap();
        let (d0, d1) = ((first - lo).norm(), (last - hi).norm());
        if d0 >= self.boundary_tol || d1 >= self.boundary_tol {
            return Err(Error::BoundaryMismatch(format!(
                "|q(x0) - {lo}| = {d0:e}, |q(xN) - {hi}| = {d1:e}, tolerance {:e}",
                self.boundary_tol
            )));
        }
        Ok(())
    }

    /// Same grid and asymptotics, new samples (revalidated).
    pub fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        Self::with_spacing(values, self.half_width, self.h, self.asymptotics, self.boundary_tol)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn asymptotics(&self) -> Asymptotics {
        self.asymptotics
    }
    pub fn boundary_tol(&self) -> f64 {
        self.boundary_tol
    }
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }
    pub fn x_first(&self) -> f64 {
        self.x(0)
    }
    pub fn x_last(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// q(x) by six-point Lagrange interpolation; constant extension past the ends.
    pub fn sample(&self, x: f64) -> C64 {
        let n = self.len();
        let t = (x - self.x_first()) / self.h;
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = t.floor() as isize;
        let start = (i - 2).clamp(0, n as isize - 6) as usize;
        let u = t - start as f64;
        let mut acc = ZERO;
        for j in 0..6 {
            let mut w = 1.0;
            for m in 0..6 {
                if m != j {
                    w *= (u - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += self.values[start + j] * w;
        }
        acc
    }

    /// ∫|q|² dx by the trapezoid rule (Schwartz) or ∫(|q|² − ρ²) dx (finite density).
    pub fn mass(&self) -> f64 {
        let r2 = self.asymptotics.rho().powi(2);
        let f: Vec<f64> = self.values.iter().map(|q| q.norm_sqr() - r2).collect();
        trapezoid(&f, self.h)
    }
}

pub(crate) fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1]))
}

/// Sorted real spectral samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    samples: Vec<f64>,
}

impl KGrid {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|k| !k.is_finite()) {
            return Err(Error::EmptyGrid("no finite samples".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(KGrid { samples })
    }
    pub fn uniform(k_max: f64, n: usize) -> Result<Self> {
        if !(k_max > 0.0) || n < 2 {
            return Err(Error::EmptyGrid(format!("k_max = {k_max}, n = {n}")));
        }
        let dk = 2.0 * k_max / (n - 1) as f64;
        Ok(KGrid { samples: (0..n).map(|j| -k_max + j as f64 * dk).collect() })
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    /// Spacing if the grid is uniform.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let n = self.len();
        if n < 2 {
            return None;
        }
        let dk = (self.samples[n - 1] - self.samples[0]) / (n - 1) as f64;
        let ok = self.samples.windows(2).all(|w| ((w[1] - w[0]) - dk).abs() < 1e-9 * dk);
        ok.then_some(dk)
    }
}

/// The spectral grid for coupling c, excluding the gap (−|c|ρ, |c|ρ) when defocusing at finite density.
pub fn make_kgrid(c: Coupling, asymptotics: Asymptotics, k_max: f64, n: usize) -> Result<KGrid> {
    if !(k_max > 0.0) || n < 2 {
        return Err(Error::EmptyGrid(format!("k_max = {k_max}, n = {n}")));
    }
    let gap = match (asymptotics, c.regime()) {
        (Asymptotics::FiniteDensity { rho, .. }, Regime::Defocusing) => c.value().norm() * rho,
        _ => 0.0,
    };
    if gap == 0.0 {
        return KGrid::uniform(k_max, n);
    }
    if k_max <= gap {
        return Err(Error::EmptyGrid(format!("k_max = {k_max} inside the gap |c|rho = {gap}")));
    }
    // cell-centred samples on [gap, k_max], mirrored; branch points are never hit
    let right = n - n / 2;
    let left = n / 2;
    let seg = |m: usize| -> Vec<f64> {
        let w = (k_max - gap) / m as f64;
        (0..m).map(|j| gap + (j as f64 + 0.5) * w).collect()
    };
    let mut samples: Vec<f64> = seg(left).into_iter().map(|k| -k).collect();
    samples.extend(seg(right));
    KGrid::from_samples(samples)
}

/// A zero of a(k) in the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEigenvalue {
    pub position: C64,
    pub order: u32,
    pub norming: Option<C64>,
    /// Set when the zero lies within 1e−4 of the real axis.
    #[serde(default)]
    pub near_axis: bool,
}

impl DiscreteEigenvalue {
    pub fn new(position: C64, order: u32) -> Result<Self> {
        if !(position.im > 0.0) || order == 0 {
            return Err(Error::InvalidInput(format!("eigenvalue {position} of order {order}")));
        }
        Ok(DiscreteEigenvalue { position, order, norming: None, near_axis: position.im < 1e-4 })
    }
}

pub const DEFAULT_DET_TOL: f64 = 1e-8;

/// a(k), b(k) on a spectral grid together with the discrete spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringData {
    pub kgrid: KGrid,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub discrete: Vec<DiscreteEigenvalue>,
    pub coupling: Coupling,
}

impl ScatteringData {
    /// Build and check det S = |a|² − (c*/c)|b|² = 1 within det_tol at every k.
    pub fn new(kgrid: KGrid, a: Vec<C64>, b: Vec<C64>, discrete: Vec<DiscreteEigenvalue>, coupling: Coupling, det_tol: f64) -> Result<Self> {
        if a.len() != kgrid.len() || b.len() != kgrid.len() {
            return Err(Error::InvalidInput("a, b and kgrid lengths differ".into()));
        }
        let sd = ScatteringData { kgrid, a, b, discrete, coupling };
        if let Some((k, drift)) = sd.worst_det_drift() {
            if drift > det_tol {
                return Err(Error::DeterminantDrift { k, drift });
            }
        }
        Ok(sd)
    }

    /// det of the symmetric form [[a*, b], [(c*/c) b*, a]] at grid point j.
    pub fn det_at(&self, j: usize) -> f64 {
        self.a[j].norm_sqr() - self.coupling.sign() * self.b[j].norm_sqr()
    }

    /// (k, |det S − 1|) at the worst grid point.
    pub fn worst_det_drift(&self) -> Option<(f64, f64)> {
        (0..self.a.len())
            .map(|j| (self.kgrid.samples()[j], (self.det_at(j) - 1.0).abs()))
            .fold(None, |acc: Option<(f64, f64)>, v| match acc {
                Some(best) if best.1 >= v.1 => Some(best),
                _ => Some(v),
            })
    }

    /// max(|a(k₀) − 1|, |a(k_N) − 1|) at the grid ends.
    pub fn edge_deviation(&self) -> f64 {
        let n = self.a.len();
        (self.a[0] - 1.0).norm().max((self.a[n - 1] - 1.0).norm())
    }

    /// ρ(k) = b/a at every grid point.
    pub fn rho(&self) -> Vec<C64> {
        self.a.iter().zip(&self.b).map(|(a, b)| b / a).collect()
    }

    /// Zeros counted with multiplicity.
    pub fn zero_count(&self) -> u32 {
        self.discrete.iter().map(|z| z.order).sum()
    }
}

/// ρ(k) = b(k)/a(k), linear interpolation between grid nodes.
pub fn reflection(sd: &ScatteringData, k: f64) -> Result<C64> {
    let ks = sd.kgrid.samples();
    let n = ks.len();
    if k < ks[0] || k > ks[n - 1] {
        return Err(Error::InvalidInput(format!("k = {k} outside the grid")));
    }
    let j = match ks.binary_search_by(|p| p.partial_cmp(&k).unwrap()) {
        Ok(j) => return ratio(sd, j),
        Err(j) => j,
    };
    let (k0, k1) = (ks[j - 1], ks[j]);
    let t = (k - k0) / (k1 - k0);
    Ok(ratio(sd, j - 1)? * (1.0 - t) + ratio(sd, j)? * t)
}

fn ratio(sd: &ScatteringData, j: usize) -> Result<C64> {
    if sd.a[j].norm() < 1e-300 {
        return Err(Error::DivisionByZeroA(sd.kgrid.samples()[j]));
    }
    Ok(sd.b[j] / sd.a[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(C64::new(0.0, 1.0)).unwrap(), Regime::Focusing);
        assert_eq!(classify_regime(C64::new(0.0, 0.0)).unwrap(), Regime::Free);
        assert_eq!(classify_regime(C64::new(0.5, 0.0)).unwrap(), Regime::Defocusing);
        assert!(matches!(classify_regime(C64::new(1.0, 1.0)), Err(Error::InvalidCoupling(_))));
        assert!(classify_regime(C64::new(0.0, -1.0)).is_err());
        assert!(classify_regime(C64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn profile_validation() {
        let zero = FieldProfile::from_fn(10.0, 64, Asymptotics::Schwartz, 1e-8, |_| ZERO);
        assert!(zero.is_ok());
        let sech = |x: f64| C64::new(1.0 / x.cosh(), 0.0);
        assert!(FieldProfile::from_fn(40.0, 4001, Asymptotics::Schwartz, 1e-10, sech).is_ok());
        let fd = Asymptotics::FiniteDensity { rho: 1.0, theta: 0.0 };
        assert!(matches!(FieldProfile::from_fn(40.0, 4001, fd, 1e-10, sech), Err(Error::BoundaryMismatch(_))));
        let short = FieldProfile::new(vec![ZERO; 8], 1.0, Asymptotics::Schwartz, 1e-8);
        assert!(short.is_err());
    }

    #[test]
    fn nonuniform_grid_rejected() {
        let mut xs: Vec<f64> = (0..32).map(|i| -1.0 + i as f64 / 15.5).collect();
        xs[7] += 1e-6;
        let r = FieldProfile::from_grid(&xs, vec![ZERO; 32], Asymptotics::Schwartz, 1e-8);
        assert!(matches!(r, Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn interpolation_is_sixth_order() {
        let f = |x: f64| C64::new((0.7 * x).sin(), (x * x * 0.1).cos());
        let err = |n: usize| {
            let p = FieldProfile::from_fn(5.0, n, Asymptotics::Schwartz, 10.0, f).unwrap();
            [-4.987, -0.013, 1.2345, 4.99].iter().map(|&x| (p.sample(x) - f(x)).norm()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(101), err(201));
        assert!(fine < 1e-8, "{fine:e}");
        assert!(coarse / fine > 30.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn kgrids() {
        let c = Coupling::focusing(1.0).unwrap();
        let g = make_kgrid(c, Asymptotics::Schwartz, 5.0, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert!(g.uniform_spacing().is_some());
        let fd = Asymptotics::FiniteDensity { rho: 1.0, theta: 0.5 };
        let g = make_kgrid(Coupling::defocusing(1.0).unwrap(), fd, 5.0, 100).unwrap();
        assert_eq!(g.len(), 100);
        assert!(g.samples().iter().all(|k| k.abs() > 1.0));
        assert!(matches!(make_kgrid(Coupling::defocusing(2.0).unwrap(), fd, 1.0, 10), Err(Error::EmptyGrid(_))));
    }
}
