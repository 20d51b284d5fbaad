//! Complex Gamma (Lanczos, g = 7) and Gauss ₂F₁ on the closed unit disc.

use crate::error::{Error, Result};
use crate::mat2::{C64, I, ONE};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

#[derive(Clone, Copy, Debug)]
pub struct SpecFunConfig {
    pub series_tol: f64,
    pub max_terms: usize,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        SpecFunConfig { series_tol: 1e-17, max_terms: 20_000 }
    }
}

fn nonpositive_integer(z: C64) -> bool {
    z.re <= 0.5 && z.im.abs() < 1e-13 && (z.re - z.re.round()).abs() < 1e-13
}

/// ln sin(πz), on some branch; only exp() of it is meaningful.
fn ln_sin_pi(z: C64) -> C64 {
    if z.im.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    let (w, flip) = if z.im > 0.0 { (z, false) } else { (z.conj(), true) };
    // sin(πw) = (i/2) e^{-iπw} (1 - e^{2iπw})
    let r = -I * PI * w + (ONE - (I * 2.0 * PI * w).exp()).ln() + (I * 0.5).ln();
    if flip {
        r.conj()
    } else {
        r
    }
}

fn ln_gamma_right(z: C64) -> C64 {
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// ln Γ(z) on a branch suitable for exponentiation (not the principal log-gamma).
pub fn ln_gamma(z: C64) -> Result<C64> {
    if nonpositive_integer(z) {
        return Err(Error::PoleAtNonPositiveInteger(z));
    }
    if z.re < 0.5 {
        Ok(C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(ONE - z))
    } else {
        Ok(ln_gamma_right(z))
    }
}

/// Γ(z) for complex z off the poles.
pub fn gamma_complex(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re > 0.0 && z.re <= 20.0 && z.re == z.re.round() {
        // exact factorials for small positive integers
        let n = z.re as u32;
        return Ok(C64::new((1..n).map(|j| j as f64).product(), 0.0));
    }
    Ok(ln_gamma(z)?.exp())
}

/// 1/Γ(z), zero at the poles.
pub fn rgamma(z: C64) -> C64 {
    match ln_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => C64::new(0.0, 0.0),
    }
}

fn series(a: C64, b: C64, c: C64, z: C64, cfg: &SpecFunConfig) -> Result<C64> {
    let mut term = ONE;
    let mut sum = ONE;
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.norm() <= cfg.series_tol * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergent(format!("2F1({a}, {b}; {c}; {z}) after {} terms", cfg.max_terms)))
}

fn near_integer(w: C64) -> bool {
    w.im.abs() < 1e-9 && (w.re - w.re.round()).abs() < 1e-9
}

/// Gauss hypergeometric ₂F₁(a, b; c; z) for |z| ≤ 1.
pub fn hyp2f1(a: C64, b: C64, c: C64, z: C64) -> Result<C64> {
    hyp2f1_with(a, b, c, z, &SpecFunConfig::default())
}

pub fn hyp2f1_with(a: C64, b: C64, c: C64, z: C64, cfg: &SpecFunConfig) -> Result<C64> {
    if nonpositive_integer(c) {
        return Err(Error::ParameterPole(c));
    }
    if z.norm() > 1.0 + 1e-14 {
        return Err(Error::NonConvergent(format!("|z| = {} outside the unit disc", z.norm())));
    }
    let s = c - a - b;
    if (z - ONE).norm() < 1e-15 {
        if s.re <= 0.0 {
            return Err(Error::NonConvergent("z = 1 requires Re(c - a - b) > 0".into()));
        }
        return Ok(gamma_complex(c)? * gamma_complex(s)? * rgamma(c - a) * rgamma(c - b));
    }
    let polynomial = nonpositive_integer(a) || nonpositive_integer(b);
    if z.norm() <= 0.5 || polynomial {
        return series(a, b, c, z, cfg);
    }
    if z.re < 0.5 {
        // Pfaff: w = z/(z-1) has |w| < 1 here
        let w = z / (z - 1.0);
        return Ok((ONE - z).powc(-a) * series(a, c - b, c, w, cfg)?);
    }
    if near_integer(s) {
        return series(a, b, c, z, cfg);
    }
    let w = ONE - z;
    let g1 = gamma_complex(c)? * gamma_complex(s)? * rgamma(c - a) * rgamma(c - b);
    let g2 = gamma_complex(c)? * gamma_complex(-s)? * rgamma(a) * rgamma(b);
    let f1 = series(a, b, ONE - s, w, cfg)?;
    let f2 = series(c - a, c - b, s + 1.0, w, cfg)?;
    Ok(g1 * f1 + w.powc(s) * g2 * f2)
}
