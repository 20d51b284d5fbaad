//! Zeros of a(k) in the upper half-plane: winding numbers on rectangles, recursive
//! subdivision, Newton refinement with a central-difference derivative.

use crate::error::{Error, Result};
use crate::mat2::C64;
use crate::model::{Asymptotics, Coupling, DiscreteEigenvalue, FieldProfile, KGrid, Regime};
use crate::zs::{analytic_continue_a, norming_constant, IntegratorConfig};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Search rectangle [re_min, re_max] × [im_min, im_max].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ZeroRegion {
    /// Spans the real extent of the grid; the height bound is ½|c|∫|q − q∞| plus margin.
    pub fn default_for(p: &FieldProfile, c: Coupling, kgrid: &KGrid) -> ZeroRegion {
        let ks = kgrid.samples();
        let span = ks[0].abs().max(ks[ks.len() - 1].abs()).max(1.0);
        let (lo, hi) = p.asymptotics().limits();
        let mid = p.len() / 2;
        let dev: Vec<f64> = p
            .values()
            .iter()
            .enumerate()
            .map(|(i, q)| (q - if i < mid { lo } else { hi }).norm())
            .collect();
        let l1 = crate::model::trapezoid(&dev, p.h());
        let bound = 0.5 * c.value().norm() * l1 + 0.5;
        let floor = match (p.asymptotics(), c.regime()) {
            (Asymptotics::FiniteDensity { rho, .. }, Regime::Focusing) => c.value().norm() * rho + 0.05,
            _ => 1e-3,
        };
        let top = match p.asymptotics() {
            Asymptotics::Schwartz => bound,
            Asymptotics::FiniteDensity { rho, .. } => bound + c.value().norm() * rho,
        };
        ZeroRegion { re_min: -span, re_max: span, im_min: floor, im_max: top.max(floor + 0.5) }
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }
    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }
    fn contains(&self, k: C64, slack: f64) -> bool {
        k.re >= self.re_min - slack && k.re <= self.re_max + slack && k.im >= self.im_min - slack && k.im <= self.im_max + slack
    }
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }
}

const MAX_BISECT: u32 = 14;
const MAX_PHASE_STEP: f64 = PI / 8.0;

struct Search<'a> {
    f: Box<dyn Fn(C64) -> Result<C64> + 'a>,
    scale: f64,
}

impl Search<'_> {
    fn eval(&self, k: C64) -> Result<C64> {
        let a = (self.f)(k)?;
        if a.norm() < 1e-11 {
            return Err(Error::ContourThroughZero(k));
        }
        Ok(a)
    }

    /// Accumulated arg change of a along the segment z0 → z1.
    fn edge_phase(&self, z0: C64, z1: C64) -> Result<f64> {
        let n = 16;
        let pts: Vec<C64> = (0..=n).map(|j| z0 + (z1 - z0) * (j as f64 / n as f64)).collect();
        let vals: Vec<C64> = pts.iter().map(|&z| self.eval(z)).collect::<Result<_>>()?;
        let mut total = 0.0;
        for j in 0..n {
            total += self.refine(pts[j], pts[j + 1], vals[j], vals[j + 1], 0)?;
        }
        Ok(total)
    }

    fn refine(&self, z0: C64, z1: C64, a0: C64, a1: C64, depth: u32) -> Result<f64> {
        let d = (a1 / a0).arg();
        if d.abs() <= MAX_PHASE_STEP {
            return Ok(d);
        }
        if depth >= MAX_BISECT {
            return Err(Error::ContourThroughZero(0.5 * (z0 + z1)));
        }
        let zm = 0.5 * (z0 + z1);
        let am = self.eval(zm)?;
        Ok(self.refine(z0, zm, a0, am, depth + 1)? + self.refine(zm, z1, am, a1, depth + 1)?)
    }

    fn winding(&self, r: &ZeroRegion) -> Result<i64> {
        let c = r.corners();
        let mut total = 0.0;
        for j in 0..4 {
            total += self.edge_phase(c[j], c[(j + 1) % 4])?;
        }
        let w = total / (2.0 * PI);
        if (w - w.round()).abs() > 0.1 {
            return Err(Error::ContourThroughZero(r.center()));
        }
        Ok(w.round() as i64)
    }

    /// Newton with multiplicity m; None when it leaves the rectangle or stalls.
    fn newton(&self, r: &ZeroRegion, m: u32) -> Result<Option<C64>> {
        let mut k = r.center();
        let slack = 0.25 * r.width().max(r.height());
        for _ in 0..60 {
            let a = (self.f)(k)?;
            let h = 1e-5 * (1.0 + k.norm());
            let da = ((self.f)(k + h)? - (self.f)(k - h)?) / (2.0 * h);
            if da.norm() == 0.0 {
                return Ok(None);
            }
            let step = a / da * m as f64;
            k -= step;
            if !r.contains(k, slack) || k.im <= 0.0 {
                return Ok(None);
            }
            if step.norm() < 1e-13 * (1.0 + k.norm()) {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    fn split(&self, r: &ZeroRegion, shift: f64) -> [ZeroRegion; 2] {
        if r.width() >= r.height() {
            let xm = r.re_min + r.width() * (0.5 + shift);
            [ZeroRegion { re_max: xm, ..*r }, ZeroRegion { re_min: xm, ..*r }]
        } else {
            let ym = r.im_min + r.height() * (0.5 + shift);
            [ZeroRegion { im_max: ym, ..*r }, ZeroRegion { im_min: ym, ..*r }]
        }
    }

    fn search(&self, r: &ZeroRegion, count: i64, out: &mut Vec<(C64, u32)>) -> Result<()> {
        if count <= 0 {
            return Ok(());
        }
        let small = r.width().max(r.height()) < 1e-6 * self.scale;
        if count > 1 && !small {
            // a multiple zero: accept modified Newton if a small box around it carries the full count
            if let Some(k) = self.newton(r, count as u32)? {
                let d = 1e-3 * self.scale;
                let bx = ZeroRegion { re_min: k.re - d, re_max: k.re + d, im_min: (k.im - d).max(0.5 * k.im), im_max: k.im + d };
                if matches!(self.winding(&bx), Ok(n) if n == count) {
                    out.push((k, count as u32));
                    return Ok(());
                }
            }
        }
        if count == 1 || small {
            if let Some(k) = self.newton(r, count as u32)? {
                out.push((k, count as u32));
                return Ok(());
            }
            if small {
                return Err(Error::NewtonStalled(r.center()));
            }
        }
        // subdivide, nudging the cut if it runs through a zero
        let mut last = None;
        for shift in [0.0, 0.0137, -0.0291, 0.0713] {
            let halves = self.split(r, shift);
            let counts: Result<Vec<i64>> = halves.iter().map(|h| self.winding(h)).collect();
            match counts {
                Ok(cs) if cs.iter().sum::<i64>() == count => {
                    for (h, c) in halves.iter().zip(cs) {
                        self.search(h, c, out)?;
                    }
                    return Ok(());
                }
                Ok(_) => last = Some(Error::ContourThroughZero(r.center())),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap())
    }
}

/// Zeros of a(k) inside the region, with orders from the winding number.
pub fn find_zeros(p: &FieldProfile, c: Coupling, region: &ZeroRegion, cfg: &IntegratorConfig) -> Result<Vec<DiscreteEigenvalue>> {
    let raw = zero_search(|k| analytic_continue_a(p, c, k, cfg), region)?;
    let mut out = Vec::with_capacity(raw.len());
    for (k, order) in raw {
        let mut z = DiscreteEigenvalue::new(k, order)?;
        if order == 1 {
            z.norming = norming_constant(p, c, k, cfg).ok();
        }
        out.push(z);
    }
    Ok(out)
}

/// Winding number of a on the boundary of the region.
pub fn zero_count(p: &FieldProfile, c: Coupling, region: &ZeroRegion, cfg: &IntegratorConfig) -> Result<i64> {
    let s = Search { f: Box::new(|k| analytic_continue_a(p, c, k, cfg)), scale: 1.0 };
    with_retry(region, |r| s.winding(r))
}

fn with_retry<T>(region: &ZeroRegion, mut f: impl FnMut(&ZeroRegion) -> Result<T>) -> Result<T> {
    let mut r = *region;
    let mut err = None;
    for attempt in 0..4 {
        match f(&r) {
            Ok(v) => return Ok(v),
            Err(Error::ContourThroughZero(z)) => {
                err = Some(Error::ContourThroughZero(z));
                let d = 0.0123 * (attempt + 1) as f64;
                r = ZeroRegion {
                    re_min: region.re_min - d * region.width(),
                    re_max: region.re_max + 0.7 * d * region.width(),
                    im_min: region.im_min * (1.0 - 0.3 * d),
                    im_max: region.im_max + d * region.height(),
                };
            }
            Err(e) => return Err(e),
        }
    }
    Err(err.unwrap())
}

/// Generic driver over any analytic function in the rectangle; returns (position, order),
/// sorted by descending imaginary part.
pub fn zero_search(f: impl Fn(C64) -> Result<C64>, region: &ZeroRegion) -> Result<Vec<(C64, u32)>> {
    if !(region.im_min > 0.0 && region.im_max > region.im_min && region.re_max > region.re_min) {
        return Err(Error::InvalidInput(format!("bad search region {region:?}")));
    }
    let s = Search { f: Box::new(f), scale: region.width().max(region.height()) };
    let mut out = Vec::new();
    with_retry(region, |r| {
        out.clear();
        let n = s.winding(r)?;
        s.search(r, n, &mut out)
    })?;
    out.sort_by(|a, b| b.0.im.partial_cmp(&a.0.im).unwrap().then(a.0.re.partial_cmp(&b.0.re).unwrap()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::I;

    #[test]
    fn polynomial_roots() {
        let roots = [C64::new(0.3, 0.5), C64::new(-1.0, 1.5), C64::new(0.31, 0.52)];
        let f = move |k: C64| Ok(roots.iter().map(|r| k - r).product::<C64>() / (k + I).powi(3));
        let region = ZeroRegion { re_min: -3.0, re_max: 3.0, im_min: 0.01, im_max: 3.0 };
        let found = zero_search(f, &region).unwrap();
        assert_eq!(found.len(), 3);
        for r in roots {
            assert!(found.iter().any(|(z, o)| (z - r).norm() < 1e-10 && *o == 1));
        }
    }

    #[test]
    fn double_root_order() {
        let r = C64::new(0.2, 0.9);
        let f = move |k: C64| Ok((k - r).powi(2) / (k + I).powi(2));
        let region = ZeroRegion { re_min: -2.0, re_max: 2.0, im_min: 0.05, im_max: 2.0 };
        let found = zero_search(f, &region).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].1, 2);
        assert!((found[0].0 - r).norm() < 1e-6);
    }
}
