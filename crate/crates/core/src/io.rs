//! JSON records exchanged with the command line and CSV projections for plotting.

use crate::error::{Error, Result};
use crate::mat2::C64;
use crate::model::{Asymptotics, Coupling, DiscreteEigenvalue, FieldProfile, KGrid, ScatteringData, DEFAULT_DET_TOL};
use crate::quench::{Classification, QuenchOutcome, QuenchReport};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Complex numbers as {"re": …, "im": …}.
pub mod cobj {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        Repr { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let r = Repr::deserialize(d)?;
        Ok(C64::new(r.re, r.im))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileJson {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub h: f64,
    pub asymptotics: Asymptotics,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ProfileJson {
    pub fn from_profile(p: &FieldProfile) -> Self {
        ProfileJson {
            half_width: p.half_width(),
            h: p.h(),
            asymptotics: p.asymptotics(),
            re: p.values().iter().map(|z| z.re).collect(),
            im: p.values().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_profile(&self, boundary_tol: f64) -> Result<FieldProfile> {
        if self.re.len() != self.im.len() {
            return Err(Error::InvalidInput("re and im have different lengths".into()));
        }
        let values = self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect();
        FieldProfile::with_spacing(values, self.half_width, self.h, self.asymptotics, boundary_tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroJson {
    pub re: f64,
    pub im: f64,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norming: Option<ComplexJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringJson {
    pub k: Vec<f64>,
    pub a_re: Vec<f64>,
    pub a_im: Vec<f64>,
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
    pub zeros: Vec<ZeroJson>,
    pub coupling: Coupling,
}

impl ScatteringJson {
    pub fn from_data(sd: &ScatteringData) -> Self {
        ScatteringJson {
            k: sd.kgrid.samples().to_vec(),
            a_re: sd.a.iter().map(|z| z.re).collect(),
            a_im: sd.a.iter().map(|z| z.im).collect(),
            b_re: sd.b.iter().map(|z| z.re).collect(),
            b_im: sd.b.iter().map(|z| z.im).collect(),
            zeros: sd
                .discrete
                .iter()
                .map(|z| ZeroJson { re: z.position.re, im: z.position.im, order: z.order, norming: z.norming.map(Into::into) })
                .collect(),
            coupling: sd.coupling,
        }
    }

    pub fn to_data(&self) -> Result<ScatteringData> {
        let n = self.k.len();
        if [self.a_re.len(), self.a_im.len(), self.b_re.len(), self.b_im.len()].iter().any(|&m| m != n) {
            return Err(Error::InvalidInput("scattering arrays have different lengths".into()));
        }
        let a = self.a_re.iter().zip(&self.a_im).map(|(&r, &i)| C64::new(r, i)).collect();
        let b = self.b_re.iter().zip(&self.b_im).map(|(&r, &i)| C64::new(r, i)).collect();
        let discrete = self
            .zeros
            .iter()
            .map(|z| {
                let mut d = DiscreteEigenvalue::new(C64::new(z.re, z.im), z.order)?;
                d.norming = z.norming.map(Into::into);
                Ok(d)
            })
            .collect::<Result<Vec<_>>>()?;
        ScatteringData::new(KGrid::from_samples(self.k.clone())?, a, b, discrete, self.coupling, DEFAULT_DET_TOL.max(1e-6))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationJson {
    pub label: QuenchOutcome,
    #[serde(rename = "predicted_N")]
    pub predicted_n: u32,
    #[serde(rename = "found_N")]
    pub found_n: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchReportJson {
    pub pre: ScatteringJson,
    pub post: ScatteringJson,
    pub classification: ClassificationJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization_residual: Option<f64>,
}

impl QuenchReportJson {
    pub fn new(r: &QuenchReport, cls: &Classification, factorization_residual: Option<f64>) -> Self {
        QuenchReportJson {
            pre: ScatteringJson::from_data(&r.pre),
            post: ScatteringJson::from_data(&r.post),
            classification: ClassificationJson { label: cls.label, predicted_n: cls.predicted_n, found_n: cls.found_n },
            factorization_residual,
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    // serialization of these plain records cannot fail
    serde_json::to_string_pretty(v).expect("serializable record") + "\n"
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("JSON: {e}")))
}

/// Comma-separated columns with a header row, 17 significant digits, LF line endings.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], columns: &[&[f64]]) -> std::io::Result<()> {
    assert_eq!(header.len(), columns.len(), "one header per column");
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows), "columns of equal length");
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for r in 0..rows {
        line.clear();
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", col[r]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn profile_csv<W: Write>(w: W, p: &FieldProfile) -> std::io::Result<()> {
    let xs = p.xs();
    let re: Vec<f64> = p.values().iter().map(|z| z.re).collect();
    let im: Vec<f64> = p.values().iter().map(|z| z.im).collect();
    let abs: Vec<f64> = p.values().iter().map(|z| z.norm()).collect();
    write_csv(w, &["x", "re", "im", "abs"], &[&xs, &re, &im, &abs])
}

pub fn scattering_csv<W: Write>(w: W, sd: &ScatteringData) -> std::io::Result<()> {
    let j = ScatteringJson::from_data(sd);
    let abs_rho: Vec<f64> = sd.rho().iter().map(|z| z.norm()).collect();
    write_csv(w, &["k", "a_re", "a_im", "b_re", "b_im", "abs_rho"], &[&j.k, &j.a_re, &j.a_im, &j.b_re, &j.b_im, &abs_rho])
}

pub fn zeros_csv<W: Write>(w: W, zeros: &[DiscreteEigenvalue]) -> std::io::Result<()> {
    let re: Vec<f64> = zeros.iter().map(|z| z.position.re).collect();
    let im: Vec<f64> = zeros.iter().map(|z| z.position.im).collect();
    let ord: Vec<f64> = zeros.iter().map(|z| z.order as f64).collect();
    write_csv(w, &["re", "im", "order"], &[&re, &im, &ord])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trip() {
        let p = FieldProfile::from_fn(4.0, 33, Asymptotics::FiniteDensity { rho: 1.0, theta: 0.5 }, 1e-3, |x| {
            C64::from_polar(1.0, 0.25 * (1.0 + (4.0 * x).tanh()))
        })
        .unwrap();
        let text = to_json(&ProfileJson::from_profile(&p));
        assert!(text.contains("\"L\"") && text.contains("\"kind\": \"finite_density\""));
        let back: ProfileJson = from_json(&text).unwrap();
        assert_eq!(back.to_profile(1e-3).unwrap(), p);
    }

    #[test]
    fn scattering_round_trip() {
        let kg = KGrid::uniform(1.0, 3).unwrap();
        let mut z = DiscreteEigenvalue::new(C64::new(0.0, 0.5), 1).unwrap();
        z.norming = Some(C64::new(-1.0, 0.0));
        let sd = ScatteringData::new(kg, vec![C64::new(1.0, 0.0); 3], vec![C64::new(0.0, 0.0); 3], vec![z], Coupling::focusing(1.0).unwrap(), 1e-12).unwrap();
        let text = to_json(&ScatteringJson::from_data(&sd));
        let back: ScatteringJson = from_json(&text).unwrap();
        assert_eq!(back.to_data().unwrap(), sd);
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        write_csv(&mut out, &["x", "y"], &[&[0.1, 2.0], &[-3.0, 1e-20]]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "x,y\n1.0000000000000001e-1,-3.0000000000000000e0\n2.0000000000000000e0,9.9999999999999995e-21\n");
    }

    #[test]
    fn bad_json_is_an_input_error() {
        assert!(matches!(from_json::<ProfileJson>("{"), Err(Error::InvalidInput(_))));
    }
}
