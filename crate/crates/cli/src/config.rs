//! Run configuration, builtin profiles and the loading of referenced files.

use crate::CliError;
use nls_quench::closed_form::{
    focusing_amplitude, profile_fd_focusing, soliton_profile_fd_defocusing, soliton_profile_rd, SolitonParamsFd,
    SolitonParamsRd,
};
use nls_quench::darboux::{DarbouxStep, DualMode};
use nls_quench::glm::{ResolventConfig, XGrid};
use nls_quench::io::{from_json, ProfileJson, ScatteringJson};
use nls_quench::model::{make_kgrid, Asymptotics, Coupling, FieldProfile, KGrid, ScatteringData, DEFAULT_BOUNDARY_TOL};
use nls_quench::nls::StepperConfig;
use nls_quench::zeros::ZeroRegion;
use nls_quench::zs::IntegratorConfig;
use nls_quench::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub const BUILTINS: &[&str] = &["sech", "kink", "fd-focusing", "zero", "gaussian"];

/// Either a profile file or a builtin with optional parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Background parameter Z > 1 of the focusing dark-background profile, A = Z − 1/Z.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KGridSpec {
    pub k_max: f64,
    pub n: usize,
}

impl Default for KGridSpec {
    fn default() -> Self {
        KGridSpec { k_max: 5.0, n: 201 }
    }
}

/// Pass/fail limits of `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub det_drift: f64,
    pub factorization: f64,
    pub factorization_std: f64,
    pub theta_unitarity: f64,
    pub abs_a_drift: f64,
    pub phase_residual: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            det_drift: 1e-6,
            factorization: 1e-5,
            factorization_std: 1e-5,
            theta_unitarity: 1e-6,
            abs_a_drift: 1e-4,
            phase_residual: 1e-2,
        }
    }
}

/// Everything one run needs. Missing fields take defaults; the echo written to the run
/// directory has them filled in.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    /// Scattering data file (`reconstruct` only), an alternative to `profile`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_post: Option<Coupling>,
    /// Target coupling of the dual quench (`darboux`) or of the reconstruction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<Coupling>,
    pub kgrid: KGridSpec,
    pub integrator: IntegratorConfig,
    pub resolvent: ResolventConfig,
    pub stepper: StepperConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xgrid: Option<XGrid>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<DarbouxStep>,
    pub strip: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_mode: Option<DualMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<ZeroRegion>,
    /// ν of the sech classification; defaults to |c′|.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Also run the Θ factorization check in `quench`.
    pub factorization: bool,
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parse a config file; relative paths inside it are taken relative to its directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                let joined = base.join(&*p);
                // absolute where possible so the echoed config reruns from anywhere
                *p = std::fs::canonicalize(&joined).unwrap_or(joined);
            }
        };
        if let Some(f) = cfg.profile.as_mut().and_then(|p| p.file.as_mut()) {
            rebase(f);
        }
        if let Some(d) = cfg.data.as_mut() {
            rebase(d);
        }
        if let Some(o) = cfg.out.as_mut() {
            rebase(o);
        }
        Ok(cfg)
    }

    /// `--builtin` replaces the profile but keeps parameters given for the same builtin.
    pub fn set_builtin(&mut self, name: &str) {
        match self.profile.as_mut() {
            Some(p) if p.builtin.as_deref() == Some(name) => {}
            _ => self.profile = Some(ProfileSpec { builtin: Some(name.to_string()), ..Default::default() }),
        }
    }

    /// Fill every default that depends on the profile so the echo is self-contained.
    pub fn resolve(&mut self) -> Result<(), CliError> {
        if let Some(p) = self.profile.as_mut() {
            p.resolve()?;
            if self.coupling.is_none() {
                self.coupling = Some(p.default_coupling()?);
            }
        }
        if self.coupling.is_none() && self.data.is_none() {
            self.coupling = Some(Coupling::focusing(1.0).map_err(CliError::config)?);
        }
        Ok(())
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling.expect("resolved config has a coupling")
    }

    pub fn profile(&self) -> Result<FieldProfile, CliError> {
        let spec = self
            .profile
            .as_ref()
            .ok_or_else(|| CliError::Config("no profile: give --builtin or a \"profile\" in the config".into()))?;
        spec.build(self.coupling())
    }

    pub fn kgrid(&self, asym: Asymptotics, c: Coupling) -> Result<KGrid, CliError> {
        make_kgrid(c, asym, self.kgrid.k_max, self.kgrid.n).map_err(CliError::config)
    }

    pub fn scattering_file(&self) -> Result<Option<ScatteringData>, CliError> {
        let Some(path) = self.data.as_ref() else { return Ok(None) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read scattering data {}: {e}", path.display())))?;
        let j: ScatteringJson = from_json(&text).map_err(CliError::config)?;
        j.to_data().map(Some).map_err(CliError::config)
    }
}

impl ProfileSpec {
    fn name(&self) -> Option<&str> {
        self.builtin.as_deref()
    }

    fn resolve(&mut self) -> Result<(), CliError> {
        match (&self.file, self.name()) {
            (Some(_), Some(_)) => return Err(CliError::Config("profile has both \"file\" and \"builtin\"".into())),
            (None, None) => return Err(CliError::Config("profile needs \"file\" or \"builtin\"".into())),
            (Some(_), None) => return Ok(()),
            (None, Some(_)) => {}
        }
        let name = self.name().unwrap().to_string();
        let (l, n) = match name.as_str() {
            "sech" => {
                self.amplitude.get_or_insert(1.0);
                self.velocity.get_or_insert(0.0);
                self.phase.get_or_insert(0.0);
                self.shift.get_or_insert(0.0);
                (20.0, 2001)
            }
            "kink" => {
                self.rho.get_or_insert(1.0);
                self.theta.get_or_insert(0.5 * PI);
                (20.0, 2001)
            }
            "fd-focusing" => {
                self.z.get_or_insert(2.0);
                (20.0, 2001)
            }
            "zero" => (10.0, 201),
            "gaussian" => {
                self.amplitude.get_or_insert(0.5);
                self.width.get_or_insert(1.0);
                (10.0, 1001)
            }
            other => {
                return Err(CliError::Config(format!("unknown builtin \"{other}\"; expected one of {}", BUILTINS.join(", "))))
            }
        };
        self.half_width.get_or_insert(l);
        self.n.get_or_insert(n);
        Ok(())
    }

    fn default_coupling(&self) -> Result<Coupling, CliError> {
        match self.name() {
            Some("kink") => Coupling::defocusing(1.0),
            _ => Coupling::focusing(1.0),
        }
        .map_err(CliError::config)
    }

    fn build(&self, c: Coupling) -> Result<FieldProfile, CliError> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read profile {}: {e}", path.display())))?;
            let j: ProfileJson = from_json(&text).map_err(CliError::config)?;
            return j.to_profile(self.boundary_tol.unwrap_or(DEFAULT_BOUNDARY_TOL)).map_err(CliError::config);
        }
        let (l, n) = (self.half_width.unwrap(), self.n.unwrap());
        let tol = self.boundary_tol.unwrap_or(DEFAULT_BOUNDARY_TOL);
        let p = match self.name().unwrap() {
            "sech" => {
                let sp = SolitonParamsRd::new(
                    self.amplitude.unwrap(),
                    self.velocity.unwrap(),
                    self.phase.unwrap(),
                    self.shift.unwrap(),
                );
                sp.and_then(|sp| soliton_profile_rd(&sp, l, n))
            }
            "kink" => SolitonParamsFd::new(self.rho.unwrap(), self.theta.unwrap()).and_then(|mut sp| {
                sp.c0 = c.value().norm();
                soliton_profile_fd_defocusing(&sp, l, n)
            }),
            "fd-focusing" => focusing_amplitude(self.z.unwrap()).and_then(|a| profile_fd_focusing(a, l, n)),
            "zero" => FieldProfile::from_fn(l, n, Asymptotics::Schwartz, tol, |_| C64::new(0.0, 0.0)),
            "gaussian" => {
                let (a, w) = (self.amplitude.unwrap(), self.width.unwrap());
                FieldProfile::from_fn(l, n, Asymptotics::Schwartz, tol, |x| C64::new(a * (-0.5 * (x / w).powi(2)).exp(), 0.0))
            }
            _ => unreachable!("resolved builtin"),
        };
        p.map_err(CliError::config)
    }
}
