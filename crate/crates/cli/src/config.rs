//! TOML run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use muskat_core::geometry::derive_params;
use muskat_core::{BubbleState, Complex64, PhysicalParams, SolverConfig, SpectralField};
use serde::Deserialize;

pub const OUT_DIR_ENV: &str = "MUSKAT_OUT_DIR";

/// Raw fluid constants, SI or any consistent unit system.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConstants {
    /// Viscosity inside the bubble.
    pub mu1: f64,
    /// Viscosity outside.
    pub mu2: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Surface tension coefficient.
    pub sigma: f64,
    /// Permeability.
    pub kappa: f64,
    #[serde(default = "standard_gravity")]
    pub gravity: f64,
    /// Radius of the circle with the bubble's area (length units).
    pub radius: f64,
}

fn standard_gravity() -> f64 {
    9.81
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Entries `[k, re, im]` for θ̂(k); negative k is stored through the conjugate.
    #[serde(default)]
    pub modes: Vec<(i64, f64, f64)>,
    /// ϑ̂(0), radians.
    #[serde(default)]
    pub mean_angle: f64,
    /// z(0) as `[x, y]`.
    #[serde(default)]
    pub base_point: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub curve_snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
            curve_snapshots: false,
        }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("muskat-out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<PhysicalParams>,
    fluid: Option<FluidConstants>,
    #[serde(default)]
    initial: InitialSection,
    solver: Option<SolverConfig>,
    #[serde(default)]
    outputs: OutputSection,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub initial: InitialSection,
    pub solver: Option<SolverConfig>,
    pub outputs: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        let params = match (raw.params, raw.fluid) {
            (Some(_), Some(_)) => bail!("[params] and [fluid] are mutually exclusive; give one"),
            (None, None) => bail!("missing [params] or [fluid]"),
            (Some(p), None) => PhysicalParams::new(p.a_mu, p.a_sigma, p.a_rho, p.radius)?,
            (None, Some(f)) => derive_params(f.mu1, f.mu2, f.rho1, f.rho2, f.sigma, f.kappa, f.gravity, f.radius)?,
        };
        if let Some(s) = &raw.solver {
            s.validate()?;
        }
        Ok(Self {
            params,
            initial: raw.initial,
            solver: raw.solver,
            outputs: raw.outputs,
        })
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let mut s = self.solver.clone().context("missing [solver] section")?;
        s.curve_snapshots |= self.outputs.curve_snapshots;
        Ok(s)
    }

    /// θ₀ on N modes with the reality condition applied.
    pub fn initial_theta(&self, n: usize) -> Result<SpectralField> {
        let mut th = SpectralField::zeros(n);
        let mut seen = vec![None::<Complex64>; n + 1];
        for &(k, re, im) in &self.initial.modes {
            if k == 0 {
                bail!("initial.modes: k = 0 is the mean angle; set initial.mean_angle instead");
            }
            if k.unsigned_abs() as usize > n {
                bail!("initial.modes: |k| = {} exceeds n_modes = {n}", k.abs());
            }
            let c = if k > 0 { Complex64::new(re, im) } else { Complex64::new(re, -im) };
            let slot = k.unsigned_abs() as usize;
            match seen[slot] {
                Some(prev) if prev != c => {
                    bail!("initial.modes: entries for k = {slot} and k = -{slot} are not conjugate")
                }
                _ => seen[slot] = Some(c),
            }
            th.set_coeff(slot as i64, c);
        }
        Ok(th)
    }

    pub fn initial_state(&self, n: usize) -> Result<BubbleState> {
        let base = Complex64::new(self.initial.base_point[0], self.initial.base_point[1]);
        Ok(BubbleState::new(self.initial_theta(n)?, self.initial.mean_angle, self.params.radius, base)?)
    }

    /// Output directory, with the environment override applied.
    pub fn out_dir(&self) -> PathBuf {
        env_out_dir().unwrap_or_else(|| self.outputs.directory.clone())
    }
}

pub fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[params]
a_mu = 0.3
a_sigma = 1.0
a_rho = 1.0
radius = 1.0

[initial]
modes = [[2, 0.05, 0.0], [-3, 0.01, 0.02]]

[solver]
n_modes = 16
t_end = 0.1
"#;

    #[test]
    fn parses_and_conjugates() {
        let c = RunConfig::parse(BASE).unwrap();
        let th = c.initial_theta(16).unwrap();
        assert_eq!(th.coeff(3), Complex64::new(0.01, -0.02));
        assert_eq!(c.solver().unwrap().n_modes, 16);
    }

    #[test]
    fn fluid_and_params_exclusive() {
        let both = format!(
            "{BASE}\n[fluid]\nmu1 = 1.0\nmu2 = 1.0\nrho1 = 1.0\nrho2 = 2.0\nsigma = 1.0\nkappa = 1.0\nradius = 1.0\n"
        );
        assert!(RunConfig::parse(&both).is_err());
    }

    #[test]
    fn rejects_bad_modes() {
        let c = RunConfig::parse(&BASE.replace("[-3, 0.01, 0.02]", "[40, 0.01, 0.0]")).unwrap();
        assert!(c.initial_theta(16).is_err());
        let c = RunConfig::parse(&BASE.replace("[-3, 0.01, 0.02]", "[-2, 0.04, 0.0]")).unwrap();
        assert!(c.initial_theta(16).is_err());
    }

    #[test]
    fn unknown_field_is_an_error() {
        let err = RunConfig::parse(&BASE.replace("t_end", "t_stop")).unwrap_err();
        assert!(format!("{err:#}").contains("t_stop"));
    }
}
