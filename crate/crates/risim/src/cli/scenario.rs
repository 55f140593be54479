//! Scenario file schema (JSON with explicit units in field names) and its
//! resolution into runnable components.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::AmplitudeProfile;
use crate::coverage::GridSpec;
use crate::error::{Result, RisError};
use crate::scene::Scene;

/// Top-level scenario file.
///
/// The global `seed` determines every random stream: synthesis, noise, and
/// Bernoulli sensing draw their own sub-seeds from it, so one seed pins
/// every output byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub seed: u64,
    pub scene: SceneSpec,
    pub channel: ChannelSpec,
    pub campaign: CampaignSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpecFile>,
    /// Output directory, resolved relative to the working directory; the
    /// `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub tx_position_m: [f64; 3],
    pub rx_position_m: [f64; 3],
    pub ris_center_m: [f64; 3],
    /// Unit normal of the RIS plane; defaults to +y.
    #[serde(default = "default_normal")]
    pub ris_normal: [f64; 3],
    pub rows: usize,
    pub cols: usize,
    /// Defaults to half the carrier wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_spacing_m: Option<f64>,
    pub carrier_frequency_hz: f64,
    /// Row-major activity grid (rows × cols); `true` = active.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<Vec<bool>>>,
}

fn default_normal() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

impl SceneSpec {
    pub fn to_scene(&self) -> Result<Scene<f64>> {
        let spacing = self
            .element_spacing_m
            .unwrap_or(0.5 * crate::scene::SPEED_OF_LIGHT / self.carrier_frequency_hz);
        let mut scene = Scene::new(
            self.tx_position_m,
            self.rx_position_m,
            self.ris_center_m,
            self.ris_normal,
            self.rows,
            self.cols,
            spacing,
            self.carrier_frequency_hz,
        )?;
        if let Some(grid) = &self.mask {
            if grid.len() != self.rows || grid.iter().any(|row| row.len() != self.cols) {
                return Err(RisError::InvalidScene(format!(
                    "mask grid must be {}x{}",
                    self.rows, self.cols
                )));
            }
            let flat: Vec<bool> = grid.iter().flatten().copied().collect();
            scene = scene.with_mask(flat)?;
        }
        Ok(scene)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Freespace,
    SparseAngular,
    Import,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSpec {
    Unit,
    Rayleigh,
}

impl From<ProfileSpec> for AmplitudeProfile {
    fn from(p: ProfileSpec) -> Self {
        match p {
            ProfileSpec::Unit => AmplitudeProfile::Unit,
            ProfileSpec::Rayleigh => AmplitudeProfile::Rayleigh,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub model: ChannelModel,
    /// Angular sparsity for the `sparse_angular` generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    /// Synthesis seed override; derived from the global seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Include the direct Tx→Rx path.
    #[serde(default)]
    pub los: bool,
    /// Gain file for the `import` model, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub import_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude_profile: Option<ProfileSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    Hadamard,
    Omp,
    Iterative,
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Hadamard => "hadamard",
            MethodSpec::Omp => "omp",
            MethodSpec::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub method: MethodSpec,
    /// Sensing rows for the `omp` method; defaults to K·L/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// OMP sparsity; defaults to ⌈K·L/64⌉.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    /// Per-measurement SNR; absent = noiseless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    /// Pilot repetitions averaged per iterative probe.
    #[serde(default = "default_one")]
    pub probe_repeats: usize,
    /// Probe accounting for the iterative method: 1 reuses the running best
    /// as the baseline, 2 probes both states of every element.
    #[serde(default = "default_one")]
    pub probes_per_element: usize,
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecFile {
    pub origin_m: [f64; 2],
    pub cell_size_m: f64,
    pub nx: usize,
    pub ny: usize,
    pub z_m: f64,
}

impl GridSpecFile {
    pub fn to_grid(&self) -> Result<GridSpec<f64>> {
        let grid = GridSpec {
            origin: self.origin_m,
            cell_size: self.cell_size_m,
            nx: self.nx,
            ny: self.ny,
            z: self.z_m,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Scenario with the seed override applied and paths anchored.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub file: ScenarioFile,
    pub path: PathBuf,
    pub scene: Scene<f64>,
    pub seed: u64,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| RisError::io(path, e))?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| RisError::Schema {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        file.validate(path)?;
        Ok(file)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let schema = |message: String| RisError::Schema {
            path: path.display().to_string(),
            message,
        };
        if self.campaign.probe_repeats == 0 {
            return Err(schema("campaign.probe_repeats must be at least 1".into()));
        }
        if !(self.campaign.probes_per_element == 1 || self.campaign.probes_per_element == 2) {
            return Err(schema(format!(
                "campaign.probes_per_element must be 1 or 2, got {}",
                self.campaign.probes_per_element
            )));
        }
        if self.channel.model == ChannelModel::Import && self.channel.import_path.is_none() {
            return Err(schema("channel.import_path required for the import model".into()));
        }
        if let Some(snr) = self.campaign.snr_db {
            if !snr.is_finite() {
                return Err(schema(format!("campaign.snr_db must be finite, got {snr}")));
            }
        }
        Ok(())
    }

    pub fn resolve(self, path: &Path, seed_override: Option<u64>) -> Result<ResolvedScenario> {
        let scene = self.scene.to_scene().map_err(|e| RisError::Schema {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let seed = seed_override.unwrap_or(self.seed);
        Ok(ResolvedScenario {
            file: self,
            path: path.to_path_buf(),
            scene,
            seed,
        })
    }
}

impl ResolvedScenario {
    pub fn schema_err(&self, message: impl ToString) -> RisError {
        RisError::Schema {
            path: self.path.display().to_string(),
            message: message.to_string(),
        }
    }

    /// Anchors a scenario-relative path at the scenario file's directory.
    pub fn relative_to_scenario(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(p)
        }
    }

    pub fn synth_seed(&self) -> u64 {
        self.file
            .channel
            .seed
            .unwrap_or_else(|| derive_seed(self.seed, SeedDomain::Synthesis))
    }

    pub fn noise_seed(&self) -> u64 {
        derive_seed(self.seed, SeedDomain::Noise)
    }

    pub fn sensing_seed(&self) -> u64 {
        derive_seed(self.seed, SeedDomain::Sensing)
    }
}

/// Independent random streams derived from the one global seed.
#[derive(Debug, Clone, Copy)]
pub enum SeedDomain {
    Synthesis,
    Noise,
    Sensing,
}

impl SeedDomain {
    fn tag(&self) -> u64 {
        match self {
            SeedDomain::Synthesis => 0x53_59_4E_54,
            SeedDomain::Noise => 0x4E_4F_49_53,
            SeedDomain::Sensing => 0x42_45_52_4E,
        }
    }
}

pub fn derive_seed(global: u64, domain: SeedDomain) -> u64 {
    splitmix64(global ^ domain.tag())
}

/// SplitMix64 finalizer; decorrelates the per-domain sub-seeds.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The in-repo default scenario: 32×32 RIS at the origin, 0.5λ spacing at
/// 5.2 GHz, Tx [23.79, 16.54, 28], Rx [−23, 156, 2].
pub fn default_32x32(method: MethodSpec) -> ScenarioFile {
    ScenarioFile {
        seed: 1,
        scene: SceneSpec {
            tx_position_m: [23.79, 16.54, 28.0],
            rx_position_m: [-23.0, 156.0, 2.0],
            ris_center_m: [0.0, 0.0, 0.0],
            ris_normal: [0.0, 1.0, 0.0],
            rows: 32,
            cols: 32,
            element_spacing_m: None,
            carrier_frequency_hz: 5.2e9,
            mask: None,
        },
        channel: ChannelSpec {
            model: ChannelModel::Freespace,
            sparsity: None,
            seed: None,
            los: false,
            import_path: None,
            amplitude_profile: None,
        },
        campaign: CampaignSpec {
            method,
            m: None,
            sparsity: None,
            snr_db: None,
            probe_repeats: 1,
            probes_per_element: 1,
        },
        grid: Some(GridSpecFile {
            origin_m: [-47.0, 132.0],
            cell_size_m: 4.0,
            nx: 13,
            ny: 13,
            z_m: 2.0,
        }),
        outputs: Some(PathBuf::from("out")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_scene_constants() {
        let file = default_32x32(MethodSpec::Hadamard);
        let scene = file.scene.to_scene().unwrap();
        assert_eq!(scene.rows, 32);
        assert_eq!(scene.cols, 32);
        let lambda = scene.wavelength();
        approx::assert_relative_eq!(scene.element_spacing, 0.5 * lambda, epsilon = 1e-15);
        approx::assert_relative_eq!(lambda, 0.05765, epsilon = 1e-5);
        assert_eq!(scene.tx_position, [23.79, 16.54, 28.0]);
    }

    #[test]
    fn seed_domains_are_decorrelated() {
        let a = derive_seed(1, SeedDomain::Synthesis);
        let b = derive_seed(1, SeedDomain::Noise);
        let c = derive_seed(1, SeedDomain::Sensing);
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, SeedDomain::Synthesis));
    }

    #[test]
    fn mask_grid_shape_is_validated() {
        let mut file = default_32x32(MethodSpec::Hadamard);
        file.scene.rows = 2;
        file.scene.cols = 2;
        file.scene.mask = Some(vec![vec![true, true, true], vec![true, true, true]]);
        assert!(file.scene.to_scene().is_err());
        file.scene.mask = Some(vec![vec![true, false], vec![true, true]]);
        let scene = file.scene.to_scene().unwrap();
        assert_eq!(scene.active_count(), 3);
    }

    #[test]
    fn probes_per_element_is_validated() {
        let mut file = default_32x32(MethodSpec::Iterative);
        file.campaign.probes_per_element = 3;
        let text = serde_json::to_string(&file).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            ScenarioFile::load(&path),
            Err(RisError::Schema { .. })
        ));
    }

    #[test]
    fn unknown_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let mut v = serde_json::to_value(default_32x32(MethodSpec::Hadamard)).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("surprise".into(), serde_json::json!(1));
        fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
        assert!(matches!(
            ScenarioFile::load(&path),
            Err(RisError::Schema { .. })
        ));
    }
}
