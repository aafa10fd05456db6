use serde::Deserialize;

use nnlif::experiments::IcSpec;
use nnlif::grid::{default_grid, make_grid, Grid};
use nnlif::ModelParams;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    pub ic: IcSection,
    pub run: RunSection,
    pub output: OutputSection,
    #[serde(default)]
    pub detectors: DetectorSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub b: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub v_reset: f64,
    #[serde(default = "two")]
    pub v_thresh: f64,
    #[serde(default)]
    pub delay: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub v_min: Option<f64>,
    pub dv: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "kebab-case")]
pub enum IcSection {
    PseudoEquilibrium { n: f64 },
    CycleLow,
    CycleHigh,
    DoubleMaxwellian { mu: f64, sigma: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    /// trailing-window length override; unset means max(0.2 t_end, 4 d)
    pub window: Option<f64>,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_record_every() -> usize {
    8
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.run.t_end > 0.0) {
            return Err("run.t_end must be positive".into());
        }
        if self.run.record_every == 0 {
            return Err("run.record_every must be at least 1".into());
        }
        if let Some(dv) = self.grid.dv {
            if !(dv > 0.0) {
                return Err("grid.dv must be positive".into());
            }
        }
        if let Some(w) = self.detectors.window {
            if !(w > 0.0) {
                return Err("detectors.window must be positive".into());
            }
        }
        if self.output.dir.is_empty() || self.output.dir.starts_with('/') {
            return Err("output.dir must be a nonempty relative path".into());
        }
        self.params().validate().map_err(|e| e.to_string())
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            a: self.model.a,
            b: self.model.b,
            v_reset: self.model.v_reset,
            v_thresh: self.model.v_thresh,
            delay: self.model.delay,
        }
    }

    pub fn build_grid(&self) -> nnlif::Result<Grid> {
        let p = self.params();
        match (self.grid.v_min, self.grid.dv) {
            (None, None) => default_grid(&p),
            (v_min, dv) => {
                let fallback = default_grid(&p)?;
                make_grid(
                    &p,
                    v_min.unwrap_or(fallback.v_min),
                    dv.unwrap_or(fallback.dv),
                )
            }
        }
    }

    pub fn ic_spec(&self) -> IcSpec {
        match self.ic {
            IcSection::PseudoEquilibrium { n } => IcSpec::PseudoEquilibrium { n },
            IcSection::CycleLow => IcSpec::CycleLow,
            IcSection::CycleHigh => IcSpec::CycleHigh,
            IcSection::DoubleMaxwellian { mu, sigma } => IcSpec::DoubleMaxwellian { mu, sigma },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_in_configs_parse_and_grid() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("toml") {
                continue;
            }
            let text = std::fs::read_to_string(&path).unwrap();
            let cfg = RunConfig::parse(&text)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.build_grid()
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
        assert!(seen >= 11);
    }

    #[test]
    fn rejects_absolute_output_dir() {
        let text = r#"
[model]
b = 0.0
[ic]
family = "cycle-low"
[run]
t_end = 1.0
[output]
dir = "/abs"
"#;
        assert!(RunConfig::parse(text).is_err());
    }
}
