//! Model files: JSON documents with a schema version and no unknown fields.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use secrecy_core::gamma::CodedChannelModel;
use secrecy_core::region::SecrecyModel;
use secrecy_core::{Channel, DistortionMeasure, Distribution};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub source: SourceSection,
    pub side_channels: SideChannels,
    pub coded_channels: CodedChannels,
    #[serde(default)]
    pub cost: Option<CostSection>,
    /// `d[u][û]`
    pub distortion: Vec<Vec<f64>>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub size: usize,
    pub probs: Vec<f64>,
}

/// Either both side-channel matrices, or `"systematic": true` for `V = W = U`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideChannels {
    #[serde(default)]
    pub systematic: bool,
    pub v_given_u: Option<Vec<Vec<f64>>>,
    pub w_given_v: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodedChannels {
    pub y_given_x: Vec<Vec<f64>>,
    pub z_given_y: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    pub phi: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: f64,
}

/// Defaults for point evaluations and sweep grids; command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: Option<f64>,
    #[serde(rename = "R")]
    pub key_rate: Option<f64>,
    #[serde(rename = "D")]
    pub distortion: Option<f64>,
    #[serde(default)]
    pub grids: Grids,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(rename = "R")]
    pub key_rate: Option<Grid>,
    #[serde(rename = "D")]
    pub distortion: Option<Grid>,
    pub lambda: Option<Grid>,
    #[serde(rename = "Q")]
    pub q: Option<Grid>,
    #[serde(rename = "r")]
    pub rate_floor: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Largest number of points in one sweep.
pub const MAX_GRID_POINTS: usize = 100_000;

impl Grid {
    /// `start, start + step, ...` up to `stop` (inclusive within a relative 1e-9).
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let Grid { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite()) || stop < start {
            return Err(CliError::Usage(format!(
                "grid needs finite start <= stop and step > 0, got start {start}, stop {stop}, step {step}"
            )));
        }
        let count = ((stop - start) / step * (1.0 + 1e-9)).floor() + 1.0;
        if count > MAX_GRID_POINTS as f64 {
            return Err(CliError::Usage(format!("grid has {count} points, limit {MAX_GRID_POINTS}")));
        }
        Ok((0..count as usize).map(|i| start + i as f64 * step).collect())
    }
}

/// A parsed, validated model with the digest of its file.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub file: ModelFile,
    pub model: SecrecyModel,
    pub sha256: String,
}

impl LoadedModel {
    pub fn budget(&self) -> f64 {
        self.file.cost.as_ref().map_or(0.0, |c| c.q)
    }
}

fn field<T>(path: &str, r: secrecy_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

pub fn load(path: &Path) -> CliResult<LoadedModel> {
    let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("cannot read model {}: {e}", path.display())))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("{}: not UTF-8: {e}", path.display())))?;
    let parsed = parse(&text).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(LoadedModel { sha256, ..parsed })
}

/// Parses and validates a model document; errors name the line or field.
pub fn parse(text: &str) -> CliResult<LoadedModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
    if file.version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "version: unsupported schema version {} (expected {SCHEMA_VERSION})",
            file.version
        )));
    }
    let model = build(&file)?;
    Ok(LoadedModel { file, model, sha256: String::new() })
}

fn build(file: &ModelFile) -> CliResult<SecrecyModel> {
    if file.source.size != file.source.probs.len() {
        return Err(CliError::Usage(format!(
            "source.size: {} does not match the {} entries of source.probs",
            file.source.size,
            file.source.probs.len()
        )));
    }
    let pu = field("source.probs", Distribution::new(file.source.probs.clone()))?;
    let ch_y = field("coded_channels.y_given_x", Channel::new(file.coded_channels.y_given_x.clone()))?;
    let ch_z = field("coded_channels.z_given_y", Channel::new(file.coded_channels.z_given_y.clone()))?;
    let phi = match &file.cost {
        Some(c) => c.phi.clone(),
        None => vec![0.0; ch_y.input_size()],
    };
    let coded = field("cost.phi", CodedChannelModel::new(ch_y, ch_z, phi))?;
    let d = field("distortion", DistortionMeasure::new(file.distortion.clone()))?;
    let sc = &file.side_channels;
    match (sc.systematic, &sc.v_given_u, &sc.w_given_v) {
        (true, None, None) => field("side_channels", SecrecyModel::systematic(pu, coded, d)),
        (true, _, _) => Err(CliError::Usage(
            "side_channels: a systematic model takes no v_given_u or w_given_v".into(),
        )),
        (false, Some(v), Some(w)) => {
            let ch_v = field("side_channels.v_given_u", Channel::new(v.clone()))?;
            let ch_w = field("side_channels.w_given_v", Channel::new(w.clone()))?;
            field("model", SecrecyModel::new(pu, ch_v, ch_w, coded, d))
        }
        (false, _, _) => Err(CliError::Usage(
            "side_channels: give both v_given_u and w_given_v, or \"systematic\": true".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC_MODEL: &str = r#"{
        "version": 1,
        "source": { "size": 2, "probs": [0.5, 0.5] },
        "side_channels": {
            "v_given_u": [[0.9, 0.1], [0.1, 0.9]],
            "w_given_v": [[0.8, 0.2], [0.2, 0.8]]
        },
        "coded_channels": {
            "y_given_x": [[1.0, 0.0], [0.0, 1.0]],
            "z_given_y": [[0.9, 0.1], [0.1, 0.9]]
        },
        "distortion": [[0.0, 1.0], [1.0, 0.0]],
        "params": { "lambda": 1.0, "grids": { "R": { "start": 0.0, "stop": 1.0, "step": 0.05 } } }
    }"#;

    fn err(text: &str) -> String {
        match parse(text) {
            Err(CliError::Usage(msg)) => msg,
            other => panic!("expected a usage error, got {other:?}"),
        }
    }

    #[test]
    fn parses_a_complete_model() {
        let m = parse(BSC_MODEL).unwrap();
        assert_eq!(m.file.params.lambda, Some(1.0));
        assert_eq!(m.file.params.grids.key_rate.unwrap().points().unwrap().len(), 21);
        assert!(!m.model.is_systematic());
        assert_eq!(m.budget(), 0.0);
    }

    #[test]
    fn unknown_field_names_its_line() {
        let text = BSC_MODEL.replace("\"version\": 1,", "\"version\": 1,\n        \"colour\": 3,");
        let msg = err(&text);
        assert!(msg.contains("unknown field `colour`"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let msg = err(&BSC_MODEL.replace(r#""v_given_u": [[0.9, 0.1]"#, r#""v_given_u": [[0.9, 0.2]"#));
        assert!(msg.starts_with("side_channels.v_given_u:"), "{msg}");
        let msg = err(&BSC_MODEL.replace("\"size\": 2", "\"size\": 3"));
        assert!(msg.starts_with("source.size:"), "{msg}");
        let msg = err(&BSC_MODEL.replace("\"version\": 1", "\"version\": 2"));
        assert!(msg.starts_with("version:"), "{msg}");
    }

    #[test]
    fn systematic_models_take_no_side_matrices() {
        let text = BSC_MODEL.replace(
            r#""v_given_u": [[0.9, 0.1], [0.1, 0.9]],
            "w_given_v": [[0.8, 0.2], [0.2, 0.8]]"#,
            r#""systematic": true"#,
        );
        assert!(parse(&text).unwrap().model.is_systematic());
        let both = BSC_MODEL.replace(r#""v_given_u""#, r#""systematic": true, "v_given_u""#);
        assert!(err(&both).starts_with("side_channels:"));
    }

    #[test]
    fn grid_points_include_the_stop() {
        let g = Grid { start: 0.0, stop: 0.3, step: 0.1 };
        assert_eq!(g.points().unwrap().len(), 4);
        assert!(Grid { start: 1.0, stop: 0.0, step: 0.1 }.points().is_err());
        assert!(Grid { start: 0.0, stop: 1.0, step: 0.0 }.points().is_err());
    }
}
