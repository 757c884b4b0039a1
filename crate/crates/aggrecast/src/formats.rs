//! Instance and schedule file formats.
//!
//! Coordinates are stored as a sign plus the natural log of the magnitude,
//! printed as a 30-significant-digit decimal string. That round-trips f64
//! exactly and keeps tower-sized values out of JSON number land, where
//! serializers disagree about infinities and big exponents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{ModelParams, Point};
use crate::instances::Instance;
use crate::logdomain::{LogScalar, SignedLog};
use crate::scheduler::{PowerMode, Schedule};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad field {field}: {detail}")]
    BadField { field: &'static str, detail: String },
}

fn encode_ln(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{:.29e}", v)
    }
}

fn decode_ln(s: &str, field: &'static str) -> Result<f64, FormatError> {
    if s == "-inf" {
        return Ok(f64::NEG_INFINITY);
    }
    s.parse::<f64>().map_err(|e| FormatError::BadField { field, detail: e.to_string() })
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ParamsFile {
    pub alpha: f64,
    pub beta: f64,
    pub noise_log: String,
    pub epsilon: f64,
    pub tau: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PointFile {
    pub x_sign: i8,
    pub x_log: String,
    pub y_sign: i8,
    pub y_log: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub label: String,
    pub params: ParamsFile,
    pub points: Vec<PointFile>,
    pub links: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub designated_tree: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub designated_conflicts: Option<Vec<(usize, usize)>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ScheduleFile {
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub period: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_powers_log: Option<Vec<Vec<String>>>,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub split_slots: usize,
}

fn signed_to_file(v: SignedLog) -> (i8, String) {
    (v.sign(), encode_ln(v.abs().ln()))
}

fn signed_from_file(sign: i8, log: &str, field: &'static str) -> Result<SignedLog, FormatError> {
    if !(-1..=1).contains(&sign) {
        return Err(FormatError::BadField { field, detail: format!("sign {sign}") });
    }
    let ln = decode_ln(log, field)?;
    if sign == 0 {
        return Ok(SignedLog::ZERO);
    }
    Ok(SignedLog::new(sign, LogScalar::from_ln(ln)))
}

pub fn instance_to_file(inst: &Instance) -> InstanceFile {
    InstanceFile {
        label: inst.label.clone(),
        params: ParamsFile {
            alpha: inst.params.alpha,
            beta: inst.params.beta,
            noise_log: encode_ln(inst.params.noise.ln()),
            epsilon: inst.params.epsilon,
            tau: inst.params.tau,
        },
        points: inst
            .points
            .iter()
            .map(|p| {
                let (x_sign, x_log) = signed_to_file(p.x);
                let (y_sign, y_log) = signed_to_file(p.y);
                PointFile { x_sign, x_log, y_sign, y_log }
            })
            .collect(),
        links: inst.links.clone(),
        designated_tree: inst.designated_tree.clone(),
        designated_conflicts: inst.designated_conflicts.clone(),
    }
}

pub fn instance_from_file(file: &InstanceFile) -> Result<Instance, FormatError> {
    let mut points = Vec::with_capacity(file.points.len());
    for p in &file.points {
        points.push(Point::new(
            signed_from_file(p.x_sign, &p.x_log, "x")?,
            signed_from_file(p.y_sign, &p.y_log, "y")?,
        ));
    }
    Ok(Instance {
        label: file.label.clone(),
        params: ModelParams {
            alpha: file.params.alpha,
            beta: file.params.beta,
            noise: LogScalar::from_ln(decode_ln(&file.params.noise_log, "noise_log")?),
            epsilon: file.params.epsilon,
            tau: file.params.tau,
        },
        points,
        links: file.links.clone(),
        designated_tree: file.designated_tree.clone(),
        designated_conflicts: file.designated_conflicts.clone(),
    })
}

pub fn schedule_to_file(s: &Schedule) -> ScheduleFile {
    let (mode, tau) = match s.mode {
        PowerMode::Arbitrary => ("arbitrary".to_string(), None),
        PowerMode::Oblivious { tau } => ("oblivious".to_string(), Some(tau)),
    };
    ScheduleFile {
        mode,
        tau,
        period: s.period.clone(),
        witness_powers_log: s
            .witness_powers
            .as_ref()
            .map(|w| w.iter().map(|slot| slot.iter().map(|p| encode_ln(p.ln())).collect()).collect()),
        gamma: s.gamma,
        delta: s.delta,
        split_slots: s.split_slots,
    }
}

pub fn schedule_from_file(file: &ScheduleFile) -> Result<Schedule, FormatError> {
    let mode = match file.mode.as_str() {
        "arbitrary" => PowerMode::Arbitrary,
        "oblivious" => PowerMode::Oblivious {
            tau: file.tau.ok_or(FormatError::BadField {
                field: "tau",
                detail: "oblivious schedule without tau".into(),
            })?,
        },
        other => {
            return Err(FormatError::BadField { field: "mode", detail: other.to_string() });
        }
    };
    let witness = match &file.witness_powers_log {
        None => None,
        Some(w) => {
            let mut out = Vec::with_capacity(w.len());
            for slot in w {
                let mut powers = Vec::with_capacity(slot.len());
                for p in slot {
                    powers.push(LogScalar::from_ln(decode_ln(p, "witness_powers_log")?));
                }
                out.push(powers);
            }
            Some(out)
        }
    };
    Ok(Schedule {
        period: file.period.clone(),
        mode,
        witness_powers: witness,
        gamma: file.gamma,
        delta: file.delta,
        split_slots: file.split_slots,
    })
}

pub fn write_instance(path: &std::path::Path, inst: &Instance) -> Result<(), FormatError> {
    let file = instance_to_file(inst);
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance, FormatError> {
    let text = std::fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    instance_from_file(&file)
}

pub fn write_schedule(path: &std::path::Path, s: &Schedule) -> Result<(), FormatError> {
    let file = schedule_to_file(s);
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_schedule(path: &std::path::Path) -> Result<Schedule, FormatError> {
    let text = std::fs::read_to_string(path)?;
    let file: ScheduleFile = serde_json::from_str(&text)?;
    schedule_from_file(&file)
}

/// Conflict-graph edge list export, a debugging aid.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConflictGraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_doubly_exp_chain, gen_fig1_example, gen_suboptimal_mst};

    #[test]
    fn instance_roundtrip_exact() {
        for inst in [
            gen_fig1_example(),
            gen_doubly_exp_chain(8, 0.3, 12.0).unwrap(),
            gen_suboptimal_mst(0.4, 1000.0, 4).unwrap().instance,
        ] {
            let file = instance_to_file(&inst);
            let text = serde_json::to_string_pretty(&file).unwrap();
            let back: InstanceFile = serde_json::from_str(&text).unwrap();
            let decoded = instance_from_file(&back).unwrap();
            assert_eq!(inst, decoded, "value round trip for {}", inst.label);
            // byte-identical re-serialization
            let text2 = serde_json::to_string_pretty(&instance_to_file(&decoded)).unwrap();
            assert_eq!(text, text2, "byte round trip for {}", inst.label);
        }
    }

    #[test]
    fn zero_and_negative_coordinates_roundtrip() {
        let inst = gen_suboptimal_mst(0.4, 1000.0, 4).unwrap().instance;
        assert!(inst.points.iter().any(|p| p.x.sign() < 0), "construction has negative coords");
        assert!(inst.points.iter().any(|p| p.x.sign() == 0), "construction anchors at 0");
        let decoded = instance_from_file(&instance_to_file(&inst)).unwrap();
        assert_eq!(inst.points, decoded.points);
    }
}
