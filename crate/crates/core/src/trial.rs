//! Per-demonstration metadata and its JSON form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expertise {
    Novice,
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Active,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    A,
    B,
    C,
    D,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::A, Task::B, Task::C, Task::D];
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::A => "A",
            Task::B => "B",
            Task::C => "C",
            Task::D => "D",
        };
        f.write_str(s)
    }
}

/// Metadata for one recorded trial.
///
/// Active trials are task demonstrations; passive trials are recordings of an
/// observer watching the video of the active trial named by `source_trial_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub trial_id: String,
    pub participant_id: String,
    pub expertise: Expertise,
    pub modality: Modality,
    pub task: Task,
    pub source_trial_id: Option<String>,
    pub score: f64,
    pub penalty: f64,
    pub completion_time_s: f64,
    pub trial_order: i64,
    pub width: u32,
    pub height: u32,
}

impl TrialRecord {
    /// Checks the per-record invariants (not cross-record references).
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(format!("trial {}: {m}", self.trial_id)));
        if self.trial_id.is_empty() {
            return Err(Error::Contract("trial_id must be non-empty".into()));
        }
        match (self.modality, &self.source_trial_id) {
            (Modality::Passive, None) => return bad("passive trial needs a source_trial_id".into()),
            (Modality::Active, Some(_)) => return bad("active trial must not have a source_trial_id".into()),
            _ => {}
        }
        if !(self.completion_time_s > 0.0) || !self.completion_time_s.is_finite() {
            return bad(format!("completion_time_s must be > 0, got {}", self.completion_time_s));
        }
        if !self.score.is_finite() || !self.penalty.is_finite() {
            return bad("score and penalty must be finite".into());
        }
        if self.width == 0 || self.height == 0 {
            return bad("width and height must be positive".into());
        }
        Ok(())
    }
}

/// Parses a JSON array of trial records and checks every record.
///
/// Trial ids must be unique and every passive record must name an active
/// record in the same list.
pub fn parse_trials_json(bytes: &[u8]) -> Result<Vec<TrialRecord>> {
    let trials: Vec<TrialRecord> = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    check_trials(&trials)?;
    Ok(trials)
}

pub fn check_trials(trials: &[TrialRecord]) -> Result<()> {
    let mut by_id = std::collections::HashMap::new();
    for t in trials {
        t.check()?;
        if by_id.insert(t.trial_id.as_str(), t).is_some() {
            return Err(Error::Contract(format!("duplicate trial_id {}", t.trial_id)));
        }
    }
    for t in trials {
        if let Some(src) = &t.source_trial_id {
            match by_id.get(src.as_str()) {
                None => {
                    return Err(Error::DanglingReference { trial_id: t.trial_id.clone(), source_id: src.clone() })
                }
                Some(s) if s.modality != Modality::Active => {
                    return Err(Error::Contract(format!(
                        "trial {}: source {} is not an active trial",
                        t.trial_id, src
                    )))
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}
