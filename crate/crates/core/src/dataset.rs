//! Demonstration ranking, viewing-subset allocation, and leakage-safe
//! train/val/test splits with expertise/modality conditions.
//!
//! A *content unit* is one active demonstration together with every passive
//! recording of observers watching its video. Units are never split: all
//! annotations derived from one demonstration video land in the same split.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trial::{check_trials, Expertise, Modality, Task, TrialRecord};

/// Standard deviations below this count as zero in per-task z-scores.
pub const ZERO_STD: f64 = 1e-12;
/// PerfIndex values closer than this rank as ties.
pub const RANK_TIE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfFeatures {
    pub score: f64,
    pub penalty: f64,
    pub time: f64,
    pub task: Task,
}

impl From<&TrialRecord> for PerfFeatures {
    fn from(t: &TrialRecord) -> Self {
        Self { score: t.score, penalty: t.penalty, time: t.completion_time_s, task: t.task }
    }
}

/// Z-scores each value against the other values of its task.
///
/// Uses the population standard deviation; a task whose values are all equal
/// (including a single-value task) scores 0 throughout.
pub fn zscore_per_task(values: &[(Task, f64)]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Argument("z-normalization of an empty group".into()));
    }
    if values.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Argument("z-normalization input must be finite".into()));
    }
    let mut groups: BTreeMap<Task, Vec<f64>> = BTreeMap::new();
    for &(task, v) in values {
        groups.entry(task).or_default().push(v);
    }
    let stats: BTreeMap<Task, (f64, f64)> = groups
        .into_iter()
        .map(|(task, vs)| {
            let n = vs.len() as f64;
            let mean = vs.iter().sum::<f64>() / n;
            let std = (vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            (task, (mean, std))
        })
        .collect();
    Ok(values
        .iter()
        .map(|(task, v)| {
            let (mean, std) = stats[task];
            if std < ZERO_STD {
                0.0
            } else {
                (v - mean) / std
            }
        })
        .collect())
}

/// `z(score) - z(penalty) - z(time)` with per-task z-normalization.
pub fn perf_index(features: &[PerfFeatures]) -> Result<Vec<f64>> {
    let col = |f: fn(&PerfFeatures) -> f64| -> Result<Vec<f64>> {
        zscore_per_task(&features.iter().map(|x| (x.task, f(x))).collect::<Vec<_>>())
    };
    let zs = col(|f| f.score)?;
    let zp = col(|f| f.penalty)?;
    let zt = col(|f| f.time)?;
    Ok(zs.iter().zip(&zp).zip(&zt).map(|((s, p), t)| s - p - t).collect())
}

fn tie_key(perf: f64) -> i64 {
    (perf / RANK_TIE_RESOLUTION).round() as i64
}

/// Ranks active demonstrations of one task and expertise level with their
/// PerfIndex values.
///
/// Novice demonstrations rank worst first, intermediate best first. Ties
/// go to the earlier `trial_order`, then to the smaller `trial_id`.
pub fn rank_records(trials: &[TrialRecord], expertise: Expertise) -> Result<Vec<(&TrialRecord, f64)>> {
    let Some(first) = trials.first() else {
        return Err(Error::Argument("no demonstrations to rank".into()));
    };
    for t in trials {
        if t.task != first.task || t.expertise != expertise || t.modality != Modality::Active {
            return Err(Error::Argument(format!(
                "trial {} is not an active {:?} demonstration of task {}",
                t.trial_id, expertise, first.task
            )));
        }
    }
    let features: Vec<PerfFeatures> = trials.iter().map(PerfFeatures::from).collect();
    let perf = perf_index(&features)?;
    let mut ranked: Vec<(&TrialRecord, f64)> = trials.iter().zip(perf).collect();
    ranked.sort_by(|(a, pa), (b, pb)| {
        let by_perf = match expertise {
            Expertise::Novice => tie_key(*pa).cmp(&tie_key(*pb)),
            Expertise::Intermediate => tie_key(*pb).cmp(&tie_key(*pa)),
        };
        by_perf.then(a.trial_order.cmp(&b.trial_order)).then(a.trial_id.cmp(&b.trial_id))
    });
    Ok(ranked)
}

pub fn rank_demonstrations(trials: &[TrialRecord], expertise: Expertise) -> Result<Vec<String>> {
    Ok(rank_records(trials, expertise)?.into_iter().map(|(t, _)| t.trial_id.clone()).collect())
}

/// Walks the ranked list keeping the first trial of each participant until
/// `quota` trials are selected.
pub fn allocate_viewing_subsets(ranked: &[&TrialRecord], quota: usize) -> Result<Vec<String>> {
    let available = ranked.iter().map(|t| t.participant_id.as_str()).collect::<BTreeSet<_>>().len();
    if quota > available {
        return Err(Error::Quota { quota, available });
    }
    let mut seen = BTreeSet::new();
    Ok(ranked
        .iter()
        .filter(|t| seen.insert(t.participant_id.as_str()))
        .take(quota)
        .map(|t| t.trial_id.clone())
        .collect())
}

/// Checks that no viewer watches one of their own demonstrations.
///
/// `schedule` holds `(viewer participant_id, watched trial_id)` pairs.
pub fn validate_viewing_schedule(schedule: &[(String, String)], trials: &[TrialRecord]) -> Result<()> {
    let owner: HashMap<&str, &str> = trials.iter().map(|t| (t.trial_id.as_str(), t.participant_id.as_str())).collect();
    let mut own = Vec::new();
    for (viewer, trial) in schedule {
        match owner.get(trial.as_str()) {
            None => return Err(Error::DanglingReference { trial_id: format!("schedule entry of {viewer}"), source_id: trial.clone() }),
            Some(p) if *p == viewer => own.push(format!("{viewer} -> {trial}")),
            Some(_) => {}
        }
    }
    if own.is_empty() {
        Ok(())
    } else {
        Err(Error::Contract(format!("participants scheduled to view their own demonstrations: {}", own.join(", "))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Condition {
    IA,
    IP,
    NA,
    NP,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::IA, Condition::IP, Condition::NA, Condition::NP];

    fn of(modality: Modality, gaze: Expertise) -> Self {
        match (modality, gaze) {
            (Modality::Active, Expertise::Intermediate) => Condition::IA,
            (Modality::Passive, Expertise::Intermediate) => Condition::IP,
            (Modality::Active, Expertise::Novice) => Condition::NA,
            (Modality::Passive, Expertise::Novice) => Condition::NP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { train: 0.6, val: 0.2, test: 0.2 }
    }
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let f = Self { train, val, test };
        let parts = [train, val, test];
        if parts.iter().any(|p| !(*p > 0.0) || !p.is_finite()) || ((train + val + test) - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("split fractions must be positive and sum to 1, got {train}/{val}/{test}")));
        }
        Ok(f)
    }

    /// Unit counts for a task with `n` units.
    ///
    /// Largest-remainder rounding, then every split receives at least one
    /// unit when `n >= 3`. One unit goes to train; two go to train and test.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        match n {
            0 => return [0, 0, 0],
            1 => return [1, 0, 0],
            2 => return [1, 0, 1],
            _ => {}
        }
        let quotas = [self.train, self.val, self.test].map(|f| f * n as f64);
        let mut counts = quotas.map(|q| q.floor() as usize);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
        let mut left = n - counts.iter().sum::<usize>();
        for &k in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[k] += 1;
            left -= 1;
        }
        while let Some(empty) = counts.iter().position(|c| *c == 0) {
            let largest = (0..3).max_by_key(|&k| (counts[k], std::cmp::Reverse(k))).expect("three splits");
            counts[largest] -= 1;
            counts[empty] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContentUnit {
    pub unit_id: String,
    #[serde(skip)]
    pub task: Task,
    pub split: Split,
    /// The active trial first, then passive viewings of it in id order.
    pub trial_ids: Vec<String>,
}

/// One gaze annotation over one demonstration video.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotation {
    /// The demonstration (active trial) whose video is annotated.
    pub trial_id: String,
    /// The trial record holding the gaze data.
    pub annotation_id: String,
    pub split: Split,
    #[serde(skip)]
    pub task: Task,
    #[serde(skip)]
    pub modality: Modality,
    #[serde(skip)]
    pub gaze_expertise: Expertise,
    #[serde(skip)]
    pub demo_expertise: Expertise,
    #[serde(skip)]
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub seed: u64,
    pub fractions: SplitFractions,
    pub units: Vec<ContentUnit>,
    pub split_of: BTreeMap<String, Split>,
    pub annotations: Vec<Annotation>,
}

/// Assigns whole content units to splits with a seeded shuffle per task.
pub fn build_splits(trials: &[TrialRecord], fractions: SplitFractions, seed: u64) -> Result<SplitAssignment> {
    let fractions = SplitFractions::new(fractions.train, fractions.val, fractions.test)?;
    check_trials(trials)?;

    let by_id: HashMap<&str, &TrialRecord> = trials.iter().map(|t| (t.trial_id.as_str(), t)).collect();
    let mut members: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in trials.iter().filter(|t| t.modality == Modality::Active) {
        members.entry(t.trial_id.as_str()).or_default();
    }
    for t in trials.iter().filter(|t| t.modality == Modality::Passive) {
        let src = t.source_trial_id.as_deref().expect("checked passive source");
        members.get_mut(src).expect("checked active source").push(t.trial_id.as_str());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units = Vec::new();
    for task in Task::ALL {
        let mut ids: Vec<&str> = members.keys().copied().filter(|id| by_id[id].task == task).collect();
        ids.shuffle(&mut rng);
        let [n_train, n_val, _] = fractions.counts(ids.len());
        for (k, id) in ids.into_iter().enumerate() {
            let split = if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            let mut trial_ids = vec![id.to_string()];
            let mut passive: Vec<&str> = members[id].clone();
            passive.sort_unstable();
            trial_ids.extend(passive.into_iter().map(String::from));
            units.push(ContentUnit { unit_id: id.to_string(), task, split, trial_ids });
        }
    }
    units.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));

    let split_of: BTreeMap<String, Split> =
        units.iter().flat_map(|u| u.trial_ids.iter().map(move |id| (id.clone(), u.split))).collect();
    let mut annotations: Vec<Annotation> = trials
        .iter()
        .map(|t| {
            let demo = match t.modality {
                Modality::Active => t,
                Modality::Passive => by_id[t.source_trial_id.as_deref().expect("checked")],
            };
            Annotation {
                trial_id: demo.trial_id.clone(),
                annotation_id: t.trial_id.clone(),
                split: split_of[&t.trial_id],
                task: t.task,
                modality: t.modality,
                gaze_expertise: t.expertise,
                demo_expertise: demo.expertise,
                condition: Condition::of(t.modality, t.expertise),
            }
        })
        .collect();
    annotations.sort_by(|a, b| a.annotation_id.cmp(&b.annotation_id));
    Ok(SplitAssignment { seed, fractions, units, split_of, annotations })
}

/// `(trial_id, annotation_id)` pairs of one condition within one split.
pub fn filter_condition(assignment: &SplitAssignment, condition: Condition, split: Split) -> Vec<(String, String)> {
    assignment
        .annotations
        .iter()
        .filter(|a| a.split == split && a.condition == condition)
        .filter(|a| match condition {
            Condition::IA => a.demo_expertise == Expertise::Intermediate,
            Condition::NA => a.demo_expertise == Expertise::Novice,
            Condition::IP | Condition::NP => true,
        })
        .map(|a| (a.trial_id.clone(), a.annotation_id.clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedTrial {
    pub trial_id: String,
    pub participant_id: String,
    pub perf_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewingSubset {
    pub task: Task,
    pub expertise: Expertise,
    pub ranked: Vec<RankedTrial>,
    pub selected: Vec<String>,
}

/// Serializable split manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub fractions: SplitFractions,
    pub units: Vec<ContentUnit>,
    pub conditions: BTreeMap<Condition, Vec<Annotation>>,
    pub subsets: Vec<ViewingSubset>,
}

/// Ranks and allocates every (task, expertise) group of active trials, then
/// builds the splits. Without a quota each group selects one trial per
/// participant.
pub fn build_manifest(
    trials: &[TrialRecord],
    fractions: SplitFractions,
    seed: u64,
    quota: Option<usize>,
) -> Result<SplitManifest> {
    let assignment = build_splits(trials, fractions, seed)?;
    let mut subsets = Vec::new();
    for task in Task::ALL {
        for expertise in [Expertise::Novice, Expertise::Intermediate] {
            let mut group: Vec<TrialRecord> = trials
                .iter()
                .filter(|t| t.modality == Modality::Active && t.task == task && t.expertise == expertise)
                .cloned()
                .collect();
            // A fixed summation order keeps PerfIndex bits independent of input order.
            group.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
            if group.is_empty() {
                continue;
            }
            let ranked = rank_records(&group, expertise)?;
            let records: Vec<&TrialRecord> = ranked.iter().map(|(t, _)| *t).collect();
            let participants = records.iter().map(|t| &t.participant_id).collect::<BTreeSet<_>>().len();
            let selected = allocate_viewing_subsets(&records, quota.unwrap_or(participants))?;
            subsets.push(ViewingSubset {
                task,
                expertise,
                ranked: ranked
                    .iter()
                    .map(|(t, p)| RankedTrial { trial_id: t.trial_id.clone(), participant_id: t.participant_id.clone(), perf_index: *p })
                    .collect(),
                selected,
            });
        }
    }
    let conditions = Condition::ALL
        .into_iter()
        .map(|c| (c, assignment.annotations.iter().filter(|a| a.condition == c).cloned().collect()))
        .collect();
    Ok(SplitManifest { seed, fractions: assignment.fractions, units: assignment.units, conditions, subsets })
}
