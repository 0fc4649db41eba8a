mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{naive_perf_index, random_dataset, rng};
use gazekit::dataset::{
    allocate_viewing_subsets, build_manifest, build_splits, filter_condition, perf_index, rank_demonstrations,
    rank_records, zscore_per_task, Condition, PerfFeatures, Split, SplitFractions,
};
use gazekit::{Expertise, Modality, Task, TrialRecord};
use rand::Rng;

fn group(trials: &[TrialRecord], task: Task, expertise: Expertise) -> Vec<TrialRecord> {
    trials
        .iter()
        .filter(|t| t.task == task && t.expertise == expertise && t.modality == Modality::Active)
        .cloned()
        .collect()
}

#[test]
fn perf_index_fixture() {
    let f = [
        PerfFeatures { score: 90.0, penalty: 0.0, time: 100.0, task: Task::A },
        PerfFeatures { score: 70.0, penalty: 10.0, time: 200.0, task: Task::A },
    ];
    let p = perf_index(&f).unwrap();
    assert!((p[0] - 3.0).abs() < 1e-9 && (p[1] + 3.0).abs() < 1e-9);
}

#[test]
fn perf_index_matches_naive_per_task() {
    let mut r = rng(31);
    for _ in 0..100 {
        let trials = random_dataset(&mut r, 40, 0);
        let features: Vec<PerfFeatures> = trials.iter().map(PerfFeatures::from).collect();
        let perf = perf_index(&features).unwrap();
        for task in Task::ALL {
            let idx: Vec<usize> = (0..features.len()).filter(|&i| features[i].task == task).collect();
            if idx.is_empty() {
                continue;
            }
            let pick = |f: fn(&PerfFeatures) -> f64| idx.iter().map(|&i| f(&features[i])).collect::<Vec<_>>();
            let naive = naive_perf_index(&pick(|f| f.score), &pick(|f| f.penalty), &pick(|f| f.time));
            for (k, &i) in idx.iter().enumerate() {
                assert!((perf[i] - naive[k]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn zscores_are_standardized_per_task() {
    let mut r = rng(32);
    let values: Vec<(Task, f64)> = (0..200).map(|_| (Task::ALL[r.random_range(0..4)], r.random_range(-50.0..50.0))).collect();
    let z = zscore_per_task(&values).unwrap();
    for task in Task::ALL {
        let zs: Vec<f64> = values.iter().zip(&z).filter(|((t, _), _)| *t == task).map(|(_, z)| *z).collect();
        let n = zs.len() as f64;
        let mean = zs.iter().sum::<f64>() / n;
        let var = zs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }
}

#[test]
fn order_direction_follows_expertise() {
    let mut r = rng(33);
    for _ in 0..50 {
        let trials = random_dataset(&mut r, 60, 0);
        for task in Task::ALL {
            for e in [Expertise::Novice, Expertise::Intermediate] {
                let g = group(&trials, task, e);
                if g.is_empty() {
                    continue;
                }
                let ranked = rank_records(&g, e).unwrap();
                for w in ranked.windows(2) {
                    match e {
                        Expertise::Novice => assert!(w[0].1 <= w[1].1 + 1e-9),
                        Expertise::Intermediate => assert!(w[0].1 >= w[1].1 - 1e-9),
                    }
                }
            }
        }
    }
}

#[test]
fn ranking_is_affine_invariant_per_feature() {
    let mut r = rng(34);
    for _ in 0..100 {
        let trials = random_dataset(&mut r, 60, 0);
        let (a, b) = (r.random_range(0.1..20.0), r.random_range(-100.0..100.0));
        let which = r.random_range(0..3);
        let scaled: Vec<TrialRecord> = trials
            .iter()
            .map(|t| {
                let mut t = t.clone();
                match which {
                    0 => t.score = a * t.score + b,
                    1 => t.penalty = a * t.penalty + b,
                    _ => t.completion_time_s = a * t.completion_time_s + b.abs(),
                }
                t
            })
            .collect();
        for task in Task::ALL {
            for e in [Expertise::Novice, Expertise::Intermediate] {
                let g = group(&trials, task, e);
                if g.is_empty() {
                    continue;
                }
                assert_eq!(
                    rank_demonstrations(&g, e).unwrap(),
                    rank_demonstrations(&group(&scaled, task, e), e).unwrap()
                );
            }
        }
    }
}

#[test]
fn allocation_matches_first_occurrence_oracle() {
    let mut r = rng(35);
    for _ in 0..100 {
        let trials = random_dataset(&mut r, 40, 0);
        let g = group(&trials, Task::ALL[r.random_range(0..4)], Expertise::Novice);
        if g.is_empty() {
            continue;
        }
        let ranked: Vec<&TrialRecord> = rank_records(&g, Expertise::Novice).unwrap().into_iter().map(|(t, _)| t).collect();
        let participants: BTreeSet<&str> = ranked.iter().map(|t| t.participant_id.as_str()).collect();
        for quota in 0..=participants.len() {
            let mut oracle = Vec::new();
            let mut seen = Vec::new();
            for t in &ranked {
                if oracle.len() == quota {
                    break;
                }
                if !seen.contains(&t.participant_id) {
                    seen.push(t.participant_id.clone());
                    oracle.push(t.trial_id.clone());
                }
            }
            assert_eq!(allocate_viewing_subsets(&ranked, quota).unwrap(), oracle);
        }
        assert!(allocate_viewing_subsets(&ranked, participants.len() + 1).is_err());
    }
}

#[test]
fn splits_never_leak_content() {
    let mut r = rng(36);
    for _ in 0..100 {
        let n_active = r.random_range(1..80);
        let n_passive = r.random_range(0..120);
        let trials = random_dataset(&mut r, n_active, n_passive);
        let a = build_splits(&trials, SplitFractions::default(), r.random()).unwrap();
        let mut owner: BTreeMap<&str, Split> = BTreeMap::new();
        for u in &a.units {
            for id in &u.trial_ids {
                assert!(owner.insert(id.as_str(), u.split).is_none(), "{id} in two units");
            }
        }
        assert_eq!(owner.len(), trials.len());
        for t in &trials {
            if let Some(src) = &t.source_trial_id {
                assert_eq!(a.split_of[&t.trial_id], a.split_of[src]);
            }
        }
        for ann in &a.annotations {
            assert_eq!(ann.split, a.split_of[&ann.trial_id]);
        }
    }
}

#[test]
fn split_counts_cover_every_split() {
    let f = SplitFractions::default();
    for n in 0..200 {
        let c = f.counts(n);
        assert_eq!(c.iter().sum::<usize>(), n);
        if n >= 3 {
            assert!(c.iter().all(|k| *k >= 1));
        }
    }
    assert_eq!(f.counts(10), [6, 2, 2]);
    assert_eq!(f.counts(1), [1, 0, 0]);
    assert_eq!(f.counts(2), [1, 0, 1]);
}

#[test]
fn manifests_are_reproducible() {
    let mut r = rng(37);
    for _ in 0..20 {
        let trials = random_dataset(&mut r, 50, 60);
        let seed = r.random();
        let a = gazekit::json::to_string_pretty(&build_manifest(&trials, SplitFractions::default(), seed, None).unwrap());
        let b = gazekit::json::to_string_pretty(&build_manifest(&trials, SplitFractions::default(), seed, None).unwrap());
        assert_eq!(a, b);
        let mut shuffled = trials.clone();
        shuffled.reverse();
        let c = gazekit::json::to_string_pretty(&build_manifest(&shuffled, SplitFractions::default(), seed, None).unwrap());
        assert_eq!(a, c);
    }
}

#[test]
fn hundred_units_stay_disjoint() {
    let mut r = rng(38);
    let trials = random_dataset(&mut r, 100, 150);
    let a = build_splits(&trials, SplitFractions::default(), 2024).unwrap();
    assert_eq!(a.units.len(), 100);
    let per_split = |s: Split| a.units.iter().filter(|u| u.split == s).map(|u| u.unit_id.as_str()).collect::<BTreeSet<_>>();
    let (tr, va, te) = (per_split(Split::Train), per_split(Split::Val), per_split(Split::Test));
    assert!(tr.is_disjoint(&va) && tr.is_disjoint(&te) && va.is_disjoint(&te));
    assert_eq!(tr.len() + va.len() + te.len(), 100);
}

#[test]
fn condition_filters_select_matching_annotations() {
    let mut r = rng(39);
    let trials = random_dataset(&mut r, 60, 80);
    let by_id: BTreeMap<&str, &TrialRecord> = trials.iter().map(|t| (t.trial_id.as_str(), t)).collect();
    let a = build_splits(&trials, SplitFractions::default(), 5).unwrap();
    let mut total = 0;
    for cond in Condition::ALL {
        for split in [Split::Train, Split::Val, Split::Test] {
            for (demo, ann) in filter_condition(&a, cond, split) {
                total += 1;
                let (d, g) = (by_id[demo.as_str()], by_id[ann.as_str()]);
                assert_eq!(a.split_of[&ann], split);
                assert_eq!(d.modality, Modality::Active);
                let want = match cond {
                    Condition::IA | Condition::IP => Expertise::Intermediate,
                    Condition::NA | Condition::NP => Expertise::Novice,
                };
                assert_eq!(g.expertise, want);
                match cond {
                    Condition::IA | Condition::NA => assert_eq!(demo, ann),
                    Condition::IP | Condition::NP => assert_eq!(g.source_trial_id.as_deref(), Some(demo.as_str())),
                }
            }
        }
    }
    assert_eq!(total, trials.len());
}
