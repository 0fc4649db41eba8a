//! Independent reference implementations used by the integration tests.
//!
//! Everything here is written straight from the metric definitions with
//! plain loops and must not call into the code paths it checks.

#![allow(dead_code)]

use gazekit::{Expertise, GazeSample, GazeTrace, Modality, Task, TrialRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Enumerates every window `(i, j)` that satisfies both I-DT criteria, then
/// picks the left-most start with its longest end, repeatedly, after the
/// previous pick.
pub fn brute_force_idt(samples: &[GazeSample], t_min: f64, d_max: f64) -> Vec<(usize, usize)> {
    let n = samples.len();
    let mut ok = vec![Vec::new(); n];
    for i in 0..n {
        if !samples[i].valid {
            continue;
        }
        let (mut x0, mut x1, mut y0, mut y1) = (samples[i].x, samples[i].x, samples[i].y, samples[i].y);
        for j in i..n {
            if !samples[j].valid {
                break;
            }
            x0 = x0.min(samples[j].x);
            x1 = x1.max(samples[j].x);
            y0 = y0.min(samples[j].y);
            y1 = y1.max(samples[j].y);
            let disp = (x1 - x0) + (y1 - y0);
            if samples[j].t - samples[i].t >= t_min && disp <= d_max {
                ok[i].push(j);
            }
        }
    }
    let mut out = Vec::new();
    let mut p = 0;
    while p < n {
        match (p..n).find(|&i| !ok[i].is_empty()) {
            None => break,
            Some(i) => {
                let j = *ok[i].iter().max().unwrap();
                out.push((i, j));
                p = j + 1;
            }
        }
    }
    out
}

/// Random trace of up to `max_len` samples: dwell clusters, jumps, drifts and
/// occasional invalid samples, at roughly 200 Hz with timing jitter.
pub fn random_trace(rng: &mut ChaCha8Rng, max_len: usize) -> GazeTrace {
    let n = rng.random_range(1..=max_len);
    let mut t = rng.random_range(0.0..5.0);
    let (mut cx, mut cy) = (rng.random_range(0.0..1280.0), rng.random_range(0.0..1024.0));
    let spread: f64 = *[0.0, 2.0, 8.0, 15.0, 30.0].get(rng.random_range(0..5)).unwrap();
    let invalid_rate = *[0.0, 0.01, 0.05, 0.2].get(rng.random_range(0..4)).unwrap();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random_bool(0.04) {
            cx = rng.random_range(0.0..1280.0);
            cy = rng.random_range(0.0..1024.0);
        } else if rng.random_bool(0.1) {
            cx += rng.random_range(-20.0..20.0);
            cy += rng.random_range(-20.0..20.0);
        }
        let x = (cx + rng.random_range(-1.0..=1.0) * spread).clamp(0.0, 1279.0);
        let y = (cy + rng.random_range(-1.0..=1.0) * spread).clamp(0.0, 1023.0);
        if rng.random_bool(invalid_rate) {
            samples.push(GazeSample::invalid(t));
        } else {
            samples.push(GazeSample::new(t, x, y));
        }
        t += 0.005 + rng.random_range(-0.001..0.001);
    }
    GazeTrace::new(samples, 1280, 1024, 200.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hull area from every directed edge that keeps all other points on its
/// left or on the segment itself. O(n^3).
pub fn brute_force_hull_area(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for p in points {
        if !pts.contains(p) {
            pts.push(*p);
        }
    }
    let cross = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let on_segment = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        c.0 >= a.0.min(b.0) && c.0 <= a.0.max(b.0) && c.1 >= a.1.min(b.1) && c.1 <= a.1.max(b.1)
    };
    let mut twice = 0.0;
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let edge = pts.iter().enumerate().all(|(k, &c)| {
                if k == i || k == j {
                    return true;
                }
                let s = cross(a, b, c);
                s > 0.0 || (s == 0.0 && on_segment(a, b, c))
            });
            if edge {
                twice += a.0 * b.1 - b.0 * a.1;
            }
        }
    }
    twice / 2.0
}

fn normalize(v: &[f64], eps: f64) -> Vec<f64> {
    let mut s = 0.0;
    for x in v {
        s += x.max(0.0);
    }
    v.iter().map(|x| x.max(0.0) / (s + eps)).collect()
}

pub fn naive_kld(g: &[f64], p: &[f64], eps: f64) -> f64 {
    let g = normalize(g, eps);
    let p = normalize(p, eps);
    let mut acc = 0.0;
    for i in 0..g.len() {
        acc += g[i] * (eps + g[i] / (eps + p[i])).ln();
    }
    acc
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mut m = 0.0;
    for x in v {
        m += x;
    }
    m /= n;
    let mut var = 0.0;
    for x in v {
        var += (x - m) * (x - m);
    }
    (m, (var / n).sqrt())
}

pub fn naive_cc(y: &[f64], yh: &[f64], eps: f64) -> f64 {
    let (my, sy) = mean_std(y);
    let (mh, sh) = mean_std(yh);
    let mut acc = 0.0;
    for i in 0..y.len() {
        acc += (y[i] - my) / (sy + eps) * ((yh[i] - mh) / (sh + eps));
    }
    acc / y.len() as f64
}

pub fn naive_sim(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let p = normalize(p, eps);
    let q = normalize(q, eps);
    let mut acc = 0.0;
    for i in 0..p.len() {
        acc += if p[i] < q[i] { p[i] } else { q[i] };
    }
    acc
}

pub fn naive_nss(y: &[f64], yh: &[f64]) -> f64 {
    let mut best = 0;
    for i in 1..y.len() {
        if y[i] > y[best] {
            best = i;
        }
    }
    let (m, s) = mean_std(yh);
    (yh[best] - m) / s
}

/// Textbook Pearson correlation.
pub fn naive_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        sa += a[i];
        sb += b[i];
        sab += a[i] * b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
    }
    let cov = sab - sa * sb / n;
    cov / ((saa - sa * sa / n) * (sbb - sb * sb / n)).sqrt()
}

/// Straight-line PerfIndex for a single task group.
pub fn naive_perf_index(s: &[f64], p: &[f64], t: &[f64]) -> Vec<f64> {
    let z = |v: &[f64]| -> Vec<f64> {
        let (m, sd) = mean_std(v);
        v.iter().map(|x| if sd < 1e-12 { 0.0 } else { (x - m) / sd }).collect()
    };
    let (zs, zp, zt) = (z(s), z(p), z(t));
    (0..s.len()).map(|i| zs[i] - zp[i] - zt[i]).collect()
}

pub fn random_grid_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// Random trial list: active demonstrations over all tasks by ten
/// participants of fixed expertise, plus passive viewings of random active
/// trials by other participants.
pub fn random_dataset(rng: &mut ChaCha8Rng, n_active: usize, n_passive: usize) -> Vec<TrialRecord> {
    let expertise = |p: usize| if p.is_multiple_of(2) { Expertise::Novice } else { Expertise::Intermediate };
    let mut trials = Vec::with_capacity(n_active + n_passive);
    for k in 0..n_active {
        let p = rng.random_range(0..10);
        trials.push(TrialRecord {
            trial_id: format!("a{k:04}"),
            participant_id: format!("p{p}"),
            expertise: expertise(p),
            modality: Modality::Active,
            task: Task::ALL[rng.random_range(0..4)],
            source_trial_id: None,
            score: f64::from(rng.random_range(0..100)),
            penalty: f64::from(rng.random_range(0..20)),
            completion_time_s: f64::from(rng.random_range(30..300)),
            trial_order: k as i64,
            width: 1280,
            height: 1024,
        });
    }
    for k in 0..n_passive {
        let src = trials[rng.random_range(0..n_active)].clone();
        let mut p = rng.random_range(0..10);
        if format!("p{p}") == src.participant_id {
            p = (p + 1) % 10;
        }
        trials.push(TrialRecord {
            trial_id: format!("v{k:04}"),
            participant_id: format!("p{p}"),
            expertise: expertise(p),
            modality: Modality::Passive,
            task: src.task,
            source_trial_id: Some(src.trial_id.clone()),
            score: src.score,
            penalty: src.penalty,
            completion_time_s: src.completion_time_s,
            trial_order: (n_active + k) as i64,
            width: 1280,
            height: 1024,
        });
    }
    trials
}
