//! Slow, direct implementations used as oracles.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use masc_core::kernel::LocalizedKernel;
use masc_core::masc::{classify, GroundTruth, PointStatus};
use masc_core::metric::rescale_to_pi;
use masc_core::signal::{moments_from_sources, reconstruct_spectrum, uniform_grid, PointSourceModel};
use masc_core::synth::rng;
use masc_core::{compute_field, DistanceProvider, Error, Label, MascConfig, PointCloud};
use rand::Rng;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn distance_matrix(cloud: &PointCloud) -> Vec<Vec<f64>> {
    let m = cloud.len();
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { 0.0 } else { dist(cloud.row(i), cloud.row(j)) }).collect())
        .collect()
}

/// `(1/M) Σ_j Φ_n(ρ_ij)^2` with `Φ_n` summed term by term from the filter.
pub fn brute_field(d: &[Vec<f64>], n: usize) -> Vec<f64> {
    let k = LocalizedKernel::new(n);
    let h = k.filter();
    let phi = |t: f64| {
        let mut s = 0.0;
        for l in -(n as i64 - 1)..n as i64 {
            s += h.eval(l as f64 / n as f64) * (l as f64 * t).cos();
        }
        s
    };
    let m = d.len();
    d.iter()
        .map(|row| row.iter().map(|&r| phi(r).powi(2)).sum::<f64>() / m as f64)
        .collect()
}

fn bfs_components(v: &[usize], d: &[Vec<f64>], eta: f64) -> Vec<Vec<usize>> {
    let mut seen = vec![false; v.len()];
    let mut out = Vec::new();
    for s in 0..v.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![v[s]];
        let mut queue = VecDeque::from([s]);
        while let Some(a) = queue.pop_front() {
            for b in 0..v.len() {
                if !seen[b] && d[v[a]][v[b]] < eta {
                    seen[b] = true;
                    comp.push(v[b]);
                    queue.push_back(b);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort_by_key(|c| c[0]);
    out
}

pub struct Reference {
    pub status: Vec<PointStatus>,
    pub queries: Vec<usize>,
    pub labels: Vec<Label>,
}

/// The loop written out level by level: fresh graph per scale, BFS
/// components, no union-find, no caching.
pub fn reference_masc(d: &[Vec<f64>], field: &[f64], truth: &[Label], cfg: &MascConfig) -> Reference {
    let m = d.len();
    let fmax = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<usize> = (0..m).filter(|&i| field[i] >= cfg.theta * fmax).collect();
    let mut status: Vec<PointStatus> = (0..m)
        .map(|i| if v.contains(&i) { PointStatus::Unlabeled } else { PointStatus::Pruned })
        .collect();
    let mut queries = Vec::new();
    let limit = cfg.eta_limit();
    let mut level = 0;
    loop {
        let eta = cfg.eta_start + level as f64 * cfg.eta_step;
        if eta > limit + 1e-9 * limit.abs().max(cfg.eta_step) {
            break;
        }
        let all = bfs_components(&v, d, eta);
        for comp in all.iter().filter(|c| c.len() >= cfg.min_component) {
            let asked: Vec<Label> = comp
                .iter()
                .filter_map(|&i| match status[i] {
                    PointStatus::Queried(l) => Some(l),
                    _ => None,
                })
                .collect();
            let label = if asked.is_empty() {
                if cfg.max_queries.is_some_and(|b| queries.len() >= b) {
                    continue;
                }
                let mut best = comp[0];
                for &i in comp {
                    if field[i] > field[best] {
                        best = i;
                    }
                }
                status[best] = PointStatus::Queried(truth[best]);
                queries.push(best);
                truth[best]
            } else if asked.iter().all(|&l| l == asked[0]) {
                asked[0]
            } else {
                continue;
            };
            for &i in comp {
                if !matches!(status[i], PointStatus::Queried(_)) {
                    status[i] = PointStatus::Predicted(label);
                }
            }
        }
        if all.len() <= 1 {
            break;
        }
        level += 1;
    }

    let labeled: Vec<(usize, Label)> = (0..m).filter_map(|i| status[i].label().map(|l| (i, l))).collect();
    if labeled.is_empty() {
        return Reference { status, queries, labels: Vec::new() };
    }
    let labels = (0..m)
        .map(|i| {
            if let Some(l) = status[i].label() {
                return l;
            }
            let mut cand = labeled.clone();
            cand.sort_by(|a, b| d[i][a.0].partial_cmp(&d[i][b.0]).unwrap().then(a.0.cmp(&b.0)));
            cand.truncate(cfg.neighbors);
            let max_label = cand.iter().map(|c| c.1).max().unwrap();
            let mut best = (0, 0);
            for l in 0..=max_label {
                let votes = cand.iter().filter(|c| c.1 == l).count();
                if votes > best.0 {
                    best = (votes, l);
                }
            }
            best.1
        })
        .collect();
    Reference { status, queries, labels }
}

pub const ENVELOPE_S: i32 = 9;

/// `max |Φ_n(t)| (n|t|)^S / n` over a log grid of `|t|` in `[4/n, π]`,
/// skipping values lost in rounding.
pub fn envelope_constant(n: usize) -> f64 {
    let k = LocalizedKernel::new(n);
    let floor = 1e-10 * k.phi_at_zero();
    let nf = n as f64;
    let (lo, hi) = ((4.0 / nf).ln(), PI.ln());
    let steps = 2000;
    (0..=steps)
        .map(|i| (lo + (hi - lo) * i as f64 / steps as f64).exp())
        .filter_map(|t| {
            let v = k.phi(t).abs();
            (v > floor).then(|| v * (nf * t).powi(ENVELOPE_S) / nf)
        })
        .fold(0.0, f64::max)
}

/// Evenness, periodicity, max at zero and Ψ bounds on a dense grid.
pub fn kernel_shape_errors(n: usize) -> Vec<String> {
    let k = LocalizedKernel::new(n);
    let p0 = k.phi_at_zero();
    let mut errs = Vec::new();
    for i in 0..4096 {
        let t = -PI + 2.0 * PI * i as f64 / 4096.0;
        let v = k.phi(t);
        let tol = 1e-9 * p0;
        if (v - k.phi(-t)).abs() > tol {
            errs.push(format!("n={n}: not even at {t}"));
        }
        if (v - k.phi(t + 2.0 * PI)).abs() > tol {
            errs.push(format!("n={n}: not periodic at {t}"));
        }
        if v.abs() > p0 * (1.0 + 1e-12) {
            errs.push(format!("n={n}: |Φ({t})| above Φ(0)"));
        }
        let d = t.abs();
        let psi = k.psi(d);
        if !(0.0..=p0 * p0 * (1.0 + 1e-12)).contains(&psi) {
            errs.push(format!("n={n}: Ψ({d}) out of range"));
        }
    }
    if n >= 8 && !(n as f64 / 2.0..=2.0 * n as f64).contains(&p0) {
        errs.push(format!("n={n}: Φ(0) = {p0} outside [n/2, 2n]"));
    }
    errs
}

pub fn random_model(seed: u64) -> PointSourceModel {
    let mut r = rng(seed);
    let count = r.random_range(1..=6);
    let mut sources: Vec<(f64, f64)> = Vec::new();
    while sources.len() < count {
        let w = -PI + 2.0 * PI * r.random::<f64>();
        if sources.iter().all(|s| (s.1 - w).abs() > 1e-6) {
            sources.push((0.1 + 10.0 * r.random::<f64>(), w));
        }
    }
    PointSourceModel::new(&sources).unwrap()
}

/// Max abs gap between the reconstruction from moments and the direct
/// kernel sum `|Σ a_k Φ_n(x - ω_k)|` on a 4096-point grid.
pub fn forward_identity_error(model: &PointSourceModel, n: usize) -> f64 {
    let k = LocalizedKernel::new(n);
    let grid = uniform_grid(4096);
    let s = reconstruct_spectrum(&moments_from_sources(model, n).unwrap(), &k, &grid).unwrap();
    grid.iter()
        .zip(&s.values)
        .map(|(&x, &v)| {
            let direct: f64 = model.sources().map(|(a, w)| a * k.phi(x - w)).sum();
            (v - direct.abs()).abs()
        })
        .fold(0.0, f64::max)
}

pub struct Instance {
    pub cloud: PointCloud,
    pub truth: Vec<Label>,
    pub config: MascConfig,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let m = r.random_range(2..=60);
    let classes = r.random_range(1..=4);
    let centers: Vec<[f64; 2]> = (0..classes).map(|_| [r.random::<f64>() * 4.0, r.random::<f64>() * 4.0]).collect();
    let mut rows = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    for _ in 0..m {
        let c = r.random_range(0..classes);
        let spread = 0.2 + r.random::<f64>();
        rows.push([
            centers[c][0] + spread * (r.random::<f64>() - 0.5),
            centers[c][1] + spread * (r.random::<f64>() - 0.5),
        ]);
        truth.push(c as Label);
    }
    let config = MascConfig {
        degree: [2, 4, 8, 16][r.random_range(0..4)],
        theta: 0.05 + 0.5 * r.random::<f64>(),
        eta_start: 0.02 + 0.3 * r.random::<f64>(),
        eta_step: 0.02 + 0.3 * r.random::<f64>(),
        eta_max: if r.random_bool(0.5) { Some(0.5 + 2.5 * r.random::<f64>()) } else { None },
        min_component: r.random_range(1..=5),
        neighbors: r.random_range(1..=7),
        max_queries: if r.random_bool(0.3) { Some(r.random_range(1..=6)) } else { None },
        record_levels: false,
    };
    Instance {
        cloud: PointCloud::from_rows(&rows).unwrap(),
        truth,
        config,
    }
}


/// Run the library and the reference on instance `seed`. `Ok(true)` when
/// both labeled the data identically, `Ok(false)` when neither could label
/// anything.
pub fn compare_with_reference(seed: u64) -> Result<bool, String> {
    let inst = random_instance(seed);
    let Ok((scaled, _)) = rescale_to_pi(&inst.cloud) else {
        return Ok(false);
    };
    let d = distance_matrix(&scaled);
    let provider = DistanceProvider::euclidean(scaled);
    let field = compute_field(&provider, &LocalizedKernel::new(inst.config.degree));
    let reference = reference_masc(&d, field.values(), &inst.truth, &inst.config);
    let mut oracle = GroundTruth::new(&inst.truth);
    match classify(&inst.config, &provider, &field, &mut oracle) {
        Ok(got) => {
            let asked: Vec<usize> = got.state.log.iter().map(|q| q.point).collect();
            if got.state.status != reference.status {
                return Err(format!("seed {seed}: status differs"));
            }
            if asked != reference.queries {
                return Err(format!("seed {seed}: queries {asked:?} vs {:?}", reference.queries));
            }
            if got.labels.labels != reference.labels {
                return Err(format!("seed {seed}: final labels differ"));
            }
            Ok(true)
        }
        Err(Error::NothingToExtend) if reference.status.iter().all(|s| s.label().is_none()) => Ok(false),
        Err(e) => Err(format!("seed {seed}: {e}")),
    }
}
