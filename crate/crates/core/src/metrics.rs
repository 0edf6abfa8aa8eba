//! Saliency (AUC-Judd, NSS) and scanpath (SED, STDE) scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foa::{self, Scanpath};
use crate::grid::{self, Grid, ScalarField, Vec2};

/// Pooled human fixation positions for one stimulus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixationSet {
    pub points: Vec<Vec2>,
}

impl FixationSet {
    pub fn new(points: Vec<Vec2>) -> Self {
        FixationSet { points }
    }

    pub fn from_scanpaths<'a>(paths: impl IntoIterator<Item = &'a Scanpath>) -> Self {
        FixationSet {
            points: paths
                .into_iter()
                .flat_map(|p| p.fixations.iter().map(|f| f.pos()))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub auc: f64,
    pub nss: f64,
    pub sed_mean: f64,
    pub sed_best: f64,
    pub stde_mean: f64,
    pub stde_best: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Region partition used by SED, `(rows, cols)`.
    pub regions: (usize, usize),
    /// Embedding length used by STDE.
    pub stde_k: usize,
    /// Average both directions; `false` scores model windows against the
    /// human path only.
    pub stde_symmetric: bool,
    /// Blur of the model saliency map, px.
    pub sigma_map: f64,
}

impl MetricConfig {
    pub fn for_grid(grid: Grid) -> Self {
        MetricConfig {
            regions: (5, 5),
            stde_k: 2,
            stde_symmetric: true,
            sigma_map: grid.width().min(grid.height()) as f64 / 32.0,
        }
    }
}

/// Normalized scanpath saliency: mean z-score of the map at the fixations.
pub fn nss(sal: &ScalarField, fix: &FixationSet) -> Result<f64> {
    if fix.is_empty() {
        return Err(Error::EmptyFixations);
    }
    let n = sal.values().len() as f64;
    let mean = sal.values().iter().sum::<f64>() / n;
    let var = sal.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if !(std > 0.0) || std <= 1e-15 * mean.abs() {
        return Err(Error::DegenerateMap);
    }
    let mut acc = 0.0;
    for &p in &fix.points {
        acc += (grid::bilinear_sample(sal, p)? - mean) / std;
    }
    Ok(acc / fix.points.len() as f64)
}

fn fixated_mask(grid: Grid, fix: &FixationSet) -> Result<Vec<bool>> {
    let mut mask = vec![false; grid.len()];
    for &p in &fix.points {
        if !p.is_finite() || !grid.contains(p) {
            return Err(Error::OutOfDomain { x: p.x, y: p.y });
        }
        let x = p.x.round() as usize;
        let y = p.y.round() as usize;
        mask[grid.index(x, y)] = true;
    }
    Ok(mask)
}

/// AUC-Judd: thresholds at the saliency of fixated pixels, positives are
/// fixated pixels, negatives everything else, trapezoidal area.
pub fn auc_judd(sal: &ScalarField, fix: &FixationSet) -> Result<f64> {
    if fix.is_empty() {
        return Err(Error::EmptyFixations);
    }
    let mask = fixated_mask(sal.grid(), fix)?;
    let mut pos: Vec<f64> = Vec::new();
    let mut all: Vec<f64> = sal.values().to_vec();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            pos.push(sal.values()[i]);
        }
    }
    let n_pos = pos.len();
    let n_neg = all.len() - n_pos;
    if n_neg == 0 {
        return Ok(0.5);
    }
    pos.sort_by(|a, b| b.total_cmp(a));
    all.sort_by(|a, b| b.total_cmp(a));

    // Walk thresholds from high to low; `above` counts every pixel >= thr.
    let mut tp = vec![0.0];
    let mut fp = vec![0.0];
    let mut above = 0usize;
    let mut k = 0;
    while k < n_pos {
        let thr = pos[k];
        while k < n_pos && pos[k] == thr {
            k += 1;
        }
        while above < all.len() && all[above] >= thr {
            above += 1;
        }
        tp.push(k as f64 / n_pos as f64);
        fp.push((above - k) as f64 / n_neg as f64);
    }
    tp.push(1.0);
    fp.push(1.0);
    Ok(trapezoid(&fp, &tp))
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) / 2.0)
        .sum()
}

fn region_string(path: &Scanpath, grid: Grid, (rows, cols): (usize, usize)) -> Vec<usize> {
    let (w, h) = (grid.width() as f64, grid.height() as f64);
    path.fixations
        .iter()
        .map(|f| {
            let r = ((f.y / h * rows as f64).floor().max(0.0) as usize).min(rows - 1);
            let c = ((f.x / w * cols as f64).floor().max(0.0) as usize).min(cols - 1);
            r * cols + c
        })
        .collect()
}

/// Unit-cost Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let sub = diag + usize::from(ca != cb);
            row[j + 1] = sub.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// String edit distance between region-quantized fixation sequences.
pub fn sed(a: &Scanpath, b: &Scanpath, grid: Grid, regions: (usize, usize)) -> Result<usize> {
    if regions.0 == 0 || regions.1 == 0 {
        return Err(Error::InvalidParameter(
            "region grid must be at least 1x1".into(),
        ));
    }
    Ok(levenshtein(
        &region_string(a, grid, regions),
        &region_string(b, grid, regions),
    ))
}

fn embed(path: &Scanpath, k: usize, scale: f64) -> Vec<Vec<f64>> {
    path.fixations
        .windows(k)
        .map(|w| w.iter().flat_map(|f| [f.x * scale, f.y * scale]).collect())
        .collect()
}

fn directed_similarity(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|u| {
            let d = to
                .iter()
                .map(|v| {
                    u.iter()
                        .zip(v)
                        .map(|(p, q)| (p - q).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            (-d).exp()
        })
        .sum();
    total / from.len() as f64
}

/// Scaled time-delay embedding similarity in `(0, 1]`.
///
/// Each path becomes the set of its consecutive `k`-fixation windows, with
/// coordinates divided by the retina diagonal. Every window scores
/// `exp(-distance to the nearest window of the other path)`; the two directed
/// means are averaged.
pub fn stde(a: &Scanpath, b: &Scanpath, k: usize, grid: Grid) -> Result<f64> {
    let (ab, ba) = stde_directed(a, b, k, grid)?;
    Ok(0.5 * (ab + ba))
}

/// Both directed STDE similarities, `(a -> b, b -> a)`.
pub fn stde_directed(a: &Scanpath, b: &Scanpath, k: usize, grid: Grid) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "embedding length must be positive".into(),
        ));
    }
    for p in [a, b] {
        if p.len() < k {
            return Err(Error::PathTooShort { len: p.len(), k });
        }
    }
    let scale = 1.0 / grid.diagonal();
    let ea = embed(a, k, scale);
    let eb = embed(b, k, scale);
    Ok((directed_similarity(&ea, &eb), directed_similarity(&eb, &ea)))
}

/// STDE with the embedding shortened to fit both paths; an empty path
/// scores 0.
fn stde_pair(a: &Scanpath, b: &Scanpath, cfg: &MetricConfig, grid: Grid) -> Result<f64> {
    let k_eff = cfg.stde_k.min(a.len()).min(b.len());
    if k_eff == 0 {
        return Ok(0.0);
    }
    let (ab, ba) = stde_directed(a, b, k_eff, grid)?;
    Ok(if cfg.stde_symmetric {
        0.5 * (ab + ba)
    } else {
        ab
    })
}

/// SED and STDE over every (model, human) pair plus AUC/NSS of the model
/// saliency map against the pooled human fixations.
pub fn aggregate(
    model_paths: &[Scanpath],
    human_paths: &[Scanpath],
    grid: Grid,
    cfg: &MetricConfig,
) -> Result<MetricReport> {
    if model_paths.is_empty() || human_paths.is_empty() {
        return Err(Error::EmptyInput(
            "aggregate needs model and human scanpaths".into(),
        ));
    }
    let mut seds = Vec::new();
    let mut stdes = Vec::new();
    for m in model_paths {
        for h in human_paths {
            seds.push(sed(m, h, grid, cfg.regions)? as f64);
            stdes.push(stde_pair(m, h, cfg, grid)?);
        }
    }
    let n = seds.len() as f64;
    let fixations = FixationSet::from_scanpaths(human_paths);
    let (auc, nss_score) = if model_paths.iter().all(|p| p.is_empty()) || fixations.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let map = foa::accumulate_saliency(model_paths, grid, cfg.sigma_map)?;
        let nss_score = match nss(&map, &fixations) {
            Ok(v) => v,
            Err(Error::DegenerateMap) => f64::NAN,
            Err(e) => return Err(e),
        };
        (auc_judd(&map, &fixations)?, nss_score)
    };
    Ok(MetricReport {
        auc,
        nss: nss_score,
        sed_mean: seds.iter().sum::<f64>() / n,
        sed_best: seds.iter().copied().fold(f64::INFINITY, f64::min),
        stde_mean: stdes.iter().sum::<f64>() / n,
        stde_best: stdes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
