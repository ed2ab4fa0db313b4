//! Finite-window statistics: return vectors, periods, local complexity, Meyer gaps.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ControlPoints, ExactPoint, TilingError, TilingPatch};
use crate::expansion::BlockVector;

/// Quantization step for float keys when exact coordinates are unavailable.
const KEY_SCALE: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct ReturnVectorSet {
    /// Distinct differences of same-type control points, by increasing norm; `vectors[0] = 0`.
    pub vectors: Vec<BlockVector>,
    pub exact: Option<Vec<ExactPoint>>,
    pub window: f64,
    /// For each type, indices into `vectors` of its differences.
    pub by_type: Vec<Vec<usize>>,
    /// Whether the cap dropped vectors.
    pub truncated: bool,
}

fn float_key(v: &BlockVector) -> Vec<i64> {
    v.iter().map(|x| (x * KEY_SCALE).round() as i64).collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Exact(ExactPoint),
    Float(Vec<i64>),
}

fn lex_cmp(a: &BlockVector, b: &BlockVector) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Center of the bounding box of a point set.
pub(crate) fn bbox(points: &[BlockVector]) -> Option<(BlockVector, BlockVector)> {
    let first = points.first()?;
    let mut lo = first.clone();
    let mut hi = first.clone();
    for p in points {
        for k in 0..p.len() {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Some((lo, hi))
}

pub(crate) fn center_and_radius(points: &[BlockVector]) -> Option<(BlockVector, f64)> {
    let (lo, hi) = bbox(points)?;
    let radius = lo.iter().zip(hi.iter()).map(|(a, b)| 0.5 * (b - a)).fold(f64::INFINITY, f64::min);
    Some(((&lo + &hi) * 0.5, radius))
}

/// All differences of same-type control points within distance `window` of the
/// patch center, deduplicated (exactly when module coordinates are known) and
/// capped at `cap` vectors of smallest norm.
pub fn return_vectors(patch: &TilingPatch, cp: &ControlPoints, window: f64, cap: usize) -> ReturnVectorSet {
    let kappa = patch.tiles.iter().map(|t| t.label + 1).max().unwrap_or(0);
    let (center, _) = match center_and_radius(&cp.points) {
        Some(c) => c,
        None => {
            return ReturnVectorSet { vectors: vec![], exact: None, window, by_type: vec![], truncated: false };
        }
    };
    let inside: Vec<usize> = (0..cp.points.len()).filter(|&i| (&cp.points[i] - &center).norm() <= window).collect();

    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut vectors: Vec<BlockVector> = Vec::new();
    let mut exact: Vec<ExactPoint> = Vec::new();
    let mut by_type_raw: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); kappa];
    for t in 0..kappa {
        let members: Vec<usize> = inside.iter().copied().filter(|&i| patch.tiles[i].label == t).collect();
        for &a in &members {
            for &b in &members {
                let v = &cp.points[a] - &cp.points[b];
                let ex: Option<ExactPoint> = cp
                    .exact
                    .as_ref()
                    .map(|e| e[a].iter().zip(&e[b]).map(|(x, y)| x.sub(y)).collect());
                let key = match &ex {
                    Some(e) => Key::Exact(e.clone()),
                    None => Key::Float(float_key(&v)),
                };
                let id = *index.entry(key).or_insert_with(|| {
                    vectors.push(v.clone());
                    if let Some(e) = &ex {
                        exact.push(e.clone());
                    }
                    vectors.len() - 1
                });
                by_type_raw[t].insert(id);
            }
        }
    }
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| vectors[a].norm().total_cmp(&vectors[b].norm()).then_with(|| lex_cmp(&vectors[a], &vectors[b])));
    let truncated = order.len() > cap;
    order.truncate(cap);
    let mut remap = vec![usize::MAX; vectors.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let has_exact = cp.exact.is_some();
    let out_vectors = order.iter().map(|&i| vectors[i].clone()).collect();
    let out_exact = has_exact.then(|| order.iter().map(|&i| exact[i].clone()).collect());
    let by_type = by_type_raw
        .into_iter()
        .map(|s| {
            let mut v: Vec<usize> = s.into_iter().map(|i| remap[i]).filter(|&i| i != usize::MAX).collect();
            v.sort_unstable();
            v
        })
        .collect();
    ReturnVectorSet { vectors: out_vectors, exact: out_exact, window, by_type, truncated }
}

/// Nonzero return vectors `x` (smallest `max_candidates`) such that every tile
/// within `window` of the center whose translate by `x` stays in that ball has
/// a same-type tile at its translate. Always includes 0.
pub fn periods(patch: &TilingPatch, xi: &ReturnVectorSet, window: f64, max_candidates: usize) -> Vec<BlockVector> {
    let d = xi.vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut out = vec![BlockVector::zeros(d)];
    let translations: Vec<BlockVector> = patch.tiles.iter().map(|t| t.translation.clone()).collect();
    let Some((center, _)) = center_and_radius(&translations) else {
        return out;
    };
    let present: HashSet<(usize, Vec<i64>)> =
        patch.tiles.iter().map(|t| (t.label, float_key(&t.translation))).collect();
    let region: Vec<usize> = (0..patch.tiles.len()).filter(|&i| (&translations[i] - &center).norm() <= window).collect();
    for x in xi.vectors.iter().filter(|v| v.norm() > 0.0).take(max_candidates) {
        let mut checked = 0;
        let ok = region.iter().all(|&i| {
            let moved = &translations[i] + x;
            if (&moved - &center).norm() > window {
                return true;
            }
            checked += 1;
            present.contains(&(patch.tiles[i].label, float_key(&moved)))
        });
        if ok && checked > 0 {
            out.push(x.clone());
        }
    }
    out
}

/// Number of distinct patches `{(type, c' − c) : |c' − c| ≤ R}` around control
/// points at least `R` inside the bounding box.
pub fn flc_census(patch: &TilingPatch, cp: &ControlPoints, r: f64) -> Result<usize, TilingError> {
    let (lo, hi) = bbox(&cp.points).ok_or(TilingError::Empty)?;
    let (_, radius) = center_and_radius(&cp.points).ok_or(TilingError::Empty)?;
    if radius < 3.0 * r {
        return Err(TilingError::WindowTooSmall { radius, window: r });
    }
    let n = cp.points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cp.points[a][0].total_cmp(&cp.points[b][0]));
    let mut classes: HashSet<Vec<(usize, Key)>> = HashSet::new();
    for (pos, &c) in order.iter().enumerate() {
        let p = &cp.points[c];
        if (0..p.len()).any(|k| p[k] - lo[k] < r || hi[k] - p[k] < r) {
            continue;
        }
        let mut nb: Vec<(usize, Key)> = Vec::new();
        let mut visit = |o: usize| {
            let v = &cp.points[o] - p;
            if v.norm() <= r {
                let key = match &cp.exact {
                    Some(e) => Key::Exact(e[o].iter().zip(&e[c]).map(|(x, y)| x.sub(y)).collect()),
                    None => Key::Float(float_key(&v)),
                };
                nb.push((patch.tiles[o].label, key));
            }
        };
        for &o in order[pos..].iter().take_while(|&&o| cp.points[o][0] - p[0] <= r) {
            visit(o);
        }
        for &o in order[..pos].iter().rev().take_while(|&&o| p[0] - cp.points[o][0] <= r) {
            visit(o);
        }
        nb.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| key_cmp(&a.1, &b.1)));
        classes.insert(nb);
    }
    Ok(classes.len())
}

fn key_cmp(a: &Key, b: &Key) -> std::cmp::Ordering {
    match (a, b) {
        (Key::Float(x), Key::Float(y)) => x.cmp(y),
        (Key::Exact(x), Key::Exact(y)) => format!("{x:?}").cmp(&format!("{y:?}")),
        (Key::Float(_), Key::Exact(_)) => std::cmp::Ordering::Less,
        (Key::Exact(_), Key::Float(_)) => std::cmp::Ordering::Greater,
    }
}

fn window_points(points: &[BlockVector], window: f64) -> Result<Vec<usize>, TilingError> {
    let (center, radius) = center_and_radius(points).ok_or(TilingError::Empty)?;
    if radius < 3.0 * window {
        return Err(TilingError::WindowTooSmall { radius, window });
    }
    Ok((0..points.len()).filter(|&i| (&points[i] - &center).norm() <= window).collect())
}

/// Smallest distance between distinct points.
fn min_separation(points: &[BlockVector]) -> f64 {
    let mut sorted: Vec<&BlockVector> = points.iter().collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut best = f64::INFINITY;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if sorted[j][0] - sorted[i][0] >= best {
                break;
            }
            let dist = (sorted[j] - sorted[i]).norm();
            if dist > 0.0 {
                best = best.min(dist);
            }
        }
    }
    best
}

/// Minimum distance between distinct points of `Y − Y`, `Y` the points within
/// `window` of the center. Differences are deduplicated on a `1e-8` grid.
pub fn meyer_gap(points: &[BlockVector], window: f64) -> Result<f64, TilingError> {
    let idx = window_points(points, window)?;
    let mut seen = HashSet::new();
    let mut diffs = Vec::new();
    for &a in &idx {
        for &b in &idx {
            let v = &points[a] - &points[b];
            if seen.insert(float_key(&v)) {
                diffs.push(v);
            }
        }
    }
    Ok(min_separation(&diffs))
}

/// As [`meyer_gap`], with differences deduplicated by exact module coordinates.
pub fn meyer_gap_exact(points: &[BlockVector], exact: &[ExactPoint], window: f64) -> Result<f64, TilingError> {
    let idx = window_points(points, window)?;
    let mut seen: HashSet<ExactPoint> = HashSet::new();
    let mut diffs = Vec::new();
    for &a in &idx {
        for &b in &idx {
            let e: ExactPoint = exact[a].iter().zip(&exact[b]).map(|(x, y)| x.sub(y)).collect();
            if seen.insert(e) {
                diffs.push(&points[a] - &points[b]);
            }
        }
    }
    Ok(min_separation(&diffs))
}

/// Largest distance from a control point in the inner half of the patch to the
/// nearest control point of each type: an empirical repetitivity radius.
pub fn repetitivity_gap(patch: &TilingPatch, cp: &ControlPoints) -> Result<f64, TilingError> {
    let (center, radius) = center_and_radius(&cp.points).ok_or(TilingError::Empty)?;
    let kappa = patch.tiles.iter().map(|t| t.label + 1).max().unwrap_or(0);
    let mut worst: f64 = 0.0;
    for p in cp.points.iter().filter(|p| (*p - &center).norm() <= 0.5 * radius).take(2000) {
        for t in 0..kappa {
            let nearest = cp
                .points
                .iter()
                .zip(&patch.tiles)
                .filter(|(_, tile)| tile.label == t)
                .map(|(q, _)| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    Ok(worst)
}
