use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embedding::Embedding;
use crate::graph::Graph;
use crate::seed::{self, Stream};

pub const KMEANS_RESTARTS: usize = 10;
const KMEANS_MAX_ITER: usize = 100;
/// Weight of the k-means indicator in a spectral initialization; the rest is
/// a random point of the simplex.
pub const SPECTRAL_INDICATOR_WEIGHT: f64 = 0.95;
/// Above this many vertices the eigenvectors come from subspace iteration.
const DENSE_EIGEN_LIMIT: usize = 1500;
const SUBSPACE_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Random,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    pub kind: InitKind,
    pub embedding: Embedding,
}

fn simplex_point(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
    row
}

fn random_embedding(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Embedding {
    let data = (0..n).flat_map(|_| simplex_point(k, rng)).collect();
    Embedding::from_raw(n, k, data)
}

/// Rows of the first `k` eigenvectors of the symmetric normalized Laplacian,
/// scaled to unit length. Isolated vertices get zero rows.
fn spectral_rows(graph: &Graph, k: usize, master_seed: u64) -> Option<Vec<Vec<f64>>> {
    let n = graph.n();
    let inv_sqrt: Vec<f64> = graph.degrees().iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let basis = if n <= DENSE_EIGEN_LIMIT {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for e in graph.edges() {
            let v = e.w * inv_sqrt[e.i] * inv_sqrt[e.j];
            a[(e.i, e.j)] = v;
            a[(e.j, e.i)] = v;
        }
        let eig = SymmetricEigen::try_new(a, f64::EPSILON, 10_000)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
        DMatrix::from_fn(n, k, |i, c| eig.eigenvectors[(i, order[c])])
    } else {
        let mut rng = seed::rng(master_seed, Stream::KMeans, u64::MAX >> 16);
        let mut q = DMatrix::from_fn(n, k, |_, _| rng.gen::<f64>() - 0.5).qr().q();
        for _ in 0..SUBSPACE_ITERATIONS {
            let mut z = &q * 0.5;
            for e in graph.edges() {
                let v = 0.5 * e.w * inv_sqrt[e.i] * inv_sqrt[e.j];
                for c in 0..k {
                    z[(e.i, c)] += v * q[(e.j, c)];
                    z[(e.j, c)] += v * q[(e.i, c)];
                }
            }
            q = z.qr().q();
        }
        q
    };
    if basis.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some(
        (0..n)
            .map(|i| {
                let row: Vec<f64> = (0..k).map(|c| basis[(i, c)]).collect();
                let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter().map(|x| x / norm).collect()
                } else {
                    row
                }
            })
            .collect(),
    )
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding followed by Lloyd iterations.
fn kmeans_once(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut centers = vec![points[rng.gen_range(0..n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            nearest
                .iter()
                .position(|&d| {
                    target -= d;
                    target < 0.0
                })
                .unwrap_or(n - 1)
        } else {
            rng.gen_range(0..n)
        };
        centers.push(points[next].clone());
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }

    let dim = points[0].len();
    let mut assign = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])).then(a.cmp(&b)))
                .unwrap();
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assign) {
            counts[c] += 1;
            sums[c].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&points[a], &centers[assign[a]]);
                        let db = sq_dist(&points[b], &centers[assign[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap();
                centers[c] = points[far].clone();
                assign[far] = c;
            }
        }
    }
    let inertia = points.iter().zip(&assign).map(|(p, &c)| sq_dist(p, &centers[c])).sum();
    (assign, inertia)
}

fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let run = kmeans_once(points, k, rng);
        if best.as_ref().map_or(true, |b| run.1 < b.1) {
            best = Some(run);
        }
    }
    best.unwrap().0
}

/// `n_random` embeddings with rows drawn uniformly from the simplex, then
/// `n_spectral` embeddings from spectral clustering: k-means (with
/// [`KMEANS_RESTARTS`] restarts, each initialization its own seed) on the
/// row-normalized leading eigenvectors, the resulting indicators mixed with
/// a random simplex point per row. If the eigensolver fails the spectral
/// slots are filled with random embeddings.
pub fn initializations(graph: &Graph, k: usize, n_random: usize, n_spectral: usize, master_seed: u64) -> Vec<Initialization> {
    let n = graph.n();
    let mut out: Vec<Initialization> = (0..n_random)
        .map(|j| Initialization {
            kind: InitKind::Random,
            embedding: random_embedding(n, k, &mut seed::rng(master_seed, Stream::Init, j as u64)),
        })
        .collect();
    if n_spectral == 0 {
        return out;
    }
    let rows = spectral_rows(graph, k, master_seed);
    if rows.is_none() {
        warn!("eigensolver failed; using {n_spectral} extra random initializations");
    }
    for j in 0..n_spectral {
        let index = (n_random + j) as u64;
        let mut noise = seed::rng(master_seed, Stream::Init, index);
        let embedding = match &rows {
            Some(rows) => {
                let assign = kmeans(rows, k, &mut seed::rng(master_seed, Stream::KMeans, j as u64));
                let data = assign
                    .iter()
                    .flat_map(|&c| {
                        let mut row = simplex_point(k, &mut noise);
                        row.iter_mut().for_each(|x| *x *= 1.0 - SPECTRAL_INDICATOR_WEIGHT);
                        row[c] += SPECTRAL_INDICATOR_WEIGHT;
                        row
                    })
                    .collect();
                Embedding::from_raw(n, k, data)
            }
            None => random_embedding(n, k, &mut noise),
        };
        let kind = if rows.is_some() { InitKind::Spectral } else { InitKind::Random };
        out.push(Initialization { kind, embedding });
    }
    out
}
