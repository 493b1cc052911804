//! Dataset generation, equal-size non-i.i.d. partitioning, label attacks,
//! and CSV ingestion.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// A labelled dataset: row-major features, one integer class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `m_total x d` feature matrix.
    pub features: DMatrix<f64>,
    /// Labels in `[0, classes)`.
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.nrows() == 0 {
            return Err(Error::InvalidParam {
                name: "features",
                reason: "dataset must contain at least one sample".into(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidParam {
                name: "labels",
                reason: format!("label {bad} out of range for {classes} classes"),
            });
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParam {
                name: "features",
                reason: "non-finite feature value".into(),
            });
        }
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }
}

/// One client's slice of a dataset. Shards are disjoint and all have the
/// same size; `substituted` counts samples that had to be filled in from
/// surplus classes when a Dirichlet draw requested more of a class than the
/// pool could provide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientShard {
    pub client_id: usize,
    pub indices: Vec<usize>,
    pub substituted: usize,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Gaussian class clusters with centers at pairwise distance `separation`
/// (exact when `classes <= d`, expected when larger). Class counts are as
/// equal as divisibility allows and the row order is shuffled.
pub fn gen_synthetic_classification(
    stream: &mut RandomStream,
    d: usize,
    classes: usize,
    m_total: usize,
    separation: f64,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::InvalidParam {
            name: "classes",
            reason: format!("need at least 2 classes, got {classes}"),
        });
    }
    if d == 0 {
        return Err(Error::InvalidParam {
            name: "d",
            reason: "feature dimension must be at least 1".into(),
        });
    }
    if m_total < classes {
        return Err(Error::InvalidParam {
            name: "m_total",
            reason: format!("need at least one sample per class ({classes})"),
        });
    }
    if !(separation >= 0.0) {
        return Err(Error::InvalidParam {
            name: "separation",
            reason: format!("must be non-negative, got {separation}"),
        });
    }

    let mut centers = Vec::with_capacity(classes);
    if classes <= d {
        // separation/sqrt(2) along distinct axes puts every pair of centers
        // at distance exactly `separation`.
        let a = separation / 2f64.sqrt();
        for k in 0..classes {
            let mut c = DVector::zeros(d);
            c[k] = a;
            centers.push(c);
        }
    } else {
        // Random centers with expected pairwise distance `separation`.
        let scale = (separation * separation / (2.0 * d as f64)).sqrt();
        for _ in 0..classes {
            let c = DVector::from_iterator(
                d,
                (0..d).map(|_| scale * stream.sample::<f64, _>(StandardNormal)),
            );
            centers.push(c);
        }
    }

    let base = m_total / classes;
    let extra = m_total % classes;
    let mut rows: Vec<(DVector<f64>, usize)> = Vec::with_capacity(m_total);
    for (k, center) in centers.iter().enumerate() {
        let count = base + usize::from(k < extra);
        for _ in 0..count {
            let x = DVector::from_iterator(
                d,
                center
                    .iter()
                    .map(|&c| c + stream.sample::<f64, _>(StandardNormal)),
            );
            rows.push((x, k));
        }
    }
    rows.shuffle(stream);

    let mut features = DMatrix::zeros(m_total, d);
    let mut labels = Vec::with_capacity(m_total);
    for (i, (x, y)) in rows.into_iter().enumerate() {
        features.row_mut(i).copy_from(&x.transpose());
        labels.push(y);
    }
    Dataset::new(features, labels, classes)
}

/// Strongly convex quadratic fixture with exactly known curvature.
///
/// Client `n` holds per-sample targets `b_{n,i}` whose mean is `b_n`, so the
/// local objective is `f_n(w) = 1/2 w' A_n w - b_n' w` while mini-batches see
/// sampling noise with an exactly computable variance. Sample `(n, i)` maps
/// to global index `n * samples_per_client + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    /// Per-client SPD matrices, all with eigenvalues inside the generator's
    /// `[lambda, smoothness]` interval.
    pub mats: Vec<DMatrix<f64>>,
    /// Per-client `d x m` matrices of per-sample targets.
    pub targets: Vec<DMatrix<f64>>,
}

impl QuadraticProblem {
    pub fn from_parts(mats: Vec<DMatrix<f64>>, targets: Vec<DMatrix<f64>>) -> Result<Self> {
        if mats.is_empty() || mats.len() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices vs {} target blocks",
                mats.len(),
                targets.len()
            )));
        }
        let d = mats[0].nrows();
        let m = targets[0].ncols();
        for (a, b) in mats.iter().zip(&targets) {
            if a.nrows() != d || a.ncols() != d || b.nrows() != d || b.ncols() != m {
                return Err(Error::DimensionMismatch(
                    "inconsistent quadratic problem blocks".into(),
                ));
            }
        }
        Ok(Self { mats, targets })
    }

    pub fn n_clients(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn samples_per_client(&self) -> usize {
        self.targets[0].ncols()
    }

    /// Mean target `b_n` of one client.
    pub fn client_target_mean(&self, n: usize) -> DVector<f64> {
        let t = &self.targets[n];
        let mut b = DVector::zeros(self.dim());
        for j in 0..t.ncols() {
            b += t.column(j);
        }
        b / t.ncols() as f64
    }

    /// Canonical shards: client `n` owns the contiguous block of its samples.
    pub fn shards(&self) -> Vec<ClientShard> {
        let m = self.samples_per_client();
        (0..self.n_clients())
            .map(|n| ClientShard {
                client_id: n,
                indices: (n * m..(n + 1) * m).collect(),
                substituted: 0,
            })
            .collect()
    }
}

/// Knobs for [`gen_quadratic_problem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSpec {
    pub dim: usize,
    pub clients: usize,
    /// Smallest admissible eigenvalue (strong convexity).
    pub lambda: f64,
    /// Largest admissible eigenvalue (smoothness).
    pub smoothness: f64,
    /// Dispersion of the per-client target means; 0 gives identical clients.
    pub heterogeneity: f64,
    pub samples_per_client: usize,
    /// Per-sample target spread around the client mean; 0 removes SGD noise.
    pub sample_spread: f64,
}

/// Generates a quadratic problem whose per-client matrices share a common
/// eigenbasis spanning exactly `[lambda, smoothness]`, with heterogeneity
/// carried entirely by the target means. Per-sample targets are re-centered
/// so each client mean is exact.
pub fn gen_quadratic_problem(
    stream: &mut RandomStream,
    spec: &QuadraticSpec,
) -> Result<QuadraticProblem> {
    let QuadraticSpec {
        dim,
        clients,
        lambda,
        smoothness,
        heterogeneity,
        samples_per_client,
        sample_spread,
    } = *spec;
    if dim == 0 || clients == 0 || samples_per_client == 0 {
        return Err(Error::InvalidParam {
            name: "dim/clients/samples_per_client",
            reason: "must all be at least 1".into(),
        });
    }
    if !(0.0 < lambda && lambda <= smoothness) {
        return Err(Error::InvalidParam {
            name: "lambda",
            reason: format!("need 0 < lambda <= smoothness, got ({lambda}, {smoothness})"),
        });
    }
    if !(heterogeneity >= 0.0) || !(sample_spread >= 0.0) {
        return Err(Error::InvalidParam {
            name: "heterogeneity/sample_spread",
            reason: "must be non-negative".into(),
        });
    }

    // Shared random eigenbasis, eigenvalues evenly spaced over the interval.
    let gauss = DMatrix::from_fn(dim, dim, |_, _| stream.sample::<f64, _>(StandardNormal));
    let q = gauss.qr().q();
    let eigs = DVector::from_fn(dim, |i, _| {
        if dim == 1 {
            0.5 * (lambda + smoothness)
        } else {
            lambda + (smoothness - lambda) * i as f64 / (dim - 1) as f64
        }
    });
    let a = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
    // Force exact symmetry against rounding in the triple product.
    let a = 0.5 * (&a + a.transpose());

    let base = DVector::from_fn(dim, |_, _| stream.sample::<f64, _>(StandardNormal));

    let mut mats = Vec::with_capacity(clients);
    let mut targets = Vec::with_capacity(clients);
    for _ in 0..clients {
        let b_n = &base
            + heterogeneity
                * DVector::from_fn(dim, |_, _| stream.sample::<f64, _>(StandardNormal));
        let mut t = DMatrix::zeros(dim, samples_per_client);
        if sample_spread > 0.0 && samples_per_client > 1 {
            for j in 0..samples_per_client {
                let eps = DVector::from_fn(dim, |_, _| {
                    sample_spread * stream.sample::<f64, _>(StandardNormal)
                });
                t.column_mut(j).copy_from(&eps);
            }
            // Center so the client mean is b_n exactly.
            let mean = t.column_sum() / samples_per_client as f64;
            for j in 0..samples_per_client {
                let col = t.column(j) - &mean + &b_n;
                t.column_mut(j).copy_from(&col);
            }
        } else {
            for j in 0..samples_per_client {
                t.column_mut(j).copy_from(&b_n);
            }
        }
        mats.push(a.clone());
        targets.push(t);
    }
    QuadraticProblem::from_parts(mats, targets)
}

fn dirichlet_proportions(stream: &mut RandomStream, alpha: f64, k: usize) -> Vec<f64> {
    // Standard Gamma(alpha, 1) normalization; rand_distr's Dirichlet is
    // const-generic over K so it cannot take a runtime class count.
    let g = Gamma::new(alpha, 1.0).expect("alpha validated by caller");
    let mut draws: Vec<f64> = (0..k).map(|_| g.sample(stream)).collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        // Tiny alpha can underflow every draw; fall back to a single class.
        let j = stream.random_range(0..k);
        draws.iter_mut().for_each(|x| *x = 0.0);
        draws[j] = 1.0;
        return draws;
    }
    draws.iter_mut().for_each(|x| *x /= total);
    draws
}

/// Splits `pool` (indices into `dataset`) into `n_clients` disjoint shards of
/// exactly `m` samples each. Per-client class proportions are drawn from a
/// symmetric Dirichlet(`dir_alpha`); when a class pool runs dry the remainder
/// is substituted from surplus classes and counted in the shard metadata.
pub fn partition_dirichlet_pool(
    dataset: &Dataset,
    pool: &[usize],
    n_clients: usize,
    dir_alpha: f64,
    m: usize,
    stream: &mut RandomStream,
) -> Result<Vec<ClientShard>> {
    if !(dir_alpha > 0.0) {
        return Err(Error::InvalidParam {
            name: "dir_alpha",
            reason: format!("must be positive, got {dir_alpha}"),
        });
    }
    if n_clients == 0 || m == 0 {
        return Err(Error::InvalidParam {
            name: "n_clients/m",
            reason: "must be at least 1".into(),
        });
    }
    if n_clients * m > pool.len() {
        return Err(Error::InvalidParam {
            name: "m",
            reason: format!(
                "need {} samples for {} shards of {}, pool has {}",
                n_clients * m,
                n_clients,
                m,
                pool.len()
            ),
        });
    }

    let k = dataset.classes;
    let mut class_pools: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &i in pool {
        class_pools[dataset.labels[i]].push(i);
    }
    for p in class_pools.iter_mut() {
        p.shuffle(stream);
    }

    // Integer class targets per client via largest remainder.
    let mut wants: Vec<Vec<usize>> = Vec::with_capacity(n_clients);
    for _ in 0..n_clients {
        let props = dirichlet_proportions(stream, dir_alpha, k);
        let raw: Vec<f64> = props.iter().map(|p| p * m as f64).collect();
        let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
        let mut short = m - counts.iter().sum::<usize>();
        let mut rema: Vec<(usize, f64)> = raw
            .iter()
            .enumerate()
            .map(|(j, r)| (j, r - r.floor()))
            .collect();
        rema.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        for (j, _) in rema {
            if short == 0 {
                break;
            }
            counts[j] += 1;
            short -= 1;
        }
        wants.push(counts);
    }

    let mut shards: Vec<ClientShard> = (0..n_clients)
        .map(|n| ClientShard {
            client_id: n,
            indices: Vec::with_capacity(m),
            substituted: 0,
        })
        .collect();

    // First pass: serve each client's class targets while stock lasts.
    for (n, counts) in wants.iter().enumerate() {
        for (j, &c) in counts.iter().enumerate() {
            let take = c.min(class_pools[j].len());
            for _ in 0..take {
                shards[n].indices.push(class_pools[j].pop().unwrap());
            }
        }
    }
    // Second pass: top up short shards from whatever classes still have stock.
    let mut surplus: Vec<usize> = Vec::new();
    for p in class_pools.iter_mut() {
        surplus.append(p);
    }
    surplus.shuffle(stream);
    for shard in shards.iter_mut() {
        while shard.indices.len() < m {
            let idx = surplus.pop().expect("pool size checked above");
            shard.indices.push(idx);
            shard.substituted += 1;
        }
    }
    Ok(shards)
}

/// Partition over the whole dataset; see [`partition_dirichlet_pool`].
pub fn partition_dirichlet(
    dataset: &Dataset,
    n_clients: usize,
    dir_alpha: f64,
    m: usize,
    stream: &mut RandomStream,
) -> Result<Vec<ClientShard>> {
    let pool: Vec<usize> = (0..dataset.len()).collect();
    partition_dirichlet_pool(dataset, &pool, n_clients, dir_alpha, m, stream)
}

/// Noisy-label attack: the client draws a noise rate uniformly in
/// `[0, noise_level]`, then each of its labels is independently replaced by
/// a uniform random class with that probability.
pub fn apply_noisy_label_attack(
    labels: &mut [usize],
    shard: &ClientShard,
    classes: usize,
    noise_level: f64,
    stream: &mut RandomStream,
) -> Result<()> {
    if !(0.0..=1.0).contains(&noise_level) {
        return Err(Error::InvalidParam {
            name: "noise_level",
            reason: format!("must lie in [0, 1], got {noise_level}"),
        });
    }
    if noise_level == 0.0 {
        return Ok(());
    }
    let rate = noise_level * stream.random::<f64>();
    for &i in &shard.indices {
        if stream.random::<f64>() < rate {
            labels[i] = stream.random_range(0..classes);
        }
    }
    Ok(())
}

/// Class-flip attack: label `i` becomes `classes - 1 - i` on the shard.
pub fn apply_class_flip_attack(labels: &mut [usize], shard: &ClientShard, classes: usize) {
    for &i in &shard.indices {
        labels[i] = classes - 1 - labels[i];
    }
}

/// CSV layout: header row, then `feature_dim` numeric feature columns
/// followed by one integer label column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvSchema {
    pub feature_dim: usize,
    pub classes: usize,
}

/// Loads a dataset, preserving row order. Malformed rows report their
/// 1-based line number.
pub fn load_csv_dataset(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            continue; // header
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != schema.feature_dim + 1 {
            return Err(Error::CsvParse {
                line: lineno + 1,
                reason: format!(
                    "expected {} columns, found {}",
                    schema.feature_dim + 1,
                    fields.len()
                ),
            });
        }
        let mut row = Vec::with_capacity(schema.feature_dim);
        for f in &fields[..schema.feature_dim] {
            let v: f64 = f.trim().parse().map_err(|_| Error::CsvParse {
                line: lineno + 1,
                reason: format!("non-numeric feature value `{f}`"),
            })?;
            row.push(v);
        }
        let raw: i64 = fields[schema.feature_dim]
            .trim()
            .parse()
            .map_err(|_| Error::CsvParse {
                line: lineno + 1,
                reason: format!(
                    "non-integer label `{}`",
                    fields[schema.feature_dim].trim()
                ),
            })?;
        if raw < 0 || raw as usize >= schema.classes {
            return Err(Error::LabelOutOfRange {
                line: lineno + 1,
                label: raw,
                classes: schema.classes,
            });
        }
        rows.push(row);
        labels.push(raw as usize);
    }
    if rows.is_empty() {
        return Err(Error::CsvParse {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    let m = rows.len();
    let features = DMatrix::from_fn(m, schema.feature_dim, |i, j| rows[i][j]);
    Dataset::new(features, labels, schema.classes)
}

/// Writes a dataset in the layout read by [`load_csv_dataset`].
pub fn write_csv_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    let header: Vec<String> = (0..dataset.feature_dim())
        .map(|j| format!("x{j}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..dataset.len() {
        let mut fields: Vec<String> = (0..dataset.feature_dim())
            .map(|j| format!("{:?}", dataset.features[(i, j)]))
            .collect();
        fields.push(dataset.labels[i].to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Gaussian sample helper shared by generators that need plain normal draws.
pub(crate) fn standard_normal(stream: &mut RandomStream) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sample(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, Purpose, StreamKey};
    use std::collections::HashSet;

    fn data_stream(seed: u64) -> RandomStream {
        derive_stream(&StreamKey::server(seed, 0, Purpose::Data))
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = gen_synthetic_classification(&mut data_stream(5), 6, 3, 90, 4.0).unwrap();
        let b = gen_synthetic_classification(&mut data_stream(5), 6, 3, 90, 4.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn synthetic_class_counts_near_equal() {
        let ds = gen_synthetic_classification(&mut data_stream(1), 4, 3, 100, 2.0).unwrap();
        let mut counts = [0usize; 3];
        for &l in &ds.labels {
            counts[l] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), 100);
        assert!(counts.iter().all(|&c| c == 33 || c == 34));
    }

    #[test]
    fn synthetic_center_distances_exact_when_k_le_d() {
        // With separation s and k <= d, cluster means sit at distance s.
        let s = 8.0;
        let ds = gen_synthetic_classification(&mut data_stream(2), 10, 4, 4000, s).unwrap();
        let mut means = vec![DVector::zeros(10); 4];
        let mut counts = [0usize; 4];
        for i in 0..ds.len() {
            means[ds.labels[i]] += ds.features.row(i).transpose();
            counts[ds.labels[i]] += 1;
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            *m /= c as f64;
        }
        for a in 0..4 {
            for b in (a + 1)..4 {
                let dist = (&means[a] - &means[b]).norm();
                assert!(
                    (dist - s).abs() < 0.15,
                    "centers {a},{b} at distance {dist}"
                );
            }
        }
    }

    #[test]
    fn quadratic_eigenvalues_contained() {
        let spec = QuadraticSpec {
            dim: 6,
            clients: 8,
            lambda: 0.5,
            smoothness: 3.0,
            heterogeneity: 1.0,
            samples_per_client: 10,
            sample_spread: 0.5,
        };
        let p = gen_quadratic_problem(&mut data_stream(3), &spec).unwrap();
        for a in &p.mats {
            let eigs = a.clone().symmetric_eigen().eigenvalues;
            let lo = eigs.min();
            let hi = eigs.max();
            assert!(lo >= 0.5 - 1e-9, "min eigenvalue {lo}");
            assert!(hi <= 3.0 + 1e-9, "max eigenvalue {hi}");
        }
    }

    #[test]
    fn quadratic_zero_heterogeneity_identical_objectives() {
        let spec = QuadraticSpec {
            dim: 4,
            clients: 5,
            lambda: 1.0,
            smoothness: 2.0,
            heterogeneity: 0.0,
            samples_per_client: 6,
            sample_spread: 0.3,
        };
        let p = gen_quadratic_problem(&mut data_stream(4), &spec).unwrap();
        let b0 = p.client_target_mean(0);
        for n in 1..5 {
            assert_eq!(p.mats[n], p.mats[0]);
            assert!((p.client_target_mean(n) - &b0).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_sample_means_are_exact() {
        let spec = QuadraticSpec {
            dim: 3,
            clients: 4,
            lambda: 1.0,
            smoothness: 4.0,
            heterogeneity: 2.0,
            samples_per_client: 9,
            sample_spread: 1.5,
        };
        let p = gen_quadratic_problem(&mut data_stream(6), &spec).unwrap();
        for n in 0..4 {
            let b = p.client_target_mean(n);
            // Re-centering makes the per-sample mean match b_n to rounding.
            let resum = p.targets[n].column_sum() / 9.0;
            assert!((resum - b).norm() < 1e-12);
        }
    }

    fn entropy(hist: &[usize]) -> f64 {
        let total: usize = hist.iter().sum();
        hist.iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.ln()
            })
            .sum()
    }

    fn shard_histograms(ds: &Dataset, shards: &[ClientShard]) -> Vec<Vec<usize>> {
        shards
            .iter()
            .map(|s| {
                let mut h = vec![0usize; ds.classes];
                for &i in &s.indices {
                    h[ds.labels[i]] += 1;
                }
                h
            })
            .collect()
    }

    #[test]
    fn partition_exact_sizes_and_disjoint() {
        let ds = gen_synthetic_classification(&mut data_stream(7), 5, 4, 2000, 1.0).unwrap();
        let shards =
            partition_dirichlet(&ds, 13, 0.3, 120, &mut data_stream(8)).unwrap();
        let mut seen = HashSet::new();
        for s in &shards {
            assert_eq!(s.len(), 120);
            for &i in &s.indices {
                assert!(seen.insert(i), "index {i} assigned twice");
            }
        }
    }

    #[test]
    fn partition_concentrated_alpha_is_uniform() {
        let ds = gen_synthetic_classification(&mut data_stream(9), 5, 4, 4000, 1.0).unwrap();
        let shards =
            partition_dirichlet(&ds, 10, 1e6, 200, &mut data_stream(10)).unwrap();
        for h in shard_histograms(&ds, &shards) {
            let tv: f64 = h
                .iter()
                .map(|&c| (c as f64 / 200.0 - 0.25).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.05, "total variation {tv}");
        }
    }

    #[test]
    fn partition_entropy_monotone_in_alpha() {
        // Mean shard entropy averaged over 5 seeds, non-decreasing in alpha.
        let mut prev = -1.0f64;
        for alpha in [0.1, 1.0, 10.0, 1e6] {
            let mut acc = 0.0;
            for seed in 0..5u64 {
                let ds =
                    gen_synthetic_classification(&mut data_stream(20 + seed), 5, 10, 6000, 1.0)
                        .unwrap();
                let shards =
                    partition_dirichlet(&ds, 50, alpha, 100, &mut data_stream(30 + seed))
                        .unwrap();
                let hs = shard_histograms(&ds, &shards);
                acc += hs.iter().map(|h| entropy(h)).sum::<f64>() / hs.len() as f64;
            }
            let mean_entropy = acc / 5.0;
            assert!(
                mean_entropy >= prev,
                "entropy {mean_entropy} dropped below {prev} at alpha {alpha}"
            );
            prev = mean_entropy;
        }
    }

    #[test]
    fn partition_low_alpha_less_entropic_than_high() {
        let mut low = 0.0;
        let mut high = 0.0;
        for seed in 0..5u64 {
            let ds = gen_synthetic_classification(&mut data_stream(40 + seed), 5, 10, 12_000, 1.0)
                .unwrap();
            for (alpha, acc) in [(0.1, &mut low), (1e6, &mut high)] {
                let shards =
                    partition_dirichlet(&ds, 100, alpha, 100, &mut data_stream(50 + seed))
                        .unwrap();
                let hs = shard_histograms(&ds, &shards);
                *acc += hs.iter().map(|h| entropy(h)).sum::<f64>() / hs.len() as f64;
            }
        }
        assert!(low < high, "entropy low {low} vs high {high}");
    }

    #[test]
    fn noisy_label_attack_zero_level_is_noop() {
        let mut labels = vec![0, 1, 2, 3, 4];
        let shard = ClientShard {
            client_id: 0,
            indices: vec![0, 1, 2, 3, 4],
            substituted: 0,
        };
        apply_noisy_label_attack(&mut labels, &shard, 5, 0.0, &mut data_stream(60)).unwrap();
        assert_eq!(labels, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn noisy_label_attack_altered_fraction() {
        // 400 malicious clients x 25 labels; expected altered fraction is
        // E[rate] * (K-1)/K = 0.45 for noise_level = 1, K = 10.
        let k = 10;
        let per = 25;
        let clients = 400;
        let labels_orig: Vec<usize> = (0..clients * per).map(|i| i % k).collect();
        let mut labels = labels_orig.clone();
        for n in 0..clients {
            let shard = ClientShard {
                client_id: n,
                indices: (n * per..(n + 1) * per).collect(),
                substituted: 0,
            };
            let mut s = derive_stream(&StreamKey::client(71, 2, n as u64, Purpose::Data));
            apply_noisy_label_attack(&mut labels, &shard, k, 1.0, &mut s).unwrap();
        }
        let altered = labels
            .iter()
            .zip(&labels_orig)
            .filter(|(a, b)| a != b)
            .count();
        let frac = altered as f64 / labels.len() as f64;
        assert!((frac - 0.45).abs() < 0.03, "altered fraction {frac}");
    }

    #[test]
    fn noisy_label_attack_deterministic() {
        let mk = || {
            let mut labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
            let shard = ClientShard {
                client_id: 0,
                indices: (0..100).collect(),
                substituted: 0,
            };
            apply_noisy_label_attack(&mut labels, &shard, 4, 0.7, &mut data_stream(80)).unwrap();
            labels
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn class_flip_examples() {
        let shard = ClientShard {
            client_id: 0,
            indices: vec![0, 1, 2],
            substituted: 0,
        };
        let mut labels = vec![3, 0, 9];
        apply_class_flip_attack(&mut labels, &shard, 10);
        assert_eq!(labels, vec![6, 9, 0]);
        // Involution.
        apply_class_flip_attack(&mut labels, &shard, 10);
        assert_eq!(labels, vec![3, 0, 9]);
        // Binary swap.
        let mut binary = vec![0, 1, 1];
        apply_class_flip_attack(&mut binary, &shard, 2);
        assert_eq!(binary, vec![1, 0, 0]);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let dir = std::env::temp_dir().join("otafl-core-csv-test");
        std::fs::create_dir_all(&dir).unwrap();

        let path = dir.join("tiny.csv");
        std::fs::write(&path, "x0,x1,label\n0.5,1.5,0\n-1.0,2.0,1\n3.25,-0.5,1\n").unwrap();
        let schema = CsvSchema {
            feature_dim: 2,
            classes: 2,
        };
        let ds = load_csv_dataset(&path, &schema).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.labels, vec![0, 1, 1]);

        let back = dir.join("tiny-back.csv");
        write_csv_dataset(&back, &ds).unwrap();
        let ds2 = load_csv_dataset(&back, &schema).unwrap();
        assert_eq!(ds, ds2);

        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "x0,x1,label\n0.5,oops,0\n").unwrap();
        match load_csv_dataset(&bad, &schema) {
            Err(Error::CsvParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let out_of_range = dir.join("range.csv");
        std::fs::write(&out_of_range, "x0,x1,label\n0.5,1.0,7\n").unwrap();
        match load_csv_dataset(&out_of_range, &schema) {
            Err(Error::LabelOutOfRange { line, label, .. }) => {
                assert_eq!((line, label), (2, 7));
            }
            other => panic!("expected label error, got {other:?}"),
        }
    }
}
