//! Distance-matrix construction from each supported response representation.
//!
//! Every function here returns a fully validated [`DistanceMatrix`]; the
//! metric axioms are re-checked on the constructed output, so any matrix a
//! caller receives from this module satisfies them by construction. Each
//! pairwise entry is computed independently of every other pair, which keeps
//! results bitwise identical however the pair loop is partitioned.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rayon::prelude::*;

use crate::data::{check_spd, DistanceMatrix, LabelledGraph, ResponseSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalues below this floor are clipped before taking logs in the SPD
/// metric; numerically singular whitened matrices would otherwise send a
/// distance to infinity.
const SPD_EIGENVALUE_FLOOR: f64 = 1e-12;

/// Which metric to apply to a response set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Euclidean,
    Discrete,
    GraphEdge,
    SpdGeodesic,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Discrete => "discrete",
            MetricKind::GraphEdge => "graph",
            MetricKind::SpdGeodesic => "spd",
        }
    }
}

/// Convex fusion weights over distance or proximity matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights<T: Scalar> {
    weights: Vec<T>,
}

impl<T: Scalar> FusionWeights<T> {
    /// Requires each weight nonnegative and a total of one (to 1e-12).
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights {
                reason: "no weights supplied".to_string(),
            });
        }
        let mut total = T::zero();
        for (i, w) in weights.iter().enumerate() {
            if *w < T::zero() {
                return Err(Error::InvalidWeights {
                    reason: format!("weight {i} is negative ({})", w.to_f64_lossy()),
                });
            }
            total += *w;
        }
        if (total - T::one()).abs() > T::from_config(1e-12) {
            return Err(Error::InvalidWeights {
                reason: format!("weights sum to {}, expected 1", total.to_f64_lossy()),
            });
        }
        Ok(Self { weights })
    }

    /// Equal weights over `n` inputs.
    pub fn uniform(n: usize) -> Result<Self> {
        let w = T::one() / T::from_count(n.max(1));
        Self::new(vec![w; n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Pairwise Euclidean distances between matrix rows.
pub fn euclidean_distances<T: Scalar>(vectors: &DMatrix<T>) -> Result<DistanceMatrix<T>> {
    for i in 0..vectors.nrows() {
        for j in 0..vectors.ncols() {
            if !vectors[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let n = vectors.nrows();
    let mut d = DMatrix::<T>::zeros(n, n);
    let pairs: Vec<(usize, usize, T)> = upper_pairs(n)
        .into_par_iter()
        .map(|(i, j)| {
            let mut sum = T::zero();
            for k in 0..vectors.ncols() {
                let diff = vectors[(i, k)] - vectors[(j, k)];
                sum += diff * diff;
            }
            (i, j, sum.sqrt())
        })
        .collect();
    for (i, j, v) in pairs {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    DistanceMatrix::validate(d)
}

/// 0/1 distances: zero iff two labels are equal.
pub fn discrete_distances<T: Scalar>(labels: &[u32]) -> Result<DistanceMatrix<T>> {
    if labels.is_empty() {
        return Err(Error::EmptyInput {
            context: "discrete metric labels".to_string(),
        });
    }
    let n = labels.len();
    let mut d = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] != labels[j] {
                d[(i, j)] = T::one();
                d[(j, i)] = T::one();
            }
        }
    }
    DistanceMatrix::validate(d)
}

/// Absolute edge-count differences between vertex-labelled graphs.
pub fn graph_distances<T: Scalar>(graphs: &[LabelledGraph]) -> Result<DistanceMatrix<T>> {
    if graphs.is_empty() {
        return Err(Error::EmptyInput {
            context: "graph metric inputs".to_string(),
        });
    }
    let n_vertices = graphs[0].n_vertices();
    for (idx, g) in graphs.iter().enumerate() {
        if g.n_vertices() != n_vertices {
            return Err(Error::VertexSetMismatch {
                index: idx,
                expected: n_vertices,
                actual: g.n_vertices(),
            });
        }
    }
    let counts: Vec<i64> = graphs.iter().map(|g| g.edge_count() as i64).collect();
    let n = graphs.len();
    let mut d = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = T::from_config((counts[i] - counts[j]).unsigned_abs() as f64);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix::validate(d)
}

/// Geodesic distance between two SPD matrices from the log-squared
/// generalized eigenvalues of the pencil `(a, b)`.
///
/// The eigenvalues are obtained by symmetric whitening: with `a = L L^T`,
/// they are the ordinary eigenvalues of `L^-1 b L^-T`.
pub fn spd_pair_distance<T: Scalar>(chol_a: &Cholesky<T, Dyn>, b: &DMatrix<T>) -> T {
    let l = chol_a.l();
    // y = L^-1 b, then m = y L^-T computed as (L^-1 y^T)^T.
    let y = l
        .solve_lower_triangular(b)
        .expect("Cholesky factor is invertible");
    let m = l
        .solve_lower_triangular(&y.transpose())
        .expect("Cholesky factor is invertible")
        .transpose();
    // Enforce exact symmetry before the symmetric eigensolve.
    let m = (&m + m.transpose()) * T::from_config(0.5);
    let eigenvalues = m.symmetric_eigenvalues();
    let floor = T::from_config(SPD_EIGENVALUE_FLOOR);
    let mut sum = T::zero();
    for &lambda in eigenvalues.iter() {
        let clipped = if lambda < floor {
            log::warn!(
                "generalized eigenvalue {} clipped to {SPD_EIGENVALUE_FLOOR} before log",
                lambda.to_f64_lossy()
            );
            floor
        } else {
            lambda
        };
        let log_lambda = clipped.ln();
        sum += log_lambda * log_lambda;
    }
    sum.sqrt()
}

/// Pairwise SPD geodesic distances across a set of matrices.
pub fn spd_distances<T: Scalar>(matrices: &[DMatrix<T>]) -> Result<DistanceMatrix<T>> {
    if matrices.is_empty() {
        return Err(Error::EmptyInput {
            context: "SPD metric inputs".to_string(),
        });
    }
    let dim = matrices[0].nrows();
    for (idx, m) in matrices.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("SPD matrix {idx}"),
                expected: dim,
                actual: m.nrows(),
            });
        }
        check_spd(m, idx, 1e-10)?;
    }
    let chols: Vec<Cholesky<T, Dyn>> = matrices
        .iter()
        .enumerate()
        .map(|(idx, m)| {
            let sym = (m + m.transpose()) * T::from_config(0.5);
            Cholesky::new(sym).ok_or_else(|| Error::NotSpd {
                index: idx,
                reason: "Cholesky factorization failed".to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = matrices.len();
    let mut d = DMatrix::<T>::zeros(n, n);
    let pairs: Vec<(usize, usize, T)> = upper_pairs(n)
        .into_par_iter()
        .map(|(i, j)| (i, j, spd_pair_distance(&chols[i], &matrices[j])))
        .collect();
    for (i, j, v) in pairs {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    DistanceMatrix::validate(d)
}

/// Weighted average of distance matrices under convex weights.
pub fn fuse_distances<T: Scalar>(
    matrices: &[DistanceMatrix<T>],
    weights: &FusionWeights<T>,
) -> Result<DistanceMatrix<T>> {
    if matrices.is_empty() {
        return Err(Error::EmptyInput {
            context: "distance fusion inputs".to_string(),
        });
    }
    if matrices.len() != weights.len() {
        return Err(Error::InvalidWeights {
            reason: format!(
                "{} weights for {} matrices",
                weights.len(),
                matrices.len()
            ),
        });
    }
    let n = matrices[0].n_subjects();
    for (idx, m) in matrices.iter().enumerate() {
        if m.n_subjects() != n {
            return Err(Error::DimensionMismatch {
                context: format!("fusion input {idx}"),
                expected: n,
                actual: m.n_subjects(),
            });
        }
    }
    let mut combined = DMatrix::<T>::zeros(n, n);
    for (m, &w) in matrices.iter().zip(weights.as_slice()) {
        combined += m.values() * w;
    }
    DistanceMatrix::validate(combined)
}

/// Applies the metric matching a response representation.
pub fn distances_for<T: Scalar>(
    responses: &ResponseSet<T>,
    kind: MetricKind,
) -> Result<DistanceMatrix<T>> {
    match (kind, responses) {
        (MetricKind::Euclidean, ResponseSet::Vectors(v)) => euclidean_distances(v),
        (MetricKind::Discrete, ResponseSet::Labels(l)) => discrete_distances(l),
        (MetricKind::GraphEdge, ResponseSet::Graphs(g)) => graph_distances(g),
        (MetricKind::SpdGeodesic, ResponseSet::SpdMatrices(m)) => spd_distances(m),
        (kind, _) => Err(Error::EmptyInput {
            context: format!("{} metric does not match the response representation", kind.name()),
        }),
    }
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;
    use rand::Rng;

    #[test]
    fn three_four_five_triangle() {
        let v = dmatrix![0.0, 0.0; 3.0, 4.0];
        let d = euclidean_distances(&v).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
    }

    #[test]
    fn identical_rows_give_zero_matrix() {
        let v = dmatrix![1.0, 2.0; 1.0, 2.0; 1.0, 2.0];
        let d = euclidean_distances(&v).unwrap();
        assert!(d.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn euclidean_matches_double_loop_oracle() {
        let mut rng = crate::rng::stream(11, 0, 0);
        let v = DMatrix::<f64>::from_fn(10, 4, |_, _| rng.gen_range(-3.0..3.0));
        let d = euclidean_distances(&v).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let mut sum = 0.0;
                for k in 0..4 {
                    sum += (v[(i, k)] - v[(j, k)]).powi(2);
                }
                assert_relative_eq!(d.get(i, j), sum.sqrt(), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn euclidean_rejects_non_finite() {
        let v = dmatrix![0.0, f64::NAN; 1.0, 2.0];
        assert!(matches!(
            euclidean_distances(&v),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn discrete_metric_small_case() {
        let d = discrete_distances::<f64>(&[0, 0, 1]).unwrap();
        let expected = dmatrix![0.0, 0.0, 1.0; 0.0, 0.0, 1.0; 1.0, 1.0, 0.0];
        assert_eq!(d.values(), &expected);
    }

    #[test]
    fn discrete_metric_all_equal_and_random_oracle() {
        let d = discrete_distances::<f64>(&[2, 2, 2, 2]).unwrap();
        assert!(d.values().iter().all(|&x| x == 0.0));

        let mut rng = crate::rng::stream(5, 0, 0);
        let labels: Vec<u32> = (0..6).map(|_| rng.gen_range(0..3)).collect();
        let d = discrete_distances::<f64>(&labels).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if labels[i] == labels[j] { 0.0 } else { 1.0 };
                assert_eq!(d.get(i, j), expected);
            }
        }
    }

    #[test]
    fn graph_metric_uses_edge_count_difference() {
        let complete = |n_edges: usize| {
            let mut edges = Vec::new();
            let mut remaining = n_edges;
            'outer: for u in 0..20u32 {
                for v in (u + 1)..20u32 {
                    if remaining == 0 {
                        break 'outer;
                    }
                    edges.push((u, v));
                    remaining -= 1;
                }
            }
            LabelledGraph::new(20, edges).unwrap()
        };
        let d = graph_distances::<f64>(&[complete(10), complete(10)]).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        let d = graph_distances::<f64>(&[complete(10), complete(7)]).unwrap();
        assert_eq!(d.get(0, 1), 3.0);
        // |a - b| on integers always passes the triangle check inside validate.
        let d = graph_distances::<f64>(&[complete(10), complete(7), complete(1)]).unwrap();
        assert_eq!(d.get(0, 2), 9.0);
    }

    fn random_spd(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let m = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::<f64>::identity(dim, dim) * 0.5
    }

    #[test]
    fn spd_distance_of_matrix_with_itself_is_zero() {
        let mut rng = crate::rng::stream(7, 0, 0);
        let a = random_spd(5, &mut rng);
        let d = spd_distances(&[a.clone(), a]).unwrap();
        assert!(d.get(0, 1).abs() < 1e-7, "self distance {}", d.get(0, 1));
    }

    #[test]
    fn spd_distance_identity_vs_scaled_identity() {
        for &(n, c) in &[(3usize, 4.0f64), (6, 0.25), (4, 10.0)] {
            let i = DMatrix::<f64>::identity(n, n);
            let d = spd_distances(&[i.clone(), &i * c]).unwrap();
            assert_relative_eq!(
                d.get(0, 1),
                (n as f64).sqrt() * c.ln().abs(),
                epsilon = 1e-10
            );
        }
    }

    /// Independent oracle: coefficients of det(lambda a - b) by polynomial
    /// interpolation, roots as companion-matrix eigenvalues.
    fn generalized_eigenvalues_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        // Sample det(t a - b) at n+1 Chebyshev-like points and solve the
        // Vandermonde system for the polynomial coefficients.
        let points: Vec<f64> = (0..=n).map(|k| -2.0 + 4.0 * (k as f64) / (n as f64)).collect();
        let dets: Vec<f64> = points.iter().map(|&t| (a * t - b).determinant()).collect();
        let vander = DMatrix::<f64>::from_fn(n + 1, n + 1, |r, c| points[r].powi(c as i32));
        let coeffs = vander
            .lu()
            .solve(&nalgebra::DVector::from_vec(dets))
            .expect("Vandermonde solve");
        // Companion matrix of the monic polynomial.
        let lead = coeffs[n];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for r in 1..n {
            companion[(r, r - 1)] = 1.0;
        }
        for r in 0..n {
            companion[(r, n - 1)] = -coeffs[r] / lead;
        }
        let mut roots: Vec<f64> = companion
            .complex_eigenvalues()
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-6, "expected real generalized eigenvalues");
                z.re
            })
            .collect();
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        roots
    }

    #[test]
    fn spd_distance_matches_determinant_root_oracle() {
        let mut rng = crate::rng::stream(23, 0, 0);
        let a = random_spd(4, &mut rng);
        let b = random_spd(4, &mut rng);
        let d = spd_distances(&[a.clone(), b.clone()]).unwrap();
        let roots = generalized_eigenvalues_oracle(&a, &b);
        let expected: f64 = roots.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt();
        assert_relative_eq!(d.get(0, 1), expected, epsilon = 1e-8);
    }

    #[test]
    fn spd_rejects_non_positive_definite_input() {
        let bad = dmatrix![1.0, 0.0; 0.0, -0.5];
        assert!(matches!(
            spd_distances(&[bad.clone(), bad]),
            Err(Error::NotSpd { .. })
        ));
    }

    #[test]
    fn fusion_identity_and_average_cases() {
        let d1 = DistanceMatrix::validate(dmatrix![0.0, 2.0; 2.0, 0.0]).unwrap();
        let w = FusionWeights::new(vec![1.0]).unwrap();
        let fused = fuse_distances(&[d1.clone()], &w).unwrap();
        assert_eq!(fused, d1);

        let w = FusionWeights::new(vec![0.5, 0.5]).unwrap();
        let fused = fuse_distances(&[d1.clone(), d1.clone()], &w).unwrap();
        assert_eq!(fused, d1);
    }

    #[test]
    fn fusion_matches_elementwise_oracle_and_stays_valid() {
        let mut rng = crate::rng::stream(31, 0, 0);
        let v1 = DMatrix::<f64>::from_fn(8, 3, |_, _| rng.gen_range(-2.0..2.0));
        let v2 = DMatrix::<f64>::from_fn(8, 5, |_, _| rng.gen_range(-2.0..2.0));
        let d1 = euclidean_distances(&v1).unwrap();
        let d2 = euclidean_distances(&v2).unwrap();
        let w = FusionWeights::new(vec![0.25, 0.75]).unwrap();
        let fused = fuse_distances(&[d1.clone(), d2.clone()], &w).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_relative_eq!(
                    fused.get(i, j),
                    0.25 * d1.get(i, j) + 0.75 * d2.get(i, j),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn fusion_weight_validation() {
        assert!(FusionWeights::new(vec![0.5, 0.6]).is_err());
        assert!(FusionWeights::new(vec![-0.1, 1.1]).is_err());
        assert!(FusionWeights::<f64>::new(vec![]).is_err());
        assert!(FusionWeights::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn spd_affine_and_inversion_invariance() {
        let mut rng = crate::rng::stream(41, 0, 0);
        for _ in 0..5 {
            let a = random_spd(4, &mut rng);
            let b = random_spd(4, &mut rng);
            let d = spd_distances(&[a.clone(), b.clone()]).unwrap().get(0, 1);

            let m = DMatrix::<f64>::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0))
                + DMatrix::<f64>::identity(4, 4) * 2.0;
            let a_t = m.transpose() * &a * &m;
            let b_t = m.transpose() * &b * &m;
            let d_t = spd_distances(&[a_t, b_t]).unwrap().get(0, 1);
            assert_relative_eq!(d, d_t, epsilon = 1e-6);

            let a_inv = a.clone().try_inverse().unwrap();
            let a_inv = (&a_inv + a_inv.transpose()) * 0.5;
            let b_inv = b.clone().try_inverse().unwrap();
            let b_inv = (&b_inv + b_inv.transpose()) * 0.5;
            let d_inv = spd_distances(&[a_inv, b_inv]).unwrap().get(0, 1);
            assert_relative_eq!(d, d_inv, epsilon = 1e-6);
        }
    }
}
