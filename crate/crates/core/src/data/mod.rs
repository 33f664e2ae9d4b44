//! Domain containers: genotypes, responses, distance matrices, datasets.
//!
//! All containers validate their invariants on construction and are immutable
//! afterwards, so they can be shared read-only across worker threads.

pub mod io;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, DOMAIN_TRIPLE_SAMPLING};
use crate::scalar::Scalar;

/// Maximum tolerated asymmetry |D_ij - D_ji| before a matrix is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack allowed when checking the triangle inequality.
pub const TRIANGLE_TOL: f64 = 1e-9;
/// Above this many subjects the O(N^3) triangle check switches to sampling.
pub const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 200;

/// Subjects-by-loci matrix of minor allele counts in `{0, 1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeMatrix {
    values: DMatrix<u8>,
    snp_ids: Vec<String>,
    subject_ids: Vec<String>,
}

impl GenotypeMatrix {
    /// Validates counts, dimensions and identifier uniqueness.
    pub fn new(
        values: DMatrix<u8>,
        snp_ids: Vec<String>,
        subject_ids: Vec<String>,
    ) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::EmptyInput {
                context: format!("genotype matrix needs at least 2 subjects, got {}", values.nrows()),
            });
        }
        if values.ncols() < 1 {
            return Err(Error::EmptyInput {
                context: "genotype matrix needs at least 1 locus".to_string(),
            });
        }
        if snp_ids.len() != values.ncols() {
            return Err(Error::DimensionMismatch {
                context: "SNP identifiers".to_string(),
                expected: values.ncols(),
                actual: snp_ids.len(),
            });
        }
        if subject_ids.len() != values.nrows() {
            return Err(Error::DimensionMismatch {
                context: "subject identifiers".to_string(),
                expected: values.nrows(),
                actual: subject_ids.len(),
            });
        }
        check_unique(&snp_ids)?;
        check_unique(&subject_ids)?;
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                if values[(i, j)] > 2 {
                    return Err(Error::GenotypeOutOfRange {
                        subject: i,
                        locus: j,
                        value: values[(i, j)] as i64,
                    });
                }
            }
        }
        Ok(Self {
            values,
            snp_ids,
            subject_ids,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_snps(&self) -> usize {
        self.values.ncols()
    }

    /// Minor allele count for `subject` at `locus`.
    #[inline]
    pub fn count(&self, subject: usize, locus: usize) -> u8 {
        self.values[(subject, locus)]
    }

    pub fn values(&self) -> &DMatrix<u8> {
        &self.values
    }

    pub fn snp_ids(&self) -> &[String] {
        &self.snp_ids
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    /// New matrix containing `subjects` in the given order.
    pub fn select_subjects(&self, subjects: &[usize]) -> Result<Self> {
        let rows: Vec<usize> = subjects.to_vec();
        let values = DMatrix::from_fn(rows.len(), self.n_snps(), |i, j| self.values[(rows[i], j)]);
        let ids = rows.iter().map(|&i| self.subject_ids[i].clone()).collect();
        GenotypeMatrix::new(values, self.snp_ids.clone(), ids)
    }

    /// Per-locus minor allele frequency in this matrix.
    pub fn allele_frequencies(&self) -> Vec<f64> {
        (0..self.n_snps())
            .map(|j| {
                let total: u32 = (0..self.n_subjects()).map(|i| self.values[(i, j)] as u32).sum();
                total as f64 / (2 * self.n_subjects()) as f64
            })
            .collect()
    }
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId { id: id.clone() });
        }
    }
    Ok(())
}

/// Undirected vertex-labelled graph on vertices `0..n_vertices`.
///
/// Edges are stored canonically with `u < v`; an edge supplied with zero
/// weight is treated as absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledGraph {
    n_vertices: usize,
    edges: std::collections::BTreeSet<(u32, u32)>,
}

impl LabelledGraph {
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut set = std::collections::BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::SelfLoop {
                    index: 0,
                    vertex: u as usize,
                });
            }
            if u as usize >= n_vertices || v as usize >= n_vertices {
                return Err(Error::DimensionMismatch {
                    context: "graph edge endpoint".to_string(),
                    expected: n_vertices,
                    actual: u.max(v) as usize,
                });
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self {
            n_vertices,
            edges: set,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }
}

/// One of the supported phenotype representations, shared by all N subjects.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSet<T: Scalar> {
    /// N x q real matrix of vector phenotypes.
    Vectors(DMatrix<T>),
    /// N class labels in `0..c`.
    Labels(Vec<u32>),
    /// N symmetric positive-definite matrices of one common dimension.
    SpdMatrices(Vec<DMatrix<T>>),
    /// N graphs on a common vertex set.
    Graphs(Vec<LabelledGraph>),
}

impl<T: Scalar> ResponseSet<T> {
    pub fn vectors(values: DMatrix<T>) -> Result<Self> {
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(ResponseSet::Vectors(values))
    }

    pub fn labels(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput {
                context: "label responses".to_string(),
            });
        }
        Ok(ResponseSet::Labels(values))
    }

    /// Validates symmetry (to 1e-10) and positive definiteness of each matrix.
    pub fn spd_matrices(mats: Vec<DMatrix<T>>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::EmptyInput {
                context: "SPD responses".to_string(),
            });
        }
        let dim = mats[0].nrows();
        for (idx, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("SPD matrix {idx}"),
                    expected: dim,
                    actual: m.nrows(),
                });
            }
            check_spd(m, idx, 1e-10)?;
        }
        Ok(ResponseSet::SpdMatrices(mats))
    }

    /// Validates a common vertex set across subjects.
    pub fn graphs(graphs: Vec<LabelledGraph>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::EmptyInput {
                context: "graph responses".to_string(),
            });
        }
        let n = graphs[0].n_vertices();
        for (idx, g) in graphs.iter().enumerate() {
            if g.n_vertices() != n {
                return Err(Error::VertexSetMismatch {
                    index: idx,
                    expected: n,
                    actual: g.n_vertices(),
                });
            }
        }
        Ok(ResponseSet::Graphs(graphs))
    }

    pub fn len(&self) -> usize {
        match self {
            ResponseSet::Vectors(m) => m.nrows(),
            ResponseSet::Labels(l) => l.len(),
            ResponseSet::SpdMatrices(ms) => ms.len(),
            ResponseSet::Graphs(gs) => gs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Shared symmetry + positive-definiteness gate (relative eigenvalue floor).
pub(crate) fn check_spd<T: Scalar>(m: &DMatrix<T>, index: usize, sym_tol: f64) -> Result<()> {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let gap = (m[(i, j)] - m[(j, i)]).abs().to_f64_lossy();
            if gap > sym_tol {
                return Err(Error::NotSpd {
                    index,
                    reason: format!("asymmetry {gap} at ({i}, {j})"),
                });
            }
        }
    }
    let eigs = m.clone().symmetric_eigenvalues();
    let mut min = eigs[0];
    let mut max = eigs[0];
    for &e in eigs.iter() {
        if e < min {
            min = e;
        }
        if e > max {
            max = e;
        }
    }
    if min <= max * T::from_config(1e-10) || min <= T::zero() {
        return Err(Error::NotSpd {
            index,
            reason: format!(
                "smallest eigenvalue {} not positive relative to largest {}",
                min.to_f64_lossy(),
                max.to_f64_lossy()
            ),
        });
    }
    Ok(())
}

/// Symmetric nonnegative matrix of pairwise response distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T: Scalar> {
    values: DMatrix<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Validates the metric axioms and returns the wrapped matrix.
    ///
    /// Inputs whose asymmetry stays within `1e-12` are symmetrized; anything
    /// worse is rejected. The diagonal must be exactly zero. The triangle
    /// inequality is checked exhaustively up to 200 subjects and on
    /// `10 * N^2` sampled triples above that.
    pub fn validate(mut values: DMatrix<T>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::DimensionMismatch {
                context: "distance matrix must be square".to_string(),
                expected: values.nrows(),
                actual: values.ncols(),
            });
        }
        let n = values.nrows();
        for i in 0..n {
            for j in 0..n {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        for i in 0..n {
            if values[(i, i)] != T::zero() {
                return Err(Error::NonzeroDiagonal {
                    i,
                    value: values[(i, i)].to_f64_lossy(),
                });
            }
        }
        let sym_tol = T::from_config(SYMMETRY_TOL);
        for i in 0..n {
            for j in (i + 1)..n {
                let forward = values[(i, j)];
                let backward = values[(j, i)];
                if (forward - backward).abs() > sym_tol {
                    return Err(Error::AsymmetryAboveTolerance {
                        i,
                        j,
                        forward: forward.to_f64_lossy(),
                        backward: backward.to_f64_lossy(),
                    });
                }
                let mean = (forward + backward) / T::from_config(2.0);
                if mean < T::zero() {
                    return Err(Error::NegativeDistance {
                        i,
                        j,
                        value: mean.to_f64_lossy(),
                    });
                }
                values[(i, j)] = mean;
                values[(j, i)] = mean;
            }
        }
        let tri_tol = T::from_config(TRIANGLE_TOL);
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            if values[(i, j)] + values[(j, k)] < values[(i, k)] - tri_tol {
                return Err(Error::TriangleViolation {
                    i,
                    j,
                    k,
                    d_ij: values[(i, j)].to_f64_lossy(),
                    d_jk: values[(j, k)].to_f64_lossy(),
                    d_ik: values[(i, k)].to_f64_lossy(),
                });
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check(i, j, k)?;
                    }
                }
            }
        } else {
            // Sampled check with a fixed internal seed so validation of a
            // given matrix always inspects the same triples.
            let mut rng = rng::stream(0x5eed_d157, DOMAIN_TRIPLE_SAMPLING, 0);
            for _ in 0..10 * n * n {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let k = rng.gen_range(0..n);
                check(i, j, k)?;
            }
        }
        Ok(Self { values })
    }

    pub fn n_subjects(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    /// Element-wise squares, precomputed once per forest run.
    pub fn squared(&self) -> DMatrix<T> {
        self.values.map(|d| d * d)
    }

    /// New matrix restricted to `subjects` in the given order.
    pub fn select_subjects(&self, subjects: &[usize]) -> Self {
        let values =
            DMatrix::from_fn(subjects.len(), subjects.len(), |i, j| {
                self.values[(subjects[i], subjects[j])]
            });
        Self { values }
    }
}

/// A feature/response study: genotypes plus the pairwise response distances,
/// optionally carrying the raw responses and binary status labels.
#[derive(Debug, Clone)]
pub struct Dataset<T: Scalar> {
    pub genotypes: GenotypeMatrix,
    pub distances: DistanceMatrix<T>,
    pub responses: Option<ResponseSet<T>>,
    pub labels: Option<Vec<u32>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        genotypes: GenotypeMatrix,
        distances: DistanceMatrix<T>,
        responses: Option<ResponseSet<T>>,
        labels: Option<Vec<u32>>,
    ) -> Result<Self> {
        let n = genotypes.n_subjects();
        if distances.n_subjects() != n {
            return Err(Error::DimensionMismatch {
                context: "distance matrix subjects".to_string(),
                expected: n,
                actual: distances.n_subjects(),
            });
        }
        if let Some(r) = &responses {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "response subjects".to_string(),
                    expected: n,
                    actual: r.len(),
                });
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "label subjects".to_string(),
                    expected: n,
                    actual: l.len(),
                });
            }
        }
        Ok(Self {
            genotypes,
            distances,
            responses,
            labels,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.genotypes.n_subjects()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn genotype_matrix_rejects_out_of_range_and_duplicates() {
        let err = GenotypeMatrix::new(
            dmatrix![0u8, 1; 2, 3],
            vec!["rs1".into(), "rs2".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap_err();
        match err {
            Error::GenotypeOutOfRange { subject, locus, value } => {
                assert_eq!((subject, locus, value), (1, 1, 3));
            }
            other => panic!("unexpected error {other:?}"),
        }

        let err = GenotypeMatrix::new(
            dmatrix![0u8, 1; 2, 0],
            vec!["rs1".into(), "rs1".into()],
            vec!["a".into(), "b".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId { .. }));
    }

    #[test]
    fn zero_matrix_is_a_valid_distance_matrix() {
        let d = DistanceMatrix::<f64>::validate(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(d.get(0, 2), 0.0);
    }

    #[test]
    fn two_point_metric_is_valid() {
        let d = DistanceMatrix::validate(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
    }

    #[test]
    fn triangle_violation_names_the_witnesses() {
        let m = dmatrix![
            0.0, 1.0, 3.0;
            1.0, 0.0, 1.0;
            3.0, 1.0, 0.0
        ];
        let err = DistanceMatrix::validate(m).unwrap_err();
        match err {
            Error::TriangleViolation { i, j, k, .. } => {
                // 1 + 1 < 3 witnessed through the middle point.
                assert_eq!(j, 1);
                assert_eq!((i, k), (0, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn small_asymmetry_is_symmetrized_large_is_rejected() {
        let mut m = dmatrix![0.0, 1.0; 1.0, 0.0];
        m[(0, 1)] = 1.0 + 5e-13;
        let d = DistanceMatrix::validate(m).unwrap();
        assert_eq!(d.get(0, 1), d.get(1, 0));

        let mut m = dmatrix![0.0, 1.0; 1.0, 0.0];
        m[(0, 1)] = 1.0 + 1e-9;
        assert!(matches!(
            DistanceMatrix::validate(m),
            Err(Error::AsymmetryAboveTolerance { .. })
        ));
    }

    #[test]
    fn negative_and_diagonal_entries_are_rejected() {
        let m = dmatrix![0.0, -1.0; -1.0, 0.0];
        assert!(matches!(
            DistanceMatrix::validate(m),
            Err(Error::NegativeDistance { .. })
        ));
        let m = dmatrix![0.5, 1.0; 1.0, 0.0];
        assert!(matches!(
            DistanceMatrix::validate(m),
            Err(Error::NonzeroDiagonal { i: 0, .. })
        ));
    }

    #[test]
    fn graph_rejects_self_loops() {
        assert!(matches!(
            LabelledGraph::new(3, vec![(1, 1)]),
            Err(Error::SelfLoop { vertex: 1, .. })
        ));
    }

    #[test]
    fn dataset_checks_dimension_agreement() {
        let g = GenotypeMatrix::new(
            dmatrix![0u8; 1; 2],
            vec!["rs1".into()],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let d = DistanceMatrix::<f64>::validate(DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            Dataset::new(g, d, None, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
