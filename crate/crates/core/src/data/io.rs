//! Text and directory-bundle I/O for the domain containers.
//!
//! Formats:
//! - genotypes: CSV with header `subject_id,<snp ids...>`, integer cells;
//! - distances: headerless N x N numeric CSV grid;
//! - vectors: CSV with header `subject_id,<column names...>`, float cells;
//! - labels: CSV with header `subject_id,label`, integer labels;
//! - matrix bundle: a directory holding `manifest.txt` (one subject id per
//!   line) plus `<subject_id>.csv`, each a headerless square grid;
//! - graph bundle: same layout, each file an edge list `u,v[,weight]` with
//!   vertices as integer indices (zero-weight edges are dropped).
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! save -> load reproduces every container bit-exactly.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{DistanceMatrix, GenotypeMatrix, LabelledGraph};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn bad_cell(path: &Path, row: usize, col: usize, content: &str, reason: &str) -> Error {
    Error::MalformedCell {
        path: path.display().to_string(),
        row,
        col,
        content: content.to_string(),
        reason: reason.to_string(),
    }
}

fn read_nonempty_lines(path: &Path) -> Result<Vec<String>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    if lines.is_empty() {
        return Err(Error::EmptyFile {
            path: path.display().to_string(),
        });
    }
    Ok(lines)
}

/// Loads a genotype CSV (`subject_id,rs1,rs2,...`; cells in `{0,1,2}`).
pub fn load_genotypes(path: impl AsRef<Path>) -> Result<GenotypeMatrix> {
    let path = path.as_ref();
    let lines = read_nonempty_lines(path)?;
    let header: Vec<&str> = lines[0].split(',').collect();
    if header.len() < 2 {
        return Err(bad_cell(path, 0, 0, &lines[0], "header must name at least one SNP"));
    }
    let snp_ids: Vec<String> = header[1..].iter().map(|s| s.trim().to_string()).collect();
    if lines.len() < 2 {
        return Err(Error::EmptyFile {
            path: path.display().to_string(),
        });
    }
    let n = lines.len() - 1;
    let p = snp_ids.len();
    let mut subject_ids = Vec::with_capacity(n);
    let mut values = DMatrix::<u8>::zeros(n, p);
    for (i, line) in lines[1..].iter().enumerate() {
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != p + 1 {
            return Err(bad_cell(path, row, cells.len(), line, "wrong number of cells"));
        }
        subject_ids.push(cells[0].trim().to_string());
        for (j, cell) in cells[1..].iter().enumerate() {
            let text = cell.trim();
            let parsed: i64 = text
                .parse()
                .map_err(|_| bad_cell(path, row, j + 1, text, "not an integer"))?;
            if !(0..=2).contains(&parsed) {
                return Err(bad_cell(path, row, j + 1, text, "allele count outside {0,1,2}"));
            }
            values[(i, j)] = parsed as u8;
        }
    }
    GenotypeMatrix::new(values, snp_ids, subject_ids)
}

/// Writes a genotype CSV in the layout read by [`load_genotypes`].
pub fn save_genotypes(g: &GenotypeMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str("subject_id");
    for id in g.snp_ids() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for i in 0..g.n_subjects() {
        out.push_str(&g.subject_ids()[i]);
        for j in 0..g.n_snps() {
            out.push(',');
            out.push_str(&g.count(i, j).to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Loads a headerless numeric grid.
pub fn load_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DMatrix<T>> {
    let path = path.as_ref();
    let lines = read_nonempty_lines(path)?;
    let rows = lines.len();
    let cols = lines[0].split(',').count();
    let mut m = DMatrix::<T>::zeros(rows, cols);
    for (i, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols {
            return Err(bad_cell(path, i, cells.len(), line, "ragged row"));
        }
        for (j, cell) in cells.iter().enumerate() {
            let text = cell.trim();
            let value: f64 = text
                .parse()
                .map_err(|_| bad_cell(path, i, j, text, "not a number"))?;
            m[(i, j)] = T::from_config(value);
        }
    }
    Ok(m)
}

/// Writes a headerless numeric grid with round-trip float formatting.
pub fn save_matrix<T: Scalar>(m: &DMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m[(i, j)].to_f64_lossy()));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Loads and validates a distance matrix from a headerless grid.
pub fn load_distances<T: Scalar>(path: impl AsRef<Path>) -> Result<DistanceMatrix<T>> {
    DistanceMatrix::validate(load_matrix(path)?)
}

pub fn save_distances<T: Scalar>(d: &DistanceMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    save_matrix(d.values(), path)
}

/// Loads a vectors CSV (`subject_id,<names...>`), returning ids and values.
pub fn load_vectors<T: Scalar>(path: impl AsRef<Path>) -> Result<(Vec<String>, DMatrix<T>)> {
    let path = path.as_ref();
    let lines = read_nonempty_lines(path)?;
    if lines.len() < 2 {
        return Err(Error::EmptyFile {
            path: path.display().to_string(),
        });
    }
    let cols = lines[0].split(',').count() - 1;
    if cols == 0 {
        return Err(bad_cell(path, 0, 0, &lines[0], "header must name at least one column"));
    }
    let n = lines.len() - 1;
    let mut ids = Vec::with_capacity(n);
    let mut m = DMatrix::<T>::zeros(n, cols);
    for (i, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols + 1 {
            return Err(bad_cell(path, i + 1, cells.len(), line, "ragged row"));
        }
        ids.push(cells[0].trim().to_string());
        for (j, cell) in cells[1..].iter().enumerate() {
            let text = cell.trim();
            let value: f64 = text
                .parse()
                .map_err(|_| bad_cell(path, i + 1, j + 1, text, "not a number"))?;
            m[(i, j)] = T::from_config(value);
        }
    }
    Ok((ids, m))
}

pub fn save_vectors<T: Scalar>(
    ids: &[String],
    m: &DMatrix<T>,
    column_prefix: &str,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("subject_id");
    for j in 0..m.ncols() {
        out.push_str(&format!(",{column_prefix}{j}"));
    }
    out.push('\n');
    for i in 0..m.nrows() {
        out.push_str(&ids[i]);
        for j in 0..m.ncols() {
            out.push_str(&format!(",{}", m[(i, j)].to_f64_lossy()));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Loads a labels CSV (`subject_id,label`).
pub fn load_labels(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<u32>)> {
    let path = path.as_ref();
    let lines = read_nonempty_lines(path)?;
    if lines.len() < 2 {
        return Err(Error::EmptyFile {
            path: path.display().to_string(),
        });
    }
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 2 {
            return Err(bad_cell(path, i + 1, cells.len(), line, "expected subject_id,label"));
        }
        ids.push(cells[0].trim().to_string());
        let text = cells[1].trim();
        labels.push(
            text.parse()
                .map_err(|_| bad_cell(path, i + 1, 1, text, "not a label integer"))?,
        );
    }
    Ok((ids, labels))
}

pub fn save_labels(ids: &[String], labels: &[u32], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("subject_id,label\n");
    for (id, label) in ids.iter().zip(labels) {
        out.push_str(&format!("{id},{label}\n"));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

fn read_manifest(dir: &Path) -> Result<Vec<String>> {
    let manifest = dir.join("manifest.txt");
    read_nonempty_lines(&manifest).map(|lines| lines.iter().map(|l| l.trim().to_string()).collect())
}

fn write_manifest(dir: &Path, ids: &[String]) -> Result<()> {
    let manifest = dir.join("manifest.txt");
    let mut out = String::new();
    for id in ids {
        out.push_str(id);
        out.push('\n');
    }
    fs::write(&manifest, out).map_err(|e| io_err(&manifest, e))
}

/// Loads a per-subject square-matrix bundle (manifest + one grid per subject).
pub fn load_matrix_bundle<T: Scalar>(dir: impl AsRef<Path>) -> Result<(Vec<String>, Vec<DMatrix<T>>)> {
    let dir = dir.as_ref();
    let ids = read_manifest(dir)?;
    let mut mats = Vec::with_capacity(ids.len());
    for id in &ids {
        mats.push(load_matrix(dir.join(format!("{id}.csv")))?);
    }
    Ok((ids, mats))
}

pub fn save_matrix_bundle<T: Scalar>(
    ids: &[String],
    mats: &[DMatrix<T>],
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_manifest(dir, ids)?;
    for (id, m) in ids.iter().zip(mats) {
        save_matrix(m, dir.join(format!("{id}.csv")))?;
    }
    Ok(())
}

/// Loads a graph bundle. The common vertex count is inferred as one plus the
/// largest vertex index seen across all subjects.
pub fn load_graph_bundle(dir: impl AsRef<Path>) -> Result<(Vec<String>, Vec<LabelledGraph>)> {
    let dir = dir.as_ref();
    let ids = read_manifest(dir)?;
    let mut edge_lists: Vec<Vec<(u32, u32)>> = Vec::with_capacity(ids.len());
    let mut max_vertex: u32 = 0;
    for id in &ids {
        let path = dir.join(format!("{id}.csv"));
        let mut edges = Vec::new();
        if let Ok(lines) = read_nonempty_lines(&path) {
            for (row, line) in lines.iter().enumerate() {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() < 2 || cells.len() > 3 {
                    return Err(bad_cell(&path, row, cells.len(), line, "expected u,v[,weight]"));
                }
                let u: u32 = cells[0]
                    .trim()
                    .parse()
                    .map_err(|_| bad_cell(&path, row, 0, cells[0], "not a vertex index"))?;
                let v: u32 = cells[1]
                    .trim()
                    .parse()
                    .map_err(|_| bad_cell(&path, row, 1, cells[1], "not a vertex index"))?;
                let weight: f64 = if cells.len() == 3 {
                    cells[2]
                        .trim()
                        .parse()
                        .map_err(|_| bad_cell(&path, row, 2, cells[2], "not a weight"))?
                } else {
                    1.0
                };
                if weight != 0.0 {
                    max_vertex = max_vertex.max(u).max(v);
                    edges.push((u, v));
                }
            }
        }
        edge_lists.push(edges);
    }
    let n_vertices = max_vertex as usize + 1;
    let graphs = edge_lists
        .into_iter()
        .map(|edges| LabelledGraph::new(n_vertices, edges))
        .collect::<Result<Vec<_>>>()?;
    Ok((ids, graphs))
}

pub fn save_graph_bundle(
    ids: &[String],
    graphs: &[LabelledGraph],
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_manifest(dir, ids)?;
    for (id, g) in ids.iter().zip(graphs) {
        let path = dir.join(format!("{id}.csv"));
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for (u, v) in g.edges() {
            writeln!(w, "{u},{v}").map_err(|e| io_err(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn genotype_csv_parses_and_reports_bad_cells() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.csv");
        fs::write(&path, "subject_id,rs1,rs2\ns1,0,1\ns2,2,0\ns3,1,1\n").unwrap();
        let g = load_genotypes(&path).unwrap();
        assert_eq!(g.n_subjects(), 3);
        assert_eq!(g.n_snps(), 2);
        assert_eq!(g.count(1, 0), 2);
        assert_eq!(g.snp_ids(), &["rs1".to_string(), "rs2".to_string()]);

        fs::write(&path, "subject_id,rs1\ns1,0\ns2,3\n").unwrap();
        match load_genotypes(&path).unwrap_err() {
            Error::MalformedCell { row, col, content, .. } => {
                assert_eq!((row, col), (2, 1));
                assert_eq!(content, "3");
            }
            other => panic!("unexpected {other:?}"),
        }

        fs::write(&path, "").unwrap();
        assert!(matches!(load_genotypes(&path), Err(Error::EmptyFile { .. })));
    }

    #[test]
    fn genotype_roundtrip_is_identity() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.csv");
        fs::write(&path, "subject_id,rs1,rs2,rs3\na,0,1,2\nb,2,2,0\nc,1,0,1\n").unwrap();
        let g = load_genotypes(&path).unwrap();
        let path2 = dir.path().join("g2.csv");
        save_genotypes(&g, &path2).unwrap();
        let g2 = load_genotypes(&path2).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn distance_roundtrip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let m = nalgebra::dmatrix![
            0.0, 0.1234567890123456, 1.0;
            0.1234567890123456, 0.0, 1.0000000001;
            1.0, 1.0000000001, 0.0
        ];
        let d = DistanceMatrix::validate(m).unwrap();
        save_distances(&d, &path).unwrap();
        let d2 = load_distances::<f64>(&path).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn graph_bundle_roundtrip() {
        let dir = tempdir().unwrap();
        let g1 = LabelledGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let g2 = LabelledGraph::new(4, vec![(1, 3)]).unwrap();
        let ids = vec!["a".to_string(), "b".to_string()];
        save_graph_bundle(&ids, &[g1.clone(), g2.clone()], dir.path()).unwrap();
        let (ids2, graphs) = load_graph_bundle(dir.path()).unwrap();
        assert_eq!(ids, ids2);
        assert_eq!(graphs[0], g1);
        assert_eq!(graphs[1], g2);
    }
}
