//! Principal component analysis of feature vectors.
//!
//! The covariance uses `1/N` normalization and is diagonalized with cyclic
//! Jacobi rotations. Components are stored as rows, sorted by decreasing
//! eigenvalue, each with its largest-magnitude entry made positive so that
//! fitted models are reproducible.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::textio::{fmt_row, parse_count, Lines};

/// `N` samples of dimension `M`, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Matrix,
}

impl FeatureMatrix {
    /// Rows must share one length and hold only finite values. An empty row
    /// list gives an empty matrix of dimension 0.
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let data = Matrix::from_rows(rows)
            .ok_or_else(|| Error::Dimension("feature rows have differing lengths".into()))?;
        if data.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension(
                "feature matrix holds non-finite values".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn n_samples(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.iter_rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.data
    }
}

/// Componentwise average of the rows.
pub fn compute_mean(data: &FeatureMatrix) -> Result<Vec<f64>> {
    if data.n_samples() == 0 {
        return Err(Error::EmptyDataset(
            "cannot average zero feature vectors".into(),
        ));
    }
    let mut mean = vec![0.0; data.dim()];
    for row in data.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    let n = data.n_samples() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Subtracts `mean` from every row.
pub fn center(data: &FeatureMatrix, mean: &[f64]) -> Result<FeatureMatrix> {
    if mean.len() != data.dim() {
        return Err(Error::Dimension(format!(
            "mean has {} components, data has {}",
            mean.len(),
            data.dim()
        )));
    }
    let mut out = data.data.clone();
    for i in 0..out.rows() {
        for (x, m) in out.row_mut(i).iter_mut().zip(mean) {
            *x -= m;
        }
    }
    Ok(FeatureMatrix { data: out })
}

/// `(1/N) sum x xᵀ` over the rows of an already-centered matrix. Only the
/// upper triangle is accumulated, so the result is exactly symmetric.
pub fn covariance(centered: &FeatureMatrix) -> Result<Matrix> {
    let n = centered.n_samples();
    if n < 2 {
        return Err(Error::EmptyDataset(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let m = centered.dim();
    let mut c = Matrix::zeros(m, m);
    for row in centered.iter_rows() {
        for i in 0..m {
            let xi = row[i];
            if xi == 0.0 {
                continue;
            }
            for j in i..m {
                c[(i, j)] += xi * row[j];
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for i in 0..m {
        for j in i..m {
            let v = c[(i, j)] * inv_n;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(c)
}

/// Eigenpairs of a symmetric matrix, largest eigenvalue first. Row `i` of
/// `vectors` is the unit eigenvector for `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps over every upper off-diagonal entry, annihilating each with a
/// plane rotation, until the largest off-diagonal magnitude is at most
/// `1e-12 * ‖C‖_F` or 100 sweeps have run.
pub fn eigendecompose_symmetric(c: &Matrix) -> Result<SymmetricEigen> {
    let n = c.rows();
    if c.cols() != n {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, not square",
            n,
            c.cols()
        )));
    }
    let norm = c.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::Dimension("matrix has non-finite entries".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (c[(i, j)] - c[(j, i)]).abs() > SYMMETRY_TOL * norm.max(1.0) {
                return Err(Error::Dimension(format!(
                    "matrix not symmetric at ({i},{j}): {} vs {}",
                    c[(i, j)],
                    c[(j, i)]
                )));
            }
        }
    }

    let mut a = c.clone();
    // symmetrize so rotations see one consistent value per pair
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let tol = JACOBI_REL_TOL * norm;

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].abs())
            .fold(0.0, f64::max);
        if off <= tol {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (r, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(r, k)] = v[(k, i)];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// A fitted projection onto the top `k` principal components.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    components: Matrix,
    eigenvalues: Vec<f64>,
}

impl PcaModel {
    /// Assembles a model from parts, checking shapes only.
    pub fn from_parts(mean: Vec<f64>, components: Matrix, eigenvalues: Vec<f64>) -> Result<Self> {
        if components.cols() != mean.len() || components.rows() != eigenvalues.len() {
            return Err(Error::Dimension(format!(
                "PCA parts disagree: mean {}, components {}x{}, eigenvalues {}",
                mean.len(),
                components.rows(),
                components.cols(),
                eigenvalues.len()
            )));
        }
        if components.rows() == 0 || components.rows() > mean.len() {
            return Err(Error::Dimension(format!(
                "component count {} not in 1..={}",
                components.rows(),
                mean.len()
            )));
        }
        Ok(Self {
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// `k x M`, one component per row.
    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn k(&self) -> usize {
        self.components.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// Coordinates of `v - mean` along each component.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "vector has {} components, PCA expects {}",
                v.len(),
                self.input_dim()
            )));
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok(self
            .components
            .iter_rows()
            .map(|c| dot(c, &centered))
            .collect())
    }

    /// Maps projected coordinates back to feature space.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.k() {
            return Err(Error::Dimension(format!(
                "{} coordinates for a {}-component model",
                coords.len(),
                self.k()
            )));
        }
        let mut out = self.mean.clone();
        for (c, row) in coords.iter().zip(self.components.iter_rows()) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        Ok(out)
    }

    /// Text block: `PCA k M`, the mean row, `k` component rows, then an
    /// `EIGENVALUES` row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "PCA {} {}", self.k(), self.input_dim());
        let _ = writeln!(s, "{}", fmt_row(&self.mean));
        for row in self.components.iter_rows() {
            let _ = writeln!(s, "{}", fmt_row(row));
        }
        let _ = writeln!(s, "EIGENVALUES {}", fmt_row(&self.eigenvalues));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_block(&mut Lines::new(text))
    }

    /// Reads a block written by [`PcaModel::to_text`]. A missing
    /// `EIGENVALUES` row is accepted and read as zeros.
    pub(crate) fn read_block(lines: &mut Lines<'_>) -> Result<Self> {
        let (n, fields) = lines.expect_keyword("PCA")?;
        let k = parse_count(fields.first(), "component count", n)?;
        let m = parse_count(fields.get(1), "dimension", n)?;
        let mean = lines.reals(m, "PCA mean row")?;
        let mut rows = Vec::with_capacity(k);
        for _ in 0..k {
            rows.push(lines.reals(m, "PCA component row")?);
        }
        let eigenvalues = if lines
            .peek_line()
            .is_some_and(|l| l.starts_with("EIGENVALUES"))
        {
            let (n, line) = lines.next_line("EIGENVALUES")?;
            let rest = line["EIGENVALUES".len()..].trim();
            crate::textio::parse_reals(rest, k)
                .map_err(|e| Error::format(format!("line {n}: EIGENVALUES: {e}")))?
        } else {
            vec![0.0; k]
        };
        let components = Matrix::from_rows(&rows).unwrap_or_else(|| Matrix::zeros(0, m));
        Self::from_parts(mean, components, eigenvalues)
            .map_err(|e| Error::format(format!("inconsistent PCA block: {e}")))
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits a `k`-component PCA model on the rows of `data`.
pub fn fit_pca(data: &FeatureMatrix, k: usize) -> Result<PcaModel> {
    let m = data.dim();
    if k == 0 || k > m {
        return Err(Error::Dimension(format!("k = {k} not in 1..={m}")));
    }
    if data.n_samples() < 2 {
        return Err(Error::EmptyDataset(format!(
            "PCA needs at least 2 samples, got {}",
            data.n_samples()
        )));
    }
    let mean = compute_mean(data)?;
    let cov = covariance(&center(data, &mean)?)?;
    let eig = eigendecompose_symmetric(&cov)?;
    let mut components = Matrix::zeros(k, m);
    for i in 0..k {
        let row = components.row_mut(i);
        row.copy_from_slice(eig.vectors.row(i));
        fix_sign(row);
    }
    PcaModel::from_parts(mean, components, eig.values[..k].to_vec())
}
