//! PSD kernels, Gram matrices and Mercer decomposition on finite spaces.

use crate::error::{Error, Result};
use crate::linalg::{is_psd, SymMatrix};
use crate::Mat;

/// Tolerance for a probability vector summing to one.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A point in a kernel's domain: a coordinate vector or an item index.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Coords(Vec<f64>),
    Item(usize),
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Coords(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point::Coords(v.to_vec())
    }
}

impl From<usize> for Point {
    fn from(i: usize) -> Self {
        Point::Item(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `x · z`
    Linear,
    /// `(x · z)^degree`
    Polynomial { degree: u32 },
    /// `exp(-‖x - z‖² / (2σ²))`
    Gaussian { sigma2: f64 },
    /// Explicit symmetric table over item indices. Exponentiated-PMI and
    /// positive-pair kernels are tables.
    Table(SymMatrix),
}

impl Kernel {
    pub fn polynomial(degree: u32) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidParameter("polynomial degree must be >= 1".into()));
        }
        Ok(Kernel::Polynomial { degree })
    }

    pub fn gaussian(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("gaussian σ² must be > 0, got {sigma2}")));
        }
        Ok(Kernel::Gaussian { sigma2 })
    }

    pub fn table(m: SymMatrix) -> Self {
        Kernel::Table(m)
    }

    /// Whether the kernel is evaluated on item indices rather than coordinates.
    pub fn is_finite(&self) -> bool {
        matches!(self, Kernel::Table(_))
    }

    pub fn eval(&self, x: &Point, z: &Point) -> Result<f64> {
        match (self, x, z) {
            (Kernel::Table(t), Point::Item(i), Point::Item(j)) => {
                let n = t.n();
                for k in [*i, *j] {
                    if k >= n {
                        return Err(Error::IndexOutOfRange { index: k, len: n });
                    }
                }
                Ok(t.get(*i, *j))
            }
            (Kernel::Table(_), _, _) => Err(Error::InvalidParameter(
                "table kernels take item indices".into(),
            )),
            (_, Point::Coords(a), Point::Coords(b)) => self.eval_coords(a, b),
            _ => Err(Error::InvalidParameter(
                "coordinate kernels take coordinate vectors".into(),
            )),
        }
    }

    /// Fast path for coordinate kernels.
    pub fn eval_coords(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: z.len(),
            });
        }
        match self {
            Kernel::Linear => Ok(dot(x, z)),
            Kernel::Polynomial { degree } => Ok(dot(x, z).powi(*degree as i32)),
            Kernel::Gaussian { sigma2 } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok((-d2 / (2.0 * sigma2)).exp())
            }
            Kernel::Table(_) => Err(Error::InvalidParameter(
                "table kernels take item indices".into(),
            )),
        }
    }

    pub fn gram(&self, points: &[Point]) -> Result<SymMatrix> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("gram of an empty point list".into()));
        }
        if let Kernel::Table(t) = self {
            let idx = points
                .iter()
                .map(|p| match p {
                    Point::Item(i) => Ok(*i),
                    Point::Coords(_) => Err(Error::InvalidParameter(
                        "table kernels take item indices".into(),
                    )),
                })
                .collect::<Result<Vec<usize>>>()?;
            return t.restrict(&idx);
        }
        let n = points.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(&points[i], &points[j])?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix::try_from_dense(m, 0.0)
    }

    /// Gram matrix on the rows of a data matrix.
    pub fn gram_rows(&self, data: &Mat) -> Result<SymMatrix> {
        let rows: Vec<Point> = (0..data.nrows())
            .map(|i| Point::Coords(data.row(i).iter().copied().collect()))
            .collect();
        self.gram(&rows)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordered set of labelled items carrying a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    items: Vec<String>,
    probability: Vec<f64>,
}

impl FiniteSpace {
    pub fn new(items: Vec<String>, probability: Vec<f64>) -> Result<Self> {
        if items.len() != probability.len() {
            return Err(Error::DimensionMismatch {
                expected: items.len(),
                found: probability.len(),
            });
        }
        check_distribution(&probability)?;
        Ok(Self { items, probability })
    }

    /// Items labelled `0..n` with uniform probability.
    pub fn uniform(n: usize) -> Self {
        Self {
            items: (0..n).map(|i| i.to_string()).collect(),
            probability: vec![1.0 / n as f64; n],
        }
    }

    /// Items labelled `0..n` with the given probabilities.
    pub fn indexed(probability: Vec<f64>) -> Result<Self> {
        let items = (0..probability.len()).map(|i| i.to_string()).collect();
        Self::new(items, probability)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn probability(&self) -> &[f64] {
        &self.probability
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.items.iter().position(|s| s == label)
    }
}

/// Nonnegative entries summing to one within [`PROB_SUM_TOL`].
pub fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(i) = p.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {i} is {}", p[i])));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PROB_SUM_TOL * (p.len() as f64).max(1.0) {
        return Err(Error::InvalidDistribution(format!("sums to {s}")));
    }
    Ok(())
}

/// Exponentiated pointwise mutual information between events:
/// `K(i, j) = P(Aᵢ ∩ Aⱼ) / (P(Aᵢ) P(Aⱼ))`.
///
/// `joint[(i, i)]` must equal `marginal[i]` (since `Aᵢ ∩ Aᵢ = Aᵢ`) when the
/// events live on a common probability space; only consistency of the
/// marginals passed in is checked, within `1e-9`.
pub fn exp_pmi_kernel(joint: &Mat, marginal: &[f64]) -> Result<Kernel> {
    let n = marginal.len();
    if joint.nrows() != n || joint.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: joint.nrows(),
        });
    }
    if let Some(index) = marginal.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::DegenerateEvent { index });
    }
    if joint.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter("joint probabilities must be nonnegative".into()));
    }
    for i in 0..n {
        for j in 0..n {
            let v = joint[(i, j)];
            if v > marginal[i].min(marginal[j]) + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "P(A{i} ∩ A{j}) = {v} exceeds a marginal"
                )));
            }
        }
    }
    let table = SymMatrix::try_from_dense(
        Mat::from_fn(n, n, |i, j| joint[(i, j)] / (marginal[i] * marginal[j])),
        1e-9,
    )?;
    Ok(Kernel::Table(table))
}

/// Mercer eigenpairs of a finite kernel under a weighting `w`.
///
/// Rows of `eigenfunctions` are items, columns are eigenfunctions, ordered
/// by nonincreasing eigenvalue. The eigenfunctions are orthonormal in
/// `L²(w)`: `Σₓ w(x) ψᵢ(x) ψⱼ(x) = δᵢⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MercerDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Mat,
    pub weights: Vec<f64>,
}

impl MercerDecomposition {
    pub fn eigenfunction(&self, j: usize) -> Vec<f64> {
        self.eigenfunctions.column(j).iter().copied().collect()
    }

    /// `Σⱼ λⱼ ψⱼ(x) ψⱼ(z)` over the first `rank` terms.
    pub fn reconstruct(&self, rank: usize) -> Mat {
        let n = self.eigenfunctions.nrows();
        let mut k = Mat::zeros(n, n);
        for j in 0..rank.min(self.eigenvalues.len()) {
            let psi = self.eigenfunctions.column(j);
            k += self.eigenvalues[j] * &psi * psi.transpose();
        }
        k
    }

    /// `L²(w)` inner product of two functions on the space.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }
}

/// Decomposes `M = D^{1/2} K D^{1/2}` with `D = diag(weights)`; the
/// eigenfunctions are `D^{-1/2} u`.
///
/// With weights `1/n` the eigenvalues are those of the Gram matrix divided
/// by `n`, and the eigenfunctions are `√n` times its unit eigenvectors.
pub fn mercer_decompose(table: &SymMatrix, weights: &[f64]) -> Result<MercerDecomposition> {
    let n = table.n();
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    check_distribution(weights)?;
    if let Some(index) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::DegenerateEvent { index });
    }
    let root: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let weighted = SymMatrix::from_fn(n, |i, j| root[i] * table.get(i, j) * root[j]);
    let eig = weighted.eigen()?;
    let scale = eig.values.first().map(|v| v.abs()).unwrap_or(0.0).max(1.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -1e-9 * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let eigenfunctions = Mat::from_fn(n, n, |x, j| eig.vectors[(x, j)] / root[x]);
    Ok(MercerDecomposition {
        eigenvalues: eig.values,
        eigenfunctions,
        weights: weights.to_vec(),
    })
}

/// PSD check with the default trace-scaled tolerance.
pub fn is_psd_default(m: &SymMatrix) -> Result<bool> {
    is_psd(m, crate::linalg::default_psd_tol(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn pts(v: &[&[f64]]) -> Vec<Point> {
        v.iter().map(|p| Point::Coords(p.to_vec())).collect()
    }

    #[test]
    fn eval_examples() {
        let g = Kernel::gaussian(1.0).unwrap();
        let x = Point::Coords(vec![0.3, -1.2]);
        assert_eq!(g.eval(&x, &x).unwrap(), 1.0);
        let lin = Kernel::Linear;
        assert_eq!(lin.eval(&vec![1.0, 2.0].into(), &vec![3.0, 4.0].into()).unwrap(), 11.0);
        let poly = Kernel::polynomial(2).unwrap();
        assert_eq!(poly.eval(&vec![1.0, 1.0].into(), &vec![1.0, -1.0].into()).unwrap(), 0.0);
    }

    #[test]
    fn eval_errors() {
        let lin = Kernel::Linear;
        assert!(matches!(
            lin.eval(&vec![1.0].into(), &vec![1.0, 2.0].into()),
            Err(Error::DimensionMismatch { .. })
        ));
        let t = Kernel::table(SymMatrix::identity(2));
        assert!(matches!(t.eval(&0.into(), &2.into()), Err(Error::IndexOutOfRange { .. })));
        assert!(Kernel::polynomial(0).is_err());
        assert!(Kernel::gaussian(0.0).is_err());
        assert!(Kernel::gaussian(-1.0).is_err());
    }

    #[test]
    fn eval_is_symmetric() {
        let mut rng = SeededRng::new(1);
        for k in [Kernel::Linear, Kernel::polynomial(3).unwrap(), Kernel::gaussian(0.7).unwrap()] {
            let x: Vec<f64> = (0..4).map(|_| rng.standard_normal()).collect();
            let z: Vec<f64> = (0..4).map(|_| rng.standard_normal()).collect();
            assert_eq!(k.eval_coords(&x, &z).unwrap(), k.eval_coords(&z, &x).unwrap());
        }
    }

    #[test]
    fn gram_examples() {
        let g = Kernel::Linear.gram(&pts(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(g, SymMatrix::identity(2));
        let g = Kernel::gaussian(1.0).unwrap().gram(&pts(&[&[2.0, 5.0], &[2.0, 5.0]])).unwrap();
        assert!(g.as_mat().iter().all(|&v| v == 1.0));
        let table = SymMatrix::from_fn(3, |i, j| (i + j) as f64);
        let g = Kernel::table(table.clone()).gram(&[2.into(), 0.into()]).unwrap();
        assert_eq!(g.get(0, 0), table.get(2, 2));
        assert_eq!(g.get(0, 1), table.get(2, 0));
        assert_eq!(g.get(1, 1), table.get(0, 0));
    }

    #[test]
    fn exp_pmi_examples() {
        let p = [0.2, 0.3, 0.5];
        let indep = Mat::from_fn(3, 3, |i, j| p[i] * p[j]);
        let Kernel::Table(t) = exp_pmi_kernel(&indep, &p).unwrap() else { panic!() };
        assert!(t.as_mat().iter().all(|&v| (v - 1.0).abs() < 1e-12));

        let diag = Mat::from_fn(3, 3, |i, j| if i == j { p[i] } else { 0.0 });
        let Kernel::Table(t) = exp_pmi_kernel(&diag, &p).unwrap() else { panic!() };
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / p[i] } else { 0.0 };
                assert!((t.get(i, j) - want).abs() < 1e-12);
            }
        }

        let half = Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let Kernel::Table(t) = exp_pmi_kernel(&half, &[0.5, 0.5]).unwrap() else { panic!() };
        assert_eq!(t.into_mat(), Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn exp_pmi_zero_marginal_is_degenerate() {
        let joint = Mat::zeros(2, 2);
        assert!(matches!(
            exp_pmi_kernel(&joint, &[1.0, 0.0]),
            Err(Error::DegenerateEvent { index: 1 })
        ));
    }

    #[test]
    fn mercer_identity_uniform_two_points() {
        let m = mercer_decompose(&SymMatrix::identity(2), &[0.5, 0.5]).unwrap();
        assert!((m.eigenvalues[0] - 0.5).abs() < 1e-12);
        assert!((m.eigenvalues[1] - 0.5).abs() < 1e-12);
        for j in 0..2 {
            let psi = m.eigenfunction(j);
            assert!((m.inner(&psi, &psi) - 1.0).abs() < 1e-12);
            // ‖ψ‖₂ = √2 when the L²(w) norm is 1 under w = 1/2.
            let euclid: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((euclid - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn mercer_counting_measure_matches_gram_eigen() {
        let mut rng = SeededRng::new(2);
        let g = Mat::from_fn(5, 3, |_, _| rng.standard_normal());
        let k = SymMatrix::symmetrize(&(&g * g.transpose()));
        let n = 5.0;
        let m = mercer_decompose(&k, &[1.0 / n; 5]).unwrap();
        let e = k.eigen().unwrap();
        for j in 0..5 {
            assert!((m.eigenvalues[j] * n - e.values[j]).abs() < 1e-10);
        }
        for j in 0..3 {
            let psi = m.eigenfunction(j);
            let u = e.vector(j);
            let dotp: f64 = psi.iter().zip(&u).map(|(a, b)| a * b / n.sqrt()).sum();
            assert!((dotp.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mercer_rank_one() {
        let v = [1.0, -2.0, 0.5, 3.0];
        let w = [0.1, 0.2, 0.3, 0.4];
        let k = SymMatrix::from_fn(4, |i, j| v[i] * v[j]);
        let m = mercer_decompose(&k, &w).unwrap();
        let want: f64 = w.iter().zip(&v).map(|(a, b)| a * b * b).sum();
        assert!((m.eigenvalues[0] - want).abs() < 1e-12);
        assert!(m.eigenvalues[1..].iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn mercer_reconstruction_and_orthonormality() {
        let mut rng = SeededRng::new(8);
        let g = Mat::from_fn(6, 6, |_, _| rng.standard_normal());
        let k = SymMatrix::symmetrize(&(&g * g.transpose()));
        let raw: Vec<f64> = (0..6).map(|_| rng.uniform(0.1, 1.0)).collect();
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let m = mercer_decompose(&k, &w).unwrap();
        assert!((m.reconstruct(6) - k.as_mat()).abs().max() < 1e-8);
        for i in 0..6 {
            for j in 0..6 {
                let ip = m.inner(&m.eigenfunction(i), &m.eigenfunction(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mercer_errors() {
        let bad = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { -3.0 });
        assert!(matches!(mercer_decompose(&bad, &[0.5, 0.5]), Err(Error::NotPsd { .. })));
        assert!(matches!(
            mercer_decompose(&SymMatrix::identity(2), &[1.0, 0.0]),
            Err(Error::DegenerateEvent { index: 1 })
        ));
    }
}
