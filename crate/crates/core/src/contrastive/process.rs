use crate::error::{Error, Result};
use crate::kernels::{check_distribution, FiniteSpace, Kernel};
use crate::linalg::SymMatrix;
use crate::rng::SeededRng;
use crate::Mat;

/// Row sums of an augmentation matrix must be within this of one.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Positive pairs drawn as two independent augmentations of one source:
/// `x ~ p`, then `x̃₁, x̃₂ ~ p(·|x)`.
///
/// Everything downstream is expressed in the view marginal
/// `q(a) = Σ_b p₊(a, b)`, which equals `p` when the augmentation leaves `p`
/// invariant. Negatives are drawn from `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProcess {
    space: FiniteSpace,
    augment: Mat,
    joint: SymMatrix,
    marginal: Vec<f64>,
    kplus: SymMatrix,
    abar: SymMatrix,
}

impl PairProcess {
    pub fn new(space: FiniteSpace, augment: Mat) -> Result<Self> {
        let n = space.len();
        if augment.nrows() != n || augment.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: augment.nrows().max(augment.ncols()) });
        }
        if let Some(v) = augment.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("augmentation probability {v} is negative or not finite")));
        }
        for row in 0..n {
            let sum = augment.row(row).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL * n as f64 {
                return Err(Error::NotStochastic { row, sum });
            }
        }
        let p = space.probability();
        let joint = SymMatrix::from_fn(n, |a, b| (0..n).map(|x| p[x] * augment[(x, a)] * augment[(x, b)]).sum());
        let marginal: Vec<f64> = (0..n).map(|a| joint.as_mat().row(a).sum()).collect();
        if let Some(index) = marginal.iter().position(|&q| !(q > 0.0)) {
            return Err(Error::DegenerateEvent { index });
        }
        let kplus = SymMatrix::from_fn(n, |a, b| joint.get(a, b) / (marginal[a] * marginal[b]));
        let abar = SymMatrix::from_fn(n, |a, b| joint.get(a, b) / (marginal[a] * marginal[b]).sqrt());
        Ok(Self { space, augment, joint, marginal, kplus, abar })
    }

    /// Uniform base distribution over `sum(block_sizes)` items. Each item is
    /// augmented within its own block with total mass `1 − leak` (split
    /// evenly) and to the other items with mass `leak` (split evenly).
    pub fn blocks(block_sizes: &[usize], leak: f64) -> Result<Self> {
        let n: usize = block_sizes.iter().sum();
        if n == 0 || block_sizes.contains(&0) {
            return Err(Error::InvalidParameter("blocks must be nonempty".into()));
        }
        if !(0.0..=1.0).contains(&leak) || (leak > 0.0 && block_sizes.len() < 2) {
            return Err(Error::InvalidParameter(format!("leak {leak} is not usable with {} block(s)", block_sizes.len())));
        }
        let mut block_of = Vec::with_capacity(n);
        for (b, &s) in block_sizes.iter().enumerate() {
            block_of.extend(std::iter::repeat(b).take(s));
        }
        let augment = Mat::from_fn(n, n, |x, a| {
            let size = block_sizes[block_of[x]];
            if block_of[x] == block_of[a] {
                (1.0 - leak) / size as f64
            } else {
                leak / (n - size) as f64
            }
        });
        Self::new(FiniteSpace::uniform(n), augment)
    }

    /// Random base distribution and augmentation with entries bounded away
    /// from zero, for property tests.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let mut draw = |len: usize| {
            let raw: Vec<f64> = (0..len).map(|_| rng.uniform(0.05, 1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect::<Vec<f64>>()
        };
        let p = draw(n);
        let mut augment = Mat::zeros(n, n);
        for x in 0..n {
            for (a, v) in draw(n).into_iter().enumerate() {
                augment[(x, a)] = v;
            }
        }
        Self::new(FiniteSpace::indexed(p)?, augment)
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn augment(&self) -> &Mat {
        &self.augment
    }

    /// `p₊(a, b)`.
    pub fn joint(&self) -> &SymMatrix {
        &self.joint
    }

    /// View marginal `q`.
    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// `K₊(a, b) = p₊(a, b) / (q(a) q(b))`.
    pub fn kplus(&self) -> &SymMatrix {
        &self.kplus
    }

    pub fn kplus_kernel(&self) -> Kernel {
        Kernel::Table(self.kplus.clone())
    }

    /// Normalized adjacency `Ā = D^{-1/2} p₊ D^{-1/2}` with `D = diag(q)`.
    pub fn abar(&self) -> &SymMatrix {
        &self.abar
    }

    /// Whether the view marginal equals the base distribution within `tol`.
    pub fn is_stationary(&self, tol: f64) -> bool {
        self.marginal.iter().zip(self.space.probability()).all(|(q, p)| (q - p).abs() <= tol)
    }

    /// Draws a positive pair `(x̃₁, x̃₂)`.
    pub fn sample_positive(&self, rng: &mut SeededRng) -> (usize, usize) {
        let x = rng.categorical(self.space.probability());
        let row: Vec<f64> = self.augment.row(x).iter().copied().collect();
        (rng.categorical(&row), rng.categorical(&row))
    }

    /// Draws an independent view from `q`.
    pub fn sample_negative(&self, rng: &mut SeededRng) -> usize {
        rng.categorical(&self.marginal)
    }
}

/// Rejects tables that do not have one row per item.
pub(crate) fn check_rows(m: &Mat, n: usize) -> Result<()> {
    if m.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("embedding entry".into()));
    }
    Ok(())
}

pub(crate) fn check_probability(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    check_distribution(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_psd;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_augmentation() {
        let p = vec![0.2, 0.3, 0.5];
        let proc = PairProcess::new(FiniteSpace::indexed(p.clone()).unwrap(), Mat::identity(3, 3)).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { p[a] } else { 0.0 };
                assert_abs_diff_eq!(proc.joint().get(a, b), want, epsilon = 1e-15);
                let k = if a == b { 1.0 / p[a] } else { 0.0 };
                assert_abs_diff_eq!(proc.kplus().get(a, b), k, epsilon = 1e-12);
            }
        }
        assert!(proc.is_stationary(1e-15));
    }

    #[test]
    fn source_independent_augmentation() {
        let q = [0.1, 0.6, 0.3];
        let aug = Mat::from_fn(3, 3, |_, a| q[a]);
        let proc = PairProcess::new(FiniteSpace::uniform(3), aug).unwrap();
        assert!(!proc.is_stationary(1e-6));
        for a in 0..3 {
            assert_abs_diff_eq!(proc.marginal()[a], q[a], epsilon = 1e-15);
            for b in 0..3 {
                assert_abs_diff_eq!(proc.joint().get(a, b), q[a] * q[b], epsilon = 1e-15);
                assert_abs_diff_eq!(proc.kplus().get(a, b), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_blocks_are_block_diagonal() {
        let proc = PairProcess::blocks(&[2, 2], 0.0).unwrap();
        let abar = proc.abar();
        // Hand construction: q uniform 1/4, p₊ = 1/8 within each block.
        for a in 0..4 {
            for b in 0..4 {
                let want = if a / 2 == b / 2 { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(abar.get(a, b), want, epsilon = 1e-15);
            }
        }
        assert!(is_psd(abar, 1e-12).unwrap());
    }

    #[test]
    fn validation() {
        let bad = Mat::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 1.0]);
        assert!(matches!(
            PairProcess::new(FiniteSpace::uniform(2), bad),
            Err(Error::NotStochastic { row: 0, .. })
        ));
        let unreachable = Mat::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            PairProcess::new(FiniteSpace::uniform(2), unreachable),
            Err(Error::DegenerateEvent { index: 1 })
        ));
        assert!(PairProcess::new(FiniteSpace::uniform(3), Mat::identity(2, 2)).is_err());
    }

    #[test]
    fn sampling_follows_the_joint() {
        let proc = PairProcess::random(3, 4).unwrap();
        let mut rng = SeededRng::new(8);
        let mut counts = Mat::zeros(3, 3);
        let n = 100_000;
        for _ in 0..n {
            let (a, b) = proc.sample_positive(&mut rng);
            counts[(a, b)] += 1.0 / n as f64;
        }
        assert!((counts - proc.joint().as_mat()).amax() < 0.01);
    }
}
