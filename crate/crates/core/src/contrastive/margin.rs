use crate::error::{Error, Result};

/// Pairwise margin loss: `y d² + (1 − y) max(0, m − d)²`.
pub fn margin_pair_loss(dist: f64, positive: bool, margin: f64) -> Result<f64> {
    if !(margin >= 0.0) || !(dist >= 0.0) {
        return Err(Error::InvalidParameter(format!("distance {dist} and margin {margin} must be nonnegative")));
    }
    Ok(if positive { dist * dist } else { (margin - dist).max(0.0).powi(2) })
}

/// Triplet loss: `max(‖a − p‖² − ‖a − n‖² + α, 0)`.
pub fn triplet_loss(anchor: &[f64], pos: &[f64], neg: &[f64], alpha: f64) -> Result<f64> {
    if pos.len() != anchor.len() || neg.len() != anchor.len() {
        return Err(Error::DimensionMismatch { expected: anchor.len(), found: pos.len().max(neg.len()) });
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("margin {alpha} must be nonnegative")));
    }
    let sq = |b: &[f64]| anchor.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    Ok((sq(pos) - sq(neg) + alpha).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_examples() {
        assert_eq!(margin_pair_loss(0.0, true, 1.0).unwrap(), 0.0);
        assert_eq!(margin_pair_loss(1.5, false, 1.0).unwrap(), 0.0);
        assert_eq!(margin_pair_loss(0.25, false, 1.0).unwrap(), 0.5625);
        assert_eq!(margin_pair_loss(2.0, true, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn triplet_examples() {
        assert_eq!(triplet_loss(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 2.0], 0.5).unwrap(), 0.0);
        assert_eq!(triplet_loss(&[0.0, 0.0], &[0.0, 2.0], &[1.0, 0.0], 0.5).unwrap(), 3.5);
        assert!(triplet_loss(&[0.0], &[0.0, 1.0], &[0.0], 0.1).is_err());
    }
}
