use serde::{Deserialize, Serialize};

use super::State;
use crate::error::{check_dim, L2cdsError, Result};

/// Per-dimension min/max used to map states affinely onto `[-1, 1]`.
///
/// Dimensions where `max == min` are constant: they normalise to 0 and
/// denormalise back to `min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationStats {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        check_dim("normalization bounds", min.len(), max.len())?;
        if min.iter().zip(&max).any(|(lo, hi)| !(hi >= lo) || !lo.is_finite() || !hi.is_finite()) {
            return Err(L2cdsError::InvalidArgument(
                "normalization bounds must be finite with max >= min".into(),
            ));
        }
        Ok(NormalizationStats { min, max })
    }

    /// Bounds over every state yielded by `states`.
    pub fn from_states<'a>(states: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut iter = states.into_iter();
        let first = iter.next().ok_or(L2cdsError::Empty("normalization input"))?;
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for s in iter {
            check_dim("normalization input", min.len(), s.len())?;
            for (i, &v) in s.iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        Self::new(min, max)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn is_constant(&self, i: usize) -> bool {
        self.max[i] == self.min[i]
    }

    pub fn normalize_into(&self, s: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("normalize", self.dim(), s.len())?;
        for (i, (o, &v)) in out.iter_mut().zip(s).enumerate() {
            let (lo, hi) = (self.min[i], self.max[i]);
            *o = if hi > lo { 2.0 * (v - lo) / (hi - lo) - 1.0 } else { 0.0 };
        }
        Ok(())
    }

    pub fn denormalize_into(&self, s: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("denormalize", self.dim(), s.len())?;
        for (i, (o, &v)) in out.iter_mut().zip(s).enumerate() {
            let (lo, hi) = (self.min[i], self.max[i]);
            *o = if hi > lo { lo + 0.5 * (v + 1.0) * (hi - lo) } else { lo };
        }
        Ok(())
    }

    pub fn normalize(&self, s: &State) -> Result<State> {
        let mut out = vec![0.0; s.dim()];
        self.normalize_into(&s.0, &mut out)?;
        Ok(State(out))
    }

    pub fn denormalize(&self, s: &State) -> Result<State> {
        let mut out = vec![0.0; s.dim()];
        self.denormalize_into(&s.0, &mut out)?;
        Ok(State(out))
    }
}

pub fn normalize(stats: &NormalizationStats, s: &State) -> Result<State> {
    stats.normalize(s)
}

pub fn denormalize(stats: &NormalizationStats, s: &State) -> Result<State> {
    stats.denormalize(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_maps_to_zero() {
        let stats = NormalizationStats::new(vec![0.0], vec![2.0]).unwrap();
        assert_eq!(stats.normalize(&State(vec![1.0])).unwrap().0, vec![0.0]);
    }

    #[test]
    fn constant_dimension_rule() {
        let stats = NormalizationStats::new(vec![5.0], vec![5.0]).unwrap();
        assert!(stats.is_constant(0));
        let n = stats.normalize(&State(vec![5.0])).unwrap();
        assert_eq!(n.0, vec![0.0]);
        assert_eq!(stats.denormalize(&n).unwrap().0, vec![5.0]);
    }

    #[test]
    fn rejects_bad_bounds_and_dims() {
        assert!(NormalizationStats::new(vec![1.0], vec![0.0]).is_err());
        assert!(NormalizationStats::new(vec![0.0], vec![f64::NAN]).is_err());
        let stats = NormalizationStats::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            stats.normalize(&State(vec![0.5])),
            Err(L2cdsError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            bounds in prop::collection::vec((-10.0f64..10.0, 0.01f64..20.0), 1..6),
            fractions in prop::collection::vec(-0.5f64..1.5, 6),
        ) {
            let min: Vec<f64> = bounds.iter().map(|b| b.0).collect();
            let max: Vec<f64> = bounds.iter().map(|b| b.0 + b.1).collect();
            let stats = NormalizationStats::new(min.clone(), max.clone()).unwrap();
            let s: Vec<f64> = (0..min.len()).map(|i| min[i] + fractions[i] * (max[i] - min[i])).collect();
            let back = stats.denormalize(&stats.normalize(&State(s.clone())).unwrap()).unwrap();
            for (a, b) in s.iter().zip(&back.0) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
