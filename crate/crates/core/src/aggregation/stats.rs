use super::AggregationError;
use crate::num::Scalar;

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite values"));
    let mut ranks = vec![T::zero(); x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share rank mean((i+1)..=(j+1)).
        let r = T::from_usize_lossy(i + j + 2) / T::lit(2.0);
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn check<T: Scalar>(x: &[T], y: &[T]) -> Result<(), AggregationError> {
    if x.len() != y.len() {
        return Err(AggregationError::Contract(format!("lengths {} and {} differ", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(AggregationError::Contract("need at least 2 observations".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AggregationError::Contract("values must be finite".into()));
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T, AggregationError> {
    check(x, y)?;
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(AggregationError::Undefined("correlation of a constant vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T, AggregationError> {
    check(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rank of each value by counting smaller and equal elements.
    fn oracle_ranks(x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|v| {
                let less = x.iter().filter(|w| *w < v).count() as f64;
                let eq = x.iter().filter(|w| *w == v).count() as f64;
                less + (eq + 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
        let x = [3.0, 1.0, 3.0, 3.0, 0.0];
        assert_eq!(average_ranks(&x), oracle_ranks(&x));
    }

    #[test]
    fn basic_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(AggregationError::Undefined(_))));
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
        assert!((spearman(&[1.0f32, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn monotone_transform_invariant(v in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..15)) {
            let x: Vec<f64> = v.iter().map(|p| p.0).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1).collect();
            if let Ok(r) = spearman(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|a| (a / 10.0).exp()).collect();
                let ty: Vec<f64> = y.iter().map(|b| b * 3.0 + 7.0).collect();
                prop_assert!((spearman(&tx, &ty).unwrap() - r).abs() < 1e-9);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn ranks_match_oracle(x in proptest::collection::vec(0u8..6, 1..20)) {
            let xf: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
            prop_assert_eq!(average_ranks(&xf), oracle_ranks(&xf));
        }
    }
}
