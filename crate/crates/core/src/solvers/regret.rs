/// Distribution proportional to the positive parts of `regrets`; uniform if none is positive.
pub fn regret_matching(regrets: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; regrets.len()];
    regret_matching_into(regrets, &mut out);
    out
}

pub fn regret_matching_into(regrets: &[f64], out: &mut [f64]) {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / total;
        }
    } else {
        out.fill(1.0 / regrets.len() as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn proportional_to_positive_parts() {
        assert_eq!(regret_matching(&[3.0, 1.0, 0.0]), vec![0.75, 0.25, 0.0]);
        assert_eq!(regret_matching(&[-2.0, -1.0]), vec![0.5, 0.5]);
        assert_eq!(regret_matching(&[-2.0, 4.0]), vec![0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn sums_to_one(row in prop::collection::vec(-100.0f64..100.0, 1..8)) {
            let p = regret_matching(&row);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        }

        #[test]
        fn monotone_in_positive_entry(
            row in prop::collection::vec(-10.0f64..10.0, 2..6),
            k in 0usize..6,
            bump in 0.0f64..5.0,
        ) {
            let k = k % row.len();
            prop_assume!(row[k] > 0.0);
            let mut bigger = row.clone();
            bigger[k] += bump;
            prop_assert!(regret_matching(&bigger)[k] >= regret_matching(&row)[k] - 1e-15);
        }
    }
}
