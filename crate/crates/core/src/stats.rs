//! Cross-region statistics: correlation between K-factor and delay spread,
//! per-band means and standard deviations, and empirical CDFs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BandId, RegionMetrics};

/// K-factor/delay-spread correlation specified for the urban-micro scenario of
/// the 3GPP channel model, used as the comparison reference.
pub const REFERENCE_RHO_3GPP: f64 = -0.7;

/// Units in which the K-factor enters the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KUnits {
    Db,
    Linear,
}

/// Per-band statistics over the valid regions of one analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSummary {
    pub band: BandId,
    pub k_mean_db: f64,
    pub k_std_db: f64,
    pub ds_mean_s: f64,
    pub ds_std_s: f64,
    /// Correlation between K-factor and delay spread; `None` when one series
    /// is constant.
    pub rho: Option<f64>,
    pub valid_region_count: usize,
    pub invalid_region_count: usize,
    pub reference_rho: f64,
}

/// Product-moment correlation coefficient. The denominator is evaluated as a
/// single square root of the product of the two deviation sums, so exact
/// anticorrelation of mirrored integer data comes out as exactly -1.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: format!("correlation inputs of length {} and {}", x.len(), y.len()),
        });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput {
            context: format!("need at least 2 points, got {}", x.len()),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput {
            context: "a series is constant".into(),
        });
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Population mean and standard deviation (divisor n).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}

/// K-factor of a region in dB, when defined.
pub fn kfactor_db(metrics: &RegionMetrics) -> Option<f64> {
    if metrics.valid {
        metrics.k_factor_db
    } else {
        None
    }
}

/// Summarizes one band over its valid regions: mean/std of the K-factor (dB)
/// and delay spread, plus the correlation between the two series in the
/// requested units. Invalid regions are excluded and counted.
pub fn summarize_band(
    metrics: &[RegionMetrics],
    band: &BandId,
    reference_rho: f64,
    k_units: KUnits,
) -> Result<BandSummary> {
    let mut valid: Vec<&RegionMetrics> = metrics.iter().filter(|m| m.valid).collect();
    // fixed evaluation order makes the summary permutation-invariant bit for bit
    valid.sort_by_key(|m| m.region_index);
    if valid.len() < 2 {
        return Err(Error::TooFewValidRegions {
            band: band.label.clone(),
            valid: valid.len(),
            min: 2,
        });
    }
    let k_db: Vec<f64> = valid.iter().map(|m| m.k_factor_db.unwrap()).collect();
    let ds: Vec<f64> = valid.iter().map(|m| m.rms_delay_spread_s).collect();

    let (k_mean_db, k_std_db) = mean_std(&k_db);
    let (ds_mean_s, ds_std_s) = mean_std(&ds);

    let k_for_rho: Vec<f64> = match k_units {
        KUnits::Db => k_db,
        KUnits::Linear => valid.iter().map(|m| m.k_factor_linear.unwrap()).collect(),
    };
    let rho = match pearson(&k_for_rho, &ds) {
        Ok(r) => Some(r),
        Err(Error::DegenerateInput { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(BandSummary {
        band: band.clone(),
        k_mean_db,
        k_std_db,
        ds_mean_s,
        ds_std_s,
        rho,
        valid_region_count: valid.len(),
        invalid_region_count: metrics.len() - valid.len(),
        reference_rho,
    })
}

/// Empirical CDF as (value, probability) steps over the sorted unique values,
/// right-continuous: F(v) = P(X <= v), ending at exactly 1.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    assert!(!values.is_empty(), "ecdf of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = p,
            _ => out.push((*v, p)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(index: usize, k_db: f64, ds_s: f64) -> RegionMetrics {
        let k_lin = 10f64.powf(k_db / 10.0);
        RegionMetrics {
            region_index: index,
            k_factor_linear: Some(k_lin),
            k_factor_db: Some(k_db),
            constant_power: k_lin / (1.0 + k_lin),
            fluctuating_power: 1.0 / (1.0 + k_lin),
            mean_power: 1.0,
            rms_delay_spread_s: ds_s,
            valid: true,
        }
    }

    fn invalid_metric(index: usize) -> RegionMetrics {
        RegionMetrics {
            region_index: index,
            k_factor_linear: None,
            k_factor_db: None,
            constant_power: 0.0,
            fluctuating_power: 0.0,
            mean_power: 1.0,
            rms_delay_spread_s: 0.0,
            valid: false,
        }
    }

    #[test]
    fn mirrored_integers_are_exactly_anticorrelated() {
        let r = pearson(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap();
        assert_eq!(r, -1.0);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let err = pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap_err();
        assert_eq!(err.kind(), "DegenerateInput");
        assert_eq!(pearson(&[1.0], &[2.0]).unwrap_err().kind(), "DegenerateInput");
    }

    #[test]
    fn matches_textbook_formula_on_random_series() {
        // independent oracle: computational formula with separate square roots
        fn oracle(x: &[f64], y: &[f64]) -> f64 {
            let n = x.len() as f64;
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            let sxx: f64 = x.iter().map(|a| a * a).sum();
            let syy: f64 = y.iter().map(|b| b * b).sum();
            (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
        }
        let mut state = 12345u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let x: Vec<f64> = (0..300).map(|_| next()).collect();
        let y: Vec<f64> = (0..300).map(|i| 0.3 * x[i] + next()).collect();
        let got = pearson(&x, &y).unwrap();
        let expect = oracle(&x, &y);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn summary_of_two_regions_is_perfectly_anticorrelated() {
        let metrics = vec![metric(0, 0.0, 100e-9), metric(1, 10.0, 50e-9)];
        let band = BandId::new("b", 1e9);
        let s = summarize_band(&metrics, &band, REFERENCE_RHO_3GPP, KUnits::Db).unwrap();
        assert_eq!(s.rho, Some(-1.0));
        assert_eq!(s.valid_region_count, 2);
        assert_eq!(s.invalid_region_count, 0);
        assert!((s.k_mean_db - 5.0).abs() < 1e-12);
        assert!((s.k_std_db - 5.0).abs() < 1e-12); // population std of {0, 10}
        assert!((s.ds_mean_s - 75e-9).abs() < 1e-21);
    }

    #[test]
    fn identical_regions_yield_undefined_rho() {
        let metrics = vec![metric(0, 5.0, 80e-9), metric(1, 5.0, 80e-9)];
        let band = BandId::new("b", 1e9);
        let s = summarize_band(&metrics, &band, REFERENCE_RHO_3GPP, KUnits::Db).unwrap();
        assert_eq!(s.rho, None);
        assert_eq!(s.k_std_db, 0.0);
        assert_eq!(s.valid_region_count, 2);
    }

    #[test]
    fn invalid_regions_are_excluded_and_counted() {
        let metrics = vec![
            metric(0, 0.0, 100e-9),
            invalid_metric(1),
            metric(2, 10.0, 50e-9),
            invalid_metric(3),
        ];
        let band = BandId::new("b", 1e9);
        let s = summarize_band(&metrics, &band, REFERENCE_RHO_3GPP, KUnits::Db).unwrap();
        assert_eq!(s.valid_region_count, 2);
        assert_eq!(s.invalid_region_count, 2);
        assert_eq!(s.rho, Some(-1.0));
    }

    #[test]
    fn too_few_valid_regions_is_an_error() {
        let metrics = vec![metric(0, 0.0, 100e-9), invalid_metric(1)];
        let band = BandId::new("b", 1e9);
        let err =
            summarize_band(&metrics, &band, REFERENCE_RHO_3GPP, KUnits::Db).unwrap_err();
        assert_eq!(err.kind(), "TooFewValidRegions");
    }

    #[test]
    fn summary_is_permutation_invariant() {
        let mut metrics = vec![
            metric(0, 1.0, 90e-9),
            metric(1, 4.0, 70e-9),
            metric(2, 9.0, 40e-9),
        ];
        let band = BandId::new("b", 1e9);
        let a = summarize_band(&metrics, &band, REFERENCE_RHO_3GPP, KUnits::Db).unwrap();
        metrics.reverse();
        let b = summarize_band(&metrics, &band, REFERENCE_RHO_3GPP, KUnits::Db).unwrap();
        assert_eq!(a.k_mean_db, b.k_mean_db);
        assert_eq!(a.rho, b.rho);
    }

    #[test]
    fn ecdf_basic_values() {
        let steps = ecdf(&[3.0, 1.0, 2.0]);
        assert_eq!(steps, vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]);

        let single = ecdf(&[7.0]);
        assert_eq!(single, vec![(7.0, 1.0)]);

        // duplicates collapse into one step
        let dup = ecdf(&[2.0, 2.0, 5.0]);
        assert_eq!(dup, vec![(2.0, 2.0 / 3.0), (5.0, 1.0)]);
    }

    #[test]
    fn kfactor_db_accessor() {
        assert_eq!(kfactor_db(&metric(0, 0.0, 1e-9)), Some(0.0));
        assert_eq!(kfactor_db(&metric(0, 10.0, 1e-9)), Some(10.0));
        assert_eq!(kfactor_db(&invalid_metric(0)), None);
    }

    proptest::proptest! {
        #[test]
        fn pearson_symmetry_and_affine_equivariance(
            seed in 0u64..1000,
            a in proptest::sample::select(vec![-2.5f64, -1.0, 0.5, 3.0]),
            b in -5.0f64..5.0,
            c in proptest::sample::select(vec![-1.5f64, 0.25, 2.0]),
            d in -5.0f64..5.0,
        ) {
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let x: Vec<f64> = (0..50).map(|_| next()).collect();
            let y: Vec<f64> = (0..50).map(|_| next()).collect();
            let rxy = pearson(&x, &y).unwrap();
            let ryx = pearson(&y, &x).unwrap();
            proptest::prop_assert!((rxy - ryx).abs() < 1e-14);

            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let ys: Vec<f64> = y.iter().map(|v| c * v + d).collect();
            let rs = pearson(&xs, &ys).unwrap();
            let expect = (a * c).signum() * rxy;
            proptest::prop_assert!((rs - expect).abs() < 1e-9);
        }

        #[test]
        fn ecdf_axioms(values in proptest::collection::vec(-100.0f64..100.0, 1..60)) {
            let steps = ecdf(&values);
            proptest::prop_assert!(steps.len() <= values.len());
            proptest::prop_assert!((steps.last().unwrap().1 - 1.0).abs() < 1e-12);
            let mut prev_p = 0.0;
            let mut prev_v = f64::NEG_INFINITY;
            let mut total = 0.0;
            for &(v, p) in &steps {
                proptest::prop_assert!(v > prev_v);
                proptest::prop_assert!(p > prev_p);
                total += p - prev_p;
                prev_p = p;
                prev_v = v;
            }
            proptest::prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
