//! Limits of sequences sampled on geometric grids, and power-law fits.

use crate::error::{Error, Result};

/// Outcome of a Richardson extrapolation with fitted orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub limit: f64,
    pub error: f64,
    /// Correction orders eliminated at each level, measured per unit of
    /// `ln(ratio)`; the first entry is the leading correction exponent.
    pub orders: Vec<f64>,
}

impl Extrapolation {
    pub fn leading_order(&self) -> Option<f64> {
        self.orders.first().copied()
    }
}

/// Extrapolates `values[k] = A + B ratio^(-e k) + ...` to `A`.
///
/// Each level eliminates one correction with an order fitted locally from
/// every consecutive triple (iterated Aitken), so no order is assumed.
/// Returns the level with the smallest difference between its last two
/// entries. Sequences whose differences sit at roundoff are returned as-is
/// with an empty order list.
pub fn richardson(values: &[f64], ratio: f64) -> Result<Extrapolation> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(
            "extrapolation needs at least two samples".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample".into()));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 32.0 * f64::EPSILON * scale + f64::MIN_POSITIVE;

    let mut col = values.to_vec();
    let mut orders = Vec::new();
    let last_diff = |c: &[f64]| (c[c.len() - 1] - c[c.len() - 2]).abs();
    let mut best = Extrapolation {
        limit: col[col.len() - 1],
        error: last_diff(&col),
        orders: Vec::new(),
    };
    if best.error <= floor {
        best.error = floor;
        return Ok(best);
    }

    'levels: while col.len() >= 4 {
        let m = col.len();
        let mut next = Vec::with_capacity(m - 2);
        for w in col.windows(3) {
            let d0 = w[1] - w[0];
            let d1 = w[2] - w[1];
            if d1.abs() <= floor {
                // converged to roundoff from here on
                next.push(w[2]);
                continue;
            }
            let q = d0 / d1;
            if !(q > 1.0 + 1e-9) || !q.is_finite() {
                break 'levels;
            }
            next.push(w[2] + d1 / (q - 1.0));
        }
        let d0 = col[m - 2] - col[m - 3];
        let d1 = col[m - 1] - col[m - 2];
        if d1 != 0.0 && d0 / d1 > 1.0 {
            orders.push((d0 / d1).ln() / ratio.ln());
        }
        col = next;
        let err = last_diff(&col);
        if err < best.error {
            best = Extrapolation {
                limit: col[col.len() - 1],
                error: err.max(floor),
                orders: orders.clone(),
            };
        }
        if err <= floor {
            break;
        }
    }
    if best.orders.is_empty() && !orders.is_empty() {
        best.orders = vec![orders[0]];
    }
    Ok(best)
}

/// Least-squares fit of `value ~ coefficient * radius^(-exponent)` in
/// log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Largest absolute residual in `ln(value)`.
    pub residual: f64,
}

pub fn decay_order_fit(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 4 {
        return Err(Error::FitRefused(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    let sign = samples[0].1.signum();
    for &(r, v) in samples {
        if !(r > 0.0) || !r.is_finite() || !v.is_finite() {
            return Err(Error::FitRefused(format!("invalid sample ({r}, {v})")));
        }
        if v == 0.0 {
            return Err(Error::FitRefused("zero value in samples".into()));
        }
        if v.signum() != sign {
            return Err(Error::FitRefused("values change sign across samples".into()));
        }
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(r, v)| (r.ln(), v.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitRefused("radii are not distinct".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(PowerLawFit {
        exponent: -slope,
        coefficient: sign * intercept.exp(),
        residual,
    })
}

/// Dyadic radii `r0 * 2^k` for `k` in `first..=last`.
pub fn dyadic_radii(r0: f64, first: i32, last: i32) -> Vec<f64> {
    (first..=last).map(|k| r0 * 2f64.powi(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_fit() {
        let s: Vec<_> = dyadic_radii(1.0, 0, 6).into_iter().map(|r| (r, 5.0 / (r * r))).collect();
        let f = decay_order_fit(&s).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!((f.coefficient - 5.0).abs() < 1e-11);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn subleading_contamination_is_small_on_a_wide_window() {
        let s: Vec<_> = (0..=12)
            .map(|k| 100.0 * 100f64.powf(k as f64 / 12.0))
            .map(|r| (r, 1.0 / r + 1.0 / (r * r)))
            .collect();
        let f = decay_order_fit(&s).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-2, "{}", f.exponent);
    }

    #[test]
    fn sign_change_is_refused() {
        let s = [(1.0, 1.0), (2.0, 0.5), (4.0, -0.1), (8.0, 0.01)];
        assert!(matches!(decay_order_fit(&s), Err(Error::FitRefused(_))));
    }

    #[test]
    fn richardson_recovers_limit_with_mixed_orders() {
        let v: Vec<f64> = dyadic_radii(1.0, 0, 14)
            .iter()
            .map(|r| 6.0 + 2.0 / r + 0.7 * r.powf(-1.6))
            .collect();
        let e = richardson(&v, 2.0).unwrap();
        assert!((e.limit - 6.0).abs() < 1e-9, "{:?}", e);
        assert!((e.orders[0] - 1.0).abs() < 0.1);
    }

    #[test]
    fn constant_sequence_is_exact() {
        let e = richardson(&[2.0; 6], 2.0).unwrap();
        assert_eq!(e.limit, 2.0);
        assert!(e.orders.is_empty());
    }
}
