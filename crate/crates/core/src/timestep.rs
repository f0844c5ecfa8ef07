use crate::error::Result;

/// State that supports `self += alpha * other`.
pub(crate) trait Axpy: Clone {
    fn axpy(&mut self, alpha: f64, other: &Self);
}

/// One classical four-stage Runge-Kutta step for `y' = f(y)`.
pub(crate) fn rk4<S: Axpy>(y: &S, dt: f64, mut f: impl FnMut(&S) -> Result<S>) -> Result<S> {
    let k1 = f(y)?;
    let mut stage = y.clone();
    stage.axpy(0.5 * dt, &k1);
    let k2 = f(&stage)?;
    let mut stage = y.clone();
    stage.axpy(0.5 * dt, &k2);
    let k3 = f(&stage)?;
    let mut stage = y.clone();
    stage.axpy(dt, &k3);
    let k4 = f(&stage)?;

    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// Sample times `0, dt_s, 2 dt_s, ..., t_end` (the last one exact).
pub(crate) fn sample_times(t_end: f64, sample_dt: f64) -> Vec<f64> {
    let n = if sample_dt > 0.0 {
        ((t_end / sample_dt) - 1e-9).ceil().max(1.0) as usize
    } else {
        1
    };
    (0..=n)
        .map(|i| if i == n { t_end } else { i as f64 * sample_dt })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Scalar(f64);
    impl Axpy for Scalar {
        fn axpy(&mut self, alpha: f64, other: &Self) {
            self.0 += alpha * other.0;
        }
    }

    #[test]
    fn rk4_is_fourth_order_on_exponential() {
        let err = |dt: f64| {
            let mut y = Scalar(1.0);
            let n = (1.0 / dt).round() as usize;
            for _ in 0..n {
                y = rk4(&y, dt, |s| Ok(Scalar(-s.0))).unwrap();
            }
            (y.0 - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn sample_times_end_exactly() {
        assert_eq!(sample_times(1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(sample_times(1.0, 0.3), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert_eq!(sample_times(0.5, 0.0), vec![0.0, 0.5]);
    }
}
