//! Polynomial (Richardson/Neville) extrapolation to a vanishing parameter.

use crate::linear::Linear;

/// Value at `h = 0` of the interpolating polynomial through `(h[k], f[k])`.
pub fn neville_at_zero<T: Linear>(h: &[f64], f: &[T]) -> T {
    assert_eq!(h.len(), f.len(), "abscissae and values differ in length");
    assert!(!h.is_empty(), "nothing to extrapolate");
    let mut table = f.to_vec();
    let n = h.len();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            table[i] = (table[i] * (-h[j]) + table[i + 1] * h[i]) * (1.0 / (h[i] - h[j]));
        }
    }
    table[0]
}

/// Extrapolated limit with a convergence residual.
#[derive(Debug, Clone, Copy)]
pub struct Limit<T> {
    pub value: T,
    pub residual: f64,
}

/// Slides a window of `order + 1` consecutive samples along the sequence and
/// extrapolates each window to zero. The limit is the last window's value and
/// the residual its distance to the previous window's.
pub fn windowed_limit<T: Linear>(h: &[f64], f: &[T], order: usize) -> Limit<T> {
    let width = order + 1;
    assert!(h.len() > width, "need at least order + 2 samples");
    let last = h.len() - width;
    let value = neville_at_zero(&h[last..], &f[last..]);
    let previous = neville_at_zero(&h[last - 1..last - 1 + width], &f[last - 1..last - 1 + width]);
    Limit {
        value,
        residual: (value - previous).size(),
    }
}

/// Full-table extrapolation with a residual from dropping the coarsest sample.
pub fn richardson_limit<T: Linear>(h: &[f64], f: &[T]) -> Limit<T> {
    assert!(h.len() >= 2, "need at least two samples");
    let value = neville_at_zero(h, f);
    let coarser = neville_at_zero(&h[1..], &f[1..]);
    Limit {
        value,
        residual: (value - coarser).size(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_polynomials() {
        let h = [0.8, 0.4, 0.2, 0.1];
        let f: Vec<f64> = h.iter().map(|x| 3.0 - 2.0 * x + 0.5 * x * x * x).collect();
        assert!((neville_at_zero(&h, &f) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn accelerates_smooth_sequences() {
        let h: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
        let f: Vec<f64> = h.iter().map(|x| x.exp()).collect();
        let lim = richardson_limit(&h, &f);
        assert!((lim.value - 1.0).abs() < 1e-12);
        assert!(lim.residual < 1e-10);
        let w = windowed_limit(&h, &f, 3);
        assert!((w.value - 1.0).abs() < 1e-8);
    }
}
