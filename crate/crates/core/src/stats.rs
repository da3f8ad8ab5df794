//! Small statistics helpers shared by the diagnostics and metric code.

/// Arithmetic mean. Returns NaN for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Percentile with linear interpolation between closest ranks
/// (`q` in `[0, 100]`). The input does not need to be sorted.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    percentile_sorted(&sorted, q)
}

/// Same as [`percentile`] for an already sorted slice.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let pos = q.clamp(0.0, 100.0) / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Median (50th percentile).
pub fn median(values: &[f64]) -> f64 {
    percentile(values, 50.0)
}

/// Pearson correlation coefficient. `None` when either series has zero
/// variance (up to rounding of the mean) or the lengths differ.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let n = a.len() as f64;
    let flat = |ss: f64, m: f64| ss <= n * (64.0 * f64::EPSILON * m.abs()).powi(2);
    if flat(saa, ma) || flat(sbb, mb) {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Mean absolute off-diagonal entry over the strict lower triangle of a
/// square matrix given as rows.
pub fn mean_lower_triangle_abs(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (i, row) in matrix.iter().enumerate().skip(1) {
        sum += row[..i].iter().map(|v| v.abs()).sum::<f64>();
    }
    sum / (n * (n - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates_linearly() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 100.0), 4.0);
        assert!((percentile(&v, 50.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn pearson_of_identical_series_is_one() {
        let a = [1.0, 2.0, 5.0, 7.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(pearson(&a, &[1.0; 4]).is_none());
    }

    #[test]
    fn mean_lower_triangle_matches_double_loop() {
        let m = vec![
            vec![1.0, 0.2, -0.3],
            vec![0.2, 1.0, 0.5],
            vec![-0.3, 0.5, 1.0],
        ];
        assert!((mean_lower_triangle_abs(&m) - (0.2 + 0.3 + 0.5) / 3.0).abs() < 1e-15);
    }
}
