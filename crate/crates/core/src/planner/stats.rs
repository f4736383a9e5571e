//! Rank statistics and minimax monotone fits.

/// Mid-ranks (1-based, ties averaged).
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman rank correlation. `None` when either side has no spread.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Best nonincreasing L∞ fit of `y` as a function of `x`.
///
/// Points sharing an `x` must share a fitted value. Returns the fitted values
/// (in input order) and the achieved maximum deviation, which is optimal:
/// with points grouped by ascending `x`, the fit at a group is the midpoint
/// of the running minimum of `y` up to it and the running maximum from it on.
pub fn minimax_decreasing_fit(x: &[f64], y: &[f64]) -> (Vec<f64>, f64) {
    assert_eq!(x.len(), y.len(), "fit needs paired samples");
    if x.is_empty() {
        return (Vec::new(), 0.0);
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    // Groups of equal x, with their min and max y.
    let mut groups: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        while end < order.len() && x[order[end]] == x[order[start]] {
            lo = lo.min(y[order[end]]);
            hi = hi.max(y[order[end]]);
            end += 1;
        }
        groups.push((start, end, lo, hi));
        start = end;
    }

    let g = groups.len();
    // Nonincreasing f: every later point bounds f from above, every earlier
    // point from below.
    let mut prefix_min = vec![0.0; g];
    let mut running = f64::INFINITY;
    for (k, grp) in groups.iter().enumerate() {
        running = running.min(grp.2);
        prefix_min[k] = running;
    }
    let mut suffix_max = vec![0.0; g];
    let mut running = f64::NEG_INFINITY;
    for k in (0..g).rev() {
        running = running.max(groups[k].3);
        suffix_max[k] = running;
    }

    let mut fitted = vec![0.0; x.len()];
    let mut deviation: f64 = 0.0;
    for (k, &(s, e, _, _)) in groups.iter().enumerate() {
        let value = 0.5 * (prefix_min[k] + suffix_max[k]);
        deviation = deviation.max(0.5 * (suffix_max[k] - prefix_min[k]));
        for &i in &order[s..e] {
            fitted[i] = value;
        }
    }
    (fitted, deviation)
}
