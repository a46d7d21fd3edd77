//! Unit-cost edit distance over Unicode scalar values.

/// Full edit distance using a two-row table.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance if it is at most `max`, otherwise `None`.
///
/// Only the diagonal band of width `2 * max + 1` is evaluated and the scan
/// stops as soon as every cell of a row exceeds `max`.
pub fn levenshtein_bounded(a: &[char], b: &[char], max: usize) -> Option<usize> {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let (n, m) = (a.len(), b.len());
    if n - m > max {
        return None;
    }
    if m == 0 {
        return Some(n);
    }
    const INF: usize = usize::MAX / 2;
    let mut prev = vec![INF; m + 1];
    let mut cur = vec![INF; m + 1];
    for (j, cell) in prev.iter_mut().enumerate().take(max.min(m) + 1) {
        *cell = j;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(max).max(1);
        let hi = (i + max).min(m);
        cur[lo - 1] = if lo == 1 && i <= max { i } else { INF };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = INF;
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[m];
    (d <= max).then_some(d)
}

/// `1 - lev(a, b) / max(|a|, |b|)`, with two empty strings scoring 1.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    similarity_from_distance(levenshtein(&a, &b), longest)
}

#[inline]
pub fn similarity_from_distance(distance: usize, longest: usize) -> f64 {
    1.0 - distance as f64 / longest as f64
}

/// Largest distance `d` with `similarity_from_distance(d, longest) >= threshold`,
/// or `None` when even identical strings fall below the threshold.
pub fn max_distance_for(threshold: f64, longest: usize) -> Option<usize> {
    if longest == 0 {
        return (1.0 >= threshold).then_some(0);
    }
    let mut d = (((1.0 - threshold) * longest as f64).floor().max(0.0) as usize).min(longest);
    while d < longest && similarity_from_distance(d + 1, longest) >= threshold {
        d += 1;
    }
    while similarity_from_distance(d, longest) < threshold {
        if d == 0 {
            return None;
        }
        d -= 1;
    }
    Some(d)
}
