/// Result of [`reflection_rebalance`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    pub logcap: Vec<f64>,
    /// Number of reflected slots.
    pub k: usize,
    pub pivot: f64,
    /// No `k < N` satisfied the pivot condition; `k = N - 1` was used.
    pub fallback: bool,
    /// More than two slots shared a value within `1e-14`.
    pub triple_tie: bool,
}

/// Adds `budget` to the sum of log caps by reflecting the lowest values.
///
/// With slots ordered ascending by value, `k` is the smallest count such that
/// `k·x_(k+1) − (x_(1) + ... + x_(k)) > budget/2`. The pivot is
/// `2·(x_(1) + ... + x_(k) + budget/2)/k` and the slot holding the `j`-th
/// lowest value receives `pivot − x_(k+1−j)`, so the reflected values keep
/// their ascending order across slots.
pub fn reflection_rebalance(logcap: &[f64], budget: f64) -> Reflection {
    let n = logcap.len();
    assert!(n >= 2, "reflection needs at least two slots");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| logcap[a].total_cmp(&logcap[b]));

    let triple_tie = order
        .windows(3)
        .any(|w| logcap[w[2]] - logcap[w[0]] <= 1e-14);

    let half = 0.5 * budget;
    let mut bottom = 0.0;
    let mut k = n - 1;
    let mut fallback = true;
    for j in 1..n {
        bottom += logcap[order[j - 1]];
        if j as f64 * logcap[order[j]] - bottom > half {
            k = j;
            fallback = false;
            break;
        }
    }
    let pivot = 2.0 * (bottom + half) / k as f64;

    let mut out = logcap.to_vec();
    for j in 0..k {
        out[order[j]] = pivot - logcap[order[k - 1 - j]];
    }
    Reflection {
        logcap: out,
        k,
        pivot,
        fallback,
        triple_tie,
    }
}
