//! Mann-Whitney U test.
//!
//! The statistic counts, over all pairs (x in a, y in b), the pairs with
//! x < y, scoring ties one half:
//!
//! ```text
//! U = sum over (x, y) of [ 1 if x < y, 1/2 if x = y, 0 otherwise ]
//! ```
//!
//! Large U therefore means the first sample tends to be *smaller*. The
//! two-sided p-value is exact for small samples (n_a + n_b <= 12): with no
//! ties a rank-sum counting recurrence gives the null distribution; with
//! ties the test enumerates all C(n_a+n_b, n_a) group assignments of the
//! combined values directly. Larger samples use the normal approximation
//! with tie and continuity corrections.

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("both samples must be non-empty")]
pub struct EmptyInput;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwuMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MannWhitneyResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: MwuMethod,
    pub n_a: usize,
    pub n_b: usize,
}

/// Largest combined sample size for which the exact method is used.
pub const EXACT_LIMIT: usize = 12;

/// U by direct pair counting: pairs with x < y count 1, ties count 1/2.
pub fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x < y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

fn has_ties(a: &[f64], b: &[f64]) -> bool {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.windows(2).any(|w| w[0] == w[1])
}

/// Null distribution of the rank-sum over m-subsets of ranks 1..=n:
/// `counts[s]` is the number of subsets with sum s.
fn rank_sum_counts(n: usize, m: usize) -> Vec<f64> {
    let max_sum = n * (n + 1) / 2;
    // dp[k][s] after considering ranks 1..=r
    let mut dp = vec![vec![0.0f64; max_sum + 1]; m + 1];
    dp[0][0] = 1.0;
    for r in 1..=n {
        for k in (1..=m).rev() {
            for s in (r..=max_sum).rev() {
                let add = dp[k - 1][s - r];
                dp[k][s] += add;
            }
        }
    }
    dp.swap_remove(m)
}

/// Exact two-sided p for tie-free samples via the rank-sum recurrence.
fn exact_p_ranks(n_a: usize, n_b: usize, u_obs: f64) -> f64 {
    let n = n_a + n_b;
    let counts = rank_sum_counts(n, n_a);
    let min_sum = n_a * (n_a + 1) / 2;
    let mut total = 0.0;
    let mut le = 0.0;
    let mut ge = 0.0;
    for (s, &count) in counts.iter().enumerate() {
        if count == 0.0 || s < min_sum {
            continue;
        }
        // rank-sum s means s - min_sum pairs with x > y, so
        // U (pairs with x < y) is the complement
        let u = (n_a * n_b) as f64 - (s - min_sum) as f64;
        total += count;
        if u <= u_obs + 1e-9 {
            le += count;
        }
        if u >= u_obs - 1e-9 {
            ge += count;
        }
    }
    (2.0 * (le.min(ge)) / total).min(1.0)
}

/// Exact two-sided p with ties: enumerate every assignment of the combined
/// values into groups of sizes n_a and n_b.
fn exact_p_enumerate(a: &[f64], b: &[f64], u_obs: f64) -> f64 {
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let n_a = a.len();
    let mut le = 0u64;
    let mut ge = 0u64;
    let mut total = 0u64;
    let mut picked = Vec::with_capacity(n_a);

    fn walk(
        combined: &[f64],
        start: usize,
        need: usize,
        picked: &mut Vec<usize>,
        u_obs: f64,
        le: &mut u64,
        ge: &mut u64,
        total: &mut u64,
    ) {
        if need == 0 {
            let group_a: Vec<f64> = picked.iter().map(|&i| combined[i]).collect();
            let group_b: Vec<f64> = (0..combined.len())
                .filter(|i| !picked.contains(i))
                .map(|i| combined[i])
                .collect();
            let u = u_statistic(&group_a, &group_b);
            *total += 1;
            if u <= u_obs + 1e-9 {
                *le += 1;
            }
            if u >= u_obs - 1e-9 {
                *ge += 1;
            }
            return;
        }
        for i in start..combined.len() {
            picked.push(i);
            walk(combined, i + 1, need - 1, picked, u_obs, le, ge, total);
            picked.pop();
        }
    }

    walk(
        &combined, 0, n_a, &mut picked, u_obs, &mut le, &mut ge, &mut total,
    );
    (2.0 * (le.min(ge) as f64) / total as f64).min(1.0)
}

/// Exact two-sided p-value for the observed statistic.
pub fn exact_p(a: &[f64], b: &[f64], u_obs: f64) -> f64 {
    if has_ties(a, b) {
        exact_p_enumerate(a, b, u_obs)
    } else {
        exact_p_ranks(a.len(), b.len(), u_obs)
    }
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf polynomial
/// (absolute error below 1.5e-7).
pub fn std_normal_cdf(x: f64) -> f64 {
    fn erf(x: f64) -> f64 {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let x = x.abs();
        let t = 1.0 / (1.0 + 0.3275911 * x);
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        sign * (1.0 - poly * (-x * x).exp())
    }
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Two-sided p by normal approximation with tie-corrected variance and a
/// continuity correction.
pub fn normal_approx_p(a: &[f64], b: &[f64], u_obs: f64) -> f64 {
    let n_a = a.len() as f64;
    let n_b = b.len() as f64;
    let n = n_a + n_b;
    let mean = n_a * n_b / 2.0;

    // tie correction over tie-group sizes in the combined sample
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j] == all[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let variance = n_a * n_b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let diff = u_obs - mean;
    let corrected = diff - 0.5 * diff.signum();
    let z = corrected / variance.sqrt();
    (2.0 * std_normal_cdf(-z.abs())).min(1.0)
}

/// Mann-Whitney U with a two-sided p-value; exact whenever
/// `n_a + n_b <= 12`, normal approximation beyond.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitneyResult, EmptyInput> {
    if a.is_empty() || b.is_empty() {
        return Err(EmptyInput);
    }
    let u = u_statistic(a, b);
    let (p, method) = if a.len() + b.len() <= EXACT_LIMIT {
        (exact_p(a, b, u), MwuMethod::Exact)
    } else {
        (normal_approx_p(a, b, u), MwuMethod::NormalApprox)
    };
    Ok(MannWhitneyResult {
        u_statistic: u,
        p_value: p,
        method,
        n_a: a.len(),
        n_b: b.len(),
    })
}
