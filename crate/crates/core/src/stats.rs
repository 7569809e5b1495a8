//! Small statistics helpers shared by the experiment drivers and the test
//! suites: total-variation distance, goodness-of-fit statistics, and the seed
//! derivation scheme used to fan a master seed out to independent runs.

/// SplitMix64 finalizer; decorrelates nearby keys.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from `(base, key)`.
///
/// Used everywhere a master seed fans out: run `i` of a batch uses
/// `derive_seed(master, i)`, a branching-process child with ordinal `j` uses
/// `derive_seed(parent_stream, j)`.
pub fn derive_seed(base: u64, key: u64) -> u64 {
    splitmix64(base ^ splitmix64(key))
}

/// Total-variation distance between two probability mass functions.
///
/// The shorter vector is padded with zeros.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let mut acc = 0.0;
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        acc += (x - y).abs();
    }
    acc / 2.0
}

/// Empirical pmf of nonnegative integer samples.
pub fn empirical_pmf(samples: &[u64]) -> Vec<f64> {
    let max = samples.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; max + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let n = samples.len().max(1) as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// Pearson chi-square statistic for observed counts against expected
/// probabilities. Cells with `np < min_expected` are pooled into the last
/// cell that meets the threshold.
pub fn chi_square_stat(observed: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut stat = 0.0;
    let mut df = 0usize;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    let len = observed.len().max(probs.len());
    for i in 0..len {
        let o = observed.get(i).copied().unwrap_or(0) as f64;
        let e = nf * probs.get(i).copied().unwrap_or(0.0);
        if e < 5.0 {
            pool_obs += o;
            pool_exp += e;
            continue;
        }
        stat += (o - e) * (o - e) / e;
        df += 1;
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        df += 1;
    }
    (stat, df.saturating_sub(1))
}

/// Approximate upper quantile of the chi-square distribution with `df`
/// degrees of freedom (Wilson-Hilferty). `z` is the standard normal quantile
/// of the same level, e.g. `z = 3.0902` for the 0.999 quantile.
pub fn chi_square_critical(df: usize, z: f64) -> f64 {
    let k = df as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// One-sample Kolmogorov-Smirnov statistic against the uniform law on [0, 1].
pub fn ks_uniform_stat(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}

/// Ordinary least squares of `y` on `x`; returns `(slope, stderr_of_slope)`.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((slope, stderr))
}
