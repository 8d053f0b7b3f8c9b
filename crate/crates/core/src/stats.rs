//! Small statistics helpers: chi-square tests and discrete entropy.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

/// Goodness of fit of `counts` to the uniform distribution. Returns
/// `(statistic, p-value)`.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let cells = counts.len();
    if cells < 2 || total == 0 {
        return (0.0, 1.0);
    }
    let expected = total as f64 / cells as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    (stat, chi_square_sf(stat, (cells - 1) as f64))
}

/// Pearson independence test on a contingency table (`rows x cols`).
/// Empty rows and columns are dropped. Returns `(statistic, p-value)`.
pub fn chi_square_independence(table: &[Vec<u64>]) -> (f64, f64) {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().any(|&c| c > 0)).collect();
    if rows.is_empty() {
        return (0.0, 1.0);
    }
    let ncols = rows[0].len();
    let col_tot: Vec<u64> = (0..ncols)
        .map(|j| rows.iter().map(|r| r[j]).sum())
        .collect();
    let cols: Vec<usize> = (0..ncols).filter(|&j| col_tot[j] > 0).collect();
    let total: u64 = col_tot.iter().sum();
    if rows.len() < 2 || cols.len() < 2 {
        return (0.0, 1.0);
    }
    let mut stat = 0.0;
    for r in &rows {
        let rt: u64 = r.iter().sum();
        for &j in &cols {
            let e = rt as f64 * col_tot[j] as f64 / total as f64;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows.len() - 1) * (cols.len() - 1)) as f64;
    (stat, chi_square_sf(stat, df))
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy_bits(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Plug-in entropy estimate from counts, with the Miller-Madow correction
/// `(m - 1) / (2N)` nats, and its standard error. Bits.
pub fn entropy_estimate(counts: &[u64]) -> EntropyEstimate {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return EntropyEstimate::default();
    }
    let nf = n as f64;
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    let mut h = 0.0;
    let mut second = 0.0;
    for &c in counts.iter().filter(|&&c| c > 0) {
        let p = c as f64 / nf;
        let l = -p.log2();
        h += p * l;
        second += p * l * l;
    }
    let var = (second - h * h).max(0.0);
    let correction = (occupied.saturating_sub(1)) as f64 / (2.0 * nf) / std::f64::consts::LN_2;
    EntropyEstimate {
        plug_in: h,
        miller_madow: h + correction,
        std_err: (var / nf).sqrt(),
        samples: n,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EntropyEstimate {
    pub plug_in: f64,
    pub miller_madow: f64,
    pub std_err: f64,
    pub samples: u64,
}
