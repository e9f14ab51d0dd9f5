use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use super::exact::{gfc_exact, rational};
use super::log_add_exp;
use crate::error::{Error, Result};
use num_traits::{Signed, ToPrimitive, Zero};

/// Default cap on the first index of a coefficient table or row.
pub const DEFAULT_TABLE_LIMIT: usize = 20_000;

/// Environment variable overriding [`DEFAULT_TABLE_LIMIT`].
pub const TABLE_LIMIT_ENV: &str = "PITMAN_TABLE_LIMIT";

/// Rows up to this size are certified against the exact alternating sum.
const VALIDATION_ROWS: usize = 12;
const VALIDATION_RTOL: f64 = 1e-10;

/// The configured table limit (environment override or default).
pub fn table_limit() -> usize {
    std::env::var(TABLE_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_TABLE_LIMIT)
}

/// Triangular table of log 𝒞(m, k; α, r) for 0 ≤ k ≤ m ≤ n_max.
///
/// The shift r is 0 for the central coefficients. Zero coefficients (k > m,
/// or k = 0 in the central case) are stored as −∞.
#[derive(Debug, Clone)]
pub struct GfcTable {
    n_max: usize,
    alpha: f64,
    shift: f64,
    log_values: Vec<f64>,
}

impl GfcTable {
    pub fn build(alpha: f64, n_max: usize, shift: f64) -> Result<Self> {
        Self::build_with_limit(alpha, n_max, shift, table_limit())
    }

    pub fn build_with_limit(alpha: f64, n_max: usize, shift: f64, limit: usize) -> Result<Self> {
        check_inputs(alpha, n_max, shift, limit)?;
        certify(alpha, shift, n_max)?;
        let mut log_values = Vec::with_capacity((n_max + 1) * (n_max + 2) / 2);
        let mut row = vec![0.0];
        log_values.push(0.0);
        let mut next = Vec::new();
        for m in 0..n_max {
            advance_row(&row, m, alpha, shift, &mut next)?;
            std::mem::swap(&mut row, &mut next);
            log_values.extend_from_slice(&row);
        }
        Ok(GfcTable { n_max, alpha, shift, log_values })
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// log 𝒞(n, k); −∞ for zero coefficients.
    ///
    /// # Panics
    /// If `n > n_max`.
    pub fn log_coef(&self, n: usize, k: usize) -> f64 {
        assert!(n <= self.n_max, "row {n} beyond table size {}", self.n_max);
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.log_values[n * (n + 1) / 2 + k]
    }

    /// The row log 𝒞(n, 0..=n).
    pub fn row(&self, n: usize) -> &[f64] {
        assert!(n <= self.n_max, "row {n} beyond table size {}", self.n_max);
        let start = n * (n + 1) / 2;
        &self.log_values[start..start + n + 1]
    }
}

/// Builds a full triangular table (see [`GfcTable`]).
pub fn gfc_table(alpha: f64, n_max: usize, shift: f64) -> Result<GfcTable> {
    GfcTable::build(alpha, n_max, shift)
}

/// Computes the single row log 𝒞(n, 0..=n; α, r) in O(n) memory.
pub fn gfc_row(alpha: f64, n: usize, shift: f64) -> Result<Vec<f64>> {
    check_inputs(alpha, n.max(1), shift, table_limit())?;
    certify(alpha, shift, n)?;
    let mut row = vec![0.0];
    let mut next = Vec::with_capacity(n + 1);
    for m in 0..n {
        advance_row(&row, m, alpha, shift, &mut next)?;
        std::mem::swap(&mut row, &mut next);
    }
    Ok(row)
}

/// Rows kept by [`gfc_row_cached`] before the cache is flushed.
const ROW_CACHE_CAPACITY: usize = 32;

type RowKey = (u64, usize, u64);

fn row_cache() -> &'static Mutex<HashMap<RowKey, Arc<Vec<f64>>>> {
    static ROWS: OnceLock<Mutex<HashMap<RowKey, Arc<Vec<f64>>>>> = OnceLock::new();
    ROWS.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Like [`gfc_row`], but shares recently computed rows between callers.
///
/// The lock is not held while a missing row is computed, so two threads may
/// occasionally build the same row; both get identical values.
pub fn gfc_row_cached(alpha: f64, n: usize, shift: f64) -> Result<Arc<Vec<f64>>> {
    let key = (alpha.to_bits(), n, shift.to_bits());
    if let Some(row) = row_cache().lock().expect("row cache").get(&key) {
        return Ok(Arc::clone(row));
    }
    let row = Arc::new(gfc_row(alpha, n, shift)?);
    let mut cache = row_cache().lock().expect("row cache");
    if cache.len() >= ROW_CACHE_CAPACITY {
        cache.clear();
    }
    cache.insert(key, Arc::clone(&row));
    Ok(row)
}

fn check_inputs(alpha: f64, n_max: usize, shift: f64, limit: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !shift.is_finite() {
        return Err(Error::InvalidParams(format!("shift = {shift} must be finite")));
    }
    if n_max == 0 {
        return Err(Error::InvalidParams("table size must be at least 1".into()));
    }
    if n_max > limit {
        return Err(Error::TableLimit { requested: n_max, limit });
    }
    Ok(())
}

/// 𝒞(m+1, k) = (m − r − kα)·𝒞(m, k) + α·𝒞(m, k−1).
///
/// Follows from [x]_(m+1) = [x]_(m)·(x + m) with x = −iα − r, splitting
/// −iα = −kα + (k−i)α and using (k−i)·C(k,i) = k·C(k−1,i).
fn advance_row(prev: &[f64], m: usize, alpha: f64, shift: f64, out: &mut Vec<f64>) -> Result<()> {
    debug_assert_eq!(prev.len(), m + 1);
    let ln_alpha = alpha.ln();
    out.clear();
    out.reserve(m + 2);
    for k in 0..=m + 1 {
        let stay = if k <= m && prev[k] > f64::NEG_INFINITY {
            let factor = m as f64 - shift - k as f64 * alpha;
            if factor > 0.0 {
                factor.ln() + prev[k]
            } else if factor == 0.0 {
                f64::NEG_INFINITY
            } else {
                return Err(Error::Domain(format!(
                    "shift {shift} produces a signed coefficient at (n={}, k={k}) for alpha={alpha}",
                    m + 1
                )));
            }
        } else {
            f64::NEG_INFINITY
        };
        let grow = if k >= 1 { ln_alpha + prev[k - 1] } else { f64::NEG_INFINITY };
        let value = log_add_exp(stay, grow);
        if k >= 1 && value == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "non-positive coefficient at (n={}, k={k}) for alpha={alpha}, shift={shift}",
                m + 1
            )));
        }
        out.push(value);
    }
    Ok(())
}

fn certified() -> &'static Mutex<HashSet<(u64, u64, usize)>> {
    static CERTIFIED: OnceLock<Mutex<HashSet<(u64, u64, usize)>>> = OnceLock::new();
    CERTIFIED.get_or_init(|| Mutex::new(HashSet::new()))
}

/// Checks the recurrence against the exact alternating sum on the first rows.
fn certify(alpha: f64, shift: f64, n_max: usize) -> Result<()> {
    let rows = n_max.min(VALIDATION_ROWS);
    let key = (alpha.to_bits(), shift.to_bits(), rows);
    if certified().lock().expect("certification cache").contains(&key) {
        return Ok(());
    }
    let s = rational(alpha);
    let r = rational(shift);
    let mut row = vec![0.0];
    let mut next = Vec::new();
    for m in 0..rows {
        advance_row(&row, m, alpha, shift, &mut next)?;
        std::mem::swap(&mut row, &mut next);
        let n = m + 1;
        for (k, &log_value) in row.iter().enumerate() {
            let exact = gfc_exact(n, k, &s, &r);
            if exact.is_zero() {
                if log_value != f64::NEG_INFINITY {
                    return Err(Error::GfcValidation { n, k, expected: 0.0, got: log_value.exp() });
                }
                continue;
            }
            if !exact.is_positive() {
                return Err(Error::Domain(format!(
                    "coefficient at (n={n}, k={k}) is negative for alpha={alpha}, shift={shift}"
                )));
            }
            let expected = exact.to_f64().unwrap_or(f64::NAN);
            let got = log_value.exp();
            if !((got / expected - 1.0).abs() <= VALIDATION_RTOL) {
                return Err(Error::GfcValidation { n, k, expected, got });
            }
        }
    }
    certified().lock().expect("certification cache").insert(key);
    Ok(())
}
