//! Thread pools and order-preserving parallel maps.
//!
//! Work is always collected by index and reduced sequentially afterwards, so
//! the thread count never changes a result.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A pool with `threads` workers, or rayon's default when `None`.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::param("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Domain(e.to_string()))
}

/// `f(0), f(1), ..., f(n-1)` evaluated in parallel, returned in index order.
pub fn map_indexed<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Paths per chunk in [`chunked_sum`]. Fixed, so that the summation order is
/// too.
const CHUNK: u64 = 64;

/// `Σ_i f(i)` for vector-valued `f` writing into an accumulator of `len`
/// entries. Indices are grouped in fixed chunks summed in parallel, then the
/// chunk totals are added in index order.
pub fn chunked_sum<F>(n: u64, len: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64, &mut [f64]) -> Result<()> + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = map_indexed(chunks, |c| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; len];
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            f(i, &mut acc)?;
        }
        Ok(acc)
    });
    let mut total = vec![0.0; len];
    for part in partial {
        for (t, p) in total.iter_mut().zip(part?) {
            *t += p;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_pool() {
        let want: Vec<u64> = (0..1000).map(|i| i * i).collect();
        for threads in [1, 3] {
            let got = pool(Some(threads)).unwrap().install(|| map_indexed(1000, |i| i * i));
            assert_eq!(got, want);
        }
        assert!(pool(Some(0)).is_err());
        let sums: Vec<Vec<f64>> = [1, 4]
            .iter()
            .map(|&t| {
                pool(Some(t))
                    .unwrap()
                    .install(|| {
                        chunked_sum(1000, 2, |i, acc| {
                            acc[0] += (i as f64).sqrt();
                            acc[1] += 1.0 / (1.0 + i as f64);
                            Ok(())
                        })
                    })
                    .unwrap()
            })
            .collect();
        assert_eq!(sums[0], sums[1]);
    }
}
