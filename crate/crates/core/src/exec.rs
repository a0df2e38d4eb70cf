//! Worker dispatch: data-parallel maps with rayon when the `parallel` feature
//! is on, plain loops otherwise. Output ordering is by index either way, so
//! downstream reductions are deterministic regardless of worker count.

#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T>(n: usize, f: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Always-sequential variant, kept as the benchmark baseline.
pub fn map_indexed_seq<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Apply `f` to equal-width column chunks of a flat column-major buffer.
/// `chunk(base_col, cols_slice)`; chunk boundaries are fixed, not work-stolen,
/// so the touched entries are identical in both execution modes.
#[cfg(feature = "parallel")]
pub fn for_each_col_chunk(
    data: &mut [f64],
    rows: usize,
    cols_per_chunk: usize,
    f: impl Fn(usize, &mut [f64]) + Sync,
) {
    use rayon::prelude::*;
    data.par_chunks_mut(rows * cols_per_chunk)
        .enumerate()
        .for_each(|(i, chunk)| f(i * cols_per_chunk, chunk));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_col_chunk(
    data: &mut [f64],
    rows: usize,
    cols_per_chunk: usize,
    f: impl Fn(usize, &mut [f64]) + Sync,
) {
    for (i, chunk) in data.chunks_mut(rows * cols_per_chunk).enumerate() {
        f(i * cols_per_chunk, chunk);
    }
}
