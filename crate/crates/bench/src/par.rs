//! Cell-level parallelism with a sequential fallback.

use std::sync::Mutex;

/// Held while a timed section runs so that two timings never overlap, even
/// when cells are spread over a thread pool.
static TIMING: Mutex<()> = Mutex::new(());

/// `items.map(f)`, in parallel unless `serial` is set or the `parallel`
/// feature is off. Output order always matches input order.
pub fn map_cells<T, R, F>(items: &[T], serial: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !serial {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = serial;
    items.iter().map(f).collect()
}

pub fn timed<R>(f: impl FnOnce() -> R) -> R {
    let _guard = TIMING.lock().unwrap_or_else(|e| e.into_inner());
    f()
}

/// Whether cells may actually run concurrently in this build.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
