//! Thread-parallelism switch for the dense kernels.
//!
//! Parallel kernels split work by output rows (or output blocks) and keep the
//! per-entry accumulation order fixed, so results are identical with or
//! without threads. Serial mode only turns the thread pool off.

use std::sync::atomic::{AtomicBool, Ordering};

static SERIAL: AtomicBool = AtomicBool::new(false);

/// Below this many scalar multiply-adds a kernel never spawns work.
pub(crate) const PAR_THRESHOLD: usize = 1 << 18;

pub fn set_serial(serial: bool) {
    SERIAL.store(serial, Ordering::Relaxed);
}

pub fn is_serial() -> bool {
    SERIAL.load(Ordering::Relaxed)
}

pub(crate) fn use_threads(work: usize) -> bool {
    !is_serial() && work >= PAR_THRESHOLD && rayon::current_num_threads() > 1
}
