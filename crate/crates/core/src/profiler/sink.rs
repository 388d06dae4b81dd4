//! Thread-local instrumentation sink.
//!
//! While a [`Session`] is active on a thread, every [`Dyadic`](crate::Dyadic)
//! created on that thread is tagged with the session id and its bit size is
//! added to the live total; dropping it subtracts the size again. Values
//! created before the session started (or on other threads) are invisible.

use std::cell::{Cell, RefCell};
use std::marker::PhantomData;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use thiserror::Error;

static NEXT_SESSION: AtomicU32 = AtomicU32::new(1);
static PARALLEL_RUNS: AtomicUsize = AtomicUsize::new(0);

thread_local! {
    static ACTIVE: Cell<u32> = const { Cell::new(0) };
    static STATS: RefCell<SinkStats> = RefCell::new(SinkStats::default());
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SinkError {
    #[error("an instrumentation session is already active on this thread")]
    AlreadyActive,
    #[error("instrumentation cannot be enabled while a parallel integration is running")]
    ParallelModeActive,
}

/// Counters accumulated over one session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SinkStats {
    pub live_bits: u64,
    pub live_count: u64,
    pub peak_live_bits: u64,
    pub peak_live_count: u64,
    pub peak_single_bits: u64,
    pub created: u64,
    pub oracle_calls: u64,
}

/// An active instrumentation session. Not `Send`: the sink is per thread.
#[derive(Debug)]
pub struct Session {
    id: u32,
    _thread_bound: PhantomData<*const ()>,
}

impl Session {
    pub fn start() -> Result<Session, SinkError> {
        if ACTIVE.with(Cell::get) != 0 {
            return Err(SinkError::AlreadyActive);
        }
        if PARALLEL_RUNS.load(Ordering::SeqCst) > 0 {
            return Err(SinkError::ParallelModeActive);
        }
        let mut id = NEXT_SESSION.fetch_add(1, Ordering::Relaxed);
        if id == 0 {
            id = NEXT_SESSION.fetch_add(1, Ordering::Relaxed);
        }
        STATS.with(|s| *s.borrow_mut() = SinkStats::default());
        ACTIVE.with(|a| a.set(id));
        Ok(Session {
            id,
            _thread_bound: PhantomData,
        })
    }

    pub fn stats(&self) -> SinkStats {
        STATS.with(|s| s.borrow().clone())
    }

    /// Restart peak tracking from the current live totals.
    pub fn reset_peaks(&self) {
        STATS.with(|s| {
            let mut s = s.borrow_mut();
            s.peak_live_bits = s.live_bits;
            s.peak_live_count = s.live_count;
            s.peak_single_bits = 0;
            s.oracle_calls = 0;
            s.created = 0;
        });
    }

    pub fn id(&self) -> u32 {
        self.id
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        ACTIVE.with(|a| {
            if a.get() == self.id {
                a.set(0);
            }
        });
    }
}

pub fn is_active() -> bool {
    ACTIVE.with(Cell::get) != 0
}

/// Registers a new value of `bits` bits; returns the tag to store in it.
#[inline]
pub(crate) fn register(bits: u64) -> u32 {
    let id = ACTIVE.with(Cell::get);
    if id == 0 {
        return 0;
    }
    STATS.with(|s| {
        let mut s = s.borrow_mut();
        s.live_bits += bits;
        s.live_count += 1;
        s.created += 1;
        s.peak_live_bits = s.peak_live_bits.max(s.live_bits);
        s.peak_live_count = s.peak_live_count.max(s.live_count);
        s.peak_single_bits = s.peak_single_bits.max(bits);
    });
    id
}

#[inline]
pub(crate) fn release(tag: u32, bits: u64) {
    if tag == 0 || ACTIVE.with(Cell::get) != tag {
        return;
    }
    STATS.with(|s| {
        let mut s = s.borrow_mut();
        s.live_bits = s.live_bits.saturating_sub(bits);
        s.live_count = s.live_count.saturating_sub(1);
    });
}

#[inline]
pub(crate) fn count_oracle_call() {
    if ACTIVE.with(Cell::get) == 0 {
        return;
    }
    STATS.with(|s| s.borrow_mut().oracle_calls += 1);
}

/// Marks a parallel integration as running for the lifetime of the guard.
pub(crate) struct ParallelGuard(());

impl ParallelGuard {
    pub(crate) fn enter() -> Result<ParallelGuard, SinkError> {
        if is_active() {
            return Err(SinkError::ParallelModeActive);
        }
        PARALLEL_RUNS.fetch_add(1, Ordering::SeqCst);
        Ok(ParallelGuard(()))
    }
}

impl Drop for ParallelGuard {
    fn drop(&mut self) {
        PARALLEL_RUNS.fetch_sub(1, Ordering::SeqCst);
    }
}
