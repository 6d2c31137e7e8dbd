//! A simulated communicator that runs per-rank work in lockstep phases.
//!
//! Each call to [`SimComm::phase`] is one bulk-synchronous step: every rank
//! runs the closure once and the results come back in rank order. Nothing
//! crosses between ranks except through those collected results, so the
//! outcome does not depend on how ranks are scheduled.

use std::sync::atomic::{AtomicUsize, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Sequential,
    Threaded,
}

#[derive(Debug)]
pub struct SimComm {
    size: usize,
    schedule: Schedule,
    phases: AtomicUsize,
}

impl SimComm {
    pub fn new(size: usize, schedule: Schedule) -> Self {
        assert!(size >= 1, "a communicator needs at least one rank");
        Self {
            size,
            schedule,
            phases: AtomicUsize::new(0),
        }
    }

    pub fn sequential(size: usize) -> Self {
        Self::new(size, Schedule::Sequential)
    }

    pub fn threaded(size: usize) -> Self {
        Self::new(size, Schedule::Threaded)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    /// Number of collective phases executed so far.
    pub fn phases(&self) -> usize {
        self.phases.load(Ordering::Relaxed)
    }

    /// Runs `f(rank)` on every rank and returns the results in rank order.
    pub fn phase<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        self.phases.fetch_add(1, Ordering::Relaxed);
        match self.schedule {
            Schedule::Sequential => (0..self.size).map(&f).collect(),
            Schedule::Threaded => std::thread::scope(|s| {
                let handles: Vec<_> = (0..self.size)
                    .map(|r| {
                        let f = &f;
                        s.spawn(move || f(r))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("rank panicked")).collect()
            }),
        }
    }

    /// Like [`phase`](Self::phase) for fallible work; the first error in rank
    /// order wins.
    pub fn try_phase<T, E, F>(&self, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync,
    {
        self.phase(f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_rank_order() {
        for comm in [SimComm::sequential(5), SimComm::threaded(5)] {
            assert_eq!(comm.phase(|r| r * r), vec![0, 1, 4, 9, 16]);
            assert_eq!(comm.phases(), 1);
        }
    }

    #[test]
    fn first_error_wins() {
        let comm = SimComm::threaded(4);
        let out: Result<Vec<usize>, usize> = comm.try_phase(|r| if r >= 2 { Err(r) } else { Ok(r) });
        assert_eq!(out, Err(2));
    }
}
