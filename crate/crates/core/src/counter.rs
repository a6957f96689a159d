//! Complex-multiplication counter threaded through the hot detection paths.
//!
//! Every counted site adds the exact number of complex multiplications it
//! performs; additions are free. Counters are plain integers so that merging
//! partial counts from parallel trials is exact and order-independent.

/// Running tally of complex multiplications (and diagnostics events).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub cmults: u64,
    /// Numerical resets performed (RLS divergence guard).
    pub resets: u64,
    /// LLR computations where both hypothesis sums underflowed.
    pub llr_underflows: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline(always)]
    pub fn add(&mut self, cmults: u64) {
        self.cmults += cmults;
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.cmults += other.cmults;
        self.resets += other.resets;
        self.llr_underflows += other.llr_underflows;
    }
}
