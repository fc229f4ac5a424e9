//! Per-thread operation counters.
//!
//! Cost claims (basis work in Gram products, path evaluation in axpy steps)
//! are checked by counting operations rather than timing them.

use std::cell::Cell;

thread_local! {
    static GRAM_APPLIES: Cell<u64> = const { Cell::new(0) };
    static PRECOND_APPLIES: Cell<u64> = const { Cell::new(0) };
    static COMPOSE_AXPYS: Cell<u64> = const { Cell::new(0) };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub gram_applies: u64,
    pub precond_applies: u64,
    pub compose_axpys: u64,
}

pub fn reset() {
    GRAM_APPLIES.with(|c| c.set(0));
    PRECOND_APPLIES.with(|c| c.set(0));
    COMPOSE_AXPYS.with(|c| c.set(0));
}

pub fn snapshot() -> OpCounts {
    OpCounts {
        gram_applies: GRAM_APPLIES.with(Cell::get),
        precond_applies: PRECOND_APPLIES.with(Cell::get),
        compose_axpys: COMPOSE_AXPYS.with(Cell::get),
    }
}

pub(crate) fn count_gram(n: u64) {
    GRAM_APPLIES.with(|c| c.set(c.get() + n));
}

pub(crate) fn count_precond(n: u64) {
    PRECOND_APPLIES.with(|c| c.set(c.get() + n));
}

pub(crate) fn count_axpy(n: u64) {
    COMPOSE_AXPYS.with(|c| c.set(c.get() + n));
}
