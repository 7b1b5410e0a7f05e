//! Rounded working-precision arithmetic with per-thread operation counters.

use std::cell::Cell;

use super::FloatSpec;
use crate::error::Error;

/// A rounded result left the finite range of the working format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overflowed;

pub trait OverflowExt<T> {
    /// Attach the operation context and loop step to an overflow.
    fn at(self, context: &'static str, step: usize) -> Result<T, Error>;
}

impl<T> OverflowExt<T> for Result<T, Overflowed> {
    fn at(self, context: &'static str, step: usize) -> Result<T, Error> {
        self.map_err(|_| Error::Overflow { context, step })
    }
}

/// Counts of rounded working-precision operations. Subtractions are counted
/// as additions.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounts {
    pub mul: u64,
    pub add: u64,
    pub div: u64,
}

impl std::ops::Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            mul: self.mul + rhs.mul,
            add: self.add + rhs.add,
            div: self.div + rhs.div,
        }
    }
}

thread_local! {
    static COUNTS: Cell<OpCounts> = Cell::new(OpCounts::default());
}

fn bump(f: impl FnOnce(&mut OpCounts)) {
    COUNTS.with(|c| {
        let mut v = c.get();
        f(&mut v);
        c.set(v);
    });
}

/// Run `f` and return the working-precision operations it performed on this
/// thread. Nested calls are accounted to the enclosing scope as well.
pub fn count_ops<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let outer = COUNTS.with(|c| c.replace(OpCounts::default()));
    let out = f();
    let inner = COUNTS.with(|c| c.get());
    COUNTS.with(|c| c.set(outer + inner));
    (out, inner)
}

impl FloatSpec {
    pub fn add(&self, a: f64, b: f64) -> Result<f64, Overflowed> {
        bump(|c| c.add += 1);
        self.round(a + b)
    }

    pub fn sub(&self, a: f64, b: f64) -> Result<f64, Overflowed> {
        bump(|c| c.add += 1);
        self.round(a - b)
    }

    pub fn mul(&self, a: f64, b: f64) -> Result<f64, Overflowed> {
        bump(|c| c.mul += 1);
        self.round(a * b)
    }

    pub fn div(&self, a: f64, b: f64) -> Result<f64, Overflowed> {
        bump(|c| c.div += 1);
        self.round(a / b)
    }
}
