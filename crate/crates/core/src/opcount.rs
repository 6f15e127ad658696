//! Primitive-operation counters.
//!
//! Every hash, modular exponentiation, group multiplication, block XOR and
//! share evaluation reports itself here. Counting only happens inside a
//! [`measure`] scope on the current thread; outside a scope `record` is a
//! no-op. Scopes nest, and an inner scope's counts are added to the
//! enclosing one when it closes.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

/// Primitive operation kinds tracked by the cost ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Hash,
    ModExp,
    ModMul,
    Xor,
    ShareEval,
}

/// Counts of primitive operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OpCounts {
    pub t_hf: u64,
    pub t_me: u64,
    pub t_mm: u64,
    pub t_xor: u64,
    pub t_sss: u64,
}

impl OpCounts {
    pub const ZERO: OpCounts = OpCounts { t_hf: 0, t_me: 0, t_mm: 0, t_xor: 0, t_sss: 0 };

    pub fn new(t_hf: u64, t_me: u64, t_mm: u64, t_xor: u64, t_sss: u64) -> Self {
        OpCounts { t_hf, t_me, t_mm, t_xor, t_sss }
    }

    pub fn get(&self, op: Op) -> u64 {
        match op {
            Op::Hash => self.t_hf,
            Op::ModExp => self.t_me,
            Op::ModMul => self.t_mm,
            Op::Xor => self.t_xor,
            Op::ShareEval => self.t_sss,
        }
    }

    fn bump(&mut self, op: Op) {
        match op {
            Op::Hash => self.t_hf += 1,
            Op::ModExp => self.t_me += 1,
            Op::ModMul => self.t_mm += 1,
            Op::Xor => self.t_xor += 1,
            Op::ShareEval => self.t_sss += 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }
}

impl Add for OpCounts {
    type Output = OpCounts;
    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts {
            t_hf: self.t_hf + o.t_hf,
            t_me: self.t_me + o.t_me,
            t_mm: self.t_mm + o.t_mm,
            t_xor: self.t_xor + o.t_xor,
            t_sss: self.t_sss + o.t_sss,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        *self = *self + o;
    }
}

impl Mul<u64> for OpCounts {
    type Output = OpCounts;
    fn mul(self, k: u64) -> OpCounts {
        OpCounts {
            t_hf: self.t_hf * k,
            t_me: self.t_me * k,
            t_mm: self.t_mm * k,
            t_xor: self.t_xor * k,
            t_sss: self.t_sss * k,
        }
    }
}

impl fmt::Display for OpCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} T_HF + {} T_ME + {} T_MM + {} T_XOR + {} T_SSS",
            self.t_hf, self.t_me, self.t_mm, self.t_xor, self.t_sss
        )
    }
}

thread_local! {
    static SCOPE: RefCell<Option<OpCounts>> = const { RefCell::new(None) };
}

/// Records one primitive invocation in the active scope, if any.
pub fn record(op: Op) {
    SCOPE.with(|s| {
        if let Some(c) = s.borrow_mut().as_mut() {
            c.bump(op);
        }
    });
}

/// Runs `f` and returns its result with the primitives it invoked.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let outer = SCOPE.with(|s| s.borrow_mut().replace(OpCounts::ZERO));
    let guard = Restore { outer: Some(outer) };
    let out = f();
    let inner = SCOPE.with(|s| s.borrow_mut().take()).unwrap_or_default();
    let mut outer = guard.take();
    if let Some(o) = outer.as_mut() {
        *o += inner;
    }
    SCOPE.with(|s| *s.borrow_mut() = outer);
    (out, inner)
}

/// Runs `f` with counting suspended. Used for validation work (subgroup
/// membership, issuance self-checks) that is not part of the protocol cost.
pub fn uncounted<R>(f: impl FnOnce() -> R) -> R {
    let outer = SCOPE.with(|s| s.borrow_mut().take());
    let guard = Restore { outer: Some(outer) };
    let out = f();
    let outer = guard.take();
    SCOPE.with(|s| *s.borrow_mut() = outer);
    out
}

/// Puts the enclosing scope back if `f` unwinds.
struct Restore {
    outer: Option<Option<OpCounts>>,
}

impl Restore {
    fn take(mut self) -> Option<OpCounts> {
        self.outer.take().flatten()
    }
}

impl Drop for Restore {
    fn drop(&mut self) {
        if let Some(outer) = self.outer.take() {
            SCOPE.with(|s| *s.borrow_mut() = outer);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scope_is_zero() {
        let ((), c) = measure(|| ());
        assert!(c.is_zero());
    }

    #[test]
    fn record_outside_scope_is_ignored() {
        record(Op::Hash);
        let ((), c) = measure(|| record(Op::Xor));
        assert_eq!(c, OpCounts::new(0, 0, 0, 1, 0));
    }

    #[test]
    fn nested_scopes_propagate() {
        let (inner, outer) = measure(|| {
            record(Op::Hash);
            let ((), inner) = measure(|| {
                record(Op::ModExp);
                record(Op::ModExp);
            });
            uncounted(|| record(Op::Xor));
            inner
        });
        assert_eq!(inner, OpCounts::new(0, 2, 0, 0, 0));
        assert_eq!(outer, OpCounts::new(1, 2, 0, 0, 0));
    }

    #[test]
    fn scope_restored_after_panic() {
        let ((), c) = measure(|| {
            let r = std::panic::catch_unwind(|| {
                measure(|| {
                    record(Op::Hash);
                    panic!("boom");
                })
            });
            assert!(r.is_err());
            record(Op::ModMul);
        });
        assert_eq!(c.t_mm, 1);
    }
}
