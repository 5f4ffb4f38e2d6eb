//! Concrete protocols.

mod baseline;
mod full_async;
mod simple_async;
mod sync;

pub use baseline::{Baseline3State, TriState};
pub use full_async::{FullAsync, FullAsyncState};
pub use simple_async::{SimpleAsync, SimpleAsyncState};
pub use sync::{SyncProtocol, SyncState};

/// A test bit or buffered bit: `-1` for "none", otherwise 0 or 1.
pub(crate) fn tri_index(v: i8) -> u64 {
    (v + 1) as u64
}

pub(crate) fn tri_from_index(i: u64) -> i8 {
    i as i8 - 1
}

/// Decodes a mixed-radix number, least significant digit first.
pub(crate) fn split_digits<const N: usize>(mut code: u64, radices: [u64; N]) -> [u64; N] {
    let mut out = [0; N];
    for (slot, r) in out.iter_mut().zip(radices) {
        *slot = code % r;
        code /= r;
    }
    out
}

/// Encodes digits least significant first. Returns `None` if a digit is out of range.
pub(crate) fn join_digits<const N: usize>(digits: [u64; N], radices: [u64; N]) -> Option<u64> {
    let mut code = 0;
    for (d, r) in digits.iter().zip(radices).rev() {
        if *d >= r {
            return None;
        }
        code = code * r + d;
    }
    Some(code)
}
