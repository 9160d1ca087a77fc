//! Covering an arbitrary step range by aligned power-of-two intervals.

use crate::LinfError;

/// Splits `[a, b] ⊆ [1, k]` into disjoint aligned intervals of the form
/// `[i·2ʲ + 1, (i+1)·2ʲ]`, returned left to right as inclusive `(start, end)`
/// pairs.
///
/// Greedy from the left, always taking the largest aligned interval that
/// still fits inside the range: interval lengths grow to a peak and then
/// shrink, so the cover never uses more than `2⌈log₂ k⌉` pieces (one per
/// length on each side of the peak).
pub fn dyadic_cover(a: usize, b: usize, k: usize) -> Result<Vec<(usize, usize)>, LinfError> {
    if a == 0 || a > b || b > k {
        return Err(LinfError::BadRange { a, b, k });
    }
    let mut cover = Vec::new();
    let mut start = a;
    while start <= b {
        // Largest j with 2ʲ dividing (start − 1) and start + 2ʲ − 1 ≤ b.
        let align = if start == 1 {
            usize::BITS - 1
        } else {
            (start - 1).trailing_zeros()
        };
        let room = b - start + 1;
        let fit = usize::BITS - 1 - room.leading_zeros();
        let len = 1usize << align.min(fit);
        cover.push((start, start + len - 1));
        start += len;
    }
    Ok(cover)
}
