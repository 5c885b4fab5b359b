//! Jordan–Wigner action of ladder operators on occupation bitstrings.
//!
//! Mode `m` is bit `m` of the basis index. The sign string of mode `m` runs
//! over every mode with a smaller index, so with system modes stored first a
//! system operator never picks up a sign from the auxiliary modes.

/// One ladder operator in a normal-ordered word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

#[inline]
fn string_sign(state: u32, mode: usize) -> f64 {
    let below = state & ((1u32 << mode) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn annihilate(state: u32, mode: usize) -> Option<(u32, f64)> {
    let bit = 1u32 << mode;
    if state & bit == 0 {
        return None;
    }
    Some((state ^ bit, string_sign(state, mode)))
}

#[inline]
pub fn create(state: u32, mode: usize) -> Option<(u32, f64)> {
    let bit = 1u32 << mode;
    if state & bit != 0 {
        return None;
    }
    Some((state ^ bit, string_sign(state, mode)))
}

/// Applies a product of ladder operators (written left to right, acting
/// right to left) to a basis state.
pub fn apply_word(word: &[Ladder], state: u32) -> Option<(u32, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for op in word.iter().rev() {
        let (next, sg) = match *op {
            Ladder::Create(m) => create(s, m)?,
            Ladder::Annihilate(m) => annihilate(s, m)?,
        };
        s = next;
        sign *= sg;
    }
    Some((s, sign))
}

/// Change in particle number produced by a word.
pub fn charge_shift(word: &[Ladder]) -> i32 {
    word.iter()
        .map(|op| match op {
            Ladder::Create(_) => 1,
            Ladder::Annihilate(_) => -1,
        })
        .sum()
}

/// All `width`-bit states with exactly `count` bits set, ascending.
pub fn states_with_popcount(width: usize, count: usize) -> Vec<u32> {
    (0u32..(1u32 << width))
        .filter(|s| s.count_ones() as usize == count)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creation_then_annihilation_is_number() {
        // c_1 c_1^† on |01> (mode 0 occupied): sign string from mode 0 twice.
        let word = [Ladder::Annihilate(1), Ladder::Create(1)];
        assert_eq!(apply_word(&word, 0b01), Some((0b01, 1.0)));
        assert_eq!(apply_word(&word, 0b11), None);
    }

    #[test]
    fn signs_follow_lower_modes() {
        assert_eq!(annihilate(0b111, 2), Some((0b011, 1.0)));
        assert_eq!(annihilate(0b101, 2), Some((0b001, -1.0)));
        assert_eq!(create(0b001, 1), Some((0b011, -1.0)));
    }

    #[test]
    fn popcount_enumeration_counts_binomials() {
        assert_eq!(states_with_popcount(4, 2).len(), 6);
        assert_eq!(states_with_popcount(8, 4).len(), 70);
    }
}
