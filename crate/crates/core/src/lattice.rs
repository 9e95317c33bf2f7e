//! Chess-board partition of the image and the scrambled subset plan.
//!
//! Interior pixels (everything except the first and last two rows and
//! columns) split by coordinate parity into white targets, black targets
//! and black references. Only targets ever carry data; references and the
//! border are never modified, which is what makes prediction-based
//! recovery possible.

use alloc::vec::Vec;
use core::fmt;

use crate::crypto::ScrambleRng;
use crate::image::Dims;

/// Largest allowed integration group size; keeps integrated values in
/// comfortable machine-word range.
pub const MAX_GROUP: u32 = 16;

const TAG_WHITE: &str = "scramble/W";
const TAG_BLACK: &str = "scramble/B";

/// Classification of a single pixel position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    WhiteTarget,
    BlackTarget,
    BlackReference,
    Border,
}

/// The two data-carrying pixel classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum TargetClass {
    White,
    Black,
}

/// Role of pixel `(r, c)`: border outside the interior window, otherwise
/// white target when `r + c` is odd, black reference when both coordinates
/// are even, black target when both are odd.
///
/// Panics if `(r, c)` lies outside the image.
pub fn role_of(r: u32, c: u32, dims: Dims) -> Role {
    assert!(r < dims.rows && c < dims.cols, "pixel index out of bounds");
    if r < 2 || r > dims.rows - 3 || c < 2 || c > dims.cols - 3 {
        return Role::Border;
    }
    if (r + c) % 2 == 1 {
        Role::WhiteTarget
    } else if r % 2 == 0 {
        Role::BlackReference
    } else {
        Role::BlackTarget
    }
}

fn interior_parity_counts(n: u32) -> (u64, u64) {
    // even/odd coordinate counts within 2..=n-3
    debug_assert!(n >= 5);
    let top = (n - 3) as u64;
    let even = top / 2;
    let odd = (top + 1) / 2 - 1;
    (even, odd)
}

/// Number of interior white-target pixels, computed arithmetically.
pub fn white_target_count(dims: Dims) -> u64 {
    if dims.rows < 5 || dims.cols < 5 {
        return 0;
    }
    let (er, or) = interior_parity_counts(dims.rows);
    let (ec, oc) = interior_parity_counts(dims.cols);
    er * oc + or * ec
}

/// Number of interior black-target pixels.
pub fn black_target_count(dims: Dims) -> u64 {
    if dims.rows < 5 || dims.cols < 5 {
        return 0;
    }
    let (_, or) = interior_parity_counts(dims.rows);
    let (_, oc) = interior_parity_counts(dims.cols);
    or * oc
}

/// Number of interior black-reference pixels (roughly a quarter of the image).
pub fn black_reference_count(dims: Dims) -> u64 {
    if dims.rows < 5 || dims.cols < 5 {
        return 0;
    }
    let (er, _) = interior_parity_counts(dims.rows);
    let (ec, _) = interior_parity_counts(dims.cols);
    er * ec
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    /// Both dimensions must be at least 5 to have any interior.
    DimensionsTooSmall(Dims),
    /// Group sizes are limited to `1..=MAX_GROUP`.
    GroupSizeOutOfRange(u32),
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::DimensionsTooSmall(d) => {
                write!(f, "image {d} too small: need at least 5x5")
            }
            LatticeError::GroupSizeOutOfRange(n) => {
                write!(f, "group size {n} outside 1..={MAX_GROUP}")
            }
        }
    }
}

impl core::error::Error for LatticeError {}

/// Deterministic embedding plan: scrambled orderings of both target classes
/// plus their integration group sizes.
///
/// Derived entirely from public inputs (dimensions, group sizes, scramble
/// seed), so the data hider and the recipient reconstruct identical plans
/// without sharing anything secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePlan {
    dims: Dims,
    n_white: u32,
    n_black: u32,
    white_order: Vec<u32>,
    black_order: Vec<u32>,
}

impl LatticePlan {
    /// Builds the plan: raster-order enumeration of each target class,
    /// then a seed-keyed Fisher-Yates shuffle.
    ///
    /// The shuffle for each class is driven by [`ScrambleRng`] seeded with
    /// `seed || rows_be32 || cols_be32 || tag`, tag `"scramble/W"` or
    /// `"scramble/B"`.
    pub fn build(dims: Dims, n_white: u32, n_black: u32, seed: &[u8]) -> Result<Self, LatticeError> {
        if dims.rows < 5 || dims.cols < 5 {
            return Err(LatticeError::DimensionsTooSmall(dims));
        }
        for n in [n_white, n_black] {
            if n < 1 || n > MAX_GROUP {
                return Err(LatticeError::GroupSizeOutOfRange(n));
            }
        }

        let mut white_order = Vec::with_capacity(white_target_count(dims) as usize);
        let mut black_order = Vec::with_capacity(black_target_count(dims) as usize);
        for r in 2..=dims.rows - 3 {
            for c in 2..=dims.cols - 3 {
                let idx = r * dims.cols + c;
                if (r + c) % 2 == 1 {
                    white_order.push(idx);
                } else if r % 2 == 1 {
                    black_order.push(idx);
                }
            }
        }

        shuffle(&mut white_order, class_rng(seed, dims, TAG_WHITE));
        shuffle(&mut black_order, class_rng(seed, dims, TAG_BLACK));

        Ok(LatticePlan { dims, n_white, n_black, white_order, black_order })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Integration group size for a class.
    pub fn group_size(&self, class: TargetClass) -> u32 {
        match class {
            TargetClass::White => self.n_white,
            TargetClass::Black => self.n_black,
        }
    }

    /// Scrambled linear pixel indices of a class, full coverage.
    pub fn order(&self, class: TargetClass) -> &[u32] {
        match class {
            TargetClass::White => &self.white_order,
            TargetClass::Black => &self.black_order,
        }
    }

    /// Number of complete groups for a class.
    pub fn group_count(&self, class: TargetClass) -> u64 {
        (self.order(class).len() / self.group_size(class) as usize) as u64
    }

    /// Complete groups of exactly `N` indices each, in scrambled order.
    pub fn subsets(&self, class: TargetClass) -> impl Iterator<Item = &[u32]> {
        self.order(class).chunks_exact(self.group_size(class) as usize)
    }

    /// Trailing indices that do not fill a group; they carry no data and
    /// are never modified.
    pub fn leftover(&self, class: TargetClass) -> &[u32] {
        let n = self.group_size(class) as usize;
        let len = self.order(class).len();
        &self.order(class)[len - len % n..]
    }

    /// Total embedding capacity in bits: one bit per complete group.
    pub fn capacity(&self) -> u64 {
        self.group_count(TargetClass::White) + self.group_count(TargetClass::Black)
    }
}

fn class_rng(seed: &[u8], dims: Dims, tag: &str) -> ScrambleRng {
    ScrambleRng::from_parts(&[
        seed,
        &dims.rows.to_be_bytes(),
        &dims.cols.to_be_bytes(),
        tag.as_bytes(),
    ])
}

fn shuffle(indices: &mut [u32], mut rng: ScrambleRng) {
    for i in (1..indices.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        indices.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const D512: Dims = Dims { rows: 512, cols: 512 };

    #[test]
    fn border_and_parity_roles() {
        assert_eq!(role_of(0, 5, D512), Role::Border);
        assert_eq!(role_of(510, 100, D512), Role::Border);
        assert_eq!(role_of(100, 510, D512), Role::Border);
        // row 509 is the last interior row, not border
        assert_eq!(role_of(509, 100, D512), Role::WhiteTarget);
        assert_eq!(role_of(509, 509, D512), Role::BlackTarget);
        assert_eq!(role_of(3, 3, D512), Role::BlackTarget);
        assert_eq!(role_of(2, 2, D512), Role::BlackReference);
        assert_eq!(role_of(2, 3, D512), Role::WhiteTarget);
    }

    #[test]
    fn role_counts_512() {
        let mut white = 0u64;
        let mut btp = 0u64;
        let mut brp = 0u64;
        for r in 0..512 {
            for c in 0..512 {
                match role_of(r, c, D512) {
                    Role::WhiteTarget => white += 1,
                    Role::BlackTarget => btp += 1,
                    Role::BlackReference => brp += 1,
                    Role::Border => {}
                }
            }
        }
        assert_eq!(white, 129_032);
        assert_eq!(btp, 64_516);
        assert_eq!(brp, 64_516);
        assert_eq!(white_target_count(D512), white);
        assert_eq!(black_target_count(D512), btp);
        assert_eq!(black_reference_count(D512), brp);
    }

    #[test]
    fn arithmetic_counts_match_enumeration() {
        for (rows, cols) in [(5, 5), (5, 18), (6, 6), (7, 9), (8, 8), (16, 13), (64, 64)] {
            let dims = Dims::new(rows, cols);
            let mut white = 0;
            let mut btp = 0;
            let mut brp = 0;
            for r in 0..rows {
                for c in 0..cols {
                    match role_of(r, c, dims) {
                        Role::WhiteTarget => white += 1,
                        Role::BlackTarget => btp += 1,
                        Role::BlackReference => brp += 1,
                        Role::Border => {}
                    }
                }
            }
            assert_eq!(white_target_count(dims), white, "{dims}");
            assert_eq!(black_target_count(dims), btp, "{dims}");
            assert_eq!(black_reference_count(dims), brp, "{dims}");
        }
    }

    #[test]
    fn degenerate_5x5_has_no_targets() {
        let dims = Dims::new(5, 5);
        assert_eq!(role_of(2, 2, dims), Role::BlackReference);
        let plan = LatticePlan::build(dims, 1, 1, b"s").unwrap();
        assert_eq!(plan.capacity(), 0);
        assert_eq!(plan.group_count(TargetClass::White), 0);
        assert_eq!(plan.group_count(TargetClass::Black), 0);
    }

    #[test]
    fn plan_is_deterministic() {
        let a = LatticePlan::build(Dims::new(40, 30), 2, 3, b"seed").unwrap();
        let b = LatticePlan::build(Dims::new(40, 30), 2, 3, b"seed").unwrap();
        assert_eq!(a, b);
        let c = LatticePlan::build(Dims::new(40, 30), 2, 3, b"other").unwrap();
        assert_ne!(a.order(TargetClass::White), c.order(TargetClass::White));
    }

    #[test]
    fn scramble_is_a_bijection() {
        let dims = Dims::new(24, 17);
        let plan = LatticePlan::build(dims, 1, 1, b"seed").unwrap();
        for class in [TargetClass::White, TargetClass::Black] {
            let mut sorted = plan.order(class).to_vec();
            sorted.sort_unstable();
            let raster: Vec<u32> = (2..=dims.rows - 3)
                .flat_map(|r| (2..=dims.cols - 3).map(move |c| (r, c)))
                .filter(|&(r, c)| match class {
                    TargetClass::White => (r + c) % 2 == 1,
                    TargetClass::Black => r % 2 == 1 && c % 2 == 1,
                })
                .map(|(r, c)| r * dims.cols + c)
                .collect();
            assert_eq!(sorted, raster);
        }
    }

    #[test]
    fn seven_targets_in_groups_of_three() {
        // 5x18 has exactly 7 white targets and no black ones.
        let plan = LatticePlan::build(Dims::new(5, 18), 3, 1, b"s").unwrap();
        assert_eq!(plan.order(TargetClass::White).len(), 7);
        assert_eq!(plan.subsets(TargetClass::White).count(), 2);
        assert_eq!(plan.leftover(TargetClass::White).len(), 1);
        assert_eq!(plan.capacity(), 2);
    }

    #[test]
    fn unit_groups_cover_every_target() {
        let plan = LatticePlan::build(Dims::new(12, 12), 1, 1, b"s").unwrap();
        assert_eq!(
            plan.subsets(TargetClass::White).count(),
            plan.order(TargetClass::White).len()
        );
        assert!(plan.leftover(TargetClass::White).is_empty());
    }

    #[test]
    fn group_counts_512() {
        let plan = LatticePlan::build(D512, 1, 2, b"s").unwrap();
        assert_eq!(plan.group_count(TargetClass::White), 129_032);
        assert_eq!(plan.group_count(TargetClass::Black), 32_258);
        assert_eq!(plan.capacity(), 161_290);

        let plan = LatticePlan::build(D512, 1, 5, b"s").unwrap();
        assert_eq!(plan.group_count(TargetClass::Black), 12_903);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            LatticePlan::build(Dims::new(4, 100), 1, 1, b"s"),
            Err(LatticeError::DimensionsTooSmall(_))
        ));
        assert!(matches!(
            LatticePlan::build(Dims::new(10, 10), 0, 1, b"s"),
            Err(LatticeError::GroupSizeOutOfRange(0))
        ));
        assert!(matches!(
            LatticePlan::build(Dims::new(10, 10), 1, 17, b"s"),
            Err(LatticeError::GroupSizeOutOfRange(17))
        ));
    }

    proptest! {
        #[test]
        fn shuffle_preserves_membership(
            rows in 5u32..32,
            cols in 5u32..32,
            seed in any::<u64>(),
        ) {
            let dims = Dims::new(rows, cols);
            let plan = LatticePlan::build(dims, 1, 1, &seed.to_be_bytes()).unwrap();
            let mut white = plan.order(TargetClass::White).to_vec();
            white.sort_unstable();
            white.dedup();
            prop_assert_eq!(white.len() as u64, white_target_count(dims));
            let mut black = plan.order(TargetClass::Black).to_vec();
            black.sort_unstable();
            black.dedup();
            prop_assert_eq!(black.len() as u64, black_target_count(dims));
        }
    }
}
