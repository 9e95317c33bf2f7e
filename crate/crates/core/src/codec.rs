//! MSB integration codec: the embedding-side pipeline and its inverse.
//!
//! Each subset of N target pixels contributes its N most significant bits
//! as a feature vector. The vector is packed big-endian into an integer,
//! shrunk into the lower half-range by 1's complement, and the payload bit
//! selects between the shrunken value and its complement. The marked value
//! is unpacked back into the pixels' MSBs. Consequently a marked vector is
//! always the original vector or its bitwise complement, and the payload
//! bit is simply the marked value's top bit.

use alloc::vec::Vec;
use core::fmt;

use crate::crypto::{xor_payload, DataKey};
use crate::image::{Dims, GrayImage};
use crate::lattice::{black_target_count, white_target_count, LatticeError, LatticePlan, TargetClass, MAX_GROUP};

/// Packs 0/1 bits big-endian: `bits[0]` carries weight `2^(len-1)`.
pub fn integrate(bits: &[u8]) -> u32 {
    debug_assert!(!bits.is_empty() && bits.len() <= MAX_GROUP as usize);
    bits.iter().fold(0, |acc, &b| {
        debug_assert!(b <= 1);
        acc << 1 | b as u32
    })
}

/// Maps `v` into `[0, 2^(n-1))`: identity on the lower half, 1's
/// complement on the upper half.
pub fn shrink(v: u32, n: u32) -> u32 {
    debug_assert!(v < 1 << n);
    if v < 1 << (n - 1) {
        v
    } else {
        mask(n) - v
    }
}

/// Embeds one payload bit into a shrunken value: keep for 0, complement
/// for 1. The result's top bit is exactly `d`.
pub fn embed_bit(sv: u32, d: u8, n: u32) -> u32 {
    debug_assert!(sv < 1 << (n - 1), "value must be shrunken first");
    debug_assert!(d <= 1);
    if d == 0 {
        sv
    } else {
        mask(n) - sv
    }
}

/// Reads the payload bit back out of a marked value.
pub fn extract_bit(v: u32, n: u32) -> u8 {
    debug_assert!(v < 1 << n);
    (v >> (n - 1)) as u8
}

/// Unpacks `v` big-endian into `n` bits; inverse of [`integrate`].
pub fn disintegrate(v: u32, n: u32) -> impl Iterator<Item = u8> {
    debug_assert!(v < 1 << n);
    (0..n).rev().map(move |k| (v >> k & 1) as u8)
}

fn mask(n: u32) -> u32 {
    (1 << n) - 1
}

/// Embedding capacity in bits for the given dimensions and group sizes:
/// one bit per complete group of either class.
pub fn capacity(dims: Dims, n_white: u32, n_black: u32) -> Result<u64, LatticeError> {
    if dims.rows < 5 || dims.cols < 5 {
        return Err(LatticeError::DimensionsTooSmall(dims));
    }
    for n in [n_white, n_black] {
        if n < 1 || n > MAX_GROUP {
            return Err(LatticeError::GroupSizeOutOfRange(n));
        }
    }
    Ok(white_target_count(dims) / n_white as u64 + black_target_count(dims) / n_black as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedError {
    /// Payload bit count exceeds the plan's capacity.
    PayloadTooLong { payload: u64, capacity: u64 },
    /// Image dimensions disagree with the plan.
    DimensionMismatch { plan: Dims, image: Dims },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::PayloadTooLong { payload, capacity } => {
                write!(f, "payload of {payload} bits exceeds capacity of {capacity} bits")
            }
            EmbedError::DimensionMismatch { plan, image } => {
                write!(f, "plan built for {plan} but image is {image}")
            }
        }
    }
}

impl core::error::Error for EmbedError {}

/// Embeds a payload into an encrypted image. The payload is first
/// XOR-encrypted under the data key, then zero-padded to full capacity so
/// every complete group is processed; the first white-capacity bits go to
/// white groups, the rest to black groups, both in plan order. Only the
/// MSBs of grouped target pixels change.
///
/// This runs without any knowledge of the image content or the image key.
pub fn embed(
    encrypted: &GrayImage,
    payload: &[u8],
    key: &DataKey,
    plan: &LatticePlan,
) -> Result<GrayImage, EmbedError> {
    if encrypted.dims() != plan.dims() {
        return Err(EmbedError::DimensionMismatch { plan: plan.dims(), image: encrypted.dims() });
    }
    let cap = plan.capacity();
    if payload.len() as u64 > cap {
        return Err(EmbedError::PayloadTooLong { payload: payload.len() as u64, capacity: cap });
    }

    let mut bits = xor_payload(payload, key);
    bits.resize(cap as usize, 0);

    let mut out = encrypted.clone();
    let mut cursor = 0usize;
    for class in [TargetClass::White, TargetClass::Black] {
        let n = plan.group_size(class);
        let mut features = [0u8; MAX_GROUP as usize];
        for group in plan.subsets(class) {
            let pixels = out.pixels_mut();
            for (slot, &idx) in features.iter_mut().zip(group) {
                *slot = pixels[idx as usize] >> 7;
            }
            let marked = embed_bit(shrink(integrate(&features[..n as usize]), n), bits[cursor], n);
            cursor += 1;
            for (&idx, bit) in group.iter().zip(disintegrate(marked, n)) {
                let p = &mut pixels[idx as usize];
                *p = *p & 0x7f | bit << 7;
            }
        }
    }
    debug_assert_eq!(cursor as u64, cap);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractError {
    /// More bits requested than the plan can carry.
    LengthExceedsCapacity { requested: u64, capacity: u64 },
    /// Image dimensions disagree with the plan.
    DimensionMismatch { plan: Dims, image: Dims },
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::LengthExceedsCapacity { requested, capacity } => {
                write!(f, "requested {requested} bits but capacity is {capacity} bits")
            }
            ExtractError::DimensionMismatch { plan, image } => {
                write!(f, "plan built for {plan} but image is {image}")
            }
        }
    }
}

impl core::error::Error for ExtractError {}

/// Extracts `payload_len` payload bits from a marked image using only the
/// data key: integrates each group's MSBs, takes the top bit, truncates to
/// the requested length and XOR-decrypts. The image key plays no part.
pub fn extract(
    marked: &GrayImage,
    key: &DataKey,
    plan: &LatticePlan,
    payload_len: usize,
) -> Result<Vec<u8>, ExtractError> {
    if marked.dims() != plan.dims() {
        return Err(ExtractError::DimensionMismatch { plan: plan.dims(), image: marked.dims() });
    }
    let cap = plan.capacity();
    if payload_len as u64 > cap {
        return Err(ExtractError::LengthExceedsCapacity {
            requested: payload_len as u64,
            capacity: cap,
        });
    }

    let mut bits = Vec::with_capacity(payload_len);
    let mut features = [0u8; MAX_GROUP as usize];
    'outer: for class in [TargetClass::White, TargetClass::Black] {
        let n = plan.group_size(class);
        for group in plan.subsets(class) {
            if bits.len() == payload_len {
                break 'outer;
            }
            for (slot, &idx) in features.iter_mut().zip(group) {
                *slot = marked.pixels()[idx as usize] >> 7;
            }
            bits.push(extract_bit(integrate(&features[..n as usize]), n));
        }
    }
    bits.truncate(payload_len);
    Ok(xor_payload(&bits, key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::ScrambleRng;
    use crate::image::Dims;
    use crate::lattice::{role_of, Role};
    use alloc::vec;
    use proptest::prelude::*;

    // worked N=3 example: feature vectors, their integrations, shrunken
    // forms, payload bits and marked integrations
    const EX_INTEGRATED: [u32; 9] = [3, 0, 4, 7, 2, 2, 6, 1, 5];
    const EX_SHRUNK: [u32; 9] = [3, 0, 3, 0, 2, 2, 1, 1, 2];
    const EX_DATA: [u8; 9] = [1, 1, 0, 1, 0, 0, 1, 0, 1];
    const EX_MARKED: [u32; 9] = [4, 7, 3, 7, 2, 2, 6, 1, 5];

    fn bits_of(v: u32, n: u32) -> Vec<u8> {
        disintegrate(v, n).collect()
    }

    #[test]
    fn integrate_is_big_endian() {
        assert_eq!(integrate(&[0, 1, 1]), 3);
        assert_eq!(integrate(&[1, 0, 0]), 4);
        assert_eq!(integrate(&[1, 1, 1]), 7);
        assert_eq!(integrate(&[0, 0, 0]), 0);
        assert_eq!(integrate(&[1]), 1);
    }

    #[test]
    fn worked_example_pipeline() {
        for i in 0..9 {
            let v = EX_INTEGRATED[i];
            assert_eq!(integrate(&bits_of(v, 3)), v);
            let sv = shrink(v, 3);
            assert_eq!(sv, EX_SHRUNK[i]);
            let marked = embed_bit(sv, EX_DATA[i], 3);
            assert_eq!(marked, EX_MARKED[i]);
            assert_eq!(extract_bit(marked, 3), EX_DATA[i]);
        }
        assert_eq!(bits_of(4, 3), vec![1, 0, 0]);
        assert_eq!(bits_of(7, 3), vec![1, 1, 1]);
    }

    #[test]
    fn shrink_boundaries() {
        assert_eq!(shrink(0, 1), 0);
        assert_eq!(shrink(1, 1), 0);
        assert_eq!(shrink(6, 3), 1);
        assert_eq!(shrink(5, 3), 2);
    }

    #[test]
    fn extract_bit_boundaries() {
        for n in 1..=16 {
            assert_eq!(extract_bit(1 << (n - 1), n), 1);
            assert_eq!(extract_bit((1 << (n - 1)) - 1, n), 0);
        }
    }

    #[test]
    fn exhaustive_small_n() {
        for n in 1..=8u32 {
            let full = 1u32 << n;
            let half = full >> 1;
            for v in 0..full {
                assert_eq!(integrate(&bits_of(v, n)), v, "round trip n={n} v={v}");
                let sv = shrink(v, n);
                assert!(sv < half);
                assert_eq!(sv, shrink(full - 1 - v, n), "complement symmetry");
                for d in 0..=1u8 {
                    let marked = embed_bit(sv, d, n);
                    assert_eq!(extract_bit(marked, n), d);
                    assert!(
                        marked == v || marked == full - 1 - v,
                        "dichotomy broken: n={n} v={v} d={d} marked={marked}"
                    );
                }
            }
        }
    }

    #[test]
    fn capacity_table() {
        let d = Dims::new(512, 512);
        assert_eq!(capacity(d, 1, 1).unwrap(), 193_548);
        assert_eq!(capacity(d, 1, 2).unwrap(), 161_290);
        assert_eq!(capacity(d, 2, 2).unwrap(), 96_774);
        assert_eq!(capacity(d, 2, 3).unwrap(), 86_021);
        assert_eq!(capacity(d, 2, 4).unwrap(), 80_645);
        assert_eq!(capacity(d, 3, 5).unwrap(), 55_913);
        assert_eq!(capacity(Dims::new(5, 5), 1, 1).unwrap(), 0);
        assert!(capacity(Dims::new(4, 512), 1, 1).is_err());
        assert!(capacity(d, 0, 1).is_err());
        assert!(capacity(d, 1, 17).is_err());
    }

    #[test]
    fn capacity_matches_plan() {
        for (rows, cols, nw, nb) in [(16, 16, 1, 2), (32, 20, 3, 5), (7, 45, 2, 2)] {
            let dims = Dims::new(rows, cols);
            let plan = LatticePlan::build(dims, nw, nb, b"s").unwrap();
            assert_eq!(capacity(dims, nw, nb).unwrap(), plan.capacity());
        }
    }

    fn noise_image(dims: Dims, seed: &[u8]) -> GrayImage {
        let mut rng = ScrambleRng::new(seed);
        GrayImage::from_fn(dims, |_, _| rng.next_below(256) as u8)
    }

    #[test]
    fn embed_writes_the_worked_example() {
        // pick the payload so its encryption under the key is exactly the
        // worked example's bit sequence, then check the marked MSBs of the
        // first nine white groups against the derived integrations
        let key = DataKey::from_hex("00112233445566778899aabbccddeeff").unwrap();
        let plan = LatticePlan::build(Dims::new(16, 16), 3, 3, b"golden").unwrap();
        let mut img = GrayImage::constant(Dims::new(16, 16), 0);
        {
            let pixels = img.pixels_mut();
            for (group, &v) in plan.subsets(TargetClass::White).zip(EX_INTEGRATED.iter()) {
                for (&idx, bit) in group.iter().zip(disintegrate(v, 3)) {
                    pixels[idx as usize] |= bit << 7;
                }
            }
        }
        let payload = xor_payload(&EX_DATA, &key); // cancels the cipher inside embed
        let marked = embed(&img, &payload, &key, &plan).unwrap();
        for (i, group) in plan.subsets(TargetClass::White).take(9).enumerate() {
            let msbs: Vec<u8> = group.iter().map(|&idx| marked.pixels()[idx as usize] >> 7).collect();
            assert_eq!(integrate(&msbs), EX_MARKED[i], "group {i}");
        }
    }

    #[test]
    fn empty_payload_still_normalizes_groups() {
        // all-pad bits are zero, so each marked group integrates to the
        // shrunken value: changed iff the group's top bit was set
        let key = DataKey::from_bytes([7; 16]);
        let plan = LatticePlan::build(Dims::new(12, 12), 2, 2, b"s").unwrap();
        let img = noise_image(Dims::new(12, 12), b"pad");
        let marked = embed(&img, &[], &key, &plan).unwrap();
        for class in [TargetClass::White, TargetClass::Black] {
            for group in plan.subsets(class) {
                let before: Vec<u8> = group.iter().map(|&i| img.pixels()[i as usize] >> 7).collect();
                let after: Vec<u8> = group.iter().map(|&i| marked.pixels()[i as usize] >> 7).collect();
                assert_eq!(integrate(&after), shrink(integrate(&before), 2));
            }
        }
    }

    #[test]
    fn embedding_touches_only_grouped_msbs() {
        let dims = Dims::new(21, 17);
        let img = noise_image(dims, b"touch");
        let key = DataKey::from_bytes([1; 16]);
        let plan = LatticePlan::build(dims, 3, 2, b"s").unwrap();
        let payload: Vec<u8> = (0..plan.capacity()).map(|i| (i % 2) as u8).collect();
        let marked = embed(&img, &payload, &key, &plan).unwrap();

        let mut grouped = vec![false; dims.pixels() as usize];
        for class in [TargetClass::White, TargetClass::Black] {
            for group in plan.subsets(class) {
                for &idx in group {
                    grouped[idx as usize] = true;
                }
            }
        }
        for r in 0..dims.rows {
            for c in 0..dims.cols {
                let idx = (r * dims.cols + c) as usize;
                let (a, b) = (img.pixels()[idx], marked.pixels()[idx]);
                assert_eq!(a & 0x7f, b & 0x7f, "low bits at ({r},{c})");
                if !grouped[idx] {
                    assert_eq!(a, b, "ungrouped pixel at ({r},{c})");
                    continue;
                }
                // grouped pixels are always interior targets
                assert!(matches!(role_of(r, c, dims), Role::WhiteTarget | Role::BlackTarget));
            }
        }
    }

    #[test]
    fn rejects_oversized_and_mismatched() {
        let plan = LatticePlan::build(Dims::new(5, 5), 1, 1, b"s").unwrap();
        let img = GrayImage::constant(Dims::new(5, 5), 0);
        let key = DataKey::from_bytes([0; 16]);
        assert!(embed(&img, &[], &key, &plan).is_ok());
        assert_eq!(
            embed(&img, &[1], &key, &plan),
            Err(EmbedError::PayloadTooLong { payload: 1, capacity: 0 })
        );
        let other = GrayImage::constant(Dims::new(6, 5), 0);
        assert!(matches!(
            embed(&other, &[], &key, &plan),
            Err(EmbedError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            extract(&img, &key, &plan, 1),
            Err(ExtractError::LengthExceedsCapacity { requested: 1, capacity: 0 })
        ));
        assert!(matches!(
            extract(&other, &key, &plan, 0),
            Err(ExtractError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wrong_key_scrambles_payload() {
        let dims = Dims::new(128, 128);
        let img = noise_image(dims, b"ber");
        let plan = LatticePlan::build(dims, 1, 1, b"s").unwrap();
        let payload = vec![0u8; 10_000];
        let right = DataKey::from_bytes([3; 16]);
        let wrong = DataKey::from_bytes([4; 16]);
        let marked = embed(&img, &payload, &right, &plan).unwrap();
        let decoded = extract(&marked, &wrong, &plan, payload.len()).unwrap();
        let flips: usize = decoded.iter().map(|&b| b as usize).sum();
        let ber = flips as f64 / payload.len() as f64;
        assert!((0.45..0.55).contains(&ber), "BER {ber} not ~0.5");
        let good = extract(&marked, &right, &plan, payload.len()).unwrap();
        assert_eq!(good, payload);
    }

    proptest! {
        #[test]
        fn payload_round_trips(
            rows in 8u32..40,
            cols in 8u32..40,
            nw in 1u32..=4,
            nb in 1u32..=4,
            seed in any::<u64>(),
            key in any::<[u8; 16]>(),
            frac in 0.0f64..=1.0,
        ) {
            let dims = Dims::new(rows, cols);
            let img = noise_image(dims, &seed.to_le_bytes());
            let plan = LatticePlan::build(dims, nw, nb, &seed.to_be_bytes()).unwrap();
            let len = (plan.capacity() as f64 * frac) as usize;
            let mut rng = ScrambleRng::new(&seed.to_be_bytes());
            let payload: Vec<u8> = (0..len).map(|_| rng.next_below(2) as u8).collect();
            let key = DataKey::from_bytes(key);
            let marked = embed(&img, &payload, &key, &plan).unwrap();
            let decoded = extract(&marked, &key, &plan, len).unwrap();
            prop_assert_eq!(decoded, payload);
        }

        #[test]
        fn extraction_needs_no_length_slack(seed in any::<u64>()) {
            // zero-length request always succeeds and returns nothing
            let dims = Dims::new(9, 9);
            let img = noise_image(dims, &seed.to_be_bytes());
            let plan = LatticePlan::build(dims, 2, 1, b"s").unwrap();
            let key = DataKey::from_bytes([9; 16]);
            prop_assert!(extract(&img, &key, &plan, 0).unwrap().is_empty());
        }
    }
}
