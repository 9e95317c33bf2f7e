//! Keystreams and keys.
//!
//! Two independent 128-bit secrets drive the scheme: the image key encrypts
//! pixels, the data key encrypts payload bits. Neither side ever needs the
//! other's key. Keystream bytes come from AES-128 in counter mode with a
//! zero IV; a domain tag is hashed into the high counter word so streams for
//! different purposes never overlap even under the same key.
//!
//! The scramble generator used for lattice permutations is deliberately not
//! the cipher: it is a public, keyless splitmix64 stream seeded by FNV-1a,
//! specified bit-for-bit so any implementation reproduces the same
//! permutations.

use aes::cipher::generic_array::GenericArray;
use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;
use alloc::vec::Vec;
use core::fmt;

use crate::image::GrayImage;

/// Domain tag for image pixel keystreams.
pub const TAG_IMAGE: &str = "img";
/// Domain tag for payload bit keystreams.
pub const TAG_PAYLOAD: &str = "payload";

/// Errors from hex key/seed parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyError {
    /// Hex strings must have an even number of digits.
    OddLength,
    /// Non-hex character encountered.
    BadDigit(char),
    /// Keys are exactly 128 bits (32 hex digits).
    BadLength { expected: usize, actual: usize },
}

impl fmt::Display for KeyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyError::OddLength => write!(f, "hex string has odd length"),
            KeyError::BadDigit(c) => write!(f, "invalid hex digit {c:?}"),
            KeyError::BadLength { expected, actual } => {
                write!(f, "expected {expected} hex digits, got {actual}")
            }
        }
    }
}

impl core::error::Error for KeyError {}

/// Decodes a hex string of any even length.
pub fn decode_hex(s: &str) -> Result<Vec<u8>, KeyError> {
    if s.len() % 2 != 0 {
        return Err(KeyError::OddLength);
    }
    let mut out = Vec::with_capacity(s.len() / 2);
    let mut chars = s.chars();
    while let (Some(hi), Some(lo)) = (chars.next(), chars.next()) {
        let hi = hi.to_digit(16).ok_or(KeyError::BadDigit(hi))? as u8;
        let lo = lo.to_digit(16).ok_or(KeyError::BadDigit(lo))? as u8;
        out.push(hi << 4 | lo);
    }
    Ok(out)
}

fn key_from_hex(s: &str) -> Result<[u8; 16], KeyError> {
    if s.len() != 32 {
        return Err(KeyError::BadLength { expected: 32, actual: s.len() });
    }
    let bytes = decode_hex(s)?;
    let mut key = [0u8; 16];
    key.copy_from_slice(&bytes);
    Ok(key)
}

/// Image-owner secret: encrypts pixels, and is the only key reconstruction
/// ever sees.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageKey([u8; 16]);

/// Data-hider secret: encrypts payload bits, and is the only key embedding
/// and extraction ever see.
#[derive(Clone, PartialEq, Eq)]
pub struct DataKey([u8; 16]);

macro_rules! key_impl {
    ($name:ident) => {
        impl $name {
            pub fn from_bytes(bytes: [u8; 16]) -> Self {
                $name(bytes)
            }

            /// Parses exactly 32 hex digits.
            pub fn from_hex(s: &str) -> Result<Self, KeyError> {
                key_from_hex(s).map($name)
            }

            pub fn as_bytes(&self) -> &[u8; 16] {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                // never print key material
                write!(f, concat!(stringify!($name), "(..)"))
            }
        }
    };
}

key_impl!(ImageKey);
key_impl!(DataKey);

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over one byte slice.
pub fn fnv1a64(data: &[u8]) -> u64 {
    fnv1a64_parts(&[data])
}

/// FNV-1a over the concatenation of several byte slices.
pub fn fnv1a64_parts(parts: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Deterministic keystream: AES-128 applied to counter blocks
/// `fnv1a64(tag) || block_index`, both big-endian, starting at index 0.
pub fn keystream(key: &[u8; 16], tag: &str, len: usize) -> Vec<u8> {
    let cipher = Aes128::new(GenericArray::from_slice(key));
    let tag_word = fnv1a64(tag.as_bytes()).to_be_bytes();
    let mut out = Vec::with_capacity(len);
    let mut index: u64 = 0;
    while out.len() < len {
        let mut block = [0u8; 16];
        block[..8].copy_from_slice(&tag_word);
        block[8..].copy_from_slice(&index.to_be_bytes());
        let mut block = GenericArray::from(block);
        cipher.encrypt_block(&mut block);
        let take = core::cmp::min(16, len - out.len());
        out.extend_from_slice(&block[..take]);
        index += 1;
    }
    out
}

/// XORs every pixel with the image keystream. Involution: applying it twice
/// under the same key is the identity, so it both encrypts and decrypts.
pub fn xor_image(img: &GrayImage, key: &ImageKey) -> GrayImage {
    let stream = keystream(key.as_bytes(), TAG_IMAGE, img.pixels().len());
    let pixels = img
        .pixels()
        .iter()
        .zip(&stream)
        .map(|(&p, &k)| p ^ k)
        .collect();
    GrayImage::new(img.dims(), pixels)
}

/// XORs a bit sequence (one bit per element, values 0/1) with the payload
/// keystream, expanded from bytes MSB-first. Involution under the same key.
pub fn xor_payload(bits: &[u8], key: &DataKey) -> Vec<u8> {
    let stream = keystream(key.as_bytes(), TAG_PAYLOAD, bits.len().div_ceil(8));
    bits.iter()
        .enumerate()
        .map(|(i, &b)| {
            debug_assert!(b <= 1, "payload bits must be 0 or 1");
            b ^ (stream[i / 8] >> (7 - i % 8)) & 1
        })
        .collect()
}

/// Expands bytes to bits MSB-first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for shift in (0..8).rev() {
            bits.push(b >> shift & 1);
        }
    }
    bits
}

/// Packs bits (MSB-first) back into bytes, zero-padding the final byte.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(bits.len().div_ceil(8));
    for chunk in bits.chunks(8) {
        let mut b = 0u8;
        for (i, &bit) in chunk.iter().enumerate() {
            b |= (bit & 1) << (7 - i);
        }
        bytes.push(b);
    }
    bytes
}

/// Public deterministic word generator for lattice scrambling.
///
/// The seed material is hashed with FNV-1a into the initial state; each call
/// to [`next_word`](Self::next_word) advances a splitmix64 recurrence. Both
/// primitives are fixed here so independent implementations can derive
/// identical permutations: FNV-1a uses offset `0xcbf29ce484222325` and prime
/// `0x100000001b3`; splitmix64 adds `0x9e3779b97f4a7c15` to the state and
/// mixes with the standard two multiply-xorshift rounds.
#[derive(Debug, Clone)]
pub struct ScrambleRng {
    state: u64,
}

impl ScrambleRng {
    pub fn new(seed: &[u8]) -> Self {
        ScrambleRng { state: fnv1a64(seed) }
    }

    /// Seeds from the concatenation of several byte slices.
    pub fn from_parts(parts: &[&[u8]]) -> Self {
        ScrambleRng { state: fnv1a64_parts(parts) }
    }

    pub fn next_word(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform-enough draw in `0..bound`. Plain modulo: the generator is for
    /// public scrambling, not cryptography, and the modulo rule is part of
    /// the fixed permutation derivation.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_word() % bound
    }
}
