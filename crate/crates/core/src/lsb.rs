//! Least-significant-bit substitution.
//!
//! Stego layout: a 32-bit big-endian byte count followed by the message bytes,
//! each most significant bit first, written one bit per sample into the LSBs
//! of the samples visited by [`pixel_order`]. Without a key the samples are
//! visited in row-major (channel-interleaved) order. With a key they are
//! visited in the order of a forward Fisher–Yates shuffle of all sample
//! indices driven by SplitMix64 seeded with the key.

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::prng::{fnv1a64, Shuffle};

pub const HEADER_BITS: usize = 32;

/// Ordered sequence of message bits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitPayload {
    bits: Vec<bool>,
}

impl BitPayload {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitPayload { bits }
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

fn push_bits(out: &mut Vec<bool>, value: u64, width: u32) {
    out.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
}

/// Length-prefixed bit encoding of `text`.
pub fn frame_message(text: &[u8]) -> Result<BitPayload> {
    let len = u32::try_from(text.len())
        .ok()
        .filter(|&n| n < 1 << 29)
        .ok_or_else(|| Error::InvalidParameter(format!("message too long ({} bytes)", text.len())))?;
    let mut bits = Vec::with_capacity(HEADER_BITS + 8 * text.len());
    push_bits(&mut bits, u64::from(len), 32);
    for &b in text {
        push_bits(&mut bits, u64::from(b), 8);
    }
    Ok(BitPayload { bits })
}

/// Inverse of [`frame_message`].
pub fn unframe_message(payload: &BitPayload) -> Result<Vec<u8>> {
    let bits = payload.bits();
    if bits.len() < HEADER_BITS {
        return Err(Error::CorruptPayload);
    }
    let count = bits_to_u32(&bits[..HEADER_BITS]) as usize;
    if bits.len() != HEADER_BITS + 8 * count {
        return Err(Error::CorruptPayload);
    }
    Ok(bits[HEADER_BITS..].chunks_exact(8).map(bits_to_byte).collect())
}

fn bits_to_u32(bits: &[bool]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b))
}

fn bits_to_byte(bits: &[bool]) -> u8 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u8::from(b))
}

/// Seed selecting the keyed pixel order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EmbedKey(pub u64);

impl EmbedKey {
    /// Derives a key from a passphrase with FNV-1a 64.
    pub fn from_passphrase(passphrase: &str) -> Self {
        EmbedKey(fnv1a64(passphrase.as_bytes()))
    }
}

/// One bit per sample.
pub fn lsb_capacity(img: &ImageBuffer) -> usize {
    img.sample_count()
}

enum Order {
    Sequential(std::ops::Range<usize>),
    Keyed(Shuffle),
}

impl Iterator for Order {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Order::Sequential(r) => r.next(),
            Order::Keyed(s) => s.next(),
        }
    }
}

fn order(key: Option<EmbedKey>, samples: usize) -> Order {
    match key {
        None => Order::Sequential(0..samples),
        Some(EmbedKey(seed)) => Order::Keyed(Shuffle::new(samples, seed)),
    }
}

/// First `count` distinct sample indices visited for an image holding `samples` samples.
pub fn pixel_order(key: Option<EmbedKey>, samples: usize, count: usize) -> Result<Vec<usize>> {
    if count > samples {
        return Err(Error::CapacityExceeded {
            needed: count,
            capacity: samples,
        });
    }
    Ok(order(key, samples).take(count).collect())
}

/// Writes `payload` into the LSBs of `cover` along the pixel order for `key`.
pub fn lsb_embed(cover: &ImageBuffer, payload: &BitPayload, key: Option<EmbedKey>) -> Result<ImageBuffer> {
    let indices = pixel_order(key, lsb_capacity(cover), payload.len())?;
    let mut stego = cover.clone();
    let samples = stego.samples_mut();
    for (idx, &bit) in indices.into_iter().zip(payload.bits()) {
        samples[idx] = (samples[idx] & !1) | u8::from(bit);
    }
    Ok(stego)
}

/// Reads a length-framed message embedded with [`lsb_embed`] under `key`.
pub fn lsb_extract(stego: &ImageBuffer, key: Option<EmbedKey>) -> Result<Vec<u8>> {
    let samples = stego.samples();
    let capacity = samples.len();
    if capacity < HEADER_BITS {
        return Err(Error::CorruptPayload);
    }
    let mut visit = order(key, capacity);
    let mut next_bit = || samples[visit.next().expect("bounded by capacity")] & 1 == 1;

    let header: Vec<bool> = (0..HEADER_BITS).map(|_| next_bit()).collect();
    let count = bits_to_u32(&header) as usize;
    if count.checked_mul(8).map_or(true, |bits| bits > capacity - HEADER_BITS) {
        return Err(Error::CorruptPayload);
    }
    Ok((0..count)
        .map(|_| (0..8).fold(0u8, |acc, _| (acc << 1) | u8::from(next_bit())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_message_is_header_only() {
        let p = frame_message(b"").unwrap();
        assert_eq!(p.bits(), &[false; 32]);
    }

    #[test]
    fn frames_single_byte() {
        let p = frame_message(b"A").unwrap();
        let expected = BitPayload::parse(&format!("{:032b}{}", 1, "01000001")).unwrap();
        assert_eq!(p, expected);
        assert_eq!(unframe_message(&p).unwrap(), b"A");
    }

    #[test]
    fn unframe_rejects_inconsistent_length() {
        let mut bits = frame_message(b"xy").unwrap().bits().to_vec();
        bits.pop();
        assert!(unframe_message(&BitPayload::from_bits(bits)).is_err());
        assert!(unframe_message(&BitPayload::default()).is_err());
    }

    #[test]
    fn sequential_order() {
        assert_eq!(pixel_order(None, 100, 6).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert!(matches!(
            pixel_order(None, 5, 6),
            Err(Error::CapacityExceeded { needed: 6, capacity: 5 })
        ));
    }

    #[test]
    fn keyed_order_deterministic_and_distinct() {
        let a = pixel_order(Some(EmbedKey(77)), 4096, 4096).unwrap();
        let b = pixel_order(Some(EmbedKey(77)), 4096, 4096).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4096);
    }

    #[test]
    fn worked_example_bytes() {
        let cover = ImageBuffer::gray(
            6,
            1,
            vec![0b10110101, 0b01001101, 0b11001101, 0b00010011, 0b00010100, 0b01001010],
        )
        .unwrap();
        let stego = lsb_embed(&cover, &BitPayload::parse("001001").unwrap(), None).unwrap();
        assert_eq!(
            stego.samples(),
            &[0b10110100, 0b01001100, 0b11001101, 0b00010010, 0b00010100, 0b01001011]
        );
    }

    #[test]
    fn no_op_embeddings() {
        let cover = ImageBuffer::from_fn(8, 8, |x, y| (x * 31 + y * 17) as u8).unwrap();
        let same = BitPayload::from_bits(cover.samples().iter().map(|s| s & 1 == 1).collect());
        assert_eq!(lsb_embed(&cover, &same, None).unwrap(), cover);
        assert_eq!(lsb_embed(&cover, &BitPayload::default(), Some(EmbedKey(1))).unwrap(), cover);
    }

    #[test]
    fn embed_rejects_oversized_payload() {
        let cover = ImageBuffer::filled(4, 4, 0).unwrap();
        let payload = frame_message(b"too long").unwrap();
        assert!(matches!(
            lsb_embed(&cover, &payload, None),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn extract_rejects_absurd_header() {
        let cover = ImageBuffer::filled(64, 64, 0).unwrap();
        let header = BitPayload::from_bits(vec![true; 32]);
        let stego = lsb_embed(&cover, &header, None).unwrap();
        assert!(matches!(lsb_extract(&stego, None), Err(Error::CorruptPayload)));
        let tiny = ImageBuffer::filled(5, 5, 0).unwrap();
        assert!(matches!(lsb_extract(&tiny, None), Err(Error::CorruptPayload)));
    }

    #[test]
    fn header_exactly_at_capacity() {
        // 64 samples hold the header plus four bytes and nothing more.
        let cover = ImageBuffer::filled(8, 8, 90).unwrap();
        let stego = lsb_embed(&cover, &frame_message(b"abcd").unwrap(), Some(EmbedKey(5))).unwrap();
        assert_eq!(lsb_extract(&stego, Some(EmbedKey(5))).unwrap(), b"abcd");
        assert!(lsb_embed(&cover, &frame_message(b"abcde").unwrap(), None).is_err());
    }

    #[test]
    fn wrong_key_never_panics() {
        let cover = ImageBuffer::from_fn(64, 64, |x, y| (x ^ y) as u8).unwrap();
        let stego = lsb_embed(&cover, &frame_message(b"secret").unwrap(), Some(EmbedKey(1))).unwrap();
        for seed in 2..40 {
            if let Ok(msg) = lsb_extract(&stego, Some(EmbedKey(seed))) {
                assert_ne!(msg, b"secret");
            }
        }
        let _ = lsb_extract(&stego, None);
    }

    #[test]
    fn capacity_counts_samples() {
        assert_eq!(lsb_capacity(&ImageBuffer::filled(256, 240, 0).unwrap()), 61_440);
        assert_eq!(lsb_capacity(&ImageBuffer::filled(512, 512, 0).unwrap()), 262_144);
        let rgb = ImageBuffer::new(1, 1, crate::image::Channels::Rgb, vec![1, 2, 3]).unwrap();
        assert_eq!(lsb_capacity(&rgb), 3);
    }

    #[test]
    fn passphrase_seed_is_fnv() {
        assert_eq!(EmbedKey::from_passphrase("a"), EmbedKey(0xaf63dc4c8601ec8c));
    }
}
