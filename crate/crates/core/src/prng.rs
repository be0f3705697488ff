//! Pinned pseudo-random primitives.
//!
//! Every keyed operation in the crate draws from [`SplitMix64`] so that stego
//! and attacked files are reproducible across platforms and implementations.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normal deviates (Box–Muller).
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        // 1 - u lies in (0, 1], keeping ln finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        (radius * angle.cos(), radius * angle.sin())
    }
}

/// Lazily evaluated forward Fisher–Yates shuffle of `0..n`.
///
/// Step `i` draws `j = i + next_u64() % (n - i)` and swaps positions `i` and
/// `j`, so the first `k` yielded values depend only on the first `k` draws and
/// any prefix of the permutation can be produced without shuffling the rest.
#[derive(Clone, Debug)]
pub struct Shuffle {
    rng: SplitMix64,
    perm: Vec<usize>,
    next: usize,
}

impl Shuffle {
    pub fn new(n: usize, seed: u64) -> Self {
        Shuffle {
            rng: SplitMix64::new(seed),
            perm: (0..n).collect(),
            next: 0,
        }
    }
}

impl Iterator for Shuffle {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let n = self.perm.len();
        let i = self.next;
        if i >= n {
            return None;
        }
        let j = i + (self.rng.next_u64() % (n - i) as u64) as usize;
        self.perm.swap(i, j);
        self.next += 1;
        Some(self.perm[i])
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.perm.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Shuffle {}

/// FNV-1a 64-bit hash, used to derive embedding seeds from passphrases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}
