//! Small deterministic random number generator (splitmix64) plus a Halton
//! low-discrepancy sequence.
//!
//! Outputs must be byte-reproducible across runs and dependency updates, so
//! the generator is kept in-tree rather than pulled from a crate.

/// splitmix64 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed ^ 0x9e37_79b9_7f4a_7c15,
        }
    }

    /// Independent stream for element `index` of a seeded family; used so
    /// that sampling is deterministic no matter how indices are scheduled.
    pub fn for_index(seed: u64, index: u64) -> Self {
        let mut r = Rng::new(seed);
        let base = r.next_u64();
        Rng::new(base ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = (self.next_u64() >> 11) as f64 + 1.0; // in [1, 2^53]
        let u1 = u1 * (1.0 / (1u64 << 53) as f64); // in (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

const HALTON_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// `index`-th element of the van der Corput sequence in the given base.
fn van_der_corput(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

/// `index`-th Halton point in `dim` dimensions, entries in `[0, 1)`.
/// Dimensions beyond the prepared prime bases fall back to a seeded stream.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|d| {
            if d < HALTON_BASES.len() {
                van_der_corput(index + 1, HALTON_BASES[d])
            } else {
                Rng::for_index(d as u64, index).next_f64()
            }
        })
        .collect()
}
