//! Seeded permutation sampling for the three shuffling schemes.
//!
//! The generator is pinned rather than delegated to a randomness crate:
//! reproducibility of experiment CSVs down to the byte is part of this
//! crate's contract, and that is only defensible when the entire stream —
//! seeding, bounded sampling, shuffling, gaussians — is spelled out here.
//!
//! The stream contract, in full:
//!
//! * state seeding: four successive outputs of splitmix64 starting from the
//!   seed initialize the xoshiro256** state (the construction recommended by
//!   the generator's authors);
//! * `next_u64` is one xoshiro256** step;
//! * `next_f64` takes the top 53 bits of `next_u64` into [0, 1);
//! * `next_below(b)` is the 128-bit multiply bounded sampler with rejection
//!   (unbiased for every bound);
//! * `shuffle` is a descending-index Fisher–Yates using `next_below`;
//! * `next_gaussian` is Box–Muller on two `next_f64` draws, cosine branch
//!   first, the sine branch cached for the next call;
//! * per-run streams derive from a base seed as
//!   `seed' = splitmix64_mix(base XOR run_index)`.
//!
//! Any change to this list is a breaking change to recorded experiments.

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E3779B97F4A7C15;

/// One splitmix64 output computed from `state` (stateless form).
fn splitmix64_mix(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives the RNG seed for run number `run_index` of a multi-run experiment
/// from the experiment's base seed.
pub fn derive_seed(base_seed: u64, run_index: u64) -> u64 {
    splitmix64_mix(base_seed ^ run_index)
}

/// splitmix64-seeded xoshiro256** stream.
///
/// Identical seeds produce identical output streams on every platform; a
/// run owns its stream exclusively (clone-free single ownership), and
/// concurrent runs derive independent streams via [`derive_seed`].
#[derive(Clone, Debug)]
pub struct SeededRng {
    s: [u64; 4],
    gaussian_spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            state = state.wrapping_add(GOLDEN_GAMMA);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            *slot = z ^ (z >> 31);
        }
        SeededRng {
            s,
            gaussian_spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw from [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform draw from [0, bound). Panics if bound is 0.
    pub fn next_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "next_below requires a positive bound");
        let bound = bound as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128) * (bound as u128);
        let mut low = m as u64;
        if low < bound {
            // rejection threshold (2^64 - bound) mod bound, computed without
            // 128-bit division
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (bound as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// Standard normal draw (Box–Muller; second value cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.gaussian_spare.take() {
            return z;
        }
        // 1 - u keeps the argument of ln strictly positive
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.gaussian_spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i + 1);
            xs.swap(i, j);
        }
    }
}

/// The three index orderings an epoch can traverse the data in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    /// Natural order 0..n every epoch.
    Cyclic,
    /// One random permutation drawn at scheme construction, reused every epoch.
    ShuffleOnce,
    /// A fresh random permutation every epoch.
    RandomReshuffling,
}

impl SchemeKind {
    /// Parses the CLI/config token.
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "cyclic" => Ok(SchemeKind::Cyclic),
            "so" | "shuffle-once" => Ok(SchemeKind::ShuffleOnce),
            "rr" | "random-reshuffling" => Ok(SchemeKind::RandomReshuffling),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (expected cyclic, so, or rr)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Cyclic => "cyclic",
            SchemeKind::ShuffleOnce => "so",
            SchemeKind::RandomReshuffling => "rr",
        }
    }
}

/// The index order one epoch traverses: π_s = (π_s¹, …, π_sᵐ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpochPermutation {
    /// Outer iteration index s.
    pub epoch: usize,
    /// m distinct indices from [0, n).
    pub order: Vec<usize>,
}

/// Permutation source bound to a dataset size n.
///
/// Holds the construction-time permutation for Shuffle-Once; Cyclic and
/// Random Reshuffling carry no state beyond the kind.
#[derive(Clone, Debug)]
pub struct ShufflingScheme {
    kind: SchemeKind,
    n: usize,
    fixed: Option<Vec<usize>>,
}

impl ShufflingScheme {
    /// Binds a scheme kind to a dataset size. Shuffle-Once draws its single
    /// permutation here, consuming the rng.
    pub fn new(kind: SchemeKind, n: usize, rng: &mut SeededRng) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "scheme requires a nonempty dataset".into(),
            ));
        }
        let fixed = match kind {
            SchemeKind::ShuffleOnce => {
                let mut perm: Vec<usize> = (0..n).collect();
                rng.shuffle(&mut perm);
                Some(perm)
            }
            _ => None,
        };
        Ok(ShufflingScheme { kind, n, fixed })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes the epoch's m-element order into `out`.
    ///
    /// Random Reshuffling always builds a full permutation of [n] with
    /// Fisher–Yates and then truncates to the first m entries. That matches
    /// the definition of partial reshuffling literally (select the first m
    /// elements of a reshuffled [n]); a partial Fisher–Yates would be
    /// equivalent in distribution but harder to audit against the
    /// definition.
    pub fn sample_into(
        &self,
        m: usize,
        epoch: usize,
        rng: &mut SeededRng,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        if m == 0 || m > self.n {
            return Err(Error::InvalidConfig(format!(
                "inner size m={m} outside valid range [1, {}]",
                self.n
            )));
        }
        if m < self.n && self.kind != SchemeKind::RandomReshuffling {
            return Err(Error::UnsupportedMode(format!(
                "partial sampling (m={m} < n={}) requires random reshuffling, not {}",
                self.n,
                self.kind.label()
            )));
        }
        let _ = epoch; // order depends on rng stream position, not the index
        out.clear();
        match self.kind {
            SchemeKind::Cyclic => out.extend(0..self.n),
            SchemeKind::ShuffleOnce => {
                out.extend_from_slice(self.fixed.as_ref().expect("fixed permutation"))
            }
            SchemeKind::RandomReshuffling => {
                out.extend(0..self.n);
                rng.shuffle(out);
            }
        }
        out.truncate(m);
        debug_assert!(is_valid_order(out, self.n), "duplicate or out-of-range index");
        Ok(())
    }

    /// Allocating variant of [`ShufflingScheme::sample_into`].
    pub fn sample(&self, m: usize, epoch: usize, rng: &mut SeededRng) -> Result<EpochPermutation> {
        let mut order = Vec::with_capacity(self.n);
        self.sample_into(m, epoch, rng, &mut order)?;
        Ok(EpochPermutation { epoch, order })
    }
}

/// True iff all entries are distinct and below n.
fn is_valid_order(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}
