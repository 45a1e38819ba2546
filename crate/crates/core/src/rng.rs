//! Counter-based random streams.
//!
//! Every Gaussian variate is drawn from a ChaCha8 stream whose key is the user
//! seed plus a domain tag, and whose stream id packs the logical coordinates
//! of the variate (component, degree, order). The value of a coefficient is
//! therefore a pure function of `(seed, domain, coordinates)` and does not
//! depend on evaluation order or thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Separates independent families of streams derived from one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    SphereCoefficients = 1,
    BallCoefficients = 2,
}

/// Logical coordinates of one stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub index: u32,
    pub ell: u32,
    pub m: i32,
}

impl StreamKey {
    fn stream_id(self) -> u64 {
        assert!(self.index < 1 << 16, "component index {} too large", self.index);
        assert!(self.ell < 1 << 23, "degree {} too large", self.ell);
        let m = (self.m as i64 + (1 << 23)) as u64;
        assert!(m < 1 << 24, "order {} too large", self.m);
        ((self.index as u64) << 48) | ((self.ell as u64) << 24) | m
    }
}

pub fn stream(seed: u64, domain: Domain, key: StreamKey) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8] = domain as u8;
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(key.stream_id());
    rng
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian with independent real and imaginary parts of variance 1/2.
pub fn standard_complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    Complex64::new(re * h, im * h)
}
