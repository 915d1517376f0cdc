//! Special functions and deterministic random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Standard normal cumulative distribution function.
///
/// Evaluated as `erfc(-x/√2)/2` with the FreeBSD msun `erfc` (via the `libm`
/// crate), a piecewise rational approximation with error below one ulp.
/// Using the complementary function keeps full relative accuracy in the
/// lower tail, so `norm_cdf(-8)` is about 6.2e-16 rather than a rounding
/// artifact of `1 - norm_cdf(8)`.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "ln_gamma",
            detail: format!("x = {x}, need finite x > 0"),
        });
    }
    Ok(libm::lgamma(x))
}

/// Largest |z| accepted by [`kummer_m`]; beyond it `e^z` leaves f64 range.
pub const KUMMER_MAX_ABS_Z: f64 = 700.0;

const KUMMER_MAX_TERMS: usize = 20_000;

/// Kummer's confluent hypergeometric function `M(a, b, z) = Σ (a)ₙ zⁿ / ((b)ₙ n!)`.
///
/// Summed as a Taylor series, stopping once three consecutive terms fall
/// below `1e-16` of the partial sum. Negative arguments go through Kummer's
/// transformation `M(a, b, z) = eᶻ M(b - a, b, -z)` so that the summed series
/// does not alternate.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || !z.is_finite() {
        return Err(Error::Domain {
            function: "kummer_m",
            detail: format!("non-finite argument (a = {a}, b = {b}, z = {z})"),
        });
    }
    if b <= 0.0 && b == b.round() {
        return Err(Error::Domain {
            function: "kummer_m",
            detail: format!("b = {b} is a nonpositive integer"),
        });
    }
    if z.abs() > KUMMER_MAX_ABS_Z {
        return Err(Error::Overflow("kummer_m"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let value = if z < 0.0 {
        z.exp() * kummer_series(b - a, b, -z)?
    } else {
        kummer_series(a, b, z)?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("kummer_m"))
    }
}

fn kummer_series(a: f64, b: f64, z: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut small_run = 0;
    for n in 0..KUMMER_MAX_TERMS {
        let k = n as f64;
        term *= (a + k) / (b + k) * z / (k + 1.0);
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow("kummer_m"));
        }
        if term.abs() < 1e-16 * sum.abs() {
            small_run += 1;
            if small_run == 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence("kummer_m"))
}

/// Identity of a reproducible random sequence.
///
/// The sequence is a pure function of `(seed, stream_id)`: it is generated by
/// a ChaCha8 block function keyed by the seed, with the stream id as the
/// ChaCha nonce and an internal block counter. Nothing depends on how many
/// other streams were drawn before or on which thread draws it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Starts drawing from the beginning of the stream.
    pub fn sampler(&self) -> StreamSampler {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        StreamSampler { rng }
    }
}

/// Cursor over one [`RandomStream`].
#[derive(Debug, Clone)]
pub struct StreamSampler {
    rng: ChaCha8Rng,
}

impl StreamSampler {
    /// Next standard normal variate (ziggurat method).
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Next uniform variate in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl Iterator for StreamSampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.standard_normal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_cdf_fixed_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(8.0) - 1.0).abs() < 1e-15);
        assert!(norm_cdf(-8.0) < 1e-15);
        assert!(norm_cdf(-8.0) > 0.0);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        let half = ln_gamma(0.5).unwrap();
        assert!((half - std::f64::consts::PI.sqrt().ln()).abs() < 1e-15);
        let ten = ln_gamma(10.0).unwrap();
        assert!((ten / 362880f64.ln() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_rejects_nonpositive() {
        assert!(matches!(ln_gamma(0.0), Err(Error::Domain { .. })));
        assert!(matches!(ln_gamma(-2.5), Err(Error::Domain { .. })));
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn kummer_trivial_cases() {
        assert_eq!(kummer_m(0.3, 1.7, 0.0).unwrap(), 1.0);
        for z in [0.1, 1.0, 7.5, 30.0] {
            let v = kummer_m(2.5, 2.5, z).unwrap();
            assert!((v / z.exp() - 1.0).abs() < 1e-13, "z = {z}");
        }
        let e_minus_1 = std::f64::consts::E - 1.0;
        assert!((kummer_m(1.0, 2.0, 1.0).unwrap() / e_minus_1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kummer_negative_argument_uses_transformation() {
        // M(a, a, -z) = e^{-z} exercises the transformed branch.
        let v = kummer_m(1.3, 1.3, -40.0).unwrap();
        assert!((v / (-40f64).exp() - 1.0).abs() < 1e-12);
        // M(1, 2, -z) = (1 - e^{-z}) / z
        let z = 25.0;
        let v = kummer_m(1.0, 2.0, -z).unwrap();
        assert!((v / ((1.0 - (-z).exp()) / z) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn kummer_errors() {
        assert!(matches!(kummer_m(1.0, 0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(kummer_m(1.0, -3.0, 1.0), Err(Error::Domain { .. })));
        assert!(kummer_m(1.0, -2.5, 1.0).is_ok());
        assert_eq!(kummer_m(1.0, 2.0, 701.0), Err(Error::Overflow("kummer_m")));
        assert_eq!(kummer_m(1.0, 2.0, -701.0), Err(Error::Overflow("kummer_m")));
    }

    #[test]
    fn kummer_terminating_series() {
        // a = -2: M(-2, b, z) = 1 - 2z/b + z²/(b(b+1))
        let (b, z) = (1.5, 3.0);
        let expected = 1.0 - 2.0 * z / b + z * z / (b * (b + 1.0));
        assert!((kummer_m(-2.0, b, z).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn stream_replay_is_identical() {
        let a: Vec<f64> = RandomStream::new(42, 7).sampler().take(1000).collect();
        let b: Vec<f64> = RandomStream::new(42, 7).sampler().take(1000).collect();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        let c: Vec<f64> = RandomStream::new(42, 8).sampler().take(1000).collect();
        assert_ne!(a, c);
        let d: Vec<f64> = RandomStream::new(43, 7).sampler().take(1000).collect();
        assert_ne!(a, d);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = RandomStream::new(1, 0).sampler();
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
