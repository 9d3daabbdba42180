//! Compound-Poisson driving paths.
//!
//! Each noise channel is an independent compound-Poisson stream
//!
//! ```text
//! L(t) = sum_{k : tau_k <= t} R_k
//! ```
//!
//! with Exp(lambda) waiting times and N(0, sigma^2) jump sizes. Jumps are
//! stored as an explicit event list so the stepper can land on every jump
//! time exactly.
//!
//! Sampling is fully determined by the seed. The generator is ChaCha8 seeded
//! through `seed_from_u64`; waiting times use inversion, `-ln(U) / lambda`
//! with `U` uniform on (0, 1]; jump sizes use the Marsaglia polar method, and
//! the spare variate of each polar pair is consumed by the next draw. Channels
//! are drawn one after another from the same generator, channel 0 first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Parameters of the driving compound-Poisson process.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyConfig {
    /// Jump intensity (expected jumps per unit time, per channel).
    pub intensity: f64,
    /// Standard deviation of the normal jump sizes.
    pub jump_size_sigma: f64,
    /// Number of independent noise channels.
    pub channels: usize,
    /// Path horizon.
    pub horizon: f64,
    pub seed: u64,
    /// Coefficient of a Brownian component. Only `0.0` is supported.
    pub brownian_coefficient: f64,
}

impl Default for LevyConfig {
    fn default() -> Self {
        Self {
            intensity: 5.0,
            jump_size_sigma: 0.2,
            channels: 1,
            horizon: 20.0,
            seed: 42,
            brownian_coefficient: 0.0,
        }
    }
}

impl LevyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(Error::Config(format!(
                "intensity must be positive, got {}",
                self.intensity
            )));
        }
        if !(self.jump_size_sigma.is_finite() && self.jump_size_sigma > 0.0) {
            return Err(Error::Config(format!(
                "jump size sigma must be positive, got {}",
                self.jump_size_sigma
            )));
        }
        if self.channels == 0 {
            return Err(Error::Config(
                "at least one noise channel is required".into(),
            ));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.brownian_coefficient != 0.0 {
            return Err(Error::Config(format!(
                "Brownian coefficient must be 0, got {}",
                self.brownian_coefficient
            )));
        }
        Ok(())
    }
}

/// Jump times and sizes of a single channel.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelJumps {
    pub times: Vec<f64>,
    pub sizes: Vec<f64>,
}

impl ChannelJumps {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// One realized jump, tagged with its channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub channel: usize,
    pub time: f64,
    pub size: f64,
}

/// An immutable realization of the driving process on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPath {
    config: LevyConfig,
    channels: Vec<ChannelJumps>,
}

impl LevyPath {
    /// Draws a path from `config`.
    pub fn sample(config: &LevyConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut normal = PolarNormal::default();
        let mut channels = Vec::with_capacity(config.channels);
        for _ in 0..config.channels {
            let mut jumps = ChannelJumps::default();
            let mut t = 0.0;
            loop {
                // U on (0, 1] keeps ln(U) finite.
                let u = 1.0 - rng.random::<f64>();
                t += -u.ln() / config.intensity;
                if t > config.horizon {
                    break;
                }
                jumps.times.push(t);
                jumps
                    .sizes
                    .push(config.jump_size_sigma * normal.sample(&mut rng));
            }
            channels.push(jumps);
        }
        Ok(Self {
            config: config.clone(),
            channels,
        })
    }

    /// Builds a path from explicit jump lists, one per channel.
    pub fn from_jumps(config: LevyConfig, channels: Vec<ChannelJumps>) -> Result<Self> {
        config.validate()?;
        if channels.len() != config.channels {
            return Err(Error::Config(format!(
                "expected {} channels, got {}",
                config.channels,
                channels.len()
            )));
        }
        for (r, ch) in channels.iter().enumerate() {
            if ch.times.len() != ch.sizes.len() {
                return Err(Error::Config(format!(
                    "channel {r}: {} times but {} sizes",
                    ch.times.len(),
                    ch.sizes.len()
                )));
            }
            let mut prev = 0.0;
            for (&t, &size) in ch.times.iter().zip(&ch.sizes) {
                if !(t > prev && t <= config.horizon) {
                    return Err(Error::Config(format!(
                        "channel {r}: jump time {t} breaks strict ordering in (0, {}]",
                        config.horizon
                    )));
                }
                if !size.is_finite() {
                    return Err(Error::Config(format!("channel {r}: non-finite jump size")));
                }
                prev = t;
            }
        }
        Ok(Self { config, channels })
    }

    /// A path without jumps.
    pub fn empty(config: LevyConfig) -> Result<Self> {
        let m = config.channels;
        Self::from_jumps(config, vec![ChannelJumps::default(); m])
    }

    pub fn config(&self) -> &LevyConfig {
        &self.config
    }

    pub fn horizon(&self) -> f64 {
        self.config.horizon
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, r: usize) -> Result<&ChannelJumps> {
        self.channels.get(r).ok_or_else(|| {
            Error::Domain(format!(
                "channel {r} out of range (path has {})",
                self.channels.len()
            ))
        })
    }

    /// `L_r(t)`: the sum of all jumps of channel `r` at times `<= t`.
    pub fn value(&self, r: usize, t: f64) -> Result<f64> {
        let ch = self.channel(r)?;
        self.check_time(t)?;
        let end = ch.times.partition_point(|&tau| tau <= t);
        Ok(ch.sizes[..end].iter().sum())
    }

    /// Jumps of channel `r` in the half-open interval `(t0, t1]`, in time order.
    pub fn jumps_in(&self, r: usize, t0: f64, t1: f64) -> Result<Vec<(f64, f64)>> {
        let ch = self.channel(r)?;
        if t0.is_nan() || t1.is_nan() || t0 >= t1 {
            return Err(Error::Domain(format!("empty interval ({t0}, {t1}]")));
        }
        self.check_time(t0)?;
        self.check_time(t1)?;
        let lo = ch.times.partition_point(|&tau| tau <= t0);
        let hi = ch.times.partition_point(|&tau| tau <= t1);
        Ok(ch.times[lo..hi]
            .iter()
            .copied()
            .zip(ch.sizes[lo..hi].iter().copied())
            .collect())
    }

    /// All jumps at times `<= t_end`, ordered by time and then by channel.
    pub fn events_until(&self, t_end: f64) -> Vec<JumpEvent> {
        let mut events: Vec<JumpEvent> = self
            .channels
            .iter()
            .enumerate()
            .flat_map(|(r, ch)| {
                ch.times
                    .iter()
                    .zip(&ch.sizes)
                    .take_while(move |(&t, _)| t <= t_end)
                    .map(move |(&time, &size)| JumpEvent {
                        channel: r,
                        time,
                        size,
                    })
            })
            .collect();
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.channel.cmp(&b.channel)));
        events
    }

    /// Total number of jumps over all channels.
    pub fn num_jumps(&self) -> usize {
        self.channels.iter().map(ChannelJumps::len).sum()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.config.horizon {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.config.horizon
            )))
        }
    }
}

/// Marsaglia polar method for standard normal variates.
#[derive(Debug, Default)]
struct PolarNormal {
    spare: Option<f64>,
}

impl PolarNormal {
    fn sample<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            let v = 2.0 * rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_channel(horizon: f64) -> LevyConfig {
        LevyConfig {
            horizon,
            ..LevyConfig::default()
        }
    }

    fn path_with(jumps: &[(f64, f64)]) -> LevyPath {
        let ch = ChannelJumps {
            times: jumps.iter().map(|j| j.0).collect(),
            sizes: jumps.iter().map(|j| j.1).collect(),
        };
        LevyPath::from_jumps(single_channel(1.0), vec![ch]).unwrap()
    }

    #[test]
    fn rejects_invalid_config() {
        let bad = [
            LevyConfig {
                intensity: 0.0,
                ..Default::default()
            },
            LevyConfig {
                jump_size_sigma: -1.0,
                ..Default::default()
            },
            LevyConfig {
                channels: 0,
                ..Default::default()
            },
            LevyConfig {
                horizon: 0.0,
                ..Default::default()
            },
            LevyConfig {
                brownian_coefficient: 0.1,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(LevyPath::sample(&cfg), Err(Error::Config(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn same_seed_same_path() {
        let cfg = LevyConfig::default();
        let a = LevyPath::sample(&cfg).unwrap();
        let b = LevyPath::sample(&cfg).unwrap();
        assert_eq!(a, b);
        let other = LevyPath::sample(&LevyConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn vanishing_horizon_has_no_jumps() {
        let path = LevyPath::sample(&single_channel(1e-12)).unwrap();
        assert_eq!(path.num_jumps(), 0);
    }

    #[test]
    fn sampled_times_are_ordered_and_in_range() {
        let cfg = LevyConfig {
            channels: 3,
            ..Default::default()
        };
        let path = LevyPath::sample(&cfg).unwrap();
        for r in 0..3 {
            let ch = path.channel(r).unwrap();
            assert!(ch.times.windows(2).all(|w| w[0] < w[1]));
            assert!(ch.times.iter().all(|&t| t > 0.0 && t <= cfg.horizon));
            assert!(ch.sizes.iter().all(|s| s.is_finite()));
        }
        // independent streams
        assert_ne!(path.channel(0).unwrap(), path.channel(1).unwrap());
    }

    #[test]
    fn value_of_empty_path_is_zero() {
        let path = LevyPath::empty(single_channel(1.0)).unwrap();
        for t in [0.0, 0.5, 1.0] {
            assert_eq!(path.value(0, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn value_is_right_continuous() {
        let path = path_with(&[(0.3, 0.7)]);
        assert_eq!(path.value(0, 0.2).unwrap(), 0.0);
        assert_eq!(path.value(0, 0.3).unwrap(), 0.7);
        assert_eq!(path.value(0, 1.0).unwrap(), 0.7);
    }

    #[test]
    fn value_sums_jumps() {
        let path = path_with(&[(0.1, 0.5), (0.4, -0.2)]);
        assert!((path.value(0, 0.5).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn value_outside_horizon_is_domain_error() {
        let path = path_with(&[]);
        assert!(matches!(path.value(0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(path.value(0, 1.5), Err(Error::Domain(_))));
        assert!(matches!(path.value(1, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn jumps_in_is_left_open_right_closed() {
        let path = path_with(&[(0.1, 0.5), (0.4, -0.2)]);
        assert_eq!(path.jumps_in(0, 0.0, 0.2).unwrap(), vec![(0.1, 0.5)]);
        assert_eq!(path.jumps_in(0, 0.1, 0.4).unwrap(), vec![(0.4, -0.2)]);
        assert!(path_with(&[]).jumps_in(0, 0.0, 1.0).unwrap().is_empty());
        assert!(matches!(path.jumps_in(0, 0.4, 0.4), Err(Error::Domain(_))));
        assert!(matches!(path.jumps_in(0, 0.5, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn from_jumps_validates_ordering() {
        let ch = ChannelJumps {
            times: vec![0.5, 0.2],
            sizes: vec![1.0, 1.0],
        };
        assert!(LevyPath::from_jumps(single_channel(1.0), vec![ch]).is_err());
        let ch = ChannelJumps {
            times: vec![0.0],
            sizes: vec![1.0],
        };
        assert!(LevyPath::from_jumps(single_channel(1.0), vec![ch]).is_err());
    }

    #[test]
    fn events_are_merged_in_time_order() {
        let cfg = LevyConfig {
            channels: 2,
            horizon: 1.0,
            ..Default::default()
        };
        let path = LevyPath::from_jumps(
            cfg,
            vec![
                ChannelJumps {
                    times: vec![0.2, 0.6],
                    sizes: vec![1.0, 2.0],
                },
                ChannelJumps {
                    times: vec![0.2, 0.4],
                    sizes: vec![3.0, 4.0],
                },
            ],
        )
        .unwrap();
        let ev = path.events_until(0.5);
        let got: Vec<(usize, f64)> = ev.iter().map(|e| (e.channel, e.time)).collect();
        assert_eq!(got, vec![(0, 0.2), (1, 0.2), (1, 0.4)]);
    }
}
