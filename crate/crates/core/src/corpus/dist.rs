use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Gamma, Geometric, Normal, Poisson};

use super::ItemId;
use crate::error::{Error, Result};

/// Draws an index from a cumulative weight table, skipping zero-weight slots.
pub(crate) fn sample_cdf<R: rand::Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("nonempty cdf");
    let u = rng.random::<f64>() * total;
    let idx = cdf.partition_point(|&c| c <= u);
    idx.min(cdf.len() - 1)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Histogram over observed stream lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLengths {
    lengths: Vec<u32>,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl EmpiricalLengths {
    /// `weights` need not be normalized.
    pub fn new(lengths: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() != weights.len() {
            return Err(Error::invalid("empirical length histogram must be nonempty"));
        }
        if lengths.contains(&0) {
            return Err(Error::invalid("empirical lengths must be >= 1"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("empirical weights must be finite and nonnegative"));
        }
        let cdf = cumulative(&weights);
        if cdf.last().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::invalid("empirical histogram has zero total mass"));
        }
        Ok(EmpiricalLengths { lengths, weights, cdf })
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn probability(&self, length: u32) -> f64 {
        let total = self.cdf[self.cdf.len() - 1];
        self.lengths
            .iter()
            .zip(&self.weights)
            .filter(|(l, _)| **l == length)
            .map(|(_, w)| w / total)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        let total = self.cdf[self.cdf.len() - 1];
        self.lengths
            .iter()
            .zip(&self.weights)
            .map(|(&l, w)| l as f64 * w / total)
            .sum()
    }
}

/// Distribution of generated clickstream lengths. Every sample is clamped to >= 1.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthDistribution {
    Constant(u32),
    /// Number of trials up to and including the first success; mean `1/p`.
    Geometric { p: f64 },
    Poisson { lambda: f64 },
    /// Failures before the `r`-th success with success probability `p`.
    NegativeBinomial { r: f64, p: f64 },
    /// Normal draw rounded to the nearest integer.
    RoundedGaussian { mean: f64, std: f64 },
    Empirical(EmpiricalLengths),
}

impl LengthDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            LengthDistribution::Constant(l) => l >= 1,
            LengthDistribution::Geometric { p } => p > 0.0 && p <= 1.0,
            LengthDistribution::Poisson { lambda } => lambda > 0.0 && lambda.is_finite(),
            LengthDistribution::NegativeBinomial { r, p } => {
                r > 0.0 && r.is_finite() && p > 0.0 && p <= 1.0
            }
            LengthDistribution::RoundedGaussian { mean, std } => {
                mean.is_finite() && std.is_finite() && std >= 0.0
            }
            LengthDistribution::Empirical(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid length distribution `{self}`")))
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let raw: f64 = match *self {
            LengthDistribution::Constant(l) => l as f64,
            LengthDistribution::Geometric { p } => {
                if p >= 1.0 {
                    1.0
                } else {
                    Geometric::new(p).expect("validated").sample(rng) as f64 + 1.0
                }
            }
            LengthDistribution::Poisson { lambda } => {
                Poisson::new(lambda).expect("validated").sample(rng)
            }
            LengthDistribution::NegativeBinomial { r, p } => {
                if p >= 1.0 {
                    0.0
                } else {
                    // Gamma-Poisson mixture
                    let rate = Gamma::new(r, (1.0 - p) / p).expect("validated").sample(rng);
                    if rate > 0.0 {
                        Poisson::new(rate).expect("positive rate").sample(rng)
                    } else {
                        0.0
                    }
                }
            }
            LengthDistribution::RoundedGaussian { mean, std } => {
                Normal::new(mean, std).expect("validated").sample(rng).round()
            }
            LengthDistribution::Empirical(ref h) => h.lengths[sample_cdf(&h.cdf, rng)] as f64,
        };
        clamp_count(raw, 1)
    }
}

pub(crate) fn clamp_count(raw: f64, min: u32) -> u32 {
    if raw.is_nan() || raw < min as f64 {
        min
    } else if raw >= u32::MAX as f64 {
        u32::MAX
    } else {
        raw as u32
    }
}

impl fmt::Display for LengthDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthDistribution::Constant(l) => write!(f, "const:{l}"),
            LengthDistribution::Geometric { p } => write!(f, "geometric:{p}"),
            LengthDistribution::Poisson { lambda } => write!(f, "poisson:{lambda}"),
            LengthDistribution::NegativeBinomial { r, p } => write!(f, "negbin:{r},{p}"),
            LengthDistribution::RoundedGaussian { mean, std } => write!(f, "normal:{mean},{std}"),
            LengthDistribution::Empirical(h) => {
                write!(f, "empirical:")?;
                for (i, (l, w)) in h.lengths.iter().zip(&h.weights).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{l}={w}")?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn parse_params(s: &str, count: usize, what: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::invalid(format!("bad parameters `{s}` for {what}")))?;
    if values.len() != count {
        return Err(Error::invalid(format!(
            "{what} takes {count} parameter(s), got `{s}`"
        )));
    }
    Ok(values)
}

impl FromStr for LengthDistribution {
    type Err = Error;

    /// Accepts `const:L`, `geometric:p`, `poisson:lambda`, `negbin:r,p`,
    /// `normal:mean,std` and `empirical:len=weight,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("length distribution `{s}` is missing `kind:`")))?;
        let dist = match kind {
            "const" => LengthDistribution::Constant(
                params
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad constant length `{params}`")))?,
            ),
            "geometric" => LengthDistribution::Geometric {
                p: parse_params(params, 1, kind)?[0],
            },
            "poisson" => LengthDistribution::Poisson {
                lambda: parse_params(params, 1, kind)?[0],
            },
            "negbin" => {
                let v = parse_params(params, 2, kind)?;
                LengthDistribution::NegativeBinomial { r: v[0], p: v[1] }
            }
            "normal" => {
                let v = parse_params(params, 2, kind)?;
                LengthDistribution::RoundedGaussian { mean: v[0], std: v[1] }
            }
            "empirical" => {
                let mut lengths = Vec::new();
                let mut weights = Vec::new();
                for pair in params.split(',') {
                    let (l, w) = pair
                        .split_once('=')
                        .ok_or_else(|| Error::invalid(format!("bad histogram entry `{pair}`")))?;
                    lengths.push(
                        l.trim()
                            .parse()
                            .map_err(|_| Error::invalid(format!("bad length `{l}`")))?,
                    );
                    weights.push(
                        w.trim()
                            .parse()
                            .map_err(|_| Error::invalid(format!("bad weight `{w}`")))?,
                    );
                }
                LengthDistribution::Empirical(EmpiricalLengths::new(lengths, weights)?)
            }
            other => return Err(Error::invalid(format!("unknown length distribution `{other}`"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Distribution of the first item of a generated clickstream.
#[derive(Debug, Clone, PartialEq)]
pub enum StartDistribution {
    Uniform { n: usize },
    Weighted { probs: Vec<f64>, cdf: Vec<f64> },
}

impl StartDistribution {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("start distribution over zero items"));
        }
        Ok(StartDistribution::Uniform { n })
    }

    /// Normalizes nonnegative per-item weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("start weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("start weights have zero total mass"));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let cdf = cumulative(&probs);
        Ok(StartDistribution::Weighted { probs, cdf })
    }

    /// Every walk starts at `item`.
    pub fn point(item: ItemId, n: usize) -> Result<Self> {
        if item as usize >= n {
            return Err(Error::ItemOutOfRange { id: item as usize, n });
        }
        let mut w = vec![0.0; n];
        w[item as usize] = 1.0;
        Self::from_weights(w)
    }

    pub fn item_count(&self) -> usize {
        match self {
            StartDistribution::Uniform { n } => *n,
            StartDistribution::Weighted { probs, .. } => probs.len(),
        }
    }

    pub fn probability(&self, item: ItemId) -> f64 {
        match self {
            StartDistribution::Uniform { n } => {
                if (item as usize) < *n {
                    1.0 / *n as f64
                } else {
                    0.0
                }
            }
            StartDistribution::Weighted { probs, .. } => {
                probs.get(item as usize).copied().unwrap_or(0.0)
            }
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ItemId {
        match self {
            StartDistribution::Uniform { n } => rng.random_range(0..*n) as ItemId,
            StartDistribution::Weighted { cdf, .. } => sample_cdf(cdf, rng) as ItemId,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn sample_mean(dist: &LengthDistribution, n: usize, seed: u64) -> f64 {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| dist.sample(&mut rng) as f64).sum::<f64>() / n as f64
    }

    #[test]
    fn empirical_sample_mean_converges() {
        let d = LengthDistribution::Empirical(EmpiricalLengths::new(vec![3, 5], vec![2.0, 1.0]).unwrap());
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            let l = d.sample(&mut rng);
            assert!(l == 3 || l == 5);
        }
        let mean = sample_mean(&d, 100_000, 2);
        assert!((mean - 11.0 / 3.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn geometric_counts_trials() {
        let d = LengthDistribution::Geometric { p: 0.1 };
        let mean = sample_mean(&d, 200_000, 3);
        assert!((mean - 10.0).abs() < 0.2, "mean {mean}");
        assert_eq!(LengthDistribution::Geometric { p: 1.0 }.sample(&mut rng_from_seed(0)), 1);
    }

    #[test]
    fn poisson_and_negbin_means() {
        let p = sample_mean(&LengthDistribution::Poisson { lambda: 8.0 }, 200_000, 4);
        assert!((p - 8.0).abs() < 0.1, "poisson mean {p}");
        // failures before r successes: mean r(1-p)/p = 4 * 0.6 / 0.4 = 6; P(0) is small enough to ignore clamping
        let nb = sample_mean(&LengthDistribution::NegativeBinomial { r: 4.0, p: 0.4 }, 200_000, 5);
        assert!((nb - 6.0).abs() < 0.15, "negbin mean {nb}");
    }

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "const:7",
            "geometric:0.1",
            "poisson:3.5",
            "negbin:2,0.25",
            "normal:9,2",
            "empirical:3=2,5=1",
        ] {
            let d: LengthDistribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("const:0".parse::<LengthDistribution>().is_err());
        assert!("geometric:0".parse::<LengthDistribution>().is_err());
        assert!("normal:1".parse::<LengthDistribution>().is_err());
        assert!("zipf:1".parse::<LengthDistribution>().is_err());
        assert!("empirical:3=0".parse::<LengthDistribution>().is_err());
    }

    #[test]
    fn start_point_and_uniform() {
        let p = StartDistribution::point(2, 4).unwrap();
        let mut rng = rng_from_seed(0);
        assert!((0..100).all(|_| p.sample(&mut rng) == 2));
        assert!(StartDistribution::point(4, 4).is_err());
        let u = StartDistribution::uniform(4).unwrap();
        assert_eq!(u.probability(3), 0.25);
        assert!(StartDistribution::from_weights(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_weight_starts_never_drawn() {
        let d = StartDistribution::from_weights(vec![0.0, 1.0, 0.0, 3.0, 0.0]).unwrap();
        let mut rng = rng_from_seed(11);
        for _ in 0..10_000 {
            let s = d.sample(&mut rng);
            assert!(s == 1 || s == 3);
        }
    }

    proptest! {
        #[test]
        fn samples_are_at_least_one(mean in -50.0f64..50.0, std in 0.0f64..20.0, seed: u64) {
            let d = LengthDistribution::RoundedGaussian { mean, std };
            let mut rng = rng_from_seed(seed);
            for _ in 0..50 {
                prop_assert!(d.sample(&mut rng) >= 1);
            }
            let nb = LengthDistribution::NegativeBinomial { r: 0.5, p: 0.9 };
            prop_assert!(nb.sample(&mut rng) >= 1);
        }

        #[test]
        fn start_weights_normalize(weights in proptest::collection::vec(0.0f64..10.0, 1..30)) {
            prop_assume!(weights.iter().sum::<f64>() > 0.0);
            let n = weights.len();
            let d = StartDistribution::from_weights(weights).unwrap();
            let total: f64 = (0..n as u32).map(|i| d.probability(i)).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!((0..n as u32).all(|i| d.probability(i) >= 0.0));
        }
    }
}
