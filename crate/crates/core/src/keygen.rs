//! Seeded key generators for the four workload distributions.
//!
//! All randomness comes from [`SplitMix64`] so a workload is identified by
//! its parameters and seed alone, independent of platform and language.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

/// Bumped whenever a generator's output for fixed inputs changes.
pub const GENERATOR_VERSION: u32 = 1;

/// Above this universe size the Zipf sampler switches from a prefix table
/// to rejection-inversion.
pub const ZIPF_TABLE_LIMIT: u64 = 10_000_000;

/// SplitMix64 (Steele, Lea, Flood 2014), reference constants.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, bound)` by multiply-shift with rejection.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let mut m = self.next_u64() as u128 * bound as u128;
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = self.next_u64() as u128 * bound as u128;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Derives an independent stream for a sub-task.
    pub fn fork(seed: u64, salt: &[u64]) -> Self {
        let mut s = seed;
        for &x in salt {
            s = SplitMix64::new(s ^ x.wrapping_mul(0xd1b5_4a32_d192_ed03)).next_u64();
        }
        SplitMix64::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform,
    Zipf,
    Skewed,
    PreSorted,
}

impl Distribution {
    pub const ALL: [Distribution; 4] = [
        Distribution::Uniform,
        Distribution::Zipf,
        Distribution::Skewed,
        Distribution::PreSorted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Zipf => "zipf",
            Distribution::Skewed => "skewed",
            Distribution::PreSorted => "presorted",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| WorkloadError::UnknownDistribution(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("universe must be at least {min}, got {got}")]
    UniverseTooSmall { min: u64, got: u64 },
    #[error("zipf exponent must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error("skew window {0:?} must satisfy 0 <= lo < hi <= 1")]
    BadWindow((f64, f64)),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Window bounds for the skewed distribution, as fractions of the universe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewWindows {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Default for SkewWindows {
    fn default() -> Self {
        SkewWindows {
            a: (0.15, 0.25),
            b: (0.70, 0.80),
        }
    }
}

impl SkewWindows {
    fn check(&self) -> Result<(), WorkloadError> {
        for w in [self.a, self.b] {
            if !(0.0 <= w.0 && w.0 < w.1 && w.1 <= 1.0) {
                return Err(WorkloadError::BadWindow(w));
            }
        }
        Ok(())
    }

    /// Integer bounds `[lo, hi)` of a window inside `[0, universe)`; the
    /// fraction is quantised to millionths so the result is exact.
    pub fn bounds(window: (f64, f64), universe: u64) -> (u64, u64) {
        let scale = |f: f64| ((universe as u128 * (f * 1e6).round() as u128) / 1_000_000) as u64;
        let lo = scale(window.0);
        let hi = scale(window.1).max(lo + 1).min(universe);
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyWorkload {
    pub distribution: Distribution,
    pub universe: u64,
    pub seed: u64,
    /// Zipf exponent; recorded for every distribution, meaningful for Zipf.
    pub zipf_s: f64,
    pub keys: Vec<u64>,
}

impl KeyWorkload {
    pub fn count(&self) -> usize {
        self.keys.len()
    }

    /// Header line, then one decimal key per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# dist={} n={} U={} seed={} s={}",
            self.distribution,
            self.keys.len(),
            self.universe,
            self.seed,
            self.zipf_s
        )?;
        for k in &self.keys {
            writeln!(w, "{k}")?;
        }
        w.flush()
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, WorkloadError> {
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(parse_err(1, "missing header")),
        };
        let mut fields = std::collections::HashMap::new();
        let body = header
            .strip_prefix('#')
            .ok_or_else(|| parse_err(1, "header must start with `#`"))?;
        for item in body.split_whitespace() {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| parse_err(1, &format!("bad header field `{item}`")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| parse_err(1, &format!("header lacks `{k}`")))
        };
        let num = |k: &str| -> Result<u64, WorkloadError> {
            get(k)?
                .parse()
                .map_err(|_| parse_err(1, &format!("bad `{k}`")))
        };
        let distribution: Distribution = get("dist")?.parse()?;
        let n = num("n")? as usize;
        let universe = num("U")?;
        let seed = num("seed")?;
        let zipf_s: f64 = get("s")?.parse().map_err(|_| parse_err(1, "bad `s`"))?;
        let mut keys = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let k: u64 = t
                .parse()
                .map_err(|_| parse_err(i + 1, &format!("bad key `{t}`")))?;
            keys.push(k);
        }
        if keys.len() != n {
            return Err(parse_err(
                0,
                &format!("header says n={n}, found {} keys", keys.len()),
            ));
        }
        Ok(KeyWorkload {
            distribution,
            universe,
            seed,
            zipf_s,
            keys,
        })
    }
}

fn parse_err(line: usize, msg: &str) -> WorkloadError {
    WorkloadError::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn workload(
    distribution: Distribution,
    universe: u64,
    seed: u64,
    zipf_s: f64,
    keys: Vec<u64>,
) -> KeyWorkload {
    KeyWorkload {
        distribution,
        universe,
        seed,
        zipf_s,
        keys,
    }
}

pub fn gen_uniform(n: usize, universe: u64, seed: u64) -> Result<KeyWorkload, WorkloadError> {
    if universe == 0 {
        return Err(WorkloadError::UniverseTooSmall { min: 1, got: 0 });
    }
    let mut rng = SplitMix64::new(seed);
    let keys = (0..n).map(|_| rng.below(universe)).collect();
    Ok(workload(Distribution::Uniform, universe, seed, 1.0, keys))
}

/// Rank sampler for `P(r) ∝ r^(-s)`, `r ∈ 1..=n`.
pub enum ZipfSampler {
    Table(Vec<f64>),
    Rejection { n: f64, s: f64, t: f64 },
}

impl ZipfSampler {
    pub fn new(n: u64, s: f64) -> Result<Self, WorkloadError> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(WorkloadError::BadExponent(s));
        }
        if n == 0 {
            return Err(WorkloadError::UniverseTooSmall { min: 1, got: 0 });
        }
        Ok(if n <= ZIPF_TABLE_LIMIT {
            Self::table(n, s)
        } else {
            Self::rejection(n, s)
        })
    }

    /// Cumulative weights; a draw is the first rank whose prefix exceeds `u·total`.
    pub fn table(n: u64, s: f64) -> Self {
        let mut acc = 0.0;
        let cdf = (1..=n)
            .map(|r| {
                acc += (r as f64).powf(-s);
                acc
            })
            .collect();
        ZipfSampler::Table(cdf)
    }

    /// Rejection-inversion against the continuous envelope `x^(-s)`.
    pub fn rejection(n: u64, s: f64) -> Self {
        let nf = n as f64;
        let t = if s == 1.0 {
            1.0 + nf.ln()
        } else {
            (nf.powf(1.0 - s) - s) / (1.0 - s)
        };
        ZipfSampler::Rejection { n: nf, s, t }
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> u64 {
        match self {
            ZipfSampler::Table(cdf) => {
                let total = *cdf.last().unwrap();
                let u = rng.next_f64() * total;
                let i = cdf.partition_point(|&c| c <= u);
                (i.min(cdf.len() - 1) + 1) as u64
            }
            &ZipfSampler::Rejection { n, s, t } => loop {
                let pt = rng.next_f64() * t;
                let inv = if pt <= 1.0 {
                    pt
                } else if s == 1.0 {
                    (pt - 1.0).exp()
                } else {
                    (pt * (1.0 - s) + s).powf(1.0 / (1.0 - s))
                };
                let x = (inv + 1.0).floor().min(n);
                let mut ratio = x.powf(-s);
                if x > 1.0 {
                    ratio *= inv.powf(s);
                }
                if rng.next_f64() < ratio {
                    return x as u64;
                }
            },
        }
    }
}

pub fn gen_zipf(n: usize, universe: u64, s: f64, seed: u64) -> Result<KeyWorkload, WorkloadError> {
    let sampler = ZipfSampler::new(universe, s)?;
    let mut rng = SplitMix64::new(seed);
    let keys = (0..n).map(|_| sampler.sample(&mut rng) - 1).collect();
    Ok(workload(Distribution::Zipf, universe, seed, s, keys))
}

pub fn gen_skewed(n: usize, universe: u64, seed: u64) -> Result<KeyWorkload, WorkloadError> {
    gen_skewed_with(n, universe, seed, SkewWindows::default())
}

pub fn gen_skewed_with(
    n: usize,
    universe: u64,
    seed: u64,
    windows: SkewWindows,
) -> Result<KeyWorkload, WorkloadError> {
    if universe < 10 {
        return Err(WorkloadError::UniverseTooSmall {
            min: 10,
            got: universe,
        });
    }
    windows.check()?;
    let a = SkewWindows::bounds(windows.a, universe);
    let b = SkewWindows::bounds(windows.b, universe);
    let mut rng = SplitMix64::new(seed);
    let keys = (0..n)
        .map(|i| match i % 3 {
            0 => rng.below(universe),
            1 => a.0 + rng.below(a.1 - a.0),
            _ => b.0 + rng.below(b.1 - b.0),
        })
        .collect();
    Ok(workload(Distribution::Skewed, universe, seed, 1.0, keys))
}

/// `0..n` with the values at ⌊n/2⌋ random positions shuffled among
/// themselves.
pub fn gen_presorted(n: usize, seed: u64) -> KeyWorkload {
    let mut rng = SplitMix64::new(seed);
    let mut keys: Vec<u64> = (0..n as u64).collect();
    let m = n / 2;
    let mut positions: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + rng.below((n - i) as u64) as usize;
        positions.swap(i, j);
    }
    let chosen = &positions[..m];
    let mut values: Vec<u64> = chosen.iter().map(|&p| keys[p]).collect();
    for i in (1..values.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        values.swap(i, j);
    }
    for (&p, v) in chosen.iter().zip(values) {
        keys[p] = v;
    }
    workload(Distribution::PreSorted, (n as u64).max(1), seed, 1.0, keys)
}

/// Dispatches on `distribution`. Pre-sorted ignores `universe` and uses `0..n`.
pub fn generate(
    distribution: Distribution,
    n: usize,
    universe: u64,
    zipf_s: f64,
    windows: SkewWindows,
    seed: u64,
) -> Result<KeyWorkload, WorkloadError> {
    match distribution {
        Distribution::Uniform => gen_uniform(n, universe, seed),
        Distribution::Zipf => gen_zipf(n, universe, zipf_s, seed),
        Distribution::Skewed => gen_skewed_with(n, universe, seed, windows),
        Distribution::PreSorted => Ok(gen_presorted(n, seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_outputs() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(r.next_u64(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(r.next_u64(), 0x06c4_5d18_8009_454f);
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = SplitMix64::new(1);
        for bound in [1, 2, 3, 7, 1000, u64::MAX] {
            for _ in 0..1000 {
                assert!(r.below(bound) < bound);
            }
        }
        for _ in 0..1000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn uniform_basics() {
        assert!(gen_uniform(0, 10, 1).unwrap().keys.is_empty());
        assert!(gen_uniform(5, 0, 1).is_err());
        assert_eq!(
            gen_uniform(100, 50, 9).unwrap(),
            gen_uniform(100, 50, 9).unwrap()
        );
    }

    #[test]
    fn uniform_mean_within_three_standard_errors() {
        let n = 100_000;
        let u = 1u64 << 60;
        let w = gen_uniform(n, u, 42).unwrap();
        let mean = w.keys.iter().map(|&k| k as f64).sum::<f64>() / n as f64;
        let expected = (u - 1) as f64 / 2.0;
        let se = u as f64 / (12.0 * n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean}");
        assert!(w.keys.iter().all(|&k| k < u));
    }

    fn harmonic(n: u64, s: f64) -> f64 {
        (1..=n).map(|r| (r as f64).powf(-s)).sum()
    }

    #[test]
    fn zipf_single_point_and_bad_exponent() {
        assert!(gen_zipf(100, 1, 1.0, 3)
            .unwrap()
            .keys
            .iter()
            .all(|&k| k == 0));
        assert!(gen_zipf(1, 10, 0.0, 3).is_err());
        assert!(gen_zipf(1, 10, -1.0, 3).is_err());
    }

    #[test]
    fn zipf_rank_one_frequency() {
        let h = harmonic(10_000, 1.0);
        assert!((h - 9.7876).abs() < 1e-3);
        let n = 1_000_000;
        let w = gen_zipf(n, 10_000, 1.0, 5).unwrap();
        let ones = w.keys.iter().filter(|&&k| k == 0).count() as f64 / n as f64;
        assert!((ones * h - 1.0).abs() < 0.05, "frequency {ones}");
        assert!(w.keys.iter().all(|&k| k < 10_000));
    }

    #[test]
    fn zipf_rejection_path_matches_pmf() {
        for s in [1.0, 1.3, 0.7] {
            let sampler = ZipfSampler::rejection(10_000, s);
            let mut rng = SplitMix64::new(11);
            let n = 400_000;
            let mut counts = [0usize; 3];
            for _ in 0..n {
                let r = sampler.sample(&mut rng);
                assert!((1..=10_000).contains(&r));
                if r <= 3 {
                    counts[r as usize - 1] += 1;
                }
            }
            let h = harmonic(10_000, s);
            for (i, &c) in counts.iter().enumerate() {
                let p = ((i + 1) as f64).powf(-s) / h;
                let got = c as f64 / n as f64;
                assert!(
                    (got / p - 1.0).abs() < 0.05,
                    "s={s} rank {} got {got} want {p}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn skewed_windows() {
        let n = 300_000;
        let u = 1_000_000;
        let w = gen_skewed(n, u, 8).unwrap();
        for (i, &k) in w.keys.iter().enumerate() {
            match i % 3 {
                1 => assert!((150_000..250_000).contains(&k)),
                2 => assert!((700_000..800_000).contains(&k)),
                _ => assert!(k < u),
            }
        }
        let outside = w
            .keys
            .iter()
            .filter(|&&k| !(150_000..250_000).contains(&k) && !(700_000..800_000).contains(&k))
            .count() as f64
            / n as f64;
        let expected = 0.8 / 3.0;
        // binomial standard error on n/3 trials, scaled to n
        let se = (0.8f64 * 0.2 / (n as f64 / 3.0)).sqrt() / 3.0;
        assert!((outside - expected).abs() < 4.0 * se, "outside {outside}");
        assert!(gen_skewed(3, 9, 1).is_err());
        assert_eq!(
            gen_skewed(99, 100, 2).unwrap(),
            gen_skewed(99, 100, 2).unwrap()
        );
    }

    #[test]
    fn presorted_is_a_half_shuffle() {
        assert_eq!(gen_presorted(0, 1).keys, Vec::<u64>::new());
        assert_eq!(gen_presorted(1, 1).keys, vec![0]);
        let n = 100_000;
        let w = gen_presorted(n, 4);
        let mut sorted = w.keys.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n as u64).collect::<Vec<_>>());
        let fixed = w
            .keys
            .iter()
            .enumerate()
            .filter(|&(i, &k)| i as u64 == k)
            .count();
        assert!(fixed >= n - n / 2);
        // a uniform shuffle of m items has one fixed point on average
        assert!(fixed <= n - n / 2 + 10, "fixed {fixed}");
    }

    #[test]
    fn text_round_trip() {
        let w = gen_zipf(50, 1000, 1.2, 77).unwrap();
        let mut buf = Vec::new();
        w.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# dist=zipf n=50 U=1000 seed=77 s=1.2\n"));
        assert_eq!(KeyWorkload::read_from(&buf[..]).unwrap(), w);
        assert!(KeyWorkload::read_from(&b"# dist=zipf n=2 U=5 seed=1 s=1\n1\nx\n"[..]).is_err());
    }
}
