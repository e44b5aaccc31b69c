//! Coincidence histograms: loading, background estimation, normalisation to
//! g⁽²⁾ and the detected pair rate.
//!
//! A histogram is a CSV file with header `tau_ns,counts` and a sidecar with
//! the same basename and a `.meta` suffix holding `key = value` lines.

use std::collections::BTreeMap;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::observables::{self, DetectionChain, GeneratedRate, Rate};

pub const CSV_HEADER: &str = "tau_ns,counts";
pub const META_KEYS: [&str; 8] = [
    "bin_width_ns",
    "accumulation_s",
    "singles_signal_per_s",
    "singles_probe_per_s",
    "d_s",
    "d_p",
    "fiber_factor",
    "saturation_corrected",
];
/// Allowed deviation of a bin step from `bin_width`, ns.
pub const BIN_TOLERANCE_NS: f64 = 1e-6;
pub const MIN_BACKGROUND_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    /// Bin start times, ns.
    pub bin_start: Vec<f64>,
    pub counts: Vec<u64>,
    /// ns.
    pub bin_width: f64,
    /// s.
    pub accumulation: f64,
    /// Detected singles, counts/s.
    pub singles_signal: f64,
    pub singles_probe: f64,
    pub chain: DetectionChain,
    pub saturation_corrected: bool,
}

impl CoincidenceHistogram {
    pub fn validate(&self) -> Result<()> {
        if self.bin_start.len() != self.counts.len() {
            return Err(Error::invalid("counts", "length differs from bin_start"));
        }
        if self.counts.is_empty() {
            return Err(Error::invalid("counts", "histogram is empty"));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::invalid("bin_width_ns", format!("{} is not > 0", self.bin_width)));
        }
        if !(self.accumulation > 0.0 && self.accumulation.is_finite()) {
            return Err(Error::invalid(
                "accumulation_s",
                format!("{} is not > 0", self.accumulation),
            ));
        }
        for (name, v) in [
            ("singles_signal_per_s", self.singles_signal),
            ("singles_probe_per_s", self.singles_probe),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} is not >= 0")));
            }
        }
        self.chain.validate()?;
        if let Some(i) = self.nonuniform_bin() {
            return Err(Error::invalid(
                "bin_start",
                format!(
                    "step {} -> {} is not {} ns",
                    self.bin_start[i - 1],
                    self.bin_start[i],
                    self.bin_width
                ),
            ));
        }
        Ok(())
    }

    fn nonuniform_bin(&self) -> Option<usize> {
        (1..self.bin_start.len())
            .find(|&i| ((self.bin_start[i] - self.bin_start[i - 1]) - self.bin_width).abs() > BIN_TOLERANCE_NS)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Centred moving average with window `width` (shrinks at the ends).
    pub fn smoothed_counts(&self, width: usize) -> Vec<f64> {
        moving_average(&self.counts.iter().map(|&c| c as f64).collect::<Vec<_>>(), width)
    }

    /// Bins of the coincidence peak: the contiguous run around the maximum
    /// of the 5-bin smoothed counts that stays above `median + 3√median`.
    /// `None` when nothing clears the threshold.
    pub fn peak_region(&self) -> Option<Range<usize>> {
        let smooth = self.smoothed_counts(5);
        let median = median(&self.counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        let threshold = median + 3.0 * median.sqrt();
        contiguous_above(&smooth, threshold)
    }

    /// The trailing quarter of the τ range.
    pub fn default_background_window(&self) -> (f64, f64) {
        let first = self.bin_start[0];
        let last = self.bin_start[self.len() - 1];
        (last - 0.25 * (last - first), last)
    }

    fn bins_in(&self, lo: f64, hi: f64) -> Range<usize> {
        let start = self.bin_start.partition_point(|&t| t < lo);
        let end = self.bin_start.partition_point(|&t| t <= hi);
        start..end.max(start)
    }
}

fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Contiguous run around the argmax of `values` where `values > threshold`.
fn contiguous_above(values: &[f64], threshold: f64) -> Option<Range<usize>> {
    let (peak, &max) =
        values.iter().enumerate().fold(
            (0, &f64::NEG_INFINITY),
            |best, (i, v)| if *v > *best.1 { (i, v) } else { best },
        );
    if !(max > threshold) {
        return None;
    }
    let mut lo = peak;
    while lo > 0 && values[lo - 1] > threshold {
        lo -= 1;
    }
    let mut hi = peak + 1;
    while hi < values.len() && values[hi] > threshold {
        hi += 1;
    }
    Some(lo..hi)
}

fn parse_err(path: &Path, line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        key: key.map(str::to_owned),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Sidecar path: the histogram path with its extension replaced by `meta`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(path: &Path, text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, Some(i + 1), None, "expected `key = value`"))?;
        let key = key.trim().to_owned();
        if out.insert(key.clone(), (i + 1, value.trim().to_owned())).is_some() {
            return Err(parse_err(
                path,
                Some(i + 1),
                Some(&key),
                format!("duplicate key `{key}`"),
            ));
        }
    }
    Ok(out)
}

struct Meta {
    bin_width: f64,
    accumulation: f64,
    singles_signal: f64,
    singles_probe: f64,
    chain: DetectionChain,
    saturation_corrected: bool,
}

fn parse_meta(path: &Path) -> Result<Meta> {
    let text = read(path)?;
    let map = parse_key_values(path, &text)?;
    if let Some((key, (line, _))) = map.iter().find(|(k, _)| !META_KEYS.contains(&k.as_str())) {
        return Err(parse_err(path, Some(*line), Some(key), format!("unknown key `{key}`")));
    }
    let get = |key: &str| -> Result<&(usize, String)> {
        map.get(key)
            .ok_or_else(|| parse_err(path, None, Some(key), format!("missing key `{key}`")))
    };
    let num = |key: &str| -> Result<f64> {
        let (line, v) = get(key)?;
        v.parse::<f64>()
            .map_err(|_| parse_err(path, Some(*line), Some(key), format!("`{v}` is not a number")))
    };
    let corrected = {
        let (line, v) = get("saturation_corrected")?;
        match v.as_str() {
            "true" => true,
            "false" => false,
            _ => {
                return Err(parse_err(
                    path,
                    Some(*line),
                    Some("saturation_corrected"),
                    format!("`{v}` is not true/false"),
                ))
            }
        }
    };
    Ok(Meta {
        bin_width: num("bin_width_ns")?,
        accumulation: num("accumulation_s")?,
        singles_signal: num("singles_signal_per_s")?,
        singles_probe: num("singles_probe_per_s")?,
        chain: DetectionChain {
            d_s: num("d_s")?,
            d_p: num("d_p")?,
            fiber_factor: num("fiber_factor")?,
        },
        saturation_corrected: corrected,
    })
}

pub fn load_histogram(path: &Path) -> Result<CoincidenceHistogram> {
    let text = read(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(parse_err(
                path,
                Some(1),
                None,
                format!("expected header `{CSV_HEADER}`"),
            ))
        }
    }
    let mut bin_start = Vec::new();
    let mut counts = Vec::new();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || parse_err(path, Some(i + 1), None, format!("malformed row `{line}`"));
        let (t, c) = line.split_once(',').ok_or_else(bad)?;
        let t: f64 = t.trim().parse().map_err(|_| bad())?;
        let c: u64 = c.trim().parse().map_err(|_| bad())?;
        if !t.is_finite() {
            return Err(bad());
        }
        bin_start.push(t);
        counts.push(c);
    }

    let meta_file = meta_path(path);
    let meta = parse_meta(&meta_file)?;
    let h = CoincidenceHistogram {
        bin_start,
        counts,
        bin_width: meta.bin_width,
        accumulation: meta.accumulation,
        singles_signal: meta.singles_signal,
        singles_probe: meta.singles_probe,
        chain: meta.chain,
        saturation_corrected: meta.saturation_corrected,
    };
    if let Some(i) = h.nonuniform_bin() {
        return Err(parse_err(
            path,
            Some(i + 2),
            None,
            format!("bin step is not {} ns", h.bin_width),
        ));
    }
    h.validate()
        .map_err(|e| parse_err(&meta_file, None, None, e.to_string()))?;
    Ok(h)
}

/// Writes the CSV and its sidecar. Numbers use shortest round-trip formatting,
/// so a reload is bit-identical.
pub fn save_histogram(h: &CoincidenceHistogram, path: &Path) -> Result<()> {
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (t, c) in h.bin_start.iter().zip(&h.counts) {
        csv.push_str(&format!("{t},{c}\n"));
    }
    let meta = format!(
        "bin_width_ns = {}\naccumulation_s = {}\nsingles_signal_per_s = {}\nsingles_probe_per_s = {}\n\
         d_s = {}\nd_p = {}\nfiber_factor = {}\nsaturation_corrected = {}\n",
        h.bin_width,
        h.accumulation,
        h.singles_signal,
        h.singles_probe,
        h.chain.d_s,
        h.chain.d_p,
        h.chain.fiber_factor,
        h.saturation_corrected
    );
    let write = |p: &Path, s: &str| {
        fs::write(p, s).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    write(path, &csv)?;
    write(&meta_path(path), &meta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    /// Mean counts per bin.
    pub per_bin: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// Sample standard deviation of a single bin.
    pub bin_sigma: f64,
    pub bins: usize,
}

/// Mean counts per bin over `window` (ns, inclusive; `None` for the trailing
/// quarter). The window must hold at least 50 bins and must not touch the
/// peak region.
pub fn estimate_background(h: &CoincidenceHistogram, window: Option<(f64, f64)>) -> Result<Background> {
    let (lo, hi) = window.unwrap_or_else(|| h.default_background_window());
    let bins = h.bins_in(lo, hi);
    if bins.len() < MIN_BACKGROUND_BINS {
        return Err(Error::WindowTooSmall {
            bins: bins.len(),
            required: MIN_BACKGROUND_BINS,
        });
    }
    if let Some(peak) = h.peak_region() {
        if bins.start < peak.end && peak.start < bins.end {
            let smooth = h.smoothed_counts(5);
            let top = peak
                .clone()
                .max_by(|&a, &b| smooth[a].total_cmp(&smooth[b]))
                .unwrap_or(peak.start);
            return Err(Error::WindowOverlapsPeak {
                lo,
                hi,
                peak: h.bin_start[top],
            });
        }
    }
    let values: Vec<f64> = h.counts[bins].iter().map(|&c| c as f64).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Background {
        per_bin: mean,
        stderr: (var / n).sqrt(),
        bin_sigma: var.sqrt(),
        bins: values.len(),
    })
}

/// Background-normalised cross-correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    /// ns.
    pub tau: Vec<f64>,
    pub g2: Vec<f64>,
    pub background_counts_per_bin: f64,
}

pub fn to_g2(h: &CoincidenceHistogram, background: f64) -> Result<G2Curve> {
    if !(background > 0.0 && background.is_finite()) {
        return Err(Error::invalid("background", format!("{background} is not > 0")));
    }
    Ok(G2Curve {
        tau: h.bin_start.clone(),
        g2: h.counts.iter().map(|&c| c as f64 / background).collect(),
        background_counts_per_bin: background,
    })
}

/// How the integration window for the pair area is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportRule {
    /// Moving-average width applied to g⁽²⁾ before thresholding.
    pub smoothing: usize,
    /// Threshold in units of the noise of the smoothed g⁽²⁾.
    pub sigmas: f64,
}

impl Default for SupportRule {
    fn default() -> Self {
        SupportRule {
            smoothing: 5,
            sigmas: 3.0,
        }
    }
}

impl SupportRule {
    /// Contiguous bins around the peak where the smoothed g⁽²⁾ exceeds
    /// `1 + sigmas · σ_bin / (B √smoothing)`.
    pub fn support(&self, h: &CoincidenceHistogram, bg: &Background) -> Result<Range<usize>> {
        let width = self.smoothing.max(1);
        let g2 = h
            .smoothed_counts(width)
            .iter()
            .map(|c| c / bg.per_bin)
            .collect::<Vec<_>>();
        let threshold = 1.0 + self.sigmas * bg.bin_sigma / (bg.per_bin * (width as f64).sqrt());
        contiguous_above(&g2, threshold).ok_or(Error::NoWavePacket)
    }
}

/// Background-subtracted coincidences per second over the support window.
pub fn detected_pair_rate(h: &CoincidenceHistogram, bg: &Background, rule: &SupportRule) -> Result<f64> {
    if !(bg.per_bin > 0.0) {
        return Err(Error::invalid("background", format!("{} is not > 0", bg.per_bin)));
    }
    let support = rule.support(h, bg)?;
    let area: f64 = h.counts[support].iter().map(|&c| c as f64 - bg.per_bin).sum();
    Ok(area / h.accumulation)
}

/// Everything derived from one histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramAnalysis {
    pub background: Background,
    pub g2: G2Curve,
    pub sbr: f64,
    /// `None` when no wave packet clears the support threshold.
    pub detected_rate: Option<f64>,
    pub generated: Option<GeneratedRate>,
    pub h_p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisOptions {
    pub background_window: Option<(f64, f64)>,
    pub support: SupportRule,
    /// Report only ratios (SBR) and relative rates; skips the saturation check.
    pub relative_only: bool,
}

pub fn analyze(h: &CoincidenceHistogram, options: &AnalysisOptions) -> Result<HistogramAnalysis> {
    if !options.relative_only && !h.saturation_corrected {
        return Err(Error::UncorrectedRates);
    }
    let background = estimate_background(h, options.background_window)?;
    let g2 = to_g2(h, background.per_bin)?;
    let sbr = observables::sbr_from_g2(&g2)?;
    let detected_rate = match detected_pair_rate(h, &background, &options.support) {
        Ok(r) => Some(r),
        Err(Error::NoWavePacket) => None,
        Err(e) => return Err(e),
    };
    let generated = match detected_rate {
        Some(r) => Some(observables::detected_to_generated(r, &h.chain)?),
        None => None,
    };
    let h_p = match (generated, options.relative_only) {
        (Some(g), false) if h.singles_signal > 0.0 => Some(observables::heralding_probability(
            Rate::absolute(g.fiber),
            Rate::absolute(h.singles_signal / h.chain.d_s),
        )?),
        _ => None,
    };
    Ok(HistogramAnalysis {
        background,
        g2,
        sbr,
        detected_rate,
        generated,
        h_p,
    })
}

pub mod synthetic {
    //! Histogram generator with a known injected pair count.

    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Poisson};

    use super::CoincidenceHistogram;
    use crate::observables::DetectionChain;

    /// Rise-then-decay pulse starting at `onset_ns`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct PulseShape {
        pub onset_ns: f64,
        pub rise_ns: f64,
        pub decay_ns: f64,
    }

    impl PulseShape {
        pub fn at(&self, t_ns: f64) -> f64 {
            let t = t_ns - self.onset_ns;
            if t <= 0.0 {
                0.0
            } else {
                (1.0 - (-t / self.rise_ns).exp()) * (-t / self.decay_ns).exp()
            }
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct HistogramSpec {
        pub bins: usize,
        pub bin_width_ns: f64,
        pub start_ns: f64,
        pub accumulation_s: f64,
        pub background_per_bin: f64,
        /// Total injected pair coincidences.
        pub pairs: f64,
        pub shape: PulseShape,
        pub singles_signal_per_s: f64,
        pub singles_probe_per_s: f64,
        pub chain: DetectionChain,
        pub saturation_corrected: bool,
    }

    impl HistogramSpec {
        /// 0.8 ns bins over 120 s, background 20 per bin, a 60 ns-scale pulse.
        pub fn reference() -> Self {
            HistogramSpec {
                bins: 1000,
                bin_width_ns: 0.8,
                start_ns: -200.0,
                accumulation_s: 120.0,
                background_per_bin: 20.0,
                pairs: 1.0e5,
                shape: PulseShape {
                    onset_ns: 0.0,
                    rise_ns: 4.0,
                    decay_ns: 45.0,
                },
                singles_signal_per_s: 1.0e5,
                singles_probe_per_s: 1.0e5,
                chain: DetectionChain {
                    d_s: 0.13,
                    d_p: 0.094,
                    fiber_factor: DetectionChain::DEFAULT_FIBER_FACTOR,
                },
                saturation_corrected: true,
            }
        }

        pub fn bin_start(&self, k: usize) -> f64 {
            self.start_ns + k as f64 * self.bin_width_ns
        }

        /// Pulse weight of each bin (midpoint rule), summing to 1.
        pub fn weights(&self) -> Vec<f64> {
            let raw: Vec<f64> = (0..self.bins)
                .map(|k| self.shape.at(self.bin_start(k) + 0.5 * self.bin_width_ns))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|w| w / total).collect()
        }

        /// Expected counts per bin.
        pub fn expected(&self) -> Vec<f64> {
            self.weights()
                .iter()
                .map(|w| self.background_per_bin + self.pairs * w)
                .collect()
        }

        /// Pair total that puts the expected peak bin at `peak_excess`
        /// counts above background.
        pub fn pairs_for_peak(&self, peak_excess: f64) -> f64 {
            let max = self.weights().into_iter().fold(0.0, f64::max);
            peak_excess / max
        }

        /// Injected pair rate, coincidences per second.
        pub fn pair_rate(&self) -> f64 {
            self.pairs / self.accumulation_s
        }

        fn assemble(&self, counts: Vec<u64>) -> CoincidenceHistogram {
            CoincidenceHistogram {
                bin_start: (0..self.bins).map(|k| self.bin_start(k)).collect(),
                counts,
                bin_width: self.bin_width_ns,
                accumulation: self.accumulation_s,
                singles_signal: self.singles_signal_per_s,
                singles_probe: self.singles_probe_per_s,
                chain: self.chain,
                saturation_corrected: self.saturation_corrected,
            }
        }

        /// Expected counts rounded to the nearest integer.
        pub fn noiseless(&self) -> CoincidenceHistogram {
            self.assemble(self.expected().iter().map(|&e| e.round() as u64).collect())
        }

        /// Poisson counts from a fixed seed.
        pub fn poisson(&self, seed: u64) -> CoincidenceHistogram {
            let mut rng = StdRng::seed_from_u64(seed);
            let counts = self
                .expected()
                .iter()
                .map(|&lambda| match Poisson::new(lambda) {
                    Ok(d) => d.sample(&mut rng) as u64,
                    Err(_) => 0,
                })
                .collect();
            self.assemble(counts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::synthetic::HistogramSpec;
    use super::*;
    use tempfile::tempdir;

    fn flat(level: u64, bins: usize) -> CoincidenceHistogram {
        HistogramSpec {
            bins,
            pairs: 0.0,
            background_per_bin: level as f64,
            ..HistogramSpec::reference()
        }
        .noiseless()
    }

    fn write_pair(dir: &Path, csv: &str, meta: &str) -> PathBuf {
        let path = dir.join("h.csv");
        fs::write(&path, csv).unwrap();
        fs::write(meta_path(&path), meta).unwrap();
        path
    }

    const META: &str = "bin_width_ns = 0.8\naccumulation_s = 120\nsingles_signal_per_s = 1e5\n\
        singles_probe_per_s = 1e5\nd_s = 0.13\nd_p = 0.094\nfiber_factor = 1.9\nsaturation_corrected = true\n";

    #[test]
    fn loads_minimal_file() {
        let dir = tempdir().unwrap();
        let path = write_pair(dir.path(), "tau_ns,counts\n0.0,5\n0.8,7\n", META);
        let h = load_histogram(&path).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.counts, [5, 7]);
        assert!(h.saturation_corrected);
    }

    #[test]
    fn rejects_nonuniform_bins_and_bad_rows() {
        let dir = tempdir().unwrap();
        let path = write_pair(dir.path(), "tau_ns,counts\n0.0,5\n1.0,7\n", META);
        assert!(matches!(load_histogram(&path), Err(Error::Parse { line: Some(3), .. })));
        let path = write_pair(dir.path(), "tau_ns,counts\n0.0,5\n0.8,-7\n", META);
        assert!(matches!(load_histogram(&path), Err(Error::Parse { line: Some(3), .. })));
        let path = write_pair(dir.path(), "time,counts\n0.0,5\n", META);
        assert!(matches!(load_histogram(&path), Err(Error::Parse { line: Some(1), .. })));
    }

    #[test]
    fn missing_and_unknown_meta_keys() {
        let dir = tempdir().unwrap();
        let meta = META.replace("d_p = 0.094\n", "");
        let path = write_pair(dir.path(), "tau_ns,counts\n0.0,5\n", &meta);
        match load_histogram(&path) {
            Err(Error::Parse { key: Some(k), .. }) => assert_eq!(k, "d_p"),
            other => panic!("{other:?}"),
        }
        let path = write_pair(dir.path(), "tau_ns,counts\n0.0,5\n", &format!("{META}colour = red\n"));
        assert!(matches!(load_histogram(&path), Err(Error::Parse { key: Some(_), .. })));
    }

    #[test]
    fn save_load_round_trip_is_bit_identical() {
        let dir = tempdir().unwrap();
        let h = HistogramSpec::reference().poisson(7);
        let path = dir.path().join("rt.csv");
        save_histogram(&h, &path).unwrap();
        let back = load_histogram(&path).unwrap();
        assert_eq!(back, h);
        let first = fs::read(&path).unwrap();
        save_histogram(&back, &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    #[test]
    fn constant_histogram_background_and_g2() {
        let h = flat(17, 400);
        assert!(h.peak_region().is_none());
        let bg = estimate_background(&h, None).unwrap();
        assert_eq!(bg.per_bin, 17.0);
        assert_eq!(bg.stderr, 0.0);
        let bg = estimate_background(&h, Some((-200.0, -100.0))).unwrap();
        assert_eq!(bg.per_bin, 17.0);
        let g2 = to_g2(&h, bg.per_bin).unwrap();
        assert!(g2.g2.iter().all(|&g| g == 1.0));
        assert!(to_g2(&h, 0.0).is_err());
        assert!(matches!(
            detected_pair_rate(&h, &bg, &SupportRule::default()),
            Err(Error::NoWavePacket)
        ));
    }

    #[test]
    fn poisson_background_mean() {
        let spec = HistogramSpec {
            bins: 500,
            pairs: 0.0,
            ..HistogramSpec::reference()
        };
        let h = spec.poisson(11);
        let window = (h.bin_start[0], h.bin_start[499]);
        let bg = estimate_background(&h, Some(window)).unwrap();
        assert!((bg.per_bin - 20.0).abs() < 3.0 * bg.stderr, "{bg:?}");
    }

    #[test]
    fn background_window_checks() {
        let h = HistogramSpec::reference().noiseless();
        assert!(matches!(
            estimate_background(&h, Some((500.0, 520.0))),
            Err(Error::WindowTooSmall { .. })
        ));
        assert!(matches!(
            estimate_background(&h, Some((-50.0, 100.0))),
            Err(Error::WindowOverlapsPeak { .. })
        ));
    }

    #[test]
    fn peak_bin_sets_sbr() {
        let mut spec = HistogramSpec::reference();
        spec.pairs = spec.pairs_for_peak(248.0);
        let h = spec.noiseless();
        let bg = estimate_background(&h, None).unwrap();
        assert_eq!(bg.per_bin, 20.0);
        let g2 = to_g2(&h, bg.per_bin).unwrap();
        let sbr = observables::sbr_from_g2(&g2).unwrap();
        assert!((sbr - 12.4).abs() < 1e-12, "{sbr}");
    }

    #[test]
    fn noiseless_pair_rate_and_linearity() {
        let spec = HistogramSpec::reference();
        let h = spec.noiseless();
        let bg = estimate_background(&h, None).unwrap();
        let rule = SupportRule::default();
        let rate = detected_pair_rate(&h, &bg, &rule).unwrap();
        assert!((rate - spec.pair_rate()).abs() / spec.pair_rate() < 0.01, "{rate}");

        let doubled = CoincidenceHistogram {
            accumulation: 2.0 * h.accumulation,
            ..h.clone()
        };
        assert_eq!(detected_pair_rate(&doubled, &bg, &rule).unwrap(), rate / 2.0);

        let shifted = CoincidenceHistogram {
            counts: h.counts.iter().map(|c| c + 13).collect(),
            ..h.clone()
        };
        let bg2 = estimate_background(&shifted, None).unwrap();
        let rate2 = detected_pair_rate(&shifted, &bg2, &rule).unwrap();
        assert!((rate2 - rate).abs() <= 1e-12 * rate);
    }

    #[test]
    fn analysis_refuses_uncorrected_absolute_rates() {
        let spec = HistogramSpec {
            saturation_corrected: false,
            ..HistogramSpec::reference()
        };
        let h = spec.noiseless();
        assert!(matches!(
            analyze(&h, &AnalysisOptions::default()),
            Err(Error::UncorrectedRates)
        ));
        let relative = AnalysisOptions {
            relative_only: true,
            ..Default::default()
        };
        let a = analyze(&h, &relative).unwrap();
        assert!(a.sbr > 0.0 && a.h_p.is_none());
    }

    #[test]
    fn flat_histogram_analysis() {
        let a = analyze(&flat(20, 400), &AnalysisOptions::default()).unwrap();
        assert_eq!(a.sbr, 0.0);
        assert!(a.detected_rate.is_none());
    }
}
