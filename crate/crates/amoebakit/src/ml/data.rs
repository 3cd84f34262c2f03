//! Labeled dataset generation (coefficient vectors and rasterized
//! images) plus the CSV persistence format.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::net::Shape;
use crate::genus::{
    centre_point_f0, exact_membership_torus, f0_threshold, genus_f0, genus_grid_scan, genus_l332,
    l332_thresholds, Level, TORUS_THETA_STEPS, TORUS_TOL,
};
use crate::presets::Preset;
use crate::raster::{downsample, rasterize, RasterImage};
use crate::sample::sample_amoeba;
use crate::{Error, Result, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    /// Config echo: how the dataset was produced.
    pub description: String,
}

impl DatasetMeta {
    pub fn manual(description: &str) -> Self {
        Self {
            description: description.to_string(),
        }
    }
}

/// Row-per-sample inputs with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub input_shape: Shape,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            input_shape: self.input_shape,
            meta: self.meta.clone(),
        }
    }

    /// Writes `# config:` comment, `c1..cn,label` header, then rows.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# config: {}", self.meta.description)?;
        let cols = self.input_shape.len();
        let header: Vec<String> = (1..=cols).map(|k| format!("c{k}")).collect();
        writeln!(out, "{},label", header.join(","))?;
        for (input, label) in self.inputs.iter().zip(&self.labels) {
            for v in input {
                write!(out, "{v:.17e},")?;
            }
            writeln!(out, "{label}")?;
        }
        Ok(())
    }

    pub fn from_csv(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path)?;
        let mut description = String::new();
        let mut inputs = Vec::new();
        let mut labels = Vec::new();
        let mut width: Option<usize> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(cfg) = rest.trim().strip_prefix("config:") {
                    description = cfg.trim().to_string();
                }
                continue;
            }
            if line.starts_with('c') || line.starts_with("label") {
                continue; // header
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 2 {
                return Err(Error::InvalidInput(format!("bad dataset row: {line}")));
            }
            let (feat, label_field) = fields.split_at(fields.len() - 1);
            let row: std::result::Result<Vec<f64>, _> =
                feat.iter().map(|f| f.trim().parse::<f64>()).collect();
            let row = row.map_err(|_| Error::InvalidInput(format!("bad feature in: {line}")))?;
            let label: usize = label_field[0]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad label in: {line}")))?;
            if let Some(w) = width {
                if w != row.len() {
                    return Err(Error::InvalidInput("ragged dataset rows".into()));
                }
            } else {
                width = Some(row.len());
            }
            inputs.push(row);
            labels.push(label);
        }
        let width = width.ok_or_else(|| Error::InvalidInput("empty dataset file".into()))?;
        Ok(Dataset {
            inputs,
            labels,
            input_shape: Shape::Flat(width),
            meta: DatasetMeta {
                description,
            },
        })
    }
}

/// Coefficient domain for generated inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffDomain {
    /// Uniform reals over the per-coefficient ranges.
    Real,
    /// Same draw as `Real`, absolute values as inputs.
    Abs,
    /// Uniform integers in `1..=hi`.
    PositiveInt,
}

impl CoeffDomain {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "real" => Some(Self::Real),
            "abs" => Some(Self::Abs),
            "posint" | "positive-int" => Some(Self::PositiveInt),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Real => "real",
            Self::Abs => "abs",
            Self::PositiveInt => "posint",
        }
    }
}

/// Per-coefficient sampling ranges used when the caller does not
/// override them: interior-point coefficients get the wide range.
pub fn default_ranges(preset: Preset) -> Vec<(f64, f64)> {
    match preset {
        Preset::F0 => vec![
            (-5.0, 5.0),
            (-5.0, 5.0),
            (-5.0, 5.0),
            (-5.0, 5.0),
            (-20.0, 20.0),
        ],
        Preset::L332 => vec![
            (-20.0, 20.0),
            (-5.0, 5.0),
            (-5.0, 5.0),
            (-5.0, 5.0),
            (-5.0, 5.0),
            (-20.0, 20.0),
        ],
        Preset::Cz2z4 => vec![(-30.0, 30.0); 15],
        Preset::K4532 => vec![(-30.0, 30.0); 11],
    }
}

#[derive(Debug, Clone)]
pub struct CoeffGenOptions {
    pub preset: Preset,
    pub ranges: Option<Vec<(f64, f64)>>,
    pub count: usize,
    pub level: Level,
    pub domain: CoeffDomain,
    pub balance: bool,
    /// Reject samples closer than this to an analytic decision threshold
    /// (square and `L^{3,3,2}` presets only; ignored elsewhere).
    pub margin: Option<f64>,
    pub seed: u64,
    /// Grid resolution when labels come from a scan.
    pub scan_resolution: usize,
}

impl CoeffGenOptions {
    pub fn new(preset: Preset, count: usize, seed: u64) -> Self {
        Self {
            preset,
            ranges: None,
            count,
            level: Level::Finite(1),
            domain: CoeffDomain::Real,
            balance: true,
            margin: None,
            seed,
            scan_resolution: 256,
        }
    }

    fn describe(&self) -> String {
        format!(
            "preset={} count={} level={} domain={} balance={} margin={:?} seed={}",
            self.preset.name(),
            self.count,
            self.level,
            self.domain.name(),
            self.balance,
            self.margin,
            self.seed
        )
    }
}

/// Label for one coefficient vector; `None` rejects the draw (degenerate
/// configuration for the analytic decider).
fn label_for(
    preset: Preset,
    coeffs: &[Complex64],
    level: Level,
    scan_resolution: usize,
) -> Result<Option<usize>> {
    match (preset, level) {
        (Preset::F0, Level::Finite(1)) => {
            let c: [Complex64; 5] = coeffs.try_into().expect("checked length");
            match genus_f0(&c) {
                Ok(g) => Ok(Some(g as usize)),
                Err(Error::Degenerate(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
        (Preset::F0, Level::Infinity) => {
            let c: [Complex64; 5] = coeffs.try_into().expect("checked length");
            let centre = match centre_point_f0(&c) {
                Ok(v) => v,
                Err(Error::Degenerate(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let p = preset.polynomial(coeffs)?;
            let member = exact_membership_torus(&p, centre, TORUS_THETA_STEPS, TORUS_TOL)?;
            Ok(Some(usize::from(!member)))
        }
        (Preset::L332, Level::Finite(1)) => {
            let c: [Complex64; 6] = coeffs.try_into().expect("checked length");
            match genus_l332(&c) {
                Ok(g) => Ok(Some(g as usize)),
                Err(Error::Degenerate(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
        _ => {
            let p = match preset.polynomial(coeffs) {
                Ok(p) => p,
                Err(_) => return Ok(None),
            };
            let report = genus_grid_scan(&p, level, Window::default_for(&p), scan_resolution)?;
            Ok(Some(report.genus))
        }
    }
}

fn margin_ok(preset: Preset, coeffs: &[Complex64], margin: f64) -> bool {
    match preset {
        Preset::F0 => {
            let c: [Complex64; 5] = coeffs.try_into().expect("checked length");
            (c[4].norm() - f0_threshold(&c)).abs() > margin
        }
        Preset::L332 => {
            let c: [Complex64; 6] = coeffs.try_into().expect("checked length");
            match l332_thresholds(&c) {
                Ok((a1, a2)) => {
                    (c[0].norm() - a1).abs() > margin && (c[5].norm() - a2).abs() > margin
                }
                Err(_) => false,
            }
        }
        _ => true,
    }
}

/// Draws labeled coefficient vectors, balancing classes by rejection
/// sampling when asked. Fails after a bounded number of attempts if a
/// class never fills.
pub fn gen_coeff_dataset(opts: &CoeffGenOptions) -> Result<Dataset> {
    let n = opts.preset.coeff_count();
    let ranges = match &opts.ranges {
        Some(r) => {
            if r.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{} ranges supplied, preset takes {n}",
                    r.len()
                )));
            }
            r.clone()
        }
        None => default_ranges(opts.preset),
    };
    let classes = opts.preset.max_genus() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut buckets: Vec<Vec<Vec<f64>>> = vec![Vec::new(); classes];
    let mut flat_inputs = Vec::new();
    let mut flat_labels = Vec::new();
    let per_class: Vec<usize> = (0..classes)
        .map(|k| opts.count / classes + usize::from(k < opts.count % classes))
        .collect();

    let max_attempts = 2000usize.saturating_mul(opts.count).max(100_000);
    let mut attempts = 0usize;
    while attempts < max_attempts {
        attempts += 1;
        let raw: Vec<f64> = ranges
            .iter()
            .map(|&(lo, hi)| match opts.domain {
                CoeffDomain::PositiveInt => rng.gen_range(1..=(hi.max(1.0) as i64)) as f64,
                _ => rng.gen_range(lo..hi),
            })
            .collect();
        let coeffs: Vec<Complex64> = raw.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        if let Some(margin) = opts.margin {
            if !margin_ok(opts.preset, &coeffs, margin) {
                continue;
            }
        }
        let Some(label) = label_for(opts.preset, &coeffs, opts.level, opts.scan_resolution)?
        else {
            continue;
        };
        let input: Vec<f64> = match opts.domain {
            CoeffDomain::Abs => raw.iter().map(|v| v.abs()).collect(),
            _ => raw,
        };
        if opts.balance {
            if label < classes && buckets[label].len() < per_class[label] {
                buckets[label].push(input);
                if buckets
                    .iter()
                    .zip(&per_class)
                    .all(|(b, &want)| b.len() >= want)
                {
                    break;
                }
            }
        } else {
            flat_inputs.push(input);
            flat_labels.push(label);
            if flat_inputs.len() >= opts.count {
                break;
            }
        }
    }

    let (inputs, labels) = if opts.balance {
        let filled: Vec<usize> = buckets.iter().map(Vec::len).collect();
        if filled
            .iter()
            .zip(&per_class)
            .any(|(&got, &want)| got < want)
        {
            return Err(Error::Generation(format!(
                "could not balance classes after {attempts} attempts (filled {filled:?}, wanted {per_class:?})"
            )));
        }
        let mut inputs = Vec::with_capacity(opts.count);
        let mut labels = Vec::with_capacity(opts.count);
        for (class, bucket) in buckets.into_iter().enumerate() {
            for input in bucket {
                inputs.push(input);
                labels.push(class);
            }
        }
        (inputs, labels)
    } else {
        if flat_inputs.len() < opts.count {
            return Err(Error::Generation(format!(
                "only {} of {} samples generated after {attempts} attempts",
                flat_inputs.len(),
                opts.count
            )));
        }
        (flat_inputs, flat_labels)
    };

    Ok(Dataset {
        inputs,
        labels,
        input_shape: Shape::Flat(n),
        meta: DatasetMeta {
            description: opts.describe(),
        },
    })
}

#[derive(Debug, Clone)]
pub struct ImageGenOptions {
    pub count_per_class: usize,
    /// Target resolutions, each at most `master_resolution`.
    pub resolutions: Vec<usize>,
    pub cloud_samples: u64,
    pub master_resolution: usize,
    pub seed: u64,
    pub draw_axes: bool,
}

impl ImageGenOptions {
    pub fn new(count_per_class: usize, resolutions: Vec<usize>, seed: u64) -> Self {
        Self {
            count_per_class,
            resolutions,
            cloud_samples: 3000,
            master_resolution: 512,
            seed,
            draw_axes: true,
        }
    }
}

/// Image datasets at several resolutions, sharing clouds and labels.
#[derive(Debug, Clone)]
pub struct ImageDataset {
    pub by_resolution: Vec<(usize, Dataset)>,
    pub coeffs: Vec<[f64; 5]>,
    pub labels: Vec<usize>,
}

/// Monte Carlo image dataset for the square polygon: positive real
/// coefficients, closed-form binary labels, one master rasterization per
/// cloud downsampled to every requested resolution.
pub fn gen_image_dataset(opts: &ImageGenOptions) -> Result<ImageDataset> {
    for &res in &opts.resolutions {
        if res > opts.master_resolution {
            return Err(Error::InvalidInput(format!(
                "resolution {res} exceeds master {}",
                opts.master_resolution
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x1a9e);
    let mut coeffs: Vec<[f64; 5]> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut per_class = [0usize; 2];
    let max_attempts = 10_000usize.max(400 * opts.count_per_class);
    let mut attempts = 0;
    while per_class.iter().any(|&c| c < opts.count_per_class) && attempts < max_attempts {
        attempts += 1;
        let c = [
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.05..5.0),
            rng.gen_range(0.05..20.0),
        ];
        let cc = c.map(|v| Complex64::new(v, 0.0));
        let label = genus_f0(&cc)? as usize;
        if per_class[label] < opts.count_per_class {
            per_class[label] += 1;
            coeffs.push(c);
            labels.push(label);
        }
    }
    if per_class.iter().any(|&c| c < opts.count_per_class) {
        return Err(Error::Generation(format!(
            "could not balance image classes after {attempts} attempts"
        )));
    }

    let mut masters: Vec<RasterImage> = Vec::with_capacity(coeffs.len());
    for (idx, c) in coeffs.iter().enumerate() {
        let p = Preset::F0.polynomial_real(c)?;
        let cloud = sample_amoeba(
            &p,
            opts.cloud_samples,
            crate::sample::DEFAULT_S_RANGE,
            opts.seed.wrapping_add(idx as u64),
            None,
        )?;
        masters.push(rasterize(
            &cloud,
            opts.master_resolution,
            Window::default_for(&p),
            opts.draw_axes,
        )?);
    }

    let mut by_resolution = Vec::new();
    for &res in &opts.resolutions {
        let mut inputs = Vec::with_capacity(masters.len());
        for master in &masters {
            inputs.push(downsample(master, res)?.pixels);
        }
        by_resolution.push((
            res,
            Dataset {
                inputs,
                labels: labels.clone(),
                input_shape: Shape::Spatial {
                    channels: 1,
                    height: res,
                    width: res,
                },
                meta: DatasetMeta {
                    description: format!(
                        "image preset=f0 res={res} per_class={} cloud_samples={} seed={}",
                        opts.count_per_class, opts.cloud_samples, opts.seed
                    ),
                },
            },
        ));
    }
    Ok(ImageDataset {
        by_resolution,
        coeffs,
        labels,
    })
}

/// Persists an image dataset as a PGM directory plus a manifest CSV
/// (`path,resolution,label` with a `# config:` header).
pub fn write_image_dataset(set: &ImageDataset, dir: &Path, config: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let manifest_path = dir.join("manifest.csv");
    let mut manifest = std::io::BufWriter::new(std::fs::File::create(manifest_path)?);
    writeln!(manifest, "# config: {config}")?;
    writeln!(manifest, "path,resolution,label")?;
    for (res, data) in &set.by_resolution {
        for (idx, input) in data.inputs.iter().enumerate() {
            let name = format!("img_{idx:05}_res{res}.pgm");
            let img = RasterImage {
                pixels: input.clone(),
                width: *res,
                height: *res,
                window: Window::square(1.0).expect("unit window"),
                axes_drawn: false,
                empty_overlap: false,
            };
            crate::raster::write_pgm(&img, &dir.join(&name))?;
            writeln!(manifest, "{name},{res},{}", data.labels[idx])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f0_real_dataset_balances_and_labels() {
        let opts = CoeffGenOptions {
            margin: Some(0.05),
            ..CoeffGenOptions::new(Preset::F0, 200, 9)
        };
        let data = gen_coeff_dataset(&opts).unwrap();
        assert_eq!(data.len(), 200);
        let ones = data.labels.iter().filter(|&&l| l == 1).count();
        assert_eq!(ones, 100);
        // Labels reproduce the closed form.
        for (input, &label) in data.inputs.iter().zip(&data.labels) {
            let c: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let c: [Complex64; 5] = c.try_into().unwrap();
            assert_eq!(genus_f0(&c).unwrap() as usize, label);
        }
    }

    #[test]
    fn positive_int_domain_draws_integers() {
        let opts = CoeffGenOptions {
            domain: CoeffDomain::PositiveInt,
            ..CoeffGenOptions::new(Preset::F0, 60, 4)
        };
        let data = gen_coeff_dataset(&opts).unwrap();
        for input in &data.inputs {
            for (k, &v) in input.iter().enumerate() {
                assert_eq!(v, v.round());
                assert!(v >= 1.0);
                let hi = if k == 4 { 20.0 } else { 5.0 };
                assert!(v <= hi);
            }
        }
    }

    #[test]
    fn abs_domain_no_negative_inputs() {
        let opts = CoeffGenOptions {
            domain: CoeffDomain::Abs,
            ..CoeffGenOptions::new(Preset::F0, 50, 5)
        };
        let data = gen_coeff_dataset(&opts).unwrap();
        assert!(data.inputs.iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn l332_three_class_balance() {
        let opts = CoeffGenOptions {
            margin: Some(0.05),
            ..CoeffGenOptions::new(Preset::L332, 90, 6)
        };
        let data = gen_coeff_dataset(&opts).unwrap();
        for class in 0..3 {
            assert_eq!(data.labels.iter().filter(|&&l| l == class).count(), 30);
        }
    }

    #[test]
    fn unbalanceable_request_errors() {
        // Positive integers with c5 <= 2 can never open the hole:
        // threshold is at least 4.
        let opts = CoeffGenOptions {
            domain: CoeffDomain::PositiveInt,
            ranges: Some(vec![
                (1.0, 2.0),
                (1.0, 2.0),
                (1.0, 2.0),
                (1.0, 2.0),
                (1.0, 2.0),
            ]),
            ..CoeffGenOptions::new(Preset::F0, 10, 3)
        };
        match gen_coeff_dataset(&opts) {
            Err(Error::Generation(_)) => {}
            other => panic!("expected generation error, got {other:?}"),
        }
    }

    #[test]
    fn csv_roundtrip() {
        let opts = CoeffGenOptions::new(Preset::F0, 30, 2);
        let data = gen_coeff_dataset(&opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        data.to_csv(&path).unwrap();
        let back = Dataset::from_csv(&path).unwrap();
        assert_eq!(back.inputs, data.inputs);
        assert_eq!(back.labels, data.labels);
        assert_eq!(back.meta.description, data.meta.description);
    }

    #[test]
    fn infinity_labels_agree_with_level_four_on_clear_margins() {
        let base = CoeffGenOptions {
            margin: Some(0.05),
            count: 60,
            ..CoeffGenOptions::new(Preset::F0, 60, 12)
        };
        let finite = gen_coeff_dataset(&base).unwrap();
        // Same draws, relabeled by the level-4 scan and the torus trick.
        let mut agree = 0;
        for input in &finite.inputs {
            let coeffs: Vec<Complex64> =
                input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let n4_label = label_for(Preset::F0, &coeffs, Level::Finite(4), 256)
                .unwrap()
                .unwrap();
            let inf_label = label_for(Preset::F0, &coeffs, Level::Infinity, 64)
                .unwrap()
                .unwrap();
            if inf_label == n4_label {
                agree += 1;
            }
        }
        // The level-4 approximation only misses very small true holes.
        assert!(agree * 100 >= finite.len() * 95, "agreement {agree}/60");
    }

    #[test]
    fn image_dataset_shapes_and_determinism() {
        let opts = ImageGenOptions {
            cloud_samples: 400,
            master_resolution: 64,
            ..ImageGenOptions::new(5, vec![2, 8, 32], 3)
        };
        let set = gen_image_dataset(&opts).unwrap();
        assert_eq!(set.by_resolution.len(), 3);
        for (res, data) in &set.by_resolution {
            assert_eq!(data.len(), 10);
            assert_eq!(data.inputs[0].len(), res * res);
        }
        let set2 = gen_image_dataset(&opts).unwrap();
        assert_eq!(set.by_resolution[2].1.inputs, set2.by_resolution[2].1.inputs);
    }
}
