//! Rasterization of point clouds to square grayscale images, power-of-two
//! downsampling, and binary PGM I/O.

use std::io::{Read, Write};
use std::path::Path;

use crate::genus::MembershipMask;
use crate::sample::PointCloud;
use crate::{Error, Result, Window};

/// Square grayscale image over a Log-plane window. Pixels are row-major
/// with row 0 at the top (`y = y_max`), values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub pixels: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub window: Window,
    pub axes_drawn: bool,
    /// Set when no cloud point landed inside the window.
    pub empty_overlap: bool,
}

impl RasterImage {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }
}

/// Pixel fill rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterMode {
    /// Pixel is 1 when any point lands in its bin.
    Binary,
    /// Pixel value proportional to bin count, normalized to the busiest
    /// bin.
    Density,
}

/// Bins a cloud into a `resolution^2` image. Points outside the window
/// are skipped; an all-miss overlap is flagged rather than an error.
/// With `draw_axes`, one-pixel lines mark `x = 0` and `y = 0` when the
/// origin's row/column intersects the window.
pub fn rasterize(
    cloud: &PointCloud,
    resolution: usize,
    window: Window,
    draw_axes: bool,
) -> Result<RasterImage> {
    rasterize_mode(cloud, resolution, window, draw_axes, RasterMode::Binary)
}

pub fn rasterize_mode(
    cloud: &PointCloud,
    resolution: usize,
    window: Window,
    draw_axes: bool,
    mode: RasterMode,
) -> Result<RasterImage> {
    if resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    if cloud.is_empty() {
        return Err(Error::InvalidInput("empty point cloud".into()));
    }
    let res = resolution;
    let mut counts = vec![0u32; res * res];
    let mut hits = 0usize;
    for &(x, y) in &cloud.points {
        if !window.contains((x, y)) {
            continue;
        }
        let col = bin_index(x, window.x.0, window.x.1, res);
        let row_up = bin_index(y, window.y.0, window.y.1, res);
        // Image rows grow downward.
        let row = res - 1 - row_up;
        counts[row * res + col] += 1;
        hits += 1;
    }
    let max_count = counts.iter().copied().max().unwrap_or(0).max(1);
    let mut pixels: Vec<f64> = counts
        .iter()
        .map(|&c| match mode {
            RasterMode::Binary => f64::from(c > 0),
            RasterMode::Density => f64::from(c) / f64::from(max_count),
        })
        .collect();

    if draw_axes {
        if window.x.0 <= 0.0 && 0.0 <= window.x.1 {
            let col = bin_index(0.0, window.x.0, window.x.1, res);
            for row in 0..res {
                pixels[row * res + col] = 1.0;
            }
        }
        if window.y.0 <= 0.0 && 0.0 <= window.y.1 {
            let row = res - 1 - bin_index(0.0, window.y.0, window.y.1, res);
            for col in 0..res {
                pixels[row * res + col] = 1.0;
            }
        }
    }

    Ok(RasterImage {
        pixels,
        width: res,
        height: res,
        window,
        axes_drawn: draw_axes,
        empty_overlap: hits == 0,
    })
}

fn bin_index(v: f64, lo: f64, hi: f64, res: usize) -> usize {
    let t = (v - lo) / (hi - lo);
    ((t * res as f64) as usize).min(res - 1)
}

/// Converts a genus-scan membership mask (row 0 at the bottom) into an
/// image (row 0 at the top).
pub fn image_from_mask(mask: &MembershipMask) -> RasterImage {
    let res = mask.resolution;
    let mut pixels = vec![0.0; res * res];
    for r in 0..res {
        for c in 0..res {
            pixels[(res - 1 - r) * res + c] = f64::from(mask.get(r, c));
        }
    }
    RasterImage {
        pixels,
        width: res,
        height: res,
        window: mask.window,
        axes_drawn: false,
        empty_overlap: mask.member_count() == 0,
    }
}

/// Area-average pooling to `target x target`. Supports any target up to
/// the source resolution; non-divisor targets average fractional pixel
/// overlaps.
pub fn downsample(img: &RasterImage, target: usize) -> Result<RasterImage> {
    if target > img.width {
        return Err(Error::InvalidInput(format!(
            "target {target} exceeds source resolution {}",
            img.width
        )));
    }
    if target == 0 {
        return Err(Error::InvalidInput("target resolution must be positive".into()));
    }
    let src = img.width;
    let ratio = src as f64 / target as f64;
    let mut pixels = vec![0.0; target * target];
    for tr in 0..target {
        let y0 = tr as f64 * ratio;
        let y1 = (tr + 1) as f64 * ratio;
        for tc in 0..target {
            let x0 = tc as f64 * ratio;
            let x1 = (tc + 1) as f64 * ratio;
            let mut acc = 0.0;
            for sr in y0.floor() as usize..(y1.ceil() as usize).min(src) {
                let hy = overlap(y0, y1, sr);
                for sc in x0.floor() as usize..(x1.ceil() as usize).min(src) {
                    let hx = overlap(x0, x1, sc);
                    acc += hy * hx * img.get(sr, sc);
                }
            }
            pixels[tr * target + tc] = acc / (ratio * ratio);
        }
    }
    Ok(RasterImage {
        pixels,
        width: target,
        height: target,
        window: img.window,
        axes_drawn: img.axes_drawn,
        empty_overlap: img.empty_overlap,
    })
}

fn overlap(lo: f64, hi: f64, idx: usize) -> f64 {
    let a = (idx as f64).max(lo);
    let b = ((idx + 1) as f64).min(hi);
    (b - a).max(0.0)
}

/// Writes binary PGM (`P5`, maxval 255, row-major). Round-trips exactly
/// at 8-bit quantization.
pub fn write_pgm(img: &RasterImage, path: &Path) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    bytes.extend(img.pixels.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a binary PGM written by [`write_pgm`] (or any `P5` file with
/// maxval <= 255). Parse failures carry the byte offset.
pub fn read_pgm(path: &Path) -> Result<RasterImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<RasterImage> {
    let mut pos = 0usize;
    let expect = |pos: &mut usize, what: &str| -> Result<u8> {
        let b = bytes.get(*pos).copied().ok_or_else(|| Error::Parse {
            offset: *pos,
            msg: format!("unexpected end of file while reading {what}"),
        })?;
        *pos += 1;
        Ok(b)
    };
    if expect(&mut pos, "magic")? != b'P' || expect(&mut pos, "magic")? != b'5' {
        return Err(Error::Parse {
            offset: 0,
            msg: "not a binary PGM (missing P5 magic)".into(),
        });
    }
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            let b = expect(&mut pos, "header")?;
            if b == b'#' {
                while expect(&mut pos, "comment")? != b'\n' {}
            } else if !b.is_ascii_whitespace() {
                pos -= 1;
                break;
            }
        }
        let start = pos;
        let mut value = 0usize;
        while let Some(&b) = bytes.get(pos) {
            if b.is_ascii_digit() {
                value = value * 10 + (b - b'0') as usize;
                pos += 1;
            } else {
                break;
            }
        }
        if pos == start {
            return Err(Error::Parse {
                offset: pos,
                msg: "expected a decimal header field".into(),
            });
        }
        *field = value;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse {
            offset: pos,
            msg: format!("unsupported maxval {maxval}"),
        });
    }
    // Single whitespace byte separates header from payload.
    let b = expect(&mut pos, "header terminator")?;
    if !b.is_ascii_whitespace() {
        return Err(Error::Parse {
            offset: pos - 1,
            msg: "missing whitespace after maxval".into(),
        });
    }
    let need = width * height;
    if bytes.len() - pos < need {
        return Err(Error::Parse {
            offset: bytes.len(),
            msg: format!(
                "truncated payload: need {need} bytes, found {}",
                bytes.len() - pos
            ),
        });
    }
    let pixels = bytes[pos..pos + need]
        .iter()
        .map(|&b| f64::from(b) / maxval as f64)
        .collect();
    Ok(RasterImage {
        pixels,
        width,
        height,
        window: Window::square(1.0).expect("unit window"),
        axes_drawn: false,
        empty_overlap: false,
    })
}

/// Writes CSV `x,y` lines for a cloud, with a `# config:` header.
pub fn write_cloud_csv(cloud: &PointCloud, path: &Path, config: &str) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# config: {config}")?;
    writeln!(out, "x,y")?;
    for &(x, y) in &cloud.points {
        writeln!(out, "{x:.17e},{y:.17e}")?;
    }
    Ok(())
}

/// Reads a cloud CSV written by [`write_cloud_csv`] (comments and header
/// tolerated).
pub fn read_cloud_csv(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let mut split = line.split(',');
        let (Some(a), Some(b)) = (split.next(), split.next()) else {
            return Err(Error::InvalidInput(format!("bad cloud row: {line}")));
        };
        let x: f64 = a.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("bad x value: {a}"))
        })?;
        let y: f64 = b.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("bad y value: {b}"))
        })?;
        points.push((x, y));
    }
    Ok(PointCloud {
        points,
        seed: 0,
        spec: crate::sample::SampleSpec {
            count: 0,
            s_range: 0.0,
            transform: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;
    use crate::sample::{sample_amoeba, SampleSpec};

    fn cloud_of(points: Vec<(f64, f64)>) -> PointCloud {
        PointCloud {
            points,
            seed: 0,
            spec: SampleSpec {
                count: 0,
                s_range: 0.0,
                transform: None,
            },
        }
    }

    #[test]
    fn resolution_two_loses_nearly_everything() {
        let cloud = cloud_of(vec![(-0.5, -0.5), (0.5, 0.5), (0.3, -0.8)]);
        let img = rasterize(&cloud, 2, Window::square(1.0).unwrap(), false).unwrap();
        assert_eq!(img.pixels.len(), 4);
        assert_eq!(img.pixels.iter().filter(|&&v| v == 1.0).count(), 3);
    }

    #[test]
    fn f0_hole_visible_at_32() {
        let p = Preset::F0.polynomial_real(&[1.0, 1.0, 1.0, 1.0, 6.0]).unwrap();
        let cloud = sample_amoeba(&p, 20000, 6.0, 2, None).unwrap();
        let img = rasterize(&cloud, 32, Window::square(5.0).unwrap(), false).unwrap();
        // The centre 2x2 block sits inside the hole.
        for row in 15..17 {
            for col in 15..17 {
                assert_eq!(img.get(row, col), 0.0, "hole pixel lit at ({row},{col})");
            }
        }
        // But the amoeba body shows up.
        assert!(img.pixels.iter().sum::<f64>() > 100.0);
    }

    #[test]
    fn empty_overlap_flagged_not_error() {
        let cloud = cloud_of(vec![(100.0, 100.0)]);
        let img = rasterize(&cloud, 4, Window::square(1.0).unwrap(), false).unwrap();
        assert!(img.empty_overlap);
        assert!(img.pixels.iter().all(|&v| v == 0.0));
        assert!(rasterize(&cloud_of(vec![]), 4, Window::square(1.0).unwrap(), false).is_err());
    }

    #[test]
    fn axes_drawn_through_origin() {
        let cloud = cloud_of(vec![(0.9, 0.9)]);
        let img = rasterize(&cloud, 8, Window::square(1.0).unwrap(), true).unwrap();
        let mid = bin_index(0.0, -1.0, 1.0, 8);
        for k in 0..8 {
            assert_eq!(img.get(k, mid), 1.0);
            assert_eq!(img.get(8 - 1 - mid, k), 1.0);
        }
    }

    #[test]
    fn downsample_full_coverage_and_checkerboard() {
        let full = RasterImage {
            pixels: vec![1.0; 256 * 256],
            width: 256,
            height: 256,
            window: Window::square(1.0).unwrap(),
            axes_drawn: false,
            empty_overlap: false,
        };
        let tiny = downsample(&full, 2).unwrap();
        assert_eq!(tiny.pixels, vec![1.0; 4]);

        let mut pixels = vec![0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                if (r + c) % 2 == 0 {
                    pixels[r * 4 + c] = 1.0;
                }
            }
        }
        let board = RasterImage {
            pixels,
            width: 4,
            height: 4,
            window: Window::square(1.0).unwrap(),
            axes_drawn: false,
            empty_overlap: false,
        };
        let half = downsample(&board, 2).unwrap();
        assert_eq!(half.pixels, vec![0.5; 4]);
        assert!(downsample(&half, 4).is_err());
    }

    #[test]
    fn downsample_sweep_from_master() {
        let p = Preset::F0.polynomial_real(&[1.0, 1.0, 1.0, 1.0, 6.0]).unwrap();
        let cloud = sample_amoeba(&p, 5000, 6.0, 2, None).unwrap();
        let master = rasterize(&cloud, 512, Window::square(5.0).unwrap(), true).unwrap();
        let sizes = [2usize, 4, 8, 16, 32, 64, 128, 256];
        let imgs: Vec<_> = sizes.iter().map(|&s| downsample(&master, s).unwrap()).collect();
        assert_eq!(imgs.len(), 8);
        for (img, &s) in imgs.iter().zip(&sizes) {
            assert_eq!(img.width, s);
            assert!(img.pixels.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn pgm_roundtrip_and_layout() {
        let img = RasterImage {
            pixels: vec![0.0, 1.0, 0.0, 1.0],
            width: 2,
            height: 2,
            window: Window::square(1.0).unwrap(),
            axes_drawn: false,
            empty_overlap: false,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        write_pgm(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[0u8, 255, 0, 255]);
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.pixels, img.pixels);
    }

    #[test]
    fn pgm_truncation_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, b"P5\n2 2\n255\n\x00\xff").unwrap();
        match read_pgm(&path) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 13),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn cloud_csv_roundtrip() {
        let cloud = cloud_of(vec![(0.125, -3.5), (2.0, 1.0)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_cloud_csv(&cloud, &path, "test").unwrap();
        let back = read_cloud_csv(&path).unwrap();
        assert_eq!(back.points, cloud.points);
    }
}
