//! Minutiae, minutia sets and pair geometry.
//!
//! Coordinates are pixels in a mathematical frame (y up, angles measured
//! counter-clockwise from the +x axis). Orientations are stored in radians
//! wrapped into `[0, 2π)`; the on-disk text format uses degrees.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Highest quality label an extractor can assign.
pub const MAX_QUALITY: u8 = 100;

/// Quality threshold used for both reference databases.
pub const DEFAULT_MIN_QUALITY: u8 = 45;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed circular difference `a - b` mapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minutia {
    pub x: f64,
    pub y: f64,
    /// Orientation in radians, `[0, 2π)`.
    pub theta: f64,
    pub quality: u8,
}

impl Minutia {
    pub fn new(x: f64, y: f64, theta: f64, quality: u8) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidMinutia(format!(
                "non-finite value in ({x}, {y}, {theta})"
            )));
        }
        if quality > MAX_QUALITY {
            return Err(Error::InvalidMinutia(format!(
                "quality {quality} exceeds {MAX_QUALITY}"
            )));
        }
        Ok(Minutia {
            x,
            y,
            theta: wrap_angle(theta),
            quality,
        })
    }
}

/// The minutiae extracted from one fingerprint image.
#[derive(Debug, Clone, PartialEq)]
pub struct MinutiaSet {
    minutiae: Vec<Minutia>,
    width: u32,
    height: u32,
}

impl MinutiaSet {
    /// Builds a set, checking that every minutia lies inside the image.
    pub fn new(minutiae: Vec<Minutia>, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMinutia(format!(
                "image size must be positive, got {width}x{height}"
            )));
        }
        for (i, m) in minutiae.iter().enumerate() {
            if !in_bounds(m, width, height) {
                return Err(Error::InvalidMinutia(format!(
                    "minutia {i} at ({}, {}) outside {width}x{height} image",
                    m.x, m.y
                )));
            }
        }
        Ok(MinutiaSet {
            minutiae,
            width,
            height,
        })
    }

    pub fn empty(width: u32, height: u32) -> Result<Self> {
        Self::new(Vec::new(), width, height)
    }

    pub fn minutiae(&self) -> &[Minutia] {
        &self.minutiae
    }

    pub fn len(&self) -> usize {
        self.minutiae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutiae.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Keeps minutiae with `quality >= min_quality`, preserving order.
    pub fn filter_quality(&self, min_quality: u32) -> MinutiaSet {
        MinutiaSet {
            minutiae: self
                .minutiae
                .iter()
                .filter(|m| u32::from(m.quality) >= min_quality)
                .copied()
                .collect(),
            width: self.width,
            height: self.height,
        }
    }

    /// Mirrors the set vertically (`y -> height - y`, `θ -> -θ`), converting
    /// between image (y down) and mathematical (y up) conventions.
    pub fn flip_y(&self) -> MinutiaSet {
        let h = f64::from(self.height);
        MinutiaSet {
            minutiae: self
                .minutiae
                .iter()
                .map(|m| Minutia {
                    x: m.x,
                    y: h - m.y,
                    theta: wrap_angle(-m.theta),
                    quality: m.quality,
                })
                .collect(),
            width: self.width,
            height: self.height,
        }
    }

    /// Rotates every minutia by `phi` about `center`, adds `phi` to every
    /// orientation, then translates by `shift`. Fails if a minutia leaves the
    /// image.
    pub fn rigid_motion(&self, phi: f64, center: (f64, f64), shift: (f64, f64)) -> Result<Self> {
        let (s, c) = phi.sin_cos();
        let moved = self
            .minutiae
            .iter()
            .map(|m| {
                let dx = m.x - center.0;
                let dy = m.y - center.1;
                Minutia {
                    x: center.0 + c * dx - s * dy + shift.0,
                    y: center.1 + s * dx + c * dy + shift.1,
                    theta: wrap_angle(m.theta + phi),
                    quality: m.quality,
                }
            })
            .collect();
        MinutiaSet::new(moved, self.width, self.height)
    }

    pub fn center(&self) -> (f64, f64) {
        (f64::from(self.width) / 2.0, f64::from(self.height) / 2.0)
    }

    /// Serializes into the minutiae text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for m in &self.minutiae {
            let mut deg = m.theta.to_degrees();
            if deg >= 360.0 {
                deg = 0.0;
            }
            let _ = writeln!(out, "{} {} {} {}", m.x, m.y, deg, m.quality);
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn in_bounds(m: &Minutia, width: u32, height: u32) -> bool {
    (0.0..=f64::from(width)).contains(&m.x) && (0.0..=f64::from(height)).contains(&m.y)
}

/// Parses the minutiae text format.
///
/// ```text
/// <image_width> <image_height>
/// <x> <y> <theta_degrees> <quality>
/// ...
/// ```
///
/// Lines starting with `#` and blank lines are ignored. Line numbers in
/// errors are 1-based and count every physical line.
pub fn parse_minutiae(text: &str) -> Result<MinutiaSet> {
    let mut header: Option<(u32, u32)> = None;
    let mut minutiae = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if fields.len() != 2 {
                    return Err(Error::parse(
                        lineno,
                        format!("expected header \"<width> <height>\", got {line:?}"),
                    ));
                }
                let w = parse_dimension(fields[0], lineno)?;
                let h = parse_dimension(fields[1], lineno)?;
                header = Some((w, h));
            }
            Some((w, h)) => {
                minutiae.push(parse_minutia_line(&fields, lineno, w, h)?);
            }
        }
    }

    let (w, h) = header.ok_or_else(|| Error::parse(1, "missing header line"))?;
    MinutiaSet::new(minutiae, w, h)
}

pub fn parse_minutiae_file(path: &Path) -> Result<MinutiaSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_minutiae(&text).map_err(|e| e.with_path(path))
}

fn parse_dimension(field: &str, lineno: usize) -> Result<u32> {
    match field.parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::parse(
            lineno,
            format!("image dimension must be a positive integer, got {field:?}"),
        )),
    }
}

fn parse_minutia_line(fields: &[&str], lineno: usize, w: u32, h: u32) -> Result<Minutia> {
    if fields.len() != 4 {
        return Err(Error::parse(
            lineno,
            format!("expected \"<x> <y> <theta> <quality>\", got {} fields", fields.len()),
        ));
    }
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(lineno, format!("{what} is not a number: {s:?}")))
    };
    let x = num(fields[0], "x")?;
    let y = num(fields[1], "y")?;
    let deg = num(fields[2], "theta")?;
    let quality: u32 = fields[3]
        .parse()
        .map_err(|_| Error::parse(lineno, format!("quality is not an integer: {:?}", fields[3])))?;

    if !(0.0..=f64::from(w)).contains(&x) || !(0.0..=f64::from(h)).contains(&y) {
        return Err(Error::parse(
            lineno,
            format!("coordinate ({x}, {y}) outside {w}x{h} image"),
        ));
    }
    if !(0.0..360.0).contains(&deg) {
        return Err(Error::parse(lineno, format!("angle {deg} not in [0, 360)")));
    }
    if quality > u32::from(MAX_QUALITY) {
        return Err(Error::parse(lineno, format!("quality {quality} not in [0, 100]")));
    }
    Minutia::new(x, y, deg.to_radians(), quality as u8).map_err(|e| Error::parse(lineno, e.to_string()))
}

/// Distance and direction between two minutiae.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    /// `|x_a - x_b|`, strictly positive.
    pub r: f64,
    /// Direction of `x_a - x_b` in `[0, 2π)`.
    pub phi: f64,
}

/// Geometry of the ordered pair `(a, b)`: the vector runs from `b` to `a`.
pub fn pair_geometry(a: &Minutia, b: &Minutia) -> Result<PairGeometry> {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok(PairGeometry {
        r,
        phi: wrap_angle(dy.atan2(dx)),
    })
}

/// One ordered minutia pair entering the spectral sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub a: usize,
    pub b: usize,
    pub geometry: PairGeometry,
    /// `θ_a - θ_b` (not wrapped).
    pub dtheta: f64,
    pub weight: f64,
}

/// Ordered admissible pairs plus counters for the ones that were dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairList {
    pub pairs: Vec<Pair>,
    /// Ordered pairs skipped because both minutiae share coordinates.
    pub coincident: usize,
    /// Ordered pairs skipped because `2R` exceeds the image width.
    pub too_long: usize,
    /// Ordered pairs skipped because the weight hook returned zero.
    pub zero_weight: usize,
}

impl PairList {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All ordered pairs `(a, b)`, `a != b`, with `r > 0` and `2r <= width`, in
/// lexicographic index order. Every pair carries weight 1.
pub fn admissible_pairs(s: &MinutiaSet) -> PairList {
    admissible_pairs_weighted(s, |_, _, _| 1.0)
}

/// Like [`admissible_pairs`], with a caller-supplied weight per ordered pair.
/// Pairs whose weight is zero are dropped.
pub fn admissible_pairs_weighted<F>(s: &MinutiaSet, weight: F) -> PairList
where
    F: Fn(&Minutia, &Minutia, &PairGeometry) -> f64,
{
    let max_len = f64::from(s.width);
    let ms = s.minutiae();
    let mut out = PairList::default();
    for (a, ma) in ms.iter().enumerate() {
        for (b, mb) in ms.iter().enumerate() {
            if a == b {
                continue;
            }
            let Ok(geometry) = pair_geometry(ma, mb) else {
                out.coincident += 1;
                continue;
            };
            if 2.0 * geometry.r > max_len {
                out.too_long += 1;
                continue;
            }
            let w = weight(ma, mb, &geometry);
            if w == 0.0 {
                out.zero_weight += 1;
                continue;
            }
            out.pairs.push(Pair {
                a,
                b,
                geometry,
                dtheta: ma.theta - mb.theta,
                weight: w,
            });
        }
    }
    out
}
