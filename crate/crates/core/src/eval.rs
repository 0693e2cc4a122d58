//! Verification protocol: genuine and impostor comparisons, ROC curve, EER
//! and the distribution of optimal rotation angles.
//!
//! Genuine scores come from every unordered pair of impressions of the same
//! finger. Impostor scores come from every unordered pair of distinct
//! fingers, with one impression drawn at random per finger and per pair.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{match_with_rotation, MatchResult, Matcher, TemplatePair};
use crate::minutiae::{parse_minutiae_file, MinutiaSet};
use crate::seeding::{keyed_rng, DOMAIN_IMPOSTOR};

/// One image of a finger.
#[derive(Debug, Clone, PartialEq)]
pub struct Impression {
    pub image: u32,
    pub name: String,
    pub minutiae: MinutiaSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finger {
    pub person: u32,
    pub finger: u32,
    pub impressions: Vec<Impression>,
}

impl Finger {
    pub fn label(&self) -> String {
        format!("{}_{}", self.person, self.finger)
    }
}

/// Fingers ordered by `(person, finger)`, impressions by image number.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Database {
    fingers: Vec<Finger>,
}

/// Splits `"<person>_<finger>_<image>.xyt"` into its three numbers.
pub fn parse_image_name(name: &str) -> Option<(u32, u32, u32)> {
    let stem = name.strip_suffix(".xyt")?;
    let mut parts = stem.split('_');
    let p = parts.next()?.parse().ok()?;
    let f = parts.next()?.parse().ok()?;
    let i = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((p, f, i))
}

impl Database {
    pub fn new(mut fingers: Vec<Finger>) -> Self {
        fingers.sort_by_key(|f| (f.person, f.finger));
        for f in &mut fingers {
            f.impressions.sort_by(|a, b| a.image.cmp(&b.image).then_with(|| a.name.cmp(&b.name)));
        }
        Database { fingers }
    }

    pub fn fingers(&self) -> &[Finger] {
        &self.fingers
    }

    pub fn impression_count(&self) -> usize {
        self.fingers.iter().map(|f| f.impressions.len()).sum()
    }

    /// Loads every `*.xyt` file in `dir`. Files must follow the
    /// `<person>_<finger>_<image>.xyt` naming convention.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut groups: BTreeMap<(u32, u32), Vec<Impression>> = BTreeMap::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path = entry.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()).map(str::to_owned) else {
                continue;
            };
            if !name.ends_with(".xyt") {
                continue;
            }
            let (person, finger, image) = parse_image_name(&name).ok_or_else(|| {
                Error::Protocol(format!("{name}: expected <person>_<finger>_<image>.xyt"))
            })?;
            groups.entry((person, finger)).or_default().push(Impression {
                image,
                name,
                minutiae: parse_minutiae_file(&path)?,
            });
        }
        Ok(Database::new(
            groups
                .into_iter()
                .map(|((person, finger), impressions)| Finger {
                    person,
                    finger,
                    impressions,
                })
                .collect(),
        ))
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for f in &self.fingers {
            for imp in &f.impressions {
                imp.minutiae.write_file(&dir.join(&imp.name))?;
            }
        }
        Ok(())
    }

    /// Keeps only the listed persons.
    pub fn restrict_persons(&self, persons: &[u32]) -> Database {
        Database {
            fingers: self
                .fingers
                .iter()
                .filter(|f| persons.contains(&f.person))
                .cloned()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonKind {
    Genuine,
    Impostor,
}

impl ComparisonKind {
    pub fn tag(self) -> &'static str {
        match self {
            ComparisonKind::Genuine => "genuine",
            ComparisonKind::Impostor => "impostor",
        }
    }
}

/// One enrolled-versus-probe comparison. Indices refer to
/// [`Database::fingers`] and each finger's impressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub kind: ComparisonKind,
    pub finger_a: usize,
    pub image_a: usize,
    pub finger_b: usize,
    pub image_b: usize,
    /// `None` when either side has no template (too few minutiae).
    pub result: Option<MatchResult>,
}

impl Comparison {
    /// Fused score; comparisons without a template score 0.
    pub fn fused(&self) -> f64 {
        self.result.map_or(0.0, |r| r.fused)
    }
}

/// Unordered impression pairs `(finger, first, second)` per finger, plus
/// the number of fingers skipped for having fewer than two impressions.
pub fn genuine_pairs(db: &Database) -> (Vec<(usize, usize, usize)>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for (fi, f) in db.fingers.iter().enumerate() {
        let n = f.impressions.len();
        if n < 2 {
            skipped += 1;
            continue;
        }
        for a in 0..n {
            for b in a + 1..n {
                out.push((fi, a, b));
            }
        }
    }
    (out, skipped)
}

/// One `(finger_a, image_a, finger_b, image_b)` per unordered finger pair.
/// The impressions are drawn from a stream keyed by `(seed, finger_a,
/// finger_b)`.
pub fn impostor_pairs(db: &Database, seed: u64) -> Result<Vec<(usize, usize, usize, usize)>> {
    let usable: Vec<usize> = (0..db.fingers.len())
        .filter(|&i| !db.fingers[i].impressions.is_empty())
        .collect();
    if usable.len() < 2 {
        return Err(Error::Protocol("impostor comparisons need at least two fingers".into()));
    }
    let mut out = Vec::with_capacity(usable.len() * (usable.len() - 1) / 2);
    for (k, &fa) in usable.iter().enumerate() {
        for &fb in &usable[k + 1..] {
            let mut rng = keyed_rng(seed, DOMAIN_IMPOSTOR, fa as u64, fb as u64);
            let ia = rng.random_range(0..db.fingers[fa].impressions.len());
            let ib = rng.random_range(0..db.fingers[fb].impressions.len());
            out.push((fa, ia, fb, ib));
        }
    }
    Ok(out)
}

/// One point of the ROC sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    /// Fraction of impostor scores `>= threshold`.
    pub far: f64,
    /// Fraction of genuine scores `< threshold`.
    pub frr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roc {
    pub points: Vec<RocPoint>,
    pub eer: f64,
}

/// ROC over the sorted union of all scores, closed by a `+∞` threshold
/// where everything is rejected. The EER is where `FAR - FRR` first
/// reaches zero, linearly interpolated between the bracketing points.
pub fn roc_and_eer(genuine: &[f64], impostor: &[f64]) -> Result<Roc> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(Error::Protocol("ROC needs genuine and impostor scores".into()));
    }
    if genuine.iter().chain(impostor).any(|s| s.is_nan()) {
        return Err(Error::Protocol("scores contain NaN".into()));
    }
    let mut gen = genuine.to_vec();
    let mut imp = impostor.to_vec();
    gen.sort_by(f64::total_cmp);
    imp.sort_by(f64::total_cmp);

    let mut thresholds: Vec<f64> = gen.iter().chain(&imp).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);

    let (ng, ni) = (gen.len() as f64, imp.len() as f64);
    let points: Vec<RocPoint> = thresholds
        .iter()
        .map(|&t| {
            let imp_below = imp.partition_point(|&s| s < t);
            let gen_below = gen.partition_point(|&s| s < t);
            RocPoint {
                threshold: t,
                far: (imp.len() - imp_below) as f64 / ni,
                frr: gen_below as f64 / ng,
            }
        })
        .collect();
    let eer = eer_from_points(&points);
    Ok(Roc { points, eer })
}

fn eer_from_points(points: &[RocPoint]) -> f64 {
    let mut prev: Option<&RocPoint> = None;
    for p in points {
        let d = p.far - p.frr;
        if d <= 0.0 {
            return match prev {
                _ if d == 0.0 => p.far,
                None => 0.5 * (p.far + p.frr),
                Some(q) => {
                    let dq = q.far - q.frr;
                    let s = dq / (dq - d);
                    q.far + s * (p.far - q.far)
                }
            };
        }
        prev = Some(p);
    }
    // unreachable: the +∞ point always has FAR - FRR = -1
    0.5
}

/// Counts of optimal rotation angles, one bin per searched angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleHistogram {
    /// `(angle in radians, count)`, ascending by angle.
    pub bins: Vec<(f64, usize)>,
}

impl AngleHistogram {
    fn new(angles: &[f64]) -> Self {
        let mut a = angles.to_vec();
        a.sort_by(f64::total_cmp);
        a.dedup();
        AngleHistogram {
            bins: a.into_iter().map(|x| (x, 0)).collect(),
        }
    }

    fn add(&mut self, angle: f64) {
        if let Some(bin) = self.bins.iter_mut().find(|(a, _)| *a == angle) {
            bin.1 += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.1).sum()
    }

    /// Angle with the most counts; ties go to the first (smallest) angle.
    pub fn mode(&self) -> Option<f64> {
        self.bins
            .iter()
            .fold(None::<(f64, usize)>, |best, &(a, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((a, c)),
            })
            .map(|b| b.0)
    }
}

/// Full output of one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub genuine: Vec<Comparison>,
    pub impostor: Vec<Comparison>,
    pub roc: Roc,
    pub phi_histogram: Option<AngleHistogram>,
    pub skipped_fingers: usize,
    pub failed_templates: usize,
}

impl EvalReport {
    pub fn genuine_scores(&self) -> Vec<f64> {
        self.genuine.iter().map(Comparison::fused).collect()
    }

    pub fn impostor_scores(&self) -> Vec<f64> {
        self.impostor.iter().map(Comparison::fused).collect()
    }

    pub fn eer(&self) -> f64 {
        self.roc.eer
    }

    pub fn summary_line(&self) -> String {
        format!("EER={}", self.roc.eer)
    }

    pub fn write_comparisons_csv(&self, db: &Database, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "kind", "finger_a", "image_a", "finger_b", "image_b", "score_x", "score_xtheta", "fused", "phi_opt",
        ])?;
        for c in self.genuine.iter().chain(&self.impostor) {
            let fa = &db.fingers[c.finger_a];
            let fb = &db.fingers[c.finger_b];
            let nums = match c.result {
                Some(r) => [r.score_x, r.score_xtheta, r.fused, r.phi_opt].map(|v| v.to_string()),
                None => Default::default(),
            };
            w.write_record([
                c.kind.tag().to_string(),
                fa.label(),
                fa.impressions[c.image_a].image.to_string(),
                fb.label(),
                fb.impressions[c.image_b].image.to_string(),
                nums[0].clone(),
                nums[1].clone(),
                nums[2].clone(),
                nums[3].clone(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn write_roc_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["threshold", "FAR", "FRR"])?;
        for p in &self.roc.points {
            w.write_record([p.threshold.to_string(), p.far.to_string(), p.frr.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn write_histogram_csv(&self, path: &Path) -> Result<()> {
        let Some(h) = &self.phi_histogram else {
            return Ok(());
        };
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["phi_deg", "count"])?;
        for (a, c) in &h.bins {
            w.write_record([a.to_degrees().to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// A database with every impression enrolled once.
pub struct Evaluator<'a> {
    db: &'a Database,
    matcher: &'a Matcher,
    templates: Vec<Vec<Option<TemplatePair>>>,
}

impl<'a> Evaluator<'a> {
    /// Computes all templates (in parallel). Impressions without admissible
    /// pairs get no template.
    pub fn new(db: &'a Database, matcher: &'a Matcher) -> Self {
        let templates = db
            .fingers
            .par_iter()
            .map(|f| {
                f.impressions
                    .par_iter()
                    .map(|imp| matcher.enroll(&imp.minutiae).ok())
                    .collect()
            })
            .collect();
        Evaluator {
            db,
            matcher,
            templates,
        }
    }

    pub fn failed_templates(&self) -> usize {
        self.templates.iter().flatten().filter(|t| t.is_none()).count()
    }

    fn compare(&self, fa: usize, ia: usize, fb: usize, ib: usize, angles: &[f64]) -> Result<Option<MatchResult>> {
        match (&self.templates[fa][ia], &self.templates[fb][ib]) {
            (Some(a), Some(b)) => match_with_rotation(a, b, angles).map(Some),
            _ => Ok(None),
        }
    }

    /// All genuine comparisons and the number of fingers skipped.
    pub fn genuine_comparisons(&self) -> Result<(Vec<Comparison>, usize)> {
        let (pairs, skipped) = genuine_pairs(self.db);
        let out = pairs
            .par_iter()
            .map(|&(f, a, b)| {
                Ok(Comparison {
                    kind: ComparisonKind::Genuine,
                    finger_a: f,
                    image_a: a,
                    finger_b: f,
                    image_b: b,
                    result: self.compare(f, a, f, b, &self.matcher.angles)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((out, skipped))
    }

    pub fn impostor_comparisons(&self, seed: u64) -> Result<Vec<Comparison>> {
        impostor_pairs(self.db, seed)?
            .par_iter()
            .map(|&(fa, ia, fb, ib)| {
                Ok(Comparison {
                    kind: ComparisonKind::Impostor,
                    finger_a: fa,
                    image_a: ia,
                    finger_b: fb,
                    image_b: ib,
                    result: self.compare(fa, ia, fb, ib, &self.matcher.angles)?,
                })
            })
            .collect()
    }

    /// Optimal rotation angle of every genuine pair, searched over `angles`.
    pub fn optimal_angle_histogram(&self, angles: &[f64]) -> Result<AngleHistogram> {
        if angles.is_empty() {
            return Err(Error::Protocol("rotation angle list is empty".into()));
        }
        let (pairs, _) = genuine_pairs(self.db);
        let optima = pairs
            .par_iter()
            .map(|&(f, a, b)| Ok(self.compare(f, a, f, b, angles)?.map(|r| r.phi_opt)))
            .collect::<Result<Vec<_>>>()?;
        let mut h = AngleHistogram::new(angles);
        for phi in optima.into_iter().flatten() {
            h.add(phi);
        }
        Ok(h)
    }

    /// Runs the whole protocol. The histogram is produced when the matcher
    /// searches more than one angle.
    pub fn run(&self, seed: u64) -> Result<EvalReport> {
        let (genuine, skipped_fingers) = self.genuine_comparisons()?;
        let impostor = self.impostor_comparisons(seed)?;
        if genuine.is_empty() {
            return Err(Error::Protocol("no finger has two or more impressions".into()));
        }
        let gs: Vec<f64> = genuine.iter().map(Comparison::fused).collect();
        let is: Vec<f64> = impostor.iter().map(Comparison::fused).collect();
        let roc = roc_and_eer(&gs, &is)?;
        let phi_histogram = if self.matcher.angles.len() > 1 {
            let mut h = AngleHistogram::new(&self.matcher.angles);
            for r in genuine.iter().filter_map(|c| c.result) {
                h.add(r.phi_opt);
            }
            Some(h)
        } else {
            None
        };
        Ok(EvalReport {
            genuine,
            impostor,
            roc,
            phi_histogram,
            skipped_fingers,
            failed_templates: self.failed_templates(),
        })
    }
}
