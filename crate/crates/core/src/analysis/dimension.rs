use serde::{Deserialize, Serialize};

use super::stats::linear_regression;
use crate::{ComplexPoint, Error, Result};

/// Fewest scales a fit may use.
pub const MIN_FIT_SCALES: usize = 4;

/// Log–log slope estimate with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Box sizes or ruler lengths entering the fit.
    pub scales_used: Vec<f64>,
    /// Box counts `N(eps)` or ruler steps `n(l)`, one per scale.
    pub counts: Vec<f64>,
}

/// Geometric ladder of box sizes `diag / 2^e`, `e` evenly spaced in
/// `[coarse_exponent, fine_exponent]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaleSpec {
    pub scales: usize,
    pub coarse_exponent: f64,
    pub fine_exponent: f64,
    /// Average counts over four grid offsets instead of anchoring at the
    /// bounding-box minimum only.
    pub multi_offset: bool,
    /// Polyline samples are subdivided until consecutive points are closer
    /// than `densify_fraction * eps_min`.
    pub densify_fraction: f64,
    pub min_points: usize,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec {
            scales: 12,
            coarse_exponent: 3.0,
            fine_exponent: 9.0,
            multi_offset: false,
            densify_fraction: 0.5,
            min_points: 1000,
        }
    }
}

/// Geometric ladder of ruler lengths, same convention as [`ScaleSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RulerSpec {
    pub rulers: usize,
    pub coarse_exponent: f64,
    pub fine_exponent: f64,
}

impl Default for RulerSpec {
    fn default() -> Self {
        RulerSpec {
            rulers: 10,
            coarse_exponent: 3.0,
            fine_exponent: 8.0,
        }
    }
}

fn ladder(diag: f64, n: usize, coarse: f64, fine: f64) -> Result<Vec<f64>> {
    if n < MIN_FIT_SCALES {
        return Err(Error::validation(format!(
            "a scale ladder needs at least {MIN_FIT_SCALES} scales"
        )));
    }
    if !(fine > coarse) {
        return Err(Error::validation(
            "fine exponent must exceed coarse exponent",
        ));
    }
    Ok((0..n)
        .map(|j| {
            let e = coarse + (fine - coarse) * j as f64 / (n - 1) as f64;
            diag / e.exp2()
        })
        .collect())
}

struct BoundingBox {
    min: ComplexPoint,
    diag: f64,
}

fn bounding_box(points: &[ComplexPoint]) -> Result<BoundingBox> {
    if points.is_empty() {
        return Err(Error::Degenerate("empty point set".into()));
    }
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        if !(p.re.is_finite() && p.im.is_finite()) {
            return Err(Error::Degenerate("non-finite point".into()));
        }
        lo_x = lo_x.min(p.re);
        lo_y = lo_y.min(p.im);
        hi_x = hi_x.max(p.re);
        hi_y = hi_y.max(p.im);
    }
    let diag = (hi_x - lo_x).hypot(hi_y - lo_y);
    if !(diag > 0.0) {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    Ok(BoundingBox {
        min: ComplexPoint::new(lo_x, lo_y),
        diag,
    })
}

/// Subdivide every segment linearly so consecutive samples are at most
/// `max_gap` apart.
pub fn densify(points: &[ComplexPoint], max_gap: f64) -> Vec<ComplexPoint> {
    let mut out = Vec::with_capacity(points.len());
    if let Some(&first) = points.first() {
        out.push(first);
    }
    for w in points.windows(2) {
        let len = (w[1] - w[0]).norm();
        let pieces = (len / max_gap).ceil().max(1.0) as usize;
        for k in 1..pieces {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / pieces as f64));
        }
        out.push(w[1]);
    }
    out
}

fn occupied(points: &[ComplexPoint], origin: ComplexPoint, eps: f64, keys: &mut Vec<u64>) -> usize {
    keys.clear();
    keys.extend(points.iter().map(|p| {
        let i = ((p.re - origin.re) / eps).floor() as i64;
        let j = ((p.im - origin.im) / eps).floor() as i64;
        ((i as u64 & 0xffff_ffff) << 32) | (j as u64 & 0xffff_ffff)
    }));
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn fit(scales: &[f64], counts: &[f64]) -> Result<DimensionFit> {
    let (mut used, mut kept) = (Vec::new(), Vec::new());
    for (&s, &c) in scales.iter().zip(counts) {
        if c > 1.0 {
            used.push(s);
            kept.push(c);
        }
    }
    if used.len() < MIN_FIT_SCALES {
        return Err(Error::Degenerate(format!(
            "only {} usable scales (need {MIN_FIT_SCALES})",
            used.len()
        )));
    }
    let x: Vec<f64> = used.iter().map(|s| -s.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|c| c.ln()).collect();
    let lf =
        linear_regression(&x, &y).ok_or_else(|| Error::Degenerate("regression failed".into()))?;
    if !lf.slope.is_finite() {
        return Err(Error::Degenerate("non-finite slope".into()));
    }
    Ok(DimensionFit {
        slope: lf.slope,
        intercept: lf.intercept,
        r_squared: lf.r_squared,
        scales_used: used,
        counts: kept,
    })
}

fn count_boxes(
    points: &[ComplexPoint],
    bb: &BoundingBox,
    spec: &ScaleSpec,
    scales: &[f64],
) -> Vec<f64> {
    let mut keys = Vec::with_capacity(points.len());
    scales
        .iter()
        .map(|&eps| {
            if spec.multi_offset {
                let offsets = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];
                let total: usize = offsets
                    .iter()
                    .map(|&(dx, dy)| {
                        let origin = bb.min - ComplexPoint::new(dx * eps, dy * eps);
                        occupied(points, origin, eps, &mut keys)
                    })
                    .sum();
                total as f64 / offsets.len() as f64
            } else {
                occupied(points, bb.min, eps, &mut keys) as f64
            }
        })
        .collect()
}

/// Box-counting dimension of a polyline, densified below the finest box size.
pub fn box_dimension(polyline: &[ComplexPoint], spec: &ScaleSpec) -> Result<DimensionFit> {
    let bb = bounding_box(polyline)?;
    let scales = ladder(
        bb.diag,
        spec.scales,
        spec.coarse_exponent,
        spec.fine_exponent,
    )?;
    let eps_min = scales[scales.len() - 1];
    let dense = densify(polyline, spec.densify_fraction * eps_min);
    if dense.len() < spec.min_points {
        return Err(Error::validation(format!(
            "box counting needs at least {} samples",
            spec.min_points
        )));
    }
    let counts = count_boxes(&dense, &bb, spec, &scales);
    fit(&scales, &counts)
}

/// Box-counting dimension of an unordered point set (no densification).
pub fn box_dimension_points(points: &[ComplexPoint], spec: &ScaleSpec) -> Result<DimensionFit> {
    if points.len() < spec.min_points {
        return Err(Error::validation(format!(
            "box counting needs at least {} points",
            spec.min_points
        )));
    }
    let bb = bounding_box(points)?;
    let scales = ladder(
        bb.diag,
        spec.scales,
        spec.coarse_exponent,
        spec.fine_exponent,
    )?;
    let counts = count_boxes(points, &bb, spec, &scales);
    fit(&scales, &counts)
}

/// Ruler steps needed to walk the polyline with compass opening `ruler`,
/// plus the leftover distance to the end as a fraction of `ruler`.
fn ruler_steps(points: &[ComplexPoint], ruler: f64) -> f64 {
    let r2 = ruler * ruler;
    let mut pos = points[0];
    let mut seg = 0usize;
    let mut s0 = 0.0;
    let mut steps = 0usize;
    while seg + 1 < points.len() {
        let a = points[seg];
        let d = points[seg + 1] - a;
        let f = a - pos;
        let qa = d.norm_sqr();
        if qa == 0.0 {
            seg += 1;
            s0 = 0.0;
            continue;
        }
        let qb = 2.0 * (f.re * d.re + f.im * d.im);
        let qc = f.norm_sqr() - r2;
        // distance is < ruler at s0; the exit is the larger root
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let root = if qb >= 0.0 {
            -2.0 * qc / (qb + disc)
        } else {
            (disc - qb) / (2.0 * qa)
        };
        if root.is_finite() && root <= 1.0 && root >= s0 {
            pos = a + d * root;
            s0 = root;
            steps += 1;
        } else {
            seg += 1;
            s0 = 0.0;
        }
    }
    steps as f64 + (points[points.len() - 1] - pos).norm() / ruler
}

/// Divider (yardstick) dimension of an ordered polyline.
pub fn yardstick_dimension(polyline: &[ComplexPoint], spec: &RulerSpec) -> Result<DimensionFit> {
    if polyline.len() < 2 {
        return Err(Error::validation(
            "yardstick needs a polyline with at least two points",
        ));
    }
    let bb = bounding_box(polyline)?;
    let rulers = ladder(
        bb.diag,
        spec.rulers,
        spec.coarse_exponent,
        spec.fine_exponent,
    )?;
    let counts: Vec<f64> = rulers.iter().map(|&l| ruler_steps(polyline, l)).collect();
    fit(&rulers, &counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment(n: usize) -> Vec<ComplexPoint> {
        (0..n)
            .map(|k| ComplexPoint::new(k as f64 / (n - 1) as f64, 0.0))
            .collect()
    }

    #[test]
    fn default_ladder_endpoints() {
        let l = ladder(8.0, 12, 3.0, 9.0).unwrap();
        assert_eq!(l[0], 1.0);
        assert_eq!(l[11], 8.0 / 512.0);
    }

    #[test]
    fn straight_segment_box() {
        let f = box_dimension(&segment(1000), &ScaleSpec::default()).unwrap();
        assert!((0.95..=1.05).contains(&f.slope), "{}", f.slope);
        assert!(f.r_squared >= 0.999);
    }

    #[test]
    fn straight_segment_ruler_counts() {
        let pts = segment(1000);
        assert!((ruler_steps(&pts, 0.25) - 4.0).abs() < 1e-12);
        assert!((ruler_steps(&pts, 0.3) - 1.0 / 0.3).abs() < 1e-12);
        let f = yardstick_dimension(&pts, &RulerSpec::default()).unwrap();
        assert!((0.97..=1.03).contains(&f.slope), "{}", f.slope);
    }

    #[test]
    fn ruler_uses_segment_intersection() {
        // coarse sampling: two vertices only
        let pts = vec![ComplexPoint::new(0.0, 0.0), ComplexPoint::new(1.0, 0.0)];
        assert!((ruler_steps(&pts, 0.1) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn densify_spacing() {
        let pts = vec![
            ComplexPoint::new(0.0, 0.0),
            ComplexPoint::new(1.0, 0.0),
            ComplexPoint::new(1.0, 1.0),
        ];
        let d = densify(&pts, 0.3);
        assert_eq!(d.len(), 9);
        assert!(d.windows(2).all(|w| (w[1] - w[0]).norm() <= 0.3 + 1e-15));
        assert_eq!(d[4], pts[1]);
    }

    #[test]
    fn degenerate_inputs() {
        let same = vec![ComplexPoint::new(1.0, 1.0); 2000];
        assert!(matches!(
            box_dimension_points(&same, &ScaleSpec::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(box_dimension_points(&segment(10), &ScaleSpec::default()).is_err());
        let short = ScaleSpec {
            scales: 3,
            ..ScaleSpec::default()
        };
        assert!(box_dimension(&segment(1000), &short).is_err());
    }

    #[test]
    fn multi_offset_line() {
        let spec = ScaleSpec {
            multi_offset: true,
            ..ScaleSpec::default()
        };
        let f = box_dimension(&segment(1000), &spec).unwrap();
        assert!((0.95..=1.05).contains(&f.slope), "{}", f.slope);
    }
}
