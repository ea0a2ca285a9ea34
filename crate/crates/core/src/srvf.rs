//! Square-root velocity representation of edge curves.
//!
//! The srvf of a curve beta is q = beta_dot / sqrt(||beta_dot||). Working in
//! srvf space makes the L2 norm track arc length (||q||^2 = length) and turns
//! reparameterization into an isometric group action, so the elastic shape
//! distance between two edges is the L2 distance after optimizing one curve's
//! parameterization. The optimizer is a dynamic program over a T x T lattice.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{edge_length, resample_edge, EdgeCurve};

/// Slope stencil for the alignment lattice: all coprime (di, dj) steps with
/// components up to 6. Slopes must be dense near 1, otherwise the sqrt-slope
/// amplitude factor quantizes and alignment quality hits a floor of several
/// percent of the srvf norm.
const DP_STEPS: [(usize, usize); 23] = [
    (1, 1),
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (1, 6),
    (2, 1),
    (2, 3),
    (2, 5),
    (3, 1),
    (3, 2),
    (3, 4),
    (3, 5),
    (4, 1),
    (4, 3),
    (4, 5),
    (5, 1),
    (5, 2),
    (5, 3),
    (5, 4),
    (5, 6),
    (6, 1),
    (6, 5),
];

/// Square-root velocity function sampled at the T curve parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Srvf {
    values: Vec<Point>,
}

impl Srvf {
    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn sample_count(&self) -> usize {
        self.values.len()
    }

    /// Trapezoidal L2 norm over the unit interval.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        trapezoid(self.values.len(), |k| self.values[k].dot(&self.values[k]))
    }

    pub fn dist(&self, other: &Srvf) -> f64 {
        assert_eq!(
            self.values.len(),
            other.values.len(),
            "srvfs must share a grid"
        );
        trapezoid(self.values.len(), |k| {
            self.values[k].dist_sq(&other.values[k])
        })
        .sqrt()
    }
}

/// A discretized orientation-preserving reparameterization of the unit interval.
///
/// Stored as fractional grid indices in [0, T-1] so lattice-exact warps (the
/// identity in particular) survive the round trip through [`apply_reparam`]
/// without floating-point drift.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparam {
    idx: Vec<f64>,
}

impl Reparam {
    /// Build from gamma values in `[0, 1]`; must be nondecreasing with exact
    /// 0 and 1 boundaries.
    pub fn from_unit_values(gamma: &[f64]) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::InvalidArgument("reparam needs >= 2 samples".into()));
        }
        if gamma[0] != 0.0 || *gamma.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument(
                "reparam boundaries must be exactly 0 and 1".into(),
            ));
        }
        if gamma.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("reparam must be nondecreasing".into()));
        }
        let scale = (gamma.len() - 1) as f64;
        Ok(Reparam {
            idx: gamma.iter().map(|g| g * scale).collect(),
        })
    }

    pub fn identity(t: usize) -> Self {
        Reparam {
            idx: (0..t).map(|k| k as f64).collect(),
        }
    }

    fn from_indices(idx: Vec<f64>) -> Self {
        Reparam { idx }
    }

    pub fn sample_count(&self) -> usize {
        self.idx.len()
    }

    /// Gamma values in `[0, 1]`.
    pub fn gamma(&self) -> Vec<f64> {
        let scale = (self.idx.len() - 1) as f64;
        self.idx.iter().map(|i| i / scale).collect()
    }

    /// Gamma as fractional grid indices in `[0, T-1]`.
    pub fn indices(&self) -> &[f64] {
        &self.idx
    }

    /// Largest |gamma(t_k) - t_k|.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let scale = (self.idx.len() - 1) as f64;
        self.idx
            .iter()
            .enumerate()
            .map(|(k, i)| (i - k as f64).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Trapezoidal quadrature of f over the unit interval sampled at t points.
fn trapezoid(t: usize, f: impl Fn(usize) -> f64) -> f64 {
    if t < 2 {
        return 0.0;
    }
    let h = 1.0 / (t - 1) as f64;
    let mut acc = 0.5 * (f(0) + f(t - 1));
    for k in 1..t - 1 {
        acc += f(k);
    }
    acc * h
}

/// Linear interpolation of srvf samples at a fractional grid index.
///
/// Indices within 1e-9 of a lattice point return that sample exactly.
fn interp(values: &[Point], x: f64) -> Point {
    let n = values.len();
    let clamped = x.clamp(0.0, (n - 1) as f64);
    let nearest = clamped.round();
    if (clamped - nearest).abs() < 1e-9 {
        return values[nearest as usize];
    }
    let i0 = (clamped.floor() as usize).min(n - 2);
    let frac = clamped - i0 as f64;
    values[i0].scale(1.0 - frac).add(&values[i0 + 1].scale(frac))
}

/// Compute the srvf of a curve: finite-difference derivative divided by the
/// square root of its norm. Zero-derivative samples map to the zero vector.
pub fn to_srvf(curve: &EdgeCurve) -> Srvf {
    let pts = curve.points();
    let t = pts.len();
    let h = 1.0 / (t - 1) as f64;
    let mut values = Vec::with_capacity(t);
    for k in 0..t {
        // Central differences in the interior, one-sided at the ends.
        let deriv = if k == 0 {
            pts[1].sub(&pts[0]).scale(1.0 / h)
        } else if k == t - 1 {
            pts[t - 1].sub(&pts[t - 2]).scale(1.0 / h)
        } else {
            pts[k + 1].sub(&pts[k - 1]).scale(0.5 / h)
        };
        let speed = deriv.norm();
        if speed < 1e-12 {
            values.push(Point::ORIGIN);
        } else {
            values.push(deriv.scale(1.0 / speed.sqrt()));
        }
    }
    Srvf { values }
}

/// Integrate an srvf back into a curve starting at the origin.
pub fn from_srvf(q: &Srvf) -> EdgeCurve {
    let t = q.values.len();
    let h = 1.0 / (t - 1) as f64;
    let velocity: Vec<Point> = q.values.iter().map(|v| v.scale(v.norm())).collect();
    let mut pts = Vec::with_capacity(t);
    let mut acc = Point::ORIGIN;
    pts.push(acc);
    for k in 1..t {
        acc = acc.add(&velocity[k - 1].add(&velocity[k]).scale(0.5 * h));
        pts.push(acc);
    }
    EdgeCurve::new(pts).expect("integrated curve has t >= 2 points")
}

/// The group action (q, gamma) = q(gamma(t)) sqrt(gamma_dot(t)).
pub fn apply_reparam(q: &Srvf, r: &Reparam) -> Srvf {
    let t = q.values.len();
    assert_eq!(t, r.idx.len(), "srvf and reparam must share a grid");
    let mut values = Vec::with_capacity(t);
    for k in 0..t {
        // gamma_dot in index units equals dgamma/dt on the unit square.
        let rate = if k == 0 {
            r.idx[1] - r.idx[0]
        } else if k == t - 1 {
            r.idx[t - 1] - r.idx[t - 2]
        } else {
            0.5 * (r.idx[k + 1] - r.idx[k - 1])
        };
        let root = rate.max(0.0).sqrt();
        values.push(interp(&q.values, r.idx[k]).scale(root));
    }
    Srvf { values }
}

/// Local matching cost of one lattice step, integrating
/// ||q1(t) - sqrt(s) q2(gamma(t))||^2 over the spanned parameter interval.
fn step_cost(q1: &[Point], q2: &[Point], i0: usize, j0: usize, di: usize, dj: usize) -> f64 {
    let slope = dj as f64 / di as f64;
    let root = slope.sqrt();
    let h = 1.0 / (q1.len() - 1) as f64;
    let mut acc = 0.0;
    for k in 0..=di {
        let a = q1[i0 + k];
        let b = interp(q2, j0 as f64 + slope * k as f64).scale(root);
        let term = a.dist_sq(&b);
        acc += if k == 0 || k == di { 0.5 * term } else { term };
    }
    acc * h
}

/// Dynamic-programming search for the reparameterization of `q2` minimizing
/// the L2 distance to `q1` over a T x T lattice with a fixed slope stencil.
///
/// The returned gamma is monotone with exact boundaries; ties in the lattice
/// search resolve by stencil order, so the result is deterministic.
pub fn optimal_reparam(q1: &Srvf, q2: &Srvf) -> Reparam {
    let t = q1.values.len();
    assert_eq!(t, q2.values.len(), "srvfs must share a grid");
    let big = f64::INFINITY;
    let mut cost = vec![big; t * t];
    let mut pred = vec![0u8; t * t];
    cost[0] = 0.0;
    for i in 1..t {
        for j in 1..t {
            let mut best = big;
            let mut best_step = 0u8;
            for (s, &(di, dj)) in DP_STEPS.iter().enumerate() {
                if i < di || j < dj {
                    continue;
                }
                let prev = cost[(i - di) * t + (j - dj)];
                if !prev.is_finite() {
                    continue;
                }
                let c = prev + step_cost(&q1.values, &q2.values, i - di, j - dj, di, dj);
                if c < best {
                    best = c;
                    best_step = s as u8;
                }
            }
            cost[i * t + j] = best;
            pred[i * t + j] = best_step;
        }
    }

    // Backtrack the lattice path from (T-1, T-1) to (0, 0).
    let mut path = vec![(t - 1, t - 1)];
    let (mut i, mut j) = (t - 1, t - 1);
    while i > 0 || j > 0 {
        let (di, dj) = DP_STEPS[pred[i * t + j] as usize];
        i -= di;
        j -= dj;
        path.push((i, j));
    }
    path.reverse();

    // Expand the path into gamma samples at every grid index.
    let mut idx = vec![0.0; t];
    for w in path.windows(2) {
        let (i0, j0) = w[0];
        let (i1, j1) = w[1];
        let span = (i1 - i0) as f64;
        for i in i0..=i1 {
            idx[i] = j0 as f64 + (j1 - j0) as f64 * (i - i0) as f64 / span;
        }
    }
    idx[t - 1] = (t - 1) as f64;
    Reparam::from_indices(idx)
}

/// Elastic shape distance: L2 distance after optimal reparameterization.
pub fn shape_distance(q1: &Srvf, q2: &Srvf) -> f64 {
    let gamma = optimal_reparam(q1, q2);
    q1.dist(&apply_reparam(q2, &gamma))
}

/// Karcher mean together with its per-round cost trace.
#[derive(Debug, Clone)]
pub struct KarcherMean {
    pub mean: Srvf,
    /// Sum of squared aligned distances after each round; nonincreasing.
    pub costs: Vec<f64>,
}

const KARCHER_MAX_ROUNDS: usize = 30;
const KARCHER_REL_TOL: f64 = 1e-6;

/// Iterative Karcher mean of a set of srvfs on a common grid.
pub fn karcher_mean(qs: &[Srvf]) -> Result<Srvf> {
    karcher_mean_detailed(qs).map(|k| k.mean)
}

/// Karcher mean with the cost sequence exposed.
///
/// Initialization picks the input with the minimal sum of unaligned L2
/// distances to the others (ties to the lowest index). Each round aligns
/// every input to the current mean and averages; an input keeps its previous
/// alignment when the fresh lattice search does not improve on it, which
/// makes the recorded cost sequence nonincreasing by construction.
pub fn karcher_mean_detailed(qs: &[Srvf]) -> Result<KarcherMean> {
    if qs.is_empty() {
        return Err(Error::EmptyMean);
    }
    let t = qs[0].sample_count();
    assert!(
        qs.iter().all(|q| q.sample_count() == t),
        "srvfs must share a grid"
    );
    if qs.len() == 1 {
        return Ok(KarcherMean {
            mean: qs[0].clone(),
            costs: vec![0.0],
        });
    }

    let init = pick_initial(qs);
    let mut mean = qs[init].clone();
    let mut aligned: Vec<Srvf> = qs
        .iter()
        .map(|q| apply_reparam(q, &optimal_reparam(&mean, q)))
        .collect();
    let mut cost: f64 = aligned.iter().map(|a| mean.dist(a).powi(2)).sum();
    let mut costs = vec![cost];

    for _ in 0..KARCHER_MAX_ROUNDS {
        let next_mean = centered_mean(&aligned);
        let mut next_aligned = Vec::with_capacity(aligned.len());
        for (q, prev) in qs.iter().zip(&aligned) {
            let cand = apply_reparam(q, &optimal_reparam(&next_mean, q));
            if next_mean.dist(&cand) <= next_mean.dist(prev) {
                next_aligned.push(cand);
            } else {
                next_aligned.push(prev.clone());
            }
        }
        let next_cost: f64 = next_aligned
            .iter()
            .map(|a| next_mean.dist(a).powi(2))
            .sum();
        if next_cost > cost {
            // Floating-point stall; the previous state already converged.
            break;
        }
        mean = next_mean;
        aligned = next_aligned;
        costs.push(next_cost);
        let improvement = cost - next_cost;
        cost = next_cost;
        if improvement <= KARCHER_REL_TOL * cost.max(1e-12) {
            break;
        }
    }

    Ok(KarcherMean { mean, costs })
}

fn pick_initial(qs: &[Srvf]) -> usize {
    let mut best = 0;
    let mut best_sum = f64::INFINITY;
    for (i, q) in qs.iter().enumerate() {
        let sum: f64 = qs.iter().map(|other| q.dist(other)).sum();
        if sum < best_sum {
            best_sum = sum;
            best = i;
        }
    }
    best
}

/// Mean of srvfs anchored at the first element, so identical inputs average
/// to themselves bit-exactly.
fn centered_mean(values: &[Srvf]) -> Srvf {
    let t = values[0].sample_count();
    let inv = 1.0 / values.len() as f64;
    let mut out = Vec::with_capacity(t);
    for k in 0..t {
        let base = values[0].values[k];
        let mut delta = Point::ORIGIN;
        for v in &values[1..] {
            delta = delta.add(&v.values[k].sub(&base));
        }
        out.push(base.add(&delta.scale(inv)));
    }
    Srvf { values: out }
}

/// Similarity-transform a curve so its endpoints land on (va, vb).
///
/// The rotation is the minimal one carrying the source chord direction onto
/// the destination chord direction. A closed input (coincident endpoints) is
/// instead scaled so its arc length matches the destination chord and
/// translated to start at `va`.
pub fn fit_to_chord(curve: &EdgeCurve, va: Point, vb: Point) -> EdgeCurve {
    let chord_dst = vb.sub(&va);
    let first = curve.first();
    let chord_src = curve.last().sub(&first);
    let ns = chord_src.norm();
    let nd = chord_dst.norm();

    let pts: Vec<Point> = if ns < 1e-9 {
        let len = edge_length(curve).max(1e-12);
        let scale = nd / len;
        curve
            .points()
            .iter()
            .map(|p| va.add(&p.sub(&first).scale(scale)))
            .collect()
    } else {
        let scale = nd / ns;
        let src_dir = chord_src.scale(1.0 / ns);
        let dst_dir = chord_dst.scale(1.0 / nd);
        curve
            .points()
            .iter()
            .map(|p| {
                let local = p.sub(&first);
                va.add(&crate::geometry::rotate_align(&local, &src_dir, &dst_dir).scale(scale))
            })
            .collect()
    };
    let mut out = EdgeCurve::new(pts).expect("transform preserves sample count");
    if ns >= 1e-9 {
        out.snap_endpoints(va, vb);
    }
    out
}

/// Mean edge of a set of curves, fit to run exactly from `va` to `vb`.
///
/// Each input is similarity-transformed onto the destination chord, the
/// Karcher mean of their srvfs is integrated back into a curve, and that
/// curve is fit to the chord and resampled to `t` points.
pub fn mean_edge(edges: &[EdgeCurve], va: Point, vb: Point, t: usize) -> Result<EdgeCurve> {
    if edges.is_empty() {
        return Err(Error::EmptyMean);
    }
    if va.dist(&vb) < 1e-12 {
        return Err(Error::InvalidArgument(
            "mean edge destinations coincide".into(),
        ));
    }
    let qs: Vec<Srvf> = edges
        .iter()
        .map(|e| to_srvf(&resample_edge(&fit_to_chord(e, va, vb), t)))
        .collect();
    let mean = karcher_mean(&qs)?;
    let curve = from_srvf(&mean);
    // A degenerate mean (zero chord) cannot be fit; fall back to the chord
    // segment itself.
    let fitted = if curve.last().sub(&curve.first()).norm() < 1e-9 {
        EdgeCurve::segment(va, vb, t)
    } else {
        resample_edge(&fit_to_chord(&curve, va, vb), t)
    };
    let mut out = fitted;
    out.snap_endpoints(va, vb);
    Ok(out)
}
