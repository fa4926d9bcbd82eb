//! Piecewise-smooth end-effector paths with exact velocities.
//!
//! A curve is a sequence of segments joined end to start. Each segment is
//! split into smooth *pieces* (polyline legs, an arc, the four sides of a
//! square); integrators treat piece boundaries as step boundaries.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consecutive segments must join this closely.
pub const JOIN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    /// Straight legs between `points`, reached at the strictly increasing
    /// `times`. Times are local: only their differences matter.
    Polyline { points: Vec<Vec<f64>>, times: Vec<f64> },
    /// Planar circular arc traversed at constant angular speed.
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        duration: f64,
    },
    /// Counterclockwise boundary of the square `(z, z+s, z+s+is, z+is)` at
    /// unit speed, so it takes `4s`.
    SquareLoop { corner: [f64; 2], side: f64 },
}

/// A smooth piece on `[t0, t1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Piece {
    Linear {
        t0: f64,
        t1: f64,
        start: DVector<f64>,
        velocity: DVector<f64>,
    },
    Arc {
        t0: f64,
        t1: f64,
        center: [f64; 2],
        radius: f64,
        phase: f64,
        omega: f64,
    },
}

impl Piece {
    pub fn span(&self) -> (f64, f64) {
        match self {
            Piece::Linear { t0, t1, .. } | Piece::Arc { t0, t1, .. } => (*t0, *t1),
        }
    }

    pub fn position(&self, t: f64) -> DVector<f64> {
        match self {
            Piece::Linear { t0, start, velocity, .. } => start + velocity * (t - t0),
            Piece::Arc {
                t0,
                center,
                radius,
                phase,
                omega,
                ..
            } => {
                let th = phase + omega * (t - t0);
                DVector::from_vec(vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()])
            }
        }
    }

    pub fn velocity(&self, t: f64) -> DVector<f64> {
        match self {
            Piece::Linear { velocity, .. } => velocity.clone(),
            Piece::Arc {
                t0, radius, phase, omega, ..
            } => {
                let th = phase + omega * (t - t0);
                DVector::from_vec(vec![-radius * omega * th.sin(), radius * omega * th.cos()])
            }
        }
    }

    /// Largest speed on the piece.
    pub fn speed(&self) -> f64 {
        match self {
            Piece::Linear { velocity, .. } => velocity.norm(),
            Piece::Arc { radius, omega, .. } => (radius * omega).abs(),
        }
    }
}

/// A validated path: segments plus their pieces on a global clock from 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct CurveSpec {
    segments: Vec<Segment>,
    dim: usize,
    pieces: Vec<Piece>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CurveJson {
    segments: Vec<Segment>,
}

impl TryFrom<CurveJson> for CurveSpec {
    type Error = Error;

    fn try_from(raw: CurveJson) -> Result<Self> {
        CurveSpec::new(raw.segments)
    }
}

impl From<CurveSpec> for CurveJson {
    fn from(c: CurveSpec) -> Self {
        CurveJson { segments: c.segments }
    }
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

fn linear(t0: f64, t1: f64, p: &DVector<f64>, q: &DVector<f64>) -> Piece {
    Piece::Linear {
        t0,
        t1,
        start: p.clone(),
        velocity: (q - p) / (t1 - t0),
    }
}

fn segment_pieces(seg: &Segment, t: f64) -> Result<(usize, Vec<Piece>)> {
    match seg {
        Segment::Polyline { points, times } => {
            if points.len() < 2 || points.len() != times.len() {
                return Err(Error::invalid("polyline needs at least two points and one time per point"));
            }
            let dim = points[0].len();
            if dim < 2 || points.iter().any(|p| p.len() != dim) {
                return Err(Error::dims("polyline points must share one dimension >= 2"));
            }
            if !points.iter().all(|p| finite(p)) || !finite(times) {
                return Err(Error::invalid("polyline coordinates and times must be finite"));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("polyline times must be strictly increasing"));
            }
            let pts: Vec<DVector<f64>> = points.iter().map(|p| DVector::from_column_slice(p)).collect();
            let pieces = (0..pts.len() - 1)
                .map(|k| {
                    let t0 = t + times[k] - times[0];
                    let t1 = t + times[k + 1] - times[0];
                    linear(t0, t1, &pts[k], &pts[k + 1])
                })
                .collect();
            Ok((dim, pieces))
        }
        Segment::Arc {
            center,
            radius,
            start_angle,
            end_angle,
            duration,
        } => {
            if !finite(&[center[0], center[1], *radius, *start_angle, *end_angle, *duration]) {
                return Err(Error::invalid("arc parameters must be finite"));
            }
            if *radius < 0.0 || *duration <= 0.0 {
                return Err(Error::invalid("arc needs radius >= 0 and duration > 0"));
            }
            let piece = Piece::Arc {
                t0: t,
                t1: t + duration,
                center: *center,
                radius: *radius,
                phase: *start_angle,
                omega: (end_angle - start_angle) / duration,
            };
            Ok((2, vec![piece]))
        }
        Segment::SquareLoop { corner, side } => {
            if !finite(&[corner[0], corner[1], *side]) || *side <= 0.0 {
                return Err(Error::invalid("square loop needs a finite corner and side > 0"));
            }
            let s = *side;
            let (x, y) = (corner[0], corner[1]);
            let v = |a: f64, b: f64| DVector::from_vec(vec![a, b]);
            let corners = [v(x, y), v(x + s, y), v(x + s, y + s), v(x, y + s), v(x, y)];
            let pieces = (0..4)
                .map(|k| linear(t + k as f64 * s, t + (k + 1) as f64 * s, &corners[k], &corners[k + 1]))
                .collect();
            Ok((2, pieces))
        }
    }
}

impl CurveSpec {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("curve needs at least one segment"));
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut dim = None;
        let mut t = 0.0;
        for seg in &segments {
            let (d, ps) = segment_pieces(seg, t)?;
            if *dim.get_or_insert(d) != d {
                return Err(Error::dims("curve segments live in different dimensions"));
            }
            if let Some(prev) = pieces.last() {
                let end = prev.position(prev.span().1);
                let gap = (ps[0].position(t) - &end).norm();
                if gap > JOIN_TOL * (1.0 + end.norm()) {
                    return Err(Error::invalid(format!("curve is discontinuous at t = {t} (gap {gap:.3e})")));
                }
            }
            t = ps.last().map_or(t, |p| p.span().1);
            pieces.extend(ps);
        }
        Ok(CurveSpec {
            segments,
            dim: dim.unwrap_or(2),
            pieces,
        })
    }

    pub fn polyline(points: Vec<Vec<f64>>, times: Vec<f64>) -> Result<Self> {
        Self::new(vec![Segment::Polyline { points, times }])
    }

    /// Stay at `point` for `duration`.
    pub fn constant(point: Vec<f64>, duration: f64) -> Result<Self> {
        Self::polyline(vec![point.clone(), point], vec![0.0, duration])
    }

    pub fn arc(center: [f64; 2], radius: f64, start_angle: f64, end_angle: f64, duration: f64) -> Result<Self> {
        Self::new(vec![Segment::Arc {
            center,
            radius,
            start_angle,
            end_angle,
            duration,
        }])
    }

    pub fn square_loop(corner: [f64; 2], side: f64) -> Result<Self> {
        Self::new(vec![Segment::SquareLoop { corner, side }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn duration(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.span().1)
    }

    fn piece_at(&self, t: f64) -> &Piece {
        self.pieces
            .iter()
            .find(|p| t <= p.span().1)
            .unwrap_or_else(|| self.pieces.last().expect("curve has pieces"))
    }

    pub fn position(&self, t: f64) -> DVector<f64> {
        self.piece_at(t).position(t)
    }

    pub fn velocity(&self, t: f64) -> DVector<f64> {
        self.piece_at(t).velocity(t)
    }

    pub fn start(&self) -> DVector<f64> {
        self.pieces[0].position(0.0)
    }

    pub fn end(&self) -> DVector<f64> {
        self.position(self.duration())
    }

    pub fn is_closed(&self) -> bool {
        let (a, b) = (self.start(), self.end());
        (a - &b).norm() <= JOIN_TOL * (1.0 + b.norm())
    }

    /// The same path traversed backwards, as polylines and arcs.
    pub fn reversed(&self) -> Self {
        let segments = self
            .pieces
            .iter()
            .rev()
            .map(|p| match p {
                Piece::Linear { t0, t1, .. } => Segment::Polyline {
                    points: vec![
                        p.position(*t1).iter().copied().collect(),
                        p.position(*t0).iter().copied().collect(),
                    ],
                    times: vec![0.0, t1 - t0],
                },
                Piece::Arc {
                    t0,
                    t1,
                    center,
                    radius,
                    phase,
                    omega,
                } => Segment::Arc {
                    center: *center,
                    radius: *radius,
                    start_angle: phase + omega * (t1 - t0),
                    end_angle: *phase,
                    duration: t1 - t0,
                },
            })
            .collect();
        CurveSpec::new(segments).expect("reversal of a valid curve is valid")
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &CurveSpec) -> Result<Self> {
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().cloned());
        CurveSpec::new(segments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let src = r#"{"segments":[{"type":"polyline","points":[[0,0],[1,0]],"times":[0,1]},{"type":"square_loop","corner":[1,0],"side":0.5}]}"#;
        let c: CurveSpec = serde_json::from_str(src).unwrap();
        assert_eq!(c.pieces().len(), 5);
        assert!((c.duration() - 3.0).abs() < 1e-15);
        let back: CurveSpec = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn square_loop_corners() {
        let c = CurveSpec::square_loop([1.0, 2.0], 0.5).unwrap();
        assert!(c.is_closed());
        assert_eq!(c.duration(), 2.0);
        let p = c.position(1.0);
        assert!((p[0] - 1.5).abs() < 1e-15 && (p[1] - 2.5).abs() < 1e-15);
        assert_eq!(c.velocity(1.25).as_slice(), &[-1.0, 0.0]);
    }

    #[test]
    fn arc_velocity_is_derivative() {
        let c = CurveSpec::arc([0.5, -0.2], 1.3, 0.4, 2.0, 1.7).unwrap();
        let h = 1e-6;
        let t = 0.9;
        let fd = (c.position(t + h) - c.position(t - h)) / (2.0 * h);
        assert!((fd - c.velocity(t)).norm() < 1e-8);
    }

    #[test]
    fn rejects_gaps_and_bad_times() {
        let gap = vec![
            Segment::Polyline {
                points: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
                times: vec![0.0, 1.0],
            },
            Segment::SquareLoop {
                corner: [2.0, 0.0],
                side: 0.1,
            },
        ];
        assert!(CurveSpec::new(gap).is_err());
        assert!(CurveSpec::polyline(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![1.0, 1.0]).is_err());
        assert!(CurveSpec::polyline(vec![vec![0.0, 0.0], vec![1.0, 0.0, 0.0]], vec![0.0, 1.0]).is_err());
        assert!(CurveSpec::new(vec![]).is_err());
    }

    #[test]
    fn reversal_swaps_ends() {
        let c = CurveSpec::arc([0.0, 0.0], 1.0, 0.0, 1.0, 2.0)
            .unwrap()
            .then(&CurveSpec::polyline(vec![vec![1f64.cos(), 1f64.sin()], vec![0.0, 2.0]], vec![0.0, 0.5]).unwrap())
            .unwrap();
        let r = c.reversed();
        assert!((r.start() - c.end()).norm() < 1e-15);
        assert!((r.end() - c.start()).norm() < 1e-12);
        assert!((r.duration() - c.duration()).abs() < 1e-15);
    }
}
