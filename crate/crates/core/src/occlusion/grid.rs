//! Grid object-wise occlusion: the sensor's field of view is cut into
//! angular cells, one row of cells per lane. A cell in lane `L` is visible
//! when no object in a nearer lane covers it.

use std::sync::Arc;

use crate::bernoulli::PmbState;
use crate::density::StateDensity;
use crate::error::{Error, Result};
use crate::geometry::{segment_span, Span};
use crate::occlusion::{ObjectVisibility, ResolvedVisibility, Visibility};

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub lane_offsets: Vec<f64>,
    pub sensor: (f64, f64),
    /// Angular cell width in radians.
    pub cell_width: f64,
}

impl GridConfig {
    pub fn new(lane_offsets: Vec<f64>, sensor: (f64, f64), cell_width: f64) -> Result<Self> {
        if !(cell_width > 0.0) || lane_offsets.is_empty() {
            return Err(Error::InvalidConfig(
                "grid needs lanes and a positive cell width".into(),
            ));
        }
        Ok(Self {
            lane_offsets,
            sensor,
            cell_width,
        })
    }

    pub fn cells(&self) -> usize {
        (std::f64::consts::PI / self.cell_width).ceil() as usize
    }

    fn lane_of(&self, x: &[f64]) -> usize {
        (x[0].round().max(0.0) as usize).min(self.lane_offsets.len() - 1)
    }

    fn span(&self, x: &[f64]) -> (usize, Span) {
        let lane = self.lane_of(x);
        (
            lane,
            segment_span(self.sensor, self.lane_offsets[lane], x[1], x[1] + x[2]),
        )
    }

    fn center(&self, cell: usize) -> f64 {
        (cell as f64 + 0.5) * self.cell_width
    }

    /// Cells whose centers lie in `s`; the cell holding its midpoint when
    /// the span is narrower than a cell.
    fn cells_in(&self, s: &Span) -> std::ops::Range<usize> {
        let n = self.cells();
        let first = ((s.lo / self.cell_width) - 0.5).ceil().max(0.0) as usize;
        let last = ((s.hi / self.cell_width) - 0.5).floor();
        if last < 0.0 || (last as usize) < first {
            let mid = (0.5 * (s.lo + s.hi) / self.cell_width)
                .floor()
                .clamp(0.0, (n - 1) as f64) as usize;
            return mid..mid + 1;
        }
        first.min(n)..(last as usize + 1).min(n)
    }
}

/// Per-lane, per-cell visibility probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneGrid {
    pub config: GridConfig,
    /// `visibility[lane][cell]`.
    pub visibility: Vec<Vec<f64>>,
}

impl LaneGrid {
    pub fn new(config: GridConfig) -> Self {
        let visibility = vec![vec![1.0; config.cells()]; config.lane_offsets.len()];
        Self { config, visibility }
    }

    /// Recomputes every cell from the occluder estimates: a cell in lane `L`
    /// keeps `Π_k (1 − r_k · P(k covers the cell from a lane nearer than L))`.
    pub fn update(&mut self, occluders: &[(&StateDensity, f64)]) {
        let lanes = self.config.lane_offsets.len();
        let cells = self.config.cells();
        for row in &mut self.visibility {
            row.iter_mut().for_each(|v| *v = 1.0);
        }
        for (density, r) in occluders {
            if *r <= 0.0 {
                continue;
            }
            // cover[lane][cell]: probability the occluder sits in `lane` and covers `cell`.
            let mut cover = vec![vec![0.0; cells]; lanes];
            for_each_point(density, |x, w| {
                let (lane, s) = self.config.span(x);
                for c in self.config.cells_in(&s) {
                    if s.contains(self.config.center(c)) {
                        cover[lane][c] += w;
                    }
                }
            });
            for target_lane in 1..lanes {
                for c in 0..cells {
                    let p: f64 = (0..target_lane).map(|l| cover[l][c]).sum();
                    if p > 0.0 {
                        self.visibility[target_lane][c] *= 1.0 - r * p.min(1.0);
                    }
                }
            }
        }
    }

    /// Best visibility over the cells an object in state `x` spans.
    pub fn object_visibility(&self, x: &[f64]) -> f64 {
        let (lane, s) = self.config.span(x);
        let row = &self.visibility[lane];
        self.config.cells_in(&s).map(|c| row[c]).fold(0.0, f64::max)
    }
}

fn for_each_point(d: &StateDensity, mut f: impl FnMut(&[f64], f64)) {
    match d {
        StateDensity::Gaussian(g) => {
            let (pts, wts) = g.sigma_points();
            for (p, w) in pts.iter().zip(wts) {
                f(p.as_slice(), w);
            }
        }
        StateDensity::Particle(p) | StateDensity::Discrete(p) => {
            for (x, w) in p.iter() {
                f(x, w);
            }
        }
    }
}

/// Object-wise visibility read off a [`LaneGrid`] built from the current
/// track estimates.
#[derive(Debug, Clone)]
pub struct GridVisibility {
    pub config: GridConfig,
}

impl GridVisibility {
    pub fn build(&self, prior: &PmbState) -> LaneGrid {
        let mut grid = LaneGrid::new(self.config.clone());
        let mut occluders = Vec::new();
        for t in &prior.tracks {
            for (w, c) in &t.components {
                occluders.push((&c.density, w * c.existence));
            }
        }
        grid.update(&occluders);
        grid
    }
}

impl ObjectVisibility for GridVisibility {
    fn resolve(&self, prior: &PmbState) -> Result<ResolvedVisibility> {
        let grid = Arc::new(self.build(prior));
        let f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> =
            Arc::new(move |x: &[f64]| grid.object_visibility(x));
        Ok(ResolvedVisibility::uniform(prior, &Visibility::PerState(f)))
    }
}
