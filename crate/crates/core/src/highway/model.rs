use super::{Endpoint, HighwayConfig, SensorReading};
use crate::density::{normal_interval_mass, normal_pdf};
use crate::geometry::SpanUnion;
use crate::model::MeasurementModel;
use crate::occlusion::MeasurementVisibility;

/// Probability that `N(mean, sd²)` falls in `[lo, hi]`.
pub fn censored_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return if mean >= lo && mean <= hi { 1.0 } else { 0.0 };
    }
    normal_interval_mass(lo, hi, mean, sd)
}

fn endpoint_factor(e: &Endpoint, truth: f64, sd: f64) -> f64 {
    match *e {
        Endpoint::Seen(v) => normal_pdf(v, truth, sd),
        Endpoint::Hidden { lo, hi } => censored_mass(lo, hi, truth, sd),
    }
}

/// `p(reading | x)` for `x = [lane, back, length]`: Gaussian in each seen
/// end, censored mass for each hidden end, zero in another lane.
pub fn reading_likelihood(reading: &SensorReading, x: &[f64], cfg: &HighwayConfig) -> f64 {
    if x[0].round() as usize != reading.lane {
        return 0.0;
    }
    let back = x[1];
    let front = x[1] + x[2];
    endpoint_factor(&reading.back, back, cfg.noise_sd)
        * endpoint_factor(&reading.front, front, cfg.noise_sd)
}

/// 0 when `z` lies entirely inside the union of the spans of visible
/// readings in nearer lanes, 1 otherwise. A reading that would be cut only
/// partly is still produced, as a partial reading.
pub fn tracker_meas_visibility(
    z: &SensorReading,
    visible: &[SensorReading],
    cfg: &HighwayConfig,
) -> f64 {
    let mut cover = SpanUnion::new();
    for v in visible.iter().filter(|v| v.lane < z.lane) {
        cover.insert(v.span(cfg));
    }
    if !cover.is_empty() && cover.contains_span(&z.span(cfg)) {
        0.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone)]
pub struct HighwayMeasVisibility {
    pub config: HighwayConfig,
}

impl MeasurementVisibility<SensorReading> for HighwayMeasVisibility {
    fn visibility(&self, z: &SensorReading, visible: &[SensorReading]) -> f64 {
        tracker_meas_visibility(z, visible, &self.config)
    }
}

/// The sensor as the tracker sees it.
#[derive(Debug, Clone)]
pub struct HighwayModel {
    pub config: HighwayConfig,
    /// Clutter expectations use this many centers per lane.
    pub clutter_grid: usize,
}

impl HighwayModel {
    pub fn new(config: HighwayConfig) -> Self {
        Self {
            config,
            clutter_grid: 40,
        }
    }
}

// Three-point Gauss-Hermite rule for a standard normal.
const GH_NODES: [f64; 3] = [-1.732_050_807_568_877_2, 0.0, 1.732_050_807_568_877_2];
const GH_WEIGHTS: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

impl MeasurementModel for HighwayModel {
    type Meas = SensorReading;

    fn detection_prob(&self, x: &[f64]) -> f64 {
        if self.config.in_field(x[1] + 0.5 * x[2]) {
            self.config.detection_prob
        } else {
            0.0
        }
    }

    fn likelihood(&self, x: &[f64], z: &SensorReading) -> f64 {
        reading_likelihood(z, x, &self.config)
    }

    fn clutter_rate(&self) -> f64 {
        self.config.clutter_rate
    }

    /// Lane and position uniform; full readings also carry a length uniform
    /// on the vehicle length range. A hidden end is treated as carrying no
    /// further density.
    fn clutter_density(&self, z: &SensorReading) -> f64 {
        let c = &self.config;
        let base = 1.0 / (c.lanes() as f64 * c.field_width());
        if z.is_full() {
            base / (c.length_range.1 - c.length_range.0).max(1.0)
        } else {
            base
        }
    }

    fn expect_over_measurement(&self, x: &[f64], g: &dyn Fn(&SensorReading) -> f64) -> f64 {
        let lane = x[0].round() as usize;
        let back = x[1];
        let front = x[1] + x[2];
        let sd = self.config.noise_sd;
        if sd == 0.0 {
            return g(&SensorReading::full(lane, back, front));
        }
        let mut acc = 0.0;
        for (a, wa) in GH_NODES.iter().zip(GH_WEIGHTS) {
            for (b, wb) in GH_NODES.iter().zip(GH_WEIGHTS) {
                acc += wa * wb * g(&SensorReading::full(lane, back + sd * a, front + sd * b));
            }
        }
        acc
    }

    fn expect_over_clutter(&self, g: &dyn Fn(&SensorReading) -> f64) -> f64 {
        let c = &self.config;
        let n = self.clutter_grid.max(1);
        let len = 0.5 * (c.length_range.0 + c.length_range.1);
        let mut acc = 0.0;
        for lane in 0..c.lanes() {
            for k in 0..n {
                let center = c.field.0 + (k as f64 + 0.5) / n as f64 * c.field_width();
                acc += g(&SensorReading::full(
                    lane,
                    center - 0.5 * len,
                    center + 0.5 * len,
                ));
            }
        }
        acc / (n * c.lanes()) as f64
    }
}
