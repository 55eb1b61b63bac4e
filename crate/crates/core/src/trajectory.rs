use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

/// Uniformly time-sampled sequence of fields, `t_i = i·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dt: f64,
    samples: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(dt: f64, samples: Vec<SpectralField>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let first = &samples[0];
        for s in &samples[1..] {
            first.ensure_same_shape(s)?;
        }
        Ok(Self { dt, samples })
    }

    /// A trajectory from a function of time evaluated on `steps + 1` nodes.
    pub fn from_fn<F>(dt: f64, steps: usize, f: F) -> Result<Self>
    where
        F: FnMut(f64) -> SpectralField,
    {
        let mut f = f;
        Self::new(dt, (0..=steps).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|i| i as f64 * self.dt).collect()
    }

    pub fn grid(&self) -> &Grid {
        self.samples[0].grid()
    }

    pub fn samples(&self) -> &[SpectralField] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<SpectralField> {
        self.samples
    }

    pub fn last(&self) -> &SpectralField {
        self.samples.last().expect("nonempty")
    }

    pub fn scaled(&self, a: f64) -> Trajectory {
        Trajectory {
            dt: self.dt,
            samples: self.samples.iter().map(|s| s.scaled(a)).collect(),
        }
    }

    pub fn ensure_aligned(&self, other: &Trajectory) -> Result<()> {
        if self.len() != other.len() || self.dt != other.dt {
            return Err(Error::InvalidParameter(format!(
                "time grids differ: {} samples at dt={} vs {} samples at dt={}",
                self.len(),
                self.dt,
                other.len(),
                other.dt
            )));
        }
        self.samples[0].ensure_same_shape(&other.samples[0])
    }

    /// Samplewise difference `self − other`.
    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        self.ensure_aligned(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            dt: self.dt,
            samples,
        })
    }
}
