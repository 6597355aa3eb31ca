use serde::{Deserialize, Serialize};

use crate::field::{fd_gradient, fd_laplacian, GridSpec, ScalarField, VectorField};

/// Closed-form real angle field with exact gradient and Laplacian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngleSpec {
    Constant {
        value: f64,
    },
    /// `offset + g·x`
    Linear {
        offset: f64,
        gradient: [f64; 2],
    },
    /// `offset + amplitude sin(k·x + phase)`
    Sinusoid {
        offset: f64,
        amplitude: f64,
        wavevector: [f64; 2],
        phase: f64,
    },
    Sum {
        terms: Vec<AngleSpec>,
    },
}

impl AngleSpec {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn linear(offset: f64, gradient: [f64; 2]) -> Self {
        Self::Linear { offset, gradient }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { offset, gradient } => offset + gradient[0] * p[0] + gradient[1] * p[1],
            Self::Sinusoid {
                offset,
                amplitude,
                wavevector: k,
                phase,
            } => offset + amplitude * (k[0] * p[0] + k[1] * p[1] + phase).sin(),
            Self::Sum { terms } => terms.iter().map(|t| t.value(p)).sum(),
        }
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            Self::Constant { .. } => [0.0, 0.0],
            Self::Linear { gradient, .. } => *gradient,
            Self::Sinusoid {
                amplitude,
                wavevector: k,
                phase,
                ..
            } => {
                let c = amplitude * (k[0] * p[0] + k[1] * p[1] + phase).cos();
                [c * k[0], c * k[1]]
            }
            Self::Sum { terms } => terms.iter().fold([0.0, 0.0], |acc, t| {
                let g = t.gradient(p);
                [acc[0] + g[0], acc[1] + g[1]]
            }),
        }
    }

    pub fn laplacian(&self, p: [f64; 2]) -> f64 {
        match self {
            Self::Constant { .. } | Self::Linear { .. } => 0.0,
            Self::Sinusoid {
                amplitude,
                wavevector: k,
                phase,
                ..
            } => -amplitude * (k[0] * k[0] + k[1] * k[1]) * (k[0] * p[0] + k[1] * p[1] + phase).sin(),
            Self::Sum { terms } => terms.iter().map(|t| t.laplacian(p)).sum(),
        }
    }

    /// True when the gradient is identically zero.
    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::Linear { gradient, .. } => gradient == &[0.0, 0.0],
            Self::Sinusoid {
                amplitude,
                wavevector,
                ..
            } => *amplitude == 0.0 || wavevector == &[0.0, 0.0],
            Self::Sum { terms } => terms.iter().all(Self::is_constant),
        }
    }
}

/// An angle sampled on a grid together with its gradient and Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledAngle {
    pub values: ScalarField<f64>,
    pub grad: VectorField<f64>,
    pub lap: ScalarField<f64>,
}

impl SampledAngle {
    pub fn from_spec(grid: &GridSpec, spec: &AngleSpec) -> Self {
        Self {
            values: ScalarField::sample(grid, |p| spec.value(p)),
            grad: VectorField::sample(grid, |p| spec.gradient(p)),
            lap: ScalarField::sample(grid, |p| spec.laplacian(p)),
        }
    }

    /// Gradient and Laplacian by finite differences of the sampled values.
    pub fn from_values(values: ScalarField<f64>) -> Self {
        let grad = fd_gradient(&values);
        let lap = fd_laplacian(&values);
        Self { values, grad, lap }
    }

    /// Values from one source, derivatives supplied directly. Used when the
    /// angle itself is only defined up to a branch choice.
    pub fn with_derivatives(
        values: ScalarField<f64>,
        grad: VectorField<f64>,
        lap: ScalarField<f64>,
    ) -> Self {
        Self { values, grad, lap }
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Self {
        Self::from_spec(grid, &AngleSpec::constant(value))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.values.grid
    }

    /// Adds a constant to the values; derivatives are unchanged.
    pub fn shifted(&self, by: f64) -> Self {
        Self {
            values: self.values.map(|v| v + by),
            grad: self.grad.clone(),
            lap: self.lap.clone(),
        }
    }

    pub fn max_gradient(&self) -> f64 {
        self.grad.max_magnitude()
    }
}
