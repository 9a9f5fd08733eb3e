use serde::{Deserialize, Serialize};

use super::LearnerError;

/// Kernel function. The linear kernel is `scale * <x, z>`, the radial basis
/// function `exp(-gamma * |x - z|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear { scale: f64 },
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear { scale } => scale * a.iter().zip(b).map(|(x, z)| x * z).sum::<f64>(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, z)| (x - z) * (x - z)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let (name, v) = match *self {
            Kernel::Linear { scale } => ("scale", scale),
            Kernel::Rbf { gamma } => ("gamma", gamma),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(LearnerError::Config(format!("kernel {name} must be positive, got {v}")))
        }
    }

    /// Ordering rank used in tie-breaking: linear before rbf.
    pub(crate) fn rank(&self) -> u8 {
        match self {
            Kernel::Linear { .. } => 0,
            Kernel::Rbf { .. } => 1,
        }
    }

    pub(crate) fn gamma_or_zero(&self) -> f64 {
        match *self {
            Kernel::Linear { .. } => 0.0,
            Kernel::Rbf { gamma } => gamma,
        }
    }
}

/// A kernel together with the Gaussian noise variance used by kernel
/// regression (ignored by the max-margin learners).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kernel: Kernel,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn new(kernel: Kernel, noise_variance: f64) -> Self {
        KernelSpec {
            kernel,
            noise_variance,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        self.kernel.validate()?;
        if self.noise_variance < 0.0 || !self.noise_variance.is_finite() {
            return Err(LearnerError::Config(format!(
                "noise variance must be non-negative, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }
}

/// Symmetric Gram matrix, row-major `n * n`.
pub fn gram_matrix(kernel: &Kernel, x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}
