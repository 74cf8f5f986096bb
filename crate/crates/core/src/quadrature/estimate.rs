use serde::{Deserialize, Serialize};

/// A numerical value with a nonnegative error bar and provenance.
///
/// `err` is a standard error for stochastic rules and a two-level difference
/// for deterministic ones; exact computations carry `err = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
    pub nodes_used: usize,
    pub seed: Option<u64>,
    pub method: String,
}

impl Estimate {
    pub fn exact(value: f64, method: impl Into<String>) -> Self {
        Estimate {
            value,
            err: 0.0,
            nodes_used: 0,
            seed: None,
            method: method.into(),
        }
    }

    pub fn new(value: f64, err: f64, method: impl Into<String>) -> Self {
        Estimate {
            value,
            err: err.abs(),
            nodes_used: 0,
            seed: None,
            method: method.into(),
        }
    }

    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }

    pub fn with_err(mut self, err: f64) -> Self {
        self.err = err.abs();
        self
    }

    pub fn relative_err(&self) -> f64 {
        if self.value == 0.0 {
            if self.err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.err / self.value.abs()
        }
    }

    pub fn scale(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.err *= factor.abs();
        self
    }

    /// `value^exponent`, propagating the error to first order.
    pub fn powf(mut self, exponent: f64) -> Self {
        let v = self.value;
        self.value = v.powf(exponent);
        self.err *= (exponent * v.powf(exponent - 1.0)).abs();
        self
    }

    /// Product of independent estimates; relative errors add in quadrature.
    pub fn mul(&self, other: &Estimate) -> Estimate {
        let value = self.value * other.value;
        let err = (sq(self.err * other.value) + sq(other.err * self.value)).sqrt();
        self.merged(other, value, err)
    }

    pub fn div(&self, other: &Estimate) -> Estimate {
        let value = self.value / other.value;
        let err = (sq(self.err / other.value) + sq(self.value * other.err / (other.value * other.value)))
            .sqrt();
        self.merged(other, value, err)
    }

    pub fn add(&self, other: &Estimate) -> Estimate {
        let value = self.value + other.value;
        let err = self.combined_err(other);
        self.merged(other, value, err)
    }

    pub fn sub(&self, other: &Estimate) -> Estimate {
        let value = self.value - other.value;
        let err = self.combined_err(other);
        self.merged(other, value, err)
    }

    /// Error bars of two independent estimates combined in quadrature.
    pub fn combined_err(&self, other: &Estimate) -> f64 {
        (sq(self.err) + sq(other.err)).sqrt()
    }

    fn merged(&self, other: &Estimate, value: f64, err: f64) -> Estimate {
        Estimate {
            value,
            err,
            nodes_used: self.nodes_used + other.nodes_used,
            seed: self.seed.or(other.seed),
            method: self.method.clone(),
        }
    }
}

fn sq(x: f64) -> f64 {
    x * x
}
