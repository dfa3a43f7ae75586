//! Scalar abstraction shared by the geometry, the LP layer and the oracles.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the generic parts of the crate are written against.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Pivot / feasibility tolerance used by the simplex solver.
    const LP_EPS: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {
    const LP_EPS: f64 = 1e-5;
}

impl Scalar for f64 {
    const LP_EPS: f64 = 1e-9;
}
