//! Points in ℝ^d with the Euclidean metric.

use crate::error::{Result, UflError};
use crate::scalar::Scalar;

/// A point in ℝ^d. Coordinates are finite and `dim() >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T: Scalar = f64> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(UflError::input("point must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(UflError::input("point coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Point { coords: vec![T::zero(); dim.max(1)] }
    }

    /// Standard basis vector `e_axis` in ℝ^dim.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut p = Self::origin(dim);
        p.coords[axis] = T::one();
        p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn add(&self, other: &Point<T>) -> Result<Point<T>> {
        check_dims(self, other)?;
        Ok(Point {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| *a + *b).collect(),
        })
    }

    pub fn to_f64(&self) -> Point<f64> {
        Point { coords: self.coords.iter().map(|c| c.as_f64()).collect() }
    }
}

fn check_dims<T: Scalar>(a: &Point<T>, b: &Point<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(UflError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// Euclidean distance between two points of the same dimension.
pub fn distance<T: Scalar>(a: &Point<T>, b: &Point<T>) -> Result<T> {
    check_dims(a, b)?;
    Ok(distance_unchecked(a.coords(), b.coords()))
}

pub(crate) fn distance_unchecked<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x - *y;
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Angle at `apex` between the rays towards `a` and `b`, in `[0, π]`.
/// A zero-length ray yields angle 0.
pub fn angle_at(apex: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for ((p, x), y) in apex.iter().zip(a).zip(b) {
        let u = x - p;
        let v = y - p;
        dot += u * v;
        na += u * u;
        nb += v * v;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0).acos()
}
