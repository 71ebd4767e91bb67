//! Quadratic reduction of 19-point formant contours.
//!
//! The abscissa is the grid step `t = 0..=18`, so `a0` is the fitted value at
//! the 5% point and `a1`, `a2` are in Hz per step and Hz per step².

use serde::{Deserialize, Serialize};

use crate::formants::GRID_POINTS;
use crate::linalg::{Matrix, Qr};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContourError {
    #[error("contour value {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("expected {GRID_POINTS} contour values, got {0}")]
    WrongLength(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub rmse: f64,
    /// 1-based formant number, 0 when the contour is not tied to a formant.
    pub formant_index: u8,
}

impl PolyCoeffs {
    pub fn eval(&self, t: f64) -> f64 {
        eval_quadratic(self, t)
    }
}

pub fn eval_quadratic(c: &PolyCoeffs, t: f64) -> f64 {
    c.a0 + c.a1 * t + c.a2 * t * t
}

fn vandermonde() -> Matrix {
    let rows: Vec<Vec<f64>> = (0..GRID_POINTS)
        .map(|k| {
            let t = k as f64;
            vec![1.0, t, t * t]
        })
        .collect();
    Matrix::from_rows(&rows)
}

/// Least-squares quadratic through the 19 grid values.
pub fn fit_quadratic(values: &[f64]) -> Result<PolyCoeffs, ContourError> {
    if values.len() != GRID_POINTS {
        return Err(ContourError::WrongLength(values.len()));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(ContourError::NonFiniteInput { index });
    }
    let design = vandermonde();
    let qr = Qr::new(&design, 1e-12).expect("Vandermonde design on distinct nodes has full rank");
    let coef = qr.solve(values).expect("length checked above");
    let fitted = design.mul_vec(&coef);
    let sse: f64 = values
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f).powi(2))
        .sum();
    Ok(PolyCoeffs {
        a0: coef[0],
        a1: coef[1],
        a2: coef[2],
        rmse: (sse / GRID_POINTS as f64).sqrt(),
        formant_index: 0,
    })
}

/// Fits a contour and tags it with its formant number.
pub fn fit_formant(values: &[f64], formant_index: u8) -> Result<PolyCoeffs, ContourError> {
    Ok(PolyCoeffs {
        formant_index,
        ..fit_quadratic(values)?
    })
}
