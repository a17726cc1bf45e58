//! Upper bounds on `E_v[F(X_t)]` for polynomial, linear and quadratic set
//! functions, stated with the rate scale `kappa`.

use super::{Functional, PercolationModel};
use crate::error::{Error, Result};
use crate::expm::{expm_action, expm_dense};
use crate::matrix::{validate, SubsetState};
use crate::numeric::adaptive_simpson_vec;
use nalgebra::DMatrix;
use std::fmt;
use std::str::FromStr;

pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    Ia,
    Ib,
    Ic,
    IIa,
    IIb,
    IIc,
    IIIa,
    IIIb,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 8] = [
        BoundFamily::Ia,
        BoundFamily::Ib,
        BoundFamily::Ic,
        BoundFamily::IIa,
        BoundFamily::IIb,
        BoundFamily::IIc,
        BoundFamily::IIIa,
        BoundFamily::IIIb,
    ];

    /// The set function whose expectation the family bounds.
    pub fn target(&self, payload: &Payload, n: usize) -> Result<Functional> {
        let p = match self {
            BoundFamily::Ia => return Ok(Functional::Cardinality { p: 1 }),
            BoundFamily::Ib => return Ok(Functional::Cardinality { p: 2 }),
            BoundFamily::Ic => return Ok(Functional::Cardinality { p: 3 }),
            BoundFamily::IIa | BoundFamily::IIIa => 0,
            BoundFamily::IIb | BoundFamily::IIIb => 1,
            BoundFamily::IIc => 2,
        };
        match (self, payload) {
            (BoundFamily::IIa | BoundFamily::IIb | BoundFamily::IIc, Payload::Vector(x)) => {
                Ok(Functional::Linear { x: x.clone(), p })
            }
            (BoundFamily::IIIa | BoundFamily::IIIb, Payload::Matrix(g)) => {
                let mut flat = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        flat.push(g[(i, j)]);
                    }
                }
                Ok(Functional::Quadratic { g: flat, p })
            }
            _ => Err(Error::InvalidParameter(format!("family {self} needs a different payload"))),
        }
    }
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundFamily::Ia => "ia",
            BoundFamily::Ib => "ib",
            BoundFamily::Ic => "ic",
            BoundFamily::IIa => "iia",
            BoundFamily::IIb => "iib",
            BoundFamily::IIc => "iic",
            BoundFamily::IIIa => "iiia",
            BoundFamily::IIIb => "iiib",
        };
        f.write_str(s)
    }
}

impl FromStr for BoundFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundFamily::ALL
            .iter()
            .copied()
            .find(|f| f.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    Vector(Vec<f64>),
    Matrix(DMatrix<f64>),
}

enum Pre {
    Poly,
    Linear { y: Vec<f64>, factor_pow: i32, scale: f64 },
    Quadratic { h: DMatrix<f64>, w: Vec<f64>, scale_v: bool },
}

/// A family evaluated at a fixed `(model, t, payload)`; the `v`-independent
/// parts (exponential actions, time integrals) are computed once so that
/// [`ExpectationBound::evaluate`] is cheap per subset.
pub struct ExpectationBound {
    family: BoundFamily,
    kappa: f64,
    t: f64,
    pre: Pre,
}

fn indicator_dot(v: &SubsetState, y: &[f64]) -> f64 {
    v.iter().map(|i| y[i]).sum()
}

fn quad_form(v: &SubsetState, h: &DMatrix<f64>) -> f64 {
    v.iter().map(|i| v.iter().map(|j| h[(i, j)]).sum::<f64>()).sum()
}

fn diag(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

impl ExpectationBound {
    pub fn new(model: &PercolationModel, family: BoundFamily, t: f64, payload: &Payload) -> Result<Self> {
        let xi = model.xi();
        let n = xi.n();
        let report = validate(xi, false);
        if !report.rows_ok {
            return Err(Error::RowSumViolation(report.row_violations));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
        }
        let kappa = model.kappa();
        let kt = kappa * t;
        let x_of = |p: &Payload| -> Result<Vec<f64>> {
            match p {
                Payload::Vector(x) if x.len() == n => {
                    if x.iter().any(|&a| !(a >= 0.0)) {
                        return Err(Error::InvalidParameter("payload x must be nonnegative".into()));
                    }
                    Ok(x.clone())
                }
                Payload::Vector(x) => Err(Error::LengthMismatch { expected: n, got: x.len() }),
                _ => Err(Error::InvalidParameter(format!("family {family} needs a vector payload"))),
            }
        };
        let g_of = |p: &Payload| -> Result<DMatrix<f64>> {
            match p {
                Payload::Matrix(g) if g.nrows() == n && g.ncols() == n => {
                    if g.iter().any(|&a| !(a >= 0.0)) {
                        return Err(Error::InvalidParameter("payload G must be nonnegative".into()));
                    }
                    Ok(g.clone())
                }
                Payload::Matrix(g) => Err(Error::LengthMismatch { expected: n, got: g.nrows() }),
                _ => Err(Error::InvalidParameter(format!("family {family} needs a matrix payload"))),
            }
        };
        let plus_xi = |u: &[f64]| -> Vec<f64> {
            xi.matvec(u).iter().zip(u).map(|(a, b)| a + b).collect()
        };
        let pre = match family {
            BoundFamily::Ia | BoundFamily::Ib | BoundFamily::Ic => Pre::Poly,
            BoundFamily::IIa => {
                let x = x_of(payload)?;
                Pre::Linear { y: expm_action(xi, kt, &x), factor_pow: 0, scale: 1.0 }
            }
            BoundFamily::IIb => {
                let x = x_of(payload)?;
                Pre::Linear { y: expm_action(xi, kt, &plus_xi(&x)), factor_pow: 1, scale: kt.exp() }
            }
            BoundFamily::IIc => {
                let x = x_of(payload)?;
                let y = expm_action(xi, kt, &plus_xi(&plus_xi(&x)));
                Pre::Linear { y, factor_pow: 2, scale: 2.0 * (2.0 * kt).exp() }
            }
            BoundFamily::IIIa | BoundFamily::IIIb => {
                let g = g_of(payload)?;
                let xm = xi.to_matrix();
                let g_at = |s: f64| {
                    let e = expm_dense(&(&xm * (kappa * s)));
                    &e * &g * e.transpose()
                };
                let gt = g_at(t);
                if family == BoundFamily::IIIa {
                    // kappa int_0^t xi e^{kappa (t-s) xi} (G_s)_diag ds
                    let integrand = |s: f64| {
                        let d = diag(&g_at(s));
                        let y = expm_action(xi, kappa * (t - s), &d);
                        xi.matvec(&y)
                    };
                    let w: Vec<f64> = adaptive_simpson_vec(integrand, 0.0, t, QUADRATURE_TOL)
                        .into_iter()
                        .map(|a| kappa * a)
                        .collect();
                    Pre::Quadratic { h: gt, w, scale_v: false }
                } else {
                    let h = &xm * &gt + &gt * xm.transpose() + &gt;
                    // kappa int_0^t e^{kappa (t-s) xi} (I + xi) xi (xi G_s + G_s xi^T + 2 G_s)_diag ds
                    let integrand = |s: f64| {
                        let gs = g_at(s);
                        let inner = &xm * &gs + &gs * xm.transpose() + &gs * 2.0;
                        let d = diag(&inner);
                        let u = plus_xi(&xi.matvec(&d));
                        expm_action(xi, kappa * (t - s), &u)
                    };
                    let w: Vec<f64> = adaptive_simpson_vec(integrand, 0.0, t, QUADRATURE_TOL)
                        .into_iter()
                        .map(|a| kappa * a)
                        .collect();
                    Pre::Quadratic { h, w, scale_v: true }
                }
            }
        };
        Ok(ExpectationBound { family, kappa, t, pre })
    }

    pub fn family(&self) -> BoundFamily {
        self.family
    }

    pub fn evaluate(&self, v: &SubsetState) -> f64 {
        let k = v.len() as f64;
        let kt = self.kappa * self.t;
        match &self.pre {
            Pre::Poly => match self.family {
                BoundFamily::Ia => kt.exp() * k,
                BoundFamily::Ib => 2.0 * (2.0 * kt).exp() * k * k,
                _ => 8.0 * (3.0 * kt).exp() * k * k * k,
            },
            Pre::Linear { y, factor_pow, scale } => scale * k.powi(*factor_pow) * indicator_dot(v, y),
            Pre::Quadratic { h, w, scale_v } => {
                let base = quad_form(v, h) + indicator_dot(v, w);
                if *scale_v {
                    k * kt.exp() * base
                } else {
                    base
                }
            }
        }
    }
}

/// One-shot evaluation of a bound family at `(v, t)`.
pub fn expectation_bound(
    model: &PercolationModel,
    family: BoundFamily,
    v: &SubsetState,
    t: f64,
    payload: &Payload,
) -> Result<f64> {
    if v.ambient() != model.n() {
        return Err(Error::LengthMismatch { expected: model.n(), got: v.ambient() });
    }
    Ok(ExpectationBound::new(model, family, t, payload)?.evaluate(v))
}

/// Convenience: `G` as a dense matrix from a row-major buffer.
pub fn payload_matrix(n: usize, data: &[f64]) -> Payload {
    Payload::Matrix(DMatrix::from_row_slice(n, n, data))
}
