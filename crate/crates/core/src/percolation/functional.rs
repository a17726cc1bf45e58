use super::SubsetFunction;
use crate::bounds::ModelConstants;
use crate::error::{Error, Result};
use crate::matrix::{c_of_v, chat_of_v, InteractionMatrix, SubsetState};

/// Named set functions `F(v)` used by the expectation engines.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `|v|^p`
    Cardinality { p: u32 },
    /// `|v|^p <1_v, x>`
    Linear { x: Vec<f64>, p: u32 },
    /// `|v|^p <1_v, G 1_v>`, `G` row-major `n x n`
    Quadratic { g: Vec<f64>, p: u32 },
    C(ModelConstants),
    CHat { constants: ModelConstants, h3: f64 },
}

/// Payloads and constants consulted when a functional is built from its name.
#[derive(Debug, Clone, Default)]
pub struct FunctionalContext {
    /// Defaults to the all-ones vector.
    pub x: Option<Vec<f64>>,
    /// Defaults to the entrywise square of `xi`.
    pub g: Option<Vec<f64>>,
    /// Defaults to `gamma = M = sigma = 1`.
    pub constants: Option<ModelConstants>,
    pub h3: f64,
}

impl Functional {
    /// Parses `card:p`, `linear[:p]`, `quadratic[:p]`, `C`, `Chat`.
    pub fn parse(name: &str, xi: &InteractionMatrix, ctx: &FunctionalContext) -> Result<Self> {
        let n = xi.n();
        let (head, power) = match name.split_once(':') {
            Some((h, p)) => {
                let p: u32 = p.parse().map_err(|_| Error::UnknownFunctional(name.to_string()))?;
                (h, Some(p))
            }
            None => (name, None),
        };
        let constants = ctx.constants.unwrap_or_default();
        let f = match (head, power) {
            ("card", p) => Functional::Cardinality { p: p.unwrap_or(1) },
            ("linear", p) => {
                let x = ctx.x.clone().unwrap_or_else(|| vec![1.0; n]);
                if x.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: x.len() });
                }
                Functional::Linear { x, p: p.unwrap_or(0) }
            }
            ("quadratic", p) => {
                let g = ctx.g.clone().unwrap_or_else(|| xi.entrywise_square().to_dense());
                if g.len() != n * n {
                    return Err(Error::LengthMismatch { expected: n * n, got: g.len() });
                }
                Functional::Quadratic { g, p: p.unwrap_or(0) }
            }
            ("C", None) => Functional::C(constants),
            ("Chat", None) | ("Ĉ", None) => Functional::CHat { constants, h3: ctx.h3 },
            _ => return Err(Error::UnknownFunctional(name.to_string())),
        };
        Ok(f)
    }

    pub fn name(&self) -> String {
        match self {
            Functional::Cardinality { p } => format!("card:{p}"),
            Functional::Linear { p, .. } => format!("linear:{p}"),
            Functional::Quadratic { p, .. } => format!("quadratic:{p}"),
            Functional::C(_) => "C".into(),
            Functional::CHat { .. } => "Chat".into(),
        }
    }

    pub fn evaluate(&self, xi: &InteractionMatrix, v: &SubsetState) -> Result<f64> {
        let k = v.len() as f64;
        Ok(match self {
            Functional::Cardinality { p } => k.powi(*p as i32),
            Functional::Linear { x, p } => k.powi(*p as i32) * v.iter().map(|i| x[i]).sum::<f64>(),
            Functional::Quadratic { g, p } => {
                let n = xi.n();
                let s: f64 = v.iter().map(|i| v.iter().map(|j| g[i * n + j]).sum::<f64>()).sum();
                k.powi(*p as i32) * s
            }
            Functional::C(c) => c_of_v(xi, v, c)?,
            Functional::CHat { constants, h3 } => chat_of_v(xi, v, constants, *h3)?,
        })
    }

    /// Tabulates the functional on all subsets.
    pub fn table(&self, xi: &InteractionMatrix) -> Result<SubsetFunction> {
        let n = xi.n();
        let mut err = None;
        let f = SubsetFunction::from_fn(n, |m| {
            self.evaluate(xi, &SubsetState::from_mask(n, m)).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_random_walk, Graph};

    #[test]
    fn parse_and_evaluate() {
        let xi = build_random_walk(&Graph::cycle(4).unwrap());
        let ctx = FunctionalContext::default();
        let v = SubsetState::from_indices(4, &[0, 1]).unwrap();
        assert_eq!(Functional::parse("card:2", &xi, &ctx).unwrap().evaluate(&xi, &v).unwrap(), 4.0);
        assert_eq!(Functional::parse("linear:1", &xi, &ctx).unwrap().evaluate(&xi, &v).unwrap(), 4.0);
        assert_eq!(Functional::parse("quadratic", &xi, &ctx).unwrap().evaluate(&xi, &v).unwrap(), 0.5);
        assert_eq!(Functional::parse("C", &xi, &ctx).unwrap().evaluate(&xi, &v).unwrap(), 0.5);
        assert!(Functional::parse("cubic", &xi, &ctx).is_err());
        assert!(Functional::parse("card:x", &xi, &ctx).is_err());
        let t = Functional::parse("card:1", &xi, &ctx).unwrap().table(&xi).unwrap();
        assert_eq!(t.get(0b1011), 3.0);
    }
}
