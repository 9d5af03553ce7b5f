use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NFunction;
use crate::{Error, Result, Scalar};

const LLOG_FORM: &str = "(1+t)log(1+t)-t";

/// Serializable name of an N-function, as used in configuration files.
///
/// JSON form: `{"kind": "power", "alpha": 2.0}`. The compact form accepted
/// by [`FromStr`] is `kind[:param]`, e.g. `power:2`, `exp_minus`,
/// `power_log:2`, `llog`, `exp_power:2`; a string starting with `{` is
/// parsed as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NFunctionSpec {
    /// `coef · t^alpha`, with `coef = 1/alpha` when omitted.
    Power {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coef: Option<f64>,
    },
    ExpMinus,
    ExpPower {
        p: f64,
    },
    PowerLog {
        alpha: f64,
    },
    Llog {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        form: Option<String>,
    },
    Tabulated {
        nodes: Vec<(f64, f64)>,
    },
    Conjugate {
        of: Box<NFunctionSpec>,
    },
    Compose {
        outer: Box<NFunctionSpec>,
        inner: Box<NFunctionSpec>,
    },
    Sum {
        terms: Vec<(f64, NFunctionSpec)>,
    },
    Dilation {
        of: Box<NFunctionSpec>,
        factor: f64,
    },
}

impl NFunctionSpec {
    pub fn build<T: Scalar>(&self) -> Result<NFunction<T>> {
        Ok(match self {
            Self::Power { alpha, coef: None } => NFunction::power(T::lit(*alpha))?,
            Self::Power { alpha, coef: Some(c) } => NFunction::scaled_power(T::lit(*c), T::lit(*alpha))?,
            Self::ExpMinus => NFunction::exp_minus(),
            Self::ExpPower { p } => NFunction::exp_power(T::lit(*p))?,
            Self::PowerLog { alpha } => NFunction::power_log(T::lit(*alpha))?,
            Self::Llog { form } => {
                if let Some(f) = form {
                    let compact: String = f.chars().filter(|c| !c.is_whitespace()).collect();
                    if compact != LLOG_FORM && compact != "(1+t)ln(1+t)-t" {
                        return Err(Error::Config(format!("unsupported llog form `{f}`")));
                    }
                }
                NFunction::llog()
            }
            Self::Tabulated { nodes } => {
                let nodes: Vec<(T, T)> = nodes.iter().map(|&(t, g)| (T::lit(t), T::lit(g))).collect();
                NFunction::tabulated(&nodes)?
            }
            Self::Conjugate { of } => of.build::<T>()?.conjugate(),
            Self::Compose { outer, inner } => NFunction::compose(&outer.build()?, &inner.build()?),
            Self::Sum { terms } => {
                let built = terms
                    .iter()
                    .map(|(a, s)| Ok((T::lit(*a), s.build()?)))
                    .collect::<Result<Vec<_>>>()?;
                NFunction::linear_combination(&built)?
            }
            Self::Dilation { of, factor } => of.build::<T>()?.dilate(T::lit(*factor))?,
        })
    }
}

impl FromStr for NFunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (s, None),
        };
        let number = |name: &str| -> Result<f64> {
            let p = param.ok_or_else(|| Error::Config(format!("`{kind}` needs a parameter, e.g. `{kind}:2`")))?;
            p.parse::<f64>().map_err(|_| Error::Config(format!("bad {name} `{p}` in `{s}`")))
        };
        let no_param = |spec: Self| match param {
            None => Ok(spec),
            Some(_) => Err(Error::Config(format!("`{kind}` takes no parameter"))),
        };
        match kind {
            "power" => Ok(Self::Power { alpha: number("alpha")?, coef: None }),
            "exp_minus" => no_param(Self::ExpMinus),
            "exp_power" => Ok(Self::ExpPower { p: number("p")? }),
            "power_log" => Ok(Self::PowerLog { alpha: number("alpha")? }),
            "llog" => no_param(Self::Llog { form: None }),
            other => Err(Error::Config(format!("unknown N-function kind `{other}`"))),
        }
    }
}
