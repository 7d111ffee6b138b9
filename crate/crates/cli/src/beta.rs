//! Weight grammar: `1` | `k` | `lin:lambda,mu` | comma-separated list.

use torsionlab::torsion_engine::BetaWeight;

#[derive(Clone, Debug, PartialEq)]
pub enum BetaSpec {
    Ones,
    Degrees,
    Linear(f64, f64),
    Explicit(Vec<f64>),
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("weight entry `{}` is not finite", s.trim()))
    }
}

impl std::str::FromStr for BetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "1" | "one" => return Ok(BetaSpec::Ones),
            "k" => return Ok(BetaSpec::Degrees),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("lin:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(format!("`lin:` takes two numbers, got `{rest}`"));
            }
            return Ok(BetaSpec::Linear(number(parts[0])?, number(parts[1])?));
        }
        let values = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("empty weight".into());
        }
        Ok(BetaSpec::Explicit(values))
    }
}

impl BetaSpec {
    /// Expands to a weight for a model of dimension `n`.
    pub fn weight(&self, n: usize) -> Result<BetaWeight, String> {
        match self {
            BetaSpec::Ones => Ok(BetaWeight::ones(n)),
            BetaSpec::Degrees => Ok(BetaWeight::degrees(n)),
            BetaSpec::Linear(l, m) => Ok(BetaWeight::linear(n, *l, *m)),
            BetaSpec::Explicit(v) if v.len() == n + 1 => Ok(BetaWeight(v.clone())),
            BetaSpec::Explicit(v) => Err(format!(
                "weight has {} entries but the dimension is {n} (expected {})",
                v.len(),
                n + 1
            )),
        }
    }
}
