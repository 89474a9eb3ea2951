//! The `kind:params` sequence mini-language.

use std::fmt;
use std::str::FromStr;

use muntz_core::sequences::{ExponentSequence, SequenceRule};
use muntz_core::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum SeqSpec {
    Rule(SequenceRule),
    List(Vec<f64>),
}

fn numbers<const N: usize>(kind: &str, rest: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != N {
        return Err(format!("`{kind}` takes {N} parameter(s), got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(out)
}

impl FromStr for SeqSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected kind:params, got `{s}`"))?;
        let rule = match kind {
            "power" => {
                let [exponent] = numbers(kind, rest)?;
                SequenceRule::Power { exponent }
            }
            "arithmetic" => {
                let [start, step] = numbers(kind, rest)?;
                SequenceRule::Arithmetic { start, step }
            }
            "progression" => {
                let [b] = numbers(kind, rest)?;
                SequenceRule::Progression { b }
            }
            "perturbed" => {
                let [start, step, amplitude] = numbers(kind, rest)?;
                SequenceRule::Perturbed { start, step, amplitude }
            }
            "list" => {
                let values = rest
                    .split(',')
                    .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                return Ok(SeqSpec::List(values));
            }
            other => return Err(format!("unknown sequence kind `{other}` (power, arithmetic, progression, perturbed, list)")),
        };
        Ok(SeqSpec::Rule(rule))
    }
}

impl fmt::Display for SeqSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqSpec::Rule(SequenceRule::Power { exponent }) => write!(f, "power:{exponent}"),
            SeqSpec::Rule(SequenceRule::Arithmetic { start, step }) => write!(f, "arithmetic:{start}:{step}"),
            SeqSpec::Rule(SequenceRule::Progression { b }) => write!(f, "progression:{b}"),
            SeqSpec::Rule(SequenceRule::Perturbed { start, step, amplitude }) => write!(f, "perturbed:{start}:{step}:{amplitude}"),
            SeqSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", parts.join(","))
            }
        }
    }
}

impl SeqSpec {
    /// Generators are materialized to `horizon`; lists are taken as given.
    pub fn build(&self, horizon: f64) -> Result<ExponentSequence> {
        match self {
            SeqSpec::Rule(rule) => ExponentSequence::generated(*rule, horizon),
            SeqSpec::List(v) => ExponentSequence::explicit(v.clone()),
        }
    }

    pub fn progression_parameter(&self) -> Option<f64> {
        match self {
            SeqSpec::Rule(SequenceRule::Progression { b }) => Some(*b),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        assert_eq!("power:2".parse::<SeqSpec>().unwrap(), SeqSpec::Rule(SequenceRule::Power { exponent: 2.0 }));
        assert_eq!(
            "arithmetic:0.3:1".parse::<SeqSpec>().unwrap(),
            SeqSpec::Rule(SequenceRule::Arithmetic { start: 0.3, step: 1.0 })
        );
        assert_eq!("progression:0.25".parse::<SeqSpec>().unwrap(), SeqSpec::Rule(SequenceRule::Progression { b: 0.25 }));
        assert_eq!("list:1.5,2.7,4.0".parse::<SeqSpec>().unwrap(), SeqSpec::List(vec![1.5, 2.7, 4.0]));
        assert!(matches!("perturbed:0:4:0.5".parse::<SeqSpec>().unwrap(), SeqSpec::Rule(SequenceRule::Perturbed { .. })));
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in ["power", "power:x", "power:1:2", "cubic:3", "list:1,,2", "arithmetic:1"] {
            assert!(bad.parse::<SeqSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["power:2", "arithmetic:0.3:1", "progression:0.25", "perturbed:0:4:0.5", "list:1.5,2.7,4"] {
            let spec: SeqSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<SeqSpec>().unwrap(), spec);
        }
    }
}
