//! Command-line grammars for sequences, functions, weights, and
//! normalizations.

use anyhow::{anyhow, bail, Context, Result};
use lacunary::dilated::{CoeffRule, Harmonic, Normalization, PeriodicFunction, WeightRule};
use lacunary::seqgen::{BlockRule, LacunarySequence, SequenceSpec};

fn parse_u64_pair(s: &str, what: &str) -> Result<(u64, u64)> {
    if let Some((a, b)) = s.split_once('/') {
        Ok((
            a.trim().parse().with_context(|| format!("{what}: bad numerator {a:?}"))?,
            b.trim().parse().with_context(|| format!("{what}: bad denominator {b:?}"))?,
        ))
    } else {
        Ok((s.trim().parse().with_context(|| format!("{what}: expected integer or p/q, got {s:?}"))?, 1))
    }
}

/// Sequence grammar:
///   pow2 | geo:T | geofloor:P/Q | powm1:B | squares | naturals
///   hlp:2,3[,no1] | exppower:C,BETA (rationals) | sidon
///   coinflip:P,SEED | blocks:L,SEED | blocks:pow5,SEED | blocks:powE,SEED
///   intervals:C,BETA,GAMMA,SEED | file:PATH | bin:PATH
pub fn parse_sequence(s: &str) -> Result<SequenceSpec> {
    let (head, rest) = match s.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (s, None),
    };
    let need = |r: Option<&str>| r.ok_or_else(|| anyhow!("sequence {head:?} needs parameters"));
    Ok(match head {
        "pow2" => SequenceSpec::GeometricInt { theta: 2 },
        "geo" => SequenceSpec::GeometricInt {
            theta: need(rest)?.parse().context("geo:THETA")?,
        },
        "geofloor" => {
            let (num, den) = parse_u64_pair(need(rest)?, "geofloor")?;
            SequenceSpec::GeometricFloor { num, den }
        }
        "powm1" => SequenceSpec::PowerMinusOne {
            base: need(rest)?.parse().context("powm1:BASE")?,
        },
        "pow2m1" => SequenceSpec::PowerMinusOne { base: 2 },
        "squares" => SequenceSpec::Squares,
        "naturals" => SequenceSpec::Naturals,
        "hlp" => {
            let parts: Vec<&str> = need(rest)?.split(',').collect();
            let include_one = !parts.last().is_some_and(|p| *p == "no1");
            let primes: Vec<u64> = parts
                .iter()
                .filter(|p| **p != "no1")
                .map(|p| p.parse().context("hlp prime"))
                .collect::<Result<_>>()?;
            SequenceSpec::Hlp { primes, include_one }
        }
        "exppower" => {
            let (c, beta) = need(rest)?
                .split_once(',')
                .ok_or_else(|| anyhow!("exppower:C,BETA"))?;
            let (c_num, c_den) = parse_u64_pair(c, "exppower c")?;
            let (bn, bd) = parse_u64_pair(beta, "exppower beta")?;
            SequenceSpec::ExpPower {
                c_num,
                c_den,
                beta_num: bn as u32,
                beta_den: bd as u32,
            }
        }
        "sidon" => SequenceSpec::GreedySidon,
        "coinflip" => {
            let (p, seed) = need(rest)?
                .split_once(',')
                .ok_or_else(|| anyhow!("coinflip:P,SEED"))?;
            let (p_num, p_den) = parse_u64_pair(p, "coinflip p")?;
            SequenceSpec::CoinFlip {
                p_num,
                p_den,
                seed: seed.parse().context("coinflip seed")?,
            }
        }
        "blocks" => {
            let (rule, seed) = need(rest)?
                .split_once(',')
                .ok_or_else(|| anyhow!("blocks:RULE,SEED"))?;
            let rule = if let Some(e) = rule.strip_prefix("pow") {
                BlockRule::PowerRule {
                    exponent: e.parse().context("blocks:powE")?,
                }
            } else {
                BlockRule::EqualLength(rule.parse().context("blocks:L")?)
            };
            SequenceSpec::BlockUniform {
                rule,
                seed: seed.parse().context("blocks seed")?,
            }
        }
        "intervals" => {
            let parts: Vec<&str> = need(rest)?.split(',').collect();
            if parts.len() != 4 {
                bail!("intervals:C,BETA,GAMMA,SEED");
            }
            let (c_num, c_den) = parse_u64_pair(parts[0], "intervals c")?;
            let (bn, bd) = parse_u64_pair(parts[1], "intervals beta")?;
            let (gn, gd) = parse_u64_pair(parts[2], "intervals gamma")?;
            SequenceSpec::IntervalFamily {
                c_num,
                c_den,
                beta_num: bn as u32,
                beta_den: bd as u32,
                gamma_num: gn as u32,
                gamma_den: gd as u32,
                seed: parts[3].parse().context("intervals seed")?,
            }
        }
        _ => bail!("unknown sequence spec {s:?}"),
    })
}

/// Load a sequence described either by a generator spec or by a data file
/// (`file:PATH` newline decimal, `bin:PATH` binary).
pub fn load_sequence(s: &str, n: usize) -> Result<LacunarySequence> {
    if let Some(path) = s.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return Ok(LacunarySequence::from_text(&text)?);
    }
    if let Some(path) = s.strip_prefix("bin:") {
        let bytes = std::fs::read(path).with_context(|| format!("reading {path}"))?;
        return Ok(LacunarySequence::from_binary(&bytes)?);
    }
    Ok(lacunary::seqgen::generate(&parse_sequence(s)?, n)?)
}

/// Function grammar: sawtooth | cos | indicator:A,B | cospoly:J,A,B;J,A,B
/// | fourier:sawtooth,M | fourier:indicator,A,B,M
pub fn parse_function(s: &str) -> Result<PeriodicFunction> {
    let (head, rest) = match s.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (s, None),
    };
    Ok(match head {
        "sawtooth" => PeriodicFunction::sawtooth(),
        "cos" => PeriodicFunction::cos(),
        "indicator" => {
            let (a, b) = rest
                .and_then(|r| r.split_once(','))
                .ok_or_else(|| anyhow!("indicator:A,B"))?;
            PeriodicFunction::indicator(a.parse()?, b.parse()?)?
        }
        "cospoly" => {
            let mut harmonics = Vec::new();
            for chunk in rest.ok_or_else(|| anyhow!("cospoly:J,A,B;..."))?.split(';') {
                let parts: Vec<&str> = chunk.split(',').collect();
                if parts.len() != 3 {
                    bail!("cospoly harmonic needs J,A,B, got {chunk:?}");
                }
                harmonics.push(Harmonic {
                    j: parts[0].parse()?,
                    a: parts[1].parse()?,
                    b: parts[2].parse()?,
                });
            }
            PeriodicFunction::CosPoly(harmonics)
        }
        "fourier" => {
            let parts: Vec<&str> = rest.ok_or_else(|| anyhow!("fourier:RULE,..,M"))?.split(',').collect();
            match parts.first() {
                Some(&"sawtooth") if parts.len() == 2 => PeriodicFunction::TruncatedFourier {
                    rule: CoeffRule::Sawtooth,
                    m: parts[1].parse()?,
                },
                Some(&"indicator") if parts.len() == 4 => PeriodicFunction::TruncatedFourier {
                    rule: CoeffRule::Indicator {
                        a: parts[1].parse()?,
                        b: parts[2].parse()?,
                    },
                    m: parts[3].parse()?,
                },
                _ => bail!("fourier:sawtooth,M or fourier:indicator,A,B,M"),
            }
        }
        _ => bail!("unknown function {s:?}"),
    })
}

pub fn parse_weights(s: &str) -> Result<WeightRule> {
    Ok(match s {
        "ones" => WeightRule::Ones,
        _ => {
            if let Some(e) = s.strip_prefix("power:") {
                WeightRule::Power { exponent: e.parse()? }
            } else {
                bail!("weights: ones | power:EXPONENT")
            }
        }
    })
}

pub fn parse_normalization(s: &str) -> Result<Normalization> {
    Ok(match s {
        "none" => Normalization::None,
        "sqrt-n" => Normalization::SqrtN,
        "sqrt-half-n" => Normalization::SqrtHalfN,
        "l2" => Normalization::EllTwoNorm,
        _ => {
            if let Some(v) = s.strip_prefix("custom:") {
                Normalization::Custom(v.parse()?)
            } else {
                bail!("norm: none | sqrt-n | sqrt-half-n | l2 | custom:VALUE")
            }
        }
    })
}
