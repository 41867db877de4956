//! Distribution distances and the Pearson chi-square goodness-of-fit test.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::sim::ShotCounts;

/// Pass/fail flag as printed in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    P,
    F,
}

impl Flag {
    pub fn from_pass(pass: bool) -> Flag {
        if pass {
            Flag::P
        } else {
            Flag::F
        }
    }

    pub fn passed(self) -> bool {
        self == Flag::P
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::P => "P",
            Flag::F => "F",
        })
    }
}

/// Half the L1 distance over the union of both supports.
pub fn tvd(p: &Distribution, q: &Distribution) -> f64 {
    let keys: BTreeSet<&str> = p.support().into_iter().chain(q.support()).collect();
    0.5 * keys.into_iter().map(|k| (p.prob(k) - q.prob(k)).abs()).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub stat: f64,
    pub dof: usize,
    pub p_value: f64,
    pub flag: Flag,
}

/// Pearson statistic of `observed` against `expected`, summed over the
/// expected support only. A single-outcome support gives `stat = 0, p = 1`.
pub fn chi_square_test(observed: &ShotCounts, expected: &Distribution, alpha: f64) -> ChiSquare {
    let support = expected.support();
    let dof = support.len().saturating_sub(1);
    let shots = observed.shots as f64;
    let stat = if dof == 0 {
        0.0
    } else {
        support
            .iter()
            .map(|&x| {
                let e = shots * expected.prob(x);
                let o = observed.counts.get(x).copied().unwrap_or(0) as f64;
                if e > 0.0 {
                    (o - e) * (o - e) / e
                } else {
                    0.0
                }
            })
            .sum()
    };
    let p_value = if dof == 0 { 1.0 } else { chi_square_sf(stat, dof) };
    ChiSquare {
        stat,
        dof,
        p_value,
        flag: Flag::from_pass(p_value >= alpha),
    }
}

/// Upper tail `P(X ≥ stat)` of a chi-square variable with `dof` degrees of
/// freedom.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    gamma_q(dof as f64 / 2.0, stat / 2.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, &c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

/// Modified Lentz evaluation.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn counts(pairs: &[(&str, u64)]) -> ShotCounts {
        let counts: BTreeMap<String, u64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        ShotCounts {
            shots: counts.values().sum(),
            counts,
            seed: 0,
        }
    }

    #[test]
    fn tvd_examples() {
        let a = Distribution::from_pairs([("0", 0.75), ("1", 0.25)]);
        let b = Distribution::from_pairs([("0", 0.5), ("1", 0.5)]);
        assert!((tvd(&a, &b) - 0.25).abs() < 1e-15);
        assert_eq!(tvd(&a, &a), 0.0);
        let zero = Distribution::from_pairs([("0", 1.0)]);
        let one = Distribution::from_pairs([("1", 1.0)]);
        assert_eq!(tvd(&zero, &one), 1.0);
    }

    #[test]
    fn chi_square_examples() {
        let half = Distribution::from_pairs([("0", 0.5), ("1", 0.5)]);
        let exact = chi_square_test(&counts(&[("0", 4096), ("1", 4096)]), &half, 0.01);
        assert_eq!(exact.stat, 0.0);
        assert_eq!(exact.p_value, 1.0);
        assert_eq!(exact.flag, Flag::P);

        // (6000−4096)²/4096 + (2192−4096)²/4096
        let skew = chi_square_test(&counts(&[("0", 6000), ("1", 2192)]), &half, 0.01);
        assert!((skew.stat - 1770.125).abs() < 1e-9);
        assert!(skew.p_value < 1e-300 || skew.p_value == 0.0);
        assert_eq!(skew.flag, Flag::F);

        let single = chi_square_test(&counts(&[("1", 10)]), &Distribution::from_pairs([("1", 1.0)]), 0.01);
        assert_eq!((single.stat, single.p_value, single.dof), (0.0, 1.0, 0));
    }

    #[test]
    fn unexpected_outcomes_do_not_enter_the_sum() {
        let half = Distribution::from_pairs([("00", 0.5), ("11", 0.5)]);
        let c = chi_square_test(&counts(&[("00", 50), ("11", 50), ("01", 3)]), &half, 0.01);
        // E = 51.5 for both expected outcomes.
        assert!((c.stat - 2.0 * 1.5 * 1.5 / 51.5).abs() < 1e-12);
    }

    #[test]
    fn known_quantiles() {
        // 99th percentile of chi-square(1) is 6.634897.
        assert!((chi_square_sf(6.634_896_601_021_214, 1) - 0.01).abs() < 1e-9);
        // 95th percentile of chi-square(10) is 18.307038.
        assert!((chi_square_sf(18.307_038_053_275_146, 10) - 0.05).abs() < 1e-9);
        // dof 2 is exponential: Q = exp(-x/2).
        for x in [0.1, 1.0, 5.0, 40.0] {
            assert!((chi_square_sf(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn ln_gamma_at_integers_and_halves() {
        let mut fact = 1.0f64;
        for n in 1..30 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12 * fact.ln().abs().max(1.0));
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }
}
