//! "Nice" tick grids: steps of 1, 2, 2.5 or 5 times a power of ten, with
//! labels formatted from exact integer arithmetic.

/// A step `mantissa * 10^exp10` with `mantissa` in `{10, 20, 25, 50}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NiceStep {
    pub mantissa: i64,
    pub exp10: i32,
}

impl NiceStep {
    pub fn value(&self) -> f64 {
        self.mantissa as f64 * 10f64.powi(self.exp10)
    }

    /// Decimals needed to print every multiple of this step.
    pub fn decimals(&self) -> u32 {
        let trailing_zero = self.mantissa % 10 == 0;
        let d = if trailing_zero {
            -(self.exp10 + 1)
        } else {
            -self.exp10
        };
        d.max(0) as u32
    }
}

const MANTISSAS: [i64; 4] = [10, 20, 25, 50];

/// Smallest nice step that is at least `raw`.
pub fn nice_step(raw: f64) -> NiceStep {
    assert!(
        raw > 0.0 && raw.is_finite(),
        "nice_step needs a positive step, got {raw}"
    );
    let mut exp10 = raw.log10().floor() as i32 - 2;
    loop {
        for m in MANTISSAS {
            let s = NiceStep { mantissa: m, exp10 };
            // relative slack absorbs log10/powi rounding
            if s.value() >= raw * (1.0 - 1e-12) {
                return s;
            }
        }
        exp10 += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub label: String,
    /// Parsed from `label`, so the two agree exactly.
    pub value: f64,
}

/// Format `multiple * step` in plain decimal notation.
pub fn format_multiple(multiple: i64, step: NiceStep) -> String {
    let decimals = step.decimals() as i32;
    // integer count of 10^-decimals units
    let n = multiple as i128 * step.mantissa as i128;
    let shift = step.exp10 + decimals;
    let units: i128 = if shift >= 0 {
        n * 10i128.pow(shift as u32)
    } else {
        let d = 10i128.pow((-shift) as u32);
        debug_assert_eq!(n % d, 0);
        n / d
    };
    let neg = units < 0;
    let abs = units.unsigned_abs();
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    if decimals == 0 {
        s.push_str(&abs.to_string());
    } else {
        let p = 10u128.pow(decimals as u32);
        s.push_str(&format!(
            "{}.{:0width$}",
            abs / p,
            abs % p,
            width = decimals as usize
        ));
    }
    s
}

/// Nice ticks covering `[lo, hi]` with roughly `n` ticks (`n >= 2`).
pub fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<Tick> {
    assert!(lo < hi && n >= 2);
    let step = nice_step((hi - lo) / (n - 1) as f64);
    let sv = step.value();
    let j0 = (lo / sv + 1e-9).floor() as i64;
    let j1 = (hi / sv - 1e-9).ceil() as i64;
    let j1 = j1.max(j0 + 1);
    (j0..=j1)
        .map(|j| {
            let label = format_multiple(j, step);
            let value = label.parse::<f64>().expect("formatted tick parses");
            Tick { label, value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerate candidate steps over a wide exponent window and keep the
    /// smallest one that covers `raw`.
    fn oracle_step(raw: f64) -> f64 {
        let mut best = f64::INFINITY;
        for e in -12..=12 {
            for m in [1.0, 2.0, 2.5, 5.0] {
                let s = m * 10f64.powi(e);
                if s >= raw * (1.0 - 1e-12) && s < best {
                    best = s;
                }
            }
        }
        best
    }

    #[test]
    fn zero_to_forty_in_five() {
        let t = nice_ticks(0.0, 40.0, 5);
        let labels: Vec<&str> = t.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["0", "10", "20", "30", "40"]);
        assert_eq!(
            t.iter().map(|t| t.value).collect::<Vec<_>>(),
            [0.0, 10.0, 20.0, 30.0, 40.0]
        );
    }

    #[test]
    fn steps_match_enumeration() {
        let mut x = 1.37e-7;
        while x < 1e8 {
            let s = nice_step(x);
            let o = oracle_step(x);
            assert!(
                (s.value() - o).abs() <= 1e-12 * o,
                "raw {x}: {} vs {o}",
                s.value()
            );
            x *= 1.173;
        }
    }

    #[test]
    fn labels_are_exact_and_evenly_spaced() {
        let t = nice_ticks(-0.0123, 0.0031, 6);
        let labels: Vec<&str> = t.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["-0.015", "-0.010", "-0.005", "0.000", "0.005"]);
        assert!(t.first().unwrap().value <= -0.0123 && t.last().unwrap().value >= 0.0031);
        let t = nice_ticks(1.2e6, 8.7e6, 4);
        assert_eq!(t[0].label, "0");
        assert_eq!(t[1].label, "2500000");
    }

    #[test]
    fn decimals_follow_step() {
        assert_eq!(
            format_multiple(
                3,
                NiceStep {
                    mantissa: 25,
                    exp10: -1
                }
            ),
            "7.5"
        );
        assert_eq!(
            format_multiple(
                2,
                NiceStep {
                    mantissa: 25,
                    exp10: -1
                }
            ),
            "5.0"
        );
        assert_eq!(
            format_multiple(
                -2,
                NiceStep {
                    mantissa: 50,
                    exp10: -4
                }
            ),
            "-0.010"
        );
        assert_eq!(
            format_multiple(
                0,
                NiceStep {
                    mantissa: 20,
                    exp10: -3
                }
            ),
            "0.00"
        );
        assert_eq!(
            format_multiple(
                7,
                NiceStep {
                    mantissa: 10,
                    exp10: 2
                }
            ),
            "7000"
        );
    }
}
