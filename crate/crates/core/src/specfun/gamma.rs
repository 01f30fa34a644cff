//! Gamma-function helpers: log-gamma for positive arguments and certified
//! two-sided bounds on ratios Γ(z+s)/Γ(z).

/// Natural log of Γ(x) for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    statrs::function::gamma::ln_gamma(x)
}

/// Upper bound on Γ(z+s)/Γ(z) for z > 0, s >= 0.
///
/// Splits s into an integer part (handled exactly as a product) and a
/// fractional part f in [0,1), for which Γ(z+f)/Γ(z) <= z^f (Wendel).
pub(crate) fn gamma_ratio_upper(z: f64, s: f64) -> f64 {
    debug_assert!(z > 0.0 && s >= 0.0);
    let (mut acc, z, f) = ratio_integer_part(z, s);
    if f > 0.0 {
        acc *= z.powf(f);
    }
    acc
}

/// Lower bound on Γ(z+s)/Γ(z) for z > 0, s >= 0.
///
/// Wendel's inequality: Γ(z+f)/Γ(z) >= z^f (z/(z+f))^(1-f) for f in [0,1].
pub(crate) fn gamma_ratio_lower(z: f64, s: f64) -> f64 {
    debug_assert!(z > 0.0 && s >= 0.0);
    let (mut acc, z, f) = ratio_integer_part(z, s);
    if f > 0.0 {
        acc *= z.powf(f) * (z / (z + f)).powf(1.0 - f);
    }
    acc
}

/// Peel off the integer part of the shift: returns (prod, z', f) with
/// Γ(z+s)/Γ(z) = prod * Γ(z'+f)/Γ(z'), f in [0,1).
fn ratio_integer_part(z: f64, s: f64) -> (f64, f64, f64) {
    let q = s.floor();
    let f = s - q;
    let mut acc = 1.0;
    let mut i = 0.0;
    while i < q {
        acc *= z + f + i;
        i += 1.0;
    }
    (acc, z, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_bounds_bracket_truth() {
        for &z in &[0.3, 1.0, 2.5, 10.0, 123.4] {
            for &s in &[0.0, 0.25, 0.5, 0.999, 1.0, 1.7, 3.2] {
                let truth = (ln_gamma(z + s) - ln_gamma(z)).exp();
                let lo = gamma_ratio_lower(z, s);
                let hi = gamma_ratio_upper(z, s);
                assert!(
                    lo <= truth * (1.0 + 1e-12) && truth <= hi * (1.0 + 1e-12),
                    "bracket failed at z={z}, s={s}: {lo} <= {truth} <= {hi}"
                );
            }
        }
    }
}
