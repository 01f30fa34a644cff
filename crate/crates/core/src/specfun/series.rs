//! Two-tier power-series evaluator for series whose coefficients are
//! products and quotients of gamma functions at arguments linear in the
//! index:
//!
//!   t_r(x) = C * Π Γ(a_i + α_i r) / (Π Γ(b_j + β_j r) * [r!]) * x^r
//!
//! Tier 1 scans terms in log space with f64 log-gamma, sums with Kahan
//! compensation, and tracks an a-posteriori rounding estimate. When the
//! alternating-series overshoot makes f64 cancellation-unsafe (or terms
//! exceed f64 range) the sum is redone in MPFR at a precision sized from
//! the measured overshoot (tier 2). Truncation is certified by a geometric
//! bound built from exact integer-shift gamma ratios plus Wendel's
//! inequality, with the alternating-remainder bound used when it is
//! sharper.

use rug::float::Round;
use rug::ops::AssignRound;
use rug::Float;

use super::gamma::{gamma_ratio_lower, gamma_ratio_upper, ln_gamma};
use super::{SeriesResult, SpecFunError};

/// Treat |Δ| below this as "boundary" (finite radius): user-supplied orders
/// like 0.3+0.7 do not sum to 1 exactly in f64.
const DELTA_EPS: f64 = 1e-9;
/// ln-threshold beyond which exp() would overflow f64.
const LN_F64_MAX: f64 = 709.0;
/// Relative error assumed for one f64 log-gamma evaluation.
const LGAMMA_REL: f64 = 1e-15;
/// Escalate to the MPFR tier when the f64 rounding estimate exceeds this
/// fraction of the requested tolerance.
const ROUNDING_FRACTION: f64 = 0.25;
const MAX_PREC_BITS: u32 = 1 << 20;

#[derive(Clone, Debug)]
pub(crate) struct GammaSeries {
    /// ln of a constant positive prefactor applied to every term.
    pub const_ln: f64,
    /// Γ(a + α r) numerator factors; requires a > 0, α >= 0.
    pub num: Vec<(f64, f64)>,
    /// Γ(b + β r) denominator factors; requires b > 0, β >= 0.
    pub den: Vec<(f64, f64)>,
    /// Whether terms carry a 1/r! factor.
    pub factorial: bool,
}

pub(crate) struct EvalOutcome {
    pub value: f64,
    pub terms_used: usize,
    pub truncation_bound: f64,
}

/// Shared high-precision coefficient table u_q = Γ(q+1)² / (Γ(αq+1) Γ(βq+1))
/// for the family of series Σ_r u_{m+r} x^r / r! indexed by the shift m.
/// The same table serves every shift, so the gamma evaluations are paid once
/// per index q instead of once per (shift, term); the per-term work in the
/// high-precision summation then collapses to a few multiplications.
pub(crate) struct MomentLadder {
    alpha: f64,
    beta: f64,
    prec: u32,
    u: Vec<Float>,
}

impl MomentLadder {
    pub(crate) fn new(alpha: f64, beta: f64) -> Self {
        MomentLadder {
            alpha,
            beta,
            prec: 0,
            u: Vec::new(),
        }
    }

    /// Make the table at least `len` long at precision >= `prec` bits.
    /// Raising precision discards and rebuilds (amortized by the 1.5× growth
    /// policy); extending appends at the current precision.
    fn ensure(&mut self, prec: u32, len: usize) {
        if prec > self.prec {
            self.prec = (prec + prec / 2).next_multiple_of(64);
            self.u.clear();
        }
        while self.u.len() < len {
            let q = self.u.len() as u32;
            let p = self.prec;
            let mut ln_u = Float::with_val(p, q + 1).ln_abs_gamma().0;
            ln_u *= 2u32;
            let a_arg = Float::with_val(p, self.alpha) * q + 1u32;
            ln_u -= a_arg.ln_abs_gamma().0;
            let b_arg = Float::with_val(p, self.beta) * q + 1u32;
            ln_u -= b_arg.ln_abs_gamma().0;
            self.u.push(ln_u.exp());
        }
    }
}

impl GammaSeries {
    /// Convergence exponent: term ratios behave like r^(-delta) * const.
    /// delta > 0: entire; delta == 0: finite radius; delta < 0: zero radius.
    pub(crate) fn delta(&self) -> f64 {
        let up: f64 = self.num.iter().map(|&(_, al)| al).sum();
        let lo: f64 = self.den.iter().map(|&(_, be)| be).sum();
        lo + if self.factorial { 1.0 } else { 0.0 } - up
    }

    /// Limit of the certified term-ratio envelope as r -> infinity, at |x|.
    fn limit_ratio(&self, x_abs: f64) -> f64 {
        if self.delta() > DELTA_EPS {
            return 0.0;
        }
        let mut ln_q = x_abs.ln();
        for &(_, al) in &self.num {
            if al > 0.0 {
                ln_q += al * al.ln();
            }
        }
        for &(_, be) in &self.den {
            if be > 0.0 {
                ln_q -= be * be.ln();
            }
        }
        // the factorial contributes a (1,1) lower pair: 1*ln(1) = 0
        ln_q.exp()
    }

    pub(crate) fn validate(&self) -> Result<(), SpecFunError> {
        for &(a, al) in &self.num {
            if !(a > 0.0 && a.is_finite() && al >= 0.0 && al.is_finite()) {
                return Err(SpecFunError::InvalidParams(format!(
                    "series numerator pair ({a}, {al}) must have offset > 0 and step >= 0"
                )));
            }
        }
        for &(b, be) in &self.den {
            if !(b > 0.0 && b.is_finite() && be >= 0.0 && be.is_finite()) {
                return Err(SpecFunError::InvalidParams(format!(
                    "series denominator pair ({b}, {be}) must have offset > 0 and step >= 0"
                )));
            }
        }
        if self.delta() < -DELTA_EPS {
            return Err(SpecFunError::InvalidParams(
                "series has zero radius of convergence (denominator order exceeds numerator order)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// ln of the (positive) coefficient of x^r, excluding const_ln, plus a
    /// crude magnitude tally used for rounding estimates.
    fn ln_coeff(&self, r: f64) -> (f64, f64) {
        let mut ln = 0.0;
        let mut scale = 0.0;
        for &(a, al) in &self.num {
            let g = ln_gamma(a + al * r);
            ln += g;
            scale += g.abs();
        }
        for &(b, be) in &self.den {
            let g = ln_gamma(b + be * r);
            ln -= g;
            scale += g.abs();
        }
        if self.factorial {
            let g = ln_gamma(r + 1.0);
            ln -= g;
            scale += g.abs();
        }
        (ln, scale)
    }

    /// Certified upper bound on |t_{r+1}| / |t_r|.
    fn ratio_env(&self, r: f64, x_abs: f64) -> f64 {
        let mut q = x_abs;
        for &(a, al) in &self.num {
            q *= gamma_ratio_upper(a + al * r, al);
        }
        for &(b, be) in &self.den {
            q /= gamma_ratio_lower(b + be * r, be);
        }
        if self.factorial {
            q /= r + 1.0;
        }
        q
    }

    /// Sup bound on term ratios over all indices > r: envelope on a
    /// geometric probe grid past r plus its r->infinity limit (the envelope
    /// decays like r^(-delta) once past the term peak; the probes guard the
    /// pre-asymptotic range).
    fn ratio_sup(&self, r: f64, x_abs: f64) -> f64 {
        let mut q = self.limit_ratio(x_abs);
        let mut step = 1.0;
        while step <= 64.0 {
            q = q.max(self.ratio_env(r + step, x_abs));
            step *= 2.0;
        }
        q * (1.0 + 1e-9)
    }

    /// Evaluate the series at x to absolute tolerance `tol`.
    pub(crate) fn evaluate(
        &self,
        x: f64,
        tol: f64,
        max_terms: usize,
    ) -> Result<EvalOutcome, SpecFunError> {
        self.evaluate_impl(x, tol, max_terms, None)
    }

    /// Evaluate when this series is the shift-m member of a ladder family
    /// (coefficient of x^r equal to u_{m+r} / r!): the certified scan is
    /// unchanged, but a high-precision pass reuses the shared table.
    pub(crate) fn evaluate_with_ladder(
        &self,
        x: f64,
        tol: f64,
        max_terms: usize,
        ladder: &mut MomentLadder,
        shift: usize,
    ) -> Result<EvalOutcome, SpecFunError> {
        self.evaluate_impl(x, tol, max_terms, Some((ladder, shift)))
    }

    fn evaluate_impl(
        &self,
        x: f64,
        tol: f64,
        max_terms: usize,
        ladder: Option<(&mut MomentLadder, usize)>,
    ) -> Result<EvalOutcome, SpecFunError> {
        self.validate()?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(SpecFunError::InvalidParams(format!(
                "tolerance must be positive and finite, got {tol}"
            )));
        }
        if !x.is_finite() {
            return Err(SpecFunError::InvalidParams(format!(
                "series argument must be finite, got {x}"
            )));
        }
        let prefactor = self.const_ln.exp();
        if x == 0.0 {
            let (c0, scale) = self.ln_coeff(0.0);
            let value = prefactor * c0.exp();
            return Ok(EvalOutcome {
                value,
                terms_used: 1,
                truncation_bound: value.abs() * (scale + self.const_ln.abs() + 4.0) * LGAMMA_REL,
            });
        }

        let x_abs = x.abs();
        let ln_x_abs = x_abs.ln();
        let alternating = x < 0.0;
        // The stop rule works on term magnitudes relative to the prefactor,
        // so rescale the tolerance accordingly.
        let tol_local = tol / prefactor.max(f64::MIN_POSITIVE);

        // ---- Pass 1: log-space scan with stop rule and certified tail ----
        let mut ln_terms: Vec<f64> = Vec::with_capacity(64);
        let mut scales: Vec<f64> = Vec::with_capacity(64);
        let mut max_ln = f64::NEG_INFINITY;
        let mut decreasing_streak = 0usize;
        let mut stop: Option<(usize, f64)> = None; // (last index summed, tail bound)
        let mut last_bound = f64::INFINITY;

        for r in 0..max_terms {
            let rf = r as f64;
            let (ln_c, scale) = self.ln_coeff(rf);
            let ln_t = ln_c + rf * ln_x_abs;
            if r > 0 && ln_t < ln_terms[r - 1] {
                decreasing_streak += 1;
            } else if r > 0 {
                decreasing_streak = 0;
            }
            ln_terms.push(ln_t);
            scales.push(scale + rf * ln_x_abs.abs());
            max_ln = max_ln.max(ln_t);

            // For a positive series the value is at least the largest term,
            // so an absolute tolerance below value*1e-17 is unattainable in
            // f64 output; loosen to that level. Alternating sums cancel, so
            // the requested tolerance stands (the MPFR tier delivers it).
            let eff_tol = if alternating {
                tol_local
            } else {
                tol_local.max((max_ln - 39.14).exp())
            };

            if decreasing_streak >= 3 {
                let q_here = self.ratio_env(rf, x_abs);
                let ln_next = ln_t + q_here.ln();
                // cheap pre-check before computing the probe grid
                if ln_next < eff_tol.ln() + 2.0 {
                    let q_sup = self.ratio_sup(rf, x_abs);
                    let mut bound = if q_sup < 1.0 {
                        ln_next.exp() / (1.0 - q_sup)
                    } else {
                        f64::INFINITY
                    };
                    if alternating && q_here <= 1.0 && q_sup <= 1.0 + 1e-9 {
                        // strict alternation: remainder bounded by the first
                        // omitted term once magnitudes are non-increasing
                        bound = bound.min(ln_next.exp());
                    }
                    last_bound = bound;
                    if bound < eff_tol {
                        stop = Some((r, bound));
                        break;
                    }
                }
            }
        }

        let (last_r, tail_rel) = stop.ok_or(SpecFunError::NonConvergence {
            terms_used: max_terms,
            bound: last_bound * prefactor,
        })?;
        let terms_used = last_r + 1;

        // ---- Pass 2: decide the summation tier ----
        // The tolerance pass 1 actually certified: alternating series keep
        // the request, positive series the loosened level; the tier choice
        // and the MPFR precision are sized against it, not the raw request.
        let eff_tol = if alternating {
            tol_local
        } else {
            tol_local.max((max_ln - 39.14).exp())
        };
        let mut rounding_rel = 0.0;
        let mut kahan = KahanSum::default();
        if max_ln < LN_F64_MAX {
            for r in 0..terms_used {
                let t = ln_terms[r].exp();
                let signed = if alternating && r % 2 == 1 { -t } else { t };
                kahan.add(signed);
                rounding_rel += t * (LGAMMA_REL * scales[r] + 5.0 * f64::EPSILON);
            }
        }
        let f64_ok = max_ln < LN_F64_MAX && rounding_rel <= ROUNDING_FRACTION * eff_tol;

        let (sum, round_rel) = if f64_ok {
            (kahan.value(), rounding_rel)
        } else if let Some((lad, shift)) = ladder {
            sum_mpfr_ladder(x, terms_used, max_ln, eff_tol, lad, shift)?
        } else {
            self.sum_mpfr(x, terms_used, max_ln, eff_tol)?
        };

        let value = prefactor * sum;
        let const_rel = LGAMMA_REL * self.const_ln.abs() + 4.0 * f64::EPSILON;
        let truncation_bound =
            prefactor * (tail_rel + round_rel) + value.abs() * const_rel;
        Ok(EvalOutcome {
            value,
            terms_used,
            truncation_bound,
        })
    }

    /// High-precision re-summation: every Γ argument is assembled exactly
    /// from the f64 parameters in MPFR, so the only errors are the final
    /// rounding at `prec` bits (sized from the measured overshoot).
    fn sum_mpfr(
        &self,
        x: f64,
        terms: usize,
        max_ln: f64,
        tol_local: f64,
    ) -> Result<(f64, f64), SpecFunError> {
        // Precision to keep `terms` roundings of magnitude up to e^max_ln
        // under the certified tolerance; a loose tolerance legitimately
        // lowers it, and the cast saturates a negative headroom to zero
        // (leaving the 96 guard bits).
        let headroom = max_ln - tol_local.ln() + (terms as f64).ln();
        let prec = ((headroom * std::f64::consts::LOG2_E) as u32).saturating_add(96);
        if prec > MAX_PREC_BITS {
            return Err(SpecFunError::NonConvergence {
                terms_used: terms,
                bound: f64::INFINITY,
            });
        }
        let ln_x_abs = Float::with_val(prec, x.abs()).ln();
        let alternating = x < 0.0;
        let mut sum = Float::with_val(prec, 0);
        let mut ln_t = Float::with_val(prec, 0);
        for r in 0..terms {
            ln_t.assign_round(0, Round::Nearest);
            for &(a, al) in &self.num {
                let arg = Float::with_val(prec, a) + Float::with_val(prec, al) * r as u32;
                ln_t += arg.ln_abs_gamma().0;
            }
            for &(b, be) in &self.den {
                let arg = Float::with_val(prec, b) + Float::with_val(prec, be) * r as u32;
                ln_t -= arg.ln_abs_gamma().0;
            }
            if self.factorial {
                let arg = Float::with_val(prec, r as u32 + 1);
                ln_t -= arg.ln_abs_gamma().0;
            }
            ln_t += Float::with_val(prec, &ln_x_abs * r as u32);
            let mut t = ln_t.clone().exp();
            if alternating && r % 2 == 1 {
                t = -t;
            }
            sum += t;
        }
        let value = sum.to_f64();
        Ok((value, mpfr_round_rel(max_ln, prec, terms, value)))
    }
}

/// Rounding allowance for an MPFR summation: per-term error is the peak
/// magnitude times 2^(-prec) amplified by the log-scale of the assembled
/// gamma terms (an absolute ln error turns into a relative value error);
/// the 96 guard bits keep this far below any requested tolerance.
fn mpfr_round_rel(max_ln: f64, prec: u32, terms: usize, value: f64) -> f64 {
    let scale = 4.0 * (4.0 + max_ln.abs() + (terms as f64 + 10.0).ln() * (terms as f64));
    (max_ln - (prec as f64) * std::f64::consts::LN_2).exp() * scale
        + value.abs() * f64::EPSILON
}

/// High-precision summation of Σ_r u_{shift+r} x^r / r! through a shared
/// coefficient table: per term one table lookup and a short multiplicative
/// recurrence, no gamma evaluations.
fn sum_mpfr_ladder(
    x: f64,
    terms: usize,
    max_ln: f64,
    tol_local: f64,
    ladder: &mut MomentLadder,
    shift: usize,
) -> Result<(f64, f64), SpecFunError> {
    let headroom = max_ln - tol_local.ln() + (terms as f64).ln();
    let prec = ((headroom * std::f64::consts::LOG2_E) as u32).saturating_add(96);
    if prec > MAX_PREC_BITS {
        return Err(SpecFunError::NonConvergence {
            terms_used: terms,
            bound: f64::INFINITY,
        });
    }
    ladder.ensure(prec, shift + terms + 1);
    let xf = Float::with_val(prec, x);
    let mut factor = Float::with_val(prec, 1); // x^r / r!
    let mut sum = Float::with_val(prec, 0);
    for r in 0..terms {
        if r > 0 {
            factor *= &xf;
            factor /= r as u32;
        }
        sum += Float::with_val(prec, &ladder.u[shift + r] * &factor);
    }
    let value = sum.to_f64();
    Ok((value, mpfr_round_rel(max_ln, prec, terms, value)))
}

/// Compensated (Kahan) accumulator.
#[derive(Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

impl From<EvalOutcome> for SeriesResult {
    fn from(o: EvalOutcome) -> Self {
        SeriesResult {
            value: o.value,
            terms_used: o.terms_used,
            truncation_bound: o.truncation_bound,
        }
    }
}
