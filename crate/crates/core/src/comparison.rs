//! Spatially homogeneous logistic solutions that bound the PDE from above and
//! below, and the long-time limits of the bounding pair built from
//! (inf u, sup u).

use thiserror::Error;

use crate::regime::{neg, pos, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComparisonError {
    #[error("b + chi2*mu2 - chi1*mu1 must be > 0, got {0}")]
    Denominator(f64),
    #[error("need 0 <= u_inf <= u_sup, got u_inf={u_inf}, u_sup={u_sup}")]
    Order { u_inf: f64, u_sup: f64 },
}

/// Below this |r| the closed form switches to its r → 0 limit.
pub const SMALL_RATE: f64 = 1e-12;

/// W(t) for W' = W(r − qW), W(0) = w0 (q ≥ 0, w0 ≥ 0).
pub fn logistic(r: f64, q: f64, w0: f64, t: f64) -> f64 {
    if w0 == 0.0 {
        return 0.0;
    }
    if q == 0.0 {
        return w0 * (r * t).exp();
    }
    if r.abs() < SMALL_RATE {
        return w0 / (1.0 + q * w0 * t);
    }
    if r > 0.0 {
        // divided through by e^{rt} so large rt does not overflow
        let decay = (-r * t).exp();
        r * w0 / (r * decay - q * w0 * (-r * t).exp_m1())
    } else {
        let grow = (r * t).exp();
        r * w0 * grow / (r + q * w0 * (r * t).exp_m1())
    }
}

/// Which Green's-function split bounds χ2λ2v2 − χ1λ1v1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Divide by λ2, weight χ1μ1 on the λ1 − λ2 gap.
    Lam2,
    /// Divide by λ1, weight χ2μ2 on the gap.
    Lam1,
}

/// (P, N): χ2λ2v2 − χ1λ1v1 lies between P·inf u − N·sup u and P·sup u − N·inf u.
pub fn envelope_rates(p: &ModelParams, branch: Branch) -> (f64, f64) {
    let cross = p.repulsion() * p.lam2 - p.attraction() * p.lam1;
    let gap = p.lam1 - p.lam2;
    let (weight, divisor) = match branch {
        Branch::Lam2 => (p.attraction(), p.lam2),
        Branch::Lam1 => (p.repulsion(), p.lam1),
    };
    (
        (pos(cross) + weight * pos(gap)) / divisor,
        (neg(cross) + weight * neg(gap)) / divisor,
    )
}

/// Growth rate and self-limitation (r, q) of the upper and lower bounding
/// logistics: `[(r_lower, q), (r_upper, q)]`.
pub fn envelope_odes(
    p: &ModelParams,
    u_inf: f64,
    u_sup: f64,
    branch: Branch,
) -> Result<[(f64, f64); 2], ComparisonError> {
    let q = p.effective_b();
    if !(q > 0.0) {
        return Err(ComparisonError::Denominator(q));
    }
    if !(u_inf >= 0.0 && u_inf <= u_sup) {
        return Err(ComparisonError::Order { u_inf, u_sup });
    }
    let (pp, nn) = envelope_rates(p, branch);
    Ok([
        (p.a + pp * u_inf - nn * u_sup, q),
        (p.a + pp * u_sup - nn * u_inf, q),
    ])
}

/// t → ∞ limits (lower, upper) of the bounding logistics, λ2 split.
pub fn envelope_pair(
    p: &ModelParams,
    u_inf: f64,
    u_sup: f64,
) -> Result<(f64, f64), ComparisonError> {
    envelope_pair_branch(p, u_inf, u_sup, Branch::Lam2)
}

pub fn envelope_pair_branch(
    p: &ModelParams,
    u_inf: f64,
    u_sup: f64,
    branch: Branch,
) -> Result<(f64, f64), ComparisonError> {
    let [(r_lo, q), (r_hi, _)] = envelope_odes(p, u_inf, u_sup, branch)?;
    Ok((pos(r_lo) / q, pos(r_hi) / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rk4(r: f64, q: f64, w0: f64, t: f64, steps: usize) -> f64 {
        let f = |w: f64| w * (r - q * w);
        let h = t / steps as f64;
        let mut w = w0;
        for _ in 0..steps {
            let k1 = f(w);
            let k2 = f(w + 0.5 * h * k1);
            let k3 = f(w + 0.5 * h * k2);
            let k4 = f(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        w
    }

    #[test]
    fn logistic_examples() {
        assert!((logistic(2.0, 4.0, 0.5, 3.7) - 0.5).abs() < 1e-15);
        assert!((logistic(1.0, 1.0, 0.5, 50.0) - 1.0).abs() <= 1e-15);
        let w = logistic(1.0, 1.0, 0.5, 2f64.ln());
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
        assert!((w - rk4(1.0, 1.0, 0.5, 2f64.ln(), 2000)).abs() < 1e-10);
        assert_eq!(logistic(1.0, 1.0, 0.0, 5.0), 0.0);
        assert!((logistic(0.7, 0.0, 2.0, 1.0) - 2.0 * 0.7f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn small_rate_branch_is_continuous() {
        let at_zero = logistic(0.0, 2.0, 0.3, 4.0);
        assert!((at_zero - 0.3 / (1.0 + 2.4)).abs() < 1e-15);
        let near = logistic(1e-9, 2.0, 0.3, 4.0);
        assert!((near - at_zero).abs() < 1e-8);
    }

    #[test]
    fn negative_rate_decays() {
        let w = logistic(-1.0, 1.0, 0.5, 3.0);
        assert!((w - rk4(-1.0, 1.0, 0.5, 3.0, 4000)).abs() < 1e-10);
        assert!(logistic(-1.0, 1.0, 0.5, 800.0) >= 0.0);
    }

    #[test]
    fn envelope_examples() {
        let fisher = ModelParams::fisher(1.5, 2.0, 1);
        let (lo, hi) = envelope_pair(&fisher, 0.1, 3.0).unwrap();
        assert_eq!((lo, hi), (0.75, 0.75));

        let q = ModelParams::new(0.5, 1.0, 2.0, 1.0, 1.3, 1.3, 1.0, 2.0, 1).unwrap();
        let (lo, hi) = envelope_pair(&q, 0.5, 0.5).unwrap();
        assert_eq!((lo, hi), (0.5, 0.5));

        let q = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1).unwrap();
        let (lo, hi) = envelope_pair(&q, 0.8, 1.2).unwrap();
        assert!((hi - 1.2).abs() < 1e-15 && (lo - 0.8).abs() < 1e-15);
        // the bounding ODE integrated to t = 1000 settles on the closed-form limit
        let [(r_lo, qq), (r_hi, _)] = envelope_odes(&q, 0.8, 1.2, Branch::Lam2).unwrap();
        assert!((rk4(r_hi, qq, 1.2, 1000.0, 100_000) - hi).abs() < 1e-6);
        assert!((rk4(r_lo, qq, 0.8, 1000.0, 100_000) - lo).abs() < 1e-6);
    }

    #[test]
    fn envelope_rejects_bad_denominator() {
        let q = ModelParams::new(2.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(
            envelope_pair(&q, 0.1, 0.2),
            Err(ComparisonError::Denominator(-1.0))
        );
    }

    #[test]
    fn lam1_branch_matches_direct_transcription() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (c1, m1, l1, c2, m2, l2) = (
                rng.random_range(0.0..1.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..3.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.1..2.0),
                rng.random_range(0.1..3.0),
            );
            let a: f64 = rng.random_range(0.1..2.0);
            let b = c1 * m1 + rng.random_range(0.1..2.0);
            let p = ModelParams::new(c1, c2, m1, m2, l1, l2, a, b, 1).unwrap();
            let (ui, us) = (rng.random_range(0.0..1.0), rng.random_range(1.0..2.0));
            let cross = c2 * m2 * l2 - c1 * m1 * l1;
            let plus = (cross.max(0.0) + c2 * m2 * (l1 - l2).max(0.0)) / l1;
            let minus = ((-cross).max(0.0) + c2 * m2 * (l2 - l1).max(0.0)) / l1;
            let d = b + c2 * m2 - c1 * m1;
            let upper = (a + plus * us - minus * ui).max(0.0) / d;
            let lower = (a + plus * ui - minus * us).max(0.0) / d;
            let (lo, hi) = envelope_pair_branch(&p, ui, us, Branch::Lam1).unwrap();
            assert!((hi - upper).abs() <= 1e-14 * upper.max(1.0));
            assert!((lo - lower).abs() <= 1e-14 * lower.max(1.0));
        }
    }

    fn params() -> impl Strategy<Value = ModelParams> {
        (
            0.0..1.0f64,
            0.0..1.0f64,
            0.1..2.0f64,
            0.1..2.0f64,
            0.1..3.0f64,
            0.1..3.0f64,
            0.1..2.0f64,
            0.1..2.0f64,
        )
            .prop_map(|(c1, c2, m1, m2, l1, l2, a, extra)| {
                ModelParams::new(c1, c2, m1, m2, l1, l2, a, c1 * m1 + extra, 1).unwrap()
            })
    }

    proptest! {
        #[test]
        fn logistic_monotone_in_initial_value(
            r in -2.0..2.0f64, q in 0.0..3.0f64, w in 0.0..3.0f64, dw in 0.0..1.0f64, t in 0.0..20.0f64
        ) {
            prop_assert!(logistic(r, q, w, t) <= logistic(r, q, w + dw, t) * (1.0 + 1e-14));
        }

        #[test]
        fn logistic_stays_between_start_and_capacity(
            r in 0.01..2.0f64, q in 0.01..3.0f64, w in 0.001..3.0f64, t in 0.0..40.0f64
        ) {
            let cap = r / q;
            let v = logistic(r, q, w, t);
            prop_assert!(v >= w.min(cap) * (1.0 - 1e-13) && v <= w.max(cap) * (1.0 + 1e-13));
        }

        #[test]
        fn envelope_brackets_equilibrium(p in params(), lo in 0.0..1.0f64, hi in 1.0..2.0f64) {
            let ue = p.a / p.b;
            let (l, u) = envelope_pair(&p, lo * ue, hi * ue).unwrap();
            prop_assert!(l <= ue * (1.0 + 1e-12));
            prop_assert!(u >= ue * (1.0 - 1e-12));
        }
    }
}
