//! Closed-form thresholds, parameter-regime classification and spreading-speed
//! bounds for the attraction-repulsion system
//!
//! ```text
//! u_t = Δu − χ1 ∇·(u ∇v1) + χ2 ∇·(u ∇v2) + u (a − b u)
//!   0 = (Δ − λ1) v1 + μ1 u
//!   0 = (Δ − λ2) v2 + μ2 u
//! ```
//!
//! Every quantity here is a short composition of `+ − × ÷ √` in `f64`, so the
//! functions are total and cheap. Quantities that only exist under a hypothesis
//! are returned as [`Bound::NotApplicable`] carrying the hypothesis that failed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("{key} must be {constraint}")]
    OutOfDomain {
        key: &'static str,
        constraint: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegimeError {
    #[error("b = 0: no positive constant equilibrium")]
    NoPositiveEquilibrium,
    #[error("no sup-norm bound guaranteed: neither chi1 = a = b = 0 nor b > chi1*mu1 - chi2*mu2 + M holds")]
    NoBound,
}

/// The nine model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub chi1: f64,
    pub chi2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub lam1: f64,
    pub lam2: f64,
    pub a: f64,
    pub b: f64,
    pub dim: usize,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        chi1: f64,
        chi2: f64,
        mu1: f64,
        mu2: f64,
        lam1: f64,
        lam2: f64,
        a: f64,
        b: f64,
        dim: usize,
    ) -> Result<Self, ParamError> {
        let p = ModelParams {
            chi1,
            chi2,
            mu1,
            mu2,
            lam1,
            lam2,
            a,
            b,
            dim,
        };
        p.validate()?;
        Ok(p)
    }

    /// Pure logistic growth (no taxis), with unit chemical constants.
    pub fn fisher(a: f64, b: f64, dim: usize) -> Self {
        ModelParams {
            chi1: 0.0,
            chi2: 0.0,
            mu1: 1.0,
            mu2: 1.0,
            lam1: 1.0,
            lam2: 1.0,
            a,
            b,
            dim,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        fn check(ok: bool, key: &'static str, constraint: &'static str) -> Result<(), ParamError> {
            if ok {
                Ok(())
            } else {
                Err(ParamError::OutOfDomain { key, constraint })
            }
        }
        // NaN fails every comparison below, so it is rejected too.
        check(self.chi1 >= 0.0 && self.chi1.is_finite(), "chi1", ">= 0")?;
        check(self.chi2 >= 0.0 && self.chi2.is_finite(), "chi2", ">= 0")?;
        check(self.mu1 > 0.0 && self.mu1.is_finite(), "mu1", "> 0")?;
        check(self.mu2 > 0.0 && self.mu2.is_finite(), "mu2", "> 0")?;
        check(self.lam1 > 0.0 && self.lam1.is_finite(), "lam1", "> 0")?;
        check(self.lam2 > 0.0 && self.lam2.is_finite(), "lam2", "> 0")?;
        check(self.a >= 0.0 && self.a.is_finite(), "a", ">= 0")?;
        check(self.b >= 0.0 && self.b.is_finite(), "b", ">= 0")?;
        check(self.dim == 1 || self.dim == 2, "dim", "1 or 2")?;
        Ok(())
    }

    /// Same constants with both sensitivities multiplied by `scale`.
    pub fn with_chi_scaled(&self, scale: f64) -> Self {
        ModelParams {
            chi1: self.chi1 * scale,
            chi2: self.chi2 * scale,
            ..*self
        }
    }

    /// χ1 μ1, the attraction strength.
    #[inline]
    pub fn attraction(&self) -> f64 {
        self.chi1 * self.mu1
    }

    /// χ2 μ2, the repulsion strength.
    #[inline]
    pub fn repulsion(&self) -> f64 {
        self.chi2 * self.mu2
    }

    /// b + χ2 μ2 − χ1 μ1, the effective self-limitation of the rewritten equation.
    #[inline]
    pub fn effective_b(&self) -> f64 {
        self.b + self.repulsion() - self.attraction()
    }
}

#[inline]
pub fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[inline]
pub fn neg(x: f64) -> f64 {
    (-x).max(0.0)
}

/// The hypothesis that was not met when a derived quantity does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unmet {
    /// b + χ2μ2 − χ1μ1 − M ≤ 0 (the global-existence hypothesis fails).
    GlobalExistence,
    /// b ≤ χ1μ1 − χ2μ2 + K.
    Stability,
    /// 4a(1 − L) − N a² D² / denom² ≤ 0.
    Coercivity,
}

impl Unmet {
    pub fn describe(&self) -> &'static str {
        match self {
            Unmet::GlobalExistence => "global-existence hypothesis b > chi1*mu1 - chi2*mu2 + M fails",
            Unmet::Stability => "stability hypothesis b > chi1*mu1 - chi2*mu2 + K fails",
            Unmet::Coercivity => {
                "lower-speed hypothesis 4a(1-L) - N a^2 D^2 / (b + chi2*mu2 - chi1*mu1 - M)^2 > 0 fails"
            }
        }
    }
}

impl fmt::Display for Unmet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

/// A derived real that may be undefined for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    NotApplicable(Unmet),
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Bound::Value(v) => Some(v),
            Bound::NotApplicable(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Bound::Value(_))
    }

    /// The value, or the unmet hypothesis as an error.
    pub fn get(&self) -> Result<f64, Unmet> {
        match *self {
            Bound::Value(v) => Ok(v),
            Bound::NotApplicable(u) => Err(u),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Value(v) => write!(f, "{v}"),
            Bound::NotApplicable(u) => write!(f, "n/a ({u})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub m: f64,
    pub k: f64,
    pub d: f64,
    pub l: Bound,
    /// b + χ2μ2 − χ1μ1 − M
    pub denom: f64,
    /// a / denom
    pub c0_factor: Bound,
}

/// The two expressions whose minimum is M (bound on χ2λ2v2 − χ1λ1v1 per unit sup u).
pub fn m_branches(p: &ModelParams) -> [f64; 2] {
    let (c1, c2) = (p.attraction(), p.repulsion());
    let cross = pos(c2 * p.lam2 - c1 * p.lam1);
    [
        (cross + c1 * pos(p.lam1 - p.lam2)) / p.lam2,
        (cross + c2 * pos(p.lam1 - p.lam2)) / p.lam1,
    ]
}

pub fn k_branches(p: &ModelParams) -> [f64; 2] {
    let (c1, c2) = (p.attraction(), p.repulsion());
    let cross = (c1 * p.lam1 - c2 * p.lam2).abs();
    let gap = (p.lam1 - p.lam2).abs();
    [(cross + c1 * gap) / p.lam2, (cross + c2 * gap) / p.lam1]
}

/// The two expressions whose minimum is D, the per-unit bound on |∂(χ2v2 − χ1v1)|.
pub fn d_branches(p: &ModelParams) -> [f64; 2] {
    let (c1, c2) = (p.attraction(), p.repulsion());
    let (s1, s2) = (p.lam1.sqrt(), p.lam2.sqrt());
    let root_gap = (s1 - s2).abs();
    [
        (c2 - c1).abs() / (2.0 * s2) + c1 * root_gap / (2.0 * s1 * s2),
        (c1 - c2).abs() / (2.0 * s1) + c2 * root_gap / (2.0 * s1 * s2),
    ]
}

/// Numerators of the two L branches (before division by λ_i · denom).
pub fn l_numerators(p: &ModelParams) -> [f64; 2] {
    let (c1, c2) = (p.attraction(), p.repulsion());
    let cross = neg(c2 * p.lam2 - c1 * p.lam1);
    [
        (cross + c1 * neg(p.lam1 - p.lam2)) / p.lam2,
        (cross + c2 * neg(p.lam1 - p.lam2)) / p.lam1,
    ]
}

fn min2(v: [f64; 2]) -> f64 {
    v[0].min(v[1])
}

pub fn thresholds(p: &ModelParams) -> Thresholds {
    let m = min2(m_branches(p));
    let k = min2(k_branches(p));
    let d = min2(d_branches(p));
    let denom = p.effective_b() - m;
    let (l, c0_factor) = if denom > 0.0 {
        let [n2, n1] = l_numerators(p);
        (
            Bound::Value((n2 / denom).min(n1 / denom)),
            Bound::Value(p.a / denom),
        )
    } else {
        (
            Bound::NotApplicable(Unmet::GlobalExistence),
            Bound::NotApplicable(Unmet::GlobalExistence),
        )
    };
    Thresholds {
        m,
        k,
        d,
        l,
        denom,
        c0_factor,
    }
}

/// Sign regions of (λ1 − λ2, χ2μ2λ2 − χ1μ1λ1) on which the thresholds have
/// simple closed forms. Boundaries belong to both adjacent regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignRegion {
    /// λ1 ≤ λ2 and χ2μ2λ2 ≥ χ1μ1λ1
    FastRepellentRepulsive,
    /// λ1 ≤ λ2 and χ2μ2λ2 ≤ χ1μ1λ1
    FastRepellentAttractive,
    /// λ1 ≥ λ2 and χ2μ2λ2 ≥ χ1μ1λ1
    SlowRepellentRepulsive,
    /// λ1 ≥ λ2 and χ2μ2λ2 ≤ χ1μ1λ1
    SlowRepellentAttractive,
}

impl SignRegion {
    pub const ALL: [SignRegion; 4] = [
        SignRegion::FastRepellentRepulsive,
        SignRegion::FastRepellentAttractive,
        SignRegion::SlowRepellentRepulsive,
        SignRegion::SlowRepellentAttractive,
    ];

    pub fn contains(&self, p: &ModelParams) -> bool {
        let weighted = p.repulsion() * p.lam2 - p.attraction() * p.lam1;
        match self {
            SignRegion::FastRepellentRepulsive => p.lam1 <= p.lam2 && weighted >= 0.0,
            SignRegion::FastRepellentAttractive => p.lam1 <= p.lam2 && weighted <= 0.0,
            SignRegion::SlowRepellentRepulsive => p.lam1 >= p.lam2 && weighted >= 0.0,
            SignRegion::SlowRepellentAttractive => p.lam1 >= p.lam2 && weighted <= 0.0,
        }
    }

    pub fn of(p: &ModelParams) -> Vec<SignRegion> {
        SignRegion::ALL
            .into_iter()
            .filter(|r| r.contains(p))
            .collect()
    }

    fn label(&self) -> &'static str {
        match self {
            SignRegion::FastRepellentRepulsive => "lam1<=lam2 & chi2*mu2*lam2>=chi1*mu1*lam1",
            SignRegion::FastRepellentAttractive => "lam1<=lam2 & chi2*mu2*lam2<=chi1*mu1*lam1",
            SignRegion::SlowRepellentRepulsive => "lam1>=lam2 & chi2*mu2*lam2>=chi1*mu1*lam1",
            SignRegion::SlowRepellentAttractive => "lam1>=lam2 & chi2*mu2*lam2<=chi1*mu1*lam1",
        }
    }
}

/// Region-specific closed forms. These are independent transcriptions used to
/// cross-check the generic min-formulas; the simulator never calls them.
pub mod closed_form {
    use super::{ModelParams, SignRegion};

    pub fn m(region: SignRegion, p: &ModelParams) -> f64 {
        let (c1, c2) = (p.attraction(), p.repulsion());
        match region {
            SignRegion::FastRepellentRepulsive => c2 - p.lam1 / p.lam2 * c1,
            SignRegion::FastRepellentAttractive => 0.0,
            SignRegion::SlowRepellentRepulsive => c2 - c1,
            SignRegion::SlowRepellentAttractive => (p.lam1 - p.lam2) * c2 / p.lam1,
        }
    }

    /// Denominator b + χ2μ2 − χ1μ1 − M written out per region.
    pub fn denom(region: SignRegion, p: &ModelParams) -> f64 {
        let c1 = p.attraction();
        match region {
            SignRegion::FastRepellentRepulsive => p.b - (1.0 - p.lam1 / p.lam2) * c1,
            SignRegion::FastRepellentAttractive => p.b + p.repulsion() - c1,
            SignRegion::SlowRepellentRepulsive => p.b,
            SignRegion::SlowRepellentAttractive => {
                p.b - (c1 * p.lam1 - p.repulsion() * p.lam2) / p.lam1
            }
        }
    }

    /// The value b has to exceed for the stability hypothesis to hold.
    pub fn stability_threshold(region: SignRegion, p: &ModelParams) -> f64 {
        let (c1, c2) = (p.attraction(), p.repulsion());
        match region {
            SignRegion::FastRepellentRepulsive => 2.0 * c1 - 2.0 * p.lam1 / p.lam2 * c1,
            SignRegion::FastRepellentAttractive => 2.0 * c1 - 2.0 * c2,
            SignRegion::SlowRepellentRepulsive => 0.0,
            SignRegion::SlowRepellentAttractive => 2.0 * c1 - 2.0 * p.lam2 / p.lam1 * c2,
        }
    }

    pub fn c_plus(region: SignRegion, p: &ModelParams, d: f64) -> f64 {
        let n = p.dim as f64;
        let sa = p.a.sqrt();
        2.0 * sa + sa * (d * (n * p.a).sqrt() + p.repulsion()) / denom(region, p)
    }

    pub fn l(region: SignRegion, p: &ModelParams) -> f64 {
        let (c1, c2) = (p.attraction(), p.repulsion());
        match region {
            SignRegion::FastRepellentRepulsive => {
                let w = c1 * (1.0 - p.lam1 / p.lam2);
                w / (p.b - w)
            }
            SignRegion::FastRepellentAttractive => (c1 - c2) / (p.b + c2 - c1),
            SignRegion::SlowRepellentRepulsive => 0.0,
            SignRegion::SlowRepellentAttractive => {
                let w = c1 * p.lam1 - c2 * p.lam2;
                w / (p.lam1 * p.b - w)
            }
        }
    }

    pub fn c_minus(region: SignRegion, p: &ModelParams, d: f64) -> f64 {
        let (c1, c2) = (p.attraction(), p.repulsion());
        let n = p.dim as f64;
        let a = p.a;
        match region {
            SignRegion::FastRepellentRepulsive => {
                let w = c1 * (1.0 - p.lam1 / p.lam2);
                2.0 * (a * (p.b - 2.0 * w) / (p.b - w)).sqrt() - a * d * n.sqrt() / (p.b - w)
            }
            SignRegion::FastRepellentAttractive => {
                let e = p.b + c2 - c1;
                2.0 * (a * (p.b - 2.0 * (c1 - c2)) / e).sqrt() - a * d * n.sqrt() / e
            }
            SignRegion::SlowRepellentRepulsive => 2.0 * a.sqrt() - a * d * n.sqrt() / p.b,
            SignRegion::SlowRepellentAttractive => {
                let w = (c1 * p.lam1 - c2 * p.lam2) / p.lam1;
                2.0 * (a * (p.b - 2.0 * w) / (p.b - w)).sqrt() - a * d * n.sqrt() / (p.b - w)
            }
        }
    }

    /// D when there is no repellent (χ2 = 0).
    pub fn d_no_repellent(p: &ModelParams) -> f64 {
        p.attraction() / (2.0 * p.lam1.sqrt())
    }

    pub fn c_plus_no_repellent(p: &ModelParams) -> f64 {
        let c1 = p.attraction();
        2.0 * p.a.sqrt() + p.a * c1 * (p.dim as f64).sqrt() / (2.0 * (p.b - c1) * p.lam1.sqrt())
    }

    pub fn c_minus_no_repellent(p: &ModelParams) -> f64 {
        let c1 = p.attraction();
        2.0 * (p.a * (p.b - 2.0 * c1) / (p.b - c1)).sqrt()
            - p.a * c1 * (p.dim as f64).sqrt() / (2.0 * (p.b - c1) * p.lam1.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Note {
    /// b > χ1μ1 alone guarantees bounded global solutions.
    LogisticExceedsAttraction,
    Region(SignRegion),
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Note::LogisticExceedsAttraction => f.write_str("b>chi1*mu1: bounded global solutions"),
            Note::Region(r) => {
                let closed = match r {
                    SignRegion::FastRepellentRepulsive => "M=chi2*mu2-(lam1/lam2)*chi1*mu1",
                    SignRegion::FastRepellentAttractive => "M=0",
                    SignRegion::SlowRepellentRepulsive => "M=chi2*mu2-chi1*mu1",
                    SignRegion::SlowRepellentAttractive => "M=(lam1-lam2)*chi2*mu2/lam1",
                };
                write!(f, "{}: {}", r.label(), closed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub global_existence: bool,
    /// χ1 = a = b = 0: bounded by the initial datum alone.
    pub degenerate: bool,
    pub stability: bool,
    pub speed_lower_valid: bool,
    pub notes: Vec<Note>,
}

/// 4a(1 − L) − N a² D² / denom², or `None` when L is undefined.
pub fn coercivity(p: &ModelParams, th: &Thresholds) -> Option<f64> {
    let l = th.l.value()?;
    let n = p.dim as f64;
    Some(4.0 * p.a * (1.0 - l) - n * p.a * p.a * th.d * th.d / (th.denom * th.denom))
}

pub fn classify(p: &ModelParams) -> RegimeReport {
    let th = thresholds(p);
    let degenerate = p.chi1 == 0.0 && p.a == 0.0 && p.b == 0.0;
    let global_existence = degenerate || p.b > p.attraction() - p.repulsion() + th.m;
    let stability = p.b > p.attraction() - p.repulsion() + th.k;
    let speed_lower_valid = coercivity(p, &th).is_some_and(|c| c > 0.0);
    let mut notes = Vec::new();
    if p.b > p.attraction() {
        notes.push(Note::LogisticExceedsAttraction);
    }
    notes.extend(SignRegion::of(p).into_iter().map(Note::Region));
    RegimeReport {
        global_existence,
        degenerate,
        stability,
        speed_lower_valid,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBounds {
    pub c_plus: Bound,
    pub c_minus: Bound,
    /// 2√a, the speed without taxis.
    pub fisher: f64,
}

pub fn speeds(p: &ModelParams) -> SpeedBounds {
    let th = thresholds(p);
    let n = p.dim as f64;
    let sa = p.a.sqrt();
    let fisher = 2.0 * sa;
    if th.denom <= 0.0 {
        let na = Bound::NotApplicable(Unmet::GlobalExistence);
        return SpeedBounds {
            c_plus: na,
            c_minus: na,
            fisher,
        };
    }
    let c_plus = fisher + sa * (th.d * (n * p.a).sqrt() + p.repulsion()) / th.denom;
    let report = classify(p);
    let c_minus = if !report.stability {
        Bound::NotApplicable(Unmet::Stability)
    } else if !report.speed_lower_valid {
        Bound::NotApplicable(Unmet::Coercivity)
    } else {
        // L is defined because denom > 0.
        let l = th.l.value().unwrap_or(0.0);
        Bound::Value(2.0 * (p.a * (1.0 - l)).sqrt() - p.a * th.d * n.sqrt() / th.denom)
    };
    SpeedBounds {
        c_plus: Bound::Value(c_plus),
        c_minus,
        fisher,
    }
}

/// (a/b, μ1a/(λ1b), μ2a/(λ2b))
pub fn equilibrium(p: &ModelParams) -> Result<(f64, f64, f64), RegimeError> {
    if p.b <= 0.0 {
        return Err(RegimeError::NoPositiveEquilibrium);
    }
    let u = p.a / p.b;
    Ok((u, p.mu1 * u / p.lam1, p.mu2 * u / p.lam2))
}

/// Guaranteed bound on sup u(·, t) for all t ≥ 0, given sup u0.
pub fn sup_bound(p: &ModelParams, u0_sup: f64) -> Result<f64, RegimeError> {
    let report = classify(p);
    if report.degenerate {
        return Ok(u0_sup);
    }
    if !report.global_existence {
        return Err(RegimeError::NoBound);
    }
    let th = thresholds(p);
    Ok(u0_sup.max(p.a / th.denom))
}

/// Flat `key=value` report, one quantity per line.
pub fn render_report(p: &ModelParams) -> String {
    use std::fmt::Write;
    let th = thresholds(p);
    let report = classify(p);
    let sp = speeds(p);
    let mut out = String::new();
    let _ = writeln!(out, "M={}", th.m);
    let _ = writeln!(out, "K={}", th.k);
    let _ = writeln!(out, "D={}", th.d);
    let _ = writeln!(out, "L={}", th.l);
    let _ = writeln!(out, "denom={}", th.denom);
    let _ = writeln!(out, "C0_factor={}", th.c0_factor);
    match coercivity(p, &th) {
        Some(c) => {
            let _ = writeln!(out, "coercivity={c}");
        }
        None => {
            let _ = writeln!(out, "coercivity=n/a ({})", Unmet::GlobalExistence);
        }
    }
    let _ = writeln!(out, "global_existence={}", report.global_existence);
    let _ = writeln!(out, "degenerate={}", report.degenerate);
    let _ = writeln!(out, "stability={}", report.stability);
    let _ = writeln!(out, "speed_lower_valid={}", report.speed_lower_valid);
    let _ = writeln!(out, "c_plus={}", sp.c_plus);
    let _ = writeln!(out, "c_minus={}", sp.c_minus);
    let _ = writeln!(out, "fisher={}", sp.fisher);
    match equilibrium(p) {
        Ok((u, v1, v2)) => {
            let _ = writeln!(out, "equilibrium_u={u}");
            let _ = writeln!(out, "equilibrium_v1={v1}");
            let _ = writeln!(out, "equilibrium_v2={v2}");
        }
        Err(e) => {
            let _ = writeln!(out, "equilibrium=n/a ({e})");
        }
    }
    for (i, note) in report.notes.iter().enumerate() {
        let _ = writeln!(out, "note{}={}", i, note);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[allow(clippy::too_many_arguments)]
    fn p(
        chi1: f64,
        mu1: f64,
        lam1: f64,
        chi2: f64,
        mu2: f64,
        lam2: f64,
        a: f64,
        b: f64,
    ) -> ModelParams {
        ModelParams::new(chi1, chi2, mu1, mu2, lam1, lam2, a, b, 1).unwrap()
    }

    #[test]
    fn m_and_k_golden() {
        let q = p(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0);
        let th = thresholds(&q);
        // M branches: (2 - 1)/2 = 0.5 and (2 - 1)/1 = 1
        assert_eq!(m_branches(&q), [0.5, 1.0]);
        assert!(rel_eq(th.m, 0.5, 1e-12));
        assert!(rel_eq(
            th.m,
            closed_form::m(SignRegion::FastRepellentRepulsive, &q),
            1e-12
        ));
        assert_eq!(k_branches(&q), [1.0, 2.0]);
        assert!(rel_eq(th.k, 1.0, 1e-12));
    }

    #[test]
    fn no_taxis_zeroes_everything() {
        let q = p(0.0, 3.0, 0.7, 0.0, 2.0, 5.0, 1.0, 1.0);
        let th = thresholds(&q);
        assert_eq!((th.m, th.k, th.d), (0.0, 0.0, 0.0));
        assert_eq!(th.l, Bound::Value(0.0));
    }

    #[test]
    fn d_golden_repellent_only() {
        let q = p(0.0, 1.0, 1.0, 1.0, 1.0, 4.0, 1.0, 1.0);
        let br = d_branches(&q);
        assert!(rel_eq(br[0], 0.25, 1e-12));
        assert!(rel_eq(br[1], 0.75, 1e-12));
        assert!(rel_eq(thresholds(&q).d, 0.25, 1e-12));
    }

    #[test]
    fn classify_examples() {
        let q = p(0.2, 1.0, 1.0, 0.3, 1.0, 1.0, 1.0, 1.0);
        let r = classify(&q);
        assert!(rel_eq(thresholds(&q).k, 0.1, 1e-12));
        assert!(r.global_existence && r.stability);

        let q = ModelParams::new(0.0, 0.4, 2.0, 1.0, 3.0, 1.0, 0.0, 0.0, 1).unwrap();
        let r = classify(&q);
        assert!(r.degenerate && r.global_existence);

        let q = p(100.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        assert!(!classify(&q).global_existence);
    }

    #[test]
    fn speeds_examples() {
        let q = ModelParams::fisher(1.0, 1.0, 1);
        let s = speeds(&q);
        assert_eq!(s.c_plus, Bound::Value(2.0));
        assert_eq!(s.c_minus, Bound::Value(2.0));

        let q = p(0.25, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        let s = speeds(&q);
        let cp = 2.0 + 0.25 / (2.0 * 0.75);
        // D = χ1μ1/(2√λ1) enters c_minus with its factor of one half
        let cm = 2.0 * (0.5f64 / 0.75).sqrt() - 0.25 / (2.0 * 0.75);
        assert!(rel_eq(s.c_plus.value().unwrap(), cp, 1e-12));
        assert!(rel_eq(s.c_minus.value().unwrap(), cm, 1e-12));
        assert!((cp - 2.16667).abs() < 1e-5);
        assert!((cm - 1.46633).abs() < 1e-5);
    }

    #[test]
    fn speeds_report_unmet_hypothesis() {
        let q = p(100.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        let s = speeds(&q);
        assert_eq!(s.c_plus, Bound::NotApplicable(Unmet::GlobalExistence));
        // b = 1 > χ1μ1 = 0.6 but stability needs b > 1.2
        let q = p(0.6, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        let s = speeds(&q);
        assert!(s.c_plus.is_defined());
        assert_eq!(s.c_minus, Bound::NotApplicable(Unmet::Stability));
    }

    #[test]
    fn equilibrium_examples() {
        let q = ModelParams::new(0.0, 0.0, 1.0, 2.0, 1.0, 4.0, 1.0, 1.0, 1).unwrap();
        assert_eq!(equilibrium(&q).unwrap(), (1.0, 1.0, 0.5));
        let q = ModelParams::new(0.0, 0.0, 3.0, 1.0, 3.0, 1.0, 2.0, 1.0, 1).unwrap();
        let (u, v1, _) = equilibrium(&q).unwrap();
        assert_eq!((u, v1), (2.0, 2.0));
        let q = ModelParams::fisher(0.0, 1.0, 1);
        assert_eq!(equilibrium(&q).unwrap(), (0.0, 0.0, 0.0));
        let q = ModelParams::fisher(1.0, 0.0, 1);
        assert_eq!(equilibrium(&q), Err(RegimeError::NoPositiveEquilibrium));
    }

    #[test]
    fn sup_bound_examples() {
        let q = ModelParams::new(0.0, 0.5, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1).unwrap();
        assert_eq!(sup_bound(&q, 3.0).unwrap(), 3.0);
        let q = ModelParams::fisher(1.0, 1.0, 1);
        assert_eq!(sup_bound(&q, 0.2).unwrap(), 1.0);
        assert_eq!(sup_bound(&q, 5.0).unwrap(), 5.0);
        let q = p(100.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(sup_bound(&q, 1.0), Err(RegimeError::NoBound));
    }

    #[test]
    fn symmetric_cancellation_is_exact() {
        let q = ModelParams::new(0.5, 1.0, 2.0, 1.0, 1.5, 1.5, 2.0, 1.0, 1).unwrap();
        let th = thresholds(&q);
        assert_eq!((th.m, th.k, th.d), (0.0, 0.0, 0.0));
        assert_eq!(th.l, Bound::Value(0.0));
        let s = speeds(&q);
        assert_eq!(s.c_minus, Bound::Value(2.0 * 2f64.sqrt()));
        // the upper bound keeps its χ2μ2/denom term even though the drift vanishes
        assert!(rel_eq(s.c_plus.value().unwrap(), 3.0 * 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn validation_names_key() {
        let err = ModelParams::new(0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1).unwrap_err();
        assert_eq!(err.to_string(), "lam1 must be > 0");
        let err = ModelParams::new(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3).unwrap_err();
        assert_eq!(err.to_string(), "dim must be 1 or 2");
    }

    #[test]
    fn report_is_flat_key_value() {
        let text = render_report(&ModelParams::fisher(1.0, 1.0, 1));
        assert!(text.lines().any(|l| l == "c_minus=2"));
        assert!(text.lines().any(|l| l == "c_plus=2"));
        assert!(text.lines().any(|l| l == "M=0"));
        assert!(text.lines().all(|l| l.contains('=')));
    }
}
