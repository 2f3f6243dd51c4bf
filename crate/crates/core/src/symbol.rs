use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{RbError, Result};

/// The slowly varying factor g in the dissipation symbol |k|/g(|k|).
///
/// Built-in families follow the two standard logarithmic examples plus the
/// constant case; arbitrary tabulated symbols load from a two-column CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SymbolG {
    /// g(r) = c0
    Constant { c0: f64 },
    /// g(r) = (ln(e + r))^mu1
    Log { mu1: f64 },
    /// g(r) = ln(e + r) * (ln(e^2 + ln(1 + r)))^mu2
    LogLog { mu2: f64 },
    /// linear interpolation of sampled (r, g(r)) pairs, clamped at the ends
    Tabulated { r: Vec<f64>, g: Vec<f64> },
}

impl SymbolG {
    pub fn constant(c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(RbError::SymbolParam(format!("constant family needs c0 > 0, got {c0}")));
        }
        Ok(Self::Constant { c0 })
    }

    pub fn log(mu1: f64) -> Result<Self> {
        if !(mu1 > 0.0 && mu1.is_finite()) {
            return Err(RbError::SymbolParam(format!("log family needs mu1 > 0, got {mu1}")));
        }
        Ok(Self::Log { mu1 })
    }

    pub fn loglog(mu2: f64) -> Result<Self> {
        if !(mu2 > 0.0 && mu2.is_finite()) {
            return Err(RbError::SymbolParam(format!("loglog family needs mu2 > 0, got {mu2}")));
        }
        Ok(Self::LogLog { mu2 })
    }

    pub fn tabulated(r: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if r.len() != g.len() || r.len() < 2 {
            return Err(RbError::SymbolParam(
                "tabulated symbol needs at least two (r, g) pairs".into(),
            ));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RbError::SymbolParam("tabulated r values must increase".into()));
        }
        if r[0] < 0.0 {
            return Err(RbError::SymbolParam("tabulated r values must be >= 0".into()));
        }
        if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(RbError::SymbolParam("tabulated g values must be positive".into()));
        }
        Ok(Self::Tabulated { r, g })
    }

    /// Two-column CSV "r,g" with optional header line.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rs = Vec::new();
        let mut gs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(r), Ok(g)) => {
                    rs.push(r);
                    gs.push(g);
                }
                _ if lineno == 0 => continue, // header
                _ => {
                    return Err(RbError::SymbolParam(format!(
                        "cannot parse CSV line {}: {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::tabulated(rs, gs)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Log { .. } => "log",
            Self::LogLog { .. } => "loglog",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self {
            Self::Constant { c0 } => *c0,
            Self::Log { mu1 } => (std::f64::consts::E + r).ln().powf(*mu1),
            Self::LogLog { mu2 } => {
                let a = (std::f64::consts::E + r).ln();
                let h = (std::f64::consts::E.powi(2) + (1.0 + r).ln()).ln();
                a * h.powf(*mu2)
            }
            Self::Tabulated { r: rs, g: gs } => {
                if r <= rs[0] {
                    return gs[0];
                }
                if r >= *rs.last().unwrap() {
                    return *gs.last().unwrap();
                }
                let idx = rs.partition_point(|x| *x <= r) - 1;
                let t = (r - rs[idx]) / (rs[idx + 1] - rs[idx]);
                gs[idx] + t * (gs[idx + 1] - gs[idx])
            }
        }
    }

    /// First derivative: analytic for the built-in families, central
    /// differences with step r * 1e-4 for tabulated data.
    pub fn deriv1(&self, r: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Log { mu1 } => {
                let er = std::f64::consts::E + r;
                mu1 * er.ln().powf(mu1 - 1.0) / er
            }
            Self::LogLog { mu2 } => {
                let (a, da) = log_factor(r);
                let (h, dh) = loglog_inner(r);
                da * h.powf(*mu2) + a * mu2 * h.powf(mu2 - 1.0) * dh
            }
            Self::Tabulated { .. } => {
                let step = (r * 1e-4).max(1e-8);
                let lo = (r - step).max(0.0);
                (self.eval(r + step) - self.eval(lo)) / (r + step - lo)
            }
        }
    }

    /// Second derivative, same conventions as `deriv1`.
    pub fn deriv2(&self, r: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Log { mu1 } => {
                let er = std::f64::consts::E + r;
                let l = er.ln();
                mu1 * l.powf(mu1 - 2.0) * ((mu1 - 1.0) - l) / (er * er)
            }
            Self::LogLog { mu2 } => {
                let (a, da) = log_factor(r);
                let dda = -1.0 / (std::f64::consts::E + r).powi(2);
                let (h, dh) = loglog_inner(r);
                let ddh = loglog_inner_dd(r);
                let b = h.powf(*mu2);
                let db = mu2 * h.powf(mu2 - 1.0) * dh;
                let ddb =
                    mu2 * (mu2 - 1.0) * h.powf(mu2 - 2.0) * dh * dh + mu2 * h.powf(mu2 - 1.0) * ddh;
                dda * b + 2.0 * da * db + a * ddb
            }
            Self::Tabulated { .. } => {
                let step = (r * 1e-4).max(1e-8);
                let lo = (r - step).max(0.0);
                (self.eval(r + step) - 2.0 * self.eval(r) + self.eval(lo)) / (step * step)
            }
        }
    }
}

fn log_factor(r: f64) -> (f64, f64) {
    let er = std::f64::consts::E + r;
    (er.ln(), 1.0 / er)
}

/// h(r) = ln(e^2 + ln(1 + r)) and h'.
fn loglog_inner(r: f64) -> (f64, f64) {
    let inner = std::f64::consts::E.powi(2) + (1.0 + r).ln();
    (inner.ln(), 1.0 / (inner * (1.0 + r)))
}

fn loglog_inner_dd(r: f64) -> f64 {
    let inner = std::f64::consts::E.powi(2) + (1.0 + r).ln();
    -(1.0 + inner) / (inner * inner * (1.0 + r).powi(2))
}

/// Outcome of one validation condition with the measured quantity attached.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub pass: bool,
    pub measured: f64,
}

/// Report of the three admissibility checks: positive lower bound,
/// Mikhlin-Hoermander derivative bounds, and sub-power growth.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolReport {
    /// min g over the lattice; pass iff positive (and g non-decreasing)
    pub condition_a: ConditionCheck,
    /// sup over the lattice of |r^k g^(k)(r) / g(r)|, k = 1, 2
    pub condition_b: ConditionCheck,
    /// worst tail trend of g(r)/r^sigma over the sigma grid (last/first,
    /// must be < 1 with no intermediate increase)
    pub condition_c: ConditionCheck,
    pub lattice: Vec<f64>,
    pub sigma_grid: Vec<f64>,
}

impl SymbolReport {
    pub fn all_pass(&self) -> bool {
        self.condition_a.pass && self.condition_b.pass && self.condition_c.pass
    }
}

pub const DEFAULT_SIGMA_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Sampling lattice for validation: 0 plus log-spaced points up to k_max.
pub fn validation_lattice(k_max: f64, count: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(count + 1);
    pts.push(0.0);
    let lo: f64 = 1e-2;
    let ratio = (k_max / lo).ln() / (count - 1) as f64;
    for i in 0..count {
        pts.push(lo * (ratio * i as f64).exp());
    }
    pts
}

/// Checks the admissibility conditions on a finite lattice.
///
/// The growth check (c) is a necessary-condition proxy: it requires
/// g(r)/r^sigma to decrease monotonically on the tail [k_max/4, k_max] for
/// every sigma in the grid. Failures are recorded, never thrown.
pub fn validate_symbol(g: &SymbolG, k_max: f64, sigma_grid: &[f64]) -> SymbolReport {
    let lattice = validation_lattice(k_max, 512);

    // (a): positive lower bound, plus monotonicity of g itself
    let mut min_g = f64::INFINITY;
    let mut nondecreasing = true;
    let mut prev = -f64::INFINITY;
    for &r in &lattice {
        let v = g.eval(r);
        min_g = min_g.min(v);
        if v < prev * (1.0 - 1e-12) {
            nondecreasing = false;
        }
        prev = prev.max(v);
    }
    let condition_a = ConditionCheck {
        pass: min_g > 0.0 && min_g.is_finite() && nondecreasing,
        measured: min_g,
    };

    // (b): Mikhlin-Hoermander ratios on r > 0
    let mut worst_ratio = 0.0_f64;
    for &r in lattice.iter().filter(|r| **r > 0.0) {
        let gv = g.eval(r);
        let r1 = (r * g.deriv1(r) / gv).abs();
        let r2 = (r * r * g.deriv2(r) / gv).abs();
        worst_ratio = worst_ratio.max(r1).max(r2);
    }
    let condition_b = ConditionCheck {
        pass: worst_ratio.is_finite(),
        measured: worst_ratio,
    };

    // (c): decreasing tail of g(r)/r^sigma on [k_max/4, k_max]
    let tail: Vec<f64> = lattice
        .iter()
        .copied()
        .filter(|r| *r >= k_max / 4.0)
        .collect();
    let mut pass_c = true;
    let mut worst_trend = 0.0_f64;
    for &sigma in sigma_grid {
        let vals: Vec<f64> = tail.iter().map(|r| g.eval(*r) / r.powf(sigma)).collect();
        for w in vals.windows(2) {
            if w[1] > w[0] * (1.0 + 1e-12) {
                pass_c = false;
            }
        }
        let trend = vals.last().unwrap() / vals.first().unwrap();
        worst_trend = worst_trend.max(trend);
        if trend >= 1.0 {
            pass_c = false;
        }
    }
    let condition_c = ConditionCheck {
        pass: pass_c,
        measured: worst_trend,
    };

    SymbolReport {
        condition_a,
        condition_b,
        condition_c,
        lattice,
        sigma_grid: sigma_grid.to_vec(),
    }
}
