use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Default value of the constant `C5`: `25 ln 4 + ln 3`.
pub fn default_c5() -> f64 {
    25.0 * 4f64.ln() + 3f64.ln()
}

/// Values supplied by the user in place of the derived ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub d: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub delta_star: Option<f64>,
    pub lambda: Option<f64>,
    pub c5: Option<f64>,
}

/// Which fields of [`AdversaryParams`] came from [`Overrides`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overridden {
    pub kappa: bool,
    pub d: bool,
    pub alpha: bool,
    pub gamma: bool,
    pub delta_star: bool,
    pub lambda: bool,
    pub c5: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryParams {
    /// Steps played by the adversary.
    pub n: u64,
    pub m: u64,
    pub n0: u64,
    pub delta0: f64,
    pub kappa: f64,
    pub d: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub delta_star: f64,
    pub lambda: f64,
    pub c5: f64,
    pub overridden: Overridden,
}

/// Named inequality or hypothesis and whether the parameters satisfy it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

/// Parameter profile used by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Formulas exactly as derived; infeasible at any practical size.
    #[default]
    Paper,
    /// Small `d` so that the construction can run at desk scale.
    Desk,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(format!("unknown profile {other:?} (expected paper or desk)")),
        }
    }
}

fn check_inputs(n: u64, m: u64, n0: u64) -> Result<()> {
    if n0 == 0 {
        return Err(GameError::Parameter("the adversary needs n0 >= 1".into()));
    }
    if n < 2 {
        return Err(GameError::Parameter("the adversary needs n >= 2".into()));
    }
    if n + n0 > m {
        return Err(GameError::Parameter(format!("n + n0 = {} exceeds m = {m}", n + n0)));
    }
    Ok(())
}

/// `1` when `mingap0 >= 2^n`, otherwise `delta_star / 2`.
pub fn weight_lambda(n: u64, mingap0: &BigUint, delta_star: f64) -> f64 {
    if mingap0.bits() > n {
        1.0
    } else {
        delta_star / 2.0
    }
}

/// Parameters from the closed-form settings, with `overrides` applied
/// verbatim. Fails when `d < 2` and `d` was not overridden.
pub fn derive_params(n: u64, m: u64, n0: u64, mingap0: &BigUint, overrides: &Overrides) -> Result<AdversaryParams> {
    check_inputs(n, m, n0)?;
    let c5 = overrides.c5.unwrap_or_else(default_c5);
    let delta0 = n0 as f64 / m as f64;
    let ln_n = (n as f64).ln();
    let ln_inv = (1.0 / delta0).ln();
    let kappa = overrides.kappa.unwrap_or(2.0 * ln_inv / ln_n);
    let derived_d = ((1.0 - delta0) * ln_n / (8.0 * c5 * ln_inv)).floor();
    let alpha = overrides.alpha.unwrap_or(2.0 * c5 * kappa);
    let gamma = overrides.gamma.unwrap_or((n as f64).powf(-0.25));
    let delta_star = overrides.delta_star.unwrap_or(delta0 * (delta0 - 1.0).exp());
    let lambda = overrides.lambda.unwrap_or_else(|| weight_lambda(n, mingap0, delta_star));
    let d = match overrides.d {
        Some(d) => d,
        None if derived_d >= 2.0 => derived_d as usize,
        None => {
            return Err(GameError::Infeasible(format!(
                "derived d = {derived_d} < 2 (n = {n}, m = {m}, n0 = {n0}, delta0 = {delta0:.6}, kappa = {kappa:.6}, \
                 alpha = {alpha:.6}, gamma = {gamma:.6}, delta* = {delta_star:.6}, lambda = {lambda}, C5 = {c5:.6})"
            )))
        }
    };
    Ok(AdversaryParams {
        n,
        m,
        n0,
        delta0,
        kappa,
        d,
        alpha,
        gamma,
        delta_star,
        lambda,
        c5,
        overridden: Overridden {
            kappa: overrides.kappa.is_some(),
            d: overrides.d.is_some(),
            alpha: overrides.alpha.is_some(),
            gamma: overrides.gamma.is_some(),
            delta_star: overrides.delta_star.is_some(),
            lambda: overrides.lambda.is_some(),
            c5: overrides.c5.is_some(),
        },
    })
}

/// Depth used by the desk profile: `floor(log2 n) / 4`, limited to the
/// number of levels a block of `ceil(n/2)` cells can lose a factor of nine
/// (two middle thirds) per level while staying above `n^(1/4)`, and at
/// least 2.
pub fn desk_depth(n: u64) -> usize {
    let by_log = (63 - n.leading_zeros() as usize) / 4;
    let room = n.div_ceil(2) as f64 * (n as f64).powf(-0.25);
    let by_size = if room > 1.0 { (room.ln() / 9f64.ln()).floor() as usize } else { 0 };
    by_log.min(by_size).max(2)
}

/// Desk-scale settings: `d` from [`desk_depth`], `alpha` capped so that
/// `alpha * d <= 1 - delta0`. Explicit overrides still win.
pub fn desk_params(n: u64, m: u64, n0: u64, mingap0: &BigUint, overrides: &Overrides) -> Result<AdversaryParams> {
    check_inputs(n, m, n0)?;
    let d = overrides.d.unwrap_or_else(|| desk_depth(n));
    let mut with_d = overrides.clone();
    with_d.d = Some(d);
    let mut p = derive_params(n, m, n0, mingap0, &with_d)?;
    p.overridden.d = overrides.d.is_some();
    if overrides.alpha.is_none() {
        p.alpha = p.alpha.min((1.0 - p.delta0) / d as f64);
    }
    Ok(p)
}

pub fn params_for(
    profile: Profile,
    n: u64,
    m: u64,
    n0: u64,
    mingap0: &BigUint,
    overrides: &Overrides,
) -> Result<AdversaryParams> {
    match profile {
        Profile::Paper => derive_params(n, m, n0, mingap0, overrides),
        Profile::Desk => desk_params(n, m, n0, mingap0, overrides),
    }
}

impl AdversaryParams {
    /// The seven parameter inequalities plus the hypotheses on `delta0` and
    /// the initial mingap.
    pub fn checks(&self, mingap0: &BigUint) -> Vec<Check> {
        let n = self.n as f64;
        let ln_n = n.ln();
        let ln_inv = (1.0 / self.delta0).ln();
        let c5 = self.c5;
        let mk = |name: &str, holds: bool, detail: String| Check { name: name.into(), holds, detail };
        let i3 = (self.gamma * n.sqrt()).ln() / (2.0 * c5);
        let i5 = (self.delta0 / self.delta_star).ln() / (2.0 * c5);
        let balanced = 1.0 / (24.0 * 4f64.ln());
        let lo = ln_n.powi(-2);
        let hi = 1.0 - n.powf(-0.2);
        let need = 1.0 + 12.0 / self.delta0;
        let mingap_ok = mingap0.bits() > 64 || (num_traits::ToPrimitive::to_f64(mingap0).unwrap_or(f64::INFINITY) >= need);
        vec![
            mk("I1", self.delta_star / self.gamma >= 2.0, format!("delta*/gamma = {:.6} >= 2", self.delta_star / self.gamma)),
            mk("I2", self.kappa >= 2.0 * ln_inv / ln_n - 1e-12, format!("kappa = {:.6} >= {:.6}", self.kappa, 2.0 * ln_inv / ln_n)),
            mk("I3", self.d as f64 <= i3, format!("d = {} <= {:.6}", self.d, i3)),
            mk("I4", self.gamma <= 0.25, format!("gamma = {:.6} <= 0.25", self.gamma)),
            mk("I5", self.d as f64 * self.kappa <= i5 + 1e-12, format!("d*kappa = {:.6} <= {:.6}", self.d as f64 * self.kappa, i5)),
            mk(
                "I6",
                self.kappa <= balanced && self.kappa <= 0.02,
                format!("kappa = {:.6} <= min({balanced:.6}, 0.02)", self.kappa),
            ),
            mk("I7", self.alpha >= 2.0 * c5 * self.kappa - 1e-12, format!("alpha = {:.6} >= {:.6}", self.alpha, 2.0 * c5 * self.kappa)),
            mk("A2", self.delta0 > lo && self.delta0 < hi, format!("delta0 = {:.6} in ({lo:.6}, {hi:.6})", self.delta0)),
            mk("mingap0", mingap_ok, format!("mingap0 = {mingap0} >= {need:.6}")),
        ]
    }
}
