//! Channel rates and the upper-bound constants they are checked against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when comparing rates against their bounds, so that
/// parameters derived from the bounds by arithmetic still validate.
const BOUND_EPS: f64 = 1e-12;

/// Largest value of `(3/2)·rho_s + kappa_n` for which the off-alignment
/// counting argument with indels decays exponentially.
pub const INDEL_COST_CEILING: f64 = 0.034_85;

/// Largest substitution rate covered by the substitution-only guarantee.
pub const SUBSTITUTION_ONLY_CEILING: f64 = 0.028;

/// Natural log of `n`, floored at `ln 2` so block lengths stay positive for
/// degenerate inputs.
pub fn ln_n(n: usize) -> f64 {
    (n.max(2) as f64).ln()
}

/// Mutation probabilities of the indel channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Substitution probability per source bit.
    pub p_s: f64,
    /// Deletion probability when the previous bit survived (and for bit 1).
    pub p_d: f64,
    /// Deletion probability when the previous bit was deleted.
    pub q_d: f64,
    /// Probability of an insertion event to the right of a source bit.
    pub p_i: f64,
    /// Continuation probability of the geometric insertion length.
    pub q_i: f64,
}

impl ChannelParams {
    pub fn new(p_s: f64, p_d: f64, q_d: f64, p_i: f64, q_i: f64) -> Result<Self> {
        let params = ChannelParams { p_s, p_d, q_d, p_i, q_i };
        params.validate()?;
        Ok(params)
    }

    /// The identity channel.
    pub fn zero() -> Self {
        ChannelParams {
            p_s: 0.0,
            p_d: 0.0,
            q_d: 0.0,
            p_i: 0.0,
            q_i: 0.0,
        }
    }

    pub fn substitution_only(p_s: f64) -> Result<Self> {
        Self::new(p_s, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} = {v} is not in [0, 1]")))
            }
        };
        let half_open = |name: &str, v: f64| {
            if v.is_finite() && (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} = {v} is not in [0, 1)")))
            }
        };
        unit("p_s", self.p_s)?;
        unit("p_d", self.p_d)?;
        unit("p_i", self.p_i)?;
        // q_d = 1 is the degenerate "delete everything after the first
        // deletion" channel; it admits p_d = 1.
        unit("q_d", self.q_d)?;
        half_open("q_i", self.q_i)?;
        if self.q_d < self.p_d {
            return Err(Error::InvalidParams(format!(
                "q_d = {} must be at least p_d = {}",
                self.q_d, self.p_d
            )));
        }
        Ok(())
    }

    pub fn has_indels(&self) -> bool {
        self.p_d > 0.0 || self.p_i > 0.0
    }

    /// Mean inserted-run length, `1/(1 - q_i)`.
    pub fn mean_insertion_len(&self) -> f64 {
        1.0 / (1.0 - self.q_i)
    }
}

/// Upper bounds on the channel rates plus the block constant `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub rho_s: f64,
    pub rho_d: f64,
    pub rho_d_prime: f64,
    pub rho_i: f64,
    pub rho_i_prime: f64,
    /// Block constant: blocks span `ceil(k ln n)` source bits.
    pub k: f64,
}

impl Default for ParamBounds {
    fn default() -> Self {
        ParamBounds {
            rho_s: 0.01,
            rho_d: 0.004,
            rho_d_prime: 1.25,
            rho_i: 0.004,
            rho_i_prime: 1.25,
            k: 24.0,
        }
    }
}

impl ParamBounds {
    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho_s", self.rho_s),
            ("rho_d", self.rho_d),
            ("rho_d_prime", self.rho_d_prime),
            ("rho_i", self.rho_i),
            ("rho_i_prime", self.rho_i_prime),
            ("k", self.k),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// `k ln n` before rounding.
    pub fn k_ln_n(&self, n: usize) -> f64 {
        self.k * ln_n(n)
    }

    /// Block length `ceil(k ln n)`.
    pub fn block_len(&self, n: usize) -> usize {
        (self.k_ln_n(n).ceil() as usize).max(1)
    }

    /// Aggregate indel rate `rho_i rho_i' + (rho_d + 1/(k ln n))(rho_d' + 1)`.
    pub fn kappa(&self, n: usize) -> f64 {
        self.rho_i * self.rho_i_prime + (self.rho_d + 1.0 / self.k_ln_n(n)) * (self.rho_d_prime + 1.0)
    }

    /// Anchor error tolerance `ceil((3/2 kappa_n + 1) k ln n)`.
    pub fn anchor_tolerance(&self, n: usize) -> usize {
        ((1.5 * self.kappa(n) + 1.0) * self.k_ln_n(n)).ceil() as usize
    }

    /// Offset half-range `J = 2 ceil((3/2 kappa_n + 1) k)` of the anchor scan.
    pub fn scan_halfwidth(&self, n: usize) -> usize {
        2 * ((1.5 * self.kappa(n) + 1.0) * self.k).ceil() as usize
    }

    /// Whether `(3/2) rho_s + kappa_n` is below [`INDEL_COST_CEILING`].
    pub fn within_indel_regime(&self, n: usize) -> bool {
        1.5 * self.rho_s + self.kappa(n) < INDEL_COST_CEILING
    }

    /// Human-readable list of every bound `params` violates.
    pub fn violations(&self, params: &ChannelParams) -> Vec<String> {
        let mut out = Vec::new();
        if params.p_s > self.rho_s + BOUND_EPS {
            out.push(format!("p_s = {} exceeds rho_s = {}", params.p_s, self.rho_s));
        }
        if params.p_d > self.rho_d + BOUND_EPS {
            out.push(format!("p_d = {} exceeds rho_d = {}", params.p_d, self.rho_d));
        }
        let del_run = (1.0 - self.rho_d) / (1.0 - params.q_d);
        if del_run > self.rho_d_prime + BOUND_EPS {
            out.push(format!(
                "(1 - rho_d)/(1 - q_d) = {del_run} exceeds rho_d' = {}",
                self.rho_d_prime
            ));
        }
        if params.p_i > self.rho_i + BOUND_EPS {
            out.push(format!("p_i = {} exceeds rho_i = {}", params.p_i, self.rho_i));
        }
        let ins_run = 1.0 / (1.0 - params.q_i);
        if ins_run > self.rho_i_prime + BOUND_EPS {
            out.push(format!(
                "1/(1 - q_i) = {ins_run} exceeds rho_i' = {}",
                self.rho_i_prime
            ));
        }
        out
    }

    pub fn admits(&self, params: &ChannelParams) -> bool {
        self.violations(params).is_empty()
    }

    /// The harshest channel these bounds admit: every rate at its ceiling.
    pub fn extremal_params(&self) -> ChannelParams {
        let q_d = (1.0 - (1.0 - self.rho_d) / self.rho_d_prime).max(self.rho_d.min(1.0));
        ChannelParams {
            p_s: self.rho_s.min(1.0),
            p_d: self.rho_d.min(1.0),
            q_d: q_d.clamp(0.0, 1.0 - 1e-9),
            p_i: self.rho_i.min(1.0),
            q_i: (1.0 - 1.0 / self.rho_i_prime).clamp(0.0, 1.0 - 1e-9),
        }
    }

    /// Runtime warnings for running these bounds at length `n`.
    pub fn warnings(&self, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !self.within_indel_regime(n) {
            out.push(format!(
                "(3/2)rho_s + kappa_n = {:.5} at n = {n}, k = {} is not below {INDEL_COST_CEILING}",
                1.5 * self.rho_s + self.kappa(n),
                self.k
            ));
        }
        out
    }

    /// Runtime warnings for the substitution-only band at these bounds.
    pub fn substitution_warnings(&self) -> Vec<String> {
        if self.rho_s < SUBSTITUTION_ONLY_CEILING {
            Vec::new()
        } else {
            vec![format!(
                "rho_s = {} is not below {SUBSTITUTION_ONLY_CEILING}",
                self.rho_s
            )]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(ChannelParams::new(0.1, 0.1, 0.2, 0.1, 0.5).is_ok());
        assert!(ChannelParams::new(-0.1, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(0.0, 0.0, 1.01, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(0.0, 1.0, 1.0, 0.0, 0.0).is_ok());
        assert!(ChannelParams::new(0.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ChannelParams::new(0.0, 0.3, 0.2, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.0, 0.0, 0.0, 0.0).is_err());
        // single-bit deletion setting: q_d = p_d
        assert!(ChannelParams::new(0.0, 0.2, 0.2, 0.0, 0.0).is_ok());
        assert!(ChannelParams::new(0.0, 1.0, 0.999, 0.0, 0.0).is_err());
    }

    #[test]
    fn kappa_formula() {
        let b = ParamBounds::default();
        let n = 4096;
        let kln = 24.0 * (4096f64).ln();
        let expected = 0.004 * 1.25 + (0.004 + 1.0 / kln) * 2.25;
        assert!((b.kappa(n) - expected).abs() < 1e-15);
        assert_eq!(b.block_len(n), kln.ceil() as usize);
    }

    #[test]
    fn extremal_params_are_admitted() {
        let b = ParamBounds::default();
        let p = b.extremal_params();
        p.validate().unwrap();
        assert!(b.admits(&p), "{:?}", b.violations(&p));
        assert!((p.q_i - 0.2).abs() < 1e-12);
        assert!((p.q_d - (1.0 - 0.996 / 1.25)).abs() < 1e-12);
        let too_hot = ChannelParams { p_s: 0.02, ..p };
        assert_eq!(b.violations(&too_hot).len(), 1);
    }

    #[test]
    fn default_block_length_floor() {
        let b = ParamBounds::default();
        for n in [512, 1024, 1 << 16] {
            assert!(b.block_len(n) >= 64);
        }
    }
}
