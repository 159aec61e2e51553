//! l1-norm coherence and Schatten-1 geometric discord.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Basis, DensityMatrix4};

/// Coherence of a state relative to the basis it is written in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceValue {
    pub value: f64,
    pub basis: Basis,
}

/// Geometric discord, dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordValue(pub f64);

/// Sum of |rho_ij| over i != j, in the state's own basis label.
pub fn l1_coherence(rho: &DensityMatrix4) -> CoherenceValue {
    let m = rho.matrix();
    let mut total = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    CoherenceValue {
        value: total,
        basis: rho.basis(),
    }
}

/// Q = C / 2, valid for the zero-field Bell-diagonal dimer states only.
///
/// Those states have C = |c| <= 1, so anything above 1 cannot come from
/// that family and is refused.
pub fn geometric_discord_zero_field(coherence: CoherenceValue) -> Result<DiscordValue> {
    let c = coherence.value;
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coherence must be nonnegative, got {c}"
        )));
    }
    if c > 1.0 + 1e-12 {
        return Err(Error::OutsideBellDiagonal { coherence: c });
    }
    Ok(DiscordValue(c / 2.0))
}
