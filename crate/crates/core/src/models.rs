//! Closed-form dimer thermodynamics.
//!
//! Covers the Bleaney-Bowers susceptibility and its inversion to the spin
//! correlation and coherence, the zero-field Bell-diagonal state, and the
//! coherences of the Zeeman-split dimer in bases parallel (S_z) and
//! perpendicular (S_x) to the field.
//!
//! The field-dependent expressions are written in terms of the four
//! Boltzmann weights of the spectrum
//!
//! ```text
//! |00>     E = -J/4 - h   weight e^{x + beta h}
//! |01>+|10> E = -J/4       weight e^{x}
//! |11>     E = -J/4 + h   weight e^{x - beta h}
//! singlet  E = 3J/4       weight e^{-3x}
//! ```
//!
//! with x = J/4T and h = g mu_B B / k_B. Each expression is multiplied
//! through by e^{x} and all log-weights are shifted by their maximum before
//! exponentiating, which is algebraically the same formula but stays finite
//! at millikelvin temperatures.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::constants::{curie_constant_cgs, tesla_to_oersted, BOHR_OVER_BOLTZMANN, SI_PER_EMU_MOLAR};
use crate::error::{Error, Result};
use crate::quantifiers::{l1_coherence, CoherenceValue};
use crate::quantum::{build_hamiltonian, eigensystem, Basis, DensityMatrix4, DimerParams};

/// Slack allowed beyond the physical correlation range before a data point
/// is considered broken rather than noisy.
pub const CORRELATION_TOLERANCE: f64 = 0.02;

/// Upper end of the bisection bracket for the critical field, in tesla.
pub const CRITICAL_FIELD_BRACKET: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SusceptibilityUnit {
    /// CGS molar susceptibility, emu/mol (= cm^3/mol).
    EmuPerMol,
    /// SI molar susceptibility, m^3/mol.
    SiM3PerMol,
}

impl SusceptibilityUnit {
    /// N_A mu_B^2 / k_B expressed in this unit times kelvin.
    pub fn curie_constant(&self) -> f64 {
        match self {
            SusceptibilityUnit::EmuPerMol => curie_constant_cgs(),
            SusceptibilityUnit::SiM3PerMol => curie_constant_cgs() * SI_PER_EMU_MOLAR,
        }
    }

    pub fn convert(&self, chi: f64, to: SusceptibilityUnit) -> f64 {
        match (self, to) {
            (SusceptibilityUnit::EmuPerMol, SusceptibilityUnit::SiM3PerMol) => chi * SI_PER_EMU_MOLAR,
            (SusceptibilityUnit::SiM3PerMol, SusceptibilityUnit::EmuPerMol) => chi / SI_PER_EMU_MOLAR,
            _ => chi,
        }
    }
}

/// One molar susceptibility sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityPoint {
    pub temperature: f64,
    pub chi: f64,
    pub unit: SusceptibilityUnit,
}

impl SusceptibilityPoint {
    pub fn new(temperature: f64, chi: f64, unit: SusceptibilityUnit) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !chi.is_finite() {
            return Err(Error::InvalidParameter(format!("chi must be finite, got {chi}")));
        }
        Ok(SusceptibilityPoint { temperature, chi, unit })
    }

    pub fn to_unit(&self, unit: SusceptibilityUnit) -> SusceptibilityPoint {
        SusceptibilityPoint {
            temperature: self.temperature,
            chi: self.unit.convert(self.chi, unit),
            unit,
        }
    }
}

/// Spin-spin correlation c; physical states have -1 <= c <= 1/3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue(pub f64);

/// Returns (1 / (3 + e^{-J/T}), e^{-J/T} / (3 + e^{-J/T})) without overflow.
pub(crate) fn bleaney_bowers_factors(j_over_t: f64) -> (f64, f64) {
    if j_over_t >= 0.0 {
        let y = (-j_over_t).exp();
        (1.0 / (3.0 + y), y / (3.0 + y))
    } else {
        let q = j_over_t.exp();
        (q / (3.0 * q + 1.0), 1.0 / (3.0 * q + 1.0))
    }
}

/// Reduced susceptibility k_B T chi / (N g^2 mu_B^2) = 2 / (3 + e^{-J/T}).
pub fn reduced_susceptibility(j_over_kb: f64, temperature: f64) -> f64 {
    2.0 * bleaney_bowers_factors(j_over_kb / temperature).0
}

/// Bleaney-Bowers molar susceptibility of `n_moles` of dimers.
pub fn bleaney_bowers_chi(
    j_over_kb: f64,
    g: f64,
    temperature: f64,
    n_moles: f64,
    unit: SusceptibilityUnit,
) -> Result<SusceptibilityPoint> {
    DimerParams::new(j_over_kb, g, temperature, 0.0)?;
    check_moles(n_moles)?;
    let chi = n_moles * unit.curie_constant() * g * g / temperature * reduced_susceptibility(j_over_kb, temperature);
    SusceptibilityPoint::new(temperature, chi, unit)
}

/// c = 2 k_B T chi / (n N_A g^2 mu_B^2) - 1.
///
/// Values beyond the physical range by more than [`CORRELATION_TOLERANCE`]
/// are rejected, never clamped.
pub fn correlation_from_chi(point: &SusceptibilityPoint, g: f64, n_moles: f64) -> Result<CorrelationValue> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
    }
    check_moles(n_moles)?;
    let c = 2.0 * point.temperature * point.chi / (n_moles * point.unit.curie_constant() * g * g) - 1.0;
    if !(-1.0 - CORRELATION_TOLERANCE..=1.0 / 3.0 + CORRELATION_TOLERANCE).contains(&c) {
        return Err(Error::UnphysicalPoint {
            temperature: point.temperature,
            c,
        });
    }
    Ok(CorrelationValue(c))
}

fn check_moles(n_moles: f64) -> Result<()> {
    if !(n_moles.is_finite() && n_moles > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "n_moles must be positive, got {n_moles}"
        )));
    }
    Ok(())
}

/// Zero-field state in the S_z basis:
/// diag(1+c, 1-c, 1-c, 1+c)/4 with 2c/4 coupling |01> and |10>.
pub fn rho_zero_field(c: CorrelationValue) -> Result<DensityMatrix4> {
    let c = c.0;
    if !(-1.0 - 1e-12..=1.0 / 3.0 + 1e-12).contains(&c) {
        return Err(Error::NonpositiveState { c });
    }
    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0 + c, 0.0,     0.0,     0.0,
        0.0,     1.0 - c, 2.0 * c, 0.0,
        0.0,     2.0 * c, 1.0 - c, 0.0,
        0.0,     0.0,     0.0,     1.0 + c,
    ) * 0.25;
    DensityMatrix4::from_real(m, Basis::Sz)
}

/// C = |c| obtained straight from a susceptibility sample.
pub fn coherence_from_chi(point: &SusceptibilityPoint, g: f64, n_moles: f64) -> Result<CoherenceValue> {
    let c = correlation_from_chi(point, g, n_moles)?;
    Ok(CoherenceValue {
        value: c.0.abs(),
        basis: Basis::Sz,
    })
}

/// Boltzmann weights of the four levels, scaled by e^{-shift}.
#[derive(Debug, Clone, Copy)]
struct LevelWeights {
    up: f64,
    zero: f64,
    down: f64,
    singlet: f64,
    shift: f64,
}

impl LevelWeights {
    fn new(params: &DimerParams) -> Self {
        let x = params.x();
        let bh = params.beta() * params.zeeman();
        let logs = [x + bh, x, x - bh, -3.0 * x];
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        LevelWeights {
            up: (logs[0] - shift).exp(),
            zero: (logs[1] - shift).exp(),
            down: (logs[2] - shift).exp(),
            singlet: (logs[3] - shift).exp(),
            shift,
        }
    }

    fn scaled_z(&self) -> f64 {
        self.up + self.zero + self.down + self.singlet
    }

    /// e^{x} cosh(beta h), scaled.
    fn cosh_term(&self) -> f64 {
        0.5 * (self.up + self.down)
    }

    /// e^{x} sinh(beta h), scaled.
    fn sinh_term(&self) -> f64 {
        0.5 * (self.up - self.down)
    }
}

/// Z = e^x + e^{-3x} + 2 e^x cosh(beta h).
pub fn partition_function(params: &DimerParams) -> Result<f64> {
    let w = LevelWeights::new(params);
    let z = w.shift.exp() * w.scaled_z();
    if !z.is_finite() {
        return Err(Error::TemperatureUnderflow {
            temperature: params.temperature(),
        });
    }
    Ok(z)
}

/// ln Z, finite wherever the closed forms are.
pub fn ln_partition_function(params: &DimerParams) -> f64 {
    let w = LevelWeights::new(params);
    w.shift + w.scaled_z().ln()
}

/// C_z = |1 - e^{-4x}| / (1 + e^{-4x} + 2 cosh(beta h)).
pub fn coherence_longitudinal(params: &DimerParams) -> CoherenceValue {
    let w = LevelWeights::new(params);
    CoherenceValue {
        value: (w.zero - w.singlet).abs() / w.scaled_z(),
        basis: Basis::Sz,
    }
}

/// C_x = (e^x / Z)(|cosh(beta h) - 1| + 4|sinh(beta h)| + |cosh(beta h) - e^{-4x}|).
pub fn coherence_transverse(params: &DimerParams) -> CoherenceValue {
    let w = LevelWeights::new(params);
    let ch = w.cosh_term();
    let sum = (ch - w.zero).abs() + 4.0 * w.sinh_term().abs() + (ch - w.singlet).abs();
    CoherenceValue {
        value: sum / w.scaled_z(),
        basis: Basis::Sx,
    }
}

pub fn coherence(params: &DimerParams, basis: Basis) -> CoherenceValue {
    match basis {
        Basis::Sz => coherence_longitudinal(params),
        Basis::Sx => coherence_transverse(params),
    }
}

/// X-shaped thermal state of the field-split dimer, S_z basis.
pub fn rho_longitudinal(params: &DimerParams) -> Result<DensityMatrix4> {
    let w = LevelWeights::new(params);
    let z = w.scaled_z();
    let diag = (w.zero + w.singlet) / (2.0 * z);
    let off = (w.zero - w.singlet) / (2.0 * z);
    #[rustfmt::skip]
    let m = Matrix4::new(
        w.up / z, 0.0,  0.0,  0.0,
        0.0,      diag, off,  0.0,
        0.0,      off,  diag, 0.0,
        0.0,      0.0,  0.0,  w.down / z,
    );
    DensityMatrix4::from_real(m, Basis::Sz)
}

/// The same thermal state written in the S_x basis.
pub fn rho_transverse(params: &DimerParams) -> Result<DensityMatrix4> {
    let w = LevelWeights::new(params);
    let n = 2.0 * w.scaled_z();
    let ch = w.cosh_term();
    let a = (ch + w.zero) / n;
    let s = w.sinh_term() / n;
    let corner = (ch - w.zero) / n;
    let b = (ch + w.singlet) / n;
    let mid = (ch - w.singlet) / n;
    #[rustfmt::skip]
    let m = Matrix4::new(
        a,      s,   s,   corner,
        s,      b,   mid, s,
        s,      mid, b,   s,
        corner, s,   s,   a,
    );
    DensityMatrix4::from_real(m, Basis::Sx)
}

/// Field at which |00> drops below the singlet, from both routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalField {
    /// |J| k_B / (g mu_B), tesla.
    pub closed_form: f64,
    /// Bisection on the numerically diagonalized ground state, tesla.
    pub bisection: f64,
}

impl CriticalField {
    pub fn tesla(&self) -> f64 {
        self.closed_form
    }

    pub fn oersted(&self) -> f64 {
        tesla_to_oersted(self.closed_form)
    }

    pub fn disagreement(&self) -> f64 {
        (self.closed_form - self.bisection).abs()
    }
}

pub fn critical_field(j_over_kb: f64, g: f64) -> Result<CriticalField> {
    DimerParams::new(j_over_kb, g, 1.0, 0.0)?;
    if j_over_kb >= 0.0 {
        return Err(Error::NoLevelCrossing { j_over_kb });
    }
    let closed_form = -j_over_kb / (g * BOHR_OVER_BOLTZMANN);
    let bisection = bisect_ground_state_crossing(j_over_kb, g)?;
    Ok(CriticalField { closed_form, bisection })
}

fn ground_is_polarized(j_over_kb: f64, g: f64, b_field: f64) -> Result<bool> {
    let params = DimerParams::new(j_over_kb, g, 1.0, b_field)?;
    let ground = eigensystem(&build_hamiltonian(&params)).ground_vector();
    Ok(ground[0] * ground[0] > 0.5)
}

fn bisect_ground_state_crossing(j_over_kb: f64, g: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, CRITICAL_FIELD_BRACKET);
    if ground_is_polarized(j_over_kb, g, lo)? || !ground_is_polarized(j_over_kb, g, hi)? {
        return Err(Error::CriticalFieldNotBracketed { upper: hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ground_is_polarized(j_over_kb, g, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Oracle route for the coherence: diagonalize, exponentiate, rotate if needed.
pub fn oracle_coherence(params: &DimerParams, basis: Basis) -> Result<CoherenceValue> {
    let rho = crate::quantum::gibbs_state(&build_hamiltonian(params), params.temperature())?;
    let rho = match basis {
        Basis::Sz => rho,
        Basis::Sx => crate::quantum::rotate_to_sx(&rho)?,
    };
    Ok(l1_coherence(&rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{gibbs_state, singlet_vector};

    const J: f64 = -2.86;

    fn params(j: f64, t: f64, b: f64) -> DimerParams {
        DimerParams::new(j, 2.0, t, b).unwrap()
    }

    /// chi from <(S1z + S2z)^2> of the numerical Gibbs state at B = 0.
    fn fluctuation_reduced_chi(j: f64, t: f64) -> f64 {
        let rho = gibbs_state(&build_hamiltonian(&params(j, t, 0.0)), t).unwrap();
        let m2 = [1.0, 0.0, 0.0, 1.0];
        (0..4).map(|i| rho.get(i, i).re * m2[i]).sum()
    }

    #[test]
    fn reduced_susceptibility_limits() {
        assert!((reduced_susceptibility(J, 1e6) - 0.5).abs() < 1e-6);
        assert!(reduced_susceptibility(J, 0.01) < 1e-100);
        // T = |J|: 1 / (3 + e) per 2N normalization
        assert!((reduced_susceptibility(J, 2.86) / 2.0 - 0.174_877_704_527_109_46).abs() < 1e-15);
    }

    #[test]
    fn reduced_susceptibility_matches_fluctuation_oracle() {
        for &t in &[0.3, 1.0, 2.86, 10.0, 350.0] {
            for &j in &[-2.86, -0.5, 0.0, 1.0] {
                let closed = reduced_susceptibility(j, t);
                assert!((closed - fluctuation_reduced_chi(j, t)).abs() < 1e-12, "j={j} t={t}");
            }
        }
    }

    #[test]
    fn bleaney_bowers_in_both_units() {
        let cgs = bleaney_bowers_chi(J, 2.0, 2.86, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        let expected = 0.183_510_595_545_030_46;
        assert!((cgs.chi - expected).abs() < 1e-14);
        let si = bleaney_bowers_chi(J, 2.0, 2.86, 1.0, SusceptibilityUnit::SiM3PerMol).unwrap();
        let back = si.to_unit(SusceptibilityUnit::EmuPerMol);
        assert!((back.chi - cgs.chi).abs() <= 1e-12 * cgs.chi);
        assert!(bleaney_bowers_chi(J, 2.0, 0.0, 1.0, SusceptibilityUnit::EmuPerMol).is_err());
        assert!(bleaney_bowers_chi(J, 2.0, 1.0, 0.0, SusceptibilityUnit::EmuPerMol).is_err());
    }

    #[test]
    fn curie_law_gives_zero_correlation() {
        let p = bleaney_bowers_chi(0.0, 2.1, 5.0, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        assert!(correlation_from_chi(&p, 2.1, 1.0).unwrap().0.abs() < 1e-15);
    }

    #[test]
    fn correlation_at_low_temperature_is_singlet() {
        let p = bleaney_bowers_chi(J, 2.0, 0.05, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        assert!((correlation_from_chi(&p, 2.0, 1.0).unwrap().0 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_at_2_43_kelvin() {
        // c = (1 - e^{-J/T}) / (3 + e^{-J/T}) evaluated in numpy
        let p = bleaney_bowers_chi(J, 2.0, 2.43, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        let c = correlation_from_chi(&p, 2.0, 1.0).unwrap().0;
        assert!((c + 0.359_434_133_090_785_2).abs() < 1e-14);
    }

    #[test]
    fn unphysical_chi_is_rejected() {
        let p = bleaney_bowers_chi(J, 2.0, 20.0, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        let corrupted = SusceptibilityPoint { chi: p.chi * 10.0, ..p };
        assert!(matches!(
            correlation_from_chi(&corrupted, 2.0, 1.0),
            Err(Error::UnphysicalPoint { .. })
        ));
        // wrong unit label on CGS data is a normalization error
        let mislabeled = SusceptibilityPoint {
            unit: SusceptibilityUnit::SiM3PerMol,
            ..p
        };
        assert!(correlation_from_chi(&mislabeled, 2.0, 1.0).is_err());
        // small noise beyond 1/3 stays within tolerance
        let ferro = bleaney_bowers_chi(50.0, 2.0, 0.5, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        let noisy = SusceptibilityPoint {
            chi: ferro.chi * 1.01,
            ..ferro
        };
        assert!(correlation_from_chi(&noisy, 2.0, 1.0).unwrap().0 > 1.0 / 3.0);
    }

    #[test]
    fn zero_field_state_family() {
        let mixed = rho_zero_field(CorrelationValue(0.0)).unwrap();
        assert!(mixed.max_abs_diff(&DensityMatrix4::from_real(Matrix4::identity() * 0.25, Basis::Sz).unwrap()) < 1e-16);

        let s = singlet_vector();
        let singlet = rho_zero_field(CorrelationValue(-1.0)).unwrap();
        assert!(singlet.max_abs_diff(&DensityMatrix4::from_real(s * s.transpose(), Basis::Sz).unwrap()) < 1e-15);

        let c = -0.359_434_133_090_785_2;
        let rho = rho_zero_field(CorrelationValue(c)).unwrap();
        assert!((l1_coherence(&rho).value - 0.359_434_133_090_785_2).abs() < 1e-15);

        assert!(matches!(
            rho_zero_field(CorrelationValue(0.5)),
            Err(Error::NonpositiveState { .. })
        ));
        assert!(matches!(
            rho_zero_field(CorrelationValue(-1.1)),
            Err(Error::NonpositiveState { .. })
        ));
    }

    #[test]
    fn coherence_from_chi_limits() {
        let hot = bleaney_bowers_chi(J, 2.0, 1e5, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        assert!(coherence_from_chi(&hot, 2.0, 1.0).unwrap().value < 1e-4);
        let cold = bleaney_bowers_chi(J, 2.0, 0.02, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        assert!((coherence_from_chi(&cold, 2.0, 1.0).unwrap().value - 1.0).abs() < 1e-12);
        let mid = bleaney_bowers_chi(J, 2.0, 2.43, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
        assert!((coherence_from_chi(&mid, 2.0, 1.0).unwrap().value - 0.359).abs() < 0.005);
    }

    #[test]
    fn partition_function_values() {
        assert!((partition_function(&params(0.0, 3.0, 0.0)).unwrap() - 4.0).abs() < 1e-15);
        let p = params(J, 1.7, 0.0);
        let x = p.x();
        let expected = 3.0 * x.exp() + (-3.0 * x).exp();
        assert!((partition_function(&p).unwrap() - expected).abs() < 1e-12 * expected);
        // scipy expm trace
        let z = partition_function(&params(J, 1.0, 1.0)).unwrap();
        assert!((z - 11.033_548_484_163_1).abs() < 1e-10);
        let oracle = crate::quantum::trace_boltzmann(&build_hamiltonian(&params(J, 1.0, 1.0)), 1.0).unwrap();
        assert!((z - oracle).abs() < 1e-12 * z);
        assert!(matches!(
            partition_function(&params(J, 1e-3, 0.0)),
            Err(Error::TemperatureUnderflow { .. })
        ));
        assert!(ln_partition_function(&params(J, 1e-3, 0.0)).is_finite());
    }

    #[test]
    fn one_tesla_one_kelvin_coherences() {
        // scipy oracle: l1 of expm Gibbs state, and of (H x H) rho (H x H)
        let p = params(J, 1.0, 1.0);
        assert!((coherence_longitudinal(&p).value - 0.729_851_247_498_154_2).abs() < 1e-12);
        assert!((coherence_transverse(&p).value - 1.046_522_909_971_401).abs() < 1e-12);
    }

    #[test]
    fn zero_field_closed_forms_agree() {
        for &t in &[0.05, 0.5, 2.43, 30.0, 350.0] {
            let p = params(J, t, 0.0);
            let chi = bleaney_bowers_chi(J, 2.0, t, 1.0, SusceptibilityUnit::EmuPerMol).unwrap();
            let from_chi = coherence_from_chi(&chi, 2.0, 1.0).unwrap().value;
            assert!((coherence_longitudinal(&p).value - from_chi).abs() < 1e-12);
            assert!((coherence_transverse(&p).value - coherence_longitudinal(&p).value).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_limits_of_closed_forms() {
        let bc = critical_field(J, 2.0).unwrap().tesla();
        let below = params(J, 0.01, 0.5 * bc);
        let above = params(J, 0.01, 1.5 * bc);
        assert!((coherence_longitudinal(&below).value - 1.0).abs() < 1e-6);
        assert!(coherence_longitudinal(&above).value < 1e-6);
        assert!((coherence_transverse(&above).value - 3.0).abs() < 1e-6);
        // closed forms survive where plain exponentials would overflow
        let frozen = params(J, 1e-4, 1.5 * bc);
        assert!((coherence_transverse(&frozen).value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matrices_match_oracle() {
        let p = params(J, 1.0, 1.0);
        let oracle = gibbs_state(&build_hamiltonian(&p), 1.0).unwrap();
        assert!(rho_longitudinal(&p).unwrap().max_abs_diff(&oracle) < 1e-12);
        let rotated = crate::quantum::rotate_to_sx(&oracle).unwrap();
        assert!(rho_transverse(&p).unwrap().max_abs_diff(&rotated) < 1e-12);
        // sinh entry and corner entry from the scipy rotation
        let tx = rho_transverse(&p).unwrap();
        assert!((tx.get(0, 1).re - 0.039_583_957_809_155_9).abs() < 1e-12);
        assert!((tx.get(0, 3).re - 0.023_200_399_059_052_95).abs() < 1e-12);
    }

    #[test]
    fn critical_field_values() {
        let bc = critical_field(J, 2.0).unwrap();
        assert!((bc.tesla() - 2.128_882_816_959_274).abs() < 1e-12);
        assert!(bc.disagreement() < 1e-9);
        assert!(((bc.oersted() - 21_279.0) / 21_279.0).abs() < 5e-4);

        let unit = critical_field(-1.0, 2.0).unwrap();
        assert!((unit.tesla() - 0.744_364_621_314_431_5).abs() < 1e-13);
        assert!(unit.disagreement() < 1e-9);

        assert!(matches!(critical_field(0.0, 2.0), Err(Error::NoLevelCrossing { .. })));
        assert!(matches!(critical_field(3.0, 2.0), Err(Error::NoLevelCrossing { .. })));
        assert!(matches!(
            critical_field(-500.0, 2.0),
            Err(Error::CriticalFieldNotBracketed { .. })
        ));
    }

    #[test]
    fn thermal_bump_above_critical_field() {
        let temps: Vec<f64> = (1..=500).map(|i| i as f64 * 0.01).collect();
        let curve: Vec<f64> = temps
            .iter()
            .map(|&t| coherence_longitudinal(&params(J, t, 2.5)).value)
            .collect();
        let (imax, cmax) = curve.iter().enumerate().fold(
            (0, f64::MIN),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );
        assert!(imax > 0 && imax < curve.len() - 1);
        assert!((temps[imax] - 1.076).abs() < 0.02);
        assert!((cmax - 0.349_25).abs() < 1e-3);
    }
}
