//! Pinned physical constants and unit conversions.
//!
//! Energies throughout the crate are expressed in kelvin (E / k_B), so the
//! only place these SI values enter is the Zeeman energy and the
//! susceptibility normalization.

/// Boltzmann constant in J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Bohr magneton in J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.2740100783e-24;

/// Avogadro constant in 1/mol (exact SI value).
pub const AVOGADRO: f64 = 6.02214076e23;

/// Oersted per tesla (1 T = 10^4 Oe in vacuum).
pub const OERSTED_PER_TESLA: f64 = 1.0e4;

/// Factor between SI and CGS molar susceptibility:
/// chi[m^3/mol] = 4 pi 1e-6 chi[emu/mol].
pub const SI_PER_EMU_MOLAR: f64 = 4.0 * std::f64::consts::PI * 1.0e-6;

/// mu_B / k_B in K/T: the Zeeman energy of a unit g-factor spin per tesla.
pub const BOHR_OVER_BOLTZMANN: f64 = BOHR_MAGNETON / BOLTZMANN;

/// N_A mu_B^2 / k_B in emu K / mol, evaluated in CGS (erg/G and erg/K).
pub fn curie_constant_cgs() -> f64 {
    let mu_b_cgs = BOHR_MAGNETON * 1.0e3;
    let k_b_cgs = BOLTZMANN * 1.0e7;
    AVOGADRO * mu_b_cgs * mu_b_cgs / k_b_cgs
}

pub fn tesla_to_oersted(tesla: f64) -> f64 {
    tesla * OERSTED_PER_TESLA
}

pub fn oersted_to_tesla(oersted: f64) -> f64 {
    oersted / OERSTED_PER_TESLA
}

/// One line per pinned constant, used by the CLI `--version` output.
pub fn describe() -> String {
    format!(
        "k_B = {BOLTZMANN:e} J/K\nmu_B = {BOHR_MAGNETON:e} J/T\nN_A = {AVOGADRO:e} 1/mol\n1 T = {OERSTED_PER_TESLA:e} Oe\nN_A mu_B^2 / k_B = {:.12} emu K/mol",
        curie_constant_cgs()
    )
}
