//! Exact two-qubit operator algebra for the Heisenberg dimer.
//!
//! Everything here works on explicit 4x4 matrices in the product basis
//! {|00>, |01>, |10>, |11>}, where |0> is spin up along z. The closed forms
//! in [`crate::models`] are checked against these brute-force routines.

use nalgebra::{Complex, Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::constants::BOHR_OVER_BOLTZMANN;
use crate::error::{Error, Result};

/// Lowest temperature (kelvin) accepted by the numerical Gibbs routines.
pub const MIN_TEMPERATURE: f64 = 1.0e-6;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Product eigenbasis in which a density matrix is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Local S_z eigenbasis {|00>, |01>, |10>, |11>}.
    Sz,
    /// Local S_x eigenbasis {|++>, |+->, |-+>, |-->}.
    Sx,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::Sz => f.write_str("Sz"),
            Basis::Sx => f.write_str("Sx"),
        }
    }
}

/// Physical parameters of one dimer evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    j_over_kb: f64,
    g: f64,
    temperature: f64,
    b_field: f64,
}

impl DimerParams {
    /// `j_over_kb` in kelvin (negative is antiferromagnetic), `temperature` in
    /// kelvin, `b_field` in tesla along z.
    pub fn new(j_over_kb: f64, g: f64, temperature: f64, b_field: f64) -> Result<Self> {
        if !j_over_kb.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "J/k_B must be finite, got {j_over_kb}"
            )));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !b_field.is_finite() {
            return Err(Error::InvalidParameter(format!("field must be finite, got {b_field}")));
        }
        Ok(DimerParams {
            j_over_kb,
            g,
            temperature,
            b_field,
        })
    }

    pub fn j_over_kb(&self) -> f64 {
        self.j_over_kb
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn b_field(&self) -> f64 {
        self.b_field
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.j_over_kb, self.g, temperature, self.b_field)
    }

    pub fn with_field(&self, b_field: f64) -> Result<Self> {
        Self::new(self.j_over_kb, self.g, self.temperature, b_field)
    }

    pub fn with_coupling(&self, j_over_kb: f64) -> Result<Self> {
        Self::new(j_over_kb, self.g, self.temperature, self.b_field)
    }

    /// 1 / T in 1/K.
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// Zeeman energy g mu_B B / k_B in kelvin.
    pub fn zeeman(&self) -> f64 {
        self.g * BOHR_OVER_BOLTZMANN * self.b_field
    }

    /// x = J / (4 k_B T).
    pub fn x(&self) -> f64 {
        self.j_over_kb / (4.0 * self.temperature)
    }
}

/// Real symmetric Hamiltonian in the S_z product basis, energies in kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian4 {
    entries: Matrix4<f64>,
}

impl Hamiltonian4 {
    pub fn from_matrix(entries: Matrix4<f64>) -> Result<Self> {
        let scale = entries.amax().max(1.0);
        if (entries - entries.transpose()).amax() > 1e-14 * scale {
            return Err(Error::InvalidParameter("Hamiltonian is not symmetric".into()));
        }
        Ok(Hamiltonian4 { entries })
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.entries
    }
}

/// -J S1.S2 - g mu_B B (S1z + S2z), divided by k_B.
pub fn build_hamiltonian(params: &DimerParams) -> Hamiltonian4 {
    let j = params.j_over_kb();
    let h = params.zeeman();
    #[rustfmt::skip]
    let entries = Matrix4::new(
        -j / 4.0 - h, 0.0,       0.0,       0.0,
        0.0,          j / 4.0,   -j / 2.0,  0.0,
        0.0,          -j / 2.0,  j / 4.0,   0.0,
        0.0,          0.0,       0.0,       -j / 4.0 + h,
    );
    Hamiltonian4 { entries }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: [f64; 4],
    pub vectors: Matrix4<f64>,
}

impl Eigensystem {
    pub fn ground_vector(&self) -> Vector4<f64> {
        self.vectors.column(0).into_owned()
    }
}

/// Diagonalizes a Hamiltonian. Each eigenvector is signed so that its
/// largest-magnitude component (first one, on ties) is positive.
pub fn eigensystem(h: &Hamiltonian4) -> Eigensystem {
    let eig = SymmetricEigen::new(h.entries);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = [0.0; 4];
    let mut vectors = Matrix4::zeros();
    for (k, &idx) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[idx];
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let amax = v.amax();
        let lead = v.iter().position(|c| c.abs() >= amax - 1e-12).unwrap_or(0);
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(k, &v);
    }
    Eigensystem { values, vectors }
}

/// Hermitian, unit-trace, positive semidefinite two-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    entries: Matrix4<Complex<f64>>,
    basis: Basis,
}

impl DensityMatrix4 {
    /// Validates the state invariants before wrapping.
    pub fn new(entries: Matrix4<Complex<f64>>, basis: Basis) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm_err = (entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm_err:e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} != 1")));
        }
        let state = DensityMatrix4 { entries, basis };
        let min_eig = state.eigenvalues()[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(state)
    }

    pub fn from_real(entries: Matrix4<f64>, basis: Basis) -> Result<Self> {
        Self::new(entries.map(|x| Complex::new(x, 0.0)), basis)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &Matrix4<Complex<f64>> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<f64> {
        self.entries[(row, col)]
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.entries);
        let mut values = [0.0; 4];
        for (slot, v) in values.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn trace(&self) -> Complex<f64> {
        self.entries.trace()
    }

    /// Largest entrywise modulus of the difference between two states.
    pub fn max_abs_diff(&self, other: &DensityMatrix4) -> f64 {
        (self.entries - other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Convex combination `weight * self + (1 - weight) * other` (same basis).
    pub fn mix(&self, other: &DensityMatrix4, weight: f64) -> Result<DensityMatrix4> {
        if self.basis != other.basis {
            return Err(Error::WrongBasis {
                expected: self.basis,
                found: other.basis,
            });
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight {weight} outside [0, 1]"
            )));
        }
        let w = Complex::new(weight, 0.0);
        let v = Complex::new(1.0 - weight, 0.0);
        DensityMatrix4::new(self.entries * w + other.entries * v, self.basis)
    }
}

/// Thermal state exp(-H/T) / Z in the S_z basis.
///
/// The spectrum is shifted by the ground energy before exponentiating, so
/// Boltzmann weights stay in (0, 1].
pub fn gibbs_state(h: &Hamiltonian4, temperature: f64) -> Result<DensityMatrix4> {
    check_temperature(temperature)?;
    let eig = eigensystem(h);
    let ground = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|e| (-(e - ground) / temperature).exp()).collect();
    let norm: f64 = weights.iter().sum();
    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::TemperatureUnderflow { temperature });
    }
    let mut rho = Matrix4::<f64>::zeros();
    for (k, w) in weights.iter().enumerate() {
        let v = eig.vectors.column(k);
        rho += (v * v.transpose()) * (w / norm);
    }
    // symmetrize away rounding in the outer products
    let rho = (rho + rho.transpose()) * 0.5;
    DensityMatrix4::from_real(rho, Basis::Sz)
}

/// Tr exp(-H/T) computed from the numerical spectrum.
pub fn trace_boltzmann(h: &Hamiltonian4, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    let z: f64 = eigensystem(h).values.iter().map(|e| (-e / temperature).exp()).sum();
    if !z.is_finite() {
        return Err(Error::TemperatureUnderflow { temperature });
    }
    Ok(z)
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if temperature < MIN_TEMPERATURE {
        return Err(Error::TemperatureUnderflow { temperature });
    }
    Ok(())
}

/// R (x) R with R = [[1, 1], [1, -1]] / sqrt(2); real, symmetric and its own inverse.
fn hadamard_pair() -> Matrix4<Complex<f64>> {
    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0,  1.0,  1.0,  1.0,
        1.0, -1.0,  1.0, -1.0,
        1.0,  1.0, -1.0, -1.0,
        1.0, -1.0, -1.0,  1.0,
    ) * 0.5;
    m.map(|x| Complex::new(x, 0.0))
}

fn change_basis(rho: &DensityMatrix4, from: Basis, to: Basis) -> Result<DensityMatrix4> {
    if rho.basis != from {
        return Err(Error::WrongBasis {
            expected: from,
            found: rho.basis,
        });
    }
    let u = hadamard_pair();
    let rotated = u * rho.entries * u.adjoint();
    Ok(DensityMatrix4 {
        entries: rotated,
        basis: to,
    })
}

/// Rewrites an S_z-basis state in the S_x eigenbasis, |+-> = (|0> +- |1>)/sqrt(2).
pub fn rotate_to_sx(rho: &DensityMatrix4) -> Result<DensityMatrix4> {
    change_basis(rho, Basis::Sz, Basis::Sx)
}

/// Inverse of [`rotate_to_sx`].
pub fn rotate_to_sz(rho: &DensityMatrix4) -> Result<DensityMatrix4> {
    change_basis(rho, Basis::Sx, Basis::Sz)
}

/// Which eigenstate the dimer settles into at T -> 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundState {
    /// (|01> - |10>)/sqrt(2)
    Singlet,
    /// |00>, both spins along the field.
    Polarized,
    /// Lowest level is degenerate (level crossing or field-free triplet).
    Degenerate,
    Other,
}

impl GroundState {
    pub fn label(&self) -> &'static str {
        match self {
            GroundState::Singlet => "singlet",
            GroundState::Polarized => "polarized",
            GroundState::Degenerate => "degenerate",
            GroundState::Other => "other",
        }
    }
}

pub fn singlet_vector() -> Vector4<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(0.0, s, -s, 0.0)
}

pub fn classify_ground_state(h: &Hamiltonian4) -> GroundState {
    let eig = eigensystem(h);
    let scale = eig.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if eig.values[1] - eig.values[0] <= 1e-12 * scale {
        return GroundState::Degenerate;
    }
    let ground = eig.ground_vector();
    if ground.dot(&singlet_vector()).powi(2) > 1.0 - 1e-10 {
        GroundState::Singlet
    } else if ground[0].powi(2) > 1.0 - 1e-10 {
        GroundState::Polarized
    } else {
        GroundState::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(j: f64, g: f64, t: f64, b: f64) -> DimerParams {
        DimerParams::new(j, g, t, b).unwrap()
    }

    fn assert_values(actual: [f64; 4], expected: [f64; 4], tol: f64) {
        for (a, e) in actual.iter().zip(expected.iter()) {
            assert!((a - e).abs() < tol, "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(DimerParams::new(-2.86, 2.0, 0.0, 0.0).is_err());
        assert!(DimerParams::new(-2.86, 2.0, -1.0, 0.0).is_err());
        assert!(DimerParams::new(-2.86, 0.0, 1.0, 0.0).is_err());
        assert!(DimerParams::new(f64::NAN, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_field_spectrum_is_triplet_and_singlet() {
        let h = build_hamiltonian(&params(-2.86, 2.0, 1.0, 0.0));
        let eig = eigensystem(&h);
        assert_values(eig.values, [-2.145, 0.715, 0.715, 0.715], 1e-12);
    }

    #[test]
    fn uncoupled_zero_field_is_zero_matrix() {
        let h = build_hamiltonian(&params(0.0, 2.0, 1.0, 0.0));
        assert_eq!(*h.matrix(), Matrix4::zeros());
    }

    #[test]
    fn one_tesla_spectrum() {
        let h = build_hamiltonian(&params(-2.86, 2.0, 1.0, 1.0));
        let z = 1.343_427_631_251_679_5;
        let eig = eigensystem(&h);
        assert_values(eig.values, [-2.145, 0.715 - z, 0.715, 0.715 + z], 1e-12);
        for k in 0..4 {
            let v = eig.vectors.column(k);
            let residual = h.matrix() * v - v * eig.values[k];
            assert!(residual.amax() < 1e-12);
        }
        assert!((eig.vectors.transpose() * eig.vectors - Matrix4::identity()).amax() < 1e-12);
    }

    #[test]
    fn eigensystem_of_diagonal_matrix() {
        let h = Hamiltonian4::from_matrix(Matrix4::from_diagonal(&Vector4::new(3.0, 1.0, 4.0, 2.0))).unwrap();
        let eig = eigensystem(&h);
        assert_values(eig.values, [1.0, 2.0, 3.0, 4.0], 1e-15);
        assert_eq!(eig.vectors.column(0).into_owned(), Vector4::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(eig.vectors.column(3).into_owned(), Vector4::new(0.0, 0.0, 1.0, 0.0));

        let zero = eigensystem(&Hamiltonian4::from_matrix(Matrix4::zeros()).unwrap());
        assert_eq!(zero.values, [0.0; 4]);
    }

    #[test]
    fn sign_convention_makes_leading_component_positive() {
        let h = build_hamiltonian(&params(-2.86, 2.0, 1.0, 0.3));
        let eig = eigensystem(&h);
        for k in 0..4 {
            let v = eig.vectors.column(k);
            let lead = v.iter().position(|c| c.abs() >= v.amax() - 1e-12).unwrap();
            assert!(v[lead] > 0.0);
        }
        // singlet comes out as (|01> - |10>)/sqrt(2)
        assert!((eig.ground_vector() - singlet_vector()).amax() < 1e-12);
    }

    #[test]
    fn asymmetric_hamiltonian_rejected() {
        let mut m = Matrix4::zeros();
        m[(0, 1)] = 1.0;
        assert!(Hamiltonian4::from_matrix(m).is_err());
    }

    #[test]
    fn gibbs_of_zero_hamiltonian_is_maximally_mixed() {
        let h = Hamiltonian4::from_matrix(Matrix4::zeros()).unwrap();
        for t in [1e-3, 1.0, 300.0] {
            let rho = gibbs_state(&h, t).unwrap();
            let expected = Matrix4::<f64>::identity() * 0.25;
            assert!((rho.matrix().map(|z| z.re) - expected).amax() < 1e-15);
        }
    }

    #[test]
    fn gibbs_low_temperature_is_singlet_projector() {
        let rho = gibbs_state(&build_hamiltonian(&params(-2.86, 2.0, 1.0, 0.0)), 1e-3).unwrap();
        let s = singlet_vector();
        let projector = s * s.transpose();
        assert!((rho.matrix().map(|z| z.re) - projector).amax() < 1e-9);
    }

    #[test]
    fn gibbs_at_one_kelvin_one_tesla() {
        // entries from scipy.linalg.expm(-H/T) / trace
        let rho = gibbs_state(&build_hamiltonian(&params(-2.86, 2.0, 1.0, 1.0)), 1.0).unwrap();
        let re = rho.matrix().map(|z| z.re);
        assert!((re[(0, 0)] - 0.169_905_502_802_826_2).abs() < 1e-12);
        assert!((re[(1, 1)] - 0.409_262_412_815_485_53).abs() < 1e-12);
        assert!((re[(1, 2)] + 0.364_925_623_749_077).abs() < 1e-12);
        assert!((re[(3, 3)] - 0.011_569_671_566_202_6).abs() < 1e-12);
        let z = trace_boltzmann(&build_hamiltonian(&params(-2.86, 2.0, 1.0, 1.0)), 1.0).unwrap();
        assert!((z - 11.033_548_484_163_1).abs() < 1e-10);
    }

    #[test]
    fn gibbs_rejects_tiny_temperatures() {
        let h = build_hamiltonian(&params(-2.86, 2.0, 1.0, 0.0));
        assert!(matches!(gibbs_state(&h, 1e-7), Err(Error::TemperatureUnderflow { .. })));
        assert!(matches!(gibbs_state(&h, 0.0), Err(Error::InvalidParameter(_))));
        assert!(gibbs_state(&h, 2e-6).is_ok());
    }

    #[test]
    fn trace_boltzmann_overflow_is_reported() {
        let h = build_hamiltonian(&params(-2.86, 2.0, 1.0, 0.0));
        assert!(matches!(
            trace_boltzmann(&h, 1e-3),
            Err(Error::TemperatureUnderflow { .. })
        ));
    }

    #[test]
    fn rotation_of_maximally_mixed_state() {
        let mixed = DensityMatrix4::from_real(Matrix4::identity() * 0.25, Basis::Sz).unwrap();
        let rotated = rotate_to_sx(&mixed).unwrap();
        assert_eq!(rotated.basis(), Basis::Sx);
        assert!(
            rotated.max_abs_diff(&DensityMatrix4::from_real(Matrix4::identity() * 0.25, Basis::Sx).unwrap()) < 1e-15
        );
    }

    #[test]
    fn singlet_keeps_its_form_in_sx() {
        let s = singlet_vector();
        let rho = DensityMatrix4::from_real(s * s.transpose(), Basis::Sz).unwrap();
        let rotated = rotate_to_sx(&rho).unwrap();
        // (|+-> - |-+>)/sqrt(2) carries the same sign pattern up to a global phase
        let re = rotated.matrix().map(|z| z.re);
        assert!((re - s * s.transpose()).amax() < 1e-15);
    }

    #[test]
    fn rotation_checks_basis_label() {
        let mixed = DensityMatrix4::from_real(Matrix4::identity() * 0.25, Basis::Sx).unwrap();
        assert!(matches!(rotate_to_sx(&mixed), Err(Error::WrongBasis { .. })));
        let mixed = DensityMatrix4::from_real(Matrix4::identity() * 0.25, Basis::Sz).unwrap();
        assert!(matches!(rotate_to_sz(&mixed), Err(Error::WrongBasis { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = Matrix4::<f64>::identity() * 0.25;
        m[(0, 1)] = 0.1;
        assert!(DensityMatrix4::from_real(m, Basis::Sz).is_err());
        assert!(DensityMatrix4::from_real(Matrix4::identity() * 0.3, Basis::Sz).is_err());
        let neg = Matrix4::from_diagonal(&Vector4::new(0.5, 0.5, 0.5, -0.5));
        assert!(DensityMatrix4::from_real(neg, Basis::Sz).is_err());
    }

    #[test]
    fn ground_state_classification() {
        let below = build_hamiltonian(&params(-2.86, 2.0, 1.0, 1.0));
        assert_eq!(classify_ground_state(&below), GroundState::Singlet);
        let above = build_hamiltonian(&params(-2.86, 2.0, 1.0, 3.0));
        assert_eq!(classify_ground_state(&above), GroundState::Polarized);
        let triplet = build_hamiltonian(&params(1.0, 2.0, 1.0, 0.0));
        assert_eq!(classify_ground_state(&triplet), GroundState::Degenerate);
    }
}
