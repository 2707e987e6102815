// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for one qubit (dim 2) and an
//! electron-nuclear pair (dim 4).
//!
//! Pair states are ordered `|e n⟩` with index `2·e + n`, where `0` is spin
//! up (`S_z = +1/2`) and `1` is spin down.

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat<const D: usize> = SMatrix<C64, D, D>;
pub type Ket<const D: usize> = SVector<C64, D>;
pub type Op2 = Mat<2>;
pub type Op4 = Mat<4>;
pub type Ket2 = Ket<2>;
pub type Ket4 = Ket<4>;

/// Trace deviation allowed after any operation.
pub const TRACE_TOL: f64 = 1e-12;
/// Relative Hermiticity deviation allowed for states and Hamiltonians.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Unitarity deviation allowed for propagators.
pub const UNITARY_TOL: f64 = 1e-10;
/// Norm deviation allowed for state vectors passed to [`DensityMatrix::overlap`].
pub const NORM_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Hermitian-specific operations that depend on the dimension.
pub trait Hermitian<const D: usize>: Sized {
    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors as
    /// columns.
    fn eigh(&self) -> (SVector<f64, D>, Mat<D>);

    /// `exp(-i H dt)`.
    fn propagator(&self, dt: f64) -> Mat<D>;
}

impl Hermitian<2> for Op2 {
    fn eigh(&self) -> (SVector<f64, 2>, Op2) {
        sorted_eigh(SymmetricEigen::new(*self))
    }

    fn propagator(&self, dt: f64) -> Op2 {
        // H = h0·1 + hx σx + hy σy + hz σz
        let h0 = 0.5 * (self[(0, 0)].re + self[(1, 1)].re);
        let hz = 0.5 * (self[(0, 0)].re - self[(1, 1)].re);
        let hx = 0.5 * (self[(0, 1)].re + self[(1, 0)].re);
        let hy = 0.5 * (self[(1, 0)].im - self[(0, 1)].im);
        let norm = (hx * hx + hy * hy + hz * hz).sqrt();
        let phase = C64::from_polar(1.0, -h0 * dt);
        let (c, s_over) = if norm * dt == 0.0 {
            (1.0, dt)
        } else {
            ((norm * dt).cos(), (norm * dt).sin() / norm)
        };
        // exp(-i n·σ θ) = cos θ − i sin θ (n·σ)
        let u = Op2::new(
            C64::new(c, -s_over * hz),
            C64::new(-s_over * hy, -s_over * hx),
            C64::new(s_over * hy, -s_over * hx),
            C64::new(c, s_over * hz),
        );
        u * phase
    }
}

impl Hermitian<4> for Op4 {
    fn eigh(&self) -> (SVector<f64, 4>, Op4) {
        sorted_eigh(SymmetricEigen::new(*self))
    }

    fn propagator(&self, dt: f64) -> Op4 {
        let eig = SymmetricEigen::new(*self);
        let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * dt));
        let v = eig.eigenvectors;
        v * Op4::from_diagonal(&phases) * v.adjoint()
    }
}

fn sorted_eigh<const D: usize>(eig: SymmetricEigen<C64, nalgebra::Const<D>>) -> (SVector<f64, D>, Mat<D>)
where
    nalgebra::Const<D>: nalgebra::DimSub<nalgebra::U1>,
{
    let mut order: Vec<usize> = (0..D).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = SVector::<f64, D>::zeros();
    let mut vecs = Mat::<D>::zeros();
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = eig.eigenvalues[src];
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Largest absolute entry of `H - H†`.
pub fn hermiticity_error<const D: usize>(h: &Mat<D>) -> f64 {
    (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_entry<const D: usize>(h: &Mat<D>) -> f64 {
    h.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks Hermiticity relative to the operator scale.
pub fn check_hermitian<const D: usize>(h: &Mat<D>) -> Result<()> {
    let err = hermiticity_error(h);
    if err > HERMITIAN_TOL * max_entry(h).max(1.0) {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// Largest absolute entry of `U†U - 1`.
pub fn unitarity_error<const D: usize>(u: &Mat<D>) -> f64 {
    (u.adjoint() * u - Mat::<D>::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b` of two single-spin operators.
pub fn kron(a: &Op2, b: &Op2) -> Op4 {
    Op4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

pub fn kron_ket(a: &Ket2, b: &Ket2) -> Ket4 {
    Ket4::from_fn(|r, _| a[r / 2] * b[r % 2])
}

pub fn basis_ket<const D: usize>(i: usize) -> Ket<D> {
    let mut k = Ket::<D>::zeros();
    k[i] = ONE;
    k
}

/// Spin-1/2 operators `(S_x, S_y, S_z)` = Pauli/2.
pub fn qubit_operators() -> [Op2; 3] {
    let h = C64::new(0.5, 0.0);
    [
        Op2::new(ZERO, h, h, ZERO),
        Op2::new(ZERO, -I * 0.5, I * 0.5, ZERO),
        Op2::new(h, ZERO, ZERO, -h),
    ]
}

/// Electron and nuclear spin operators embedded in the pair space.
#[derive(Debug, Clone)]
pub struct PairOperators {
    pub sx: Op4,
    pub sy: Op4,
    pub sz: Op4,
    pub ix: Op4,
    pub iy: Op4,
    pub iz: Op4,
}

impl PairOperators {
    pub fn new() -> Self {
        let [x, y, z] = qubit_operators();
        let id = Op2::identity();
        Self {
            sx: kron(&x, &id),
            sy: kron(&y, &id),
            sz: kron(&z, &id),
            ix: kron(&id, &x),
            iy: kron(&id, &y),
            iz: kron(&id, &z),
        }
    }
}

impl Default for PairOperators {
    fn default() -> Self {
        Self::new()
    }
}

/// Spin operators for a supported dimension.
#[derive(Debug, Clone)]
pub enum SpinOperators {
    Qubit([Op2; 3]),
    Pair(Box<PairOperators>),
}

pub fn spin_operators(dim: usize) -> Result<SpinOperators> {
    match dim {
        2 => Ok(SpinOperators::Qubit(qubit_operators())),
        4 => Ok(SpinOperators::Pair(Box::new(PairOperators::new()))),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Electron spin basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElectronState {
    Up,
    Down,
}

impl ElectronState {
    pub fn index(self) -> usize {
        match self {
            ElectronState::Up => 0,
            ElectronState::Down => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ElectronState::Up => ElectronState::Down,
            ElectronState::Down => ElectronState::Up,
        }
    }

    pub fn ket(self) -> Ket2 {
        basis_ket(self.index())
    }
}

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<const D: usize> {
    m: Mat<D>,
}

pub type Qubit = DensityMatrix<2>;
pub type Pair = DensityMatrix<4>;

impl<const D: usize> DensityMatrix<D> {
    /// Wraps a matrix after checking unit trace and Hermiticity.
    pub fn from_matrix(m: Mat<D>) -> Result<Self> {
        if D != 2 && D != 4 {
            return Err(Error::UnsupportedDimension(D));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > TRACE_TOL * 1e3 {
            return Err(Error::invalid(format!("density matrix trace {tr} ≠ 1")));
        }
        let herm = hermiticity_error(&m);
        if herm > HERMITIAN_TOL * 1e3 {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Self { m })
    }

    /// Skips validation. Callers guarantee the invariants.
    pub(crate) fn from_matrix_unchecked(m: Mat<D>) -> Self {
        Self { m }
    }

    pub fn pure(psi: &Ket<D>) -> Result<Self> {
        check_normalized(psi)?;
        Ok(Self { m: psi * psi.adjoint() })
    }

    pub fn maximally_mixed() -> Self {
        Self { m: Mat::<D>::identity() / C64::new(D as f64, 0.0) }
    }

    pub fn matrix(&self) -> &Mat<D> {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn overlap(&self, psi: &Ket<D>) -> Result<f64> {
        check_normalized(psi)?;
        Ok(self.overlap_unchecked(psi))
    }

    pub(crate) fn overlap_unchecked(&self, psi: &Ket<D>) -> f64 {
        (psi.adjoint() * self.m * psi)[(0, 0)].re.clamp(0.0, 1.0)
    }

    /// Population of basis state `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.m[(i, i)].re
    }

    /// `U ρ U†`.
    pub fn transform(&self, u: &Mat<D>) -> Self {
        let m = u * self.m * u.adjoint();
        Self { m: hermitize(m) }
    }

    /// Evolves under a time-independent Hamiltonian for `dt` seconds.
    pub fn propagate(&self, h: &Mat<D>, dt: f64) -> Result<Self>
    where
        Mat<D>: Hermitian<D>,
    {
        if !(dt >= 0.0) {
            return Err(Error::invalid(format!("negative or NaN time step {dt}")));
        }
        check_hermitian(h)?;
        Ok(self.transform(&h.propagator(dt)))
    }

    pub fn eigenvalues(&self) -> SVector<f64, D>
    where
        Mat<D>: Hermitian<D>,
    {
        self.m.eigh().0
    }

    /// Trace, Hermiticity and positivity all within tolerance.
    pub fn is_physical(&self) -> bool
    where
        Mat<D>: Hermitian<D>,
    {
        (self.trace() - ONE).norm() <= TRACE_TOL
            && hermiticity_error(&self.m) <= HERMITIAN_TOL
            && self.eigenvalues().iter().all(|&l| l >= PSD_TOL)
    }
}

fn check_normalized<const D: usize>(psi: &Ket<D>) -> Result<()> {
    let n2 = psi.norm_squared();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

/// Symmetrizes away rounding so `ρ = ρ†` holds exactly and renormalizes
/// the trace.
fn hermitize<const D: usize>(m: Mat<D>) -> Mat<D> {
    let mut h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = h.trace().re;
    if tr != 0.0 {
        h /= C64::new(tr, 0.0);
    }
    h
}

/// Zeroes coherences of a qubit state in the basis given by the columns of
/// `basis`.
pub fn dephase_in_basis(rho: &Op2, basis: &Op2) -> Op2 {
    let mut m = basis.adjoint() * rho * basis;
    m[(0, 1)] = ZERO;
    m[(1, 0)] = ZERO;
    basis * m * basis.adjoint()
}

impl Pair {
    pub fn product(electron: &Op2, nuclear: &Op2) -> Result<Self> {
        Self::from_matrix(kron(electron, nuclear))
    }

    /// Nuclear marginal `Tr_e(ρ)`.
    pub fn nuclear_marginal(&self) -> Qubit {
        let m = Op2::from_fn(|r, c| self.m[(r, c)] + self.m[(2 + r, 2 + c)]);
        Qubit::from_matrix_unchecked(m)
    }

    /// Electron marginal `Tr_n(ρ)`.
    pub fn electron_marginal(&self) -> Qubit {
        let m = Op2::from_fn(|r, c| self.m[(2 * r, 2 * c)] + self.m[(2 * r + 1, 2 * c + 1)]);
        Qubit::from_matrix_unchecked(m)
    }

    /// Probability of finding the electron in `e`.
    pub fn electron_population(&self, e: ElectronState) -> f64 {
        let i = 2 * e.index();
        self.m[(i, i)].re + self.m[(i + 1, i + 1)].re
    }
}

/// Optical reset of the electron.
///
/// The electron is re-initialized into `target` while the nuclear marginal
/// is kept. With `dephase_basis`, nuclear coherences are zeroed in that
/// basis (the eigenbasis of the nuclear Hamiltonian in the target manifold),
/// which is the uniform-phase average of a randomized free precession.
pub fn apply_laser_reset(rho: &Pair, target: ElectronState, dephase_basis: Option<&Op2>) -> Pair {
    let mut nuc = rho.nuclear_marginal().m;
    if let Some(basis) = dephase_basis {
        nuc = dephase_in_basis(&nuc, basis);
    }
    let e = target.ket();
    let electron = e * e.adjoint();
    Pair::from_matrix_unchecked(hermitize(kron(&electron, &nuc)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hz;
    use approx::assert_abs_diff_eq;

    fn commutator_norm(a: &Op4, b: &Op4) -> f64 {
        (a * b - b * a).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn qubit_sz_is_half_pauli() {
        let [_, _, sz] = qubit_operators();
        assert_eq!(sz, Op2::new(ONE * 0.5, ZERO, ZERO, ONE * -0.5));
    }

    #[test]
    fn pair_operators_commute_across_spins() {
        let ops = PairOperators::new();
        assert_eq!(commutator_norm(&ops.sz, &ops.iz), 0.0);
        assert_eq!(commutator_norm(&ops.sx, &ops.iy), 0.0);
        assert_eq!((ops.sz * ops.ix).trace(), ZERO);
    }

    #[test]
    fn unsupported_dimension() {
        assert!(matches!(spin_operators(3), Err(Error::UnsupportedDimension(3))));
        assert!(spin_operators(2).is_ok());
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let rho = Qubit::pure(&Ket2::new(ONE, I).scale(0.5f64.sqrt())).unwrap();
        let out = rho.propagate(&Op2::zeros(), 3.7).unwrap();
        assert_abs_diff_eq!((out.matrix() - rho.matrix()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn nuclear_pi_pulse_flips() {
        let [sx, _, _] = qubit_operators();
        let omega = hz(11.73e3);
        let rho = Qubit::pure(&basis_ket(1)).unwrap();
        let out = rho.propagate(&(sx * C64::new(omega, 0.0)), 42.6e-6).unwrap();
        assert!(out.population(0) >= 0.999, "{}", out.population(0));
    }

    #[test]
    fn sz_rotation_matches_bloch_formula() {
        let [sx, sy, sz] = qubit_operators();
        let delta = hz(1.3e3);
        let dt = 0.17e-3;
        let plus = Ket2::new(ONE, ONE).scale(0.5f64.sqrt());
        let out = Qubit::pure(&plus).unwrap().propagate(&(sz * C64::new(delta, 0.0)), dt).unwrap();
        let bx = 2.0 * (out.matrix() * sx).trace().re;
        let by = 2.0 * (out.matrix() * sy).trace().re;
        let angle = delta * dt;
        assert_abs_diff_eq!(bx, angle.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(by, angle.sin(), epsilon = 1e-12);
    }

    #[test]
    fn closed_form_and_eigen_propagators_agree() {
        let [sx, sy, sz] = qubit_operators();
        let h = sx * C64::new(3.1, 0.0) + sy * C64::new(-0.4, 0.0) + sz * C64::new(1.7, 0.0)
            + Op2::identity() * C64::new(0.3, 0.0);
        let u2 = h.propagator(0.9);
        let (vals, vecs) = h.eigh();
        let d = Op2::from_diagonal(&nalgebra::Vector2::new(
            C64::from_polar(1.0, -vals[0] * 0.9),
            C64::from_polar(1.0, -vals[1] * 0.9),
        ));
        let u_ref = vecs * d * vecs.adjoint();
        assert!((u2 - u_ref).norm() < 1e-13);
        assert!(unitarity_error(&u2) < UNITARY_TOL);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = Op2::zeros();
        h[(0, 1)] = ONE;
        assert!(matches!(
            Qubit::maximally_mixed().propagate(&h, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn overlap_edge_cases() {
        let psi = kron_ket(&basis_ket(0), &Ket2::new(ONE, I).scale(0.5f64.sqrt()));
        let rho = Pair::pure(&psi).unwrap();
        assert_abs_diff_eq!(rho.overlap(&psi).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(Pair::maximally_mixed().overlap(&psi).unwrap(), 0.25, epsilon = 1e-14);
        assert!(matches!(rho.overlap(&(psi * C64::new(1.1, 0.0))), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn laser_reset_keeps_bare_nuclear_state() {
        let up_up = Pair::pure(&basis_ket(0)).unwrap();
        let out = apply_laser_reset(&up_up, ElectronState::Down, None);
        let expected = kron_ket(&basis_ket(1), &basis_ket(0));
        assert_abs_diff_eq!(out.overlap(&expected).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn laser_reset_dephasing_matches_random_phase_average() {
        use rand::{Rng, SeedableRng};
        // nuclear |+x⟩ with a manifold axis along z: coherence entirely off-axis
        let plus = Ket2::new(ONE, ONE).scale(0.5f64.sqrt());
        let rho = Pair::pure(&kron_ket(&basis_ket(0), &plus)).unwrap();
        let basis = Op2::identity();
        let out = apply_laser_reset(&rho, ElectronState::Down, Some(&basis));
        assert_abs_diff_eq!(out.nuclear_marginal().purity(), 0.5, epsilon = 1e-14);

        // explicit average over random precession phases about the axis
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let [_, _, sz] = qubit_operators();
        let n = 10_000;
        let mut acc = Op2::zeros();
        for _ in 0..n {
            let phi: f64 = rng.random_range(0.0..crate::TWO_PI);
            let u = sz.propagator(phi);
            acc += u * plus * plus.adjoint() * u.adjoint();
        }
        acc /= C64::new(n as f64, 0.0);
        let averaged = (acc * acc).trace().re;
        assert!((averaged - 0.5).abs() < 0.01, "{averaged}");
        assert!((acc - out.nuclear_marginal().matrix()).norm() < 0.02);
    }
}
