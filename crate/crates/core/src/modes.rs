//! Cavity mode comb, Gaussian states and the one-round-trip channel.
//!
//! Quadratures are ordered `(x₁, p₁, …, x_K, p_K)` with `[x, p] = i` and the
//! vacuum covariance `I/2`. A linear map on the annihilation operators,
//! `a' = A a + B a†`, acts on the quadratures through the 2×2 blocks
//!
//! ```text
//! [ Re(A+B)  −Im(A−B) ]
//! [ Im(A+B)   Re(A−B) ]
//! ```
//!
//! which is how every map in this module is built.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{DerivedParams, SPEED_OF_LIGHT};

/// Scale between the single-reflection sideband amplitudes and the
/// squeezing applied per round trip. With this factor the degenerate mode
/// squeezes at ν₀ = β/τ, so the engine's oscillation threshold sits exactly
/// at β = π/(2F).
pub const ROUND_TRIP_GAIN: f64 = 4.0;

/// Max-norm tolerance on `S J Sᵀ − J`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Allowed undershoot of the uncertainty relation for unit-scale states.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Which sidebands of the modulated mirror are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sidebands {
    /// Pair creation into modes `k + k' = 2m` only.
    #[default]
    Pairs,
    /// Pair creation plus the resonant frequency conversion `k ↔ k ± 2m`.
    Full,
}

/// Truncated comb `ω_k = kπc/L₀`, `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    count: usize,
    harmonic: u32,
    detuning: f64,
    mean_length: f64,
}

impl ModeBasis {
    pub fn new(count: usize, harmonic: u32, detuning: f64, mean_length: f64) -> Result<Self> {
        if harmonic < 1 {
            return Err(Error::InvalidConfig("harmonic must be >= 1".into()));
        }
        let min = 2 * harmonic as usize + 2;
        if count < min {
            return Err(Error::Truncation(format!(
                "{count} modes cannot hold harmonic {harmonic}: need at least 2m+2 = {min}"
            )));
        }
        if !(mean_length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mean length must be > 0, got {mean_length}"
            )));
        }
        Ok(ModeBasis {
            count,
            harmonic,
            detuning,
            mean_length,
        })
    }

    /// Basis matching `derived`, with `count` modes or the default size.
    pub fn for_params(derived: &DerivedParams, count: Option<usize>) -> Result<Self> {
        let count = count.unwrap_or_else(|| Self::default_count(derived.harmonic));
        Self::new(
            count,
            derived.harmonic,
            derived.detuning,
            derived.mean_length,
        )
    }

    /// `max(8m, 2m + 6)`.
    pub fn default_count(harmonic: u32) -> usize {
        let m = harmonic as usize;
        (8 * m).max(2 * m + 6)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn harmonic(&self) -> u32 {
        self.harmonic
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn dimension(&self) -> usize {
        2 * self.count
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let unit = std::f64::consts::PI * SPEED_OF_LIGHT / self.mean_length;
        (1..=self.count).map(|k| k as f64 * unit).collect()
    }

    pub fn pump_frequency(&self) -> f64 {
        crate::units::resonant_frequency(self.mean_length, self.harmonic, self.detuning)
    }

    pub fn contains(&self, k: usize) -> bool {
        (1..=self.count).contains(&k)
    }

    /// Pair partner `2m − k` of mode `k`, if the pair exists.
    pub fn partner(&self, k: usize) -> Option<usize> {
        let two_m = 2 * self.harmonic as usize;
        (k >= 1 && k < two_m).then(|| two_m - k)
    }
}

/// `J = ⊕ [[0, 1], [−1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Quadrature matrix of `a' = A a + B a†`.
pub fn quadrature_form(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for j in 0..n {
            let plus = a[(k, j)] + b[(k, j)];
            let minus = a[(k, j)] - b[(k, j)];
            m[(2 * k, 2 * j)] = plus.re;
            m[(2 * k, 2 * j + 1)] = -minus.im;
            m[(2 * k + 1, 2 * j)] = plus.im;
            m[(2 * k + 1, 2 * j + 1)] = minus.re;
        }
    }
    m
}

/// Inverse of [`quadrature_form`]: recovers `(A, B)`.
pub fn bogoliubov_blocks(s: &DMatrix<f64>) -> (DMatrix<Complex<f64>>, DMatrix<Complex<f64>>) {
    let n = s.nrows() / 2;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let xx = s[(2 * k, 2 * j)];
            let xp = s[(2 * k, 2 * j + 1)];
            let px = s[(2 * k + 1, 2 * j)];
            let pp = s[(2 * k + 1, 2 * j + 1)];
            a[(k, j)] = Complex::new((xx + pp) / 2.0, (px - xp) / 2.0);
            b[(k, j)] = Complex::new((xx - pp) / 2.0, (px + xp) / 2.0);
        }
    }
    (a, b)
}

/// A real linear map preserving the canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
}

impl SymplecticMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() % 2 != 0 {
            return Err(Error::Consistency(format!(
                "symplectic map must be 2K x 2K, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let map = SymplecticMap { matrix };
        let defect = map.defect();
        if !(defect < SYMPLECTIC_TOL) {
            return Err(Error::Consistency(format!(
                "map is not symplectic: |SJS^T - J| = {defect:e}"
            )));
        }
        Ok(map)
    }

    pub fn identity(modes: usize) -> Self {
        SymplecticMap {
            matrix: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `‖S J Sᵀ − J‖∞`.
    pub fn defect(&self) -> f64 {
        let j = symplectic_form(self.modes());
        max_abs(&(&self.matrix * &j * self.matrix.transpose() - j))
    }
}

/// Per-round-trip drive coefficients in photon-number normalisation:
/// `conversion` multiplies `a_j` and `pairing` multiplies `a_j†` in the
/// first-order update of `a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveCoefficients {
    pub conversion: DMatrix<Complex<f64>>,
    pub pairing: DMatrix<Complex<f64>>,
}

/// Coupling table of the modulated mirror on the basis.
///
/// For output mode `k` the mirror mixes in `ω_k + Ω` (mode `k + 2m`) with
/// weight `(1 + ω_k/Ω) β e^{−iθ}` and `ω_k − Ω` with weight
/// `(1 − ω_k/Ω) β e^{iθ}`; a negative `ω_k − Ω` is the creation operator of
/// mode `2m − k`. Rescaled to photon-number operators both become
/// `β √(ω_k ω_j)/Ω`, which makes the conversion block anti-Hermitian and the
/// pairing block symmetric.
pub fn drive_coefficients(
    beta: f64,
    theta: f64,
    basis: &ModeBasis,
    sidebands: Sidebands,
) -> Result<DriveCoefficients> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    let n = basis.count();
    let two_m = 2 * basis.harmonic() as usize;
    let scale = ROUND_TRIP_GAIN * beta / two_m as f64;
    let up = Complex::from_polar(1.0, -theta);
    let down = Complex::from_polar(1.0, theta);
    let weight = |k: usize, j: usize| scale * ((k * j) as f64).sqrt();

    let mut conversion = DMatrix::zeros(n, n);
    let mut pairing = DMatrix::zeros(n, n);
    for k in 1..=n {
        if let Some(j) = basis.partner(k) {
            if !basis.contains(j) {
                return Err(Error::Truncation(format!(
                    "pair partner {j} of mode {k} is not in the basis"
                )));
            }
            pairing[(k - 1, j - 1)] = down * weight(k, j);
        }
        if sidebands == Sidebands::Full {
            if basis.contains(k + two_m) {
                let j = k + two_m;
                conversion[(k - 1, j - 1)] = up * weight(k, j);
            }
            if k > two_m {
                let j = k - two_m;
                conversion[(k - 1, j - 1)] = -down * weight(k, j);
            }
        }
    }
    Ok(DriveCoefficients {
        conversion,
        pairing,
    })
}

/// Symplectic map of the modulated mirror over one round trip, the
/// exponential of the quadratic generator given by [`drive_coefficients`].
pub fn drive_generator(
    beta: f64,
    theta: f64,
    basis: &ModeBasis,
    sidebands: Sidebands,
) -> Result<SymplecticMap> {
    let coeffs = drive_coefficients(beta, theta, basis, sidebands)?;
    if beta == 0.0 {
        return Ok(SymplecticMap::identity(basis.count()));
    }
    let generator = quadrature_form(&coeffs.conversion, &coeffs.pairing);
    SymplecticMap::new(generator.exp())
}

/// Free propagation over one pass, in the frame co-rotating with the pump
/// harmonics. Only the detuning leaves a phase, `πkδ` for mode `k`.
pub fn propagation(basis: &ModeBasis) -> SymplecticMap {
    let n = basis.count();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let phi = std::f64::consts::PI * (k + 1) as f64 * basis.detuning();
        let (s, c) = phi.sin_cos();
        m[(2 * k, 2 * k)] = c;
        m[(2 * k, 2 * k + 1)] = -s;
        m[(2 * k + 1, 2 * k)] = s;
        m[(2 * k + 1, 2 * k + 1)] = c;
    }
    SymplecticMap { matrix: m }
}

/// `V ↦ T V Tᵀ + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    transfer: DMatrix<f64>,
    transfer_t: DMatrix<f64>,
    noise: DMatrix<f64>,
}

impl GaussianChannel {
    pub fn new(transfer: DMatrix<f64>, noise: DMatrix<f64>) -> Result<Self> {
        if !transfer.is_square() || transfer.shape() != noise.shape() || transfer.nrows() % 2 != 0 {
            return Err(Error::Consistency(
                "channel matrices must be 2K x 2K".into(),
            ));
        }
        let channel = Self::unchecked(transfer, noise);
        channel.validate()?;
        Ok(channel)
    }

    fn unchecked(transfer: DMatrix<f64>, noise: DMatrix<f64>) -> Self {
        let transfer_t = transfer.transpose();
        GaussianChannel {
            transfer,
            transfer_t,
            noise,
        }
    }

    pub fn identity(modes: usize) -> Self {
        let d = 2 * modes;
        Self::unchecked(DMatrix::identity(d, d), DMatrix::zeros(d, d))
    }

    pub fn from_symplectic(map: &SymplecticMap) -> Self {
        let d = map.matrix().nrows();
        Self::unchecked(map.matrix().clone(), DMatrix::zeros(d, d))
    }

    /// Beam splitter of transmissivity `eta` against vacuum.
    pub fn attenuator(modes: usize, eta: f64) -> Self {
        let d = 2 * modes;
        Self::unchecked(
            DMatrix::identity(d, d) * eta.sqrt(),
            DMatrix::identity(d, d) * ((1.0 - eta) / 2.0),
        )
    }

    pub fn transfer(&self) -> &DMatrix<f64> {
        &self.transfer
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    pub fn modes(&self) -> usize {
        self.transfer.nrows() / 2
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GaussianChannel) -> GaussianChannel {
        let transfer = &next.transfer * &self.transfer;
        let noise = &next.transfer * &self.noise * &next.transfer_t + &next.noise;
        Self::unchecked(transfer, noise)
    }

    pub fn apply(&self, covariance: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = &self.transfer * covariance * &self.transfer_t + &self.noise;
        symmetrize(&mut out);
        out
    }

    /// Allocation-free [`apply`](Self::apply); `scratch` must be 2K × 2K.
    pub(crate) fn apply_into(&self, covariance: &mut DMatrix<f64>, scratch: &mut DMatrix<f64>) {
        scratch.gemm(1.0, &self.transfer, covariance, 0.0);
        covariance.copy_from(&self.noise);
        covariance.gemm(1.0, scratch, &self.transfer_t, 1.0);
        symmetrize(covariance);
    }

    /// Smallest eigenvalue of `N + (i/2)(J − T J Tᵀ)`; non-negative for a
    /// completely positive channel.
    pub fn complete_positivity_margin(&self) -> f64 {
        let n = self.modes();
        let j = symplectic_form(n);
        let b = (&j - &self.transfer * &j * &self.transfer_t) * 0.5;
        let d = 2 * n;
        // Real embedding of the Hermitian matrix A + iB.
        let mut h = DMatrix::zeros(2 * d, 2 * d);
        h.view_mut((0, 0), (d, d)).copy_from(&self.noise);
        h.view_mut((d, d), (d, d)).copy_from(&self.noise);
        h.view_mut((0, d), (d, d)).copy_from(&(-&b));
        h.view_mut((d, 0), (d, d)).copy_from(&b);
        symmetrize(&mut h);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    pub fn validate(&self) -> Result<()> {
        let asym = max_abs(&(&self.noise - self.noise.transpose()));
        let scale = 1.0 + max_abs(&self.noise) + max_abs(&self.transfer).powi(2);
        if asym > 1e-12 * scale {
            return Err(Error::Consistency(format!(
                "channel noise is not symmetric ({asym:e})"
            )));
        }
        let margin = self.complete_positivity_margin();
        if margin < -1e-10 * scale {
            return Err(Error::Consistency(format!(
                "channel is not completely positive (margin {margin:e})"
            )));
        }
        Ok(())
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Zero-mean Gaussian state, described by its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    covariance: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(modes: usize) -> Self {
        GaussianState {
            covariance: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Validates symmetry and physicality of `covariance`.
    pub fn from_covariance(covariance: DMatrix<f64>) -> Result<Self> {
        if !covariance.is_square() || covariance.nrows() % 2 != 0 {
            return Err(Error::Consistency("covariance must be 2K x 2K".into()));
        }
        let asym = max_abs(&(&covariance - covariance.transpose()));
        if asym > 1e-12 * (1.0 + max_abs(&covariance)) {
            return Err(Error::Consistency(format!(
                "covariance is not symmetric ({asym:e})"
            )));
        }
        let state = GaussianState { covariance };
        state.check_physical(0)?;
        Ok(state)
    }

    pub(crate) fn from_raw(covariance: DMatrix<f64>) -> Self {
        GaussianState { covariance }
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub(crate) fn covariance_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.covariance
    }

    pub fn modes(&self) -> usize {
        self.covariance.nrows() / 2
    }

    /// Symplectic eigenvalues in increasing order, one per mode.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let n = self.modes();
        let j = symplectic_form(n);
        let eig = SymmetricEigen::new(self.covariance.clone());
        let sqrt_v = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
            * eig.eigenvectors.transpose();
        let mut m = &sqrt_v * j.transpose() * &self.covariance * &j * &sqrt_v;
        symmetrize(&mut m);
        let mut squares: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        squares.sort_by(f64::total_cmp);
        squares
            .chunks(2)
            .map(|pair| pair[0].max(0.0).sqrt())
            .collect()
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Tolerance on the symplectic spectrum, widened with the covariance
    /// norm to stay above round-off for strongly amplified states.
    pub fn physicality_tolerance(&self) -> f64 {
        PHYSICALITY_TOL + 1e3 * f64::EPSILON * max_abs(&self.covariance)
    }

    /// Smallest eigenvalue of `V + (i/2)J`; non-negative exactly when the
    /// state is physical. Unlike the symplectic spectrum this stays well
    /// conditioned for large covariances.
    pub fn uncertainty_margin(&self) -> f64 {
        let d = self.covariance.nrows();
        let half_j = symplectic_form(self.modes()) * 0.5;
        let mut h = DMatrix::zeros(2 * d, 2 * d);
        h.view_mut((0, 0), (d, d)).copy_from(&self.covariance);
        h.view_mut((d, d), (d, d)).copy_from(&self.covariance);
        h.view_mut((0, d), (d, d)).copy_from(&(-&half_j));
        h.view_mut((d, 0), (d, d)).copy_from(&half_j);
        symmetrize(&mut h);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    pub fn check_physical(&self, step: u64) -> Result<()> {
        if !(self.uncertainty_margin() >= -self.physicality_tolerance()) {
            let nu = self.min_symplectic_eigenvalue();
            return Err(Error::NumericalInstability {
                step,
                eigenvalue: nu,
            });
        }
        Ok(())
    }

    /// Cheap necessary condition: every single-mode reduced state is physical.
    pub(crate) fn check_reduced_modes(&self, step: u64) -> Result<()> {
        let tol = self.physicality_tolerance();
        for k in 0..self.modes() {
            let v = &self.covariance;
            let det = v[(2 * k, 2 * k)] * v[(2 * k + 1, 2 * k + 1)] - v[(2 * k, 2 * k + 1)].powi(2);
            let nu = det.max(0.0).sqrt();
            if !(nu >= 0.5 - tol) {
                return Err(Error::NumericalInstability {
                    step,
                    eigenvalue: nu,
                });
            }
        }
        Ok(())
    }

    pub fn total_photons(&self) -> f64 {
        0.5 * self.covariance.trace() - 0.5 * self.modes() as f64
    }
}

/// `n_k = (V_xx + V_pp)/2 − 1/2` for every mode, clipped at zero.
pub fn photon_numbers(state: &GaussianState) -> Vec<f64> {
    let v = state.covariance();
    (0..state.modes())
        .map(|k| (0.5 * (v[(2 * k, 2 * k)] + v[(2 * k + 1, 2 * k + 1)]) - 0.5).max(0.0))
        .collect()
}

/// Photons transmitted through one mirror of reflectivity `r` by `state`.
pub fn outflux_increment(state: &GaussianState, reflectivity: f64) -> f64 {
    (1.0 - reflectivity) * photon_numbers(state).iter().sum::<f64>()
}

/// One stroboscopic step, with a full physicality check on the result.
pub fn step(state: &GaussianState, channel: &GaussianChannel) -> Result<GaussianState> {
    if state.modes() != channel.modes() {
        return Err(Error::Consistency(format!(
            "state has {} modes, channel has {}",
            state.modes(),
            channel.modes()
        )));
    }
    let next = GaussianState::from_raw(channel.apply(state.covariance()));
    next.check_physical(0)?;
    Ok(next)
}

/// Photon number at an intermediate point of the round trip, as a linear
/// functional of the covariance at the start of the step.
#[derive(Debug, Clone)]
struct Probe {
    weight: DMatrix<f64>,
    offset: f64,
}

impl Probe {
    fn new(upto: &GaussianChannel) -> Self {
        Probe {
            weight: upto.transfer_t.clone() * &upto.transfer,
            offset: upto.noise.trace(),
        }
    }

    fn photons(&self, covariance: &DMatrix<f64>) -> f64 {
        let modes = covariance.nrows() / 2;
        0.5 * (self.weight.dot(covariance) + self.offset) - 0.5 * modes as f64
    }
}

/// One round trip of the cavity together with the two mirror encounters at
/// which photons leave it.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    channel: GaussianChannel,
    probes: [Probe; 2],
    reflectivity: f64,
}

impl RoundTrip {
    pub fn channel(&self) -> &GaussianChannel {
        &self.channel
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    /// Photons emitted through both mirrors during the step that starts
    /// from `covariance`.
    pub fn outflux(&self, covariance: &DMatrix<f64>) -> f64 {
        let hits: f64 = self
            .probes
            .iter()
            .map(|p| p.photons(covariance).max(0.0))
            .sum();
        (1.0 - self.reflectivity) * hits
    }
}

/// `[static mirror] ∘ [propagation] ∘ [modulated mirror] ∘ [propagation]`.
pub fn round_trip_channel(
    derived: &DerivedParams,
    basis: &ModeBasis,
    sidebands: Sidebands,
) -> Result<RoundTrip> {
    let n = basis.count();
    let r = derived.reflectivity;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "reflectivity must lie in (0, 1], got {r}"
        )));
    }
    let pass = GaussianChannel::from_symplectic(&propagation(basis));
    let drive = drive_generator(derived.beta, derived.drive.theta, basis, sidebands)?;
    let mirror = GaussianChannel::attenuator(n, r);

    let at_modulated = pass.then(&GaussianChannel::from_symplectic(&drive));
    let at_static = at_modulated.then(&mirror).then(&pass);
    let channel = at_static.then(&mirror);
    channel.validate()?;
    Ok(RoundTrip {
        probes: [Probe::new(&at_modulated), Probe::new(&at_static)],
        channel,
        reflectivity: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn basis(count: usize, m: u32) -> ModeBasis {
        ModeBasis::new(count, m, 0.0, 1e-6).unwrap()
    }

    fn params(beta: f64, finesse: f64, m: u32) -> DerivedParams {
        DerivedParams::from_dimensionless(beta, finesse, m, 0.0, 0.0, 1e-6).unwrap()
    }

    #[test]
    fn basis_invariants() {
        let b = basis(10, 2);
        let w = b.frequencies();
        assert!(w.windows(2).all(|p| p[1] > p[0]));
        for k in 1..4 {
            assert!(b.contains(b.partner(k).unwrap()));
        }
        assert_eq!(b.partner(4), None);
        assert!((b.pump_frequency() - 2.0 * w[1]).abs() < 1e-6 * w[1]);
        assert!(matches!(
            ModeBasis::new(5, 2, 0.0, 1e-6),
            Err(Error::Truncation(_))
        ));
        assert_eq!(ModeBasis::default_count(1), 8);
        assert_eq!(ModeBasis::default_count(3), 24);
    }

    #[test]
    fn quadrature_form_round_trips() {
        let (c, d) = {
            let co = drive_coefficients(0.01, 0.7, &basis(8, 2), Sidebands::Full).unwrap();
            (co.conversion, co.pairing)
        };
        let m = quadrature_form(&c, &d);
        let (c2, d2) = bogoliubov_blocks(&m);
        assert!((c - c2).norm() < 1e-15);
        assert!((d - d2).norm() < 1e-15);
    }

    #[test]
    fn zero_drive_is_identity() {
        let s = drive_generator(0.0, 0.3, &basis(8, 1), Sidebands::Full).unwrap();
        assert_eq!(s, SymplecticMap::identity(8));
    }

    #[test]
    fn drive_is_symplectic() {
        for &side in &[Sidebands::Pairs, Sidebands::Full] {
            for &(m, beta) in &[(1, 0.01), (2, 0.05), (3, 0.2)] {
                let s = drive_generator(beta, 1.1, &basis(ModeBasis::default_count(m), m), side)
                    .unwrap();
                assert!(
                    s.defect() < SYMPLECTIC_TOL,
                    "{side:?} m={m}: {}",
                    s.defect()
                );
            }
        }
    }

    #[test]
    fn degenerate_mode_squeezes_at_nu0() {
        // One round trip squeezes the degenerate mode by ν₀·2τ = 2β.
        let beta = 0.01;
        let s = drive_generator(beta, 0.0, &basis(8, 1), Sidebands::Pairs).unwrap();
        let m = s.matrix();
        assert!((m[(0, 0)] - (2.0 * beta).exp()).abs() < 1e-14);
        assert!((m[(1, 1)] - (-2.0 * beta).exp()).abs() < 1e-14);
    }

    #[test]
    fn theta_shift_flips_first_order_sidebands() {
        let b = basis(10, 2);
        let beta = 1e-8;
        let s0 = drive_generator(beta, 0.4, &b, Sidebands::Full).unwrap();
        let s1 = drive_generator(beta, 0.4 + PI, &b, Sidebands::Full).unwrap();
        let id = DMatrix::<f64>::identity(20, 20);
        let (a0, b0) = bogoliubov_blocks(&((s0.matrix() - &id) / beta));
        let (a1, b1) = bogoliubov_blocks(&((s1.matrix() - &id) / beta));
        assert!((&b0 + &b1).norm() < 1e-6 * b0.norm());
        assert!((&a0 + &a1).norm() < 1e-6 * a0.norm());
    }

    #[test]
    fn missing_partner_is_a_truncation_error() {
        // A basis can only be built with room for every partner.
        assert!(matches!(
            ModeBasis::new(3, 2, 0.0, 1.0),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn lossless_zero_drive_round_trip_is_rotation() {
        let mut d = params(0.0, 1e4, 1);
        d.reflectivity = 1.0;
        let rt = round_trip_channel(&d, &basis(8, 1), Sidebands::Pairs).unwrap();
        let t = rt.channel().transfer();
        assert!((t - DMatrix::<f64>::identity(16, 16)).amax() < 1e-15);
        assert!(rt.channel().noise().amax() < 1e-15);
        let v = GaussianState::vacuum(8);
        assert!((rt.channel().apply(v.covariance()) - v.covariance()).amax() < 1e-15);

        let detuned = ModeBasis::new(8, 1, 0.01, 1e-6).unwrap();
        let rt = round_trip_channel(&d, &detuned, Sidebands::Pairs).unwrap();
        let t = rt.channel().transfer();
        assert!((t * t.transpose() - DMatrix::<f64>::identity(16, 16)).amax() < 1e-14);
        assert!((t[(0, 0)] - (2.0 * PI * 0.01).cos()).abs() < 1e-14);
    }

    #[test]
    fn lossy_vacuum_is_fixed_point() {
        let d = params(0.0, 100.0, 2);
        let rt = round_trip_channel(&d, &basis(10, 2), Sidebands::Full).unwrap();
        let v = GaussianState::vacuum(10);
        let next = step(&v, rt.channel()).unwrap();
        assert!((next.covariance() - v.covariance()).amax() < 1e-15);
        assert_eq!(rt.outflux(v.covariance()), 0.0);
    }

    #[test]
    fn one_step_pair_creation_rate() {
        // Vacuum through one round trip: r² Σ|D|² photons to leading order,
        // with |D| = 4 · (1 − ω_k/Ω) β √(ω_k/ω_j) from the mirror table.
        for &m in &[1u32, 2, 3] {
            let beta = 1e-4;
            let finesse = 50.0;
            let d = params(beta, finesse, m);
            let b = basis(ModeBasis::default_count(m), m);
            let rt = round_trip_channel(&d, &b, Sidebands::Pairs).unwrap();
            let v = rt
                .channel()
                .apply(GaussianState::vacuum(b.count()).covariance());
            let n = GaussianState::from_raw(v).total_photons();

            let omega = 2.0 * m as f64;
            let mut expected = 0.0;
            for k in 1..(2 * m as usize) {
                let j = 2 * m as usize - k;
                let c = (1.0 - k as f64 / omega) * beta * (k as f64 / j as f64).sqrt();
                expected += (ROUND_TRIP_GAIN * c).powi(2);
            }
            expected *= d.reflectivity.powi(2);
            assert!(n > 0.0);
            assert!(
                ((n - expected) / expected).abs() < 0.01,
                "m={m}: {n} vs {expected}"
            );
        }
    }

    #[test]
    fn photon_numbers_of_squeezed_mode() {
        let s: f64 = 0.8;
        let v = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            (2.0 * s).exp() / 2.0,
            (-2.0 * s).exp() / 2.0,
        ]));
        let st = GaussianState::from_covariance(v).unwrap();
        assert!((photon_numbers(&st)[0] - s.sinh().powi(2)).abs() < 1e-14);
        assert!((st.min_symplectic_eigenvalue() - 0.5).abs() < 1e-12);
        assert!(photon_numbers(&GaussianState::vacuum(4))
            .iter()
            .all(|&n| n == 0.0));
    }

    #[test]
    fn symplectic_eigenvalues_of_thermal_state() {
        let v = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.5, 1.5, 0.5, 0.5]));
        let st = GaussianState::from_covariance(v).unwrap();
        let nu = st.symplectic_eigenvalues();
        assert!((nu[0] - 0.5).abs() < 1e-12 && (nu[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn unphysical_covariance_is_rejected() {
        let v = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, 0.3]));
        assert!(matches!(
            GaussianState::from_covariance(v),
            Err(Error::NumericalInstability { .. })
        ));
    }

    #[test]
    fn outflux_of_vacuum_and_perfect_mirror() {
        let v = GaussianState::vacuum(3);
        assert_eq!(outflux_increment(&v, 0.9), 0.0);
        let sq = GaussianState::from_covariance(DMatrix::from_diagonal(
            &nalgebra::DVector::from_vec(vec![2.0, 0.125, 0.5, 0.5]),
        ))
        .unwrap();
        assert_eq!(outflux_increment(&sq, 1.0), 0.0);
        assert!(outflux_increment(&sq, 0.9) > 0.0);
    }

    #[test]
    fn identity_channel_keeps_state() {
        let v = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.125, 0.7, 0.5]));
        let st = GaussianState::from_covariance(v.clone()).unwrap();
        let out = step(&st, &GaussianChannel::identity(2)).unwrap();
        assert_eq!(out.covariance(), &v);
    }

    #[test]
    fn non_cp_channel_is_rejected() {
        // Amplification without added noise violates complete positivity.
        let t = DMatrix::<f64>::identity(2, 2) * 1.1;
        assert!(GaussianChannel::new(t, DMatrix::zeros(2, 2)).is_err());
        assert!(GaussianChannel::new(
            DMatrix::identity(2, 2) * 0.9f64.sqrt(),
            DMatrix::identity(2, 2) * 0.05
        )
        .is_ok());
    }
}
