//! Kraus-operator models of stochastic processes.
//!
//! The central objects are an unconstrained parametrization `ParamSet`
//! (arbitrary complex matrices B_x), its spectral data (leading eigenpair of
//! the associated transfer maps), and the recovered `KrausModel` whose
//! operators satisfy the completeness relation by construction:
//!
//! `A_x = W B_x W^{-1} / sqrt(lambda)` where `E(V) = lambda V` for the
//! adjoint transfer map `E(X) = sum_x B_x^dag X B_x` and `V = W^dag W`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{
    complete_orthonormal_basis, eigenvalues_by_modulus, eigenvector_for, fix_phase,
    hermitian_factor, hermitize, identity_deviation, max_abs, max_abs_diff, trace_product,
    CMatrix, CVector, C_ZERO,
};

/// Relative tolerance of the transfer-map power iteration.
pub const POWER_TOLERANCE: f64 = 1e-13;
/// Iteration cap of the transfer-map power iteration.
pub const POWER_CAP: usize = 100_000;
/// Completeness residual a recovered Kraus set must satisfy.
pub const RECOVERED_COMPLETENESS_TOL: f64 = 1e-10;
/// Two leading eigenvalues closer than this (relative) count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Eigenvalue floor used when factoring a rank-deficient eigenmatrix.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Which transfer map a spectral query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `X -> sum_x B_x X B_x^dag`
    Forward,
    /// `X -> sum_x B_x^dag X B_x`
    Adjoint,
}

/// An unconstrained model parametrization: one complex `dim x dim` matrix
/// per output symbol.
#[derive(Debug, Clone)]
pub struct ParamSet {
    dim: usize,
    alphabet_size: usize,
    matrices: Vec<CMatrix>,
}

impl ParamSet {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("parameter set needs at least one matrix".into()));
        }
        let dim = matrices[0].nrows();
        if dim == 0 {
            return Err(Error::InvalidInput("parameter matrices must be nonempty".into()));
        }
        for m in &matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidInput(
                    "all parameter matrices must be square with identical dimension".into(),
                ));
            }
        }
        if matrices.iter().all(|m| max_abs(m) == 0.0) {
            return Err(Error::InvalidInput("all parameter matrices are zero".into()));
        }
        Ok(ParamSet {
            dim,
            alphabet_size: matrices.len(),
            matrices,
        })
    }

    /// I.i.d. complex Gaussian entries with standard deviation `1/sqrt(dim)`,
    /// which keeps the transfer map's spectral radius at order one.
    pub fn random(dim: usize, alphabet_size: usize, rng: &mut impl Rng) -> Self {
        let component = Normal::new(0.0, 1.0 / (2.0 * dim as f64).sqrt()).unwrap();
        let matrices = (0..alphabet_size)
            .map(|_| {
                CMatrix::from_fn(dim, dim, |_, _| {
                    Complex64::new(component.sample(rng), component.sample(rng))
                })
            })
            .collect();
        ParamSet {
            dim,
            alphabet_size,
            matrices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        for &x in word {
            if x >= self.alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: x,
                    alphabet_size: self.alphabet_size,
                });
            }
        }
        Ok(())
    }
}

/// `out = a * b` for square matrices of equal dimension.
fn mul_into(a: &CMatrix, b: &CMatrix, out: &mut CMatrix) {
    let d = a.nrows();
    let (aa, bb) = (a.as_slice(), b.as_slice());
    let oo = out.as_mut_slice();
    // column-major: m[(i, j)] = slice[j * d + i]
    for j in 0..d {
        for i in 0..d {
            let mut acc = C_ZERO;
            for k in 0..d {
                acc += aa[k * d + i] * bb[j * d + k];
            }
            oo[j * d + i] = acc;
        }
    }
}

/// Apply one transfer-map step `out = sum_x op(x, input)` where each term is
/// `B input B^dag` (forward) or `B^dag input B` (adjoint).
fn apply_transfer(
    matrices: &[CMatrix],
    adjoints: &[CMatrix],
    side: Side,
    input: &CMatrix,
    tmp: &mut CMatrix,
    term: &mut CMatrix,
    out: &mut CMatrix,
) {
    out.fill(C_ZERO);
    for (b, badj) in matrices.iter().zip(adjoints.iter()) {
        let (left, right) = match side {
            Side::Forward => (b, badj),
            Side::Adjoint => (badj, b),
        };
        mul_into(left, input, tmp);
        mul_into(tmp, right, term);
        *out += &*term;
    }
}

/// Leading eigenpair of a completely positive transfer map by power
/// iteration with Hermitian projection. The returned eigenmatrix is
/// Hermitian PSD with unit trace.
fn power_leading(
    matrices: &[CMatrix],
    side: Side,
    init: Option<&CMatrix>,
) -> Result<(f64, CMatrix)> {
    let d = matrices[0].nrows();
    let adjoints: Vec<CMatrix> = matrices.iter().map(|m| m.adjoint()).collect();
    let mut x = match init {
        Some(m) => {
            let mut m = m.clone();
            hermitize(&mut m);
            let tr = m.trace().re;
            if tr > 0.0 && tr.is_finite() {
                m / Complex64::new(tr, 0.0)
            } else {
                CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0)
            }
        }
        None => CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0),
    };
    let mut tmp = CMatrix::zeros(d, d);
    let mut term = CMatrix::zeros(d, d);
    let mut y = CMatrix::zeros(d, d);
    for _ in 0..POWER_CAP {
        apply_transfer(matrices, &adjoints, side, &x, &mut tmp, &mut term, &mut y);
        hermitize(&mut y);
        let lambda = y.trace().re;
        if !lambda.is_finite() {
            return Err(Error::NonConvergence("transfer map iterate overflowed".into()));
        }
        if lambda <= 0.0 {
            return Err(Error::DegenerateSpectrum(
                "transfer map has numerically zero spectral radius".into(),
            ));
        }
        y /= Complex64::new(lambda, 0.0);
        let diff = max_abs_diff(&y, &x);
        std::mem::swap(&mut x, &mut y);
        if diff <= POWER_TOLERANCE * max_abs(&x).max(f64::MIN_POSITIVE) {
            return Ok((lambda, x));
        }
    }
    Err(Error::NonConvergence(format!(
        "transfer-map power iteration exceeded {POWER_CAP} iterations"
    )))
}

/// Leading eigenpair of the forward or adjoint transfer map of `params`.
pub fn leading_eigenpair(params: &ParamSet, side: Side) -> Result<(f64, CMatrix)> {
    power_leading(params.matrices(), side, None)
}

/// Dense matrix of the transfer map acting on column-stacked `vec(X)`.
///
/// Used as the exact cross-check of the power iteration at small dimension.
pub(crate) fn dense_transfer_matrix(matrices: &[CMatrix], side: Side) -> CMatrix {
    let d = matrices[0].nrows();
    let n = d * d;
    let mut out = CMatrix::zeros(n, n);
    for b in matrices {
        let (left, right) = match side {
            // vec(L X R) = (R^T kron L) vec(X)
            Side::Forward => (b.clone(), b.adjoint()),
            Side::Adjoint => (b.adjoint(), b.clone()),
        };
        let rt = right.transpose();
        for bi in 0..d {
            for bj in 0..d {
                for li in 0..d {
                    for lj in 0..d {
                        out[(bi * d + li, bj * d + lj)] += rt[(bi, bj)] * left[(li, lj)];
                    }
                }
            }
        }
    }
    out
}

/// Spectral data of a parametrization: the leading eigenvalue `lambda`, the
/// adjoint map's eigenmatrix `V = W^dag W`, and the forward map's
/// eigenmatrix `rho_tilde` scaled so `tr(rho_tilde V) = 1`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub lambda: f64,
    pub v: CMatrix,
    pub w: CMatrix,
    pub w_inv: CMatrix,
    pub rho_tilde: CMatrix,
}

impl SpectralData {
    pub fn compute(params: &ParamSet) -> Result<Self> {
        Self::compute_warm(params, None)
    }

    /// As `compute`, warm-starting the power iterations from a previous
    /// solution (nearby parameter points converge in a few steps).
    pub fn compute_warm(params: &ParamSet, warm: Option<&SpectralData>) -> Result<Self> {
        let (lambda_adj, v) = power_leading(
            params.matrices(),
            Side::Adjoint,
            warm.map(|s| &s.v),
        )?;
        let (lambda_fwd, rho_raw) = power_leading(
            params.matrices(),
            Side::Forward,
            warm.map(|s| &s.rho_tilde),
        )?;
        let scale = lambda_adj.max(lambda_fwd);
        if (lambda_adj - lambda_fwd).abs() > 1e-8 * scale {
            return Err(Error::DegenerateSpectrum(format!(
                "forward/adjoint leading eigenvalues disagree: {lambda_fwd} vs {lambda_adj}"
            )));
        }
        let pairing = trace_product(&rho_raw, &v).re;
        if pairing <= 1e-12 {
            return Err(Error::DegenerateSpectrum(
                "leading eigenmatrices have (near-)orthogonal supports".into(),
            ));
        }
        let rho_tilde = rho_raw / Complex64::new(pairing, 0.0);
        let (w, w_inv) = hermitian_factor(&v, EIGENVALUE_FLOOR)?;
        Ok(SpectralData {
            lambda: lambda_adj,
            v,
            w,
            w_inv,
            rho_tilde,
        })
    }
}

/// A pure memory state: unit vector with the global phase fixed so the
/// first entry of modulus above 1e-12 is real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(mut amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("state vector must have positive finite norm".into()));
        }
        amplitudes /= Complex64::new(norm, 0.0);
        fix_phase(&mut amplitudes);
        Ok(PureState { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }
}

/// A complete Kraus-operator model together with its stationary memory
/// state and the reference state used to encode pasts.
#[derive(Debug, Clone)]
pub struct KrausModel {
    dim: usize,
    alphabet_size: usize,
    kraus: Vec<CMatrix>,
    rho0: CMatrix,
    sigma0: CVector,
    anchor: usize,
}

impl KrausModel {
    /// Build a model directly from Kraus operators, validating the
    /// completeness relation at `completeness_tol`.
    ///
    /// A loose tolerance admits hand-typed operators rounded to a few
    /// decimals; recovered parametrizations pass at 1e-10.
    pub fn from_kraus(kraus: Vec<CMatrix>, anchor: usize, completeness_tol: f64) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput("model needs at least one Kraus operator".into()));
        }
        let dim = kraus[0].nrows();
        for m in &kraus {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidInput(
                    "all Kraus operators must be square with identical dimension".into(),
                ));
            }
        }
        if anchor >= kraus.len() {
            return Err(Error::InvalidInput(format!(
                "anchor symbol {anchor} out of range for alphabet of size {}",
                kraus.len()
            )));
        }
        let dev = completeness_residual(&kraus);
        if dev > completeness_tol {
            return Err(Error::CompletenessViolated(dev));
        }
        let (_, mut rho0) = power_leading(&kraus, Side::Forward, None)?;
        hermitize(&mut rho0);
        let sigma0 = anchor_state(&kraus, &rho0, anchor)?;
        Ok(KrausModel {
            dim,
            alphabet_size: kraus.len(),
            kraus,
            rho0,
            sigma0,
            anchor,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Stationary memory state: the trace-one fixed point of
    /// `rho -> sum_x A_x rho A_x^dag`.
    pub fn rho0(&self) -> &CMatrix {
        &self.rho0
    }

    /// Reference state for encoding: the leading eigenvector of the anchor
    /// Kraus operator.
    pub fn sigma0(&self) -> &CVector {
        &self.sigma0
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// Entry-wise completeness residual `max |sum A^dag A - I|`.
    pub fn completeness_error(&self) -> f64 {
        completeness_residual(&self.kraus)
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        for &x in word {
            if x >= self.alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: x,
                    alphabet_size: self.alphabet_size,
                });
            }
        }
        Ok(())
    }

    /// Encode an observed past into a pure memory state:
    /// `A_{x_{-1}} ... A_{x_{-k}} sigma0`, normalized.
    ///
    /// The oldest symbol's operator is applied first. Errors when the model
    /// assigns the past probability zero.
    pub fn encode_past(&self, past: &[usize]) -> Result<PureState> {
        self.check_word(past)?;
        let mut v = self.sigma0.clone();
        for &x in past {
            v = &self.kraus[x] * v;
            let norm = v.norm();
            if norm < 1e-150 {
                return Err(Error::ZeroProbabilityPast);
            }
            v /= Complex64::new(norm, 0.0);
        }
        PureState::new(v)
    }

    /// Next-symbol distribution from a pure memory state:
    /// `P(x) = || A_x psi ||^2`. Sums to one up to the completeness error.
    pub fn conditional_next(&self, state: &PureState) -> Vec<f64> {
        self.kraus
            .iter()
            .map(|a| (a * state.amplitudes()).norm_squared())
            .collect()
    }

    /// Probability the model emits `word` starting from `state`.
    pub fn word_probability_from(&self, state: &PureState, word: &[usize]) -> Result<f64> {
        self.check_word(word)?;
        let mut v = state.amplitudes().clone();
        let mut log_p = 0.0f64;
        for &x in word {
            v = &self.kraus[x] * v;
            let n2 = v.norm_squared();
            if n2 <= 0.0 {
                return Ok(0.0);
            }
            log_p += n2.ln();
            v /= Complex64::new(n2.sqrt(), 0.0);
        }
        Ok(log_p.exp())
    }

    /// Distribution over all length-`word_len` futures from `state`,
    /// indexed lexicographically.
    pub fn future_distribution(&self, state: &PureState, word_len: usize) -> Result<Vec<f64>> {
        let mut total: usize = 1;
        for _ in 0..word_len {
            total = total
                .checked_mul(self.alphabet_size)
                .filter(|&t| t <= crate::process::ENUMERATION_GUARD)
                .ok_or_else(|| {
                    Error::GuardExceeded(format!(
                        "alphabet {} ^ word length {} exceeds {}",
                        self.alphabet_size,
                        word_len,
                        crate::process::ENUMERATION_GUARD
                    ))
                })?;
        }
        let mut out = vec![0.0; total];
        self.fill_futures(state.amplitudes(), word_len, 0, &mut out);
        Ok(out)
    }

    fn fill_futures(&self, v: &CVector, remaining: usize, index: usize, out: &mut [f64]) {
        if remaining == 0 {
            out[index] = v.norm_squared();
            return;
        }
        for (x, a) in self.kraus.iter().enumerate() {
            let next = a * v;
            self.fill_futures(&next, remaining - 1, index * self.alphabet_size + x, out);
        }
    }

    /// Extend the Kraus operators to the unitary that a single simulation
    /// step applies to memory tensor output register (register prepared in
    /// state 0). Basis index `j * alphabet_size + x` pairs memory level `j`
    /// with register symbol `x`, so `U[(j, x), (k, 0)] = A_x[j, k]`.
    ///
    /// The free columns are completed by Gram-Schmidt over canonical basis
    /// vectors in index order, skipping candidates whose residual norm falls
    /// below 1e-9.
    pub fn complete_unitary(&self) -> Result<CMatrix> {
        let a = self.alphabet_size;
        let d = self.dim;
        let n = a * d;
        let mut fixed = Vec::with_capacity(d);
        for k in 0..d {
            let mut col = CVector::zeros(n);
            for x in 0..a {
                for j in 0..d {
                    col[j * a + x] = self.kraus[x][(j, k)];
                }
            }
            fixed.push(col);
        }
        let extra = complete_orthonormal_basis(&fixed, n, 1e-9)?;
        let mut u = CMatrix::zeros(n, n);
        for (k, col) in fixed.iter().enumerate() {
            u.set_column(k * a, col);
        }
        let mut extra_iter = extra.into_iter();
        for c in 0..n {
            if c % a != 0 {
                let col = extra_iter
                    .next()
                    .expect("basis completion yields exactly the free columns");
                u.set_column(c, &col);
            }
        }
        let dev = identity_deviation(&(u.adjoint() * &u));
        if dev > 1e-10 {
            return Err(Error::CompletenessViolated(dev));
        }
        Ok(u)
    }
}

fn completeness_residual(kraus: &[CMatrix]) -> f64 {
    let d = kraus[0].nrows();
    let mut acc = CMatrix::zeros(d, d);
    for a in kraus {
        acc += a.adjoint() * a;
    }
    identity_deviation(&acc)
}

/// Leading eigenvector of the anchor Kraus operator.
///
/// When the anchor's leading eigenvalue is zero or non-simple (within 1e-8),
/// falls back to repeatedly applying the anchor to the leading eigenvector
/// of `rho0`, erroring if the ray has not settled after 100 iterations.
fn anchor_state(kraus: &[CMatrix], rho0: &CMatrix, anchor: usize) -> Result<CVector> {
    let a = &kraus[anchor];
    let eigs = eigenvalues_by_modulus(a)?;
    let lead = eigs[0];
    let simple = eigs.len() == 1 || (eigs[0].norm() - eigs[1].norm()) > DEGENERACY_TOL;
    if lead.norm() > DEGENERACY_TOL && simple {
        return eigenvector_for(a, lead);
    }
    let se = SymmetricEigen::new(rho0.clone());
    let lead_idx = (0..se.eigenvalues.len())
        .max_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap())
        .expect("rho0 is nonempty");
    let mut v: CVector = se.eigenvectors.column(lead_idx).into_owned();
    let mut settled = false;
    for _ in 0..100 {
        let next = a * &v;
        let norm = next.norm();
        if norm < 1e-150 {
            return Err(Error::NonConvergence(
                "anchor operator annihilates the reference state".into(),
            ));
        }
        let next = next.unscale(norm);
        let ray_move = 1.0 - v.dotc(&next).norm();
        v = next;
        if ray_move < 1e-8 {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::NonConvergence(
            "anchor iteration did not converge to a fixed ray".into(),
        ));
    }
    fix_phase(&mut v);
    Ok(v)
}

/// Recover a complete Kraus model from an unconstrained parametrization,
/// with symbol 0 as the encoding anchor.
pub fn recover_kraus(params: &ParamSet) -> Result<(KrausModel, SpectralData)> {
    recover_kraus_with_anchor(params, 0)
}

/// As `recover_kraus` with an explicit anchor symbol.
pub fn recover_kraus_with_anchor(
    params: &ParamSet,
    anchor: usize,
) -> Result<(KrausModel, SpectralData)> {
    let spectral = SpectralData::compute(params)?;
    let sqrt_lambda = Complex64::new(spectral.lambda.sqrt(), 0.0);
    let kraus: Vec<CMatrix> = params
        .matrices()
        .iter()
        .map(|b| (&spectral.w * b * &spectral.w_inv) / sqrt_lambda)
        .collect();
    let dev = completeness_residual(&kraus);
    if dev > RECOVERED_COMPLETENESS_TOL {
        return Err(diagnose_recovery_failure(params, &spectral, dev));
    }
    if params.dim() <= 4 {
        // dense cross-check of the power iteration at desk-scale dimension
        let dense = dense_transfer_matrix(params.matrices(), Side::Adjoint);
        let eigs = eigenvalues_by_modulus(&dense)?;
        let lead = eigs[0].norm();
        if (lead - spectral.lambda).abs() > 1e-9 * lead.max(1.0) {
            return Err(Error::NonConvergence(format!(
                "power iteration eigenvalue {} disagrees with dense solve {}",
                spectral.lambda, lead
            )));
        }
    }
    let mut rho0 = &spectral.w * &spectral.rho_tilde * spectral.w.adjoint();
    hermitize(&mut rho0);
    let tr = rho0.trace().re;
    rho0 /= Complex64::new(tr, 0.0);
    let sigma0 = anchor_state(&kraus, &rho0, anchor)?;
    let model = KrausModel {
        dim: params.dim(),
        alphabet_size: params.alphabet_size(),
        kraus,
        rho0,
        sigma0,
        anchor,
    };
    Ok((model, spectral))
}

/// Classify why a recovery missed the completeness tolerance.
fn diagnose_recovery_failure(params: &ParamSet, spectral: &SpectralData, dev: f64) -> Error {
    if params.dim() <= 4 {
        let dense = dense_transfer_matrix(params.matrices(), Side::Adjoint);
        if let Ok(eigs) = eigenvalues_by_modulus(&dense) {
            if eigs.len() > 1 {
                let gap = (eigs[0].norm() - eigs[1].norm()) / eigs[0].norm().max(f64::MIN_POSITIVE);
                if gap <= DEGENERACY_TOL {
                    return Error::DegenerateSpectrum(format!(
                        "leading eigenvalue is non-simple (relative gap {gap:.3e})"
                    ));
                }
            }
        }
    }
    let se = SymmetricEigen::new(spectral.v.clone());
    let min_ev = se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_ev <= EIGENVALUE_FLOOR * 10.0 {
        return Error::SingularFixedPoint(format!(
            "eigenmatrix V is rank deficient (smallest eigenvalue {min_ev:.3e})"
        ));
    }
    Error::CompletenessViolated(dev)
}

/// Base-2 log-probability of `data` under the parametrization, computed by
/// the left-to-right transfer contraction with per-step renormalization.
/// Returns negative infinity when the model assigns probability zero.
pub fn log2_likelihood(params: &ParamSet, data: &[usize]) -> Result<f64> {
    params.check_word(data)?;
    let spectral = SpectralData::compute(params)?;
    Ok(log2_likelihood_given(params, &spectral, data))
}

/// As `log2_likelihood` with precomputed spectral data.
pub fn log2_likelihood_given(params: &ParamSet, spectral: &SpectralData, data: &[usize]) -> f64 {
    let d = params.dim();
    let adjoints: Vec<CMatrix> = params.matrices().iter().map(|m| m.adjoint()).collect();
    let mut rho = spectral.rho_tilde.clone();
    let mut t1 = CMatrix::zeros(d, d);
    let mut t2 = CMatrix::zeros(d, d);
    let mut log2p = 0.0f64;
    for (step, &x) in data.iter().enumerate() {
        mul_into(&params.matrices()[x], &rho, &mut t1);
        mul_into(&t1, &adjoints[x], &mut t2);
        let c = trace_product(&t2, &spectral.v).re / spectral.lambda;
        if !(c > 0.0) || !c.is_finite() {
            return f64::NEG_INFINITY;
        }
        std::mem::swap(&mut rho, &mut t2);
        rho /= Complex64::new(c * spectral.lambda, 0.0);
        if step % 64 == 63 {
            hermitize(&mut rho);
        }
        log2p += c.log2();
    }
    log2p
}

/// Probability that the model parametrized by `params` emits `word`,
/// averaged over the stationary past.
pub fn sequence_likelihood(params: &ParamSet, word: &[usize]) -> Result<f64> {
    let log2p = log2_likelihood(params, word)?;
    Ok(log2p.exp2().clamp(0.0, 1.0))
}

/// Bloch-sphere coordinates of a qubit state: for amplitudes `(a, b)`,
/// `(x, y, z) = (2 Re(a* b), 2 Im(a* b), |a|^2 - |b|^2)`.
pub fn bloch_coordinates(state: &PureState) -> Result<(f64, f64, f64)> {
    if state.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "Bloch coordinates require a 2-dimensional state, got {}",
            state.dim()
        )));
    }
    let a = state.amplitudes()[0];
    let b = state.amplitudes()[1];
    let cross = a.conj() * b;
    Ok((2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()))
}
