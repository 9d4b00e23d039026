//! Exact state algebra on the four-dimensional spin ⊗ path space of one neutron.
//!
//! Basis order is `|↑,I⟩, |↑,II⟩, |↓,I⟩, |↓,II⟩`, i.e. index `2·spin + path`
//! with spin `0 = ↑, 1 = ↓` and path `0 = I, 1 = II`.
//!
//! Spin analysis projects onto `(|↑⟩ ± e^{iα}|↓⟩)/√2`. The phase shifter
//! imprints `e^{iχ}` on path II, so path analysis projects onto
//! `(|I⟩ ± e^{-iχ}|II⟩)/√2`. With this pair of conventions the entangled
//! state `(|↓,I⟩ + |↑,II⟩)/√2` has joint expectation `cos(α + χ)`.

use core::f64::consts::FRAC_1_SQRT_2;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{domain, precondition, Result};
use crate::setting::{check_finite, Setting};

pub const DIM: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Normalization slack accepted by the probability routines.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Outcome label of a two-valued analyser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl TryFrom<i32> for Sign {
    type Error = crate::Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(domain!("sign must be +1 or -1, got {v}")),
        }
    }
}

/// A 4×4 complex matrix acting on spin ⊗ path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator4 {
    entries: [[Complex64; DIM]; DIM],
}

impl Operator4 {
    pub fn new(entries: [[Complex64; DIM]; DIM]) -> Self {
        Self { entries }
    }

    pub fn zero() -> Self {
        Self::new([[ZERO; DIM]; DIM])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            m.entries[i][i] = ONE;
        }
        m
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[Complex64; DIM], w: &[Complex64; DIM]) -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                m.entries[i][j] = v[i] * w[j].conj();
            }
        }
        m
    }

    /// `a ⊗ b` for 2×2 factors (spin first, path second).
    pub fn kron(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> Self {
        let mut m = Self::zero();
        for (s1, row) in a.iter().enumerate() {
            for (s2, &x) in row.iter().enumerate() {
                for p1 in 0..2 {
                    for p2 in 0..2 {
                        m.entries[2 * s1 + p1][2 * s2 + p2] = x * b[p1][p2];
                    }
                }
            }
        }
        m
    }

    pub fn entries(&self) -> &[[Complex64; DIM]; DIM] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                m.entries[i][j] = self.entries[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut m = *self;
        m.entries.iter_mut().flatten().for_each(|x| *x *= k);
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..DIM).map(|i| self.entries[i][i]).sum()
    }

    pub fn apply(&self, v: &[Complex64; DIM]) -> [Complex64; DIM] {
        let mut out = [ZERO; DIM];
        for (o, row) in out.iter_mut().zip(self.entries.iter()) {
            *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator4) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn commutator(&self, other: &Operator4) -> Operator4 {
        *self * *other - *other * *self
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        self.max_abs_diff(&(*self * *self)) <= tol
    }
}

impl Add for Operator4 {
    type Output = Operator4;

    fn add(mut self, rhs: Operator4) -> Operator4 {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for Operator4 {
    type Output = Operator4;

    fn sub(mut self, rhs: Operator4) -> Operator4 {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl Mul for Operator4 {
    type Output = Operator4;

    fn mul(self, rhs: Operator4) -> Operator4 {
        let mut m = Operator4::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                m.entries[i][j] = (0..DIM).map(|k| self.entries[i][k] * rhs.entries[k][j]).sum();
            }
        }
        m
    }
}

/// Pure state of the spin ⊗ path system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    amplitudes: [Complex64; DIM],
}

impl JointState {
    /// Wraps raw amplitudes. Normalization is checked by the operations that need it.
    pub fn new(amplitudes: [Complex64; DIM]) -> Self {
        Self { amplitudes }
    }

    /// Tensor product `spin ⊗ path` of two single-qubit states.
    pub fn product(spin: [Complex64; 2], path: [Complex64; 2]) -> Self {
        Self::new([
            spin[0] * path[0],
            spin[0] * path[1],
            spin[1] * path[0],
            spin[1] * path[1],
        ])
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Rescales to unit norm; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = libm::sqrt(self.norm_sqr());
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let mut out = *self;
        out.amplitudes.iter_mut().for_each(|a| *a /= n);
        Some(out)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_operator(Operator4::outer(&self.amplitudes, &self.amplitudes))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation_of(&self, op: &Operator4) -> Complex64 {
        let v = op.apply(&self.amplitudes);
        self.amplitudes.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    fn require_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE || !n.is_finite() {
            return Err(precondition!("state is not normalized (norm² = {n})"));
        }
        Ok(())
    }
}

/// `(|↓⟩⊗|I⟩ + |↑⟩⊗|II⟩)/√2`.
pub fn bell_state() -> JointState {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    JointState::new([ZERO, h, h, ZERO])
}

fn analyser_vector(phase: f64, sign: Sign) -> [Complex64; 2] {
    let s = sign.value() * FRAC_1_SQRT_2;
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::cis(phase) * s]
}

fn projector2(v: [Complex64; 2]) -> [[Complex64; 2]; 2] {
    [
        [v[0] * v[0].conj(), v[0] * v[1].conj()],
        [v[1] * v[0].conj(), v[1] * v[1].conj()],
    ]
}

const ID2: [[Complex64; 2]; 2] = [[ONE, ZERO], [ZERO, ONE]];

/// Spin projector onto `(|↑⟩ ± e^{iα}|↓⟩)/√2`, tensored with the path identity.
pub fn spin_projector(alpha: f64, sign: Sign) -> Result<Operator4> {
    check_finite("alpha", alpha)?;
    Ok(Operator4::kron(&projector2(analyser_vector(alpha, sign)), &ID2))
}

/// Path projector onto `(|I⟩ ± e^{-iχ}|II⟩)/√2`, tensored with the spin identity.
pub fn path_projector(chi: f64, sign: Sign) -> Result<Operator4> {
    check_finite("chi", chi)?;
    Ok(Operator4::kron(&ID2, &projector2(analyser_vector(-chi, sign))))
}

/// Two-valued spin observable `P(α;+1) − P(α;−1)`.
pub fn spin_observable(alpha: f64) -> Result<Operator4> {
    Ok(spin_projector(alpha, Sign::Plus)? - spin_projector(alpha, Sign::Minus)?)
}

/// Two-valued path observable `P(χ;+1) − P(χ;−1)`.
pub fn path_observable(chi: f64) -> Result<Operator4> {
    Ok(path_projector(chi, Sign::Plus)? - path_projector(chi, Sign::Minus)?)
}

/// Probability of the joint outcome `(spin_sign, path_sign)` at `setting`.
pub fn joint_probability(state: &JointState, setting: Setting, spin_sign: Sign, path_sign: Sign) -> Result<f64> {
    state.require_normalized()?;
    let op = spin_projector(setting.alpha(), spin_sign)? * path_projector(setting.chi(), path_sign)?;
    Ok(state.expectation_of(&op).re)
}

/// Joint expectation `Σ s·p·P(s, p)` of the spin and path observables.
pub fn expectation(state: &JointState, setting: Setting) -> Result<f64> {
    let mut e = 0.0;
    for s in Sign::BOTH {
        for p in Sign::BOTH {
            e += s.value() * p.value() * joint_probability(state, setting, s, p)?;
        }
    }
    Ok(e)
}

/// `⟨P^s(α) ⊗ 𝟙⟩`.
pub fn spin_marginal(state: &JointState, alpha: f64) -> Result<f64> {
    state.require_normalized()?;
    Ok(state.expectation_of(&spin_observable(alpha)?).re)
}

/// `⟨𝟙 ⊗ P^p(χ)⟩`.
pub fn path_marginal(state: &JointState, chi: f64) -> Result<f64> {
    state.require_normalized()?;
    Ok(state.expectation_of(&path_observable(chi)?).re)
}

/// Mixed state of spin ⊗ path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator {
    matrix: Operator4,
}

pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-12;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

impl DensityOperator {
    /// Wraps a matrix without checking; see [`DensityOperator::validate`].
    pub fn from_operator(matrix: Operator4) -> Self {
        Self { matrix }
    }

    /// Wraps a matrix after checking hermiticity, unit trace and positivity.
    pub fn new(matrix: Operator4) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub fn maximally_mixed() -> Self {
        Self::from_operator(Operator4::identity().scale(Complex64::new(0.25, 0.0)))
    }

    pub fn matrix(&self) -> &Operator4 {
        &self.matrix
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.matrix.max_abs_diff(&self.matrix.adjoint());
        if !(herm <= HERMITIAN_TOLERANCE) {
            return Err(precondition!("density operator is not Hermitian (deviation {herm:e})"));
        }
        let tr = self.matrix.trace();
        if !((tr.re - 1.0).abs() <= TRACE_TOLERANCE && tr.im.abs() <= TRACE_TOLERANCE) {
            return Err(precondition!("density operator trace is {tr}, expected 1"));
        }
        if !self.is_positive_above(EIGENVALUE_FLOOR) {
            return Err(precondition!(
                "density operator has an eigenvalue below {EIGENVALUE_FLOOR:e}"
            ));
        }
        Ok(())
    }

    /// True when every eigenvalue exceeds `floor`: Cholesky of `ρ − floor·𝟙` succeeds.
    fn is_positive_above(&self, floor: f64) -> bool {
        let mut a = *self.matrix.entries();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= floor;
        }
        let mut l = [[ZERO; DIM]; DIM];
        for j in 0..DIM {
            let mut d = a[j][j].re;
            for k in 0..j {
                d -= l[j][k].norm_sqr();
            }
            if !(d > 0.0) {
                return false;
            }
            let djj = libm::sqrt(d);
            l[j][j] = Complex64::new(djj, 0.0);
            for i in (j + 1)..DIM {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k].conj();
                }
                l[i][j] = s / djj;
            }
        }
        true
    }

    /// Scales every element coupling path I to path II by `visibility`.
    pub fn dephase_path(&self, visibility: f64) -> Result<Self> {
        check_visibility(visibility)?;
        Ok(self.scale_coherences(visibility, |i, j| (i & 1) != (j & 1)))
    }

    /// Scales every element coupling spin ↑ to spin ↓ by `visibility`.
    pub fn dephase_spin(&self, visibility: f64) -> Result<Self> {
        check_visibility(visibility)?;
        Ok(self.scale_coherences(visibility, |i, j| (i >> 1) != (j >> 1)))
    }

    fn scale_coherences(&self, v: f64, couples: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = *self.matrix.entries();
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if couples(i, j) {
                    *x *= v;
                }
            }
        }
        Self::from_operator(Operator4::new(m))
    }

    /// Partial trace over the path.
    pub fn reduced_spin(&self) -> [[Complex64; 2]; 2] {
        let m = self.matrix.entries();
        let mut r = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                r[a][b] = m[2 * a][2 * b] + m[2 * a + 1][2 * b + 1];
            }
        }
        r
    }

    /// Partial trace over the spin.
    pub fn reduced_path(&self) -> [[Complex64; 2]; 2] {
        let m = self.matrix.entries();
        let mut r = [[ZERO; 2]; 2];
        for p in 0..2 {
            for q in 0..2 {
                r[p][q] = m[p][q] + m[2 + p][2 + q];
            }
        }
        r
    }
}

fn check_visibility(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(domain!("visibility must lie in [0, 1], got {v}"))
    }
}

/// Pure state with its path coherences reduced by `visibility`.
pub fn dephase_path(state: &JointState, visibility: f64) -> Result<DensityOperator> {
    state.require_normalized()?;
    state.density().dephase_path(visibility)
}

/// `Tr[ρ · P^s(α) ⊗ P^p(χ)]`.
pub fn expectation_mixed(rho: &DensityOperator, setting: Setting) -> Result<f64> {
    rho.validate()?;
    let obs = spin_observable(setting.alpha())? * path_observable(setting.chi())?;
    Ok((*rho.matrix() * obs).trace().re)
}
