//! Sparse multi-photon Fock states over polarization-resolved beams.
//!
//! A [`FockState`] is a sparse map from occupation vectors (one photon count
//! per registered mode) to complex amplitudes. Modes are `(beam, polarization)`
//! pairs held in a [`ModeRegistry`] whose declaration order fixes the layout of
//! every occupation vector, so states built on the same registry compare and
//! print deterministically.
//!
//! Linear-optical elements act on creation operators: a [`ModeUnitary`] `u`
//! applied to modes `m_0..m_k` rewrites `a†_{m_j}` as `Σ_i u[(i, j)] a†_{m_i}`.
//! Multi-photon amplitudes follow from expanding the product of rewritten
//! creation operators with bosonic `√n!` normalization.
//!
//! States are values: every operation returns a new state. Norms are not
//! renormalized implicitly except where a measurement explicitly returns a
//! post-measurement state, so a state's squared norm can carry the weight of
//! the branch that produced it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-14;

/// Largest tolerated deviation of `U†U` from the identity.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

/// Opaque beam identifier such as `1''`, `3` or `I1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Beam(String);

impl Beam {
    pub fn new(name: impl Into<String>) -> Self {
        Beam(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Beam {
    fn from(s: &str) -> Self {
        Beam(s.to_owned())
    }
}

impl fmt::Display for Beam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub beam: Beam,
    pub pol: Polarization,
}

impl ModeLabel {
    pub fn new(beam: impl Into<Beam>, pol: Polarization) -> Self {
        ModeLabel {
            beam: beam.into(),
            pol,
        }
    }

    pub fn h(beam: &str) -> Self {
        ModeLabel::new(beam, Polarization::H)
    }

    pub fn v(beam: &str) -> Self {
        ModeLabel::new(beam, Polarization::V)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.beam, self.pol)
    }
}

/// Ordered set of modes. Each registered beam contributes an `H` and a `V`
/// mode, in declaration order.
#[derive(Debug, PartialEq, Eq)]
pub struct ModeRegistry {
    modes: Vec<ModeLabel>,
    index: HashMap<ModeLabel, usize>,
}

impl ModeRegistry {
    pub fn from_beams<I, S>(beams: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut modes = Vec::new();
        let mut index = HashMap::new();
        for beam in beams {
            for pol in [Polarization::H, Polarization::V] {
                let label = ModeLabel::new(beam.as_ref(), pol);
                if index.insert(label.clone(), modes.len()).is_some() {
                    return Err(Error::DuplicateMode(label));
                }
                modes.push(label);
            }
        }
        Ok(Arc::new(ModeRegistry { modes, index }))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn index_of(&self, mode: &ModeLabel) -> Result<usize> {
        self.index
            .get(mode)
            .copied()
            .ok_or_else(|| Error::UnknownMode(mode.clone()))
    }

    /// Indices of the `(H, V)` modes of a beam.
    pub fn beam_modes(&self, beam: &Beam) -> Result<[usize; 2]> {
        let h = self.index.get(&ModeLabel::new(beam.clone(), Polarization::H));
        let v = self.index.get(&ModeLabel::new(beam.clone(), Polarization::V));
        match (h, v) {
            (Some(&h), Some(&v)) => Ok([h, v]),
            _ => Err(Error::UnknownBeam(beam.to_string())),
        }
    }

    pub fn contains_beam(&self, beam: &Beam) -> bool {
        self.beam_modes(beam).is_ok()
    }
}

/// Photon counts, one per registered mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Box<[u8]>);

impl Occupation {
    pub fn vacuum(modes: usize) -> Self {
        Occupation(vec![0; modes].into_boxed_slice())
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        Occupation(counts.into_boxed_slice())
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    pub fn beam_count(&self, [h, v]: [usize; 2]) -> u32 {
        u32::from(self.0[h]) + u32::from(self.0[v])
    }
}

/// Complex square matrix acting on the creation operators of a list of modes.
/// Column `j` is the image of `a†_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<Complex64>,
}

impl ModeUnitary {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::ShapeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                modes: matrix.ncols(),
            });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(ModeUnitary { matrix })
    }

    /// Row-major 2x2 matrix on `(H, V)`.
    pub fn two_by_two(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(
            2,
            2,
            &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]],
        ))
    }

    pub fn identity(n: usize) -> Self {
        ModeUnitary {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Half-wave plate of angle `delta`: the real rotation
    /// `[[cos, -sin], [sin, cos]]` on `(H, V)`.
    pub fn half_wave_plate(delta: f64) -> Self {
        let (s, c) = delta.sin_cos();
        let re = |x: f64| Complex64::new(x, 0.0);
        ModeUnitary {
            matrix: DMatrix::from_row_slice(2, 2, &[re(c), re(-s), re(s), re(c)]),
        }
    }

    /// `H <-> V` exchange.
    pub fn bit_flip() -> Self {
        let (z, o) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        ModeUnitary {
            matrix: DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        ModeUnitary {
            matrix: self.matrix.adjoint(),
        }
    }

    /// The unitary equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &ModeUnitary) -> Self {
        ModeUnitary {
            matrix: &next.matrix * &self.matrix,
        }
    }

    pub fn deviation_from_unitary(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// An orthonormal pair of single-photon polarization states, given as
/// `(H, V)` components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisPair {
    pub first: [Complex64; 2],
    pub second: [Complex64; 2],
}

impl BasisPair {
    pub fn new(first: [Complex64; 2], second: [Complex64; 2]) -> Result<Self> {
        let dot = |a: &[Complex64; 2], b: &[Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
        let deviation = [
            (dot(&first, &first) - 1.0).norm(),
            (dot(&second, &second) - 1.0).norm(),
            dot(&first, &second).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
        Ok(BasisPair { first, second })
    }

    /// `{|+>, |->}`.
    pub fn diagonal() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        BasisPair {
            first: [Complex64::new(r, 0.0), Complex64::new(r, 0.0)],
            second: [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisOutcome {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub outcome: BasisOutcome,
    pub state: FockState,
    pub probability: f64,
}

#[derive(Clone, Debug)]
pub struct FockState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<Occupation, Complex64>,
    norm_sqr: f64,
    prune: f64,
}

impl FockState {
    pub fn vacuum(registry: &Arc<ModeRegistry>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Occupation::vacuum(registry.len()), Complex64::new(1.0, 0.0));
        FockState {
            registry: Arc::clone(registry),
            terms,
            norm_sqr: 1.0,
            prune: DEFAULT_PRUNE,
        }
    }

    pub fn empty(registry: &Arc<ModeRegistry>) -> Self {
        FockState {
            registry: Arc::clone(registry),
            terms: BTreeMap::new(),
            norm_sqr: 0.0,
            prune: DEFAULT_PRUNE,
        }
    }

    /// Sums amplitudes of repeated occupations and prunes small ones.
    pub fn from_terms<I>(registry: &Arc<ModeRegistry>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut acc = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.counts().len() != registry.len() {
                return Err(Error::RegistryMismatch);
            }
            *acc.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::with_terms(Arc::clone(registry), acc, DEFAULT_PRUNE))
    }

    fn with_terms(
        registry: Arc<ModeRegistry>,
        mut terms: BTreeMap<Occupation, Complex64>,
        prune: f64,
    ) -> Self {
        terms.retain(|_, a| a.norm() >= prune);
        let norm_sqr = terms.values().map(|a| a.norm_sqr()).sum();
        FockState {
            registry,
            terms,
            norm_sqr,
            prune,
        }
    }

    fn derive(&self, terms: BTreeMap<Occupation, Complex64>) -> Self {
        Self::with_terms(Arc::clone(&self.registry), terms, self.prune)
    }

    pub fn with_prune_threshold(&self, prune: f64) -> Self {
        Self::with_terms(Arc::clone(&self.registry), self.terms.clone(), prune)
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    /// Builds an occupation vector from `(mode, count)` pairs.
    pub fn occupation(&self, counts: &[(ModeLabel, u8)]) -> Result<Occupation> {
        let mut v = vec![0u8; self.registry.len()];
        for (mode, n) in counts {
            v[self.registry.index_of(mode)?] += n;
        }
        Ok(Occupation::from_counts(v))
    }

    pub fn normalize(&self) -> Result<Self> {
        if self.norm_sqr <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / self.norm_sqr.sqrt(), 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.derive(self.terms.iter().map(|(o, a)| (o.clone(), a * c)).collect())
    }

    /// `self + other`, both on the same registry.
    pub fn add(&self, other: &FockState) -> Result<Self> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        let mut terms = self.terms.clone();
        for (o, a) in &other.terms {
            *terms.entry(o.clone()).or_default() += a;
        }
        Ok(self.derive(terms))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.terms
            .iter()
            .filter_map(|(o, a)| other.terms.get(o).map(|b| a.conj() * b))
            .sum()
    }

    /// Largest amplitude-wise difference between two states.
    pub fn max_amplitude_diff(&self, other: &FockState) -> f64 {
        let mut worst: f64 = 0.0;
        for (o, a) in &self.terms {
            worst = worst.max((a - other.amplitude(o)).norm());
        }
        for (o, b) in &other.terms {
            if !self.terms.contains_key(o) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }

    /// Applies a creation operator `a†` to every term.
    pub fn create(&self, mode: &ModeLabel) -> Result<Self> {
        let idx = self.registry.index_of(mode)?;
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| {
                let mut counts = o.counts().to_vec();
                let n = counts[idx];
                counts[idx] = n + 1;
                (
                    Occupation::from_counts(counts),
                    a * f64::from(n + 1).sqrt(),
                )
            })
            .collect();
        Ok(self.derive(terms))
    }

    /// Applies `Σ_k c_k Π_{m in ops_k} a†_m` to the state.
    pub fn apply_creation_polynomial(
        &self,
        polynomial: &[(Complex64, Vec<ModeLabel>)],
    ) -> Result<Self> {
        let mut out = FockState::empty(&self.registry);
        for (coeff, ops) in polynomial {
            let mut branch = self.scale(*coeff);
            for mode in ops {
                branch = branch.create(mode)?;
            }
            out = out.add(&branch)?;
        }
        Ok(out)
    }

    /// Distribution of the total photon number, weighted by squared amplitude.
    pub fn photon_number_distribution(&self) -> BTreeMap<u32, f64> {
        let mut dist = BTreeMap::new();
        for (o, a) in &self.terms {
            *dist.entry(o.total()).or_insert(0.0) += a.norm_sqr();
        }
        dist
    }

    /// Distribution of the photon number in one beam.
    pub fn beam_count_distribution(&self, beam: &Beam) -> Result<BTreeMap<u32, f64>> {
        let modes = self.registry.beam_modes(beam)?;
        let mut dist = BTreeMap::new();
        for (o, a) in &self.terms {
            *dist.entry(o.beam_count(modes)).or_insert(0.0) += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Rewrites `a†_{modes[j]}` as `Σ_i u[(i, j)] a†_{modes[i]}` and expands.
    pub fn apply_mode_unitary(&self, u: &ModeUnitary, modes: &[ModeLabel]) -> Result<Self> {
        if u.dim() != modes.len() {
            return Err(Error::ShapeMismatch {
                rows: u.dim(),
                cols: u.dim(),
                modes: modes.len(),
            });
        }
        let deviation = u.deviation_from_unitary();
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        let mut idx = Vec::with_capacity(modes.len());
        for m in modes {
            let i = self.registry.index_of(m)?;
            if idx.contains(&i) {
                return Err(Error::DuplicateMode(m.clone()));
            }
            idx.push(i);
        }

        let mut cache: HashMap<Vec<u8>, Vec<(Vec<u8>, Complex64)>> = HashMap::new();
        let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let local: Vec<u8> = idx.iter().map(|&i| occ.get(i)).collect();
            let expansion = cache
                .entry(local.clone())
                .or_insert_with(|| expand_local(u.matrix(), &local));
            for (image, coeff) in expansion.iter() {
                let mut counts = occ.counts().to_vec();
                for (k, &i) in idx.iter().enumerate() {
                    counts[i] = image[k];
                }
                *out.entry(Occupation::from_counts(counts)).or_default() += amp * coeff;
            }
        }
        Ok(self.derive(out))
    }

    /// Polarizing beam splitter: `H` is transmitted (`in1 -> out1`,
    /// `in2 -> out2`), `V` is reflected (`in1 -> out2`, `in2 -> out1`).
    pub fn apply_pbs(&self, in1: &Beam, in2: &Beam, out1: &Beam, out2: &Beam) -> Result<Self> {
        self.apply_pbs_with_reflection_phase(in1, in2, out1, out2, 0.0)
    }

    /// As [`apply_pbs`](Self::apply_pbs), with each reflected photon picking
    /// up `e^{i phase}`.
    pub fn apply_pbs_with_reflection_phase(
        &self,
        in1: &Beam,
        in2: &Beam,
        out1: &Beam,
        out2: &Beam,
        phase: f64,
    ) -> Result<Self> {
        let [i1h, i1v] = self.registry.beam_modes(in1)?;
        let [i2h, i2v] = self.registry.beam_modes(in2)?;
        let [o1h, o1v] = self.registry.beam_modes(out1)?;
        let [o2h, o2v] = self.registry.beam_modes(out2)?;
        if in1 == in2 || out1 == out2 {
            return Err(Error::Circuit(format!(
                "PBS needs distinct ports, got {in1},{in2} -> {out1},{out2}"
            )));
        }
        let inputs = [i1h, i1v, i2h, i2v];
        let reflect = Complex64::from_polar(1.0, phase);

        let mut out = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let mut counts = occ.counts().to_vec();
            let [n1h, n1v, n2h, n2v] = inputs.map(|i| counts[i]);
            for i in inputs {
                counts[i] = 0;
            }
            for (mode, n) in [(o1h, n1h), (o2h, n2h), (o2v, n1v), (o1v, n2v)] {
                if counts[mode] != 0 {
                    return Err(Error::OccupiedOutput(self.registry.modes()[mode].clone()));
                }
                counts[mode] = n;
            }
            let phase_factor = reflect.powu(u32::from(n1v) + u32::from(n2v));
            *out.entry(Occupation::from_counts(counts)).or_default() += amp * phase_factor;
        }
        Ok(self.derive(out))
    }

    /// Multiplies every term by `e^{i θ n_V}` for the beam's `V` count.
    pub fn apply_phase_shift_v(&self, beam: &Beam, theta: f64) -> Result<Self> {
        let [_, v] = self.registry.beam_modes(beam)?;
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| {
                let n = f64::from(o.get(v));
                (o.clone(), a * Complex64::from_polar(1.0, theta * n))
            })
            .collect();
        Ok(self.derive(terms))
    }

    /// Keeps the terms with exactly `n` photons in the beam. Returns the
    /// renormalized post-measurement state and the branch probability
    /// relative to this state's norm. A zero-probability branch yields an
    /// empty state.
    pub fn project_photon_count(&self, beam: &Beam, n: u32) -> Result<(Self, f64)> {
        let modes = self.registry.beam_modes(beam)?;
        self.project_by(|o| o.beam_count(modes) == n)
    }

    /// As [`project_photon_count`](Self::project_photon_count) for a single mode.
    pub fn project_mode_count(&self, mode: &ModeLabel, n: u8) -> Result<(Self, f64)> {
        let i = self.registry.index_of(mode)?;
        self.project_by(|o| o.get(i) == n)
    }

    fn project_by(&self, keep: impl Fn(&Occupation) -> bool) -> Result<(Self, f64)> {
        let kept: BTreeMap<_, _> = self
            .terms
            .iter()
            .filter(|(o, _)| keep(o))
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        let kept = self.derive(kept);
        if kept.norm_sqr <= 0.0 || self.norm_sqr <= 0.0 {
            return Ok((FockState::empty(&self.registry), 0.0));
        }
        let probability = kept.norm_sqr / self.norm_sqr;
        Ok((kept.normalize()?, probability))
    }

    /// Projects the single-photon sector of a beam onto the two basis
    /// states. Each branch leaves the photon in its basis state. The two
    /// probabilities sum to the beam's single-photon weight.
    pub fn measure_basis(&self, beam: &Beam, basis: &BasisPair) -> Result<Vec<MeasurementBranch>> {
        let [h, v] = self.registry.beam_modes(beam)?;
        let mut branches = Vec::with_capacity(2);
        for (outcome, vector) in [
            (BasisOutcome::First, basis.first),
            (BasisOutcome::Second, basis.second),
        ] {
            // amplitude of the rest-of-system state conditioned on the outcome
            let mut rest: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
            for (o, a) in &self.terms {
                if o.beam_count([h, v]) != 1 {
                    continue;
                }
                let component = if o.get(h) == 1 { vector[0] } else { vector[1] };
                let mut counts = o.counts().to_vec();
                counts[h] = 0;
                counts[v] = 0;
                *rest.entry(counts).or_default() += component.conj() * a;
            }
            let mut terms = BTreeMap::new();
            for (counts, amp) in rest {
                for (mode, c) in [(h, vector[0]), (v, vector[1])] {
                    let mut with_photon = counts.clone();
                    with_photon[mode] = 1;
                    terms.insert(Occupation::from_counts(with_photon), amp * c);
                }
            }
            let projected = self.derive(terms);
            let probability = if self.norm_sqr > 0.0 {
                projected.norm_sqr / self.norm_sqr
            } else {
                0.0
            };
            let state = if projected.norm_sqr > 0.0 {
                projected.normalize()?
            } else {
                FockState::empty(&self.registry)
            };
            branches.push(MeasurementBranch {
                outcome,
                state,
                probability,
            });
        }
        Ok(branches)
    }
}

/// Expands `Π_j (Σ_i u[(i,j)] a†_i)^{n_j} / √(Π n_j!)` into normalized Fock
/// amplitudes over the local modes.
fn expand_local(u: &DMatrix<Complex64>, counts: &[u8]) -> Vec<(Vec<u8>, Complex64)> {
    let k = counts.len();
    let norm: f64 = counts.iter().map(|&n| factorial(n)).product();
    let mut poly: HashMap<Vec<u8>, Complex64> = HashMap::new();
    poly.insert(vec![0; k], Complex64::new(1.0 / norm.sqrt(), 0.0));
    for (j, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let mut next: HashMap<Vec<u8>, Complex64> = HashMap::with_capacity(poly.len() * k);
            for (mono, c) in &poly {
                for i in 0..k {
                    let uij = u[(i, j)];
                    if uij == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[i] += 1;
                    *next.entry(m).or_default() += c * uij;
                }
            }
            poly = next;
        }
    }
    let mut out: Vec<_> = poly
        .into_iter()
        .map(|(mono, c)| {
            let f: f64 = mono.iter().map(|&n| factorial(n)).product();
            (mono, c * f.sqrt())
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn factorial(n: u8) -> f64 {
    (1..=u32::from(n)).map(f64::from).product()
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (occ, amp)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|", amp.re, amp.im)?;
            let mut first = true;
            for (i, &count) in occ.counts().iter().enumerate() {
                if count == 0 {
                    continue;
                }
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{}×{}", count, self.registry.modes()[i])?;
            }
            if first {
                f.write_str("vac")?;
            }
            f.write_str(">")?;
        }
        Ok(())
    }
}
