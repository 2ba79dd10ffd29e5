//! Fermionic Fock spaces over ordered modes.
//!
//! A basis index is an occupation bit-string with mode 0 in the least
//! significant bit. Configuration states are `(f_0†)^{n_0} ⋯ (f_{d-1}†)^{n_{d-1}} |0⟩`,
//! so `f_i†` picks up the phase `(-1)^{Σ_{j<i} n_j}`.

use serde::{Deserialize, Serialize};

use crate::densmat::{partial_trace, CMat, CVec, DensityMatrix, TensorShape, C64, ONE, ZERO};
use crate::error::{Error, Result};

pub const MAX_MODES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub site: usize,
    pub spin: Spin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeBasis {
    labels: Vec<ModeLabel>,
}

impl ModeBasis {
    pub fn new(labels: Vec<ModeLabel>) -> Result<Self> {
        if labels.is_empty() || labels.len() > MAX_MODES {
            return Err(Error::Argument(format!("{} modes (allowed 1..={MAX_MODES})", labels.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Argument(format!("duplicate mode label {l:?}")));
            }
        }
        Ok(ModeBasis { labels })
    }

    /// Spatial orbitals `0..k`, each contributing the modes (↑, ↓) in that order.
    pub fn orbitals(k: usize) -> Result<Self> {
        let labels = (0..k)
            .flat_map(|s| [ModeLabel { site: s, spin: Spin::Up }, ModeLabel { site: s, spin: Spin::Down }])
            .collect();
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Fock-space dimension `2^d`.
    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn mode(&self, site: usize, spin: Spin) -> Option<usize> {
        self.labels.iter().position(|l| l.site == site && l.spin == spin)
    }

    /// Mode indices `[up, down]` of one spatial orbital.
    pub fn orbital_modes(&self, site: usize) -> Result<[usize; 2]> {
        match (self.mode(site, Spin::Up), self.mode(site, Spin::Down)) {
            (Some(u), Some(d)) => Ok([u, d]),
            _ => Err(Error::Argument(format!("site {site} lacks a spin pair"))),
        }
    }

    pub fn sites(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.labels.iter().map(|l| l.site).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn full_shape(&self) -> TensorShape {
        TensorShape::single(self.dim())
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::Index(format!("mode {i} of {}", self.len())));
        }
        Ok(())
    }
}

fn parity_below(n: usize, i: usize) -> f64 {
    if (n & ((1 << i) - 1)).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `f_i† |n⟩ = sign |n'⟩`, or `None` when mode `i` is occupied.
pub fn create(n: usize, i: usize) -> Option<(f64, usize)> {
    if n & (1 << i) != 0 {
        None
    } else {
        Some((parity_below(n, i), n | (1 << i)))
    }
}

pub fn annihilate(n: usize, i: usize) -> Option<(f64, usize)> {
    if n & (1 << i) == 0 {
        None
    } else {
        Some((parity_below(n, i), n & !(1 << i)))
    }
}

/// Applies a word of ladder operators written left to right; the rightmost acts first.
/// `(i, true)` is `f_i†`, `(i, false)` is `f_i`.
pub fn apply_word(word: &[(usize, bool)], n: usize) -> Option<(f64, usize)> {
    let mut sign = 1.0;
    let mut state = n;
    for &(i, dag) in word.iter().rev() {
        let (s, next) = if dag { create(state, i)? } else { annihilate(state, i)? };
        sign *= s;
        state = next;
    }
    Some((sign, state))
}

/// Dense matrix of a ladder-operator word on the full Fock space.
pub fn word_matrix(basis: &ModeBasis, word: &[(usize, bool)]) -> Result<CMat> {
    for &(i, _) in word {
        basis.check_mode(i)?;
    }
    let dim = basis.dim();
    let mut m = CMat::zeros(dim, dim);
    for n in 0..dim {
        if let Some((s, out)) = apply_word(word, n) {
            m[(out, n)] += C64::new(s, 0.0);
        }
    }
    Ok(m)
}

/// Returns `(f_i†, f_i)` as dense matrices.
pub fn creation_op(basis: &ModeBasis, i: usize) -> Result<(CMat, CMat)> {
    let c = word_matrix(basis, &[(i, true)])?;
    let a = c.adjoint();
    Ok((c, a))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    basis: ModeBasis,
    amps: CVec,
}

impl FockState {
    pub fn new(basis: ModeBasis, amps: CVec) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Shape(format!("{} amplitudes for {} modes", amps.len(), basis.len())));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(Error::Trace(n2, (n2 - 1.0).abs()));
        }
        Ok(FockState { basis, amps })
    }

    /// Normalizes `amps` before building the state.
    pub fn normalized(basis: ModeBasis, amps: CVec) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 {
            return Err(Error::Argument("zero vector".into()));
        }
        Self::new(basis, amps.unscale(n))
    }

    pub fn vacuum(basis: ModeBasis) -> Self {
        let mut amps = CVec::zeros(basis.dim());
        amps[0] = ONE;
        FockState { basis, amps }
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.basis.full_shape(), &self.amps * self.amps.adjoint())
    }
}

/// Configuration state with the listed modes occupied.
pub fn config_state(basis: &ModeBasis, occupied: &[usize]) -> Result<FockState> {
    let mut n = 0usize;
    for &i in occupied {
        basis.check_mode(i)?;
        if n & (1 << i) != 0 {
            return Err(Error::Argument(format!("mode {i} listed twice")));
        }
        n |= 1 << i;
    }
    let mut amps = CVec::zeros(basis.dim());
    amps[n] = ONE;
    Ok(FockState { basis: basis.clone(), amps })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    pub part_a: Vec<usize>,
    pub part_b: Vec<usize>,
}

impl Bipartition {
    /// `part_a` as given, `part_b` the ascending complement.
    pub fn new(mode_count: usize, part_a: Vec<usize>) -> Result<Self> {
        let part_b = (0..mode_count).filter(|m| !part_a.contains(m)).collect();
        Self::with_parts(mode_count, part_a, part_b)
    }

    pub fn with_parts(mode_count: usize, part_a: Vec<usize>, part_b: Vec<usize>) -> Result<Self> {
        check_cover(mode_count, &[part_a.clone(), part_b.clone()])?;
        Ok(Bipartition { part_a, part_b })
    }

    pub fn swapped(&self) -> Self {
        Bipartition { part_a: self.part_b.clone(), part_b: self.part_a.clone() }
    }
}

fn check_cover(mode_count: usize, groups: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; mode_count];
    for g in groups {
        for &m in g {
            if m >= mode_count || seen[m] {
                return Err(Error::Index(format!("groups {groups:?} are not a partition of {mode_count} modes")));
            }
            seen[m] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Index(format!("groups {groups:?} do not cover {mode_count} modes")));
    }
    Ok(())
}

/// For every Fock index: the index in the grouped tensor basis and the reordering sign.
fn regroup_map(mode_count: usize, groups: &[Vec<usize>]) -> Vec<(usize, f64)> {
    let order: Vec<usize> = groups.iter().flatten().copied().collect();
    let mut pos = vec![0usize; mode_count];
    for (p, &m) in order.iter().enumerate() {
        pos[m] = p;
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    (0..1usize << mode_count)
        .map(|x| {
            let mut idx = 0usize;
            for (g, group) in groups.iter().enumerate() {
                let mut local = 0usize;
                for (k, &m) in group.iter().enumerate() {
                    if x & (1 << m) != 0 {
                        local |= 1 << k;
                    }
                }
                let rest: usize = sizes[g + 1..].iter().sum();
                idx += local << rest;
            }
            let mut inversions = 0usize;
            for m in 0..mode_count {
                if x & (1 << m) == 0 {
                    continue;
                }
                for m2 in m + 1..mode_count {
                    if x & (1 << m2) != 0 && pos[m] > pos[m2] {
                        inversions += 1;
                    }
                }
            }
            (idx, if inversions % 2 == 1 { -1.0 } else { 1.0 })
        })
        .collect()
}

fn mode_count_of(rho: &DensityMatrix) -> Result<usize> {
    let d = rho.dim();
    if !d.is_power_of_two() || rho.shape().factors() != 1 {
        return Err(Error::Shape(format!("{:?} is not a full Fock-space shape", rho.shape().dims())));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Regroups a full Fock-space state into the tensor product of mode groups.
/// Group 0 is the most significant factor; inside a group the k-th listed mode is bit k.
pub fn split_modes(rho: &DensityMatrix, groups: &[Vec<usize>]) -> Result<DensityMatrix> {
    mode_count_of(rho)?;
    let (shape, out) = split_operator(rho.matrix(), groups)?;
    Ok(DensityMatrix::from_matrix_unchecked(shape, out))
}

/// [`split_modes`] for an arbitrary operator on the full Fock space.
pub fn split_operator(m: &CMat, groups: &[Vec<usize>]) -> Result<(TensorShape, CMat)> {
    let n = m.nrows();
    if !n.is_power_of_two() || m.ncols() != n {
        return Err(Error::Shape(format!("{n}×{} is not a Fock-space operator", m.ncols())));
    }
    let d = n.trailing_zeros() as usize;
    check_cover(d, groups)?;
    let map = regroup_map(d, groups);
    let mut out = CMat::zeros(n, n);
    for x in 0..n {
        let (ix, sx) = map[x];
        for y in 0..n {
            let (iy, sy) = map[y];
            out[(ix, iy)] = m[(x, y)] * (sx * sy);
        }
    }
    let shape = TensorShape::new(groups.iter().map(|g| 1usize << g.len()).collect())?;
    Ok((shape, out))
}

pub fn split_bipartite(rho: &DensityMatrix, parts: &Bipartition) -> Result<DensityMatrix> {
    split_modes(rho, &[parts.part_a.clone(), parts.part_b.clone()])
}

/// Amplitudes of a pure state in the grouped tensor basis.
pub fn split_state(psi: &FockState, groups: &[Vec<usize>]) -> Result<(TensorShape, CVec)> {
    let d = psi.basis.len();
    check_cover(d, groups)?;
    let map = regroup_map(d, groups);
    let mut out = CVec::zeros(psi.amps.len());
    for (x, &(ix, s)) in map.iter().enumerate() {
        out[ix] = psi.amps[x] * s;
    }
    let shape = TensorShape::new(groups.iter().map(|g| 1usize << g.len()).collect())?;
    Ok((shape, out))
}

fn complement(d: usize, kept: &[usize]) -> Vec<usize> {
    (0..d).filter(|m| !kept.contains(m)).collect()
}

fn reduce_groups(rho: &DensityMatrix, mut groups: Vec<Vec<usize>>) -> Result<DensityMatrix> {
    let d = mode_count_of(rho)?;
    let kept: Vec<usize> = groups.iter().flatten().copied().collect();
    if kept.is_empty() {
        return Err(Error::Argument("empty set of kept modes".into()));
    }
    let rest = complement(d, &kept);
    let nkeep = groups.len();
    if rest.is_empty() {
        return split_modes(rho, &groups);
    }
    groups.push(rest);
    let split = split_modes(rho, &groups)?;
    partial_trace(&split, &(0..nkeep).collect::<Vec<_>>())
}

/// Reduced state of the listed modes as a single factor of dimension `2^k`.
pub fn mode_reduced_density(rho: &DensityMatrix, keep_modes: &[usize]) -> Result<DensityMatrix> {
    reduce_groups(rho, vec![keep_modes.to_vec()])
}

/// Reduced state of spatial orbitals, one factor of local basis (Ω, ↑, ↓, ↑↓) per orbital.
pub fn orbital_reduced_density(rho: &DensityMatrix, basis: &ModeBasis, sites: &[usize]) -> Result<DensityMatrix> {
    let groups = sites.iter().map(|&s| basis.orbital_modes(s).map(|m| m.to_vec())).collect::<Result<Vec<_>>>()?;
    reduce_groups(rho, groups)
}

/// Same as [`orbital_reduced_density`] but works from the state vector.
pub fn orbital_reduced_density_pure(psi: &FockState, sites: &[usize]) -> Result<DensityMatrix> {
    let d = psi.basis.len();
    let mut groups =
        sites.iter().map(|&s| psi.basis.orbital_modes(s).map(|m| m.to_vec())).collect::<Result<Vec<_>>>()?;
    let kept: Vec<usize> = groups.iter().flatten().copied().collect();
    let rest = complement(d, &kept);
    let rows = 1usize << kept.len();
    let cols = 1usize << rest.len();
    groups.push(rest);
    let (_, v) = split_state(psi, &groups)?;
    let m = CMat::from_fn(rows, cols, |r, c| v[r * cols + c]);
    let shape = TensorShape::new(vec![4; sites.len()])?;
    Ok(DensityMatrix::from_matrix_unchecked(shape, &m * m.adjoint()))
}

/// Local particle-number operator of `m` modes in the LSB-first occupation basis.
pub fn local_number_operator(m: usize) -> CMat {
    let dim = 1usize << m;
    CMat::from_fn(dim, dim, |r, c| if r == c { C64::new(r.count_ones() as f64, 0.0) } else { ZERO })
}

/// Particle number of the listed modes on the full Fock space.
pub fn number_operator(basis: &ModeBasis, modes: &[usize]) -> Result<CMat> {
    let mut mask = 0usize;
    for &m in modes {
        basis.check_mode(m)?;
        mask |= 1 << m;
    }
    let dim = basis.dim();
    Ok(CMat::from_fn(dim, dim, |r, c| if r == c { C64::new((r & mask).count_ones() as f64, 0.0) } else { ZERO }))
}

#[derive(Clone, Debug)]
pub struct SymmetryOps {
    pub n: CMat,
    pub s_z: CMat,
    pub s_plus: CMat,
    pub s_squared: CMat,
}

/// Total particle number, magnetization and total spin on the full Fock space.
pub fn symmetry_ops(basis: &ModeBasis) -> Result<SymmetryOps> {
    let dim = basis.dim();
    let n = number_operator(basis, &(0..basis.len()).collect::<Vec<_>>())?;
    let mut s_z = CMat::zeros(dim, dim);
    let mut s_plus = CMat::zeros(dim, dim);
    for site in basis.sites() {
        let [u, d] = basis.orbital_modes(site)?;
        s_z +=
            (word_matrix(basis, &[(u, true), (u, false)])? - word_matrix(basis, &[(d, true), (d, false)])?).scale(0.5);
        s_plus += word_matrix(basis, &[(u, true), (d, false)])?;
    }
    let s_minus = s_plus.adjoint();
    let s_squared = (&s_plus * &s_minus + &s_minus * &s_plus).scale(0.5) + &s_z * &s_z;
    Ok(SymmetryOps { n, s_z, s_plus, s_squared })
}

/// Unitary implementing the mode permutation `f_m → f_{perm[m]}`.
pub fn mode_permutation(basis: &ModeBasis, perm: &[usize]) -> Result<CMat> {
    let d = basis.len();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..d).collect::<Vec<_>>() {
        return Err(Error::Argument(format!("{perm:?} is not a permutation of {d} modes")));
    }
    let dim = basis.dim();
    let mut u = CMat::zeros(dim, dim);
    for x in 0..dim {
        let occ: Vec<usize> = (0..d).filter(|&m| x & (1 << m) != 0).collect();
        let mapped: Vec<usize> = occ.iter().map(|&m| perm[m]).collect();
        let mut inv = 0;
        for i in 0..mapped.len() {
            for j in i + 1..mapped.len() {
                if mapped[i] > mapped[j] {
                    inv += 1;
                }
            }
        }
        let y: usize = mapped.iter().map(|&m| 1usize << m).sum();
        u[(y, x)] = C64::new(if inv % 2 == 1 { -1.0 } else { 1.0 }, 0.0);
    }
    Ok(u)
}

/// Site reflection for a list of swapped site pairs; spins are preserved.
pub fn reflection(basis: &ModeBasis, swaps: &[(usize, usize)]) -> Result<CMat> {
    let mut perm: Vec<usize> = (0..basis.len()).collect();
    for &(a, b) in swaps {
        for spin in [Spin::Up, Spin::Down] {
            let (ma, mb) = match (basis.mode(a, spin), basis.mode(b, spin)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::Argument(format!("sites {a} and {b} do not pair up"))),
            };
            perm[ma] = mb;
            perm[mb] = ma;
        }
    }
    mode_permutation(basis, &perm)
}

/// `γ_ij = ⟨f_j† f_i⟩` for a pure state.
pub fn one_particle_rdm(psi: &FockState) -> CMat {
    let d = psi.basis.len();
    let mut g = CMat::zeros(d, d);
    for n in 0..psi.amps.len() {
        let a = psi.amps[n];
        if a == ZERO {
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                if let Some((s, out)) = apply_word(&[(j, true), (i, false)], n) {
                    g[(i, j)] += psi.amps[out].conj() * a * s;
                }
            }
        }
    }
    g
}

/// `γ_ij = Tr[ρ f_j† f_i]` for a state on the full Fock space.
pub fn one_particle_rdm_mixed(rho: &DensityMatrix) -> Result<CMat> {
    let d = mode_count_of(rho)?;
    let m = rho.matrix();
    let mut g = CMat::zeros(d, d);
    for n in 0..m.nrows() {
        for i in 0..d {
            for j in 0..d {
                if let Some((s, out)) = apply_word(&[(j, true), (i, false)], n) {
                    g[(i, j)] += m[(n, out)] * s;
                }
            }
        }
    }
    Ok(g)
}

/// Fock-space lift of a one-particle unitary: `f_a† → Σ_b u_{ba} f_b†`.
pub fn one_body_rotation(basis: &ModeBasis, u: &CMat) -> Result<CMat> {
    let d = basis.len();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::Shape(format!("one-particle matrix must be {d}x{d}")));
    }
    let dim = basis.dim();
    let mut out = CMat::zeros(dim, dim);
    for x in 0..dim {
        let a: Vec<usize> = (0..d).filter(|&m| x & (1 << m) != 0).collect();
        for y in 0..dim {
            if y.count_ones() != x.count_ones() {
                continue;
            }
            let b: Vec<usize> = (0..d).filter(|&m| y & (1 << m) != 0).collect();
            let sub = CMat::from_fn(a.len(), a.len(), |r, c| u[(b[r], a[c])]);
            out[(y, x)] = if a.is_empty() { ONE } else { sub.determinant() };
        }
    }
    Ok(out)
}
