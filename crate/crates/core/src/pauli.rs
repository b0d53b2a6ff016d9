//! Generalized (Weyl clock-shift) Pauli operators on qudits.
//!
//! A single-site label `v` in `0..q*q` decodes to `(a, b) = (v / q, v % q)`
//! and denotes `X^a Z^b`, with `X|j> = |j+1 mod q>` and `Z|j> = w^j |j>`,
//! `w = exp(2 pi i / q)`. Thus `X^a Z^b |j> = w^(b j) |j + a>`. For qubits
//! label 1 is Z, 2 is X and 3 is XZ (= -iY).
//!
//! Pauli strings over `d` sites are indexed in base `q^2` with site 0 as the
//! most significant digit, matching the tensor layout of state vectors.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{capacity, domain, shape, Result};
use crate::linalg::{CMat, Layout, C64, ZERO};

/// Largest number of sites `pauli_spectrum` will transform (at q=2 this is
/// 4^12 coefficients).
pub const MAX_TRANSFORM_COEFFS: usize = 1 << 24;

/// A Pauli string: one label in `0..q*q` per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliIndex {
    q: usize,
    entries: Vec<u32>,
}

impl PauliIndex {
    pub fn new(q: usize, entries: Vec<u32>) -> Result<Self> {
        if q < 2 {
            return Err(domain!("qudit dimension {q} < 2"));
        }
        if let Some(bad) = entries.iter().find(|&&v| v as usize >= q * q) {
            return Err(domain!("label {bad} out of range for q={q}"));
        }
        Ok(Self { q, entries })
    }

    pub fn identity(n: usize, q: usize) -> Self {
        Self { q, entries: vec![0; n] }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0).count()
    }

    /// `(a, b)` exponents of `X^a Z^b` at `site`.
    pub fn exponents(&self, site: usize) -> (usize, usize) {
        let v = self.entries[site] as usize;
        (v / self.q, v % self.q)
    }

    /// Position of this string in the base-`q^2` ordering.
    pub fn flat_index(&self) -> usize {
        let qq = self.q * self.q;
        self.entries.iter().fold(0, |acc, &v| acc * qq + v as usize)
    }

    pub fn from_flat_index(mut idx: usize, n: usize, q: usize) -> Self {
        let qq = q * q;
        let mut entries = vec![0u32; n];
        for slot in entries.iter_mut().rev() {
            *slot = (idx % qq) as u32;
            idx /= qq;
        }
        Self { q, entries }
    }
}

/// `exp(2 pi i m / q)`
#[inline]
pub fn root_of_unity(m: usize, q: usize) -> C64 {
    let t = 2.0 * std::f64::consts::PI * ((m % q) as f64) / q as f64;
    C64::new(t.cos(), t.sin())
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn binomial_f64(n: usize, k: usize) -> f64 {
    big_to_f64(&binomial(n, k))
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Number of distinct weight-`w` Pauli strings on `n` qudits,
/// `(q^2 - 1)^w * C(n, w)`.
pub fn omega(n: usize, w: usize, q: usize) -> Result<BigUint> {
    if w > n {
        return Err(domain!("weight {w} exceeds site count {n}"));
    }
    if q < 2 {
        return Err(domain!("qudit dimension {q} < 2"));
    }
    Ok(BigUint::from(q * q - 1).pow(w as u32) * binomial(n, w))
}

pub fn omega_f64(n: usize, w: usize, q: usize) -> Result<f64> {
    omega(n, w, q).map(|x| big_to_f64(&x))
}

/// Natural log of `omega`, safe for counts beyond f64 range.
pub fn ln_omega(n: usize, w: usize, q: usize) -> Result<f64> {
    let big = omega(n, w, q)?;
    let bits = big.bits();
    if bits < 1000 {
        return Ok(big_to_f64(&big).ln());
    }
    let shift = bits - 64;
    let top = (&big >> shift).to_f64().unwrap_or(f64::MAX);
    Ok(top.ln() + shift as f64 * std::f64::consts::LN_2)
}

/// All weight-`w` strings on `n` sites: supports in ascending lexicographic
/// order, and within a support the labels count up with the last support
/// site fastest.
#[derive(Debug, Clone)]
pub struct FixedWeightIter {
    n: usize,
    q: usize,
    support: Vec<usize>,
    labels: Vec<u32>,
    done: bool,
}

impl FixedWeightIter {
    pub fn new(n: usize, w: usize, q: usize) -> Result<Self> {
        if w > n {
            return Err(domain!("weight {w} exceeds site count {n}"));
        }
        if q < 2 {
            return Err(domain!("qudit dimension {q} < 2"));
        }
        Ok(Self { n, q, support: (0..w).collect(), labels: vec![1; w], done: false })
    }

    fn advance(&mut self) {
        let top = (self.q * self.q - 1) as u32;
        for slot in (0..self.labels.len()).rev() {
            if self.labels[slot] < top {
                self.labels[slot] += 1;
                return;
            }
            self.labels[slot] = 1;
        }
        // labels wrapped: next support
        let w = self.support.len();
        for slot in (0..w).rev() {
            if self.support[slot] < self.n - w + slot {
                self.support[slot] += 1;
                for later in slot + 1..w {
                    self.support[later] = self.support[later - 1] + 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for FixedWeightIter {
    type Item = PauliIndex;

    fn next(&mut self) -> Option<PauliIndex> {
        if self.done {
            return None;
        }
        let mut entries = vec![0u32; self.n];
        for (&s, &v) in self.support.iter().zip(&self.labels) {
            entries[s] = v;
        }
        self.advance();
        Some(PauliIndex { q: self.q, entries })
    }
}

pub fn enumerate_fixed_weight(n: usize, w: usize, q: usize) -> Result<FixedWeightIter> {
    FixedWeightIter::new(n, w, q)
}

/// Apply `E_mu` to a state vector. `sites[i]` is the tensor factor of
/// `layout` that `mu.entries()[i]` acts on; every such factor must have
/// dimension `mu.q()`.
pub fn apply_error(state: &[C64], layout: &Layout, mu: &PauliIndex, sites: &[usize]) -> Result<Vec<C64>> {
    let mut out = vec![ZERO; state.len()];
    apply_error_into(state, layout, mu, sites, &mut out)?;
    Ok(out)
}

pub fn apply_error_into(
    state: &[C64],
    layout: &Layout,
    mu: &PauliIndex,
    sites: &[usize],
    out: &mut [C64],
) -> Result<()> {
    if state.len() != layout.total() || out.len() != layout.total() {
        return Err(shape!("state has length {}, layout has dimension {}", state.len(), layout.total()));
    }
    if sites.len() != mu.len() {
        return Err(shape!("{} labels for {} sites", mu.len(), sites.len()));
    }
    let q = mu.q();
    for &f in sites {
        if f >= layout.len() || layout.dims()[f] != q {
            return Err(shape!("site {f} is not a q={q} factor of {:?}", layout.dims()));
        }
    }
    let active: Vec<(usize, usize, usize)> = (0..mu.len())
        .filter(|&i| mu.entries()[i] != 0)
        .map(|i| {
            let (a, b) = mu.exponents(i);
            (layout.stride(sites[i]), a, b)
        })
        .collect();
    if active.is_empty() {
        out.copy_from_slice(state);
        return Ok(());
    }
    if q == 2 && layout.dims().iter().all(|&d| d == 2) {
        let (mut x, mut z) = (0usize, 0usize);
        for &(s, a, b) in &active {
            if a == 1 {
                x |= s;
            }
            if b == 1 {
                z |= s;
            }
        }
        for (j, &amp) in state.iter().enumerate() {
            let v = if (j & z).count_ones() & 1 == 1 { -amp } else { amp };
            out[j ^ x] = v;
        }
        return Ok(());
    }
    let phases: Vec<C64> = (0..q).map(|m| root_of_unity(m, q)).collect();
    for (j, &amp) in state.iter().enumerate() {
        let mut target = j;
        let mut power = 0usize;
        for &(s, a, b) in &active {
            let digit = (j / s) % q;
            power += b * digit;
            let shifted = (digit + a) % q;
            target = target - digit * s + shifted * s;
        }
        out[target] = phases[power % q] * amp;
    }
    Ok(())
}

/// Permutation and phase of `E_mu` on basis states:
/// `E_mu |j> = phase[j] |target[j]>`.
pub fn action_table(layout: &Layout, mu: &PauliIndex, sites: &[usize]) -> Result<(Vec<usize>, Vec<C64>)> {
    let q = mu.q();
    if sites.len() != mu.len() {
        return Err(shape!("{} labels for {} sites", mu.len(), sites.len()));
    }
    for &f in sites {
        if f >= layout.len() || layout.dims()[f] != q {
            return Err(shape!("site {f} is not a q={q} factor of {:?}", layout.dims()));
        }
    }
    let phases: Vec<C64> = (0..q).map(|m| root_of_unity(m, q)).collect();
    let mut target = Vec::with_capacity(layout.total());
    let mut phase = Vec::with_capacity(layout.total());
    for j in 0..layout.total() {
        let mut t = j;
        let mut power = 0usize;
        for (i, &f) in sites.iter().enumerate() {
            let (a, b) = mu.exponents(i);
            let s = layout.stride(f);
            let digit = (j / s) % q;
            power += b * digit;
            t = t - digit * s + ((digit + a) % q) * s;
        }
        target.push(t);
        phase.push(phases[power % q]);
    }
    Ok((target, phase))
}

/// Dense matrix of a Pauli string on `mu.len()` sites.
pub fn pauli_matrix(mu: &PauliIndex) -> CMat {
    let q = mu.q();
    let n = mu.len();
    let layout = Layout::uniform(q, n).expect("valid layout");
    let dim = layout.total();
    let sites: Vec<usize> = (0..n).collect();
    let mut m = CMat::zeros(dim, dim);
    let mut e = vec![ZERO; dim];
    let mut col = vec![ZERO; dim];
    for j in 0..dim {
        e.iter_mut().for_each(|x| *x = ZERO);
        e[j] = C64::new(1.0, 0.0);
        apply_error_into(&e, &layout, mu, &sites, &mut col).expect("consistent shapes");
        m.col_as_slice_mut(j).copy_from_slice(&col);
    }
    m
}

/// `Tr(S^dagger rho)` by direct summation.
pub fn pauli_coefficient(rho: &CMat, mu: &PauliIndex) -> Result<C64> {
    let q = mu.q();
    let layout = Layout::uniform(q, mu.len())?;
    if rho.nrows() != layout.total() || rho.ncols() != layout.total() {
        return Err(shape!("operator is {}x{}, string acts on dimension {}", rho.nrows(), rho.ncols(), layout.total()));
    }
    let mut acc = ZERO;
    for j in 0..layout.total() {
        let mut target = j;
        let mut power = 0usize;
        for i in 0..mu.len() {
            let (a, b) = mu.exponents(i);
            let s = layout.stride(i);
            let digit = (j / s) % q;
            power += b * digit;
            target = target - digit * s + ((digit + a) % q) * s;
        }
        acc += root_of_unity(power, q).conj() * rho[(target, j)];
    }
    Ok(acc)
}

/// Per-weight Pauli mass of an operator on `R (k sites) x Q (n sites)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalWeights {
    pub k: usize,
    /// Strings trivial on R, weight counted on Q.
    pub phi_identity: Vec<f64>,
    /// All strings on R, weight counted on Q.
    pub phi_sigma: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PauliSpectrum {
    pub q: usize,
    pub sites: usize,
    /// `Tr(S^dagger rho)` in base-`q^2` order; empty when only the weight
    /// distribution was requested.
    pub coefficients: Vec<C64>,
    /// `phi[w]` = sum of `|a_S|^2` over strings of weight `w` (all sites).
    pub phi: Vec<f64>,
    pub logical: Option<LogicalWeights>,
}

impl PauliSpectrum {
    pub fn coefficient(&self, mu: &PauliIndex) -> Option<C64> {
        self.coefficients.get(mu.flat_index()).copied()
    }
}

fn check_transform_size(q: usize, d: usize) -> Result<usize> {
    let dim = q
        .checked_pow(d as u32)
        .ok_or_else(|| capacity!("q^{d} overflows"))?;
    match dim.checked_mul(dim) {
        Some(c) if c <= MAX_TRANSFORM_COEFFS => Ok(dim),
        _ => Err(capacity!(
            "Pauli transform on {d} sites of dimension {q} needs {}^2 coefficients, cap is {MAX_TRANSFORM_COEFFS}",
            dim
        )),
    }
}

fn sites_for_dim(q: usize, dim: usize) -> Result<usize> {
    let mut d = 0;
    let mut p = 1usize;
    while p < dim {
        p *= q;
        d += 1;
    }
    if p != dim {
        return Err(shape!("dimension {dim} is not a power of {q}"));
    }
    Ok(d)
}

/// In-place transform over the `z` index: `f(b) <- sum_j w^(-b.j) f(j)`,
/// one q-point DFT per site.
fn clock_transform(f: &mut [C64], q: usize, d: usize, scratch: &mut Vec<C64>, kernel: &[C64]) {
    if q == 2 {
        let mut h = 1;
        while h < f.len() {
            for block in f.chunks_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = a + b;
                    *y = a - b;
                }
            }
            h *= 2;
        }
        return;
    }
    scratch.resize(q, ZERO);
    let mut stride = 1;
    for _ in 0..d {
        let span = stride * q;
        for base in (0..f.len()).step_by(span) {
            for off in 0..stride {
                for (bout, slot) in scratch.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for j in 0..q {
                        acc += kernel[(bout * j) % q] * f[base + off + j * stride];
                    }
                    *slot = acc;
                }
                for (j, &v) in scratch.iter().enumerate() {
                    f[base + off + j * stride] = v;
                }
            }
        }
        stride = span;
    }
}

/// Drives the transform. `column(x, f)` must fill `f[j] = rho[j + x, j]`
/// (digitwise addition mod q). `sink(x, f)` receives the coefficients
/// `a_{x, z}` indexed by `z`.
fn transform<F, S>(q: usize, d: usize, mut column: F, mut sink: S)
where
    F: FnMut(usize, &mut [C64]),
    S: FnMut(usize, &[C64]),
{
    let dim = q.pow(d as u32);
    let kernel: Vec<C64> = (0..q).map(|m| root_of_unity(m, q).conj()).collect();
    let mut f = vec![ZERO; dim];
    let mut scratch = Vec::new();
    for x in 0..dim {
        column(x, &mut f);
        clock_transform(&mut f, q, d, &mut scratch, &kernel);
        sink(x, &f);
    }
}

/// Digitwise `(j + x) mod q` for base-q numbers with `d` digits.
#[inline]
fn add_digits(j: usize, x: usize, q: usize, d: usize) -> usize {
    if q == 2 {
        return j ^ x;
    }
    let (mut j, mut x) = (j, x);
    let mut out = 0;
    let mut p = 1;
    for _ in 0..d {
        out += ((j % q + x % q) % q) * p;
        j /= q;
        x /= q;
        p *= q;
    }
    out
}

struct WeightTables {
    /// nonzero mask per site index, for fast weight lookup
    q: usize,
    d: usize,
    k: usize,
}

impl WeightTables {
    /// Weight of the string `(x, z)` restricted to sites `k..d`, plus whether
    /// it is trivial on sites `0..k`.
    #[inline]
    fn weight(&self, x: usize, z: usize) -> (usize, bool) {
        if self.q == 2 {
            let support = x | z;
            let q_bits = self.d - self.k;
            let q_mask = (1usize << q_bits) - 1;
            ((support & q_mask).count_ones() as usize, support >> q_bits == 0)
        } else {
            let (mut x, mut z) = (x, z);
            let mut w = 0;
            let mut trivial_r = true;
            for site in (0..self.d).rev() {
                let nz = x % self.q != 0 || z % self.q != 0;
                if site >= self.k {
                    w += nz as usize;
                } else if nz {
                    trivial_r = false;
                }
                x /= self.q;
                z /= self.q;
            }
            (w, trivial_r)
        }
    }
}

/// Pauli decomposition `rho = q^(-d) sum_S a_S S` with `a_S = Tr(S^dagger rho)`.
///
/// With `logical_split = Some(k)` the first `k` sites are treated as the
/// reference R and the per-weight sums `phi_identity`, `phi_sigma` (weight
/// counted on the remaining sites) are also returned.
pub fn pauli_spectrum(rho: &CMat, q: usize, logical_split: Option<usize>) -> Result<PauliSpectrum> {
    spectrum_impl(rho, q, logical_split, true)
}

/// As `pauli_spectrum` without storing the coefficient table.
pub fn pauli_weights(rho: &CMat, q: usize, logical_split: Option<usize>) -> Result<PauliSpectrum> {
    spectrum_impl(rho, q, logical_split, false)
}

fn spectrum_impl(rho: &CMat, q: usize, logical_split: Option<usize>, keep: bool) -> Result<PauliSpectrum> {
    if rho.nrows() != rho.ncols() {
        return Err(shape!("operator is {}x{}", rho.nrows(), rho.ncols()));
    }
    let d = sites_for_dim(q, rho.nrows())?;
    check_transform_size(q, d)?;
    run_spectrum(q, d, logical_split, keep, |x, f| {
        for (j, slot) in f.iter_mut().enumerate() {
            *slot = rho[(add_digits(j, x, q, d), j)];
        }
    })
}

/// Weight distribution of the pure state `|psi><psi|` without forming the
/// density matrix.
pub fn pauli_weights_pure(psi: &[C64], q: usize, logical_split: Option<usize>) -> Result<PauliSpectrum> {
    let d = sites_for_dim(q, psi.len())?;
    check_transform_size(q, d)?;
    run_spectrum(q, d, logical_split, false, |x, f| {
        for (j, slot) in f.iter_mut().enumerate() {
            *slot = psi[add_digits(j, x, q, d)] * psi[j].conj();
        }
    })
}

fn run_spectrum<F>(q: usize, d: usize, logical_split: Option<usize>, keep: bool, column: F) -> Result<PauliSpectrum>
where
    F: FnMut(usize, &mut [C64]),
{
    let k = logical_split.unwrap_or(0);
    if k > d {
        return Err(domain!("logical split {k} exceeds {d} sites"));
    }
    let dim = q.pow(d as u32);
    let full = WeightTables { q, d, k: 0 };
    let split = WeightTables { q, d, k };
    let mut phi = vec![0.0; d + 1];
    let mut phi_i = vec![0.0; d - k + 1];
    let mut phi_s = vec![0.0; d - k + 1];
    let mut coefficients = if keep { vec![ZERO; dim * dim] } else { Vec::new() };
    transform(q, d, column, |x, a| {
        for (z, &c) in a.iter().enumerate() {
            let m = c.norm_sqr();
            phi[full.weight(x, z).0] += m;
            if logical_split.is_some() {
                let (w, trivial_r) = split.weight(x, z);
                phi_s[w] += m;
                if trivial_r {
                    phi_i[w] += m;
                }
            }
            if keep {
                coefficients[interleave(x, z, q, d)] = c;
            }
        }
    });
    Ok(PauliSpectrum {
        q,
        sites: d,
        coefficients,
        phi,
        logical: logical_split.map(|k| LogicalWeights { k, phi_identity: phi_i, phi_sigma: phi_s }),
    })
}

/// Flat base-`q^2` index of the string with shift digits `x` and clock
/// digits `z`.
fn interleave(x: usize, z: usize, q: usize, d: usize) -> usize {
    let (mut x, mut z) = (x, z);
    let mut out = 0;
    let mut p = 1;
    for _ in 0..d {
        out += ((x % q) * q + z % q) * p;
        x /= q;
        z /= q;
        p *= q * q;
    }
    out
}
