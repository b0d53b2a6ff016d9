//! Haar-random encodings and the encoded state `|Psi_RQ>`.
//!
//! The encoded state lives on `R (k sites) x Q (n sites)`, R first, so the
//! amplitude of `|r>_R |s>_Q` sits at index `r * q^n + s`. The logical
//! register L is the first `k` sites of Q and the ancillas start in `|0>`.

use std::io::{Read, Write};

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::density::{DensityMatrix, Register};
use crate::error::{capacity, domain, Error, Result};
use crate::linalg::{self, CMat, Layout, C64};

/// Default dense budget: one RQ state at N=13, k=1 plus working copies.
pub const DEFAULT_BUDGET_MB: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub seed: u64,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, q: usize, seed: u64) -> Result<Self> {
        let p = Self { n, k, q, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(domain!("qudit dimension {} < 2", self.q));
        }
        if self.k < 1 || self.k > self.n {
            return Err(domain!("need 1 <= k <= N, got k={} N={}", self.k, self.n));
        }
        if self.q.checked_pow((self.n + self.k) as u32).is_none() {
            return Err(capacity!("q^(N+k) overflows for N={} k={} q={}", self.n, self.k, self.q));
        }
        Ok(())
    }

    /// `q^N`
    pub fn dim_q(&self) -> usize {
        self.q.pow(self.n as u32)
    }

    /// `q^k`
    pub fn dim_r(&self) -> usize {
        self.q.pow(self.k as u32)
    }

    /// `q^(N+k)`
    pub fn dim_rq(&self) -> usize {
        self.dim_q() * self.dim_r()
    }

    /// Bytes of one dense `q^(N+k)` square complex matrix.
    pub fn dense_rq_bytes(&self) -> u128 {
        let d = self.dim_rq() as u128;
        d * d * 16
    }

    /// Refuse parameters whose dense RQ matrix exceeds `budget_mb`.
    pub fn check_budget(&self, budget_mb: usize) -> Result<()> {
        let need = self.dense_rq_bytes();
        if need > (budget_mb as u128) << 20 {
            return Err(capacity!(
                "N={} k={} q={} needs {} MiB per dense RQ matrix, budget is {} MiB",
                self.n,
                self.k,
                self.q,
                need >> 20,
                budget_mb
            ));
        }
        Ok(())
    }

    pub fn rq_layout(&self) -> Layout {
        Layout::uniform(self.q, self.n + self.k).expect("validated")
    }

    pub fn q_layout(&self) -> Layout {
        Layout::uniform(self.q, self.n).expect("validated")
    }

    /// Tensor factors of the RQ layout that belong to Q.
    pub fn q_sites(&self) -> Vec<usize> {
        (self.k..self.k + self.n).collect()
    }

    /// Independent stream for sample `index`; the same index always yields
    /// the same code regardless of scheduling.
    pub fn sample_rng(&self, index: u64) -> ChaCha20Rng {
        let mut key = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for x in [self.n as u64, self.k as u64, self.q as u64] {
            key = splitmix(key ^ x);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(key);
        rng.set_stream(index);
        rng
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// First `m` columns of a Haar-random `d x d` unitary.
pub fn haar_isometry<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<CMat> {
    if d == 0 || m == 0 || m > d {
        return Err(domain!("need 1 <= m <= d, got d={d} m={m}"));
    }
    let g = Mat::from_fn(d, m, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.compute_thin_Q();
    let r = qr.thin_R();
    for j in 0..m {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for x in q.col_as_slice_mut(j) {
            *x *= phase;
        }
    }
    Ok(q)
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMat> {
    haar_isometry(d, d, rng)
}

#[derive(Debug, Clone)]
pub struct EncodedState {
    amplitudes: Vec<C64>,
    params: CodeParams,
}

impl EncodedState {
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    /// Orthonormal codewords `U|n>|0_A>` as the columns of a `q^N x q^k`
    /// matrix.
    pub fn codewords(&self) -> CMat {
        let dq = self.params.dim_q();
        let dr = self.params.dim_r();
        let scale = (dr as f64).sqrt();
        CMat::from_fn(dq, dr, |s, n| self.amplitudes[n * dq + s] * scale)
    }

    /// `rho_Q`, the maximally mixed state on the code space.
    pub fn rho_q(&self) -> DensityMatrix {
        let v = self.codewords();
        let mut m = &v * v.adjoint();
        linalg::scale(&mut m, 1.0 / self.params.dim_r() as f64);
        DensityMatrix::new(m, vec![self.params.q; self.params.n], Register::Q).expect("consistent dims")
    }

    pub fn rho_rq(&self) -> DensityMatrix {
        let p = &self.params;
        DensityMatrix::from_pure(&self.amplitudes, vec![p.q; p.n + p.k], Register::RQ).expect("consistent dims")
    }

    /// Reduced state on the given factors of the RQ layout.
    pub fn reduce(&self, keep: &[usize], register: Register) -> Result<DensityMatrix> {
        let m = linalg::reduce_pure(&self.amplitudes, &self.params.rq_layout(), keep)?;
        let dims = keep.iter().map(|_| self.params.q).collect();
        DensityMatrix::new(m, dims, register)
    }

    const MAGIC: [u8; 8] = *b"HAARQST1";

    /// Little-endian dump: magic, N, k, q (u32 each), seed (u64), then
    /// interleaved re/im f64 pairs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&Self::MAGIC)?;
        for x in [self.params.n, self.params.k, self.params.q] {
            w.write_all(&(x as u32).to_le_bytes())?;
        }
        w.write_all(&self.params.seed.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.amplitudes.len() * 16);
        for a in &self.amplitudes {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if magic != Self::MAGIC {
            return Err(Error::Input("not a state dump (bad magic)".into()));
        }
        let mut u = [0u8; 4];
        let mut fields = [0usize; 3];
        for f in fields.iter_mut() {
            r.read_exact(&mut u)?;
            *f = u32::from_le_bytes(u) as usize;
        }
        let mut s = [0u8; 8];
        r.read_exact(&mut s)?;
        let params = CodeParams::new(fields[0], fields[1], fields[2], u64::from_le_bytes(s))?;
        let len = params.dim_rq();
        let mut raw = vec![0u8; len * 16];
        r.read_exact(&mut raw)?;
        let amplitudes = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                C64::new(re, im)
            })
            .collect();
        Ok(Self { amplitudes, params })
    }
}

/// Sample a Haar code for `params` from `rng` and build `|Psi_RQ>`.
pub fn encode<R: Rng + ?Sized>(params: &CodeParams, rng: &mut R) -> Result<EncodedState> {
    params.validate()?;
    let v = haar_isometry(params.dim_q(), params.dim_r(), rng)?;
    Ok(from_codewords(params, &v))
}

/// Sample `index` of the deterministic stream for `params`.
pub fn encode_sample(params: &CodeParams, index: u64) -> Result<EncodedState> {
    let mut rng = params.sample_rng(index);
    encode(params, &mut rng)
}

/// `|Psi_RQ>` for an explicit encoding unitary on Q.
pub fn encode_with_unitary(params: &CodeParams, u: &CMat) -> Result<EncodedState> {
    params.validate()?;
    let dq = params.dim_q();
    if u.nrows() != dq || u.ncols() != dq {
        return Err(crate::error::shape!("unitary is {}x{}, need {dq}x{dq}", u.nrows(), u.ncols()));
    }
    let ancilla = params.q.pow((params.n - params.k) as u32);
    let v = CMat::from_fn(dq, params.dim_r(), |s, n| u[(s, n * ancilla)]);
    Ok(from_codewords(params, &v))
}

fn from_codewords(params: &CodeParams, v: &CMat) -> EncodedState {
    let dq = params.dim_q();
    let dr = params.dim_r();
    let scale = 1.0 / (dr as f64).sqrt();
    let mut amplitudes = vec![C64::new(0.0, 0.0); dq * dr];
    for n in 0..dr {
        for (s, x) in v.col_as_slice(n).iter().enumerate() {
            amplitudes[n * dq + s] = x * scale;
        }
    }
    EncodedState { amplitudes, params: *params }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for d in [1usize, 2, 7, 32] {
            let u = haar_unitary(d, &mut rng).unwrap();
            let prod = u.adjoint() * &u;
            assert!(max_abs_diff(prod.as_ref(), CMat::identity(d, d).as_ref()) < 1e-11);
        }
        let u = haar_unitary(1, &mut rng).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn encoded_state_invariants() {
        let p = CodeParams::new(4, 1, 2, 7).unwrap();
        let psi = encode_sample(&p, 0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let rho_r = psi.reduce(&[0], Register::Other).unwrap();
        let half = CMat::from_fn(2, 2, |i, j| if i == j { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) });
        assert!(max_abs_diff(rho_r.matrix().as_ref(), half.as_ref()) < 1e-10);
        let rho_q = psi.rho_q();
        assert!((rho_q.trace() - 1.0).abs() < 1e-10);
        assert!((rho_q.purity() - 0.5).abs() < 1e-10);
        let via_trace = psi.reduce(&p.q_sites(), Register::Q).unwrap();
        assert!(max_abs_diff(via_trace.matrix().as_ref(), rho_q.matrix().as_ref()) < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_per_index() {
        let p = CodeParams::new(3, 1, 2, 42).unwrap();
        let a = encode_sample(&p, 5).unwrap();
        let b = encode_sample(&p, 5).unwrap();
        let c = encode_sample(&p, 6).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert_ne!(a.amplitudes(), c.amplitudes());
    }

    #[test]
    fn explicit_unitary_identity_gives_trivial_code() {
        let p = CodeParams::new(2, 1, 2, 0).unwrap();
        let psi = encode_with_unitary(&p, &CMat::identity(4, 4)).unwrap();
        // (|0>|00> + |1>|10>)/sqrt2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi.amplitudes()[0].re - s).abs() < 1e-15);
        assert!((psi.amplitudes()[4 + 2].re - s).abs() < 1e-15);
    }

    #[test]
    fn dump_round_trip() {
        let p = CodeParams::new(3, 1, 2, 99).unwrap();
        let psi = encode_sample(&p, 0).unwrap();
        let mut buf = Vec::new();
        psi.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 12 + 8 + 16 * 16);
        let back = EncodedState::read_from(&buf[..]).unwrap();
        assert_eq!(back.amplitudes(), psi.amplitudes());
        assert_eq!(back.params(), psi.params());
        buf[0] = b'X';
        assert!(EncodedState::read_from(&buf[..]).is_err());
    }

    #[test]
    fn budget_check() {
        let p = CodeParams::new(13, 1, 2, 0).unwrap();
        assert!(p.check_budget(4096).is_ok());
        assert!(matches!(p.check_budget(1000), Err(Error::Capacity(_))));
    }
}
