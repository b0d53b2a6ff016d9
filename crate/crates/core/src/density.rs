use crate::error::{shape, Result};
use crate::linalg::{self, CMat, Layout, C64};

/// Which registers a density matrix covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Register {
    /// Physical system only.
    Q,
    /// Reference followed by physical system.
    RQ,
    /// Anything else (tests, single factors).
    Other,
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: CMat,
    dims: Vec<usize>,
    register: Register,
}

impl DensityMatrix {
    pub fn new(entries: CMat, dims: Vec<usize>, register: Register) -> Result<Self> {
        let layout = Layout::new(&dims)?;
        if entries.nrows() != layout.total() || entries.ncols() != layout.total() {
            return Err(shape!(
                "matrix is {}x{}, factors {:?} give {}",
                entries.nrows(),
                entries.ncols(),
                dims,
                layout.total()
            ));
        }
        Ok(Self { entries, dims, register })
    }

    pub fn from_pure(state: &[C64], dims: Vec<usize>, register: Register) -> Result<Self> {
        Self::new(linalg::dyad(state), dims, register)
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn matrix_mut(&mut self) -> &mut CMat {
        &mut self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.dims).expect("validated at construction")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(self.entries.as_ref()).re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(self.entries.as_ref())
    }

    /// `Tr(rho^2)`, computed as the squared Frobenius norm (Hermitian input).
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim() {
            acc += self.entries.col_as_slice(j).iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        acc
    }

    /// Partial trace keeping `keep` (indices into `dims`, in order).
    pub fn reduce(&self, keep: &[usize], register: Register) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(self.entries.as_ref(), &self.layout(), keep)?;
        let dims = keep.iter().map(|&f| self.dims[f]).collect();
        DensityMatrix::new(m, dims, register)
    }
}
