//! Discrete fractional integrals and fractional exterior derivatives.
//!
//! For a grid and integral order `β`:
//!
//! * `M_p^{1+β}` collects one-dimensional kernel matrices in Kronecker form,
//!   one block per cell block of degree p;
//! * `dI_p^β = B_p M_p^{1+β} V_p^{-1}` is the discrete fractional integral,
//!   lower triangular with positive diagonal;
//! * `D_p^α = dI_{p+1}^{1-α} D_p (dI_p^{1-α})^{-1}` with `β = 1 - α`.
//!
//! Inverses are always applied by forward substitution.

use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use serde::Serialize;

use crate::complex::{blocks, cell_measure_vec, incidence, node_incidence_block, Grid3, AXES};
use crate::error::{FdecError, Result};
use crate::forms::{de_rham, de_rham_rl, Cochain, Form};
use crate::fraccalc::{check_alpha, gamma_fn, QuadratureSpec};
use crate::sparsekit::{
    block_diag, kron_all, lower_triangular_solve, matmul, scale_cols_by_inverse_diagonal, SparseMatrix,
    TripletBuilder,
};

/// One-dimensional kernel matrix of size `(n+1) × n` for an axis partition:
/// entry `(i, i')`, `i' < i`, is
/// `((x_i - x_{i'})^e - (x_i - x_{i'+1})^e) / Γ(1+e)`.
///
/// With `e = 1 + β` it integrates `I^β` of a piecewise constant function
/// from the left end up to node `i`.
pub fn kernel_matrix_1d(coords: &[f64], exponent: f64) -> Result<SparseMatrix> {
    if coords.len() < 2 {
        return Err(FdecError::InvalidGrid("axis needs at least two coordinates".into()));
    }
    if !(exponent > 0.0) {
        return Err(FdecError::InvalidArgument(format!(
            "kernel exponent must be positive, got {exponent}"
        )));
    }
    let n = coords.len() - 1;
    let inv_gamma = 1.0 / gamma_fn(1.0 + exponent)?;
    let mut trip = TripletBuilder::with_capacity(n + 1, n, n * (n + 1) / 2);
    for i in 1..=n {
        let xi = coords[i];
        for c in 0..i {
            let v = ((xi - coords[c]).powf(exponent) - (xi - coords[c + 1]).powf(exponent)) * inv_gamma;
            trip.push(i, c, v);
        }
    }
    Ok(trip.finalize())
}

/// Kernel matrix of degree p: block-diagonal over cell blocks, each block a
/// Kronecker product with the 1D kernel on spanned axes and identities on
/// the others.
pub fn assemble_kernel(grid: &Grid3, p: usize, exponent: f64) -> Result<SparseMatrix> {
    if !(1..=3).contains(&p) {
        return Err(FdecError::InvalidDegree {
            degree: p,
            expected: "1, 2, 3",
        });
    }
    let kernels = AXES
        .iter()
        .map(|&a| kernel_matrix_1d(grid.coords(a), exponent))
        .collect::<Result<Vec<_>>>()?;
    let idents: Vec<SparseMatrix> = AXES
        .iter()
        .map(|&a| SparseMatrix::identity(grid.coords(a).len()))
        .collect();
    let parts = blocks(p)?
        .iter()
        .map(|block| {
            let factors: Vec<&SparseMatrix> = (0..3)
                .map(|a| if block.spans(AXES[a]) { &kernels[a] } else { &idents[a] })
                .collect();
            kron_all(&factors)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&parts.iter().collect::<Vec<_>>()))
}

/// `M_p^{1+β}` for `p ∈ {1, 2, 3}`, `β ≥ 0`.
pub fn assemble_m(grid: &Grid3, p: usize, beta: f64) -> Result<SparseMatrix> {
    check_nonnegative(beta)?;
    assemble_kernel(grid, p, 1.0 + beta)
}

/// `B_p`: block-diagonal arrangement of the node-to-cell sign matrices.
pub fn assemble_b(grid: &Grid3, p: usize) -> Result<SparseMatrix> {
    if !(1..=3).contains(&p) {
        return Err(FdecError::InvalidDegree {
            degree: p,
            expected: "1, 2, 3",
        });
    }
    let d0 = incidence(grid, 0)?;
    let parts = blocks(p)?
        .iter()
        .map(|b| node_incidence_block(grid, &d0, *b))
        .collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&parts.iter().collect::<Vec<_>>()))
}

fn check_nonnegative(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(FdecError::InvalidOrder {
            value: beta,
            reason: "integral order must be nonnegative",
        })
    }
}

fn check_unit_open(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(FdecError::InvalidOrder {
            value: beta,
            reason: "order must lie in (0, 1)",
        })
    }
}

fn integral_like(grid: &Grid3, p: usize, exponent: f64) -> Result<SparseMatrix> {
    if p == 0 {
        return Ok(SparseMatrix::identity(grid.num_cells(0)?));
    }
    let bm = matmul(&assemble_b(grid, p)?, &assemble_kernel(grid, p, exponent)?)?;
    scale_cols_by_inverse_diagonal(&bm, &cell_measure_vec(grid, p)?)
}

/// `dI_p^β = B_p M_p^{1+β} V_p^{-1}`; identity for `p = 0`.
pub fn assemble_di(grid: &Grid3, p: usize, beta: f64) -> Result<SparseMatrix> {
    check_nonnegative(beta)?;
    if p > 3 {
        return Err(FdecError::InvalidDegree {
            degree: p,
            expected: "0, 1, 2, 3",
        });
    }
    integral_like(grid, p, 1.0 + beta)
}

/// Discrete Riemann–Liouville derivative `B_p M_p^{1-β} V_p^{-1}`;
/// identity for `p = 0`.
pub fn assemble_drld(grid: &Grid3, p: usize, beta: f64) -> Result<SparseMatrix> {
    check_unit_open(beta)?;
    if p > 3 {
        return Err(FdecError::InvalidDegree {
            degree: p,
            expected: "0, 1, 2, 3",
        });
    }
    let m = integral_like(grid, p, 1.0 - beta)?;
    if let Some((i, d)) = m
        .diagonal()
        .iter()
        .enumerate()
        .find(|(_, d)| **d < 1e-12)
    {
        log::warn!("discrete RL derivative (p={p}, beta={beta}) is ill-conditioned: diagonal {d:e} at row {i}");
    }
    Ok(m)
}

/// Which composition defines the fractional exterior derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    /// `dI_{p+1} D_p dI_p^{-1}`.
    #[serde(rename = "paper")]
    Paper,
    /// `dI_{p+1} D_p drlD_p`.
    #[serde(rename = "drlD-right")]
    DrlDRight,
    /// `drlD_{p+1}^{-1} D_p drlD_p`.
    #[serde(rename = "drlD-both")]
    DrlDBoth,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Paper, Variant::DrlDRight, Variant::DrlDBoth];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::DrlDRight => "drlD-right",
            Variant::DrlDBoth => "drlD-both",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = FdecError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| FdecError::Parse(format!("unknown variant '{s}' (expected paper, drlD-right, drlD-both)")))
    }
}

/// Size and timing of one assembled matrix.
#[derive(Debug, Clone, Serialize)]
pub struct AssemblyRecord {
    pub matrix: String,
    pub p: usize,
    pub beta: f64,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub assembly_ms: f64,
}

type Slot = OnceLock<SparseMatrix>;

/// Lazily assembled operators for one grid and one `β`.
pub struct OperatorSet {
    grid: Grid3,
    beta: f64,
    d: [Slot; 3],
    b: [Slot; 4],
    m: [Slot; 4],
    di: [Slot; 4],
    drld: [Slot; 4],
    measures: [OnceLock<Vec<f64>>; 4],
    records: Mutex<Vec<AssemblyRecord>>,
}

impl fmt::Debug for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSet")
            .field("n", &self.grid.n())
            .field("beta", &self.beta)
            .finish()
    }
}

fn check_degree(p: usize, max: usize, expected: &'static str) -> Result<()> {
    if p > max {
        Err(FdecError::InvalidDegree { degree: p, expected })
    } else {
        Ok(())
    }
}

impl OperatorSet {
    pub fn new(grid: Grid3, beta: f64) -> Result<Self> {
        check_nonnegative(beta)?;
        Ok(Self {
            grid,
            beta,
            d: Default::default(),
            b: Default::default(),
            m: Default::default(),
            di: Default::default(),
            drld: Default::default(),
            measures: Default::default(),
            records: Mutex::new(Vec::new()),
        })
    }

    /// Operators for `D_p^α`, i.e. `β = 1 - α`.
    pub fn for_alpha(grid: Grid3, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new(grid, 1.0 - alpha)
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        1.0 - self.beta
    }

    /// Assembly records so far, in completion order.
    pub fn records(&self) -> Vec<AssemblyRecord> {
        self.records.lock().expect("records lock").clone()
    }

    fn cached<'a>(
        &self,
        slot: &'a Slot,
        name: &str,
        p: usize,
        build: impl FnOnce() -> Result<SparseMatrix>,
    ) -> Result<&'a SparseMatrix> {
        if let Some(m) = slot.get() {
            return Ok(m);
        }
        let start = Instant::now();
        let m = build()?;
        let record = AssemblyRecord {
            matrix: name.to_string(),
            p,
            beta: self.beta,
            rows: m.nrows(),
            cols: m.ncols(),
            nnz: m.nnz(),
            assembly_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        if slot.set(m).is_ok() {
            self.records.lock().expect("records lock").push(record);
        }
        Ok(slot.get().expect("just set"))
    }

    /// `D_p`, `p ∈ {0, 1, 2}`.
    pub fn d(&self, p: usize) -> Result<&SparseMatrix> {
        check_degree(p, 2, "0, 1, 2")?;
        self.cached(&self.d[p], "D", p, || incidence(&self.grid, p))
    }

    pub fn b(&self, p: usize) -> Result<&SparseMatrix> {
        check_degree(p, 3, "1, 2, 3")?;
        if p == 0 {
            return Err(FdecError::InvalidDegree { degree: 0, expected: "1, 2, 3" });
        }
        self.cached(&self.b[p], "B", p, || assemble_b(&self.grid, p))
    }

    /// `M_p^{1+β}`.
    pub fn m(&self, p: usize) -> Result<&SparseMatrix> {
        check_degree(p, 3, "1, 2, 3")?;
        if p == 0 {
            return Err(FdecError::InvalidDegree { degree: 0, expected: "1, 2, 3" });
        }
        self.cached(&self.m[p], "M", p, || assemble_m(&self.grid, p, self.beta))
    }

    /// Diagonal of `V_p` (ones for nodes).
    pub fn measures(&self, p: usize) -> Result<&[f64]> {
        check_degree(p, 3, "0, 1, 2, 3")?;
        if let Some(v) = self.measures[p].get() {
            return Ok(v);
        }
        let v = cell_measure_vec(&self.grid, p)?;
        let _ = self.measures[p].set(v);
        Ok(self.measures[p].get().expect("just set"))
    }

    /// `dI_p^β`.
    pub fn di(&self, p: usize) -> Result<&SparseMatrix> {
        check_degree(p, 3, "0, 1, 2, 3")?;
        self.cached(&self.di[p], "dI", p, || {
            if p == 0 {
                return Ok(SparseMatrix::identity(self.grid.num_cells(0)?));
            }
            let bm = matmul(self.b(p)?, self.m(p)?)?;
            scale_cols_by_inverse_diagonal(&bm, self.measures(p)?)
        })
    }

    /// Discrete RL derivative of order `β`.
    pub fn drld(&self, p: usize) -> Result<&SparseMatrix> {
        check_degree(p, 3, "0, 1, 2, 3")?;
        self.cached(&self.drld[p], "drlD", p, || assemble_drld(&self.grid, p, self.beta))
    }

    fn check_input(&self, p: usize, c: &Cochain) -> Result<()> {
        check_degree(p, 2, "0, 1, 2")?;
        c.check_on(&self.grid, p)
    }

    /// `D_p^α c` with `α = 1 - β`.
    pub fn apply_fdec(&self, p: usize, c: &Cochain) -> Result<Cochain> {
        self.apply_variant(Variant::Paper, p, c)
    }

    pub fn apply_variant(&self, variant: Variant, p: usize, c: &Cochain) -> Result<Cochain> {
        self.check_input(p, c)?;
        let values = match variant {
            Variant::Paper => {
                let u = if p == 0 {
                    c.values.clone()
                } else {
                    lower_triangular_solve(self.di(p)?, &c.values)?
                };
                self.di(p + 1)?.mul_vec(&self.d(p)?.mul_vec(&u)?)?
            }
            Variant::DrlDRight => {
                let u = self.drld(p)?.mul_vec(&c.values)?;
                self.di(p + 1)?.mul_vec(&self.d(p)?.mul_vec(&u)?)?
            }
            Variant::DrlDBoth => {
                let u = self.drld(p)?.mul_vec(&c.values)?;
                lower_triangular_solve(self.drld(p + 1)?, &self.d(p)?.mul_vec(&u)?)?
            }
        };
        Ok(Cochain::new(p + 1, values))
    }

    /// `D_p^α c` through the factorization
    /// `(B_{p+1} M_{p+1})(V_{p+1}^{-1} D_p V_p)(B_p M_p)^{-1}`.
    pub fn apply_fdec_mfd(&self, p: usize, c: &Cochain) -> Result<Cochain> {
        self.check_input(p, c)?;
        let u = if p == 0 {
            c.values.clone()
        } else {
            let bm = matmul(self.b(p)?, self.m(p)?)?;
            lower_triangular_solve(&bm, &c.values)?
        };
        let vu: Vec<f64> = u.iter().zip(self.measures(p)?).map(|(x, v)| x * v).collect();
        let dv = self.d(p)?.mul_vec(&vu)?;
        let w: Vec<f64> = dv.iter().zip(self.measures(p + 1)?).map(|(x, v)| x / v).collect();
        let bm1 = matmul(self.b(p + 1)?, self.m(p + 1)?)?;
        Ok(Cochain::new(p + 1, bm1.mul_vec(&w)?))
    }

    /// Fractional de Rham map `dI_p^{1-α} R_p RL^{1-α}_p ω`.
    pub fn fractional_de_rham(&self, omega: &dyn Form, quad: QuadratureSpec) -> Result<Cochain> {
        let p = omega.degree();
        check_degree(p, 3, "0, 1, 2, 3")?;
        if p == 0 {
            return de_rham(omega, &self.grid, quad);
        }
        if self.beta == 0.0 {
            return de_rham(omega, &self.grid, quad);
        }
        let r = de_rham_rl(omega, &self.grid, self.beta, quad)?;
        Ok(Cochain::new(p, self.di(p)?.mul_vec(&r.values)?))
    }
}

/// Closed-form sizes and nonzero counts on a uniform `n`-grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SparsityFormula {
    pub p: usize,
    pub n_p: usize,
    pub n0: usize,
    pub nnz_b: usize,
    pub m_rows: usize,
    pub nnz_m: usize,
}

/// Expected `B_p` and `M_p^{1+β}` shapes and nonzeros for `p ∈ {1, 2, 3}`.
pub fn sparsity_formula(n: usize, p: usize) -> Result<SparsityFormula> {
    let n1 = n + 1;
    let n0 = n1.pow(3);
    let (n_p, nnz_b, nnz_m) = match p {
        1 => (3 * n * n1 * n1, 2 * 3 * n * n1 * n1, 3 * n * n1.pow(3) / 2),
        2 => (3 * n * n * n1, 4 * 3 * n * n * n1, 3 * n * n * n1.pow(3) / 4),
        3 => (n.pow(3), 8 * n.pow(3), n.pow(3) * n1.pow(3) / 8),
        _ => {
            return Err(FdecError::InvalidDegree {
                degree: p,
                expected: "1, 2, 3",
            })
        }
    };
    let blocks = if p == 1 || p == 2 { 3 } else { 1 };
    Ok(SparsityFormula {
        p,
        n_p,
        n0,
        nnz_b,
        m_rows: blocks * n0,
        nnz_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Box3;
    use crate::forms::fields;
    use crate::sparsekit::kron;

    fn uniform(n: [usize; 3]) -> Grid3 {
        Grid3::uniform(&Box3::unit(), n).unwrap()
    }

    fn nonuniform() -> Grid3 {
        Grid3::from_axes(vec![0.0, 0.15, 0.5, 1.0], vec![0.0, 0.7, 1.0], vec![0.0, 0.25, 0.4, 0.8, 1.0]).unwrap()
    }

    #[test]
    fn kernel_entry_closed_form() {
        let m = kernel_matrix_1d(&[0.0, 0.5, 1.0], 1.5).unwrap();
        assert_eq!(m.shape(), (3, 2));
        assert_eq!(m.nnz(), 3);
        let expect = 0.5f64.powf(1.5) / gamma_fn(2.5).unwrap();
        assert!((m.get(2, 1) - expect).abs() < 1e-15);
        assert!((expect - 0.2659615).abs() < 1e-7);
        assert_eq!(m.get(1, 1), 0.0);
        for i in 0..3 {
            assert_eq!(m.row(i).0.len(), i);
        }
        assert!(m.triplets().all(|(_, _, v)| v > 0.0));
    }

    #[test]
    fn di_diagonal_closed_form() {
        let g = uniform([2, 1, 1]);
        let di = assemble_di(&g, 1, 0.5).unwrap();
        let d = 0.5f64.powf(0.5) / gamma_fn(2.5).unwrap();
        assert!((d - 0.5319).abs() < 1e-4);
        for i in 0..g.counts().n1[0] {
            assert!((di.get(i, i) - d).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_zero_collapses_to_identity() {
        for g in [uniform([3, 2, 2]), nonuniform()] {
            for p in 0..=3 {
                let di = assemble_di(&g, p, 0.0).unwrap();
                let id = SparseMatrix::identity(g.num_cells(p).unwrap());
                assert!(di.max_abs_diff(&id).unwrap() <= 1e-13, "p={p}");
            }
        }
    }

    #[test]
    fn di_is_lower_triangular_with_positive_diagonal() {
        let g = nonuniform();
        for p in 0..=3 {
            for beta in [0.1, 0.5, 0.9] {
                assemble_di(&g, p, beta).unwrap().check_lower_triangular_positive().unwrap();
                assemble_drld(&g, p, beta).unwrap().check_lower_triangular_positive().unwrap();
            }
        }
    }

    #[test]
    fn blocks_factor_as_kronecker_products() {
        // each block of B_p M_p equals the kron of per-axis B_a M_a factors
        let g = nonuniform();
        let beta = 0.35;
        let per_axis: Vec<(SparseMatrix, SparseMatrix)> = AXES
            .iter()
            .map(|&a| {
                let c = g.coords(a);
                let n = c.len() - 1;
                let mut t = TripletBuilder::new(n, n + 1);
                for j in 0..n {
                    t.push(j, j, -1.0);
                    t.push(j, j + 1, 1.0);
                }
                let bm = matmul(&t.finalize(), &kernel_matrix_1d(c, 1.0 + beta).unwrap()).unwrap();
                (bm, SparseMatrix::identity(n + 1))
            })
            .collect();
        for p in 1..=3 {
            let bm = matmul(&assemble_b(&g, p).unwrap(), &assemble_m(&g, p, beta).unwrap()).unwrap();
            let parts: Vec<SparseMatrix> = blocks(p)
                .unwrap()
                .iter()
                .map(|b| {
                    let f: Vec<&SparseMatrix> = (0..3)
                        .map(|a| if b.spans(AXES[a]) { &per_axis[a].0 } else { &per_axis[a].1 })
                        .collect();
                    kron(&kron(f[0], f[1]).unwrap(), f[2]).unwrap()
                })
                .collect();
            let expect = block_diag(&parts.iter().collect::<Vec<_>>());
            assert!(bm.max_abs_diff(&expect).unwrap() < 1e-15, "p={p}");
        }
    }

    #[test]
    fn table_counts() {
        for n in 1..=4 {
            let g = uniform([n, n, n]);
            for p in 1..=3 {
                let f = sparsity_formula(n, p).unwrap();
                let b = assemble_b(&g, p).unwrap();
                let m = assemble_m(&g, p, 0.5).unwrap();
                assert_eq!(b.shape(), (f.n_p, f.m_rows));
                assert_eq!(b.nnz(), f.nnz_b);
                assert_eq!(m.shape(), (f.m_rows, f.n_p));
                assert_eq!(m.nnz(), f.nnz_m);
            }
        }
    }

    #[test]
    fn fdec_at_alpha_one_is_incidence() {
        let g = nonuniform();
        let ops = OperatorSet::new(g.clone(), 0.0).unwrap();
        for p in 0..=2 {
            let c = Cochain::new(p, (0..g.num_cells(p).unwrap()).map(|i| (i as f64 * 0.37).sin()).collect());
            let got = ops.apply_fdec(p, &c).unwrap();
            let want = incidence(&g, p).unwrap().mul_vec(&c.values).unwrap();
            let err = got.values.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-13, "p={p}: {err}");
        }
    }

    #[test]
    fn exactness_on_random_cochains() {
        let g = nonuniform();
        for alpha in [0.25, 0.5, 0.9] {
            let ops = OperatorSet::for_alpha(g.clone(), alpha).unwrap();
            for p in 0..=1 {
                let c = Cochain::new(p, (0..g.num_cells(p).unwrap()).map(|i| (i as f64 * 1.3).cos()).collect());
                for variant in [Variant::Paper, Variant::DrlDBoth] {
                    let once = ops.apply_variant(variant, p, &c).unwrap();
                    let twice = ops.apply_variant(variant, p + 1, &once).unwrap();
                    let r: Vec<f64> = twice.values.iter().zip(ops.measures(p + 2).unwrap()).map(|(x, v)| x / v).collect();
                    assert!(crate::forms::rms(&r) <= 1e-12, "{variant} p={p} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn mfd_factorization_agrees() {
        let g = nonuniform();
        let ops = OperatorSet::for_alpha(g.clone(), 0.4).unwrap();
        for p in 0..=2 {
            let c = Cochain::new(p, (0..g.num_cells(p).unwrap()).map(|i| 1.0 + (i as f64).sqrt()).collect());
            let a = ops.apply_fdec(p, &c).unwrap();
            let b = ops.apply_fdec_mfd(p, &c).unwrap();
            let err = a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err <= 1e-11, "p={p}: {err}");
        }
    }

    #[test]
    fn input_validation() {
        let g = uniform([2, 2, 2]);
        assert!(OperatorSet::new(g.clone(), -0.1).is_err());
        assert!(OperatorSet::for_alpha(g.clone(), 1.0).is_err());
        let ops = OperatorSet::for_alpha(g.clone(), 0.5).unwrap();
        assert!(ops.apply_fdec(3, &Cochain::zeros(&g, 3).unwrap()).is_err());
        assert!(ops.apply_fdec(1, &Cochain::zeros(&g, 0).unwrap()).is_err());
        assert!(assemble_m(&g, 0, 0.5).is_err());
        assert!(assemble_drld(&g, 1, 1.0).is_err());
        assert!("paper".parse::<Variant>().is_ok());
        assert!("other".parse::<Variant>().is_err());
    }

    #[test]
    fn operator_set_matches_free_functions_and_records() {
        let g = uniform([2, 3, 2]);
        let ops = OperatorSet::new(g.clone(), 0.3).unwrap();
        for p in 0..=3 {
            assert_eq!(ops.di(p).unwrap(), &assemble_di(&g, p, 0.3).unwrap());
        }
        let recs = ops.records();
        assert!(recs.iter().any(|r| r.matrix == "dI" && r.p == 3));
    }

    #[test]
    fn fractional_de_rham_degree_zero_and_limit() {
        let g = uniform([3, 3, 3]);
        let f = fields::paper_f();
        let ops = OperatorSet::for_alpha(g.clone(), 0.5).unwrap();
        let q = QuadratureSpec::default();
        assert_eq!(ops.fractional_de_rham(&f, q).unwrap(), de_rham(&f, &g, q).unwrap());
        // α → 1: R_p^α ω → R_p ω
        let w = fields::paper_big_f(1);
        let r = de_rham(&w, &g, q).unwrap();
        let mut prev = f64::INFINITY;
        for alpha in [0.9, 0.99, 0.999] {
            let ops = OperatorSet::for_alpha(g.clone(), alpha).unwrap();
            let ra = ops.fractional_de_rham(&w, q).unwrap();
            let err = ra.values.iter().zip(&r.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2);
    }
}
