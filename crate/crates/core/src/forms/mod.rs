//! Analytic differential forms on a box, de Rham maps onto cubical
//! complexes and the continuous Caputo fractional exterior derivative.
//!
//! Components use the bases `(dx, dy, dz)` for 1-forms, `(dy∧dz, dz∧dx,
//! dx∧dy)` for 2-forms and `dx∧dy∧dz` for 3-forms, so component `i` of a
//! p-form pairs with block `i` of the p-cells.

pub mod fields;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::complex::{blocks, incidence, node_incidence_block, Axis, Box3, CellBlock, Grid3, AXES};
use crate::error::{FdecError, Result};
use crate::fraccalc::{check_alpha, gauss_legendre, FracDerivative, QuadratureSpec, RlIntegrator};

pub type ScalarFn = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;

/// One scalar component with optional analytic first partials.
#[derive(Clone)]
pub struct Component {
    pub value: ScalarFn,
    pub partials: [Option<ScalarFn>; 3],
    index: usize,
}

impl fmt::Debug for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Component")
            .field("index", &self.index)
            .field("partials", &self.partials.each_ref().map(|p| p.is_some()))
            .finish()
    }
}

impl Component {
    pub fn new(value: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            partials: [None, None, None],
            index: 0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
            .with_partial(Axis::X, |_| 0.0)
            .with_partial(Axis::Y, |_| 0.0)
            .with_partial(Axis::Z, |_| 0.0)
    }

    pub fn with_partial(mut self, axis: Axis, d: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        self.partials[axis.index()] = Some(Arc::new(d));
        self
    }

    pub fn with_gradient(
        self,
        dx: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
        dy: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
        dz: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.with_partial(Axis::X, dx)
            .with_partial(Axis::Y, dy)
            .with_partial(Axis::Z, dz)
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        (self.value)(p)
    }

    pub fn partial(&self, axis: Axis) -> Result<&ScalarFn> {
        self.partials[axis.index()].as_ref().ok_or(FdecError::MissingPartial {
            component: self.index,
            axis: axis.label(),
        })
    }
}

/// Anything that evaluates the components of a p-form.
pub trait Form: Send + Sync {
    fn degree(&self) -> usize;
    fn domain(&self) -> &Box3;
    fn component(&self, idx: usize, point: [f64; 3]) -> f64;
}

/// Number of components of a p-form in 3D.
pub fn num_components(p: usize) -> Result<usize> {
    Ok(blocks(p)?.len())
}

/// An analytic p-form given by its components.
#[derive(Clone, Debug)]
pub struct FormSpec {
    degree: usize,
    domain: Box3,
    components: Vec<Component>,
}

impl FormSpec {
    pub fn new(degree: usize, domain: Box3, components: Vec<Component>) -> Result<Self> {
        let expected = num_components(degree)?;
        if components.len() != expected {
            return Err(FdecError::InvalidArgument(format!(
                "a {degree}-form needs {expected} components, got {}",
                components.len()
            )));
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(i, mut c)| {
                c.index = i;
                c
            })
            .collect();
        Ok(Self {
            degree,
            domain,
            components,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Reinterprets the components as a form of another degree with the
    /// same number of components (1-forms and 2-forms share vector proxies).
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        Self::new(degree, self.domain, self.components.clone())
    }
}

impl Form for FormSpec {
    fn degree(&self) -> usize {
        self.degree
    }

    fn domain(&self) -> &Box3 {
        &self.domain
    }

    fn component(&self, idx: usize, point: [f64; 3]) -> f64 {
        (self.components[idx].value)(point)
    }
}

/// Basis of p-forms as ordered axis lists, matching the cell blocks.
fn basis(p: usize) -> &'static [&'static [usize]] {
    const B0: [&[usize]; 1] = [&[]];
    const B1: [&[usize]; 3] = [&[0], &[1], &[2]];
    const B2: [&[usize]; 3] = [&[1, 2], &[2, 0], &[0, 1]];
    const B3: [&[usize]; 1] = [&[0, 1, 2]];
    match p {
        0 => &B0,
        1 => &B1,
        2 => &B2,
        _ => &B3,
    }
}

fn permutation_sign(seq: &[usize], target: &[usize]) -> f64 {
    let pos: Vec<usize> = seq
        .iter()
        .map(|s| target.iter().position(|t| t == s).expect("same axis set"))
        .collect();
    let mut inversions = 0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            if pos[i] > pos[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    sign: f64,
    source: usize,
    axis: Axis,
}

/// Wedge bookkeeping for `d(a_J dx^J) = Σ_i ∂_i a_J dx^i ∧ dx^J`: for each
/// target component the signed (source, axis) pairs feeding it.
fn derivative_terms(p: usize) -> Vec<Vec<Term>> {
    let target = basis(p + 1);
    let mut out = vec![Vec::new(); target.len()];
    for (source, j) in basis(p).iter().enumerate() {
        for i in 0..3 {
            if j.contains(&i) {
                continue;
            }
            let mut seq = vec![i];
            seq.extend_from_slice(j);
            let k = target
                .iter()
                .position(|t| t.len() == seq.len() && seq.iter().all(|s| t.contains(s)))
                .expect("wedge lands in the basis");
            out[k].push(Term {
                sign: permutation_sign(&seq, target[k]),
                source,
                axis: AXES[i],
            });
        }
    }
    out
}

/// Evaluator of the Caputo fractional exterior derivative `d_p^α ω`.
pub struct DAlphaForm {
    source: FormSpec,
    terms: Vec<Vec<Term>>,
    deriv: FracDerivative,
}

impl DAlphaForm {
    pub fn alpha(&self) -> f64 {
        self.deriv.alpha()
    }
}

impl Form for DAlphaForm {
    fn degree(&self) -> usize {
        self.source.degree + 1
    }

    fn domain(&self) -> &Box3 {
        &self.source.domain
    }

    fn component(&self, idx: usize, point: [f64; 3]) -> f64 {
        let lo = self.source.domain.lo;
        self.terms[idx]
            .iter()
            .map(|t| {
                let a = t.axis.index();
                let d = self.source.components[t.source].partials[a]
                    .as_ref()
                    .expect("checked at construction");
                let v = self.deriv.caputo_unchecked(
                    |s| {
                        let mut q = point;
                        q[a] = s;
                        d(q)
                    },
                    lo[a],
                    point[a],
                );
                t.sign * v
            })
            .sum()
    }
}

/// Builds `d_p^α ω` for `p ≤ 2` and `α ∈ (0, 1]`; `α = 1` gives the
/// classical exterior derivative (grad, curl, div).
pub fn continuous_d_alpha(omega: &FormSpec, alpha: f64, quad: QuadratureSpec) -> Result<DAlphaForm> {
    if omega.degree > 2 {
        return Err(FdecError::InvalidDegree {
            degree: omega.degree,
            expected: "0, 1, 2",
        });
    }
    if alpha != 1.0 {
        check_alpha(alpha)?;
    }
    let terms = derivative_terms(omega.degree);
    for t in terms.iter().flatten() {
        omega.components[t.source].partial(t.axis)?;
    }
    Ok(DAlphaForm {
        source: omega.clone(),
        terms,
        deriv: FracDerivative::new(alpha, quad)?,
    })
}

/// Discrete p-form: one real value per p-cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl Cochain {
    pub fn new(degree: usize, values: Vec<f64>) -> Self {
        Self { degree, values }
    }

    pub fn zeros(grid: &Grid3, degree: usize) -> Result<Self> {
        Ok(Self::new(degree, vec![0.0; grid.num_cells(degree)?]))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_on(&self, grid: &Grid3, degree: usize) -> Result<()> {
        let n = grid.num_cells(degree)?;
        if self.degree != degree || self.values.len() != n {
            return Err(FdecError::InvalidArgument(format!(
                "expected a {degree}-cochain of length {n}, got degree {} with length {}",
                self.degree,
                self.values.len()
            )));
        }
        Ok(())
    }
}

fn check_grid_in_domain(grid: &Grid3, domain: &Box3) -> Result<()> {
    let b = grid.bounds();
    for a in 0..3 {
        let tol = 1e-12 * (domain.hi[a] - domain.lo[a]);
        if b.lo[a] < domain.lo[a] - tol || b.hi[a] > domain.hi[a] + tol {
            return Err(FdecError::InvalidGrid(format!(
                "grid bounds {:?}..{:?} exceed the form's domain {:?}..{:?}",
                b.lo, b.hi, domain.lo, domain.hi
            )));
        }
    }
    Ok(())
}

const GRADING_RATIO: f64 = 0.15;
const GRADING_LEVELS: i32 = 6;
/// Nodes per graded sub-panel; the integrand is smooth on each of them.
const GRADED_POINTS: usize = 8;

fn push_panel(out: &mut Vec<(f64, f64)>, lo: f64, hi: f64, gl: &[(f64, f64)]) {
    let half = 0.5 * (hi - lo);
    let mid = lo + half;
    out.extend(gl.iter().map(|&(t, w)| (mid + half * t, half * w)));
}

/// Composite Gauss–Legendre nodes and weights for one cell axis. A panel
/// touching the domain's lower face is geometrically graded towards it,
/// since fractional derivatives behave like `t^{1-α}` there.
fn cell_axis_rule(
    lo: f64,
    hi: f64,
    domain_lo: f64,
    domain_len: f64,
    quad: &QuadratureSpec,
    gl: &[(f64, f64)],
    graded: &[(f64, f64)],
) -> Vec<(f64, f64)> {
    let target = domain_len / quad.panels as f64;
    let sub = (((hi - lo) / target) - 1e-9).ceil().max(1.0) as usize;
    let len = (hi - lo) / sub as f64;
    let mut out = Vec::with_capacity((sub + GRADING_LEVELS as usize) * gl.len());
    for s in 0..sub {
        let a = lo + s as f64 * len;
        if s == 0 && lo == domain_lo {
            push_panel(&mut out, a, a + len * GRADING_RATIO.powi(GRADING_LEVELS), graded);
            for k in (0..GRADING_LEVELS).rev() {
                push_panel(&mut out, a + len * GRADING_RATIO.powi(k + 1), a + len * GRADING_RATIO.powi(k), graded);
            }
        } else {
            push_panel(&mut out, a, a + len, gl);
        }
    }
    out
}

fn tensor_sum(rules: &[Vec<(f64, f64)>; 3], f: impl Fn([f64; 3]) -> f64) -> f64 {
    let mut sum = 0.0;
    for &(x, wx) in &rules[0] {
        for &(y, wy) in &rules[1] {
            let mut inner = 0.0;
            for &(z, wz) in &rules[2] {
                inner += wz * f([x, y, z]);
            }
            sum += wx * wy * inner;
        }
    }
    sum
}

/// De Rham map `R_p`: integrates the form over every p-cell with tensor
/// Gauss–Legendre (`quad.points` nodes per axis, cells longer than
/// `domain / quad.panels` split further). Nodes are point evaluations.
pub fn de_rham(omega: &dyn Form, grid: &Grid3, quad: QuadratureSpec) -> Result<Cochain> {
    quad.validate()?;
    let p = omega.degree();
    check_grid_in_domain(grid, omega.domain())?;
    let domain = *omega.domain();
    let gl = gauss_legendre(quad.points)?;
    let gl: Vec<(f64, f64)> = gl.nodes.iter().copied().zip(gl.weights.iter().copied()).collect();
    let graded = gauss_legendre(quad.points.min(GRADED_POINTS))?;
    let graded: Vec<(f64, f64)> = graded.nodes.iter().copied().zip(graded.weights.iter().copied()).collect();
    let mut values = Vec::with_capacity(grid.num_cells(p)?);
    for (ci, block) in blocks(p)?.iter().enumerate() {
        let positions: Vec<[usize; 3]> = grid.block_positions(*block).collect();
        let part: Vec<f64> = positions
            .par_iter()
            .map(|pos| {
                let rules: [Vec<(f64, f64)>; 3] = [0, 1, 2].map(|a| {
                    let c = grid.coords(AXES[a]);
                    if block.spans(AXES[a]) {
                        cell_axis_rule(c[pos[a]], c[pos[a] + 1], domain.lo[a], domain.hi[a] - domain.lo[a], &quad, &gl, &graded)
                    } else {
                        vec![(c[pos[a]], 1.0)]
                    }
                });
                tensor_sum(&rules, |q| omega.component(ci, q))
            })
            .collect();
        values.extend(part);
    }
    Ok(Cochain::new(p, values))
}

/// Node values of the iterated fractional integral `I^β` of each component,
/// taken along the axes its block spans (`β = 0` means plain evaluation).
pub fn rl_node_potentials(omega: &dyn Form, grid: &Grid3, beta: f64, quad: QuadratureSpec) -> Result<Vec<Vec<f64>>> {
    check_grid_in_domain(grid, omega.domain())?;
    let p = omega.degree();
    let lo = omega.domain().lo;
    let integ = if p > 0 { Some(RlIntegrator::new(beta, quad)?) } else { None };
    let nodes: Vec<[usize; 3]> = grid.block_positions(CellBlock::new([false; 3])).collect();
    blocks(p)?
        .iter()
        .enumerate()
        .map(|(ci, block)| {
            let vals = nodes
                .par_iter()
                .map(|pos| {
                    let rules: [Vec<(f64, f64)>; 3] = [0, 1, 2].map(|a| {
                        let x = grid.coords(AXES[a])[pos[a]];
                        match (&integ, block.spans(AXES[a])) {
                            (Some(integ), true) => integ.rule(lo[a], x),
                            _ => vec![(x, 1.0)],
                        }
                    });
                    tensor_sum(&rules, |q| omega.component(ci, q))
                })
                .collect();
            Ok(vals)
        })
        .collect()
}

/// `R_p(RL^γ ω)` for `γ ∈ (0, 1)`, where every component is differentiated
/// along each axis of its block. Uses `RL^γ = ∂ I^{1-γ}` so each cell value
/// is a signed corner sum of the potentials from [`rl_node_potentials`].
pub fn de_rham_rl(omega: &dyn Form, grid: &Grid3, gamma: f64, quad: QuadratureSpec) -> Result<Cochain> {
    let p = omega.degree();
    if p == 0 {
        return de_rham(omega, grid, quad);
    }
    check_alpha(gamma)?;
    let potentials = rl_node_potentials(omega, grid, 1.0 - gamma, quad)?;
    let d0 = incidence(grid, 0)?;
    let mut values = Vec::with_capacity(grid.num_cells(p)?);
    for (block, pot) in blocks(p)?.iter().zip(&potentials) {
        values.extend(node_incidence_block(grid, &d0, *block)?.mul_vec(pot)?);
    }
    Ok(Cochain::new(p, values))
}

/// `RMS(V^{-1}(a - b))` with `measures` the diagonal of `V`.
pub fn rms_error_cochain(a: &Cochain, b: &Cochain, measures: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() != measures.len() {
        return Err(FdecError::DimensionMismatch {
            op: "rms_error_cochain",
            lhs: (a.len(), b.len()),
            rhs: (measures.len(), 1),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for ((x, y), v) in a.values.iter().zip(&b.values).zip(measures) {
        if !(*v > 0.0) {
            return Err(FdecError::InvalidArgument(format!("non-positive cell measure {v}")));
        }
        let r = (x - y) / v;
        sum += r * r;
    }
    Ok((sum / a.len() as f64).sqrt())
}

/// `RMS(x)` of a plain vector.
pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}
