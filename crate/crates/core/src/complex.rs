//! Regular 3D cubical complexes: cell enumeration, orientation and incidence.
//!
//! Every p-cell is an axis-aligned box spanning a subset `S` of the three
//! axes (|S| = p). Cells sharing the same `S` form a [`CellBlock`]; within a
//! block cells are ordered lexicographically by their lower corner with `x`
//! slowest and `z` fastest. Degrees are laid out block after block:
//!
//! | p | blocks             | orientation                       |
//! |---|--------------------|-----------------------------------|
//! | 0 | nodes              |                                   |
//! | 1 | x, y, z edges      | along the positive axis           |
//! | 2 | yz, xz, xy faces   | normal along the missing axis     |
//! | 3 | volumes            | outward                           |
//!
//! Face orientations correspond to the bases `dy∧dz`, `dz∧dx`, `dx∧dy`.
//! With this layout the node-to-cell maps factor as Kronecker products of
//! one-dimensional matrices with `x` as the slowest factor.

use crate::error::{FdecError, Result};
use crate::sparsekit::{vstack, SparseMatrix, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

pub const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        ['x', 'y', 'z'][self as usize]
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        AXES.get(i).copied()
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Box3 {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if !(lo[a].is_finite() && hi[a].is_finite() && lo[a] < hi[a]) {
                return Err(FdecError::InvalidGrid(format!(
                    "degenerate bounds [{}, {}] on axis {}",
                    lo[a],
                    hi[a],
                    AXES[a].label()
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self {
            lo: [0.0; 3],
            hi: [1.0; 3],
        }
    }

    pub fn length(&self, axis: Axis) -> f64 {
        self.hi[axis.index()] - self.lo[axis.index()]
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }
}

/// A family of same-shaped cells, identified by the axes they span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellBlock {
    span: [bool; 3],
}

impl CellBlock {
    pub const fn new(span: [bool; 3]) -> Self {
        Self { span }
    }

    pub fn spans(&self, axis: Axis) -> bool {
        self.span[axis.index()]
    }

    pub fn span(&self) -> [bool; 3] {
        self.span
    }

    pub fn degree(&self) -> usize {
        self.span.iter().filter(|&&s| s).count()
    }

    /// Spanned axes in increasing order.
    pub fn axes(&self) -> Vec<Axis> {
        AXES.iter().copied().filter(|&a| self.spans(a)).collect()
    }

    /// Sign of this block's orientation relative to the increasing-axis
    /// orientation `dx^{i1} ∧ dx^{i2} ∧ ...`.
    pub fn orientation(&self) -> i8 {
        // xz faces carry dz∧dx = -dx∧dz
        if self.span == [true, false, true] {
            -1
        } else {
            1
        }
    }

    pub fn name(&self) -> String {
        match self.degree() {
            0 => "node".into(),
            3 => "xyz".into(),
            _ => self.axes().iter().map(|a| a.label()).collect(),
        }
    }
}

const NODE_BLOCKS: [CellBlock; 1] = [CellBlock::new([false, false, false])];
const EDGE_BLOCKS: [CellBlock; 3] = [
    CellBlock::new([true, false, false]),
    CellBlock::new([false, true, false]),
    CellBlock::new([false, false, true]),
];
const FACE_BLOCKS: [CellBlock; 3] = [
    CellBlock::new([false, true, true]),
    CellBlock::new([true, false, true]),
    CellBlock::new([true, true, false]),
];
const VOLUME_BLOCKS: [CellBlock; 1] = [CellBlock::new([true, true, true])];

/// Block layout of the p-cells.
pub fn blocks(p: usize) -> Result<&'static [CellBlock]> {
    match p {
        0 => Ok(&NODE_BLOCKS),
        1 => Ok(&EDGE_BLOCKS),
        2 => Ok(&FACE_BLOCKS),
        3 => Ok(&VOLUME_BLOCKS),
        _ => Err(FdecError::InvalidDegree {
            degree: p,
            expected: "0, 1, 2, 3",
        }),
    }
}

fn block_position(p: usize, span: [bool; 3]) -> usize {
    blocks(p)
        .expect("valid degree")
        .iter()
        .position(|b| b.span == span)
        .expect("every span of size p has a block")
}

/// Human-readable label of a cell: its block and lower-corner index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellLabel {
    pub block: CellBlock,
    pub pos: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCounts {
    pub n0: usize,
    /// x, y, z edges.
    pub n1: [usize; 3],
    /// yz, xz, xy faces.
    pub n2: [usize; 3],
    pub n3: usize,
}

impl CellCounts {
    pub fn total(&self, p: usize) -> usize {
        match p {
            0 => self.n0,
            1 => self.n1.iter().sum(),
            2 => self.n2.iter().sum(),
            3 => self.n3,
            _ => 0,
        }
    }
}

/// The tensor-product partition of a box into cuboids.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    axes: [Vec<f64>; 3],
}

impl Grid3 {
    /// Uniform subdivision of `bounds`.
    pub fn uniform(bounds: &Box3, subdivisions: [usize; 3]) -> Result<Self> {
        let mut axes: [Vec<f64>; 3] = Default::default();
        for a in 0..3 {
            let n = subdivisions[a];
            if n == 0 {
                return Err(FdecError::InvalidGrid(format!(
                    "axis {} needs at least one subdivision",
                    AXES[a].label()
                )));
            }
            let (lo, hi) = (bounds.lo[a], bounds.hi[a]);
            axes[a] = (0..=n)
                .map(|i| {
                    if i == n {
                        hi
                    } else {
                        lo + (hi - lo) * (i as f64) / (n as f64)
                    }
                })
                .collect();
        }
        Self::from_axes(axes[0].clone(), axes[1].clone(), axes[2].clone())
    }

    /// Explicit, possibly nonuniform, axis partitions.
    pub fn from_axes(xs: Vec<f64>, ys: Vec<f64>, zs: Vec<f64>) -> Result<Self> {
        let axes = [xs, ys, zs];
        for (a, coords) in axes.iter().enumerate() {
            if coords.len() < 2 {
                return Err(FdecError::InvalidGrid(format!(
                    "axis {} needs at least two coordinates",
                    AXES[a].label()
                )));
            }
            if coords.iter().any(|c| !c.is_finite()) {
                return Err(FdecError::InvalidGrid(format!(
                    "axis {} has non-finite coordinates",
                    AXES[a].label()
                )));
            }
            if let Some(w) = coords.windows(2).find(|w| !(w[0] < w[1])) {
                return Err(FdecError::InvalidGrid(format!(
                    "axis {} is not strictly increasing at {} -> {}",
                    AXES[a].label(),
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { axes })
    }

    pub fn coords(&self, axis: Axis) -> &[f64] {
        &self.axes[axis.index()]
    }

    /// Subdivision counts `(n_x, n_y, n_z)`.
    pub fn n(&self) -> [usize; 3] {
        [
            self.axes[0].len() - 1,
            self.axes[1].len() - 1,
            self.axes[2].len() - 1,
        ]
    }

    pub fn bounds(&self) -> Box3 {
        Box3 {
            lo: [self.axes[0][0], self.axes[1][0], self.axes[2][0]],
            hi: [
                *self.axes[0].last().unwrap(),
                *self.axes[1].last().unwrap(),
                *self.axes[2].last().unwrap(),
            ],
        }
    }

    /// Number of cells along each axis for a block.
    pub fn block_dims(&self, block: CellBlock) -> [usize; 3] {
        let n = self.n();
        [0, 1, 2].map(|a| if block.span[a] { n[a] } else { n[a] + 1 })
    }

    pub fn block_len(&self, block: CellBlock) -> usize {
        self.block_dims(block).iter().product()
    }

    pub fn counts(&self) -> CellCounts {
        let len = |b: &CellBlock| self.block_len(*b);
        CellCounts {
            n0: len(&NODE_BLOCKS[0]),
            n1: [len(&EDGE_BLOCKS[0]), len(&EDGE_BLOCKS[1]), len(&EDGE_BLOCKS[2])],
            n2: [len(&FACE_BLOCKS[0]), len(&FACE_BLOCKS[1]), len(&FACE_BLOCKS[2])],
            n3: len(&VOLUME_BLOCKS[0]),
        }
    }

    pub fn num_cells(&self, p: usize) -> Result<usize> {
        Ok(blocks(p)?.iter().map(|b| self.block_len(*b)).sum())
    }

    /// Offset of block `b` within the degree-`p` numbering.
    pub fn block_offset(&self, p: usize, b: usize) -> Result<usize> {
        Ok(blocks(p)?[..b].iter().map(|bl| self.block_len(*bl)).sum())
    }

    /// Index of a cell within its block.
    pub fn local_index(&self, block: CellBlock, pos: [usize; 3]) -> usize {
        let d = self.block_dims(block);
        debug_assert!(pos[0] < d[0] && pos[1] < d[1] && pos[2] < d[2]);
        (pos[0] * d[1] + pos[1]) * d[2] + pos[2]
    }

    pub fn node_index(&self, pos: [usize; 3]) -> usize {
        self.local_index(NODE_BLOCKS[0], pos)
    }

    /// Global (within degree) index of a cell; `None` if the position is
    /// outside the block.
    pub fn cell_index(&self, p: usize, b: usize, pos: [usize; 3]) -> Option<usize> {
        let block = *blocks(p).ok()?.get(b)?;
        let d = self.block_dims(block);
        if (0..3).any(|a| pos[a] >= d[a]) {
            return None;
        }
        Some(self.block_offset(p, b).ok()? + self.local_index(block, pos))
    }

    /// Inverse of [`Grid3::cell_index`].
    pub fn cell_label(&self, p: usize, index: usize) -> Result<CellLabel> {
        let mut rest = index;
        for block in blocks(p)? {
            let len = self.block_len(*block);
            if rest < len {
                let d = self.block_dims(*block);
                let k = rest % d[2];
                let j = (rest / d[2]) % d[1];
                let i = rest / (d[1] * d[2]);
                return Ok(CellLabel {
                    block: *block,
                    pos: [i, j, k],
                });
            }
            rest -= len;
        }
        Err(FdecError::InvalidArgument(format!(
            "cell index {index} out of range for degree {p}"
        )))
    }

    /// Iterates the positions of a block in storage order.
    pub fn block_positions(&self, block: CellBlock) -> impl Iterator<Item = [usize; 3]> {
        let d = self.block_dims(block);
        (0..d[0]).flat_map(move |i| (0..d[1]).flat_map(move |j| (0..d[2]).map(move |k| [i, j, k])))
    }

    /// Length, area or volume of a cell (1 for nodes).
    pub fn measure(&self, block: CellBlock, pos: [usize; 3]) -> f64 {
        let mut m = 1.0;
        for a in 0..3 {
            if block.span[a] {
                m *= self.axes[a][pos[a] + 1] - self.axes[a][pos[a]];
            }
        }
        m
    }
}

/// Coboundary matrix `D_p` of shape `n_{p+1} × n_p`, `p ∈ {0, 1, 2}`.
pub fn incidence(grid: &Grid3, p: usize) -> Result<SparseMatrix> {
    if p > 2 {
        return Err(FdecError::InvalidDegree {
            degree: p,
            expected: "0, 1, 2",
        });
    }
    let nrows = grid.num_cells(p + 1)?;
    let ncols = grid.num_cells(p)?;
    let mut trip = TripletBuilder::with_capacity(nrows, ncols, 2 * (p + 1) * nrows);
    let mut row = 0;
    for block in blocks(p + 1)? {
        let axes = block.axes();
        for pos in grid.block_positions(*block) {
            for (rank, &a) in axes.iter().enumerate() {
                let mut face_span = block.span;
                face_span[a.index()] = false;
                let fb = block_position(p, face_span);
                let face = blocks(p)?[fb];
                let base = block.orientation()
                    * face.orientation()
                    * if rank % 2 == 0 { 1 } else { -1 };
                let mut upper = pos;
                upper[a.index()] += 1;
                let lo = grid.cell_index(p, fb, pos).expect("lower face in range");
                let hi = grid.cell_index(p, fb, upper).expect("upper face in range");
                trip.push(row, hi, f64::from(base));
                trip.push(row, lo, -f64::from(base));
            }
            row += 1;
        }
    }
    Ok(trip.finalize())
}

/// One block of the generalized incidence matrix `D_{0→q}`: rows are the
/// q-cells of `block`, columns all nodes.
///
/// For `q = 1` the rows are taken from `D_0`. For `q ≥ 2` the entry at a
/// corner node is the product of the `D_0` entries of the cell's edges that
/// meet at that node.
pub fn node_incidence_block(grid: &Grid3, d0: &SparseMatrix, block: CellBlock) -> Result<SparseMatrix> {
    let q = block.degree();
    if q == 0 {
        return Err(FdecError::InvalidDegree {
            degree: 0,
            expected: "1, 2, 3",
        });
    }
    let n0 = grid.num_cells(0)?;
    let axes = block.axes();
    let mut trip = TripletBuilder::with_capacity(grid.block_len(block), n0, grid.block_len(block) << q);
    for (row, pos) in grid.block_positions(block).enumerate() {
        for corner in 0..(1usize << q) {
            let mut node = pos;
            for (bit, &a) in axes.iter().enumerate() {
                if corner >> bit & 1 == 1 {
                    node[a.index()] += 1;
                }
            }
            let node_idx = grid.node_index(node);
            let mut sign = 1.0;
            for &a in &axes {
                // the cell's edge along `a` through this corner starts at
                // the corner's projection onto the lower side of `a`
                let mut start = node;
                start[a.index()] = pos[a.index()];
                let eb = a.index();
                let edge = grid.cell_index(1, eb, start).expect("edge in range");
                sign *= d0.get(edge, node_idx);
            }
            debug_assert!(sign != 0.0);
            trip.push(row, node_idx, sign);
        }
    }
    Ok(trip.finalize())
}

/// Generalized incidence `D_{0→q}` for `q ∈ {2, 3}`, stacked by block.
pub fn generalized_incidence(grid: &Grid3, q: usize) -> Result<SparseMatrix> {
    if !(2..=3).contains(&q) {
        return Err(FdecError::InvalidDegree {
            degree: q,
            expected: "2, 3",
        });
    }
    let d0 = incidence(grid, 0)?;
    let parts = blocks(q)?
        .iter()
        .map(|b| node_incidence_block(grid, &d0, *b))
        .collect::<Result<Vec<_>>>()?;
    vstack(&parts.iter().collect::<Vec<_>>())
}

/// Cell measures of every p-cell, in storage order.
pub fn cell_measure_vec(grid: &Grid3, p: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.num_cells(p)?);
    for block in blocks(p)? {
        out.extend(grid.block_positions(*block).map(|pos| grid.measure(*block, pos)));
    }
    Ok(out)
}

/// Diagonal matrix `V_p` of cell measures, `p ∈ {1, 2, 3}`.
pub fn cell_measures(grid: &Grid3, p: usize) -> Result<SparseMatrix> {
    if !(1..=3).contains(&p) {
        return Err(FdecError::InvalidDegree {
            degree: p,
            expected: "1, 2, 3",
        });
    }
    Ok(SparseMatrix::from_diagonal(&cell_measure_vec(grid, p)?))
}

/// Triplet CSV dump of an incidence-like matrix.
pub fn dump_triplets(m: &SparseMatrix) -> String {
    crate::sparsekit::to_triplet_csv(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsekit::matmul;

    fn unit(n: [usize; 3]) -> Grid3 {
        Grid3::uniform(&Box3::unit(), n).unwrap()
    }

    #[test]
    fn counts_match_closed_forms() {
        let g = unit([3, 2, 2]);
        let c = g.counts();
        assert_eq!(c.n0, 36);
        assert_eq!(c.n3, 12);
        let g = unit([1, 1, 1]);
        assert_eq!(
            (0..4).map(|p| g.num_cells(p).unwrap()).collect::<Vec<_>>(),
            vec![8, 12, 6, 1]
        );
        assert_eq!(unit([4, 4, 4]).num_cells(1).unwrap(), 300);
    }

    #[test]
    fn counts_match_brute_force_enumeration() {
        for nx in 1..=4 {
            for ny in 1..=4 {
                for nz in 1..=4 {
                    let g = unit([nx, ny, nz]);
                    let n = [nx, ny, nz];
                    // enumerate cells as (lower corner, span) pairs inside the box
                    let mut brute = [0usize; 4];
                    for mask in 0..8usize {
                        let span = [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
                        let p = span.iter().filter(|&&s| s).count();
                        for i in 0..=nx {
                            for j in 0..=ny {
                                for k in 0..=nz {
                                    let pos = [i, j, k];
                                    if (0..3).all(|a| !span[a] || pos[a] < n[a]) {
                                        brute[p] += 1;
                                    }
                                }
                            }
                        }
                    }
                    let c = g.counts();
                    assert_eq!(c.n0, (nx + 1) * (ny + 1) * (nz + 1));
                    assert_eq!(c.n1, [nx * (ny + 1) * (nz + 1), (nx + 1) * ny * (nz + 1), (nx + 1) * (ny + 1) * nz]);
                    assert_eq!(c.n2, [(nx + 1) * ny * nz, nx * (ny + 1) * nz, nx * ny * (nz + 1)]);
                    assert_eq!(c.n3, nx * ny * nz);
                    for p in 0..4 {
                        assert_eq!(g.num_cells(p).unwrap(), brute[p]);
                    }
                }
            }
        }
    }

    #[test]
    fn indexing_is_a_bijection() {
        let g = unit([3, 2, 4]);
        for p in 0..4 {
            let n = g.num_cells(p).unwrap();
            for idx in 0..n {
                let lab = g.cell_label(p, idx).unwrap();
                let b = blocks(p).unwrap().iter().position(|x| *x == lab.block).unwrap();
                assert_eq!(g.cell_index(p, b, lab.pos), Some(idx));
            }
            assert!(g.cell_label(p, n).is_err());
        }
        assert_eq!(g.node_index([1, 0, 2]), 3 * 5 + 2);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Grid3::from_axes(vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Grid3::from_axes(vec![0.0], vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Grid3::from_axes(vec![0.0, 1.0, 0.5], vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Grid3::uniform(&Box3::unit(), [0, 1, 1]).is_err());
        assert!(Box3::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn d0_rows_are_node_differences() {
        let g = unit([1, 1, 1]);
        let d0 = incidence(&g, 0).unwrap();
        for i in 0..d0.nrows() {
            let (cols, vals) = d0.row(i);
            assert_eq!(cols.len(), 2);
            assert_eq!(vals.iter().sum::<f64>(), 0.0);
        }
        let g = unit([2, 1, 1]);
        let d0 = incidence(&g, 0).unwrap();
        assert_eq!(d0.shape(), (20, 12));
        assert_eq!(d0.nnz(), 40);
    }

    #[test]
    fn d0_is_head_minus_tail() {
        let g = Grid3::from_axes(vec![0.0, 0.3, 1.0], vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        let d0 = incidence(&g, 0).unwrap();
        let c: Vec<f64> = (0..g.num_cells(0).unwrap()).map(|i| (i * i) as f64 * 0.1).collect();
        let dc = d0.mul_vec(&c).unwrap();
        for e in 0..g.num_cells(1).unwrap() {
            let lab = g.cell_label(1, e).unwrap();
            let a = lab.block.axes()[0].index();
            let mut head = lab.pos;
            head[a] += 1;
            let expect = c[g.node_index(head)] - c[g.node_index(lab.pos)];
            assert_eq!(dc[e], expect);
        }
    }

    #[test]
    fn coboundary_squares_to_zero() {
        for n in [[1, 1, 1], [2, 3, 1], [3, 3, 3]] {
            let g = unit(n);
            let d0 = incidence(&g, 0).unwrap();
            let d1 = incidence(&g, 1).unwrap();
            let d2 = incidence(&g, 2).unwrap();
            assert_eq!(matmul(&d1, &d0).unwrap().nnz(), 0);
            assert_eq!(matmul(&d2, &d1).unwrap().nnz(), 0);
            assert_eq!(d1.nnz(), 4 * g.num_cells(2).unwrap());
            assert_eq!(d2.nnz(), 6 * g.num_cells(3).unwrap());
        }
        assert!(incidence(&unit([1, 1, 1]), 3).is_err());
    }

    #[test]
    fn unit_face_corner_signs() {
        let g = unit([1, 1, 1]);
        let b2 = generalized_incidence(&g, 2).unwrap();
        // first yz face at x = 0; corners ordered (j,k) = 00, 01, 10, 11
        let row: Vec<f64> = [[0, 0, 0], [0, 0, 1], [0, 1, 0], [0, 1, 1]]
            .iter()
            .map(|&p| b2.get(0, g.node_index(p)))
            .collect();
        assert_eq!(row, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(b2.nnz(), 4 * g.num_cells(2).unwrap());
        let b3 = generalized_incidence(&g, 3).unwrap();
        assert_eq!(b3.nnz(), 8);
        let (cols, vals) = b3.row(0);
        assert_eq!(vals.iter().sum::<f64>(), 0.0);
        for (&c, &v) in cols.iter().zip(vals) {
            let lab = g.cell_label(0, c).unwrap();
            let upper = lab.pos.iter().sum::<usize>() as i32;
            assert_eq!(v, if (3 - upper) % 2 == 0 { 1.0 } else { -1.0 });
        }
        assert!(generalized_incidence(&g, 1).is_err());
    }

    #[test]
    fn measures() {
        let g = unit([4, 4, 4]);
        let v1 = cell_measures(&g, 1).unwrap();
        assert!(v1.diagonal().iter().all(|&d| d == 0.25));
        let v3 = cell_measures(&g, 3).unwrap();
        assert!(v3.diagonal().iter().all(|&d| d == 0.015625));
        let g = Grid3::from_axes(vec![0.0, 0.1, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let v = cell_measure_vec(&g, 1).unwrap();
        let nx = g.counts().n1[0];
        assert_eq!(nx, 8);
        assert_eq!(&v[..4], &[0.1; 4]);
        assert!((v[4] - 0.9).abs() < 1e-15);
        assert!(cell_measures(&g, 0).is_err());
    }
}
