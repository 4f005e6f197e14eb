//! Finite groups, their representations, and orbit decomposition of weighted
//! datasets.
//!
//! Continuous symmetries (SO(2), E(2), ...) are modelled by a finite subgroup
//! that maps the dataset onto itself; orbit sums then replace orbit integrals.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dataset::{PointKind, WeightedDataset};
use crate::error::{Error, Result};

/// Default matching tolerance for orbit decomposition.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest `n` accepted for `symmetric:<n>` (8! = 40320 elements).
pub const MAX_SYMMETRIC_ORDER: usize = 7;

const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    pub index: usize,
    pub description: String,
}

/// How one group element acts on the input space.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// `x -> linear * x + offset`. Acts on vectors, or row-wise on matrices.
    Affine { linear: DMatrix<f64>, offset: DVector<f64> },
    /// `out[perm[i]] = in[i]`. Acts on vector coordinates, or on matrix rows.
    Permutation(Vec<usize>),
}

impl Representation {
    pub fn linear(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Representation::Affine { linear: m, offset: DVector::zeros(n) }
    }

    fn identity_like(&self) -> Self {
        match self {
            Representation::Affine { linear, .. } => {
                Representation::linear(DMatrix::identity(linear.nrows(), linear.ncols()))
            }
            Representation::Permutation(p) => Representation::Permutation((0..p.len()).collect()),
        }
    }

    /// `self ∘ other`, i.e. apply `other` first.
    fn compose(&self, other: &Representation) -> Result<Representation> {
        match (self, other) {
            (
                Representation::Affine { linear: a, offset: s },
                Representation::Affine { linear: b, offset: t },
            ) => Ok(Representation::Affine { linear: a * b, offset: a * t + s }),
            (Representation::Permutation(p), Representation::Permutation(q)) => {
                Ok(Representation::Permutation(q.iter().map(|&i| p[i]).collect()))
            }
            _ => Err(Error::invalid("cannot compose affine and permutation representations")),
        }
    }

    fn approx_eq(&self, other: &Representation, tol: f64) -> bool {
        match (self, other) {
            (
                Representation::Affine { linear: a, offset: s },
                Representation::Affine { linear: b, offset: t },
            ) => {
                a.shape() == b.shape()
                    && (a - b).amax() <= tol
                    && s.len() == t.len()
                    && (s - t).amax() <= tol
            }
            (Representation::Permutation(p), Representation::Permutation(q)) => p == q,
            _ => false,
        }
    }

    fn apply_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Representation::Affine { linear, offset } => {
                if linear.ncols() != x.len() {
                    return Err(Error::ShapeMismatch { expected: linear.ncols(), actual: x.len() });
                }
                let y = linear * DVector::from_column_slice(x) + offset;
                Ok(y.iter().copied().collect())
            }
            Representation::Permutation(p) => {
                if p.len() != x.len() {
                    return Err(Error::ShapeMismatch { expected: p.len(), actual: x.len() });
                }
                let mut out = vec![0.0; x.len()];
                for (i, &pi) in p.iter().enumerate() {
                    out[pi] = x[i];
                }
                Ok(out)
            }
        }
    }

    fn apply_rows(&self, x: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
        if x.len() != rows * cols {
            return Err(Error::ShapeMismatch { expected: rows * cols, actual: x.len() });
        }
        match self {
            Representation::Affine { .. } => {
                let mut out = Vec::with_capacity(x.len());
                for row in x.chunks(cols) {
                    out.extend(self.apply_vector(row)?);
                }
                Ok(out)
            }
            Representation::Permutation(p) => {
                if p.len() != rows {
                    return Err(Error::ShapeMismatch { expected: p.len(), actual: rows });
                }
                let mut out = vec![0.0; x.len()];
                for (i, &pi) in p.iter().enumerate() {
                    out[pi * cols..(pi + 1) * cols].copy_from_slice(&x[i * cols..(i + 1) * cols]);
                }
                Ok(out)
            }
        }
    }
}

/// Which space a group element should act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Input,
    Output,
}

/// The supported group families, parsed from the CLI grammar
/// `cyclic:<n>`, `dihedral:<n>`, `symmetric:<n>`, `reflect-x`, `z-swap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupDescriptor {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric(usize),
    ReflectX,
    ZSwap,
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnsupportedGroup(s.to_string());
        match s.trim() {
            "reflect-x" => return Ok(GroupDescriptor::ReflectX),
            "z-swap" => return Ok(GroupDescriptor::ZSwap),
            _ => {}
        }
        let (family, order) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: usize = order.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::invalid("group order must be at least 1"));
        }
        match family {
            "cyclic" => Ok(GroupDescriptor::Cyclic(n)),
            "dihedral" => Ok(GroupDescriptor::Dihedral(n)),
            "symmetric" => Ok(GroupDescriptor::Symmetric(n)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupDescriptor::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupDescriptor::Symmetric(n) => write!(f, "symmetric:{n}"),
            GroupDescriptor::ReflectX => write!(f, "reflect-x"),
            GroupDescriptor::ZSwap => write!(f, "z-swap"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteGroup {
    pub name: String,
    pub elements: Vec<GroupElement>,
    pub input_rep: Vec<Representation>,
    /// Linear action on outputs; `None` means the group acts trivially
    /// (invariant models).
    pub output_rep: Option<Vec<DMatrix<f64>>>,
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn reflection_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// All permutations of `0..n` in lexicographic order (identity first).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Cycle notation with 1-based labels, e.g. `(1 2)(3 4)`; `e` for identity.
fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut s = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = vec![start + 1];
        seen[start] = true;
        let mut k = p[start];
        while k != start {
            seen[k] = true;
            cycle.push(k + 1);
            k = p[k];
        }
        let body: Vec<String> = cycle.iter().map(|c| c.to_string()).collect();
        s.push_str(&format!("({})", body.join(" ")));
    }
    if s.is_empty() {
        "e".to_string()
    } else {
        s
    }
}

/// Builds one of the supported groups.
pub fn build_group(descriptor: GroupDescriptor) -> Result<FiniteGroup> {
    let mut elements = Vec::new();
    let mut reps = Vec::new();
    let mut push = |desc: String, rep: Representation| {
        elements.push(GroupElement { index: elements.len(), description: desc });
        reps.push(rep);
    };
    match descriptor {
        GroupDescriptor::Cyclic(n) => {
            for k in 0..n {
                let deg = 360.0 * k as f64 / n as f64;
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                push(format!("rot {deg}°"), Representation::linear(rotation(theta)));
            }
        }
        GroupDescriptor::Dihedral(n) => {
            for k in 0..n {
                let deg = 360.0 * k as f64 / n as f64;
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                push(format!("rot {deg}°"), Representation::linear(rotation(theta)));
            }
            for k in 0..n {
                let deg = 360.0 * k as f64 / n as f64;
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                push(
                    format!("rot {deg}° ∘ reflect x"),
                    Representation::linear(rotation(theta) * reflection_x()),
                );
            }
        }
        GroupDescriptor::Symmetric(n) => {
            if n > MAX_SYMMETRIC_ORDER {
                return Err(Error::invalid(format!(
                    "symmetric:{n} has {n}! elements; orders above {MAX_SYMMETRIC_ORDER} are rejected"
                )));
            }
            for p in permutations(n) {
                push(cycle_notation(&p), Representation::Permutation(p));
            }
        }
        GroupDescriptor::ReflectX => {
            push("e".into(), Representation::linear(DMatrix::identity(2, 2)));
            push("reflect x".into(), Representation::linear(reflection_x()));
        }
        GroupDescriptor::ZSwap => {
            push("e".into(), Representation::linear(DMatrix::identity(3, 3)));
            let linear = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0]));
            let offset = DVector::from_vec(vec![0.0, 0.0, 1.0]);
            push("z -> 1 - z".into(), Representation::Affine { linear, offset });
        }
    }
    let group = FiniteGroup {
        name: descriptor.to_string(),
        elements,
        input_rep: reps,
        output_rep: None,
    };
    group.verify()?;
    Ok(group)
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index of the element whose input representation is the identity.
    pub fn identity(&self) -> Option<usize> {
        self.input_rep
            .iter()
            .position(|r| r.approx_eq(&r.identity_like(), CLOSURE_TOL))
    }

    /// Index of the element `g ∘ h`.
    pub fn compose(&self, g: usize, h: usize) -> Result<usize> {
        let rep = self.input_rep[g].compose(&self.input_rep[h])?;
        self.find(&rep)
            .ok_or_else(|| Error::invalid(format!("{} is not closed under composition", self.name)))
    }

    pub fn inverse(&self, g: usize) -> Result<usize> {
        let e = self.identity().ok_or_else(|| Error::invalid("group has no identity"))?;
        (0..self.order())
            .find(|&h| self.compose(g, h).ok() == Some(e))
            .ok_or_else(|| Error::invalid(format!("element {g} has no inverse")))
    }

    fn find(&self, rep: &Representation) -> Option<usize> {
        self.input_rep.iter().position(|r| r.approx_eq(rep, CLOSURE_TOL))
    }

    /// Checks identity, closure and inverses, and that the output
    /// representation (when present) is a homomorphism.
    pub fn verify(&self) -> Result<()> {
        if self.input_rep.len() != self.elements.len() {
            return Err(Error::invalid("one input representation per element is required"));
        }
        for (i, el) in self.elements.iter().enumerate() {
            if el.index != i {
                return Err(Error::invalid("element indices must be 0..order"));
            }
        }
        let e = self.identity().ok_or_else(|| Error::invalid("group has no identity"))?;
        // exact lookup for permutation groups, tolerance search otherwise
        let perms: Option<HashMap<&[usize], usize>> = self
            .input_rep
            .iter()
            .enumerate()
            .map(|(i, r)| match r {
                Representation::Permutation(p) => Some((p.as_slice(), i)),
                _ => None,
            })
            .collect();
        let not_closed = || Error::invalid(format!("{} is not closed under composition", self.name));
        for g in 0..self.order() {
            let mut has_inverse = false;
            for h in 0..self.order() {
                let rep = self.input_rep[g].compose(&self.input_rep[h])?;
                let gh = match (&perms, &rep) {
                    (Some(map), Representation::Permutation(p)) => map.get(p.as_slice()).copied(),
                    _ => self.find(&rep),
                }
                .ok_or_else(not_closed)?;
                has_inverse |= gh == e;
                if let Some(out) = &self.output_rep {
                    let prod = &out[g] * &out[h];
                    if prod.shape() != out[gh].shape() || (prod - &out[gh]).amax() > 1e-9 {
                        return Err(Error::invalid("output representation is not a homomorphism"));
                    }
                }
            }
            if !has_inverse {
                return Err(Error::invalid(format!("element {g} has no inverse")));
            }
        }
        Ok(())
    }

    /// Lifts planar or low-dimensional affine actions to `dim` coordinates,
    /// acting as the identity on the extra coordinates.
    pub fn embedded(&self, dim: usize) -> Result<FiniteGroup> {
        let lift = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            let k = m.nrows();
            if k > dim {
                return Err(Error::ShapeMismatch { expected: dim, actual: k });
            }
            let mut out = DMatrix::identity(dim, dim);
            out.view_mut((0, 0), (k, k)).copy_from(m);
            Ok(out)
        };
        let input_rep = self
            .input_rep
            .iter()
            .map(|r| match r {
                Representation::Affine { linear, offset } => {
                    let mut off = DVector::zeros(dim);
                    off.rows_mut(0, offset.len()).copy_from(offset);
                    Ok(Representation::Affine { linear: lift(linear)?, offset: off })
                }
                Representation::Permutation(_) => Err(Error::invalid(
                    "permutation representations cannot be embedded in a larger space",
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let output_rep = match &self.output_rep {
            Some(out) => Some(out.iter().map(lift).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok(FiniteGroup {
            name: format!("{}@R{dim}", self.name),
            elements: self.elements.clone(),
            input_rep,
            output_rep,
        })
    }

    /// Uses the linear part of the input action as the output action, which
    /// is how vector fields transform.
    pub fn with_output_from_input(mut self) -> Result<FiniteGroup> {
        let out = self
            .input_rep
            .iter()
            .map(|r| match r {
                Representation::Affine { linear, .. } => Ok(linear.clone()),
                Representation::Permutation(p) => {
                    let mut m = DMatrix::zeros(p.len(), p.len());
                    for (i, &pi) in p.iter().enumerate() {
                        m[(pi, i)] = 1.0;
                    }
                    Ok(m)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        self.output_rep = Some(out);
        self.verify()?;
        Ok(self)
    }

    pub fn with_output_rep(mut self, out: Vec<DMatrix<f64>>) -> Result<FiniteGroup> {
        if out.len() != self.order() {
            return Err(Error::invalid("one output matrix per element is required"));
        }
        self.output_rep = Some(out);
        self.verify()?;
        Ok(self)
    }

    /// Output representation, or the identity of size `dim` when the group
    /// acts trivially on outputs.
    pub fn output_matrix(&self, g: usize, dim: usize) -> DMatrix<f64> {
        match &self.output_rep {
            Some(out) => out[g].clone(),
            None => DMatrix::identity(dim, dim),
        }
    }

    /// `ρ(g)·point` on the requested side. Input points are interpreted
    /// according to `kind`; output points are plain vectors.
    pub fn apply(&self, g: usize, point: &[f64], side: Side, kind: PointKind) -> Result<Vec<f64>> {
        if g >= self.order() {
            return Err(Error::invalid(format!("element {g} out of range for {}", self.name)));
        }
        match side {
            Side::Input => match kind {
                PointKind::Vector { dim } => {
                    if point.len() != dim {
                        return Err(Error::ShapeMismatch { expected: dim, actual: point.len() });
                    }
                    self.input_rep[g].apply_vector(point)
                }
                PointKind::Matrix { rows, cols } | PointKind::Set { rows, cols } => {
                    self.input_rep[g].apply_rows(point, rows, cols)
                }
            },
            Side::Output => {
                let out = self.output_rep.as_ref().ok_or(Error::MissingOutputRep)?;
                let m = &out[g];
                if m.ncols() != point.len() {
                    return Err(Error::ShapeMismatch { expected: m.ncols(), actual: point.len() });
                }
                Ok((m * DVector::from_column_slice(point)).iter().copied().collect())
            }
        }
    }
}

/// Distance between two points of the given kind. Sets are compared up to
/// reordering of their rows via the minimal-assignment distance.
pub fn point_distance(a: &[f64], b: &[f64], kind: PointKind) -> f64 {
    match kind {
        PointKind::Vector { .. } | PointKind::Matrix { .. } => {
            crate::numeric::squared_distance(a, b).sqrt()
        }
        PointKind::Set { rows, cols } => set_distance(a, b, rows, cols),
    }
}

/// Minimal-assignment distance between two point sets of `rows` points in
/// `R^cols`. Exact for up to 8 points; greedy nearest matching beyond that.
pub fn set_distance(a: &[f64], b: &[f64], rows: usize, cols: usize) -> f64 {
    let cost = |i: usize, j: usize| {
        crate::numeric::squared_distance(&a[i * cols..(i + 1) * cols], &b[j * cols..(j + 1) * cols])
    };
    if rows <= 8 {
        // DP over subsets of already-matched columns of b.
        let full = 1usize << rows;
        let mut best = vec![f64::INFINITY; full];
        best[0] = 0.0;
        for mask in 0..full {
            let i = mask.count_ones() as usize;
            if i >= rows || !best[mask].is_finite() {
                continue;
            }
            for j in 0..rows {
                if mask & (1 << j) == 0 {
                    let next = mask | (1 << j);
                    let c = best[mask] + cost(i, j);
                    if c < best[next] {
                        best[next] = c;
                    }
                }
            }
        }
        best[full - 1].sqrt()
    } else {
        let mut used = vec![false; rows];
        let mut total = 0.0;
        for i in 0..rows {
            let (j, c) = (0..rows)
                .filter(|&j| !used[j])
                .map(|j| (j, cost(i, j)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            used[j] = true;
            total += c;
        }
        total.sqrt()
    }
}

/// Partition of dataset indices into orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDecomposition {
    /// Member indices of each orbit, ascending; orbits ordered by representative.
    pub orbits: Vec<Vec<usize>>,
    pub masses: Vec<f64>,
    /// Smallest index of each orbit; plays the role of the fundamental domain.
    pub representatives: Vec<usize>,
    /// Orbit id of every sample.
    pub orbit_of: Vec<usize>,
}

impl OrbitDecomposition {
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn min_mass(&self) -> f64 {
        self.masses.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // smaller root wins so roots are representatives
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

/// Index of the dataset point within `tol` of `y`, if any (lowest index wins).
pub fn find_point(ds: &WeightedDataset, y: &[f64], tol: f64) -> Option<usize> {
    ds.points
        .iter()
        .position(|p| point_distance(p, y, ds.kind) <= tol)
}

/// For every sample `i` and element `g`, the index of the sample matching `g·x_i`.
pub fn action_table(ds: &WeightedDataset, group: &FiniteGroup, tol: f64) -> Result<Vec<Vec<Option<usize>>>> {
    ds.points
        .par_iter()
        .map(|x| {
            (0..group.order())
                .map(|g| {
                    let y = group.apply(g, x, Side::Input, ds.kind)?;
                    Ok(find_point(ds, &y, tol))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Groups samples into orbits: `i` and `j` share an orbit iff some chain of
/// group elements maps one to within `tol` of the other.
pub fn decompose_orbits(ds: &WeightedDataset, group: &FiniteGroup, tol: f64) -> Result<OrbitDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::invalid("orbit tolerance must be positive"));
    }
    if ds.is_empty() {
        return Err(Error::Empty("dataset has no points".into()));
    }
    let table = action_table(ds, group, tol)?;
    let mut dsu = DisjointSet::new(ds.len());
    for (i, row) in table.iter().enumerate() {
        for j in row.iter().flatten() {
            dsu.union(i, *j);
        }
    }
    let mut root_to_orbit = vec![usize::MAX; ds.len()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut orbit_of = vec![0; ds.len()];
    for i in 0..ds.len() {
        let r = dsu.find(i);
        if root_to_orbit[r] == usize::MAX {
            root_to_orbit[r] = orbits.len();
            orbits.push(Vec::new());
        }
        orbit_of[i] = root_to_orbit[r];
        orbits[root_to_orbit[r]].push(i);
    }
    let masses = orbits
        .iter()
        .map(|o| o.iter().map(|&i| ds.weights[i]).sum())
        .collect();
    let representatives = orbits.iter().map(|o| o[0]).collect();
    Ok(OrbitDecomposition { orbits, masses, representatives, orbit_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn vec_ds(points: Vec<Vec<f64>>) -> WeightedDataset {
        let n = points.len();
        let dim = points[0].len();
        WeightedDataset::new(PointKind::Vector { dim }, points, None, None, vec![1.0 / n as f64; n]).unwrap()
    }

    #[test]
    fn group_orders() {
        let cases = [
            ("cyclic:4", 4),
            ("dihedral:3", 6),
            ("symmetric:4", 24),
            ("reflect-x", 2),
            ("z-swap", 2),
            ("cyclic:1", 1),
        ];
        for (desc, order) in cases {
            let g = build_group(desc.parse().unwrap()).unwrap();
            assert_eq!(g.order(), order, "{desc}");
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(matches!("bogus:3".parse::<GroupDescriptor>(), Err(Error::UnsupportedGroup(_))));
        assert!("cyclic:x".parse::<GroupDescriptor>().is_err());
        assert!("cyclic:0".parse::<GroupDescriptor>().is_err());
        assert!(build_group(GroupDescriptor::Symmetric(8)).is_err());
        assert_eq!(build_group(GroupDescriptor::Symmetric(5)).unwrap().order(), 120);
    }

    #[test]
    fn c4_generator_is_quarter_turn() {
        let g = build_group(GroupDescriptor::Cyclic(4)).unwrap();
        let kind = PointKind::Vector { dim: 2 };
        let y = g.apply(1, &[1.0, 0.0], Side::Input, kind).unwrap();
        assert!((y[0] - 0.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
        let e = g.identity().unwrap();
        assert_eq!(g.apply(e, &[0.3, -2.0], Side::Input, kind).unwrap(), vec![0.3, -2.0]);
    }

    #[test]
    fn reflection_flips_sign() {
        let g = build_group(GroupDescriptor::ReflectX).unwrap();
        let y = g.apply(1, &[0.5, 0.3], Side::Input, PointKind::Vector { dim: 2 }).unwrap();
        assert_eq!(y, vec![0.5, -0.3]);
        match &g.input_rep[1] {
            Representation::Affine { linear, .. } => {
                assert_eq!(linear, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
            }
            _ => panic!("expected a matrix"),
        }
    }

    #[test]
    fn transposition_swaps_rows() {
        let g = build_group(GroupDescriptor::Symmetric(4)).unwrap();
        let t = g.elements.iter().position(|e| e.description == "(1 2)").unwrap();
        let a: Vec<f64> = (0..8).map(|v| v as f64).collect();
        let y = g.apply(t, &a, Side::Input, PointKind::Matrix { rows: 4, cols: 2 }).unwrap();
        assert_eq!(y, vec![2.0, 3.0, 0.0, 1.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn apply_errors() {
        let g = build_group(GroupDescriptor::Cyclic(4)).unwrap();
        let r = g.apply(1, &[1.0, 0.0, 0.0], Side::Input, PointKind::Vector { dim: 3 });
        assert!(matches!(r, Err(Error::ShapeMismatch { .. })));
        let r = g.apply(1, &[1.0, 0.0], Side::Output, PointKind::Vector { dim: 2 });
        assert!(matches!(r, Err(Error::MissingOutputRep)));
    }

    #[test]
    fn z_swap_is_affine_involution() {
        let g = build_group(GroupDescriptor::ZSwap).unwrap();
        let kind = PointKind::Vector { dim: 3 };
        let y = g.apply(1, &[0.2, 0.4, 0.0], Side::Input, kind).unwrap();
        assert_eq!(y, vec![0.2, 0.4, 1.0]);
        assert_eq!(g.compose(1, 1).unwrap(), 0);
    }

    #[test]
    fn embedding_and_output_rep() {
        let g = build_group(GroupDescriptor::Cyclic(8))
            .unwrap()
            .embedded(3)
            .unwrap()
            .with_output_from_input()
            .unwrap();
        let y = g.apply(2, &[1.0, 0.0, 0.0], Side::Output, PointKind::Vector { dim: 3 }).unwrap();
        assert!((y[1] - 1.0).abs() < 1e-12 && y[2] == 0.0);
    }

    #[test]
    fn set_distance_ignores_row_order() {
        let a = [0.0, 0.0, 1.0, 0.0, 0.0, 2.0];
        let b = [0.0, 2.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(set_distance(&a, &b, 3, 2), 0.0);
        let c = [0.0, 2.0, 0.0, 0.0, 1.0, 0.5];
        assert!((set_distance(&a, &c, 3, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn circle20_orbits_under_reflection_pair_up() {
        let ds = generators::circle20();
        let g = build_group(GroupDescriptor::ReflectX).unwrap();
        let orb = decompose_orbits(&ds, &g, DEFAULT_TOL).unwrap();
        // exhaustive pairing oracle: i pairs with the unique j whose point is i's mirror image
        let mut expected = 0;
        for i in 0..20 {
            for j in (i + 1)..20 {
                let (a, b) = (&ds.points[i], &ds.points[j]);
                if (a[0] - b[0]).abs() < 1e-12 && (a[1] + b[1]).abs() < 1e-12 {
                    expected += 1;
                    assert_eq!(orb.orbit_of[i], orb.orbit_of[j]);
                }
            }
        }
        assert_eq!(expected, 10);
        assert_eq!(orb.len(), 10);
        assert!(orb.orbits.iter().all(|o| o.len() == 2));
    }

    #[test]
    fn circle20_single_orbit_under_c20() {
        let ds = generators::circle20();
        let g = build_group(GroupDescriptor::Cyclic(20)).unwrap();
        let orb = decompose_orbits(&ds, &g, DEFAULT_TOL).unwrap();
        assert_eq!(orb.len(), 1);
        assert_eq!(orb.orbits[0].len(), 20);
        assert!((orb.masses[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn permutation24_single_orbit_under_s4() {
        let ds = generators::permutation24();
        let g = build_group(GroupDescriptor::Symmetric(4)).unwrap();
        let orb = decompose_orbits(&ds, &g, DEFAULT_TOL).unwrap();
        assert_eq!(orb.len(), 1);
        assert_eq!(orb.orbits[0].len(), 24);
    }

    #[test]
    fn singleton_orbits_are_legal() {
        let ds = vec_ds(vec![vec![1.0, 1.0], vec![3.0, 2.0]]);
        let g = build_group(GroupDescriptor::ReflectX).unwrap();
        let orb = decompose_orbits(&ds, &g, DEFAULT_TOL).unwrap();
        assert_eq!(orb.orbits, vec![vec![0], vec![1]]);
        assert_eq!(orb.representatives, vec![0, 1]);
        assert!(decompose_orbits(&ds, &g, 0.0).is_err());
    }

    #[test]
    fn cycle_notation_examples() {
        assert_eq!(cycle_notation(&[0, 1, 2]), "e");
        assert_eq!(cycle_notation(&[1, 0, 2]), "(1 2)");
        assert_eq!(cycle_notation(&[1, 2, 0]), "(1 2 3)");
    }
}
