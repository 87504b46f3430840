//! Enumeration of rational subspaces by height.
//!
//! Work is split into units keyed by the position and value of the leading (first
//! nonzero) coordinate of the defining integer vector. Shards take every
//! `shard_count`-th unit, so the union over shards is independent of the shard count.

mod lattice;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    combinations, pluecker_coordinates, pluecker_decode, ExactError, ExactMatrix, PlueckerVector, RationalSubspace,
};
use crate::exec::{self, Execution};

pub use lattice::orthogonal_lattice_basis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumerationError {
    #[error("strategy {strategy} does not support (n, e) = ({n}, {e})")]
    StrategyMismatch { strategy: Strategy, n: usize, e: usize },
    #[error("invalid enumeration spec: {0}")]
    InvalidSpec(String),
    #[error("height mismatch for {0}")]
    HeightMismatch(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    ExactLines,
    ExactPluecker,
    BasisBox,
}

impl Strategy {
    pub fn is_exact(self) -> bool {
        !matches!(self, Strategy::BasisBox)
    }

    /// The exact strategy for a shape, if any.
    pub fn exact_for(n: usize, e: usize) -> Option<Self> {
        if e == 1 || (n >= 2 && e + 1 == n) {
            Some(Strategy::ExactLines)
        } else if (n, e) == (4, 2) {
            Some(Strategy::ExactPluecker)
        } else {
            None
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ExactLines => "EXACT_LINES",
            Strategy::ExactPluecker => "EXACT_PLUECKER",
            Strategy::BasisBox => "BASIS_BOX",
        })
    }
}

impl FromStr for Strategy {
    type Err = EnumerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "EXACT_LINES" => Ok(Strategy::ExactLines),
            "EXACT_PLUECKER" => Ok(Strategy::ExactPluecker),
            "BASIS_BOX" => Ok(Strategy::BasisBox),
            _ => Err(EnumerationError::InvalidSpec(format!("unknown strategy {s}"))),
        }
    }
}

pub const BASIS_BOX_DISCLAIMER: &str =
    "BASIS_BOX enumerates bases with bounded entries; subspaces of small height may be missing";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnumSpec {
    pub n: usize,
    pub e: usize,
    pub height_squared_max: u64,
    pub strategy: Strategy,
    pub basis_box_bound: u32,
    pub shard_count: usize,
    pub shard_index: usize,
    /// Units of this shard already processed (resume point).
    pub cursor: usize,
}

impl EnumSpec {
    pub fn new(n: usize, e: usize, height_squared_max: u64, strategy: Strategy) -> Result<Self, EnumerationError> {
        let spec =
            Self { n, e, height_squared_max, strategy, basis_box_bound: 1, shard_count: 1, shard_index: 0, cursor: 0 };
        spec.validate()?;
        Ok(spec)
    }

    /// The exact strategy for (n, e).
    pub fn exact(n: usize, e: usize, height_squared_max: u64) -> Result<Self, EnumerationError> {
        let strategy = Strategy::exact_for(n, e).ok_or(EnumerationError::StrategyMismatch {
            strategy: Strategy::ExactPluecker,
            n,
            e,
        })?;
        Self::new(n, e, height_squared_max, strategy)
    }

    pub fn with_box_bound(mut self, bound: u32) -> Self {
        self.basis_box_bound = bound;
        self
    }

    pub fn with_shard(mut self, shard_count: usize, shard_index: usize) -> Result<Self, EnumerationError> {
        self.shard_count = shard_count;
        self.shard_index = shard_index;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cursor(mut self, cursor: usize) -> Self {
        self.cursor = cursor;
        self
    }

    pub fn validate(&self) -> Result<(), EnumerationError> {
        if self.e == 0 || self.e > self.n {
            return Err(EnumerationError::InvalidSpec(format!("need 1 <= e <= n, got n={}, e={}", self.n, self.e)));
        }
        if self.shard_count == 0 || self.shard_index >= self.shard_count {
            return Err(EnumerationError::InvalidSpec("shard index out of range".into()));
        }
        let ok = match self.strategy {
            Strategy::ExactLines => self.n >= 2 && (self.e == 1 || self.e + 1 == self.n),
            Strategy::ExactPluecker => (self.n, self.e) == (4, 2),
            Strategy::BasisBox => self.basis_box_bound >= 1,
        };
        if !ok {
            return Err(EnumerationError::StrategyMismatch { strategy: self.strategy, n: self.n, e: self.e });
        }
        if self.height_squared_max > (1u64 << 40) {
            return Err(EnumerationError::InvalidSpec("height bound too large".into()));
        }
        Ok(())
    }

    fn kind(&self) -> Kind {
        match self.strategy {
            Strategy::ExactLines if self.e == 1 => Kind::Line,
            Strategy::ExactLines => Kind::Hyperplane,
            Strategy::ExactPluecker => Kind::Plane42,
            Strategy::BasisBox => Kind::Basis,
        }
    }

    /// Work units of this shard, after the cursor.
    pub fn units(&self) -> Vec<Unit> {
        all_units(self)
            .into_iter()
            .enumerate()
            .filter(|(i, _)| i % self.shard_count == self.shard_index)
            .map(|(_, u)| u)
            .skip(self.cursor)
            .collect()
    }

    pub fn disclaimer(&self) -> Option<&'static str> {
        (self.strategy == Strategy::BasisBox).then_some(BASIS_BOX_DISCLAIMER)
    }
}

/// Splits a spec into `shard_count` shards.
pub fn shard_partition(spec: &EnumSpec, shard_count: usize) -> Result<Vec<EnumSpec>, EnumerationError> {
    (0..shard_count).map(|i| spec.clone().with_cursor(0).with_shard(shard_count, i)).collect()
}

/// Leading coordinate position and value (for BASIS_BOX: the value of the first entry).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Unit {
    pub position: usize,
    pub value: i64,
}

fn all_units(spec: &EnumSpec) -> Vec<Unit> {
    match spec.kind() {
        Kind::Basis => {
            let m = spec.basis_box_bound as i64;
            (-m..=m).map(|value| Unit { position: 0, value }).collect()
        }
        kind => {
            let width = if kind == Kind::Plane42 { 6 } else { spec.n };
            let vmax = spec.height_squared_max.sqrt() as i64;
            (0..width).flat_map(|position| (1..=vmax).map(move |value| Unit { position, value })).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `coords` is a primitive direction vector.
    Line,
    /// `coords` is a primitive normal vector.
    Hyperplane,
    /// `coords` is a primitive decomposable Plücker vector in ℝ⁴.
    Plane42,
    /// `coords` is the normalized Plücker vector of `basis`.
    Basis,
}

/// A borrowed enumeration result.
#[derive(Clone, Copy, Debug)]
pub struct CandidateRef<'a> {
    pub kind: Kind,
    pub n: usize,
    pub e: usize,
    pub coords: &'a [i64],
    pub basis: &'a [Vec<i64>],
    pub height_squared: u64,
}

/// An owned enumeration result.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub kind: Kind,
    pub n: usize,
    pub e: usize,
    pub coords: Vec<i64>,
    pub basis: Vec<Vec<i64>>,
    pub height_squared: u64,
}

impl CandidateRef<'_> {
    pub fn to_owned(&self) -> Candidate {
        Candidate {
            kind: self.kind,
            n: self.n,
            e: self.e,
            coords: self.coords.to_vec(),
            basis: self.basis.to_vec(),
            height_squared: self.height_squared,
        }
    }
}

impl Candidate {
    pub fn as_ref(&self) -> CandidateRef<'_> {
        CandidateRef {
            kind: self.kind,
            n: self.n,
            e: self.e,
            coords: &self.coords,
            basis: &self.basis,
            height_squared: self.height_squared,
        }
    }

    /// Integer generators of the subspace (columns).
    pub fn generators(&self) -> Vec<Vec<i64>> {
        generators(&self.as_ref())
    }

    /// Exact subspace; the stored height is validated against the Plücker computation.
    pub fn to_subspace(&self) -> Result<RationalSubspace, EnumerationError> {
        let sub = match self.kind {
            Kind::Plane42 => {
                let xi = PlueckerVector::from_i64(4, 2, &self.coords)?;
                pluecker_decode(&xi)?
            }
            _ => {
                let cols: Vec<Vec<BigInt>> =
                    self.generators().iter().map(|c| c.iter().map(|&x| BigInt::from(x)).collect()).collect();
                RationalSubspace::from_integer_basis(ExactMatrix::from_int_columns(&cols)?)?
            }
        };
        if *sub.height_squared() != BigInt::from(self.height_squared) {
            return Err(EnumerationError::HeightMismatch(format!("{:?}", self.coords)));
        }
        Ok(sub)
    }
}

/// Integer generator columns.
pub fn generators(c: &CandidateRef<'_>) -> Vec<Vec<i64>> {
    match c.kind {
        Kind::Line => vec![c.coords.to_vec()],
        Kind::Hyperplane => {
            let w = c.coords;
            let p = w.iter().position(|&x| x != 0).expect("nonzero normal");
            (0..c.n)
                .filter(|&i| i != p)
                .map(|i| {
                    let mut v = vec![0i64; c.n];
                    v[i] = w[p];
                    v[p] = -w[i];
                    v
                })
                .collect()
        }
        Kind::Plane42 => plane_generators(c.coords),
        Kind::Basis => c.basis.to_vec(),
    }
}

/// Two generators of the plane with Plücker vector ξ: the contractions ι(e_i)ξ, ι(e_j)ξ
/// for a pair (i, j) with ξ_ij ≠ 0.
fn plane_generators(xi: &[i64]) -> Vec<Vec<i64>> {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut a = [[0i64; 4]; 4];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        a[i][j] = xi[k];
        a[j][i] = -xi[k];
    }
    let k = xi.iter().position(|&x| x != 0).expect("nonzero Plücker vector");
    let (i, j) = pairs[k];
    vec![a[i].to_vec(), a[j].to_vec()]
}

/// Product of generator norms over the generalized determinant, at least 1; scales the
/// floating-point error of orthonormalizing the generators.
pub fn hadamard_ratio(c: &CandidateRef<'_>) -> f64 {
    let h = (c.height_squared as f64).sqrt();
    match c.kind {
        Kind::Line => 1.0,
        Kind::Hyperplane => {
            let w = c.coords;
            let p = w.iter().position(|&x| x != 0).expect("nonzero");
            let wp = w[p].abs() as f64;
            let prod: f64 =
                (0..c.n).filter(|&i| i != p).map(|i| ((w[p] * w[p] + w[i] * w[i]) as f64).sqrt() / wp).product();
            (prod * wp / h).max(1.0)
        }
        Kind::Plane42 | Kind::Basis => {
            let g = generators(c);
            let norms: f64 = g.iter().map(|v| (v.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()).product();
            let d = match c.kind {
                Kind::Plane42 => {
                    let k = c.coords.iter().find(|&&x| x != 0).expect("nonzero");
                    (*k as f64).abs() * h
                }
                _ => basis_generalized_determinant(&g),
            };
            (norms / d).max(1.0)
        }
    }
}

fn basis_generalized_determinant(cols: &[Vec<i64>]) -> f64 {
    let n = cols[0].len();
    let e = cols.len();
    combinations(n, e)
        .iter()
        .map(|rows| {
            let m: Vec<Vec<BigInt>> = rows.iter().map(|&r| cols.iter().map(|c| BigInt::from(c[r])).collect()).collect();
            let d = crate::exact::bareiss_determinant(m);
            let f = crate::exact::rational_to_f64(&num_rational::BigRational::from_integer(d));
            f * f
        })
        .sum::<f64>()
        .sqrt()
}

fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Visits every integer vector of length `len` with x[..pos] = 0, x[pos] = value and
/// ‖x‖² ≤ bound. No primitivity filter.
fn visit_vectors<F: FnMut(&[i64], u64)>(len: usize, pos: usize, value: i64, bound: u64, f: &mut F) {
    let head = (value * value) as u64;
    if head > bound {
        return;
    }
    let mut x = vec![0i64; len];
    x[pos] = value;
    visit_tail(&mut x, pos + 1, head, bound, f);
}

fn visit_tail<F: FnMut(&[i64], u64)>(x: &mut [i64], i: usize, acc: u64, bound: u64, f: &mut F) {
    if i == x.len() {
        f(x, acc);
        return;
    }
    let r = (bound - acc).sqrt() as i64;
    if i + 1 == x.len() {
        for c in -r..=r {
            x[i] = c;
            f(x, acc + (c * c) as u64);
        }
    } else {
        for c in -r..=r {
            x[i] = c;
            visit_tail(x, i + 1, acc + (c * c) as u64, bound, f);
        }
    }
    x[i] = 0;
}

/// Visits one unit. `prefilter` sees every sign-canonical vector before the gcd test
/// (it may reject cheaply); the visitor sees primitive vectors only.
pub fn visit_unit<P, F>(spec: &EnumSpec, unit: Unit, mut prefilter: P, mut visit: F)
where
    P: FnMut(&[i64], u64) -> bool,
    F: FnMut(CandidateRef<'_>),
{
    let bound = spec.height_squared_max;
    let (n, e) = (spec.n, spec.e);
    match spec.kind() {
        kind @ (Kind::Line | Kind::Hyperplane) => {
            visit_vectors(n, unit.position, unit.value, bound, &mut |x, h2| {
                if h2 == 0 || !prefilter(x, h2) || gcd_slice(x) != 1 {
                    return;
                }
                visit(CandidateRef { kind, n, e, coords: x, basis: &[], height_squared: h2 });
            });
        }
        Kind::Plane42 => visit_plane42(unit, bound, &mut prefilter, &mut visit),
        Kind::Basis => visit_box_unit(spec, unit, &mut visit),
    }
}

fn visit_plane42<P, F>(unit: Unit, bound: u64, prefilter: &mut P, visit: &mut F)
where
    P: FnMut(&[i64], u64) -> bool,
    F: FnMut(CandidateRef<'_>),
{
    let mut emit = |xi: &[i64], h2: u64| {
        if h2 == 0 || !prefilter(xi, h2) || gcd_slice(xi) != 1 {
            return;
        }
        visit(CandidateRef { kind: Kind::Plane42, n: 4, e: 2, coords: xi, basis: &[], height_squared: h2 });
    };
    if unit.position >= 3 {
        // u = 0: every (ξ23, ξ24, ξ34) is decomposable.
        visit_vectors(3, unit.position - 3, unit.value, bound, &mut |y, h2| {
            emit(&[0, 0, 0, y[0], y[1], y[2]], h2);
        });
        return;
    }
    // u = (ξ12, ξ13, ξ14), w = (ξ34, −ξ24, ξ23) with u·w = 0.
    visit_vectors(3, unit.position, unit.value, bound, &mut |u, hu| {
        let rest = bound - hu;
        let u = [u[0], u[1], u[2]];
        lattice::visit_orthogonal(&u, rest, |w, hw| {
            emit(&[u[0], u[1], u[2], w[2], -w[1], w[0]], hu + hw);
        });
    });
}

fn visit_box_unit<F: FnMut(CandidateRef<'_>)>(spec: &EnumSpec, unit: Unit, visit: &mut F) {
    let (n, e) = (spec.n, spec.e);
    let m = spec.basis_box_bound as i64;
    let cells = n * e;
    let mut entries = vec![-m; cells];
    entries[0] = unit.value;
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    loop {
        let cols: Vec<Vec<i64>> = (0..e).map(|c| entries[c * n..(c + 1) * n].to_vec()).collect();
        if let Some((coords, h2)) = box_pluecker(&cols, n, e) {
            if h2 <= spec.height_squared_max && seen.insert(coords.clone()) {
                visit(CandidateRef { kind: Kind::Basis, n, e, coords: &coords, basis: &cols, height_squared: h2 });
            }
        }
        // Odometer over entries[1..].
        let mut k = 1;
        loop {
            if k == cells {
                return;
            }
            if entries[k] < m {
                entries[k] += 1;
                break;
            }
            entries[k] = -m;
            k += 1;
        }
    }
}

fn box_pluecker(cols: &[Vec<i64>], n: usize, e: usize) -> Option<(Vec<i64>, u64)> {
    let m = ExactMatrix::from_i64_columns(&cols.iter().map(|c| c.as_slice()).collect::<Vec<_>>()).ok()?;
    let xi = pluecker_coordinates(&m).ok()?;
    debug_assert_eq!((xi.n(), xi.e()), (n, e));
    let coords: Option<Vec<i64>> = xi.coords().iter().map(|c| i64::try_from(c).ok()).collect();
    let h2 = u64::try_from(&xi.norm_squared()).ok()?;
    Some((coords?, h2))
}

/// Candidates of one unit, in visiting order.
pub fn unit_candidates(spec: &EnumSpec, unit: Unit) -> Vec<Candidate> {
    let mut out = Vec::new();
    visit_unit(spec, unit, |_, _| true, |c| out.push(c.to_owned()));
    out
}

/// All candidates of the spec's shard, deduplicated, in unit order.
pub fn enumerate_candidates(spec: &EnumSpec, exec: Execution) -> Result<Vec<Candidate>, EnumerationError> {
    spec.validate()?;
    let units = spec.units();
    let per_unit = exec::map(exec, &units, |&u| unit_candidates(spec, u));
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for c in per_unit.into_iter().flatten() {
        if c.kind != Kind::Basis || seen.insert(c.coords.clone()) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Exact subspaces of the spec's shard.
pub fn enumerate_subspaces(spec: &EnumSpec, exec: Execution) -> Result<Vec<RationalSubspace>, EnumerationError> {
    let candidates = enumerate_candidates(spec, exec)?;
    exec::map(exec, &candidates, |c| c.to_subspace()).into_iter().collect()
}

/// Lines in ℝⁿ with H² ≤ bound.
pub fn enumerate_lines(n: usize, height_squared_max: u64) -> Result<Vec<RationalSubspace>, EnumerationError> {
    enumerate_subspaces(&EnumSpec::new(n, 1, height_squared_max, Strategy::ExactLines)?, Execution::Sequential)
}
