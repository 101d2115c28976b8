//! Linear codes over `F_p`: GRS and repetition constructions, duals, star
//! products, restriction/puncturing, and brute-force minimum distance.
//!
//! Coordinates are 0-based. Two codes compare equal iff they live in the
//! same ambient space and their reduced generators coincide.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::matrix::{Matrix, Rref};

/// Largest `p^k` that [`min_distance`] enumerates without an explicit cap.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Parameters of a generalized Reed-Solomon code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrsSpec {
    pub field: PrimeField,
    pub n: usize,
    pub k: usize,
    pub eval_points: Vec<u32>,
    pub multipliers: Vec<u32>,
}

impl GrsSpec {
    /// Evaluation points `0, 1, .., n-1` and unit multipliers.
    pub fn new(field: PrimeField, n: usize, k: usize) -> Self {
        Self {
            field,
            n,
            k,
            eval_points: (0..n as u64).map(|a| field.reduce(a)).collect(),
            multipliers: vec![1; n],
        }
    }

    pub fn with_eval_points(mut self, points: Vec<u32>) -> Self {
        self.eval_points = points;
        self
    }

    pub fn with_multipliers(mut self, multipliers: Vec<u32>) -> Self {
        self.multipliers = multipliers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.field.modulus() as usize;
        if self.k > self.n {
            return Err(Error::InvalidCode(format!("k = {} exceeds n = {}", self.k, self.n)));
        }
        if self.n > p {
            return Err(Error::InvalidCode(format!(
                "n = {} exceeds the field size {}; not enough distinct evaluation points",
                self.n, p
            )));
        }
        if self.eval_points.len() != self.n || self.multipliers.len() != self.n {
            return Err(Error::InvalidCode(format!(
                "expected {} evaluation points and multipliers, got {} and {}",
                self.n,
                self.eval_points.len(),
                self.multipliers.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for (j, &a) in self.eval_points.iter().enumerate() {
            if a >= p as u32 {
                return Err(Error::InvalidCode(format!(
                    "evaluation point {j} = {a} is not reduced mod {p}"
                )));
            }
            if !seen.insert(a) {
                return Err(Error::InvalidCode(format!(
                    "repeated evaluation point {a} at position {j}"
                )));
            }
        }
        for (j, &v) in self.multipliers.iter().enumerate() {
            if v % p as u32 == 0 {
                return Err(Error::InvalidCode(format!("multiplier at position {j} is zero")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LinearCode {
    field: PrimeField,
    n: usize,
    gen: Matrix,
    rref: Matrix,
    pivots: Vec<usize>,
    eval_points: Option<Vec<u32>>,
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.n == other.n && self.rref == other.rref
    }
}

impl Eq for LinearCode {}

impl LinearCode {
    /// Wraps a full-row-rank generator matrix.
    pub fn from_generator(gen: Matrix) -> Result<Self> {
        let Rref { matrix, rank, pivots } = gen.rref();
        if rank != gen.rows() {
            return Err(Error::InvalidCode(format!(
                "generator has {} rows but rank {}",
                gen.rows(),
                rank
            )));
        }
        Ok(Self {
            field: gen.field(),
            n: gen.cols(),
            gen,
            rref: matrix,
            pivots,
            eval_points: None,
        })
    }

    /// The code spanned by arbitrary (possibly dependent) rows of length `n`.
    pub fn span(field: PrimeField, n: usize, rows: &Matrix) -> Self {
        if rows.rows() == 0 {
            return Self::zero(field, n);
        }
        debug_assert_eq!(rows.cols(), n);
        let Rref { matrix, pivots, .. } = rows.rref();
        Self {
            field,
            n,
            gen: matrix.clone(),
            rref: matrix,
            pivots,
            eval_points: None,
        }
    }

    pub fn zero(field: PrimeField, n: usize) -> Self {
        Self {
            field,
            n,
            gen: Matrix::zeros(field, 0, n),
            rref: Matrix::zeros(field, 0, n),
            pivots: Vec::new(),
            eval_points: None,
        }
    }

    pub fn full(field: PrimeField, n: usize) -> Self {
        Self::from_generator(Matrix::identity(field, n)).expect("identity has full rank")
    }

    /// Records the evaluation points of a GRS code whose generator was given
    /// explicitly (e.g. in systematic form). Retrieval codes are built on them.
    pub fn with_eval_points(mut self, points: Vec<u32>) -> Result<Self> {
        let spec = GrsSpec::new(self.field, self.n, self.k()).with_eval_points(points);
        spec.validate()?;
        self.eval_points = Some(spec.eval_points);
        Ok(self)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k(&self) -> usize {
        self.gen.rows()
    }

    pub fn generator(&self) -> &Matrix {
        &self.gen
    }

    pub fn rref_generator(&self) -> &Matrix {
        &self.rref
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn eval_points(&self) -> Option<&[u32]> {
        self.eval_points.as_deref()
    }

    /// `message · G`.
    pub fn encode(&self, message: &[u32]) -> Result<Vec<u32>> {
        self.gen.left_mul(message)
    }

    pub fn contains(&self, word: &[u32]) -> bool {
        self.rref.row_space_contains(word)
    }

    /// True iff the columns of the generator indexed by `positions` have rank `k`.
    /// Out-of-range positions make the answer `false`.
    pub fn full_rank_on(&self, positions: &[usize]) -> bool {
        if positions.iter().any(|&j| j >= self.n) {
            return false;
        }
        if positions.len() < self.k() {
            return false;
        }
        self.gen.select_columns(positions).rank() == self.k()
    }
}

pub fn grs_code(spec: &GrsSpec) -> Result<LinearCode> {
    spec.validate()?;
    let f = spec.field;
    let mut gen = Matrix::zeros(f, spec.k, spec.n);
    for j in 0..spec.n {
        let mut power = 1u32;
        for i in 0..spec.k {
            gen.set(i, j, f.mul(spec.multipliers[j], power));
            power = f.mul(power, spec.eval_points[j]);
        }
    }
    let mut code = LinearCode::from_generator(gen)?;
    code.eval_points = Some(spec.eval_points.clone());
    Ok(code)
}

pub fn repetition(field: PrimeField, n: usize) -> Result<LinearCode> {
    if n == 0 {
        return Err(Error::InvalidCode("repetition code needs n >= 1".into()));
    }
    LinearCode::from_generator(Matrix::new(field, 1, n, vec![1; n])?)
}

/// The dual code, generated by a basis of the right kernel of `gen(C)`.
pub fn dual(code: &LinearCode) -> LinearCode {
    if code.k() == 0 {
        return LinearCode::full(code.field, code.n);
    }
    let h = code.gen.nullspace();
    if h.rows() == 0 {
        return LinearCode::zero(code.field, code.n);
    }
    LinearCode::from_generator(h).expect("kernel basis is independent")
}

/// Span of all componentwise products of generator rows.
pub fn star_product(c: &LinearCode, d: &LinearCode) -> Result<LinearCode> {
    if c.field != d.field {
        return Err(Error::FieldMismatch {
            left: c.field.modulus(),
            right: d.field.modulus(),
        });
    }
    if c.n != d.n {
        return Err(Error::DimensionMismatch(format!(
            "star product of lengths {} and {}",
            c.n, d.n
        )));
    }
    let f = c.field;
    let mut rows = Matrix::zeros(f, 0, c.n);
    for a in 0..c.k() {
        for b in 0..d.k() {
            let prod: Vec<u32> = c
                .gen
                .row(a)
                .iter()
                .zip(d.gen.row(b))
                .map(|(&x, &y)| f.mul(x, y))
                .collect();
            rows.push_row(&prod)?;
        }
    }
    Ok(LinearCode::span(f, c.n, &rows))
}

pub fn min_distance(code: &LinearCode) -> Result<usize> {
    min_distance_with_cap(code, DEFAULT_ENUMERATION_CAP)
}

/// Minimum Hamming weight over all nonzero codewords, by exhaustive enumeration.
pub fn min_distance_with_cap(code: &LinearCode, cap: u128) -> Result<usize> {
    let k = code.k();
    if k == 0 {
        return Err(Error::ZeroCode);
    }
    let states = code.field.order().checked_pow(k as u32).unwrap_or(u128::MAX);
    if states > cap {
        return Err(Error::EnumerationCap { states, cap });
    }
    let f = code.field;
    let p = f.modulus();
    let g = &code.gen;
    // Odometer over messages; each digit step adds the matching generator row
    // (p-1 -> 0 is also +1 mod p), so the codeword is updated incrementally.
    let mut digits = vec![0u32; k];
    let mut word = vec![0u32; code.n];
    let mut best = code.n;
    loop {
        let mut i = 0;
        loop {
            if i == k {
                return Ok(best);
            }
            for (w, &x) in word.iter_mut().zip(g.row(i)) {
                *w = f.add(*w, x);
            }
            digits[i] += 1;
            if digits[i] == p {
                digits[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
        let weight = word.iter().filter(|&&x| x != 0).count();
        if weight > 0 && weight < best {
            best = weight;
        }
    }
}

fn check_coordinates(code: &LinearCode, positions: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &j in positions {
        if j >= code.n {
            return Err(Error::InvalidCoordinates(format!(
                "coordinate {j} out of range for length {}",
                code.n
            )));
        }
        if !seen.insert(j) {
            return Err(Error::InvalidCoordinates(format!("coordinate {j} repeated")));
        }
    }
    Ok(())
}

/// The code `C|_T` of length `|T|`, coordinates taken in the given order.
pub fn restrict(code: &LinearCode, positions: &[usize]) -> Result<LinearCode> {
    if positions.is_empty() {
        return Err(Error::InvalidCoordinates("restriction to the empty set".into()));
    }
    check_coordinates(code, positions)?;
    let mut out = LinearCode::span(code.field, positions.len(), &code.gen.select_columns(positions));
    out.eval_points = code
        .eval_points
        .as_ref()
        .map(|pts| positions.iter().map(|&j| pts[j]).collect());
    Ok(out)
}

/// Deletes the coordinates in `deleted`, preserving the order of the rest.
pub fn puncture(code: &LinearCode, deleted: &[usize]) -> Result<LinearCode> {
    check_coordinates(code, deleted)?;
    let keep: Vec<usize> = (0..code.n).filter(|j| !deleted.contains(j)).collect();
    if keep.is_empty() {
        return Err(Error::InvalidCoordinates("cannot puncture every coordinate".into()));
    }
    if keep.len() == code.n {
        return Ok(code.clone());
    }
    restrict(code, &keep)
}

/// `rank(G_C · diag(e) · H_Cᵀ)`: the number of independent symbols a
/// repetition-code query with shift `e` exposes.
pub fn rank_masked_product(code: &LinearCode, e: &[u32]) -> Result<usize> {
    if e.len() != code.n {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a code of length {}",
            e.len(),
            code.n
        )));
    }
    let h = dual(code);
    if code.k() == 0 || h.k() == 0 {
        return Ok(0);
    }
    let f = code.field;
    let mut masked = code.gen.clone();
    for r in 0..masked.rows() {
        for (c, &ec) in e.iter().enumerate() {
            masked.set(r, c, f.mul(masked.get(r, c), f.reduce(ec as u64)));
        }
    }
    Ok(masked.mul(&h.gen.transpose())?.rank())
}
