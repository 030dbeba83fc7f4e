//! Characteristic vectors and characteristic pairs.
//!
//! A characteristic vector is a nonzero element of `Z^r` up to sign. It is
//! stored as its canonical representative, the one whose first nonzero
//! entry is positive, so equality of [`CharVector`]s is equality up to sign.
//!
//! A [`CharPair`] attaches vectors to some of the facets of a simple
//! polytope. Unmapped facets are boundary facets; a pair without boundary
//! facets must have torus rank equal to the polytope's dimension.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::polytope::{
    is_combinatorial_isomorphism, FacetId, PolytopeError, SimplePolytope, VertexName,
};
use crate::zlinalg::{
    apply_matrix, determinant, is_direct_summand, is_unimodular_basis, permutation_sign,
    unimodular_inverse, IntMatrix, LinalgError, Permutation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharError {
    #[error("characteristic vectors must be nonzero")]
    ZeroVector,
    #[error("vector on facet {facet} has length {found}, torus rank is {expected}")]
    LengthMismatch {
        facet: FacetId,
        expected: usize,
        found: usize,
    },
    #[error("torus rank must be positive")]
    ZeroRank,
    #[error("unknown facet id {0}")]
    UnknownFacet(FacetId),
    #[error("closed pair over a {dim}-polytope needs torus rank {dim}, got {rank}")]
    ClosedRankMismatch { dim: usize, rank: usize },
    #[error("facet {0} carries a vector; only boundary facets can be restricted to")]
    FacetMapped(FacetId),
    #[error("facet {0} meets the restriction facet but carries no vector")]
    AdjacentUnmapped(FacetId),
    #[error("construction needs an even dimension >= 4, got {0}")]
    BadDimension(usize),
    #[error("torus ranks differ: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("witness matrix is {rows}x{cols}, torus rank is {rank}")]
    WitnessShape {
        rows: usize,
        cols: usize,
        rank: usize,
    },
    #[error("witness matrix has determinant {0}, expected ±1")]
    NotUnimodular(BigInt),
    #[error("polytope is not combinatorially a simplex")]
    NotASimplex,
    #[error("pair has boundary facets")]
    NotClosed,
    #[error("pair is not a valid characteristic pair ({0} failing vertices)")]
    Invalid(usize),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A nonzero integer vector modulo `x ~ -x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharVector(Vec<BigInt>);

impl CharVector {
    pub fn new(mut v: Vec<BigInt>) -> Result<Self, CharError> {
        let first = v
            .iter()
            .find(|x| !x.is_zero())
            .ok_or(CharError::ZeroVector)?;
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
        Ok(Self(v))
    }

    pub fn from_i64(v: &[i64]) -> Result<Self, CharError> {
        Self::new(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_vec(&self) -> Vec<BigInt> {
        self.0.clone()
    }
}

impl fmt::Display for CharVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A polytope with characteristic vectors on some of its facets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPair {
    polytope: SimplePolytope,
    torus_rank: usize,
    assignment: BTreeMap<FacetId, CharVector>,
}

impl CharPair {
    /// Attaches `assignment` to `polytope`; vectors are brought to canonical
    /// sign form.
    pub fn attach(
        polytope: SimplePolytope,
        torus_rank: usize,
        assignment: BTreeMap<FacetId, Vec<BigInt>>,
    ) -> Result<Self, CharError> {
        if torus_rank == 0 {
            return Err(CharError::ZeroRank);
        }
        let mut canonical = BTreeMap::new();
        for (facet, v) in assignment {
            if polytope.facet(facet).is_none() {
                return Err(CharError::UnknownFacet(facet));
            }
            if v.len() != torus_rank {
                return Err(CharError::LengthMismatch {
                    facet,
                    expected: torus_rank,
                    found: v.len(),
                });
            }
            canonical.insert(facet, CharVector::new(v)?);
        }
        let pair = Self {
            polytope,
            torus_rank,
            assignment: canonical,
        };
        if pair.is_closed() && torus_rank != pair.polytope.dim() {
            return Err(CharError::ClosedRankMismatch {
                dim: pair.polytope.dim(),
                rank: torus_rank,
            });
        }
        Ok(pair)
    }

    pub fn polytope(&self) -> &SimplePolytope {
        &self.polytope
    }

    pub fn torus_rank(&self) -> usize {
        self.torus_rank
    }

    pub fn assignment(&self) -> &BTreeMap<FacetId, CharVector> {
        &self.assignment
    }

    pub fn vector(&self, facet: FacetId) -> Option<&CharVector> {
        self.assignment.get(&facet)
    }

    pub fn boundary_facets(&self) -> Vec<FacetId> {
        self.polytope
            .facet_ids()
            .filter(|f| !self.assignment.contains_key(f))
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_facets().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// More vectors than the torus rank meet at the vertex.
    TooMany,
    /// Some invariant factor exceeds 1, or the vectors are dependent.
    NotDirectSummand,
    /// A full set of vectors whose determinant is not ±1.
    NotUnimodular,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexFailure {
    pub vertex: VertexName,
    pub facets: Vec<FacetId>,
    pub vectors: Vec<CharVector>,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub vertices_checked: usize,
    pub failures: Vec<VertexFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the characteristic condition at every vertex. Faces other than
/// vertices need no separate check: each contains a vertex, and subsets of
/// a basis span direct summands.
pub fn validate(pair: &CharPair) -> ValidationReport {
    let rank = pair.torus_rank;
    let mut failures = Vec::new();
    for v in pair.polytope.vertices() {
        let facets: Vec<FacetId> = v
            .facets
            .iter()
            .filter(|f| pair.assignment.contains_key(f))
            .copied()
            .collect();
        if facets.is_empty() {
            continue;
        }
        let vectors: Vec<CharVector> = facets.iter().map(|f| pair.assignment[f].clone()).collect();
        let raw: Vec<Vec<BigInt>> = vectors.iter().map(|c| c.to_vec()).collect();
        let reason = if raw.len() > rank {
            Some(FailureReason::TooMany)
        } else if !is_direct_summand(&raw, rank).unwrap_or(false) {
            Some(FailureReason::NotDirectSummand)
        } else if raw.len() == rank && !is_unimodular_basis(&raw, rank).unwrap_or(false) {
            Some(FailureReason::NotUnimodular)
        } else {
            None
        };
        if let Some(reason) = reason {
            failures.push(VertexFailure {
                vertex: v.name.clone(),
                facets,
                vectors,
                reason,
            });
        }
    }
    ValidationReport {
        vertices_checked: pair.polytope.vertices().len(),
        failures,
    }
}

/// Restricts a pair to one of its boundary facets, giving the closed pair of
/// that boundary component.
pub fn restrict_to_facet(pair: &CharPair, facet: FacetId) -> Result<CharPair, CharError> {
    if pair.polytope.facet(facet).is_none() {
        return Err(CharError::UnknownFacet(facet));
    }
    if pair.assignment.contains_key(&facet) {
        return Err(CharError::FacetMapped(facet));
    }
    let sub = pair.polytope.facet_polytope(facet)?;
    let mut assignment = BTreeMap::new();
    for g in sub.facet_ids() {
        let v = pair
            .assignment
            .get(&g)
            .ok_or(CharError::AdjacentUnmapped(g))?;
        assignment.insert(g, v.to_vec());
    }
    CharPair::attach(sub, pair.torus_rank, assignment)
}

fn check_construction_dim(n: usize) -> Result<(), CharError> {
    if n < 4 || n % 2 == 1 {
        return Err(CharError::BadDimension(n));
    }
    Ok(())
}

/// The vectors `η_0, ..., η_n` in `Z^{n-1}`; `η_j` is carried by the simplex
/// facet `D_{n-j}`.
pub fn eta_standard(n: usize) -> Result<Vec<CharVector>, CharError> {
    check_construction_dim(n)?;
    let half = n / 2;
    let rank = n - 1;
    let unit = |place: usize| {
        // 1-based place
        let mut v = vec![0i64; rank];
        v[place - 1] = 1;
        v
    };
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let v = if j + 1 < half {
            unit(j + 1)
        } else if j + 1 == half {
            (0..rank).map(|i| i64::from(i < half)).collect()
        } else if j < n {
            unit(j)
        } else {
            (0..rank).map(|i| i64::from(i + 1 >= half)).collect()
        };
        out.push(CharVector::from_i64(&v)?);
    }
    Ok(out)
}

/// `η` as a facet assignment on the original facets `D_0..D_n`.
pub fn eta_assignment(n: usize) -> Result<BTreeMap<FacetId, Vec<BigInt>>, CharError> {
    let eta = eta_standard(n)?;
    Ok((0..=n)
        .map(|i| (FacetId(i as u32), eta[n - i].to_vec()))
        .collect())
}

/// The involution `ρ` of `{0, ..., n}`.
pub fn rho_permutation(n: usize) -> Result<Permutation, CharError> {
    check_construction_dim(n)?;
    let half = n / 2;
    let images = (0..=n)
        .map(|j| {
            if j + 1 == half {
                n
            } else if j == half {
                half
            } else if j == n {
                half - 1
            } else {
                n - 1 - j
            }
        })
        .collect();
    Ok(Permutation::new(images)?)
}

/// The automorphism `α_i ↦ α_{n-i}` of `Z^{n-1}`: the anti-diagonal matrix.
pub fn delta_matrix(n: usize) -> Result<IntMatrix, CharError> {
    check_construction_dim(n)?;
    let k = n - 1;
    let mut entries = vec![BigInt::zero(); k * k];
    for i in 0..k {
        entries[i * k + (k - 1 - i)] = BigInt::one();
    }
    Ok(IntMatrix::new(k, k, entries)?)
}

/// A facet bijection together with a lattice automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationWitness {
    phi: BTreeMap<FacetId, FacetId>,
    delta: IntMatrix,
}

impl TranslationWitness {
    pub fn new(phi: BTreeMap<FacetId, FacetId>, delta: IntMatrix) -> Result<Self, CharError> {
        let det = determinant(&delta)?;
        if !det.abs().is_one() {
            return Err(CharError::NotUnimodular(det));
        }
        Ok(Self { phi, delta })
    }

    pub fn identity(pair: &CharPair) -> Self {
        Self {
            phi: pair.polytope.facet_ids().map(|f| (f, f)).collect(),
            delta: IntMatrix::identity(pair.torus_rank),
        }
    }

    pub fn phi(&self) -> &BTreeMap<FacetId, FacetId> {
        &self.phi
    }

    pub fn delta(&self) -> &IntMatrix {
        &self.delta
    }

    pub fn inverse(&self) -> Result<Self, CharError> {
        let delta = unimodular_inverse(&self.delta)?.ok_or_else(|| {
            CharError::NotUnimodular(determinant(&self.delta).unwrap_or_default())
        })?;
        Ok(Self {
            phi: self.phi.iter().map(|(a, b)| (*b, *a)).collect(),
            delta,
        })
    }

    /// First `self`, then `next`.
    pub fn then(&self, next: &TranslationWitness) -> Result<Self, CharError> {
        let phi = self
            .phi
            .iter()
            .filter_map(|(a, b)| next.phi.get(b).map(|c| (*a, *c)))
            .collect();
        Ok(Self {
            phi,
            delta: next.delta.mul(&self.delta)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationMismatch {
    pub facet: FacetId,
    pub image: Option<FacetId>,
    pub expected: Option<CharVector>,
    pub found: Option<CharVector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationReport {
    pub isomorphism: bool,
    pub mismatches: Vec<TranslationMismatch>,
}

impl TranslationReport {
    pub fn holds(&self) -> bool {
        self.isomorphism && self.mismatches.is_empty()
    }
}

/// Checks that `w` is a δ-translation from `pair1` to `pair2`: `phi` is a
/// combinatorial isomorphism and `δ · λ₁(F) = ±λ₂(phi(F))` on every facet.
pub fn verify_translation(
    pair1: &CharPair,
    pair2: &CharPair,
    w: &TranslationWitness,
) -> Result<TranslationReport, CharError> {
    if pair1.torus_rank != pair2.torus_rank {
        return Err(CharError::RankMismatch(pair1.torus_rank, pair2.torus_rank));
    }
    let rank = pair1.torus_rank;
    if w.delta.rows() != rank || w.delta.cols() != rank {
        return Err(CharError::WitnessShape {
            rows: w.delta.rows(),
            cols: w.delta.cols(),
            rank,
        });
    }
    let isomorphism = is_combinatorial_isomorphism(&pair1.polytope, &pair2.polytope, &w.phi);
    let mut mismatches = Vec::new();
    for f in pair1.polytope.facet_ids() {
        let image = w.phi.get(&f).copied();
        let expected = match pair1.assignment.get(&f) {
            Some(v) => Some(CharVector::new(apply_matrix(&w.delta, v.as_slice())?)?),
            None => None,
        };
        let found = image.and_then(|g| pair2.assignment.get(&g)).cloned();
        if image.is_none() || expected != found {
            mismatches.push(TranslationMismatch {
                facet: f,
                image,
                expected,
                found,
            });
        }
    }
    Ok(TranslationReport {
        isomorphism,
        mismatches,
    })
}

/// Normal form of a closed pair over a simplex: a basis change carrying the
/// vectors, up to the recorded signs, to the standard basis plus the
/// all-ones vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexNormalForm {
    /// Facet carrying the all-ones vector (largest facet id).
    pub residual: FacetId,
    /// Remaining facets in ascending order, carrying `e_1, ..., e_r`.
    pub basis: Vec<FacetId>,
    pub change_of_basis: IntMatrix,
    /// Sign applied to each facet's canonical vector before the basis change.
    pub signs: BTreeMap<FacetId, i8>,
    pub normal_form: BTreeMap<FacetId, Vec<BigInt>>,
}

impl SimplexNormalForm {
    /// Applies the recorded witness to `pair`.
    pub fn apply(&self, pair: &CharPair) -> Result<BTreeMap<FacetId, Vec<BigInt>>, CharError> {
        let mut out = BTreeMap::new();
        for (f, v) in &pair.assignment {
            let sign = BigInt::from(*self.signs.get(f).unwrap_or(&1));
            let signed: Vec<BigInt> = v.as_slice().iter().map(|x| x * &sign).collect();
            out.insert(*f, apply_matrix(&self.change_of_basis, &signed)?);
        }
        Ok(out)
    }
}

pub fn normalize_simplex_pair(pair: &CharPair) -> Result<SimplexNormalForm, CharError> {
    let p = &pair.polytope;
    let d = p.dim();
    if p.facets().len() != d + 1 || p.vertices().len() != d + 1 {
        return Err(CharError::NotASimplex);
    }
    if !pair.is_closed() {
        return Err(CharError::NotClosed);
    }
    let report = validate(pair);
    if !report.is_valid() {
        return Err(CharError::Invalid(report.failures.len()));
    }
    let ids: Vec<FacetId> = p.facet_ids().collect();
    let (residual, basis) = ids.split_last().ok_or(CharError::NotASimplex)?;
    let r = pair.torus_rank;

    // columns of `b` are the basis-facet vectors
    let rows: Vec<Vec<BigInt>> = basis.iter().map(|f| pair.assignment[f].to_vec()).collect();
    let b = IntMatrix::from_rows(&rows)?.transpose();
    let b_inv = unimodular_inverse(&b)?.ok_or(CharError::Invalid(1))?;
    let c = apply_matrix(&b_inv, pair.assignment[residual].as_slice())?;
    if c.iter().any(|x| !x.abs().is_one()) {
        return Err(CharError::Invalid(1));
    }

    // rescale row i by c_i so the residual maps to all-ones
    let mut entries = Vec::with_capacity(r * r);
    for (i, ci) in c.iter().enumerate() {
        entries.extend(b_inv.row(i).iter().map(|x| x * ci));
    }
    let change_of_basis = IntMatrix::new(r, r, entries)?;

    let mut signs = BTreeMap::new();
    let mut normal_form = BTreeMap::new();
    for (i, f) in basis.iter().enumerate() {
        signs.insert(*f, if c[i].is_positive() { 1 } else { -1 });
        let mut e = vec![BigInt::zero(); r];
        e[i] = BigInt::one();
        normal_form.insert(*f, e);
    }
    signs.insert(*residual, 1);
    normal_form.insert(*residual, vec![BigInt::one(); r]);

    let nf = SimplexNormalForm {
        residual: *residual,
        basis: basis.to_vec(),
        change_of_basis,
        signs,
        normal_form,
    };
    debug_assert_eq!(nf.apply(pair).ok().as_ref(), Some(&nf.normal_form));
    Ok(nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundaryLabel {
    Cp,
    ConjugateCp,
}

impl BoundaryLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryLabel::Cp => "CP",
            BoundaryLabel::ConjugateCp => "conjugate-CP",
        }
    }
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationRecord {
    pub n: usize,
    pub sign_rho: i8,
    pub det_delta: i8,
    pub boundary_label: BoundaryLabel,
}

impl OrientationRecord {
    /// `ρ` even and `δ′` orientation reversing together, or the reverse.
    pub fn is_consistent(&self) -> bool {
        let expect_label = if self.det_delta < 0 {
            BoundaryLabel::ConjugateCp
        } else {
            BoundaryLabel::Cp
        };
        self.sign_rho == -self.det_delta && self.boundary_label == expect_label
    }

    pub fn describe(&self) -> String {
        alloc::format!(
            "sign(rho) = {:+}, det(delta') = {:+}, boundary {}^{}",
            self.sign_rho,
            self.det_delta,
            self.boundary_label,
            self.n - 1
        )
    }
}

/// Sign of `ρ`, determinant of `δ′`, and the boundary label: `CP` when
/// `n ≡ 2 (mod 4)`, conjugate `CP` when `n ≡ 0 (mod 4)`.
pub fn orientation_signs(n: usize) -> Result<OrientationRecord, CharError> {
    let sign_rho = permutation_sign(&rho_permutation(n)?);
    let det = determinant(&delta_matrix(n)?)?;
    let det_delta = if det.is_positive() { 1 } else { -1 };
    let boundary_label = if n % 4 == 2 {
        BoundaryLabel::Cp
    } else {
        BoundaryLabel::ConjugateCp
    };
    Ok(OrientationRecord {
        n,
        sign_rho,
        det_delta,
        boundary_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{rational_from_i64, truncated_simplex, truncation_facets};
    use crate::zlinalg::zvec;

    fn cv(v: &[i64]) -> CharVector {
        CharVector::from_i64(v).unwrap()
    }

    fn w_pair(n: usize) -> CharPair {
        let t = truncated_simplex(n, &rational_from_i64(1, 5)).unwrap();
        CharPair::attach(t, n - 1, eta_assignment(n).unwrap()).unwrap()
    }

    fn cp3() -> CharPair {
        let s = SimplePolytope::simplex(3).unwrap();
        let vecs = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]];
        let a = (0..4)
            .map(|i| (FacetId(i), zvec(&vecs[i as usize])))
            .collect();
        CharPair::attach(s, 3, a).unwrap()
    }

    #[test]
    fn canonical_sign() {
        assert_eq!(cv(&[0, -1, 2]), cv(&[0, 1, -2]));
        assert_eq!(cv(&[0, -1, 2]).as_slice(), zvec(&[0, 1, -2]).as_slice());
        assert_eq!(CharVector::from_i64(&[0, 0]), Err(CharError::ZeroVector));
    }

    #[test]
    fn eta_four() {
        let eta = eta_standard(4).unwrap();
        let expected = [[1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]];
        for (j, e) in expected.iter().enumerate() {
            assert_eq!(eta[j], cv(e));
        }
    }

    #[test]
    fn eta_six_special_rows() {
        let eta = eta_standard(6).unwrap();
        assert_eq!(eta[2], cv(&[1, 1, 1, 0, 0]));
        assert_eq!(eta[6], cv(&[0, 0, 1, 1, 1]));
        assert_eq!(eta[0], cv(&[1, 0, 0, 0, 0]));
        assert_eq!(eta[3], cv(&[0, 0, 1, 0, 0]));
        assert_eq!(eta[5], cv(&[0, 0, 0, 0, 1]));
        assert_eq!(eta_standard(5), Err(CharError::BadDimension(5)));
        assert_eq!(eta_standard(2), Err(CharError::BadDimension(2)));
    }

    #[test]
    fn attach_errors() {
        let s = SimplePolytope::simplex(3).unwrap();
        let mut a: BTreeMap<FacetId, Vec<BigInt>> = BTreeMap::new();
        a.insert(FacetId(0), zvec(&[1, 0]));
        assert!(matches!(
            CharPair::attach(s.clone(), 3, a),
            Err(CharError::LengthMismatch { .. })
        ));
        let a = BTreeMap::from([(FacetId(7), zvec(&[1, 0, 0]))]);
        assert_eq!(
            CharPair::attach(s.clone(), 3, a),
            Err(CharError::UnknownFacet(FacetId(7)))
        );
        let full: BTreeMap<FacetId, Vec<BigInt>> =
            (0..4).map(|i| (FacetId(i), zvec(&[1, 1]))).collect();
        assert!(matches!(
            CharPair::attach(s, 2, full),
            Err(CharError::ClosedRankMismatch { .. })
        ));
    }

    #[test]
    fn validity() {
        let w = w_pair(4);
        assert_eq!(w.boundary_facets(), truncation_facets(4).to_vec());
        let report = validate(&w);
        assert_eq!(report.vertices_checked, 16);
        assert!(report.is_valid());
        assert!(validate(&cp3()).is_valid());
    }

    #[test]
    fn mutated_eta_fails_where_duplicates_meet() {
        // η_1 (on D3) replaced by (1,0,0) = η_0 (on D4)
        let t = truncated_simplex(4, &rational_from_i64(1, 5)).unwrap();
        let mut a = eta_assignment(4).unwrap();
        a.insert(FacetId(3), zvec(&[1, 0, 0]));
        let pair = CharPair::attach(t, 3, a).unwrap();
        let report = validate(&pair);
        let expected: Vec<VertexName> = pair
            .polytope()
            .vertices()
            .iter()
            .filter(|v| v.facets.contains(&FacetId(3)) && v.facets.contains(&FacetId(4)))
            .map(|v| v.name.clone())
            .collect();
        let failing: Vec<VertexName> = report.failures.iter().map(|f| f.vertex.clone()).collect();
        assert_eq!(failing, expected);
        assert_eq!(failing.len(), 4);
    }

    #[test]
    fn restriction_to_p3_is_simplex_pair() {
        let w = w_pair(4);
        let [p1, p2, p3] = truncation_facets(4);
        let r3 = restrict_to_facet(&w, p3).unwrap();
        assert!(r3.is_closed());
        assert_eq!(r3.polytope().dim(), 3);
        let eta = eta_standard(4).unwrap();
        let expected: BTreeMap<FacetId, CharVector> = [0u32, 1, 3, 4]
            .iter()
            .map(|&i| (FacetId(i), eta[4 - i as usize].clone()))
            .collect();
        assert_eq!(r3.assignment(), &expected);
        assert!(validate(&r3).is_valid());

        let r1 = restrict_to_facet(&w, p1).unwrap();
        assert_eq!(r1.polytope().vertices().len(), 6);
        assert_eq!(r1.assignment().len(), 5);
        assert!(restrict_to_facet(&w, p2).is_ok());
        assert_eq!(
            restrict_to_facet(&w, FacetId(0)),
            Err(CharError::FacetMapped(FacetId(0)))
        );
    }

    #[test]
    fn restriction_needs_mapped_neighbours() {
        let t = truncated_simplex(4, &rational_from_i64(1, 5)).unwrap();
        let mut a = eta_assignment(4).unwrap();
        a.remove(&FacetId(0));
        let pair = CharPair::attach(t, 3, a).unwrap();
        let [_, _, p3] = truncation_facets(4);
        assert_eq!(
            restrict_to_facet(&pair, p3),
            Err(CharError::AdjacentUnmapped(FacetId(0)))
        );
    }

    #[test]
    fn rho_and_delta() {
        assert_eq!(rho_permutation(4).unwrap().images(), &[3, 4, 2, 0, 1]);
        for n in [4, 6, 8, 10] {
            let rho = rho_permutation(n).unwrap();
            assert_eq!(rho.compose(&rho).unwrap(), Permutation::identity(n + 1));
        }
        assert_eq!(permutation_sign(&rho_permutation(4).unwrap()), 1);
        assert_eq!(permutation_sign(&rho_permutation(6).unwrap()), -1);
        assert_eq!(rho_permutation(7), Err(CharError::BadDimension(7)));

        let d4 = delta_matrix(4).unwrap();
        assert_eq!(
            apply_matrix(&d4, &zvec(&[1, 0, 0])).unwrap(),
            zvec(&[0, 0, 1])
        );
        assert_eq!(
            apply_matrix(&d4, &zvec(&[0, 1, 0])).unwrap(),
            zvec(&[0, 1, 0])
        );
        assert_eq!(
            apply_matrix(&d4, &zvec(&[0, 0, 1])).unwrap(),
            zvec(&[1, 0, 0])
        );
        assert_eq!(determinant(&d4).unwrap(), BigInt::from(-1));
        assert_eq!(
            determinant(&delta_matrix(6).unwrap()).unwrap(),
            BigInt::from(1)
        );
        assert_eq!(delta_matrix(9), Err(CharError::BadDimension(9)));
    }

    #[test]
    fn delta_intertwines_eta_with_rho() {
        for n in (4..=12).step_by(2) {
            let eta = eta_standard(n).unwrap();
            let rho = rho_permutation(n).unwrap();
            let d = delta_matrix(n).unwrap();
            assert_eq!(d.mul(&d).unwrap(), IntMatrix::identity(n - 1));
            for i in 0..=n {
                let image = CharVector::new(apply_matrix(&d, eta[i].as_slice()).unwrap()).unwrap();
                assert_eq!(image, eta[rho.apply(i)]);
            }
        }
    }

    #[test]
    fn identity_translation() {
        let p = cp3();
        let report = verify_translation(&p, &p, &TranslationWitness::identity(&p)).unwrap();
        assert!(report.holds());
        let w = w_pair(4);
        let report = verify_translation(&w, &cp3(), &TranslationWitness::identity(&w));
        assert!(report.is_ok());
        assert!(!report.unwrap().holds());
    }

    #[test]
    fn translation_rank_mismatch() {
        let s = SimplePolytope::simplex(2).unwrap();
        let a = (0..3)
            .map(|i| (FacetId(i), zvec(&[[1, 0], [0, 1], [1, 1]][i as usize])))
            .collect();
        let p2 = CharPair::attach(s, 2, a).unwrap();
        let p3 = cp3();
        assert_eq!(
            verify_translation(&p2, &p3, &TranslationWitness::identity(&p2)),
            Err(CharError::RankMismatch(2, 3))
        );
    }

    #[test]
    fn witness_must_be_unimodular() {
        let m = IntMatrix::from_i64_rows(&[&[2, 0], &[0, 1]]).unwrap();
        assert!(matches!(
            TranslationWitness::new(BTreeMap::new(), m),
            Err(CharError::NotUnimodular(_))
        ));
    }

    #[test]
    fn normalize_standard_cp3() {
        let nf = normalize_simplex_pair(&cp3()).unwrap();
        assert_eq!(nf.change_of_basis, IntMatrix::identity(3));
        assert_eq!(nf.residual, FacetId(3));
        assert!(nf.signs.values().all(|s| *s == 1));
    }

    #[test]
    fn normalize_p3() {
        let w = w_pair(4);
        let [_, _, p3] = truncation_facets(4);
        let r3 = restrict_to_facet(&w, p3).unwrap();
        let nf = normalize_simplex_pair(&r3).unwrap();
        assert_eq!(nf.residual, FacetId(4));
        assert_eq!(nf.normal_form[&FacetId(4)], zvec(&[1, 1, 1]));
        assert_eq!(nf.apply(&r3).unwrap(), nf.normal_form);
        assert!(determinant(&nf.change_of_basis).unwrap().abs().is_one());
    }

    #[test]
    fn normalize_with_sign_flip() {
        // (1,-1) is already canonical; the pair is valid
        let s = SimplePolytope::simplex(2).unwrap();
        let a = (0..3)
            .map(|i| (FacetId(i), zvec(&[[1, 0], [0, 1], [1, -1]][i as usize])))
            .collect();
        let pair = CharPair::attach(s, 2, a).unwrap();
        assert!(validate(&pair).is_valid());
        let nf = normalize_simplex_pair(&pair).unwrap();
        assert_eq!(nf.signs[&FacetId(1)], -1);
        assert_eq!(nf.apply(&pair).unwrap(), nf.normal_form);
    }

    #[test]
    fn normalize_rejects_invalid_and_open() {
        let s = SimplePolytope::simplex(2).unwrap();
        // vertex on facets {0, 2}: det((1,0),(1,2)) = 2
        let a = (0..3)
            .map(|i| (FacetId(i), zvec(&[[1, 0], [0, 1], [1, 2]][i as usize])))
            .collect();
        let pair = CharPair::attach(s, 2, a).unwrap();
        assert_eq!(normalize_simplex_pair(&pair), Err(CharError::Invalid(1)));
        assert_eq!(
            normalize_simplex_pair(&w_pair(4)),
            Err(CharError::NotASimplex)
        );
    }

    #[test]
    fn orientation_records() {
        let r4 = orientation_signs(4).unwrap();
        assert_eq!(
            (r4.sign_rho, r4.det_delta, r4.boundary_label),
            (1, -1, BoundaryLabel::ConjugateCp)
        );
        let r6 = orientation_signs(6).unwrap();
        assert_eq!(
            (r6.sign_rho, r6.det_delta, r6.boundary_label),
            (-1, 1, BoundaryLabel::Cp)
        );
        let r8 = orientation_signs(8).unwrap();
        assert_eq!(
            (r8.sign_rho, r8.det_delta, r8.boundary_label),
            (1, -1, BoundaryLabel::ConjugateCp)
        );
        assert!(r4.is_consistent() && r6.is_consistent() && r8.is_consistent());
        assert_eq!(orientation_signs(5), Err(CharError::BadDimension(5)));
    }
}
