//! Classification of point subsets of X against the four intriguing types,
//! the constructions for types 2, 3 and 4, and the counting laws they obey.
//!
//! A nonempty proper subset Y is intriguing of type i when its characteristic
//! vector lies in V₀ ⊕ Vᵢ, equivalently when the scaled projections
//! `E_scaled[j]·χ_Y` vanish for the three other nonprincipal j. The
//! classifier computes those projections exactly and then cross-checks the
//! resulting two-valued degree constants of every relation graph against the
//! closed-form eigenvalues; a disagreement between the two routes is a hard
//! (panicking) error, since it can only mean the scheme itself is corrupt.

use crate::bits::Bitset;
use crate::geometry::{LineClass, ProjPoint, QuadraticSpace, SolidClass, Subspace};
use crate::scheme::{self, SchemeInstance};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntriguingError {
    #[error("point index {index} is out of range for |X| = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point is not on the boundary H ∩ Q")]
    NotOnBoundary,
    #[error("construction parameters are invalid: {0}")]
    BadConfiguration(String),
    #[error("construction requires q {expected}, but q = {q}")]
    ParityError { q: u32, expected: &'static str },
    #[error("transversal condition violated: {0}")]
    NotATransversal(String),
    #[error("(k−θ)·|Y| is not divisible by |X|: no intriguing set with these parameters")]
    NonIntegral,
    #[error("θ = k is the principal eigenvalue; degree formula is degenerate")]
    DegenerateEigenvalue,
    #[error("both sets classify to the same type; the product law is not claimed")]
    SameType,
    #[error("set is not intriguing")]
    NotIntriguing,
    #[error("intersection product law violated: {0}")]
    ProductViolated(String),
    #[error("sigma dichotomy violated: {0}")]
    DichotomyViolated(String),
}

/// A subset of X, stored as a bitset over the canonical point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSubset {
    bits: Bitset,
    size: usize,
}

impl PointSubset {
    pub fn empty(n: usize) -> Self {
        PointSubset {
            bits: Bitset::new(n),
            size: 0,
        }
    }

    pub fn from_indices<I: IntoIterator<Item = u32>>(
        n: usize,
        indices: I,
    ) -> Result<Self, IntriguingError> {
        let mut bits = Bitset::new(n);
        for i in indices {
            let i = i as usize;
            if i >= n {
                return Err(IntriguingError::IndexOutOfRange { index: i, n });
            }
            bits.set(i);
        }
        let size = bits.count_ones();
        Ok(PointSubset { bits, size })
    }

    pub fn full(n: usize) -> Self {
        Self::from_indices(n, 0..n as u32).unwrap()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    pub fn indices(&self) -> Vec<u32> {
        self.bits.iter_ones().map(|i| i as u32).collect()
    }

    pub fn words(&self) -> &[u64] {
        self.bits.words()
    }

    pub fn intersection_size(&self, other: &PointSubset) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn complement(&self) -> PointSubset {
        let n = self.bits.len();
        let mut bits = Bitset::new(n);
        for i in 0..n {
            if !self.bits.get(i) {
                bits.set(i);
            }
        }
        let size = n - self.size;
        PointSubset { bits, size }
    }

    pub fn union(&self, other: &PointSubset) -> PointSubset {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        let size = bits.count_ones();
        PointSubset { bits, size }
    }

    /// Image under σ, given the involution table of the space.
    pub fn sigma_image(&self, sigma: &[u32]) -> PointSubset {
        let mut bits = Bitset::new(self.bits.len());
        for i in self.bits.iter_ones() {
            bits.set(sigma[i] as usize);
        }
        PointSubset {
            bits,
            size: self.size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetClass {
    NonIntriguing,
    /// intriguing of type i ∈ {1,2,3,4}
    Intriguing(u8),
    /// Y = ∅ or Y = X: the characteristic vector lies in V₀ alone
    Principal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaBehavior {
    Invariant,
    DisjointImage,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationDegrees {
    /// every point of Y meets Y in h1 points, every point off Y in h2
    TwoValued { h1: i64, h2: i64 },
    NonConstant,
    /// Y empty or full: one of the two sides does not exist
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntrigueReport {
    pub q: u32,
    pub size: usize,
    pub class: SetClass,
    /// degree data of the graphs (X, R₁) … (X, R₄)
    pub degrees: [RelationDegrees; 4],
    pub sigma: SigmaBehavior,
    /// tight-set parameter α = |Y|/(q+1), attached for types 2 and 3
    pub alpha: Option<i64>,
}

impl fmt::Display for IntrigueReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "q: {}", self.q)?;
        writeln!(f, "size: {}", self.size)?;
        let class = match self.class {
            SetClass::Intriguing(i) => i.to_string(),
            SetClass::NonIntriguing => "none".to_string(),
            SetClass::Principal => "principal-or-empty".to_string(),
        };
        writeln!(f, "type: {class}")?;
        let sigma = match self.sigma {
            SigmaBehavior::Invariant => "invariant",
            SigmaBehavior::DisjointImage => "disjoint_image",
            SigmaBehavior::Mixed => "mixed",
        };
        writeln!(f, "sigma: {sigma}")?;
        if let Some(alpha) = self.alpha {
            writeln!(f, "alpha: {alpha}")?;
        }
        for (idx, d) in self.degrees.iter().enumerate() {
            match d {
                RelationDegrees::TwoValued { h1, h2 } => {
                    writeln!(f, "r{}_degrees: ({}, {})", idx + 1, h1, h2)?
                }
                RelationDegrees::NonConstant => writeln!(f, "r{}_degrees: non-constant", idx + 1)?,
                RelationDegrees::Degenerate => writeln!(f, "r{}_degrees: degenerate", idx + 1)?,
            }
        }
        Ok(())
    }
}

impl IntrigueReport {
    pub fn is_intriguing(&self) -> bool {
        matches!(self.class, SetClass::Intriguing(_))
    }
}

/// Degree constants of two-valued regularity for eigenvalue θ:
/// h₂ = (k−θ)·|Y|/|X| and h₁ = θ + h₂.
pub fn expected_degrees(
    y_size: i64,
    x_size: i64,
    valency: i64,
    theta: i64,
) -> Result<(i64, i64), IntriguingError> {
    if theta == valency {
        return Err(IntriguingError::DegenerateEigenvalue);
    }
    degree_pair(y_size, x_size, valency, theta).ok_or(IntriguingError::NonIntegral)
}

fn degree_pair(y_size: i64, x_size: i64, valency: i64, theta: i64) -> Option<(i64, i64)> {
    let num = (valency - theta) * y_size;
    if num % x_size != 0 {
        return None;
    }
    let h2 = num / x_size;
    Some((theta + h2, h2))
}

fn sigma_behavior(y: &PointSubset, sigma: &[u32]) -> SigmaBehavior {
    let image = y.sigma_image(sigma);
    if image == *y {
        SigmaBehavior::Invariant
    } else if image.intersection_size(y) == 0 {
        SigmaBehavior::DisjointImage
    } else {
        SigmaBehavior::Mixed
    }
}

/// Shared classifier core: takes the per-point degree vectors
/// d[u][i] = |R_i(u) ∩ Y| and produces the report.
fn classify_from_degrees(
    q: u32,
    n: usize,
    p_mat: &[[i64; 5]; 5],
    q_mat: &[[i64; 5]; 5],
    degrees: &[[i64; 5]],
    y: &PointSubset,
    sigma: &[u32],
) -> IntrigueReport {
    let y_size = y.len();

    // scaled projections: E_scaled[j]·χ_Y vanishes iff Σ_i Q[i][j]·d_i(u) = 0 ∀u
    let mut vanishes = [true; 5];
    for d in degrees.iter() {
        for (j, v) in vanishes.iter_mut().enumerate() {
            if *v {
                let proj: i64 = (0..5).map(|i| q_mat[i][j] * d[i]).sum();
                if proj != 0 {
                    *v = false;
                }
            }
        }
    }

    let class = if y_size == 0 || y_size == n {
        SetClass::Principal
    } else {
        let nonvanishing: Vec<usize> = (1..5).filter(|&j| !vanishes[j]).collect();
        match nonvanishing.len() {
            1 => SetClass::Intriguing(nonvanishing[0] as u8),
            0 => unreachable!("a proper nonempty subset cannot project into V₀ alone"),
            _ => SetClass::NonIntriguing,
        }
    };

    // per-relation degree data, computed combinatorially
    let degenerate = y_size == 0 || y_size == n;
    let mut rel_degrees = [RelationDegrees::NonConstant; 4];
    for i in 1..5 {
        if degenerate {
            rel_degrees[i - 1] = RelationDegrees::Degenerate;
            continue;
        }
        let mut inside: Option<i64> = None;
        let mut outside: Option<i64> = None;
        let mut constant = true;
        for (u, d) in degrees.iter().enumerate() {
            let slot = if y.contains(u) { &mut inside } else { &mut outside };
            match slot {
                None => *slot = Some(d[i]),
                Some(v) if *v != d[i] => {
                    constant = false;
                    break;
                }
                _ => {}
            }
        }
        if constant {
            rel_degrees[i - 1] = RelationDegrees::TwoValued {
                h1: inside.expect("proper nonempty set has inside points"),
                h2: outside.expect("proper nonempty set has outside points"),
            };
        }
    }

    // redundant cross-check: for an intriguing set the degree constants of
    // every relation graph must match the closed-form eigenvalues
    if let SetClass::Intriguing(t) = class {
        for i in 1..5 {
            let expected = degree_pair(
                y_size as i64,
                n as i64,
                p_mat[0][i],
                p_mat[t as usize][i],
            );
            let got = match rel_degrees[i - 1] {
                RelationDegrees::TwoValued { h1, h2 } => Some((h1, h2)),
                _ => None,
            };
            assert_eq!(
                expected, got,
                "projection-based and degree-based classifications disagree \
                 on relation {i} (type {t}, |Y| = {y_size}); the scheme data is corrupt"
            );
        }
    }

    let alpha = match class {
        SetClass::Intriguing(2) | SetClass::Intriguing(3) => {
            assert_eq!(y_size % (q as usize + 1), 0, "tight-set size must be divisible by q+1");
            Some((y_size / (q as usize + 1)) as i64)
        }
        _ => None,
    };

    IntrigueReport {
        q,
        size: y_size,
        class,
        degrees: rel_degrees,
        sigma: sigma_behavior(y, sigma),
        alpha,
    }
}

/// Classifies Y against the four intriguing types using the materialized
/// relation matrices.
pub fn classify(scheme: &SchemeInstance, y: &PointSubset) -> IntrigueReport {
    let n = scheme.n();
    assert_eq!(y.universe(), n, "subset universe does not match the scheme");
    let mut degrees = vec![[0i64; 5]; n];
    for (u, d) in degrees.iter_mut().enumerate() {
        for i in 0..5 {
            d[i] = crate::bits::and_count(scheme.adjacency(i).row(u), y.words()) as i64;
        }
    }
    classify_from_degrees(
        scheme.q(),
        n,
        scheme.p_matrix(),
        scheme.q_matrix(),
        &degrees,
        y,
        scheme.space().sigma_x_table(),
    )
}

/// Classifies Y without materialized matrices, recomputing each relation from
/// the geometry on the fly. Produces the identical report to [`classify`];
/// intended for q beyond [`scheme::MAX_SCHEME_Q`].
pub fn classify_by_scan(space: &QuadraticSpace, y: &PointSubset) -> IntrigueReport {
    let n = space.x_points().len();
    assert_eq!(y.universe(), n, "subset universe does not match the space");
    let pts = space.x_points();
    let sigma = space.sigma_x_table();
    let y_idx = y.indices();
    let mut degrees = vec![[0i64; 5]; n];
    for (u, d) in degrees.iter_mut().enumerate() {
        let pu = pts[u].coords();
        for &v in &y_idx {
            let v = v as usize;
            let k = if u == v {
                0
            } else if sigma[v] as usize == u {
                4
            } else {
                let c1 = space.eval_b(pu, pts[v].coords()) == 0;
                let c2 = space.eval_b(pu, pts[sigma[v] as usize].coords()) == 0;
                match (c1, c2) {
                    (true, false) => 3,
                    (false, true) => 1,
                    (false, false) => 2,
                    (true, true) => unreachable!("collinear to both conjugates"),
                }
            };
            d[k] += 1;
        }
    }
    let (p_mat, q_mat) = scheme::closed_form_eigenmatrices(space.q());
    classify_from_degrees(space.q(), n, &p_mat, &q_mat, &degrees, y, sigma)
}

// ---------------------------------------------------------------------------
// constructions
// ---------------------------------------------------------------------------

/// Type-4 intriguing set: all points of X collinear to a boundary point w.
/// Size q²(q−1).
pub fn construct_type4(
    space: &QuadraticSpace,
    w: &ProjPoint,
) -> Result<PointSubset, IntriguingError> {
    if !space.on_quadric(w) || !space.in_hyperplane(w) {
        return Err(IntriguingError::NotOnBoundary);
    }
    let n = space.x_points().len();
    let idx = scheme::collinear_x_indices(space, w);
    let q = space.q() as usize;
    debug_assert_eq!(idx.len(), q * q * (q - 1));
    PointSubset::from_indices(n, idx)
}

/// Parameters of the type-2 construction: a hyperbolic solid S ⊂ H, an
/// elliptic line ℓ₁ ⊂ S, and a point p₁ of S^⊥ off H.
#[derive(Debug, Clone)]
pub struct Type2Params {
    pub solid: Subspace,
    pub line: Subspace,
    pub vertex: ProjPoint,
}

/// Type-2 intriguing set of minimal size 4(q+1): the union of two
/// perpendicular conics together with its σ-image. With explicit parameters
/// every validation failure is a `BadConfiguration`; with `None` the
/// canonically smallest valid parameters are chosen.
pub fn construct_type2(
    space: &QuadraticSpace,
    params: Option<&Type2Params>,
) -> Result<PointSubset, IntriguingError> {
    if let Some(p) = params {
        return build_type2(space, &p.solid, &p.line, &p.vertex);
    }
    for solid in space.solids_in_hyperplane() {
        if space.classify_solid(&solid) != Ok(SolidClass::Hyperbolic)
            || space.subspace_contains(&solid, space.pole())
        {
            continue;
        }
        for line in space.lines_of(&solid) {
            if space.classify_line(&line) != Ok(LineClass::Elliptic) {
                continue;
            }
            let sperp = space.perp(&solid);
            for vertex in space.subspace_points(&sperp) {
                if space.in_hyperplane(&vertex) || vertex == *space.pole() {
                    continue;
                }
                if let Ok(set) = build_type2(space, &solid, &line, &vertex) {
                    return Ok(set);
                }
            }
        }
    }
    Err(IntriguingError::BadConfiguration(
        "no valid type-2 configuration exists".into(),
    ))
}

fn conic_points(
    space: &QuadraticSpace,
    plane: &Subspace,
) -> Result<Vec<ProjPoint>, IntriguingError> {
    if plane.rank() != 3 {
        return Err(IntriguingError::BadConfiguration(format!(
            "expected a plane, got rank {}",
            plane.rank()
        )));
    }
    let pts: Vec<ProjPoint> = space
        .subspace_points(plane)
        .into_iter()
        .filter(|p| space.on_quadric(p))
        .collect();
    if pts.len() != space.q() as usize + 1 {
        return Err(IntriguingError::BadConfiguration(format!(
            "plane section has {} quadric points, expected a conic of {}",
            pts.len(),
            space.q() + 1
        )));
    }
    if pts.iter().any(|p| space.in_hyperplane(p)) {
        return Err(IntriguingError::BadConfiguration(
            "conic meets the hyperplane".into(),
        ));
    }
    Ok(pts)
}

fn build_type2(
    space: &QuadraticSpace,
    solid: &Subspace,
    line: &Subspace,
    vertex: &ProjPoint,
) -> Result<PointSubset, IntriguingError> {
    let bad = |msg: &str| IntriguingError::BadConfiguration(msg.into());
    if solid.rank() != 4 || space.classify_solid(solid) != Ok(SolidClass::Hyperbolic) {
        return Err(bad("S must be a solid meeting Q in a hyperbolic quadric"));
    }
    if !solid.rows().iter().all(|r| r[0] == r[1]) {
        return Err(bad("S must be contained in H"));
    }
    if line.rank() != 2 || space.classify_line(line) != Ok(LineClass::Elliptic) {
        return Err(bad("ℓ₁ must be an elliptic line"));
    }
    if !line
        .rows()
        .iter()
        .all(|r| space.subspace_contains(solid, &space.point_from_codes(*r).unwrap()))
    {
        return Err(bad("ℓ₁ must lie in S"));
    }
    let sperp = space.perp(solid);
    if space.classify_line(&sperp) != Ok(LineClass::Elliptic) {
        return Err(bad("S^⊥ is not an elliptic line"));
    }
    if !space.subspace_contains(&sperp, vertex) {
        return Err(bad("p₁ must lie on S^⊥"));
    }
    if space.in_hyperplane(vertex) || vertex == space.pole() {
        return Err(bad("p₁ must avoid H^⊥ and S^⊥ ∩ H"));
    }

    // ℓ₂ := ℓ₁^⊥ ∩ S is elliptic; p₂ := p₁^⊥ ∩ S^⊥
    let line2 = space.intersect(&space.perp(line), solid);
    if line2.rank() != 2 || space.classify_line(&line2) != Ok(LineClass::Elliptic) {
        return Err(bad("ℓ₂ = ℓ₁^⊥ ∩ S is not an elliptic line"));
    }
    let p2s = space.intersect(&space.perp_point(vertex), &sperp);
    let p2 = p2s
        .as_point()
        .ok_or_else(|| bad("p₂ = p₁^⊥ ∩ S^⊥ is not a single point"))?;
    if p2 == *space.pole() || space.in_hyperplane(&p2) || space.on_quadric(&p2) {
        return Err(bad("p₂ must avoid H^⊥, H, and the quadric"));
    }

    let plane1 = space.span_with(line, vertex);
    let plane2 = space.span_with(&line2, &p2);
    let c1 = conic_points(space, &plane1)?;
    let c2 = conic_points(space, &plane2)?;

    let n = space.x_points().len();
    let mut bits = Bitset::new(n);
    let mut total = 0usize;
    for p in c1.iter().chain(&c2) {
        for image in [*p, space.sigma_linear(p)] {
            let idx = space.x_index(&image).expect("conic point lies in X");
            if !bits.get(idx) {
                bits.set(idx);
                total += 1;
            }
        }
    }
    if total != 4 * (space.q() as usize + 1) {
        return Err(bad("the four conics are not pairwise disjoint"));
    }
    PointSubset::from_indices(n, bits.iter_ones().map(|i| i as u32))
}

/// Type-3 intriguing set for even q: a σ-transversal M of the q off-H points
/// of S^⊥ (S a hyperbolic solid of H) determines T_M = ∪_{p∈M} p^⊥ ∩ X of
/// size |X|/2.
pub fn construct_type3_even(
    space: &QuadraticSpace,
    params: Option<(&Subspace, &[ProjPoint])>,
) -> Result<PointSubset, IntriguingError> {
    let q = space.q();
    if q % 2 != 0 {
        return Err(IntriguingError::ParityError { q, expected: "even" });
    }
    let (solid, transversal): (Subspace, Vec<ProjPoint>) = match params {
        Some((s, m)) => (s.clone(), m.to_vec()),
        None => {
            let solid = space
                .solids_in_hyperplane()
                .into_iter()
                .find(|s| {
                    space.classify_solid(s) == Ok(SolidClass::Hyperbolic)
                        && !space.subspace_contains(s, space.pole())
                })
                .ok_or_else(|| {
                    IntriguingError::BadConfiguration("no hyperbolic solid available".into())
                })?;
            let m = canonical_transversal(space, &space.perp(&solid));
            (solid, m)
        }
    };

    if space.classify_solid(&solid) != Ok(SolidClass::Hyperbolic)
        || !solid.rows().iter().all(|r| r[0] == r[1])
    {
        return Err(IntriguingError::BadConfiguration(
            "S must be a hyperbolic solid contained in H".into(),
        ));
    }
    let sperp = space.perp(&solid);
    validate_transversal(space, &sperp, &transversal, q as usize / 2)?;

    let n = space.x_points().len();
    let idx: Vec<u32> = space
        .x_points()
        .iter()
        .enumerate()
        .filter(|(_, x)| {
            transversal
                .iter()
                .any(|p| space.eval_b(x.coords(), p.coords()) == 0)
        })
        .map(|(i, _)| i as u32)
        .collect();
    let set = PointSubset::from_indices(n, idx)?;
    if set.len() != n / 2 {
        return Err(IntriguingError::BadConfiguration(format!(
            "T_M has {} points, expected |X|/2 = {}",
            set.len(),
            n / 2
        )));
    }
    Ok(set)
}

/// One representative per σ-orbit of the off-H points of an elliptic line,
/// taking the canonically smaller point of each pair.
pub fn canonical_transversal(space: &QuadraticSpace, line: &Subspace) -> Vec<ProjPoint> {
    let mut out = Vec::new();
    for p in space.subspace_points(line) {
        if space.in_hyperplane(&p) || p == *space.pole() {
            continue;
        }
        let img = space.sigma_linear(&p);
        if p <= img {
            out.push(p);
        }
    }
    out
}

fn validate_transversal(
    space: &QuadraticSpace,
    line: &Subspace,
    m: &[ProjPoint],
    expected: usize,
) -> Result<(), IntriguingError> {
    if m.len() != expected {
        return Err(IntriguingError::NotATransversal(format!(
            "expected {expected} representatives, got {}",
            m.len()
        )));
    }
    for p in m {
        if !space.subspace_contains(line, p) {
            return Err(IntriguingError::NotATransversal(
                "representative not on S^⊥".into(),
            ));
        }
        if space.in_hyperplane(p) || p == space.pole() {
            return Err(IntriguingError::NotATransversal(
                "representative lies on H".into(),
            ));
        }
    }
    for (i, p) in m.iter().enumerate() {
        let img = space.sigma_linear(p);
        if m[i + 1..].contains(&img) || img == *p {
            return Err(IntriguingError::NotATransversal(
                "two representatives share a σ-orbit".into(),
            ));
        }
    }
    Ok(())
}

/// Parameters of the odd-q type-3 construction.
#[derive(Debug, Clone)]
pub struct Type3OddParams {
    /// a generator line m of Q contained in H
    pub generator: Subspace,
    /// a point u on m
    pub vertex: ProjPoint,
    /// (q−1)/2 points of the line u·H^⊥, one per σ-orbit, avoiding u and H^⊥
    pub s1: Vec<ProjPoint>,
    /// (q−1)/2 lines of the plane ⟨H^⊥, m⟩ through u, one per σ-orbit,
    /// avoiding m and u·H^⊥
    pub s2: Vec<Subspace>,
}

/// Type-3 intriguing set for odd q: the points of X perpendicular to one of
/// the chosen points of S₁ or one of the chosen lines of S₂. Size |X|/2.
pub fn construct_type3_odd(
    space: &QuadraticSpace,
    params: Option<&Type3OddParams>,
) -> Result<PointSubset, IntriguingError> {
    let q = space.q();
    if q % 2 == 0 {
        return Err(IntriguingError::ParityError { q, expected: "odd" });
    }
    let p = match params {
        Some(p) => p.clone(),
        None => default_type3_odd_params(space)?,
    };
    let bad = |msg: &str| IntriguingError::BadConfiguration(msg.into());

    if p.generator.rank() != 2
        || space.classify_line(&p.generator) != Ok(LineClass::Generator)
        || !p.generator.rows().iter().all(|r| r[0] == r[1])
    {
        return Err(bad("m must be a generator line contained in H"));
    }
    if !space.subspace_contains(&p.generator, &p.vertex) || !space.on_quadric(&p.vertex) {
        return Err(bad("u must be a point of m"));
    }
    let z = *space.pole();
    let uz = space.line_through(&p.vertex, &z);
    let plane = space.span_with(&p.generator, &z);
    if plane.rank() != 3 {
        return Err(bad("⟨H^⊥, m⟩ is not a plane"));
    }

    let half = (q as usize - 1) / 2;
    if p.s1.len() != half {
        return Err(IntriguingError::NotATransversal(format!(
            "S₁ must contain (q−1)/2 = {half} points"
        )));
    }
    for y in &p.s1 {
        if !space.subspace_contains(&uz, y) || *y == p.vertex || *y == z {
            return Err(IntriguingError::NotATransversal(
                "S₁ point must lie on u·H^⊥ and avoid u, H^⊥".into(),
            ));
        }
    }
    for (i, y) in p.s1.iter().enumerate() {
        let img = space.sigma_linear(y);
        if img == *y || p.s1[i + 1..].contains(&img) {
            return Err(IntriguingError::NotATransversal(
                "S₁ meets a σ-orbit twice".into(),
            ));
        }
    }
    if p.s2.len() != half {
        return Err(IntriguingError::NotATransversal(format!(
            "S₂ must contain (q−1)/2 = {half} lines"
        )));
    }
    for l in &p.s2 {
        if l.rank() != 2
            || *l == p.generator
            || *l == uz
            || !space.subspace_contains(l, &p.vertex)
            || !l
                .rows()
                .iter()
                .all(|r| space.subspace_contains(&plane, &space.point_from_codes(*r).unwrap()))
        {
            return Err(IntriguingError::NotATransversal(
                "S₂ line must lie in ⟨H^⊥, m⟩, pass through u, and avoid m, u·H^⊥".into(),
            ));
        }
    }
    for (i, l) in p.s2.iter().enumerate() {
        let img = space.apply_sigma(l);
        if img == *l || p.s2[i + 1..].contains(&img) {
            return Err(IntriguingError::NotATransversal(
                "S₂ meets a σ-orbit twice".into(),
            ));
        }
    }

    let n = space.x_points().len();
    let idx: Vec<u32> = space
        .x_points()
        .iter()
        .enumerate()
        .filter(|(_, x)| {
            p.s1
                .iter()
                .any(|y| space.eval_b(x.coords(), y.coords()) == 0)
                || p
                    .s2
                    .iter()
                    .any(|l| l.rows().iter().all(|g| space.eval_b(x.coords(), g) == 0))
        })
        .map(|(i, _)| i as u32)
        .collect();
    let set = PointSubset::from_indices(n, idx)?;
    if set.len() != n / 2 {
        return Err(bad(&format!(
            "T has {} points, expected |X|/2 = {}",
            set.len(),
            n / 2
        )));
    }
    Ok(set)
}

fn default_type3_odd_params(space: &QuadraticSpace) -> Result<Type3OddParams, IntriguingError> {
    // canonically first generator line of H ∩ Q and its smallest point
    let lines = space.generators_in_h();
    let first = lines
        .first()
        .ok_or_else(|| IntriguingError::BadConfiguration("no generator in H ∩ Q".into()))?;
    let b = space.boundary_points();
    let generator = space.line_through(&b[first[0] as usize], &b[first[1] as usize]);
    let vertex = b[first[0] as usize];
    let z = *space.pole();

    let uz = space.line_through(&vertex, &z);
    let mut s1 = Vec::new();
    for y in space.subspace_points(&uz) {
        if y == vertex || y == z {
            continue;
        }
        let img = space.sigma_linear(&y);
        if y <= img {
            s1.push(y);
        }
    }

    let plane = space.span_with(&generator, &z);
    let mut s2 = Vec::new();
    let mut seen = Vec::new();
    for l in space.lines_of(&plane) {
        if !space.subspace_contains(&l, &vertex) || l == generator || l == uz {
            continue;
        }
        if seen.contains(&l) {
            continue;
        }
        let img = space.apply_sigma(&l);
        seen.push(img.clone());
        s2.push(l);
    }
    Ok(Type3OddParams {
        generator,
        vertex,
        s1,
        s2,
    })
}

// ---------------------------------------------------------------------------
// verification operations
// ---------------------------------------------------------------------------

/// The σ-dichotomy of intriguing sets: types 1 and 3 are conjugate-pair
/// transversals of size |X|/2; types 2 and 4 are σ-invariant.
pub fn verify_sigma_dichotomy(
    scheme: &SchemeInstance,
    report: &IntrigueReport,
    y: &PointSubset,
) -> Result<(), IntriguingError> {
    let SetClass::Intriguing(t) = report.class else {
        return Err(IntriguingError::NotIntriguing);
    };
    let sigma = scheme.space().sigma_x_table();
    match t {
        1 | 3 => {
            if y.len() * 2 != scheme.n() {
                return Err(IntriguingError::DichotomyViolated(format!(
                    "type {t} set has size {}, expected |X|/2 = {}",
                    y.len(),
                    scheme.n() / 2
                )));
            }
            for p in 0..scheme.n() {
                let hits = usize::from(y.contains(p)) + usize::from(y.contains(sigma[p] as usize));
                if hits != 1 {
                    return Err(IntriguingError::DichotomyViolated(format!(
                        "conjugate pair {{{p}, {}}} meets the set {hits} times",
                        sigma[p]
                    )));
                }
            }
        }
        2 | 4 => {
            if y.sigma_image(sigma) != *y {
                return Err(IntriguingError::DichotomyViolated(format!(
                    "type {t} set is not σ-invariant"
                )));
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Result of scanning all generators of Q not contained in H against Y.
#[derive(Debug, Clone)]
pub struct MCoverReport {
    /// multiset of intersection sizes |ℓ ∩ Y|
    pub counts: BTreeMap<usize, usize>,
    /// Some(m) iff every generator meets Y in exactly m points
    pub constant: Option<usize>,
}

/// Scans every generator of the quadric not contained in H and tallies the
/// intersection sizes with Y; Y is an m-cover exactly when the tally is
/// constant.
pub fn verify_m_cover(space: &QuadraticSpace, y: &PointSubset) -> MCoverReport {
    let mut counts = BTreeMap::new();
    space.for_each_generator_off_h(|_, xs| {
        let c = xs.iter().filter(|&&x| y.contains(x as usize)).count();
        *counts.entry(c).or_insert(0) += 1;
    });
    let constant = if counts.len() == 1 {
        counts.keys().next().copied()
    } else {
        None
    };
    MCoverReport { counts, constant }
}

/// A subset of the full quadric point set (boundary points allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadricSubset {
    bits: Bitset,
    size: usize,
}

impl QuadricSubset {
    pub fn from_quadric_indices<I: IntoIterator<Item = u32>>(
        space: &QuadraticSpace,
        indices: I,
    ) -> Result<Self, IntriguingError> {
        let n = space.quadric_points().len();
        let mut bits = Bitset::new(n);
        for i in indices {
            let i = i as usize;
            if i >= n {
                return Err(IntriguingError::IndexOutOfRange { index: i, n });
            }
            bits.set(i);
        }
        let size = bits.count_ones();
        Ok(QuadricSubset { bits, size })
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }
}

/// Lifts a subset of X into the full quadric point set.
pub fn lift_to_quadric(space: &QuadraticSpace, y: &PointSubset) -> QuadricSubset {
    let idx = y
        .indices()
        .into_iter()
        .map(|i| space.quadric_index(&space.x_points()[i as usize]).unwrap() as u32);
    QuadricSubset::from_quadric_indices(space, idx).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TightClass {
    /// intriguing for the eigenvalue q−1 of the collinearity graph
    Tight { alpha: i64 },
    /// intriguing for the eigenvalue −(q²+1): hemisystem-type regularity
    HemisystemType,
    Neither,
}

/// Classifies a subset of the full quadric against the two-valued regularity
/// of the collinearity graph (valency q(q²+1), eigenvalues q−1 and −(q²+1)).
pub fn quadric_tight_class(space: &QuadraticSpace, y: &QuadricSubset) -> TightClass {
    let pts = space.quadric_points();
    let n = pts.len() as i64;
    let q = space.q() as i64;
    if y.is_empty() || y.len() == pts.len() {
        return TightClass::Neither;
    }
    let y_idx: Vec<usize> = y.bits.iter_ones().collect();
    let mut inside: Option<i64> = None;
    let mut outside: Option<i64> = None;
    for (u, pu) in pts.iter().enumerate() {
        let d = y_idx
            .iter()
            .filter(|&&v| v != u && space.eval_b(pu.coords(), pts[v].coords()) == 0)
            .count() as i64;
        let slot = if y.bits.get(u) { &mut inside } else { &mut outside };
        match slot {
            None => *slot = Some(d),
            Some(h) if *h != d => return TightClass::Neither,
            _ => {}
        }
    }
    let (h1, h2) = (inside.unwrap(), outside.unwrap());
    let k = q * (q * q + 1);
    for theta in [q - 1, -(q * q + 1)] {
        if let Some(pair) = degree_pair(y.len() as i64, n, k, theta) {
            if pair == (h1, h2) {
                return if theta == q - 1 {
                    let alpha = y.len() as i64 / (q + 1);
                    TightClass::Tight { alpha }
                } else {
                    TightClass::HemisystemType
                };
            }
        }
    }
    TightClass::Neither
}

/// Per-boundary-point line count: for p ∈ H∩Q, the intersection size of Y
/// with the generators through p not contained in H, when constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineCount {
    Constant(i64),
    NonConstant { min: i64, max: i64 },
}

#[derive(Debug, Clone)]
pub struct SProfile {
    /// indexed by boundary-point index
    pub per_point: Vec<LineCount>,
}

impl SProfile {
    pub fn value(&self, boundary_idx: usize) -> Option<i64> {
        match self.per_point[boundary_idx] {
            LineCount::Constant(v) => Some(v),
            LineCount::NonConstant { .. } => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.per_point
            .iter()
            .all(|c| matches!(c, LineCount::Constant(_)))
    }

    /// Σ s_p over all boundary points; None if any point is non-constant.
    pub fn total(&self) -> Option<i64> {
        self.per_point
            .iter()
            .map(|c| match c {
                LineCount::Constant(v) => Some(*v),
                _ => None,
            })
            .sum()
    }

    /// Σ s_p(s_p − 1); None if any point is non-constant.
    pub fn pair_total(&self) -> Option<i64> {
        self.per_point
            .iter()
            .map(|c| match c {
                LineCount::Constant(v) => Some(*v * (*v - 1)),
                _ => None,
            })
            .sum()
    }

    /// Σ s_p over a set of boundary indices (the s_M of the counting laws).
    pub fn sum_over<I: IntoIterator<Item = u32>>(&self, indices: I) -> Option<i64> {
        indices.into_iter().map(|i| self.value(i as usize)).sum()
    }
}

/// Computes the s-profile of Y: for every boundary point p, scans the
/// q²−q generators through p not contained in H and records the intersection
/// size with Y if it is constant over all of them. Constancy is tested, not
/// assumed; arbitrary subsets legitimately produce non-constant entries.
pub fn s_profile(space: &QuadraticSpace, y: &PointSubset) -> SProfile {
    let nb = space.boundary_points().len();
    let mut minmax: Vec<Option<(i64, i64)>> = vec![None; nb];
    space.for_each_generator_off_h(|wi, xs| {
        let c = xs.iter().filter(|&&x| y.contains(x as usize)).count() as i64;
        let slot = &mut minmax[wi];
        *slot = Some(match *slot {
            None => (c, c),
            Some((lo, hi)) => (lo.min(c), hi.max(c)),
        });
    });
    let per_point = minmax
        .into_iter()
        .map(|mm| {
            let (lo, hi) = mm.expect("every boundary point has off-H generators");
            if lo == hi {
                LineCount::Constant(lo)
            } else {
                LineCount::NonConstant { min: lo, max: hi }
            }
        })
        .collect();
    SProfile { per_point }
}

/// For intriguing sets of *different* types the intersection size is forced:
/// |Y₁ ∩ Y₂|·|X| = |Y₁|·|Y₂|. Returns the intersection size when the law
/// holds.
pub fn verify_intersection_product(
    y1: (&PointSubset, &IntrigueReport),
    y2: (&PointSubset, &IntrigueReport),
) -> Result<usize, IntriguingError> {
    let (SetClass::Intriguing(t1), SetClass::Intriguing(t2)) = (y1.1.class, y2.1.class) else {
        return Err(IntriguingError::NotIntriguing);
    };
    if t1 == t2 {
        return Err(IntriguingError::SameType);
    }
    let n = y1.0.universe();
    let inter = y1.0.intersection_size(y2.0);
    let lhs = inter * n;
    let rhs = y1.0.len() * y2.0.len();
    if lhs != rhs {
        return Err(IntriguingError::ProductViolated(format!(
            "|Y₁∩Y₂|·|X| = {lhs} but |Y₁|·|Y₂| = {rhs}"
        )));
    }
    Ok(inter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::build_scheme_for_q;

    fn scheme(q: u64) -> SchemeInstance {
        let (p, e) = match q {
            4 => (2, 2),
            8 => (2, 3),
            9 => (3, 2),
            _ => (q, 1),
        };
        build_scheme_for_q(p, e).unwrap()
    }

    #[test]
    fn singleton_is_not_intriguing() {
        let s = scheme(3);
        let y = PointSubset::from_indices(s.n(), [0]).unwrap();
        let report = classify(&s, &y);
        assert_eq!(report.class, SetClass::NonIntriguing);
    }

    #[test]
    fn full_and_empty_sets_are_principal() {
        let s = scheme(3);
        for y in [PointSubset::full(s.n()), PointSubset::empty(s.n())] {
            let report = classify(&s, &y);
            assert_eq!(report.class, SetClass::Principal);
            assert_eq!(report.degrees[0], RelationDegrees::Degenerate);
        }
    }

    #[test]
    fn type4_construction_q3() {
        let s = scheme(3);
        let w = s.space().boundary_points()[0];
        let y = construct_type4(s.space(), &w).unwrap();
        assert_eq!(y.len(), 18);
        let report = classify(&s, &y);
        assert_eq!(report.class, SetClass::Intriguing(4));
        assert_eq!(report.degrees[2], RelationDegrees::TwoValued { h1: 2, h2: 6 });
        assert_eq!(report.sigma, SigmaBehavior::Invariant);
        assert_eq!(report.alpha, None);
        verify_sigma_dichotomy(&s, &report, &y).unwrap();
    }

    #[test]
    fn type4_rejects_interior_points() {
        let s = scheme(3);
        let p = s.space().x_points()[0];
        assert_eq!(
            construct_type4(s.space(), &p).unwrap_err(),
            IntriguingError::NotOnBoundary
        );
    }

    #[test]
    fn distinct_boundary_points_give_distinct_type4_sets() {
        let s = scheme(3);
        let w1 = s.space().boundary_points()[0];
        let w2 = s.space().boundary_points()[1];
        let y1 = construct_type4(s.space(), &w1).unwrap();
        let y2 = construct_type4(s.space(), &w2).unwrap();
        assert_ne!(y1, y2);
    }

    #[test]
    fn type2_construction_q3() {
        let s = scheme(3);
        let y = construct_type2(s.space(), None).unwrap();
        assert_eq!(y.len(), 16);
        let report = classify(&s, &y);
        assert_eq!(report.class, SetClass::Intriguing(2));
        assert_eq!(report.sigma, SigmaBehavior::Invariant);
        assert_eq!(report.alpha, Some(4));
        // degree data on R₃ from the closed forms: (6, 4)
        assert_eq!(report.degrees[2], RelationDegrees::TwoValued { h1: 6, h2: 4 });
        verify_sigma_dichotomy(&s, &report, &y).unwrap();
    }

    #[test]
    fn type3_odd_construction_q3() {
        let s = scheme(3);
        let y = construct_type3_odd(s.space(), None).unwrap();
        assert_eq!(y.len(), 36);
        let report = classify(&s, &y);
        assert_eq!(report.class, SetClass::Intriguing(3));
        assert_eq!(report.alpha, Some(9));
        verify_sigma_dichotomy(&s, &report, &y).unwrap();

        // perp-count law: |p^⊥ ∩ T| = ½(q−1)q² + q·[p ∈ T]
        let space = s.space();
        let pts = space.x_points();
        let idx = y.indices();
        for (u, pu) in pts.iter().enumerate() {
            let mut c = 0;
            for &v in &idx {
                if space.eval_b(pu.coords(), pts[v as usize].coords()) == 0 {
                    c += 1;
                }
            }
            let expected = if y.contains(u) { 9 + 3 } else { 9 };
            assert_eq!(c, expected);
        }
    }

    #[test]
    fn type3_even_construction_q4() {
        let s = scheme(4);
        let y = construct_type3_even(s.space(), None).unwrap();
        assert_eq!(y.len(), 120);
        let report = classify(&s, &y);
        assert_eq!(report.class, SetClass::Intriguing(3));
        verify_sigma_dichotomy(&s, &report, &y).unwrap();
    }

    #[test]
    fn type3_parity_errors() {
        let s3 = scheme(3);
        assert!(matches!(
            construct_type3_even(s3.space(), None),
            Err(IntriguingError::ParityError { q: 3, .. })
        ));
        let s4 = scheme(4);
        assert!(matches!(
            construct_type3_odd(s4.space(), None),
            Err(IntriguingError::ParityError { q: 4, .. })
        ));
    }

    #[test]
    fn type3_even_complement_transversal_gives_the_complement() {
        let s = scheme(4);
        let space = s.space();
        let solid = space
            .solids_in_hyperplane()
            .into_iter()
            .find(|sol| {
                space.classify_solid(sol) == Ok(SolidClass::Hyperbolic)
                    && !space.subspace_contains(sol, space.pole())
            })
            .unwrap();
        let m = canonical_transversal(space, &space.perp(&solid));
        let m_prime: Vec<ProjPoint> = m.iter().map(|p| space.sigma_linear(p)).collect();
        let t1 = construct_type3_even(space, Some((&solid, &m))).unwrap();
        let t2 = construct_type3_even(space, Some((&solid, &m_prime))).unwrap();
        // T_M and T_M' partition X, and (T_M)^σ = T_M'
        assert_eq!(t1.intersection_size(&t2), 0);
        assert_eq!(t1.len() + t2.len(), s.n());
        assert_eq!(t1.sigma_image(space.sigma_x_table()), t2);
    }

    #[test]
    fn expected_degrees_examples() {
        assert_eq!(expected_degrees(18, 72, 20, -4).unwrap(), (2, 6));
        assert_eq!(expected_degrees(16, 72, 20, 2).unwrap(), (6, 4));
        assert_eq!(
            expected_degrees(10, 72, 20, 20).unwrap_err(),
            IntriguingError::DegenerateEigenvalue
        );
        assert_eq!(
            expected_degrees(5, 72, 20, 2).unwrap_err(),
            IntriguingError::NonIntegral
        );
    }

    #[test]
    fn intersection_products_q3() {
        let s = scheme(3);
        let y4 = construct_type4(s.space(), &s.space().boundary_points()[0]).unwrap();
        let y2 = construct_type2(s.space(), None).unwrap();
        let y3 = construct_type3_odd(s.space(), None).unwrap();
        let r4 = classify(&s, &y4);
        let r2 = classify(&s, &y2);
        let r3 = classify(&s, &y3);
        assert_eq!(verify_intersection_product((&y2, &r2), (&y4, &r4)).unwrap(), 4);
        assert_eq!(verify_intersection_product((&y3, &r3), (&y4, &r4)).unwrap(), 9);
        assert_eq!(verify_intersection_product((&y3, &r3), (&y2, &r2)).unwrap(), 8);
        assert_eq!(
            verify_intersection_product((&y4, &r4), (&y4, &r4)).unwrap_err(),
            IntriguingError::SameType
        );
    }

    #[test]
    fn complement_of_intriguing_set_has_the_same_type() {
        let s = scheme(3);
        let y = construct_type3_odd(s.space(), None).unwrap();
        let report = classify(&s, &y.complement());
        assert_eq!(report.class, SetClass::Intriguing(3));
    }

    #[test]
    fn scan_classifier_agrees_with_matrix_classifier() {
        let s = scheme(3);
        let sets = [
            construct_type4(s.space(), &s.space().boundary_points()[3]).unwrap(),
            construct_type2(s.space(), None).unwrap(),
            construct_type3_odd(s.space(), None).unwrap(),
            PointSubset::from_indices(s.n(), [0, 5, 17, 40]).unwrap(),
        ];
        for y in &sets {
            assert_eq!(classify(&s, y), classify_by_scan(s.space(), y));
        }
    }

    #[test]
    fn m_cover_scan_q3() {
        let s = scheme(3);
        let space = s.space();
        // the whole of X meets every off-H generator in q points
        let full = PointSubset::full(s.n());
        let report = verify_m_cover(space, &full);
        assert_eq!(report.constant, Some(3));
        // a type-3 set is not an m-cover
        let y3 = construct_type3_odd(space, None).unwrap();
        let report = verify_m_cover(space, &y3);
        assert_eq!(report.constant, None);
        assert!(report.counts.len() > 1);
    }

    #[test]
    fn generator_is_a_tight_set_of_the_quadric() {
        let s = scheme(3);
        let space = s.space();
        let p = space.quadric_points()[0];
        let line = space.generators_through(&p).unwrap()[0].clone();
        let y = QuadricSubset::from_quadric_indices(space, line).unwrap();
        assert_eq!(y.len(), 4);
        assert_eq!(quadric_tight_class(space, &y), TightClass::Tight { alpha: 1 });
    }

    #[test]
    fn type2_and_type3_sets_are_quadric_tight() {
        let s = scheme(3);
        let space = s.space();
        let y2 = lift_to_quadric(space, &construct_type2(space, None).unwrap());
        assert_eq!(quadric_tight_class(space, &y2), TightClass::Tight { alpha: 4 });
        let y3 = lift_to_quadric(space, &construct_type3_odd(space, None).unwrap());
        assert_eq!(quadric_tight_class(space, &y3), TightClass::Tight { alpha: 9 });
    }

    #[test]
    fn s_profile_of_type4_q3() {
        let s = scheme(3);
        let space = s.space();
        let w = space.boundary_points()[7];
        let y = construct_type4(space, &w).unwrap();
        let profile = s_profile(space, &y);
        assert!(profile.is_valid());
        assert_eq!(profile.total(), Some(30)); // q³ + q
        assert_eq!(profile.pair_total(), Some(6)); // q(q−1)
        let wi = space.boundary_index(&w).unwrap();
        assert_eq!(profile.value(wi), Some(3)); // s_w = q at the defining point
        let mut q_count = 0;
        for i in 0..space.boundary_points().len() {
            let v = profile.value(i).unwrap();
            assert!(v == 0 || v == 1 || v == 3);
            if v == 3 {
                q_count += 1;
            }
        }
        assert_eq!(q_count, 1);
    }

    #[test]
    fn report_rendering() {
        let s = scheme(3);
        let y = construct_type2(s.space(), None).unwrap();
        let text = classify(&s, &y).to_string();
        assert!(text.contains("type: 2"));
        assert!(text.contains("sigma: invariant"));
        assert!(text.contains("alpha: 4"));
    }
}
