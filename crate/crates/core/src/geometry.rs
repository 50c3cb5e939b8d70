//! PG(5,q), the elliptic quadric Q⁻(5,q), its polarity, and the hyperplane
//! configuration that underlies everything else.
//!
//! The quadratic form is fixed once and for all as
//!
//! ```text
//! Q(x) = x₀x₁ + x₂x₃ + x₄² + a·x₄x₅ + b·x₅²
//! ```
//!
//! with t² + at + b the canonical irreducible quadratic over GF(q), so the
//! binary part in (x₄,x₅) is anisotropic and the form is elliptic of rank 6.
//! The distinguished hyperplane is H : x₀ − x₁ = 0; its pole normalizes to
//! H^⊥ = (1,−1,0,0,0,0), which satisfies Q(H^⊥) = −1 ≠ 0 in every
//! characteristic (so H is non-tangent) and lies on H exactly when q is even.
//!
//! The bilinear form is the symbolic expansion of Q(x+y) − Q(x) − Q(y); one
//! code path serves all characteristics. Points are normalized so the first
//! nonzero coordinate is 1 and ordered lexicographically by coordinate codes,
//! which fixes the index of every point of `X = Q ∖ H` across runs.

use crate::gf::{Code, FieldElement, FieldSpec};
use std::fmt;
use thiserror::Error;

/// Largest q the geometry layer will enumerate. PG(5,q) point counts grow as
/// q⁵, and the CLI caps out well below this.
pub const MAX_GEOMETRY_Q: u32 = 19;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("q = {0} is too small: the scheme degenerates for q <= 2")]
    QTooSmall(u32),
    #[error("q = {q} exceeds the enumeration bound {max}")]
    QTooLarge { q: u32, max: u32 },
    #[error("point is not on the quadric")]
    NotOnQuadric,
    #[error("point is not in X = Q \\ H")]
    NotInX,
    #[error("subspace has projective dimension {got}, expected {expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("coordinates are all zero")]
    ZeroVector,
    #[error("coordinate code {0} is out of range for this field")]
    BadCode(u32),
}

/// A point of PG(5,q), normalized so the first nonzero coordinate is 1.
///
/// Coordinates are element codes; the derived ordering is the canonical
/// lexicographic point order used for indexing X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: [Code; 6],
}

impl ProjPoint {
    pub fn coords(&self) -> &[Code; 6] {
        &self.coords
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coords;
        write!(f, "{} {} {} {} {} {}", c[0], c[1], c[2], c[3], c[4], c[5])
    }
}

/// Line classification by quadric point count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineClass {
    /// 0 quadric points
    Elliptic,
    /// 1 quadric point
    Tangent,
    /// 2 quadric points
    Secant,
    /// q+1 quadric points: the line lies on the quadric
    Generator,
}

/// Solid classification by the section it cuts on the quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolidClass {
    /// q²+1 points, no lines: Q⁻(3,q)
    Elliptic,
    /// (q+1)² points: Q⁺(3,q)
    Hyperbolic,
    /// q²+q+1 points: a cone, point vertex over a conic
    Cone,
    /// anything else (e.g. a single generator line of the section)
    Other(usize),
}

/// A projective subspace, stored as a canonical reduced-row-echelon basis.
/// Equal subspaces have identical `rows`, so derived equality and ordering
/// are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    rows: Vec<[Code; 6]>,
}

impl Subspace {
    /// Projective dimension: 0 = point, 1 = line, 2 = plane, 3 = solid, 4 = hyperplane.
    /// Panics on the empty subspace (see [`Subspace::is_empty`]).
    pub fn dim(&self) -> usize {
        assert!(!self.rows.is_empty(), "empty subspace has no dimension");
        self.rows.len() - 1
    }

    /// Vector-space dimension (number of basis rows); 0 for the empty
    /// intersection of two skew subspaces.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[[Code; 6]] {
        &self.rows
    }

    /// The unique point of a zero-dimensional subspace.
    pub fn as_point(&self) -> Option<ProjPoint> {
        if self.rows.len() == 1 {
            Some(ProjPoint {
                coords: self.rows[0],
            })
        } else {
            None
        }
    }
}

/// The ambient space: field, form, hyperplane, pole, the point lists of the
/// quadric, and the involution table on X. Immutable after `build`.
#[derive(Debug)]
pub struct QuadraticSpace {
    field: FieldSpec,
    a: Code,
    b: Code,
    two: Code,
    two_b: Code,
    pole: ProjPoint,
    quadric: Vec<ProjPoint>,
    x_points: Vec<ProjPoint>,
    boundary: Vec<ProjPoint>,
    sigma_x: Vec<u32>,
}

impl QuadraticSpace {
    /// Builds the space over the given field. Deterministic: the same field
    /// always yields the identical point lists and σ table.
    pub fn build(field: FieldSpec) -> Result<Self, GeometryError> {
        let q = field.q();
        if q <= 2 {
            return Err(GeometryError::QTooSmall(q));
        }
        if q > MAX_GEOMETRY_Q {
            return Err(GeometryError::QTooLarge {
                q,
                max: MAX_GEOMETRY_Q,
            });
        }
        let (a_elt, b_elt) = field.irreducible_quadratic();
        let a = field.encode(&a_elt);
        let b = field.encode(&b_elt);
        let two = field.addc(1, 1);
        let two_b = field.mulc(two, b);
        let pole = ProjPoint {
            coords: [1, field.negc(1), 0, 0, 0, 0],
        };

        let mut space = QuadraticSpace {
            field,
            a,
            b,
            two,
            two_b,
            pole,
            quadric: Vec::new(),
            x_points: Vec::new(),
            boundary: Vec::new(),
            sigma_x: Vec::new(),
        };

        // The hyperplane must be non-tangent; with this model Q(H^⊥) = −1.
        assert_ne!(space.eval_q(&pole.coords), 0, "H is tangent to Q");

        space.enumerate_quadric();
        let q64 = q as u64;
        assert_eq!(space.quadric.len() as u64, (q64 + 1) * (q64 * q64 * q64 + 1));
        assert_eq!(space.boundary.len() as u64, (q64 + 1) * (q64 * q64 + 1));
        assert_eq!(space.x_points.len() as u64, q64 * q64 * (q64 * q64 - 1));

        space.build_sigma_table();
        Ok(space)
    }

    fn enumerate_quadric(&mut self) {
        let q = self.field.q();
        let mut pts: Vec<ProjPoint> = Vec::new();
        for lead in 0..6 {
            let free = 5 - lead;
            let mut counter = vec![0u32; free];
            loop {
                let mut coords = [0u32; 6];
                coords[lead] = 1;
                for (k, &c) in counter.iter().enumerate() {
                    coords[lead + 1 + k] = c;
                }
                if self.eval_q(&coords) == 0 {
                    pts.push(ProjPoint { coords });
                }
                // odometer over the free coordinates
                let mut i = free;
                loop {
                    if i == 0 {
                        break;
                    }
                    counter[i - 1] += 1;
                    if counter[i - 1] < q {
                        break;
                    }
                    counter[i - 1] = 0;
                    i -= 1;
                }
                if free == 0 || (i == 0 && counter.iter().all(|&c| c == 0)) {
                    break;
                }
            }
        }
        pts.sort();
        for p in pts {
            if self.in_hyperplane(&p) {
                self.boundary.push(p);
            } else {
                self.x_points.push(p);
            }
            self.quadric.push(p);
        }
    }

    fn build_sigma_table(&mut self) {
        let mut table = Vec::with_capacity(self.x_points.len());
        for (i, p) in self.x_points.iter().enumerate() {
            let img = self.sigma_linear(p);
            let j = self
                .x_points
                .binary_search(&img)
                .expect("sigma image must lie in X");
            assert_ne!(i, j, "sigma is fixed-point-free on X");
            table.push(j as u32);
        }
        for (i, &j) in table.iter().enumerate() {
            assert_eq!(table[j as usize] as usize, i, "sigma is an involution");
        }
        self.sigma_x = table;
    }

    // ---- accessors ----

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// The pole H^⊥ of the distinguished hyperplane.
    pub fn pole(&self) -> &ProjPoint {
        &self.pole
    }

    /// All points of the quadric, sorted canonically.
    pub fn quadric_points(&self) -> &[ProjPoint] {
        &self.quadric
    }

    /// X = Q ∖ H, sorted canonically; indices into this list are the point
    /// indices used by every subset file and relation matrix.
    pub fn x_points(&self) -> &[ProjPoint] {
        &self.x_points
    }

    /// H ∩ Q, sorted canonically.
    pub fn boundary_points(&self) -> &[ProjPoint] {
        &self.boundary
    }

    pub fn x_index(&self, p: &ProjPoint) -> Option<usize> {
        self.x_points.binary_search(p).ok()
    }

    pub fn boundary_index(&self, p: &ProjPoint) -> Option<usize> {
        self.boundary.binary_search(p).ok()
    }

    pub fn quadric_index(&self, p: &ProjPoint) -> Option<usize> {
        self.quadric.binary_search(p).ok()
    }

    /// σ as a permutation of X indices.
    pub fn sigma_x_table(&self) -> &[u32] {
        &self.sigma_x
    }

    // ---- form evaluation ----

    pub(crate) fn eval_q(&self, x: &[Code; 6]) -> Code {
        let f = &self.field;
        let mut acc = f.mulc(x[0], x[1]);
        acc = f.addc(acc, f.mulc(x[2], x[3]));
        acc = f.addc(acc, f.mulc(x[4], x[4]));
        acc = f.addc(acc, f.mulc(self.a, f.mulc(x[4], x[5])));
        acc = f.addc(acc, f.mulc(self.b, f.mulc(x[5], x[5])));
        acc
    }

    /// b(x,y) = Q(x+y) − Q(x) − Q(y), expanded symbolically:
    /// x₀y₁ + x₁y₀ + x₂y₃ + x₃y₂ + 2x₄y₄ + a(x₄y₅ + x₅y₄) + 2b·x₅y₅.
    pub(crate) fn eval_b(&self, x: &[Code; 6], y: &[Code; 6]) -> Code {
        let f = &self.field;
        let mut acc = f.addc(f.mulc(x[0], y[1]), f.mulc(x[1], y[0]));
        acc = f.addc(acc, f.addc(f.mulc(x[2], y[3]), f.mulc(x[3], y[2])));
        acc = f.addc(acc, f.mulc(self.two, f.mulc(x[4], y[4])));
        let cross = f.addc(f.mulc(x[4], y[5]), f.mulc(x[5], y[4]));
        acc = f.addc(acc, f.mulc(self.a, cross));
        acc = f.addc(acc, f.mulc(self.two_b, f.mulc(x[5], y[5])));
        acc
    }

    /// Q(x) and b(x,y) as field elements.
    pub fn quadric_and_bilinear(&self, x: &ProjPoint, y: &ProjPoint) -> (FieldElement, FieldElement) {
        (
            self.field.decode(self.eval_q(&x.coords)),
            self.field.decode(self.eval_b(&x.coords, &y.coords)),
        )
    }

    pub fn on_quadric(&self, p: &ProjPoint) -> bool {
        self.eval_q(&p.coords) == 0
    }

    /// f(x) = x₀ − x₁; zero exactly on H.
    pub fn in_hyperplane(&self, p: &ProjPoint) -> bool {
        p.coords[0] == p.coords[1]
    }

    pub fn in_x(&self, p: &ProjPoint) -> bool {
        self.on_quadric(p) && !self.in_hyperplane(p)
    }

    // ---- points ----

    pub fn normalize(&self, raw: &[Code; 6]) -> Result<ProjPoint, GeometryError> {
        let f = &self.field;
        for &c in raw {
            if c >= f.q() {
                return Err(GeometryError::BadCode(c));
            }
        }
        let lead = raw
            .iter()
            .position(|&c| c != 0)
            .ok_or(GeometryError::ZeroVector)?;
        let inv = f.invc(raw[lead]);
        let mut coords = [0u32; 6];
        for (i, &c) in raw.iter().enumerate() {
            coords[i] = f.mulc(c, inv);
        }
        Ok(ProjPoint { coords })
    }

    pub fn point_from_codes(&self, codes: [Code; 6]) -> Result<ProjPoint, GeometryError> {
        self.normalize(&codes)
    }

    fn scale_add(&self, x: &[Code; 6], s: Code, y: &[Code; 6]) -> [Code; 6] {
        let f = &self.field;
        let mut out = [0u32; 6];
        for i in 0..6 {
            out[i] = f.addc(x[i], f.mulc(s, y[i]));
        }
        out
    }

    // ---- sigma ----

    /// The central collineation with axis H and centre H^⊥, as a linear map
    /// on the whole space: x ↦ x − f(x)·c. In these coordinates it is the
    /// swap of x₀ and x₁.
    pub fn sigma_linear(&self, p: &ProjPoint) -> ProjPoint {
        let c = p.coords;
        let raw = [c[1], c[0], c[2], c[3], c[4], c[5]];
        self.normalize(&raw).expect("nonzero stays nonzero")
    }

    /// σ restricted to X: the second quadric point on the secant line through
    /// H^⊥ and p, computed by the closed-form parameter t = −b(p,c)/Q(c)
    /// (the intersection equation factors linearly because Q(p) = 0).
    pub fn sigma(&self, p: &ProjPoint) -> Result<ProjPoint, GeometryError> {
        if !self.on_quadric(p) {
            return Err(GeometryError::NotOnQuadric);
        }
        if self.in_hyperplane(p) {
            return Err(GeometryError::NotInX);
        }
        let f = &self.field;
        let c = &self.pole.coords;
        let qc = self.eval_q(c);
        let t = f.negc(f.mulc(self.eval_b(&p.coords, c), f.invc(qc)));
        let img = self
            .normalize(&self.scale_add(&p.coords, t, c))
            .expect("sigma image is a valid point");
        debug_assert_eq!(img, self.sigma_linear(p));
        Ok(img)
    }

    // ---- collinearity ----

    /// True iff u ≠ v and the line ⟨u,v⟩ lies on the quadric; for singular
    /// points this is exactly b(u,v) = 0.
    pub fn collinear(&self, u: &ProjPoint, v: &ProjPoint) -> Result<bool, GeometryError> {
        if !self.on_quadric(u) || !self.on_quadric(v) {
            return Err(GeometryError::NotOnQuadric);
        }
        Ok(u != v && self.eval_b(&u.coords, &v.coords) == 0)
    }

    // ---- linear algebra over the field ----

    /// Reduced row echelon form; returns the nonzero rows.
    fn rref(&self, rows: &mut Vec<[Code; 6]>) {
        let f = &self.field;
        let mut pivot_row = 0;
        for col in 0..6 {
            let Some(r) = (pivot_row..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(pivot_row, r);
            let inv = f.invc(rows[pivot_row][col]);
            for c in 0..6 {
                rows[pivot_row][c] = f.mulc(rows[pivot_row][c], inv);
            }
            for r2 in 0..rows.len() {
                if r2 != pivot_row && rows[r2][col] != 0 {
                    let factor = rows[r2][col];
                    for c in 0..6 {
                        let t = f.mulc(factor, rows[pivot_row][c]);
                        rows[r2][c] = f.subc(rows[r2][c], t);
                    }
                }
            }
            pivot_row += 1;
            if pivot_row == rows.len() {
                break;
            }
        }
        rows.truncate(pivot_row);
    }

    /// Nullspace of the matrix whose rows are `rows` (solutions y with
    /// rows·y = 0), as a canonical RREF basis.
    fn nullspace(&self, rows: &[[Code; 6]]) -> Vec<[Code; 6]> {
        let f = &self.field;
        let mut m: Vec<[Code; 6]> = rows.to_vec();
        self.rref(&mut m);
        let mut pivots = Vec::new();
        for row in &m {
            let col = row.iter().position(|&c| c != 0).unwrap();
            pivots.push(col);
        }
        let mut basis = Vec::new();
        for free in 0..6 {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = [0u32; 6];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                // pivot entry is 1, so the solution sets v[pc] = −m[r][free]
                v[pc] = f.negc(m[r][free]);
            }
            basis.push(v);
        }
        let mut vs = basis;
        self.rref(&mut vs);
        vs
    }

    // ---- subspaces ----

    pub fn span(&self, points: &[ProjPoint]) -> Subspace {
        let mut rows: Vec<[Code; 6]> = points.iter().map(|p| p.coords).collect();
        self.rref(&mut rows);
        Subspace { rows }
    }

    pub fn span_with(&self, s: &Subspace, p: &ProjPoint) -> Subspace {
        let mut rows = s.rows.clone();
        rows.push(p.coords);
        self.rref(&mut rows);
        Subspace { rows }
    }

    pub fn line_through(&self, u: &ProjPoint, v: &ProjPoint) -> Subspace {
        debug_assert_ne!(u, v);
        self.span(&[*u, *v])
    }

    pub fn subspace_from_rows(&self, raw: &[[Code; 6]]) -> Subspace {
        let mut rows = raw.to_vec();
        self.rref(&mut rows);
        Subspace { rows }
    }

    pub fn subspace_contains(&self, s: &Subspace, p: &ProjPoint) -> bool {
        // reduce p against the RREF basis
        let f = &self.field;
        let mut v = p.coords;
        for row in &s.rows {
            let pc = row.iter().position(|&c| c != 0).unwrap();
            if v[pc] != 0 {
                let factor = v[pc];
                for c in 0..6 {
                    v[c] = f.subc(v[c], f.mulc(factor, row[c]));
                }
            }
        }
        v.iter().all(|&c| c == 0)
    }

    /// All points of the subspace, each exactly once.
    pub fn subspace_points(&self, s: &Subspace) -> Vec<ProjPoint> {
        let q = self.field.q();
        let k = s.rows.len();
        let mut out = Vec::new();
        for lead in 0..k {
            let free = k - lead - 1;
            let mut counter = vec![0u32; free];
            loop {
                let mut raw = s.rows[lead];
                for (t, &c) in counter.iter().enumerate() {
                    raw = self.scale_add(&raw, c, &s.rows[lead + 1 + t]);
                }
                out.push(self.normalize(&raw).expect("combination of basis rows"));
                let mut i = free;
                loop {
                    if i == 0 {
                        break;
                    }
                    counter[i - 1] += 1;
                    if counter[i - 1] < q {
                        break;
                    }
                    counter[i - 1] = 0;
                    i -= 1;
                }
                if free == 0 || (i == 0 && counter.iter().all(|&c| c == 0)) {
                    break;
                }
            }
        }
        out
    }

    /// Annihilator of the row space: functionals vanishing on the subspace.
    fn annihilator(&self, s: &Subspace) -> Vec<[Code; 6]> {
        self.nullspace(&s.rows)
    }

    /// The polar subspace under the bilinear form: all y with b(v, y) = 0 for
    /// every v in s. Projective dimension 4 − dim(s); an involution.
    pub fn perp(&self, s: &Subspace) -> Subspace {
        let f = &self.field;
        let mut w: Vec<[Code; 6]> = Vec::with_capacity(s.rows.len());
        for v in &s.rows {
            let mut row = [0u32; 6];
            for (j, slot) in row.iter_mut().enumerate() {
                let mut acc = 0;
                for (i, &vi) in v.iter().enumerate() {
                    acc = f.addc(acc, f.mulc(vi, self.gram(i, j)));
                }
                *slot = acc;
            }
            w.push(row);
        }
        let rows = self.nullspace(&w);
        Subspace { rows }
    }

    pub fn perp_point(&self, p: &ProjPoint) -> Subspace {
        self.perp(&Subspace {
            rows: vec![p.coords],
        })
    }

    /// Gram matrix entry of the bilinear form.
    fn gram(&self, i: usize, j: usize) -> Code {
        match (i, j) {
            (0, 1) | (1, 0) | (2, 3) | (3, 2) => 1,
            (4, 4) => self.two,
            (4, 5) | (5, 4) => self.a,
            (5, 5) => self.two_b,
            _ => 0,
        }
    }

    /// Intersection of two subspaces (may be empty: returned with no rows).
    pub fn intersect(&self, s1: &Subspace, s2: &Subspace) -> Subspace {
        let mut funcs = self.annihilator(s1);
        funcs.extend(self.annihilator(s2));
        let mut m = funcs;
        self.rref(&mut m);
        let rows = self.nullspace(&m);
        Subspace { rows }
    }

    /// Image of a subspace under σ (applied to the basis, re-canonicalized).
    pub fn apply_sigma(&self, s: &Subspace) -> Subspace {
        let rows: Vec<[Code; 6]> = s
            .rows
            .iter()
            .map(|r| [r[1], r[0], r[2], r[3], r[4], r[5]])
            .collect();
        self.subspace_from_rows(&rows)
    }

    // ---- classification ----

    pub fn classify_line(&self, l: &Subspace) -> Result<LineClass, GeometryError> {
        if l.dim() != 1 {
            return Err(GeometryError::WrongDimension {
                expected: 1,
                got: l.dim(),
            });
        }
        let count = self
            .subspace_points(l)
            .iter()
            .filter(|p| self.on_quadric(p))
            .count();
        let q = self.field.q() as usize;
        Ok(match count {
            0 => LineClass::Elliptic,
            1 => LineClass::Tangent,
            2 => LineClass::Secant,
            n if n == q + 1 => LineClass::Generator,
            n => unreachable!("a line meets a quadric in 0, 1, 2 or q+1 points, got {n}"),
        })
    }

    pub fn classify_solid(&self, s: &Subspace) -> Result<SolidClass, GeometryError> {
        if s.dim() != 3 {
            return Err(GeometryError::WrongDimension {
                expected: 3,
                got: s.dim(),
            });
        }
        let count = self
            .subspace_points(s)
            .iter()
            .filter(|p| self.on_quadric(p))
            .count();
        let q = self.field.q() as usize;
        Ok(if count == q * q + 1 {
            SolidClass::Elliptic
        } else if count == (q + 1) * (q + 1) {
            SolidClass::Hyperbolic
        } else if count == q * q + q + 1 {
            SolidClass::Cone
        } else {
            SolidClass::Other(count)
        })
    }

    // ---- subspace enumeration inside H ----

    /// Embedding of the 5-dimensional coordinate space of H into 6-space:
    /// (s, x₂, x₃, x₄, x₅) ↦ (s, s, x₂, x₃, x₄, x₅).
    fn embed_h(v: &[Code]) -> [Code; 6] {
        [v[0], v[0], v[1], v[2], v[3], v[4]]
    }

    /// All k-dimensional (vector) subspaces of GF(q)ⁿ as RREF bases,
    /// enumerated deterministically.
    fn rref_bases(&self, n: usize, k: usize) -> Vec<Vec<Vec<Code>>> {
        let q = self.field.q();
        let mut out = Vec::new();
        // iterate pivot-column subsets in lexicographic order
        let mut pivots: Vec<usize> = (0..k).collect();
        loop {
            // free cells: (row r, col c) with c > pivots[r], c not a pivot
            let mut free_cells = Vec::new();
            for r in 0..k {
                for c in pivots[r] + 1..n {
                    if !pivots.contains(&c) {
                        free_cells.push((r, c));
                    }
                }
            }
            let mut counter = vec![0u32; free_cells.len()];
            loop {
                let mut basis = vec![vec![0u32; n]; k];
                for r in 0..k {
                    basis[r][pivots[r]] = 1;
                }
                for (idx, &(r, c)) in free_cells.iter().enumerate() {
                    basis[r][c] = counter[idx];
                }
                out.push(basis);
                let mut i = free_cells.len();
                loop {
                    if i == 0 {
                        break;
                    }
                    counter[i - 1] += 1;
                    if counter[i - 1] < q {
                        break;
                    }
                    counter[i - 1] = 0;
                    i -= 1;
                }
                if free_cells.is_empty() || (i == 0 && counter.iter().all(|&c| c == 0)) {
                    break;
                }
            }
            // next pivot subset
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if pivots[i] < n - (k - i) {
                    pivots[i] += 1;
                    for j in i + 1..k {
                        pivots[j] = pivots[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    return out;
                }
            }
        }
    }

    fn subspaces_in_h(&self, k: usize) -> Vec<Subspace> {
        let mut out: Vec<Subspace> = self
            .rref_bases(5, k)
            .into_iter()
            .map(|basis| {
                let rows: Vec<[Code; 6]> = basis.iter().map(|v| Self::embed_h(v)).collect();
                self.subspace_from_rows(&rows)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// All solids contained in H, in canonical order.
    pub fn solids_in_hyperplane(&self) -> Vec<Subspace> {
        self.subspaces_in_h(4)
    }

    /// All planes contained in H, in canonical order.
    pub fn planes_in_hyperplane(&self) -> Vec<Subspace> {
        self.subspaces_in_h(3)
    }

    /// All lines contained in H, in canonical order.
    pub fn lines_in_hyperplane(&self) -> Vec<Subspace> {
        self.subspaces_in_h(2)
    }

    /// All lines contained in the given subspace, in canonical order.
    pub fn lines_of(&self, s: &Subspace) -> Vec<Subspace> {
        let k = s.rows.len();
        assert!(k >= 2);
        let f = &self.field;
        let mut out: Vec<Subspace> = self
            .rref_bases(k, 2)
            .into_iter()
            .map(|basis| {
                let rows: Vec<[Code; 6]> = basis
                    .iter()
                    .map(|coeffs| {
                        let mut v = [0u32; 6];
                        for (i, &ci) in coeffs.iter().enumerate() {
                            for c in 0..6 {
                                v[c] = f.addc(v[c], f.mulc(ci, s.rows[i][c]));
                            }
                        }
                        v
                    })
                    .collect();
                self.subspace_from_rows(&rows)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    // ---- generators (lines on the quadric) ----

    /// The q+1 points of the generator through two collinear quadric points.
    pub fn generator_points(&self, u: &ProjPoint, v: &ProjPoint) -> Vec<ProjPoint> {
        let mut pts = Vec::with_capacity(self.field.q() as usize + 1);
        pts.push(*u);
        for s in 0..self.field.q() {
            let raw = self.scale_add(&v.coords, s, &u.coords);
            pts.push(self.normalize(&raw).unwrap());
        }
        pts
    }

    /// Generators through a quadric point, as sorted lists of quadric indices.
    pub fn generators_through(&self, p: &ProjPoint) -> Result<Vec<Vec<u32>>, GeometryError> {
        if !self.on_quadric(p) {
            return Err(GeometryError::NotOnQuadric);
        }
        let mut used = vec![false; self.quadric.len()];
        let pi = self.quadric_index(p).unwrap();
        used[pi] = true;
        let mut lines = Vec::new();
        for (xi, x) in self.quadric.iter().enumerate() {
            if used[xi] || x == p || self.eval_b(&p.coords, &x.coords) != 0 {
                continue;
            }
            let mut idx: Vec<u32> = self
                .generator_points(p, x)
                .iter()
                .map(|pt| self.quadric_index(pt).unwrap() as u32)
                .collect();
            idx.sort_unstable();
            for &i in &idx {
                if i as usize != pi {
                    used[i as usize] = true;
                }
            }
            lines.push(idx);
        }
        Ok(lines)
    }

    /// Visits every generator not contained in H, grouped by its unique
    /// boundary point: `f(boundary_index, x_indices_of_the_line)`.
    pub fn for_each_generator_off_h<F: FnMut(usize, &[u32])>(&self, mut f: F) {
        let mut x_line: Vec<u32> = Vec::new();
        for (wi, w) in self.boundary.iter().enumerate() {
            let mut used = vec![false; self.x_points.len()];
            for (xi, x) in self.x_points.iter().enumerate() {
                if used[xi] || self.eval_b(&w.coords, &x.coords) != 0 {
                    continue;
                }
                // the q points of the generator off H are x + s·w
                x_line.clear();
                for s in 0..self.field.q() {
                    let raw = self.scale_add(&x.coords, s, &w.coords);
                    let pt = self.normalize(&raw).unwrap();
                    let idx = self.x_index(&pt).expect("generator point off H is in X");
                    used[idx] = true;
                    x_line.push(idx as u32);
                }
                x_line.sort_unstable();
                f(wi, &x_line);
            }
        }
    }

    /// Generators contained in H ∩ Q, as sorted lists of boundary indices.
    pub fn generators_in_h(&self) -> Vec<Vec<u32>> {
        let mut lines = Vec::new();
        for (i, u) in self.boundary.iter().enumerate() {
            for (j, v) in self.boundary.iter().enumerate().skip(i + 1) {
                if self.eval_b(&u.coords, &v.coords) != 0 {
                    continue;
                }
                let mut idx: Vec<u32> = self
                    .generator_points(u, v)
                    .iter()
                    .map(|pt| self.boundary_index(pt).expect("line in H stays in H") as u32)
                    .collect();
                idx.sort_unstable();
                // record each line once, at its two smallest indices
                if idx[0] as usize == i && idx[1] as usize == j {
                    lines.push(idx);
                }
            }
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_build;

    fn space(q: u64) -> QuadraticSpace {
        let (p, e) = match q {
            4 => (2, 2),
            8 => (2, 3),
            9 => (3, 2),
            _ => (q, 1),
        };
        QuadraticSpace::build(field_build(p, e).unwrap()).unwrap()
    }

    #[test]
    fn point_counts() {
        let s3 = space(3);
        assert_eq!(s3.x_points().len(), 72);
        assert_eq!(s3.boundary_points().len(), 40);
        assert_eq!(s3.quadric_points().len(), 112);

        let s4 = space(4);
        assert_eq!(s4.x_points().len(), 240);
        assert_eq!(s4.quadric_points().len(), 325);
    }

    #[test]
    fn q2_is_rejected() {
        let f = field_build(2, 1).unwrap();
        assert_eq!(
            QuadraticSpace::build(f).unwrap_err(),
            GeometryError::QTooSmall(2)
        );
    }

    #[test]
    fn form_values() {
        let s = space(3);
        let e0 = s.point_from_codes([1, 0, 0, 0, 0, 0]).unwrap();
        assert!(s.on_quadric(&e0));
        // Q(H^⊥) = −1: code 2 over GF(3)
        let (qv, _) = s.quadric_and_bilinear(s.pole(), s.pole());
        assert_eq!(s.field().encode(&qv), 2);
    }

    #[test]
    fn bilinear_is_symmetric_and_matches_polarization() {
        for q in [3u64, 4, 5] {
            let s = space(q);
            let pts = s.quadric_points();
            let f = s.field();
            for (i, x) in pts.iter().enumerate().step_by(7) {
                for y in pts.iter().skip(i).step_by(11) {
                    let bxy = s.eval_b(&x.coords, &y.coords);
                    let byx = s.eval_b(&y.coords, &x.coords);
                    assert_eq!(bxy, byx);
                    // polarization identity
                    let sum = {
                        let mut raw = [0u32; 6];
                        for k in 0..6 {
                            raw[k] = f.addc(x.coords[k], y.coords[k]);
                        }
                        raw
                    };
                    let qsum = if sum.iter().all(|&c| c == 0) {
                        0
                    } else {
                        s.eval_q(&sum)
                    };
                    let rhs = f.subc(f.subc(qsum, s.eval_q(&x.coords)), s.eval_q(&y.coords));
                    assert_eq!(bxy, rhs);
                }
            }
        }
    }

    #[test]
    fn alternating_in_characteristic_two() {
        let s = space(4);
        for p in s.quadric_points().iter().step_by(3) {
            assert_eq!(s.eval_b(&p.coords, &p.coords), 0);
        }
    }

    #[test]
    fn pole_on_h_iff_q_even() {
        assert!(!space(3).in_hyperplane(space(3).pole()));
        assert!(space(4).in_hyperplane(space(4).pole()));
        assert!(!space(5).in_hyperplane(space(5).pole()));
    }

    #[test]
    fn sigma_is_a_fixed_point_free_involution() {
        let s = space(3);
        let mut fixed = 0;
        for (i, p) in s.x_points().iter().enumerate() {
            let img = s.sigma(p).unwrap();
            let j = s.x_index(&img).unwrap();
            if i == j {
                fixed += 1;
            }
            assert_eq!(s.x_index(&s.sigma(&img).unwrap()).unwrap(), i);
        }
        assert_eq!(fixed, 0);
        // 36 orbits of size 2
        let orbits = s
            .sigma_x_table()
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i < j as usize)
            .count();
        assert_eq!(orbits, 36);
    }

    #[test]
    fn sigma_rejects_boundary_and_off_quadric_points() {
        let s = space(3);
        let w = s.boundary_points()[0];
        assert_eq!(s.sigma(&w).unwrap_err(), GeometryError::NotInX);
        assert_eq!(
            s.sigma(s.pole()).unwrap_err(),
            GeometryError::NotOnQuadric
        );
    }

    #[test]
    fn collinearity_counts_q3() {
        let s = space(3);
        let p = s.quadric_points()[0];
        // u = v is never collinear
        assert!(!s.collinear(&p, &p).unwrap());
        let n = s
            .quadric_points()
            .iter()
            .filter(|x| s.collinear(&p, x).unwrap())
            .count();
        assert_eq!(n, 30); // q(q²+1)
        assert_eq!(s.generators_through(&p).unwrap().len(), 10); // q²+1
        assert!(s.collinear(s.pole(), &p).is_err());
    }

    #[test]
    fn lines_through_pole_are_secant() {
        let s = space(3);
        for p in s.x_points() {
            let l = s.line_through(s.pole(), p);
            assert_eq!(s.classify_line(&l).unwrap(), LineClass::Secant);
        }
    }

    #[test]
    fn generators_have_full_quadric_lines() {
        let s = space(3);
        let p = s.quadric_points()[0];
        let partner = s
            .quadric_points()
            .iter()
            .find(|x| s.collinear(&p, x).unwrap())
            .unwrap();
        let l = s.line_through(&p, partner);
        assert_eq!(s.classify_line(&l).unwrap(), LineClass::Generator);
        // every point of the spanned line is on Q
        for pt in s.subspace_points(&l) {
            assert!(s.on_quadric(&pt));
        }
    }

    #[test]
    fn perp_dimensions_and_involution() {
        let s = space(3);
        let p = s.x_points()[5];
        let h = s.perp_point(&p);
        assert_eq!(h.dim(), 4);
        assert_eq!(s.perp(&h).dim(), 0);
        assert_eq!(&s.perp(&h).rows()[0], p.coords());

        let l = s.line_through(&s.x_points()[0], &s.x_points()[1]);
        let lp = s.perp(&l);
        assert_eq!(lp.dim(), 3);
        assert_eq!(s.perp(&lp), l);
    }

    #[test]
    fn solid_classification_counts_q3() {
        let s = space(3);
        let solids = s.solids_in_hyperplane();
        assert_eq!(solids.len(), 121); // (q⁵−1)/(q−1)
        let mut elliptic = 0;
        let mut hyperbolic = 0;
        let mut cone = 0;
        for sol in &solids {
            match s.classify_solid(sol).unwrap() {
                SolidClass::Elliptic => elliptic += 1,
                SolidClass::Hyperbolic => hyperbolic += 1,
                SolidClass::Cone => cone += 1,
                SolidClass::Other(n) => panic!("unexpected solid section of size {n}"),
            }
        }
        assert_eq!((elliptic, hyperbolic, cone), (36, 45, 40));
    }

    #[test]
    fn hyperbolic_solid_perp_is_elliptic_line() {
        let s = space(3);
        for sol in s.solids_in_hyperplane() {
            if s.classify_solid(&sol).unwrap() == SolidClass::Hyperbolic {
                let l = s.perp(&sol);
                assert_eq!(l.dim(), 1);
                assert_eq!(s.classify_line(&l).unwrap(), LineClass::Elliptic);
            }
        }
    }

    #[test]
    fn off_h_generator_scan_is_a_partition_of_incidences() {
        let s = space(3);
        let q = 3usize;
        let mut per_point = vec![0usize; s.x_points().len()];
        let mut lines = 0;
        s.for_each_generator_off_h(|_, xs| {
            assert_eq!(xs.len(), q);
            lines += 1;
            for &x in xs {
                per_point[x as usize] += 1;
            }
        });
        // q²−q lines through each boundary point, q²+1 through each X point
        assert_eq!(lines, s.boundary_points().len() * (q * q - q));
        for c in per_point {
            assert_eq!(c, q * q + 1);
        }
    }

    #[test]
    fn generators_in_h_count_q3() {
        let s = space(3);
        let lines = s.generators_in_h();
        assert_eq!(lines.len(), 40); // GQ(3,3) has (q+1)(q²+1) lines
        for l in &lines {
            assert_eq!(l.len(), 4);
        }
    }

    #[test]
    fn sigma_commutes_with_perp_q3() {
        let s = space(3);
        for p in s.x_points() {
            let lhs = s.perp_point(&s.sigma(p).unwrap());
            let rhs = s.apply_sigma(&s.perp_point(p));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn subspace_point_counts() {
        let s = space(3);
        let l = s.line_through(&s.x_points()[0], &s.x_points()[1]);
        assert_eq!(s.subspace_points(&l).len(), 4); // q+1
        let solid = &s.solids_in_hyperplane()[0];
        assert_eq!(s.subspace_points(solid).len(), 40); // (q⁴−1)/(q−1)
        assert_eq!(s.lines_of(solid).len(), 130); // lines of PG(3,3)
    }
}
