//! The five-class association scheme on X = Q⁻(5,q) ∖ H and its exact
//! verification machinery.
//!
//! Relations on ordered pairs (u,v) of X, with σ the hyperplane involution
//! and ∼ quadric collinearity:
//!
//! * R₀: u = v
//! * R₁: u ≁ v and u ∼ vᵟ
//! * R₂: u ≁ v and u ≁ vᵟ
//! * R₃: u ∼ v (and then automatically u ≁ vᵟ)
//! * R₄: u = vᵟ
//!
//! The eigenmatrix `P` and dual eigenmatrix `Q` are closed forms in q; the
//! built matrices are *verified against* them rather than re-derived by any
//! eigensolver. Primitive idempotents are kept scaled by |X| so that every
//! identity is an integer identity: `E_scaled[j] = Σ_i Q[i][j]·A_i = |X|·E_j`.
//!
//! Ranks are certified by pairing a modular lower bound with a structural
//! upper bound obtained from the verified idempotent decomposition; both
//! sides must agree or the check fails.

use crate::bits::{and_count, BitMatrix};
use crate::geometry::{ProjPoint, QuadraticSpace};
use crate::intmat;
use thiserror::Error;

/// Largest q for which the dense relation matrices are materialized
/// (|X| = q²(q²−1) grows fast; beyond this, use the scan-based classifier).
pub const MAX_SCHEME_Q: u32 = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("q = {0} is too small: one relation class is empty for q <= 2")]
    QTooSmall(u32),
    #[error("q = {q} exceeds the dense-matrix bound {max}")]
    QTooLarge { q: u32, max: u32 },
    #[error("relation {i} has row {u} of weight {got}, expected valency {expected}")]
    ValencyMismatch { i: usize, u: usize, got: usize, expected: i64 },
    #[error("axiom violation at relations ({i},{j}), class {k}, pair ({u},{w}): count {got} != {expected}")]
    AxiomViolation { i: usize, j: usize, k: usize, u: usize, w: usize, got: i64, expected: i64 },
    #[error("partition violated at pair ({u},{w})")]
    PartitionViolation { u: usize, w: usize },
    #[error("relation {i} is not symmetric at ({u},{w})")]
    SymmetryViolation { i: usize, u: usize, w: usize },
    #[error("eigen relation A_{j}·E_{i} = P[{i}][{j}]·E_{i} fails at pair ({u},{w})")]
    EigenMismatch { i: usize, j: usize, u: usize, w: usize },
    #[error("scaled idempotent identity E_{i}·E_{j} fails at pair ({u},{w})")]
    IdempotentMismatch { i: usize, j: usize, u: usize, w: usize },
    #[error("trace of E_scaled[{i}] is {got}, expected |X|·dim = {expected}")]
    TraceMismatch { i: usize, got: i64, expected: i64 },
    #[error("embedding identity fails: {0}")]
    IdentityFails(String),
    #[error("sigma span check fails: {0}")]
    SpanMismatch(String),
    #[error("rank of {what} is {got}, expected {expected}")]
    RankMismatch { what: &'static str, got: usize, expected: usize },
}

/// First eigenmatrix P(q): rows are eigenspaces V₀..V₄, columns relations.
pub fn eigenmatrix_p(q: i64) -> [[i64; 5]; 5] {
    [
        [1, (q - 1) * (q * q + 1), (q - 2) * q * (q * q + 1), (q - 1) * (q * q + 1), 1],
        [1, q * q + 1, 0, -(q * q + 1), -1],
        [1, q - 1, -2 * q, q - 1, 1],
        [1, -(q - 1), 0, q - 1, -1],
        [1, -(q - 1) * (q - 1), 2 * (q - 2) * q, -(q - 1) * (q - 1), 1],
    ]
}

/// Dual eigenmatrix Q(q): rows are relations, columns eigenspaces. Every
/// entry is an integer for every prime power q.
pub fn eigenmatrix_q(q: i64) -> [[i64; 5]; 5] {
    let h = |n: i64| {
        debug_assert_eq!(n % 2, 0);
        n / 2
    };
    [
        [
            1,
            h((q - 1) * (q - 1) * q),
            h((q - 2) * (q + 1) * (q * q + 1)),
            h((q - 1) * q * (q * q + 1)),
            h(q * (q * q + 1)),
        ],
        [1, h((q - 1) * q), h((q - 2) * (q + 1)), -h((q - 1) * q), -h((q - 1) * q)],
        [1, 0, -(q + 1), 0, q],
        [1, -h((q - 1) * q), h((q - 2) * (q + 1)), h((q - 1) * q), -h((q - 1) * q)],
        [
            1,
            -h((q - 1) * (q - 1) * q),
            h((q - 2) * (q + 1) * (q * q + 1)),
            -h((q - 1) * q * (q * q + 1)),
            h(q * (q * q + 1)),
        ],
    ]
}

/// Both closed-form eigenmatrices, with the exact consistency check
/// P·Q = |X|·I performed before returning.
pub fn closed_form_eigenmatrices(q: u32) -> ([[i64; 5]; 5], [[i64; 5]; 5]) {
    let p = eigenmatrix_p(q as i64);
    let qm = eigenmatrix_q(q as i64);
    let n = x_size(q);
    for i in 0..5 {
        for j in 0..5 {
            let prod: i64 = (0..5).map(|k| p[i][k] * qm[k][j]).sum();
            assert_eq!(prod, if i == j { n } else { 0 }, "P·Q != |X|·I at ({i},{j})");
        }
    }
    (p, qm)
}

/// Eigenspace dimensions (dim V₀, …, dim V₄); equals row 0 of the dual
/// eigenmatrix.
pub fn eigenspace_dimensions(q: i64) -> [i64; 5] {
    [
        1,
        q * (q - 1) * (q - 1) / 2,
        (q - 2) * (q + 1) * (q * q + 1) / 2,
        (q - 1) * q * (q * q + 1) / 2,
        q * (q * q + 1) / 2,
    ]
}

/// |X| = q²(q²−1).
pub fn x_size(q: u32) -> i64 {
    let q = q as i64;
    q * q * (q * q - 1)
}

/// The built scheme: relation codes, adjacency bitsets, and the closed-form
/// eigendata they are checked against. Immutable after `build`.
pub struct SchemeInstance {
    space: QuadraticSpace,
    n: usize,
    rel: Vec<u8>,
    adj: [BitMatrix; 5],
    p_mat: [[i64; 5]; 5],
    q_mat: [[i64; 5]; 5],
    dims: [i64; 5],
}

/// The full intersection-number tensor p^k_{ij} as `numbers[i][j][k]`.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub numbers: [[[i64; 5]; 5]; 5],
}

#[derive(Debug, Clone)]
pub struct EigenReport {
    /// trace(E_scaled[i]) = |X| · dim Vᵢ
    pub traces: [i64; 5],
}

impl SchemeInstance {
    /// Assigns every ordered pair of X to its relation and materializes the
    /// five adjacency matrices. Verifies the valency row of P on the way.
    pub fn build(space: QuadraticSpace) -> Result<Self, SchemeError> {
        let q = space.q();
        if q <= 2 {
            return Err(SchemeError::QTooSmall(q));
        }
        if q > MAX_SCHEME_Q {
            return Err(SchemeError::QTooLarge { q, max: MAX_SCHEME_Q });
        }
        let n = space.x_points().len();
        let pts = space.x_points();
        let sigma = space.sigma_x_table().to_vec();

        let mut col = BitMatrix::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if space.eval_b(pts[u].coords(), pts[v].coords()) == 0 {
                    col.set(u, v);
                    col.set(v, u);
                }
            }
        }

        let mut rel = vec![0u8; n * n];
        let mut adj: [BitMatrix; 5] = std::array::from_fn(|_| BitMatrix::new(n));
        for u in 0..n {
            for v in 0..n {
                let k = if u == v {
                    0
                } else if sigma[v] as usize == u {
                    4
                } else {
                    let c1 = col.get(u, v);
                    let c2 = col.get(u, sigma[v] as usize);
                    match (c1, c2) {
                        (true, false) => 3,
                        (false, true) => 1,
                        (false, false) => 2,
                        (true, true) => unreachable!(
                            "a point of X cannot be collinear to both members of a conjugate pair"
                        ),
                    }
                };
                rel[u * n + v] = k;
                adj[k as usize].set(u, v);
            }
        }

        let (p_mat, q_mat) = closed_form_eigenmatrices(q);
        let dims = eigenspace_dimensions(q as i64);

        let scheme = SchemeInstance { space, n, rel, adj, p_mat, q_mat, dims };
        for i in 0..5 {
            let expected = scheme.p_mat[0][i];
            for u in 0..n {
                let got = scheme.adj[i].row_count_ones(u);
                if got as i64 != expected {
                    return Err(SchemeError::ValencyMismatch { i, u, got, expected });
                }
            }
        }
        Ok(scheme)
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.space.q()
    }

    #[inline]
    pub fn rel(&self, u: usize, v: usize) -> usize {
        self.rel[u * self.n + v] as usize
    }

    pub fn adjacency(&self, i: usize) -> &BitMatrix {
        &self.adj[i]
    }

    pub fn p_matrix(&self) -> &[[i64; 5]; 5] {
        &self.p_mat
    }

    pub fn q_matrix(&self) -> &[[i64; 5]; 5] {
        &self.q_mat
    }

    pub fn dimensions(&self) -> &[i64; 5] {
        &self.dims
    }

    /// Entry (u,w) of the scaled idempotent E_scaled[j] = |X|·E_j.
    #[inline]
    pub fn e_scaled(&self, j: usize, u: usize, w: usize) -> i64 {
        self.q_mat[self.rel(u, w)][j]
    }

    /// Association-scheme axioms in exact integer arithmetic: identity,
    /// symmetry, partition, valencies, and constancy of all intersection
    /// numbers `A_i·A_j = Σ_k p^k_{ij}·A_k` (computed, then checked on every
    /// entry).
    pub fn verify_axioms(&self) -> Result<AxiomReport, SchemeError> {
        let n = self.n;
        for u in 0..n {
            for w in 0..n {
                let k = self.rel(u, w);
                if (u == w) != (k == 0) {
                    return Err(SchemeError::PartitionViolation { u, w });
                }
                let hits = (0..5).filter(|&i| self.adj[i].get(u, w)).count();
                if hits != 1 || !self.adj[k].get(u, w) {
                    return Err(SchemeError::PartitionViolation { u, w });
                }
                if self.rel(w, u) != k {
                    return Err(SchemeError::SymmetryViolation { i: k, u, w });
                }
            }
        }
        for i in 0..5 {
            for u in 0..n {
                let got = self.adj[i].row_count_ones(u);
                if got as i64 != self.p_mat[0][i] {
                    return Err(SchemeError::ValencyMismatch { i, u, got, expected: self.p_mat[0][i] });
                }
            }
        }
        let mut numbers = [[[-1i64; 5]; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                for u in 0..n {
                    let row_u = self.adj[i].row(u);
                    for w in 0..n {
                        let got = and_count(row_u, self.adj[j].row(w)) as i64;
                        let k = self.rel(u, w);
                        let slot = &mut numbers[i][j][k];
                        if *slot == -1 {
                            *slot = got;
                        } else if *slot != got {
                            return Err(SchemeError::AxiomViolation { i, j, k, u, w, got, expected: *slot });
                        }
                    }
                }
            }
        }
        Ok(AxiomReport { numbers })
    }

    /// Exact eigenstructure: for all i, j the entrywise identity
    /// `A_j·E_scaled[i] = P[i][j]·E_scaled[i]`, mutual orthogonality and
    /// scaled idempotency `E_scaled[i]·E_scaled[j] = |X|·δ_ij·E_scaled[i]`,
    /// Σ_j E_scaled[j] = |X|·I, and the trace/dimension table.
    pub fn verify_eigenstructure(&self) -> Result<EigenReport, SchemeError> {
        let n = self.n;
        let qm = &self.q_mat;
        let pm = &self.p_mat;

        // Σ_j E_scaled[j] = |X|·I reduces to row sums of the dual eigenmatrix.
        for k in 0..5 {
            let s: i64 = (0..5).map(|j| qm[k][j]).sum();
            let expected = if k == 0 { n as i64 } else { 0 };
            if s != expected {
                return Err(SchemeError::IdentityFails(format!(
                    "sum of dual-eigenmatrix row {k} is {s}, expected {expected}"
                )));
            }
        }

        let mut cnt = [[0i64; 5]; 5];
        for u in 0..n {
            for w in 0..n {
                for l in 0..5 {
                    let row_u = self.adj[l].row(u);
                    for m in 0..5 {
                        cnt[l][m] = and_count(row_u, self.adj[m].row(w)) as i64;
                    }
                }
                let k = self.rel(u, w);
                // A_j·E_i entry vs P[i][j]·E_i entry
                for i in 0..5 {
                    for j in 0..5 {
                        let lhs: i64 = (0..5).map(|l| qm[l][i] * cnt[j][l]).sum();
                        if lhs != pm[i][j] * qm[k][i] {
                            return Err(SchemeError::EigenMismatch { i, j, u, w });
                        }
                    }
                }
                // E_i·E_j entry: Qᵀ·cnt·Q sandwich
                let mut t = [[0i64; 5]; 5];
                for l in 0..5 {
                    for j in 0..5 {
                        t[l][j] = (0..5).map(|m| cnt[l][m] * qm[m][j]).sum();
                    }
                }
                for i in 0..5 {
                    for j in 0..5 {
                        let s: i64 = (0..5).map(|l| qm[l][i] * t[l][j]).sum();
                        let expected = if i == j { n as i64 * qm[k][i] } else { 0 };
                        if s != expected {
                            return Err(SchemeError::IdempotentMismatch { i, j, u, w });
                        }
                    }
                }
            }
        }

        let mut traces = [0i64; 5];
        for i in 0..5 {
            for u in 0..n {
                traces[i] += self.e_scaled(i, u, u);
            }
            let expected = n as i64 * self.dims[i];
            if traces[i] != expected {
                return Err(SchemeError::TraceMismatch { i, got: traces[i], expected });
            }
        }
        Ok(EigenReport { traces })
    }

    /// Idempotency/orthogonality restricted to the given eigenspace indices;
    /// used by checks that need rank(E_scaled[i]) = dim Vᵢ without the full
    /// eigenstructure pass.
    fn check_scaled_idempotents(&self, indices: &[usize]) -> Result<(), SchemeError> {
        let n = self.n;
        let qm = &self.q_mat;
        let mut cnt = [[0i64; 5]; 5];
        for u in 0..n {
            for w in 0..n {
                for l in 0..5 {
                    let row_u = self.adj[l].row(u);
                    for m in 0..5 {
                        cnt[l][m] = and_count(row_u, self.adj[m].row(w)) as i64;
                    }
                }
                let k = self.rel(u, w);
                for &i in indices {
                    for &j in indices {
                        let s: i64 = (0..5)
                            .map(|l| {
                                qm[l][i] * (0..5).map(|m| cnt[l][m] * qm[m][j]).sum::<i64>()
                            })
                            .sum();
                        let expected = if i == j { n as i64 * qm[k][i] } else { 0 };
                        if s != expected {
                            return Err(SchemeError::IdempotentMismatch { i, j, u, w });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn corrupt_adjacency_for_test(&mut self, i: usize, u: usize, w: usize) {
        self.adj[i].flip(u, w);
    }
}

/// The three-class collinearity scheme on the full quadric point set, with
/// the scaled minus-idempotent `G = q(q+1)²·E⁻ = q²·B₀ − q·B₁ + B₂` and the
/// inclusion data of X.
pub struct QuadricScheme {
    n: usize,
    col: BitMatrix,
    x_to_q: Vec<u32>,
    q: u32,
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    /// rank(S·E⁻·Sᵀ), certified exactly
    pub rank: usize,
    /// the coefficient (q−1, q+1) of E₄ in the identity
    pub coefficient: (i64, i64),
}

#[derive(Debug, Clone)]
pub struct SigmaSpanReport {
    pub rank_minus: usize,
    pub rank_plus: usize,
}

impl QuadricScheme {
    pub fn build(space: &QuadraticSpace) -> Self {
        let pts = space.quadric_points();
        let n = pts.len();
        let q = space.q();
        let mut col = BitMatrix::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if space.eval_b(pts[u].coords(), pts[v].coords()) == 0 {
                    col.set(u, v);
                    col.set(v, u);
                }
            }
        }
        let k = (q as usize) * (q as usize * q as usize + 1);
        for u in 0..n {
            assert_eq!(col.row_count_ones(u), k, "collinearity valency on the quadric");
        }
        let x_to_q = space
            .x_points()
            .iter()
            .map(|p| space.quadric_index(p).unwrap() as u32)
            .collect();
        QuadricScheme { n, col, x_to_q, q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn collinearity(&self) -> &BitMatrix {
        &self.col
    }

    pub fn x_to_quadric(&self) -> &[u32] {
        &self.x_to_q
    }

    /// Entry (u,w) of G = q(q+1)²·E⁻ = q²·B₀ − q·B₁ + B₂.
    #[inline]
    pub fn g_entry(&self, u: usize, w: usize) -> i64 {
        let q = self.q as i64;
        if u == w {
            q * q
        } else if self.col.get(u, w) {
            -q
        } else {
            1
        }
    }

    /// Verifies that G is genuinely the scaled V⁻ projector of the quadric
    /// scheme: B₁·G = −(q²+1)·G entrywise, plus the trace identity
    /// trace(G) = q(q+1)²·dim V⁻.
    pub fn verify_minus_idempotent(&self) -> Result<(), SchemeError> {
        let n = self.n;
        let q = self.q as i64;
        let k = q * (q * q + 1);
        for u in 0..n {
            let row_u = self.col.row(u);
            for w in 0..n {
                let c = and_count(row_u, self.col.row(w)) as i64;
                let e = i64::from(self.col.get(u, w));
                let lhs = q * q * e - q * c + (k - c - e);
                let rhs = -(q * q + 1) * self.g_entry(u, w);
                if lhs != rhs {
                    return Err(SchemeError::IdentityFails(format!(
                        "B₁·G != −(q²+1)·G at ({u},{w}): {lhs} vs {rhs}"
                    )));
                }
            }
        }
        let trace = q * q * n as i64;
        let dim_minus = q * (q * q - q + 1);
        if trace != q * (q + 1) * (q + 1) * dim_minus {
            return Err(SchemeError::IdentityFails(
                "trace(G) != q(q+1)²·dim V⁻".into(),
            ));
        }
        Ok(())
    }
}

/// The embedding of the scheme on X into the collinearity scheme of the full
/// quadric:
///
/// * `S·B₀·Sᵀ = A₀`, `S·B₁·Sᵀ = A₃`, `S·B₂·Sᵀ = A₁+A₂+A₄`;
/// * the cleared-denominator identity
///   `|X|·(S·G·Sᵀ) = q(q+1)²·E_scaled[1] + q(q+1)(q−1)·E_scaled[4]`,
///   i.e. S·E⁻·Sᵀ = E₁ + (q−1)/(q+1)·E₄;
/// * rank(S·E⁻·Sᵀ) = dim V₁ + dim V₄, certified exactly.
pub fn embedding_check(
    scheme: &SchemeInstance,
    quadric: &QuadricScheme,
) -> Result<EmbeddingReport, SchemeError> {
    let n = scheme.n();
    let q = scheme.q() as i64;
    let xq = quadric.x_to_quadric();

    quadric.verify_minus_idempotent()?;

    for u in 0..n {
        for w in 0..n {
            let (qu, qw) = (xq[u] as usize, xq[w] as usize);
            let k = scheme.rel(u, w);
            // restriction of the three quadric relations
            let b1 = quadric.collinearity().get(qu, qw);
            if (k == 3) != b1 {
                return Err(SchemeError::IdentityFails(format!(
                    "S·B₁·Sᵀ != A₃ at ({u},{w})"
                )));
            }
            if (k == 0) != (qu == qw) {
                return Err(SchemeError::IdentityFails(format!(
                    "S·B₀·Sᵀ != A₀ at ({u},{w})"
                )));
            }
            // cleared-denominator embedding identity
            let lhs = x_size(scheme.q()) * quadric.g_entry(qu, qw);
            let rhs = q * (q + 1) * (q + 1) * scheme.e_scaled(1, u, w)
                + q * (q + 1) * (q - 1) * scheme.e_scaled(4, u, w);
            if lhs != rhs {
                return Err(SchemeError::IdentityFails(format!(
                    "|X|·S·G·Sᵀ mismatch at ({u},{w}): {lhs} vs {rhs}"
                )));
            }
        }
    }

    // rank certification: the identity above plus verified idempotency of
    // E_scaled[1], E_scaled[4] pins rank(S·E⁻·Sᵀ) to dim V₁ + dim V₄ from
    // above; a modular elimination must reach the same value from below.
    scheme.check_scaled_idempotents(&[1, 4])?;
    let expected = (scheme.dimensions()[1] + scheme.dimensions()[4]) as usize;
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|u| {
            (0..n)
                .map(|w| quadric.g_entry(xq[u] as usize, xq[w] as usize))
                .collect()
        })
        .collect();
    let lower = intmat::rank_lower_bound(&rows);
    if lower != expected {
        return Err(SchemeError::RankMismatch {
            what: "S·E⁻·Sᵀ",
            got: lower,
            expected,
        });
    }

    Ok(EmbeddingReport {
        rank: expected,
        coefficient: (q - 1, q + 1),
    })
}

/// The σ-span decomposition: for every p ∈ X,
/// `E_scaled[j]·(χ_p − χ_{pᵟ}) = 0` for j ∈ {0,2,4} and
/// `E_scaled[j]·(χ_p + χ_{pᵟ}) = 0` for j ∈ {1,3}; the difference family
/// spans V₁⊕V₃ and the sum family spans V₀⊕V₂⊕V₄, verified by exact rank.
pub fn sigma_span_check(scheme: &SchemeInstance) -> Result<SigmaSpanReport, SchemeError> {
    let n = scheme.n();
    let sigma = scheme.space().sigma_x_table();
    let qm = scheme.q_matrix();

    for p in 0..n {
        let s = sigma[p] as usize;
        for u in 0..n {
            let k1 = scheme.rel(u, p);
            let k2 = scheme.rel(u, s);
            for j in [0, 2, 4] {
                if qm[k1][j] != qm[k2][j] {
                    return Err(SchemeError::SpanMismatch(format!(
                        "E_scaled[{j}]·(χ_{p} − χ_{s}) has a nonzero entry at {u}"
                    )));
                }
            }
            for j in [1, 3] {
                if qm[k1][j] + qm[k2][j] != 0 {
                    return Err(SchemeError::SpanMismatch(format!(
                        "E_scaled[{j}]·(χ_{p} + χ_{s}) has a nonzero entry at {u}"
                    )));
                }
            }
        }
    }

    // The annihilation above places the families inside V₁⊕V₃ resp.
    // V₀⊕V₂⊕V₄; verified idempotency turns the dimension sums into exact
    // upper bounds, and the modular rank must meet them.
    scheme.check_scaled_idempotents(&[1, 3])?;
    scheme.check_scaled_idempotents(&[0, 2, 4])?;
    let dims = scheme.dimensions();

    let mut minus_rows = vec![vec![0i64; n]; n];
    let mut plus_rows = vec![vec![0i64; n]; n];
    for p in 0..n {
        let s = sigma[p] as usize;
        minus_rows[p][p] += 1;
        minus_rows[p][s] -= 1;
        plus_rows[p][p] += 1;
        plus_rows[p][s] += 1;
    }
    let expected_minus = (dims[1] + dims[3]) as usize;
    let expected_plus = (1 + dims[2] + dims[4]) as usize;
    let got_minus = intmat::rank_lower_bound(&minus_rows);
    if got_minus != expected_minus {
        return Err(SchemeError::RankMismatch {
            what: "difference family",
            got: got_minus,
            expected: expected_minus,
        });
    }
    let got_plus = intmat::rank_lower_bound(&plus_rows);
    if got_plus != expected_plus {
        return Err(SchemeError::RankMismatch {
            what: "sum family",
            got: got_plus,
            expected: expected_plus,
        });
    }

    Ok(SigmaSpanReport {
        rank_minus: got_minus,
        rank_plus: got_plus,
    })
}

/// Build a scheme directly from field parameters; convenience for tests and
/// the CLI.
pub fn build_scheme_for_q(p: u64, e: u32) -> Result<SchemeInstance, SchemeError> {
    let field = crate::gf::field_build(p, e).expect("valid field parameters");
    let space = QuadraticSpace::build(field).map_err(|err| match err {
        crate::geometry::GeometryError::QTooSmall(q) => SchemeError::QTooSmall(q),
        crate::geometry::GeometryError::QTooLarge { q, max } => SchemeError::QTooLarge { q, max },
        other => panic!("unexpected geometry failure: {other}"),
    })?;
    SchemeInstance::build(space)
}

/// Sorted X-index list of the points collinear (in Q) to a boundary point;
/// shared by the type-4 construction and the scheme tests.
pub fn collinear_x_indices(space: &QuadraticSpace, w: &ProjPoint) -> Vec<u32> {
    space
        .x_points()
        .iter()
        .enumerate()
        .filter(|(_, x)| space.eval_b(w.coords(), x.coords()) == 0)
        .map(|(i, _)| i as u32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn closed_form_matrices_q3() {
        let (p, q) = closed_form_eigenmatrices(3);
        assert_eq!(p[0], [1, 20, 30, 20, 1]);
        assert_eq!(p[4], [1, -4, 6, -4, 1]);
        assert_eq!(q[0], [1, 6, 20, 30, 15]);
        assert_eq!(eigenspace_dimensions(3), [1, 6, 20, 30, 15]);
    }

    #[test]
    fn closed_form_matrices_q4_and_q5() {
        // the product check P·Q = |X|·I runs inside
        let (p4, _) = closed_form_eigenmatrices(4);
        assert_eq!(p4[0], [1, 51, 136, 51, 1]);
        assert_eq!(p4[1][3], -17); // eigenvalue of R₃ on V₁ is −(q²+1)
        let (p5, q5) = closed_form_eigenmatrices(5);
        assert_eq!(p5[0], [1, 104, 390, 104, 1]);
        assert_eq!(q5[0], [1, 40, 234, 260, 65]);
        assert_eq!(q5[0].iter().sum::<i64>(), x_size(5)); // dims sum to |X|
    }

    #[test]
    fn valencies_q3() {
        let s = scheme(3);
        assert_eq!(s.n(), 72);
        for i in 0..5 {
            assert_eq!(s.adjacency(i).row_count_ones(0) as i64, s.p_matrix()[0][i]);
        }
        // R₄ pairs conjugates: every row sum is 1
        for u in 0..s.n() {
            assert_eq!(s.adjacency(4).row_count_ones(u), 1);
        }
    }

    #[test]
    fn axioms_q3() {
        let s = scheme(3);
        let report = s.verify_axioms().unwrap();
        // p⁰_{i,i} is the valency of R_i
        for i in 0..5 {
            assert_eq!(report.numbers[i][i][0], s.p_matrix()[0][i]);
        }
        // symmetry p^k_{ij} = p^k_{ji} and Σ_j p^k_{ij} = valency(i)
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    assert_eq!(report.numbers[i][j][k], report.numbers[j][i][k]);
                }
            }
            for k in 0..5 {
                let s_j: i64 = (0..5).map(|j| report.numbers[i][j][k]).sum();
                assert_eq!(s_j, s.p_matrix()[0][i]);
            }
        }
    }

    #[test]
    fn corrupted_matrix_fails_axioms() {
        let mut s = scheme(3);
        s.corrupt_adjacency_for_test(1, 3, 7);
        assert!(matches!(
            s.verify_axioms(),
            Err(SchemeError::PartitionViolation { .. }) | Err(SchemeError::ValencyMismatch { .. })
        ));
    }

    #[test]
    fn eigenstructure_q3() {
        let s = scheme(3);
        let report = s.verify_eigenstructure().unwrap();
        assert_eq!(report.traces[1], 72 * 6); // dim V₁ = 6 at q = 3
        assert_eq!(report.traces, [72, 432, 1440, 2160, 1080]);
    }

    #[test]
    fn quadric_scheme_and_embedding_q3() {
        let s = scheme(3);
        let qs = QuadricScheme::build(s.space());
        assert_eq!(qs.n(), 112);
        let report = embedding_check(&s, &qs).unwrap();
        assert_eq!(report.rank, 6 + 15); // dim V₁ + dim V₄
        assert_eq!(report.coefficient, (2, 4)); // (q−1)/(q+1) = 1/2

        // independent oracle: exact big-integer rank of S·E⁻·Sᵀ
        let xq = qs.x_to_quadric();
        let rows: Vec<Vec<i64>> = (0..s.n())
            .map(|u| {
                (0..s.n())
                    .map(|w| qs.g_entry(xq[u] as usize, xq[w] as usize))
                    .collect()
            })
            .collect();
        assert_eq!(crate::intmat::rank_exact(&rows), 21);
    }

    #[test]
    fn quadric_minus_idempotent_is_scaled_projector_q3() {
        let s = scheme(3);
        let qs = QuadricScheme::build(s.space());
        qs.verify_minus_idempotent().unwrap();
        // G² = q(q+1)²·G, checked directly at this size
        let n = qs.n();
        let c = 3 * 16;
        for u in 0..n {
            for w in 0..n {
                let mut acc = 0i64;
                for v in 0..n {
                    acc += qs.g_entry(u, v) * qs.g_entry(v, w);
                }
                assert_eq!(acc, c * qs.g_entry(u, w));
            }
        }
    }

    #[test]
    fn sigma_span_q3() {
        let s = scheme(3);
        let report = sigma_span_check(&s).unwrap();
        assert_eq!(report.rank_minus, 36); // 6 + 30
        assert_eq!(report.rank_plus, 36); // 1 + 20 + 15

        // independent oracle: exact big-integer ranks of both families
        let n = s.n();
        let sigma = s.space().sigma_x_table();
        let mut minus = vec![vec![0i64; n]; n];
        let mut plus = vec![vec![0i64; n]; n];
        for p in 0..n {
            minus[p][p] += 1;
            minus[p][sigma[p] as usize] -= 1;
            plus[p][p] += 1;
            plus[p][sigma[p] as usize] += 1;
        }
        assert_eq!(crate::intmat::rank_exact(&minus), 36);
        assert_eq!(crate::intmat::rank_exact(&plus), 36);
    }

    #[test]
    fn eigenvalue_of_r3_on_v1() {
        // used by the m-cover argument: the eigenvalue is −(q²+1)
        for q in [3i64, 4, 5, 7] {
            assert_eq!(eigenmatrix_p(q)[1][3], -(q * q + 1));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let a = scheme(3);
        let b = scheme(3);
        assert_eq!(a.rel, b.rel);
    }
}
