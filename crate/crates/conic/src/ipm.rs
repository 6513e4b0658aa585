//! Homogeneous self-dual primal-dual interior-point method.
//!
//! The problem `min cᵀx s.t. Ax = b, x ∈ Rᶠ × R₊ˡ × S₊ⁿ¹ × …` is embedded as
//!
//! ```text
//!   A x − b τ = 0,   Aᵀy + z − c τ = 0 (z = 0 on the free part),
//!   bᵀy − cᵀx − κ = 0,   x, z ∈ cone,  τ, κ ≥ 0
//! ```
//!
//! and followed with Nesterov–Todd scaling and a Mehrotra predictor-corrector.
//! 1×1 blocks are handled as a linear cone. Free variables enter the Newton
//! system through a saddle-point block that is reduced with the augmented
//! Schur complement `M + γ A_F A_Fᵀ`.

use crate::expr::Var;
use crate::problem::{ConicProblem, SolverOptions};
use crate::solution::{ConicSolution, Residuals, SolveStatus};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Element `A_ij = A_ji = a` of a sparse symmetric matrix, stored with `i >= j`.
#[derive(Clone, Copy, Debug)]
struct SymEntry {
    i: usize,
    j: usize,
    a: f64,
}

fn sym_inner(entries: &[SymEntry], x: &DMatrix<f64>) -> f64 {
    entries.iter().fold(0.0, |acc, e| {
        if e.i == e.j {
            acc + e.a * x[(e.i, e.j)]
        } else {
            acc + 2.0 * e.a * x[(e.i, e.j)]
        }
    })
}

fn sym_add_scaled(entries: &[SymEntry], scale: f64, out: &mut DMatrix<f64>) {
    for e in entries {
        out[(e.i, e.j)] += scale * e.a;
        if e.i != e.j {
            out[(e.j, e.i)] += scale * e.a;
        }
    }
}

fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum BlockKind {
    Lp(usize),
    Sdp(usize),
}

/// Internal, row-scaled copy of the problem data.
struct Data {
    m: usize,
    b: DVector<f64>,
    row_scale: Vec<f64>,
    /// Original equality index of each internal row.
    row_origin: Vec<usize>,
    free_of_scalar: Vec<Option<usize>>,
    af: Vec<Vec<(usize, f64)>>,
    cf: DVector<f64>,
    al: Vec<Vec<(usize, f64)>>,
    cl: DVector<f64>,
    dims: Vec<usize>,
    asdp: Vec<Vec<(usize, Vec<SymEntry>)>>,
    csdp: Vec<DMatrix<f64>>,
    kinds: Vec<BlockKind>,
    obj_const: f64,
    b_norm: f64,
    c_norm: f64,
}

enum Prepared {
    Ready(Data),
    /// `0 = rhs` with `rhs ≠ 0`.
    TriviallyInfeasible,
    /// A free variable with nonzero cost appears in no constraint.
    TriviallyUnbounded,
}

impl Data {
    fn build(p: &ConicProblem) -> Prepared {
        let dims_all = p.block_dims();
        let mut kinds = Vec::with_capacity(dims_all.len());
        let (mut nl, mut dims) = (0usize, Vec::new());
        for &d in dims_all {
            if d == 1 {
                kinds.push(BlockKind::Lp(nl));
                nl += 1;
            } else {
                kinds.push(BlockKind::Sdp(dims.len()));
                dims.push(d);
            }
        }

        let mut rows = Vec::new();
        for (k, eq) in p.equalities().iter().enumerate() {
            if eq.terms.is_empty() {
                if eq.rhs.abs() > 1e-12 {
                    return Prepared::TriviallyInfeasible;
                }
                continue;
            }
            rows.push(k);
        }
        let m = rows.len();

        // free columns, indexed by problem scalar first
        let mut scalar_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_scalars()];
        let mut al: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nl];
        let mut asdp: Vec<Vec<(usize, Vec<SymEntry>)>> = vec![Vec::new(); dims.len()];
        let mut b = DVector::zeros(m);
        let mut row_scale = vec![1.0; m];

        for (r, &k) in rows.iter().enumerate() {
            let eq = &p.equalities()[k];
            let mut norm2 = 0.0;
            let mut per_block: Vec<(usize, Vec<SymEntry>)> = Vec::new();
            for &(v, c) in &eq.terms {
                match v {
                    Var::Scalar(i) => {
                        scalar_cols[i].push((r, c));
                        norm2 += c * c;
                    }
                    Var::Entry { block, row, col } => match kinds[block] {
                        BlockKind::Lp(j) => {
                            al[j].push((r, c));
                            norm2 += c * c;
                        }
                        BlockKind::Sdp(s) => {
                            let a = if row == col { c } else { 0.5 * c };
                            norm2 += if row == col { a * a } else { 2.0 * a * a };
                            match per_block.iter_mut().find(|(bb, _)| *bb == s) {
                                Some((_, es)) => es.push(SymEntry { i: row, j: col, a }),
                                None => per_block.push((s, vec![SymEntry { i: row, j: col, a }])),
                            }
                        }
                    },
                }
            }
            let scale = 1.0 / norm2.sqrt();
            row_scale[r] = scale;
            b[r] = eq.rhs * scale;
            for (s, mut es) in per_block {
                for e in &mut es {
                    e.a *= scale;
                }
                asdp[s].push((r, es));
            }
        }
        for col in scalar_cols.iter_mut().chain(al.iter_mut()) {
            for (r, c) in col.iter_mut() {
                *c *= row_scale[*r];
            }
        }

        // objective
        let mut c_scalar = vec![0.0; p.num_scalars()];
        let mut cl = DVector::zeros(nl);
        let mut csdp: Vec<DMatrix<f64>> = dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        for &(v, c) in p.objective().terms() {
            match v {
                Var::Scalar(i) => c_scalar[i] += c,
                Var::Entry { block, row, col } => match kinds[block] {
                    BlockKind::Lp(j) => cl[j] += c,
                    BlockKind::Sdp(s) => {
                        if row == col {
                            csdp[s][(row, col)] += c;
                        } else {
                            csdp[s][(row, col)] += 0.5 * c;
                            csdp[s][(col, row)] += 0.5 * c;
                        }
                    }
                },
            }
        }

        let mut free_of_scalar = vec![None; p.num_scalars()];
        let mut af = Vec::new();
        let mut cf = Vec::new();
        for (i, col) in scalar_cols.into_iter().enumerate() {
            if col.is_empty() {
                if c_scalar[i] != 0.0 {
                    return Prepared::TriviallyUnbounded;
                }
                continue;
            }
            free_of_scalar[i] = Some(af.len());
            af.push(col);
            cf.push(c_scalar[i]);
        }
        let cf = DVector::from_vec(cf);

        let b_norm = p
            .equalities()
            .iter()
            .map(|e| e.rhs.abs())
            .fold(0.0, f64::max);
        let c_norm = p
            .objective()
            .terms()
            .iter()
            .map(|t| t.1.abs())
            .fold(0.0, f64::max);

        Prepared::Ready(Data {
            m,
            b,
            row_scale,
            row_origin: rows,
            free_of_scalar,
            af,
            cf,
            al,
            cl,
            dims,
            asdp,
            csdp,
            kinds,
            obj_const: p.objective().constant_term(),
            b_norm,
            c_norm,
        })
    }

    fn nf(&self) -> usize {
        self.af.len()
    }

    fn nl(&self) -> usize {
        self.al.len()
    }

    fn degree(&self) -> usize {
        self.nl() + self.dims.iter().sum::<usize>()
    }

    fn apply_a(&self, xf: &DVector<f64>, xl: &DVector<f64>, xs: &[DMatrix<f64>]) -> DVector<f64> {
        let mut r = DVector::zeros(self.m);
        for (j, col) in self.af.iter().enumerate() {
            for &(k, a) in col {
                r[k] += a * xf[j];
            }
        }
        for (j, col) in self.al.iter().enumerate() {
            for &(k, a) in col {
                r[k] += a * xl[j];
            }
        }
        for (s, rows) in self.asdp.iter().enumerate() {
            for (k, es) in rows {
                r[*k] += sym_inner(es, &xs[s]);
            }
        }
        r
    }

    fn apply_at(&self, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>) {
        let f = DVector::from_iterator(
            self.nf(),
            self.af
                .iter()
                .map(|col| col.iter().map(|&(k, a)| a * y[k]).sum::<f64>()),
        );
        let l = DVector::from_iterator(
            self.nl(),
            self.al
                .iter()
                .map(|col| col.iter().map(|&(k, a)| a * y[k]).sum::<f64>()),
        );
        let s = self
            .asdp
            .iter()
            .zip(&self.dims)
            .map(|(rows, &d)| {
                let mut out = DMatrix::zeros(d, d);
                for (k, es) in rows {
                    sym_add_scaled(es, y[*k], &mut out);
                }
                out
            })
            .collect();
        (f, l, s)
    }

    fn dense_af(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m, self.nf());
        for (j, col) in self.af.iter().enumerate() {
            for &(k, a) in col {
                out[(k, j)] += a;
            }
        }
        out
    }
}

#[derive(Clone)]
struct Point {
    xf: DVector<f64>,
    xl: DVector<f64>,
    xs: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    zl: DVector<f64>,
    zs: Vec<DMatrix<f64>>,
    tau: f64,
    kappa: f64,
}

impl Point {
    fn initial(d: &Data) -> Self {
        Point {
            xf: DVector::zeros(d.nf()),
            xl: DVector::from_element(d.nl(), 1.0),
            xs: d.dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            y: DVector::zeros(d.m),
            zl: DVector::from_element(d.nl(), 1.0),
            zs: d.dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            tau: 1.0,
            kappa: 1.0,
        }
    }

    fn complementarity(&self) -> f64 {
        self.xl.dot(&self.zl)
            + self
                .xs
                .iter()
                .zip(&self.zs)
                .map(|(x, z)| frob(x, z))
                .sum::<f64>()
    }

    fn step(&self, dir: &Direction, alpha: f64) -> Point {
        let mut p = self.clone();
        p.xf.axpy(alpha, &dir.xf, 1.0);
        p.xl.axpy(alpha, &dir.xl, 1.0);
        p.y.axpy(alpha, &dir.y, 1.0);
        p.zl.axpy(alpha, &dir.zl, 1.0);
        for (x, dx) in p.xs.iter_mut().zip(&dir.xs) {
            *x += dx * alpha;
            symmetrize(x);
        }
        for (z, dz) in p.zs.iter_mut().zip(&dir.zs) {
            *z += dz * alpha;
            symmetrize(z);
        }
        p.tau += alpha * dir.tau;
        p.kappa += alpha * dir.kappa;
        p
    }
}

struct Residual {
    rp: DVector<f64>,
    rdf: DVector<f64>,
    rdl: DVector<f64>,
    rds: Vec<DMatrix<f64>>,
    rg: f64,
    cx: f64,
    by: f64,
}

impl Residual {
    fn new(d: &Data, p: &Point) -> Self {
        let rp = d.apply_a(&p.xf, &p.xl, &p.xs) - &d.b * p.tau;
        let (atf, atl, ats) = d.apply_at(&p.y);
        let rdf = atf - &d.cf * p.tau;
        let rdl = atl + &p.zl - &d.cl * p.tau;
        let rds = ats
            .into_iter()
            .zip(&p.zs)
            .zip(&d.csdp)
            .map(|((a, z), c)| a + z - c * p.tau)
            .collect();
        let cx = d.cf.dot(&p.xf)
            + d.cl.dot(&p.xl)
            + d.csdp
                .iter()
                .zip(&p.xs)
                .map(|(c, x)| frob(c, x))
                .sum::<f64>();
        let by = d.b.dot(&p.y);
        Residual {
            rp,
            rdf,
            rdl,
            rds,
            rg: by - cx - p.kappa,
            cx,
            by,
        }
    }

    /// `‖Ax − bτ‖∞` on the unscaled rows.
    fn primal_inf_norm(&self, d: &Data) -> f64 {
        self.rp
            .iter()
            .zip(&d.row_scale)
            .map(|(r, s)| (r / s).abs())
            .fold(0.0, f64::max)
    }

    fn dual_inf_norm(&self) -> f64 {
        let mut v = self.rdf.amax().max(self.rdl.amax());
        for r in &self.rds {
            v = v.max(r.amax());
        }
        v
    }
}

/// Nesterov–Todd scaling of one PSD block: `W = R Rᵀ`, `RᵀZR = R⁻¹XR⁻ᵀ = diag(λ)`.
struct NtBlock {
    r: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl NtBlock {
    fn new(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Self> {
        let lx = Cholesky::new(x.clone())?.l();
        let lz = Cholesky::new(z.clone())?.l();
        let prod = lz.transpose() * &lx;
        let svd = prod.svd(false, true);
        let vt = svd.v_t?;
        let sv = svd.singular_values;
        if sv.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return None;
        }
        let mut r = lx * vt.transpose();
        for (j, s) in sv.iter().enumerate() {
            let f = 1.0 / s.sqrt();
            for i in 0..r.nrows() {
                r[(i, j)] *= f;
            }
        }
        let w = &r * r.transpose();
        Some(NtBlock { r, w, lambda: sv })
    }

    fn apply_d(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = &self.w * v * &self.w;
        symmetrize(&mut out);
        out
    }

    /// Solves `Λ∘S = T` (Jordan product) for `S`.
    fn jordan_solve(&self, t: &DMatrix<f64>) -> DMatrix<f64> {
        let n = t.nrows();
        DMatrix::from_fn(n, n, |i, j| {
            2.0 * t[(i, j)] / (self.lambda[i] + self.lambda[j])
        })
    }
}

struct Scaling {
    lp_w: DVector<f64>,
    lp_d: DVector<f64>,
    lp_lambda: DVector<f64>,
    sdp: Vec<NtBlock>,
}

impl Scaling {
    fn new(p: &Point) -> Option<Self> {
        let n = p.xl.len();
        let mut lp_w = DVector::zeros(n);
        let mut lp_d = DVector::zeros(n);
        let mut lp_lambda = DVector::zeros(n);
        for j in 0..n {
            let (x, z) = (p.xl[j], p.zl[j]);
            if !(x > 0.0 && z > 0.0) {
                return None;
            }
            lp_d[j] = x / z;
            lp_w[j] = lp_d[j].sqrt();
            lp_lambda[j] = (x * z).sqrt();
        }
        let sdp =
            p.xs.iter()
                .zip(&p.zs)
                .map(|(x, z)| NtBlock::new(x, z))
                .collect::<Option<Vec<_>>>()?;
        Some(Scaling {
            lp_w,
            lp_d,
            lp_lambda,
            sdp,
        })
    }
}

/// Factored saddle-point system `[[M, A_F], [A_Fᵀ, 0]]`.
struct Kkt {
    m_mat: DMatrix<f64>,
    af: DMatrix<f64>,
    gamma: f64,
    chol: Cholesky<f64, Dyn>,
    /// `(M + γ A_F A_Fᵀ)⁻¹ A_F`
    y_mat: DMatrix<f64>,
    s_chol: Option<Cholesky<f64, Dyn>>,
}

/// Cholesky factor of `a + δI` with the smallest `δ` from a geometric ladder
/// that succeeds. Dependent constraints make `a` singular.
fn regularized_cholesky(a: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let n = a.nrows();
    let max_diag = (0..n)
        .map(|i| a[(i, i)].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    if let Some(c) = Cholesky::new(a.clone()) {
        return Some(c);
    }
    let mut reg = 1e-14 * max_diag;
    while reg <= 1e-4 * max_diag {
        let mut trial = a.clone();
        for i in 0..n {
            trial[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(trial) {
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}

impl Kkt {
    fn factor(m_mat: DMatrix<f64>, af: DMatrix<f64>) -> Option<Self> {
        let m = m_mat.nrows();
        let nf = af.ncols();
        let mut mhat = m_mat.clone();
        let mut gamma = 0.0;
        if nf > 0 {
            let aat = &af * af.transpose();
            let tr_m = m_mat.trace().max(0.0);
            let tr_a = aat.trace();
            gamma = if tr_m > 0.0 && tr_a > 0.0 {
                tr_m / tr_a
            } else {
                1.0
            };
            mhat += aat * gamma;
        }
        let chol = regularized_cholesky(mhat)?;
        let (y_mat, s_chol) = if nf > 0 {
            let y_mat = chol.solve(&af);
            let s = af.transpose() * &y_mat;
            (y_mat, Some(regularized_cholesky(s)?))
        } else {
            (DMatrix::zeros(m, 0), None)
        };
        Some(Kkt {
            m_mat,
            af,
            gamma,
            chol,
            y_mat,
            s_chol,
        })
    }

    fn solve_once(
        &self,
        f: &DVector<f64>,
        g: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        match &self.s_chol {
            None => Some((self.chol.solve(f), DVector::zeros(0))),
            Some(sc) => {
                let rhs = f + &self.af * g * self.gamma;
                let t = self.chol.solve(&rhs);
                let v = sc.solve(&(self.af.transpose() * &t - g));
                let u = t - &self.y_mat * &v;
                Some((u, v))
            }
        }
    }

    fn solve(&self, f: &DVector<f64>, g: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let (mut u, mut v) = self.solve_once(f, g)?;
        for _ in 0..3 {
            let r1 = f - &self.m_mat * &u - &self.af * &v;
            let r2 = g - self.af.transpose() * &u;
            let scale = f.amax().max(g.amax()).max(1e-300);
            if r1.amax().max(r2.amax()) <= 1e-15 * scale {
                break;
            }
            let (du, dv) = self.solve_once(&r1, &r2)?;
            u += du;
            v += dv;
        }
        if u.iter().chain(v.iter()).all(|x| x.is_finite()) {
            Some((u, v))
        } else {
            None
        }
    }
}

struct Direction {
    xf: DVector<f64>,
    xl: DVector<f64>,
    xs: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    zl: DVector<f64>,
    zs: Vec<DMatrix<f64>>,
    tau: f64,
    kappa: f64,
    // scaled cone components, used for step lengths and the Mehrotra term
    xl_s: DVector<f64>,
    zl_s: DVector<f64>,
    xs_s: Vec<DMatrix<f64>>,
    zs_s: Vec<DMatrix<f64>>,
}

/// Per-iteration quantities shared by predictor and corrector solves.
struct Newton<'a> {
    data: &'a Data,
    point: &'a Point,
    scaling: &'a Scaling,
    kkt: Kkt,
    u1y: DVector<f64>,
    u1f: DVector<f64>,
    g_top: DVector<f64>,
    den: f64,
}

impl<'a> Newton<'a> {
    fn new(data: &'a Data, point: &'a Point, scaling: &'a Scaling) -> Option<Self> {
        let m = data.m;
        let mut m_mat = DMatrix::zeros(m, m);
        for (j, col) in data.al.iter().enumerate() {
            let dj = scaling.lp_d[j];
            for &(k, a) in col {
                for &(l, b) in col {
                    m_mat[(k, l)] += dj * a * b;
                }
            }
        }
        for (s, rows) in data.asdp.iter().enumerate() {
            let nt = &scaling.sdp[s];
            let n = data.dims[s];
            let g: Vec<DMatrix<f64>> = rows
                .iter()
                .map(|(_, es)| {
                    if es.len() > n {
                        let mut a = DMatrix::zeros(n, n);
                        sym_add_scaled(es, 1.0, &mut a);
                        &nt.w * a * &nt.w
                    } else {
                        let mut out = DMatrix::zeros(n, n);
                        for e in es {
                            let wi = nt.w.column(e.i);
                            let wj = nt.w.column(e.j);
                            out.ger(e.a, &wi, &wj, 1.0);
                            if e.i != e.j {
                                out.ger(e.a, &wj, &wi, 1.0);
                            }
                        }
                        out
                    }
                })
                .collect();
            for (p, (k, _)) in rows.iter().enumerate() {
                for (l, es) in rows.iter() {
                    m_mat[(*k, *l)] += sym_inner(es, &g[p]);
                }
            }
        }
        symmetrize(&mut m_mat);
        let kkt = Kkt::factor(m_mat, data.dense_af())?;

        // A_C 𝒟(c_C) and <c_C, 𝒟 c_C>
        let mut a_c = DVector::zeros(m);
        let mut q = 0.0;
        for (j, col) in data.al.iter().enumerate() {
            let dc = scaling.lp_d[j] * data.cl[j];
            q += dc * data.cl[j];
            for &(k, a) in col {
                a_c[k] += a * dc;
            }
        }
        for (s, rows) in data.asdp.iter().enumerate() {
            let gc = scaling.sdp[s].apply_d(&data.csdp[s]);
            q += frob(&data.csdp[s], &gc);
            for (k, es) in rows {
                a_c[*k] += sym_inner(es, &gc);
            }
        }
        let f1_top = &a_c + &data.b;
        let (u1y, u1f) = kkt.solve(&f1_top, &data.cf)?;
        let g_top = &data.b - &a_c;
        // exact value is at least κ/τ; cancellation can spoil that near the end
        let den = g_top.dot(&u1y) - data.cf.dot(&u1f) + q + point.kappa / point.tau;
        if !den.is_finite() {
            return None;
        }
        let den = den.max(point.kappa / point.tau);
        Some(Newton {
            data,
            point,
            scaling,
            kkt,
            u1y,
            u1f,
            g_top,
            den,
        })
    }

    /// Solves the Newton system with linear residuals scaled by `eta` and the
    /// complementarity right-hand sides `Λ∘(dX̃ + dZ̃) = rc`, `κdτ + τdκ = r_tk`.
    fn direction(
        &self,
        res: &Residual,
        eta: f64,
        rc_l: &DVector<f64>,
        rc_s: &[DMatrix<f64>],
        r_tk: f64,
    ) -> Option<Direction> {
        let d = self.data;
        let sc = self.scaling;
        let pt = self.point;

        let s_l = rc_l.component_div(&sc.lp_lambda);
        let s_s: Vec<DMatrix<f64>> = sc
            .sdp
            .iter()
            .zip(rc_s)
            .map(|(nt, rc)| nt.jordan_solve(rc))
            .collect();
        // R S Rᵀ terms
        let rsr: Vec<DMatrix<f64>> = sc
            .sdp
            .iter()
            .zip(&s_s)
            .map(|(nt, s)| {
                let mut v = &nt.r * s * nt.r.transpose();
                symmetrize(&mut v);
                v
            })
            .collect();

        let v_l = sc.lp_w.component_mul(&s_l) + sc.lp_d.component_mul(&res.rdl) * eta;
        let v_s: Vec<DMatrix<f64>> = rsr
            .iter()
            .zip(&sc.sdp)
            .zip(&res.rds)
            .map(|((rsr, nt), rd)| rsr + nt.apply_d(&(rd * eta)))
            .collect();

        let av = d.apply_a(&DVector::zeros(d.nf()), &v_l, &v_s);
        let f0_top = -(&res.rp * eta) - av;
        let f0_bot = -(&res.rdf * eta);
        let (u0y, u0f) = self.kkt.solve(&f0_top, &f0_bot)?;

        let h0 = d.cl.dot(&v_l)
            + d.csdp
                .iter()
                .zip(&v_s)
                .map(|(c, v)| frob(c, v))
                .sum::<f64>();
        let num = -eta * res.rg + h0 + r_tk / pt.tau - (self.g_top.dot(&u0y) - d.cf.dot(&u0f));
        let dtau = num / self.den;
        let dy = u0y + &self.u1y * dtau;
        let dxf = u0f + &self.u1f * dtau;

        let (_, atl, ats) = d.apply_at(&dy);
        let dzl = -(&res.rdl * eta) - atl + &d.cl * dtau;
        let dzs: Vec<DMatrix<f64>> = ats
            .into_iter()
            .zip(&res.rds)
            .zip(&d.csdp)
            .map(|((a, rd), c)| {
                let mut z = -(rd * eta) - a + c * dtau;
                symmetrize(&mut z);
                z
            })
            .collect();
        let dxl = sc.lp_w.component_mul(&s_l) - sc.lp_d.component_mul(&dzl);
        let dxs: Vec<DMatrix<f64>> = rsr
            .iter()
            .zip(&sc.sdp)
            .zip(&dzs)
            .map(|((rsr, nt), dz)| rsr - nt.apply_d(dz))
            .collect();
        let dkappa = (r_tk - pt.kappa * dtau) / pt.tau;

        let zl_s = sc.lp_w.component_mul(&dzl);
        let xl_s = &s_l - &zl_s;
        let zs_s: Vec<DMatrix<f64>> = sc
            .sdp
            .iter()
            .zip(&dzs)
            .map(|(nt, dz)| {
                let mut v = nt.r.transpose() * dz * &nt.r;
                symmetrize(&mut v);
                v
            })
            .collect();
        let xs_s: Vec<DMatrix<f64>> = s_s.iter().zip(&zs_s).map(|(s, z)| s - z).collect();

        Some(Direction {
            xf: dxf,
            xl: dxl,
            xs: dxs,
            y: dy,
            zl: dzl,
            zs: dzs,
            tau: dtau,
            kappa: dkappa,
            xl_s,
            zl_s,
            xs_s,
            zs_s,
        })
    }

    /// Largest step keeping every cone variable nonnegative.
    fn max_step(&self, dir: &Direction) -> f64 {
        let sc = self.scaling;
        let mut alpha = f64::INFINITY;
        for j in 0..sc.lp_lambda.len() {
            for dv in [dir.xl_s[j], dir.zl_s[j]] {
                if dv < 0.0 {
                    alpha = alpha.min(-sc.lp_lambda[j] / dv);
                }
            }
        }
        for (s, nt) in sc.sdp.iter().enumerate() {
            for dv in [&dir.xs_s[s], &dir.zs_s[s]] {
                let n = dv.nrows();
                let t = DMatrix::from_fn(n, n, |i, j| {
                    dv[(i, j)] / (nt.lambda[i] * nt.lambda[j]).sqrt()
                });
                let min_eig = t.symmetric_eigenvalues().min();
                if min_eig < 0.0 {
                    alpha = alpha.min(-1.0 / min_eig);
                }
            }
        }
        if dir.tau < 0.0 {
            alpha = alpha.min(-self.point.tau / dir.tau);
        }
        if dir.kappa < 0.0 {
            alpha = alpha.min(-self.point.kappa / dir.kappa);
        }
        alpha
    }
}

fn jordan(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let ab = a * b;
    (&ab + ab.transpose()) * 0.5
}

pub(crate) fn solve(problem: &ConicProblem, opts: &SolverOptions) -> ConicSolution {
    let data = match Data::build(problem) {
        Prepared::Ready(d) => d,
        Prepared::TriviallyInfeasible => return trivial(problem, SolveStatus::Infeasible),
        Prepared::TriviallyUnbounded => return trivial(problem, SolveStatus::Unbounded),
    };
    let nu = data.degree() as f64;
    let mut pt = Point::initial(&data);
    let mut status = SolveStatus::NumericalFailure;
    let mut iterations = 0;
    let mut small_steps = 0;
    let mut best: Option<(f64, Point)> = None;
    let trace = std::env::var_os("POLYCE_IPM_TRACE").is_some();

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let res = Residual::new(&data, &pt);
        let comp = pt.complementarity();
        let mu = (comp + pt.tau * pt.kappa) / (nu + 1.0);

        let pres = res.primal_inf_norm(&data) / pt.tau / (1.0 + data.b_norm);
        let dres = res.dual_inf_norm() / pt.tau / (1.0 + data.c_norm);
        let pobj = res.cx / pt.tau;
        let dobj = res.by / pt.tau;
        let gap = (pobj - dobj).abs().max(comp / (pt.tau * pt.tau));
        let rel_gap = gap / (1.0 + pobj.abs().min(dobj.abs()));
        if pres <= opts.tol && dres <= opts.tol && rel_gap <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }
        if trace {
            eprintln!(
                "{iter:3} pres {pres:.2e} dres {dres:.2e} gap {rel_gap:.2e} pobj {pobj:.6e} dobj {dobj:.6e} tau {:.2e} kappa {:.2e} mu {mu:.2e}",
                pt.tau, pt.kappa
            );
        }
        let merit = pres.max(dres).max(rel_gap);
        if best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((merit, pt.clone()));
        }

        // Farkas certificates
        if res.by > 0.0 {
            let (atf, atl, ats) = data.apply_at(&pt.y);
            let mut r = atf.amax().max((atl + &pt.zl).amax());
            for (a, z) in ats.iter().zip(&pt.zs) {
                r = r.max((a + z).amax());
            }
            if r / res.by <= opts.infeasibility_tol {
                status = SolveStatus::Infeasible;
                break;
            }
        }
        if res.cx < 0.0 {
            let ax = data.apply_a(&pt.xf, &pt.xl, &pt.xs);
            let r = ax
                .iter()
                .zip(&data.row_scale)
                .map(|(v, s)| (v / s).abs())
                .fold(0.0, f64::max);
            if r / (-res.cx) <= opts.infeasibility_tol {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(scaling) = Scaling::new(&pt) else {
            stop(trace, "scaling");
            break;
        };
        let Some(newton) = Newton::new(&data, &pt, &scaling) else {
            stop(trace, "newton system");
            break;
        };

        // predictor
        let rc_l = -scaling.lp_lambda.map(|l| l * l);
        let rc_s: Vec<DMatrix<f64>> = scaling
            .sdp
            .iter()
            .map(|nt| -DMatrix::from_diagonal(&nt.lambda.map(|l| l * l)))
            .collect();
        let Some(aff) = newton.direction(&res, 1.0, &rc_l, &rc_s, -pt.tau * pt.kappa) else {
            stop(trace, "predictor");
            break;
        };
        let alpha_aff = newton.max_step(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // corrector
        let rc_l = -scaling.lp_lambda.map(|l| l * l) - aff.xl_s.component_mul(&aff.zl_s)
            + DVector::from_element(data.nl(), sigma * mu);
        let rc_s: Vec<DMatrix<f64>> = scaling
            .sdp
            .iter()
            .enumerate()
            .map(|(s, nt)| {
                let n = nt.lambda.len();
                -DMatrix::from_diagonal(&nt.lambda.map(|l| l * l))
                    - jordan(&aff.xs_s[s], &aff.zs_s[s])
                    + DMatrix::identity(n, n) * (sigma * mu)
            })
            .collect();
        let r_tk = -pt.tau * pt.kappa - aff.tau * aff.kappa + sigma * mu;
        let Some(dir) = newton.direction(&res, 1.0 - sigma, &rc_l, &rc_s, r_tk) else {
            stop(trace, "corrector");
            break;
        };
        let mut alpha = (opts.step_fraction * newton.max_step(&dir)).min(1.0);

        // backtrack if rounding pushed a block out of the cone
        let mut next = pt.step(&dir, alpha);
        let mut tries = 0;
        while Scaling::new(&next).is_none() && tries < 20 {
            alpha *= 0.5;
            next = pt.step(&dir, alpha);
            tries += 1;
        }
        if tries == 20 {
            stop(trace, "backtracking");
            break;
        }
        small_steps = if alpha < 1e-7 { small_steps + 1 } else { 0 };
        pt = next;
        if small_steps >= 5 || !pt.tau.is_finite() {
            stop(trace, "stalled");
            break;
        }
    }

    if status == SolveStatus::NumericalFailure {
        if let Some((_, b)) = best {
            pt = b;
        }
    }
    finish(problem, &data, &pt, status, iterations)
}

fn stop(trace: bool, why: &str) {
    if trace {
        eprintln!("stopped: {why}");
    }
}

fn trivial(problem: &ConicProblem, status: SolveStatus) -> ConicSolution {
    ConicSolution {
        status,
        objective_value: f64::NAN,
        dual_objective: f64::NAN,
        iterations: 0,
        residuals: Residuals::default(),
        scalars: vec![0.0; problem.num_scalars()],
        blocks: problem
            .block_dims()
            .iter()
            .map(|&d| DMatrix::zeros(d, d))
            .collect(),
        dual_slacks: problem
            .block_dims()
            .iter()
            .map(|&d| DMatrix::zeros(d, d))
            .collect(),
        duals: vec![0.0; problem.num_equalities()],
    }
}

fn finish(
    problem: &ConicProblem,
    data: &Data,
    pt: &Point,
    status: SolveStatus,
    iterations: usize,
) -> ConicSolution {
    // certificates are normalized by their objective, solutions by τ
    let res = Residual::new(data, pt);
    let (px, dy) = match status {
        SolveStatus::Infeasible => (pt.tau.max(1e-300), res.by),
        SolveStatus::Unbounded => (-res.cx, pt.tau.max(1e-300)),
        _ => (pt.tau, pt.tau),
    };
    let scalars: Vec<f64> = data
        .free_of_scalar
        .iter()
        .map(|f| f.map_or(0.0, |j| pt.xf[j] / px))
        .collect();
    let blocks: Vec<DMatrix<f64>> = data
        .kinds
        .iter()
        .map(|k| match *k {
            BlockKind::Lp(j) => DMatrix::from_element(1, 1, pt.xl[j] / px),
            BlockKind::Sdp(s) => &pt.xs[s] / px,
        })
        .collect();
    let dual_slacks: Vec<DMatrix<f64>> = data
        .kinds
        .iter()
        .map(|k| match *k {
            BlockKind::Lp(j) => DMatrix::from_element(1, 1, pt.zl[j] / dy),
            BlockKind::Sdp(s) => &pt.zs[s] / dy,
        })
        .collect();
    let mut duals = vec![0.0; problem.num_equalities()];
    for (r, &k) in data.row_origin.iter().enumerate() {
        duals[k] = pt.y[r] * data.row_scale[r] / dy;
    }

    let mut sol = ConicSolution {
        status,
        objective_value: res.cx / px + data.obj_const,
        dual_objective: res.by / dy + data.obj_const,
        iterations,
        residuals: Residuals::default(),
        scalars,
        blocks,
        dual_slacks,
        duals,
    };
    sol.residuals = measure_residuals(problem, &sol);
    sol
}

/// Residuals recomputed from the returned values on the original problem.
fn measure_residuals(problem: &ConicProblem, sol: &ConicSolution) -> Residuals {
    let mut primal: f64 = 0.0;
    for eq in problem.equalities() {
        let lhs: f64 = eq.terms.iter().map(|&(v, c)| c * sol.value(v)).sum();
        primal = primal.max((lhs - eq.rhs).abs());
    }
    // c − Aᵀy on free scalars must vanish; on blocks it is the slack
    let mut grad_scalar = vec![0.0; problem.num_scalars()];
    let mut grad_blocks: Vec<DMatrix<f64>> = problem
        .block_dims()
        .iter()
        .map(|&d| DMatrix::zeros(d, d))
        .collect();
    let add = |v: Var, c: f64, gs: &mut Vec<f64>, gb: &mut Vec<DMatrix<f64>>| match v {
        Var::Scalar(i) => gs[i] += c,
        Var::Entry { block, row, col } => {
            if row == col {
                gb[block][(row, col)] += c;
            } else {
                gb[block][(row, col)] += 0.5 * c;
                gb[block][(col, row)] += 0.5 * c;
            }
        }
    };
    for &(v, c) in problem.objective().terms() {
        add(v, c, &mut grad_scalar, &mut grad_blocks);
    }
    for (eq, y) in problem.equalities().iter().zip(&sol.duals) {
        for &(v, c) in &eq.terms {
            add(v, -c * y, &mut grad_scalar, &mut grad_blocks);
        }
    }
    let mut dual = grad_scalar.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    for (g, z) in grad_blocks.iter().zip(&sol.dual_slacks) {
        dual = dual.max((g - z).amax());
    }
    Residuals {
        primal,
        dual,
        gap: (sol.objective_value - sol.dual_objective).abs(),
    }
}
