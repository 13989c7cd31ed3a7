//! Incrementally maintained factorization of `A_ΓᵀA_Γ`.
//!
//! The support `Γ` of a homotopy iterate changes by one column per step, so
//! the small Gram system behind every update direction is never factored from
//! scratch. Two representations are kept in sync with the support:
//!
//! * [`FactorMode::Cholesky`] stores an upper-triangular `R` with
//!   `RᵀR = A_ΓᵀA_Γ`. Appending a column is one triangular solve; deleting a
//!   column leaves an upper-Hessenberg tail that a sweep of Givens rotations
//!   restores.
//! * [`FactorMode::Inverse`] stores `(A_ΓᵀA_Γ)⁻¹` directly and updates it
//!   with the bordering form of the matrix-inversion lemma.
//!
//! Both keep an `M×S` copy of the support columns (in insertion order), which
//! is what insertions correlate against and what periodic refactorization
//! rebuilds from.

use serde::{Deserialize, Serialize};

use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

/// Relative pivot threshold: a Schur complement below
/// `PIVOT_TOL * max(diag(A_ΓᵀA_Γ))` means the entering column is dependent.
pub const PIVOT_TOL: f64 = 1e-12;

/// Incremental updates between automatic refactorizations.
pub const DEFAULT_REFACTOR_PERIOD: usize = 500;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorMode {
    #[default]
    Cholesky,
    Inverse,
}

impl std::str::FromStr for FactorMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cholesky" => Ok(FactorMode::Cholesky),
            "inverse" => Ok(FactorMode::Inverse),
            other => Err(format!("unknown factor mode `{other}` (expected cholesky or inverse)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GramFactor {
    mode: FactorMode,
    rows: usize,
    order: usize,
    cap: usize,
    /// `cap × cap`, row-major; only the leading `order × order` block is live.
    payload: Vec<f64>,
    columns: Vec<usize>,
    /// Column-major copy of `A_Γ`.
    cache: Vec<f64>,
    diag: Vec<f64>,
    updates: usize,
    refactor_period: usize,
}

impl GramFactor {
    /// Empty factor for a matrix with `rows` rows.
    pub fn new(mode: FactorMode, rows: usize) -> Self {
        GramFactor {
            mode,
            rows,
            order: 0,
            cap: 0,
            payload: Vec::new(),
            columns: Vec::new(),
            cache: Vec::new(),
            diag: Vec::new(),
            updates: 0,
            refactor_period: DEFAULT_REFACTOR_PERIOD,
        }
    }

    /// Sets the number of incremental updates after which the factor is
    /// rebuilt from its column cache. Zero disables refactorization.
    pub fn with_refactor_period(mut self, period: usize) -> Self {
        self.refactor_period = period;
        self
    }

    pub fn mode(&self) -> FactorMode {
        self.mode
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.order == 0
    }

    /// Column indices of `A` in insertion order.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn position(&self, col: usize) -> Option<usize> {
        self.columns.iter().position(|&c| c == col)
    }

    /// Cached copy of the `k`-th support column.
    pub fn cached_column(&self, k: usize) -> &[f64] {
        &self.cache[k * self.rows..(k + 1) * self.rows]
    }

    /// The live `S×S` payload, row-major: `R` in Cholesky mode, the inverse
    /// Gram matrix in inverse mode.
    pub fn payload(&self) -> Vec<f64> {
        let s = self.order;
        let mut out = Vec::with_capacity(s * s);
        for i in 0..s {
            out.extend_from_slice(&self.payload[i * self.cap..i * self.cap + s]);
        }
        out
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.payload[i * self.cap + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.payload[i * self.cap + j]
    }

    fn reserve(&mut self, order: usize) {
        if order <= self.cap {
            return;
        }
        let new_cap = order.max(2 * self.cap).max(4);
        let mut grown = vec![0.0; new_cap * new_cap];
        for i in 0..self.order {
            grown[i * new_cap..i * new_cap + self.order]
                .copy_from_slice(&self.payload[i * self.cap..i * self.cap + self.order]);
        }
        self.payload = grown;
        self.cap = new_cap;
    }

    fn max_diag(&self) -> f64 {
        self.diag.iter().fold(0.0, |m: f64, &d| m.max(d))
    }

    /// Appends column `col` of `a` to the factored support.
    pub fn insert(&mut self, a: &DenseMatrix, col: usize) -> Result<()> {
        if a.rows() != self.rows {
            return Err(Error::contract(format!(
                "factor built for {} rows, matrix has {}",
                self.rows,
                a.rows()
            )));
        }
        if col >= a.cols() {
            return Err(Error::contract(format!(
                "column {col} out of range for {} columns",
                a.cols()
            )));
        }
        if self.position(col).is_some() {
            return Err(Error::contract(format!("column {col} is already in the factor")));
        }
        self.insert_column(col, a.column(col))
    }

    fn insert_column(&mut self, col: usize, v: Vec<f64>) -> Result<()> {
        let s = self.order;
        let b: Vec<f64> = (0..s).map(|k| dot(self.cached_column(k), &v)).collect();
        let c = dot(&v, &v);
        let scale = self.max_diag().max(c);

        match self.mode {
            FactorMode::Cholesky => {
                // Rᵀ r = b
                let mut r = vec![0.0; s];
                for i in 0..s {
                    let mut acc = b[i];
                    for k in 0..i {
                        acc -= self.at(k, i) * r[k];
                    }
                    r[i] = acc / self.at(i, i);
                }
                let pivot = c - dot(&r, &r);
                if !(pivot > PIVOT_TOL * scale) {
                    return Err(Error::DegenerateGram { index: col });
                }
                self.reserve(s + 1);
                for (k, rk) in r.iter().enumerate() {
                    *self.at_mut(k, s) = *rk;
                    *self.at_mut(s, k) = 0.0;
                }
                *self.at_mut(s, s) = pivot.sqrt();
            }
            FactorMode::Inverse => {
                let u: Vec<f64> = (0..s)
                    .map(|i| (0..s).map(|j| self.at(i, j) * b[j]).sum())
                    .collect();
                let schur = c - dot(&b, &u);
                if !(schur > PIVOT_TOL * scale) {
                    return Err(Error::DegenerateGram { index: col });
                }
                self.reserve(s + 1);
                for i in 0..s {
                    for j in 0..s {
                        *self.at_mut(i, j) += u[i] * u[j] / schur;
                    }
                    *self.at_mut(i, s) = -u[i] / schur;
                    *self.at_mut(s, i) = -u[i] / schur;
                }
                *self.at_mut(s, s) = 1.0 / schur;
            }
        }

        self.order = s + 1;
        self.columns.push(col);
        self.cache.extend_from_slice(&v);
        self.diag.push(c);
        self.bump()
    }

    /// Drops the column at `position` within the support order.
    pub fn remove(&mut self, position: usize) -> Result<()> {
        let s = self.order;
        if s == 0 {
            return Err(Error::contract("cannot remove from an empty factor"));
        }
        if position >= s {
            return Err(Error::contract(format!(
                "position {position} out of range for factor of order {s}"
            )));
        }

        match self.mode {
            FactorMode::Cholesky => {
                for i in 0..s {
                    for j in position..s - 1 {
                        let v = self.at(i, j + 1);
                        *self.at_mut(i, j) = v;
                    }
                }
                // Columns position..s-1 now carry one subdiagonal entry each.
                for j in position..s - 1 {
                    let a = self.at(j, j);
                    let b = self.at(j + 1, j);
                    let r = a.hypot(b);
                    let (c, sn) = (a / r, b / r);
                    for col in j..s - 1 {
                        let t1 = self.at(j, col);
                        let t2 = self.at(j + 1, col);
                        *self.at_mut(j, col) = c * t1 + sn * t2;
                        *self.at_mut(j + 1, col) = -sn * t1 + c * t2;
                    }
                    *self.at_mut(j + 1, j) = 0.0;
                }
            }
            FactorMode::Inverse => {
                let k = position;
                let gkk = self.at(k, k);
                let gk: Vec<f64> = (0..s).map(|i| self.at(i, k)).collect();
                let keep: Vec<usize> = (0..s).filter(|&i| i != k).collect();
                let mut next = vec![0.0; (s - 1) * (s - 1)];
                for (ni, &i) in keep.iter().enumerate() {
                    for (nj, &j) in keep.iter().enumerate() {
                        next[ni * (s - 1) + nj] = self.at(i, j) - gk[i] * gk[j] / gkk;
                    }
                }
                for i in 0..s - 1 {
                    for j in 0..s - 1 {
                        *self.at_mut(i, j) = next[i * (s - 1) + j];
                    }
                }
            }
        }
        for i in 0..s {
            *self.at_mut(i, s - 1) = 0.0;
            *self.at_mut(s - 1, i) = 0.0;
        }

        self.order = s - 1;
        self.columns.remove(position);
        self.cache
            .drain(position * self.rows..(position + 1) * self.rows);
        self.diag.remove(position);
        self.bump()
    }

    fn bump(&mut self) -> Result<()> {
        self.updates += 1;
        if self.refactor_period > 0 && self.updates >= self.refactor_period {
            self.rebuild()?;
        }
        Ok(())
    }

    /// Solves `(A_ΓᵀA_Γ) u = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let s = self.order;
        if rhs.len() != s {
            return Err(Error::contract(format!(
                "right-hand side of length {} for factor of order {s}",
                rhs.len()
            )));
        }
        match self.mode {
            FactorMode::Cholesky => {
                let mut t = vec![0.0; s];
                for i in 0..s {
                    let mut acc = rhs[i];
                    for k in 0..i {
                        acc -= self.at(k, i) * t[k];
                    }
                    t[i] = acc / self.at(i, i);
                }
                for i in (0..s).rev() {
                    let mut acc = t[i];
                    for k in i + 1..s {
                        acc -= self.at(i, k) * t[k];
                    }
                    t[i] = acc / self.at(i, i);
                }
                Ok(t)
            }
            FactorMode::Inverse => Ok((0..s)
                .map(|i| {
                    let row = &self.payload[i * self.cap..i * self.cap + s];
                    dot(row, rhs)
                })
                .collect()),
        }
    }

    /// Recomputes the payload from the cached columns, discarding update history.
    pub fn rebuild(&mut self) -> Result<()> {
        let s = self.order;
        let gram = self.cached_gram();
        let r = cholesky_upper(&gram, s, &self.columns)?;
        let payload = match self.mode {
            FactorMode::Cholesky => r,
            FactorMode::Inverse => inverse_from_cholesky(&r, s),
        };
        self.cap = s.max(self.cap);
        self.payload = vec![0.0; self.cap * self.cap];
        for i in 0..s {
            self.payload[i * self.cap..i * self.cap + s].copy_from_slice(&payload[i * s..(i + 1) * s]);
        }
        self.updates = 0;
        Ok(())
    }

    fn cached_gram(&self) -> Vec<f64> {
        let s = self.order;
        let mut g = vec![0.0; s * s];
        for i in 0..s {
            for j in i..s {
                let v = dot(self.cached_column(i), self.cached_column(j));
                g[i * s + j] = v;
                g[j * s + i] = v;
            }
        }
        g
    }
}

/// Fresh factorization of `A_ΓᵀA_Γ` for the given support, no update history.
pub fn refactorize(a: &DenseMatrix, support: &[usize], mode: FactorMode) -> Result<GramFactor> {
    let mut seen = vec![false; a.cols()];
    for &j in support {
        if j >= a.cols() || seen[j] {
            return Err(Error::contract(format!(
                "support index {j} is out of range or repeated"
            )));
        }
        seen[j] = true;
    }
    let mut f = GramFactor::new(mode, a.rows());
    for &j in support {
        f.columns.push(j);
        let col = a.column(j);
        f.diag.push(dot(&col, &col));
        f.cache.extend_from_slice(&col);
    }
    f.order = support.len();
    f.rebuild()?;
    Ok(f)
}

/// Upper-triangular `R` with `RᵀR = G` (`G` is `s×s`, row-major).
fn cholesky_upper(g: &[f64], s: usize, labels: &[usize]) -> Result<Vec<f64>> {
    let scale = (0..s).fold(0.0, |m: f64, i| m.max(g[i * s + i]));
    let mut r = vec![0.0; s * s];
    for j in 0..s {
        let mut d = g[j * s + j];
        for k in 0..j {
            d -= r[k * s + j] * r[k * s + j];
        }
        if !(d > PIVOT_TOL * scale) {
            return Err(Error::DegenerateGram { index: labels[j] });
        }
        let rjj = d.sqrt();
        r[j * s + j] = rjj;
        for i in j + 1..s {
            let mut acc = g[j * s + i];
            for k in 0..j {
                acc -= r[k * s + j] * r[k * s + i];
            }
            r[j * s + i] = acc / rjj;
        }
    }
    Ok(r)
}

/// `(RᵀR)⁻¹ = R⁻¹R⁻ᵀ`.
fn inverse_from_cholesky(r: &[f64], s: usize) -> Vec<f64> {
    let mut rinv = vec![0.0; s * s];
    for j in 0..s {
        rinv[j * s + j] = 1.0 / r[j * s + j];
        for i in (0..j).rev() {
            let mut acc = 0.0;
            for k in i + 1..=j {
                acc += r[i * s + k] * rinv[k * s + j];
            }
            rinv[i * s + j] = -acc / r[i * s + i];
        }
    }
    let mut out = vec![0.0; s * s];
    for i in 0..s {
        for j in i..s {
            let mut acc = 0.0;
            for k in j..s {
                acc += rinv[i * s + k] * rinv[j * s + k];
            }
            out[i * s + j] = acc;
            out[j * s + i] = acc;
        }
    }
    out
}
