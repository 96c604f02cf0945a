//! Symmetric band matrices and their triangular factorizations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric N×N matrix with half-bandwidth `bw`; only the lower band is stored.
///
/// Storage is diagonal-major: entry (j + d, j) lives at `data[d * n + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self { n, bw, data: vec![0.0; (bw + 1) * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        m.data.iter_mut().for_each(|v| *v = 1.0);
        m
    }

    /// Lower band of a dense symmetric matrix; entries outside the band are dropped.
    pub fn from_dense(a: &DMatrix<f64>, bw: usize) -> Self {
        let n = a.nrows();
        let mut m = Self::zeros(n, bw);
        for j in 0..n {
            for i in j..(j + m.bw + 1).min(n) {
                m.data[(i - j) * n + j] = a[(i, j)];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw || i >= self.n {
            None
        } else {
            Some((i - j) * self.n + j)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets M[i, j] = M[j, i] = v. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band {}", self.bw));
        self.data[k] = v;
    }

    /// Adds v to M[i, j] (and by symmetry M[j, i]). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).unwrap_or_else(|| panic!("({i}, {j}) outside band {}", self.bw));
        self.data[k] += v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for d in 0..=self.bw {
            let diag = &self.data[d * n..d * n + n - d];
            for (j, &v) in diag.iter().enumerate() {
                y[j + d] += v * x[j];
                if d > 0 {
                    y[j] += v * x[j + d];
                }
            }
        }
        y
    }
}

/// Which product of the stored unit-lower (or lower) factor reproduces M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorForm {
    /// M = L Lᵀ with L lower triangular (so R = Lᵀ gives M = RᵀR).
    Cholesky,
    /// M = L D Lᵀ with L unit lower: the square-root-free Cholesky factorization.
    LdlT,
    /// M = Lᵀ D L with L unit lower, as built from sequential conditional densities.
    LtDl,
}

/// Triangular factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFactor {
    form: FactorForm,
    /// Lower band of L, same layout as [`BandMatrix`]; unit diagonal stored as 1.
    l: BandMatrix,
    /// Diagonal of D for the LDL forms, empty for Cholesky.
    d: Vec<f64>,
    log_det: f64,
    flops: u64,
}

impl BandFactor {
    /// Assembles a factor from parts. `l` must be unit lower for the LDL forms.
    pub fn from_parts(form: FactorForm, l: BandMatrix, d: Vec<f64>) -> Result<Self> {
        let n = l.dim();
        let log_det = match form {
            FactorForm::Cholesky => {
                let mut s = 0.0;
                for j in 0..n {
                    let v = l.data[j];
                    if !(v > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: j });
                    }
                    s += 2.0 * v.ln();
                }
                s
            }
            FactorForm::LdlT | FactorForm::LtDl => {
                if d.len() != n {
                    return Err(Error::Dimension { expected: n, got: d.len() });
                }
                let mut s = 0.0;
                for (j, &v) in d.iter().enumerate() {
                    if !(v > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: j });
                    }
                    s += v.ln();
                }
                s
            }
        };
        Ok(Self { form, l, d, log_det, flops: 0 })
    }

    pub fn form(&self) -> FactorForm {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.l.n
    }

    pub fn bandwidth(&self) -> usize {
        self.l.bw
    }

    /// log det M.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Floating point operations spent in the factorization (0 if built from parts).
    pub fn flops(&self) -> u64 {
        self.flops
    }

    /// L[i, j] for i ≥ j (zero above the diagonal or outside the band).
    pub fn l_entry(&self, i: usize, j: usize) -> f64 {
        if i < j {
            0.0
        } else {
            self.l.get(i, j)
        }
    }

    /// Diagonal of D (empty for Cholesky form).
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Dense L, for tests and small problems.
    pub fn l_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.l_entry(i, j))
    }

    /// Rebuilds M densely from the factor.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let l = self.l_dense();
        match self.form {
            FactorForm::Cholesky => &l * l.transpose(),
            FactorForm::LdlT => &l * DMatrix::from_diagonal(&self.d.clone().into()) * l.transpose(),
            FactorForm::LtDl => l.transpose() * DMatrix::from_diagonal(&self.d.clone().into()) * &l,
        }
    }

    /// y = L x.
    pub fn l_mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for d in 0..=self.l.bw {
            for j in 0..n - d {
                y[j + d] += self.l.data[d * n + j] * x[j];
            }
        }
        y
    }

    /// Solves L x = b in place.
    pub fn solve_lower_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        let bw = self.l.bw;
        let unit = self.form != FactorForm::Cholesky;
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l.data[(i - k) * n + k] * x[k];
            }
            x[i] = if unit { s } else { s / self.l.data[i] };
        }
    }

    /// Solves Lᵀ x = b in place.
    pub fn solve_upper_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        let bw = self.l.bw;
        let unit = self.form != FactorForm::Cholesky;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l.data[(k - i) * n + i] * x[k];
            }
            x[i] = if unit { s } else { s / self.l.data[i] };
        }
    }

    /// xᵀ M x evaluated through the factor.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        match self.form {
            FactorForm::Cholesky => {
                let n = self.dim();
                let mut s = 0.0;
                // ‖Lᵀx‖²
                for j in 0..n {
                    let mut v = 0.0;
                    for i in j..(j + self.l.bw + 1).min(n) {
                        v += self.l.data[(i - j) * n + j] * x[i];
                    }
                    s += v * v;
                }
                s
            }
            FactorForm::LdlT => {
                let n = self.dim();
                let mut s = 0.0;
                for j in 0..n {
                    let mut v = 0.0;
                    for i in j..(j + self.l.bw + 1).min(n) {
                        v += self.l.data[(i - j) * n + j] * x[i];
                    }
                    s += self.d[j] * v * v;
                }
                s
            }
            FactorForm::LtDl => self.l_mul(x).iter().zip(&self.d).map(|(v, d)| d * v * v).sum(),
        }
    }

    /// Unit-lower factor and D for either LDL form; Cholesky is rescaled to LdlT.
    fn unit_parts(&self) -> (BandMatrix, Vec<f64>) {
        match self.form {
            FactorForm::Cholesky => {
                let n = self.dim();
                let mut l = self.l.clone();
                let diag: Vec<f64> = self.l.data[..n].to_vec();
                for d in 0..=l.bw {
                    for j in 0..n - d {
                        l.data[d * n + j] /= diag[j];
                    }
                }
                (l, diag.iter().map(|v| v * v).collect())
            }
            _ => (self.l.clone(), self.d.clone()),
        }
    }
}

/// In-band Cholesky factorization M = L Lᵀ.
pub fn band_cholesky(m: &BandMatrix) -> Result<BandFactor> {
    let n = m.n;
    let bw = m.bw;
    let mut l = m.clone();
    let mut flops = 0u64;
    for j in 0..n {
        let k0 = j.saturating_sub(bw);
        let mut s = l.data[j];
        for k in k0..j {
            let v = l.data[(j - k) * n + k];
            s -= v * v;
        }
        flops += 2 * (j - k0) as u64 + 1;
        if !(s > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let piv = s.sqrt();
        l.data[j] = piv;
        for i in j + 1..(j + bw + 1).min(n) {
            let mut s = l.data[(i - j) * n + j];
            let k1 = i.saturating_sub(bw);
            for k in k1..j {
                s -= l.data[(i - k) * n + k] * l.data[(j - k) * n + k];
            }
            l.data[(i - j) * n + j] = s / piv;
            flops += 2 * (j - k1) as u64 + 1;
        }
    }
    let mut f = BandFactor::from_parts(FactorForm::Cholesky, l, Vec::new())?;
    f.flops = flops;
    Ok(f)
}

/// In-band square-root-free Cholesky factorization M = L D Lᵀ.
pub fn band_ldl(m: &BandMatrix) -> Result<BandFactor> {
    let n = m.n;
    let bw = m.bw;
    let mut l = m.clone();
    let mut d = vec![0.0; n];
    let mut w = vec![0.0; bw];
    let mut flops = 0u64;
    for j in 0..n {
        let k0 = j.saturating_sub(bw);
        let len = j - k0;
        let mut s = l.data[j];
        for (t, k) in (k0..j).enumerate() {
            let v = l.data[(j - k) * n + k];
            w[t] = v * d[k];
            s -= v * w[t];
        }
        flops += 3 * len as u64;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        d[j] = s;
        l.data[j] = 1.0;
        for i in j + 1..(j + bw + 1).min(n) {
            let mut s = l.data[(i - j) * n + j];
            let k1 = i.saturating_sub(bw);
            for k in k1..j {
                s -= l.data[(i - k) * n + k] * w[k - k0];
            }
            l.data[(i - j) * n + j] = s / d[j];
            flops += 2 * (j - k1) as u64 + 1;
        }
    }
    let mut f = BandFactor::from_parts(FactorForm::LdlT, l, d)?;
    f.flops = flops;
    Ok(f)
}

/// Solves M x = rhs with a factor of M.
pub fn band_solve(f: &BandFactor, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != f.dim() {
        return Err(Error::Dimension { expected: f.dim(), got: rhs.len() });
    }
    let mut x = rhs.to_vec();
    match f.form {
        FactorForm::Cholesky => {
            f.solve_lower_in_place(&mut x);
            f.solve_upper_in_place(&mut x);
        }
        FactorForm::LdlT => {
            f.solve_lower_in_place(&mut x);
            x.iter_mut().zip(&f.d).for_each(|(v, d)| *v /= d);
            f.solve_upper_in_place(&mut x);
        }
        FactorForm::LtDl => {
            f.solve_upper_in_place(&mut x);
            x.iter_mut().zip(&f.d).for_each(|(v, d)| *v /= d);
            f.solve_lower_in_place(&mut x);
        }
    }
    Ok(x)
}

/// Solves M X = B column by column.
pub fn band_solve_matrix(f: &BandFactor, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = rhs.clone();
    for mut col in out.column_iter_mut() {
        let x = band_solve(f, col.as_slice())?;
        col.copy_from_slice(&x);
    }
    Ok(out)
}

/// Entries of M⁻¹ inside the band of the factor (Takahashi recursions).
pub fn selected_inverse(f: &BandFactor) -> BandMatrix {
    let (l, d) = f.unit_parts();
    let n = l.n;
    let bw = l.bw;
    let mut s = BandMatrix::zeros(n, bw);
    let lv = |i: usize, j: usize| l.data[(i - j) * n + j];
    match f.form {
        FactorForm::Cholesky | FactorForm::LdlT => {
            // Lᵀ Σ = D⁻¹ L⁻¹ is lower triangular, so its upper part gives the recursion
            for i in (0..n).rev() {
                let kmax = (i + bw).min(n - 1);
                for j in (i..=kmax).rev() {
                    let mut v = if i == j { 1.0 / d[i] } else { 0.0 };
                    for k in i + 1..=kmax {
                        v -= lv(k, i) * s.get(k, j);
                    }
                    s.set(i, j, v);
                }
            }
        }
        FactorForm::LtDl => {
            // L Σ = D⁻¹ L⁻ᵀ is upper triangular; recurse forward
            for i in 0..n {
                let kmin = i.saturating_sub(bw);
                for j in kmin..=i {
                    let mut v = if i == j { 1.0 / d[i] } else { 0.0 };
                    for k in kmin..i {
                        v -= lv(i, k) * s.get(k, j);
                    }
                    s.set(i, j, v);
                }
            }
        }
    }
    s
}
