use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ncpoly::{Letter, TensorPoly, Word};
use crate::numkit::{complex_normal, ginibre, inverse, kron_all, vec_inner, ComplexMatrix, RngStream};

/// Settings for random generator sampling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Matrix dimension.
    pub d: usize,
    /// Number of variables D.
    pub n_vars: usize,
    /// Degree per party.
    pub m: usize,
    pub n_parties: usize,
    /// dⁿ×dⁿ operator that admissible polynomials must be proportional to.
    pub target: ComplexMatrix,
    /// Draw ⟨L|R⟩ = 0, giving the orthocomplement of the target space V
    /// instead of that of the null space N.
    pub orthogonal_lr: bool,
    /// Relative rank tolerance.
    pub tol: f64,
    /// Consecutive in-span draws required before closure stops.
    pub confirm_draws: usize,
    pub seed: u64,
    /// Largest ambient dimension accepted in dense mode.
    pub max_ambient: usize,
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_CONFIRM: usize = 8;
pub const DEFAULT_MAX_AMBIENT: usize = 1 << 22;

impl GeneratorConfig {
    pub fn new(d: usize, n_vars: usize, m: usize, n_parties: usize, target: ComplexMatrix) -> Self {
        Self {
            d,
            n_vars,
            m,
            n_parties,
            target,
            orthogonal_lr: false,
            tol: DEFAULT_TOL,
            confirm_draws: DEFAULT_CONFIRM,
            seed: 0,
            max_ambient: DEFAULT_MAX_AMBIENT,
        }
    }

    pub fn swap(d: usize, n_vars: usize, m: usize) -> Self {
        Self::new(d, n_vars, m, 2, crate::numkit::swap_matrix(d))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_orthogonal_lr(mut self, on: bool) -> Self {
        self.orthogonal_lr = on;
        self
    }

    /// dⁿ, the size of the operators involved.
    pub fn op_dim(&self) -> usize {
        self.d.pow(self.n_parties as u32)
    }

    /// Dⁿ, the number of letter tuples per word position.
    pub fn tuple_count(&self) -> usize {
        self.n_vars.pow(self.n_parties as u32)
    }

    /// D^(n·m), or an overflow error.
    pub fn ambient_dim(&self) -> Result<usize> {
        (self.n_parties * self.m).try_into().ok().and_then(|e: u32| self.n_vars.checked_pow(e)).ok_or_else(|| {
            Error::Overflow(format!("ambient dimension {}^{} overflows", self.n_vars, self.n_parties * self.m))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n_vars == 0 || self.n_parties == 0 {
            return Err(Error::Invalid("d, D and n must be positive".into()));
        }
        let k = self.op_dim();
        if self.target.shape() != (k, k) {
            return Err(Error::Shape(format!("target is {:?}, expected {k}×{k}", self.target.shape())));
        }
        if self.confirm_draws == 0 {
            return Err(Error::Invalid("confirm_draws must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Invalid("tol must be positive".into()));
        }
        Ok(())
    }

    /// The matrix T with T·target ∝ I used to probe proportionality.
    pub(crate) fn probe_matrix(&self) -> Result<ComplexMatrix> {
        inverse(&self.target)
    }

    pub fn var_names(&self) -> Vec<String> {
        default_var_names(self.n_vars)
    }
}

/// V, W, then X2, X3, … for larger alphabets.
pub fn default_var_names(n_vars: usize) -> Vec<String> {
    (0..n_vars)
        .map(|i| match i {
            0 => "V".to_string(),
            1 => "W".to_string(),
            _ => format!("X{i}"),
        })
        .collect()
}

/// One random draw (X₁…X_D, L, R) with boundary row ℓ = L†·T.
#[derive(Clone, Debug)]
pub struct GeneratorDraw {
    pub xs: Vec<ComplexMatrix>,
    pub left: Vec<C64>,
    pub right: Vec<C64>,
    /// ℓ = L†T as a row vector.
    pub ell: Vec<C64>,
    /// Y_a = X_{a₁}⊗…⊗X_{aₙ} for every letter tuple, party 0 most significant.
    pub ys: Vec<ComplexMatrix>,
}

impl GeneratorDraw {
    pub fn sample(cfg: &GeneratorConfig, t: &ComplexMatrix, rng: &mut RngStream) -> Self {
        let xs: Vec<ComplexMatrix> = (0..cfg.n_vars).map(|_| ginibre(cfg.d, cfg.d, rng)).collect();
        let k = cfg.op_dim();
        let left: Vec<C64> = (0..k).map(|_| complex_normal(rng)).collect();
        let mut right: Vec<C64> = (0..k).map(|_| complex_normal(rng)).collect();
        if cfg.orthogonal_lr {
            let c = vec_inner(&left, &right) / vec_inner(&left, &left);
            for (r, l) in right.iter_mut().zip(&left) {
                *r -= c * l;
            }
        }
        Self::from_parts(cfg, xs, left, right, t)
    }

    pub fn from_parts(
        cfg: &GeneratorConfig,
        xs: Vec<ComplexMatrix>,
        left: Vec<C64>,
        right: Vec<C64>,
        t: &ComplexMatrix,
    ) -> Self {
        let k = cfg.op_dim();
        let ell: Vec<C64> = (0..k).map(|j| (0..k).map(|i| left[i].conj() * t[(i, j)]).sum()).collect();
        let ys = (0..cfg.tuple_count())
            .map(|a| {
                let parts: Vec<&ComplexMatrix> =
                    tuple_letters(a, cfg.n_vars, cfg.n_parties).into_iter().map(|l| &xs[l]).collect();
                kron_all(parts)
            })
            .collect();
        Self { xs, left, right, ell, ys }
    }
}

/// Digits of tuple index `a` in base D, party 0 most significant.
pub fn tuple_letters(mut a: usize, n_vars: usize, n_parties: usize) -> Vec<usize> {
    let mut out = vec![0; n_parties];
    for k in (0..n_parties).rev() {
        out[k] = a % n_vars;
        a /= n_vars;
    }
    out
}

/// Row vector times matrix.
fn row_mul(v: &[C64], m: &ComplexMatrix, out: &mut [C64]) {
    out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
    for (i, vi) in v.iter().enumerate() {
        if *vi == C64::new(0.0, 0.0) {
            continue;
        }
        for (o, mij) in out.iter_mut().zip(m.row(i)) {
            *o += vi * mij;
        }
    }
}

/// Dense generator vector: entry w is conj(⟨L|T·X_w|R⟩) where X_w is the
/// n-party word tuple with index w (see [`coefficient_index`]).
pub fn generator_vector(cfg: &GeneratorConfig, draw: &GeneratorDraw) -> Result<Vec<C64>> {
    let amb = cfg.ambient_dim()?;
    if amb > cfg.max_ambient {
        return Err(Error::Guard(format!("ambient dimension {amb} exceeds the dense-mode limit {}", cfg.max_ambient)));
    }
    let k = cfg.op_dim();
    let nt = cfg.tuple_count();
    // rows[w] = ℓ·Y_{w_0}⋯Y_{w_t}, built breadth-first over positions.
    let mut rows = draw.ell.clone();
    let mut count = 1usize;
    for _ in 0..cfg.m {
        let mut next = vec![C64::new(0.0, 0.0); count * nt * k];
        for w in 0..count {
            let v = &rows[w * k..(w + 1) * k];
            for (a, y) in draw.ys.iter().enumerate() {
                let idx = w * nt + a;
                row_mul(v, y, &mut next[idx * k..(idx + 1) * k]);
            }
        }
        rows = next;
        count *= nt;
    }
    Ok((0..count)
        .map(|w| rows[w * k..(w + 1) * k].iter().zip(&draw.right).map(|(a, b)| a * b).sum::<C64>().conj())
        .collect())
}

/// Samples the `index`-th generator vector from the config's seed.
pub fn sample_generator(cfg: &GeneratorConfig, index: u64) -> Result<Vec<C64>> {
    let t = cfg.probe_matrix()?;
    let mut rng = stream_for(cfg, index);
    let draw = GeneratorDraw::sample(cfg, &t, &mut rng);
    generator_vector(cfg, &draw)
}

pub(crate) fn stream_for(cfg: &GeneratorConfig, index: u64) -> RngStream {
    let label = if cfg.orthogonal_lr { "generator-orthogonal" } else { "generator-free" };
    RngStream::named(cfg.seed, "search").child(label, index)
}

/// Index of a word tuple in the coefficient vector: positions are most
/// significant first, and within a position party 0 is most significant.
pub fn coefficient_index(words: &[Word], n_vars: usize) -> usize {
    let m = words.first().map_or(0, |w| w.len());
    let mut idx = 0usize;
    for t in 0..m {
        for w in words {
            idx = idx * n_vars + w.letters()[t] as usize;
        }
    }
    idx
}

/// Inverse of [`coefficient_index`].
pub fn coefficient_words(mut idx: usize, n_vars: usize, n_parties: usize, m: usize) -> Vec<Word> {
    let mut letters = vec![vec![0 as Letter; m]; n_parties];
    for t in (0..m).rev() {
        for k in (0..n_parties).rev() {
            letters[k][t] = (idx % n_vars) as Letter;
            idx /= n_vars;
        }
    }
    letters.into_iter().map(Word::new).collect()
}

/// Reads a coefficient vector as a polynomial, dropping entries with
/// |c| ≤ `drop_tol`·max|c|.
pub fn poly_from_coefficients(
    v: &[C64],
    var_names: Vec<String>,
    n_parties: usize,
    m: usize,
    drop_tol: f64,
) -> Result<TensorPoly> {
    let n_vars = var_names.len();
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cut = drop_tol * max;
    let terms = v
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > cut)
        .map(|(i, c)| (*c, coefficient_words(i, n_vars, n_parties, m)));
    TensorPoly::from_terms(var_names, n_parties, terms)
}

/// Dense coefficient vector of a homogeneous polynomial with equal
/// per-party degree.
pub fn coefficients_from_poly(p: &TensorPoly) -> Result<Vec<C64>> {
    let m = p.degrees()[0];
    if p.degrees().iter().any(|&x| x != m) {
        return Err(Error::Homogeneity(format!("unequal per-party degrees {:?}", p.degrees())));
    }
    let len = (p.n_parties() * m)
        .try_into()
        .ok()
        .and_then(|e: u32| p.n_vars().checked_pow(e))
        .ok_or_else(|| Error::Overflow("coefficient vector too large".into()))?;
    let mut v = vec![C64::new(0.0, 0.0); len];
    for (words, c) in p.terms() {
        v[coefficient_index(words, p.n_vars())] = *c;
    }
    Ok(v)
}
