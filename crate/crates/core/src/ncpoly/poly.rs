use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64 as C64;

use super::alg::{ExtendedMatrix, MatAlg, ScaledMatrix};
use super::word::{Letter, Word};
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

/// One summand `coeff · X_{w₁} ⊗ … ⊗ X_{wₙ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTerm {
    pub coeff: C64,
    pub words: Vec<Word>,
}

/// Homogeneous n-party polynomial in noncommuting variables. Party k's words
/// all have length `degrees[k]`; duplicate word tuples are merged and exact
/// zero coefficients dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorPoly {
    var_names: Vec<String>,
    degrees: Vec<usize>,
    terms: BTreeMap<Vec<Word>, C64>,
}

/// Per party, per position: the set of letters occurring there.
pub type ColumnProfile = Vec<Vec<BTreeSet<Letter>>>;

/// Incremental constructor that enforces homogeneity as terms arrive.
#[derive(Clone, Debug)]
pub struct PolyBuilder {
    var_names: Vec<String>,
    n_parties: usize,
    degrees: Option<Vec<usize>>,
    terms: BTreeMap<Vec<Word>, C64>,
}

impl PolyBuilder {
    pub fn new(var_names: Vec<String>, n_parties: usize) -> Self {
        Self { var_names, n_parties, degrees: None, terms: BTreeMap::new() }
    }

    /// Fixes the per-party degrees up front (needed when they cannot be
    /// inferred, e.g. for an empty accumulation).
    pub fn with_degrees(mut self, degrees: Vec<usize>) -> Self {
        self.degrees = Some(degrees);
        self
    }

    pub fn add(&mut self, coeff: C64, words: Vec<Word>) -> Result<()> {
        if words.len() != self.n_parties {
            return Err(Error::Homogeneity(format!(
                "term has {} party words, polynomial has {} parties",
                words.len(),
                self.n_parties
            )));
        }
        let n_vars = self.var_names.len();
        if let Some(bad) = words.iter().flat_map(|w| w.letters()).find(|&&l| l as usize >= n_vars) {
            return Err(Error::Invalid(format!("letter {bad} out of range for {n_vars} variables")));
        }
        let lens: Vec<usize> = words.iter().map(Word::len).collect();
        match &self.degrees {
            None => self.degrees = Some(lens),
            Some(d) if *d != lens => {
                return Err(Error::Homogeneity(format!("term degrees {lens:?} differ from {d:?}")));
            }
            Some(_) => {}
        }
        if !(coeff.re.is_finite() && coeff.im.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        *self.terms.entry(words).or_insert(C64::new(0.0, 0.0)) += coeff;
        Ok(())
    }

    /// Finishes; an all-zero result is an error (normalized form has terms).
    pub fn finish(self) -> Result<TensorPoly> {
        let p = self.finish_allow_zero()?;
        if p.terms.is_empty() {
            return Err(Error::ZeroPolynomial("no nonzero terms".into()));
        }
        Ok(p)
    }

    pub fn finish_allow_zero(self) -> Result<TensorPoly> {
        let degrees = self.degrees.ok_or_else(|| Error::ZeroPolynomial("no terms and no declared degrees".into()))?;
        let terms = self.terms.into_iter().filter(|(_, c)| *c != C64::new(0.0, 0.0)).collect();
        Ok(TensorPoly { var_names: self.var_names, degrees, terms })
    }
}

pub fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl TensorPoly {
    pub fn builder(var_names: Vec<String>, n_parties: usize) -> PolyBuilder {
        PolyBuilder::new(var_names, n_parties)
    }

    pub fn from_terms(
        var_names: Vec<String>,
        n_parties: usize,
        terms: impl IntoIterator<Item = (C64, Vec<Word>)>,
    ) -> Result<Self> {
        let mut b = PolyBuilder::new(var_names, n_parties);
        for (c, w) in terms {
            b.add(c, w)?;
        }
        b.finish()
    }

    /// Single-party polynomial from (coefficient, word) pairs.
    pub fn single(var_names: Vec<String>, terms: impl IntoIterator<Item = (C64, Word)>) -> Result<Self> {
        Self::from_terms(var_names, 1, terms.into_iter().map(|(c, w)| (c, vec![w])))
    }

    /// Single-party polynomial from word strings, e.g. `[(1.0, "WV"), (-1.0, "VW")]`.
    pub fn from_strs(var_names: &[&str], terms: &[(f64, &str)]) -> Result<Self> {
        let n = names(var_names);
        let parsed: Result<Vec<(C64, Word)>> =
            terms.iter().map(|(c, s)| Ok((C64::new(*c, 0.0), Word::parse(s, &n)?))).collect();
        Self::single(n, parsed?)
    }

    pub fn monomial(var_names: Vec<String>, words: Vec<Word>, coeff: C64) -> Result<Self> {
        let n = words.len();
        Self::from_terms(var_names, n, [(coeff, words)])
    }

    /// The constant 1 on `n_parties` parties (all degrees zero).
    pub fn one(var_names: Vec<String>, n_parties: usize) -> Self {
        Self::monomial(var_names, vec![Word::empty(); n_parties], C64::new(1.0, 0.0)).expect("valid monomial")
    }

    pub fn n_parties(&self) -> usize {
        self.degrees.len()
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Word>, &C64)> {
        self.terms.iter()
    }

    pub fn term_list(&self) -> Vec<TensorTerm> {
        self.terms.iter().map(|(w, c)| TensorTerm { coeff: *c, words: w.clone() }).collect()
    }

    pub fn coefficient(&self, words: &[Word]) -> C64 {
        self.terms.get(words).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Σ |g|², the squared norm of the coefficient vector.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn rebuild(&self, degrees: Vec<usize>, terms: impl IntoIterator<Item = (C64, Vec<Word>)>) -> Result<Self> {
        let mut b = PolyBuilder::new(self.var_names.clone(), self.n_parties()).with_degrees(degrees);
        for (c, w) in terms {
            b.add(c, w)?;
        }
        b.finish_allow_zero()
    }

    pub fn scale(&self, s: C64) -> Self {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), c * s)).filter(|(_, c)| *c != C64::new(0.0, 0.0));
        Self { var_names: self.var_names.clone(), degrees: self.degrees.clone(), terms: terms.collect() }
    }

    /// Rescales so the coefficient vector has unit Euclidean norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.coefficient_norm_sq().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroPolynomial("cannot normalize".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.var_names != other.var_names {
            return Err(Error::Invalid(format!(
                "variable alphabets differ: {:?} vs {:?}",
                self.var_names, other.var_names
            )));
        }
        if self.n_parties() != other.n_parties() {
            return Err(Error::Invalid(format!("party counts differ: {} vs {}", self.n_parties(), other.n_parties())));
        }
        Ok(())
    }

    /// Sum of two polynomials of equal degrees. May be zero.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degrees != other.degrees && !self.is_zero() && !other.is_zero() {
            return Err(Error::Homogeneity(format!("cannot add degrees {:?} and {:?}", self.degrees, other.degrees)));
        }
        let degrees = if self.is_zero() { other.degrees.clone() } else { self.degrees.clone() };
        let all = self.terms.iter().chain(other.terms.iter()).map(|(w, c)| (*c, w.clone()));
        self.rebuild(degrees, all)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Expanded product; per-party words concatenate (self on the left).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let degrees = self.degrees.iter().zip(&other.degrees).map(|(a, b)| a + b).collect();
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let words = wa.iter().zip(wb).map(|(x, y)| x.concat(y)).collect();
                terms.push((ca * cb, words));
            }
        }
        self.rebuild(degrees, terms)
    }

    pub fn pow(&self, k: usize) -> Result<Self> {
        let mut acc = Self::one(self.var_names.clone(), self.n_parties());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Tensor product: parties of `self` followed by parties of `other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.var_names != other.var_names {
            return Err(Error::Invalid("variable alphabets differ".into()));
        }
        let degrees = self.degrees.iter().chain(&other.degrees).copied().collect();
        let mut b =
            PolyBuilder::new(self.var_names.clone(), self.n_parties() + other.n_parties()).with_degrees(degrees);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                b.add(ca * cb, wa.iter().chain(wb).cloned().collect())?;
            }
        }
        b.finish_allow_zero()
    }

    /// Replaces every occurrence of `var` (in every party) by `replacement`.
    pub fn substitute(&self, var: Letter, replacement: &Word) -> Result<Self> {
        if replacement.is_empty() {
            return Err(Error::Invalid("replacement word must be nonempty".into()));
        }
        if var as usize >= self.n_vars() {
            return Err(Error::Invalid(format!("variable {var} out of range")));
        }
        let mut b = PolyBuilder::new(self.var_names.clone(), self.n_parties());
        for (words, c) in &self.terms {
            let new_words = words
                .iter()
                .map(|w| {
                    let mut out = Vec::with_capacity(w.len() + replacement.len());
                    for &l in w.letters() {
                        if l == var {
                            out.extend_from_slice(replacement.letters());
                        } else {
                            out.push(l);
                        }
                    }
                    Word(out)
                })
                .collect();
            b.add(*c, new_words)?;
        }
        b.finish()
    }

    /// Removes `count` trailing copies of `letter` from every (single-party)
    /// word, so that `self = result · X_letter^count`.
    pub fn strip_suffix(&self, letter: Letter, count: usize) -> Result<Self> {
        if self.n_parties() != 1 {
            return Err(Error::Invalid("strip_suffix needs a single-party polynomial".into()));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (words, c) in &self.terms {
            let w = &words[0];
            if !w.ends_with(letter, count) {
                return Err(Error::MissingSuffix(format!(
                    "term {:+.6}{:+.6}i·{} does not end with {}^{count}",
                    c.re,
                    c.im,
                    w.display(&self.var_names),
                    self.var_names[letter as usize]
                )));
            }
            terms.push((*c, vec![Word(w.letters()[..w.len() - count].to_vec())]));
        }
        self.rebuild(vec![self.degrees[0] - count], terms)
    }

    /// Right-multiplies party `party`'s words by `suffix`.
    pub fn append_word(&self, party: usize, suffix: &Word) -> Result<Self> {
        let mut degrees = self.degrees.clone();
        degrees[party] += suffix.len();
        let terms = self.terms.iter().map(|(w, c)| {
            let mut w = w.clone();
            w[party] = w[party].concat(suffix);
            (*c, w)
        });
        self.rebuild(degrees, terms)
    }

    /// Left-multiplies party `party`'s words by `prefix`.
    pub fn prepend_word(&self, party: usize, prefix: &Word) -> Result<Self> {
        let mut degrees = self.degrees.clone();
        degrees[party] += prefix.len();
        let terms = self.terms.iter().map(|(w, c)| {
            let mut w = w.clone();
            w[party] = prefix.concat(&w[party]);
            (*c, w)
        });
        self.rebuild(degrees, terms)
    }

    /// Reverses every word (product order ↔ chronological order).
    pub fn reverse_words(&self) -> Self {
        let terms = self.terms.iter().map(|(w, c)| (w.iter().map(Word::reversed).collect(), *c)).collect();
        Self { var_names: self.var_names.clone(), degrees: self.degrees.clone(), terms }
    }

    /// Re-expresses the polynomial over a larger alphabet, matching by name.
    pub fn with_alphabet(&self, var_names: &[String]) -> Result<Self> {
        let map: Result<Vec<Letter>> = self
            .var_names
            .iter()
            .map(|n| {
                var_names
                    .iter()
                    .position(|m| m == n)
                    .map(|i| i as Letter)
                    .ok_or_else(|| Error::Invalid(format!("variable {n} missing from target alphabet")))
            })
            .collect();
        let map = map?;
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| {
                (w.iter().map(|x| Word(x.letters().iter().map(|&l| map[l as usize]).collect())).collect(), *c)
            })
            .collect();
        Ok(Self { var_names: var_names.to_vec(), degrees: self.degrees.clone(), terms })
    }

    /// Maps variable i to `map[i]` in a new alphabet, merging terms that
    /// become equal (e.g. identifying W₁ = W₂ = W).
    pub fn relabel(&self, map: &[Letter], var_names: Vec<String>) -> Result<Self> {
        if map.len() != self.n_vars() || map.iter().any(|&l| l as usize >= var_names.len()) {
            return Err(Error::Invalid("relabel map does not fit the alphabets".into()));
        }
        let mut b = PolyBuilder::new(var_names, self.n_parties()).with_degrees(self.degrees.clone());
        for (w, c) in &self.terms {
            b.add(*c, w.iter().map(|x| Word(x.letters().iter().map(|&l| map[l as usize]).collect())).collect())?;
        }
        b.finish_allow_zero()
    }

    /// Renames variables without changing indices.
    pub fn renamed(&self, var_names: Vec<String>) -> Result<Self> {
        if var_names.len() != self.n_vars() {
            return Err(Error::Invalid("rename must keep the variable count".into()));
        }
        Ok(Self { var_names, degrees: self.degrees.clone(), terms: self.terms.clone() })
    }

    pub fn column_profile(&self) -> ColumnProfile {
        let mut prof: ColumnProfile = self.degrees.iter().map(|&m| vec![BTreeSet::new(); m]).collect();
        for words in self.terms.keys() {
            for (k, w) in words.iter().enumerate() {
                for (i, &l) in w.letters().iter().enumerate() {
                    prof[k][i].insert(l);
                }
            }
        }
        prof
    }

    /// How often each variable occurs in each term, if that is the same for
    /// every term (per-variable homogeneity), summed over parties.
    pub fn letter_counts(&self) -> Option<Vec<usize>> {
        let mut first: Option<Vec<usize>> = None;
        for words in self.terms.keys() {
            let mut counts = vec![0; self.n_vars()];
            for w in words {
                for &l in w.letters() {
                    counts[l as usize] += 1;
                }
            }
            match &first {
                None => first = Some(counts),
                Some(f) if *f != counts => return None,
                Some(_) => {}
            }
        }
        first
    }

    /// Variables that occur exactly once in every term.
    pub fn linear_vars(&self) -> Vec<Letter> {
        match self.letter_counts() {
            Some(c) => (0..self.n_vars()).filter(|&i| c[i] == 1).map(|i| i as Letter).collect(),
            None => Vec::new(),
        }
    }

    fn check_assignment(&self, assignment: &[ComplexMatrix]) -> Result<usize> {
        if assignment.len() != self.n_vars() {
            return Err(Error::Shape(format!(
                "assignment has {} matrices, polynomial has {} variables",
                assignment.len(),
                self.n_vars()
            )));
        }
        let d = assignment.first().map_or(1, |m| m.rows());
        if assignment.iter().any(|m| m.rows() != d || m.cols() != d) {
            return Err(Error::Shape("assignment matrices must all be d×d with one d".into()));
        }
        Ok(d)
    }

    /// Σ coeff·(∏ letters)⊗…; the result is dⁿ×dⁿ.
    pub fn evaluate(&self, assignment: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let d = self.check_assignment(assignment)?;
        Ok(eval_terms::<ComplexMatrix>(self, assignment, d))
    }

    /// Double-double evaluation, rounded to a scale-tracked matrix.
    pub fn evaluate_extended(&self, assignment: &[ComplexMatrix]) -> Result<ScaledMatrix> {
        let d = self.check_assignment(assignment)?;
        Ok(eval_terms::<ExtendedMatrix>(self, &inputs_extended(assignment), d).to_scaled())
    }

    /// Evaluates with generic matrix arithmetic; inputs already converted.
    pub(crate) fn evaluate_alg<A: MatAlg>(&self, inputs: &[A]) -> A {
        let d = inputs.first().map_or(1, |m| m.dim());
        eval_terms(self, inputs, d)
    }
}

/// Products of every distinct word in `words`, sharing common prefixes.
fn word_products<'a, A: MatAlg>(words: impl Iterator<Item = &'a Word>, inputs: &[A], d: usize) -> HashMap<&'a Word, A> {
    let sorted: BTreeSet<&Word> = words.collect();
    let mut out = HashMap::with_capacity(sorted.len());
    let mut stack: Vec<A> = vec![A::identity(d)];
    let mut prev: &[Letter] = &[];
    for w in sorted {
        let l = w.letters();
        let common = prev.iter().zip(l).take_while(|(a, b)| a == b).count();
        stack.truncate(common + 1);
        for &x in &l[common..] {
            let next = stack.last().expect("nonempty stack").mul(&inputs[x as usize]);
            stack.push(next);
        }
        out.insert(w, stack[l.len()].clone());
        prev = l;
    }
    out
}

fn eval_terms<A: MatAlg>(p: &TensorPoly, inputs: &[A], d: usize) -> A {
    let n = p.n_parties();
    let tables: Vec<HashMap<&Word, A>> =
        (0..n).map(|k| word_products(p.terms.keys().map(|w| &w[k]), inputs, d)).collect();
    let terms: Vec<(&Vec<Word>, C64)> = p.terms.iter().map(|(w, c)| (w, *c)).collect();
    eval_grouped(&terms, 0, &tables, d)
}

/// Sums terms sharing a leading word before taking Kronecker products, so a
/// two-party polynomial costs one kron per distinct first-party word.
fn eval_grouped<A: MatAlg>(terms: &[(&Vec<Word>, C64)], party: usize, tables: &[HashMap<&Word, A>], d: usize) -> A {
    let remaining = tables.len() - party;
    let dim = d.pow(remaining as u32);
    let mut acc = A::zeros(dim);
    if remaining == 1 {
        for (w, c) in terms {
            acc.add_assign(&tables[party][&w[party]].scaled(*c));
        }
        return acc;
    }
    // Terms are sorted by word tuple, so equal leading words are contiguous
    // when party == 0. Deeper parties are grouped explicitly.
    let mut groups: Vec<(&Word, Vec<(&Vec<Word>, C64)>)> = Vec::new();
    let mut index: HashMap<&Word, usize> = HashMap::new();
    for (w, c) in terms {
        let key = &w[party];
        let i = *index.entry(key).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push((w, *c));
    }
    for (key, group) in groups {
        let inner = eval_grouped(&group, party + 1, tables, d);
        acc.add_assign(&tables[party][key].kron(&inner));
    }
    acc
}

fn inputs_extended(assignment: &[ComplexMatrix]) -> Vec<ExtendedMatrix> {
    assignment.iter().map(ExtendedMatrix::from_matrix).collect()
}
