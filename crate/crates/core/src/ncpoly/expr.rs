use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::alg::{ExtendedMatrix, MatAlg, ScaledMatrix};
use super::poly::{ColumnProfile, PolyBuilder, TensorPoly};
use super::word::{Letter, Word};
use crate::error::{Error, Result};
use crate::numkit::{permutation_operator, ComplexMatrix};

/// Default term-count guard for [`PolyExpr::expand`].
pub const EXPAND_LIMIT: usize = 1_000_000;

/// Lazy composition tree over tensor polynomials. Cloning is cheap (shared
/// nodes), and shared subtrees are evaluated once per evaluation call.
#[derive(Clone)]
pub struct PolyExpr(Arc<Node>);

pub(crate) struct Node {
    pub(crate) kind: Kind,
    var_names: Arc<Vec<String>>,
    degrees: Vec<usize>,
}

pub(crate) enum Kind {
    Leaf(TensorPoly),
    Product(Vec<PolyExpr>),
    /// Child party i sits on party `targets[i]`; other parties get `filler`
    /// (identity when absent).
    Embed {
        child: PolyExpr,
        n_total: usize,
        targets: Vec<usize>,
        filler: Option<TensorPoly>,
    },
    /// Single-party `outer` with variable i replaced by `args[i]`.
    Substitute {
        outer: TensorPoly,
        args: Vec<PolyExpr>,
    },
    Scalar {
        c: C64,
        child: PolyExpr,
    },
    Sum(Vec<PolyExpr>),
}

impl std::fmt::Debug for PolyExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PolyExpr({}, degrees {:?})", self.kind_name(), self.degrees())
    }
}

impl From<TensorPoly> for PolyExpr {
    fn from(p: TensorPoly) -> Self {
        PolyExpr::leaf(p)
    }
}

impl From<&TensorPoly> for PolyExpr {
    fn from(p: &TensorPoly) -> Self {
        PolyExpr::leaf(p.clone())
    }
}

impl PolyExpr {
    fn make(kind: Kind, var_names: Arc<Vec<String>>, degrees: Vec<usize>) -> Self {
        PolyExpr(Arc::new(Node { kind, var_names, degrees }))
    }

    pub fn leaf(p: TensorPoly) -> Self {
        let names = Arc::new(p.var_names().to_vec());
        let degrees = p.degrees().to_vec();
        Self::make(Kind::Leaf(p), names, degrees)
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind() {
            Kind::Leaf(_) => "leaf",
            Kind::Product(_) => "product",
            Kind::Embed { .. } => "tensor_embed",
            Kind::Substitute { .. } => "substitute",
            Kind::Scalar { .. } => "scalar",
            Kind::Sum(_) => "sum",
        }
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0.degrees
    }

    pub fn n_parties(&self) -> usize {
        self.0.degrees.len()
    }

    pub fn n_vars(&self) -> usize {
        self.0.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.0.var_names
    }

    /// The leaf polynomial, if this node is a leaf.
    pub fn as_leaf(&self) -> Option<&TensorPoly> {
        match self.kind() {
            Kind::Leaf(p) => Some(p),
            _ => None,
        }
    }

    fn check_same(parts: &[PolyExpr]) -> Result<()> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty operand list".into()))?;
        for p in &parts[1..] {
            if p.var_names() != first.var_names() {
                return Err(Error::Invalid(format!(
                    "variable alphabets differ: {:?} vs {:?}",
                    first.var_names(),
                    p.var_names()
                )));
            }
            if p.n_parties() != first.n_parties() {
                return Err(Error::Invalid(format!("party counts differ: {} vs {}", first.n_parties(), p.n_parties())));
            }
        }
        Ok(())
    }

    /// Product in the given (left-to-right) order; degrees add per party.
    pub fn product(factors: Vec<PolyExpr>) -> Result<Self> {
        Self::check_same(&factors)?;
        if factors.len() == 1 {
            return Ok(factors.into_iter().next().expect("one factor"));
        }
        let n = factors[0].n_parties();
        let degrees = (0..n).map(|k| factors.iter().map(|f| f.degrees()[k]).sum()).collect();
        let names = factors[0].0.var_names.clone();
        Ok(Self::make(Kind::Product(factors), names, degrees))
    }

    pub fn sum(parts: Vec<PolyExpr>) -> Result<Self> {
        Self::check_same(&parts)?;
        let degrees = parts[0].degrees().to_vec();
        if let Some(p) = parts.iter().find(|p| p.degrees() != degrees.as_slice()) {
            return Err(Error::Homogeneity(format!("sum of degrees {:?} and {:?}", degrees, p.degrees())));
        }
        let names = parts[0].0.var_names.clone();
        Ok(Self::make(Kind::Sum(parts), names, degrees))
    }

    pub fn scalar(c: C64, child: PolyExpr) -> Self {
        let names = child.0.var_names.clone();
        let degrees = child.degrees().to_vec();
        Self::make(Kind::Scalar { c, child }, names, degrees)
    }

    /// Places `child` on `targets` (child party i → party targets[i]) of an
    /// `n_total`-party system; other parties carry `filler` or identity.
    pub fn tensor_embed(
        child: PolyExpr,
        n_total: usize,
        targets: &[usize],
        filler: Option<TensorPoly>,
    ) -> Result<Self> {
        if targets.len() != child.n_parties() {
            return Err(Error::Invalid(format!("{} targets for a {}-party child", targets.len(), child.n_parties())));
        }
        let mut seen = vec![false; n_total];
        for &t in targets {
            if t >= n_total || seen[t] {
                return Err(Error::Invalid(format!("bad target list {targets:?} for {n_total} parties")));
            }
            seen[t] = true;
        }
        let filler_degree = match &filler {
            None => 0,
            Some(f) => {
                if f.n_parties() != 1 {
                    return Err(Error::Invalid("filler must be single-party".into()));
                }
                if f.var_names() != child.var_names() {
                    return Err(Error::Invalid("filler alphabet differs from child".into()));
                }
                f.degrees()[0]
            }
        };
        let mut degrees = vec![filler_degree; n_total];
        for (i, &t) in targets.iter().enumerate() {
            degrees[t] = child.degrees()[i];
        }
        let names = child.0.var_names.clone();
        Ok(Self::make(Kind::Embed { child, n_total, targets: targets.to_vec(), filler }, names, degrees))
    }

    /// Composition: `outer` (single-party) with variable i replaced by
    /// `args[i]`. Every outer word must give the same per-party degree.
    pub fn compose(outer: TensorPoly, args: Vec<PolyExpr>) -> Result<Self> {
        if outer.n_parties() != 1 {
            return Err(Error::Invalid("outer polynomial of a composition must be single-party".into()));
        }
        if args.len() != outer.n_vars() {
            return Err(Error::Invalid(format!("{} arguments for {} outer variables", args.len(), outer.n_vars())));
        }
        Self::check_same(&args)?;
        let n = args[0].n_parties();
        let mut degrees: Option<Vec<usize>> = None;
        for (words, _) in outer.terms() {
            let mut dg = vec![0usize; n];
            for &l in words[0].letters() {
                for (k, x) in args[l as usize].degrees().iter().enumerate() {
                    dg[k] += x;
                }
            }
            match &degrees {
                None => degrees = Some(dg),
                Some(d) if *d != dg => {
                    return Err(Error::Homogeneity(format!(
                        "outer word {} gives degrees {:?}, expected {:?}",
                        words[0].display(outer.var_names()),
                        dg,
                        d
                    )));
                }
                Some(_) => {}
            }
        }
        let degrees = degrees.ok_or_else(|| Error::ZeroPolynomial("outer polynomial has no terms".into()))?;
        let names = args[0].0.var_names.clone();
        Ok(Self::make(Kind::Substitute { outer, args }, names, degrees))
    }

    /// Replaces one variable of a single-party or multi-party leaf by an
    /// expression; other variables stay as themselves. Only single-party
    /// `p` is supported, as for [`PolyExpr::compose`].
    pub fn substitute_var(p: &TensorPoly, var: Letter, replacement: PolyExpr) -> Result<Self> {
        let names = p.var_names().to_vec();
        if replacement.var_names() != names.as_slice() {
            return Err(Error::Invalid("replacement must use the polynomial's alphabet".into()));
        }
        let args = (0..p.n_vars())
            .map(|i| {
                if i == var as usize {
                    Ok(replacement.clone())
                } else {
                    Ok(PolyExpr::leaf(TensorPoly::monomial(
                        names.clone(),
                        vec![Word::letter(i as Letter)],
                        C64::new(1.0, 0.0),
                    )?))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::compose(p.clone(), args)
    }

    fn check_assignment(&self, assignment: &[ComplexMatrix]) -> Result<usize> {
        if assignment.len() != self.n_vars() {
            return Err(Error::Shape(format!(
                "assignment has {} matrices, expression has {} variables",
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

    /// Bottom-up evaluation without expansion.
    pub fn evaluate(&self, assignment: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let d = self.check_assignment(assignment)?;
        Ok(self.eval_with::<ComplexMatrix>(assignment, d))
    }

    /// Evaluation with a separately tracked binary exponent; use for deep
    /// compositions whose entries leave the f64 range.
    pub fn evaluate_scaled(&self, assignment: &[ComplexMatrix]) -> Result<ScaledMatrix> {
        let d = self.check_assignment(assignment)?;
        Ok(self.eval_with::<ScaledMatrix>(assignment, d))
    }

    /// Double-double evaluation, rounded at the end. Roughly an order of
    /// magnitude slower; for draws where f64 cancellation swamps the value.
    pub fn evaluate_extended(&self, assignment: &[ComplexMatrix]) -> Result<ScaledMatrix> {
        let d = self.check_assignment(assignment)?;
        Ok(self.eval_with::<ExtendedMatrix>(assignment, d).to_scaled())
    }

    fn eval_with<A: MatAlg>(&self, assignment: &[ComplexMatrix], d: usize) -> A {
        let inputs: Vec<A> = assignment.iter().map(A::from_matrix).collect();
        let mut memo = HashMap::new();
        self.eval_node(&inputs, d, &mut memo)
    }

    fn eval_node<A: MatAlg>(&self, inputs: &[A], d: usize, memo: &mut HashMap<usize, A>) -> A {
        if let Some(v) = memo.get(&self.id()) {
            return v.clone();
        }
        let out = match self.kind() {
            Kind::Leaf(p) => p.evaluate_alg(inputs),
            Kind::Product(fs) => {
                let mut acc = fs[0].eval_node(inputs, d, memo);
                for f in &fs[1..] {
                    acc = acc.mul(&f.eval_node(inputs, d, memo));
                }
                acc
            }
            Kind::Sum(ps) => {
                let mut acc = ps[0].eval_node(inputs, d, memo);
                for p in &ps[1..] {
                    acc.add_assign(&p.eval_node(inputs, d, memo));
                }
                acc
            }
            Kind::Scalar { c, child } => child.eval_node(inputs, d, memo).scaled(*c),
            Kind::Substitute { outer, args } => {
                let vals: Vec<A> = args.iter().map(|a| a.eval_node(inputs, d, memo)).collect();
                outer.evaluate_alg(&vals)
            }
            Kind::Embed { child, n_total, targets, filler } => {
                let c = child.eval_node(inputs, d, memo);
                let f = match filler {
                    Some(f) => f.evaluate_alg(inputs),
                    None => A::identity(d),
                };
                let mut full = c;
                for _ in targets.len()..*n_total {
                    full = full.kron(&f);
                }
                let mut order: Vec<usize> = targets.clone();
                order.extend((0..*n_total).filter(|k| !targets.contains(k)));
                if order.iter().enumerate().all(|(i, &k)| i == k) {
                    full
                } else {
                    let p = permutation_operator(*n_total, d, &order).expect("valid party map");
                    let pa = A::from_matrix(&p);
                    let pt = A::from_matrix(&p.transpose());
                    pa.mul(&full).mul(&pt)
                }
            }
        };
        memo.insert(self.id(), out.clone());
        out
    }

    /// Per-party, per-position letter sets. Computed structurally, so it can
    /// over-approximate when expansion would cancel terms.
    pub fn column_profile(&self) -> ColumnProfile {
        let mut memo = HashMap::new();
        self.profile_node(&mut memo)
    }

    fn profile_node(&self, memo: &mut HashMap<usize, ColumnProfile>) -> ColumnProfile {
        if let Some(p) = memo.get(&self.id()) {
            return p.clone();
        }
        let out: ColumnProfile = match self.kind() {
            Kind::Leaf(p) => p.column_profile(),
            Kind::Product(fs) => {
                let parts: Vec<ColumnProfile> = fs.iter().map(|f| f.profile_node(memo)).collect();
                (0..self.n_parties()).map(|k| parts.iter().flat_map(|p| p[k].iter().cloned()).collect()).collect()
            }
            Kind::Sum(ps) => {
                let parts: Vec<ColumnProfile> = ps.iter().map(|f| f.profile_node(memo)).collect();
                union_profiles(&parts)
            }
            Kind::Scalar { child, .. } => child.profile_node(memo),
            Kind::Substitute { outer, args } => {
                let arg_prof: Vec<ColumnProfile> = args.iter().map(|a| a.profile_node(memo)).collect();
                let per_word: Vec<ColumnProfile> = outer
                    .terms()
                    .map(|(w, _)| {
                        (0..self.n_parties())
                            .map(|k| {
                                w[0].letters().iter().flat_map(|&l| arg_prof[l as usize][k].iter().cloned()).collect()
                            })
                            .collect()
                    })
                    .collect();
                union_profiles(&per_word)
            }
            Kind::Embed { child, n_total, targets, filler } => {
                let cp = child.profile_node(memo);
                let fp: Vec<BTreeSet<Letter>> =
                    filler.as_ref().map(|f| f.column_profile().remove(0)).unwrap_or_default();
                let mut out = vec![fp; *n_total];
                for (i, &t) in targets.iter().enumerate() {
                    out[t] = cp[i].clone();
                }
                out
            }
        };
        memo.insert(self.id(), out.clone());
        out
    }

    /// Full expansion into a [`TensorPoly`], refusing if any intermediate
    /// would exceed `limit` terms.
    pub fn expand(&self, limit: usize) -> Result<TensorPoly> {
        let mut memo = HashMap::new();
        self.expand_node(limit, &mut memo)
    }

    fn expand_node(&self, limit: usize, memo: &mut HashMap<usize, TensorPoly>) -> Result<TensorPoly> {
        if let Some(p) = memo.get(&self.id()) {
            return Ok(p.clone());
        }
        let guard = |count: usize| -> Result<()> {
            if count > limit {
                Err(Error::Guard(format!("expansion would reach {count} terms (limit {limit})")))
            } else {
                Ok(())
            }
        };
        let out = match self.kind() {
            Kind::Leaf(p) => p.clone(),
            Kind::Product(fs) => {
                let mut acc = fs[0].expand_node(limit, memo)?;
                for f in &fs[1..] {
                    let b = f.expand_node(limit, memo)?;
                    guard(acc.term_count().saturating_mul(b.term_count()))?;
                    acc = acc.mul(&b)?;
                }
                acc
            }
            Kind::Sum(ps) => {
                let mut acc = ps[0].expand_node(limit, memo)?;
                for p in &ps[1..] {
                    acc = acc.add(&p.expand_node(limit, memo)?)?;
                }
                acc
            }
            Kind::Scalar { c, child } => child.expand_node(limit, memo)?.scale(*c),
            Kind::Substitute { outer, args } => {
                let vals: Vec<TensorPoly> = args.iter().map(|a| a.expand_node(limit, memo)).collect::<Result<_>>()?;
                let names = self.var_names().to_vec();
                let mut b = PolyBuilder::new(names.clone(), self.n_parties()).with_degrees(self.degrees().to_vec());
                let mut total = 0usize;
                for (w, c) in outer.terms() {
                    let mut acc = TensorPoly::one(names.clone(), self.n_parties()).scale(*c);
                    for &l in w[0].letters() {
                        let v = &vals[l as usize];
                        guard(acc.term_count().saturating_mul(v.term_count()))?;
                        acc = acc.mul(v)?;
                    }
                    total += acc.term_count();
                    guard(total)?;
                    for (ws, cc) in acc.terms() {
                        b.add(*cc, ws.clone())?;
                    }
                }
                b.finish_allow_zero()?
            }
            Kind::Embed { child, n_total, targets, filler } => {
                let c = child.expand_node(limit, memo)?;
                let names = self.var_names().to_vec();
                let f = filler.clone().unwrap_or_else(|| TensorPoly::one(names.clone(), 1));
                let others: Vec<usize> = (0..*n_total).filter(|k| !targets.contains(k)).collect();
                let count = c.term_count().saturating_mul(f.term_count().saturating_pow(others.len() as u32));
                guard(count)?;
                // Build in [targets..., others...] order, then place.
                let mut acc = c;
                for _ in &others {
                    acc = acc.tensor(&f)?;
                }
                let mut order: Vec<usize> = targets.clone();
                order.extend(others);
                let mut b = PolyBuilder::new(names, *n_total).with_degrees(self.degrees().to_vec());
                for (ws, cc) in acc.terms() {
                    let mut placed = vec![Word::empty(); *n_total];
                    for (i, w) in ws.iter().enumerate() {
                        placed[order[i]] = w.clone();
                    }
                    b.add(*cc, placed)?;
                }
                b.finish_allow_zero()?
            }
        };
        memo.insert(self.id(), out.clone());
        Ok(out)
    }

    /// Re-expresses every leaf and filler over `var_names` (a superset of
    /// the current alphabet, matched by name). Outer polynomials of
    /// compositions keep their own alphabets.
    pub fn with_alphabet(&self, var_names: &[String]) -> Result<Self> {
        if var_names == self.var_names() {
            return Ok(self.clone());
        }
        let mut memo = HashMap::new();
        self.realias(var_names, &mut memo)
    }

    fn realias(&self, names: &[String], memo: &mut HashMap<usize, PolyExpr>) -> Result<Self> {
        if let Some(e) = memo.get(&self.id()) {
            return Ok(e.clone());
        }
        let out = match self.kind() {
            Kind::Leaf(p) => PolyExpr::leaf(p.with_alphabet(names)?),
            Kind::Product(fs) => PolyExpr::product(fs.iter().map(|f| f.realias(names, memo)).collect::<Result<_>>()?)?,
            Kind::Sum(ps) => PolyExpr::sum(ps.iter().map(|f| f.realias(names, memo)).collect::<Result<_>>()?)?,
            Kind::Scalar { c, child } => PolyExpr::scalar(*c, child.realias(names, memo)?),
            Kind::Embed { child, n_total, targets, filler } => PolyExpr::tensor_embed(
                child.realias(names, memo)?,
                *n_total,
                targets,
                filler.as_ref().map(|f| f.with_alphabet(names)).transpose()?,
            )?,
            Kind::Substitute { outer, args } => {
                PolyExpr::compose(outer.clone(), args.iter().map(|a| a.realias(names, memo)).collect::<Result<_>>()?)?
            }
        };
        memo.insert(self.id(), out.clone());
        Ok(out)
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            stack.extend(e.children());
        }
        seen.len()
    }

    pub(crate) fn children(&self) -> Vec<PolyExpr> {
        match self.kind() {
            Kind::Leaf(_) => vec![],
            Kind::Product(v) | Kind::Sum(v) => v.clone(),
            Kind::Embed { child, .. } | Kind::Scalar { child, .. } => vec![child.clone()],
            Kind::Substitute { args, .. } => args.clone(),
        }
    }
}

fn union_profiles(parts: &[ColumnProfile]) -> ColumnProfile {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        for (ok, pk) in out.iter_mut().zip(p) {
            for (a, b) in ok.iter_mut().zip(pk) {
                a.extend(b.iter().copied());
            }
        }
    }
    out
}

/// Product of two polynomials or expressions; degrees add per party.
pub fn poly_mul(a: impl Into<PolyExpr>, b: impl Into<PolyExpr>) -> Result<PolyExpr> {
    PolyExpr::product(vec![a.into(), b.into()])
}

pub fn tensor_embed(
    p: impl Into<PolyExpr>,
    n_total: usize,
    targets: &[usize],
    filler: Option<TensorPoly>,
) -> Result<PolyExpr> {
    PolyExpr::tensor_embed(p.into(), n_total, targets, filler)
}
