//! Charts, tensor fields and exterior calculus evaluated through jets.
//!
//! Fields are component functions from coordinate jets to component jets.
//! Evaluating a field at seed jets of order `m` gives a [`Tensor`] whose
//! components carry every derivative up to order `m`; differential operators
//! consume one order per derivative.
//!
//! Components are stored row-major over all slots, so a rank-`r` tensor in
//! `n` dimensions has `n^r` entries. Forms are stored as full antisymmetric
//! arrays together with a [`Convention`] flag.

pub mod expr;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetConfig};
use expr::Expr;

/// Smallest admissible |det g| at a sample.
pub const DEGENERACY_FLOOR: f64 = 1e-10;

/// Position of an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Up,
    Down,
}

/// Normalization of form components.
///
/// `Classical` stores ω_{ab..} with ω = (1/k!) ω_{ab..} dx^a⊗dx^b⊗.. summed
/// antisymmetrically, so `dx∧dy` has (x,y) component 1. `Antisymmetrized`
/// uses the raw antisymmetrization convention in which
/// `dx∧dy = ½(dx⊗dy − dy⊗dx)`; its components are the classical ones
/// divided by k!.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    Classical,
    Antisymmetrized,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::Classical => write!(f, "classical (dx∧dy)_xy = 1"),
            Convention::Antisymmetrized => write!(f, "antisymmetrized (dx∧dy)_xy = 1/2"),
        }
    }
}

/// Declared symmetry of a rank-2 (or form) field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Symmetric,
    Antisymmetric(Convention),
}

/// Scalar predicate that must be nonzero at valid samples.
#[derive(Clone)]
pub struct Guard {
    pub name: String,
    pub floor: f64,
    eval: Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>,
}

impl Guard {
    pub fn new<F>(name: &str, floor: f64, eval: F) -> Guard
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Guard {
            name: name.to_string(),
            floor,
            eval: Arc::new(eval),
        }
    }

    pub fn from_expr(name: &str, floor: f64, e: Expr) -> Guard {
        Guard::new(name, floor, move |x| Ok(e.eval_f64(x)?))
    }

    /// True when the guard value exceeds its floor in magnitude.
    pub fn holds(&self, x: &[f64]) -> bool {
        matches!((self.eval)(x), Ok(v) if v.is_finite() && v.abs() > self.floor)
    }
}

impl fmt::Debug for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Guard({}, floor={:e})", self.name, self.floor)
    }
}

/// Coordinate chart with a sampling box and singular-locus guards.
#[derive(Debug, Clone)]
pub struct Chart {
    pub names: Vec<String>,
    pub domain_box: Vec<(f64, f64)>,
    pub guards: Vec<Guard>,
}

impl Chart {
    pub fn new(names: &[&str], domain_box: &[(f64, f64)]) -> Result<Chart> {
        if names.is_empty() || names.len() != domain_box.len() {
            return Err(Error::Invalid(format!(
                "chart with {} names and {} intervals",
                names.len(),
                domain_box.len()
            )));
        }
        for (lo, hi) in domain_box {
            if !(lo < hi) {
                return Err(Error::Invalid(format!("empty interval ({lo}, {hi})")));
            }
        }
        Ok(Chart {
            names: names.iter().map(|s| s.to_string()).collect(),
            domain_box: domain_box.to_vec(),
            guards: Vec::new(),
        })
    }

    pub fn with_guard(mut self, g: Guard) -> Chart {
        self.guards.push(g);
        self
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.domain_box)
                .all(|(v, (lo, hi))| v > lo && v < hi)
    }

    pub fn is_valid(&self, x: &[f64]) -> bool {
        self.contains(x) && self.guards.iter().all(|g| g.holds(x))
    }

    /// Rejection-samples `count` valid points from the box.
    ///
    /// `uniform` must return independent draws from [0, 1). Returns the
    /// points and the number of rejected draws. Fails after
    /// `100 * count` attempts.
    pub fn sample<F: FnMut() -> f64>(
        &self,
        count: usize,
        uniform: &mut F,
    ) -> Result<(Vec<Vec<f64>>, usize)> {
        let max_attempts = 100 * count.max(1);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            if attempts >= max_attempts {
                return Err(Error::GuardExhausted {
                    found: out.len(),
                    wanted: count,
                    attempts,
                });
            }
            attempts += 1;
            let x: Vec<f64> = self
                .domain_box
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * uniform())
                .collect();
            if self.is_valid(&x) {
                out.push(x);
            }
        }
        Ok((out, attempts - count))
    }
}

/// Seeds the coordinates of `x` as independent jet variables.
pub fn seed(x: &[f64], order: usize) -> Result<Vec<Jet>> {
    Ok(Jet::seed_point(x, order)?)
}

/// Evaluates `f` with `extra` more orders than the jets `x` carry.
///
/// `f` is evaluated on fresh seeds at the value of `x`, truncated back to
/// the order of `x`, and composed with `x`. Use this when a field's
/// components involve derivatives of other fields.
pub fn with_extra_order<F>(x: &[Jet], extra: usize, f: F) -> Result<Vec<Jet>>
where
    F: FnOnce(&[Jet]) -> Result<Vec<Jet>>,
{
    let order = x[0].order();
    let pt: Vec<f64> = x.iter().map(Jet::value).collect();
    let local = seed(&pt, order + extra)?;
    f(&local)?
        .iter()
        .map(|c| Ok(c.truncate(order)?.compose(x)?))
        .collect()
}

/// Row-major index of a multi-index.
pub fn flat_index(dim: usize, ix: &[usize]) -> usize {
    ix.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Multi-index of a row-major position.
pub fn multi_index(dim: usize, rank: usize, mut flat: usize) -> Vec<usize> {
    let mut ix = vec![0; rank];
    for s in (0..rank).rev() {
        ix[s] = flat % dim;
        flat /= dim;
    }
    ix
}

/// Sign of the permutation taking `ix` to sorted order, or 0 on repeats.
pub fn permutation_sign(ix: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..ix.len() {
        for j in i + 1..ix.len() {
            if ix[i] == ix[j] {
                return 0.0;
            }
            if ix[i] > ix[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        if cur.len() == used.len() {
            out.push((cur.clone(), permutation_sign(cur)));
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, i| a * i as f64)
}

/// Jet-valued components of a tensor at one point.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub dim: usize,
    pub variance: Vec<Slot>,
    pub comps: Vec<Jet>,
}

impl Tensor {
    pub fn new(dim: usize, variance: Vec<Slot>, comps: Vec<Jet>) -> Result<Tensor> {
        let want = dim.pow(variance.len() as u32);
        if comps.len() != want {
            return Err(Error::Invalid(format!(
                "tensor needs {want} components, got {}",
                comps.len()
            )));
        }
        if let Some(first) = comps.first() {
            let cfg = first.config();
            if comps.iter().any(|c| c.config() != cfg) {
                return Err(Error::Invalid("tensor components disagree in jet config".into()));
            }
        }
        Ok(Tensor {
            dim,
            variance,
            comps,
        })
    }

    pub fn zeros(dim: usize, variance: Vec<Slot>, cfg: JetConfig) -> Tensor {
        let n = dim.pow(variance.len() as u32);
        Tensor {
            dim,
            variance,
            comps: vec![Jet::zero(cfg); n],
        }
    }

    pub fn scalar(j: Jet) -> Tensor {
        Tensor {
            dim: j.dim(),
            variance: Vec::new(),
            comps: vec![j],
        }
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn config(&self) -> JetConfig {
        self.comps[0].config()
    }

    pub fn order(&self) -> usize {
        self.comps[0].order()
    }

    pub fn get(&self, ix: &[usize]) -> &Jet {
        &self.comps[flat_index(self.dim, ix)]
    }

    pub fn set(&mut self, ix: &[usize], j: Jet) {
        let k = flat_index(self.dim, ix);
        self.comps[k] = j;
    }

    /// Component values at the expansion point.
    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    /// Frobenius norm of the component values.
    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c.value().powi(2)).sum::<f64>().sqrt()
    }

    /// Largest coefficient magnitude across all components.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    fn same_shape(&self, o: &Tensor) -> Result<()> {
        if self.dim != o.dim {
            return Err(Error::ChartMismatch {
                expected: self.dim,
                got: o.dim,
            });
        }
        if self.variance != o.variance {
            return Err(Error::Variance(format!(
                "{:?} vs {:?}",
                self.variance, o.variance
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Tensor) -> Result<Tensor> {
        self.same_shape(o)?;
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a.try_add(b))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn sub(&self, o: &Tensor) -> Result<Tensor> {
        self.same_shape(o)?;
        let comps = self
            .comps
            .iter()
            .zip(&o.comps)
            .map(|(a, b)| a.try_sub(b))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|c| c.scale(s))
    }

    pub fn scale_jet(&self, s: &Jet) -> Result<Tensor> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.try_mul(s))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    pub fn map<F: Fn(&Jet) -> Jet>(&self, f: F) -> Tensor {
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> Result<Tensor> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.truncate(order))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    /// Componentwise ∂/∂x_i, one order lower.
    pub fn derivative(&self, i: usize) -> Result<Tensor> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder { need: 1, have: 0 });
        }
        let comps = self
            .comps
            .iter()
            .map(|c| c.derivative(i))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        })
    }

    /// Partial gradient ∂_a T, with the new lower slot first.
    pub fn gradient(&self) -> Result<Tensor> {
        if self.config().dim != self.dim {
            return Err(Error::ChartMismatch {
                expected: self.dim,
                got: self.config().dim,
            });
        }
        let mut comps = Vec::with_capacity(self.comps.len() * self.dim);
        for a in 0..self.dim {
            comps.extend(self.derivative(a)?.comps);
        }
        let mut variance = vec![Slot::Down];
        variance.extend(&self.variance);
        Ok(Tensor {
            dim: self.dim,
            variance,
            comps,
        })
    }

    /// Swaps two slots.
    pub fn transpose(&self, s: usize, t: usize) -> Tensor {
        let r = self.rank();
        let mut comps = self.comps.clone();
        for (k, c) in comps.iter_mut().enumerate() {
            let mut ix = multi_index(self.dim, r, k);
            ix.swap(s, t);
            *c = self.comps[flat_index(self.dim, &ix)].clone();
        }
        let mut variance = self.variance.clone();
        variance.swap(s, t);
        Tensor {
            dim: self.dim,
            variance,
            comps,
        }
    }

    /// Antisymmetrization over all slots, (1/k!)Σ sgn(σ) T_{σ}.
    pub fn alt(&self) -> Tensor {
        let r = self.rank();
        let perms = permutations(r);
        let norm = 1.0 / factorial(r);
        let cfg = self.config();
        let mut comps = Vec::with_capacity(self.comps.len());
        for k in 0..self.comps.len() {
            let ix = multi_index(self.dim, r, k);
            if permutation_sign(&ix) == 0.0 {
                comps.push(Jet::zero(cfg));
                continue;
            }
            let mut acc = Jet::zero(cfg);
            for (p, s) in &perms {
                let jx: Vec<usize> = p.iter().map(|&q| ix[q]).collect();
                acc = &acc + &self.comps[flat_index(self.dim, &jx)].scale(*s);
            }
            comps.push(acc.scale(norm));
        }
        Tensor {
            dim: self.dim,
            variance: self.variance.clone(),
            comps,
        }
    }

    /// Largest defect of antisymmetry under adjacent transpositions.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.rank().saturating_sub(1) {
            let t = self.transpose(s, s + 1);
            for (a, b) in self.comps.iter().zip(&t.comps) {
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    worst = worst.max((x + y).abs());
                }
            }
        }
        worst
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.rank().saturating_sub(1) {
            let t = self.transpose(s, s + 1);
            for (a, b) in self.comps.iter().zip(&t.comps) {
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }

    /// Tensor product.
    pub fn outer(&self, o: &Tensor) -> Result<Tensor> {
        if self.dim != o.dim {
            return Err(Error::ChartMismatch {
                expected: self.dim,
                got: o.dim,
            });
        }
        let mut comps = Vec::with_capacity(self.comps.len() * o.comps.len());
        for a in &self.comps {
            for b in &o.comps {
                comps.push(a.try_mul(b)?);
            }
        }
        let mut variance = self.variance.clone();
        variance.extend(&o.variance);
        Ok(Tensor {
            dim: self.dim,
            variance,
            comps,
        })
    }

    /// Contracts a vector (upper index) into slot `s`, which must be lower.
    pub fn contract_vector(&self, v: &[Jet], s: usize) -> Result<Tensor> {
        if self.variance.get(s) != Some(&Slot::Down) {
            return Err(Error::Variance(format!("slot {s} is not covariant")));
        }
        if v.len() != self.dim {
            return Err(Error::ChartMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let r = self.rank();
        let cfg = self.config();
        let mut variance = self.variance.clone();
        variance.remove(s);
        let n_out = self.dim.pow((r - 1) as u32);
        let mut comps = Vec::with_capacity(n_out);
        for k in 0..n_out {
            let ox = multi_index(self.dim, r - 1, k);
            let mut acc = Jet::zero(cfg);
            for (a, va) in v.iter().enumerate() {
                let mut ix = ox.clone();
                ix.insert(s, a);
                acc = &acc + &(va * self.get(&ix));
            }
            comps.push(acc);
        }
        Ok(Tensor {
            dim: self.dim,
            variance,
            comps,
        })
    }
}

/// Differential form at a point.
#[derive(Debug, Clone)]
pub struct Form {
    pub tensor: Tensor,
    pub convention: Convention,
}

const ANTISYM_TOL: f64 = 1e-12;

impl Form {
    /// Wraps an all-lower tensor, checking antisymmetry.
    pub fn new(tensor: Tensor, convention: Convention) -> Result<Form> {
        if tensor.variance.iter().any(|s| *s != Slot::Down) {
            return Err(Error::Variance("forms must be fully covariant".into()));
        }
        let defect = tensor.antisymmetry_defect();
        if defect > ANTISYM_TOL * (1.0 + tensor.max_abs()) {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(Form { tensor, convention })
    }

    pub fn zero(dim: usize, degree: usize, cfg: JetConfig, convention: Convention) -> Form {
        Form {
            tensor: Tensor::zeros(dim, vec![Slot::Down; degree], cfg),
            convention,
        }
    }

    pub fn scalar(j: Jet) -> Form {
        Form {
            tensor: Tensor::scalar(j),
            convention: Convention::Classical,
        }
    }

    pub fn one_form(comps: Vec<Jet>) -> Result<Form> {
        let dim = comps.len();
        Ok(Form {
            tensor: Tensor::new(dim, vec![Slot::Down], comps)?,
            convention: Convention::Classical,
        })
    }

    /// Builds a 2-form in the given convention from its `(a, b)` components
    /// with `a < b`; the rest is filled antisymmetrically.
    pub fn two_form(
        dim: usize,
        cfg: JetConfig,
        entries: &[((usize, usize), Jet)],
        convention: Convention,
    ) -> Form {
        let mut t = Tensor::zeros(dim, vec![Slot::Down; 2], cfg);
        for ((a, b), j) in entries {
            let cur = t.get(&[*a, *b]).clone();
            t.set(&[*a, *b], &cur + j);
            let cur = t.get(&[*b, *a]).clone();
            t.set(&[*b, *a], &cur - j);
        }
        Form {
            tensor: t,
            convention,
        }
    }

    pub fn degree(&self) -> usize {
        self.tensor.rank()
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    /// Expresses the same form in another convention.
    pub fn to_convention(&self, c: Convention) -> Form {
        let k = factorial(self.degree());
        let scale = match (self.convention, c) {
            (a, b) if a == b => 1.0,
            (Convention::Classical, Convention::Antisymmetrized) => 1.0 / k,
            _ => k,
        };
        Form {
            tensor: self.tensor.scale(scale),
            convention: c,
        }
    }

    pub fn classical(&self) -> Form {
        self.to_convention(Convention::Classical)
    }

    pub fn add(&self, o: &Form) -> Result<Form> {
        let o = o.to_convention(self.convention);
        Ok(Form {
            tensor: self.tensor.add(&o.tensor)?,
            convention: self.convention,
        })
    }

    pub fn sub(&self, o: &Form) -> Result<Form> {
        let o = o.to_convention(self.convention);
        Ok(Form {
            tensor: self.tensor.sub(&o.tensor)?,
            convention: self.convention,
        })
    }

    pub fn scale(&self, s: f64) -> Form {
        Form {
            tensor: self.tensor.scale(s),
            convention: self.convention,
        }
    }

    pub fn scale_jet(&self, s: &Jet) -> Result<Form> {
        Ok(Form {
            tensor: self.tensor.scale_jet(s)?,
            convention: self.convention,
        })
    }

    pub fn truncate(&self, order: usize) -> Result<Form> {
        Ok(Form {
            tensor: self.tensor.truncate(order)?,
            convention: self.convention,
        })
    }

    /// Norm of the component values in the stored convention.
    pub fn norm(&self) -> f64 {
        self.tensor.norm()
    }
}

/// Exterior derivative. The result carries the input's convention.
pub fn d(form: &Form) -> Result<Form> {
    let k = form.degree();
    if form.order() == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let cl = form.classical();
    let n = form.dim();
    let grads: Vec<Tensor> = (0..n)
        .map(|a| cl.tensor.derivative(a))
        .collect::<Result<_>>()?;
    let cfg = grads[0].config();
    let mut out = Tensor::zeros(n, vec![Slot::Down; k + 1], cfg);
    for flat in 0..out.comps.len() {
        let ix = multi_index(n, k + 1, flat);
        if permutation_sign(&ix) == 0.0 {
            continue;
        }
        let mut acc = Jet::zero(cfg);
        for i in 0..=k {
            let mut rest = ix.clone();
            let a = rest.remove(i);
            let term = grads[a].get(&rest);
            acc = if i % 2 == 0 { &acc + term } else { &acc - term };
        }
        out.comps[flat] = acc;
    }
    Ok(Form {
        tensor: out,
        convention: Convention::Classical,
    }
    .to_convention(form.convention))
}

/// Wedge product; the result uses `a`'s convention.
pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    let p = a.degree();
    let q = b.degree();
    let prod = a.classical().tensor.outer(&b.classical().tensor)?;
    let scale = factorial(p + q) / (factorial(p) * factorial(q));
    Ok(Form {
        tensor: prod.alt().scale(scale),
        convention: Convention::Classical,
    }
    .to_convention(a.convention))
}

/// Plain contraction of `v` into the first slot of the stored components.
///
/// Under the antisymmetrized convention this is `1/k` times the interior
/// product; see [`interior_normalized`].
pub fn interior(v: &[Jet], form: &Form) -> Result<Form> {
    if form.degree() == 0 {
        return Err(Error::Invalid("interior product of a 0-form".into()));
    }
    let raw = form.tensor.contract_vector(v, 0)?;
    Ok(Form {
        tensor: raw,
        convention: form.convention,
    })
}

/// Interior product satisfying `v⌟(a∧b) = a(v)b − b(v)a` in either
/// convention.
pub fn interior_normalized(v: &[Jet], form: &Form) -> Result<Form> {
    let cl = form.classical();
    let r = interior(v, &cl)?;
    Ok(r.to_convention(form.convention))
}

/// Inverse and determinant of a square jet matrix by Gaussian elimination.
pub fn jet_inverse(m: &[Jet], n: usize) -> Result<(Vec<Jet>, Jet)> {
    if m.len() != n * n || n == 0 {
        return Err(Error::Invalid("jet_inverse needs an n×n matrix".into()));
    }
    let cfg = m[0].config();
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(if k / n == k % n { 1.0 } else { 0.0 }, cfg))
        .collect();
    let mut det = Jet::constant(1.0, cfg);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[j * n + col].value().abs())
            })
            .unwrap_or(col);
        if a[piv * n + col].value() == 0.0 {
            return Err(Error::Degenerate {
                what: "matrix",
                value: 0.0,
            });
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
                inv.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col].clone();
        det = &det * &p;
        let pinv = p.recip()?;
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &pinv;
            inv[col * n + k] = &inv[col * n + k] * &pinv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.max_abs() == 0.0 {
                continue;
            }
            for k in 0..n {
                a[r * n + k] = &a[r * n + k] - &(&f * &a[col * n + k]);
                inv[r * n + k] = &inv[r * n + k] - &(&f * &inv[col * n + k]);
            }
        }
    }
    Ok((inv, det))
}

/// A metric evaluated at a point, with inverse and volume data.
#[derive(Debug, Clone)]
pub struct MetricAt {
    pub g: Tensor,
    pub inv: Tensor,
    pub det: Jet,
    pub orientation: f64,
}

impl MetricAt {
    pub fn new(g: Tensor, orientation: f64) -> Result<MetricAt> {
        if g.variance != [Slot::Down, Slot::Down] {
            return Err(Error::Variance("metric must be (lower, lower)".into()));
        }
        let defect = g.symmetry_defect();
        if defect > 1e-12 * (1.0 + g.max_abs()) {
            return Err(Error::Invalid(format!("metric not symmetric ({defect:e})")));
        }
        let n = g.dim;
        let (inv, det) = jet_inverse(&g.comps, n)?;
        if !(det.value().abs() >= DEGENERACY_FLOOR) {
            return Err(Error::Degenerate {
                what: "metric determinant",
                value: det.value(),
            });
        }
        let inv = Tensor::new(n, vec![Slot::Up, Slot::Up], inv)?;
        Ok(MetricAt {
            g,
            inv,
            det,
            orientation: if orientation < 0.0 { -1.0 } else { 1.0 },
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim
    }

    pub fn order(&self) -> usize {
        self.g.order()
    }

    pub fn truncate(&self, order: usize) -> Result<MetricAt> {
        Ok(MetricAt {
            g: self.g.truncate(order)?,
            inv: self.inv.truncate(order)?,
            det: self.det.truncate(order)?,
            orientation: self.orientation,
        })
    }

    /// Sign of the determinant.
    pub fn det_sign(&self) -> f64 {
        self.det.value().signum()
    }

    /// Oriented volume density `orientation·√|det g|`.
    pub fn volume(&self) -> Result<Jet> {
        let a = if self.det.value() < 0.0 {
            -&self.det
        } else {
            self.det.clone()
        };
        Ok(a.sqrt()?.scale(self.orientation))
    }

    /// `g_ab v^b`.
    pub fn lower(&self, v: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for a in 0..n {
            let mut acc = Jet::zero(v[0].config());
            for (b, vb) in v.iter().enumerate() {
                acc = acc.try_add(&self.g.get(&[a, b]).try_mul(vb)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `g^ab w_b`.
    pub fn raise(&self, w: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for a in 0..n {
            let mut acc = Jet::zero(w[0].config());
            for (b, wb) in w.iter().enumerate() {
                acc = acc.try_add(&self.inv.get(&[a, b]).try_mul(wb)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `g(u, v)`.
    pub fn inner(&self, u: &[Jet], v: &[Jet]) -> Result<Jet> {
        let lv = self.lower(v)?;
        let mut acc = Jet::zero(u[0].config());
        for (a, b) in u.iter().zip(&lv) {
            acc = acc.try_add(&a.try_mul(b)?)?;
        }
        Ok(acc)
    }

    /// Raises every index of a covariant tensor.
    pub fn raise_all(&self, t: &Tensor) -> Result<Tensor> {
        let n = self.dim();
        let r = t.rank();
        let mut cur = t.clone();
        for s in 0..r {
            let mut next = cur.clone();
            for flat in 0..cur.comps.len() {
                let ix = multi_index(n, r, flat);
                let mut acc = Jet::zero(t.config());
                for b in 0..n {
                    let mut jx = ix.clone();
                    jx[s] = b;
                    acc = &acc + &(self.inv.get(&[ix[s], b]) * cur.get(&jx));
                }
                next.comps[flat] = acc;
            }
            next.variance[s] = Slot::Up;
            cur = next;
        }
        Ok(cur)
    }

    /// Full contraction `T_{a..} S^{a..}` of two covariant tensors.
    pub fn contract_full(&self, t: &Tensor, s: &Tensor) -> Result<Jet> {
        let up = self.raise_all(s)?;
        let mut acc = Jet::zero(t.config());
        for (a, b) in t.comps.iter().zip(&up.comps) {
            acc = acc.try_add(&a.try_mul(b)?)?;
        }
        Ok(acc)
    }
}

/// Hodge star, `(⋆F)_{c..} = (1/k!) F^{a..} ε_{a..c..}` in the classical
/// convention; the result carries the input's convention.
pub fn hodge_star(metric: &MetricAt, form: &Form) -> Result<Form> {
    let n = metric.dim();
    if form.dim() != n {
        return Err(Error::ChartMismatch {
            expected: n,
            got: form.dim(),
        });
    }
    let k = form.degree();
    let order = form.order().min(metric.order());
    let metric = metric.truncate(order)?;
    let cl = form.classical().tensor.truncate(order)?;
    let up = metric.raise_all(&cl)?;
    let vol = metric.volume()?;
    let cfg = vol.config();
    let m = n - k;
    let mut out = Tensor::zeros(n, vec![Slot::Down; m], cfg);
    let norm = 1.0 / factorial(k);
    let upper: Vec<Vec<usize>> = (0..n.pow(k as u32))
        .map(|f| multi_index(n, k, f))
        .filter(|ix| permutation_sign(ix) != 0.0)
        .collect();
    for flat in 0..out.comps.len() {
        let cx = multi_index(n, m, flat);
        if permutation_sign(&cx) == 0.0 {
            continue;
        }
        let mut acc = Jet::zero(cfg);
        for ax in &upper {
            let mut full = ax.clone();
            full.extend(&cx);
            let s = permutation_sign(&full);
            if s != 0.0 {
                acc = &acc + &up.get(ax).scale(s);
            }
        }
        out.comps[flat] = (&acc * &vol).scale(norm);
    }
    Ok(Form {
        tensor: out,
        convention: Convention::Classical,
    }
    .to_convention(form.convention))
}

/// Lie derivative of a tensor of any variance along `v`.
///
/// Both arguments must be jets of the same order `m` in the chart
/// coordinates; the result has order `m − 1`.
pub fn lie_derivative(v: &[Jet], t: &Tensor) -> Result<Tensor> {
    let n = t.dim;
    if v.len() != n {
        return Err(Error::ChartMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let m = t.order().min(v[0].order());
    if m == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let t = t.truncate(m)?;
    let dv: Vec<Vec<Jet>> = (0..n)
        .map(|c| {
            v.iter()
                .map(|va| Ok(va.truncate(m)?.derivative(c)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let vt: Vec<Jet> = v
        .iter()
        .map(|j| j.truncate(m - 1))
        .collect::<std::result::Result<_, _>>()?;
    let grad = t.gradient()?;
    let tt = t.truncate(m - 1)?;
    let r = t.rank();
    let cfg = tt.config();
    let mut out = Tensor::zeros(n, t.variance.clone(), cfg);
    for flat in 0..out.comps.len() {
        let ix = multi_index(n, r, flat);
        let mut acc = Jet::zero(cfg);
        for c in 0..n {
            let mut gx = vec![c];
            gx.extend(&ix);
            acc = &acc + &(&vt[c] * grad.get(&gx));
        }
        for (s, slot) in t.variance.iter().enumerate() {
            for c in 0..n {
                let mut jx = ix.clone();
                jx[s] = c;
                let tc = tt.get(&jx);
                match slot {
                    Slot::Up => acc = &acc - &(tc * &dv[c][ix[s]]),
                    Slot::Down => acc = &acc + &(tc * &dv[ix[s]][c]),
                }
            }
        }
        out.comps[flat] = acc;
    }
    Ok(out)
}

/// Lie derivative of a form, keeping the convention flag.
pub fn lie_derivative_form(v: &[Jet], f: &Form) -> Result<Form> {
    Ok(Form {
        tensor: lie_derivative(v, &f.tensor)?,
        convention: f.convention,
    })
}

/// Lie derivative of connection coefficients `Γ^C_AB` (variance up, down,
/// down) by the affine transformation law. Result order is `m − 2`.
pub fn lie_derivative_connection(v: &[Jet], gamma: &Tensor) -> Result<Tensor> {
    let n = gamma.dim;
    if gamma.variance != [Slot::Up, Slot::Down, Slot::Down] {
        return Err(Error::Variance("connection must be (up, down, down)".into()));
    }
    let m = gamma.order().min(v[0].order());
    if m < 2 {
        return Err(Error::InsufficientOrder { need: 2, have: m });
    }
    let tensorial = lie_derivative(v, &gamma.truncate(m)?)?.truncate(m - 2)?;
    let mut out = tensorial;
    for c in 0..n {
        let vc = v[c].truncate(m)?;
        for a in 0..n {
            let da = vc.derivative(a)?;
            for b in 0..n {
                let dab = da.derivative(b)?;
                let k = flat_index(n, &[c, a, b]);
                out.comps[k] = &out.comps[k] + &dab;
            }
        }
    }
    Ok(out)
}

/// Pulls back a covariant tensor given as jets in the target coordinates.
///
/// `map[a]` are the target coordinates as jets in the source coordinates
/// (order `m`); `t` holds jets in the target coordinates expanded at the
/// image point. The result is in source coordinates with order
/// `min(order(t), m − 1)`.
pub fn pullback_tensor(map: &[Jet], t: &Tensor) -> Result<Tensor> {
    if map.len() != t.dim {
        return Err(Error::ChartMismatch {
            expected: t.dim,
            got: map.len(),
        });
    }
    if t.variance.iter().any(|s| *s != Slot::Down) {
        return Err(Error::Variance("pullback needs a covariant tensor".into()));
    }
    let m = map[0].order();
    if m == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let order = t.order().min(m - 1);
    let composed: Vec<Jet> = t
        .comps
        .iter()
        .map(|c| Ok(c.compose(map)?.truncate(order)?))
        .collect::<Result<_>>()?;
    let src = map[0].dim();
    let jac: Vec<Vec<Jet>> = map
        .iter()
        .map(|f| {
            (0..src)
                .map(|i| Ok(f.derivative(i)?.truncate(order)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    pull_with_jacobian(&composed, t.dim, t.rank(), src, &jac)
}

/// Pulls back a covariant field evaluated directly at the map jets.
///
/// Use when the field can be evaluated on arbitrary jets (no derivatives in
/// target coordinates are needed). Result order is `m − 1`.
pub fn pullback_field(map: &[Jet], field: &TensorField) -> Result<Tensor> {
    let t = field.at(map)?;
    if t.variance.iter().any(|s| *s != Slot::Down) {
        return Err(Error::Variance("pullback needs a covariant tensor".into()));
    }
    let m = map[0].order();
    if m == 0 {
        return Err(Error::InsufficientOrder { need: 1, have: 0 });
    }
    let comps: Vec<Jet> = t
        .comps
        .iter()
        .map(|c| c.truncate(m - 1))
        .collect::<std::result::Result<_, _>>()?;
    let src = map[0].dim();
    let jac: Vec<Vec<Jet>> = map
        .iter()
        .map(|f| {
            (0..src)
                .map(|i| Ok(f.derivative(i)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    pull_with_jacobian(&comps, t.dim, t.rank(), src, &jac)
}

fn pull_with_jacobian(
    comps: &[Jet],
    tdim: usize,
    rank: usize,
    src: usize,
    jac: &[Vec<Jet>],
) -> Result<Tensor> {
    let cfg = comps[0].config();
    let mut cur = comps.to_vec();
    let mut dims = vec![tdim; rank];
    for s in 0..rank {
        let mut nd = dims.clone();
        nd[s] = src;
        let total: usize = nd.iter().product();
        let mut next = Vec::with_capacity(total);
        for flat in 0..total {
            let mut ix = vec![0; rank];
            let mut f = flat;
            for q in (0..rank).rev() {
                ix[q] = f % nd[q];
                f /= nd[q];
            }
            let i = ix[s];
            let mut acc = Jet::zero(cfg);
            for a in 0..tdim {
                let mut jx = ix.clone();
                jx[s] = a;
                let pos = jx.iter().zip(&dims).fold(0, |acc, (v, d)| acc * d + v);
                acc = &acc + &(&cur[pos] * &jac[a][i]);
            }
            next.push(acc);
        }
        cur = next;
        dims = nd;
    }
    Tensor::new(src, vec![Slot::Down; rank], cur)
}

type ComponentFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// A tensor field given by its component functions.
#[derive(Clone)]
pub struct TensorField {
    pub dim: usize,
    pub variance: Vec<Slot>,
    pub symmetry: Symmetry,
    eval: Arc<ComponentFn>,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField")
            .field("dim", &self.dim)
            .field("variance", &self.variance)
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

impl TensorField {
    pub fn new<F>(dim: usize, variance: Vec<Slot>, symmetry: Symmetry, eval: F) -> TensorField
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        TensorField {
            dim,
            variance,
            symmetry,
            eval: Arc::new(eval),
        }
    }

    /// Field whose components are expressions in the chart coordinates.
    pub fn from_exprs(
        dim: usize,
        variance: Vec<Slot>,
        symmetry: Symmetry,
        exprs: Vec<Expr>,
    ) -> Result<TensorField> {
        let want = dim.pow(variance.len() as u32);
        if exprs.len() != want {
            return Err(Error::Invalid(format!(
                "field needs {want} component expressions, got {}",
                exprs.len()
            )));
        }
        Ok(TensorField::new(dim, variance, symmetry, move |x| {
            exprs
                .iter()
                .map(|e| Ok(e.eval(x)?))
                .collect::<Result<Vec<_>>>()
        }))
    }

    pub fn scalar<F>(dim: usize, eval: F) -> TensorField
    where
        F: Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static,
    {
        TensorField::new(dim, Vec::new(), Symmetry::None, move |x| Ok(vec![eval(x)?]))
    }

    pub fn vector<F>(dim: usize, eval: F) -> TensorField
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        TensorField::new(dim, vec![Slot::Up], Symmetry::None, eval)
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    /// Evaluates at coordinate jets and checks declared symmetries.
    pub fn at(&self, x: &[Jet]) -> Result<Tensor> {
        if x.len() != self.dim {
            return Err(Error::ChartMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let comps = (self.eval)(x)?;
        let t = Tensor::new(self.dim, self.variance.clone(), comps)?;
        let scale = 1e-12 * (1.0 + t.max_abs());
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::Symmetric => {
                let d = t.symmetry_defect();
                if d > scale {
                    return Err(Error::Invalid(format!("symmetric field defect {d:e}")));
                }
            }
            Symmetry::Antisymmetric(_) => {
                let d = t.antisymmetry_defect();
                if d > scale {
                    return Err(Error::NotAntisymmetric(d));
                }
            }
        }
        Ok(t)
    }

    pub fn at_point(&self, x: &[f64], order: usize) -> Result<Tensor> {
        self.at(&seed(x, order)?)
    }

    /// Evaluates a form field.
    pub fn form_at(&self, x: &[Jet]) -> Result<Form> {
        let convention = match self.symmetry {
            Symmetry::Antisymmetric(c) => c,
            _ if self.rank() <= 1 => Convention::Classical,
            _ => return Err(Error::Invalid("field is not declared as a form".into())),
        };
        Form::new(self.at(x)?, convention)
    }

    /// Evaluates a vector field's components.
    pub fn vector_at(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        if self.variance != [Slot::Up] {
            return Err(Error::Variance("not a vector field".into()));
        }
        Ok(self.at(x)?.comps)
    }
}

/// Symmetric covariant 2-tensor field with an orientation.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub field: TensorField,
    pub orientation: f64,
}

impl MetricField {
    pub fn new<F>(dim: usize, orientation: f64, eval: F) -> MetricField
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        MetricField {
            field: TensorField::new(
                dim,
                vec![Slot::Down, Slot::Down],
                Symmetry::Symmetric,
                eval,
            ),
            orientation,
        }
    }

    pub fn from_exprs(dim: usize, orientation: f64, exprs: Vec<Expr>) -> Result<MetricField> {
        Ok(MetricField {
            field: TensorField::from_exprs(
                dim,
                vec![Slot::Down, Slot::Down],
                Symmetry::Symmetric,
                exprs,
            )?,
            orientation,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.dim
    }

    pub fn at(&self, x: &[Jet]) -> Result<MetricAt> {
        MetricAt::new(self.field.at(x)?, self.orientation)
    }

    pub fn at_point(&self, x: &[f64], order: usize) -> Result<MetricAt> {
        self.at(&seed(x, order)?)
    }
}

/// Symmetric product `a⊙b = ½(a⊗b + b⊗a)` of two one-forms.
pub fn sym_product(a: &[Jet], b: &[Jet]) -> Vec<Jet> {
    let n = a.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((&(&a[i] * &b[j]) + &(&a[j] * &b[i])).scale(0.5));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jets(x: &[f64], order: usize) -> Vec<Jet> {
        seed(x, order).unwrap()
    }

    fn dx(i: usize, n: usize, cfg: JetConfig) -> Form {
        let comps = (0..n)
            .map(|k| Jet::constant(if k == i { 1.0 } else { 0.0 }, cfg))
            .collect();
        Form::one_form(comps).unwrap()
    }

    #[test]
    fn d_of_x_dy() {
        let x = jets(&[0.3, 0.7], 2);
        let zero = Jet::zero(x[0].config());
        let form = Form::one_form(vec![zero, x[0].clone()]).unwrap();
        let cl = d(&form).unwrap();
        assert_eq!(cl.tensor.get(&[0, 1]).value(), 1.0);
        let f2 = d(&form.to_convention(Convention::Antisymmetrized)).unwrap();
        assert_eq!(f2.tensor.get(&[0, 1]).value(), 0.5);
        assert_eq!(f2.tensor.get(&[1, 0]).value(), -0.5);
    }

    #[test]
    fn wedge_conventions() {
        let cfg = JetConfig::new(2, 1).unwrap();
        let a = dx(0, 2, cfg);
        let b = dx(1, 2, cfg);
        assert_eq!(wedge(&a, &a).unwrap().norm(), 0.0);
        assert_eq!(wedge(&a, &b).unwrap().tensor.get(&[0, 1]).value(), 1.0);
        let af = a.to_convention(Convention::Antisymmetrized);
        assert_eq!(wedge(&af, &b).unwrap().tensor.get(&[0, 1]).value(), 0.5);
    }

    #[test]
    fn interior_normalizations() {
        let cfg = JetConfig::new(2, 1).unwrap();
        let w = wedge(&dx(0, 2, cfg), &dx(1, 2, cfg))
            .unwrap()
            .to_convention(Convention::Antisymmetrized);
        let v = vec![Jet::constant(1.0, cfg), Jet::zero(cfg)];
        let raw = interior(&v, &w).unwrap();
        assert_eq!(raw.tensor.values(), vec![0.0, 0.5]);
        let nrm = interior_normalized(&v, &w).unwrap();
        assert_eq!(nrm.tensor.values(), vec![0.0, 1.0]);
    }

    #[test]
    fn euclidean_star() {
        let cfg = JetConfig::new(3, 1).unwrap();
        let g = MetricAt::new(
            Tensor::new(
                3,
                vec![Slot::Down, Slot::Down],
                (0..9)
                    .map(|k| Jet::constant(if k % 4 == 0 { 1.0 } else { 0.0 }, cfg))
                    .collect(),
            )
            .unwrap(),
            1.0,
        )
        .unwrap();
        let s = hodge_star(&g, &dx(0, 3, cfg)).unwrap();
        assert_eq!(s.tensor.get(&[1, 2]).value(), 1.0);
        assert_eq!(s.tensor.get(&[2, 1]).value(), -1.0);
        assert_eq!(s.tensor.get(&[0, 1]).value(), 0.0);
    }

    #[test]
    fn pullback_identity() {
        let x = jets(&[0.2, -0.4], 2);
        let f = TensorField::new(2, vec![Slot::Down, Slot::Down], Symmetry::None, |x| {
            Ok(vec![
                &x[0] * &x[1],
                x[0].clone(),
                x[1].exp()?,
                x[0].sin()?,
            ])
        });
        let direct = f.at(&x).unwrap();
        let pulled = pullback_field(&x, &f).unwrap();
        for (a, b) in pulled.comps.iter().zip(&direct.comps) {
            assert!((a.value() - b.value()).abs() < 1e-15);
        }
        let via = pullback_tensor(&x, &direct).unwrap();
        for (a, b) in via.comps.iter().zip(&direct.comps) {
            assert!((a.value() - b.value()).abs() < 1e-15);
        }
    }

    #[test]
    fn jet_matrix_inverse() {
        let x = jets(&[0.5, 1.5], 2);
        let m = vec![
            x[0].add_scalar(2.0),
            x[1].clone(),
            &x[0] * &x[1],
            x[1].add_scalar(-4.0),
        ];
        let (inv, det) = jet_inverse(&m, 2).unwrap();
        let want_det = &(&m[0] * &m[3]) - &(&m[1] * &m[2]);
        for (a, b) in det.coeffs().iter().zip(want_det.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Jet::zero(x[0].config());
                for k in 0..2 {
                    acc = &acc + &(&m[i * 2 + k] * &inv[k * 2 + j]);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value() - want).abs() < 1e-13);
                assert!(acc.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn lie_derivative_of_invariant_field() {
        // x-independent field along ∂x
        let f = TensorField::new(2, vec![Slot::Down, Slot::Down], Symmetry::None, |x| {
            Ok(vec![x[1].sin()?, x[1].clone(), x[1].exp()?, &x[1] * &x[1]])
        });
        let x = jets(&[0.4, 0.9], 2);
        let cfg = x[0].config();
        let v = vec![Jet::constant(1.0, cfg), Jet::zero(cfg)];
        let l = lie_derivative(&v, &f.at(&x).unwrap()).unwrap();
        assert!(l.max_abs() < 1e-15);
    }

    #[test]
    fn chart_sampling_respects_guards() {
        let chart = Chart::new(&["x", "y"], &[(-1.0, 1.0), (-1.0, 1.0)])
            .unwrap()
            .with_guard(Guard::new("x>0", 0.0, |x| Ok(x[0].max(0.0))));
        let mut s = 0.123_f64;
        let mut uniform = || {
            s = (s * 9301.0 + 0.49297).fract();
            s
        };
        let (pts, rejected) = chart.sample(20, &mut uniform).unwrap();
        assert_eq!(pts.len(), 20);
        assert!(pts.iter().all(|p| p[0] > 0.0));
        assert!(rejected > 0);
        let never = chart
            .clone()
            .with_guard(Guard::new("never", 1.0, |_| Ok(0.0)));
        assert!(matches!(
            never.sample(3, &mut uniform),
            Err(Error::GuardExhausted { .. })
        ));
    }
}
