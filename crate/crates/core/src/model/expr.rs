//! Immutable expression DAGs with evaluation and reverse-mode differentiation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a variable within an [`Instance`](crate::model::Instance).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Node kinds of the expression grammar.
///
/// The grammar is deliberately small: affine sums, binary products, integer
/// powers, `exp`, `log` and negation cover every constraint body the solver
/// handles, while keeping curvature and secant logic tractable.
#[derive(Debug)]
pub enum ExprNode {
    Var(VarId),
    Const(f64),
    /// `constant + sum coeff_i * child_i`; children are never sums themselves.
    Sum { terms: Vec<(f64, Expr)>, constant: f64 },
    /// Binary product of two sub-expressions.
    Prod(Expr, Expr),
    /// Integer power with exponent >= 1.
    Pow(Expr, u32),
    Exp(Expr),
    Ln(Expr),
    Neg(Expr),
}

/// An immutable expression handle. Cloning is cheap (shared node).
#[derive(Clone, Debug)]
pub struct Expr(Arc<ExprNode>);

impl Expr {
    pub fn var(id: VarId) -> Self {
        Expr(Arc::new(ExprNode::Var(id)))
    }

    pub fn constant(c: f64) -> Self {
        Expr(Arc::new(ExprNode::Const(c)))
    }

    /// Builds `constant + sum coeff_i * child_i`, folding constants and
    /// flattening nested sums.
    pub fn sum(terms: Vec<(f64, Expr)>, constant: f64) -> Self {
        let mut flat: Vec<(f64, Expr)> = Vec::with_capacity(terms.len());
        let mut cst = constant;
        let mut stack: Vec<(f64, Expr)> = terms.into_iter().rev().collect();
        while let Some((c, e)) = stack.pop() {
            if c == 0.0 {
                continue;
            }
            match e.node() {
                ExprNode::Const(v) => cst += c * v,
                ExprNode::Sum { terms, constant } => {
                    cst += c * constant;
                    for (tc, te) in terms.iter().rev() {
                        stack.push((c * tc, te.clone()));
                    }
                }
                ExprNode::Neg(inner) => stack.push((-c, inner.clone())),
                _ => flat.push((c, e)),
            }
        }
        if flat.is_empty() {
            return Expr::constant(cst);
        }
        if flat.len() == 1 && cst == 0.0 && flat[0].0 == 1.0 {
            return flat.pop().unwrap().1;
        }
        Expr(Arc::new(ExprNode::Sum { terms: flat, constant: cst }))
    }

    pub fn product(a: Expr, b: Expr) -> Self {
        match (a.node(), b.node()) {
            (ExprNode::Const(x), ExprNode::Const(y)) => Expr::constant(x * y),
            (ExprNode::Const(x), _) => Expr::sum(vec![(*x, b.clone())], 0.0),
            (_, ExprNode::Const(y)) => Expr::sum(vec![(*y, a.clone())], 0.0),
            _ => {
                if a == b {
                    // y*y and friends: keep a single node so curvature rules apply.
                    return Expr::pow(a, 2);
                }
                Expr(Arc::new(ExprNode::Prod(a, b)))
            }
        }
    }

    /// Integer power. Exponent 0 folds to the constant 1, exponent 1 to the base.
    pub fn pow(base: Expr, exponent: u32) -> Self {
        match exponent {
            0 => Expr::constant(1.0),
            1 => base,
            _ => {
                if let ExprNode::Const(c) = base.node() {
                    return Expr::constant(c.powi(exponent as i32));
                }
                Expr(Arc::new(ExprNode::Pow(base, exponent)))
            }
        }
    }

    pub fn exp(child: Expr) -> Self {
        if let ExprNode::Const(c) = child.node() {
            return Expr::constant(c.exp());
        }
        Expr(Arc::new(ExprNode::Exp(child)))
    }

    pub fn ln(child: Expr) -> Self {
        Expr(Arc::new(ExprNode::Ln(child)))
    }

    pub fn neg(child: Expr) -> Self {
        match child.node() {
            ExprNode::Const(c) => Expr::constant(-c),
            ExprNode::Neg(inner) => inner.clone(),
            _ => Expr(Arc::new(ExprNode::Neg(child))),
        }
    }

    pub fn node(&self) -> &ExprNode {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// All variables appearing in the expression.
    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>, seen: &mut HashSet<usize>) {
        if !seen.insert(self.key()) {
            return;
        }
        match self.node() {
            ExprNode::Var(v) => {
                out.insert(*v);
            }
            ExprNode::Const(_) => {}
            ExprNode::Sum { terms, .. } => {
                for (_, t) in terms {
                    t.collect_vars(out, seen);
                }
            }
            ExprNode::Prod(a, b) => {
                a.collect_vars(out, seen);
                b.collect_vars(out, seen);
            }
            ExprNode::Pow(c, _) | ExprNode::Exp(c) | ExprNode::Ln(c) | ExprNode::Neg(c) => {
                c.collect_vars(out, seen)
            }
        }
    }

    /// Evaluates the expression at `point` (indexed by variable id).
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut memo = HashMap::new();
        self.eval_memo(point, &mut memo)
    }

    fn eval_memo(&self, point: &[f64], memo: &mut HashMap<usize, f64>) -> Result<f64> {
        if let Some(v) = memo.get(&self.key()) {
            return Ok(*v);
        }
        let val = match self.node() {
            ExprNode::Var(v) => point[v.0],
            ExprNode::Const(c) => *c,
            ExprNode::Sum { terms, constant } => {
                let mut acc = *constant;
                for (c, t) in terms {
                    acc += c * t.eval_memo(point, memo)?;
                }
                acc
            }
            ExprNode::Prod(a, b) => a.eval_memo(point, memo)? * b.eval_memo(point, memo)?,
            ExprNode::Pow(c, k) => c.eval_memo(point, memo)?.powi(*k as i32),
            ExprNode::Exp(c) => c.eval_memo(point, memo)?.exp(),
            ExprNode::Ln(c) => {
                let v = c.eval_memo(point, memo)?;
                if v <= 0.0 {
                    return Err(Error::Domain(format!("log of non-positive argument {v}")));
                }
                v.ln()
            }
            ExprNode::Neg(c) => -c.eval_memo(point, memo)?,
        };
        memo.insert(self.key(), val);
        Ok(val)
    }

    /// Gradient by reverse-mode accumulation over the DAG.
    ///
    /// Returns the partial derivative for every variable appearing in the
    /// expression; variables absent from the expression get no entry.
    pub fn gradient(&self, point: &[f64]) -> Result<BTreeMap<VarId, f64>> {
        // Forward sweep: topological order and values.
        let mut topo: Vec<Expr> = Vec::new();
        let mut seen = HashSet::new();
        self.topo_order(&mut topo, &mut seen);
        let mut values: HashMap<usize, f64> = HashMap::new();
        for e in &topo {
            e.eval_memo(point, &mut values)?;
        }
        // Backward sweep.
        let mut adjoint: HashMap<usize, f64> = HashMap::new();
        adjoint.insert(self.key(), 1.0);
        let mut grads: BTreeMap<VarId, f64> = BTreeMap::new();
        for e in topo.iter().rev() {
            let adj = match adjoint.get(&e.key()) {
                Some(a) => *a,
                None => continue,
            };
            match e.node() {
                ExprNode::Var(v) => {
                    *grads.entry(*v).or_insert(0.0) += adj;
                }
                ExprNode::Const(_) => {}
                ExprNode::Sum { terms, .. } => {
                    for (c, t) in terms {
                        *adjoint.entry(t.key()).or_insert(0.0) += adj * c;
                    }
                }
                ExprNode::Prod(a, b) => {
                    let va = values[&a.key()];
                    let vb = values[&b.key()];
                    *adjoint.entry(a.key()).or_insert(0.0) += adj * vb;
                    *adjoint.entry(b.key()).or_insert(0.0) += adj * va;
                }
                ExprNode::Pow(c, k) => {
                    let vc = values[&c.key()];
                    let d = (*k as f64) * vc.powi(*k as i32 - 1);
                    *adjoint.entry(c.key()).or_insert(0.0) += adj * d;
                }
                ExprNode::Exp(c) => {
                    let vc = values[&c.key()];
                    *adjoint.entry(c.key()).or_insert(0.0) += adj * vc.exp();
                }
                ExprNode::Ln(c) => {
                    let vc = values[&c.key()];
                    *adjoint.entry(c.key()).or_insert(0.0) += adj / vc;
                }
                ExprNode::Neg(c) => {
                    *adjoint.entry(c.key()).or_insert(0.0) -= adj;
                }
            }
        }
        Ok(grads)
    }

    fn topo_order(&self, out: &mut Vec<Expr>, seen: &mut HashSet<usize>) {
        if !seen.insert(self.key()) {
            return;
        }
        match self.node() {
            ExprNode::Var(_) | ExprNode::Const(_) => {}
            ExprNode::Sum { terms, .. } => {
                for (_, t) in terms {
                    t.topo_order(out, seen);
                }
            }
            ExprNode::Prod(a, b) => {
                a.topo_order(out, seen);
                b.topo_order(out, seen);
            }
            ExprNode::Pow(c, _) | ExprNode::Exp(c) | ExprNode::Ln(c) | ExprNode::Neg(c) => {
                c.topo_order(out, seen)
            }
        }
        out.push(self.clone());
    }

    /// Decomposes the expression as `coeffs . v + constant` if it is affine.
    pub fn as_affine(&self) -> Option<(BTreeMap<VarId, f64>, f64)> {
        match self.node() {
            ExprNode::Var(v) => {
                let mut m = BTreeMap::new();
                m.insert(*v, 1.0);
                Some((m, 0.0))
            }
            ExprNode::Const(c) => Some((BTreeMap::new(), *c)),
            ExprNode::Sum { terms, constant } => {
                let mut m = BTreeMap::new();
                let mut cst = *constant;
                for (c, t) in terms {
                    let (tm, tc) = t.as_affine()?;
                    cst += c * tc;
                    for (v, a) in tm {
                        *m.entry(v).or_insert(0.0) += c * a;
                    }
                }
                m.retain(|_, a| *a != 0.0);
                Some((m, cst))
            }
            ExprNode::Neg(c) => {
                let (mut m, cst) = c.as_affine()?;
                for a in m.values_mut() {
                    *a = -*a;
                }
                Some((m, -cst))
            }
            ExprNode::Prod(a, b) => {
                // Affine only when one factor is a constant expression.
                let (ma, ca) = a.as_affine()?;
                let (mb, cb) = b.as_affine()?;
                if ma.is_empty() {
                    let mut m = mb;
                    for v in m.values_mut() {
                        *v *= ca;
                    }
                    Some((m, ca * cb))
                } else if mb.is_empty() {
                    let mut m = ma;
                    for v in m.values_mut() {
                        *v *= cb;
                    }
                    Some((m, ca * cb))
                } else {
                    None
                }
            }
            ExprNode::Pow(..) | ExprNode::Exp(_) | ExprNode::Ln(_) => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        self.as_affine().is_some()
    }
}

impl PartialEq for Expr {
    /// Structural equality (with a pointer fast path for shared nodes).
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (ExprNode::Var(a), ExprNode::Var(b)) => a == b,
            (ExprNode::Const(a), ExprNode::Const(b)) => a == b,
            (
                ExprNode::Sum { terms: ta, constant: ca },
                ExprNode::Sum { terms: tb, constant: cb },
            ) => ca == cb && ta.len() == tb.len() && ta.iter().zip(tb).all(|(x, y)| x == y),
            (ExprNode::Prod(a1, a2), ExprNode::Prod(b1, b2)) => a1 == b1 && a2 == b2,
            (ExprNode::Pow(a, ka), ExprNode::Pow(b, kb)) => ka == kb && a == b,
            (ExprNode::Exp(a), ExprNode::Exp(b)) => a == b,
            (ExprNode::Ln(a), ExprNode::Ln(b)) => a == b,
            (ExprNode::Neg(a), ExprNode::Neg(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}
