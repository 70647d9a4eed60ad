//! Interval arithmetic over the expression grammar.
//!
//! Soundness is kept by padding results of every nonlinear operation outward
//! by a small epsilon instead of switching rounding modes.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::expr::{Expr, ExprNode};

const PAD: f64 = 1e-12;

/// A closed interval; `lo <= hi` always holds, infinite endpoints allowed.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] inverted");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn whole() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            0.5 * (self.lo + self.hi)
        } else if self.lo.is_finite() {
            self.lo + 1.0
        } else if self.hi.is_finite() {
            self.hi - 1.0
        } else {
            0.0
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// Clamps a value into the interval.
    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    fn widen(self) -> Self {
        let lo = if self.lo.is_finite() {
            self.lo - PAD * (1.0 + self.lo.abs())
        } else {
            self.lo
        };
        let hi = if self.hi.is_finite() {
            self.hi + PAD * (1.0 + self.hi.abs())
        } else {
            self.hi
        };
        Interval { lo, hi }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo + other.lo, hi: self.hi + other.hi }.widen()
    }

    pub fn shift(&self, c: f64) -> Interval {
        Interval { lo: self.lo + c, hi: self.hi + c }.widen()
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c == 0.0 {
            return Interval::point(0.0);
        }
        let (a, b) = (mul_ext(c, self.lo), mul_ext(c, self.hi));
        Interval { lo: a.min(b), hi: a.max(b) }.widen()
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            mul_ext(self.lo, other.lo),
            mul_ext(self.lo, other.hi),
            mul_ext(self.hi, other.lo),
            mul_ext(self.hi, other.hi),
        ];
        let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }.widen()
    }

    pub fn pow(&self, k: u32) -> Interval {
        let ki = k as i32;
        if k % 2 == 1 {
            Interval { lo: self.lo.powi(ki), hi: self.hi.powi(ki) }.widen()
        } else if self.lo >= 0.0 {
            Interval { lo: self.lo.powi(ki), hi: self.hi.powi(ki) }.widen()
        } else if self.hi <= 0.0 {
            Interval { lo: self.hi.powi(ki), hi: self.lo.powi(ki) }.widen()
        } else {
            let hi = self.lo.powi(ki).max(self.hi.powi(ki));
            Interval { lo: 0.0, hi }.widen()
        }
    }

    pub fn exp(&self) -> Interval {
        Interval { lo: self.lo.exp(), hi: self.hi.exp() }.widen()
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.hi <= 0.0 {
            return Err(Error::Domain(format!("log of non-positive interval {self}")));
        }
        let lo = if self.lo <= 0.0 { f64::NEG_INFINITY } else { self.lo.ln() };
        Ok(Interval { lo, hi: self.hi.ln() }.widen())
    }
}

/// Product with the convention `0 * inf = 0` (sound for closed boxes).
fn mul_ext(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Encloses the range of `expr` over the box (one interval per variable id).
pub fn interval_eval(expr: &Expr, boxes: &[Interval]) -> Result<Interval> {
    let mut memo = HashMap::new();
    eval_rec(expr, boxes, &mut memo)
}

fn eval_rec(
    expr: &Expr,
    boxes: &[Interval],
    memo: &mut HashMap<usize, Interval>,
) -> Result<Interval> {
    let key = expr.node() as *const ExprNode as usize;
    if let Some(i) = memo.get(&key) {
        return Ok(*i);
    }
    let out = match expr.node() {
        ExprNode::Var(v) => boxes[v.0],
        ExprNode::Const(c) => Interval::point(*c),
        ExprNode::Sum { terms, constant } => {
            let mut acc = Interval::point(*constant);
            for (c, t) in terms {
                acc = acc.add(&eval_rec(t, boxes, memo)?.scale(*c));
            }
            acc
        }
        ExprNode::Prod(a, b) => eval_rec(a, boxes, memo)?.mul(&eval_rec(b, boxes, memo)?),
        ExprNode::Pow(c, k) => eval_rec(c, boxes, memo)?.pow(*k),
        ExprNode::Exp(c) => eval_rec(c, boxes, memo)?.exp(),
        ExprNode::Ln(c) => eval_rec(c, boxes, memo)?.ln()?,
        ExprNode::Neg(c) => eval_rec(c, boxes, memo)?.neg(),
    };
    memo.insert(key, out);
    Ok(out)
}
