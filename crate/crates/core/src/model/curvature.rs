//! Sound syntactic curvature tagging over a variable box.
//!
//! The rules are composition rules with monotonicity checks; anything not
//! covered falls back to `Unknown`. A `Convex`/`Concave`/`Linear` tag is a
//! guarantee, `Unknown` is not a claim of nonconvexity.

use std::collections::HashMap;

use crate::model::expr::{Expr, ExprNode};
use crate::model::interval::{interval_eval, Interval};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Curvature {
    Linear,
    Convex,
    Concave,
    Unknown,
}

impl Curvature {
    pub fn flip(self) -> Self {
        match self {
            Curvature::Convex => Curvature::Concave,
            Curvature::Concave => Curvature::Convex,
            other => other,
        }
    }

    fn combine(self, other: Curvature) -> Curvature {
        use Curvature::*;
        match (self, other) {
            (Linear, c) | (c, Linear) => c,
            (Convex, Convex) => Convex,
            (Concave, Concave) => Concave,
            _ => Unknown,
        }
    }

    pub fn is_convex_or_linear(self) -> bool {
        matches!(self, Curvature::Convex | Curvature::Linear)
    }

    pub fn is_concave_or_linear(self) -> bool {
        matches!(self, Curvature::Concave | Curvature::Linear)
    }
}

/// Tags the curvature of `expr` over `boxes`.
pub fn curvature(expr: &Expr, boxes: &[Interval]) -> Curvature {
    let mut memo = HashMap::new();
    curv_rec(expr, boxes, &mut memo)
}

fn curv_rec(expr: &Expr, boxes: &[Interval], memo: &mut HashMap<usize, Curvature>) -> Curvature {
    let key = expr.node() as *const ExprNode as usize;
    if let Some(c) = memo.get(&key) {
        return *c;
    }
    let out = match expr.node() {
        ExprNode::Var(_) | ExprNode::Const(_) => Curvature::Linear,
        ExprNode::Neg(c) => curv_rec(c, boxes, memo).flip(),
        ExprNode::Sum { terms, .. } => {
            let mut acc = Curvature::Linear;
            for (coeff, t) in terms {
                let tc = curv_rec(t, boxes, memo);
                let signed = if *coeff >= 0.0 { tc } else { tc.flip() };
                acc = acc.combine(signed);
                if acc == Curvature::Unknown {
                    break;
                }
            }
            acc
        }
        ExprNode::Prod(a, b) => {
            // Affine only when one side is a constant expression; the sum
            // constructor folds those, so a genuine Prod node is bilinear or
            // worse.
            match (a.as_affine(), b.as_affine()) {
                (Some((ma, _)), _) if ma.is_empty() => curv_rec(b, boxes, memo),
                (_, Some((mb, _))) if mb.is_empty() => curv_rec(a, boxes, memo),
                _ => Curvature::Unknown,
            }
        }
        ExprNode::Pow(c, k) => pow_curvature(c, *k, boxes, memo),
        ExprNode::Exp(c) => {
            if curv_rec(c, boxes, memo).is_convex_or_linear() {
                Curvature::Convex
            } else {
                Curvature::Unknown
            }
        }
        ExprNode::Ln(c) => {
            if curv_rec(c, boxes, memo).is_concave_or_linear() {
                Curvature::Concave
            } else {
                Curvature::Unknown
            }
        }
    };
    memo.insert(key, out);
    out
}

fn pow_curvature(
    child: &Expr,
    k: u32,
    boxes: &[Interval],
    memo: &mut HashMap<usize, Curvature>,
) -> Curvature {
    let cc = curv_rec(child, boxes, memo);
    let range = match interval_eval(child, boxes) {
        Ok(i) => i,
        Err(_) => return Curvature::Unknown,
    };
    let nonneg = range.lo >= -1e-15;
    let nonpos = range.hi <= 1e-15;
    if k % 2 == 0 {
        match cc {
            Curvature::Linear => Curvature::Convex,
            Curvature::Convex if nonneg => Curvature::Convex,
            Curvature::Concave if nonpos => Curvature::Convex,
            _ => Curvature::Unknown,
        }
    } else {
        // odd power: monotone increasing, convex on [0, inf), concave on (-inf, 0]
        match cc {
            Curvature::Linear | Curvature::Convex if nonneg => Curvature::Convex,
            Curvature::Linear | Curvature::Concave if nonpos => Curvature::Concave,
            _ => Curvature::Unknown,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::VarId;

    fn y() -> Expr {
        Expr::var(VarId(0))
    }

    #[test]
    fn even_power_is_convex_anywhere() {
        let sq = Expr::pow(y(), 2);
        assert_eq!(curvature(&sq, &[Interval::new(-5.0, 5.0)]), Curvature::Convex);
        assert_eq!(curvature(&sq, &[Interval::whole()]), Curvature::Convex);
    }

    #[test]
    fn cubic_minus_is_concave_on_positive_box() {
        let f = Expr::sum(vec![(-1.0, Expr::pow(y(), 3)), (1.0, y())], 0.0);
        assert_eq!(curvature(&f, &[Interval::new(0.5, 1.0)]), Curvature::Concave);
    }

    #[test]
    fn mixed_curvature_is_unknown() {
        let f = Expr::sum(vec![(1.0, Expr::pow(y(), 3)), (-1.0, Expr::pow(y(), 2))], 0.0);
        assert_eq!(curvature(&f, &[Interval::new(-1.0, 1.0)]), Curvature::Unknown);
    }

    #[test]
    fn affine_is_linear() {
        let f = Expr::sum(vec![(2.0, y()), (3.0, Expr::var(VarId(1)))], -1.0);
        assert_eq!(
            curvature(&f, &[Interval::whole(), Interval::whole()]),
            Curvature::Linear
        );
    }

    #[test]
    fn odd_power_sign_rules() {
        let cube = Expr::pow(y(), 3);
        assert_eq!(curvature(&cube, &[Interval::new(0.0, 2.0)]), Curvature::Convex);
        assert_eq!(curvature(&cube, &[Interval::new(-2.0, 0.0)]), Curvature::Concave);
        assert_eq!(curvature(&cube, &[Interval::new(-1.0, 1.0)]), Curvature::Unknown);
    }

    #[test]
    fn exp_and_log_composition() {
        let f = Expr::exp(Expr::sum(vec![(2.0, y())], 1.0));
        assert_eq!(curvature(&f, &[Interval::whole()]), Curvature::Convex);
        let g = Expr::ln(Expr::sum(vec![(1.0, y())], 2.0));
        assert_eq!(curvature(&g, &[Interval::new(0.0, 1.0)]), Curvature::Concave);
        // exp of a convex argument stays convex
        let h = Expr::exp(Expr::pow(y(), 2));
        assert_eq!(curvature(&h, &[Interval::new(-1.0, 1.0)]), Curvature::Convex);
    }

    #[test]
    fn convexity_tag_passes_midpoint_checks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checks = 0usize;
        while checks < 500 {
            let nvars = rng.gen_range(1..=2usize);
            let expr = crate::model::expr::tests::random_expr(&mut rng, nvars, 3);
            let boxes: Vec<Interval> = (0..nvars)
                .map(|_| {
                    let lo = rng.gen_range(0.1..1.0);
                    Interval::new(lo, lo + rng.gen_range(0.1..1.0))
                })
                .collect();
            let tag = curvature(&expr, &boxes);
            if tag == Curvature::Unknown {
                continue;
            }
            for _ in 0..5 {
                let a: Vec<f64> =
                    boxes.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect();
                let b: Vec<f64> =
                    boxes.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect();
                let mid: Vec<f64> =
                    a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                let (fa, fb, fm) = match (expr.eval(&a), expr.eval(&b), expr.eval(&mid)) {
                    (Ok(x), Ok(y), Ok(z)) => (x, y, z),
                    _ => continue,
                };
                let avg = 0.5 * (fa + fb);
                match tag {
                    Curvature::Convex => assert!(fm <= avg + 1e-9, "convex tag broken"),
                    Curvature::Concave => assert!(fm >= avg - 1e-9, "concave tag broken"),
                    Curvature::Linear => assert!((fm - avg).abs() <= 1e-9),
                    Curvature::Unknown => unreachable!(),
                }
                checks += 1;
            }
        }
    }
}
