//! Formal bracket words over the generators `{f, g}`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Result;
use crate::liecalc::field::{lie_bracket, VectorFieldExpr};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BracketTree {
    F,
    G,
    Bracket(Box<BracketTree>, Box<BracketTree>),
}

impl fmt::Display for BracketTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTree::F => write!(f, "f"),
            BracketTree::G => write!(f, "g"),
            BracketTree::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl BracketTree {
    pub fn bracket(a: BracketTree, b: BracketTree) -> Self {
        BracketTree::Bracket(Box::new(a), Box::new(b))
    }

    /// Number of generator leaves.
    pub fn order(&self) -> usize {
        match self {
            BracketTree::F | BracketTree::G => 1,
            BracketTree::Bracket(a, b) => a.order() + b.order(),
        }
    }

    /// `ad_by^times(base) = [..[[base, by], by].., by]`.
    pub fn ad(base: BracketTree, by: BracketTree, times: usize) -> Self {
        (0..times).fold(base, |acc, _| Self::bracket(acc, by.clone()))
    }

    /// Realizes the word with concrete fields.
    pub fn to_field(&self, f: &VectorFieldExpr, g: &VectorFieldExpr) -> Result<VectorFieldExpr> {
        match self {
            BracketTree::F => Ok(f.clone()),
            BracketTree::G => Ok(g.clone()),
            BracketTree::Bracket(a, b) => lie_bracket(&a.to_field(f, g)?, &b.to_field(f, g)?),
        }
    }
}

/// Pure-order bracket words with exactly `k` leaves, one representative per
/// antisymmetric pair and no `[X, X]` factors.
fn words_of_order(k: usize, memo: &mut Vec<Vec<BracketTree>>) -> Vec<BracketTree> {
    while memo.len() <= k {
        let n = memo.len();
        let level = if n == 0 {
            vec![]
        } else if n == 1 {
            vec![BracketTree::F, BracketTree::G]
        } else {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for a in 1..n {
                for x in &memo[a] {
                    for y in &memo[n - a] {
                        let (kx, ky) = (x.to_string(), y.to_string());
                        if kx >= ky {
                            continue;
                        }
                        if seen.insert(format!("{kx}|{ky}")) {
                            out.push(BracketTree::bracket(x.clone(), y.clone()));
                        }
                    }
                }
            }
            out
        };
        memo.push(level);
    }
    memo[k].clone()
}

/// Brackets of order `1..=max_order` spanning `Lie{f, g}` up to that order,
/// with the bare generator `g` removed.
pub fn bracket_basis(max_order: usize) -> Vec<BracketTree> {
    let mut memo = Vec::new();
    (1..=max_order)
        .flat_map(|k| words_of_order(k, &mut memo))
        .filter(|t| *t != BracketTree::G)
        .collect()
}

/// Ordered sequences `(Δ_1, …, Δ_k)` from [`bracket_basis`] whose orders sum
/// to exactly `total`.
pub fn monomials_of_order(total: usize) -> Vec<Vec<BracketTree>> {
    let basis = bracket_basis(total);
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(left: usize, basis: &[BracketTree], cur: &mut Vec<BracketTree>, out: &mut Vec<Vec<BracketTree>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for b in basis {
            let o = b.order();
            if o <= left {
                cur.push(b.clone());
                rec(left - o, basis, cur, out);
                cur.pop();
            }
        }
    }
    rec(total, &basis, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use BracketTree::{F, G};

    #[test]
    fn orders() {
        assert_eq!(F.order(), 1);
        assert_eq!(BracketTree::bracket(F, G).order(), 2);
        assert_eq!(BracketTree::ad(F, G, 2).order(), 3);
        assert_eq!(BracketTree::ad(F, G, 2).to_string(), "[[f,g],g]");
    }

    #[test]
    fn basis_small_orders() {
        let b: Vec<String> = bracket_basis(3).iter().map(ToString::to_string).collect();
        assert_eq!(b, vec!["f", "[f,g]", "[[f,g],f]", "[[f,g],g]"]);
    }

    #[test]
    fn monomials() {
        let m: Vec<String> = monomials_of_order(2)
            .iter()
            .map(|s| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        assert_eq!(m, vec!["f f", "[f,g]"]);
        assert!(monomials_of_order(4).iter().all(|s| s.iter().map(BracketTree::order).sum::<usize>() == 4));
    }
}
