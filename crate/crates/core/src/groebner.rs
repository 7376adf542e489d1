//! Buchberger's algorithm with the sugar selection strategy and the
//! Gebauer–Möller pair criteria.


use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::{divides, lcm, Exponents, Polynomial, TermOrder};

/// Hard limits on a single Gröbner computation. Exceeding any of them is an
/// [`Error::BudgetExhausted`], never a truncated answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget {
    pub max_degree: u32,
    pub max_basis: usize,
    pub max_pairs: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_degree: 24, max_basis: 2000, max_pairs: 200_000 }
    }
}

type Terms<F> = Vec<(Exponents, F)>;

struct Entry<F> {
    terms: Terms<F>,
    sugar: u32,
    active: bool,
}

impl<F> Entry<F> {
    fn lm(&self) -> &Exponents {
        &self.terms[0].0
    }
}

#[derive(Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Exponents,
    sugar: u32,
}

fn deg(e: &[u32]) -> u32 {
    e.iter().sum()
}

fn to_terms<F: Field>(p: &Polynomial<F>, order: TermOrder) -> Terms<F> {
    p.sorted_terms(order)
}

fn from_terms<F: Field>(nvars: usize, t: Terms<F>) -> Polynomial<F> {
    Polynomial::from_terms(nvars, t)
}

/// `f - c * x^m * g`, with both inputs sorted descending.
fn sub_mul<F: Field>(f: &[(Exponents, F)], c: &F, m: &[u32], g: &[(Exponents, F)], order: TermOrder) -> Terms<F> {
    let mut out = Vec::with_capacity(f.len() + g.len());
    let shifted = g.iter().map(|(e, k)| {
        let ne: Exponents = e.iter().zip(m).map(|(a, b)| a + b).collect();
        (ne, -(c.clone() * k.clone()))
    });
    let mut fi = f.iter().cloned().peekable();
    let mut gi = shifted.peekable();
    loop {
        match (fi.peek(), gi.peek()) {
            (None, None) => break,
            (Some(_), None) => out.push(fi.next().unwrap()),
            (None, Some(_)) => out.push(gi.next().unwrap()),
            (Some(a), Some(b)) => match order.cmp(&a.0, &b.0) {
                std::cmp::Ordering::Greater => out.push(fi.next().unwrap()),
                std::cmp::Ordering::Less => out.push(gi.next().unwrap()),
                std::cmp::Ordering::Equal => {
                    let (e, x) = fi.next().unwrap();
                    let (_, y) = gi.next().unwrap();
                    let s = x + y;
                    if !s.is_zero() {
                        out.push((e, s));
                    }
                }
            },
        }
    }
    out
}

fn reduce_full<'a, F: Field>(mut p: Terms<F>, divisors: impl Iterator<Item = &'a Terms<F>> + Clone, order: TermOrder) -> Terms<F> {
    let mut rem = Vec::new();
    let mut start = 0;
    while start < p.len() {
        let (lm, lc) = (&p[start].0, &p[start].1);
        match divisors.clone().find(|g| divides(&g[0].0, lm)) {
            Some(g) => {
                let m: Exponents = lm.iter().zip(&g[0].0).map(|(a, b)| a - b).collect();
                let c = lc.clone() / g[0].1.clone();
                p = sub_mul(&p[start..], &c, &m, g, order);
                start = 0;
            }
            None => {
                rem.push(p[start].clone());
                start += 1;
            }
        }
    }
    rem
}

fn normalize<F: Field>(t: Terms<F>) -> Terms<F> {
    let coeffs: Vec<F> = t.iter().map(|(_, c)| c.clone()).collect();
    let k = F::normalizer(&coeffs);
    t.into_iter().map(|(e, c)| (e, c * k.clone())).collect()
}

/// Normal form of `f` modulo `basis` (fully reduced, not just top-reduced).
pub fn normal_form<F: Field>(f: &Polynomial<F>, basis: &[Polynomial<F>], order: TermOrder) -> Polynomial<F> {
    let divisors: Vec<Terms<F>> = basis.iter().filter(|g| !g.is_zero()).map(|g| to_terms(g, order)).collect();
    from_terms(f.nvars(), reduce_full(to_terms(f, order), divisors.iter(), order))
}

fn update(entries: &mut [Entry<impl Field>], pairs: &mut Vec<Pair>, h: usize) {
    let hl = entries[h].lm().clone();
    let hs = entries[h].sugar;
    let mut cands: Vec<(Pair, bool)> = Vec::new();
    for g in 0..h {
        if !entries[g].active {
            continue;
        }
        let gl = entries[g].lm();
        let l = lcm(gl, &hl);
        let sugar = (entries[g].sugar + deg(&l) - deg(gl)).max(hs + deg(&l) - deg(&hl));
        let coprime = gl.iter().zip(&hl).all(|(a, b)| *a == 0 || *b == 0);
        cands.push((Pair { i: g, j: h, lcm: l, sugar }, coprime));
    }
    // M criterion: drop (g,h) if another new pair's lcm properly divides it.
    let survivors: Vec<&(Pair, bool)> = cands
        .iter()
        .filter(|(p, _)| !cands.iter().any(|(q, _)| q.lcm != p.lcm && divides(&q.lcm, &p.lcm)))
        .collect();
    // F criterion plus product criterion: per lcm class keep one pair, none
    // if any member has coprime leading monomials.
    let mut new_pairs: Vec<Pair> = Vec::new();
    for (k, (p, _)) in survivors.iter().enumerate() {
        if survivors[..k].iter().any(|(q, _)| q.lcm == p.lcm) {
            continue;
        }
        if survivors.iter().any(|(q, coprime)| q.lcm == p.lcm && *coprime) {
            continue;
        }
        new_pairs.push(p.clone());
    }
    // B criterion on old pairs.
    pairs.retain(|p| {
        !(divides(&hl, &p.lcm)
            && lcm(entries[p.i].lm(), &hl) != p.lcm
            && lcm(entries[p.j].lm(), &hl) != p.lcm)
    });
    pairs.extend(new_pairs);
    for e in entries.iter_mut().take(h) {
        if e.active && divides(&hl, e.lm()) {
            e.active = false;
        }
    }
}

/// Reduced Gröbner basis of the ideal generated by `gens` under `order`.
/// The result is monic, interreduced and sorted by descending leading
/// monomial, hence canonical for the ideal.
pub fn groebner_basis<F: Field>(gens: &[Polynomial<F>], order: TermOrder, budget: &Budget) -> Result<Vec<Polynomial<F>>> {
    let nvars = match gens.first() {
        Some(g) => g.nvars(),
        None => return Ok(Vec::new()),
    };
    let mut entries: Vec<Entry<F>> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let check = |t: &Terms<F>, n: usize| -> Result<()> {
        let d = t.iter().map(|(e, _)| deg(e)).max().unwrap_or(0);
        if d > budget.max_degree {
            return Err(Error::BudgetExhausted(format!("basis element of degree {d} exceeds {}", budget.max_degree)));
        }
        if n > budget.max_basis {
            return Err(Error::BudgetExhausted(format!("basis size exceeds {}", budget.max_basis)));
        }
        Ok(())
    };
    let mut sorted_gens: Vec<Terms<F>> = gens.iter().filter(|g| !g.is_zero()).map(|g| to_terms(g, order)).collect();
    sorted_gens.sort_by(|a, b| order.cmp(&a[0].0, &b[0].0));
    for g in sorted_gens {
        let divisors: Vec<&Terms<F>> = entries.iter().filter(|e| e.active).map(|e| &e.terms).collect();
        let r = reduce_full(g, divisors.iter().copied(), order);
        if r.is_empty() {
            continue;
        }
        let r = normalize(r);
        check(&r, entries.len() + 1)?;
        let sugar = r.iter().map(|(e, _)| deg(e)).max().unwrap_or(0);
        entries.push(Entry { terms: r, sugar, active: true });
        let h = entries.len() - 1;
        update(&mut entries, &mut pairs, h);
    }
    let mut processed = 0usize;
    while !pairs.is_empty() {
        processed += 1;
        if processed > budget.max_pairs {
            return Err(Error::BudgetExhausted(format!("more than {} critical pairs", budget.max_pairs)));
        }
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                pairs[a].sugar.cmp(&pairs[b].sugar).then_with(|| order.cmp(&pairs[a].lcm, &pairs[b].lcm)).then_with(|| (pairs[a].i, pairs[a].j).cmp(&(pairs[b].i, pairs[b].j)))
            })
            .unwrap();
        let p = pairs.swap_remove(best);
        let (fi, fj) = (&entries[p.i].terms, &entries[p.j].terms);
        let mi: Exponents = p.lcm.iter().zip(&fi[0].0).map(|(a, b)| a - b).collect();
        let mj: Exponents = p.lcm.iter().zip(&fj[0].0).map(|(a, b)| a - b).collect();
        let left = sub_mul(&[], &-(F::one() / fi[0].1.clone()), &mi, fi, order);
        let spoly = sub_mul(&left, &(F::one() / fj[0].1.clone()), &mj, fj, order);
        let divisors: Vec<&Terms<F>> = entries.iter().filter(|e| e.active).map(|e| &e.terms).collect();
        let r = reduce_full(spoly, divisors.iter().copied(), order);
        if r.is_empty() {
            continue;
        }
        let r = normalize(r);
        check(&r, entries.iter().filter(|e| e.active).count() + 1)?;
        entries.push(Entry { terms: r, sugar: p.sugar, active: true });
        let h = entries.len() - 1;
        update(&mut entries, &mut pairs, h);
    }
    // Minimal basis, then interreduce.
    let mut minimal: Vec<Terms<F>> = Vec::new();
    let active: Vec<&Terms<F>> = entries.iter().filter(|e| e.active).map(|e| &e.terms).collect();
    for (k, t) in active.iter().enumerate() {
        let redundant = active.iter().enumerate().any(|(k2, u)| {
            k2 != k && divides(&u[0].0, &t[0].0) && (u[0].0 != t[0].0 || k2 < k)
        });
        if !redundant {
            minimal.push((*t).clone());
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let lead = minimal[k][0].clone();
        let tail = minimal[k][1..].to_vec();
        let others = minimal.iter().enumerate().filter(|(k2, _)| *k2 != k).map(|(_, t)| t);
        let mut r = vec![lead];
        r.extend(reduce_full(tail, others, order));
        let lc = r[0].1.clone();
        let monic: Terms<F> = r.into_iter().map(|(e, c)| (e, c / lc.clone())).collect();
        reduced.push(monic);
    }
    reduced.sort_by(|a, b| order.cmp(&b[0].0, &a[0].0));
    Ok(reduced.into_iter().map(|t| from_terms(nvars, t)).collect())
}

/// Whether `basis` (a Gröbner basis under `order`) generates the unit ideal.
pub fn is_unit<F: Field>(basis: &[Polynomial<F>]) -> bool {
    basis.iter().any(|g| !g.is_zero() && g.is_constant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Zp;
    use crate::Rational;
    use num_traits::One;

    type P = Polynomial<Rational>;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn x(n: usize, i: usize) -> P {
        P::var(n, i)
    }

    fn c(n: usize, v: Rational) -> P {
        P::constant(n, v)
    }

    #[test]
    fn single_variable_is_already_reduced() {
        let g = groebner_basis(&[x(1, 0)], TermOrder::Lex, &Budget::default()).unwrap();
        assert_eq!(g, vec![x(1, 0)]);
    }

    #[test]
    fn linear_system_solves_to_half_half() {
        let f1 = &(&x(2, 0) + &x(2, 1)) - &c(2, q(1, 1));
        let f2 = &x(2, 0) - &x(2, 1);
        let g = groebner_basis(&[f1, f2], TermOrder::Lex, &Budget::default()).unwrap();
        assert_eq!(g, vec![&x(2, 0) - &c(2, q(1, 2)), &x(2, 1) - &c(2, q(1, 2))]);
    }

    #[test]
    fn membership_of_xy_minus_one_fails_for_swap_system() {
        let f1 = &x(2, 0).pow(2) - &x(2, 1);
        let f2 = &x(2, 1).pow(2) - &x(2, 0);
        let g = groebner_basis(&[f1.clone(), f2.clone()], TermOrder::Lex, &Budget::default()).unwrap();
        let target = &(&x(2, 0) * &x(2, 1)) - &c(2, Rational::one());
        assert!(!normal_form(&target, &g, TermOrder::Lex).is_zero());
        // generators themselves reduce to zero
        assert!(normal_form(&f1, &g, TermOrder::Lex).is_zero());
        assert!(normal_form(&f2, &g, TermOrder::Lex).is_zero());
        // brute-force division check: the variety is {(0,0)} ∪ {(w, w^2) : w^3 = 1},
        // x*y - 1 is nonzero at the origin so it cannot lie in the ideal.
        assert_eq!(target.eval(&[q(0, 1), q(0, 1)]), -Rational::one());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = &x(2, 0).pow(5) - &x(2, 1);
        let tight = Budget { max_degree: 3, ..Budget::default() };
        assert!(matches!(groebner_basis(&[f], TermOrder::GrevLex, &tight), Err(Error::BudgetExhausted(_))));
    }

    #[test]
    fn runs_over_a_prime_field() {
        type G = Polynomial<Zp<7>>;
        let x0 = G::var(2, 0);
        let x1 = G::var(2, 1);
        // x + y - 1, x - y  =>  x = y = 1/2 = 4 mod 7
        let f1 = &(&x0 + &x1) - &G::one(2);
        let f2 = &x0 - &x1;
        let g = groebner_basis(&[f1, f2], TermOrder::Lex, &Budget::default()).unwrap();
        let four = G::constant(2, Zp::new(4));
        assert_eq!(g, vec![&x0 - &four, &x1 - &four]);
    }

    #[test]
    fn reduced_basis_is_unique_for_different_generators() {
        let a = &x(3, 0) * &x(3, 1);
        let b = &x(3, 1) - &x(3, 2);
        let gens1 = vec![a.clone(), b.clone()];
        let gens2 = vec![&a + &(&b * &x(3, 0)), b.scale(&q(3, 1)), &a - &b];
        for order in [TermOrder::Lex, TermOrder::GrevLex, TermOrder::Block(1)] {
            let g1 = groebner_basis(&gens1, order, &Budget::default()).unwrap();
            let g2 = groebner_basis(&gens2, order, &Budget::default()).unwrap();
            assert_eq!(g1, g2);
        }
    }
}
