//! Dense univariate polynomials over the rationals (ascending coefficients)
//! and exact rational root finding via Sturm sequences.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::{Integer, Poly, Rational};

pub type Dense = Vec<Rational>;

pub fn trim(mut p: Dense) -> Dense {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn degree(p: &[Rational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn derivative(p: &[Rational]) -> Dense {
    p.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(i.into())).collect()
}

/// Quotient and remainder; `d` must be nonzero.
pub fn div_rem(p: &[Rational], d: &[Rational]) -> (Dense, Dense) {
    let dd = degree(d).expect("division by zero polynomial");
    let mut r = trim(p.to_vec());
    if r.len() <= dd {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - dd];
    let lead = d[dd].clone();
    while let Some(rd) = degree(&r) {
        if rd < dd {
            break;
        }
        let c = &r[rd] / &lead;
        let shift = rd - dd;
        for (i, di) in d.iter().enumerate().take(dd + 1) {
            r[shift + i] -= &c * di;
        }
        q[shift] = c;
        r = trim(r);
    }
    (trim(q), r)
}

pub fn monic(p: &[Rational]) -> Dense {
    match degree(p) {
        Some(d) => p[..=d].iter().map(|c| c / &p[d]).collect(),
        None => Vec::new(),
    }
}

pub fn gcd(a: &[Rational], b: &[Rational]) -> Dense {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

pub fn squarefree(p: &[Rational]) -> Dense {
    let g = gcd(p, &derivative(p));
    monic(&div_rem(p, &g).0)
}

fn eval_int(p: &[Integer], x: &Integer) -> Integer {
    p.iter().rev().fold(Integer::zero(), |acc, c| acc * x + c)
}

fn eval_mod(p: &[u64], x: u64, m: u64) -> u64 {
    p.iter().rev().fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % m as u128) as u64
}

fn is_small_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Integer roots of a monic squarefree integer polynomial: roots modulo a
/// prime at which they are all simple, Hensel-lifted past the Cauchy bound.
fn integer_roots_monic(g: &[Integer]) -> Vec<Integer> {
    let n = g.len() - 1;
    let bound: Integer = g.iter().take(n).map(|c| c.abs()).max().unwrap_or_default() + Integer::one();
    let dg: Vec<Integer> = (1..=n).map(|i| &g[i] * Integer::from(i)).collect();
    for p in (3u64..).filter(|&p| is_small_prime(p)) {
        let pi = Integer::from(p);
        let gp: Vec<u64> = g.iter().map(|c| c.mod_floor(&pi).try_into().unwrap()).collect();
        let dp: Vec<u64> = dg.iter().map(|c| c.mod_floor(&pi).try_into().unwrap()).collect();
        let residues: Vec<u64> = (0..p).filter(|&r| eval_mod(&gp, r, p) == 0).collect();
        if residues.iter().any(|&r| eval_mod(&dp, r, p) == 0) {
            continue;
        }
        let mut out = Vec::new();
        for r0 in residues {
            let mut m = pi.clone();
            let mut r = Integer::from(r0);
            while m <= &bound * 2 {
                m = &m * &m;
                let inv = eval_int(&dg, &r).extended_gcd(&m).x;
                r = (&r - eval_int(g, &r) * inv).mod_floor(&m);
            }
            let c = if &r * 2 > m { &r - &m } else { r };
            if eval_int(g, &c).is_zero() {
                out.push(c);
            }
        }
        return out;
    }
    unreachable!("a squarefree polynomial has simple roots modulo all but finitely many primes")
}

/// All rational roots of `p`, ascending and without repetition.
pub fn rational_roots(p: &[Rational]) -> Vec<Rational> {
    let Some(d) = degree(p) else { return Vec::new() };
    if d == 0 {
        return Vec::new();
    }
    // Scale to integer coefficients; a rational root p/q then has q | lead,
    // so lead * root is an integer root of the monic transform.
    let sf = squarefree(p);
    let den = sf.iter().fold(Integer::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<Integer> = sf.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect();
    let n = ints.len() - 1;
    let lead = ints[n].clone();
    // g(y) = lead^{n-1} f(y / lead) is monic with integer coefficients.
    let g: Vec<Integer> = ints
        .iter()
        .enumerate()
        .map(|(i, c)| if i == n { Integer::one() } else { c * num_traits::pow(lead.clone(), n - 1 - i) })
        .collect();
    let mut roots: Vec<Rational> =
        integer_roots_monic(&g).into_iter().map(|r| Rational::new(r, lead.clone())).collect();
    roots.sort();
    roots.dedup();
    roots
}

/// The polynomial as a dense univariate one in `var`, if no other variable occurs.
pub fn from_poly(p: &Poly, var: usize) -> Option<Dense> {
    let mut out: Dense = Vec::new();
    for (e, c) in p.terms() {
        if e.iter().enumerate().any(|(i, &k)| i != var && k != 0) {
            return None;
        }
        let k = e[var] as usize;
        if out.len() <= k {
            out.resize(k + 1, Rational::zero());
        }
        out[k] = c.clone();
    }
    Some(out)
}

pub fn to_poly(p: &[Rational], nvars: usize, var: usize) -> Poly {
    Poly::from_terms(
        nvars,
        p.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| {
            let mut e = vec![0; nvars];
            e[var] = i as u32;
            (e, c.clone())
        }),
    )
}
