//! Multivariate polynomial GCD over the rationals.
//!
//! Monomial factors are split off first, then the remaining cofactors go
//! through a recursive content / primitive-part scheme with a primitive
//! pseudo-remainder sequence in one main variable.

use super::poly::Poly;
use super::Q;
use num_traits::One;

/// Greatest common divisor, normalized to leading coefficient 1 (grevlex).
pub fn poly_gcd(f: &Poly, g: &Poly) -> Poly {
    let n = f.nvars();
    if f.is_zero() {
        return g.monic();
    }
    if g.is_zero() {
        return f.monic();
    }
    if f.is_constant() || g.is_constant() {
        return Poly::one(n);
    }
    let mf = f.min_monomial();
    let mg = g.min_monomial();
    let mon = mf.gcd(&mg);
    let fr = f.div_monomial(&mf);
    let gr = g.div_monomial(&mg);
    let core = gcd_rec(&fr, &gr);
    core.mul_term(&mon, &Q::one()).monic()
}

/// Least common multiple, monic.
pub fn poly_lcm(f: &Poly, g: &Poly) -> Poly {
    if f.is_zero() || g.is_zero() {
        return Poly::zero(f.nvars());
    }
    let g0 = poly_gcd(f, g);
    let q = f.exact_div(&g0).expect("gcd divides its argument");
    (&q * g).monic()
}

fn gcd_rec(f: &Poly, g: &Poly) -> Poly {
    let n = f.nvars();
    if f.is_constant() || g.is_constant() {
        return Poly::one(n);
    }
    if f.monic() == g.monic() {
        return f.monic();
    }
    let vf = f.vars_used();
    let vg = g.vars_used();
    // A variable present in only one argument cannot occur in the gcd.
    if let Some(&v) = vf.iter().find(|v| !vg.contains(v)) {
        return poly_gcd(&content_in(f, v), g);
    }
    if let Some(&v) = vg.iter().find(|v| !vf.contains(v)) {
        return poly_gcd(f, &content_in(g, v));
    }
    let v = *vf
        .iter()
        .min_by_key(|&&v| (f.degree_in(v).max(g.degree_in(v)), v))
        .expect("non-constant polynomial uses a variable");
    let cf = content_in(f, v);
    let cg = content_in(g, v);
    let c = poly_gcd(&cf, &cg);
    let pf = f.exact_div(&cf).expect("content divides");
    let pg = g.exact_div(&cg).expect("content divides");
    let pp = primitive_prs(pf, pg, v);
    (&c * &pp).monic()
}

/// GCD of the coefficients of `f` viewed as a polynomial in `v`.
fn content_in(f: &Poly, v: usize) -> Poly {
    let mut acc = Poly::zero(f.nvars());
    for c in f.coeffs_in(v).iter().rev() {
        if c.is_zero() {
            continue;
        }
        acc = poly_gcd(&acc, c);
        if acc.is_one() {
            break;
        }
    }
    acc
}

fn primitive_part_in(f: &Poly, v: usize) -> Poly {
    let c = content_in(f, v);
    f.exact_div(&c).expect("content divides").primitive_integer()
}

fn primitive_prs(a: Poly, b: Poly, v: usize) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            return primitive_part_in(&b, v);
        }
        if r.degree_in(v) == 0 {
            return Poly::one(a.nvars());
        }
        a = b;
        b = primitive_part_in(&r, v);
    }
}

/// Pseudo-remainder of `a` by `b` in the main variable `v`.
fn pseudo_rem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let n = a.nvars();
    let mut ac = a.coeffs_in(v);
    let bc = b.coeffs_in(v);
    let db = bc.len() - 1;
    let lb = bc[db].clone();
    while ac.len() > db && !ac.is_empty() {
        let da = ac.len() - 1;
        let la = ac[da].clone();
        let shift = da - db;
        for c in ac.iter_mut() {
            *c = &*c * &lb;
        }
        for (j, bj) in bc.iter().enumerate() {
            ac[j + shift] = &ac[j + shift] - &(&la * bj);
        }
        debug_assert!(ac[da].is_zero());
        while ac.last().is_some_and(|c| c.is_zero()) {
            ac.pop();
        }
    }
    Poly::from_coeffs_in(n, v, &ac)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }
    fn c(v: i64) -> Poly {
        Poly::from_int(3, v)
    }

    #[test]
    fn factor_divides() {
        let f = &x(0).pow(2) - &c(1);
        let g = &x(0) - &c(1);
        assert_eq!(poly_gcd(&f, &g), g);
    }

    #[test]
    fn gcd_with_zero_normalizes() {
        let f = &c(3) * &(&x(0) + &x(1));
        assert_eq!(poly_gcd(&f, &Poly::zero(3)), &x(0) + &x(1));
    }

    #[test]
    fn monomial_common_factor() {
        // gcd(x1^2 x2 + x1 x2^2, x1 x2) = x1 x2
        let f = &(&x(0).pow(2) * &x(1)) + &(&x(0) * &x(1).pow(2));
        let g = &x(0) * &x(1);
        let d = poly_gcd(&f, &g);
        assert_eq!(d, g);
        assert!(f.exact_div(&d).is_some());
        assert!(g.exact_div(&d).is_some());
    }

    #[test]
    fn multivariate_common_factor() {
        let common = &(&x(0) * &x(1)) + &(&x(2) + &c(2));
        let f = &common * &(&x(0) - &x(2));
        let g = &common * &(&x(1).pow(2) + &c(1));
        assert_eq!(poly_gcd(&f, &g), common.monic());
        let h = &common * &common;
        assert_eq!(poly_gcd(&h, &f), common.monic());
    }

    #[test]
    fn coprime_gives_one() {
        let f = &x(0) + &x(1);
        let g = &x(0) - &x(1);
        assert!(poly_gcd(&f, &g).is_one());
    }

    #[test]
    fn lcm_of_shared_factor() {
        let f = &x(0) * &x(1);
        let g = &x(1) * &x(2);
        assert_eq!(poly_lcm(&f, &g), &(&x(0) * &x(1)) * &x(2));
    }
}
