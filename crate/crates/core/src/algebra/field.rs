use super::{is_prime, AlgebraError, Zmod};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest field order [`build_field`] accepts.
pub const DEFAULT_FIELD_LIMIT: u32 = 4096;

/// `GF(p^r)` in polynomial representation.
///
/// An element is stored as the integer `c_0 + c_1 p + ... + c_{r-1} p^{r-1}`
/// of its coefficient vector, which is also the lexicographic order used to
/// pick the modulus polynomial and the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u32,
    r: u32,
    order: u32,
    /// Low-order coefficients `c_0..c_{r-1}` of the monic modulus polynomial.
    modulus: Vec<u32>,
    generator: u32,
    #[serde(skip)]
    exp: Vec<u32>,
    #[serde(skip)]
    log: Vec<u32>,
}

/// A field element tied to the field it lives in.
#[derive(Debug, Clone, Copy)]
pub struct FieldElement<'a> {
    field: &'a FieldSpec,
    repr: u32,
}

pub fn build_field(p: u32, r: u32) -> Result<FieldSpec, AlgebraError> {
    build_field_with_limit(p, r, DEFAULT_FIELD_LIMIT)
}

pub fn build_field_with_limit(p: u32, r: u32, limit: u32) -> Result<FieldSpec, AlgebraError> {
    if !is_prime(p) {
        return Err(AlgebraError::NotPrime(p));
    }
    if r == 0 {
        return Err(AlgebraError::ZeroDegree);
    }
    let order = p
        .checked_pow(r)
        .filter(|&d| d <= limit)
        .ok_or(AlgebraError::OrderLimit { p, r, limit })?;

    let modulus = (0..order)
        .map(|idx| digits(idx, p, r))
        .find(|low| is_irreducible(low, p))
        .expect("an irreducible polynomial of every degree exists");

    let mut spec = FieldSpec {
        p,
        r,
        order,
        modulus,
        generator: 0,
        exp: Vec::new(),
        log: Vec::new(),
    };

    let group = order - 1;
    spec.generator = (1..order)
        .find(|&g| spec.multiplicative_order(g) == group)
        .expect("the multiplicative group of a finite field is cyclic");

    let mut exp = Vec::with_capacity(group as usize);
    let mut log = vec![u32::MAX; order as usize];
    let mut acc = 1u32;
    for e in 0..group {
        exp.push(acc);
        log[acc as usize] = e;
        acc = spec.mul_reference(acc, spec.generator);
    }
    spec.exp = exp;
    spec.log = log;
    Ok(spec)
}

impl FieldSpec {
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Modulus polynomial as low-order coefficients; the `x^r` term is implicit.
    pub fn modulus_coefficients(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> FieldElement<'_> {
        FieldElement {
            field: self,
            repr: self.generator,
        }
    }

    pub fn generator_repr(&self) -> u32 {
        self.generator
    }

    pub fn element(&self, repr: u32) -> Result<FieldElement<'_>, AlgebraError> {
        if repr >= self.order {
            return Err(AlgebraError::OutOfRange {
                value: repr as u64,
                modulus: self.order,
            });
        }
        Ok(FieldElement { field: self, repr })
    }

    /// Element from coefficients `c_0, c_1, ...` (shorter vectors are zero-padded).
    pub fn from_coefficients(&self, coeffs: &[u32]) -> Result<FieldElement<'_>, AlgebraError> {
        if coeffs.len() > self.r as usize {
            return Err(AlgebraError::OutOfRange {
                value: coeffs.len() as u64,
                modulus: self.r,
            });
        }
        let mut repr = 0u32;
        for &c in coeffs.iter().rev() {
            if c >= self.p {
                return Err(AlgebraError::OutOfRange {
                    value: c as u64,
                    modulus: self.p,
                });
            }
            repr = repr * self.p + c;
        }
        self.element(repr)
    }

    pub fn zero(&self) -> FieldElement<'_> {
        FieldElement {
            field: self,
            repr: 0,
        }
    }

    pub fn one(&self) -> FieldElement<'_> {
        FieldElement {
            field: self,
            repr: 1,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement<'_>> {
        (0..self.order).map(move |repr| FieldElement { field: self, repr })
    }

    // Raw representation arithmetic, used on hot enumeration paths.

    #[inline]
    pub fn add_repr(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn neg_repr(&self, a: u32) -> u32 {
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            let c = a % self.p;
            out += ((self.p - c) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn mul_repr(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let group = self.order - 1;
        let e = (self.log[a as usize] + self.log[b as usize]) % group;
        self.exp[e as usize]
    }

    pub fn inv_repr(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let group = self.order - 1;
        let e = (group - self.log[a as usize]) % group;
        Some(self.exp[e as usize])
    }

    /// Discrete log of a nonzero element with respect to the generator.
    #[inline]
    pub fn dlog_repr(&self, a: u32) -> Option<u32> {
        (a != 0 && a < self.order).then(|| self.log[a as usize])
    }

    /// `g^e` for `e` in `Z_{d-1}`.
    #[inline]
    pub fn exp_repr(&self, e: u32) -> u32 {
        self.exp[(e % (self.order - 1)) as usize]
    }

    /// Schoolbook polynomial product reduced by the modulus polynomial.
    ///
    /// Independent of the log tables; construction uses it to build them.
    pub fn mul_reference(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        let r = self.r as usize;
        let a = digits(a, self.p, self.r);
        let b = digits(b, self.p, self.r);
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // x^r = -(c_0 + ... + c_{r-1} x^{r-1})
        for top in (r..prod.len()).rev() {
            let lead = prod[top];
            if lead == 0 {
                continue;
            }
            prod[top] = 0;
            for (k, &c) in self.modulus.iter().enumerate() {
                let idx = top - r + k;
                prod[idx] = (prod[idx] + (p - lead) * c as u64) % p;
            }
        }
        prod[..r]
            .iter()
            .rev()
            .fold(0u32, |acc, &c| acc * self.p + c as u32)
    }

    fn multiplicative_order(&self, g: u32) -> u32 {
        let mut acc = g;
        let mut n = 1;
        while acc != 1 {
            acc = self.mul_reference(acc, g);
            n += 1;
            if n > self.order {
                return 0;
            }
        }
        n
    }

    pub fn format_repr(&self, repr: u32) -> String {
        if self.r == 1 {
            return repr.to_string();
        }
        let coeffs = digits(repr, self.p, self.r);
        let mut terms = Vec::new();
        for (i, &c) in coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            terms.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            });
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }
}

impl<'a> FieldElement<'a> {
    pub fn repr(self) -> u32 {
        self.repr
    }

    pub fn field(self) -> &'a FieldSpec {
        self.field
    }

    pub fn coefficients(self) -> Vec<u32> {
        digits(self.repr, self.field.p, self.field.r)
    }

    pub fn is_zero(self) -> bool {
        self.repr == 0
    }

    fn check_same(self, other: Self) -> Result<(), AlgebraError> {
        if std::ptr::eq(self.field, other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(AlgebraError::FieldMismatch {
                lhs: self.field.order,
                rhs: other.field.order,
            })
        }
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr && self.check_same(*other).is_ok()
    }
}

impl Eq for FieldElement<'_> {}

impl fmt::Display for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format_repr(self.repr))
    }
}

pub fn field_add<'a>(
    a: FieldElement<'a>,
    b: FieldElement<'a>,
) -> Result<FieldElement<'a>, AlgebraError> {
    a.check_same(b)?;
    Ok(FieldElement {
        field: a.field,
        repr: a.field.add_repr(a.repr, b.repr),
    })
}

pub fn field_mul<'a>(
    a: FieldElement<'a>,
    b: FieldElement<'a>,
) -> Result<FieldElement<'a>, AlgebraError> {
    a.check_same(b)?;
    Ok(FieldElement {
        field: a.field,
        repr: a.field.mul_repr(a.repr, b.repr),
    })
}

pub fn field_neg(a: FieldElement<'_>) -> FieldElement<'_> {
    FieldElement {
        field: a.field,
        repr: a.field.neg_repr(a.repr),
    }
}

pub fn field_inv(a: FieldElement<'_>) -> Result<FieldElement<'_>, AlgebraError> {
    let repr = a.field.inv_repr(a.repr).ok_or(AlgebraError::ZeroElement)?;
    Ok(FieldElement {
        field: a.field,
        repr,
    })
}

/// The isomorphism `F_d^x -> Z_{d-1}` fixed by the field's generator.
pub fn dlog(field: &FieldSpec, u: FieldElement<'_>) -> Result<Zmod, AlgebraError> {
    if !std::ptr::eq(field, u.field) && field != u.field {
        return Err(AlgebraError::FieldMismatch {
            lhs: field.order,
            rhs: u.field.order,
        });
    }
    let e = field.dlog_repr(u.repr).ok_or(AlgebraError::ZeroElement)?;
    // Z_1 has no Zmod representation; GF(2) reports its only exponent, 0, in Z_2.
    Zmod::new(e, (field.order - 1).max(2))
}

pub fn dlog_inverse(field: &FieldSpec, e: Zmod) -> Result<FieldElement<'_>, AlgebraError> {
    let group = field.order - 1;
    if e.value() >= group.max(1) {
        return Err(AlgebraError::OutOfRange {
            value: e.value() as u64,
            modulus: group,
        });
    }
    Ok(FieldElement {
        field,
        repr: field.exp_repr(e.value()),
    })
}

/// `1(w)`: 1 for nonzero `w`, 0 otherwise.
pub fn indicator(w: FieldElement<'_>) -> u32 {
    u32::from(!w.is_zero())
}

fn digits(mut n: u32, p: u32, r: u32) -> Vec<u32> {
    (0..r)
        .map(|_| {
            let c = n % p;
            n /= p;
            c
        })
        .collect()
}

/// Monic polynomial with low coefficients `low` has no monic factor of
/// degree `1..=deg/2`.
fn is_irreducible(low: &[u32], p: u32) -> bool {
    let deg = low.len();
    if deg == 1 {
        return true;
    }
    let mut f: Vec<u32> = low.to_vec();
    f.push(1);
    for fdeg in 1..=deg / 2 {
        let count = p.pow(fdeg as u32);
        for idx in 0..count {
            let mut g = digits(idx, p, fdeg as u32);
            g.push(1);
            if poly_rem_is_zero(&f, &g, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(f: &[u32], g: &[u32], p: u32) -> bool {
    // g is monic
    let mut rem: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let gdeg = g.len() - 1;
    let p = p as u64;
    for top in (gdeg..rem.len()).rev() {
        let lead = rem[top];
        if lead == 0 {
            continue;
        }
        for (k, &c) in g.iter().enumerate() {
            let idx = top - gdeg + k;
            rem[idx] = (rem[idx] + (p - lead) * c as u64 % p) % p;
        }
    }
    rem[..gdeg].iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_ORDERS: &[(u32, u32)] = &[
        (2, 1),
        (3, 1),
        (2, 2),
        (5, 1),
        (7, 1),
        (2, 3),
        (3, 2),
        (11, 1),
        (13, 1),
        (2, 4),
        (17, 1),
        (5, 2),
        (3, 3),
        (2, 5),
        (7, 2),
        (2, 6),
    ];

    /// Element orders computed by repeated multiplication mod p.
    fn brute_primitive_root(p: u32) -> u32 {
        (1..p)
            .find(|&g| {
                let mut acc = g;
                let mut n = 1;
                while acc != 1 {
                    acc = acc * g % p;
                    n += 1;
                }
                n == p - 1
            })
            .unwrap()
    }

    #[test]
    fn prime_field_generator_is_smallest_primitive_root() {
        for p in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            let f = build_field(p, 1).unwrap();
            assert_eq!(f.generator_repr(), brute_primitive_root(p), "p={p}");
        }
        assert_eq!(build_field(7, 1).unwrap().generator_repr(), 3);
    }

    #[test]
    fn gf2_group_is_trivial() {
        let f = build_field(2, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.dlog_repr(1), Some(0));
        assert_eq!(dlog(&f, f.one()).unwrap().value(), 0);
        assert_eq!(dlog_inverse(&f, Zmod::new(0, 2).unwrap()).unwrap(), f.one());
    }

    #[test]
    fn gf4_uses_x2_x_1() {
        let f = build_field(2, 2).unwrap();
        assert_eq!(f.modulus_coefficients(), &[1, 1]);
        let x = f.from_coefficients(&[0, 1]).unwrap();
        let prod = field_mul(x, x).unwrap();
        assert_eq!(prod.coefficients(), vec![1, 1]);
        assert_eq!(prod.to_string(), "x+1");
    }

    #[test]
    fn gf8_and_gf9_choices() {
        let f8 = build_field(2, 3).unwrap();
        assert_eq!(f8.modulus_coefficients(), &[1, 1, 0]); // x^3 + x + 1
        let f9 = build_field(3, 2).unwrap();
        assert_eq!(f9.modulus_coefficients(), &[1, 0]); // x^2 + 1
        // x has order 4 under x^2 + 1, so the smallest generator is x + 1
        assert_eq!(f9.generator().coefficients(), vec![1, 1]);
    }

    #[test]
    fn small_arithmetic_examples() {
        let f3 = build_field(3, 1).unwrap();
        let two = f3.element(2).unwrap();
        assert_eq!(field_mul(two, two).unwrap().repr(), 1);
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(field_inv(f7.element(3).unwrap()).unwrap().repr(), 5);
        assert_eq!(field_inv(f7.zero()), Err(AlgebraError::ZeroElement));
        assert_eq!(field_neg(f7.element(3).unwrap()).repr(), 4);
    }

    #[test]
    fn dlog_examples() {
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(dlog(&f7, f7.element(1).unwrap()).unwrap().value(), 0);
        assert_eq!(dlog(&f7, f7.element(2).unwrap()).unwrap().value(), 2);
        assert_eq!(
            dlog(&f7, f7.zero()).unwrap_err(),
            AlgebraError::ZeroElement
        );
        let f5 = build_field(5, 1).unwrap();
        assert_eq!(f5.generator_repr(), 2);
        assert_eq!(dlog(&f5, f5.element(4).unwrap()).unwrap().value(), 2);

        let e = |v| Zmod::new(v, 6).unwrap();
        assert_eq!(dlog_inverse(&f7, e(0)).unwrap().repr(), 1);
        assert_eq!(dlog_inverse(&f7, e(1)).unwrap().repr(), 3);
        assert_eq!(
            dlog_inverse(&f5, Zmod::new(3, 4).unwrap()).unwrap().repr(),
            3
        );
        assert!(dlog_inverse(&f5, Zmod::new(4, 5).unwrap()).is_err());
    }

    #[test]
    fn indicator_examples() {
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(indicator(f7.zero()), 0);
        assert_eq!(indicator(f7.element(5).unwrap()), 1);
        let f4 = build_field(2, 2).unwrap();
        assert_eq!(indicator(f4.from_coefficients(&[1, 1]).unwrap()), 1);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(build_field(6, 1), Err(AlgebraError::NotPrime(6)));
        assert_eq!(build_field(3, 0), Err(AlgebraError::ZeroDegree));
        assert!(matches!(
            build_field(2, 13),
            Err(AlgebraError::OrderLimit { .. })
        ));
        assert!(build_field_with_limit(2, 13, 1 << 13).is_ok());
    }

    #[test]
    fn mixing_fields_is_rejected() {
        let f5 = build_field(5, 1).unwrap();
        let f7 = build_field(7, 1).unwrap();
        let err = field_add(f5.one(), f7.one()).unwrap_err();
        assert_eq!(err, AlgebraError::FieldMismatch { lhs: 5, rhs: 7 });
        assert!(dlog(&f5, f7.one()).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        for &(p, r) in SMALL_ORDERS {
            let a = build_field(p, r).unwrap();
            let b = build_field(p, r).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.exp, b.exp);
        }
    }

    #[test]
    fn modulus_has_no_roots_in_base_field() {
        for &(p, r) in SMALL_ORDERS.iter().filter(|(_, r)| *r > 1) {
            let f = build_field(p, r).unwrap();
            let m = f.modulus_coefficients();
            for x in 0..p as u64 {
                let mut v = 1u64; // leading x^r term
                for &c in m.iter().rev() {
                    v = (v * x + c as u64) % p as u64;
                }
                assert_ne!(v, 0, "GF({p}^{r}) modulus has root {x}");
            }
        }
    }

    #[test]
    fn exhaustive_axioms_up_to_order_64() {
        for &(p, r) in SMALL_ORDERS {
            let f = build_field(p, r).unwrap();
            let d = f.order();
            for a in 0..d {
                assert_eq!(f.add_repr(a, f.neg_repr(a)), 0);
                assert_eq!(f.mul_repr(a, 1), a);
                if a != 0 {
                    assert_eq!(f.mul_repr(a, f.inv_repr(a).unwrap()), 1);
                }
                for b in 0..d {
                    assert_eq!(f.mul_repr(a, b), f.mul_reference(a, b));
                    assert_eq!(f.add_repr(a, b), f.add_repr(b, a));
                    assert_eq!(f.mul_repr(a, b), f.mul_repr(b, a));
                    for c in 0..d {
                        assert_eq!(
                            f.add_repr(f.add_repr(a, b), c),
                            f.add_repr(a, f.add_repr(b, c))
                        );
                        assert_eq!(
                            f.mul_repr(f.mul_repr(a, b), c),
                            f.mul_repr(a, f.mul_repr(b, c))
                        );
                        assert_eq!(
                            f.mul_repr(a, f.add_repr(b, c)),
                            f.add_repr(f.mul_repr(a, b), f.mul_repr(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dlog_is_isomorphism_up_to_order_64() {
        for &(p, r) in SMALL_ORDERS {
            let f = build_field(p, r).unwrap();
            let d = f.order();
            let group = d - 1;
            let mut seen = vec![false; group as usize];
            for u in 1..d {
                let lu = f.dlog_repr(u).unwrap();
                assert!(!seen[lu as usize]);
                seen[lu as usize] = true;
                assert_eq!(f.exp_repr(lu), u);
                for v in 1..d {
                    let lv = f.dlog_repr(v).unwrap();
                    assert_eq!((lu + lv) % group, f.dlog_repr(f.mul_repr(u, v)).unwrap());
                }
            }
        }
    }
}
