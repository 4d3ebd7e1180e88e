//! The coefficient ring W(F_{2^d}) / 2^M.
//!
//! The ring of Witt vectors of F_{2^d} is the valuation ring of the
//! unramified degree-d extension of Q_2. We realize its quotient mod 2^M as
//! Z/2^M [w] / (P(w)) where P is the {0,1}-lift of an irreducible degree-d
//! polynomial over F_2 (any monic lift defines the same ring; the all-{0,1}
//! lift keeps reduction subtraction-only). Structure provided:
//!
//! - ring operations with exact carry arithmetic on flat u64 limbs,
//! - the Frobenius automorphism (the unique lift of x -> x^2 on the residue
//!   field), found by Hensel-lifting the conjugate root of P,
//! - the trace to Z/2^M, precomputed on the power basis,
//! - Teichmuller lifts, inversion of units, and exact division by powers
//!   of 2.
//!
//! Elements carry a (d, M) tag; mixing elements from different rings is a
//! programming error and asserts. Arithmetic failures that depend on the
//! value (inverting a non-unit) return errors instead.

use crate::error::Error;
use crate::zarith;

/// {0,1}-lifts of the usual F_2 minimal polynomials, bit i = coefficient
/// of w^i, for d = 1..=8. Each is irreducible mod 2 (checked at ring
/// construction).
const POLY_BITS: [u32; 8] = [
    0b11,
    0b111,
    0b1011,
    0b10011,
    0b100101,
    0b1011011,
    0b10000011,
    0b100011101,
];

pub const MAX_DEGREE: u32 = 8;
pub const MAX_PRECISION: u32 = 512;

// ======================================================================
// F_2[x] helpers on bitmask polynomials (used for construction checks and
// residue-field inversion)
// ======================================================================

fn f2_deg(a: u32) -> i32 {
    31 - a.leading_zeros() as i32
}

fn f2_reduce(mut a: u32, poly: u32, d: u32) -> u32 {
    while f2_deg(a) >= d as i32 {
        a ^= poly << (f2_deg(a) - d as i32);
    }
    a
}

fn f2_mul(a: u32, b: u32, poly: u32, d: u32) -> u32 {
    let mut acc = 0u32;
    let mut x = a;
    let mut y = b;
    while y != 0 {
        if y & 1 == 1 {
            acc ^= x;
        }
        y >>= 1;
        x <<= 1;
        if (x >> d) & 1 == 1 {
            x ^= poly;
        }
    }
    acc
}

fn f2_pow(mut a: u32, mut e: u64, poly: u32, d: u32) -> u32 {
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = f2_mul(acc, a, poly, d);
        }
        a = f2_mul(a, a, poly, d);
        e >>= 1;
    }
    acc
}

fn f2_gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        while f2_deg(a) >= f2_deg(b) && a != 0 {
            a ^= b << (f2_deg(a) - f2_deg(b));
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Irreducibility over F_2: x^(2^d) = x in the quotient, and x^(2^(d/p))
/// generates no proper subfield for any prime p | d.
fn f2_irreducible(poly: u32, d: u32) -> bool {
    let x = f2_reduce(0b10, poly, d);
    let frob_iter = |k: u32| {
        let mut t = x;
        for _ in 0..k {
            t = f2_mul(t, t, poly, d);
        }
        t
    };
    if frob_iter(d) != x {
        return false;
    }
    for p in [2u32, 3, 5, 7] {
        if d % p == 0 {
            let t = frob_iter(d / p);
            if t == x || f2_deg(f2_gcd(t ^ x, poly)) >= 1 {
                return false;
            }
        }
    }
    true
}

// ======================================================================
// Elements
// ======================================================================

/// An element of W(F_{2^d})/2^M: d coordinates in the power basis
/// 1, w, ..., w^(d-1), each an M-bit residue stored in `l` little-endian
/// limbs, always masked. Carries its (d, M) tag so cross-ring mixing is
/// caught.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoeffElem {
    d: u8,
    m: u16,
    pub(crate) coords: Vec<u64>,
}

/// The ring context: defining polynomial, Frobenius data, trace row.
#[derive(Clone, Debug)]
pub struct CoeffCtx {
    d: u32,
    m: u32,
    l: usize,
    poly: u32,
    /// exponents i < d with a nonzero coefficient in P (reduction support)
    red_bits: Vec<usize>,
    /// sigma(w)^j for j in 0..d, each d*l limbs
    frob_pow: Vec<Vec<u64>>,
    /// Tr(w^j) in Z/2^M for j in 0..d, each l limbs
    trace_row: Vec<Vec<u64>>,
}

impl CoeffCtx {
    pub fn new(d: u32, m: u32) -> Result<CoeffCtx, Error> {
        if d < 1 || d > MAX_DEGREE {
            return Err(Error::Config(format!(
                "residue degree d = {d} out of range 1..={MAX_DEGREE}"
            )));
        }
        if m < 1 || m > MAX_PRECISION {
            return Err(Error::Config(format!(
                "precision M = {m} out of range 1..={MAX_PRECISION}"
            )));
        }
        let poly = POLY_BITS[(d - 1) as usize];
        assert!(f2_irreducible(poly, d), "defining polynomial is reducible");
        let l = zarith::words(m);
        let red_bits = (0..d as usize).filter(|&i| (poly >> i) & 1 == 1).collect();
        let mut ctx = CoeffCtx {
            d,
            m,
            l,
            poly,
            red_bits,
            frob_pow: Vec::new(),
            trace_row: Vec::new(),
        };
        ctx.build_frobenius();
        ctx.build_trace();
        Ok(ctx)
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    pub(crate) fn limbs_per_coord(&self) -> usize {
        self.l
    }

    pub(crate) fn limbs_per_elem(&self) -> usize {
        self.d as usize * self.l
    }

    fn check(&self, a: &CoeffElem) {
        debug_assert!(
            a.d as u32 == self.d && a.m as u32 == self.m,
            "element from a different coefficient ring"
        );
    }

    fn wrap(&self, coords: Vec<u64>) -> CoeffElem {
        debug_assert_eq!(coords.len(), self.limbs_per_elem());
        CoeffElem {
            d: self.d as u8,
            m: self.m as u16,
            coords,
        }
    }

    // ==================================================================
    // constructors
    // ==================================================================

    pub fn zero(&self) -> CoeffElem {
        self.wrap(vec![0u64; self.limbs_per_elem()])
    }

    pub fn one(&self) -> CoeffElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, x: u64) -> CoeffElem {
        let mut coords = vec![0u64; self.limbs_per_elem()];
        coords[0] = x;
        zarith::mask(&mut coords[..self.l], self.m);
        self.wrap(coords)
    }

    pub fn from_i64(&self, x: i64) -> CoeffElem {
        let mut coords = vec![0u64; self.limbs_per_elem()];
        coords[..self.l].copy_from_slice(&zarith::from_i64(x, self.m));
        self.wrap(coords)
    }

    /// The class of a decimal literal (arbitrary length) mod 2^M.
    pub fn from_decimal(&self, s: &str) -> Result<CoeffElem, Error> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Precondition(format!(
                "not a decimal literal: {s:?}"
            )));
        }
        let ten = zarith::small(10, self.m);
        let mut acc = zarith::small(0, self.m);
        for b in s.bytes() {
            acc = zarith::mul(&acc, &ten, self.m);
            zarith::add_assign(&mut acc, &zarith::small((b - b'0') as u64, self.m));
            zarith::mask(&mut acc, self.m);
        }
        let mut coords = vec![0u64; self.limbs_per_elem()];
        coords[..self.l].copy_from_slice(&acc);
        Ok(self.wrap(coords))
    }

    /// The power-basis generator w. Only meaningful for d >= 2.
    pub fn gen(&self) -> CoeffElem {
        assert!(self.d >= 2, "the prime ring Z/2^M has no generator w");
        let mut coords = vec![0u64; self.limbs_per_elem()];
        coords[self.l] = 1;
        self.wrap(coords)
    }

    /// Element from explicit coordinates (low limb of each), for tests and
    /// the oracles.
    pub fn from_coords(&self, c: &[u64]) -> CoeffElem {
        assert!(c.len() <= self.d as usize);
        let mut coords = vec![0u64; self.limbs_per_elem()];
        for (j, &x) in c.iter().enumerate() {
            coords[j * self.l] = x;
            zarith::mask(&mut coords[j * self.l..(j + 1) * self.l], self.m);
        }
        self.wrap(coords)
    }

    // ==================================================================
    // raw kernels on flat coordinate slices (d*l limbs, possibly unmasked)
    // ==================================================================

    pub(crate) fn cmask(&self, a: &mut [u64]) {
        for j in 0..self.d as usize {
            zarith::mask(&mut a[j * self.l..(j + 1) * self.l], self.m);
        }
    }

    pub(crate) fn cadd_assign(&self, a: &mut [u64], b: &[u64]) {
        for j in 0..self.d as usize {
            zarith::add_assign(&mut a[j * self.l..(j + 1) * self.l], &b[j * self.l..(j + 1) * self.l]);
        }
    }

    pub(crate) fn csub_assign(&self, a: &mut [u64], b: &[u64]) {
        for j in 0..self.d as usize {
            zarith::sub_assign(&mut a[j * self.l..(j + 1) * self.l], &b[j * self.l..(j + 1) * self.l]);
        }
    }

    pub(crate) fn cneg_assign(&self, a: &mut [u64]) {
        for j in 0..self.d as usize {
            zarith::neg_assign(&mut a[j * self.l..(j + 1) * self.l], self.m);
        }
    }

    pub(crate) fn cis_zero(&self, a: &[u64]) -> bool {
        zarith::is_zero(a)
    }

    /// Scratch size required by `cmul_acc`.
    pub(crate) fn scratch_len(&self) -> usize {
        (2 * self.d as usize - 1) * self.l
    }

    /// out += a * b in the ring, leaving out unmasked (wrapping limbs are
    /// congruent mod 2^M; callers mask once after accumulation).
    pub(crate) fn cmul_acc(&self, a: &[u64], b: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        let d = self.d as usize;
        let l = self.l;
        if d == 1 {
            zarith::mul_acc(&a[..l], &b[..l], &mut out[..l]);
            return;
        }
        scratch.fill(0);
        for i in 0..d {
            if zarith::is_zero(&a[i * l..(i + 1) * l]) {
                continue;
            }
            for j in 0..d {
                zarith::mul_acc(
                    &a[i * l..(i + 1) * l],
                    &b[j * l..(j + 1) * l],
                    &mut scratch[(i + j) * l..(i + j + 1) * l],
                );
            }
        }
        // reduce by w^d = -(sum of lower support bits of P), highest first
        for k in (d..2 * d - 1).rev() {
            let (lo, hi) = scratch.split_at_mut(k * l);
            let top = &hi[..l];
            if zarith::is_zero(top) {
                continue;
            }
            for &i in &self.red_bits {
                zarith::sub_assign(&mut lo[(k - d + i) * l..(k - d + i + 1) * l], top);
            }
        }
        for j in 0..d {
            zarith::add_assign(&mut out[j * l..(j + 1) * l], &scratch[j * l..(j + 1) * l]);
        }
    }

    /// out += s * a for a scalar s (l limbs) and an element a (d*l limbs);
    /// out left unmasked.
    pub(crate) fn cscalar_mul_acc(&self, s: &[u64], a: &[u64], out: &mut [u64]) {
        for j in 0..self.d as usize {
            zarith::mul_acc(s, &a[j * self.l..(j + 1) * self.l], &mut out[j * self.l..(j + 1) * self.l]);
        }
    }

    /// out = sigma(a), masked. Requires a masked.
    pub(crate) fn cfrobenius(&self, a: &[u64], out: &mut [u64]) {
        let d = self.d as usize;
        let l = self.l;
        if d == 1 {
            out[..l].copy_from_slice(&a[..l]);
            return;
        }
        out.fill(0);
        for j in 0..d {
            let s = &a[j * l..(j + 1) * l];
            if zarith::is_zero(s) {
                continue;
            }
            self.cscalar_mul_acc(s, &self.frob_pow[j], out);
        }
        self.cmask(out);
    }

    /// Tr(a) in Z/2^M (l limbs, masked). Requires a masked.
    pub(crate) fn ctrace(&self, a: &[u64]) -> Vec<u64> {
        let l = self.l;
        let mut acc = vec![0u64; l];
        for j in 0..self.d as usize {
            zarith::mul_acc(&a[j * l..(j + 1) * l], &self.trace_row[j], &mut acc);
        }
        zarith::mask(&mut acc, self.m);
        acc
    }

    /// Minimum 2-adic valuation over the coordinates; None for zero.
    /// Requires a masked.
    pub(crate) fn cv2(&self, a: &[u64]) -> Option<u32> {
        let mut best: Option<u32> = None;
        for j in 0..self.d as usize {
            if let Some(v) = zarith::v2(&a[j * self.l..(j + 1) * self.l]) {
                best = Some(best.map_or(v, |b| b.min(v)));
                if v == 0 {
                    break;
                }
            }
        }
        best
    }

    /// Exact division of every coordinate by 2^k (requires cv2 >= k); the
    /// vacated top bits are zeroed, so the result is canonical for the
    /// M - k bits that remain certified.
    pub(crate) fn cshr_exact(&self, a: &mut [u64], k: u32) {
        for j in 0..self.d as usize {
            zarith::shr_exact(&mut a[j * self.l..(j + 1) * self.l], k, self.m);
        }
    }

    pub(crate) fn cshl(&self, a: &mut [u64], k: u32) {
        for j in 0..self.d as usize {
            zarith::shl(&mut a[j * self.l..(j + 1) * self.l], k, self.m);
        }
    }

    /// Residue mod 2 as an F_2 bitmask (bit j = coordinate j mod 2).
    pub(crate) fn cresidue_bits(&self, a: &[u64]) -> u32 {
        let mut bits = 0u32;
        for j in 0..self.d as usize {
            bits |= ((a[j * self.l] & 1) as u32) << j;
        }
        bits
    }

    // ==================================================================
    // element operations
    // ==================================================================

    pub fn add(&self, a: &CoeffElem, b: &CoeffElem) -> CoeffElem {
        self.check(a);
        self.check(b);
        let mut out = a.clone();
        self.cadd_assign(&mut out.coords, &b.coords);
        self.cmask(&mut out.coords);
        out
    }

    pub fn add_assign(&self, a: &mut CoeffElem, b: &CoeffElem) {
        self.check(a);
        self.check(b);
        self.cadd_assign(&mut a.coords, &b.coords);
        self.cmask(&mut a.coords);
    }

    pub fn sub(&self, a: &CoeffElem, b: &CoeffElem) -> CoeffElem {
        self.check(a);
        self.check(b);
        let mut out = a.clone();
        self.csub_assign(&mut out.coords, &b.coords);
        self.cmask(&mut out.coords);
        out
    }

    pub fn neg(&self, a: &CoeffElem) -> CoeffElem {
        self.check(a);
        let mut out = a.clone();
        self.cneg_assign(&mut out.coords);
        out
    }

    pub fn mul(&self, a: &CoeffElem, b: &CoeffElem) -> CoeffElem {
        self.check(a);
        self.check(b);
        let mut out = vec![0u64; self.limbs_per_elem()];
        let mut scratch = vec![0u64; self.scratch_len()];
        self.cmul_acc(&a.coords, &b.coords, &mut out, &mut scratch);
        self.cmask(&mut out);
        self.wrap(out)
    }

    pub fn pow(&self, a: &CoeffElem, mut e: u64) -> CoeffElem {
        self.check(a);
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &CoeffElem) -> bool {
        self.check(a);
        self.cis_zero(&a.coords)
    }

    /// True when a is a unit (nonzero residue mod 2).
    pub fn is_unit(&self, a: &CoeffElem) -> bool {
        self.check(a);
        self.cresidue_bits(&a.coords) != 0
    }

    /// Inverse of a unit: the residue-field inverse via x^(2^d - 2), then
    /// Newton lifting t <- t(2 - at) doubles the precision each round.
    pub fn inv(&self, a: &CoeffElem) -> Result<CoeffElem, Error> {
        self.check(a);
        let bits = self.cresidue_bits(&a.coords);
        if bits == 0 {
            return Err(Error::NotInvertible);
        }
        let inv_bits = if self.d == 1 {
            1
        } else {
            f2_pow(bits, (1u64 << self.d) - 2, self.poly, self.d)
        };
        let mut t = {
            let mut coords = vec![0u64; self.limbs_per_elem()];
            for j in 0..self.d as usize {
                coords[j * self.l] = ((inv_bits >> j) & 1) as u64;
            }
            self.wrap(coords)
        };
        let two = self.from_u64(2);
        let mut prec = 1u32;
        while prec < self.m {
            let at = self.mul(a, &t);
            t = self.mul(&t, &self.sub(&two, &at));
            prec *= 2;
        }
        debug_assert!(self.mul(a, &t) == self.one());
        Ok(t)
    }

    /// Frobenius sigma, the unique automorphism reducing to x -> x^2.
    pub fn frobenius(&self, a: &CoeffElem) -> CoeffElem {
        self.check(a);
        let mut out = vec![0u64; self.limbs_per_elem()];
        self.cfrobenius(&a.coords, &mut out);
        self.wrap(out)
    }

    /// sigma^k.
    pub fn frobenius_iter(&self, a: &CoeffElem, k: u32) -> CoeffElem {
        let mut out = a.clone();
        for _ in 0..(k % self.d) {
            out = self.frobenius(&out);
        }
        out
    }

    /// Trace to Z/2^M, as a scalar element.
    pub fn trace(&self, a: &CoeffElem) -> CoeffElem {
        self.check(a);
        let row = self.ctrace(&a.coords);
        let mut coords = vec![0u64; self.limbs_per_elem()];
        coords[..self.l].copy_from_slice(&row);
        self.wrap(coords)
    }

    /// Teichmuller lift of the residue of a: the fixed point of x -> x^(2^d)
    /// congruent to a mod 2.
    pub fn teichmuller(&self, a: &CoeffElem) -> CoeffElem {
        self.check(a);
        let mut x = a.clone();
        for _ in 0..self.m + 4 {
            let mut y = x.clone();
            for _ in 0..self.d {
                y = self.mul(&y, &y);
            }
            if y == x {
                return x;
            }
            x = y;
        }
        unreachable!("Teichmuller iteration failed to stabilize");
    }

    /// Minimum 2-adic valuation over coordinates; None for the zero element.
    pub fn v2(&self, a: &CoeffElem) -> Option<u32> {
        self.check(a);
        self.cv2(&a.coords)
    }

    /// Exact division by 2^k. Requires v2(a) >= k.
    pub fn shr_exact(&self, a: &CoeffElem, k: u32) -> CoeffElem {
        self.check(a);
        let mut out = a.clone();
        self.cshr_exact(&mut out.coords, k);
        out
    }

    pub fn shl(&self, a: &CoeffElem, k: u32) -> CoeffElem {
        self.check(a);
        let mut out = a.clone();
        self.cshl(&mut out.coords, k);
        out
    }

    pub fn scalar_mul_i64(&self, a: &CoeffElem, s: i64) -> CoeffElem {
        self.mul(a, &self.from_i64(s))
    }

    /// Low k bits (k <= 64) of coordinate 0. The element must be a scalar
    /// (all higher coordinates zero) when this is used to read a result.
    pub fn low_bits(&self, a: &CoeffElem, k: u32) -> u64 {
        self.check(a);
        zarith::low_bits(&a.coords[..self.l], k)
    }

    /// Low k bits (k <= 64) of the w^i coordinate.
    pub fn coord_bits(&self, a: &CoeffElem, i: usize, k: u32) -> u64 {
        self.check(a);
        assert!(i < self.d as usize);
        zarith::low_bits(&a.coords[i * self.l..(i + 1) * self.l], k)
    }

    /// True when all coordinates above the first vanish.
    pub fn is_scalar(&self, a: &CoeffElem) -> bool {
        self.check(a);
        a.coords[self.l..].iter().all(|&w| w == 0)
    }

    // ==================================================================
    // construction of Frobenius and trace data
    // ==================================================================

    fn eval_poly_and_deriv(&self, t: &CoeffElem) -> (CoeffElem, CoeffElem) {
        let d = self.d;
        let mut pv = self.zero();
        let mut pd = self.zero();
        let mut tp = self.one();
        // powers t^0 .. t^d, accumulating P(t) and P'(t)
        for i in 0..=d {
            let ci = if i == d { 1 } else { (self.poly >> i) & 1 };
            if ci == 1 {
                self.add_assign(&mut pv, &tp);
            }
            if i + 1 <= d {
                let ci1 = if i + 1 == d { 1 } else { (self.poly >> (i + 1)) & 1 };
                if ci1 == 1 {
                    self.add_assign(&mut pd, &self.scalar_mul_i64(&tp, (i + 1) as i64));
                }
            }
            if i < d {
                tp = self.mul(&tp, t);
            }
        }
        (pv, pd)
    }

    fn build_frobenius(&mut self) {
        if self.d == 1 {
            self.frob_pow = vec![zarith::small(1, self.m)];
            return;
        }
        // Hensel-lift the root of P congruent to w^2 mod 2
        let w = self.gen();
        let mut r = self.mul(&w, &w);
        let mut prec = 1u32;
        while prec < self.m {
            let (pv, pd) = self.eval_poly_and_deriv(&r);
            let q = self.mul(&pv, &self.inv(&pd).expect("P separable mod 2"));
            r = self.sub(&r, &q);
            prec *= 2;
        }
        let (pv, _) = self.eval_poly_and_deriv(&r);
        assert!(self.is_zero(&pv), "Frobenius root failed to converge");
        let mut pows = Vec::with_capacity(self.d as usize);
        let mut tp = self.one();
        for _ in 0..self.d {
            pows.push(tp.coords.clone());
            tp = self.mul(&tp, &r);
        }
        self.frob_pow = pows;
    }

    fn build_trace(&mut self) {
        let mut rows = Vec::with_capacity(self.d as usize);
        let mut basis = self.one();
        for j in 0..self.d {
            // Tr(w^j) = sum of sigma^i(w^j); the sum is a scalar, which
            // doubles as a consistency check on the Frobenius data
            let mut acc = basis.clone();
            let mut e = basis.clone();
            for _ in 1..self.d {
                e = self.frobenius(&e);
                self.add_assign(&mut acc, &e);
            }
            assert!(
                self.is_scalar(&acc),
                "trace of a basis power is not rational"
            );
            rows.push(acc.coords[..self.l].to_vec());
            if j + 1 < self.d {
                basis = self.mul(&basis, &self.gen());
            }
        }
        self.trace_row = rows;
    }
}

impl CoeffElem {
    pub(crate) fn from_raw(d: u8, m: u16, coords: Vec<u64>) -> CoeffElem {
        CoeffElem { d, m, coords }
    }

    /// Coordinate j as balanced signed integer when it fits, for display.
    fn coord_balanced(&self, l: usize, j: usize) -> Option<i128> {
        if self.m as usize > 64 {
            return None;
        }
        let c = self.coords[j * l] as u128;
        let m = self.m as u32;
        let half = 1u128 << (m - 1);
        Some(if c > half {
            c as i128 - (1i128 << m)
        } else {
            c as i128
        })
    }
}

impl std::fmt::Display for CoeffElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = zarith::words(self.m as u32);
        let mut terms: Vec<String> = Vec::new();
        for j in 0..self.d as usize {
            let limbs = &self.coords[j * l..(j + 1) * l];
            if zarith::is_zero(limbs) {
                continue;
            }
            let cs = match self.coord_balanced(l, j) {
                Some(v) => v.to_string(),
                None => {
                    let mut s = String::from("0x");
                    for &w in limbs.iter().rev() {
                        s.push_str(&format!("{w:016x}"));
                    }
                    s
                }
            };
            let t = match j {
                0 => cs,
                1 if cs == "1" => "w".to_string(),
                1 if cs == "-1" => "-w".to_string(),
                1 => format!("{cs}*w"),
                _ if cs == "1" => format!("w^{j}"),
                _ if cs == "-1" => format!("-w^{j}"),
                _ => format!("{cs}*w^{j}"),
            };
            terms.push(t);
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = terms[0].clone();
        for t in &terms[1..] {
            if let Some(rest) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(t);
            }
        }
        write!(f, "{out}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::Lcg;

    fn rand_elem(ctx: &CoeffCtx, g: &mut Lcg) -> CoeffElem {
        let c: Vec<u64> = (0..ctx.degree()).map(|_| g.next()).collect();
        let mut e = ctx.from_coords(&c);
        // widen beyond 64 bits when the ring is wider
        if ctx.precision() > 64 {
            let f = ctx.from_u64(g.next());
            e = ctx.add(&ctx.shl(&ctx.mul(&e, &f), 64), &e);
        }
        e
    }

    #[test]
    fn ring_bounds_are_enforced() {
        assert!(CoeffCtx::new(0, 8).is_err());
        assert!(CoeffCtx::new(9, 8).is_err());
        assert!(CoeffCtx::new(2, 0).is_err());
        assert!(CoeffCtx::new(2, 513).is_err());
        assert!(CoeffCtx::new(8, 512).is_ok());
    }

    #[test]
    fn inverse_of_three_mod_256() {
        let ctx = CoeffCtx::new(1, 8).unwrap();
        let t = ctx.inv(&ctx.from_u64(3)).unwrap();
        assert_eq!(ctx.low_bits(&t, 8), 171);
        assert!(ctx.inv(&ctx.from_u64(6)).is_err());
    }

    #[test]
    fn quadratic_generator_relation() {
        // w^2 = -w - 1 in W(F_4)
        let ctx = CoeffCtx::new(2, 16).unwrap();
        let w = ctx.gen();
        let lhs = ctx.mul(&w, &w);
        let rhs = ctx.sub(&ctx.neg(&w), &ctx.one());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn ring_laws_hold() {
        let mut g = Lcg(101);
        for &(d, m) in &[(1u32, 8u32), (2, 19), (3, 40), (8, 130)] {
            let ctx = CoeffCtx::new(d, m).unwrap();
            for _ in 0..20 {
                let a = rand_elem(&ctx, &mut g);
                let b = rand_elem(&ctx, &mut g);
                let c = rand_elem(&ctx, &mut g);
                assert_eq!(ctx.mul(&a, &b), ctx.mul(&b, &a));
                assert_eq!(
                    ctx.mul(&ctx.mul(&a, &b), &c),
                    ctx.mul(&a, &ctx.mul(&b, &c))
                );
                assert_eq!(
                    ctx.mul(&a, &ctx.add(&b, &c)),
                    ctx.add(&ctx.mul(&a, &b), &ctx.mul(&a, &c))
                );
                assert_eq!(ctx.add(&a, &ctx.neg(&a)), ctx.zero());
                assert_eq!(ctx.mul(&a, &ctx.one()), a);
            }
        }
    }

    #[test]
    fn units_invert_and_roundtrip() {
        let mut g = Lcg(7);
        for &(d, m) in &[(1u32, 8u32), (2, 19), (5, 64), (8, 200)] {
            let ctx = CoeffCtx::new(d, m).unwrap();
            for _ in 0..10 {
                let mut a = rand_elem(&ctx, &mut g);
                if !ctx.is_unit(&a) {
                    ctx.add_assign(&mut a, &ctx.one());
                }
                if !ctx.is_unit(&a) {
                    continue;
                }
                let t = ctx.inv(&a).unwrap();
                assert_eq!(ctx.mul(&a, &t), ctx.one());
            }
        }
    }

    #[test]
    fn frobenius_is_a_ring_automorphism() {
        let mut g = Lcg(23);
        for &(d, m) in &[(2u32, 19u32), (3, 24), (4, 40), (8, 70)] {
            let ctx = CoeffCtx::new(d, m).unwrap();
            for _ in 0..10 {
                let a = rand_elem(&ctx, &mut g);
                let b = rand_elem(&ctx, &mut g);
                assert_eq!(
                    ctx.frobenius(&ctx.mul(&a, &b)),
                    ctx.mul(&ctx.frobenius(&a), &ctx.frobenius(&b))
                );
                assert_eq!(
                    ctx.frobenius(&ctx.add(&a, &b)),
                    ctx.add(&ctx.frobenius(&a), &ctx.frobenius(&b))
                );
                // sigma^d = id
                assert_eq!(ctx.frobenius_iter(&a, d), a);
                // sigma(x) = x^2 mod 2
                let sq = ctx.mul(&a, &a);
                let fr = ctx.frobenius(&a);
                assert_eq!(
                    ctx.v2(&ctx.sub(&sq, &fr)).map_or(true, |v| v >= 1),
                    true
                );
                // trace is Frobenius-invariant
                assert_eq!(ctx.trace(&ctx.frobenius(&a)), ctx.trace(&a));
            }
        }
    }

    #[test]
    fn trace_frozen_values() {
        // d = 2, P = w^2 + w + 1: Tr(1) = 2, Tr(w) = -1
        let ctx = CoeffCtx::new(2, 16).unwrap();
        assert_eq!(ctx.trace(&ctx.one()), ctx.from_u64(2));
        assert_eq!(ctx.trace(&ctx.gen()), ctx.from_i64(-1));
        // d = 3, P = w^3 + w + 1: power sums p1 = 0, p2 = -2, p3 = -3
        // (Newton's identities on e1 = 0, e2 = 1, e3 = -1)
        let ctx3 = CoeffCtx::new(3, 16).unwrap();
        let w = ctx3.gen();
        assert_eq!(ctx3.trace(&ctx3.one()), ctx3.from_u64(3));
        assert_eq!(ctx3.trace(&w), ctx3.from_u64(0));
        assert_eq!(ctx3.trace(&ctx3.mul(&w, &w)), ctx3.from_i64(-2));
        assert_eq!(ctx3.trace(&ctx3.pow(&w, 3)), ctx3.from_i64(-3));
    }

    #[test]
    fn teichmuller_is_a_root_of_unity() {
        let ctx = CoeffCtx::new(2, 24).unwrap();
        let omega = ctx.teichmuller(&ctx.gen());
        assert_ne!(omega, ctx.one());
        assert_eq!(ctx.pow(&omega, 3), ctx.one());
        // congruent to w mod 2
        let diff = ctx.sub(&omega, &ctx.gen());
        assert!(ctx.v2(&diff).map_or(true, |v| v >= 1));
        // Frobenius squares Teichmuller representatives exactly
        assert_eq!(ctx.frobenius(&omega), ctx.mul(&omega, &omega));
        // Teichmuller of 1 and 0 are themselves
        assert_eq!(ctx.teichmuller(&ctx.one()), ctx.one());
        assert_eq!(ctx.teichmuller(&ctx.from_u64(4)), ctx.zero());
    }

    #[test]
    fn valuation_and_exact_shift() {
        let ctx = CoeffCtx::new(2, 20).unwrap();
        let a = ctx.from_coords(&[12, 40]);
        assert_eq!(ctx.v2(&a), Some(2));
        let b = ctx.shr_exact(&a, 2);
        assert_eq!(b, ctx.from_coords(&[3, 10]));
        assert_eq!(ctx.v2(&ctx.zero()), None);
    }

    #[test]
    fn decimal_literals_reduce_mod_2m() {
        let ctx = CoeffCtx::new(1, 10).unwrap();
        assert_eq!(ctx.from_decimal("513").unwrap(), ctx.from_u64(513));
        assert_eq!(
            ctx.from_decimal("18446744073709551617").unwrap(),
            // 2^64 + 1 mod 2^10
            ctx.from_u64(1)
        );
        assert!(ctx.from_decimal("").is_err());
        assert!(ctx.from_decimal("12a").is_err());
    }

    #[test]
    fn display_balanced_polynomials() {
        let ctx = CoeffCtx::new(2, 8).unwrap();
        let e = ctx.sub(&ctx.from_u64(2), &ctx.gen());
        assert_eq!(e.to_string(), "2 - w");
        assert_eq!(ctx.zero().to_string(), "0");
        assert_eq!(ctx.from_i64(-1).to_string(), "-1");
    }
}
