//! Flat limb arithmetic modulo 2^M.
//!
//! Residues are little-endian `&[u64]` slices of length `words(M)`, always
//! stored masked (bits at and above M are zero). These kernels back both the
//! coefficient ring and the handful of scalar 2-adic computations (odd
//! inversion, the 2-adic logarithm of 1 + u).

/// Number of 64-bit words needed for an M-bit residue.
pub(crate) fn words(m: u32) -> usize {
    (m as usize + 63) / 64
}

/// Mask for the topmost word of an M-bit residue.
pub(crate) fn top_mask(m: u32) -> u64 {
    let r = m % 64;
    if r == 0 {
        u64::MAX
    } else {
        (1u64 << r) - 1
    }
}

/// Reduce a full-width word vector to the canonical masked form.
pub(crate) fn mask(a: &mut [u64], m: u32) {
    let last = a.len() - 1;
    a[last] &= top_mask(m);
}

pub(crate) fn is_zero(a: &[u64]) -> bool {
    a.iter().all(|&w| w == 0)
}

/// a += b modulo 2^(64 len); caller masks.
pub(crate) fn add_assign(a: &mut [u64], b: &[u64]) {
    let mut carry = false;
    for (x, &y) in a.iter_mut().zip(b) {
        let (s1, c1) = x.overflowing_add(y);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        *x = s2;
        carry = c1 || c2;
    }
}

/// a -= b modulo 2^(64 len); caller masks.
pub(crate) fn sub_assign(a: &mut [u64], b: &[u64]) {
    let mut borrow = false;
    for (x, &y) in a.iter_mut().zip(b) {
        let (s1, b1) = x.overflowing_sub(y);
        let (s2, b2) = s1.overflowing_sub(borrow as u64);
        *x = s2;
        borrow = b1 || b2;
    }
}

/// a = -a modulo 2^m.
pub(crate) fn neg_assign(a: &mut [u64], m: u32) {
    let mut carry = true;
    for x in a.iter_mut() {
        let (s, c) = (!*x).overflowing_add(carry as u64);
        *x = s;
        carry = c;
    }
    mask(a, m);
}

/// out += a * b modulo 2^(64 len), schoolbook truncated to len words.
/// Caller masks once accumulation is done.
pub(crate) fn mul_acc(a: &[u64], b: &[u64], out: &mut [u64]) {
    let l = a.len();
    if l == 1 {
        out[0] = out[0].wrapping_add(a[0].wrapping_mul(b[0]));
        return;
    }
    for i in 0..l {
        if a[i] == 0 {
            continue;
        }
        let ai = a[i] as u128;
        let mut carry: u128 = 0;
        for j in 0..l - i {
            let t = out[i + j] as u128 + ai * b[j] as u128 + carry;
            out[i + j] = t as u64;
            carry = t >> 64;
        }
    }
}

/// a * b modulo 2^m into a fresh vector.
pub(crate) fn mul(a: &[u64], b: &[u64], m: u32) -> Vec<u64> {
    let mut out = vec![0u64; a.len()];
    mul_acc(a, b, &mut out);
    mask(&mut out, m);
    out
}

/// 2-adic valuation; None for the zero residue.
pub(crate) fn v2(a: &[u64]) -> Option<u32> {
    for (i, &w) in a.iter().enumerate() {
        if w != 0 {
            return Some(i as u32 * 64 + w.trailing_zeros());
        }
    }
    None
}

/// Exact division by 2^k: shifts right and remasks to m - k valid bits
/// (the vacated top bits are no longer determined and are zeroed for
/// canonical storage). Requires v2(a) >= k when a != 0.
pub(crate) fn shr_exact(a: &mut [u64], k: u32, m: u32) {
    debug_assert!(v2(a).map_or(true, |v| v >= k));
    let l = a.len();
    let wk = (k / 64) as usize;
    let bk = k % 64;
    for i in 0..l {
        let src = i + wk;
        let lo = if src < l { a[src] } else { 0 };
        let hi = if src + 1 < l { a[src + 1] } else { 0 };
        a[i] = if bk == 0 {
            lo
        } else {
            (lo >> bk) | (hi << (64 - bk))
        };
    }
    // zero the now-unknown top bits
    let keep = m.saturating_sub(k);
    let kw = words(keep.max(1));
    for w in a.iter_mut().skip(kw) {
        *w = 0;
    }
    if keep > 0 {
        a[kw - 1] &= top_mask(keep);
    } else {
        a[0] = 0;
    }
}

/// a <<= k modulo 2^m.
pub(crate) fn shl(a: &mut [u64], k: u32, m: u32) {
    let l = a.len();
    if k as usize >= 64 * l {
        a.fill(0);
        return;
    }
    let wk = (k / 64) as usize;
    let bk = k % 64;
    for i in (0..l).rev() {
        let lo = if i >= wk { a[i - wk] } else { 0 };
        let hi = if bk > 0 && i > wk { a[i - wk - 1] } else { 0 };
        a[i] = if bk == 0 { lo } else { (lo << bk) | (hi >> (64 - bk)) };
    }
    mask(a, m);
}

/// Residue from a small unsigned value.
pub(crate) fn small(x: u64, m: u32) -> Vec<u64> {
    let mut out = vec![0u64; words(m)];
    out[0] = x;
    mask(&mut out, m);
    out
}

/// Residue from a signed value.
pub(crate) fn from_i64(x: i64, m: u32) -> Vec<u64> {
    let mut out = vec![x as u64; words(m)];
    if x >= 0 {
        for w in out.iter_mut().skip(1) {
            *w = 0;
        }
    }
    // negative: sign-extended all-ones pattern is already correct mod 2^64k
    mask(&mut out, m);
    out
}

/// a mod 2^k for k <= 64.
pub(crate) fn low_bits(a: &[u64], k: u32) -> u64 {
    debug_assert!(k <= 64);
    if k == 64 {
        a[0]
    } else {
        a[0] & ((1u64 << k) - 1)
    }
}

/// Inverse of an odd residue modulo 2^m, by Newton lifting x <- x(2 - ax).
pub(crate) fn inv_odd(a: &[u64], m: u32) -> Vec<u64> {
    debug_assert!(a[0] & 1 == 1, "inv_odd of an even residue");
    let l = a.len();
    let mut x = small(1, m);
    let mut prec = 1u32;
    while prec < m {
        let ax = mul(a, &x, m);
        let mut t = small(2, m);
        sub_assign(&mut t, &ax);
        mask(&mut t, m);
        x = mul(&x, &t, m);
        prec *= 2;
    }
    debug_assert_eq!(mul(a, &x, m), small(1, m));
    debug_assert_eq!(x.len(), l);
    x
}

/// Binomial coefficients C(x, k) mod 2^m for k = 0..count, via the running
/// product C(x, k) = C(x, k-1) (x - k + 1) / k with the 2-part of each
/// factor tracked separately (the running exponent is v2(C(x, k)) >= 0, so
/// the odd mantissa times 2^exponent is exact mod 2^m).
pub(crate) fn binomial_row(x: u64, count: usize, m: u32) -> Vec<Vec<u64>> {
    let l = words(m);
    let mut out = Vec::with_capacity(count);
    out.push(small(1, m));
    let mut mant = small(1, m);
    let mut e: i64 = 0;
    for k in 1..count as u64 {
        if k > x {
            out.push(vec![0; l]);
            continue;
        }
        let num = x - k + 1;
        let (an, ad) = (num.trailing_zeros(), k.trailing_zeros());
        e += an as i64 - ad as i64;
        debug_assert!(e >= 0, "binomial coefficient with negative valuation");
        mant = mul(&mant, &small(num >> an, m), m);
        mant = mul(&mant, &inv_odd(&small(k >> ad, m), m), m);
        let mut c = mant.clone();
        shl(&mut c, (e as u32).min(m), m);
        out.push(c);
    }
    out.truncate(count);
    out
}

/// 2-adic log(1 + u) for v2(u) >= 2, as (mantissa, scale): the value is
/// mantissa / 2^scale, with the mantissa exact mod 2^m (so the value is
/// determined mod 2^(m - scale)).
pub(crate) fn log1p(u: &[u64], m: u32) -> (Vec<u64>, u32) {
    if is_zero(u) {
        return (vec![0; u.len()], 0);
    }
    debug_assert!(v2(u).unwrap() >= 2);
    let mut acc = vec![0u64; u.len()];
    let mut acc_scale = 0u32;
    let mut upow = u.to_vec();
    let mut j = 1u64;
    while !is_zero(&upow) {
        let tz = j.trailing_zeros();
        let odd = small(j >> tz, m);
        let mut term = mul(&upow, &inv_odd(&odd, m), m);
        if j % 2 == 0 {
            neg_assign(&mut term, m);
        }
        if tz > acc_scale {
            shl(&mut acc, tz - acc_scale, m);
            acc_scale = tz;
        } else if tz < acc_scale {
            shl(&mut term, acc_scale - tz, m);
        }
        add_assign(&mut acc, &term);
        mask(&mut acc, m);
        upow = mul(&upow, u, m);
        j += 1;
        debug_assert!(j <= 4 * m as u64 + 8, "log1p failed to terminate");
    }
    (acc, acc_scale)
}
