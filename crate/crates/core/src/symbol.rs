//! The pairing engine: the 2^n-th Hilbert symbol for principal units of
//! K_n = K(mu_{2^n}), with K unramified over Q_2.
//!
//! The primary route evaluates a residue formula on the window ring: for
//! lifts f, g of the arguments with L = s_Log and Y = s_Y,
//!
//!   [x, y] = -(1 + 2^(n-1)) Tr Res(A w) - 2^n Tr Res(B w)  mod 2^n,
//!
//! where A = Dlog f . L_g - L_f . phi(Dlog g), B = L_f . phi(Y_g) - Y_f . L_g,
//! and w = 1/(pi_0 (1 + pi_n)) is the residue kernel. Two independent
//! routes cross-check it: a cup product of twisted classes fed through the
//! trace map, and (against the torsion generator) a direct logarithm on the
//! cyclotomic layer at raised precision. Precision is certified throughout:
//! a value is reported only when its guard consumption stays strictly under
//! the configured guard, and a single automatic retry at doubled guard
//! covers marginal cases.

use crate::coeff::{CoeffCtx, CoeffElem};
use crate::error::Error;
use crate::knfield::{KnCtx, KnElem};
use crate::series::{Series, SeriesCtx};
use crate::zarith;

/// Default number of guard bits above the n bits that are read out.
pub const DEFAULT_GUARD: u32 = 16;

// ==================================================================
// parameters, certificates, results
// ==================================================================

/// Configuration of one engine instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    /// Degree of the unramified base field K over Q_2, in 1..=8.
    pub d: u32,
    /// Torsion level: symbols land in Z/2^n, n in 2..=6.
    pub n: u32,
    /// Guard bits carried above the reported n, at least 8.
    pub guard: u32,
}

impl Params {
    pub fn new(d: u32, n: u32) -> Params {
        Params {
            d,
            n,
            guard: DEFAULT_GUARD,
        }
    }

    /// Coefficient precision M = n + guard of the main window ring.
    pub fn precision(&self) -> u32 {
        self.n + self.guard
    }

    /// Coefficient precision M' = 2n + guard of the torsion-route layer;
    /// the extra n bits absorb the deliberate division by 2^n there.
    pub fn log_precision(&self) -> u32 {
        2 * self.n + self.guard
    }

    /// The twist character value chi = 5^(2^(n-2)), exact in a u64.
    pub fn chi(&self) -> u64 {
        let mut c = 5u64;
        for _ in 0..self.n.saturating_sub(2) {
            c *= c;
        }
        c
    }

    fn validate(&self) -> Result<(), Error> {
        if self.d == 0 || self.d > 8 {
            return Err(Error::Config(format!(
                "base degree {} out of range 1..=8",
                self.d
            )));
        }
        if self.n < crate::series::MIN_LEVEL || self.n > crate::series::MAX_LEVEL {
            return Err(Error::Config(format!(
                "level {} out of range {}..={}",
                self.n,
                crate::series::MIN_LEVEL,
                crate::series::MAX_LEVEL
            )));
        }
        if self.guard < 8 {
            return Err(Error::Config(format!(
                "guard {} below the minimum of 8",
                self.guard
            )));
        }
        Ok(())
    }
}

/// Precision bookkeeping attached to a reported value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// Guard bits consumed by the least certain read in the computation;
    /// always strictly below the guard of a reported value.
    pub guard_consumed: u32,
    /// Some(true) when two independent routes were compared and agreed;
    /// None when only one route ran.
    pub paths_agreed: Option<bool>,
    /// The guard the reported value was actually computed at (doubled
    /// when the first attempt ran out).
    pub recheck_precision: u32,
}

/// A symbol value mod 2^n together with its certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolValue {
    /// Canonical representative in 0..modulus.
    pub value: u64,
    /// Always 2^n.
    pub modulus: u64,
    pub certificate: Certificate,
}

/// A representative of a class on the twisted line, as consumed by the
/// trace map. Only the residue of rep/(1 + pi_n) ever matters.
#[derive(Clone, Debug)]
pub struct TwistedClass {
    pub rep: Series,
}

// ==================================================================
// scaled scalars
// ==================================================================

/// A 2-adic scalar mantissa/2^scale with mprec certified mantissa bits,
/// the shape in which traces of residues are assembled and read out.
#[derive(Clone, Debug)]
pub struct ScaledScalar {
    m: u32,
    mant: Vec<u64>,
    pub scale: u32,
    pub mprec: u32,
}

impl ScaledScalar {
    pub(crate) fn from_scalar(ctx: &CoeffCtx, e: &CoeffElem, scale: u32, mprec: u32) -> ScaledScalar {
        debug_assert!(ctx.is_scalar(e), "trace output must be a scalar");
        let l = zarith::words(ctx.precision());
        ScaledScalar {
            m: ctx.precision(),
            mant: e.coords[..l].to_vec(),
            scale,
            mprec,
        }
    }

    /// Certified value precision: bits of the value known below the scale.
    pub fn vprec(&self) -> u32 {
        self.mprec.saturating_sub(self.scale)
    }

    pub fn neg(&self) -> ScaledScalar {
        let mut out = self.clone();
        zarith::neg_assign(&mut out.mant, out.m);
        out
    }

    /// Sum, aligning the scales upward; certified bits shrink to the
    /// weaker operand.
    pub fn add(&self, other: &ScaledScalar) -> ScaledScalar {
        debug_assert_eq!(self.m, other.m);
        let scale = self.scale.max(other.scale);
        let lift = |s: &ScaledScalar| {
            let mut mant = s.mant.clone();
            let sh = scale - s.scale;
            zarith::shl(&mut mant, sh, s.m);
            (mant, (s.mprec + sh).min(s.m))
        };
        let (mut mant, p1) = lift(self);
        let (mant2, p2) = lift(other);
        zarith::add_assign(&mut mant, &mant2);
        zarith::mask(&mut mant, self.m);
        ScaledScalar {
            m: self.m,
            mant,
            scale,
            mprec: p1.min(p2),
        }
    }

    /// Multiply by an exact small integer; certified bits are unchanged.
    pub fn mul_small(&self, k: i64) -> ScaledScalar {
        let mut out = self.clone();
        out.mant = zarith::mul(&self.mant, &zarith::from_i64(k, self.m), self.m);
        out
    }

    /// Multiply the value by 2^k: eats scale first, then shifts the
    /// mantissa (which widens the certified value range).
    pub fn mul_pow2(&self, k: u32) -> ScaledScalar {
        let mut out = self.clone();
        let eaten = k.min(out.scale);
        out.scale -= eaten;
        let rem = k - eaten;
        if rem > 0 {
            zarith::shl(&mut out.mant, rem, out.m);
            out.mprec = (out.mprec + rem).min(out.m);
        }
        out
    }

    /// Divide the value by 2^k via the scale.
    pub fn div_pow2(&self, k: u32) -> ScaledScalar {
        let mut out = self.clone();
        out.scale += k;
        out
    }

    /// Multiply by a unit known mod 2^unit_prec.
    pub fn mul_unit(&self, unit: &[u64], unit_prec: u32) -> ScaledScalar {
        let mut out = self.clone();
        out.mant = zarith::mul(&self.mant, unit, self.m);
        out.mprec = self.mprec.min(unit_prec);
        out
    }

    /// True when the value is zero to its full certified precision.
    pub fn is_zero_certified(&self) -> bool {
        match zarith::v2(&self.mant) {
            None => true,
            Some(v) => v >= self.mprec,
        }
    }

    /// The value mod 2^bits plus the guard consumed getting it, or the
    /// reason it cannot be certified. Integrality is checked first: a
    /// certified odd part below the scale is a hard error, never a
    /// precision shortfall. A read succeeds only with at least one spare
    /// certified bit, which keeps guard_consumed strictly under the guard.
    pub fn read_mod(&self, bits: u32, guard: u32) -> Result<(u64, u32), Error> {
        debug_assert!(bits >= 1 && bits <= 63);
        if let Some(v) = zarith::v2(&self.mant) {
            if v < self.scale && v < self.mprec {
                return Err(Error::Integrality(
                    "value has a certified odd part below its scale",
                ));
            }
        }
        let vprec = self.vprec();
        if vprec <= bits {
            return Err(Error::GuardExhausted {
                consumed: guard + bits - vprec,
                guard,
            });
        }
        let mut sh = self.mant.clone();
        zarith::shr_exact(&mut sh, self.scale.min(self.mprec), self.m);
        Ok((zarith::low_bits(&sh, bits), guard.saturating_sub(vprec - bits)))
    }
}

// ==================================================================
// the engine
// ==================================================================

/// Everything needed to pair: the window ring, the cyclotomic layer, and
/// a duplicate cyclotomic layer at raised precision for the torsion route.
#[derive(Clone, Debug)]
pub struct Engine {
    params: Params,
    chi: u64,
    series: SeriesCtx,
    kn: KnCtx,
    log_kn: KnCtx,
    inv_pi0: Series,
}

/// The window-ring data attached to one lift f: its s_Log, its logarithmic
/// derivative D(f)/f, and its s_Y solution of (phi - 1)Y = s_Log/2.
struct UnitData {
    lf: Series,
    dlog: Series,
    y: Series,
}

/// Cached per-unit window data, for batch computations that pair the same
/// unit many times (tables, property suites). Opaque: valid only with the
/// engine that produced it.
pub struct PreparedUnit {
    data: UnitData,
}

impl Engine {
    pub fn new(params: Params) -> Result<Engine, Error> {
        params.validate()?;
        let m = params.precision();
        let series = SeriesCtx::new(CoeffCtx::new(params.d, m)?, params.n)?;
        let kn = KnCtx::new(CoeffCtx::new(params.d, m)?, params.n)?;
        let log_kn = KnCtx::new(CoeffCtx::new(params.d, params.log_precision())?, params.n)?;
        // 1/pi_0 = w (1 + pi_n), reusing the kernel's cached inversion
        let one_plus = series.poly(&[(0, 1), (1, 1)]);
        let inv_pi0 = series.mul(series.wker(), &one_plus)?;
        Ok(Engine {
            chi: params.chi(),
            params,
            series,
            kn,
            log_kn,
            inv_pi0,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// The window ring of the main route.
    pub fn series(&self) -> &SeriesCtx {
        &self.series
    }

    /// The cyclotomic layer arguments live on.
    pub fn kn(&self) -> &KnCtx {
        &self.kn
    }

    /// The raised-precision cyclotomic layer of the torsion route.
    pub fn log_kn(&self) -> &KnCtx {
        &self.log_kn
    }

    pub fn chi(&self) -> u64 {
        self.chi
    }

    pub fn modulus(&self) -> u64 {
        1 << self.params.n
    }

    /// The canonical lift of a principal unit to the window ring.
    pub fn lift(&self, x: &KnElem) -> Result<Series, Error> {
        self.kn.lift_unit(&self.series, x)
    }

    // ==============================================================
    // main route
    // ==============================================================

    fn unit_data_from_lift(&self, f: &Series) -> Result<UnitData, Error> {
        let s = &self.series;
        let lf = s.big_log(f)?;
        // D(f)/f is computed exactly from the polynomial lift; it agrees
        // with D(s_log f) but costs no mantissa bits
        let dlog = s.mul(&s.deriv(f), &s.invert(f)?)?;
        let y = s.y_series(&lf)?;
        Ok(UnitData { lf, dlog, y })
    }

    fn unit_data(&self, x: &KnElem) -> Result<UnitData, Error> {
        self.unit_data_from_lift(&self.lift(x)?)
    }

    fn trace_residue(&self, s: &Series) -> ScaledScalar {
        let r = self.series.residue(s);
        let tr = self.series.coeff().trace(&r.coeff);
        ScaledScalar::from_scalar(self.series.coeff(), &tr, r.scale, r.mprec)
    }

    /// -(1 + 2^(n-1)) Tr Res(A w) - 2^n Tr Res(B w) as a scaled scalar.
    fn main_scalar(&self, fx: &UnitData, gy: &UnitData) -> Result<ScaledScalar, Error> {
        let s = &self.series;
        let a = s.sub(
            &s.mul(&fx.dlog, &gy.lf)?,
            &s.mul(&fx.lf, &s.phi(&gy.dlog)?)?,
        );
        let b = s.sub(
            &s.mul(&fx.lf, &s.phi(&gy.y)?)?,
            &s.mul(&fx.y, &gy.lf)?,
        );
        let t1 = self.trace_residue(&s.mul(&a, s.wker())?);
        let t2 = self.trace_residue(&s.mul(&b, s.wker())?);
        let half = 1i64 << (self.params.n - 1);
        Ok(t1.mul_small(1 + half).add(&t2.mul_pow2(self.params.n)).neg())
    }

    fn report(&self, v: &ScaledScalar, paths_agreed: Option<bool>) -> Result<SymbolValue, Error> {
        let (value, guard_consumed) = v.read_mod(self.params.n, self.params.guard)?;
        Ok(SymbolValue {
            value,
            modulus: self.modulus(),
            certificate: Certificate {
                guard_consumed,
                paths_agreed,
                recheck_precision: self.params.guard,
            },
        })
    }

    fn doubled(&self) -> Result<Engine, Error> {
        Engine::new(Params {
            guard: 2 * self.params.guard,
            ..self.params
        })
    }

    /// Run a computation, retrying once at doubled guard if certification
    /// fails. Zero-extending the arguments into the wider layer leaves the
    /// symbol unchanged: the extension multiplies each argument by a unit
    /// congruent to 1 mod 2^(n + guard), which is a 2^n-th power.
    fn with_retry<F>(&self, x: &KnElem, y: &KnElem, run: F) -> Result<SymbolValue, Error>
    where
        F: Fn(&Engine, &KnElem, &KnElem) -> Result<SymbolValue, Error>,
    {
        match run(self, x, y) {
            Err(Error::GuardExhausted { .. }) => {
                let wide = self.doubled()?;
                run(&wide, &wide.kn.lift_elem(x), &wide.kn.lift_elem(y))
            }
            r => r,
        }
    }

    /// The symbol [x, y] mod 2^n by the main residue formula.
    pub fn hilbert_symbol(&self, x: &KnElem, y: &KnElem) -> Result<SymbolValue, Error> {
        self.with_retry(x, y, |e, a, b| {
            let v = e.main_scalar(&e.unit_data(a)?, &e.unit_data(b)?)?;
            e.report(&v, None)
        })
    }

    /// Precompute one unit's window data for repeated pairing.
    pub fn prepare(&self, x: &KnElem) -> Result<PreparedUnit, Error> {
        Ok(PreparedUnit {
            data: self.unit_data(x)?,
        })
    }

    /// The main-route symbol on prepared units. No retry: precision
    /// problems surface as guard exhaustion for the caller to handle.
    pub fn prepared_symbol(&self, x: &PreparedUnit, y: &PreparedUnit) -> Result<SymbolValue, Error> {
        let v = self.main_scalar(&x.data, &y.data)?;
        self.report(&v, None)
    }

    /// The main residue formula evaluated on caller-supplied lifts; the
    /// symbol must not depend on which lift of a unit is used, as long as
    /// both stay in the valid lift space 1 + pi_n O_K[[pi_n]] (the
    /// Y-construction diverges off it). No retry: the lifts pin the
    /// working precision.
    pub fn symbol_from_lifts(&self, f: &Series, g: &Series) -> Result<SymbolValue, Error> {
        self.check_lift(f)?;
        self.check_lift(g)?;
        let v = self.main_scalar(&self.unit_data_from_lift(f)?, &self.unit_data_from_lift(g)?)?;
        self.report(&v, None)
    }

    fn check_lift(&self, f: &Series) -> Result<(), Error> {
        let s = &self.series;
        let c = self.series.coeff();
        if f.scale() != 0 || f.lo() < 0 || !c.is_zero(&c.sub(&s.coeff_at(f, 0), &c.one())) {
            return Err(Error::Precondition(
                "lift must be a power series with constant term exactly 1".into(),
            ));
        }
        Ok(())
    }

    // ==============================================================
    // cup-product route
    // ==============================================================

    /// The twisted-class components of one unit: m = s_Log f / pi_0 and
    /// n = u Dlog f - (chi - 1) Y_f with u = (chi - 1)/2^n odd, the form
    /// in which the class is integral on the second component.
    fn cup_inputs(&self, ud: &UnitData) -> Result<(Series, Series), Error> {
        let s = &self.series;
        let u = (self.chi - 1) >> self.params.n;
        debug_assert!(u & 1 == 1, "chi - 1 must have 2-adic valuation n");
        let m_part = s.mul(&ud.lf, &self.inv_pi0)?;
        let n_part = s.sub(
            &s.smul_i64(&ud.dlog, u as i64),
            &s.smul_i64(&ud.y, (self.chi - 1) as i64),
        );
        if n_part.scale() != 0 {
            return Err(Error::Internal("second cup component failed to be integral"));
        }
        Ok((m_part, n_part))
    }

    /// Cup product of two twisted classes given by component pairs:
    /// n_1 . chi gamma(m_2) - m_1 . phi(n_2).
    pub fn cup_product(
        &self,
        a: (&Series, &Series),
        b: (&Series, &Series),
    ) -> Result<TwistedClass, Error> {
        let s = &self.series;
        let left = s.mul(a.1, &s.smul_i64(&s.gamma(b.0)?, self.chi as i64))?;
        let right = s.mul(a.0, &s.phi(b.1)?)?;
        Ok(TwistedClass {
            rep: s.sub(&left, &right),
        })
    }

    /// The trace map on twisted classes:
    /// -(2^n / log chi) Tr Res(rep / (1 + pi_n)).
    /// Annihilates coboundaries (1 - phi)b and (chi gamma - 1)b.
    pub fn tr_map(&self, c: &TwistedClass) -> Result<ScaledScalar, Error> {
        let m = self.series.coeff().precision();
        let r = self.trace_residue(&self.series.mul(&c.rep, self.series.inv_one_plus())?);
        let (inv, prec) = self.inv_log_chi_times_2n(m)?;
        Ok(r.mul_unit(&inv, prec).neg())
    }

    /// 2^n / log chi as an exact 2-adic unit: log chi = mant / 2^sc with
    /// v2(mant) = n + sc, so the quotient is 1 / odd(mant >> (n + sc)),
    /// known mod 2^(m - n - sc).
    fn inv_log_chi_times_2n(&self, m: u32) -> Result<(Vec<u64>, u32), Error> {
        let (mut lmant, sc) = zarith::log1p(&zarith::small(self.chi - 1, m), m);
        let shift = self.params.n + sc;
        if shift >= m || zarith::v2(&lmant) != Some(shift) {
            return Err(Error::Internal("character logarithm has the wrong valuation"));
        }
        zarith::shr_exact(&mut lmant, shift, m);
        Ok((zarith::inv_odd(&lmant, m), m - shift))
    }

    fn cup_scalar(&self, fx: &UnitData, gy: &UnitData) -> Result<ScaledScalar, Error> {
        let (m1, n1) = self.cup_inputs(fx)?;
        let (m2, n2) = self.cup_inputs(gy)?;
        let h = self.cup_product((&m1, &n1), (&m2, &n2))?;
        self.tr_map(&h)
    }

    /// The symbol [x, y] mod 2^n by the cup-product route.
    pub fn symbol_via_cup(&self, x: &KnElem, y: &KnElem) -> Result<SymbolValue, Error> {
        self.with_retry(x, y, |e, a, b| {
            let v = e.cup_scalar(&e.unit_data(a)?, &e.unit_data(b)?)?;
            e.report(&v, None)
        })
    }

    /// Both routes on shared lift data; errors with the two values if they
    /// disagree, otherwise certifies agreement.
    pub fn symbol_pair(&self, x: &KnElem, y: &KnElem) -> Result<SymbolValue, Error> {
        self.with_retry(x, y, |e, a, b| {
            let fx = e.unit_data(a)?;
            let gy = e.unit_data(b)?;
            let (n, g) = (e.params.n, e.params.guard);
            let (main, gm) = e.main_scalar(&fx, &gy)?.read_mod(n, g)?;
            let (cup, gc) = e.cup_scalar(&fx, &gy)?.read_mod(n, g)?;
            if main != cup {
                return Err(Error::PathDisagreement { main, cup });
            }
            Ok(SymbolValue {
                value: main,
                modulus: e.modulus(),
                certificate: Certificate {
                    guard_consumed: gm.max(gc),
                    paths_agreed: Some(true),
                    recheck_precision: g,
                },
            })
        })
    }

    // ==============================================================
    // torsion route
    // ==============================================================

    /// The symbol [x, zeta] against the canonical torsion generator, via
    /// the logarithm on the raised-precision cyclotomic layer:
    /// -(1 + 2^(n-1)) Tr(log x) / 2^n mod 2^n.
    pub fn artin_hasse(&self, x: &KnElem) -> Result<SymbolValue, Error> {
        match self.artin_hasse_once(x) {
            Err(Error::GuardExhausted { .. }) => {
                let wide = self.doubled()?;
                wide.artin_hasse_once(&wide.kn.lift_elem(x))
            }
            r => r,
        }
    }

    fn artin_hasse_once(&self, x: &KnElem) -> Result<SymbolValue, Error> {
        let n = self.params.n;
        let lg = self.log_kn.log(&self.log_kn.lift_elem(x))?;
        let t = self.log_kn.trace(&lg.elem);
        let t = ScaledScalar::from_scalar(self.log_kn.coeff(), &t, lg.scale, lg.mprec);
        // the division by 2^n doubles as the integrality check on Tr(log x)
        let v = t.mul_small(1 + (1i64 << (n - 1))).div_pow2(n).neg();
        self.report(&v, None)
    }
}

// ==================================================================
// the character's unit factor
// ==================================================================

/// (chi - 1)/log(chi) mod 2^n for chi = 5^(2^(n-2)), computed from scratch
/// at the given guard. Must equal 1 + 2^(n-1) mod 2^n; a mismatch signals
/// a character or precision bug and is returned as an error.
pub fn chi_unit_factor(n: u32, guard: u32) -> Result<u64, Error> {
    let p = Params { d: 1, n, guard };
    p.validate()?;
    let m = p.precision();
    let chi = p.chi();
    let (mut lmant, sc) = zarith::log1p(&zarith::small(chi - 1, m), m);
    let shift = n + sc;
    if shift >= m || zarith::v2(&lmant) != Some(shift) {
        return Err(Error::Internal("character logarithm has the wrong valuation"));
    }
    zarith::shr_exact(&mut lmant, shift, m);
    // (chi - 1)/log chi = ((chi - 1)/2^n) / odd part of log chi
    let q = zarith::mul(
        &zarith::small((chi - 1) >> n, m),
        &zarith::inv_odd(&lmant, m),
        m,
    );
    let factor = ScaledScalar {
        m,
        mant: q,
        scale: 0,
        mprec: m - shift,
    };
    let (got, _) = factor.read_mod(n, guard)?;
    if got != 1 + (1u64 << (n - 1)) {
        return Err(Error::Internal(
            "unit factor of the character deviates from 1 + 2^(n-1)",
        ));
    }
    Ok(got)
}

// ==================================================================
// tests
// ==================================================================
