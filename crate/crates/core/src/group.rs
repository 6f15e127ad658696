//! Schnorr-group arithmetic: a prime-order-q subgroup of Z_p^*, with all
//! exponent arithmetic in Z_q.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::block::Block32;
use crate::opcount::{self, Op};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("invalid group parameters: {0}")]
    InvalidGroup(&'static str),
    #[error("zero has no inverse mod q")]
    ZeroInverse,
    #[error("value is not below the group order")]
    OutOfRange,
    #[error("value is not a member of the order-q subgroup")]
    NotInSubgroup,
    #[error("encoded element has the wrong width")]
    BadLength,
    #[error("two interpolation points share an abscissa")]
    DuplicateAbscissa,
    #[error("interpolation point at abscissa zero")]
    ZeroAbscissa,
    #[error("no interpolation points")]
    EmptyPoints,
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// p = 23, q = 11, g = 2. Small enough to enumerate.
    Tiny,
    /// 2048-bit p, 256-bit q.
    Full,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Tiny => "tiny",
            Preset::Full => "full",
            Preset::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tiny" => Ok(Preset::Tiny),
            "full" => Ok(Preset::Full),
            other => Err(format!("unknown group preset `{other}` (expected tiny or full)")),
        }
    }
}

const FULL_P: &str = "c92964b1535d1b152fdb1ead9493c1f386ea7871d76e391b770210a7db56f5515b6afaaca6944279ce33715bd15661a5dccb08e646d3dd13186b289e0d724ac0905e3faa22f6e40e5d8a00209bffad585bd5f7d4e3417af047378a73fef505ea7e13332da0fd3321b5e35503cda5676d8452bb49c18e27b650c8f8842a27c4f20e1903ec076d487daccf648c852597a4b9875e2ff714483d8cee4df87fd3ac15a1342b9b0f7ef2ae40e9e2c9d9de0aff9a85b23dd3649576dc7615a820b0cda77cb39775d730f5be052cb5211bff4038779a4e9286a920fd71e50ddf2eee7e99a86be195d207f78a1bc42ee8cb93cdae7b5bcfcc9bf7f36185ae9e4feb8c4f07";
const FULL_Q: &str = "d50c8741449c03a7fa7b9016aea1fc994b6281d1b25cb6ebbdb5eaa51bd41169";
const FULL_G: &str = "aca6bf303b57b8db22c8080187826760c0898e3d32b8b1cadf4fcb900db339f98dab90aaaadf7e3cd83240cd8c4cb5c2a40e2afb1ba7b55d0a3f73db7e9286eb288b5f731a19c19eca8fe3ff128b7d1a3ac43fc64141f7a66ca809ce3f7efc10feded0fb792ce4f8187706649e68a0c9940b79df7493fc28bd170b9f21892dc688a11d937793ee16fac6eaa2e7486994e19e37726590ce2f67a2ae65a3183984d0cf1e411de6d9a98876c8faa248a8e61bd01d1208a7f3a9fbb8248f9340522cdcb8e5f3c187076d715c1772681512726da454ddf0aa6ea51d2a35f24ed6e5929351f66939f69a240a4429954c78130bff6add3ae72443eb2ce0a4b8145ebef7";

/// Window width of the fixed-base table for `g`.
const COMB_BITS: usize = 4;

struct Inner {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    elem_len: usize,
    preset: Preset,
    g_table: OnceLock<Vec<Vec<BigUint>>>,
}

/// Group parameters. Cheap to clone; shared behind an `Arc`.
#[derive(Clone)]
pub struct GroupParams {
    inner: Arc<Inner>,
}

impl PartialEq for GroupParams {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &o.inner)
            || (self.inner.p == o.inner.p && self.inner.q == o.inner.q && self.inner.g == o.inner.g)
    }
}
impl Eq for GroupParams {}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("preset", &self.inner.preset)
            .field("p_bits", &self.inner.p.bits())
            .field("q_bits", &self.inner.q.bits())
            .finish()
    }
}

/// An exponent in Z_q.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(BigUint);

/// A member of the order-q subgroup.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElem(BigUint);

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl GroupElem {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.bits() <= 64 {
            write!(f, "Scalar({})", self.0)
        } else {
            write!(f, "Scalar(0x{}..)", &self.0.to_str_radix(16)[..12])
        }
    }
}

impl fmt::Debug for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.bits() <= 64 {
            write!(f, "GroupElem({})", self.0)
        } else {
            write!(f, "GroupElem(0x{}..)", &self.0.to_str_radix(16)[..12])
        }
    }
}

impl GroupParams {
    pub fn tiny() -> Self {
        Self::build(BigUint::from(23u32), BigUint::from(11u32), BigUint::from(2u32), Preset::Tiny)
    }

    pub fn full() -> Self {
        static FULL: OnceLock<GroupParams> = OnceLock::new();
        FULL.get_or_init(|| {
            let h = |s: &str| BigUint::parse_bytes(s.as_bytes(), 16).expect("valid hex constant");
            Self::build(h(FULL_P), h(FULL_Q), h(FULL_G), Preset::Full)
        })
        .clone()
    }

    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Tiny | Preset::Custom => Self::tiny(),
            Preset::Full => Self::full(),
        }
    }

    /// Validates and wraps caller-supplied parameters.
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, GroupError> {
        if q.bits() > 256 {
            return Err(GroupError::InvalidGroup("q must be below 2^256"));
        }
        if !is_probable_prime(&q, 32) {
            return Err(GroupError::InvalidGroup("q is not prime"));
        }
        if !is_probable_prime(&p, 32) {
            return Err(GroupError::InvalidGroup("p is not prime"));
        }
        let one = BigUint::one();
        if !(&p - &one).is_multiple_of(&q) {
            return Err(GroupError::InvalidGroup("q does not divide p-1"));
        }
        if g <= one || g >= p {
            return Err(GroupError::InvalidGroup("g out of range"));
        }
        if g.modpow(&q, &p) != one {
            return Err(GroupError::InvalidGroup("g does not have order q"));
        }
        let preset = if p == BigUint::from(23u32) && q == BigUint::from(11u32) && g == BigUint::from(2u32) {
            Preset::Tiny
        } else {
            Preset::Custom
        };
        Ok(Self::build(p, q, g, preset))
    }

    fn build(p: BigUint, q: BigUint, g: BigUint, preset: Preset) -> Self {
        let elem_len = (p.bits() as usize).div_ceil(8);
        GroupParams { inner: Arc::new(Inner { p, q, g, elem_len, preset, g_table: OnceLock::new() }) }
    }

    pub fn p(&self) -> &BigUint {
        &self.inner.p
    }
    pub fn q(&self) -> &BigUint {
        &self.inner.q
    }
    pub fn kind(&self) -> Preset {
        self.inner.preset
    }
    /// Width in bytes of an encoded group element.
    pub fn elem_len(&self) -> usize {
        self.inner.elem_len
    }
    /// Whether the subgroup is small enough to enumerate exhaustively.
    pub fn is_tiny(&self) -> bool {
        self.inner.q.bits() <= 16
    }

    pub fn generator(&self) -> GroupElem {
        GroupElem(self.inner.g.clone())
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem(BigUint::one())
    }

    // ---- scalars ----

    /// Reduces any integer into Z_q.
    pub fn scalar(&self, v: impl Into<BigUint>) -> Scalar {
        Scalar(v.into() % &self.inner.q)
    }

    /// Accepts `v` only if already in [0, q).
    pub fn scalar_checked(&self, v: BigUint) -> Result<Scalar, GroupError> {
        if v < self.inner.q {
            Ok(Scalar(v))
        } else {
            Err(GroupError::OutOfRange)
        }
    }

    pub fn scalar_zero(&self) -> Scalar {
        Scalar(BigUint::zero())
    }

    /// Uniform in [1, q).
    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        let mut rng = RngAdapter(rng);
        Scalar(rng.gen_biguint_range(&BigUint::one(), &self.inner.q))
    }

    /// Uniform in [0, q).
    pub fn random_scalar_incl_zero<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        let mut rng = RngAdapter(rng);
        Scalar(rng.gen_biguint_below(&self.inner.q))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.inner.q)
    }

    pub fn scalar_sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let q = &self.inner.q;
        Scalar((&a.0 + q - &b.0) % q)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.inner.q)
    }

    pub fn scalar_neg(&self, a: &Scalar) -> Scalar {
        let q = &self.inner.q;
        Scalar((q - &a.0) % q)
    }

    /// Inverse mod the prime q via Fermat.
    pub fn scalar_inv(&self, x: &Scalar) -> Result<Scalar, GroupError> {
        if x.0.is_zero() {
            return Err(GroupError::ZeroInverse);
        }
        let q = &self.inner.q;
        Ok(Scalar(x.0.modpow(&(q - 2u32), q)))
    }

    /// Interprets the block as a big-endian integer and reduces it mod q.
    pub fn reduce_block(&self, b: &Block32) -> Scalar {
        Scalar(BigUint::from_bytes_be(&b.0) % &self.inner.q)
    }

    // ---- group elements ----

    /// Validates range and subgroup membership. The membership check is a
    /// validation step and is not charged to the operation counters.
    pub fn element(&self, v: BigUint) -> Result<GroupElem, GroupError> {
        if v.is_zero() || v >= self.inner.p {
            return Err(GroupError::NotInSubgroup);
        }
        let ok = opcount::uncounted(|| v.modpow(&self.inner.q, &self.inner.p).is_one());
        if ok {
            Ok(GroupElem(v))
        } else {
            Err(GroupError::NotInSubgroup)
        }
    }

    /// `base^e mod p`. One `T_ME`.
    pub fn mod_exp(&self, base: &GroupElem, e: &Scalar) -> GroupElem {
        opcount::record(Op::ModExp);
        if base.0 == self.inner.g {
            return GroupElem(self.pow_g_raw(&e.0));
        }
        GroupElem(base.0.modpow(&e.0, &self.inner.p))
    }

    /// `g^e mod p`. One `T_ME`.
    pub fn exp_g(&self, e: &Scalar) -> GroupElem {
        opcount::record(Op::ModExp);
        GroupElem(self.pow_g_raw(&e.0))
    }

    /// `a·b mod p`. One `T_MM`.
    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        opcount::record(Op::ModMul);
        GroupElem((&a.0 * &b.0) % &self.inner.p)
    }

    /// Product of all elements; `n − 1` multiplications for `n ≥ 1`, identity
    /// for an empty input.
    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a GroupElem>) -> GroupElem {
        let mut it = items.into_iter();
        let Some(first) = it.next() else {
            return self.identity();
        };
        it.fold(first.clone(), |acc, x| self.mul(&acc, x))
    }

    /// A uniformly random subgroup element (uncounted; used by tests and
    /// adversaries).
    pub fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> GroupElem {
        let e = self.random_scalar(rng);
        opcount::uncounted(|| self.exp_g(&e))
    }

    /// Fixed-width big-endian encoding.
    pub fn encode_elem(&self, x: &GroupElem) -> Vec<u8> {
        let raw = x.0.to_bytes_be();
        let mut out = vec![0u8; self.inner.elem_len];
        out[self.inner.elem_len - raw.len()..].copy_from_slice(&raw);
        out
    }

    pub fn decode_elem(&self, bytes: &[u8]) -> Result<GroupElem, GroupError> {
        if bytes.len() != self.inner.elem_len {
            return Err(GroupError::BadLength);
        }
        self.element(BigUint::from_bytes_be(bytes))
    }

    fn pow_g_raw(&self, e: &BigUint) -> BigUint {
        let p = &self.inner.p;
        if self.inner.q.bits() <= 64 {
            return self.inner.g.modpow(e, p);
        }
        let table = self.inner.g_table.get_or_init(|| self.build_g_table());
        let mut acc = BigUint::one();
        let digits = e.to_radix_le(1 << COMB_BITS);
        for (i, d) in digits.iter().enumerate() {
            if *d != 0 {
                acc = (acc * &table[i][*d as usize - 1]) % p;
            }
        }
        acc
    }

    /// `table[i][d-1] = g^(d · 16^i)` for every window `i` of a q-sized exponent.
    fn build_g_table(&self) -> Vec<Vec<BigUint>> {
        let p = &self.inner.p;
        let windows = (self.inner.q.bits() as usize).div_ceil(COMB_BITS);
        let mut base = self.inner.g.clone();
        let mut table = Vec::with_capacity(windows);
        for _ in 0..windows {
            let mut row = Vec::with_capacity((1 << COMB_BITS) - 1);
            let mut cur = base.clone();
            row.push(cur.clone());
            for _ in 2..(1 << COMB_BITS) {
                cur = (&cur * &base) % p;
                row.push(cur.clone());
            }
            base = (&cur * &base) % p;
            table.push(row);
        }
        table
    }
}

/// Big-endian, left-zero-padded 32-byte encoding of a scalar.
pub fn encode_scalar32(x: &Scalar) -> Block32 {
    let raw = x.0.to_bytes_be();
    let mut b = [0u8; 32];
    if !x.0.is_zero() {
        b[32 - raw.len()..].copy_from_slice(&raw);
    }
    Block32(b)
}

/// Inverse of [`encode_scalar32`]; rejects values `≥ q`.
pub fn decode_scalar32(gp: &GroupParams, b: &Block32) -> Result<Scalar, GroupError> {
    gp.scalar_checked(BigUint::from_bytes_be(&b.0))
}

/// Miller-Rabin with deterministic small bases followed by bases drawn from a
/// fixed-seed generator.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for sp in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
    let n3 = n - 3u32;
    'witness: for i in 0..rounds {
        let a = if i < 4 {
            BigUint::from([2u32, 3, 5, 7][i])
        } else {
            rng.gen_biguint_below(&n3) + &two
        };
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Lets `RandBigInt` run on unsized `RngCore` trait objects.
struct RngAdapter<'a, R: RngCore + ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn tiny() -> GroupParams {
        GroupParams::tiny()
    }

    /// Square-and-multiply on u64, independent of num-bigint.
    fn pow_oracle(mut b: u64, mut e: u64, m: u64) -> u64 {
        let mut r = 1u64;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        r
    }

    #[test]
    fn tiny_mod_exp_vectors() {
        let gp = tiny();
        let g = gp.generator();
        assert_eq!(gp.mod_exp(&g, &gp.scalar(0u32)), gp.identity());
        assert_eq!(gp.mod_exp(&g, &gp.scalar(3u32)).value(), &BigUint::from(pow_oracle(2, 3, 23)));
        // 11 reduces to 0 as a scalar; the raw power is checked separately.
        assert_eq!(BigUint::from(2u32).modpow(&BigUint::from(11u32), gp.p()), BigUint::one());
        for e in 0..11u64 {
            let want = pow_oracle(2, e, 23);
            assert_eq!(gp.exp_g(&gp.scalar(e)).value(), &BigUint::from(want));
        }
    }

    #[test]
    fn tiny_subgroup_is_quadratic_residues() {
        let gp = tiny();
        let members: Vec<u64> = (1..23u64).filter(|v| pow_oracle(*v, 11, 23) == 1).collect();
        assert_eq!(members.len(), 11);
        for v in 1..23u64 {
            assert_eq!(gp.element(BigUint::from(v)).is_ok(), members.contains(&v));
        }
        assert!(gp.element(BigUint::zero()).is_err());
        assert!(gp.element(BigUint::from(23u32)).is_err());
    }

    #[test]
    fn scalar_inverse_exhaustive_mod_11() {
        let gp = tiny();
        assert_eq!(gp.scalar_inv(&gp.scalar(3u32)).unwrap(), gp.scalar(4u32));
        assert_eq!(gp.scalar_inv(&gp.scalar(1u32)).unwrap(), gp.scalar(1u32));
        assert_eq!(gp.scalar_inv(&gp.scalar(0u32)), Err(GroupError::ZeroInverse));
        for x in 1..11u64 {
            let found: Vec<u64> = (1..11).filter(|y| x * y % 11 == 1).collect();
            assert_eq!(found.len(), 1);
            assert_eq!(gp.scalar_inv(&gp.scalar(x)).unwrap(), gp.scalar(found[0]));
        }
    }

    #[test]
    fn full_preset_is_valid() {
        let gp = GroupParams::full();
        assert_eq!(gp.p().bits(), 2048);
        assert_eq!(gp.q().bits(), 256);
        assert_eq!(gp.elem_len(), 256);
        let checked = GroupParams::new(gp.p().clone(), gp.q().clone(), gp.generator().value().clone()).unwrap();
        assert_eq!(checked, gp);
    }

    #[test]
    fn new_rejects_bad_parameters() {
        let b = |v: u32| BigUint::from(v);
        assert!(GroupParams::new(b(23), b(11), b(2)).is_ok());
        assert_eq!(GroupParams::new(b(23), b(11), b(1)).unwrap_err(), GroupError::InvalidGroup("g out of range"));
        // 5 has order 22 mod 23
        assert!(GroupParams::new(b(23), b(11), b(5)).is_err());
        assert!(GroupParams::new(b(23), b(7), b(2)).is_err());
        assert!(GroupParams::new(b(21), b(11), b(2)).is_err());
        assert!(GroupParams::new(b(23), b(9), b(2)).is_err());
    }

    #[test]
    fn fixed_base_matches_modpow() {
        let gp = GroupParams::full();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..8 {
            let e = gp.random_scalar(&mut rng);
            let via_table = gp.exp_g(&e);
            let plain = gp.generator().value().modpow(e.value(), gp.p());
            assert_eq!(via_table.value(), &plain);
        }
        assert_eq!(gp.exp_g(&gp.scalar_zero()), gp.identity());
    }

    #[test]
    fn scalar_encoding_vectors() {
        let gp = tiny();
        let b = encode_scalar32(&gp.scalar(7u32));
        assert!(b.0[..31].iter().all(|&x| x == 0));
        assert_eq!(b.0[31], 7);
        assert_eq!(decode_scalar32(&gp, &b).unwrap(), gp.scalar(7u32));
        assert_eq!(encode_scalar32(&gp.scalar_zero()), Block32::ZERO);
        let mut twelve = Block32::ZERO;
        twelve.0[31] = 12;
        assert_eq!(decode_scalar32(&gp, &twelve), Err(GroupError::OutOfRange));
    }

    #[test]
    fn element_encoding_width() {
        let gp = tiny();
        assert_eq!(gp.elem_len(), 1);
        let e = gp.exp_g(&gp.scalar(5u32));
        assert_eq!(gp.decode_elem(&gp.encode_elem(&e)).unwrap(), e);
        assert_eq!(gp.decode_elem(&[5]), Err(GroupError::NotInSubgroup));
        assert_eq!(gp.decode_elem(&[1, 2]), Err(GroupError::BadLength));
    }

    #[test]
    fn primitive_costs() {
        let gp = tiny();
        let g = gp.generator();
        let (_, c) = opcount::measure(|| {
            let a = gp.exp_g(&gp.scalar(2u32));
            let b = gp.mod_exp(&a, &gp.scalar(3u32));
            gp.product([&a, &b, &g])
        });
        assert_eq!((c.t_me, c.t_mm), (2, 2));
        let (_, c) = opcount::measure(|| gp.element(BigUint::from(4u32)).unwrap());
        assert!(c.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dh_symmetry_tiny(a in 0u64..11, b in 0u64..11) {
            let gp = tiny();
            let (a, b) = (gp.scalar(a), gp.scalar(b));
            let g = gp.generator();
            let ab = gp.mod_exp(&gp.mod_exp(&g, &a), &b);
            let ba = gp.mod_exp(&gp.mod_exp(&g, &b), &a);
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn inverse_and_encoding_roundtrip_full(seed in any::<u64>()) {
            let gp = GroupParams::full();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let x = gp.random_scalar(&mut rng);
            let inv = gp.scalar_inv(&x).unwrap();
            prop_assert_eq!(gp.scalar_mul(&x, &inv), gp.scalar(1u32));
            prop_assert_eq!(gp.scalar_inv(&inv).unwrap(), x.clone());
            prop_assert_eq!(decode_scalar32(&gp, &encode_scalar32(&x)).unwrap(), x);
        }
    }

    #[test]
    fn scalar_field_ops_match_integer_oracle() {
        let gp = tiny();
        for a in 0..11u64 {
            for b in 0..11u64 {
                let (sa, sb) = (gp.scalar(a), gp.scalar(b));
                assert_eq!(gp.scalar_add(&sa, &sb), gp.scalar((a + b) % 11));
                assert_eq!(gp.scalar_sub(&sa, &sb), gp.scalar((a + 11 - b) % 11));
                assert_eq!(gp.scalar_mul(&sa, &sb), gp.scalar(a * b % 11));
            }
            assert_eq!(gp.scalar_neg(&gp.scalar(a)), gp.scalar((11 - a) % 11));
        }
    }

    #[test]
    fn miller_rabin_small_numbers() {
        let sieve: Vec<u32> = (0..500).filter(|n| *n >= 2 && (2..*n).all(|d| n % d != 0)).collect();
        for n in 0..500u32 {
            assert_eq!(is_probable_prime(&BigUint::from(n), 8), sieve.contains(&n), "n = {n}");
        }
        // Carmichael numbers
        for c in [561u32, 1105, 1729, 41041] {
            assert!(!is_probable_prime(&BigUint::from(c), 8));
        }
    }
}
