//! Toy elliptic-curve group for the ECCHC key agreement.
//!
//! Short Weierstrass curves `y^2 = x^3 + ax + b` over a small prime field, in
//! affine coordinates. The symmetric key only has 32 bits, so the default
//! curve is deliberately desk-sized: it was found by enumerating primes
//! `q >= 2000`, then `a` and `b` upward from 0, and keeping the first
//! nonsingular curve whose point count is a prime `>= 257`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::Mat2;
use crate::{Error, Result};

/// Curve `y^2 = x^3 + ax + b (mod q)` with a generator of prime order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurveParams {
    pub q: u64,
    pub a: u64,
    pub b: u64,
    pub gx: u64,
    pub gy: u64,
    pub order: u64,
}

/// Group element in affine form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum EcPoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl fmt::Display for EcPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EcPoint::Infinity => f.write_str("O"),
            EcPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KeyPair {
    pub private_n: u64,
    pub public_p: EcPoint,
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

impl CurveParams {
    /// `y^2 = x^3 + x + 20` over `F_2003`, 2083 points, `G = (1, 45)`.
    pub const DEMO: CurveParams = CurveParams {
        q: 2003,
        a: 1,
        b: 20,
        gx: 1,
        gy: 45,
        order: 2083,
    };

    pub fn generator(&self) -> EcPoint {
        EcPoint::Affine {
            x: self.gx,
            y: self.gy,
        }
    }

    fn mul_mod(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.q as u128) as u64
    }

    fn add_mod(&self, x: u64, y: u64) -> u64 {
        ((x as u128 + y as u128) % self.q as u128) as u64
    }

    fn sub_mod(&self, x: u64, y: u64) -> u64 {
        self.add_mod(x, self.q - y % self.q)
    }

    fn pow_mod(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_mod(acc, base);
            }
            base = self.mul_mod(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Field inverse by Fermat; `x` must be nonzero mod `q`.
    fn inv_mod(&self, x: u64) -> u64 {
        self.pow_mod(x, self.q - 2)
    }

    /// Right-hand side `x^3 + ax + b`.
    fn rhs(&self, x: u64) -> u64 {
        let x3 = self.mul_mod(self.mul_mod(x, x), x);
        self.add_mod(self.add_mod(x3, self.mul_mod(self.a, x)), self.b)
    }

    pub fn contains(&self, p: &EcPoint) -> bool {
        match *p {
            EcPoint::Infinity => true,
            EcPoint::Affine { x, y } => {
                x < self.q && y < self.q && self.mul_mod(y, y) == self.rhs(x)
            }
        }
    }

    fn check(&self, p: &EcPoint) -> Result<()> {
        match *p {
            EcPoint::Affine { x, y } if !self.contains(p) => Err(Error::PointNotOnCurve { x, y }),
            _ => Ok(()),
        }
    }

    /// Checks nonsingularity, generator membership and generator order.
    /// Primality tests use trial division, so this is only meant for toy sizes.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidCurve(msg.to_string()));
        if !is_prime(self.q) || self.q <= 3 {
            return invalid("q must be a prime greater than 3");
        }
        if self.q > u32::MAX as u64 {
            return invalid("q must fit in 32 bits");
        }
        let disc = self.add_mod(
            4 * self.pow_mod(self.a, 3) % self.q,
            27 * self.mul_mod(self.b, self.b) % self.q,
        );
        if disc == 0 {
            return invalid("curve is singular");
        }
        if !self.contains(&self.generator()) {
            return invalid("generator is not on the curve");
        }
        if !is_prime(self.order) {
            return invalid("group order must be prime");
        }
        if scalar_mul_raw(self.order, &self.generator(), self) != EcPoint::Infinity {
            return invalid("generator order does not match");
        }
        Ok(())
    }

    /// `key=value` lines with decimal integers.
    pub fn to_kv(&self) -> String {
        format!(
            "q={}\na={}\nb={}\ngx={}\ngy={}\norder={}\n",
            self.q, self.a, self.b, self.gx, self.gy, self.order
        )
    }
}

impl FromStr for CurveParams {
    type Err = Error;

    /// Parses the `key=value` format of [`CurveParams::to_kv`]; blank lines
    /// and `#` comments are skipped. The result is validated.
    fn from_str(s: &str) -> Result<CurveParams> {
        let mut fields: [Option<u64>; 6] = [None; 6];
        const NAMES: [&str; 6] = ["q", "a", "b", "gx", "gy", "order"];
        for line in s.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidCurve(format!("expected key=value, got {line:?}")))?;
            let idx = NAMES
                .iter()
                .position(|n| *n == key.trim())
                .ok_or_else(|| Error::InvalidCurve(format!("unknown field {:?}", key.trim())))?;
            let value = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidCurve(format!("bad value for {}", NAMES[idx])))?;
            if fields[idx].replace(value).is_some() {
                return Err(Error::InvalidCurve(format!(
                    "duplicate field {}",
                    NAMES[idx]
                )));
            }
        }
        let get = |i: usize| {
            fields[i].ok_or_else(|| Error::InvalidCurve(format!("missing field {}", NAMES[i])))
        };
        let curve = CurveParams {
            q: get(0)?,
            a: get(1)?,
            b: get(2)?,
            gx: get(3)?,
            gy: get(4)?,
            order: get(5)?,
        };
        curve.validate()?;
        Ok(curve)
    }
}

/// Chord-and-tangent addition.
pub fn point_add(p1: &EcPoint, p2: &EcPoint, curve: &CurveParams) -> Result<EcPoint> {
    curve.check(p1)?;
    curve.check(p2)?;
    Ok(add_unchecked(p1, p2, curve))
}

fn add_unchecked(p1: &EcPoint, p2: &EcPoint, c: &CurveParams) -> EcPoint {
    let (x1, y1, x2, y2) = match (*p1, *p2) {
        (EcPoint::Infinity, p) | (p, EcPoint::Infinity) => return p,
        (EcPoint::Affine { x: x1, y: y1 }, EcPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
    };
    let slope = if x1 == x2 {
        if c.add_mod(y1, y2) == 0 {
            return EcPoint::Infinity;
        }
        // tangent: (3x^2 + a) / 2y
        let num = c.add_mod(c.mul_mod(3, c.mul_mod(x1, x1)), c.a);
        c.mul_mod(num, c.inv_mod(c.mul_mod(2, y1)))
    } else {
        c.mul_mod(c.sub_mod(y2, y1), c.inv_mod(c.sub_mod(x2, x1)))
    };
    let x3 = c.sub_mod(c.sub_mod(c.mul_mod(slope, slope), x1), x2);
    let y3 = c.sub_mod(c.mul_mod(slope, c.sub_mod(x1, x3)), y1);
    EcPoint::Affine { x: x3, y: y3 }
}

pub fn negate(p: &EcPoint, curve: &CurveParams) -> EcPoint {
    match *p {
        EcPoint::Infinity => EcPoint::Infinity,
        EcPoint::Affine { x, y } => EcPoint::Affine {
            x,
            y: curve.sub_mod(0, y),
        },
    }
}

fn scalar_mul_raw(n: u64, p: &EcPoint, curve: &CurveParams) -> EcPoint {
    let mut acc = EcPoint::Infinity;
    for bit in (0..64 - n.leading_zeros()).rev() {
        acc = add_unchecked(&acc, &acc, curve);
        if n >> bit & 1 == 1 {
            acc = add_unchecked(&acc, p, curve);
        }
    }
    acc
}

/// `n * p` by double-and-add, with `n` reduced mod the group order first.
pub fn scalar_mul(n: u64, p: &EcPoint, curve: &CurveParams) -> Result<EcPoint> {
    curve.check(p)?;
    Ok(scalar_mul_raw(n % curve.order, p, curve))
}

/// Draws the private scalar uniformly from `[1, order - 1]` using ChaCha8
/// seeded with `seed`. Zero is excluded so the public key is never infinity.
pub fn keygen(curve: &CurveParams, seed: u64) -> KeyPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let private_n = rng.random_range(1..curve.order);
    KeyPair {
        private_n,
        public_p: scalar_mul_raw(private_n, &curve.generator(), curve),
    }
}

pub fn shared_point(
    my_private: u64,
    their_public: &EcPoint,
    curve: &CurveParams,
) -> Result<EcPoint> {
    if *their_public == EcPoint::Infinity {
        return Err(Error::PublicKeyAtInfinity);
    }
    match scalar_mul(my_private, their_public, curve)? {
        EcPoint::Infinity => Err(Error::DegenerateSharedPoint),
        p => Ok(p),
    }
}

/// Builds the Hill key `K` from the shared point `(x, y)`: row 1 holds the
/// affine coordinates of `xG`, row 2 those of `yG`, each reduced mod 256.
pub fn derive_hill_key(k_i: &EcPoint, curve: &CurveParams) -> Result<Mat2> {
    curve.check(k_i)?;
    let EcPoint::Affine { x, y } = *k_i else {
        return Err(Error::DegenerateSharedPoint);
    };
    let g = curve.generator();
    let row = |s: u64| match scalar_mul_raw(s % curve.order, &g, curve) {
        EcPoint::Affine { x, y } => Ok([(x % 256) as u8, (y % 256) as u8]),
        EcPoint::Infinity => Err(Error::DegenerateDerivedPoint),
    };
    Ok(Mat2([row(x)?, row(y)?]))
}

/// Everything one run of the two-party key agreement produces.
#[derive(Debug, Clone, Serialize)]
pub struct Agreement {
    pub alice: KeyPair,
    pub bob: KeyPair,
    pub shared_alice: EcPoint,
    pub shared_bob: EcPoint,
    pub k_alice: Mat2,
    pub k_bob: Mat2,
}

/// Runs both sides of the agreement. Party A draws from `seed`, party B from
/// `seed + 1` (wrapping).
pub fn agree(curve: &CurveParams, seed: u64) -> Result<Agreement> {
    let alice = keygen(curve, seed);
    let bob = keygen(curve, seed.wrapping_add(1));
    let shared_alice = shared_point(alice.private_n, &bob.public_p, curve)?;
    let shared_bob = shared_point(bob.private_n, &alice.public_p, curve)?;
    Ok(Agreement {
        alice,
        bob,
        shared_alice,
        shared_bob,
        k_alice: derive_hill_key(&shared_alice, curve)?,
        k_bob: derive_hill_key(&shared_bob, curve)?,
    })
}
