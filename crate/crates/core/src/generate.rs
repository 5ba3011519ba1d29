//! Seeded random metric specs for property tests and bulk verification.

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::expr::Expr;
use crate::metric::{make_table1, CoordFn, Domain, MetricSpec, Table1Row, PAIRS};
use crate::scalar::q;
use crate::Error;

/// A random multiple of 1/8 in `[-1/2, 1/2]`.
fn small(rng: &mut impl Rng) -> BigRational {
    q(rng.gen_range(-4..=4), 8)
}

fn monomial(i: usize, a: u32, j: usize, b: u32) -> Expr {
    let mut e = Expr::int(1);
    for _ in 0..a {
        e = e.mul(Expr::var(i));
    }
    for _ in 0..b {
        e = e.mul(Expr::var(j));
    }
    e
}

/// Polynomial in `x^i, x^j` of total degree ≤ 3 with no constant term and a
/// guaranteed nonzero `x^i x^j` coefficient.
pub fn random_pair_poly(rng: &mut impl Rng, i: usize, j: usize) -> Expr {
    let mut terms: Vec<Expr> = Vec::new();
    for (a, b) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1), (1, 2), (3, 0), (0, 3)] {
        let mut c = small(rng);
        if (a, b) == (1, 1) && c.is_zero() {
            c = q(1, 4);
        }
        if !c.is_zero() {
            terms.push(Expr::Const(c).mul(monomial(i, a, j, b)));
        }
    }
    terms.into_iter().reduce(Expr::add).unwrap_or_else(Expr::zero)
}

/// One-variable polynomial `c1 x + c2 x² + c3 x³`.
pub fn random_coord_poly(rng: &mut impl Rng, i: usize) -> Expr {
    let coeffs = vec![q(0, 1), small(rng), small(rng), small(rng)];
    Expr::polynomial(i, &coeffs)
}

/// `F_i = ±(2 + c1 x + c2 x²)`, bounded away from zero on `[-1, 1]`.
pub fn random_f(rng: &mut impl Rng, i: usize) -> CoordFn {
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let s = q(sign, 1);
    CoordFn::poly(i, vec![q(2 * sign, 1), small(rng) * &s, small(rng) * &s])
}

/// Random binary metric with polynomial `φ_ij` and `F_i`, `M = 1`, sampled on `[-1, 1]⁴`.
pub fn random_binary_spec(rng: &mut impl Rng, name: &str) -> MetricSpec {
    let phi = std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        random_pair_poly(rng, i, j)
    });
    let f = std::array::from_fn(|i| random_f(rng, i));
    MetricSpec::binary(name, phi, f, Expr::int(1)).expect("generated spec is valid")
}

/// Which row of the `C^k_{ikj} = 0` table to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table1Kind {
    I,
    II,
    III,
    IV,
}

impl Table1Kind {
    pub const ALL: [Table1Kind; 4] = [Table1Kind::I, Table1Kind::II, Table1Kind::III, Table1Kind::IV];

    pub fn name(self) -> &'static str {
        match self {
            Table1Kind::I => "i",
            Table1Kind::II => "ii",
            Table1Kind::III => "iii",
            Table1Kind::IV => "iv",
        }
    }
}

/// Random instance of a table row with `F_i = 1`, `M = 1`.
///
/// Rows i–iii use random cubic one-variable functions on `[-1, 1]⁴`; row iv
/// uses increasing `U_i = x^i + c x³` (`c ≥ 0`) on the ordered chart and a
/// random `m ∈ {−2, −3/2, …, 2}`.
pub fn random_table1(rng: &mut impl Rng, kind: Table1Kind) -> Result<MetricSpec, Error> {
    let one = || std::array::from_fn(|_| CoordFn::constant(q(1, 1)));
    let fns = |rng: &mut _| -> [Expr; 4] { std::array::from_fn(|i| random_coord_poly(rng, i)) };
    let row = match kind {
        Table1Kind::I => Table1Row::I {
            u: fns(rng),
            phi12: random_pair_poly(rng, 0, 1),
            phi34: random_pair_poly(rng, 2, 3),
        },
        Table1Kind::II => Table1Row::II {
            u: fns(rng),
            v: fns(rng),
            q: fns(rng),
            phi12: random_pair_poly(rng, 0, 1),
        },
        Table1Kind::III => Table1Row::III { u: fns(rng), v: fns(rng), q: fns(rng) },
        Table1Kind::IV => {
            let u = std::array::from_fn(|i| {
                let c = q(rng.gen_range(0..=2), 16);
                Expr::polynomial(i, &[q(0, 1), q(1, 1), q(0, 1), c])
            });
            let m = q(rng.gen_range(-4..=4), 2);
            Table1Row::IV { u, m }
        }
    };
    let spec = make_table1(&format!("table1-{}", kind.name()), row, one(), Expr::int(1))?;
    Ok(match kind {
        Table1Kind::IV => spec.with_domain(Domain::ordered_chart()),
        _ => spec,
    })
}
