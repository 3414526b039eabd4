//! Registered test fields with hand-derived first partials.

use crate::complex::Box3;
use crate::error::{FdecError, Result};
use crate::forms::{Component, FormSpec};

/// Names accepted by [`field`].
pub const FIELD_NAMES: [&str; 3] = ["paper-f", "paper-F", "smooth"];

/// Looks up a registered field as a p-form on the unit cube.
pub fn field(name: &str, p: usize) -> Result<FormSpec> {
    match (name, p) {
        ("paper-f", 0) => Ok(paper_f()),
        ("paper-F", 1 | 2) => Ok(paper_big_f(p)),
        ("smooth", 0..=3) => Ok(smooth(p)),
        ("paper-f" | "paper-F" | "smooth", _) => Err(FdecError::InvalidArgument(format!(
            "field '{name}' is not registered as a {p}-form"
        ))),
        _ => Err(FdecError::UnknownField(name.to_string())),
    }
}

/// Scalar test field
/// `f = -8xy²z - 3cos(20(x-½)(y-1)z) + 4(x-½)² + (y-½)²`.
pub fn paper_f() -> FormSpec {
    let u = |p: [f64; 3]| 20.0 * (p[0] - 0.5) * (p[1] - 1.0) * p[2];
    let c = Component::new(move |p| {
        let [x, y, z] = p;
        -8.0 * x * y * y * z - 3.0 * u(p).cos() + 4.0 * (x - 0.5).powi(2) + (y - 0.5).powi(2)
    })
    .with_gradient(
        move |p| {
            let [x, y, z] = p;
            -8.0 * y * y * z + 60.0 * u(p).sin() * (y - 1.0) * z + 8.0 * (x - 0.5)
        },
        move |p| {
            let [x, y, z] = p;
            -16.0 * x * y * z + 60.0 * u(p).sin() * (x - 0.5) * z + 2.0 * (y - 0.5)
        },
        move |p| {
            let [x, y, _] = p;
            -8.0 * x * y * y + 60.0 * u(p).sin() * (x - 0.5) * (y - 1.0)
        },
    );
    FormSpec::new(0, Box3::unit(), vec![c]).expect("one component")
}

/// Vector test field `F` as a 1-form (`F·dr`) or 2-form (`F·dS`).
pub fn paper_big_f(p: usize) -> FormSpec {
    assert!(p == 1 || p == 2, "F is a 1-form or a 2-form");
    let f1 = Component::new(|[x, y, z]: [f64; 3]| {
        y * (5.0 * x * y + z).sin() + 3.0 * (x * z - 0.5).powi(2) - 3.0 * (y - 0.5).powi(2)
    })
    .with_gradient(
        |[x, y, z]| 5.0 * y * y * (5.0 * x * y + z).cos() + 6.0 * z * (x * z - 0.5),
        |[x, y, z]| {
            let a = 5.0 * x * y + z;
            a.sin() + 5.0 * x * y * a.cos() - 6.0 * (y - 0.5)
        },
        |[x, y, z]| y * (5.0 * x * y + z).cos() + 6.0 * x * (x * z - 0.5),
    );
    let f2 = Component::new(|[x, y, z]: [f64; 3]| z * (10.0 * x * y * z).cos() + x * z - y.powi(3))
        .with_gradient(
            |[x, y, z]| -10.0 * y * z * z * (10.0 * x * y * z).sin() + z,
            |[x, y, z]| -10.0 * x * z * z * (10.0 * x * y * z).sin() - 3.0 * y * y,
            |[x, y, z]| {
                let a = 10.0 * x * y * z;
                a.cos() - a * a.sin() + x
            },
        );
    let f3 = Component::new(|[x, y, z]: [f64; 3]| {
        2.0 * (5.0 * x.powi(3) * y).sin() + x * y * (z - 0.25) + (2.0 * x * y * z).cos() - x + y.powi(3) * z
    })
    .with_gradient(
        |[x, y, z]| {
            30.0 * x * x * y * (5.0 * x.powi(3) * y).cos() + y * (z - 0.25) - 2.0 * y * z * (2.0 * x * y * z).sin() - 1.0
        },
        |[x, y, z]| {
            10.0 * x.powi(3) * (5.0 * x.powi(3) * y).cos() + x * (z - 0.25) - 2.0 * x * z * (2.0 * x * y * z).sin()
                + 3.0 * y * y * z
        },
        |[x, y, z]| x * y - 2.0 * x * y * (2.0 * x * y * z).sin() + y.powi(3),
    );
    FormSpec::new(p, Box3::unit(), vec![f1, f2, f3]).expect("three components")
}

type Smooth = fn([f64; 3]) -> [f64; 4];

// value and gradient of the smooth factors multiplying (xyz)^3
const FACTORS: [Smooth; 3] = [
    |[x, y, z]| {
        let e = (0.5 * x - y + 0.3 * z).exp();
        [e, 0.5 * e, -e, 0.3 * e]
    },
    |[x, y, z]| [(x + 2.0 * y).sin() + z, (x + 2.0 * y).cos(), 2.0 * (x + 2.0 * y).cos(), 1.0],
    |[x, y, z]| [(y - z).cos() + x * x, 2.0 * x, -(y - z).sin(), (y - z).sin()],
];

fn vanishing(factor: Smooth) -> Component {
    let w = |[x, y, z]: [f64; 3]| (x * y * z).powi(3);
    let d = move |a: usize| {
        move |p: [f64; 3]| {
            let others: f64 = (0..3).filter(|&b| b != a).map(|b| p[b].powi(3)).product();
            let f = factor(p);
            3.0 * p[a] * p[a] * others * f[0] + w(p) * f[a + 1]
        }
    };
    Component::new(move |p| w(p) * factor(p)[0]).with_gradient(d(0), d(1), d(2))
}

/// Smooth p-form whose components vanish to third order on the lower faces
/// `x = 0`, `y = 0`, `z = 0` of the unit cube.
pub fn smooth(p: usize) -> FormSpec {
    let comps = match p {
        0 | 3 => vec![vanishing(FACTORS[0])],
        _ => FACTORS.iter().map(|f| vanishing(*f)).collect(),
    };
    FormSpec::new(p, Box3::unit(), comps).expect("component count matches degree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::AXES;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_partials(form: &FormSpec, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1e-5;
        for _ in 0..100 {
            let p: [f64; 3] = [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)];
            for c in form.components() {
                for axis in AXES {
                    let a = axis.index();
                    let (mut lo, mut hi) = (p, p);
                    lo[a] -= h;
                    hi[a] += h;
                    let fd = (c.eval(hi) - c.eval(lo)) / (2.0 * h);
                    let an = c.partial(axis).unwrap()(p);
                    let err = (fd - an).abs() / an.abs().max(1.0);
                    assert!(err <= 1e-6, "axis {} at {p:?}: fd {fd} vs {an}", axis.label());
                }
            }
        }
    }

    #[test]
    fn registered_field_partials_match_central_differences() {
        check_partials(&paper_f(), 1);
        check_partials(&paper_big_f(1), 2);
    }

    #[test]
    fn smooth_partials_match_central_differences() {
        for p in 0..4 {
            check_partials(&smooth(p), 10 + p as u64);
        }
    }

    #[test]
    fn field_values_spot_check() {
        use crate::forms::Form;
        let f = paper_f();
        // at (1/2, 1, 0): -0 - 3cos(0) + 0 + 1/4
        assert!((f.component(0, [0.5, 1.0, 0.0]) + 2.75).abs() < 1e-15);
        let big = paper_big_f(1);
        // F at the origin: (3/4 - 3/4, 0, 1)
        assert!(big.component(0, [0.0; 3]).abs() < 1e-15);
        assert_eq!(big.component(1, [0.0; 3]), 0.0);
        assert_eq!(big.component(2, [0.0; 3]), 1.0);
    }

    #[test]
    fn registry() {
        assert_eq!(field("paper-f", 0).unwrap().components().len(), 1);
        assert_eq!(field("paper-F", 2).unwrap().components().len(), 3);
        assert!(matches!(field("paper-f", 1), Err(FdecError::InvalidArgument(_))));
        assert!(matches!(field("nope", 0), Err(FdecError::UnknownField(_))));
    }
}
