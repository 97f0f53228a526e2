use super::{Check, Expectation, Model, ModelRecord, Origin};
use crate::algebra2::Mat2;
use crate::cycles::CycleStability;
use crate::error::{Error, Result};
use crate::expr::{parse, Binding};
use crate::linsys::Classification;
use crate::phase1d::Model1D;
use crate::phase2d::{Domain, Model2D, Sign, SignMat2};

const NAMES: [&str; 20] = [
    "malthus",
    "logistic",
    "logistic_harvest",
    "gene_product",
    "quadratic_flow",
    "cubic_flow",
    "bistable_cubic",
    "ppour",
    "lotka_volterra",
    "lv_symmetric",
    "algae",
    "si_epidemic",
    "mrna_protein",
    "cardiac",
    "holling_tanner",
    "brusselator",
    "compartment",
    "diffusion",
    "harmonic",
    "spruce_budworm",
];

/// Registered by name only: the right-hand side is known from a plot, not
/// a formula.
pub const UNAVAILABLE: [&str; 1] = ["spruce_budworm"];

/// Names accepted by [`builtin_model`], excluding the unavailable ones.
pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    NAMES.into_iter().filter(|n| !UNAVAILABLE.contains(n))
}

fn params(pairs: &[(&str, f64)]) -> Binding {
    pairs.iter().fold(Binding::new(), |b, &(k, v)| b.with(k, v))
}

fn one(name: &str, f: &str, var: &str, p: &[(&str, f64)], interval: (f64, f64)) -> Result<ModelRecord> {
    let m = Model1D::new(parse(f)?, var, params(p), interval)?;
    Ok(ModelRecord { name: name.into(), model: Model::OneD(m), expectations: Vec::new() })
}

fn two(
    name: &str,
    (f, g): (&str, &str),
    vars: (&str, &str),
    p: &[(&str, f64)],
    x: (f64, f64),
    y: (f64, f64),
) -> Result<ModelRecord> {
    let m = Model2D::new(parse(f)?, parse(g)?, vars, params(p), Domain::new(x, y)?)?;
    Ok(ModelRecord { name: name.into(), model: Model::TwoD(m), expectations: Vec::new() })
}

impl ModelRecord {
    fn expect(mut self, label: &str, check: Check, tolerance: f64, origin: Origin) -> Self {
        self.expectations.push(Expectation { label: label.into(), params: Vec::new(), check, tolerance, origin });
        self
    }

    fn expect_at(mut self, label: &str, at: &[(&str, f64)], check: Check, tolerance: f64, origin: Origin) -> Self {
        let params = at.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        self.expectations.push(Expectation { label: label.into(), params, check, tolerance, origin });
        self
    }
}

fn roots(v: &[f64]) -> Check {
    Check::Roots { expected: v.to_vec() }
}

fn attractors(v: &[f64]) -> Check {
    Check::Attractors { expected: v.to_vec() }
}

fn class(point: [f64; 2], expected: Classification) -> Check {
    Check::ClassAt { point, expected }
}

fn cycle(around: [f64; 2], found: bool, stability: Option<CycleStability>) -> Check {
    Check::Cycle { around, found, stability }
}

/// Looks a model up by name, with its default parameters.
pub fn builtin_model(name: &str) -> Result<ModelRecord> {
    use Classification::*;
    use Origin::*;
    use Sign::{Neg, Pos, Zero};
    let r = match name {
        "malthus" => one(name, "k*N", "N", &[("k", 4.0)], (-5.0, 5.0))?
            .expect("roots", roots(&[0.0]), 1e-8, Published)
            .expect("attractors", attractors(&[]), 1e-8, Published),
        "logistic" => one(name, "2*n*(1 - n/3)", "n", &[], (-1.0, 5.0))?
            .expect("roots", roots(&[0.0, 3.0]), 1e-8, Published)
            .expect("attractors", attractors(&[3.0]), 1e-8, Published),
        "logistic_harvest" => one(name, "r*n*(1 - n/k) - h", "n", &[("r", 2.0), ("k", 3.0), ("h", 0.0)], (-1.0, 5.0))?
            .expect(
                "max harvest",
                Check::Fold { param: "h".into(), range: (0.0, 2.0), steps: 200, expected: 1.5 },
                1e-6,
                Published,
            )
            .expect_at(
                "max harvest r=1 k=4",
                &[("r", 1.0), ("k", 4.0)],
                Check::Fold { param: "h".into(), range: (0.0, 2.0), steps: 200, expected: 1.0 },
                1e-6,
                Published,
            ),
        "gene_product" => one(name, "-x*(x - 0.2)*(x - 1) + s", "x", &[("s", 0.0)], (-0.5, 1.5))?
            .expect("roots", roots(&[0.0, 0.2, 1.0]), 1e-8, Derived)
            .expect(
                "switch-off threshold",
                Check::Fold { param: "s".into(), range: (0.0, 0.02), steps: 200, expected: 0.009_027_608_6 },
                1e-6,
                Derived,
            )
            // published to three decimals only
            .expect(
                "switch-off threshold, rounded",
                Check::Fold { param: "s".into(), range: (0.0, 0.02), steps: 200, expected: 0.009 },
                5e-4,
                Published,
            ),
        "quadratic_flow" => one(name, "-15 + 8*x - x^2", "x", &[], (0.0, 10.0))?
            .expect("roots", roots(&[3.0, 5.0]), 1e-8, Published)
            .expect("attractors", attractors(&[5.0]), 1e-8, Published),
        "cubic_flow" => one(name, "-x*(x^2 + x - 6)", "x", &[], (-6.0, 6.0))?
            .expect("roots", roots(&[-3.0, 0.0, 2.0]), 1e-8, Published)
            .expect("attractors", attractors(&[-3.0, 2.0]), 1e-8, Published),
        "bistable_cubic" => {
            let s = 8f64.sqrt();
            one(name, "8*x - x^3", "x", &[], (-4.0, 4.0))?
                .expect("roots", roots(&[-s, 0.0, s]), 1e-8, Published)
                .expect("attractors", attractors(&[-s, s]), 1e-8, Published)
        }
        "ppour" => two(name, ("3*x*(1 - x) - 1.5*x*y", "0.5*x*y - 0.25*y"), ("x", "y"), &[], (0.0, 2.0), (0.0, 3.0))?
            .expect(
                "equilibria",
                Check::Equilibria { expected: vec![[0.0, 0.0], [0.5, 1.0], [1.0, 0.0]] },
                1e-8,
                Published,
            )
            .expect("origin", class([0.0, 0.0], Saddle), 0.0, Published)
            .expect("prey only", class([1.0, 0.0], Saddle), 0.0, Published)
            .expect("coexistence", class([0.5, 1.0], StableNode), 0.0, Published)
            .expect(
                "jacobian",
                Check::JacobianAt { point: [0.5, 1.0], expected: Mat2::new(-1.5, -0.75, 0.5, 0.0) },
                1e-10,
                Published,
            )
            .expect(
                "signs at coexistence",
                Check::SignsAt { point: [0.5, 1.0], h: 0.05, expected: SignMat2([[Neg, Neg], [Pos, Zero]]) },
                0.0,
                Published,
            )
            .expect(
                "signs at origin",
                Check::SignsAt { point: [0.0, 0.0], h: 0.05, expected: SignMat2([[Pos, Zero], [Zero, Neg]]) },
                0.0,
                Published,
            )
            .expect(
                "signs at prey only",
                Check::SignsAt { point: [1.0, 0.0], h: 0.05, expected: SignMat2([[Neg, Neg], [Zero, Pos]]) },
                0.0,
                Published,
            ),
        "lotka_volterra" => two(
            name,
            ("a*N - b*N*P", "c*N*P - d*P"),
            ("N", "P"),
            &[("a", 2.0), ("b", 1.0), ("c", 1.0), ("d", 3.0)],
            (0.0, 8.0),
            (0.0, 7.0),
        )?
        .expect("equilibria", Check::Equilibria { expected: vec![[0.0, 0.0], [3.0, 2.0]] }, 1e-8, Derived)
        .expect("coexistence", class([3.0, 2.0], Center), 0.0, Published)
        .expect("origin", class([0.0, 0.0], Saddle), 0.0, Derived)
        .expect(
            "signs at coexistence",
            Check::SignsAt { point: [3.0, 2.0], h: 0.1, expected: SignMat2([[Zero, Neg], [Pos, Zero]]) },
            0.0,
            Published,
        ),
        "lv_symmetric" => two(name, ("4*x - 2*x*y", "2*x*y - 4*y"), ("x", "y"), &[], (0.0, 5.0), (0.0, 5.0))?
            .expect("equilibria", Check::Equilibria { expected: vec![[0.0, 0.0], [2.0, 2.0]] }, 1e-8, Published)
            .expect(
                "jacobian",
                Check::JacobianAt { point: [2.0, 2.0], expected: Mat2::new(0.0, -4.0, 4.0, 0.0) },
                1e-10,
                Published,
            )
            .expect("coexistence", class([2.0, 2.0], Center), 0.0, Published),
        "algae" => two(name, ("2*x*(1 - y)", "2 - y - x^2"), ("x", "y"), &[], (0.0, 3.0), (0.0, 3.0))?
            .expect("equilibria", Check::Equilibria { expected: vec![[0.0, 2.0], [1.0, 1.0]] }, 1e-8, Published)
            .expect("no algae", class([0.0, 2.0], StableNode), 0.0, Published)
            .expect("coexistence", class([1.0, 1.0], Saddle), 0.0, Published),
        "si_epidemic" => two(
            name,
            ("B - beta*S*I - mu*S", "beta*S*I - alpha*I"),
            ("S", "I"),
            &[("B", 1.0), ("beta", 0.5), ("mu", 0.1), ("alpha", 0.5)],
            (0.0, 12.0),
            (0.0, 4.0),
        )?
        .expect("equilibria", Check::Equilibria { expected: vec![[1.0, 1.8], [10.0, 0.0]] }, 1e-8, Derived)
        .expect("disease free", class([10.0, 0.0], Saddle), 0.0, Derived)
        .expect("endemic", class([1.0, 1.8], StableSpiral), 0.0, Derived),
        "mrna_protein" => {
            let p = (5f64.sqrt() - 1.0) / 2.0;
            two(
                name,
                ("a/(1 + P) - b*M", "c*M - d*P"),
                ("M", "P"),
                &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)],
                (0.0, 2.0),
                (0.0, 2.0),
            )?
            .expect("equilibria", Check::Equilibria { expected: vec![[p, p]] }, 1e-8, Derived)
            .expect("steady state", class([p, p], StableSpiral), 0.0, Derived)
        }
        "cardiac" => two(
            name,
            ("-e*(e - a)*(e - 1) - g", "eps*e"),
            ("e", "g"),
            &[("a", 0.1), ("eps", 0.01)],
            (-0.5, 1.2),
            (-0.2, 0.3),
        )?
        .expect("equilibria", Check::Equilibria { expected: vec![[0.0, 0.0]] }, 1e-8, Derived)
        .expect("rest state", class([0.0, 0.0], StableSpiral), 0.0, Derived)
        .expect_at("fast recovery", &[("eps", 0.001)], class([0.0, 0.0], StableNode), 0.0, Derived),
        "holling_tanner" => {
            // interior equilibrium at K = 0.7: R = P with P^2 + P = K
            let p = (-1.0 + (1.0f64 + 4.0 * 0.7).sqrt()) / 2.0;
            two(
                name,
                ("r*P*(1 - P/K) - a*R*P/(d + P)", "b*R*(1 - R/P)"),
                ("P", "R"),
                &[("a", 1.0), ("b", 0.2), ("r", 1.0), ("d", 1.0), ("K", 0.7)],
                (0.05, 6.0),
                (0.05, 6.0),
            )?
            .expect("coexistence", class([p, p], StableSpiral), 0.0, Published)
            .expect("no cycle", cycle([p, p], false, None), 0.0, Published)
            .expect(
                "hopf",
                Check::Hopf { param: "K".into(), range: (7.0, 10.0), steps: 60, expected: 8.045_548_0 },
                1e-5,
                Derived,
            )
            .expect_at(
                "cycle at K=9",
                &[("K", 9.0)],
                cycle([2.5413812651491097; 2], true, Some(CycleStability::Stable)),
                0.0,
                Derived,
            )
        }
        "brusselator" => two(
            name,
            ("a - (b + 1)*x + x^2*y", "b*x - x^2*y"),
            ("x", "y"),
            &[("a", 1.0), ("b", 1.5)],
            (0.0, 4.0),
            (0.0, 6.0),
        )?
        .expect("equilibria", Check::Equilibria { expected: vec![[1.0, 1.5]] }, 1e-8, Derived)
        .expect("steady state", class([1.0, 1.5], StableSpiral), 0.0, Derived)
        .expect("hopf", Check::Hopf { param: "b".into(), range: (1.5, 2.5), steps: 100, expected: 2.0 }, 1e-6, Derived)
        .expect("no cycle", cycle([1.0, 1.5], false, None), 0.0, Derived)
        .expect_at(
            "cycle at b=2.5",
            &[("b", 2.5)],
            cycle([1.0, 2.5], true, Some(CycleStability::Stable)),
            0.0,
            Derived,
        ),
        "compartment" => two(
            name,
            ("-(a + c)*x + b*y", "a*x - (b + e)*y"),
            ("x", "y"),
            &[("a", 0.5), ("b", 2.0), ("c", 4.5), ("e", 3.0)],
            (-1.0, 1.0),
            (-1.0, 1.0),
        )?
        .expect("origin", class([0.0, 0.0], StableNode), 0.0, Published),
        "diffusion" => {
            let c = |t: f64| [2.4 + 0.6 * (-0.05 * t).exp(), 2.4 - 2.4 * (-0.05 * t).exp()];
            two(name, ("-0.01*C1 + 0.01*C2", "0.04*C1 - 0.04*C2"), ("C1", "C2"), &[], (0.0, 4.0), (0.0, 4.0))?.expect(
                "solution",
                Check::Ivp { init: [3.0, 0.0], samples: [0.0, 10.0, 100.0].map(|t| (t, c(t))).to_vec() },
                1e-9,
                Published,
            )
        }
        "harmonic" => two(name, ("2*y", "-2*x"), ("x", "y"), &[], (-2.0, 2.0), (-2.0, 2.0))?
            .expect("origin", class([0.0, 0.0], Center), 0.0, Published)
            .expect("closed orbits", cycle([0.0, 0.0], false, Some(CycleStability::Neutral)), 0.0, Derived),
        n if UNAVAILABLE.contains(&n) => {
            return Err(Error::ModelUnavailable {
                name: n.into(),
                reason: "its rate function is only given as a graph".into(),
            })
        }
        _ => {
            return Err(Error::UnknownModel {
                name: name.into(),
                known: builtin_names().collect::<Vec<_>>().join(", "),
            })
        }
    };
    Ok(r)
}
