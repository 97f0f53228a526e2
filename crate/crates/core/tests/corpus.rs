use phaseplane::corpus::{builtin_model, builtin_names, parse_model_file, serialize, Model, ModelRecord};
use phaseplane::cycles::hopf_scan;
use phaseplane::phase2d::{
    analyze_equilibria, classify_equilibrium_2d, classify_from_signs, derive_sign_matrix, extract_nullclines,
    ClineKind, Model2D, PartialClass, DEFAULT_GRID,
};
use phaseplane::Classification;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn records() -> Vec<ModelRecord> {
    builtin_names().map(|n| builtin_model(n).unwrap()).collect()
}

fn planar() -> Vec<(String, Model2D)> {
    records().into_iter().filter_map(|r| r.model_2d().cloned().map(|m| (r.name, m))).collect()
}

fn random_point(rng: &mut StdRng, m: &Model2D) -> [f64; 2] {
    let d = &m.domain;
    [rng.gen_range(d.x_lo..=d.x_hi), rng.gen_range(d.y_lo..=d.y_hi)]
}

#[test]
fn jacobians_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(7);
    for (name, m) in planar() {
        let sys = m.compile().unwrap();
        let mut checked = 0;
        while checked < 100 {
            let p = random_point(&mut rng, &m);
            let Ok(j) = sys.jacobian(p) else { continue };
            let h = 1e-5;
            let d = |dx: f64, dy: f64| sys.rhs([p[0] + dx, p[1] + dy]);
            let (Ok(xp), Ok(xm), Ok(yp), Ok(ym)) = (d(h, 0.0), d(-h, 0.0), d(0.0, h), d(0.0, -h)) else { continue };
            let fd = [
                [(xp[0] - xm[0]) / (2.0 * h), (yp[0] - ym[0]) / (2.0 * h)],
                [(xp[1] - xm[1]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)],
            ];
            let sym = j.rows();
            for r in 0..2 {
                for c in 0..2 {
                    let err = (sym[r][c] - fd[r][c]).abs() / sym[r][c].abs().max(1.0);
                    assert!(err <= 1e-6, "{name} at {p:?}: J[{r}][{c}] {} vs {}", sym[r][c], fd[r][c]);
                }
            }
            checked += 1;
        }
    }
}

#[test]
fn one_dimensional_derivatives_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(11);
    for r in records() {
        let Some(m) = r.model_1d() else { continue };
        let flow = m.compile().unwrap();
        for _ in 0..100 {
            let x = rng.gen_range(m.lo..=m.hi);
            let h = 1e-5;
            let fd = (flow.f(x + h).unwrap() - flow.f(x - h).unwrap()) / (2.0 * h);
            let sym = flow.df(x).unwrap();
            assert!((sym - fd).abs() <= 1e-6 * sym.abs().max(1.0), "{} at {x}", r.name);
        }
    }
}

#[test]
fn serialized_models_evaluate_identically() {
    let mut rng = StdRng::seed_from_u64(3);
    for r in records() {
        let back = parse_model_file(&serialize(&r)).unwrap();
        match (&r.model, &back.model) {
            (Model::TwoD(a), Model::TwoD(b)) => {
                let (sa, sb) = (a.compile().unwrap(), b.compile().unwrap());
                for _ in 0..100 {
                    let p = random_point(&mut rng, a);
                    assert_eq!(sa.rhs(p).ok(), sb.rhs(p).ok(), "{}", r.name);
                }
            }
            (Model::OneD(a), Model::OneD(b)) => {
                let (fa, fb) = (a.compile().unwrap(), b.compile().unwrap());
                for _ in 0..100 {
                    let x = rng.gen_range(a.lo..=a.hi);
                    assert_eq!(fa.f(x).ok(), fb.f(x).ok(), "{}", r.name);
                }
            }
            _ => panic!("{} changed dimension", r.name),
        }
    }
}

#[test]
fn sign_classes_never_contradict_full_classes() {
    let mut compared = 0;
    for (name, m) in planar() {
        let h = 1e-3 * m.domain.width().min(m.domain.height());
        for rep in analyze_equilibria(&m).unwrap() {
            let Ok(signs) = derive_sign_matrix(&m, rep.location, h) else { continue };
            let partial = classify_from_signs(&signs);
            let full = rep.classification;
            let ok = match partial {
                PartialClass::Saddle => full == Classification::Saddle,
                PartialClass::StableNode => full == Classification::StableNode,
                PartialClass::UnstableNode => full == Classification::UnstableNode,
                PartialClass::StableNodeOrSpiral => {
                    matches!(full, Classification::StableNode | Classification::StableSpiral)
                }
                PartialClass::UnstableNodeOrSpiral => {
                    matches!(full, Classification::UnstableNode | Classification::UnstableSpiral)
                }
                PartialClass::Center => full == Classification::Center,
                PartialClass::UnstableUnknown => {
                    matches!(
                        full,
                        Classification::Saddle | Classification::UnstableNode | Classification::UnstableSpiral
                    )
                }
                PartialClass::Indeterminate => true,
            };
            assert!(ok, "{name} at {:?}: signs {signs} say {partial:?}, full class {full}", rep.location);
            compared += 1;
        }
    }
    assert!(compared >= 10, "only {compared} equilibria compared");
}

#[test]
fn equilibria_lie_on_both_kinds_of_null_cline() {
    for (name, m) in planar() {
        let clines = extract_nullclines(&m, DEFAULT_GRID).unwrap();
        let cell = m.domain.diagonal() / DEFAULT_GRID as f64;
        for rep in analyze_equilibria(&m).unwrap() {
            for kind in [ClineKind::X, ClineKind::Y] {
                let d = clines.distance(kind, rep.location);
                assert!(d <= cell, "{name}: {:?} is {d} from the {kind:?}-cline", rep.location);
            }
        }
    }
}

#[test]
fn hopf_point_separates_stable_and_unstable_spirals() {
    let m = builtin_model("brusselator").unwrap().model_2d().unwrap().clone();
    let r = hopf_scan(&m, "b", (1.5, 2.5), 100).unwrap().unwrap();
    let delta = 1e-3 * (2.5 - 1.5);
    let class_at = |b: f64| {
        let mb = m.with_param("b", b).unwrap();
        classify_equilibrium_2d(&mb, [1.0, b]).unwrap().classification
    };
    assert_eq!(class_at(r.critical - delta), Classification::StableSpiral);
    assert_eq!(class_at(r.critical + delta), Classification::UnstableSpiral);
}
