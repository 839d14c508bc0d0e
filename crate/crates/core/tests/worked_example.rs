use std::f64::consts::PI;

use holohje::hamparse::{build_h, parse, BuildOptions, GradientOracle, HamiltonianAst};
use holohje::hgm::{eval_gradients, poisson_numeric, FirstIntegral, HolonomicIntegral, OdeOptions, Path};
use holohje::hje::{
    apply_d, extract_symplectic, gamma_basis, in_gamma_span, GammaCertificate, GammaOptions, SymplecticData,
};
use holohje::pfaffian::HolonomicFunction;
use holohje::ring::{rf_eval, Monomial, NumPoint, RfMatrix, VarContext};

const H: &str = "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4";
const QBAR2: [f64; 5] = [0.0, 1.0, 0.0, -2.0, 0.0];

fn zbar(a: f64, b: f64) -> NumPoint {
    NumPoint::new(vec![PI / 6.0, 1.0, b * (PI / 6.0).powi(4), 2.0 / a], vec![a, b]).unwrap()
}

struct Setup {
    ast: HamiltonianAst,
    f: HolonomicFunction,
    sym: SymplecticData,
    cert: GammaCertificate,
}

fn setup(a: f64, b: f64) -> Setup {
    let ast = parse(H, &VarContext::new(2, vec!["a".into(), "b".into()])).unwrap();
    let (f, _) = build_h(&ast, &zbar(a, b), &BuildOptions::default()).unwrap();
    let sym = extract_symplectic(&f.system).unwrap();
    let cert = gamma_basis(&f.system, &sym, &GammaOptions::default()).unwrap();
    Setup { ast, f, sym, cert }
}

/// `D^alpha Omega` for every `|alpha| <= k`.
fn derived_omegas(s: &Setup, k: u32) -> Vec<(Monomial, RfMatrix)> {
    let nd = s.f.system.nder();
    let mut out = vec![(Monomial::one(nd), s.sym.omega.clone())];
    let mut frontier = out.clone();
    for _ in 0..k {
        let mut next = Vec::new();
        for (alpha, w) in &frontier {
            // Only extend along variables at or after the last one used, so each alpha appears once.
            let last = (0..nd).rev().find(|&i| alpha.get(i) > 0).unwrap_or(0);
            for i in last..nd {
                next.push((alpha.with(i, 1), apply_d(i, w, &s.f.system)));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

#[test]
fn gamma_spans_all_derivatives_up_to_order_three() {
    let s = setup(1.0, 1.0);
    for (alpha, w) in derived_omegas(&s, 3) {
        assert!(in_gamma_span(&s.cert, &w, 11), "D^{:?} Omega outside the span", alpha.0);
    }
    assert!(s.cert.integrability_defect().is_none());
}

#[test]
fn second_vector_satisfies_all_derived_conditions() {
    let s = setup(1.0, 1.0);
    let z = &s.f.base_point;
    let u = unit(&s.f.qbar);
    let v = unit(&QBAR2);
    for (alpha, w) in derived_omegas(&s, 3) {
        let m: Vec<Vec<f64>> =
            (0..w.rows()).map(|i| w.row(i).iter().map(|e| rf_eval(e, z).unwrap()).collect()).collect();
        let r: f64 = (0..5).map(|i| u[i] * (0..5).map(|j| m[i][j] * v[j]).sum::<f64>()).sum();
        let scale = m.iter().flatten().map(|x| x.abs()).fold(1.0, f64::max);
        assert!(r.abs() < 1e-8 * scale, "condition {:?}: {r:e}", alpha.0);
    }
}

#[test]
fn momentum_gradient_at_base_point() {
    let s = setup(2.0, 1.0);
    let (fx, fp) = eval_gradients(&s.sym, &s.f.qbar, &s.f.base_point).unwrap();
    assert!((fp[0] + 1.0).abs() < 1e-14 && (fp[1] + 2.0).abs() < 1e-14, "{fp:?}");
    // d_x2 h = 2 p2 = 2 at a = 2.
    assert!((fx[1] - 2.0).abs() < 1e-14);
}

#[test]
fn oracle_gradient_matches_finite_differences() {
    let s = setup(1.0, 1.0);
    let oracle = GradientOracle::new(&s.ast);
    let z = s.f.base_point.with_coords(vec![0.7, 1.2, 0.3, 1.5]);
    let g = oracle.gradient(&z).unwrap();
    let step = 1e-5;
    for i in 0..4 {
        let shift = |d: f64| {
            let mut c = z.coords.clone();
            c[i] += d;
            s.ast.eval(&z.with_coords(c)).unwrap()
        };
        let fd = (shift(step) - shift(-step)) / (2.0 * step);
        assert!((fd - g[i]).abs() < 1e-8 * g[i].abs().max(1.0), "component {i}: {fd} vs {}", g[i]);
    }
}

#[test]
fn holonomic_gradient_matches_the_oracle() {
    let s = setup(1.0, 1.0);
    let hi = HolonomicIntegral::new(&s.f, OdeOptions::default());
    let oracle = GradientOracle::new(&s.ast);
    let z = s.f.base_point.with_coords(vec![0.8, 1.3, 0.2, 1.7]);
    let q = hi.q_at(&z).unwrap();
    let g = hi.gradient(&z, &q).unwrap();
    let go = oracle.gradient(&z).unwrap();
    for (a, b) in g.iter().zip(&go) {
        assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
    }
}

#[test]
fn continuation_is_path_independent() {
    let s = setup(1.0, 1.0);
    let ode = OdeOptions::default();
    let integ = holohje::hgm::Integrator::new(&s.f.system);
    let base = s.f.base_point.clone();
    let target = base.with_coords(vec![0.9, 1.4, 0.25, 1.6]);
    let via = base.with_coords(vec![0.6, 0.7, 0.4, 2.2]);
    let direct = integ.integrate(&s.f.qbar, &Path::straight(&base, &target, ode).unwrap()).unwrap();
    let bent = integ.integrate(&s.f.qbar, &Path::new(vec![base, via, target], ode).unwrap()).unwrap();
    for (a, b) in direct.iter().zip(&bent) {
        assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{direct:?} vs {bent:?}");
    }
}

#[test]
fn continuation_is_linear_in_the_boundary_vector() {
    let s = setup(1.0, 1.0);
    let ode = OdeOptions::default();
    let integ = holohje::hgm::Integrator::new(&s.f.system);
    let base = s.f.base_point.clone();
    let path = Path::straight(&base, &base.with_coords(vec![0.9, 0.8, 0.3, 2.3]), ode).unwrap();
    let (c1, c2) = (1.5, -0.75);
    let combo: Vec<f64> = s.f.qbar.iter().zip(&QBAR2).map(|(a, b)| c1 * a + c2 * b).collect();
    let qa = integ.integrate(&s.f.qbar, &path).unwrap();
    let qb = integ.integrate(&QBAR2, &path).unwrap();
    let qc = integ.integrate(&combo, &path).unwrap();
    for k in 0..5 {
        let lin = c1 * qa[k] + c2 * qb[k];
        assert!((qc[k] - lin).abs() < 1e-9 * lin.abs().max(1.0));
    }
}

#[test]
fn bracket_of_transcendental_functions_matches_closed_form() {
    let c = VarContext::new(1, vec![]);
    let f = parse("sin(x1)*exp(p1)", &c).unwrap();
    let g = parse("x1*p1^2 + cos(p1)", &c).unwrap();
    let zb = NumPoint::new(vec![0.4, 0.9], vec![]).unwrap();
    let z = NumPoint::new(vec![0.8, 1.3], vec![]).unwrap();
    let hf = HolonomicIntegral::new(&build_h(&f, &zb, &BuildOptions::default()).unwrap().0, OdeOptions::default());
    let hg = HolonomicIntegral::new(&build_h(&g, &zb, &BuildOptions::default()).unwrap().0, OdeOptions::default());
    let gf = hf.gradient(&z, &hf.q_at(&z).unwrap()).unwrap();
    let gg = hg.gradient(&z, &hg.q_at(&z).unwrap()).unwrap();
    let numeric = poisson_numeric(&gf[..1], &gf[1..], &gg[..1], &gg[1..]);
    // {f, g} = f_p g_x - f_x g_p in closed form.
    let (x, p) = (0.8f64, 1.3f64);
    let (fx, fp) = (x.cos() * p.exp(), x.sin() * p.exp());
    let (gx, gp) = (p * p, 2.0 * x * p - p.sin());
    let exact = fp * gx - fx * gp;
    assert!((numeric - exact).abs() < 1e-9 * exact.abs().max(1.0), "{numeric} vs {exact}");
}
