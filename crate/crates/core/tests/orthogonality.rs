use hartmann_gup::matel::{angular_oracle, radial_oracle};
use hartmann_gup::quad::{integrate_angular, integrate_radial_power, QuadratureSpec};
use hartmann_gup::specfun::{factorial, gamma, gegenbauer, laguerre, PolyParams};
use hartmann_gup::HartmannModel;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn laguerre_norms() {
    for nu in [0.0, 1.0, 2.4] {
        for n in 0..=6u32 {
            let p = PolyParams::new(n, nu);
            let r = integrate_radial_power(nu, |x| (-x).exp() * laguerre(p, x).powi(2), 1.0, &spec()).unwrap();
            let want = gamma(nu + f64::from(n) + 1.0).unwrap() / factorial(u64::from(n));
            assert!(r.converged);
            assert!(((r.value - want) / want).abs() < 1e-9, "nu={nu} n={n}: {} vs {want}", r.value);
        }
    }
}

#[test]
fn laguerre_cross_terms_vanish() {
    let nu = 2.4;
    for a in 0..=4u32 {
        for b in (a + 1)..=5 {
            let (pa, pb) = (PolyParams::new(a, nu), PolyParams::new(b, nu));
            let r = integrate_radial_power(nu, |x| (-x).exp() * laguerre(pa, x) * laguerre(pb, x), 1.0, &spec()).unwrap();
            assert!(r.value.abs() < 1e-9, "{a},{b}: {}", r.value);
        }
    }
}

#[test]
fn gegenbauer_norms() {
    for nu in [0.6, 1.0, 2.2] {
        for n in 0..=6u32 {
            let p = PolyParams::new(n, nu);
            let r = integrate_angular(|x| gegenbauer(p, x).powi(2), nu - 0.5, &spec()).unwrap();
            let nf = f64::from(n);
            let want = std::f64::consts::PI * 2f64.powf(1.0 - 2.0 * nu) * gamma(nf + 2.0 * nu).unwrap()
                / (factorial(u64::from(n)) * (nf + nu) * gamma(nu).unwrap().powi(2));
            assert!(((r.value - want) / want).abs() < 1e-9, "nu={nu} n={n}: {} vs {want}", r.value);
        }
    }
}

/// ⟨a|b⟩ = δ_ab for the full separable states, |m| ≤ 2, N + n ≤ 3.
#[test]
fn states_are_orthonormal() {
    for q in [0.0, 2.0] {
        let model = HartmannModel::atomic(1.0, 1.0, q);
        let states = model.scan(3, 2);
        for (i, a) in states.iter().enumerate() {
            for b in &states[i..] {
                if a.m != b.m {
                    continue;
                }
                let radial = radial_oracle(a, b, 0, &spec()).unwrap();
                let angular = angular_oracle(a, b, 0, &spec()).unwrap();
                assert!(radial.converged && angular.converged);
                let overlap = radial.value * angular.value;
                let want = if a.triple() == b.triple() { 1.0 } else { 0.0 };
                assert!(
                    (overlap - want).abs() < 1e-8,
                    "q={q} {} {}: radial {} angular {}",
                    a.label(),
                    b.label(),
                    radial.value,
                    angular.value
                );
            }
        }
    }
}
