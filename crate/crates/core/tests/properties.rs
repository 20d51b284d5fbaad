use nls_quench::darboux::{apply_bt, bt_data_effect, BtMode, DarbouxConfig, DarbouxStep};
use nls_quench::glm::{glm_neumann, rosales_resummed, RadiativeData, ResolventConfig};
use nls_quench::io::{from_json, to_json, ProfileJson, ScatteringJson};
use nls_quench::model::*;
use nls_quench::quench::{evolve_data, quench_map};
use nls_quench::specfun::gamma_complex;
use nls_quench::zs::{scattering_matrices, IntegratorConfig};
use nls_quench::{Mat2, C64};
use proptest::prelude::*;

fn coupling() -> impl Strategy<Value = Coupling> {
    (0.2f64..2.0, any::<bool>()).prop_map(|(g, f)| if f { Coupling::focusing(g).unwrap() } else { Coupling::defocusing(g).unwrap() })
}

fn bump(amp: f64, width: f64, phase: f64) -> FieldProfile {
    FieldProfile::from_fn(12.0, 481, Asymptotics::Schwartz, 1e-8, |x| C64::from_polar(amp * (-(x / width).powi(2)).exp(), phase * x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn scattering_matrix_is_unimodular(amp in 0.05f64..1.0, width in 0.5f64..2.0, phase in -1.0f64..1.0, c in coupling()) {
        let p = bump(amp, width, phase);
        let kg = KGrid::uniform(3.0, 13).unwrap();
        for m in scattering_matrices(&p, c, &kg, &IntegratorConfig::default()).unwrap() {
            prop_assert!((m.det() - 1.0).norm() < 1e-9);
            // |a|² − (c/c*)|b|² = 1
            prop_assert!((m.0[1][1].norm_sqr() - c.sign() * m.0[0][1].norm_sqr() - 1.0).abs() < 1e-8);
            if c.regime() == Regime::Focusing {
                prop_assert!((m.dagger() * m - Mat2::identity()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn quench_to_same_coupling_is_identity(amp in 0.05f64..1.0, c in coupling()) {
        let p = bump(amp, 1.0, 0.3);
        let kg = KGrid::uniform(3.0, 7).unwrap();
        let r = quench_map(&p, c, c, &kg, &IntegratorConfig::default()).unwrap();
        for (x, y) in r.pre.a.iter().zip(&r.post.a).chain(r.pre.b.iter().zip(&r.post.b)) {
            prop_assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn time_evolution_is_a_one_parameter_group(t1 in -1.0f64..1.0, t2 in -1.0f64..1.0, bre in -0.5f64..0.5, bim in -0.5f64..0.5) {
        let kg = KGrid::uniform(2.0, 9).unwrap();
        let b = C64::new(bre, bim);
        let a = C64::from_polar((1.0 - b.norm_sqr()).sqrt(), 0.3);
        let sd = ScatteringData::new(kg, vec![a; 9], vec![b; 9], vec![], Coupling::focusing(1.0).unwrap(), 1e-12).unwrap();
        let twice = evolve_data(&evolve_data(&sd, t1), t2);
        let once = evolve_data(&sd, t1 + t2);
        for (x, y) in twice.b.iter().zip(&once.b) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        prop_assert_eq!(&once.a, &sd.a);
        for (x, y) in once.b.iter().zip(&sd.b) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn add_then_remove_is_identity_on_data(re in -1.0f64..1.0, im in 0.1f64..2.0, mre in -2.0f64..2.0, mim in 0.1f64..2.0) {
        let kg = KGrid::uniform(3.0, 31).unwrap();
        let a: Vec<C64> = kg.samples().iter().map(|&k| C64::new(k, -0.4) / C64::new(k, 0.4)).collect();
        let mut z = DiscreteEigenvalue::new(C64::new(0.0, 0.4), 1).unwrap();
        z.norming = Some(C64::new(-1.0, 0.0));
        let sd = ScatteringData::new(kg, a, vec![C64::new(0.0, 0.0); 31], vec![z], Coupling::focusing(1.0).unwrap(), 1e-12).unwrap();
        let k0 = C64::new(re, im);
        let added = bt_data_effect(&sd, &DarbouxStep::new(k0, C64::new(mre, mim), BtMode::Add).unwrap()).unwrap();
        prop_assert_eq!(added.discrete.len(), 2);
        let back = bt_data_effect(&added, &DarbouxStep::new(k0, C64::new(1.0, 0.0), BtMode::Remove).unwrap()).unwrap();
        for (x, y) in back.a.iter().zip(&sd.a) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        prop_assert_eq!(&back.b, &sd.b);
        prop_assert_eq!(&back.discrete, &sd.discrete);
    }

    #[test]
    fn vacuum_add_gives_a_soliton_of_height_two_im_k0(re in -1.0f64..1.0, im in 0.5f64..1.5) {
        let p = FieldProfile::from_fn(20.0, 801, Asymptotics::Schwartz, 1e-6, |_| C64::new(0.0, 0.0)).unwrap();
        let c = Coupling::focusing(1.0).unwrap();
        let q = apply_bt(&p, c, &DarbouxStep::add(C64::new(re, im)).unwrap(), &DarbouxConfig::new(KGrid::uniform(2.0, 5).unwrap())).unwrap();
        let peak = q.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        // grid sampling of the peak loses at most O(h²)
        prop_assert!((peak - 2.0 * im).abs() < 2e-2 * im);
        prop_assert!((q.mass() - 4.0 * im).abs() < 1e-6);
    }

    #[test]
    fn neumann_series_matches_resolvent_for_weak_data(scale in 0.01f64..0.3, shift in -1.0f64..1.0, x in -2.0f64..2.0, c in coupling()) {
        let kg = KGrid::uniform(5.0, 81).unwrap();
        let rho = kg.samples().iter().map(|&k| C64::new(scale * (-(k - shift).powi(2)).exp(), 0.0)).collect();
        let rd = RadiativeData::new(kg, rho, c).unwrap();
        let cfg = ResolventConfig::default();
        let a = glm_neumann(&rd, c, x, &cfg).unwrap();
        let b = rosales_resummed(&rd, c, x, 0.0, &cfg).unwrap();
        prop_assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn gamma_recurrence(re in -3.5f64..4.0, im in 0.05f64..3.0) {
        let z = C64::new(re, im);
        let g = gamma_complex(z).unwrap();
        let g1 = gamma_complex(z + 1.0).unwrap();
        prop_assert!((g1 - z * g).norm() < 1e-12 * (1.0 + g1.norm()));
    }

    #[test]
    fn profile_json_round_trip(amp in 0.0f64..2.0, width in 0.3f64..2.0, phase in -2.0f64..2.0) {
        let p = bump(amp, width, phase);
        let back: ProfileJson = from_json(&to_json(&ProfileJson::from_profile(&p))).unwrap();
        prop_assert_eq!(back.to_profile(1e-8).unwrap(), p);
    }

    #[test]
    fn scattering_json_round_trip(bre in -0.5f64..0.5, bim in -0.5f64..0.5, g in 0.2f64..2.0) {
        let kg = KGrid::uniform(1.0, 5).unwrap();
        let b = C64::new(bre, bim);
        let a = C64::new((1.0 - b.norm_sqr()).sqrt(), 0.0);
        let sd = ScatteringData::new(kg, vec![a; 5], vec![b; 5], vec![], Coupling::focusing(g).unwrap(), 1e-12).unwrap();
        let back: ScatteringJson = from_json(&to_json(&ScatteringJson::from_data(&sd))).unwrap();
        prop_assert_eq!(back.to_data().unwrap(), sd);
    }
}
