use proptest::prelude::*;
use sh_core::{
    rigid_sphere_radial_all, rotate_azimuth, steering_vector, truncation_order, wavenumber,
    ArrayGeometry, Direction,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotating_array_and_source_together_is_invariant(
        az in 0.0f64..360.0, el in 10.0f64..170.0, rot in -180.0f64..180.0, f in 50.0f64..8000.0,
    ) {
        let g = ArrayGeometry::semicircular(6, 0.1).unwrap();
        let d = Direction::from_degrees(az, el).unwrap();
        let order = truncation_order(wavenumber(f), 0.1);
        let a = steering_vector(&g, &d, f, order).unwrap();
        let b = steering_vector(&g.with_rotation(rot), &d.rotated(rot), f, order).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn rotation_inverse_is_identity(az in -720.0f64..720.0, el in 0.0f64..180.0, rot in -1000.0f64..1000.0) {
        let d = vec![Direction::from_degrees(az, el).unwrap()];
        let back = rotate_azimuth(&rotate_azimuth(&d, rot), -rot);
        let diff = (back[0].phi() - d[0].phi()).abs();
        prop_assert!(diff.min(std::f64::consts::TAU - diff) < 1e-12);
        prop_assert_eq!(back[0].theta(), d[0].theta());
    }

    #[test]
    fn radial_tail_decays(kr in 0.1f64..40.0) {
        let k = kr / 0.1;
        let b = rigid_sphere_radial_all(truncation_order(k, 0.1) + 10, k, 0.1, 0.1).unwrap();
        let start = (kr + 5.0).ceil() as usize;
        for n in start..b.len() - 1 {
            prop_assert!(b[n + 1].norm() < b[n].norm());
        }
    }

    #[test]
    fn far_side_steering_stays_bounded(az in 0.0f64..360.0, f in 0.0f64..24000.0) {
        // pressure on a rigid sphere never exceeds twice the incident wave
        let g = ArrayGeometry::semicircular(6, 0.1).unwrap();
        let order = truncation_order(wavenumber(f), 0.1);
        let v = steering_vector(&g, &Direction::horizontal(az), f, order).unwrap();
        prop_assert!(v.iter().all(|x| x.is_finite() && x.norm() < 2.2));
    }
}
