use std::f64::consts::PI;

use dkmeasure::mc::{conditional_growth_check, estimate_volume, random_configuration, McOptions, DEFAULT_VOLUME_CAP};

#[test]
fn one_point_volume_is_pi_squared() {
    let v1 = estimate_volume(1, &McOptions::new(200_000, 5), DEFAULT_VOLUME_CAP).unwrap();
    assert!(v1.sigma_distance(PI * PI).abs() < 4.0, "{v1:?}");
    assert!(v1.lower(3.0) >= PI * PI / 8.0);
}

#[test]
fn conditional_check_on_empty_base_is_half_the_one_point_volume() {
    // with no free points det D = 1 and the integrand is det without the 2^N
    let c = conditional_growth_check(&random_configuration(0, 1), &McOptions::new(200_000, 6), true).unwrap();
    assert_eq!(c.base_det, 1.0);
    assert!(c.lhs.sigma_distance(PI * PI / 2.0).abs() < 4.0, "{:?}", c.lhs);
    assert!(c.pass && c.pass_refined == Some(true));
    assert_eq!(c.rhs_refined, Some(c.rhs));
}

#[test]
fn volumes_beyond_the_cap_are_refused() {
    assert!(estimate_volume(DEFAULT_VOLUME_CAP + 1, &McOptions::new(10_000, 1), DEFAULT_VOLUME_CAP).is_err());
}
