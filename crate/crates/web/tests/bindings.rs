use ionstring_web::{axial_modes_json, stability_curve_json, transverse_modes_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn axial_three_ions() {
    let v = parse(&axial_modes_json(3, 1.0).unwrap());
    let f: Vec<f64> = v["frequencies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((f[0] - 1.0).abs() < 1e-12);
    assert!((f[1] - 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["classes"][1], "cold");
    assert!((v["heating"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["positions"].as_array().unwrap().len(), 3);
    assert_eq!(v["logic_mode"], 1);
}

#[test]
fn transverse_reports_threshold() {
    let v = parse(&transverse_modes_json(3, 1.0, 1.1).unwrap());
    assert!((v["epsilon_s"].as_f64().unwrap() - 2.9f64.sqrt()).abs() < 1e-9);
    assert_eq!(v["stable"], true);
    let spacing = v["spacing"]["fractional"].as_f64().unwrap();
    assert!((spacing - 0.20).abs() < 0.005);

    let unstable = parse(&transverse_modes_json(3, 1.0, 0.9).unwrap());
    assert_eq!(unstable["stable"], false);
    assert!(unstable["heating"].is_null());
}

#[test]
fn stability_curve_has_cusp() {
    let v = parse(&stability_curve_json(5, 81).unwrap());
    assert_eq!(v["mu"].as_array().unwrap().len(), 81);
    let cusp = v["cusp"]["mu"].as_f64().unwrap();
    assert!(0.1 < cusp && cusp < 1.0);
}

#[test]
fn invalid_input_is_an_error_string() {
    assert!(axial_modes_json(4, 1.0).unwrap_err().contains("odd"));
    assert!(transverse_modes_json(3, -1.0, 1.1).is_err());
    assert!(transverse_modes_json(3, 1.0, 0.0).is_err());
    assert!(stability_curve_json(3, 1).is_err());
}
