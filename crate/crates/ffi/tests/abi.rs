use std::ffi::{CStr, CString};
use std::ptr;

use luconc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(luconc_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

/// Eight 1-D points; the last two carry uncertain soft labels.
fn small_dataset() -> *mut LuconcDataset {
    let coords: Vec<f32> = vec![0.0, 0.1, 0.2, 0.3, 5.0, 5.1, 9.0, 9.1];
    let labels: Vec<u32> = vec![0, 0, 0, 0, 1, 1, 1, 1];
    let mut soft = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let row = match (label, i >= 6) {
            (_, true) => [0.5, 0.5],
            (0, _) => [1.0, 0.0],
            _ => [0.0, 1.0],
        };
        soft.extend_from_slice(&row);
    }
    let mut d = ptr::null_mut();
    let st = unsafe {
        luconc_dataset_from_arrays(
            8,
            1,
            coords.as_ptr(),
            labels.as_ptr(),
            2,
            soft.as_ptr(),
            &mut d,
        )
    };
    assert_eq!(st, LuconcStatus::Ok, "{}", last_error());
    d
}

#[test]
fn dataset_handles() {
    let d = small_dataset();
    unsafe {
        assert_eq!(luconc_dataset_len(d), 8);
        assert_eq!(luconc_dataset_dim(d), 1);
        let members = [6usize, 7];
        let mut lu = 0.0;
        assert_eq!(
            luconc_region_lu(d, members.as_ptr(), 2, &mut lu),
            LuconcStatus::Ok
        );
        assert_eq!(lu, 1.0);
        assert_eq!(
            luconc_region_lu(d, members.as_ptr(), 0, &mut lu),
            LuconcStatus::Numeric
        );
        assert!(!last_error().is_empty());
        let bad = [8usize];
        assert_eq!(
            luconc_region_lu(d, bad.as_ptr(), 1, &mut lu),
            LuconcStatus::InvalidArgument
        );
        luconc_dataset_free(d);
        assert_eq!(luconc_dataset_len(ptr::null()), 0);
        luconc_dataset_free(ptr::null_mut());
    }
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    let mut d = ptr::null_mut();
    let coords = [f32::NAN];
    let labels = [0u32];
    unsafe {
        let st = luconc_dataset_from_arrays(
            1,
            1,
            coords.as_ptr(),
            labels.as_ptr(),
            1,
            ptr::null(),
            &mut d,
        );
        assert_eq!(st, LuconcStatus::Format);
        assert!(d.is_null());
        let st =
            luconc_dataset_from_arrays(1, 1, ptr::null(), labels.as_ptr(), 1, ptr::null(), &mut d);
        assert_eq!(st, LuconcStatus::InvalidArgument);

        let missing = CString::new("/nonexistent/points.bin").unwrap();
        let st = luconc_dataset_load(missing.as_ptr(), missing.as_ptr(), ptr::null(), &mut d);
        assert_eq!(st, LuconcStatus::Io);
        assert!(last_error().contains("/nonexistent/points.bin"));

        let mut v = 0.0;
        assert_eq!(
            luconc_gaussian_expansion(1.5, 1.0, &mut v),
            LuconcStatus::Numeric
        );
        let row = [0.2, 0.8];
        assert_eq!(
            luconc_example_lu(row.as_ptr(), 2, 2, &mut v),
            LuconcStatus::Numeric
        );
        assert_eq!(
            luconc_example_lu(row.as_ptr(), 2, 0, &mut v),
            LuconcStatus::Ok
        );
        assert_eq!(v, 1.0 - 0.2 + 0.8);
        assert!(last_error().is_empty());
    }
}

#[test]
fn search_evaluate_and_serialize() {
    let d = small_dataset();
    let params = LuconcSearchParams {
        alpha: 0.25,
        gamma: 0.9,
        epsilon: 0.05,
        balls: 1,
        metric: LuconcMetric::L2,
    };
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(
            luconc_search_run(d, &params, 0, &mut r),
            LuconcStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(luconc_region_ball_count(r), 1);
        let (mut c, mut rad) = (0usize, 0.0);
        assert_eq!(luconc_region_ball(r, 0, &mut c, &mut rad), LuconcStatus::Ok);
        assert_eq!(c, 6);
        assert_eq!(rad, (9.1f32 - 9.0f32) as f64);
        assert_eq!(
            luconc_region_ball(r, 1, &mut c, &mut rad),
            LuconcStatus::InvalidArgument
        );

        let mut ev = LuconcEvaluation::default();
        assert_eq!(luconc_evaluate_region(r, d, 0.0, &mut ev), LuconcStatus::Ok);
        assert_eq!(ev.risk, 0.25);
        assert_eq!(ev.adv_risk, 0.25);
        assert_eq!(ev.region_lu, 1.0);

        let mut json = ptr::null_mut();
        assert_eq!(luconc_region_to_json(r, &mut json), LuconcStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        luconc_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["metric"], "l2");
        assert_eq!(v["balls"][0]["center_index"], 6);
        luconc_region_free(r);

        let impossible = LuconcSearchParams {
            gamma: 2.0,
            ..params
        };
        let mut r2 = ptr::null_mut();
        assert_eq!(
            luconc_search_run(d, &impossible, 0, &mut r2),
            LuconcStatus::Infeasible
        );
        assert!(r2.is_null());

        let mut report = ptr::null_mut();
        let loose = LuconcSearchParams {
            gamma: 0.0,
            ..params
        };
        assert_eq!(
            luconc_repeated_trials_json(d, &loose, 3, 7, &mut report),
            LuconcStatus::Ok,
            "{}",
            last_error()
        );
        let v: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        luconc_string_free(report);
        assert_eq!(v["trials"].as_array().unwrap().len(), 3);
        assert_eq!(v["params"]["base_seed"], 7);
        luconc_dataset_free(d);
    }
}

#[test]
fn numeric_entry_points() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(
            luconc_gaussian_expansion(0.5, 1.0, &mut v),
            LuconcStatus::Ok
        );
        assert!((v - 0.841345).abs() < 1e-6);
        let theta = [1.0, 0.0];
        assert_eq!(
            luconc_analytic_concentration(theta.as_ptr(), 2, 1.0, 0.05, 0.0, &mut v),
            LuconcStatus::Ok
        );
        assert!((v - 0.05).abs() < 1e-9);
        assert_eq!(
            luconc_analytic_concentration(theta.as_ptr(), 2, -1.0, 0.05, 0.5, &mut v),
            LuconcStatus::Numeric
        );
        assert_eq!(luconc_normal_cdf(0.0), 0.5);
        assert!((luconc_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-12);
        assert!(luconc_normal_quantile(2.0).is_nan());
        assert_eq!(
            CStr::from_ptr(luconc_metric_name(LuconcMetric::Linf))
                .to_str()
                .unwrap(),
            "linf"
        );
    }
}

#[test]
fn load_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("p.csv");
    let labels = dir.path().join("l.csv");
    std::fs::write(&points, "0,0\n1,1\n2,2\n").unwrap();
    std::fs::write(&labels, "id,label\na,0\nb,1\nc,1\n").unwrap();
    let p = CString::new(points.to_str().unwrap()).unwrap();
    let l = CString::new(labels.to_str().unwrap()).unwrap();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(
            luconc_dataset_load(p.as_ptr(), l.as_ptr(), ptr::null(), &mut d),
            LuconcStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(luconc_dataset_len(d), 3);
        assert_eq!(luconc_dataset_dim(d), 2);
        luconc_dataset_free(d);
    }
}
