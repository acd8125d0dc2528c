use std::ffi::{CStr, CString};
use std::ptr;

use critgraph_ffi::*;

fn degree_seq() -> Vec<u32> {
    // m = 6 vertices, one surplus edge: sum = 2*(6-1) + 2 = 12
    vec![1, 3, 2, 2, 3, 1]
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(cg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn cm_graph_roundtrip() {
    let d = degree_seq();
    unsafe {
        let rng = cg_rng_new(7);
        let mut g = ptr::null_mut();
        assert_eq!(cg_sample_cm(d.as_ptr(), d.len(), rng, &mut g), CgStatus::Ok);
        assert_eq!(cg_graph_vertex_count(g), 6);
        let e = cg_graph_edge_count(g);
        assert_eq!(e, 6);
        let mut buf = vec![0u32; 2 * e];
        assert_eq!(
            cg_graph_edges(g, buf.as_mut_ptr(), 1),
            CgStatus::BufferTooSmall
        );
        assert_eq!(cg_graph_edges(g, buf.as_mut_ptr(), buf.len()), CgStatus::Ok);
        let mut deg = vec![0u32; 6];
        for &v in &buf {
            deg[v as usize] += 1;
        }
        assert_eq!(deg, d);
        cg_graph_free(g);
        cg_rng_free(rng);
    }
}

#[test]
fn same_seed_same_graph() {
    let d = degree_seq();
    let draw = |seed| unsafe {
        let rng = cg_rng_new(seed);
        let mut g = ptr::null_mut();
        assert_eq!(
            cg_sample_connected(d.as_ptr(), d.len(), 1, rng, &mut g),
            CgStatus::Ok
        );
        let mut buf = vec![0u32; 2 * cg_graph_edge_count(g)];
        cg_graph_edges(g, buf.as_mut_ptr(), buf.len());
        assert_eq!(cg_graph_largest_component(g), 6);
        cg_graph_free(g);
        cg_rng_free(rng);
        buf
    };
    assert_eq!(draw(3), draw(3));
}

#[test]
fn simple_graph_reports_attempts() {
    let d = [2u32; 8];
    unsafe {
        let rng = cg_rng_new(1);
        let mut g = ptr::null_mut();
        let mut attempts = 0u64;
        let s = cg_sample_simple(d.as_ptr(), d.len(), 10_000, rng, &mut g, &mut attempts);
        assert_eq!(s, CgStatus::Ok);
        assert!(attempts >= 1);
        cg_graph_free(g);
        cg_rng_free(rng);
    }
}

#[test]
fn tree_parents() {
    let children = [2u32, 0, 1, 0];
    unsafe {
        let rng = cg_rng_new(11);
        let mut t = ptr::null_mut();
        assert_eq!(
            cg_sample_tree(children.as_ptr(), children.len(), rng, &mut t),
            CgStatus::Ok
        );
        assert_eq!(cg_tree_len(t), 4);
        let mut parents = [0i64; 4];
        assert_eq!(cg_tree_parents(t, parents.as_mut_ptr(), 4), CgStatus::Ok);
        assert_eq!(parents[0], -1);
        assert!(parents[1..].iter().all(|&p| (0..4).contains(&p)));
        cg_tree_free(t);
        cg_rng_free(rng);
    }
}

#[test]
fn untenable_children_set_error() {
    let children = [0u32, 0, 0];
    unsafe {
        let rng = cg_rng_new(0);
        let mut t = ptr::null_mut();
        let s = cg_sample_tree(children.as_ptr(), children.len(), rng, &mut t);
        assert_eq!(s, CgStatus::NotTenable);
        assert!(t.is_null());
        assert!(!last_error_string().is_empty());
        cg_rng_free(rng);
    }
}

#[test]
fn null_arguments() {
    let d = degree_seq();
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(
            cg_sample_cm(d.as_ptr(), d.len(), ptr::null_mut(), &mut g),
            CgStatus::NullPointer
        );
        assert_eq!(
            cg_sample_cm(ptr::null(), 3, ptr::null_mut(), &mut g),
            CgStatus::NullPointer
        );
        assert_eq!(
            cg_graph_edges(ptr::null(), ptr::null_mut(), 0),
            CgStatus::NullPointer
        );
        assert_eq!(cg_graph_vertex_count(ptr::null()), 0);
        cg_graph_free(ptr::null_mut());
        cg_string_free(ptr::null_mut());
    }
}

#[test]
fn wright_ratio_trees_is_one() {
    // labelled trees with degrees d number (m-2)!/prod(d_i-1)!
    let d = [1u32, 2, 3, 1, 2, 1];
    let mut w = 0.0;
    assert_eq!(
        unsafe { cg_wright_ratio(d.as_ptr(), d.len(), 0, &mut w) },
        CgStatus::Ok
    );
    assert!((w - 1.0).abs() < 1e-12, "{w}");
}

#[test]
fn enumerate_json_has_counts() {
    let d = degree_seq();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(
            cg_enumerate_json(d.as_ptr(), d.len(), 1, &mut s),
            CgStatus::Ok
        );
        let text = CString::from_raw(s).into_string().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["identity_holds"], true);
        assert!(v["count_connected"].is_string() || v["count_connected"].is_number());
    }
}

#[test]
fn area_moment_k0_is_one() {
    let (mut v, mut se) = (0.0, 1.0);
    assert_eq!(
        unsafe { cg_area_moment(0, 100, 10, 0, &mut v, &mut se) },
        CgStatus::Ok
    );
    assert_eq!((v, se), (1.0, 0.0));
}

#[test]
fn vacant_threshold_r3() {
    let (mut u, mut p) = (0.0, 0.0);
    assert_eq!(
        unsafe { cg_vacant_critical(3, &mut u, &mut p) },
        CgStatus::Ok
    );
    assert!((u - 6.0 * 2f64.ln()).abs() < 1e-12);
    assert!((p - 0.125).abs() < 1e-12);
    assert_eq!(
        unsafe { cg_vacant_critical(2, &mut u, &mut p) },
        CgStatus::InvalidArgument
    );
}

#[test]
fn header_declares_every_export() {
    let h = include_str!("../include/critgraph.h");
    for name in [
        "cg_last_error",
        "cg_version",
        "cg_rng_new",
        "cg_rng_free",
        "cg_sample_cm",
        "cg_sample_simple",
        "cg_sample_connected",
        "cg_graph_vertex_count",
        "cg_graph_edge_count",
        "cg_graph_edges",
        "cg_graph_largest_component",
        "cg_graph_free",
        "cg_sample_tree",
        "cg_tree_len",
        "cg_tree_parents",
        "cg_tree_free",
        "cg_enumerate_json",
        "cg_string_free",
        "cg_wright_ratio",
        "cg_area_moment",
        "cg_vacant_critical",
        "CG_STATUS_OK",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}
