use std::ffi::{c_char, CStr, CString};
use std::ptr;

use lspace_ffi::*;

fn take(s: *mut c_char) -> String {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { ls_string_free(s) };
    text
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ls_last_error_message()) }.to_str().unwrap().to_owned()
}

fn parse(text: &str) -> *mut LsRibbonGraph {
    let c = CString::new(text).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_parse(c.as_ptr(), &mut g) }, LsStatus::Ok);
    g
}

const TWISTED_PAIR: &str = "ribbon\nedges 2\ntwist 1\nvertex 1 2 1 2\n";

#[test]
fn counts_and_lspace() {
    let g = parse(TWISTED_PAIR);
    let mut counts = LsCounts::default();
    assert_eq!(unsafe { ls_ribbon_counts(g, &mut counts) }, LsStatus::Ok);
    let expected = LsCounts { edges: 2, vertices: 1, boundary: 1, euler_characteristic: -1, orientable: false };
    assert_eq!(counts, expected);

    let mut l = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_lspace(g, &mut l) }, LsStatus::Ok);
    assert_eq!(unsafe { ls_lagrangian_grade(l) }, 2);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ls_lagrangian_to_text(l, &mut s) }, LsStatus::Ok);
    assert_eq!(take(s), "lspace n=2\n10|11\n01|10\n");

    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_intersection_matrix(g, &mut m) }, LsStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ls_matrix_to_text(m, &mut s) }, LsStatus::Ok);
    assert_eq!(take(s), "1 1\n1 0\n");
    unsafe {
        ls_matrix_free(m);
        ls_lagrangian_free(l);
        ls_ribbon_free(g);
    }
}

#[test]
fn dual_and_moves_round_trip_through_text() {
    let g = parse(TWISTED_PAIR);
    let edges = [1usize, 2];
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_partial_dual(g, edges.as_ptr(), edges.len(), &mut d) }, LsStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_to_text(d, &mut s) }, LsStatus::Ok);
    assert_eq!(take(s), "ribbon\nedges 2\ntwist 2\nvertex 1 2 1 2\n");

    let mut v = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_vassiliev(g, 2, 1, 1, &mut v) }, LsStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_to_text(v, &mut s) }, LsStatus::Ok);
    assert_eq!(take(s), "ribbon\nedges 2\ntwist 1 2\nvertex 1 1 2 2\n");

    // the empty dual is the identity
    let mut same = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_partial_dual(g, ptr::null(), 0, &mut same) }, LsStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_to_text(same, &mut s) }, LsStatus::Ok);
    assert_eq!(take(s), TWISTED_PAIR);
    unsafe {
        ls_ribbon_free(same);
        ls_ribbon_free(v);
        ls_ribbon_free(d);
        ls_ribbon_free(g);
    }
}

#[test]
fn interlace_of_an_edge() {
    let c = CString::new("graph\nvertices 2\nedge 1 2\n").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ls_matrix_parse(c.as_ptr(), &mut m) }, LsStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ls_matrix_interlace(m, &mut s) }, LsStatus::Ok);
    assert_eq!(take(s), "x^2 - 2x + 2y");
    unsafe { ls_matrix_free(m) };
}

#[test]
fn errors_carry_status_and_message() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_parse(ptr::null(), &mut g) }, LsStatus::NullPointer);
    assert!(g.is_null());

    let bad = CString::new("ribbon\nedges 2\nvertex 1 2 1\n").unwrap();
    assert_eq!(unsafe { ls_ribbon_parse(bad.as_ptr(), &mut g) }, LsStatus::Parse);
    assert!(last_error().contains("occurs 1 times"), "{}", last_error());

    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { ls_ribbon_parse(invalid.as_ptr().cast(), &mut g) }, LsStatus::InvalidUtf8);

    let g = parse(TWISTED_PAIR);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_vassiliev(g, 1, 9, 0, &mut out) }, LsStatus::Precondition);
    assert_eq!(unsafe { ls_ribbon_vassiliev(g, 3, 0, 0, &mut out) }, LsStatus::Precondition);
    let edges = [5usize];
    assert_eq!(unsafe { ls_ribbon_partial_dual(g, edges.as_ptr(), 1, &mut out) }, LsStatus::Precondition);
    assert!(out.is_null());

    let mut counts = LsCounts::default();
    assert_eq!(unsafe { ls_ribbon_counts(g, &mut counts) }, LsStatus::Ok);
    assert_eq!(last_error(), "");

    // two vertices have an L-space but no intersection matrix
    let two = parse("ribbon\nedges 1\nvertex 1\nvertex 1\n");
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_lspace(two, &mut l) }, LsStatus::Ok);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ls_ribbon_intersection_matrix(two, &mut m) }, LsStatus::Precondition);
    assert!(m.is_null());
    unsafe {
        ls_lagrangian_free(l);
        ls_ribbon_free(two);
        ls_ribbon_free(g);
        ls_ribbon_free(ptr::null_mut());
        ls_string_free(ptr::null_mut());
    }
}
