use std::ffi::{CStr, CString};
use std::ptr;

use pebbling_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(peb_last_error()) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut PebDag {
    let text = CString::new(text).unwrap();
    let mut dag = ptr::null_mut();
    assert_eq!(unsafe { peb_dag_parse(text.as_ptr(), &mut dag) }, PebStatus::Ok);
    dag
}

#[test]
fn parse_schedule_verify_round_trip() {
    let dag = parse("a b\na c\nb d\nc d\n");
    unsafe {
        assert_eq!((peb_dag_vertex_count(dag), peb_dag_edge_count(dag), peb_dag_max_in_degree(dag)), (4, 4, 2));
        let mut report = ptr::null_mut();
        let tag = CString::new("topo").unwrap();
        assert_eq!(peb_schedule(dag, tag.as_ptr(), &mut report), PebStatus::Ok);
        assert_eq!(peb_report_space_bound(report), 3);
        assert!(peb_report_peak(report) <= 3);
        assert_eq!(peb_report_moves(report), 8);
        let mut t = 0u64;
        assert!(peb_report_move_bound(report, &mut t));
        assert_eq!(t, 8);

        let mut text = ptr::null_mut();
        assert_eq!(peb_report_schedule_text(report, &mut text), PebStatus::Ok);
        assert!(CStr::from_ptr(text).to_str().unwrap().starts_with("P a\n"));
        let (mut peak, mut moves) = (0usize, 0u64);
        assert_eq!(peb_verify(dag, text, &mut peak, &mut moves), PebStatus::Ok);
        assert_eq!(moves, 8);
        peb_string_free(text);
        peb_report_free(report);
        peb_dag_free(dag);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut dag = ptr::null_mut();
        let bad = CString::new("a b\nb a\n").unwrap();
        assert_eq!(peb_dag_parse(bad.as_ptr(), &mut dag), PebStatus::ParseError);
        assert!(last_error().contains("cycle"));
        assert!(dag.is_null());
        assert_eq!(peb_dag_parse(ptr::null(), &mut dag), PebStatus::NullArgument);

        let spec = CString::new("grid:width=0,height=2").unwrap();
        assert_eq!(peb_dag_generate(spec.as_ptr(), &mut dag), PebStatus::InvalidSpec);

        let dag = parse("a b\n");
        let mut report = ptr::null_mut();
        let tag = CString::new("fastest").unwrap();
        assert_eq!(peb_schedule(dag, tag.as_ptr(), &mut report), PebStatus::UnknownStrategy);
        assert!(last_error().contains("fastest"));

        let wrong = CString::new("P b\n").unwrap();
        assert_eq!(peb_verify(dag, wrong.as_ptr(), ptr::null_mut(), ptr::null_mut()), PebStatus::IllegalMove);
        let partial = CString::new("P a\n").unwrap();
        assert_eq!(peb_verify(dag, partial.as_ptr(), ptr::null_mut(), ptr::null_mut()), PebStatus::NotFull);
        let unknown = CString::new("P z\n").unwrap();
        assert_eq!(peb_verify(dag, unknown.as_ptr(), ptr::null_mut(), ptr::null_mut()), PebStatus::ParseError);
        peb_dag_free(dag);

        assert_eq!(peb_dag_vertex_count(ptr::null()), 0);
        peb_dag_free(ptr::null_mut());
        peb_report_free(ptr::null_mut());
        peb_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_instance_and_precondition() {
    unsafe {
        let mut dag = ptr::null_mut();
        let spec = CString::new("pyramid:height=3").unwrap();
        assert_eq!(peb_dag_generate(spec.as_ptr(), &mut dag), PebStatus::Ok);
        assert_eq!(peb_dag_vertex_count(dag), 10);
        let mut report = ptr::null_mut();
        let tag = CString::new("bounded-halflog").unwrap();
        assert_eq!(peb_schedule(dag, tag.as_ptr(), &mut report), PebStatus::Precondition);
        let tag = CString::new("general").unwrap();
        assert_eq!(peb_schedule(dag, tag.as_ptr(), &mut report), PebStatus::Ok);
        assert!(peb_report_peak(report) <= peb_report_space_bound(report));
        assert_eq!(last_error(), "");
        peb_report_free(report);
        peb_dag_free(dag);
    }
}
