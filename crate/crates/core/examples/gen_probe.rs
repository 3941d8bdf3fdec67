fn main() {
    let spec = oxidize_core::spec_harness::validate_spec(r#"{
  "function_name": "sum",
  "fields": [
    { "u_field": {"name": "xs", "type": "*const i32", "shape": { "ptr": { "kind": "slice", "len_from": "n" } } },
      "i_field": {"name": "xs", "type": "&[i32]" } },
    { "u_field": {"name": "n",  "type": "usize",      "shape": "scalar" },
      "i_field": {"name": "xs.len", "type": "usize" } }
  ]
}"#).unwrap();
    let art = oxidize_core::spec_harness::generate_function_harness(
        &spec,
        "pub unsafe extern \"C\" fn sum(xs: *const i32, n: usize) -> i32;",
        "pub fn sum_idiomatic(xs: &[i32]) -> i32;",
    ).unwrap();
    let mut src = String::from("pub fn sum_idiomatic(xs: &[i32]) -> i32 { xs.iter().sum() }\n\n");
    src.push_str(&art.shim_source);
    src.push_str("\nfn main() { let v = [1,2,3,4]; let r = unsafe { sum_c(v.as_ptr(), 4) }; assert_eq!(r, 10); println!(\"ok {}\", r); }\n");
    std::fs::write("/tmp/shim_probe.rs", src).unwrap();
}
