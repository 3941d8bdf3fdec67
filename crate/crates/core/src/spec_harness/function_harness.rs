//! Rule-based generation of C-ABI shims: a generated function exports the
//! original C symbol, converts C-facing values to idiomatic ones per the
//! SPEC, calls the idiomatic function, and maps results back. Mappings the
//! rules cannot handle become localized, compilable TODO stubs.

use crate::rustsrc::{parse_fn_sig, FnSig};

use super::rules::*;
use super::{
    FieldMapping, HarnessArtifact, HarnessError, NullPolicy, Ownership, PtrKind, Shape,
    SpecDocument, SpecTarget, TodoSite,
};

/// Per-parameter conversion plan.
struct ParamPlan {
    /// Lines emitted before the idiomatic call.
    pre: Vec<String>,
    /// Expression usable as the idiomatic call argument, keyed by the
    /// idiomatic parameter name it satisfies.
    arg: Option<(String, String)>,
    /// Lines emitted after the call (write-backs).
    post: Vec<String>,
    todo: Option<TodoSite>,
}

impl ParamPlan {
    fn consumed() -> Self {
        ParamPlan { pre: Vec::new(), arg: None, post: Vec::new(), todo: None }
    }
}

pub fn generate_function_harness(
    spec: &SpecDocument,
    unidiomatic_decl: &str,
    idiomatic_sig: &str,
) -> Result<HarnessArtifact, HarnessError> {
    let SpecTarget::Function(fn_name) = &spec.target else {
        return Err(HarnessError::UnsupportedPattern(
            "generate_function_harness needs a function SPEC".into(),
        ));
    };
    let u_sig = parse_fn_sig(unidiomatic_decl)?;
    let i_sig = parse_fn_sig(idiomatic_sig)?;
    if &u_sig.name != fn_name {
        return Err(HarnessError::SchemaViolation {
            path: ".function_name".into(),
            reason: format!("SPEC names `{fn_name}` but the declaration is `{}`", u_sig.name),
        });
    }

    let mut todo_sites = Vec::new();
    let mut pre = Vec::new();
    let mut post = Vec::new();
    let mut args: Vec<(String, String)> = Vec::new();
    let len_sources = spec.length_source_names();
    let len_source_names: Vec<String> = len_sources.iter().map(|s| s.to_string()).collect();

    for param in &u_sig.params {
        let mapping = spec.mapping_for_u(&param.name);
        let plan = match mapping {
            Some(m) => plan_param(fn_name, &u_sig, m, &len_source_names),
            None => plan_unmapped(fn_name, &param.name, &param.ty, &i_sig),
        };
        pre.extend(plan.pre);
        post.extend(plan.post);
        if let Some(arg) = plan.arg {
            args.push(arg);
        }
        if let Some(site) = plan.todo {
            todo_sites.push(site);
        }
    }

    // Return mapping: explicit `ret` u_field, or implicit scalar identity
    // when both signatures return castable scalars.
    let ret_mapping = spec.fields.iter().find(|f| f.u_field.name == "ret");
    let (call_binding, ret_tail) =
        plan_return(fn_name, &u_sig, &i_sig, ret_mapping, &mut todo_sites, &mut post);

    // The call follows the idiomatic parameter order.
    let mut call_args = Vec::new();
    for ip in &i_sig.params {
        match args.iter().find(|(name, _)| name == &ip.name) {
            Some((_, expr)) => call_args.push(expr.clone()),
            None => {
                call_args.push(format!("todo!(\"param {}\")", ip.name));
                todo_sites.push(TodoSite {
                    location: format!("{fn_name}:param {}", ip.name),
                    spec_excerpt: format!(
                        "idiomatic parameter `{}: {}` has no rule-supported mapping",
                        ip.name, ip.ty
                    ),
                });
                pre.push(format!(
                    "    // TODO: param {} of type {}: unsupported mapping",
                    ip.name, ip.ty
                ));
            }
        }
    }

    let mut out = String::new();
    out.push_str(&format!(
        "// Harness shim for `{fn_name}`: exports the original C symbol and\n\
         // bridges to `{}`.\n",
        i_sig.name
    ));
    out.push_str(&format!("#[export_name = \"{fn_name}\"]\n"));
    let params_text = u_sig
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.ty))
        .collect::<Vec<_>>()
        .join(", ");
    let ret_text = u_sig.ret.as_ref().map(|r| format!(" -> {r}")).unwrap_or_default();
    out.push_str(&format!(
        "pub unsafe extern \"C\" fn {fn_name}_c({params_text}){ret_text} {{\n"
    ));
    for line in &pre {
        out.push_str(line);
        out.push('\n');
    }
    let call = format!("{}({})", i_sig.name, call_args.join(", "));
    match &call_binding {
        Some(binding) => out.push_str(&format!("    let {binding} = {call};\n")),
        None => out.push_str(&format!("    {call};\n")),
    }
    for line in &post {
        out.push_str(line);
        out.push('\n');
    }
    for line in &ret_tail {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("}\n");

    Ok(HarnessArtifact {
        shim_source: out,
        converter_sources: String::new(),
        selftest_source: String::new(),
        todo_sites,
    })
}

/// A u parameter the SPEC does not mention: pass through when it is a
/// scalar matching a same-named idiomatic parameter, otherwise a TODO.
fn plan_unmapped(fn_name: &str, name: &str, u_ty: &str, i_sig: &FnSig) -> ParamPlan {
    if let Some(ip) = i_sig.params.iter().find(|p| p.name == name) {
        if u_ty.trim() == ip.ty.trim()
            || (is_castable_scalar(u_ty) && is_castable_scalar(&ip.ty))
        {
            return ParamPlan {
                pre: Vec::new(),
                arg: Some((name.to_string(), cast_expr(name, u_ty, &ip.ty))),
                post: Vec::new(),
                todo: None,
            };
        }
    }
    ParamPlan {
        pre: vec![format!("    // TODO: param {name} of type {u_ty}: no SPEC mapping")],
        arg: None,
        post: Vec::new(),
        todo: Some(TodoSite {
            location: format!("{fn_name}:param {name}"),
            spec_excerpt: format!("u parameter `{name}: {u_ty}` has no SPEC mapping"),
        }),
    }
}

fn todo_plan(fn_name: &str, mapping: &FieldMapping, reason: &str) -> ParamPlan {
    let name = &mapping.u_field.name;
    ParamPlan {
        pre: vec![format!(
            "    // TODO: param {} of type {}: unsupported mapping ({reason})",
            mapping.i_field.path, mapping.i_field.ty
        )],
        arg: Some((mapping.i_field.path.clone(), format!("todo!(\"param {}\")", mapping.i_field.path))),
        post: Vec::new(),
        todo: Some(TodoSite {
            location: format!("{fn_name}:param {name}"),
            spec_excerpt: format!(
                "u `{}: {}` -> i `{}: {}` ({reason})",
                name, mapping.u_field.c_type, mapping.i_field.path, mapping.i_field.ty
            ),
        }),
    }
}

fn plan_param(
    fn_name: &str,
    u_sig: &FnSig,
    mapping: &FieldMapping,
    len_sources: &[String],
) -> ParamPlan {
    let u = &mapping.u_field;
    let i = &mapping.i_field;
    match &u.shape {
        Shape::Scalar => {
            if i.len_base().is_some() {
                // Length sources are consumed by their slice mapping.
                return ParamPlan::consumed();
            }
            if len_sources.contains(&u.name) {
                return ParamPlan::consumed();
            }
            if i.is_ret() {
                return todo_plan(fn_name, mapping, "a by-value scalar cannot carry the return");
            }
            if i.path.contains('.') {
                return todo_plan(fn_name, mapping, "dotted idiomatic path outside <field>.len");
            }
            if u.c_type.trim() == i.ty.trim()
                || (is_castable_scalar(&u.c_type) && is_castable_scalar(&i.ty))
            {
                ParamPlan {
                    pre: Vec::new(),
                    arg: Some((i.path.clone(), cast_expr(&u.name, &u.c_type, &i.ty))),
                    post: Vec::new(),
                    todo: None,
                }
            } else {
                todo_plan(fn_name, mapping, "scalar types are not `as`-castable")
            }
        }
        Shape::Ptr(ptr) => match ptr.kind {
            PtrKind::Cstring => plan_cstring(fn_name, mapping, ptr.null_policy()),
            PtrKind::Slice => plan_slice(fn_name, u_sig, mapping),
            PtrKind::Ref => plan_ref(fn_name, mapping),
        },
    }
}

fn plan_cstring(fn_name: &str, mapping: &FieldMapping, null: NullPolicy) -> ParamPlan {
    let u = &mapping.u_field;
    let i = &mapping.i_field;
    if i.is_ret() || pointee(&u.c_type).is_none() {
        return todo_plan(fn_name, mapping, "cstring parameter must be a pointer input");
    }
    let Some(form) = string_form(&i.ty) else {
        return todo_plan(fn_name, mapping, "idiomatic type is not a supported string form");
    };
    let name = &u.name;
    let mut pre = Vec::new();
    let arg = match (null, form) {
        (NullPolicy::Forbidden, StringForm::BorrowedStr | StringForm::OwnedString) => {
            pre.push(format!(
                "    if {name}.is_null() {{\n        eprintln!(\"harness: null pointer for '{name}' (null=forbidden)\");\n        std::process::abort();\n    }}"
            ));
            pre.push(format!(
                "    let {name}_str = std::ffi::CStr::from_ptr({name}).to_string_lossy().into_owned();"
            ));
            if form == StringForm::BorrowedStr {
                format!("{name}_str.as_str()")
            } else {
                format!("{name}_str")
            }
        }
        (_, StringForm::OptionStr | StringForm::OptionString) => {
            pre.push(format!(
                "    let {name}_opt: Option<String> = if {name}.is_null() {{\n        None\n    }} else {{\n        Some(std::ffi::CStr::from_ptr({name}).to_string_lossy().into_owned())\n    }};"
            ));
            if form == StringForm::OptionStr {
                format!("{name}_opt.as_deref()")
            } else {
                format!("{name}_opt")
            }
        }
        (NullPolicy::Nullable, StringForm::BorrowedStr | StringForm::OwnedString) => {
            // Tolerant empty handling for nullable pointers mapped to
            // non-optional strings.
            pre.push(format!(
                "    let {name}_str = if {name}.is_null() {{\n        String::new()\n    }} else {{\n        std::ffi::CStr::from_ptr({name}).to_string_lossy().into_owned()\n    }};"
            ));
            if form == StringForm::BorrowedStr {
                format!("{name}_str.as_str()")
            } else {
                format!("{name}_str")
            }
        }
    };
    ParamPlan { pre, arg: Some((i.path.clone(), arg)), post: Vec::new(), todo: None }
}

fn plan_slice(fn_name: &str, u_sig: &FnSig, mapping: &FieldMapping) -> ParamPlan {
    let u = &mapping.u_field;
    let i = &mapping.i_field;
    let Shape::Ptr(ptr) = &u.shape else { unreachable!() };
    let Some((elem, ptr_mut)) = pointee(&u.c_type) else {
        return todo_plan(fn_name, mapping, "slice parameter must be a raw pointer");
    };
    let name = &u.name;
    let mut pre = Vec::new();
    // Length expression from the sibling field or constant.
    let len_expr = match (&ptr.len_from, ptr.len_const) {
        (Some(src), None) => {
            let src_ty = u_sig.params.iter().find(|p| &p.name == src).map(|p| p.ty.clone());
            match src_ty {
                Some(ty) if pointee(&ty).is_some() => {
                    format!("if {src}.is_null() {{ 0 }} else {{ *{src} as usize }}")
                }
                Some(_) => format!("{src} as usize"),
                None => return todo_plan(fn_name, mapping, "length source is not a parameter"),
            }
        }
        (None, Some(k)) => format!("{k}usize"),
        _ => unreachable!("validated"),
    };
    pre.push(format!("    let {name}_len: usize = {len_expr};"));
    if ptr.null_policy() == NullPolicy::Forbidden {
        pre.push(format!(
            "    if {name}.is_null() {{\n        eprintln!(\"harness: null pointer for '{name}' (null=forbidden)\");\n        std::process::abort();\n    }}"
        ));
    }

    if i.is_ret() {
        // Result slice written back into the caller's buffer, paired
        // length updated when its slot is writable.
        let mut post = Vec::new();
        post.push(format!(
            "    if __ret.len() > {name}_len {{\n        eprintln!(\"harness: slice write-back overflow for '{name}' ({{}} > {{}})\", __ret.len(), {name}_len);\n        std::process::abort();\n    }}"
        ));
        post.push(format!(
            "    if !{name}.is_null() && !__ret.is_empty() {{\n        std::ptr::copy_nonoverlapping(__ret.as_ptr(), {name}, __ret.len());\n    }}"
        ));
        if let Some(src) = &ptr.len_from {
            let src_is_ptr = u_sig
                .params
                .iter()
                .find(|p| &p.name == src)
                .map(|p| pointee(&p.ty).is_some())
                .unwrap_or(false);
            if src_is_ptr {
                post.push(format!(
                    "    if !{src}.is_null() {{\n        *{src} = __ret.len() as _;\n    }}"
                ));
            }
        }
        return ParamPlan { pre, arg: None, post, todo: None };
    }

    let Some((i_elem, form)) = slice_elem(&i.ty).or_else(|| {
        option_inner(&i.ty).and_then(slice_elem)
    }) else {
        return todo_plan(fn_name, mapping, "idiomatic type is not a slice/Vec form");
    };
    if i_elem != elem {
        return todo_plan(fn_name, mapping, "slice element types differ");
    }
    let optional = option_inner(&i.ty).is_some();
    let view = match form {
        SliceForm::BorrowedMut => {
            if !ptr_mut {
                return todo_plan(fn_name, mapping, "&mut slice needs a *mut pointer");
            }
            pre.push(format!(
                "    let {name}_view: &mut [{elem}] = if {name}.is_null() || {name}_len == 0 {{\n        &mut []\n    }} else {{\n        std::slice::from_raw_parts_mut({name}, {name}_len)\n    }};"
            ));
            format!("{name}_view")
        }
        SliceForm::Borrowed | SliceForm::Owned => {
            pre.push(format!(
                "    let {name}_view: &[{elem}] = if {name}.is_null() || {name}_len == 0 {{\n        &[]\n    }} else {{\n        std::slice::from_raw_parts({name}, {name}_len)\n    }};"
            ));
            if form == SliceForm::Owned {
                format!("{name}_view.to_vec()")
            } else {
                format!("{name}_view")
            }
        }
    };
    let arg = if optional {
        format!("if {name}.is_null() {{ None }} else {{ Some({view}) }}")
    } else {
        view
    };
    ParamPlan { pre, arg: Some((i.path.clone(), arg)), post: Vec::new(), todo: None }
}

fn plan_ref(fn_name: &str, mapping: &FieldMapping) -> ParamPlan {
    let u = &mapping.u_field;
    let i = &mapping.i_field;
    let Some((elem, ptr_mut)) = pointee(&u.c_type) else {
        return todo_plan(fn_name, mapping, "ref parameter must be a raw pointer");
    };
    let Shape::Ptr(ptr) = &u.shape else { unreachable!() };
    let name = &u.name;
    let null = ptr.null_policy();

    // Out-pointer realized from the idiomatic return (rule-table return
    // mapping "scalars: via *mut T").
    if i.is_ret() {
        if !ptr_mut {
            return todo_plan(fn_name, mapping, "return through a *const pointer");
        }
        let mut post = Vec::new();
        let guard = if null == NullPolicy::Forbidden {
            format!(
                "    if {name}.is_null() {{\n        eprintln!(\"harness: null pointer for '{name}' (null=forbidden)\");\n        std::process::abort();\n    }}"
            )
        } else {
            String::new()
        };
        if is_castable_scalar(elem) && is_castable_scalar(&i.ty) {
            if !guard.is_empty() {
                post.push(guard);
                post.push(format!("    *{name} = {};", cast_expr("__ret", &i.ty, elem)));
            } else {
                post.push(format!(
                    "    if !{name}.is_null() {{\n        *{name} = {};\n    }}",
                    cast_expr("__ret", &i.ty, elem)
                ));
            }
            return ParamPlan { pre: Vec::new(), arg: None, post, todo: None };
        }
        // Struct out-pointer: converter writes into the caller's storage.
        if !guard.is_empty() {
            post.push(guard);
            post.push(format!(
                "    {}(&__ret, &mut *{name});",
                converter_name(&i.ty, elem)
            ));
        } else {
            post.push(format!(
                "    if !{name}.is_null() {{\n        {}(&__ret, &mut *{name});\n    }}",
                converter_name(&i.ty, elem)
            ));
        }
        return ParamPlan { pre: Vec::new(), arg: None, post, todo: None };
    }

    let mut pre = Vec::new();
    if null == NullPolicy::Forbidden {
        pre.push(format!(
            "    if {name}.is_null() {{\n        eprintln!(\"harness: null pointer for '{name}' (null=forbidden)\");\n        std::process::abort();\n    }}"
        ));
    }

    // Scalar single-object reference.
    if is_castable_scalar(elem) {
        let arg = match i.ty.trim() {
            t if t == format!("&mut {elem}") => {
                if !ptr_mut {
                    return todo_plan(fn_name, mapping, "&mut ref needs a *mut pointer");
                }
                format!("&mut *{name}")
            }
            t if t == format!("&{elem}") => format!("&*{name}"),
            t if t == format!("Box<{elem}>") => format!("Box::new(*{name})"),
            t if t == elem => format!("*{name}"),
            _ => return todo_plan(fn_name, mapping, "unsupported idiomatic form for scalar ref"),
        };
        return ParamPlan { pre, arg: Some((i.path.clone(), arg)), post: Vec::new(), todo: None };
    }

    // Struct reference via generated converters. `&mut` with transient
    // ownership copies the mutated value back after the call.
    let (i_base, i_mut) = if let Some(rest) = i.ty.trim().strip_prefix("&mut ") {
        (rest.trim().to_string(), true)
    } else if let Some(rest) = i.ty.trim().strip_prefix('&') {
        (rest.trim().to_string(), false)
    } else {
        return todo_plan(fn_name, mapping, "struct refs map to &T or &mut T");
    };
    if i_mut && !ptr_mut {
        return todo_plan(fn_name, mapping, "&mut struct needs a *mut pointer");
    }
    pre.push(format!(
        "    let mut {name}_i: {i_base} = {}(&*{name});",
        converter_name(elem, &i_base)
    ));
    let arg = if i_mut { format!("&mut {name}_i") } else { format!("&{name}_i") };
    let mut post = Vec::new();
    let transient = mapping.ownership.unwrap_or(Ownership::Transient) == Ownership::Transient;
    if i_mut && ptr_mut && transient {
        post.push(format!(
            "    {}(&{name}_i, &mut *{name});",
            converter_name(&i_base, elem)
        ));
    }
    ParamPlan { pre, arg: Some((i.path.clone(), arg)), post, todo: None }
}

/// Plans the function return. Returns the call binding (None when the call
/// result is unused) and trailing lines producing the C return value.
fn plan_return(
    fn_name: &str,
    u_sig: &FnSig,
    i_sig: &FnSig,
    ret_mapping: Option<&FieldMapping>,
    todo_sites: &mut Vec<TodoSite>,
    post: &mut Vec<String>,
) -> (Option<String>, Vec<String>) {
    let i_has_ret = i_sig.ret.is_some();
    let needs_binding = i_has_ret;
    let binding = if needs_binding { Some("__ret".to_string()) } else { None };
    let mut tail = Vec::new();
    match (ret_mapping, &u_sig.ret) {
        (Some(m), u_ret) => match (&m.u_field.shape, u_ret) {
            (Shape::Scalar, Some(u_ty)) => {
                if is_castable_scalar(u_ty) && i_sig.ret.as_deref().map(is_castable_scalar).unwrap_or(false) {
                    tail.push(format!(
                        "    {}",
                        cast_expr("__ret", i_sig.ret.as_deref().unwrap_or(""), u_ty)
                    ));
                } else if m.u_field.c_type.trim() == i_sig.ret.as_deref().unwrap_or("").trim() {
                    tail.push("    __ret".to_string());
                } else if !is_castable_scalar(&m.u_field.c_type) && !m.u_field.c_type.contains('*') {
                    // Struct returned by value through converters.
                    tail.push(format!("    let mut __c_ret: {} = std::mem::zeroed();", u_ty));
                    tail.push(format!(
                        "    {}(&__ret, &mut __c_ret);",
                        converter_name(i_sig.ret.as_deref().unwrap_or(""), u_ty)
                    ));
                    tail.push("    __c_ret".to_string());
                } else {
                    todo_sites.push(TodoSite {
                        location: format!("{fn_name}:ret"),
                        spec_excerpt: format!(
                            "return mapping `{}` -> `{}` is not rule-supported",
                            m.u_field.c_type, m.i_field.ty
                        ),
                    });
                    tail.push("    // TODO: ret: unsupported mapping".to_string());
                    tail.push("    todo!(\"ret\")".to_string());
                }
            }
            (Shape::Ptr(p), Some(u_ty)) if p.kind == PtrKind::Cstring => {
                if i_sig.ret.as_deref().map(|t| t.trim() == "String").unwrap_or(false)
                    && pointee(u_ty).is_some()
                {
                    tail.push(malloc_cstring_snippet("    ", "__ret", "__ret_c"));
                    tail.push("    __ret_c".to_string());
                } else {
                    todo_sites.push(TodoSite {
                        location: format!("{fn_name}:ret"),
                        spec_excerpt: "cstring return needs an idiomatic String".into(),
                    });
                    tail.push("    todo!(\"ret\")".to_string());
                }
            }
            _ => {
                todo_sites.push(TodoSite {
                    location: format!("{fn_name}:ret"),
                    spec_excerpt: "return mapping outside the rule set".into(),
                });
                tail.push("    todo!(\"ret\")".to_string());
            }
        },
        (None, Some(u_ty)) => {
            // Implicit identity: both sides return castable scalars.
            match &i_sig.ret {
                Some(i_ty) if u_ty.trim() == i_ty.trim() => tail.push("    __ret".to_string()),
                Some(i_ty) if is_castable_scalar(u_ty) && is_castable_scalar(i_ty) => {
                    tail.push(format!("    {}", cast_expr("__ret", i_ty, u_ty)));
                }
                Some(i_ty) => {
                    todo_sites.push(TodoSite {
                        location: format!("{fn_name}:ret"),
                        spec_excerpt: format!(
                            "no SPEC return mapping and `{i_ty}` does not cast to `{u_ty}`"
                        ),
                    });
                    tail.push("    // TODO: ret: unsupported mapping".to_string());
                    tail.push("    todo!(\"ret\")".to_string());
                }
                None => {
                    todo_sites.push(TodoSite {
                        location: format!("{fn_name}:ret"),
                        spec_excerpt: format!(
                            "C returns `{u_ty}` but the idiomatic function returns nothing"
                        ),
                    });
                    tail.push("    todo!(\"ret\")".to_string());
                }
            }
        }
        (None, None) => {
            // Idiomatic value (if any) feeds out-pointer write-backs in
            // `post`; nothing to return.
            if !i_has_ret && !post.is_empty() {
                // no-op; post already wired
            }
        }
    }
    (binding, tail)
}

#[cfg(test)]
mod tests {
    use super::super::validate_spec;
    use super::*;

    const F1: &str = r#"{
  "function_name": "sum",
  "fields": [
    { "u_field": {"name": "xs", "type": "*const i32", "shape": { "ptr": { "kind": "slice", "len_from": "n" } } },
      "i_field": {"name": "xs", "type": "&[i32]" } },
    { "u_field": {"name": "n",  "type": "usize",      "shape": "scalar" },
      "i_field": {"name": "xs.len", "type": "usize" } }
  ]
}"#;

    #[test]
    fn f1_sum_bridges_slice() {
        let spec = validate_spec(F1).unwrap();
        let art = generate_function_harness(
            &spec,
            "pub unsafe extern \"C\" fn sum(xs: *const i32, n: usize) -> i32;",
            "pub fn sum_idiomatic(xs: &[i32]) -> i32;",
        )
        .unwrap();
        assert!(art.todo_sites.is_empty());
        let s = &art.shim_source;
        assert!(s.contains("#[export_name = \"sum\"]"));
        assert!(s.contains("fn sum_c(xs: *const i32, n: usize) -> i32"));
        assert!(s.contains("std::slice::from_raw_parts(xs, xs_len)"));
        assert!(s.contains("let __ret = sum_idiomatic(xs_view);"));
    }

    const F2: &str = r#"{
  "function_name": "get_value",
  "fields": [
    { "u_field": {"name": "out_value", "type": "*mut i32", "shape": { "ptr": { "kind": "ref" } } },
      "i_field": {"name": "ret", "type": "i32" } }
  ]
}"#;

    #[test]
    fn f2_out_pointer_from_return() {
        let spec = validate_spec(F2).unwrap();
        let art = generate_function_harness(
            &spec,
            "pub unsafe extern \"C\" fn get_value(out_value: *mut i32);",
            "pub fn get_value_idiomatic() -> i32;",
        )
        .unwrap();
        assert!(art.todo_sites.is_empty());
        let s = &art.shim_source;
        assert!(s.contains("let __ret = get_value_idiomatic();"));
        assert!(s.contains("*out_value = __ret;"));
        // Default ref policy is forbidden-null: explicit abort guard.
        assert!(s.contains("null=forbidden"));
    }

    const F3: &str = r#"{
  "function_name": "set_name",
  "fields": [
    { "u_field": {"name": "name", "type": "*const c_char", "shape": { "ptr": { "kind": "cstring", "null": "nullable" } } },
      "i_field": {"name": "name", "type": "Option<&str>" } }
  ]
}"#;

    #[test]
    fn f3_nullable_cstring_to_option() {
        let spec = validate_spec(F3).unwrap();
        let art = generate_function_harness(
            &spec,
            "pub unsafe extern \"C\" fn set_name(name: *const libc::c_char);",
            "pub fn set_name_idiomatic(name: Option<&str>);",
        )
        .unwrap();
        assert!(art.todo_sites.is_empty());
        let s = &art.shim_source;
        assert!(s.contains("if name.is_null()"));
        assert!(s.contains("name_opt.as_deref()"));
        assert!(!s.contains("abort"));
    }

    #[test]
    fn all_scalar_function_is_pass_through() {
        let raw = r#"{
  "function_name": "add",
  "fields": [
    { "u_field": {"name": "a", "type": "libc::c_int", "shape": "scalar" }, "i_field": {"name": "a", "type": "i32" } },
    { "u_field": {"name": "b", "type": "libc::c_int", "shape": "scalar" }, "i_field": {"name": "b", "type": "i32" } }
  ]
}"#;
        let spec = validate_spec(raw).unwrap();
        let art = generate_function_harness(
            &spec,
            "pub unsafe extern \"C\" fn add(a: libc::c_int, b: libc::c_int) -> libc::c_int;",
            "pub fn add_idiomatic(a: i32, b: i32) -> i32;",
        )
        .unwrap();
        assert!(art.todo_sites.is_empty());
        let s = &art.shim_source;
        assert!(s.contains("add_idiomatic(a as i32, b as i32)"));
        assert!(s.contains("__ret as libc::c_int"));
        assert!(!s.contains("slice"));
    }

    #[test]
    fn unsupported_container_yields_exactly_one_todo() {
        let raw = r#"{
  "function_name": "compute",
  "fields": [
    { "u_field": {"name": "x", "type": "i32", "shape": "scalar" }, "i_field": {"name": "x", "type": "i32" } },
    { "u_field": {"name": "meta", "type": "*const libc::c_char", "shape": { "ptr": { "kind": "cstring" } } },
      "i_field": {"name": "meta", "type": "HashMap<String, String>" } }
  ]
}"#;
        let spec = validate_spec(raw).unwrap();
        let art = generate_function_harness(
            &spec,
            "pub unsafe extern \"C\" fn compute(x: i32, meta: *const libc::c_char) -> i32;",
            "pub fn compute_idiomatic(x: i32, meta: HashMap<String, String>) -> i32;",
        )
        .unwrap();
        assert_eq!(art.todo_sites.len(), 1);
        assert_eq!(art.todo_sites[0].location, "compute:param meta");
        let s = &art.shim_source;
        assert!(s.contains("// TODO: param meta of type HashMap<String, String>: unsupported mapping"));
        assert!(s.contains("todo!(\"param meta\")"));
        // The supported parameter still converts normally.
        assert!(s.contains("compute_idiomatic(x, todo!(\"param meta\"))"));
    }

    #[test]
    fn determinism_byte_identical() {
        let spec = validate_spec(F1).unwrap();
        let gen = || {
            generate_function_harness(
                &spec,
                "pub unsafe extern \"C\" fn sum(xs: *const i32, n: usize) -> i32;",
                "pub fn sum_idiomatic(xs: &[i32]) -> i32;",
            )
            .unwrap()
        };
        assert_eq!(gen(), gen());
    }
}
