//! Shared classification rules for harness and converter generation.

/// Scalar types castable with `as` between the C-facing and idiomatic
/// sides: fixed-width integer/float families plus byte/char aliases.
/// Anything else scalar-shaped must match exactly or becomes a TODO.
pub const CASTABLE_SCALARS: &[&str] = &[
    "i8", "i16", "i32", "i64", "i128", "u8", "u16", "u32", "u64", "u128", "usize", "isize",
    "f32", "f64", "char",
    "libc::c_char", "libc::c_schar", "libc::c_uchar", "libc::c_short", "libc::c_ushort",
    "libc::c_int", "libc::c_uint", "libc::c_long", "libc::c_ulong", "libc::c_longlong",
    "libc::c_ulonglong", "libc::c_float", "libc::c_double", "libc::size_t", "libc::ssize_t",
    "c_char", "c_schar", "c_uchar", "c_short", "c_ushort", "c_int", "c_uint", "c_long",
    "c_ulong", "c_longlong", "c_ulonglong", "c_float", "c_double", "size_t", "ssize_t",
];

pub fn is_castable_scalar(ty: &str) -> bool {
    CASTABLE_SCALARS.contains(&ty.trim())
}

/// `as`-cast expression, omitting the cast when types already agree.
pub fn cast_expr(expr: &str, from: &str, to: &str) -> String {
    if from.trim() == to.trim() {
        expr.to_string()
    } else {
        format!("{expr} as {to}")
    }
}

/// Element type behind `*const T` / `*mut T`.
pub fn pointee(ty: &str) -> Option<(&str, bool)> {
    let t = ty.trim();
    if let Some(rest) = t.strip_prefix("*mut ") {
        return Some((rest.trim(), true));
    }
    if let Some(rest) = t.strip_prefix("*const ") {
        return Some((rest.trim(), false));
    }
    None
}

/// Inner type of `Option<T>`.
pub fn option_inner(ty: &str) -> Option<&str> {
    let t = ty.trim();
    t.strip_prefix("Option<")?.strip_suffix('>').map(str::trim)
}

/// Element type of `&[T]`, `&mut [T]` or `Vec<T>`, with a mutability flag
/// for the borrowed forms.
pub fn slice_elem(ty: &str) -> Option<(&str, SliceForm)> {
    let t = ty.trim();
    if let Some(rest) = t.strip_prefix("&mut [") {
        return rest.strip_suffix(']').map(|e| (e.trim(), SliceForm::BorrowedMut));
    }
    if let Some(rest) = t.strip_prefix("&[") {
        return rest.strip_suffix(']').map(|e| (e.trim(), SliceForm::Borrowed));
    }
    if let Some(rest) = t.strip_prefix("Vec<") {
        return rest.strip_suffix('>').map(|e| (e.trim(), SliceForm::Owned));
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceForm {
    Borrowed,
    BorrowedMut,
    Owned,
}

/// Idiomatic string forms a cstring mapping may target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringForm {
    BorrowedStr,
    OwnedString,
    OptionStr,
    OptionString,
}

pub fn string_form(ty: &str) -> Option<StringForm> {
    match ty.trim() {
        "&str" => Some(StringForm::BorrowedStr),
        "String" => Some(StringForm::OwnedString),
        "Option<&str>" => Some(StringForm::OptionStr),
        "Option<String>" => Some(StringForm::OptionString),
        _ => None,
    }
}

/// Converter naming convention: `cpoint_to_point(u: &CPoint) -> Point` and
/// `point_to_cpoint(i: &Point, u: &mut CPoint)`.
pub fn converter_name(from_ty: &str, to_ty: &str) -> String {
    format!("{}_to_{}", snake(from_ty), snake(to_ty))
}

pub fn snake(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.trim().chars().enumerate() {
        if c.is_uppercase() {
            if i > 0 && !out.ends_with('_') {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Seed length for variable-length buffers in roundtrip selftests.
pub const SEED_LEN: u64 = 4;

/// Emits a C-allocator copy of a Rust string expression, yielding a
/// `*mut c_char` binding named `out_name`. Strings handed back to C use the
/// C allocator so the caller's free path works.
pub fn malloc_cstring_snippet(indent: &str, src_expr: &str, out_name: &str) -> String {
    format!(
        "{indent}let __bytes = {src_expr}.as_bytes();\n\
         {indent}let {out_name} = libc::malloc(__bytes.len() + 1) as *mut libc::c_char;\n\
         {indent}if {out_name}.is_null() {{\n\
         {indent}    std::process::abort();\n\
         {indent}}}\n\
         {indent}std::ptr::copy_nonoverlapping(__bytes.as_ptr(), {out_name} as *mut u8, __bytes.len());\n\
         {indent}*{out_name}.add(__bytes.len()) = 0;\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_classifiers() {
        assert!(is_castable_scalar("libc::c_int"));
        assert!(!is_castable_scalar("MyStruct"));
        assert_eq!(pointee("*const libc::c_char"), Some(("libc::c_char", false)));
        assert_eq!(pointee("*mut i32"), Some(("i32", true)));
        assert_eq!(slice_elem("&[i32]"), Some(("i32", SliceForm::Borrowed)));
        assert_eq!(slice_elem("Vec<u8>"), Some(("u8", SliceForm::Owned)));
        assert_eq!(option_inner("Option<&str>"), Some("&str"));
        assert_eq!(string_form("Option<String>"), Some(StringForm::OptionString));
    }

    #[test]
    fn converter_names_are_snake_case() {
        assert_eq!(converter_name("CPoint", "Point"), "c_point_to_point");
        assert_eq!(cast_expr("x", "i32", "i32"), "x");
        assert_eq!(cast_expr("x", "libc::c_int", "i32"), "x as i32");
    }
}
