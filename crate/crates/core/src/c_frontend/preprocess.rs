//! Preprocessing of C sources: project-local headers are textually expanded
//! (recursively, once per canonical path); system-header includes are kept
//! verbatim; remaining directives are resolved by the host preprocessor.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::proc::{run_cmd, EnvPolicy};

use super::FrontendError;

const KEEP_MARKER: &str = "#pragma oxidize_keep_include";

/// Everything needed to preprocess and parse one program.
#[derive(Debug, Clone, Default)]
pub struct CompileContext {
    pub source_paths: Vec<PathBuf>,
    pub include_dirs: Vec<PathBuf>,
    /// `NAME` or `NAME=VALUE` strings passed through as -D flags.
    pub macro_defines: Vec<String>,
    /// Opaque flags relevant to preprocessing/parsing (e.g. -std=c11).
    pub extra_flags: Vec<String>,
    /// Link-time flags, kept separate from the preprocessing set.
    pub link_flags: Vec<String>,
}

impl CompileContext {
    pub fn new(
        source_paths: Vec<PathBuf>,
        include_dirs: Vec<PathBuf>,
        macro_defines: Vec<String>,
    ) -> Result<Self, FrontendError> {
        let ctx = CompileContext { source_paths, include_dirs, macro_defines, ..Default::default() };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), FrontendError> {
        for p in &self.source_paths {
            std::fs::metadata(p).map_err(|e| FrontendError::Io {
                context: format!("source file {}", p.display()),
                source: e,
            })?;
        }
        Ok(())
    }

    /// Merges flags from a compile-commands database (the conventional JSON
    /// array of {directory, command|arguments, file} records) for the files
    /// in `source_paths`.
    pub fn apply_compile_commands(&mut self, db_path: &Path) -> Result<(), FrontendError> {
        #[derive(Deserialize)]
        struct Entry {
            directory: Option<String>,
            command: Option<String>,
            arguments: Option<Vec<String>>,
            file: String,
        }
        let text = std::fs::read_to_string(db_path).map_err(|e| FrontendError::Io {
            context: format!("compile commands {}", db_path.display()),
            source: e,
        })?;
        let entries: Vec<Entry> = serde_json::from_str(&text)
            .map_err(|e| FrontendError::PreprocessorFailure {
                diagnostics: format!("malformed compile-commands database: {e}"),
            })?;
        let wanted: BTreeSet<PathBuf> = self
            .source_paths
            .iter()
            .map(|p| p.canonicalize().unwrap_or_else(|_| p.clone()))
            .collect();
        for entry in entries {
            let dir = entry.directory.clone().map(PathBuf::from).unwrap_or_default();
            let file = {
                let p = PathBuf::from(&entry.file);
                let abs = if p.is_absolute() { p } else { dir.join(p) };
                abs.canonicalize().unwrap_or(abs)
            };
            if !wanted.contains(&file) {
                continue;
            }
            let argv = match (&entry.arguments, &entry.command) {
                (Some(args), _) => args.clone(),
                (None, Some(cmd)) => split_command(cmd),
                (None, None) => continue,
            };
            self.absorb_flags(&argv, &dir);
        }
        Ok(())
    }

    fn absorb_flags(&mut self, argv: &[String], dir: &Path) {
        let mut it = argv.iter().skip(1).peekable();
        while let Some(arg) = it.next() {
            if let Some(rest) = arg.strip_prefix("-I") {
                let path = if rest.is_empty() {
                    it.next().cloned().unwrap_or_default()
                } else {
                    rest.to_string()
                };
                let p = PathBuf::from(path);
                let abs = if p.is_absolute() { p } else { dir.join(p) };
                if !self.include_dirs.contains(&abs) {
                    self.include_dirs.push(abs);
                }
            } else if let Some(rest) = arg.strip_prefix("-D") {
                let def = if rest.is_empty() {
                    it.next().cloned().unwrap_or_default()
                } else {
                    rest.to_string()
                };
                if !def.is_empty() && !self.macro_defines.contains(&def) {
                    self.macro_defines.push(def);
                }
            } else if arg.starts_with("-std=") {
                if !self.extra_flags.contains(arg) {
                    self.extra_flags.push(arg.clone());
                }
            } else if arg.starts_with("-l")
                || arg.starts_with("-L")
                || arg.starts_with("-Wl,")
                || arg == "-shared"
                || arg == "-static"
                || arg == "-pthread"
            {
                if !self.link_flags.contains(arg) {
                    self.link_flags.push(arg.clone());
                }
            }
        }
    }
}

/// Whitespace splitting with shell-style single/double quotes.
fn split_command(cmd: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = cmd.chars().peekable();
    let mut in_single = false;
    let mut in_double = false;
    while let Some(c) = chars.next() {
        match c {
            '\'' if !in_double => in_single = !in_single,
            '"' if !in_single => in_double = !in_double,
            '\\' if !in_single => {
                if let Some(&n) = chars.peek() {
                    cur.push(n);
                    chars.next();
                }
            }
            c if c.is_whitespace() && !in_single && !in_double => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Preprocesses every source in the context. Returns file path -> text.
pub fn preprocess(ctx: &CompileContext) -> Result<BTreeMap<PathBuf, String>, FrontendError> {
    let mut out = BTreeMap::new();
    for path in &ctx.source_paths {
        out.insert(path.clone(), preprocess_file(ctx, path)?);
    }
    Ok(out)
}

/// Preprocesses a single file (exposed for idempotence checks on text that
/// is already on disk).
pub fn preprocess_file(ctx: &CompileContext, path: &Path) -> Result<String, FrontendError> {
    let text = std::fs::read_to_string(path).map_err(|e| FrontendError::Io {
        context: format!("source file {}", path.display()),
        source: e,
    })?;
    preprocess_text(ctx, &text, path)
}

pub fn preprocess_text(
    ctx: &CompileContext,
    text: &str,
    origin: &Path,
) -> Result<String, FrontendError> {
    let mut kept_includes = Vec::new();
    let mut expanded_guard = BTreeSet::new();
    let inlined = inline_local_headers(ctx, text, origin, &mut kept_includes, &mut expanded_guard)?;
    let resolved = if needs_host_preprocessor(&inlined) {
        run_host_preprocessor(ctx, &inlined)?
    } else {
        inlined
    };
    Ok(restore_kept_includes(&resolved, &kept_includes))
}

fn inline_local_headers(
    ctx: &CompileContext,
    text: &str,
    origin: &Path,
    kept: &mut Vec<String>,
    expanded: &mut BTreeSet<PathBuf>,
) -> Result<String, FrontendError> {
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        let Some(include) = parse_include(trimmed) else {
            out.push_str(line);
            continue;
        };
        match include {
            Include::Quoted(name) => {
                let resolved = resolve_header(ctx, &name, origin, true).ok_or_else(|| {
                    FrontendError::MissingHeader { include: name.clone(), from: origin.to_path_buf() }
                })?;
                inline_header(ctx, &resolved, kept, expanded, &mut out)?;
            }
            Include::Angled(name) => {
                match resolve_header(ctx, &name, origin, false) {
                    // Angle includes that live in the project include dirs
                    // are project headers; everything else is a system
                    // header and stays verbatim.
                    Some(resolved) => inline_header(ctx, &resolved, kept, expanded, &mut out)?,
                    None => {
                        out.push_str(&format!("{KEEP_MARKER} {}\n", kept.len()));
                        kept.push(line.trim_end().to_string());
                    }
                }
            }
        }
    }
    Ok(out)
}

fn inline_header(
    ctx: &CompileContext,
    header: &Path,
    kept: &mut Vec<String>,
    expanded: &mut BTreeSet<PathBuf>,
    out: &mut String,
) -> Result<(), FrontendError> {
    let canonical = header.canonicalize().unwrap_or_else(|_| header.to_path_buf());
    // Each local header expands at most once per translation unit.
    if !expanded.insert(canonical.clone()) {
        return Ok(());
    }
    let body = std::fs::read_to_string(header).map_err(|e| FrontendError::Io {
        context: format!("header {}", header.display()),
        source: e,
    })?;
    let inlined = inline_local_headers(ctx, &body, header, kept, expanded)?;
    for line in inlined.split_inclusive('\n') {
        // `#pragma once` is obsolete after guard-tracked expansion.
        if line.trim_start().starts_with("#pragma once") {
            continue;
        }
        out.push_str(line);
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(())
}

enum Include {
    Quoted(String),
    Angled(String),
}

fn parse_include(line: &str) -> Option<Include> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix("include")?.trim_start();
    if let Some(inner) = rest.strip_prefix('"') {
        let end = inner.find('"')?;
        return Some(Include::Quoted(inner[..end].to_string()));
    }
    if let Some(inner) = rest.strip_prefix('<') {
        let end = inner.find('>')?;
        return Some(Include::Angled(inner[..end].to_string()));
    }
    None
}

fn resolve_header(
    ctx: &CompileContext,
    name: &str,
    from: &Path,
    quoted: bool,
) -> Option<PathBuf> {
    if quoted {
        if let Some(dir) = from.parent() {
            let candidate = dir.join(name);
            if candidate.is_file() {
                return Some(candidate);
            }
        }
    }
    for dir in &ctx.include_dirs {
        let candidate = dir.join(name);
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

/// True if any directive other than kept-include markers and plain pragmas
/// remains; those need the host preprocessor.
fn needs_host_preprocessor(text: &str) -> bool {
    for line in text.lines() {
        let t = line.trim_start();
        if !t.starts_with('#') {
            continue;
        }
        let word: String = t[1..].trim_start().chars().take_while(|c| c.is_ascii_alphabetic()).collect();
        match word.as_str() {
            "pragma" | "" => continue,
            _ => return true,
        }
    }
    false
}

fn run_host_preprocessor(ctx: &CompileContext, text: &str) -> Result<String, FrontendError> {
    let scratch = std::env::temp_dir().join(format!(
        "oxidize-cpp-{}-{}.c",
        std::process::id(),
        unique_counter()
    ));
    std::fs::write(&scratch, text).map_err(|e| FrontendError::Io {
        context: format!("scratch file {}", scratch.display()),
        source: e,
    })?;
    let mut args: Vec<String> = vec!["-C".into(), "-P".into(), "-ffreestanding".into()];
    for d in &ctx.macro_defines {
        args.push(format!("-D{d}"));
    }
    args.extend(ctx.extra_flags.iter().cloned());
    args.push(scratch.display().to_string());
    let argv: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    let out = run_cmd("cpp", &argv, None, None, Some(Duration::from_secs(60)), EnvPolicy::Build, &[])
        .map_err(|e| FrontendError::ToolMissing {
            tool: "cpp".into(),
            hint: format!("install a C toolchain (gcc provides cpp): {e}"),
        })?;
    let _ = std::fs::remove_file(&scratch);
    if !out.success() {
        return Err(FrontendError::PreprocessorFailure { diagnostics: out.stderr_text() });
    }
    Ok(out.stdout_text())
}

fn restore_kept_includes(text: &str, kept: &[String]) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(KEEP_MARKER) {
            if let Ok(idx) = rest.trim().parse::<usize>() {
                if let Some(original) = kept.get(idx) {
                    out.push_str(original);
                    out.push('\n');
                    continue;
                }
            }
        }
        out.push_str(line);
    }
    out
}

fn unique_counter() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static N: AtomicU64 = AtomicU64::new(0);
    N.fetch_add(1, Ordering::Relaxed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn system_include_only_is_kept_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let main = write(dir.path(), "m.c", "#include <stdio.h>\nint main(void) { return 0; }\n");
        let ctx = CompileContext::new(vec![main.clone()], vec![], vec![]).unwrap();
        let out = preprocess_file(&ctx, &main).unwrap();
        assert_eq!(out, "#include <stdio.h>\nint main(void) { return 0; }\n");
    }

    #[test]
    fn file_without_directives_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let text = "int f(int x) {\n    return x; /* c */\n}\n";
        let main = write(dir.path(), "m.c", text);
        let ctx = CompileContext::new(vec![main.clone()], vec![], vec![]).unwrap();
        assert_eq!(preprocess_file(&ctx, &main).unwrap(), text);
    }

    #[test]
    fn local_headers_inline_recursively_with_guard_dedup() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "types.h", "#ifndef TYPES_H\n#define TYPES_H\ntypedef int myint;\n#endif\n");
        write(
            dir.path(),
            "util.h",
            "#ifndef UTIL_H\n#define UTIL_H\n#include \"types.h\"\nmyint util(myint x);\n#endif\n",
        );
        let main = write(
            dir.path(),
            "m.c",
            "#include \"util.h\"\n#include \"types.h\"\nmyint util(myint x) { return x; }\n",
        );
        let ctx = CompileContext::new(vec![main.clone()], vec![], vec![]).unwrap();
        let out = preprocess_file(&ctx, &main).unwrap();
        assert_eq!(out.matches("typedef int myint;").count(), 1);
        assert!(out.contains("myint util(myint x);"));
        // Guards resolved away.
        assert!(!out.contains("TYPES_H"));
        // Oracle: the host preprocessor with include paths agrees on the
        // typedef appearing exactly once.
        let host = run_cmd(
            "cpp",
            &["-P", &format!("-I{}", dir.path().display()), &main.display().to_string()],
            None,
            None,
            None,
            EnvPolicy::Build,
            &[],
        )
        .unwrap();
        assert_eq!(host.stdout_text().matches("typedef int myint;").count(), 1);
    }

    #[test]
    fn missing_quoted_header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let main = write(dir.path(), "m.c", "#include \"nope.h\"\n");
        let ctx = CompileContext::new(vec![main.clone()], vec![], vec![]).unwrap();
        match preprocess_file(&ctx, &main) {
            Err(FrontendError::MissingHeader { include, .. }) => assert_eq!(include, "nope.h"),
            other => panic!("expected MissingHeader, got {other:?}"),
        }
    }

    #[test]
    fn defines_and_conditionals_resolve_with_ctx_flags() {
        let dir = tempfile::tempdir().unwrap();
        let main = write(
            dir.path(),
            "m.c",
            "#include <stdio.h>\n#define N 3\n#ifdef FAST\nint mode = 1;\n#else\nint mode = 0;\n#endif\nint n = N;\n",
        );
        let ctx =
            CompileContext::new(vec![main.clone()], vec![], vec!["FAST".into()]).unwrap();
        let out = preprocess_file(&ctx, &main).unwrap();
        assert!(out.contains("#include <stdio.h>"));
        assert!(out.contains("int mode = 1;"));
        assert!(out.contains("int n = 3;"));
        assert!(!out.contains("#define"));
    }

    #[test]
    fn preprocessing_is_idempotent_once_expanded() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "h.h", "#define K 7\nint helper(void);\n");
        let main = write(dir.path(), "m.c", "#include <stdlib.h>\n#include \"h.h\"\nint v = K;\n");
        let ctx = CompileContext::new(vec![main.clone()], vec![], vec![]).unwrap();
        let once = preprocess_file(&ctx, &main).unwrap();
        let twice = preprocess_text(&ctx, &once, &main).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn angled_include_found_in_project_dirs_is_expanded() {
        let dir = tempfile::tempdir().unwrap();
        let inc = dir.path().join("inc");
        std::fs::create_dir(&inc).unwrap();
        write(&inc, "proj.h", "int proj(void);\n");
        let main = write(dir.path(), "m.c", "#include <proj.h>\nint proj(void) { return 1; }\n");
        let ctx = CompileContext::new(vec![main.clone()], vec![inc], vec![]).unwrap();
        let out = preprocess_file(&ctx, &main).unwrap();
        assert!(out.contains("int proj(void);"));
        assert!(!out.contains("#include"));
    }

    #[test]
    fn compile_commands_flags_are_separated() {
        let dir = tempfile::tempdir().unwrap();
        let main = write(dir.path(), "m.c", "int x;\n");
        let db = write(
            dir.path(),
            "compile_commands.json",
            &format!(
                r#"[{{"directory": "{}", "command": "gcc -Iinc -DX=1 -std=c11 -lm -Wl,--gc-sections -c m.c -o m.o", "file": "m.c"}}]"#,
                dir.path().display()
            ),
        );
        let mut ctx = CompileContext::new(vec![main], vec![], vec![]).unwrap();
        ctx.apply_compile_commands(&db).unwrap();
        assert!(ctx.include_dirs.iter().any(|d| d.ends_with("inc")));
        assert_eq!(ctx.macro_defines, vec!["X=1"]);
        assert_eq!(ctx.extra_flags, vec!["-std=c11"]);
        assert_eq!(ctx.link_flags, vec!["-lm", "-Wl,--gc-sections"]);
    }
}
