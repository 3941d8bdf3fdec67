//! Subprocess execution with timeouts, environment control and a global
//! job-slot limit shared by every compiler/test invocation.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Environment passed to child processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvPolicy {
    /// Clear everything except PATH/HOME and the cargo/rustup homes.
    /// Build tools need those; test binaries get PATH only plus whatever
    /// `extra_env` adds.
    Build,
    /// Clear everything except PATH. Used for running test executables.
    Minimal,
}

#[derive(Debug)]
pub struct CmdOutput {
    pub exit_code: Option<i32>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub timed_out: bool,
}

impl CmdOutput {
    pub fn success(&self) -> bool {
        !self.timed_out && self.exit_code == Some(0)
    }

    pub fn stderr_text(&self) -> String {
        String::from_utf8_lossy(&self.stderr).into_owned()
    }

    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }
}

struct JobSlots {
    available: Mutex<usize>,
    cond: Condvar,
}

static SLOTS: JobSlots = JobSlots { available: Mutex::new(usize::MAX), cond: Condvar::new() };

/// Caps the number of concurrently running subprocesses. Called once from
/// pipeline configuration; later calls adjust the cap for new acquisitions.
pub fn set_job_slots(n: usize) {
    let mut avail = SLOTS.available.lock().unwrap();
    *avail = n.max(1);
    SLOTS.cond.notify_all();
}

struct SlotGuard;

fn acquire_slot() -> SlotGuard {
    let mut avail = SLOTS.available.lock().unwrap();
    while *avail == 0 {
        avail = SLOTS.cond.wait(avail).unwrap();
    }
    if *avail != usize::MAX {
        *avail -= 1;
    }
    SlotGuard
}

impl Drop for SlotGuard {
    fn drop(&mut self) {
        let mut avail = SLOTS.available.lock().unwrap();
        if *avail != usize::MAX {
            *avail += 1;
        }
        SLOTS.cond.notify_one();
    }
}

/// Runs a command to completion, feeding `stdin` and killing the child on
/// timeout. Output is captured fully.
pub fn run_cmd(
    program: &str,
    args: &[&str],
    cwd: Option<&Path>,
    stdin: Option<&[u8]>,
    timeout: Option<Duration>,
    env: EnvPolicy,
    extra_env: &[(&str, &str)],
) -> std::io::Result<CmdOutput> {
    let _slot = acquire_slot();
    let mut cmd = Command::new(program);
    cmd.args(args);
    if let Some(dir) = cwd {
        cmd.current_dir(dir);
    }
    cmd.env_clear();
    let keep: &[&str] = match env {
        EnvPolicy::Build => &["PATH", "HOME", "CARGO_HOME", "RUSTUP_HOME", "TMPDIR"],
        EnvPolicy::Minimal => &["PATH"],
    };
    for key in keep {
        if let Ok(v) = std::env::var(key) {
            cmd.env(key, v);
        }
    }
    for (k, v) in extra_env {
        cmd.env(k, v);
    }
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    cmd.stdout(Stdio::piped());
    cmd.stderr(Stdio::piped());
    let mut child = cmd.spawn()?;

    if let Some(bytes) = stdin {
        let mut pipe = child.stdin.take().expect("stdin piped");
        // The child may exit without draining stdin; ignore broken pipes.
        let _ = pipe.write_all(bytes);
        drop(pipe);
    }

    // Drain pipes on threads so a chatty child cannot deadlock against the
    // timeout loop below.
    let mut out_pipe = child.stdout.take().expect("stdout piped");
    let mut err_pipe = child.stderr.take().expect("stderr piped");
    let out_thread = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = out_pipe.read_to_end(&mut buf);
        buf
    });
    let err_thread = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = err_pipe.read_to_end(&mut buf);
        buf
    });

    let started = Instant::now();
    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if let Some(limit) = timeout {
            if started.elapsed() > limit {
                let _ = child.kill();
                let _ = child.wait();
                timed_out = true;
                break None;
            }
        }
        std::thread::sleep(Duration::from_millis(5));
    };

    let stdout = out_thread.join().unwrap_or_default();
    let stderr = err_thread.join().unwrap_or_default();
    Ok(CmdOutput {
        exit_code: status.and_then(|s| s.code()),
        stdout,
        stderr,
        timed_out,
    })
}

/// True if `program` resolves on PATH and runs.
pub fn tool_available(program: &str, probe_arg: &str) -> bool {
    run_cmd(program, &[probe_arg], None, None, Some(Duration::from_secs(10)), EnvPolicy::Build, &[])
        .map(|o| o.exit_code.is_some())
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn captures_output_and_exit_code() {
        let out = run_cmd("sh", &["-c", "echo hi; echo err >&2; exit 3"], None, None, None, EnvPolicy::Minimal, &[]).unwrap();
        assert_eq!(out.exit_code, Some(3));
        assert_eq!(out.stdout, b"hi\n");
        assert_eq!(out.stderr, b"err\n");
    }

    #[test]
    fn feeds_stdin() {
        let out = run_cmd("cat", &[], None, Some(b"payload"), None, EnvPolicy::Minimal, &[]).unwrap();
        assert_eq!(out.stdout, b"payload");
    }

    #[test]
    fn kills_on_timeout() {
        let out = run_cmd(
            "sh",
            &["-c", "sleep 30"],
            None,
            None,
            Some(Duration::from_millis(200)),
            EnvPolicy::Minimal,
            &[],
        )
        .unwrap();
        assert!(out.timed_out);
        assert_eq!(out.exit_code, None);
    }

    #[test]
    fn minimal_env_is_cleared() {
        std::env::set_var("OXIDIZE_LEAK_PROBE", "1");
        let out = run_cmd("env", &[], None, None, None, EnvPolicy::Minimal, &[]).unwrap();
        let text = out.stdout_text();
        assert!(!text.contains("OXIDIZE_LEAK_PROBE"));
        std::env::remove_var("OXIDIZE_LEAK_PROBE");
    }
}
