use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn header_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/slidefreq.h")
}

#[test]
fn header_declares_the_api() {
    let raw = fs::read_to_string(header_path()).expect("generated header");
    // Collapse whitespace and drop tag keywords in signatures so the checks
    // do not depend on cbindgen's line wrapping.
    let text = raw
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace("(enum ", "(")
        .replace("(struct ", "(")
        .replace(", struct ", ", ")
        .replace(", enum ", ", ")
        .replace("; enum SfStatus ", "; SfStatus ")
        .replace("*/ enum SfStatus ", "*/ SfStatus ");
    for needle in [
        "#ifndef SLIDEFREQ_H",
        "typedef struct SfSdft SfSdft;",
        "SF_STATUS_OK = 0",
        "SF_STATUS_DEGENERATE_DENOMINATOR = 5",
        "SF_ESTIMATOR_PROPOSED = 0",
        "typedef struct SfEstimate",
        "SfStatus sf_sdft_new(size_t n_bins, double damping, size_t resync_interval, SfSdft **out);",
        "void sf_sdft_free(SfSdft *handle);",
        "SfStatus sf_sdft_push_interleaved(",
        "SfStatus sf_sdft_estimate(",
        "SfStatus sf_kernel_f(",
        "const char *sf_status_message(SfStatus status);",
    ] {
        assert!(text.contains(needle), "header lacks `{needle}`:\n{raw}");
    }
}

/// Compile and run a small C client against the static library when a C
/// compiler is on PATH.
#[test]
fn c_client_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let target_dir = Path::new(env!("CARGO_TARGET_TMPDIR")).parent().unwrap().to_path_buf();
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = [
        profile_dir.join("libslidefreq_ffi.a"),
        target_dir.join("debug/libslidefreq_ffi.a"),
    ]
    .into_iter()
    .find(|p| p.exists());

    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("client.c");
    fs::write(&src, C_CLIENT).unwrap();
    let include = header_path().parent().unwrap().to_path_buf();

    let Some(lib) = lib else {
        let status = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(&include)
            .arg(&src)
            .status()
            .unwrap();
        assert!(status.success());
        return;
    };
    let exe = tmp.path().join("client");
    let status = Command::new(&cc)
        .args(["-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("peak=30 "), "{text}");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

const C_CLIENT: &str = r#"
#include <math.h>
#include <stdio.h>
#include "slidefreq.h"

int main(void) {
    SfSdft *h = NULL;
    SfStatus st = sf_sdft_new(128, 0.9, 0, &h);
    if (st != SF_STATUS_OK) {
        fprintf(stderr, "%s\n", sf_status_message(st));
        return 1;
    }
    const double fs = 128e6, f = 30.3e6;
    for (int i = 0; i < 128; i++) {
        double ph = 2.0 * M_PI * f / fs * i;
        sf_sdft_push(h, cos(ph), sin(ph));
    }
    SfEstimate est;
    st = sf_sdft_estimate(h, SF_ESTIMATOR_PROPOSED, fs, &est);
    sf_sdft_free(h);
    if (st != SF_STATUS_OK || fabs(est.freq_hz - f) > 100.0) {
        fprintf(stderr, "%s %f\n", sf_status_message(st), est.freq_hz);
        return 1;
    }
    printf("peak=%zu freq=%.3f\n", est.peak_index, est.freq_hz);
    return 0;
}
"#;
