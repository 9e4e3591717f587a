use std::path::Path;
use std::process::Command;

/// The generated header must compile as C and declare the full surface.
#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lspace.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "ls_ribbon_parse",
        "ls_ribbon_free",
        "ls_ribbon_counts",
        "ls_ribbon_partial_dual",
        "ls_ribbon_vassiliev",
        "ls_ribbon_lspace",
        "ls_ribbon_to_text",
        "ls_matrix_interlace",
        "ls_string_free",
        "ls_last_error_message",
        "LS_STATUS_PRECONDITION",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler, skipping syntax check");
        return;
    };
    assert!(status.success());
}
