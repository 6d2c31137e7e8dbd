use std::process::{Command, Output};

fn nmck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmck")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn serial_roundtrip_exits_zero() {
    let o = nmck(&["roundtrip", "--save-ranks", "1", "--load-ranks", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("passed=true"));
}

#[test]
fn three_to_seven_p4_roundtrip_exits_zero() {
    let o = nmck(&[
        "roundtrip",
        "--save-ranks",
        "3",
        "--load-ranks",
        "7",
        "--mesh",
        "unit-square:8",
        "--degree",
        "4",
        "--field",
        "x^4 - 3*x^2*y + y^4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("max_abs_deviation=0e0"));
}

#[test]
fn save_inspect_load_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("state.nmck");
    let path = file.to_str().unwrap();
    let field = "x^2 + y^2";
    let o = nmck(&[
        "save",
        "--ranks",
        "2",
        "--mesh",
        "unit-square:4",
        "--family",
        "DP",
        "--degree",
        "2",
        "--field",
        field,
        "--out",
        path,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let toc = stdout(&nmck(&["inspect", path]));
    for name in [
        "/topologies/mesh/cones",
        "/topologies/mesh/distribution/2/owners",
        "/dms/DP2/section/off",
        "/dms/DP2/vecs/f/values",
    ] {
        assert!(
            toc.lines().any(|l| l.split('\t').next() == Some(name)),
            "{name} missing from\n{toc}"
        );
    }

    let o = nmck(&["load", "--ranks", "3", "--file", path]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("space=DP2"));

    assert_eq!(
        nmck(&["verify", path, "--field", field, "--ranks", "5"]).status.code(),
        Some(0)
    );
    assert_eq!(
        nmck(&["verify", path, "--field", "x^2 + y^2 + 1", "--ranks", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        nmck(&["load", "--ranks", "2", "--file", path, "--exact-distribution"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        nmck(&["load", "--ranks", "3", "--file", path, "--exact-distribution"])
            .status
            .code(),
        Some(6)
    );
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk");
    std::fs::write(&junk, b"not a checkpoint at all").unwrap();
    assert_eq!(nmck(&["inspect", junk.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(
        nmck(&["inspect", dir.path().join("absent").to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(nmck(&["roundtrip", "--mesh", "torus:3"]).status.code(), Some(2));
    assert_eq!(nmck(&["roundtrip", "--field", "x / y"]).status.code(), Some(2));
    assert_eq!(nmck(&["roundtrip", "--degree", "9"]).status.code(), Some(2));
}
