use std::process::Command;

fn rbb(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rbb")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = rbb(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn stationary_law_on_two_sites() {
    let csv = stdout(&["exact", "--L", "2", "--N", "2", "--stationary"]);
    assert_eq!(
        csv,
        "index,occ_0,occ_1,probability\n0,2,0,0.25\n1,1,1,0.5\n2,0,2,0.25\n"
    );
}

#[test]
fn zero_horizon_simulation() {
    let csv = stdout(&[
        "simulate",
        "--L",
        "3",
        "--N",
        "3",
        "--horizon",
        "0",
        "--seed",
        "7",
        "--start",
        "3,0,0",
    ]);
    assert!(csv.ends_with("# final.csv\nocc_0,occ_1,occ_2\n3,0,0\n"), "{csv}");
}

#[test]
fn exact_mixing_time() {
    let csv = stdout(&["mixing", "--L", "2", "--N", "2", "--eps", "0.3", "--exact"]);
    assert_eq!(csv.lines().nth(1), Some("2,2,0.3,worst,1"));
}

#[test]
fn invalid_settings_fail_with_the_field_name() {
    let cases: [(&[&str], &str); 4] = [
        (&["exact", "--L", "2", "--N", "1.5"], "`N`"),
        (&["mixing", "--L", "2", "--N", "2", "--eps", "0.5", "--exact"], "`eps`"),
        (&["exact", "--L", "30", "--N", "30"], "`cap`"),
        (&["empty", "--L", "4", "--N", "4"], "`seed`"),
    ];
    for (args, field) in cases {
        let out = rbb(args);
        assert!(!out.status.success());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{args:?}: {err}");
    }
}

#[test]
fn help_documents_every_subcommand() {
    let text = stdout(&["--help"]);
    for sub in [
        "simulate", "exact", "couple", "tails", "empty", "mixing", "scaling", "na-check",
    ] {
        assert!(text.contains(sub), "{sub}");
    }
}
