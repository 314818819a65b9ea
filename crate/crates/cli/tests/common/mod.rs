use std::path::PathBuf;
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Runs the binary with relative paths resolved against the fixtures.
pub fn edr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edr"))
        .args(args)
        .env("EDR_DATA_DIR", fixtures())
        .output()
        .expect("binary runs")
}

/// One invocation per subcommand.
pub const SUITE: &[&[&str]] = &[
    &[
        "risk",
        "-i",
        "assets",
        "--alpha",
        "0.05",
        "--quantile",
        "0.1,0.5",
        "--market",
        "assets/low.csv",
    ],
    &[
        "frontier", "-i", "assets", "--n", "10000", "--seed", "42", "--space", "edr",
    ],
    &["rnc", "--a", "5", "--loss", "0.05", "--points", "101"],
    &["isoutil", "--a", "1,2,5", "--e", "0.05,0.1", "--edr", "-0.3,-0.1,0.0"],
    &["calibrate"],
    &["leverage", "-i", "assets", "--x-lev", "3", "--rc", "0.02", "--m", "0.5"],
    &[
        "power-frontier",
        "--alpha-exp",
        "0.5",
        "--beta",
        "0.1",
        "--a",
        "4",
        "--leverage",
        "2",
    ],
    &["aggregate", "-i", "views.csv"],
    &["asad", "--growth", "0.03", "--horizon", "10", "--steps", "20"],
    &["empirics-table1", "-i", "regime_prices.csv"],
    &[
        "empirics-vixcurve",
        "--index",
        "index_prices.csv",
        "--companion",
        "companion_levels.csv",
    ],
    &["empirics-crosssection", "-i", "xsection", "--market", "market.csv"],
];
