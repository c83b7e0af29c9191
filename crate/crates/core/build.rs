use std::fs;

const EXPECTED: usize = 40;

fn main() {
    let path = "data/answers.txt";
    println!("cargo:rerun-if-changed={path}");
    let text = fs::read_to_string(path).expect("answer vocabulary file is missing");
    let entries: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut unique = entries.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), entries.len(), "duplicate entries in {path}");
    assert_eq!(entries.len(), EXPECTED, "{path} must list exactly {EXPECTED} answers");
}
