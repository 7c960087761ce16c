//! The packaged tables must match the published decimals character for
//! character. Hashes are over `"i j coeff\n"` lines (lower triangle, sorted,
//! zero entries dropped) and `"x y\n"` lines in listed order.

use frobound::data;
use sha2::{Digest, Sha256};

fn sha256(s: &str) -> String {
    Sha256::digest(s.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn table_text(name: &str) -> String {
    let mut rows: Vec<(u32, u32, &str)> = data::coefficient_table(name)
        .unwrap()
        .iter()
        .copied()
        .filter(|&(_, _, c)| c.parse::<f64>().unwrap() != 0.0)
        .collect();
    rows.sort();
    rows.iter()
        .map(|(i, j, c)| format!("{i} {j} {c}\n"))
        .collect()
}

fn points_text(name: &str) -> String {
    data::point_strings(name)
        .unwrap()
        .iter()
        .map(|(x, y)| format!("{x} {y}\n"))
        .collect()
}

#[test]
fn coefficient_tables() {
    for (name, digest) in [
        (
            "q",
            "ddf08a0b03ff1b06ec9a2c99c6d2d19498fb938f50576b9ec97b829d28297335",
        ),
        (
            "r",
            "62a803b15fedf0f1e01ac4e9f0575a6ce2df6a1ccc7adb721a3c3570092ea7a8",
        ),
        (
            "p1",
            "1e9eaafe4ba787b9b3a154878dd85f9262a94c63c8ce4f1f215949ffd746c067",
        ),
        (
            "p2",
            "a1422cc8d1b11afb316138f01d2b67e47e8a0e0f5302ddf3e1307f409a20264f",
        ),
    ] {
        assert_eq!(sha256(&table_text(name)), digest, "{name}");
    }
}

#[test]
fn point_lists() {
    for (name, digest) in [
        (
            "appendix-a1",
            "d3c0891ba5d1f3bf39623728cff8c5fec4d98ebd0e9c59a466b9ad013bc4b20d",
        ),
        (
            "appendix-a2",
            "dd87fb77a5be649e0b7d86234eca9abd0688dfad31c812f6fef768b6b06f4e35",
        ),
    ] {
        assert_eq!(sha256(&points_text(name)), digest, "{name}");
    }
}

#[test]
fn tampering_changes_the_hash() {
    let text = table_text("p1");
    assert_ne!(
        sha256(&text.replacen("1.7252053549918", "1.7252053549919", 1)),
        sha256(&text)
    );
}
