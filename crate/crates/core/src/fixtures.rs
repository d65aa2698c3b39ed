//! Built-in example domains.

use crate::domain::{Code, Domain};
use crate::error::{Error, Result};

/// Named fixtures, in listing order. `full-boolean-<m>` is generated for
/// `1 <= m <= 8` in addition to these.
pub const NAMES: [&str; 7] = ["w", "example2", "example3", "wxw", "y-horn", "z-affine", "yz-product"];

const MAX_FULL_BOOLEAN: usize = 8;

fn alphabets(m: usize, tokens: &[&str]) -> Vec<Vec<String>> {
    vec![tokens.iter().map(|t| t.to_string()).collect(); m]
}

fn boolean(m: usize, rows: &[[Code; 3]]) -> Domain {
    Domain::from_parts(alphabets(m, &["0", "1"]), rows.iter().map(|r| r.to_vec()).collect())
}

fn from_words(m: usize, tokens: &[&str], words: &[&str]) -> Domain {
    let tuples: Vec<Vec<&str>> = words
        .iter()
        .map(|w| (0..w.len()).map(|i| &w[i..i + 1]).collect())
        .collect();
    Domain::from_tokens(alphabets(m, tokens), &tuples).expect("fixture tokens are in their alphabets")
}

/// The 1-in-3 relation.
pub fn w() -> Domain {
    boolean(3, &[[1, 0, 0], [0, 1, 0], [0, 0, 1]])
}

/// A non-Boolean domain with a majority aggregator.
pub fn example2() -> Domain {
    from_words(3, &["a", "b", "c"], &["aaa", "bbb", "ccc", "abb", "baa", "aac", "cca"])
}

/// A non-Boolean domain with a minority aggregator.
pub fn example3() -> Domain {
    from_words(3, &["a", "b", "c"], &["abc", "baa", "caa"])
}

pub fn wxw() -> Domain {
    w().product(&w())
}

/// `{0,1}^3` without `(1,1,0)`: Horn but neither affine nor bijunctive.
pub fn y_horn() -> Domain {
    let rows: Vec<[Code; 3]> = (0..8u8)
        .map(|b| [b >> 2 & 1, b >> 1 & 1, b & 1])
        .filter(|r| *r != [1, 1, 0])
        .collect();
    boolean(3, &rows)
}

/// Even-parity triples: affine.
pub fn z_affine() -> Domain {
    boolean(3, &[[1, 1, 0], [0, 1, 1], [1, 0, 1], [0, 0, 0]])
}

pub fn yz_product() -> Domain {
    y_horn().product(&z_affine())
}

/// `{0,1}^m`.
pub fn full_boolean(m: usize) -> Result<Domain> {
    if m == 0 || m > MAX_FULL_BOOLEAN {
        return Err(Error::UnknownFixture(format!(
            "full-boolean-{m} (m must be between 1 and {MAX_FULL_BOOLEAN})"
        )));
    }
    let rows = (0..1u32 << m)
        .map(|b| (0..m).map(|j| (b >> (m - 1 - j) & 1) as Code).collect())
        .collect();
    Ok(Domain::from_parts(alphabets(m, &["0", "1"]), rows))
}

pub fn by_name(name: &str) -> Result<Domain> {
    match name {
        "w" => Ok(w()),
        "example2" => Ok(example2()),
        "example3" => Ok(example3()),
        "wxw" => Ok(wxw()),
        "y-horn" => Ok(y_horn()),
        "z-affine" => Ok(z_affine()),
        "yz-product" => Ok(yz_product()),
        other => match other.strip_prefix("full-boolean-").map(str::parse::<usize>) {
            Some(Ok(m)) => full_boolean(m),
            _ => Err(Error::UnknownFixture(other.to_string())),
        },
    }
}
