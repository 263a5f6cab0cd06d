//! FCIDUMP integral files.
//!
//! A namelist header (`&FCI NORB=.., NELEC=.., ORBSYM=.., ISYM=.. &END`, or a
//! closing `/`) followed by lines `value i j k l` in chemists' notation with
//! 1-based spatial orbital indices:
//!
//! | indices       | meaning            |
//! |---------------|--------------------|
//! | `i j k l`     | `(ij|kl)`          |
//! | `i j 0 0`     | `h_ij`             |
//! | `i 0 0 0`     | orbital energy (ignored) |
//! | `0 0 0 0`     | core energy        |
//!
//! Fortran `D` exponents are accepted. Symmetry labels are read and dropped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use v2rdm_core::hamiltonians::MolecularSystem;

/// Agreement required between integrals that are symmetry images of each other.
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum FcidumpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: orbital index {index} outside 1..={norb}")]
    IndexOutOfRange { line: usize, index: usize, norb: usize },
    #[error("line {line}: integral conflicts with a symmetry-equivalent value on line {first}")]
    Inconsistent { line: usize, first: usize },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> FcidumpError {
    FcidumpError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses a float, accepting Fortran `D`/`d` exponent markers.
pub fn parse_fortran_float(token: &str) -> Option<f64> {
    let normalized: String = token
        .chars()
        .map(|c| if c == 'D' || c == 'd' { 'e' } else { c })
        .collect();
    normalized.parse().ok()
}

struct Header {
    norb: usize,
    nelec: usize,
    /// Line after the terminator.
    body_start: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header, FcidumpError> {
    let first = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| syntax(1, "empty file"))?;
    if !lines[first].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(syntax(first + 1, "expected '&FCI' header"));
    }
    let mut fields: Vec<(usize, String)> = Vec::new();
    let mut terminated = None;
    for (i, raw) in lines.iter().enumerate().skip(first) {
        let mut text = raw.trim().to_string();
        if i == first {
            text = text[4..].to_string();
        }
        let upper = text.to_ascii_uppercase();
        let (content, done) = if let Some(pos) = upper.find("&END") {
            (text[..pos].to_string(), true)
        } else if let Some(stripped) = text.strip_suffix('/') {
            (stripped.to_string(), true)
        } else {
            (text, false)
        };
        fields.push((i + 1, content));
        if done {
            terminated = Some(i + 1);
            break;
        }
    }
    let body_start = terminated.ok_or_else(|| syntax(lines.len(), "header not terminated by '&END' or '/'"))?;

    let mut values: HashMap<String, (usize, Vec<String>)> = HashMap::new();
    let mut current: Option<String> = None;
    for (line, content) in fields {
        for token in content.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            if let Some((key, value)) = token.split_once('=') {
                let key = key.trim().to_ascii_uppercase();
                if key.is_empty() {
                    return Err(syntax(line, "missing key before '='"));
                }
                let entry = values.entry(key.clone()).or_insert((line, Vec::new()));
                if !value.is_empty() {
                    entry.1.push(value.to_string());
                }
                current = Some(key);
            } else {
                let key = current
                    .as_ref()
                    .ok_or_else(|| syntax(line, format!("value '{token}' without a key")))?;
                values.get_mut(key).expect("inserted with key").1.push(token.to_string());
            }
        }
    }
    let integer = |key: &str| -> Result<usize, FcidumpError> {
        let (line, vals) = values
            .get(key)
            .ok_or_else(|| syntax(body_start, format!("header lacks {key}")))?;
        match vals.as_slice() {
            [v] => v
                .parse()
                .map_err(|_| syntax(*line, format!("{key} must be a nonnegative integer, got '{v}'"))),
            _ => Err(syntax(*line, format!("{key} must have exactly one value"))),
        }
    };
    let norb = integer("NORB")?;
    let nelec = integer("NELEC")?;
    if norb == 0 {
        return Err(syntax(values["NORB"].0, "NORB must be positive"));
    }
    if let Some((line, vals)) = values.get("ORBSYM") {
        if vals.iter().any(|v| v.parse::<i64>().is_err()) {
            return Err(syntax(*line, "ORBSYM entries must be integers"));
        }
    }
    Ok(Header {
        norb,
        nelec,
        body_start,
    })
}

/// Reads an FCIDUMP document into a symmetry-completed [`MolecularSystem`].
pub fn parse_fcidump(text: &str) -> Result<MolecularSystem, FcidumpError> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let norb = header.norb;
    let mut sys = MolecularSystem::new(norb, header.nelec);
    let mut one_seen: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    let mut two_seen: HashMap<[usize; 4], (f64, usize)> = HashMap::new();
    let mut core_seen: Option<(f64, usize)> = None;

    for (offset, raw) in lines[header.body_start..].iter().enumerate() {
        let line = header.body_start + offset + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(syntax(line, format!("expected 'value i j k l', found {} fields", tokens.len())));
        }
        let value = parse_fortran_float(tokens[0])
            .filter(|v| v.is_finite())
            .ok_or_else(|| syntax(line, format!("'{}' is not a real number", tokens[0])))?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&tokens[1..]) {
            *slot = tok
                .parse()
                .map_err(|_| syntax(line, format!("'{tok}' is not an orbital index")))?;
            if *slot > norb {
                return Err(FcidumpError::IndexOutOfRange {
                    line,
                    index: *slot,
                    norb,
                });
            }
        }
        let check = |prev: Option<&(f64, usize)>| match prev {
            Some(&(v, first)) if (v - value).abs() > SYMMETRY_TOL => {
                Err(FcidumpError::Inconsistent { line, first })
            }
            _ => Ok(()),
        };
        match idx {
            [0, 0, 0, 0] => {
                check(core_seen.as_ref())?;
                core_seen = Some((value, line));
                sys.core_energy = value;
            }
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let key = (i.max(j), i.min(j));
                check(one_seen.get(&key))?;
                one_seen.insert(key, (value, line));
                sys.set_one_body(i - 1, j - 1, value)
                    .expect("indices checked against NORB");
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let key = canonical_pair_of_pairs(i, j, k, l);
                check(two_seen.get(&key))?;
                two_seen.insert(key, (value, line));
                sys.set_two_body(i - 1, j - 1, k - 1, l - 1, value)
                    .expect("indices checked against NORB");
            }
            _ => return Err(syntax(line, format!("unsupported index pattern {idx:?}"))),
        }
    }
    Ok(sys)
}

fn canonical_pair_of_pairs(i: usize, j: usize, k: usize, l: usize) -> [usize; 4] {
    let a = (i.max(j), i.min(j));
    let b = (k.max(l), k.min(l));
    let (x, y) = if a >= b { (a, b) } else { (b, a) };
    [x.0, x.1, y.0, y.1]
}

pub fn read_fcidump(path: &Path) -> Result<MolecularSystem, FcidumpError> {
    let text = std::fs::read_to_string(path).map_err(|source| FcidumpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fcidump(&text)
}

/// Writes one line per symmetry-distinct nonzero integral.
///
/// Values use the shortest decimal form that parses back to the same double,
/// so [`parse_fcidump`] recovers every integral exactly.
pub fn emit_fcidump(sys: &MolecularSystem) -> String {
    let n = sys.n_orbitals;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    writeln!(out, "&FCI NORB={n},NELEC={},MS2=0,", sys.n_electrons).unwrap();
    writeln!(out, "  ORBSYM={orbsym},").unwrap();
    writeln!(out, "  ISYM=1,").unwrap();
    writeln!(out, "&END").unwrap();
    for i in 1..=n {
        for j in 1..=i {
            for k in 1..=n {
                for l in 1..=k {
                    if (k, l) > (i, j) {
                        continue;
                    }
                    let v = sys.two_body(i - 1, j - 1, k - 1, l - 1);
                    if v != 0.0 {
                        writeln!(out, "{v:e} {i} {j} {k} {l}").unwrap();
                    }
                }
            }
        }
    }
    for i in 1..=n {
        for j in 1..=i {
            let v = sys.one_body(i - 1, j - 1);
            if v != 0.0 {
                writeln!(out, "{v:e} {i} {j} 0 0").unwrap();
            }
        }
    }
    writeln!(out, "{:e} 0 0 0 0", sys.core_energy).unwrap();
    out
}
