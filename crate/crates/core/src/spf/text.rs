//! ISO 10303-21 string literal escapes.
//!
//! Raw form is the text between the quotes: `''` for an apostrophe, `\\` for
//! a backslash, `\S\c`, `\X\HH`, `\X2\HHHH..\X0\` and `\X4\HHHHHHHH..\X0\`
//! for characters outside printable ASCII, `\Px\` code page switches.

/// Decodes a raw literal. Returns the logical text and the list of escapes
/// that were not understood (those are copied through verbatim).
pub fn decode(raw: &str) -> (String, Vec<String>) {
    if !raw.contains(['\\', '\'']) {
        return (raw.to_string(), Vec::new());
    }
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut unknown = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\'' {
            out.push('\'');
            i += if chars.get(i + 1) == Some(&'\'') {
                2
            } else {
                1
            };
            continue;
        }
        if c != '\\' {
            out.push(c);
            i += 1;
            continue;
        }
        match decode_escape(&chars[i..]) {
            Some((text, used)) => {
                out.push_str(&text);
                i += used;
            }
            None => {
                let end = (i + 4).min(chars.len());
                unknown.push(chars[i..end].iter().collect());
                out.push('\\');
                i += 1;
            }
        }
    }
    (out, unknown)
}

fn hex_value(digits: &[char]) -> Option<u32> {
    if digits.is_empty() {
        return None;
    }
    let s: String = digits.iter().collect();
    u32::from_str_radix(&s, 16).ok()
}

/// Tries to decode one escape starting at a backslash. Returns the decoded
/// text and the number of chars consumed.
fn decode_escape(s: &[char]) -> Option<(String, usize)> {
    let at = |k: usize| s.get(k).copied();
    match (at(1), at(2)) {
        (Some('\\'), _) => Some(("\\".to_string(), 2)),
        (Some('S'), Some('\\')) => {
            let c = at(3)?;
            let code = c as u32;
            if code > 0x7f {
                return None;
            }
            Some((char::from_u32(code + 0x80)?.to_string(), 4))
        }
        (Some('P'), Some(page)) if page.is_ascii_uppercase() && at(3) == Some('\\') => {
            Some((String::new(), 4))
        }
        (Some('X'), Some('\\')) => {
            let code = hex_value(s.get(3..5)?)?;
            Some((char::from_u32(code)?.to_string(), 5))
        }
        (Some('X'), Some(width @ ('2' | '4'))) if at(3) == Some('\\') => {
            let digits = if width == '2' { 4 } else { 8 };
            let mut k = 4;
            let mut units = Vec::new();
            loop {
                if at(k) == Some('\\') {
                    if s.get(k..k + 4)? == ['\\', 'X', '0', '\\'] {
                        k += 4;
                        break;
                    }
                    return None;
                }
                units.push(hex_value(s.get(k..k + digits)?)?);
                k += digits;
            }
            let text = if width == '2' {
                let units: Vec<u16> = units.iter().map(|&u| u as u16).collect();
                String::from_utf16(&units).ok()?
            } else {
                units
                    .iter()
                    .map(|&u| char::from_u32(u))
                    .collect::<Option<String>>()?
            };
            Some((text, k))
        }
        _ => None,
    }
}

/// Encodes logical text into a raw literal body using only printable ASCII.
pub fn encode(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut wide: Vec<u16> = Vec::new();
    let flush = |out: &mut String, wide: &mut Vec<u16>| {
        if !wide.is_empty() {
            out.push_str("\\X2\\");
            for unit in wide.drain(..) {
                out.push_str(&format!("{unit:04X}"));
            }
            out.push_str("\\X0\\");
        }
    };
    for c in text.chars() {
        if (' '..='~').contains(&c) {
            flush(&mut out, &mut wide);
            match c {
                '\'' => out.push_str("''"),
                '\\' => out.push_str("\\\\"),
                _ => out.push(c),
            }
        } else {
            let mut buf = [0u16; 2];
            wide.extend_from_slice(c.encode_utf16(&mut buf));
        }
    }
    flush(&mut out, &mut wide);
    out
}
