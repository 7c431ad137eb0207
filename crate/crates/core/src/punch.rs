//! Fixed-width punch files of element forces.
//!
//! Layout of a data record (1-based columns):
//!
//! ```text
//! 1-10   element id, right-aligned        (or "-CONT-" on continuation lines)
//! 11-18  blank
//! 19-36, 37-54, 55-72   real fields, 18 characters each
//! 73-80  sequence number, ignored
//! ```
//!
//! Lines starting with `$` are headers. Nothing past column 80 is read.
//! The field order of each record comes from a [`FormatDescriptor`].

use thiserror::Error;

const ID_WIDTH: usize = 18;
const FIELD_WIDTH: usize = 18;
const FIELDS_PER_LINE: usize = 3;
const DATA_END: usize = ID_WIDTH + FIELDS_PER_LINE * FIELD_WIDTH;
const LINE_END: usize = 80;
const CONT: &str = "-CONT-";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PunchError {
    #[error("line {0}: continuation line without a preceding record")]
    OrphanContinuation(usize),
    #[error("line {line}: element {element} has {found} values, descriptor expects {expected}")]
    WrongValueCount { line: usize, element: u32, expected: usize, found: usize },
    #[error("line {line}, columns {first_column}-{last_column}: cannot read real {text:?}")]
    BadReal { line: usize, first_column: usize, last_column: usize, text: String },
    #[error("line {line}: bad element id {text:?}")]
    BadId { line: usize, text: String },
    #[error("line {line}: bad subcase header {text:?}")]
    BadSubcase { line: usize, text: String },
    #[error("line {0}: text is not 7-bit ASCII")]
    NotAscii(usize),
    #[error("descriptor: {0}")]
    Descriptor(String),
    #[error("element {element}: value {name} is not in the descriptor")]
    UnknownValue { element: u32, name: String },
    #[error("element {element}: no value for {name}")]
    MissingValue { element: u32, name: String },
    #[error("element {element}: {name} is not finite")]
    NonFinite { element: u32, name: String },
    #[error("header {0:?} cannot be written on one punch line")]
    BadHeader(String),
    #[error("subcase {0} not present")]
    NoSubcase(u32),
}

/// Ordered value names of a record: up to three on the first line, the
/// rest three per continuation line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatDescriptor {
    pub first: Vec<String>,
    pub cont: Vec<String>,
}

impl FormatDescriptor {
    pub fn new(first: Vec<String>, cont: Vec<String>) -> Result<Self, PunchError> {
        if first.is_empty() || first.len() > FIELDS_PER_LINE {
            return Err(PunchError::Descriptor(format!("first line needs 1 to {FIELDS_PER_LINE} names")));
        }
        let mut seen = std::collections::HashSet::new();
        for n in first.iter().chain(&cont) {
            if n.is_empty() || n.chars().any(char::is_whitespace) {
                return Err(PunchError::Descriptor(format!("bad value name {n:?}")));
            }
            if !seen.insert(n.as_str()) {
                return Err(PunchError::Descriptor(format!("duplicate value name {n}")));
            }
        }
        Ok(FormatDescriptor { first, cont })
    }

    /// Bar element forces: axial and torque, the two transverse shears, and
    /// bending moments at both ends.
    pub fn beam_forces() -> Self {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        FormatDescriptor {
            first: names(&["axial", "torque", "shear-1"]),
            cont: names(&["shear-2", "moment-1A", "moment-2A", "moment-1B", "moment-2B"]),
        }
    }

    /// `[first]` and `[cont]` sections with one name per line; `#` comments.
    pub fn parse(text: &str) -> Result<Self, PunchError> {
        let (mut first, mut cont) = (Vec::new(), Vec::new());
        let mut section: Option<bool> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            match line {
                "" => {}
                "[first]" => section = Some(true),
                "[cont]" => section = Some(false),
                name => match section {
                    Some(true) => first.push(name.to_string()),
                    Some(false) => cont.push(name.to_string()),
                    None => return Err(PunchError::Descriptor(format!("line {}: name outside a section", i + 1))),
                },
            }
        }
        FormatDescriptor::new(first, cont)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("[first]\n");
        for n in &self.first {
            s.push_str(n);
            s.push('\n');
        }
        s.push_str("[cont]\n");
        for n in &self.cont {
            s.push_str(n);
            s.push('\n');
        }
        s
    }

    pub fn len(&self) -> usize {
        self.first.len() + self.cont.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.first.iter().chain(&self.cont).map(String::as_str)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names().position(|n| n == name)
    }

    /// Number of values on physical line `k` of a record.
    fn line_capacity(&self, k: usize) -> usize {
        if k == 0 {
            self.first.len()
        } else {
            self.cont.len().saturating_sub((k - 1) * FIELDS_PER_LINE).min(FIELDS_PER_LINE)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Header {
    Title(String),
    Subtitle(String),
    Label(String),
    Subcase(u32),
    /// Any other `$` line, e.g. the output kind or element type.
    Other(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PunchRecord {
    pub element: u32,
    pub values: Vec<(String, f64)>,
}

impl PunchRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|v| v.1)
    }
}

/// A run of headers followed by the records they describe.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PunchBlock {
    pub headers: Vec<Header>,
    pub records: Vec<PunchRecord>,
}

impl PunchBlock {
    pub fn subcase(&self) -> Option<u32> {
        self.headers.iter().find_map(|h| match h {
            Header::Subcase(s) => Some(*s),
            _ => None,
        })
    }

    fn text(&self, pick: fn(&Header) -> Option<&String>) -> Option<&str> {
        self.headers.iter().find_map(pick).map(String::as_str)
    }

    pub fn title(&self) -> Option<&str> {
        self.text(|h| if let Header::Title(s) = h { Some(s) } else { None })
    }

    pub fn subtitle(&self) -> Option<&str> {
        self.text(|h| if let Header::Subtitle(s) = h { Some(s) } else { None })
    }

    pub fn label(&self) -> Option<&str> {
        self.text(|h| if let Header::Label(s) = h { Some(s) } else { None })
    }

    /// Free-form header lines such as `ELEMENT FORCES`.
    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.headers.iter().filter_map(|h| if let Header::Other(s) = h { Some(s.as_str()) } else { None })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PunchDocument {
    pub blocks: Vec<PunchBlock>,
}

impl PunchDocument {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

fn parse_header(line_no: usize, body: &str) -> Result<Header, PunchError> {
    let value = |key: &str| body[key.len()..].trim_start().strip_prefix('=').map(|v| v.trim().to_string());
    let upper = body.to_ascii_uppercase();
    if upper.starts_with("SUBCASE ID") {
        let text = body["SUBCASE ID".len()..].trim_start();
        return text
            .strip_prefix('=')
            .and_then(|v| v.trim().parse::<u32>().ok())
            .map(Header::Subcase)
            .ok_or_else(|| PunchError::BadSubcase { line: line_no, text: body.to_string() });
    }
    for (key, make) in [
        ("SUBTITLE", Header::Subtitle as fn(String) -> Header),
        ("TITLE", Header::Title),
        ("LABEL", Header::Label),
    ] {
        if upper.starts_with(key) {
            if let Some(v) = value(key) {
                return Ok(make(v));
            }
        }
    }
    Ok(Header::Other(body.trim().to_string()))
}

fn parse_real(line_no: usize, start: usize, end: usize, text: &str) -> Result<f64, PunchError> {
    let t = text.trim();
    let normalized = t.replace(['D', 'd'], "E");
    let looks_numeric = !t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || "+-.EeDd".contains(c));
    match normalized.parse::<f64>() {
        Ok(v) if looks_numeric && v.is_finite() => Ok(v),
        _ => Err(PunchError::BadReal { line: line_no, first_column: start + 1, last_column: end, text: t.to_string() }),
    }
}

/// Reads a punch stream. LF and CRLF line ends are both accepted.
pub fn parse_punch(text: &str, descriptor: &FormatDescriptor) -> Result<PunchDocument, PunchError> {
    let names: Vec<&str> = descriptor.names().collect();
    let mut doc = PunchDocument::default();
    // Record under construction: (start line, element id, values, physical line count).
    let mut open: Option<(usize, u32, Vec<f64>)> = None;
    let mut in_headers = false;

    fn close(
        doc: &mut PunchDocument,
        open: &mut Option<(usize, u32, Vec<f64>)>,
        names: &[&str],
    ) -> Result<(), PunchError> {
        if let Some((line, element, values)) = open.take() {
            if values.len() != names.len() {
                return Err(PunchError::WrongValueCount { line, element, expected: names.len(), found: values.len() });
            }
            let values = names.iter().map(|n| n.to_string()).zip(values).collect();
            doc.blocks.last_mut().expect("records follow a block").records.push(PunchRecord { element, values });
        }
        Ok(())
    }

    let mut cont_index = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if !raw.is_ascii() {
            return Err(PunchError::NotAscii(line_no));
        }
        let line = &raw[..raw.len().min(LINE_END)];
        let data = &line[..line.len().min(DATA_END)];
        if data.trim().is_empty() {
            continue;
        }
        if let Some(body) = data.strip_prefix('$') {
            close(&mut doc, &mut open, &names)?;
            if !in_headers {
                doc.blocks.push(PunchBlock::default());
                in_headers = true;
            }
            let h = parse_header(line_no, body.trim_end())?;
            doc.blocks.last_mut().unwrap().headers.push(h);
            continue;
        }
        let id_field = &data[..data.len().min(ID_WIDTH)];
        let is_cont = id_field.trim_start().starts_with(CONT);
        let capacity = if is_cont {
            let Some(_) = open else {
                return Err(PunchError::OrphanContinuation(line_no));
            };
            cont_index += 1;
            descriptor.line_capacity(cont_index)
        } else {
            close(&mut doc, &mut open, &names)?;
            if doc.blocks.is_empty() {
                doc.blocks.push(PunchBlock::default());
            }
            in_headers = false;
            let element = id_field
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|&e| e > 0)
                .ok_or_else(|| PunchError::BadId { line: line_no, text: id_field.trim().to_string() })?;
            open = Some((line_no, element, Vec::with_capacity(names.len())));
            cont_index = 0;
            descriptor.line_capacity(0)
        };
        let (_, element, values) = open.as_mut().unwrap();
        let slots: Vec<(usize, &str)> = (0..FIELDS_PER_LINE)
            .map(|k| {
                let start = ID_WIDTH + k * FIELD_WIDTH;
                let field = if start < data.len() { &data[start..(start + FIELD_WIDTH).min(data.len())] } else { "" };
                (start, field)
            })
            .collect();
        let used = slots.iter().rposition(|(_, f)| !f.trim().is_empty()).map_or(0, |p| p + 1);
        if used != capacity {
            let found = values.len() + slots.iter().filter(|(_, f)| !f.trim().is_empty()).count();
            let expected = names.len();
            return Err(PunchError::WrongValueCount { line: line_no, element: *element, expected, found });
        }
        for &(start, field) in &slots[..used] {
            values.push(parse_real(line_no, start, start + FIELD_WIDTH, field)?);
        }
    }
    close(&mut doc, &mut open, &names)?;
    Ok(doc)
}

/// 18-character scientific form: 11 significant digits, 2- or 3-digit
/// exponent, zero as `0.0E+00`.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0E+00".into() } else { "0.0E+00".into() };
    }
    let s = format!("{:.10E}", v);
    let (mantissa, exp) = s.split_once('E').expect("scientific format");
    let e: i32 = exp.parse().expect("exponent");
    format!("{mantissa}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

fn check_header_text(s: &str) -> Result<(), PunchError> {
    let ok = s.is_ascii()
        && s.trim() == s
        && !s.contains(['\n', '\r'])
        && s.len() <= DATA_END - 12;
    if ok {
        Ok(())
    } else {
        Err(PunchError::BadHeader(s.to_string()))
    }
}

/// Writes headers and records in the canonical layout, LF line ends.
pub fn write_punch(doc: &PunchDocument, descriptor: &FormatDescriptor) -> Result<String, PunchError> {
    let mut out = String::new();
    for block in &doc.blocks {
        for h in &block.headers {
            match h {
                Header::Title(s) => {
                    check_header_text(s)?;
                    out.push_str(&format!("$TITLE   = {s}"));
                }
                Header::Subtitle(s) => {
                    check_header_text(s)?;
                    out.push_str(&format!("$SUBTITLE= {s}"));
                }
                Header::Label(s) => {
                    check_header_text(s)?;
                    out.push_str(&format!("$LABEL   = {s}"));
                }
                Header::Subcase(n) => out.push_str(&format!("$SUBCASE ID = {n:>12}")),
                Header::Other(s) => {
                    check_header_text(s)?;
                    if s.is_empty() || !matches!(parse_header(0, s), Ok(Header::Other(_))) {
                        return Err(PunchError::BadHeader(s.clone()));
                    }
                    out.push('$');
                    out.push_str(s);
                }
            }
            out.push('\n');
        }
        for r in &block.records {
            if r.element == 0 {
                return Err(PunchError::BadId { line: 0, text: "0".into() });
            }
            for (name, _) in &r.values {
                if descriptor.position(name).is_none() {
                    return Err(PunchError::UnknownValue { element: r.element, name: name.clone() });
                }
            }
            let mut fields = Vec::with_capacity(descriptor.len());
            for name in descriptor.names() {
                let v = r.get(name).ok_or_else(|| PunchError::MissingValue { element: r.element, name: name.to_string() })?;
                if !v.is_finite() {
                    return Err(PunchError::NonFinite { element: r.element, name: name.to_string() });
                }
                fields.push(format_real(v));
            }
            let mut k = 0;
            let mut line_index = 0;
            while k < fields.len() {
                let take = descriptor.line_capacity(line_index);
                let lead = if line_index == 0 { format!("{:>10}", r.element) } else { CONT.to_string() };
                let mut line = format!("{:<width$}", lead, width = ID_WIDTH);
                for f in &fields[k..k + take] {
                    line.push_str(&format!("{:<width$}", f, width = FIELD_WIDTH));
                }
                out.push_str(line.trim_end());
                out.push('\n');
                k += take;
                line_index += 1;
            }
        }
    }
    Ok(out)
}

/// Transverse shears of one element: `(element id, V1, V2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearExtract {
    pub forces: Vec<(u32, f64, f64)>,
    /// Non-fatal remarks, e.g. a subcase without records.
    pub warnings: Vec<String>,
}

/// Shear pairs of every record in `subcase`, using the descriptor's
/// `shear-1` and `shear-2` values.
pub fn extract_beam_forces(
    doc: &PunchDocument,
    descriptor: &FormatDescriptor,
    subcase: u32,
) -> Result<ShearExtract, PunchError> {
    for name in ["shear-1", "shear-2"] {
        if descriptor.position(name).is_none() {
            return Err(PunchError::Descriptor(format!("no {name} value in descriptor")));
        }
    }
    let blocks: Vec<&PunchBlock> = doc.blocks.iter().filter(|b| b.subcase() == Some(subcase)).collect();
    if blocks.is_empty() {
        return Err(PunchError::NoSubcase(subcase));
    }
    let mut forces = Vec::new();
    for b in &blocks {
        for r in &b.records {
            let get = |n: &str| r.get(n).ok_or_else(|| PunchError::MissingValue { element: r.element, name: n.to_string() });
            forces.push((r.element, get("shear-1")?, get("shear-2")?));
        }
    }
    let mut warnings = Vec::new();
    if forces.is_empty() {
        warnings.push(format!("subcase {subcase} has no records"));
    }
    Ok(ShearExtract { forces, warnings })
}
