use proptest::prelude::*;
use vibrakit_core::punch::{
    extract_beam_forces, format_real, parse_punch, write_punch, FormatDescriptor, Header, PunchBlock, PunchDocument,
    PunchError, PunchRecord,
};

fn six() -> FormatDescriptor {
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
    FormatDescriptor::new(names(&["axial", "shear-1", "shear-2"]), names(&["m1", "m2", "torque"])).unwrap()
}

fn field(v: &str) -> String {
    format!("{v:<18}")
}

/// Two records built column by column, independent of the writer.
fn hand_fixture() -> String {
    let mut s = String::new();
    s.push_str("$TITLE   = HAND FIXTURE\n");
    s.push_str("$ELEMENT FORCES\n");
    s.push_str("$SUBCASE ID =            1\n");
    for (id, vals) in [(101, ["1.5E+01", "-2.25E+00", "3.0E-01"]), (102, ["0.0E+00", "4.0E+02", "-7.5E-03"])] {
        let mut line = format!("{:>10}{:8}", id, "");
        for v in vals {
            line.push_str(&field(v));
        }
        line.push_str("       1");
        s.push_str(&line);
        s.push('\n');
        let mut cont = field("-CONT-");
        for v in ["1.0E+00", "2.0E+00", "3.0E+00"] {
            cont.push_str(&field(v));
        }
        s.push_str(cont.trim_end());
        s.push('\n');
    }
    s
}

#[test]
fn hand_fixture_reads_by_column() {
    let text = hand_fixture();
    let doc = parse_punch(&text, &six()).unwrap();
    assert_eq!(doc.blocks.len(), 1);
    let b = &doc.blocks[0];
    assert_eq!(b.subcase(), Some(1));
    assert_eq!(b.title(), Some("HAND FIXTURE"));
    assert_eq!(b.kinds().collect::<Vec<_>>(), ["ELEMENT FORCES"]);
    assert_eq!(b.records.len(), 2);
    for (line, rec) in [(3usize, &b.records[0]), (5, &b.records[1])] {
        let l: Vec<&str> = text.lines().collect();
        let by_hand: Vec<f64> = (0..3).map(|k| l[line][18 + 18 * k..36 + 18 * k].trim().parse().unwrap()).collect();
        assert_eq!(rec.get("axial"), Some(by_hand[0]));
        assert_eq!(rec.get("shear-1"), Some(by_hand[1]));
        assert_eq!(rec.get("shear-2"), Some(by_hand[2]));
        assert_eq!(rec.get("torque"), Some(3.0));
    }
    assert_eq!(b.records[0].element, 101);
    assert_eq!(b.records[1].get("shear-2"), Some(-7.5e-3));

    let x = extract_beam_forces(&doc, &six(), 1).unwrap();
    assert_eq!(x.forces, [(101, -2.25, 0.3), (102, 400.0, -7.5e-3)]);
    assert!(x.warnings.is_empty());
}

#[test]
fn crlf_reads_the_same() {
    let text = hand_fixture();
    let crlf = text.replace('\n', "\r\n");
    assert_eq!(parse_punch(&crlf, &six()).unwrap(), parse_punch(&text, &six()).unwrap());
}

#[test]
fn columns_past_80_are_ignored() {
    let text = hand_fixture();
    let padded: String = text
        .lines()
        .map(|l| if l.starts_with('$') { format!("{l}\n") } else { format!("{l:<80}GARBAGE\n") })
        .collect();
    assert_eq!(parse_punch(&padded, &six()).unwrap(), parse_punch(&text, &six()).unwrap());
}

#[test]
fn shifted_field_is_misread() {
    let wide = field(&format_real(-1.2345678901e-100));
    let d = FormatDescriptor::new(vec!["a".into(), "b".into(), "c".into()], vec![]).unwrap();
    let aligned = format!("{:>10}{:8}{wide}{wide}{wide}", 7, "");
    assert_eq!(parse_punch(&aligned, &d).unwrap().blocks[0].records[0].get("c"), Some(-1.2345678901e-100));
    // Two columns to the right, each field loses its last digit to the next.
    let shifted = format!("{:>10}{:10}{wide}{wide}{wide}", 7, "");
    assert!(matches!(parse_punch(&shifted, &d), Err(PunchError::BadReal { .. })));
}

#[test]
fn orphan_and_empty() {
    assert_eq!(parse_punch("-CONT-            1.0E+00\n", &six()).unwrap_err(), PunchError::OrphanContinuation(1));
    assert!(parse_punch("", &six()).unwrap().is_empty());
    assert_eq!(write_punch(&PunchDocument::default(), &six()).unwrap(), "");
}

#[test]
fn short_record_is_reported() {
    let text = hand_fixture();
    let cut: Vec<&str> = text.lines().filter(|l| !l.starts_with("-CONT-")).collect();
    match parse_punch(&cut.join("\n"), &six()) {
        Err(PunchError::WrongValueCount { element: 101, expected: 6, found: 3, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_is_written_canonically() {
    assert_eq!(format_real(0.0), "0.0E+00");
    let doc = PunchDocument {
        blocks: vec![PunchBlock {
            headers: vec![Header::Subcase(3)],
            records: vec![PunchRecord {
                element: 9,
                values: six().names().map(|n| (n.to_string(), 0.0)).collect(),
            }],
        }],
    };
    let text = write_punch(&doc, &six()).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("0.0E+00"));
    assert_eq!(parse_punch(&text, &six()).unwrap(), doc);
}

#[test]
fn missing_subcase_and_missing_shears() {
    let doc = parse_punch(&hand_fixture(), &six()).unwrap();
    assert_eq!(extract_beam_forces(&doc, &six(), 2).unwrap_err(), PunchError::NoSubcase(2));
    let no_shear = FormatDescriptor::new(vec!["a".into()], vec![]).unwrap();
    assert!(matches!(extract_beam_forces(&doc, &no_shear, 1), Err(PunchError::Descriptor(_))));

    let empty = parse_punch("$SUBCASE ID = 4\n", &six()).unwrap();
    let x = extract_beam_forces(&empty, &six(), 4).unwrap();
    assert!(x.forces.is_empty());
    assert_eq!(x.warnings.len(), 1);
}

#[test]
fn lines_fit_in_80_columns() {
    let text = write_punch(&parse_punch(&hand_fixture(), &six()).unwrap(), &six()).unwrap();
    assert!(text.lines().all(|l| l.len() <= 80));
}

/// Reals with at most 11 significant digits survive the 18-column field.
fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        (-99_999_999_999i64..99_999_999_999, -30i32..30).prop_map(|(m, e)| format!("{m}e{e}").parse().unwrap()),
    ]
}

fn header() -> impl Strategy<Value = Header> {
    prop_oneof![
        "[A-Z0-9][A-Z0-9 ]{0,20}[A-Z0-9]".prop_map(Header::Title),
        "[A-Z0-9]{1,20}".prop_map(Header::Subtitle),
        "[A-Z0-9]{1,20}".prop_map(Header::Label),
        (1u32..99_999).prop_map(Header::Subcase),
        "ELEMENT FORCES|ELEMENT TYPE = 34".prop_map(Header::Other),
    ]
}

fn document() -> impl Strategy<Value = PunchDocument> {
    let record = (1u32..99_999_999, prop::collection::vec(real(), 6)).prop_map(|(element, v)| PunchRecord {
        element,
        values: six().names().map(String::from).zip(v).collect(),
    });
    let block = (prop::collection::vec(header(), 1..4), prop::collection::vec(record, 0..5))
        .prop_map(|(headers, records)| PunchBlock { headers, records });
    prop::collection::vec(block, 0..4).prop_map(|blocks| PunchDocument { blocks })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn write_then_parse_is_identity(doc in document()) {
        // Adjacent header-only blocks merge on reading; compare canonical text.
        let text = write_punch(&doc, &six()).unwrap();
        let back = parse_punch(&text, &six()).unwrap();
        prop_assert_eq!(write_punch(&back, &six()).unwrap(), text.clone());
        let values = |d: &PunchDocument| d.blocks.iter().flat_map(|b| b.records.clone()).collect::<Vec<_>>();
        prop_assert_eq!(values(&back), values(&doc));
    }

    #[test]
    fn real_field_is_exact(v in real()) {
        let s = format_real(v);
        prop_assert!(s.len() <= 18);
        prop_assert_eq!(s.parse::<f64>().unwrap(), v);
    }
}
