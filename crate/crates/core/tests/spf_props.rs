use ifcaudit::census::census;
use ifcaudit::spf::{
    parse_spf, write_spf, AttributeValue as V, GraphBuilder, InstanceGraph, SpfHeader,
};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = V> {
    prop_oneof![
        any::<i64>().prop_map(V::Integer),
        (-1e12f64..1e12).prop_map(V::real),
        any::<f64>()
            .prop_filter("finite", |f| f.is_finite())
            .prop_map(V::real),
        ".*".prop_map(|s: String| V::text(&s)),
        "[A-Z][A-Z0-9_]{0,12}".prop_map(|s: String| V::enumeration(&s)),
        (1u64..40).prop_map(V::Reference),
        Just(V::Unset),
        Just(V::Derived),
        "[0-3][0-9A-F]{0,16}".prop_map(|s: String| V::Binary(s.into())),
    ]
}

fn value() -> impl Strategy<Value = V> {
    leaf().prop_recursive(4, 32, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..6).prop_map(V::List),
            ("IFC[A-Z]{1,12}", inner).prop_map(|(t, v): (String, V)| V::typed(&t, v)),
        ]
    })
}

fn graph() -> impl Strategy<Value = InstanceGraph> {
    prop::collection::vec(
        ("IFC[A-Z]{1,16}", prop::collection::vec(value(), 0..8)),
        1..40,
    )
    .prop_map(|rows| {
        let mut b = GraphBuilder::new(SpfHeader::default());
        for (t, attrs) in rows {
            b.add(&t, attrs);
        }
        b.build()
    })
}

fn assert_same(a: &InstanceGraph, b: &InstanceGraph) {
    assert_eq!(a.header(), b.header());
    assert_eq!(a.instances(), b.instances());
}

const VALID: &str = "ISO-10303-21;
HEADER;
FILE_DESCRIPTION(('ViewDefinition [CoordinationView]'),'2;1');
FILE_NAME('a.ifc','2020-01-01T00:00:00',('x'),(''),'p','s','');
FILE_SCHEMA(('IFC2X3'));
ENDSEC;
DATA;
#1=IFCCARTESIANPOINT((0.,1.5,-2.E-3));
#2=IFCDIRECTION((0.,0.,1.));
#3=IFCAXIS2PLACEMENT3D(#1,#2,$);
#4=IFCPROPERTYSINGLEVALUE('N\\X2\\00E9\\X0\\',$,IFCLABEL('a''b'),*);
ENDSEC;
END-ISO-10303-21;
";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_is_total_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_spf(&bytes);
    }

    #[test]
    fn parser_is_total_on_damaged_files(cut in 0usize..VALID.len(), junk in prop::collection::vec(any::<u8>(), 0..16)) {
        let mut bytes = VALID.as_bytes()[..cut].to_vec();
        bytes.extend(&junk);
        bytes.extend(&VALID.as_bytes()[cut..]);
        let _ = parse_spf(&bytes);
        let _ = parse_spf(&VALID.as_bytes()[..cut]);
    }

    #[test]
    fn write_parse_round_trip(g in graph()) {
        let text = write_spf(&g);
        let back = parse_spf(&text).unwrap();
        assert_same(&g, &back);
        prop_assert_eq!(write_spf(&back), text);
        prop_assert_eq!(census(&g).counts, census(&back).counts);
    }
}

#[test]
fn valid_fixture_is_idempotent() {
    let g = parse_spf(VALID.as_bytes()).unwrap();
    assert!(g.diagnostics().is_empty());
    let once = write_spf(&g);
    let again = parse_spf(&once).unwrap();
    assert_same(&g, &again);
    assert_eq!(write_spf(&again), once);
}
