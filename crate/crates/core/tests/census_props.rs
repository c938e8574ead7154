use std::collections::BTreeMap;
use std::sync::OnceLock;

use ifcaudit::census::{census, diff, family_balance, Census, FAMILIES};
use ifcaudit::schema::{ReportGroup, TypeRegistry};
use ifcaudit::spf::{GraphBuilder, SpfHeader};
use proptest::prelude::*;

fn registry() -> &'static TypeRegistry {
    static R: OnceLock<TypeRegistry> = OnceLock::new();
    R.get_or_init(TypeRegistry::default)
}

fn type_names() -> Vec<String> {
    let mut names: Vec<String> = registry().names().take(60).map(str::to_string).collect();
    names.extend(
        [
            "IFCWALL",
            "IFCWALLSTANDARDCASE",
            "IFCSTAIRFLIGHT",
            "IFCMEMBER",
            "XUNKNOWN",
        ]
        .map(String::from),
    );
    names
}

fn census_strategy() -> impl Strategy<Value = Census> {
    let names = type_names();
    prop::collection::vec((prop::sample::select(names), 0u64..50), 0..25)
        .prop_map(|rows| Census::from_counts(rows, 0, None))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn diff_of_itself_is_empty(a in census_strategy()) {
        let d = diff(registry(), &a, &a);
        prop_assert!(d.is_empty());
        prop_assert!(d.grouped_deltas.is_empty());
    }

    #[test]
    fn diff_is_antisymmetric(a in census_strategy(), b in census_strategy()) {
        let ab = diff(registry(), &a, &b);
        let ba = diff(registry(), &b, &a);
        let negated: BTreeMap<String, i64> = ba.deltas.iter().map(|(k, v)| (k.clone(), -v)).collect();
        prop_assert_eq!(&ab.deltas, &negated);
        prop_assert_eq!(&ab.lost_types, &ba.gained_types);
        prop_assert_eq!(&ab.gained_types, &ba.lost_types);
        let neg_groups: BTreeMap<ReportGroup, i64> = ba.grouped_deltas.iter().map(|(k, v)| (*k, -v)).collect();
        prop_assert_eq!(&ab.grouped_deltas, &neg_groups);
    }

    #[test]
    fn grouped_deltas_conserve_totals(a in census_strategy(), b in census_strategy()) {
        let d = diff(registry(), &a, &b);
        let by_type: i64 = d.deltas.values().sum();
        let by_group: i64 = d.grouped_deltas.values().sum();
        prop_assert_eq!(by_type, by_group);
        prop_assert_eq!(by_type, b.total as i64 - a.total as i64);
        // Independent regrouping of the per-type deltas.
        let mut oracle: BTreeMap<ReportGroup, i64> = BTreeMap::new();
        for (t, v) in &d.deltas {
            *oracle.entry(registry().group_of(t)).or_default() += v;
        }
        oracle.retain(|_, v| *v != 0);
        prop_assert_eq!(oracle, d.grouped_deltas);
    }

    #[test]
    fn retyping_within_a_family_balances(
        family in 0usize..FAMILIES.len(),
        counts in prop::collection::vec(1u64..800, 2..4),
        moved in prop::collection::vec(0u64..800, 3),
    ) {
        let members = FAMILIES[family].1;
        let n = members.len().min(counts.len());
        let before: Vec<(String, u64)> = (0..n).map(|i| (members[i].to_string(), counts[i])).collect();
        // Move instances from member 0 into the others, keeping the total.
        let mut after = before.clone();
        for i in 1..n {
            let m = moved[i].min(after[0].1);
            after[0].1 -= m;
            after[i].1 += m;
        }
        let a = Census::from_counts(before, 0, None);
        let b = Census::from_counts(after, 0, None);
        let d = diff(registry(), &a, &b);
        prop_assert_eq!(family_balance(&d, members), 0);
        prop_assert_eq!(a.total, b.total);
    }
}

#[test]
fn wall_retyping_fixture() {
    // 718 walls saved as the standard-case subtype come back as plain walls.
    let mut before = GraphBuilder::new(SpfHeader::default());
    let mut after = GraphBuilder::new(SpfHeader::default());
    for _ in 0..718 {
        before.add("IFCWALLSTANDARDCASE", vec![]);
        after.add("IFCWALL", vec![]);
    }
    for _ in 0..12 {
        before.add("IFCWALL", vec![]);
        after.add("IFCWALL", vec![]);
    }
    let d = diff(
        registry(),
        &census(&before.build()),
        &census(&after.build()),
    );
    assert_eq!(d.deltas["IFCWALL"], 718);
    assert_eq!(d.deltas["IFCWALLSTANDARDCASE"], -718);
    assert_eq!(family_balance(&d, FAMILIES[0].1), 0);
    assert!(d.lost_types.contains("IFCWALLSTANDARDCASE"));
}
