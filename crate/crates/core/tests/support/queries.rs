//! Random table queries, biased toward values that occur in generated cards.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dp_registry::aggregate::YearRange;
use dp_registry::query::{Column, Filter, Query, Sort, SortDirection};
use dp_registry::TransparencyTier;
use proptest::collection::{btree_set, vec};
use proptest::option;
use proptest::prelude::*;

fn arb_column() -> impl Strategy<Value = Column> {
    proptest::sample::select(Column::ALL.to_vec())
}

fn arb_needle() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-eA-E]{1,2}",
        Just("e".to_owned()),
        Just("unspecified".to_owned()),
        Just("ε=".to_owned()),
        Just("total".to_owned()),
        Just("EMOJI".to_owned()),
        Just("1e-".to_owned()),
        Just("example.org".to_owned()),
    ]
}

fn arb_literal() -> impl Strategy<Value = String> {
    proptest::sample::select(vec![
        "pure",
        "Approximate",
        "zero_concentrated",
        "renyi",
        "central",
        "LOCAL",
        "shuffle",
        "one_release",
        "many_releases",
        "static",
        "dynamic",
        "interactive",
        "non_interactive",
        "unspecified",
        "composition",
        "post-processing",
        "pre-processing",
        "mechanisms",
        "justification",
    ])
    .prop_map(str::to_owned)
}

fn arb_filter(column: Column) -> BoxedStrategy<Filter> {
    use dp_registry::query::ColumnKind::*;
    match column.kind() {
        Text => vec(arb_needle(), 0..3).prop_map(Filter::Contains).boxed(),
        Enum | Keywords => btree_set(arb_literal(), 0..4).prop_map(Filter::OneOf).boxed(),
        Tier => btree_set(1u8..=3, 0..3)
            .prop_map(|s| Filter::Tiers(s.into_iter().filter_map(TransparencyTier::new).collect::<BTreeSet<_>>()))
            .boxed(),
        Year => (option::of(1995i32..2026), option::of(1995i32..2026))
            .prop_map(|(min, max)| Filter::Years(YearRange { min, max }))
            .boxed(),
        Flag => any::<bool>().prop_map(Filter::Flag).boxed(),
    }
}

pub fn arb_query() -> impl Strategy<Value = Query> {
    let filters = vec(arb_column().prop_flat_map(|c| arb_filter(c).prop_map(move |f| (c, f))), 0..3);
    let sort = option::of((
        arb_column(),
        prop_oneof![Just(SortDirection::Ascending), Just(SortDirection::Descending)],
    ));
    (option::weighted(0.6, arb_needle()), filters, sort).prop_map(|(search, filters, sort)| Query {
        global_search: search,
        column_filters: filters.into_iter().collect(),
        sort: sort.map(|(column, direction)| Sort { column, direction }),
    })
}
