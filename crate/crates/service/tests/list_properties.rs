use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use dp_registry::query::{Column, Filter, SortDirection};
use dp_registry::Query;
use dp_registry_service::api::ListResponse;
use dp_registry_service::{build_state, router, ServiceConfig};
use http_body_util::BodyExt;
use proptest::prelude::*;
use tower::ServiceExt;

fn encode(q: &Query) -> String {
    let mut params: Vec<(String, String)> = Vec::new();
    if let Some(s) = &q.global_search {
        params.push(("q".into(), s.clone()));
    }
    for (column, filter) in &q.column_filters {
        let value = match filter {
            Filter::Contains(v) => v.join(","),
            Filter::OneOf(v) => v.iter().cloned().collect::<Vec<_>>().join(","),
            Filter::Tiers(t) => t.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
            Filter::Years(r) => format!(
                "{},{}",
                r.min.map(|y| y.to_string()).unwrap_or_default(),
                r.max.map(|y| y.to_string()).unwrap_or_default()
            ),
            Filter::Flag(b) => b.to_string(),
        };
        params.push((format!("filter.{column}"), value));
    }
    if let Some(sort) = q.sort {
        params.push(("sort".into(), sort.column.to_string()));
        let order = match sort.direction {
            SortDirection::Ascending => "asc",
            SortDirection::Descending => "desc",
        };
        params.push(("order".into(), order.into()));
    }
    let encoded: Vec<String> = params
        .iter()
        .map(|(k, v)| format!("{}={}", encode_component(k), encode_component(v)))
        .collect();
    encoded.join("&")
}

fn encode_component(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

fn arb_query() -> impl Strategy<Value = Query> {
    let needle = prop_oneof![Just("apple"), Just("census"), Just("ε="), Just("day"), Just("rho"), Just("")];
    let filter = prop_oneof![
        Just((Column::FlavorLabel, "pure,approximate")),
        Just((Column::ModelLabel, "central")),
        Just((Column::Tier, "2,3")),
        Just((Column::PublicationYear, "2017,2021")),
        Just((Column::HasMoreInfo, "true")),
        Just((Column::AccountingKeywords, "composition")),
        Just((Column::Curator, "google,apple")),
    ];
    let sort = proptest::option::of((
        proptest::sample::select(Column::ALL.to_vec()),
        prop_oneof![Just(SortDirection::Ascending), Just(SortDirection::Descending)],
    ));
    (proptest::option::of(needle), proptest::collection::vec(filter, 0..3), sort).prop_map(|(q, filters, sort)| {
        let mut query = Query::default();
        if let Some(q) = q.filter(|q| !q.is_empty()) {
            query = query.search(q);
        }
        for (column, raw) in filters {
            query = query.filter(column, Filter::parse(column, raw).unwrap());
        }
        if let Some((column, direction)) = sort {
            query = query.sort_by(column, direction);
        }
        query
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn list_bodies_parse_and_match_the_index(q in arb_query()) {
        let runtime = tokio::runtime::Builder::new_current_thread().build().unwrap();
        let pending = tempfile::tempdir().unwrap();
        let seed = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../seed");
        let state = build_state(&ServiceConfig::new(seed, pending.path())).unwrap();
        let app = router(state.clone(), None);
        let uri = format!("/api/deployments?{}", encode(&q));
        let (status, body) = runtime.block_on(async {
            let response = app.oneshot(Request::get(&uri).body(Body::empty()).unwrap()).await.unwrap();
            (response.status(), response.into_body().collect().await.unwrap().to_bytes())
        });
        prop_assert_eq!(status, StatusCode::OK, "{}", uri);
        let list: ListResponse = serde_json::from_slice(&body).unwrap();
        let expected = state.snapshot().index.run_query(&q).unwrap();
        prop_assert_eq!(list.total, expected.len());
        prop_assert_eq!(list.rows, expected);
    }
}
