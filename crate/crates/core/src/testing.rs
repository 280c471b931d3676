//! Fixtures and proptest generators for cards.
//!
//! Enabled for this crate's own tests and, for downstream crates, through the
//! `test-support` feature.

use proptest::collection::{btree_set, vec};
use proptest::option;
use proptest::prelude::*;

use crate::card::*;
use crate::tier::TransparencyTier;

/// Card with exactly the Tier-1 fields filled in.
pub fn tier1_card(id: &str) -> DeploymentCard {
    let mut card = DeploymentCard::new(id, TransparencyTier::ONE);
    card.data_product = DataProductSection {
        name: Some(format!("Deployment {id}")),
        curator: Some("Example Statistics Office".into()),
        description: Some("Weekly counts of service visits by district.".into()),
        intended_use: Some("Planning by regional health authorities.".into()),
        publication_year: Some(2021),
        region: Some("Freedonia".into()),
        sector: Some(Sector::Government),
    };
    card
}

/// Card with every section filled in, interactive, declared at Tier 3.
pub fn full_card(id: &str) -> DeploymentCard {
    let mut card = tier1_card(id);
    card.declared_tier = TransparencyTier::THREE;
    card.flavor = Some(FlavorSection {
        name: Some(FlavorName::Approximate),
        other_label: None,
        data_domain: Some("All visit records for a calendar year.".into()),
        unprotected_quantities: Some("Number of districts.".into()),
    });
    card.privacy_loss = Some(PrivacyLossSection {
        privacy_unit: Some("person-year".into()),
        adjacency_specification: Some("Add or remove all records of one person within one year.".into()),
        parameters: vec![
            PrivacyParameter::new(ParameterSymbol::Epsilon, "1.0", ParameterScope::Total).unwrap(),
            PrivacyParameter::new(ParameterSymbol::Delta, "1e-9", ParameterScope::Total).unwrap(),
        ],
    });
    card.deployment_model = Some(DeploymentModelSection {
        model: Some(ModelName::Central),
        other_label: None,
        trust_assumptions: Some("The office is trusted with raw records.".into()),
        release_type: Some(ReleaseType::ManyReleases),
        release_details: Some("Budget resets every calendar year.".into()),
        data_source: Some(DataSource::Dynamic),
        access_type: Some(AccessType::Interactive),
        access_details: Some("Each analyst receives an equal share of the yearly budget.".into()),
    });
    card.accounting = Some(AccountingSection {
        composition: Some("Sequential composition across weekly releases.".into()),
        post_processing: Some("Negative counts are set to zero.".into()),
    });
    card.implementation = Some(ImplementationSection {
        pre_processing: Some("Contribution bounds fixed from public documentation.".into()),
        mechanisms: Some("Gaussian mechanism.".into()),
        justification: Some("Small-area counts enable re-identification.".into()),
        code_link: Some("https://example.org/code".into()),
    });
    card.more_info = Some(MoreInfoSection {
        sources: vec!["https://example.org/paper".into()],
        data_product_link: Some("https://example.org/data".into()),
        notes: None,
    });
    card
}

/// Non-empty text, including non-ASCII and JSON-special characters.
pub fn arb_text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z][a-zA-Z0-9 ,.]{0,24}",
        "[a-z]{1,6}(-[a-z]{1,6}){0,2}",
        "[\\PC\"\\\\\n\t]{1,12}",
        Just("Emoji usage".to_owned()),
        Just("none".to_owned()),
    ]
}

pub fn arb_slug() -> impl Strategy<Value = String> {
    "[a-z0-9]{1,8}(-[a-z0-9]{1,6}){0,2}"
}

pub fn arb_url() -> impl Strategy<Value = String> {
    ("[a-z]{1,10}", "[a-z0-9]{0,8}").prop_map(|(host, path)| format!("https://{host}.example.org/{path}"))
}

pub fn arb_parameter_value() -> impl Strategy<Value = ParameterValue> {
    prop_oneof![
        (0u32..100, 0u32..1000).prop_map(|(a, b)| format!("{a}.{b}")),
        (1u32..20).prop_map(|e| format!("1e-{e}")),
        (0u32..64).prop_map(|n| n.to_string()),
    ]
    .prop_map(|text| text.parse().expect("generated literal is a JSON number"))
}

fn arb_sector() -> impl Strategy<Value = Sector> {
    prop_oneof![
        Just(Sector::Technology),
        Just(Sector::Government),
        Just(Sector::Healthcare),
        Just(Sector::Education),
        Just(Sector::Energy),
        Just(Sector::Nonprofit),
        Just(Sector::Finance),
        "[a-z]{1,8}".prop_map(Sector::Other),
    ]
}

fn pick<T: Copy + std::fmt::Debug + 'static>(all: &'static [T]) -> impl Strategy<Value = T> {
    proptest::sample::select(all)
}

/// Optional text that is present most of the time, so generated cards reach
/// every tier.
fn mostly(text: impl Strategy<Value = String>) -> impl Strategy<Value = Option<String>> {
    option::weighted(0.85, text)
}

fn arb_data_product() -> BoxedStrategy<DataProductSection> {
    (
        mostly(arb_text()),
        mostly(arb_text()),
        mostly(arb_text()),
        mostly(arb_text()),
        option::weighted(0.9, 1990i32..=2025),
        mostly(prop_oneof![Just("United States".to_owned()), Just("Worldwide".to_owned()), arb_text()]),
        option::weighted(0.9, arb_sector()),
    )
        .prop_map(|(name, curator, description, intended_use, publication_year, region, sector)| {
            DataProductSection {
                name,
                curator,
                description,
                intended_use,
                publication_year,
                region,
                sector,
            }
        })
    .boxed()
}

fn arb_flavor() -> BoxedStrategy<FlavorSection> {
    (
        option::weighted(0.9, pick(FlavorName::ALL)),
        arb_text(),
        mostly(arb_text()),
        mostly(arb_text()),
    )
        .prop_map(|(name, label, data_domain, unprotected_quantities)| FlavorSection {
            other_label: (name == Some(FlavorName::Other)).then_some(label),
            name,
            data_domain,
            unprotected_quantities,
        })
    .boxed()
}

fn arb_parameter() -> BoxedStrategy<PrivacyParameter> {
    (
        pick(ParameterSymbol::ALL),
        "[a-zA-Z]{1,3}",
        arb_parameter_value(),
        pick(ParameterScope::ALL),
        option::of(arb_text()),
    )
        .prop_map(|(symbol, other, value, scope, notes)| PrivacyParameter {
            other_symbol: (symbol == ParameterSymbol::Other).then_some(other),
            symbol,
            value,
            scope,
            notes,
        })
    .boxed()
}

fn arb_privacy_loss() -> BoxedStrategy<PrivacyLossSection> {
    (mostly(arb_text()), mostly(arb_text()), vec(arb_parameter(), 0..4)).prop_map(
        |(privacy_unit, adjacency_specification, mut parameters)| {
            let mut seen = Vec::new();
            parameters.retain(|p| {
                let key = (p.symbol, p.other_symbol.clone(), p.scope);
                let fresh = !seen.contains(&key);
                seen.push(key);
                fresh
            });
            PrivacyLossSection {
                privacy_unit,
                adjacency_specification,
                parameters,
            }
        },
    )
    .boxed()
}

fn arb_deployment_model() -> BoxedStrategy<DeploymentModelSection> {
    (
        option::weighted(0.9, pick(ModelName::ALL)),
        arb_text(),
        mostly(arb_text()),
        option::weighted(0.9, pick(ReleaseType::ALL)),
        mostly(arb_text()),
        option::weighted(0.9, pick(DataSource::ALL)),
        option::weighted(0.9, pick(AccessType::ALL)),
        mostly(arb_text()),
    )
        .prop_map(
            |(model, label, trust_assumptions, release_type, release_details, data_source, access_type, access_details)| {
                let release_type = match data_source {
                    Some(DataSource::Dynamic) => release_type.map(|_| ReleaseType::ManyReleases),
                    _ => release_type,
                };
                DeploymentModelSection {
                    other_label: (model == Some(ModelName::Other)).then_some(label),
                    model,
                    trust_assumptions,
                    release_type,
                    release_details,
                    data_source,
                    access_type,
                    access_details,
                }
            },
        )
    .boxed()
}

fn arb_more_info() -> BoxedStrategy<MoreInfoSection> {
    (vec(arb_url(), 0..3), option::of(arb_url()), option::of(arb_text())).prop_map(
        |(sources, data_product_link, notes)| MoreInfoSection {
            sources,
            data_product_link,
            notes,
        },
    )
    .boxed()
}

/// Structurally valid, normalized cards with random field coverage.
///
/// Inferred tiers spread over absent, 1, 2 and 3.
pub fn arb_card() -> impl Strategy<Value = DeploymentCard> {
    arb_card_with_id(arb_slug())
}

pub fn arb_card_with_id(id: impl Strategy<Value = String> + 'static) -> BoxedStrategy<DeploymentCard> {
    (
        id,
        pick(&TransparencyTier::ALL),
        arb_data_product(),
        option::weighted(0.85, arb_flavor()),
        option::weighted(0.85, arb_privacy_loss()),
        option::weighted(0.85, arb_deployment_model()),
        option::weighted(0.8, (mostly(arb_text()), mostly(arb_text()))),
        option::weighted(
            0.8,
            (mostly(arb_text()), mostly(arb_text()), mostly(arb_text()), option::of(arb_url())),
        ),
        option::of(arb_more_info()),
    )
        .prop_map(
            |(id, declared_tier, data_product, flavor, privacy_loss, deployment_model, accounting, implementation, more_info)| {
                DeploymentCard {
                    id,
                    schema_version: SCHEMA_VERSION.to_owned(),
                    declared_tier,
                    data_product,
                    flavor,
                    privacy_loss,
                    deployment_model,
                    accounting: accounting.map(|(composition, post_processing)| AccountingSection {
                        composition,
                        post_processing,
                    }),
                    implementation: implementation.map(|(pre_processing, mechanisms, justification, code_link)| {
                        ImplementationSection {
                            pre_processing,
                            mechanisms,
                            justification,
                            code_link,
                        }
                    }),
                    more_info,
                }
                .normalized()
            },
        )
        .boxed()
}

/// Up to `max` cards with distinct ids, each with a publication year.
pub fn arb_corpus(max: usize) -> BoxedStrategy<Vec<DeploymentCard>> {
    btree_set(arb_slug(), 0..=max).prop_flat_map(|ids| {
        ids.into_iter()
            .map(|id| {
                arb_card_with_id(Just(id)).prop_map(|mut card| {
                    card.data_product.publication_year.get_or_insert(2015);
                    card
                })
            })
            .collect::<Vec<_>>()
    })
    .boxed()
}
