//! Proptest strategies for the unit tests in this crate.

use proptest::prelude::*;

use crate::term::{Term, Triple};

/// IRI bodies drawn from a small printable alphabet plus some non-ASCII,
/// always non-empty and free of the characters the IRI syntax forbids.
pub fn arb_iri() -> impl Strategy<Value = Term> {
    proptest::string::string_regex("[a-zA-Z0-9:/#?&=._~%+!,;()*@$'\\[\\]é日-]{1,40}")
        .unwrap()
        .prop_map(|s| Term::iri(format!("http://x/{s}")).unwrap())
}

pub fn arb_blank() -> impl Strategy<Value = Term> {
    proptest::string::string_regex("[A-Za-z0-9][A-Za-z0-9._-]{0,8}")
        .unwrap()
        .prop_map(|label| Term::blank(label).unwrap())
}

/// Lexical forms exercise escapes: quotes, backslashes, newlines, tabs,
/// carriage returns, and astral-plane characters.
fn arb_lexical() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            5 => any::<char>(),
            1 => Just('"'),
            1 => Just('\\'),
            1 => Just('\n'),
            1 => Just('\t'),
            1 => Just('\r'),
            1 => Just('😀'),
        ],
        0..20,
    )
    .prop_map(|chars| chars.into_iter().collect())
}

fn arb_language() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-z]{2,3}(-[a-z0-9]{1,4}){0,2}").unwrap()
}

pub fn arb_literal() -> impl Strategy<Value = Term> {
    (arb_lexical(), prop_oneof![
        3 => Just(None),
        1 => arb_language().prop_map(Some),
    ], arb_iri())
        .prop_flat_map(|(lexical, lang, dt_term)| match lang {
            Some(tag) => Just(Term::literal_lang(lexical, tag).unwrap()).boxed(),
            None => {
                let typed = Term::literal_typed(
                    lexical.clone(),
                    dt_term.as_iri().unwrap().to_owned(),
                )
                .unwrap();
                prop_oneof![
                    2 => Just(Term::literal(lexical)),
                    1 => Just(typed),
                ]
                .boxed()
            }
        })
}

pub fn arb_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => arb_iri(),
        1 => arb_blank(),
        3 => arb_literal(),
    ]
}

pub fn arb_subject() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => arb_iri(),
        1 => arb_blank(),
    ]
}

pub fn arb_triple() -> impl Strategy<Value = Triple> {
    (arb_subject(), arb_iri(), arb_term())
        .prop_map(|(s, p, o)| Triple::new(s, p, o).unwrap())
}

/// Triples drawn from a small vocabulary so that random sets share terms
/// and pattern queries actually hit.
pub fn arb_dense_triples(max: usize) -> impl Strategy<Value = Vec<Triple>> {
    let subject = prop_oneof![
        4 => (0..12u32).prop_map(|i| Term::iri(format!("http://s/{i}")).unwrap()),
        1 => (0..4u32).prop_map(|i| Term::blank(format!("b{i}")).unwrap()),
    ];
    let predicate = (0..6u32).prop_map(|i| Term::iri(format!("http://p/{i}")).unwrap());
    let object = prop_oneof![
        2 => (0..10u32).prop_map(|i| Term::iri(format!("http://o/{i}")).unwrap()),
        2 => (0..10u32).prop_map(|i| Term::literal(format!("v{i}"))),
        1 => (0..10u32).prop_map(|i| Term::literal_lang(format!("v{i}"), "en").unwrap()),
    ];
    proptest::collection::vec(
        (subject, predicate, object).prop_map(|(s, p, o)| Triple::new(s, p, o).unwrap()),
        0..max,
    )
}
