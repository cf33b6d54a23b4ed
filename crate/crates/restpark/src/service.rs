//! The HTTP contract as a pure function: `GET /restpark` with `subject`,
//! `predicate`, `object`, `page`, `page_size` query parameters against an
//! immutable store, yielding a fully specified response. No sockets here;
//! the server and tests both drive this directly.

use std::fmt::Write as _;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use thiserror::Error;

use crate::jsonld::encode_graph;
use crate::store::{PageRequest, TripleStore, DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE};
use crate::term::{parse_term, KindSet, Term, TriplePattern};

/// Bytes escaped when building query-string values: everything except
/// ASCII alphanumerics and `-._~` (the RFC 3986 unreserved set). Notably
/// space becomes `%20`, `#` becomes `%23`, and `+` becomes `%2B`.
const QUERY_VALUE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

/// A query-string parse failure, always attributed to one parameter.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid parameter {parameter}: {message}")]
pub struct QueryError {
    pub parameter: String,
    pub message: String,
}

impl QueryError {
    fn new(parameter: impl Into<String>, message: impl Into<String>) -> Self {
        QueryError {
            parameter: parameter.into(),
            message: message.into(),
        }
    }
}

/// A validated query: the pattern to match and the page to return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuery {
    pub pattern: TriplePattern,
    pub page: PageRequest,
}

/// Decode one `application/x-www-form-urlencoded` component: `+` is a
/// space, `%XX` must be two hex digits, and the result must be UTF-8.
fn decode_component(raw: &str) -> Result<String, String> {
    let bytes = raw.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b'%' => {
                let hex = bytes
                    .get(i + 1..i + 3)
                    .and_then(|pair| std::str::from_utf8(pair).ok())
                    .and_then(|pair| u8::from_str_radix(pair, 16).ok())
                    .ok_or_else(|| "incomplete percent-escape".to_string())?;
                out.push(hex);
                i += 3;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8(out).map_err(|_| "percent-escapes decode to invalid UTF-8".into())
}

fn term_from_node_text(value: &str) -> Result<Term, String> {
    if let Some(label) = value.strip_prefix("_:") {
        Term::blank(label).map_err(|e| e.to_string())
    } else {
        Term::iri(value).map_err(|e| e.to_string())
    }
}

/// Build a pattern from decoded parameter texts. This is the one grammar for
/// pattern slots, shared by the query string and the CLI flags: the subject
/// is an IRI or `_:label`, the predicate an IRI, and an object is read as a
/// full literal in statement syntax when it starts with `"`, else as a node.
pub fn pattern_from_texts(
    subject: Option<&str>,
    predicate: Option<&str>,
    object: Option<&str>,
) -> Result<TriplePattern, QueryError> {
    let subject = subject
        .map(|v| term_from_node_text(v).map_err(|m| QueryError::new("subject", m)))
        .transpose()?;
    let predicate = predicate
        .map(|v| Term::iri(v).map_err(|e| QueryError::new("predicate", e.to_string())))
        .transpose()?;
    let object = object
        .map(|v| -> Result<Term, QueryError> {
            if v.starts_with('"') {
                parse_term(v, KindSet::LITERAL).map_err(|e| QueryError::new("object", e.to_string()))
            } else {
                term_from_node_text(v).map_err(|m| QueryError::new("object", m))
            }
        })
        .transpose()?;
    TriplePattern::new(subject, predicate, object)
        .map_err(|e| QueryError::new("predicate", e.to_string()))
}

/// Parse the raw (still percent-encoded) query component into a pattern and
/// page selection. Unknown and repeated parameters are errors; absent
/// pattern parameters are wildcards.
pub fn parse_query_params(raw_query: &str) -> Result<ParsedQuery, QueryError> {
    let mut subject: Option<String> = None;
    let mut predicate: Option<String> = None;
    let mut object: Option<String> = None;
    let mut page: Option<String> = None;
    let mut page_size: Option<String> = None;

    for segment in raw_query.split('&') {
        if segment.is_empty() {
            continue;
        }
        let (raw_key, raw_value) = segment.split_once('=').unwrap_or((segment, ""));
        let key = decode_component(raw_key)
            .map_err(|message| QueryError::new(raw_key, message))?;
        let value =
            decode_component(raw_value).map_err(|message| QueryError::new(&key, message))?;
        let slot = match key.as_str() {
            "subject" => &mut subject,
            "predicate" => &mut predicate,
            "object" => &mut object,
            "page" => &mut page,
            "page_size" => &mut page_size,
            _ => return Err(QueryError::new(&key, "unknown parameter")),
        };
        if slot.is_some() {
            return Err(QueryError::new(&key, "repeated parameter"));
        }
        *slot = Some(value);
    }

    let pattern =
        pattern_from_texts(subject.as_deref(), predicate.as_deref(), object.as_deref())?;

    let parse_number = |name: &str, value: Option<String>| -> Result<Option<usize>, QueryError> {
        value
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| QueryError::new(name, format!("not a positive integer: {v:?}")))
            })
            .transpose()
    };
    let page_no = parse_number("page", page)?.unwrap_or(1);
    let size = parse_number("page_size", page_size)?.unwrap_or(DEFAULT_PAGE_SIZE);
    if page_no < 1 {
        return Err(QueryError::new("page", "must be at least 1"));
    }
    if !(1..=MAX_PAGE_SIZE).contains(&size) {
        return Err(QueryError::new(
            "page_size",
            format!("must be between 1 and {MAX_PAGE_SIZE}"),
        ));
    }
    let page = PageRequest::new(page_no, size).expect("validated above");

    Ok(ParsedQuery { pattern, page })
}

fn encode_value(out: &mut String, key: &str, value: &str) {
    if !out.is_empty() {
        out.push('&');
    }
    out.push_str(key);
    out.push('=');
    let _ = write!(out, "{}", utf8_percent_encode(value, QUERY_VALUE));
}

/// Build the canonical query string for a pattern and page selection:
/// parameters in `subject`, `predicate`, `object`, `page`, `page_size`
/// order, values percent-encoded, defaults (`page=1`, `page_size=100`)
/// omitted. [`parse_query_params`] inverts this exactly.
pub fn encode_query(pattern: &TriplePattern, page: usize, page_size: usize) -> String {
    let mut out = String::new();
    let node_text = |term: &Term| match term {
        Term::Iri(iri) => iri.as_str().to_owned(),
        _ => term.to_string(),
    };
    if let Some(s) = pattern.subject() {
        encode_value(&mut out, "subject", &node_text(s));
    }
    if let Some(p) = pattern.predicate() {
        encode_value(&mut out, "predicate", &node_text(p));
    }
    if let Some(o) = pattern.object() {
        encode_value(&mut out, "object", &node_text(o));
    }
    if page != 1 {
        encode_value(&mut out, "page", &page.to_string());
    }
    if page_size != DEFAULT_PAGE_SIZE {
        encode_value(&mut out, "page_size", &page_size.to_string());
    }
    out
}

/// A complete HTTP response, independent of any server framework. Headers
/// are ordered; bodies are bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponseSpec {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponseSpec {
    fn text(status: u16, extra: &[(&str, &str)], body: impl Into<String>) -> Self {
        let mut headers = vec![(
            "Content-Type".to_owned(),
            "text/plain; charset=utf-8".to_owned(),
        )];
        headers.extend(
            extra
                .iter()
                .map(|(k, v)| ((*k).to_owned(), (*v).to_owned())),
        );
        headers.push(cors());
        HttpResponseSpec {
            status,
            headers,
            body: body.into().into_bytes(),
        }
    }

    /// First header with this name, ASCII-case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

fn cors() -> (String, String) {
    (
        "Access-Control-Allow-Origin".to_owned(),
        "*".to_owned(),
    )
}

/// Serve one request against the store mounted at the root, so the
/// queryable resource is exactly `/restpark`.
pub fn handle_request(
    store: &TripleStore,
    method: &str,
    path: &str,
    raw_query: &str,
) -> HttpResponseSpec {
    handle_request_at(store, "", method, path, raw_query)
}

/// Serve one request with the resource mounted under a path prefix (for
/// deployments like `/dblp/restpark`). An empty prefix means the root.
///
/// Resolution order: unknown path is 404 before anything else, then
/// non-GET is 405, then a bad query is 400; zero matches are still 200
/// with an empty graph.
pub fn handle_request_at(
    store: &TripleStore,
    mount_prefix: &str,
    method: &str,
    path: &str,
    raw_query: &str,
) -> HttpResponseSpec {
    let resource = format!("{}/restpark", mount_prefix.trim_end_matches('/'));
    if path != resource {
        return HttpResponseSpec::text(404, &[], format!("no such resource: {path}\n"));
    }
    if method != "GET" {
        return HttpResponseSpec::text(
            405,
            &[("Allow", "GET")],
            format!("method {method} not allowed; this is a read-only GET resource\n"),
        );
    }
    let query = match parse_query_params(raw_query) {
        Ok(query) => query,
        Err(err) => return HttpResponseSpec::text(400, &[], format!("{err}\n")),
    };

    let result = store.match_page(&query.pattern, query.page);
    let body = encode_graph(&result.triples).into_bytes();

    let mut headers = vec![
        (
            "Content-Type".to_owned(),
            "application/ld+json".to_owned(),
        ),
        ("X-Total-Count".to_owned(), result.total_count.to_string()),
    ];
    let mut links = Vec::new();
    if result.has_next {
        links.push(page_link(&resource, &query, query.page.page() + 1, "next"));
    }
    if query.page.page() > 1 {
        links.push(page_link(&resource, &query, query.page.page() - 1, "prev"));
    }
    if !links.is_empty() {
        headers.push(("Link".to_owned(), links.join(", ")));
    }
    headers.push(cors());

    HttpResponseSpec {
        status: 200,
        headers,
        body,
    }
}

fn page_link(resource: &str, query: &ParsedQuery, page: usize, rel: &str) -> String {
    let qs = encode_query(&query.pattern, page, query.page.page_size());
    let target = if qs.is_empty() {
        resource.to_owned()
    } else {
        format!("{resource}?{qs}")
    };
    format!("<{target}>; rel=\"{rel}\"")
}
