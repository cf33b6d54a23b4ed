//! Helpers shared by the integration tests: fixture loading, a raw-socket
//! HTTP client, seeded random data, a from-scratch JSON syntax checker, and
//! a brute-force plan evaluator. The last three deliberately avoid the
//! crate's own wire and execution code so tests compare two independent
//! routes to the same answer.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use restpark::federation::BindingTable;
use restpark::ntriples::parse_document;
use restpark::server::{Server, ServerHandle};
use restpark::store::TripleStore;
use restpark::term::{parse_term, KindSet};
use restpark::{Term, Triple, TriplePattern};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn plan_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../plans")
        .join(name)
}

pub fn fixture_triples(name: &str) -> Vec<Triple> {
    let text = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    let report = parse_document(&text, true).unwrap();
    assert!(report.errors.is_empty());
    report.triples
}

pub fn fixture_store(name: &str) -> TripleStore {
    TripleStore::build(fixture_triples(name))
}

/// Serve one fixture file on an OS-assigned port.
pub fn spawn_fixture(name: &str) -> ServerHandle {
    Server::new(fixture_store(name))
        .spawn("127.0.0.1:0".parse().unwrap())
        .unwrap()
}

// ---------------------------------------------------------------- raw HTTP

/// A response read straight off a TCP socket, untouched by any HTTP client
/// library.
pub struct RawResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl RawResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(key, _)| key.eq_ignore_ascii_case(name))
            .map(|(_, value)| value.as_str())
    }

    pub fn body_text(&self) -> &str {
        std::str::from_utf8(&self.body).expect("response body is UTF-8")
    }
}

pub fn http_get(addr: SocketAddr, target: &str) -> RawResponse {
    http_request(addr, "GET", target)
}

/// One request, `Connection: close`, response read to EOF and parsed by
/// hand.
pub fn http_request(addr: SocketAddr, method: &str, target: &str) -> RawResponse {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {target} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).unwrap();

    let split = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .expect("response has a header/body separator");
    let head = std::str::from_utf8(&raw[..split]).expect("header block is UTF-8");
    let body = raw[split + 4..].to_vec();

    let mut lines = head.split("\r\n");
    let status_line = lines.next().unwrap();
    let status: u16 = status_line
        .split_whitespace()
        .nth(1)
        .expect("status line has a code")
        .parse()
        .expect("status code is numeric");
    let headers: Vec<(String, String)> = lines
        .map(|line| {
            let (name, value) = line.split_once(':').expect("header has a colon");
            (name.trim().to_owned(), value.trim().to_owned())
        })
        .collect();

    let response = RawResponse {
        status,
        headers,
        body,
    };
    assert!(
        response.header("Transfer-Encoding").is_none(),
        "framing changed: tests read plain Content-Length bodies"
    );
    response
}

// ------------------------------------------------------------ random data

pub fn seeded_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A term from a small shared vocabulary, dense enough that random patterns
/// actually collide with random triples.
pub fn random_object(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..6) {
        0 => Term::iri(format!("http://o/{}", rng.gen_range(0..8))).unwrap(),
        1 => Term::blank(format!("b{}", rng.gen_range(0..4))).unwrap(),
        2 => Term::literal(format!("v{}", rng.gen_range(0..10))),
        3 => Term::literal_lang(format!("w{}", rng.gen_range(0..5)), "en").unwrap(),
        4 => Term::literal_typed(
            format!("{}", rng.gen_range(0..20)),
            "http://www.w3.org/2001/XMLSchema#integer",
        )
        .unwrap(),
        _ => Term::literal(format!("esc \"{}\"\n\t\\ {}", rng.gen_range(0..3), "\u{1F600}")),
    }
}

pub fn random_subject(rng: &mut StdRng) -> Term {
    if rng.gen_bool(0.2) {
        Term::blank(format!("s{}", rng.gen_range(0..5))).unwrap()
    } else {
        Term::iri(format!("http://s/{}", rng.gen_range(0..10))).unwrap()
    }
}

pub fn random_predicate(rng: &mut StdRng) -> Term {
    Term::iri(format!("http://p/{}", rng.gen_range(0..6))).unwrap()
}

pub fn random_triple(rng: &mut StdRng) -> Triple {
    Triple::new(
        random_subject(rng),
        random_predicate(rng),
        random_object(rng),
    )
    .unwrap()
}

pub fn random_triples(rng: &mut StdRng, count: usize) -> Vec<Triple> {
    (0..count).map(|_| random_triple(rng)).collect()
}

/// A pattern of the given shape (bit 0/1/2 = subject/predicate/object
/// bound). Bound slots are drawn from an existing triple half the time, so
/// hits and misses both occur.
pub fn random_pattern(rng: &mut StdRng, triples: &[Triple], shape: u8) -> TriplePattern {
    let pick = rng.gen_range(0..triples.len().max(1));
    let sample = triples.get(pick);
    let slot = |rng: &mut StdRng, bit: u8, from_triple: Option<&Term>, fresh: Term| {
        if shape & bit == 0 {
            None
        } else if rng.gen_bool(0.5) {
            from_triple.cloned().or(Some(fresh))
        } else {
            Some(fresh)
        }
    };
    let subject = {
        let fresh = random_subject(rng);
        slot(rng, 1, sample.map(Triple::subject), fresh)
    };
    let predicate = {
        let fresh = random_predicate(rng);
        slot(rng, 2, sample.map(Triple::predicate), fresh)
    };
    let object = {
        let fresh = random_object(rng);
        slot(rng, 4, sample.map(Triple::object), fresh)
    };
    TriplePattern::new(subject, predicate, object).unwrap()
}

/// Sort + dedup a triple list the way the store canonicalizes it, without
/// using the store.
pub fn canonical(triples: &[Triple]) -> Vec<Triple> {
    let set: BTreeSet<Triple> = triples.iter().cloned().collect();
    set.into_iter().collect()
}

// ------------------------------------------------------- JSON syntax check

/// Validate JSON syntax (RFC 8259 grammar) with a from-scratch
/// recursive-descent scan — a second opinion fully independent of
/// serde_json.
pub fn check_json_syntax(text: &str) -> Result<(), String> {
    let mut parser = JsonScan {
        bytes: text.as_bytes(),
        at: 0,
    };
    parser.skip_ws();
    parser.value()?;
    parser.skip_ws();
    if parser.at != parser.bytes.len() {
        return Err(format!("trailing bytes at offset {}", parser.at));
    }
    Ok(())
}

struct JsonScan<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl JsonScan<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.at).copied()
    }

    fn bump(&mut self) -> Result<u8, String> {
        let byte = self.peek().ok_or("unexpected end")?;
        self.at += 1;
        Ok(byte)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.at += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), String> {
        if self.bump()? != byte {
            return Err(format!("expected {:?} at offset {}", byte as char, self.at - 1));
        }
        Ok(())
    }

    fn literal(&mut self, text: &str) -> Result<(), String> {
        for &byte in text.as_bytes() {
            self.expect(byte)?;
        }
        Ok(())
    }

    fn value(&mut self) -> Result<(), String> {
        match self.peek().ok_or("unexpected end")? {
            b'{' => self.object(),
            b'[' => self.array(),
            b'"' => self.string(),
            b't' => self.literal("true"),
            b'f' => self.literal("false"),
            b'n' => self.literal("null"),
            b'-' | b'0'..=b'9' => self.number(),
            other => Err(format!("unexpected byte {:?} at offset {}", other as char, self.at)),
        }
    }

    fn object(&mut self) -> Result<(), String> {
        self.expect(b'{')?;
        self.skip_ws();
        if self.peek() == Some(b'}') {
            self.at += 1;
            return Ok(());
        }
        loop {
            self.skip_ws();
            self.string()?;
            self.skip_ws();
            self.expect(b':')?;
            self.skip_ws();
            self.value()?;
            self.skip_ws();
            match self.bump()? {
                b',' => continue,
                b'}' => return Ok(()),
                other => return Err(format!("expected ',' or '}}', got {:?}", other as char)),
            }
        }
    }

    fn array(&mut self) -> Result<(), String> {
        self.expect(b'[')?;
        self.skip_ws();
        if self.peek() == Some(b']') {
            self.at += 1;
            return Ok(());
        }
        loop {
            self.skip_ws();
            self.value()?;
            self.skip_ws();
            match self.bump()? {
                b',' => continue,
                b']' => return Ok(()),
                other => return Err(format!("expected ',' or ']', got {:?}", other as char)),
            }
        }
    }

    fn string(&mut self) -> Result<(), String> {
        self.expect(b'"')?;
        loop {
            match self.bump()? {
                b'"' => return Ok(()),
                b'\\' => match self.bump()? {
                    b'"' | b'\\' | b'/' | b'b' | b'f' | b'n' | b'r' | b't' => {}
                    b'u' => {
                        for _ in 0..4 {
                            if !self.bump()?.is_ascii_hexdigit() {
                                return Err("bad \\u escape".into());
                            }
                        }
                    }
                    other => return Err(format!("bad escape \\{}", other as char)),
                },
                byte if byte < 0x20 => return Err("raw control character in string".into()),
                _ => {}
            }
        }
    }

    fn number(&mut self) -> Result<(), String> {
        if self.peek() == Some(b'-') {
            self.at += 1;
        }
        match self.bump()? {
            b'0' => {}
            b'1'..=b'9' => self.digits(),
            _ => return Err("bad number".into()),
        }
        if self.peek() == Some(b'.') {
            self.at += 1;
            if !self.bump()?.is_ascii_digit() {
                return Err("bad fraction".into());
            }
            self.digits();
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.at += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.at += 1;
            }
            if !self.bump()?.is_ascii_digit() {
                return Err("bad exponent".into());
            }
            self.digits();
        }
        Ok(())
    }

    fn digits(&mut self) {
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.at += 1;
        }
    }
}

// ------------------------------------------------- brute-force plan oracle

/// Evaluate a plan document by nested-loop scanning local triple lists —
/// no HTTP, no pagination, none of the library's plan machinery. Rows come
/// back projected to the output variables, deduplicated, and sorted.
///
/// `datasets` maps each endpoint URL that appears in the plan to the triples
/// that endpoint serves.
pub fn brute_force_plan(
    plan_json: &str,
    datasets: &HashMap<String, Vec<Triple>>,
) -> Vec<Vec<Term>> {
    let doc: serde_json::Value = serde_json::from_str(plan_json).unwrap();
    let mut rows: Vec<HashMap<String, Term>> = vec![HashMap::new()];

    for step in doc["steps"].as_array().unwrap() {
        match step["kind"].as_str().unwrap() {
            kind @ ("fetch" | "extend") => {
                let _ = kind; // fetch and extend share one evaluation rule
                let endpoint = step["endpoint"].as_str().expect("test plans name endpoints");
                let triples = &datasets[endpoint];
                let pattern = &step["pattern"];
                let slots = [
                    pattern.get("subject").and_then(|v| v.as_str()),
                    pattern.get("predicate").and_then(|v| v.as_str()),
                    pattern.get("object").and_then(|v| v.as_str()),
                ];
                let mut next = Vec::new();
                for row in &rows {
                    for triple in triples {
                        if let Some(extended) = match_with_bindings(&slots, row, triple) {
                            next.push(extended);
                        }
                    }
                }
                rows = next;
            }
            "filter_host" => {
                let name = step["variable"]
                    .as_str()
                    .unwrap()
                    .trim_start_matches('?')
                    .to_owned();
                let authority = step["authority"].as_str().unwrap();
                rows.retain(|row| {
                    row.get(&name)
                        .and_then(Term::as_iri)
                        .and_then(iri_authority)
                        .map(|found| found.eq_ignore_ascii_case(authority))
                        .unwrap_or(false)
                });
            }
            other => panic!("unknown step kind {other:?}"),
        }
    }

    let output: Vec<String> = doc["output"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().trim_start_matches('?').to_owned())
        .collect();
    let projected: BTreeSet<Vec<Term>> = rows
        .iter()
        .map(|row| output.iter().map(|name| row[name].clone()).collect())
        .collect();
    projected.into_iter().collect()
}

/// Match one triple against a pattern under existing bindings; returns the
/// extended bindings on success. A variable seen twice must take one value.
fn match_with_bindings(
    slots: &[Option<&str>; 3],
    row: &HashMap<String, Term>,
    triple: &Triple,
) -> Option<HashMap<String, Term>> {
    let values = [triple.subject(), triple.predicate(), triple.object()];
    let mut bindings = row.clone();
    for (slot, value) in slots.iter().zip(values) {
        let Some(text) = slot else { continue };
        if let Some(name) = text.strip_prefix('?') {
            match bindings.get(name) {
                Some(existing) if existing != value => return None,
                Some(_) => {}
                None => {
                    bindings.insert(name.to_owned(), value.clone());
                }
            }
        } else {
            let term = parse_term(text, KindSet::ALL).unwrap();
            if &term != value {
                return None;
            }
        }
    }
    Some(bindings)
}

/// `host[:port]` of an IRI: the bytes between `://` and the first `/?#`,
/// with any `user@` stripped.
fn iri_authority(iri: &str) -> Option<&str> {
    let rest = iri.split_once("://")?.1;
    let end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let authority = &rest[..end];
    Some(
        authority
            .rsplit_once('@')
            .map(|(_, host)| host)
            .unwrap_or(authority),
    )
}

/// A table's rows as a sorted set, for order-insensitive comparison.
pub fn sorted_rows(table: &BindingTable) -> Vec<Vec<Term>> {
    let set: BTreeSet<Vec<Term>> = table.rows().iter().cloned().collect();
    assert_eq!(set.len(), table.rows().len(), "table rows are unique");
    set.into_iter().collect()
}

/// Point a shipped plan at test servers by swapping endpoint URLs.
pub fn rewrite_endpoints(plan_text: &str, swaps: &[(&str, &str)]) -> String {
    let mut text = plan_text.to_owned();
    for (from, to) in swaps {
        text = text.replace(from, to);
    }
    text
}
