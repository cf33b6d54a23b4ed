//! N-Triples document parsing and serialization.
//!
//! Input is line-oriented UTF-8: each non-blank, non-comment line is one
//! `subject predicate object .` statement. `\n` and `\r\n` line endings are
//! both accepted; canonical output always uses `\n`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::term::{KindSet, Scanner, Term, TermError, Triple};

/// A malformed line: 1-based line number plus what went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Outcome of a lenient parse: the triples that parsed, in input order
/// (duplicates preserved), plus one entry per malformed line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub triples: Vec<Triple>,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct DocumentError {
    pub line: usize,
    pub message: String,
}

/// Parse a whole document. With `strict` set, the first malformed line
/// aborts the parse; otherwise malformed lines are collected in the report
/// and parsing continues.
pub fn parse_document(text: &str, strict: bool) -> Result<ParseReport, DocumentError> {
    let mut report = ParseReport::default();
    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        match parse_line(line) {
            Ok(Some(triple)) => report.triples.push(triple),
            Ok(None) => {}
            Err(message) => {
                if strict {
                    return Err(DocumentError {
                        line: line_no,
                        message,
                    });
                }
                report.errors.push(LineError {
                    line: line_no,
                    message,
                });
            }
        }
    }
    Ok(report)
}

/// Parse one line; `None` for blank lines and `#` comments.
fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut scanner = Scanner::new(line);
    scanner.skip_ws();
    match scanner.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }

    let subject = scan_positioned(&mut scanner, "subject", KindSet::SUBJECT)?;
    scanner.skip_ws();
    let predicate = scan_positioned(&mut scanner, "predicate", KindSet::PREDICATE)?;
    scanner.skip_ws();
    let mut object = scanner.scan_term().map_err(|e| format!("object: {e}"))?;
    scanner.skip_ws();

    let mut terminated = scanner.eat_dot();
    if !terminated {
        // A blank node object at end of line swallows the terminator into
        // its label (`_:b.` scans as label "b."); give the dot back.
        if let Some(fixed) = Scanner::unscan_blank_dot(object.clone()) {
            object = fixed;
            terminated = true;
        }
    }
    if !terminated {
        return Err("missing statement terminator '.'".into());
    }
    scanner.skip_ws();
    if !scanner.at_end() {
        return Err(format!(
            "trailing characters after '.': {:?}",
            scanner.rest()
        ));
    }

    Triple::new(subject, predicate, object)
        .map(Some)
        .map_err(|e| e.to_string())
}

fn scan_positioned(
    scanner: &mut Scanner<'_>,
    position: &'static str,
    allowed: KindSet,
) -> Result<Term, String> {
    let term = scanner
        .scan_term()
        .map_err(|e| format!("{position}: {e}"))?;
    if !allowed.contains(term.kind()) {
        return Err(TermError::Position {
            position,
            kind: term.kind(),
        }
        .to_string());
    }
    Ok(term)
}

/// Render triples as canonical N-Triples, one ` .\n`-terminated line each.
pub fn serialize_document(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(out, "{t} .");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use crate::term::parse_term;
    use crate::testgen::arb_triple;

    #[test]
    fn minimal_line() {
        let report = parse_document("<http://a> <http://p> \"x\" .", false).unwrap();
        assert!(report.errors.is_empty());
        assert_eq!(report.triples.len(), 1);
        let t = &report.triples[0];
        assert_eq!(t.subject().as_iri(), Some("http://a"));
        assert_eq!(t.predicate().as_iri(), Some("http://p"));
        assert_eq!(t.object().as_literal().unwrap().lexical(), "x");
    }

    #[test]
    fn empty_document() {
        let report = parse_document("", false).unwrap();
        assert!(report.triples.is_empty());
        assert!(report.errors.is_empty());
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let doc = "# header\r\n\r\n<http://a> <http://p> <http://o> .\r\n   # indented comment\n\n";
        let report = parse_document(doc, false).unwrap();
        assert!(report.errors.is_empty());
        assert_eq!(report.triples.len(), 1);
    }

    // 12-line document with 2 deliberately corrupted lines; error line
    // numbers verified by hand against the grammar.
    #[test]
    fn corrupted_lines_are_reported_by_number() {
        let doc = "\
<http://s/1> <http://p> \"a\" .
<http://s/2> <http://p> \"b\" .
<http://s/3> <http://p> \"c\"
<http://s/4> <http://p> \"d\" .
<http://s/5> <http://p> \"e\" .
<http://s/6> <http://p> \"f\" .
<http://s/7> <http://p> \"g\" .
\"literal subject\" <http://p> \"h\" .
<http://s/9> <http://p> \"i\" .
<http://s/10> <http://p> \"j\" .
<http://s/11> <http://p> \"k\" .
<http://s/12> <http://p> \"l\" .";
        assert_eq!(doc.lines().count(), 12);
        let report = parse_document(doc, false).unwrap();
        assert_eq!(report.triples.len(), 10);
        let lines: Vec<usize> = report.errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![3, 8]);
        assert!(report.errors[0].message.contains("terminator"));
    }

    #[test]
    fn strict_mode_stops_at_first_bad_line() {
        let doc = "<http://a> <http://p> \"x\" .\nnot a triple\n<http://b> <http://p> \"y\" .";
        let err = parse_document(doc, true).unwrap_err();
        assert_eq!(err.line, 2);
        let lenient = parse_document(doc, false).unwrap();
        assert_eq!(lenient.triples.len(), 2);
        assert_eq!(lenient.errors.len(), 1);
    }

    #[test]
    fn duplicates_preserved() {
        let doc = "<http://a> <http://p> \"x\" .\n<http://a> <http://p> \"x\" .";
        let report = parse_document(doc, false).unwrap();
        assert_eq!(report.triples.len(), 2);
        assert_eq!(report.triples[0], report.triples[1]);
    }

    #[test]
    fn blank_object_at_line_end_keeps_terminator_out_of_label() {
        let report = parse_document("_:a <http://p> _:b.", false).unwrap();
        assert!(report.errors.is_empty(), "{:?}", report.errors);
        assert_eq!(report.triples[0].object().as_blank(), Some("b"));
        // With a space before the dot the label is untouched.
        let spaced = parse_document("_:a <http://p> _:b.c .", false).unwrap();
        assert_eq!(spaced.triples[0].object().as_blank(), Some("b.c"));
    }

    #[test]
    fn serialize_film_label_line() {
        let t = Triple::new(
            parse_term("<http://data.linkedmdb.org/resource/film/675>", KindSet::ALL).unwrap(),
            parse_term("<http://www.w3.org/2000/01/rdf-schema#label>", KindSet::ALL).unwrap(),
            parse_term("\"Star Trek\"", KindSet::ALL).unwrap(),
        )
        .unwrap();
        assert_eq!(
            serialize_document(&[t]),
            "<http://data.linkedmdb.org/resource/film/675> <http://www.w3.org/2000/01/rdf-schema#label> \"Star Trek\" .\n"
        );
    }

    #[test]
    fn serialize_empty_is_empty() {
        assert_eq!(serialize_document(&[]), "");
    }

    #[test]
    fn positional_kind_errors_name_the_position() {
        let bad_subject = parse_document("\"x\" <http://p> \"y\" .", false).unwrap();
        assert!(bad_subject.errors[0].message.contains("subject"));
        let bad_predicate = parse_document("<http://s> \"p\" \"y\" .", false).unwrap();
        assert!(bad_predicate.errors[0].message.contains("predicate"));
        let blank_predicate = parse_document("<http://s> _:p \"y\" .", false).unwrap();
        assert!(blank_predicate.errors[0].message.contains("predicate"));
    }

    #[test]
    fn line_permutation_permutes_triples() {
        let lines = [
            "<http://s/1> <http://p> \"a\" .",
            "<http://s/2> <http://p> \"b\" .",
            "bad line",
            "<http://s/3> <http://p> \"c\" .",
        ];
        let forward = parse_document(&lines.join("\n"), false).unwrap();
        let reversed: Vec<&str> = lines.iter().rev().copied().collect();
        let backward = parse_document(&reversed.join("\n"), false).unwrap();
        let mut fwd = forward.triples.clone();
        fwd.reverse();
        assert_eq!(fwd, backward.triples);
        assert_eq!(forward.errors.len(), 1);
        assert_eq!(backward.errors.len(), 1);
    }

    proptest! {
        // serialize -> parse recovers the exact list; serializing again is a
        // byte fixed point.
        #[test]
        fn roundtrip_fixed_point(triples in proptest::collection::vec(arb_triple(), 0..200)) {
            let doc = serialize_document(&triples);
            let report = parse_document(&doc, true).unwrap();
            prop_assert_eq!(&report.triples, &triples);
            prop_assert_eq!(serialize_document(&report.triples), doc);
        }
    }
}
