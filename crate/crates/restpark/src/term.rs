//! RDF term and triple data model: IRIs, blank nodes, literals, triples,
//! and triple patterns, with canonical N-Triples text syntax and a total
//! term order used for deterministic output everywhere else in the crate.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

/// Datatype IRI attached to plain literals (RDF 1.1 simple-literal collapse).
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("IRI must not be empty")]
    EmptyIri,
    #[error("IRI contains forbidden character {0:?}")]
    IriChar(char),
    #[error("invalid blank node label {0:?}")]
    BlankLabel(String),
    #[error("invalid language tag {0:?}")]
    LanguageTag(String),
    #[error("invalid escape sequence: {0}")]
    Escape(String),
    #[error("malformed term: {0}")]
    Syntax(String),
    #[error("{kind} not allowed here")]
    KindNotAllowed { kind: TermKind },
    #[error("triple {position} must not be a {kind}")]
    Position {
        position: &'static str,
        kind: TermKind,
    },
}

/// The three shapes an RDF node can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Iri,
    Blank,
    Literal,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKind::Iri => f.write_str("IRI"),
            TermKind::Blank => f.write_str("blank node"),
            TermKind::Literal => f.write_str("literal"),
        }
    }
}

/// A set of [`TermKind`]s, used to restrict what [`parse_term`] may return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KindSet(u8);

impl KindSet {
    pub const IRI: KindSet = KindSet(1);
    pub const BLANK: KindSet = KindSet(2);
    pub const LITERAL: KindSet = KindSet(4);
    pub const ALL: KindSet = KindSet(7);
    /// Kinds valid in subject position.
    pub const SUBJECT: KindSet = KindSet(1 | 2);
    /// Kinds valid in predicate position.
    pub const PREDICATE: KindSet = KindSet(1);

    pub fn contains(self, kind: TermKind) -> bool {
        let bit = match kind {
            TermKind::Iri => 1,
            TermKind::Blank => 2,
            TermKind::Literal => 4,
        };
        self.0 & bit != 0
    }
}

impl std::ops::BitOr for KindSet {
    type Output = KindSet;
    fn bitor(self, rhs: KindSet) -> KindSet {
        KindSet(self.0 | rhs.0)
    }
}

fn forbidden_in_iri(c: char) -> bool {
    c <= '\u{20}'
        || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        || ('\u{7f}'..='\u{9f}').contains(&c)
}

/// An IRI reference. Validation is purely syntactic: the characters the
/// N-Triples IRIREF production forbids are rejected, nothing more.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if value.is_empty() {
            return Err(TermError::EmptyIri);
        }
        if let Some(c) = value.chars().find(|c| forbidden_in_iri(*c)) {
            return Err(TermError::IriChar(c));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

fn valid_blank_label(label: &str) -> bool {
    let mut chars = label.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// A blank node with a document-local label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if !valid_blank_label(&label) {
            return Err(TermError::BlankLabel(label));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

fn valid_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    match parts.next() {
        Some(first) if !first.is_empty() && first.chars().all(|c| c.is_ascii_alphabetic()) => {}
        _ => return false,
    }
    parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum LiteralSuffix {
    /// Lowercase-normalized language tag.
    Language(String),
    /// Datatype IRI text. Plain literals normalize to [`XSD_STRING`].
    Datatype(String),
}

/// A literal: lexical form plus either a language tag or a datatype IRI.
///
/// A literal constructed without either carries the `xsd:string` datatype,
/// so `"x"` and `"x"^^xsd:string` are one and the same value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    suffix: LiteralSuffix,
}

impl Literal {
    /// A simple literal; carries the implicit `xsd:string` datatype.
    pub fn new(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            suffix: LiteralSuffix::Datatype(XSD_STRING.to_owned()),
        }
    }

    /// A language-tagged literal. The tag is lowercased on construction.
    pub fn with_language(
        lexical: impl Into<String>,
        tag: impl AsRef<str>,
    ) -> Result<Self, TermError> {
        let tag = tag.as_ref();
        if !valid_language_tag(tag) {
            return Err(TermError::LanguageTag(tag.to_owned()));
        }
        Ok(Literal {
            lexical: lexical.into(),
            suffix: LiteralSuffix::Language(tag.to_ascii_lowercase()),
        })
    }

    /// A typed literal. `xsd:string` collapses to the plain form.
    pub fn with_datatype(
        lexical: impl Into<String>,
        datatype: impl Into<String>,
    ) -> Result<Self, TermError> {
        let datatype = datatype.into();
        Iri::new(datatype.as_str())?;
        Ok(Literal {
            lexical: lexical.into(),
            suffix: LiteralSuffix::Datatype(datatype),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn language(&self) -> Option<&str> {
        match &self.suffix {
            LiteralSuffix::Language(tag) => Some(tag),
            LiteralSuffix::Datatype(_) => None,
        }
    }

    pub fn datatype(&self) -> Option<&str> {
        match &self.suffix {
            LiteralSuffix::Language(_) => None,
            LiteralSuffix::Datatype(dt) => Some(dt),
        }
    }

    /// True for plain / `xsd:string` literals.
    pub fn is_simple(&self) -> bool {
        self.datatype() == Some(XSD_STRING)
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lexical
            .cmp(&other.lexical)
            .then_with(|| self.language().cmp(&other.language()))
            .then_with(|| self.datatype().cmp(&other.datatype()))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c => write!(f, "{c}")?,
            }
        }
        f.write_str("\"")?;
        match &self.suffix {
            LiteralSuffix::Language(tag) => write!(f, "@{tag}"),
            LiteralSuffix::Datatype(dt) if dt == XSD_STRING => Ok(()),
            LiteralSuffix::Datatype(dt) => write!(f, "^^<{dt}>"),
        }
    }
}

/// An RDF node: IRI, blank node, or literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        Ok(Term::Iri(Iri::new(value)?))
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        Ok(Term::Blank(BlankNode::new(label)?))
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::new(lexical))
    }

    pub fn literal_lang(
        lexical: impl Into<String>,
        tag: impl AsRef<str>,
    ) -> Result<Self, TermError> {
        Ok(Term::Literal(Literal::with_language(lexical, tag)?))
    }

    pub fn literal_typed(
        lexical: impl Into<String>,
        datatype: impl Into<String>,
    ) -> Result<Self, TermError> {
        Ok(Term::Literal(Literal::with_datatype(lexical, datatype)?))
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::Blank(_) => TermKind::Blank,
            Term::Literal(_) => TermKind::Literal,
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri.as_str()),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&str> {
        match self {
            Term::Blank(b) => Some(b.label()),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Term::Iri(_) => 0,
            Term::Blank(_) => 1,
            Term::Literal(_) => 2,
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Iri(a), Term::Iri(b)) => a.cmp(b),
            (Term::Blank(a), Term::Blank(b)) => a.cmp(b),
            (Term::Literal(a), Term::Literal(b)) => a.cmp(b),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Blank(b) => b.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
        }
    }
}

/// Total order over terms: IRIs before blank nodes before literals, then by
/// value in code-point order, then language tag, then datatype.
pub fn compare_terms(a: &Term, b: &Term) -> Ordering {
    a.cmp(b)
}

/// One RDF statement. Construction enforces positional kinds: the subject is
/// an IRI or blank node, the predicate an IRI, the object any term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.kind() == TermKind::Literal {
            return Err(TermError::Position {
                position: "subject",
                kind: TermKind::Literal,
            });
        }
        if predicate.kind() != TermKind::Iri {
            return Err(TermError::Position {
                position: "predicate",
                kind: predicate.kind(),
            });
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// A triple with any position optionally left unbound (a wildcard).
///
/// Bound positions follow the same kind rules as [`Triple`], with one
/// exception: a literal in subject or predicate position is accepted and
/// simply matches nothing. A blank node in predicate position is rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    subject: Option<Term>,
    predicate: Option<Term>,
    object: Option<Term>,
}

impl TriplePattern {
    pub fn new(
        subject: Option<Term>,
        predicate: Option<Term>,
        object: Option<Term>,
    ) -> Result<Self, TermError> {
        if let Some(p) = &predicate {
            if p.kind() == TermKind::Blank {
                return Err(TermError::Position {
                    position: "predicate",
                    kind: TermKind::Blank,
                });
            }
        }
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    /// The all-wildcard pattern.
    pub fn any() -> Self {
        TriplePattern::default()
    }

    pub fn subject(&self) -> Option<&Term> {
        self.subject.as_ref()
    }

    pub fn predicate(&self) -> Option<&Term> {
        self.predicate.as_ref()
    }

    pub fn object(&self) -> Option<&Term> {
        self.object.as_ref()
    }

    /// False when a bound position can never match any valid triple
    /// (a literal subject or literal predicate).
    pub fn is_satisfiable(&self) -> bool {
        let literal = |t: &Option<Term>| {
            t.as_ref()
                .map(|t| t.kind() == TermKind::Literal)
                .unwrap_or(false)
        };
        !literal(&self.subject) && !literal(&self.predicate)
    }

    /// True iff every bound position equals the corresponding triple position.
    pub fn matches(&self, triple: &Triple) -> bool {
        fn check(slot: &Option<Term>, value: &Term) -> bool {
            slot.as_ref().map(|t| t == value).unwrap_or(true)
        }
        check(&self.subject, triple.subject())
            && check(&self.predicate, triple.predicate())
            && check(&self.object, triple.object())
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = |t: &Option<Term>| t.as_ref().map(|t| t.to_string()).unwrap_or_else(|| "?".into());
        write!(
            f,
            "{} {} {}",
            slot(&self.subject),
            slot(&self.predicate),
            slot(&self.object)
        )
    }
}

/// Parse a single N-Triples-syntax term: `<iri>`, `_:label`, or a quoted
/// literal with optional `@lang` / `^^<datatype>` suffix. String escapes
/// (`\"`, `\\`, `\n`, `\t`, `\r`, `\uXXXX`, `\UXXXXXXXX`) are resolved.
pub fn parse_term(text: &str, allowed: KindSet) -> Result<Term, TermError> {
    let mut scanner = Scanner::new(text);
    scanner.skip_ws();
    let term = scanner.scan_term()?;
    scanner.skip_ws();
    if !scanner.at_end() {
        return Err(TermError::Syntax(format!(
            "trailing characters after term: {:?}",
            scanner.rest()
        )));
    }
    if !allowed.contains(term.kind()) {
        return Err(TermError::KindNotAllowed { kind: term.kind() });
    }
    Ok(term)
}

/// Incremental term scanner shared by [`parse_term`] and the N-Triples
/// document parser.
pub(crate) struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Scanner { src, pos: 0 }
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char) -> Result<(), TermError> {
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => Err(TermError::Syntax(format!("expected {want:?}, found {c:?}"))),
            None => Err(TermError::Syntax(format!(
                "expected {want:?}, found end of input"
            ))),
        }
    }

    /// Consume a statement terminator `.` if present; returns whether one
    /// was consumed.
    pub(crate) fn eat_dot(&mut self) -> bool {
        if self.peek() == Some('.') {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn scan_term(&mut self) -> Result<Term, TermError> {
        match self.peek() {
            Some('<') => self.scan_iri().map(Term::Iri),
            Some('_') => self.scan_blank(),
            Some('"') => self.scan_literal(),
            Some(c) => Err(TermError::Syntax(format!(
                "expected '<', '_:' or '\"', found {c:?}"
            ))),
            None => Err(TermError::Syntax("expected a term, found end of input".into())),
        }
    }

    fn scan_iri(&mut self) -> Result<Iri, TermError> {
        self.expect('<')?;
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => value.push(self.scan_escape(true)?),
                Some(c) => value.push(c),
                None => return Err(TermError::Syntax("unterminated IRI".into())),
            }
        }
        Iri::new(value)
    }

    fn scan_blank(&mut self) -> Result<Term, TermError> {
        self.expect('_')?;
        self.expect(':')?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        Term::blank(&self.src[start..self.pos])
    }

    /// Strip one trailing `.` from a just-scanned blank node label. The
    /// document parser calls this when the label swallowed the statement
    /// terminator at end of line.
    pub(crate) fn unscan_blank_dot(term: Term) -> Option<Term> {
        let label = term.as_blank()?;
        let trimmed = label.strip_suffix('.')?;
        Term::blank(trimmed).ok()
    }

    fn scan_literal(&mut self) -> Result<Term, TermError> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => lexical.push(self.scan_escape(false)?),
                Some(c @ ('\n' | '\r')) => {
                    return Err(TermError::Syntax(format!(
                        "literal contains unescaped {c:?}"
                    )))
                }
                Some(c) => lexical.push(c),
                None => return Err(TermError::Syntax("unterminated literal quote".into())),
            }
        }
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Term::literal_lang(lexical, &self.src[start..self.pos])
            }
            Some('^') => {
                self.expect('^')?;
                self.expect('^')?;
                let dt = self.scan_iri()?;
                Term::literal_typed(lexical, dt.as_str().to_owned())
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    fn scan_escape(&mut self, in_iri: bool) -> Result<char, TermError> {
        let c = self
            .bump()
            .ok_or_else(|| TermError::Escape("dangling backslash".into()))?;
        let unicode = |scanner: &mut Self, digits: usize| -> Result<char, TermError> {
            let start = scanner.pos;
            for _ in 0..digits {
                match scanner.bump() {
                    Some(c) if c.is_ascii_hexdigit() => {}
                    _ => {
                        return Err(TermError::Escape(format!(
                            "\\{} needs {digits} hex digits",
                            if digits == 4 { 'u' } else { 'U' }
                        )))
                    }
                }
            }
            let code = u32::from_str_radix(&scanner.src[start..scanner.pos], 16).unwrap();
            char::from_u32(code)
                .ok_or_else(|| TermError::Escape(format!("\\u{code:X} is not a valid code point")))
        };
        match c {
            'u' => unicode(self, 4),
            'U' => unicode(self, 8),
            _ if in_iri => Err(TermError::Escape(format!("\\{c} not allowed in an IRI"))),
            '"' => Ok('"'),
            '\\' => Ok('\\'),
            'n' => Ok('\n'),
            't' => Ok('\t'),
            'r' => Ok('\r'),
            _ => Err(TermError::Escape(format!("\\{c}"))),
        }
    }
}
