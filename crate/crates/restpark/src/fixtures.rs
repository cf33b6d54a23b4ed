//! Bundled sample datasets and their integrity checks.
//!
//! Three N-Triples files under `fixtures/` model slices of LinkedMDB, DBpedia,
//! and the D2R DBLP mirror. The demo plans under `plans/` join across them, so
//! the demos and the test suite depend on specific facts being present — the
//! cast of film/675, Tim Berners-Lee's cross-dataset links, his paper titles.
//! [`validate_fixtures`] asserts each of those facts and reports the first one
//! missing by name.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::ntriples::{parse_document, DocumentError};
use crate::store::TripleStore;
use crate::term::{Term, Triple};

/// File names making up the fixture set.
pub const FIXTURE_FILES: [&str; 3] = ["linkedmdb.nt", "dbpedia.nt", "dblp.nt"];

const FILM_675: &str = "http://data.linkedmdb.org/resource/film/675";
const ACTOR_NAME: &str = "http://data.linkedmdb.org/resource/movie/actor_name";
const DOUBLE_SPACED: &str = "William  Shatner";
const DCT_SUBJECT: &str = "http://purl.org/dc/terms/subject";
const BCS_FELLOWS: &str =
    "http://dbpedia.org/resource/Category:Fellows_of_the_British_Computer_Society";
const TBL_DBPEDIA: &str = "http://dbpedia.org/page/Tim_Berners-Lee";
const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
const FOAF_NAME: &str = "http://xmlns.com/foaf/0.1/name";
const BIRTH_DATE: &str = "http://dbpedia.org/ontology/birthDate";
const TBL_DBLP: &str = "http://www4.wiwiss.fu-berlin.de/dblp/Tim_Berners-Lee";
const FOAF_MADE: &str = "http://xmlns.com/foaf/0.1/made";
const DC_TITLE: &str = "http://purl.org/dc/elements/1.1/title";
const DBLP_PREFIX: &str = "http://www4.wiwiss.fu-berlin.de/";

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("missing fixture {file}")]
    Missing { file: String },
    #[error("fixture {file} is unreadable: {source}")]
    Unreadable { file: String, source: io::Error },
    #[error("fixture {file} does not parse: {source}")]
    Syntax { file: String, source: DocumentError },
    #[error("fixture {file}: {message}")]
    Invariant { file: String, message: String },
}

/// Triple counts per fixture file, returned when every check passes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureReport {
    pub linkedmdb_triples: usize,
    pub dbpedia_triples: usize,
    pub dblp_triples: usize,
}

/// Read one N-Triples file in strict mode and index it.
pub fn load_store(path: &Path) -> Result<TripleStore, FixtureError> {
    let file = path.display().to_string();
    let text = read_file(path, &file)?;
    let report =
        parse_document(&text, true).map_err(|source| FixtureError::Syntax { file, source })?;
    Ok(TripleStore::build(report.triples))
}

/// Check that `directory` holds the three fixture files and that every fact
/// the demos rely on is present. The error names the violated check.
pub fn validate_fixtures(directory: &Path) -> Result<FixtureReport, FixtureError> {
    let film = Dataset::load(directory, FIXTURE_FILES[0])?;
    let people = Dataset::load(directory, FIXTURE_FILES[1])?;
    let papers = Dataset::load(directory, FIXTURE_FILES[2])?;

    for dataset in [&film, &people, &papers] {
        let count = dataset.triples.len();
        if !(20..=60).contains(&count) {
            return Err(dataset.fail(format!("expected 20 to 60 triples, found {count}")));
        }
    }

    check_film(&film)?;
    check_people(&people)?;
    check_papers(&papers)?;

    Ok(FixtureReport {
        linkedmdb_triples: film.triples.len(),
        dbpedia_triples: people.triples.len(),
        dblp_triples: papers.triples.len(),
    })
}

struct Dataset {
    file: &'static str,
    triples: Vec<Triple>,
}

impl Dataset {
    fn load(directory: &Path, file: &'static str) -> Result<Self, FixtureError> {
        let text = read_file(&directory.join(file), file)?;
        let report = parse_document(&text, true).map_err(|source| FixtureError::Syntax {
            file: file.to_owned(),
            source,
        })?;
        Ok(Dataset {
            file,
            triples: report.triples,
        })
    }

    fn fail(&self, message: String) -> FixtureError {
        FixtureError::Invariant {
            file: self.file.to_owned(),
            message,
        }
    }

    /// Objects of every `<subject> <predicate> ?` statement.
    fn objects(&self, subject: &str, predicate: &str) -> Vec<&Term> {
        self.triples
            .iter()
            .filter(|t| {
                t.subject().as_iri() == Some(subject) && t.predicate().as_iri() == Some(predicate)
            })
            .map(Triple::object)
            .collect()
    }

    /// Distinct subject IRIs of every `? <predicate> <object>` statement.
    fn subjects(&self, predicate: &str, object: &str) -> Vec<&str> {
        let mut found: Vec<&str> = self
            .triples
            .iter()
            .filter(|t| {
                t.predicate().as_iri() == Some(predicate) && t.object().as_iri() == Some(object)
            })
            .filter_map(|t| t.subject().as_iri())
            .collect();
        found.sort_unstable();
        found.dedup();
        found
    }
}

fn read_file(path: &Path, file: &str) -> Result<String, FixtureError> {
    fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            FixtureError::Missing {
                file: file.to_owned(),
            }
        } else {
            FixtureError::Unreadable {
                file: file.to_owned(),
                source,
            }
        }
    })
}

fn simple_lexical(term: &Term) -> Option<&str> {
    term.as_literal()
        .filter(|lit| lit.is_simple())
        .map(|lit| lit.lexical())
}

fn check_film(film: &Dataset) -> Result<(), FixtureError> {
    let names: Vec<&str> = film
        .objects(FILM_675, ACTOR_NAME)
        .into_iter()
        .filter_map(simple_lexical)
        .collect();
    if names.len() < 3 {
        return Err(film.fail(format!(
            "subject <{FILM_675}> needs at least 3 <{ACTOR_NAME}> literals, found {}",
            names.len()
        )));
    }
    if !names.contains(&"William Shatner") {
        return Err(film.fail(format!(
            "subject <{FILM_675}> needs an <{ACTOR_NAME}> literal \"William Shatner\""
        )));
    }
    let has_double_spaced = film
        .triples
        .iter()
        .filter(|t| t.predicate().as_iri() == Some(ACTOR_NAME))
        .any(|t| simple_lexical(t.object()) == Some(DOUBLE_SPACED));
    if !has_double_spaced {
        return Err(film.fail(format!(
            "needs the double-space \"{DOUBLE_SPACED}\" actor-name variant \
             that the join-fragility demo drops"
        )));
    }
    Ok(())
}

fn check_people(people: &Dataset) -> Result<(), FixtureError> {
    let fellows = people.subjects(DCT_SUBJECT, BCS_FELLOWS);
    if fellows.len() < 2 {
        return Err(people.fail(format!(
            "needs at least 2 resources filed under <{BCS_FELLOWS}>, found {}",
            fellows.len()
        )));
    }
    if !fellows.contains(&TBL_DBPEDIA) {
        return Err(people.fail(format!(
            "<{TBL_DBPEDIA}> must be filed under <{BCS_FELLOWS}>"
        )));
    }

    let links: Vec<&str> = people
        .objects(TBL_DBPEDIA, OWL_SAME_AS)
        .into_iter()
        .filter_map(Term::as_iri)
        .collect();
    if !links.iter().any(|iri| iri.starts_with(DBLP_PREFIX)) {
        return Err(people.fail(format!(
            "<{TBL_DBPEDIA}> needs an <{OWL_SAME_AS}> link into www4.wiwiss.fu-berlin.de"
        )));
    }
    if !links.iter().any(|iri| !iri.starts_with(DBLP_PREFIX)) {
        return Err(people.fail(format!(
            "<{TBL_DBPEDIA}> needs an <{OWL_SAME_AS}> link outside www4.wiwiss.fu-berlin.de \
             so the host filter has something to drop"
        )));
    }

    let mut named: Vec<&str> = people
        .triples
        .iter()
        .filter(|t| t.predicate().as_iri() == Some(FOAF_NAME))
        .filter_map(|t| t.subject().as_iri())
        .collect();
    named.sort_unstable();
    named.dedup();
    for subject in named {
        let has_birth_date = people
            .objects(subject, BIRTH_DATE)
            .iter()
            .any(|t| t.as_literal().is_some());
        if !has_birth_date {
            return Err(people.fail(format!(
                "<{subject}> has a <{FOAF_NAME}> but no <{BIRTH_DATE}> literal"
            )));
        }
    }

    // The join-fragility demo depends on this file spelling every name with
    // single spaces, so the film dataset's double-spaced variant finds no
    // partner here.
    for triple in &people.triples {
        if let Some(lit) = triple.object().as_literal() {
            if lit.lexical().contains("  ") {
                return Err(people.fail(format!(
                    "literal \"{}\" contains a double space; cross-dataset name joins \
                     rely on this file using single-spaced names",
                    lit.lexical()
                )));
            }
        }
    }
    Ok(())
}

fn check_papers(papers: &Dataset) -> Result<(), FixtureError> {
    let made: Vec<&str> = papers
        .objects(TBL_DBLP, FOAF_MADE)
        .into_iter()
        .filter_map(Term::as_iri)
        .collect();
    if made.is_empty() {
        return Err(papers.fail(format!(
            "<{TBL_DBLP}> needs <{FOAF_MADE}> links to paper resources"
        )));
    }
    for paper in made {
        let has_title = papers
            .objects(paper, DC_TITLE)
            .iter()
            .any(|t| t.as_literal().is_some());
        if !has_title {
            return Err(papers.fail(format!("paper <{paper}> needs a <{DC_TITLE}> literal")));
        }
    }
    Ok(())
}
