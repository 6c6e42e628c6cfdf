use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{CorpusError, Dataset, DatasetLang, Label, Lang, Tweet};

const HEADER: [&str; 4] = ["id", "lang", "label", "text"];

/// Loads a single-language corpus file. Every row must carry `expected_lang`.
pub fn load_corpus(path: impl AsRef<Path>, expected_lang: Lang) -> Result<Dataset, CorpusError> {
    read_corpus(open(path.as_ref())?, Some(expected_lang))
}

/// Loads a corpus file without a language constraint; the dataset language
/// is inferred (`Mixed` when rows disagree).
pub fn load_corpus_any(path: impl AsRef<Path>) -> Result<Dataset, CorpusError> {
    read_corpus(open(path.as_ref())?, None)
}

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_corpus<R: Read>(
    reader: R,
    expected_lang: Option<Lang>,
) -> Result<Dataset, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != HEADER {
        return Err(CorpusError::Row {
            row: 1,
            message: format!(
                "expected header `id,lang,label,text`, found `{}`",
                names.join(",")
            ),
        });
    }

    let mut tweets = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |message: String| CorpusError::Row { row, message };
        if record.len() != HEADER.len() {
            return Err(bad(format!("expected 4 columns, found {}", record.len())));
        }
        let id = record[0].to_owned();
        let lang: Lang = record[1].parse().map_err(bad)?;
        let label: Label = record[2].parse().map_err(bad)?;
        if let Some(expected) = expected_lang {
            if lang != expected {
                return Err(bad(format!(
                    "language {lang} but the corpus is declared {expected}"
                )));
            }
        }
        if id.is_empty() {
            return Err(bad("empty id".into()));
        }
        if !seen.insert(id.clone()) {
            return Err(bad(format!("duplicate id {id:?}")));
        }
        let tweet = Tweet::new(id, &record[3], lang, label).map_err(|e| bad(e.to_string()))?;
        tweets.push(tweet);
    }
    if tweets.is_empty() {
        return Err(CorpusError::Empty);
    }
    match expected_lang {
        Some(l) => Dataset::new(tweets, DatasetLang::Single(l)),
        None => Dataset::from_tweets(tweets),
    }
}

pub fn write_corpus<W: Write>(ds: &Dataset, writer: W) -> Result<(), CorpusError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for t in ds {
        w.write_record([
            t.id.as_str(),
            t.lang.code(),
            t.label.as_str(),
            t.text.as_str(),
        ])?;
    }
    w.flush().map_err(|source| CorpusError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_corpus(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_corpus(ds, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::stats;
    use proptest::prelude::*;

    #[test]
    fn reads_quoted_fields() {
        let data =
            "id,lang,label,text\n1,en,ironic,\"Great, just great\nagain\"\n2,en,non_ironic,hello\n";
        let ds = read_corpus(data.as_bytes(), Some(Lang::En)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.tweets()[0].text, "Great, just great\nagain");
        let s = stats(&ds);
        assert_eq!((s.n_ironic, s.n_non_ironic), (1, 1));
    }

    #[test]
    fn header_only_is_an_empty_corpus() {
        let err = read_corpus("id,lang,label,text\n".as_bytes(), Some(Lang::Ar)).unwrap_err();
        assert!(matches!(err, CorpusError::Empty));
        assert_eq!(err.to_string(), "empty corpus");
    }

    #[test]
    fn unknown_label_names_row_and_value() {
        let data = "id,lang,label,text\n1,fr,ironic,a\n2,fr,maybe,b\n";
        let err = read_corpus(data.as_bytes(), Some(Lang::Fr)).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, CorpusError::Row { row: 3, .. }), "{msg}");
        assert!(msg.contains("\"maybe\""), "{msg}");
    }

    #[test]
    fn wrong_column_count() {
        let data = "id,lang,label,text\n1,fr,ironic\n";
        let err = read_corpus(data.as_bytes(), None).unwrap_err();
        assert!(matches!(err, CorpusError::Row { row: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_id_reports_row() {
        let data = "id,lang,label,text\n1,en,ironic,a\n1,en,ironic,b\n";
        let err = read_corpus(data.as_bytes(), None).unwrap_err();
        assert!(matches!(err, CorpusError::Row { row: 3, .. }), "{err}");
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn language_must_match_declaration() {
        let data = "id,lang,label,text\n1,en,ironic,a\n";
        assert!(read_corpus(data.as_bytes(), Some(Lang::Ar)).is_err());
        let mixed = "id,lang,label,text\n1,en,ironic,a\n2,fr,ironic,b\n";
        assert_eq!(
            read_corpus(mixed.as_bytes(), None).unwrap().lang(),
            DatasetLang::Mixed
        );
    }

    #[test]
    fn bad_header() {
        let data = "id,label,lang,text\n1,ironic,en,a\n";
        assert!(matches!(
            read_corpus(data.as_bytes(), None),
            Err(CorpusError::Row { row: 1, .. })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_corpus("/nonexistent/corpus.csv", Lang::En),
            Err(CorpusError::Io { .. })
        ));
    }

    fn arb_tweet() -> impl Strategy<Value = (String, Lang, Label)> {
        (
            "[^\\s]{1}[\\PC\n,\"]{0,30}",
            prop::sample::select(Lang::ALL.to_vec()),
            prop::bool::ANY.prop_map(|b| if b { Label::Ironic } else { Label::NonIronic }),
        )
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec(arb_tweet(), 1..20)) {
            let tweets: Vec<Tweet> = rows
                .into_iter()
                .enumerate()
                .map(|(i, (text, lang, label))| Tweet::new(format!("id-{i}"), text, lang, label).unwrap())
                .collect();
            let ds = Dataset::from_tweets(tweets).unwrap();
            let mut buf = Vec::new();
            write_corpus(&ds, &mut buf).unwrap();
            let back = read_corpus(buf.as_slice(), None).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
