use std::fs;

use rhymegan::io::{
    format_spec_file, load_corpus, read_embeddings, read_families, read_pron_dict, read_spec_file, resolve_spec,
    write_corpus, write_families,
};
use rhymegan::Error;
use rhymegan_core::corpus::{make_synthetic_corpus, DatasetSpec, SyntheticSpec};
use rhymegan_core::phonetics::{rhymes, RhymeVerdict};

fn synthetic() -> rhymegan_core::corpus::SyntheticCorpus {
    make_synthetic_corpus(&SyntheticSpec::new(2, 30, 6, "ABAB", 20).unwrap()).unwrap()
}

#[test]
fn corpus_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let syn = synthetic();
    write_corpus(dir.path(), &syn.corpus).unwrap();
    let loaded = load_corpus(dir.path(), &syn.corpus.spec).unwrap();
    assert_eq!(loaded, syn.corpus);
}

#[test]
fn families_round_trip_and_drive_rhymes() {
    let dir = tempfile::tempdir().unwrap();
    let syn = synthetic();
    let path = dir.path().join("families.tsv");
    write_families(&path, &syn.families).unwrap();
    assert_eq!(read_families(&path).unwrap(), syn.families);
}

#[test]
fn missing_split_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train.txt"), "a b\nc d\ne f\ng h\n").unwrap();
    let err = load_corpus(dir.path(), &DatasetSpec::sonnet()).unwrap_err();
    assert!(matches!(err, Error::Core(rhymegan_core::Error::MissingSplit(_))), "{err}");
}

#[test]
fn malformed_block_names_the_block() {
    let dir = tempfile::tempdir().unwrap();
    let good = "a cat\nthe hat\na dog\nthe log\n\n";
    fs::write(dir.path().join("train.txt"), format!("{good}one\ntwo\nthree\n")).unwrap();
    fs::write(dir.path().join("valid.txt"), good).unwrap();
    fs::write(dir.path().join("test.txt"), good).unwrap();
    let spec = DatasetSpec::new("q", 4, &["AABB"]).unwrap();
    let err = load_corpus(dir.path(), &spec).unwrap_err().to_string();
    assert!(err.contains("block 1") && err.contains("found 3"), "{err}");
}

#[test]
fn empty_split_reports_no_poems() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["train.txt", "valid.txt", "test.txt"] {
        fs::write(dir.path().join(f), "").unwrap();
    }
    let spec = DatasetSpec::new("q", 4, &["AABB"]).unwrap();
    let err = load_corpus(dir.path(), &spec).unwrap_err().to_string();
    assert!(err.contains("no poems found"), "{err}");
}

#[test]
fn cmudict_accepts_latin1_and_variants() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dict");
    let mut bytes = b";;; comment\nCAT  K AE1 T\nHAT  HH AE1 T\nLIVE  L IH1 V\nLIVE(2)  L AY1 V\nFIVE  F AY1 V\n".to_vec();
    bytes.extend_from_slice(b"CAF\xc9  K AH0 F EY1\n");
    fs::write(&path, bytes).unwrap();
    let dict = read_pron_dict(&path).unwrap();
    assert_eq!(rhymes("cat", "hat", &dict), RhymeVerdict::Rhyming);
    assert_eq!(rhymes("live", "five", &dict), RhymeVerdict::Rhyming);
    assert!(dict.contains("café"));
}

#[test]
fn embeddings_skip_header_and_check_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vec.txt");
    fs::write(&path, "2 3\ncat 0.1 0.2 0.3\nhat 1 2 3\n").unwrap();
    let e = read_embeddings(&path).unwrap();
    assert_eq!(e.dim, 3);
    assert_eq!(e.vectors["hat"], vec![1.0, 2.0, 3.0]);
    fs::write(&path, "cat 0.1 0.2 0.3\nhat 1 2\n").unwrap();
    assert!(read_embeddings(&path).is_err());
}

#[test]
fn spec_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.txt");
    for spec in [DatasetSpec::sonnet(), DatasetSpec::sonnet_couplets(), DatasetSpec::limerick()] {
        fs::write(&path, format_spec_file(&spec)).unwrap();
        assert_eq!(read_spec_file(&path).unwrap(), spec);
    }
    fs::write(&path, "name = x\nlines_per_poem = 3\npatterns = AAB ABA\n").unwrap();
    let spec = resolve_spec(path.to_str().unwrap()).unwrap();
    assert_eq!(spec.lines_per_poem, 3);
    fs::write(&path, "name = x\nlines_per_poem = 3\npatterns = AABB\n").unwrap();
    assert!(read_spec_file(&path).is_err());
    assert!(resolve_spec("no-such-spec").is_err());
}
