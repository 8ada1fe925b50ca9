//! Corpus directories, pronunciation dictionaries, embedding files and word
//! lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rhymegan_core::corpus::{format_split, parse_split, Corpus, DatasetSpec, Poem, RhymePattern};
use rhymegan_core::generator::PretrainedEmbeddings;
use rhymegan_core::phonetics::PronDict;

use crate::error::{format_err, io_err, Error, Result};

pub const SPLIT_FILES: [(&str, &str); 3] = [("train", "train.txt"), ("valid", "valid.txt"), ("test", "test.txt")];
pub const FAMILIES_FILE: &str = "families.tsv";
pub const SPEC_FILE: &str = "spec.txt";

/// Reads a file as UTF-8, falling back to Latin-1 for invalid bytes.
pub fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    })
}

/// Writes through a temporary file in the same directory so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_split(dir: &Path, split: &str, file: &str, spec: &DatasetSpec) -> Result<Vec<Poem>> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(rhymegan_core::Error::MissingSplit(path.display().to_string()).into());
    }
    Ok(parse_split(&read_text(&path)?, spec, split)?)
}

/// Loads `train.txt`, `valid.txt` and `test.txt` from `dir`.
pub fn load_corpus(dir: &Path, spec: &DatasetSpec) -> Result<Corpus> {
    let [train, dev, test] = SPLIT_FILES.map(|(split, file)| read_split(dir, split, file, spec));
    Ok(Corpus::new(spec.clone(), train?, dev?, test?)?)
}

pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for ((_, file), poems) in SPLIT_FILES.iter().zip([&corpus.train, &corpus.dev, &corpus.test]) {
        write_atomic(&dir.join(file), format_split(poems).as_bytes())?;
    }
    Ok(())
}

pub fn write_families(path: &Path, families: &BTreeMap<String, usize>) -> Result<()> {
    let mut out = String::new();
    for (w, f) in families {
        out.push_str(&format!("{w}\t{f}\n"));
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_families(path: &Path) -> Result<BTreeMap<String, usize>> {
    let mut out = BTreeMap::new();
    for (i, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (w, f) = line
            .split_once('\t')
            .ok_or_else(|| format_err(path, format!("line {}: expected word<TAB>family", i + 1)))?;
        let f = f
            .trim()
            .parse()
            .map_err(|_| format_err(path, format!("line {}: bad family id {f:?}", i + 1)))?;
        out.insert(w.trim().to_string(), f);
    }
    Ok(out)
}

/// Reads a cmudict-format file; malformed lines are logged and skipped.
pub fn read_pron_dict(path: &Path) -> Result<PronDict> {
    let (dict, warnings) = PronDict::parse(&read_text(path)?)?;
    if !warnings.is_empty() {
        log::warn!("{}: skipped {} malformed lines", path.display(), warnings.len());
    }
    Ok(dict)
}

/// Reads `word v1 v2 ...` lines. A leading `count dim` header line is
/// accepted and ignored.
pub fn read_embeddings(path: &Path) -> Result<PretrainedEmbeddings> {
    let text = read_text(path)?;
    let mut vectors = BTreeMap::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values: Vec<&str> = parts.collect();
        if i == 0 && values.len() == 1 && word.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
            continue;
        }
        let v: Vec<f64> = values
            .iter()
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format_err(path, format!("line {}: non-numeric value", i + 1)))?;
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(rhymegan_core::Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                }
                .into())
            }
            _ => {}
        }
        vectors.insert(word.to_string(), v);
    }
    let dim = dim.ok_or_else(|| format_err(path, "no vectors"))?;
    Ok(PretrainedEmbeddings { dim, vectors })
}

/// Whitespace-separated words, one or more per line.
pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?.split_whitespace().map(str::to_string).collect())
}

/// A small `key = value` spec file:
///
/// ```text
/// name = quatrains
/// lines_per_poem = 4
/// patterns = AABB ABAB
/// source_block_lines = 14   # optional
/// tail_only = false         # optional
/// vocab_cap = 9000          # optional
/// ```
pub fn read_spec_file(path: &Path) -> Result<DatasetSpec> {
    let kv = crate::config::parse_key_values(&read_text(path)?).map_err(|m| format_err(path, m))?;
    let get = |k: &str| kv.get(k).map(String::as_str);
    let need = |k: &str| get(k).ok_or_else(|| format_err(path, format!("missing key {k}")));
    let num = |k: &str, v: &str| {
        v.parse::<usize>()
            .map_err(|_| format_err(path, format!("{k}: expected an integer, got {v:?}")))
    };
    let lines = num("lines_per_poem", need("lines_per_poem")?)?;
    let patterns: Vec<&str> = need("patterns")?.split_whitespace().collect();
    let mut spec = DatasetSpec::new(need("name")?, lines, &patterns)?;
    if let Some(v) = get("source_block_lines") {
        spec.source_block_lines = Some(num("source_block_lines", v)?);
    }
    if let Some(v) = get("vocab_cap") {
        spec.vocab_cap = Some(num("vocab_cap", v)?);
    }
    if let Some(v) = get("tail_only") {
        spec.tail_only = v
            .parse()
            .map_err(|_| format_err(path, format!("tail_only: expected true or false, got {v:?}")))?;
    }
    for k in kv.keys() {
        if !["name", "lines_per_poem", "patterns", "source_block_lines", "vocab_cap", "tail_only"].contains(&k.as_str()) {
            return Err(format_err(path, format!("unknown key {k}")));
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn format_spec_file(spec: &DatasetSpec) -> String {
    let patterns: Vec<&str> = spec.accepted_patterns.iter().map(RhymePattern::as_str).collect();
    let mut out = format!(
        "name = {}\nlines_per_poem = {}\npatterns = {}\n",
        spec.name,
        spec.lines_per_poem,
        patterns.join(" ")
    );
    if let Some(n) = spec.source_block_lines {
        out.push_str(&format!("source_block_lines = {n}\ntail_only = {}\n", spec.tail_only));
    }
    if let Some(n) = spec.vocab_cap {
        out.push_str(&format!("vocab_cap = {n}\n"));
    }
    out
}

/// A built-in spec name or the path of a spec file.
pub fn resolve_spec(name_or_path: &str) -> Result<DatasetSpec> {
    if let Some(spec) = DatasetSpec::builtin(name_or_path) {
        return Ok(spec);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        return read_spec_file(path);
    }
    Err(Error::Config(format!(
        "unknown spec {name_or_path:?}: not a built-in (sonnet, sonnet-couplet, limerick) or a spec file"
    )))
}
