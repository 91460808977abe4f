use std::fs;
use std::io::Write;

use problemist::archive::{read_records, Archive, ArchiveError, CompositionRecord, INDEX_FILE, RECORDS_FILE};
use problemist::composer::{Composer, ComposerConfig, PieceSetSpec};

/// A few genuine records from mate-in-2 positions.
fn records() -> Vec<CompositionRecord> {
    let cfg = ComposerConfig::new(PieceSetSpec::parse("KQ", "K").unwrap(), vec![2]);
    let mut c = Composer::new(cfg, None).unwrap();
    let mut out = Vec::new();
    while out.len() < 3 {
        out.extend(c.compose_step());
    }
    out
}

#[test]
fn append_and_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let rs = records();
    {
        let mut a = Archive::open(dir.path()).unwrap();
        assert!(a.is_empty());
        for r in &rs {
            assert!(a.append(r).unwrap());
        }
        assert!(!a.append(&rs[0]).unwrap());
        a.sync().unwrap();
        assert_eq!(a.len(), 3);
    }
    let a = Archive::open(dir.path()).unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(a.records().unwrap(), rs);
    assert!(a.contains_key(&rs[1].dedup_key));
    let index = fs::read_to_string(dir.path().join(INDEX_FILE)).unwrap();
    assert_eq!(index.lines().collect::<Vec<_>>(), rs.iter().map(|r| r.dedup_key.as_str()).collect::<Vec<_>>());
    let text = fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn partial_trailing_record_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let rs = records();
    {
        let mut a = Archive::open(dir.path()).unwrap();
        a.append(&rs[0]).unwrap();
        a.append(&rs[1]).unwrap();
    }
    let path = dir.path().join(RECORDS_FILE);
    let whole = serde_json::to_string(&rs[2]).unwrap();
    fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(&whole.as_bytes()[..whole.len() / 2]).unwrap();

    let mut a = Archive::open(dir.path()).unwrap();
    assert_eq!(a.len(), 2);
    assert!(fs::read(&path).unwrap().ends_with(b"\n"));
    assert!(a.append(&rs[2]).unwrap());
    drop(a);
    assert_eq!(read_records(&path).unwrap(), rs);
}

#[test]
fn stale_index_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let rs = records();
    {
        let mut a = Archive::open(dir.path()).unwrap();
        for r in &rs {
            a.append(r).unwrap();
        }
    }
    let index = dir.path().join(INDEX_FILE);
    fs::write(&index, "garbage\n").unwrap();
    let a = Archive::open(dir.path()).unwrap();
    assert!(a.contains_key(&rs[2].dedup_key));
    assert!(!a.contains_key("garbage"));
    assert_eq!(fs::read_to_string(&index).unwrap().lines().count(), 3);

    fs::remove_file(&index).unwrap();
    assert_eq!(Archive::rebuild_index(dir.path()).unwrap(), 3);
    assert_eq!(fs::read_to_string(&index).unwrap().lines().next(), Some(rs[0].dedup_key.as_str()));
}

#[test]
fn malformed_record_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let rs = records();
    let mut text = serde_json::to_string(&rs[0]).unwrap();
    text.push_str("\n{\"fen\": 3}\n");
    fs::write(dir.path().join(RECORDS_FILE), text).unwrap();
    match Archive::open(dir.path()) {
        Err(ArchiveError::Malformed { line, .. }) => assert_eq!(line, 2),
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("malformed archive opened"),
    }
}

#[test]
fn missing_directory_is_created() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("a/b");
    let a = Archive::open(&nested).unwrap();
    assert!(a.is_empty());
    assert!(nested.join(INDEX_FILE).exists());
}
