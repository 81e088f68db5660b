use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::ProjectState;
use crate::error::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
struct Header {
    version: u32,
}

/// Serializes the state as pretty-printed JSON with a trailing newline.
pub fn save<W: Write>(state: &ProjectState, mut sink: W) -> Result<(), Error> {
    serde_json::to_writer_pretty(&mut sink, state)?;
    sink.write_all(b"\n").and_then(|_| sink.flush()).map_err(|e| Error::io("<sink>", e))?;
    Ok(())
}

/// Parses and validates a project. Nothing is returned unless the whole
/// document parses and passes the integrity check.
pub fn load<R: Read>(mut source: R) -> Result<ProjectState, Error> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::io("<source>", e))?;
    let header: Header = serde_json::from_str(&text)?;
    if header.version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: header.version, expected: FORMAT_VERSION });
    }
    let state: ProjectState = serde_json::from_str(&text)?;
    state.validate()?;
    Ok(state)
}

/// Writes to a temporary file in the target directory and renames it over
/// the destination.
pub fn save_path(state: &ProjectState, path: &Path) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    save(state, std::io::BufWriter::new(tmp.as_file_mut()))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load_path(path: &Path) -> Result<ProjectState, Error> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::induction::TemplateStatus;
    use crate::store::tests::{fixture, roles, MURDER};

    fn bytes(state: &ProjectState) -> Vec<u8> {
        let mut buf = Vec::new();
        save(state, &mut buf).unwrap();
        buf
    }

    #[test]
    fn empty_project_round_trips() {
        let s = ProjectState::default();
        let b = bytes(&s);
        let back = load(&b[..]).unwrap();
        assert_eq!(back, s);
        assert_eq!(bytes(&back), b);
    }

    #[test]
    fn curated_project_round_trips_through_a_file() {
        let mut s = fixture();
        s.set_role_labels("T0-00001", roles(MURDER)).unwrap();
        s.set_status("T0-00001", TemplateStatus::Accepted).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("project.json");
        save_path(&s, &path).unwrap();
        assert_eq!(load_path(&path).unwrap(), s);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn version_mismatch_names_both_versions() {
        let s = ProjectState { version: 7, ..Default::default() };
        let err = load(&bytes(&s)[..]).unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { found: 7, expected: 1 }));
        assert!(err.to_string().contains('7') && err.to_string().contains('1'));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut s = fixture();
        s.set_role_labels("T0-00001", roles(MURDER)).unwrap();
        let b = bytes(&s);
        for cut in [1, b.len() / 3, b.len() / 2, b.len() - 3] {
            assert!(load(&b[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn dangling_reference_fails_load() {
        let mut s = fixture();
        s.set_role_labels("T0-00001", roles(MURDER)).unwrap();
        s.set_status("T0-00001", TemplateStatus::Accepted).unwrap();
        s.instances[0].template_id = "T7-00007".into();
        let err = load(&bytes(&s)[..]).unwrap_err();
        assert!(matches!(err, Error::Integrity(ref m) if m.contains("T7-00007")));
    }
}
