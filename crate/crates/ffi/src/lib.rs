//! C ABI over the pptern project store and type lexicon.
//!
//! Every function returns a [`PpternStatus`]. On failure the message is kept
//! in a thread-local slot readable through [`pptern_last_error`]. Handles are
//! opaque and must be released with their matching `*_free` function;
//! strings returned through out-parameters are released with
//! [`pptern_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pptern::corpus::normalize_text;
use pptern::extraction::{parse_event_config, DEFAULT_EVENT_CONFIG};
use pptern::induction::TemplateStatus;
use pptern::lexicon::TypeLexicon;
use pptern::pipeline::load_lexicon_files;
use pptern::store::{self, ProjectState, Verdict};
use pptern::Error;

/// Opaque project handle.
pub struct PpternProject {
    state: ProjectState,
}

/// Opaque type lexicon handle.
pub struct PpternLexicon {
    lexicon: TypeLexicon,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpternStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    NotFound = 5,
    Precondition = 6,
    Invalid = 7,
    Panic = 8,
}

/// Template and instance counts of a project.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PpternCounts {
    pub candidates: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub relations: u64,
    pub instances: u64,
    pub judgments: u64,
    pub revision: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PpternStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => PpternStatus::Io,
            Error::Line(_) | Error::Format(_) | Error::VersionMismatch { .. } => PpternStatus::Format,
            Error::UnknownTemplate(_) => PpternStatus::NotFound,
            e if e.is_precondition() => PpternStatus::Precondition,
            _ => PpternStatus::Invalid,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PpternStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PpternStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {message}"));
            PpternStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PpternStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PpternStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c =
        CString::new(s).map_err(|_| Failure(PpternStatus::Invalid, "output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pptern_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pptern_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pptern_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an empty project over the bundled event types.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_new(out: *mut *mut PpternProject) -> PpternStatus {
    guard(|| {
        let events = parse_event_config(DEFAULT_EVENT_CONFIG)?;
        put_handle(out, PpternProject { state: ProjectState::new(events) })
    })
}

/// Loads a project file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_load(
    path: *const c_char,
    out: *mut *mut PpternProject,
) -> PpternStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let state = store::load_path(Path::new(path))?;
        put_handle(out, PpternProject { state })
    })
}

/// Saves a project atomically; the previous file survives a failed write.
///
/// # Safety
/// `project` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_save(
    project: *const PpternProject,
    path: *const c_char,
) -> PpternStatus {
    guard(|| {
        let project = handle(project, "project")?;
        let path = str_arg(path, "path")?;
        store::save_path(&project.state, Path::new(path))?;
        Ok(())
    })
}

/// Releases a project handle. NULL is ignored.
///
/// # Safety
/// `project` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_free(project: *mut PpternProject) {
    if !project.is_null() {
        drop(Box::from_raw(project));
    }
}

/// Template counts by status plus relation, instance and judgment totals.
///
/// # Safety
/// `project` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_counts(
    project: *const PpternProject,
    out: *mut PpternCounts,
) -> PpternStatus {
    guard(|| {
        let state = &handle(project, "project")?.state;
        let out = handle_mut(out, "out")?;
        let by_status = state.status_counts();
        let n = |s| by_status.get(&s).copied().unwrap_or(0) as u64;
        *out = PpternCounts {
            candidates: n(TemplateStatus::Candidate),
            accepted: n(TemplateStatus::Accepted),
            rejected: n(TemplateStatus::Rejected),
            relations: state.relations.len() as u64,
            instances: state.instances.len() as u64,
            judgments: state.judgments.len() as u64,
            revision: state.revision,
        };
        Ok(())
    })
}

/// Sets a template's status to `candidate`, `accepted` or `rejected`.
///
/// # Safety
/// `project` must be a live handle; `template_id` and `status` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_set_status(
    project: *mut PpternProject,
    template_id: *const c_char,
    status: *const c_char,
) -> PpternStatus {
    guard(|| {
        let project = handle_mut(project, "project")?;
        let id = str_arg(template_id, "template_id")?;
        let status: TemplateStatus = str_arg(status, "status")?.parse()?;
        project.state.set_status(id, status)?;
        Ok(())
    })
}

/// Labels the three argument slots of a template.
///
/// # Safety
/// `project` must be a live handle; the other arguments must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_set_roles(
    project: *mut PpternProject,
    template_id: *const c_char,
    role1: *const c_char,
    role2: *const c_char,
    role3: *const c_char,
) -> PpternStatus {
    guard(|| {
        let project = handle_mut(project, "project")?;
        let id = str_arg(template_id, "template_id")?;
        let roles = [
            str_arg(role1, "role1")?.to_string(),
            str_arg(role2, "role2")?.to_string(),
            str_arg(role3, "role3")?.to_string(),
        ];
        project.state.set_role_labels(id, roles)?;
        Ok(())
    })
}

/// Records (or replaces) a verdict on a template of the given iteration.
///
/// # Safety
/// `project` must be a live handle and `template_id` a NUL-terminated
/// string. `note` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_record_judgment(
    project: *mut PpternProject,
    template_id: *const c_char,
    iteration: u32,
    correct: bool,
    note: *const c_char,
) -> PpternStatus {
    guard(|| {
        let project = handle_mut(project, "project")?;
        let id = str_arg(template_id, "template_id")?;
        let note = if note.is_null() { "" } else { str_arg(note, "note")? };
        let verdict = if correct { Verdict::Correct } else { Verdict::Wrong };
        project.state.record_judgment(id, verdict, iteration, note)?;
        Ok(())
    })
}

/// Judged and correct counts for an iteration. Both are 0 when nothing was
/// judged.
///
/// # Safety
/// `project` must be a live handle; `correct` and `judged` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_precision(
    project: *const PpternProject,
    iteration: u32,
    correct: *mut u64,
    judged: *mut u64,
) -> PpternStatus {
    guard(|| {
        let state = &handle(project, "project")?.state;
        let correct = handle_mut(correct, "correct")?;
        let judged = handle_mut(judged, "judged")?;
        let p = state.precision(iteration);
        *correct = p.map_or(0, |p| p.correct as u64);
        *judged = p.map_or(0, |p| p.judged as u64);
        Ok(())
    })
}

/// Per-iteration statistics as JSON, same shape as `pptern stats --json`.
///
/// # Safety
/// `project` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_stats_json(
    project: *const PpternProject,
    out: *mut *mut c_char,
) -> PpternStatus {
    guard(|| {
        let state = &handle(project, "project")?.state;
        let json = serde_json::to_string(&store::stats(state))
            .map_err(|e| Failure(PpternStatus::Invalid, e.to_string()))?;
        put_string(out, json)
    })
}

/// Instance export TSV.
///
/// # Safety
/// `project` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_instances_tsv(
    project: *const PpternProject,
    out: *mut *mut c_char,
) -> PpternStatus {
    guard(|| {
        let state = &handle(project, "project")?.state;
        let mut buf = Vec::new();
        store::write_instances_tsv(state, &mut buf).expect("writing to memory");
        put_string(out, String::from_utf8(buf).expect("export is UTF-8"))
    })
}

/// Template export TSV.
///
/// # Safety
/// `project` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_project_templates_tsv(
    project: *const PpternProject,
    out: *mut *mut c_char,
) -> PpternStatus {
    guard(|| {
        let state = &handle(project, "project")?.state;
        let mut buf = Vec::new();
        store::write_templates_tsv(state, &mut buf).expect("writing to memory");
        put_string(out, String::from_utf8(buf).expect("export is UTF-8"))
    })
}

/// Loads a lexicon TSV file. Malformed lines are skipped as in the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_lexicon_load(
    path: *const c_char,
    out: *mut *mut PpternLexicon,
) -> PpternStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let (lexicon, _) = load_lexicon_files(&[path])?;
        put_handle(out, PpternLexicon { lexicon })
    })
}

/// Releases a lexicon handle. NULL is ignored.
///
/// # Safety
/// `lexicon` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pptern_lexicon_free(lexicon: *mut PpternLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Types of a phrase, tab-separated, at most `max_per_source` per source.
/// An untypeable phrase yields an empty string.
///
/// # Safety
/// `lexicon` must be a live handle, `phrase` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pptern_lexicon_resolve(
    lexicon: *const PpternLexicon,
    phrase: *const c_char,
    max_per_source: u32,
    out: *mut *mut c_char,
) -> PpternStatus {
    guard(|| {
        let lex = &handle(lexicon, "lexicon")?.lexicon;
        let key = normalize_text(str_arg(phrase, "phrase")?);
        let types: Vec<String> =
            lex.resolve_types(&key, max_per_source as usize).iter().map(ToString::to_string).collect();
        put_string(out, types.join("\t"))
    })
}
