//! C ABI over the core crate: load triples, run pattern queries, and
//! answer protocol requests from any language that can call C. The
//! generated header lives in `include/restpark.h`.
//!
//! Ground rules, spelled out once:
//!
//! - Handles ([`RpStore`], [`RpResponse`]) are opaque pointers created and
//!   released by this library. Never free them any other way, never use
//!   one after freeing it, and use each from one thread at a time.
//! - Fallible calls return [`RpStatus`]. Anything but `Ok` leaves an
//!   explanation in [`rp_last_error_message`], valid on the calling
//!   thread until the next failing call there.
//! - `char *` out-values are NUL-terminated UTF-8 owned by the caller;
//!   release each with [`rp_string_free`]. `const char *` values from
//!   response accessors are borrowed and die with the response.
//! - Panics never cross the boundary; they come back as
//!   [`RpStatus::Internal`].

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fmt::Display;
use std::os::raw::c_char;
use std::panic::{self, AssertUnwindSafe};

use restpark::jsonld;
use restpark::ntriples;
use restpark::service::{self, HttpResponseSpec};
use restpark::store::{PageRequest, TripleStore, DEFAULT_PAGE_SIZE};
use restpark::TriplePattern;

/// Result of a fallible call. Anything but `Ok` is described by
/// `rp_last_error_message`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Document text failed to parse.
    ParseError = 3,
    /// Arguments were readable but unusable: a malformed pattern slot, a
    /// page size out of range.
    InvalidArgument = 4,
    /// A file could not be read.
    IoError = 5,
    /// A bug in this library, caught at the boundary.
    Internal = 6,
}

/// An immutable, indexed triple collection.
pub struct RpStore {
    store: TripleStore,
}

/// One materialized HTTP response: status, ordered headers, body.
pub struct RpResponse {
    status: u16,
    headers: Vec<(CString, CString)>,
    body: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("no error").unwrap());
}

fn fail(status: RpStatus, message: impl Display) -> RpStatus {
    // CString cannot hold NUL; our messages never contain one, but a
    // replacement beats a panic inside the error path.
    let text = message.to_string().replace('\0', "\u{fffd}");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).unwrap());
    status
}

fn guarded(body: impl FnOnce() -> RpStatus) -> RpStatus {
    match panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            fail(RpStatus::Internal, format!("internal panic: {message}"))
        }
    }
}

/// `ptr` must be NULL or point to a NUL-terminated string that outlives
/// the call.
unsafe fn required_str<'a>(name: &str, ptr: *const c_char) -> Result<&'a str, RpStatus> {
    if ptr.is_null() {
        return Err(fail(
            RpStatus::NullPointer,
            format!("{name} must not be NULL"),
        ));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(RpStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn optional_str<'a>(name: &str, ptr: *const c_char) -> Result<Option<&'a str>, RpStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    unsafe { required_str(name, ptr) }.map(Some)
}

fn required_out<T>(name: &str, ptr: *mut T) -> Result<(), RpStatus> {
    if ptr.is_null() {
        return Err(fail(
            RpStatus::NullPointer,
            format!("{name} must not be NULL"),
        ));
    }
    Ok(())
}

unsafe fn borrow_store<'a>(ptr: *const RpStore) -> Result<&'a TripleStore, RpStatus> {
    if ptr.is_null() {
        return Err(fail(RpStatus::NullPointer, "store must not be NULL"));
    }
    Ok(unsafe { &(*ptr).store })
}

/// The three pattern slots follow the query-parameter grammar: NULL
/// leaves a slot unconstrained, subject and object take node text or
/// `_:label`, and an object starting with `"` is read as a full
/// N-Triples literal.
unsafe fn pattern_from_ptrs(
    subject: *const c_char,
    predicate: *const c_char,
    object: *const c_char,
) -> Result<TriplePattern, RpStatus> {
    let subject = unsafe { optional_str("subject", subject) }?;
    let predicate = unsafe { optional_str("predicate", predicate) }?;
    let object = unsafe { optional_str("object", object) }?;
    service::pattern_from_texts(subject, predicate, object)
        .map_err(|err| fail(RpStatus::InvalidArgument, err))
}

fn page_request(page: usize, page_size: usize) -> Result<PageRequest, RpStatus> {
    let page = if page == 0 { 1 } else { page };
    let page_size = if page_size == 0 {
        DEFAULT_PAGE_SIZE
    } else {
        page_size
    };
    PageRequest::new(page, page_size).map_err(|err| fail(RpStatus::InvalidArgument, err))
}

fn build_store(text: &str, strict: bool) -> Result<TripleStore, RpStatus> {
    match ntriples::parse_document(text, strict) {
        Ok(report) => Ok(TripleStore::build(report.triples)),
        Err(err) => Err(fail(RpStatus::ParseError, err)),
    }
}

/// `out` must be non-NULL; ownership of the text moves to the caller.
unsafe fn give_string(out: *mut *mut c_char, text: String) -> RpStatus {
    match CString::new(text) {
        Ok(text) => {
            unsafe { *out = text.into_raw() };
            RpStatus::Ok
        }
        Err(_) => fail(RpStatus::Internal, "produced text containing NUL"),
    }
}

/// Version of this library as a static NUL-terminated string. Never NULL,
/// never freed.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Explanation of the most recent non-`Ok` status on this thread.
/// Borrowed; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse N-Triples text into a new store. With `strict` set, the first
/// malformed line fails the whole call; otherwise malformed lines are
/// skipped. On success `*out_store` owns the store; release it with
/// `rp_store_free`.
#[no_mangle]
pub unsafe extern "C" fn rp_store_parse(
    text: *const c_char,
    strict: bool,
    out_store: *mut *mut RpStore,
) -> RpStatus {
    guarded(|| {
        if let Err(status) = required_out("out_store", out_store) {
            return status;
        }
        let text = match unsafe { required_str("text", text) } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match build_store(text, strict) {
            Ok(store) => {
                unsafe { *out_store = Box::into_raw(Box::new(RpStore { store })) };
                RpStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Read a file and parse it like `rp_store_parse`. An unreadable file is
/// `IoError`; malformed content is `ParseError`.
#[no_mangle]
pub unsafe extern "C" fn rp_store_load_file(
    path: *const c_char,
    strict: bool,
    out_store: *mut *mut RpStore,
) -> RpStatus {
    guarded(|| {
        if let Err(status) = required_out("out_store", out_store) {
            return status;
        }
        let path = match unsafe { required_str("path", path) } {
            Ok(path) => path,
            Err(status) => return status,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(err) => return fail(RpStatus::IoError, format!("{path}: {err}")),
        };
        match build_store(&text, strict) {
            Ok(store) => {
                unsafe { *out_store = Box::into_raw(Box::new(RpStore { store })) };
                RpStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Release a store. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rp_store_free(store: *mut RpStore) {
    if !store.is_null() {
        drop(unsafe { Box::from_raw(store) });
    }
}

/// Number of distinct triples, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rp_store_len(store: *const RpStore) -> usize {
    if store.is_null() {
        return 0;
    }
    unsafe { &(*store).store }.len()
}

/// Count the matches for a pattern without materializing them.
#[no_mangle]
pub unsafe extern "C" fn rp_store_count(
    store: *const RpStore,
    subject: *const c_char,
    predicate: *const c_char,
    object: *const c_char,
    out_count: *mut usize,
) -> RpStatus {
    guarded(|| {
        if let Err(status) = required_out("out_count", out_count) {
            return status;
        }
        let store = match unsafe { borrow_store(store) } {
            Ok(store) => store,
            Err(status) => return status,
        };
        let pattern = match unsafe { pattern_from_ptrs(subject, predicate, object) } {
            Ok(pattern) => pattern,
            Err(status) => return status,
        };
        unsafe { *out_count = store.count_pattern(&pattern) };
        RpStatus::Ok
    })
}

/// One page of matches as the same flattened JSON-LD document the HTTP
/// resource serves. `page` and `page_size` of 0 select the defaults,
/// 1 and 100. On success `*out_json` is owned by the caller; release it
/// with `rp_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rp_store_query_jsonld(
    store: *const RpStore,
    subject: *const c_char,
    predicate: *const c_char,
    object: *const c_char,
    page: usize,
    page_size: usize,
    out_json: *mut *mut c_char,
) -> RpStatus {
    guarded(|| {
        if let Err(status) = required_out("out_json", out_json) {
            return status;
        }
        let store = match unsafe { borrow_store(store) } {
            Ok(store) => store,
            Err(status) => return status,
        };
        let pattern = match unsafe { pattern_from_ptrs(subject, predicate, object) } {
            Ok(pattern) => pattern,
            Err(status) => return status,
        };
        let request = match page_request(page, page_size) {
            Ok(request) => request,
            Err(status) => return status,
        };
        let result = store.match_page(&pattern, request);
        unsafe { give_string(out_json, jsonld::encode_graph(&result.triples)) }
    })
}

/// Like `rp_store_query_jsonld`, but the page comes back as canonical
/// N-Triples text.
#[no_mangle]
pub unsafe extern "C" fn rp_store_query_ntriples(
    store: *const RpStore,
    subject: *const c_char,
    predicate: *const c_char,
    object: *const c_char,
    page: usize,
    page_size: usize,
    out_text: *mut *mut c_char,
) -> RpStatus {
    guarded(|| {
        if let Err(status) = required_out("out_text", out_text) {
            return status;
        }
        let store = match unsafe { borrow_store(store) } {
            Ok(store) => store,
            Err(status) => return status,
        };
        let pattern = match unsafe { pattern_from_ptrs(subject, predicate, object) } {
            Ok(pattern) => pattern,
            Err(status) => return status,
        };
        let request = match page_request(page, page_size) {
            Ok(request) => request,
            Err(status) => return status,
        };
        let result = store.match_page(&pattern, request);
        unsafe { give_string(out_text, ntriples::serialize_document(&result.triples)) }
    })
}

/// Release a string handed out by this library. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rp_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

impl RpResponse {
    fn from_spec(spec: HttpResponseSpec) -> Result<Self, RpStatus> {
        let nul = |what: &str| fail(RpStatus::Internal, format!("{what} containing NUL"));
        let mut headers = Vec::with_capacity(spec.headers.len());
        for (name, value) in spec.headers {
            headers.push((
                CString::new(name).map_err(|_| nul("header name"))?,
                CString::new(value).map_err(|_| nul("header value"))?,
            ));
        }
        Ok(RpResponse {
            status: spec.status,
            headers,
            body: CString::new(spec.body).map_err(|_| nul("body"))?,
        })
    }
}

/// Answer one HTTP request against the store, exactly as the bundled
/// server would: same status, same headers (pagination links included),
/// same body bytes. `target` is the request target from the request line,
/// query string and all; `mount_prefix` is NULL or the path prefix the
/// resource is mounted under. On success `*out_response` owns the
/// response; release it with `rp_response_free`.
#[no_mangle]
pub unsafe extern "C" fn rp_handle_request(
    store: *const RpStore,
    mount_prefix: *const c_char,
    method: *const c_char,
    target: *const c_char,
    out_response: *mut *mut RpResponse,
) -> RpStatus {
    guarded(|| {
        if let Err(status) = required_out("out_response", out_response) {
            return status;
        }
        let store = match unsafe { borrow_store(store) } {
            Ok(store) => store,
            Err(status) => return status,
        };
        let mount = match unsafe { optional_str("mount_prefix", mount_prefix) } {
            Ok(mount) => mount.unwrap_or(""),
            Err(status) => return status,
        };
        let method = match unsafe { required_str("method", method) } {
            Ok(method) => method,
            Err(status) => return status,
        };
        let target = match unsafe { required_str("target", target) } {
            Ok(target) => target,
            Err(status) => return status,
        };
        let (path, raw_query) = target.split_once('?').unwrap_or((target, ""));
        let spec = service::handle_request_at(store, mount, method, path, raw_query);
        match RpResponse::from_spec(spec) {
            Ok(response) => {
                unsafe { *out_response = Box::into_raw(Box::new(response)) };
                RpStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// HTTP status code, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rp_response_status(response: *const RpResponse) -> u16 {
    if response.is_null() {
        return 0;
    }
    unsafe { &*response }.status
}

/// Number of headers, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rp_response_header_count(response: *const RpResponse) -> usize {
    if response.is_null() {
        return 0;
    }
    unsafe { &*response }.headers.len()
}

/// Name of the header at `index`, 0-based in response order, or NULL when
/// out of range. Borrowed from the response.
#[no_mangle]
pub unsafe extern "C" fn rp_response_header_name(
    response: *const RpResponse,
    index: usize,
) -> *const c_char {
    if response.is_null() {
        return std::ptr::null();
    }
    match unsafe { &*response }.headers.get(index) {
        Some((name, _)) => name.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Value of the header at `index`, or NULL when out of range. Borrowed
/// from the response.
#[no_mangle]
pub unsafe extern "C" fn rp_response_header_value(
    response: *const RpResponse,
    index: usize,
) -> *const c_char {
    if response.is_null() {
        return std::ptr::null();
    }
    match unsafe { &*response }.headers.get(index) {
        Some((_, value)) => value.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Body as a NUL-terminated string, or NULL for NULL. Protocol bodies are
/// always UTF-8 text and never contain NUL bytes. Borrowed from the
/// response.
#[no_mangle]
pub unsafe extern "C" fn rp_response_body(response: *const RpResponse) -> *const c_char {
    if response.is_null() {
        return std::ptr::null();
    }
    unsafe { &*response }.body.as_ptr()
}

/// Body length in bytes, excluding the terminator, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rp_response_body_len(response: *const RpResponse) -> usize {
    if response.is_null() {
        return 0;
    }
    unsafe { &*response }.body.as_bytes().len()
}

/// Release a response. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rp_response_free(response: *mut RpResponse) {
    if !response.is_null() {
        drop(unsafe { Box::from_raw(response) });
    }
}
