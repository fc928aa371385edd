//! Test-only package; see `tests/acceptance.rs`. Run with
//! `cargo test -p cei-verify --test acceptance`.
