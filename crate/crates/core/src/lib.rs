//! Task-relevance scoring and rendering for HTML pages.
//!
//! A page is parsed into an [`dom::ElementTree`], its text and visual
//! elements are scored against a decomposed user task by a pluggable
//! [`scoring::ScorerBackend`], and the scores drive one of three rendering
//! modes that produce an [`annotate::AnnotationSet`] for serialization.

pub mod annotate;
pub mod dom;
pub mod cache;
pub mod pipeline;
pub mod rendering;
pub mod scoring;
