//! kgab: a robustness-evaluation harness for knowledge-graph RAG.
//!
//! The harness loads a knowledge graph and a QA dataset, degrades the graph
//! with controlled deletion strategies, runs retrieval pipelines against the
//! degraded graph, generates answers, and scores Accuracy/Hits with
//! relative-drop reporting against an intact baseline.
//!
//! Module map:
//! - [`kg`] — interned triple store with adjacency indices and removal views
//! - [`path`] — BFS shortest paths, bounded enumeration, relation grounding
//! - [`ablation`] — random triple deletion and reasoning-path disruption
//! - [`pcst`] — prize-collecting Steiner tree solvers (exact and approximate)
//! - [`retrieve`] — the three retrieval pipelines plus test doubles
//! - [`llm`] — answer generation boundary: HTTP adapter and mock oracle
//! - [`metrics`] — Accuracy/Hits scoring and relative drops
//! - [`data`] — QA file ingestion and synthetic dataset generation
//! - [`runner`] — config-driven experiment orchestration
//! - [`report`] — merged run reports (markdown tables and JSON)

pub mod ablation;
pub mod data;
pub mod error;
pub mod kg;
pub mod llm;
pub mod metrics;
pub mod path;
pub mod pcst;
pub mod report;
pub mod retrieve;
pub mod runner;
pub mod text;

pub use error::{Error, Result};
