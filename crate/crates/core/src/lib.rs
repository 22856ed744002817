//! Question answering over a knowledge graph.
//!
//! A question is linked to its entities, their neighbourhood is grouped into
//! supernodes (one per relation, or per relation and intersection when the
//! question names several entities), and each supernode is embedded by
//! averaging its members and propagating from the question entities with
//! relation weights predicted by a recurrent-convolutional classifier. An
//! LSTM encoding of the question then scores the supernodes, and the best
//! one's members are the answer.

pub mod checkpoint;
pub mod cli;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod gcn;
pub mod kg;
pub mod linking;
pub mod nn;
pub mod pipeline;
pub mod rcnn;
pub mod selector;
pub mod summary;
pub mod synth;
pub mod text;
pub mod training;

pub use error::{Error, Result};
