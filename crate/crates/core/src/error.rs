use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node id `{id}` at nodes[{index}]")]
    DuplicateNode { id: String, index: usize },
    #[error("edges[{edge_index}] refers to missing node `{endpoint}`")]
    DanglingEndpoint { edge_index: usize, endpoint: String },
    #[error("edges[{edge_index}] duplicates an existing edge `{from}` -> `{to}`")]
    DuplicateEdge {
        edge_index: usize,
        from: String,
        to: String,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{name}` = {value} is outside [0, 1]")]
    OutOfUnitRange { name: &'static str, value: f64 },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("attribute selector list must be non-empty")]
    EmptySelector,
    #[error("attribute selector lists `{0}` twice")]
    DuplicateSelectorKey(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("{which} graph is empty")]
    EmptyGraph { which: &'static str },
    #[error("no start nodes found with k = {k}; try a larger k")]
    NoStartNodes { k: usize },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("cost of an empty mapping is undefined")]
    EmptyMapping,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unsupported format_version `{version}`")]
    Version { path: String, version: String },
    #[error("{path}: {source}")]
    Graph {
        path: String,
        #[source]
        source: GraphError,
    },
    #[error("{path}: {source}")]
    Params {
        path: String,
        #[source]
        source: ParamError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzError {
    #[error("cannot grow a {wanted}-node region from `{seed}`: only {available} nodes reachable")]
    RegionTooSmall {
        seed: String,
        wanted: usize,
        available: usize,
    },
    #[error("noise level {0} is outside [0, 1]")]
    Level(f64),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Graph(#[from] GraphError),
}
