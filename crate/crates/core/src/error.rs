use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report. Each variant maps to a stable
/// upper-case code (see [`Error::code`]) that is also used in validation
/// reports and the CLI output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // model
    #[error("unknown geometry kind `{0}`")]
    UnknownGeometryKind(String),
    #[error("vertex index {index} out of range (pool has {len} vertices)")]
    VertexIndexOutOfRange { index: usize, len: usize },

    // codec
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("not a CityJSON document: {0}")]
    NotCityJson(String),
    #[error("missing required member `{0}`")]
    MissingRequiredMember(String),
    #[error("bad value at `{path}`: {message}")]
    BadMemberType { path: String, message: String },
    #[error("duplicate key `{key}` at line {line}, column {column}")]
    DuplicateKey {
        key: String,
        line: usize,
        column: usize,
    },
    #[error("duplicate city object id `{0}`")]
    DuplicateId(String),
    #[error("bad geometry shape at `{path}`: {message}")]
    BadGeometryShape { path: String, message: String },

    // geoprocess
    #[error("model already carries a transform")]
    AlreadyQuantized,
    #[error("model has no transform")]
    NoTransform,
    #[error("quantized value {0} exceeds 2^53")]
    QuantumOverflow(f64),
    #[error("important digits must be in 0..=12, got {0}")]
    BadDigits(u32),
    #[error("model has no referenced vertices")]
    EmptyModel,
    #[error("template index {index} out of range ({len} templates)")]
    TemplateIndexOutOfRange { index: usize, len: usize },
    #[error("bad transformation matrix: {0}")]
    BadMatrix(String),
    #[error("geometry `{0}` is not a GeometryInstance")]
    NotAnInstance(String),
    #[error("no city object with id `{0}`")]
    UnknownId(String),
    #[error("geometry index {index} out of range for `{id}`")]
    GeometryIndexOutOfRange { id: String, index: usize },

    // ops
    #[error("reference systems differ: {0:?} vs {1:?}")]
    CrsMismatch(Option<String>, Option<String>),
    #[error("invalid partition strategy: {0}")]
    BadStrategy(String),

    // extensions
    #[error("not a CityJSON Extension: {0}")]
    NotExtension(String),
    #[error("`{path}` must begin with a '+'")]
    BadPlusPrefix { path: String },
    #[error("`{path}` must require both \"type\" and \"geometry\"")]
    MissingGeometryRule { path: String },
    #[error("unsupported schema keyword `{keyword}` at `{path}`")]
    UnsupportedKeyword { path: String, keyword: String },
    #[error("bad schema fragment at `{path}`: {message}")]
    BadSchemaFragment { path: String, message: String },
    #[error("extension member `{member}` defined by both `{first}` and `{second}`")]
    ExtensionCollision {
        member: String,
        first: String,
        second: String,
    },
    #[error("extension attributes may only target core types, got `{path}`")]
    BadAttributeTarget { path: String },

    // gml-import
    #[error("XML syntax error: {0}")]
    XmlSyntax(String),
    #[error("unresolved xlink `{0}`")]
    UnresolvedXlink(String),
    #[error("external xlink `{0}` is not supported")]
    ExternalXlink(String),
    #[error("more than one CRS in document: {0} and {1}")]
    MixedCrs(String, String),
    #[error("unsupported CRS `{0}`: only EPSG codes are allowed")]
    BadCrs(String),
    #[error("ring at `{path}` has fewer than 3 distinct points")]
    RingTooShort { path: String },
    #[error("bad coordinate token `{token}` at `{path}`")]
    BadCoordinateToken { path: String, token: String },
    #[error("LoD4 is not supported (`{0}`)")]
    Lod4Unsupported(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            UnknownGeometryKind(_) => "UNKNOWN_GEOMETRY_KIND",
            VertexIndexOutOfRange { .. } => "VERTEX_INDEX_OUT_OF_RANGE",
            Syntax { .. } => "SYNTAX_ERROR",
            NotCityJson(_) => "NOT_CITYJSON",
            MissingRequiredMember(_) => "MISSING_REQUIRED_MEMBER",
            BadMemberType { .. } => "BAD_MEMBER_TYPE",
            DuplicateKey { .. } => "DUPLICATE_KEY",
            DuplicateId(_) => "DUPLICATE_ID",
            BadGeometryShape { .. } => "BAD_GEOMETRY_SHAPE",
            AlreadyQuantized => "ALREADY_QUANTIZED",
            NoTransform => "NO_TRANSFORM",
            QuantumOverflow(_) => "QUANTUM_OVERFLOW",
            BadDigits(_) => "BAD_DIGITS",
            EmptyModel => "EMPTY_MODEL",
            TemplateIndexOutOfRange { .. } => "TEMPLATE_INDEX_OUT_OF_RANGE",
            BadMatrix(_) => "BAD_MATRIX",
            NotAnInstance(_) => "NOT_AN_INSTANCE",
            UnknownId(_) => "UNKNOWN_ID",
            GeometryIndexOutOfRange { .. } => "GEOMETRY_INDEX_OUT_OF_RANGE",
            CrsMismatch(..) => "CRS_MISMATCH",
            BadStrategy(_) => "BAD_STRATEGY",
            NotExtension(_) => "NOT_EXTENSION",
            BadPlusPrefix { .. } => "BAD_PLUS_PREFIX",
            MissingGeometryRule { .. } => "MISSING_GEOMETRY_RULE",
            UnsupportedKeyword { .. } => "UNSUPPORTED_KEYWORD",
            BadSchemaFragment { .. } => "BAD_SCHEMA_FRAGMENT",
            ExtensionCollision { .. } => "EXTENSION_COLLISION",
            BadAttributeTarget { .. } => "BAD_ATTRIBUTE_TARGET",
            XmlSyntax(_) => "XML_SYNTAX_ERROR",
            UnresolvedXlink(_) => "UNRESOLVED_XLINK",
            ExternalXlink(_) => "EXTERNAL_XLINK",
            MixedCrs(..) => "MIXED_CRS",
            BadCrs(_) => "BAD_CRS",
            RingTooShort { .. } => "RING_TOO_SHORT",
            BadCoordinateToken { .. } => "BAD_COORDINATE_TOKEN",
            Lod4Unsupported(_) => "LOD4_UNSUPPORTED",
            Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
