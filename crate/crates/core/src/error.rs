use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },
    #[error("degenerate Laurent limit: {0}")]
    DegenerateLimit(String),
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("boundary pair is not admissible")]
    NotAdmissible,
    #[error("classification ambiguous: singular values of D are ({s_max:e}, {s_min:e})")]
    ClassificationAmbiguous { s_max: f64, s_min: f64 },
    #[error("z = {0} lies on the continuous spectrum")]
    OnSpectrum(num_complex::Complex64),
    #[error("energy {0} is a threshold")]
    AtThreshold(f64),
    #[error("z = -m is a pole of the Weyl function")]
    PoleAtMinusM,
    #[error("energy {0} lies in the gap")]
    InGap(f64),
    #[error("evaluation at the origin is undefined")]
    OriginEvaluation,
    #[error("kernel evaluated on the diagonal x = y")]
    DiagonalPoint,
    #[error("z is numerically an eigenvalue (|det(DM - C)| = {0:e})")]
    NearEigenvalue(f64),
    #[error("DM(z) - C is numerically singular off the real axis")]
    NearSingular,
    #[error("case equation is degenerate")]
    DegenerateQuadratic,
    #[error("winding loop does not close (residual {0})")]
    NonClosure(f64),
    #[error("x = 0 or |lambda| <= m in the upside-down map")]
    OriginOrThreshold,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
}
