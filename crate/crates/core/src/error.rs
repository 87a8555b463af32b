use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid of {grid} points cannot resolve {n_modes} modes (need an even grid of at least {needed})")]
    GridTooCoarse {
        grid: usize,
        n_modes: usize,
        needed: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length equation denominator is {value:.3e}; the curve is too far from a circle")]
    InadmissibleLength { value: f64 },

    #[error("near self-intersection: chord/arc ratio {ratio:.3e} at grid point {index}")]
    NearSelfIntersection { ratio: f64, index: usize },

    #[error("{solver} did not converge in {iterations} iterations (last update {last_update:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        last_update: f64,
    },

    #[error("quadrature failed to reach tolerance {tol:.1e} on [{a}, {b}]")]
    Quadrature { tol: f64, a: f64, b: f64 },

    #[error("integral undefined at k = 0")]
    ZeroFrequency,

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("radius r = {r} outside (0, {max})")]
    RadiusOutOfRange { r: f64, max: f64 },

    #[error("field norm {norm:.4} is not below the admissibility radius {r}")]
    NotAdmissible { norm: f64, r: f64 },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
