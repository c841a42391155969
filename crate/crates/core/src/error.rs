use thiserror::Error;

use crate::fock::ModeLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary (max |U†U - I| = {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("matrix is {rows}x{cols} but {modes} modes were listed")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        modes: usize,
    },

    #[error("unknown mode {0}")]
    UnknownMode(ModeLabel),

    #[error("unknown beam `{0}`")]
    UnknownBeam(String),

    #[error("mode {0} listed more than once")]
    DuplicateMode(ModeLabel),

    #[error("mode registry mismatch between operands")]
    RegistryMismatch,

    #[error("output mode {0} is already occupied")]
    OccupiedOutput(ModeLabel),

    #[error("measurement basis is not orthonormal (Gram deviation {deviation:.3e})")]
    NonOrthonormalBasis { deviation: f64 },

    #[error("cannot normalize a zero-norm state")]
    ZeroNorm,

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("decoder input has odd-parity weight {weight:.3e}")]
    OddParity { weight: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("invalid circuit: {0}")]
    Circuit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
