use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("{what} is infinite at s = {s}")]
    InfiniteAtEndpoint { what: &'static str, s: f64 },
    #[error("quadrature did not converge: estimated error {achieved:e} above target {target:e}")]
    QuadratureNonConvergence { achieved: f64, target: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub(crate) fn check_unit(what: &'static str, s: f64) -> Result<(), ConstitutiveError> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(ConstitutiveError::Domain {
            what,
            value: s,
            domain: "[0, 1]",
        })
    }
}
