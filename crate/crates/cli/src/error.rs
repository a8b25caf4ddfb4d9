use finsler_core::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{}", describe(*point, source))]
    Engine {
        point: Option<usize>,
        #[source]
        source: Error,
    },
}

fn describe(point: Option<usize>, source: &Error) -> String {
    match (point, source) {
        // already names the point
        (_, Error::OutOfDomain { .. }) | (None, _) => source.to_string(),
        (Some(i), _) => format!("point {i}: {source}"),
    }
}

impl CliError {
    /// Attributes an engine error to the job point with index `point`.
    pub fn at(point: usize) -> impl FnOnce(Error) -> CliError {
        move |source| {
            let source = match source {
                Error::OutOfDomain { reason, .. } => Error::OutOfDomain {
                    index: point,
                    reason,
                },
                other => other,
            };
            CliError::Engine {
                point: Some(point),
                source,
            }
        }
    }

    /// Process exit status; residual failures are reported, not raised.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

impl From<Error> for CliError {
    fn from(source: Error) -> CliError {
        CliError::Engine {
            point: None,
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_errors_name_the_job_point() {
        let e = CliError::at(3)(Error::OutOfDomain {
            index: 0,
            reason: "x outside".into(),
        });
        assert_eq!(
            e.to_string(),
            "point 3 is outside the metric's domain: x outside"
        );
        let e = CliError::at(2)(Error::UnsupportedVolume);
        assert!(e.to_string().starts_with("point 2: "));
        assert_eq!(e.exit_code(), 2);
    }
}
