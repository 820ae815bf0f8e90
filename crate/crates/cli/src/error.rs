use qmac_core::channel::ChannelError;
use qmac_core::protocols::ProtocolError;
use qmac_core::verify::VerifyError;
use std::fmt;
use std::process::ExitCode;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Config,
    Limit,
    Internal,
    Verification,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Internal => 3,
            Kind::Limit => 4,
            Kind::Verification => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::Config => "config-error",
            Kind::Internal => "internal-error",
            Kind::Limit => "limit-exceeded",
            Kind::Verification => "fail",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: Kind::Config, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { kind: Kind::Internal, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { kind: Kind::Verification, message: message.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind.code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn channel_kind(e: &ChannelError) -> Kind {
    match e {
        ChannelError::NonDeterministic | ChannelError::OutcomeMismatch { .. } | ChannelError::Qudit(_) => {
            Kind::Internal
        }
        _ => Kind::Config,
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        let kind = match &e {
            ProtocolError::UnreachableOutput(_) => Kind::Internal,
            ProtocolError::Channel(c) => channel_kind(c),
            _ => Kind::Config,
        };
        Self { kind, message: e.to_string() }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        Self { kind: channel_kind(&e), message: e.to_string() }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::LimitExceeded { .. } => Self {
                kind: Kind::Limit,
                message: format!("{e} (try smaller d or K, or raise --limit)"),
            },
            VerifyError::Protocol(p) => p.into(),
            VerifyError::Internal(_) => Self::internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("cannot write output: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::internal(format!("serialization failed: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::internal(format!("CSV output failed: {e}"))
    }
}
