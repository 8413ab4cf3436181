use serde::Serialize;

/// Why a command stopped; decides the exit code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Input,
    Numerical,
    Verify,
}

/// Machine-readable failure reason, written to the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub category: Category,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Self { category: Category::Input, kind: kind.into(), message: message.into() }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        Self { category: Category::Verify, kind: "CheckFailed".into(), message: message.into() }
    }

    pub fn code(&self) -> i32 {
        match self.category {
            Category::Input => 2,
            Category::Numerical => 3,
            Category::Verify => 1,
        }
    }
}

impl From<multislit::Error> for Failure {
    fn from(e: multislit::Error) -> Self {
        let category = if e.is_input_error() { Category::Input } else { Category::Numerical };
        Self { category, kind: e.kind().into(), message: e.to_string() }
    }
}
