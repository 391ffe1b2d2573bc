//! Course content: task manifests, the course file, quizzes and the
//! authoring rules every shipped task must satisfy.

pub mod course;
pub mod manifest;
pub mod profiles;
pub mod progression;
pub mod validate;

pub use course::{
    list_course, Course, CourseConfig, CourseError, LabExercise, LabSummary, QuizAnswer, QuizItem, QuizOutcome,
    TaskSummary, Weights,
};
pub use manifest::{load_manifest, DriverSpec, Literal, ManifestError, Mistake, TaskKind, TaskManifest};
pub use progression::{lab_deltas, missing_lines};
pub use validate::{validate_manifest, RuleOutcome, ValidationReport};
