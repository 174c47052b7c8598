use super::Condition;

/// Level statements per condition, indexed by points (0..=4). Punctuation
/// is kept exactly as published, including the missing full stops.
pub(super) const STATEMENTS: [[&str; 5]; 5] = [
    [
        "Input format is not predefined and data types are completely inconsistent.",
        "Input format and data types are mostly inconsistent.",
        "Input format and data types are somewhat standardized.",
        "Input format is mostly predefined and data types are consistent with rare exceptions.",
        "Input format is predefined specifying the order and naming of fields with consistent data types",
    ],
    [
        "There are no rules to complete the task.",
        "The rules are ambiguous.",
        "Rules are explicit for most scenarios, with areas of ambiguity.",
        "Rules are explicit, with very few ambiguous aspects, and are mostly organized in a logical order.",
        "Rules are explicitly defined and organized in a logical order.",
    ],
    [
        "Task is unique or never repeated.",
        "Task is occasionally repeated.",
        "Task is often repeated.",
        "Task is frequently repeated.",
        "Task is always repetitive.",
    ],
    [
        "Data and not necessary for task completion.",
        "Data somewhat required or unavailable for task completion.",
        "Data required and somewhat available for task completion.",
        "Data required and mostly available for task completion.",
        "Data required and fully available for task completion.",
    ],
    [
        "Output does not have a metric or benchmark, or cannot be verified",
        "Output has limited metrics or benchmarks, or verification is mainly subjective",
        "Output has clear metrics or benchmarks, but verification is mainly subjective.",
        "Output has clear metrics or benchmarks and is mostly verifiable objectively.",
        "Output has a clear metric or benchmark and is completely verifiable objectively.",
    ],
];

/// Question shown before a condition's statements in interactive scoring.
pub(super) fn prompt(condition: Condition) -> &'static str {
    match condition {
        Condition::StandardizedInput => {
            "Select the statement that best describes the extent to which the agent that will \
             complete the task receives information that is consistent, structured, and presented \
             in a format that can be accurately understood and processed, and note the \
             corresponding points:"
        }
        Condition::WellDefinedRules => {
            "Select the statement that best describes the extent to which the steps to complete a \
             task are unambiguous and organized in a logical order, and note the corresponding \
             points:"
        }
        Condition::Repetitive => {
            "Select the statement that best describes the extent to which the task is performed \
             frequently, involving similar processes or actions each time, and note the \
             corresponding points:"
        }
        Condition::DataDependent => {
            "Select the statement that best describes the extent to which data availability is \
             required to complete the task, and note the corresponding points:"
        }
        Condition::ObjectiveOutput => {
            "Select the statement that best describes the extent to which the task's result can \
             be verified, and note the corresponding points:"
        }
    }
}
