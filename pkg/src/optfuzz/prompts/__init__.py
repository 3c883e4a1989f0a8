from .engine import (
    DELIMITER,
    Family,
    FewShotExample,
    PromptBundle,
    PromptConfig,
    Requirement,
    RequirementFormat,
    SeedShots,
    ShotKind,
    build_feedback_prompt,
    build_generation_prompt,
    build_summarization_prompt,
    code_only,
    convert_requirement,
    load_seed_shots,
    make_seed_shots,
    nl_only,
    split_requirement,
)

__all__ = [
    "DELIMITER",
    "Family",
    "FewShotExample",
    "PromptBundle",
    "PromptConfig",
    "Requirement",
    "RequirementFormat",
    "SeedShots",
    "ShotKind",
    "build_feedback_prompt",
    "build_generation_prompt",
    "build_summarization_prompt",
    "code_only",
    "convert_requirement",
    "load_seed_shots",
    "make_seed_shots",
    "nl_only",
    "split_requirement",
]
