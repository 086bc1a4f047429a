"""Seeded obfuscation operators with exact ground-truth bookkeeping."""

from .edits import Edit, ObfuscationTrace, TraceEdit, apply_edits, map_position
from .generate import (
    GenerationResult, RecipeError, RecipeStep, derive_seed, generate_pair, generate_pair_traced,
    load_recipes, parse_recipe, passages,
)
from .insdel import apply_insert_delete, id_library, one_step_rewrites
from .library import Lexicon, MathTextEntry, RewriteRule, load_lexicon, load_rules, rule_sites
from .manipulation import (
    DerivationStep, apply_formula_manipulation, fm_rules, manipulate_document, numerically_equivalent,
)
from .paraphrase import InapplicableError, apply_paraphrase, mirror_relation
from .presentation import RenameError, apply_presentation, full_rename, present_document, rename_identifiers
from .subject import AmbiguityError, apply_variation_of_subject, entity_token_count
from .substitution import (
    Clause, FreshNamePolicy, SubstitutionError, apply_substitution, resolve_substitutions,
    substitute_document,
)
from .tmmt import apply_tmmt

__all__ = [
    "AmbiguityError", "Clause", "DerivationStep", "Edit", "FreshNamePolicy", "GenerationResult",
    "InapplicableError", "Lexicon", "MathTextEntry", "ObfuscationTrace", "RecipeError", "RecipeStep",
    "RenameError", "RewriteRule", "SubstitutionError", "TraceEdit", "apply_edits",
    "apply_formula_manipulation", "apply_insert_delete", "apply_paraphrase", "apply_presentation",
    "apply_substitution", "apply_tmmt", "apply_variation_of_subject", "derive_seed",
    "entity_token_count", "fm_rules", "full_rename", "generate_pair", "generate_pair_traced",
    "id_library", "load_lexicon", "load_recipes", "load_rules", "manipulate_document",
    "map_position", "mirror_relation", "numerically_equivalent", "one_step_rewrites",
    "parse_recipe", "passages", "present_document", "rename_identifiers", "resolve_substitutions", "rule_sites",
    "substitute_document",
]
