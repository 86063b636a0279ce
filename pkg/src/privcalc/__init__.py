"""Privilege calculus: an employment algebra, fact-driven conditions,
privileges with normal and pulsed forms, the PAL policy language, and
compliance queries over arrangements.

All values are immutable; operations return new values, so everything
here is safe to share across threads.
"""

__version__ = "0.1.0"

from .algebra import (
    Category,
    EMPTY_EMPLOYMENT,
    Employment,
    EmploymentSet,
    Entity,
    EntitySet,
    FunctionSymbol,
    UNIVERSAL,
    compose_sets,
    expand,
    merge_employment,
    merge_sets,
    restrict,
)
from .errors import PrivCalcError, SourceError
from .facts import (
    ALWAYS,
    Condition,
    ConditionReport,
    DeclarationError,
    EvaluationError,
    Fact,
    FactFamily,
    FalseCondition,
    FamilyReport,
    HighOrderCondition,
    NEVER,
    Statement,
    TableCondition,
    TrueCondition,
    UnsupportedConditionError,
    WitnessCondition,
    close_family,
    eval_condition,
    evidences,
    load_facts,
    minimum_evidences,
    table_condition,
    verify_condition_axiom,
    verify_family,
)
from .privilege import (
    Arrangement,
    ArrangementError,
    Coefficient,
    ConditionMergeMode,
    NormalForm,
    Privilege,
    PrivilegeAtom,
    PulsedForm,
    TraceMatrix,
    atomic_arrangement,
    compliance_condition,
    compliant,
    compose,
    congruence_condition,
    congruent,
    merge,
    normal_form,
    pulse,
    structural_eq,
    trace,
)
from .pal import (
    Define,
    ExprNode,
    Guard,
    GuardOp,
    LetIs,
    LexError,
    Name,
    Namespace,
    ParseError,
    Product,
    Program,
    Slash,
    StatementNode,
    Sum,
    Token,
    TokenKind,
    format_expr,
    format_node,
    format_program,
    parse,
    parse_expression,
    parse_text,
    tokenize,
)
from .engine import (
    ComplianceQuery,
    Environment,
    EquivalenceQuery,
    EvalQuery,
    NormalFormQuery,
    PulseQuery,
    QueryResult,
    RbacImportError,
    RbacModel,
    ResolutionError,
    ScenarioReport,
    TraceQuery,
    arrangement_from_text,
    eval_expr,
    eval_text,
    import_rbac,
    load_arrangement,
    load_program,
    load_rbac,
    run_scenario,
)
from .cli import main

__all__ = [name for name in dir() if not name.startswith("_")]
