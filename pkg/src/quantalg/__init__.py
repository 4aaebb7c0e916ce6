"""Exact order-by-order quantization of finite-dimensional Lie bialgebras."""

from .bialgebra import (
    InputError,
    LieBialgebra,
    SpecFileError,
    ValidationReport,
    builtin_bialgebra,
    load_bialgebra,
    parse_bialgebra,
    validate,
)
from .dumps import (
    diff_results,
    parse_change,
    parse_result,
    payload_equal,
    render_change,
    render_result,
)
from .friedrichs import (
    BasicSetPresentation,
    BasisChange,
    PrimitivizationError,
    classical_realization,
    perturb_basis,
    primitivize,
    primitivize_step,
)
from .quantizer import (
    DeformationResult,
    OrderDiagnostics,
    QuantizationObstruction,
    init_deformation,
    quantize,
    solve_commutator_order,
    solve_coproduct_order,
    verify_hopf,
)
from .series import (
    CommutatorTable,
    CoproductTable,
    Series,
    classical_table,
)

__all__ = [
    "BasicSetPresentation",
    "BasisChange",
    "CommutatorTable",
    "CoproductTable",
    "DeformationResult",
    "InputError",
    "LieBialgebra",
    "OrderDiagnostics",
    "PrimitivizationError",
    "QuantizationObstruction",
    "Series",
    "SpecFileError",
    "ValidationReport",
    "builtin_bialgebra",
    "classical_realization",
    "classical_table",
    "diff_results",
    "init_deformation",
    "load_bialgebra",
    "parse_bialgebra",
    "parse_change",
    "parse_result",
    "payload_equal",
    "perturb_basis",
    "primitivize",
    "primitivize_step",
    "quantize",
    "render_change",
    "render_result",
    "solve_commutator_order",
    "solve_coproduct_order",
    "validate",
    "verify_hopf",
]
