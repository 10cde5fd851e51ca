"""Order-by-order integrability tests and R-matrix series for spin chains."""
__version__ = "0.1.0"

from .bootstrap import (bootstrap_to_order, higher_condition_solve, reshetikhin_lhs, reshetikhin_test,
                        solve_shift_constant, verify_truncated)
from .charges import (boost_ladder_check, conformal_superops, poincare_demo, three_local_charge,
                      transfer_charges)
from .errors import YbebError
from .general import build_gRc_system, solve_gRc, verify_gRc_operator
from .kennedy import candidate_current, generalized_inversion, invert_divergence, verify_divergence
from .models import MODEL_NAMES, spin_half_classify, zoo
from .opalg import DenseOperator, PositionedOperatorSum, ShiftPolyOperator, embed, partial_trace_normalized, tensor
from .subasis import CouplingSpec, build_hamiltonian, gellmann_basis, pauli_basis, structure_constants

__all__ = [
    "CouplingSpec", "DenseOperator", "MODEL_NAMES", "PositionedOperatorSum", "ShiftPolyOperator", "YbebError",
    "boost_ladder_check", "bootstrap_to_order", "build_gRc_system", "build_hamiltonian", "candidate_current",
    "conformal_superops", "embed", "gellmann_basis", "generalized_inversion", "higher_condition_solve",
    "invert_divergence", "partial_trace_normalized", "pauli_basis", "poincare_demo", "reshetikhin_lhs",
    "reshetikhin_test", "solve_gRc", "solve_shift_constant", "spin_half_classify", "structure_constants",
    "tensor", "three_local_charge", "transfer_charges", "verify_divergence", "verify_gRc_operator",
    "verify_truncated", "zoo",
]
