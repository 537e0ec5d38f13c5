"""Entanglement transfer from two-mode continuous-variable resources to a pair of qubits.

The resource enters only through its covariance matrix.  Fock-basis
coefficients follow from it by a convergent series or by quadrature, the
qubit state follows from Jaynes-Cummings evolution, and a brute-force
Fock-space path is kept alongside for cross-checking.
"""

from .errors import (
    ConsistencyError,
    CutoffError,
    DomainError,
    NumericError,
    ParameterError,
    SamplingError,
    TransferError,
    TruncationError,
    TruncationWarning,
)
from .gamma_engine import Cutoffs, GammaTable, build_table
from .gaussian_core import (
    CovarianceMatrix,
    ResourceParams,
    StandardForm,
    SymplecticOp,
    dissipate,
    is_entangled,
    make_squeezed_thermal_bs,
    make_tmsv,
    nu_minus,
    to_standard_form,
)
from .nongaussian import SubtractionSpec, formal_subtract, max_transfer, physical_subtract
from .results import ResultTable, __version__
from .transfer import QubitXState, TransferCurve, assemble_state, negativity, transfer_curve

__all__ = [
    "ConsistencyError",
    "CovarianceMatrix",
    "CutoffError",
    "Cutoffs",
    "DomainError",
    "GammaTable",
    "NumericError",
    "ParameterError",
    "QubitXState",
    "ResourceParams",
    "ResultTable",
    "SamplingError",
    "StandardForm",
    "SubtractionSpec",
    "SymplecticOp",
    "TransferCurve",
    "TransferError",
    "TruncationError",
    "TruncationWarning",
    "__version__",
    "assemble_state",
    "build_table",
    "dissipate",
    "formal_subtract",
    "is_entangled",
    "make_squeezed_thermal_bs",
    "make_tmsv",
    "max_transfer",
    "negativity",
    "nu_minus",
    "physical_subtract",
    "to_standard_form",
    "transfer_curve",
]
