"""State tomography of ensemble qubits under imperfect, lossy and inhomogeneous rotations."""

from .calibration import (
    SuperopExpansion,
    TomographySetting,
    design_superop,
    ensemble_superop,
    expand_superop,
    make_setting,
    population_rows,
    two_qubit_superop,
)
from .dynamics import (
    CollapseOperator,
    ConvergenceError,
    DetunedRotation,
    Ideal,
    PulseSpec,
    ThreeLevelLambda,
    lindblad_rhs,
    propagate,
    propagate_superop,
)
from .ensemble import DiracDelta, Discrete, Gaussian, Lorentzian, SampleSet, moment, sample
from .qcore import coeffs_to_density, density_to_coeffs, fidelity, kron, pauli
from .reconstruction import (
    MeasurementRecord,
    RankDeficient,
    ReconstructionResult,
    assemble_system,
    psd_project,
    reconstruct_correlated,
    solve,
)
from .rotations import RotationSpec, analytic_superop, apply_superop, rotation_matrix

__version__ = "0.1.0"
