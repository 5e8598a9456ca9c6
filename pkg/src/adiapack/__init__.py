"""Semiclassical wave packets for vector NLS equations with matrix potentials.

The package propagates the exact semiclassical vector nonlinear Schrödinger
equation, builds moving wave-packet approximations polarized along smoothly
tracked eigenvector frames, and measures how the approximation error scales
with the semiclassical parameter ε, including two-packet superpositions.

Submodules:

- `grids`        periodic grids, spectral derivatives, scaled norms
- `expressions`  the small expression language for potential entries
- `potentials`   matrix potentials, branch tracking, projector calculus
- `classical`    branch Hamiltonian trajectories and the action integral
- `envelope`     the ε-free profile equation
- `eigenframe`   parallel-transported frames and coupling coefficients
- `corrections`  scalar branch propagators and driven off-mode corrections
- `nls`          the full vector NLS split-step solver
- `experiments`  ansatz assembly, error reports, ε-sweeps, superposition
- `config`/`cli` JSON experiment configs and the command-line driver
- `bench`        opt-in micro-benchmarks for the spectral kernels
"""

from .grids import (SpatialGrid, ScalarField, VectorField, SigmaNormReport,
                    make_grid, spectral_derivative, sigma_norm, l2_norm)
from .expressions import Expr, ParseError, parse_expr
from .potentials import (MatrixPotentialSpec, SpectralData, decompose,
                         evaluate_potential, gap_report, gamma,
                         projector_identity_residuals, growth_scan)
from .classical import BranchCurve, ClassicalTrajectory, integrate_trajectory
from .envelope import EnvelopeState, solve_envelope, envelope_moments
from .eigenframe import (EigenFrame, k_matrix, transport_frame, frame_at,
                         parallel_residual, coupling_coefficients,
                         coupling_profile, initial_frame)
from .corrections import (ScalarPropagator, scalar_step, solve_correction,
                          assemble_correction, averaging_probe)
from .nls import (FieldState, build_initial_data, step_nls, solve_nls,
                  mode_populations, NLSPropagator)
from .experiments import (PacketSpec, AnsatzBundle, assemble_ansatz,
                          taylor_residual, error_report, fit_order,
                          run_single_packet, convergence_study,
                          superposition_experiment, make_profile)

__version__ = "0.1.0"
