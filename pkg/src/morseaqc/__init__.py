"""Morse-theoretic analysis of adiabatic Hamiltonian paths.

From a Hermitian family H(s) the package derives the spectral landscape
f(s, lam) = det(H(s) - lam I), locates and classifies its critical
points, integrates the downward gradient flow into a GF(2) chain complex
with Betti numbers and Euler characteristic, and extracts the local
curvature quantities (principal curvatures, Dupin gap model, tunneling
delay factor, Gauss-Bonnet budget) that govern the severity of avoided
crossings along the evolution.
"""

__version__ = "0.1.0"

from .errors import (AnalysisStageError, DegenerateCriticalPointError,
                     DivergentDelayError, DomainError, InternalConsistencyError,
                     InvalidArgumentError, MorseAqcError, NoIntersectionError,
                     NonCertifiableError, PerturbationTooLargeError)
from .operators import (Coefficient, HamiltonianPath, HermitianOperator, SpinSector,
                        affine_coefficient, build_grover_reduced, build_pspin,
                        build_spin_operators, eigenvalues, evaluate, zero_path)
from .landscape import (CensusConfig, CharPolyField, CriticalCensus, CriticalPoint,
                        ExplicitField, LandscapeField, PerturbedField, Window,
                        detect_kfold, field_value, find_critical_points, gradient,
                        hessian, perturb_split, polynomial_field, window_from_path)
from .morse import (FlowControl, HomologySummary, InstantonEdge, InstantonTally,
                    MorseComplex, Trajectory, build_complex, count_instantons,
                    critical_network, homology, integrate_flow, separatrices)
from .geometry import (CurvatureReport, DupinParams, GaussBonnetResult,
                       SpectrumBranch, curvature_report, delay_factor,
                       delay_factor_closed_form, dupin_gap, gauss_bonnet_integral,
                       gauss_curvature, principal_curvatures, spectrum_trace)
from .pspin import (BSweepRecord, ClassicalEnergy, HomotopyVerdict, TransitionEvent,
                    b_sweep, classical_minimizer, homotopy_check, transition_locator)
from .analysis import (AnalysisConfig, AnalysisReport, Tolerances, compare_reports,
                       run_analysis, write_report_files, write_sweep_csv)
from . import fields

__all__ = [name for name in dir() if not name.startswith("_")]
