"""Solution families of homogeneous discrete-time algebraic Riccati equations.

Nonsingular solutions of ``Q = A'QA - A'QB (R + B'QB)^{-1} B'QA`` are
inverses of Stein solutions ``A P A' - P = B R^{-1} B'``; every Stein
solution and every ``A``-invariant subspace together give one (possibly
singular) Riccati solution.  The package enumerates these families, checks
candidate solutions, and detects solutions that lie outside all families.
"""

from .errors import (HareError, IndefiniteInnerTerm, InvalidInput,
                     NoSteinSolution, NumericalBreakdown, PreconditionViolated,
                     SingularInput)
from .matrixcore import (DEFAULT_TOL, Affine, Inconsistent, MatrixOperator,
                         TolerancePolicy, Unique, orthogonal_complement,
                         orthonormal_basis, projector, solve_vectorized,
                         sym_kernel, sym_pinv)
from .spectral import (Completeness, InvariantLattice, SpectrumReport, Subspace,
                       analyze_spectrum, check_invariant,
                       enumerate_invariant_subspaces, is_reachable)
from .steinriccati import (Classification, FamilySolution, HareProblem,
                           SteinSolutionSet, Verdict, classify_solution,
                           default_delta_samples, enumerate_families,
                           families_cover_all_solutions, family_solution,
                           hare_residual, is_solution, riccati_to_stein,
                           smw_gap, solve_stein_set, solves_stein,
                           stein_residual, stein_to_riccati)

__version__ = "0.1.0"
