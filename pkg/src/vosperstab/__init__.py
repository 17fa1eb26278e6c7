"""Regularity-lemma toolkit and stability checks for popular doubling in Z/pZ."""
__version__ = "0.1.0"

from .config import DEFAULT, Caps, Config, Tolerances  # noqa: E402
from .errors import (BoundViolation, CapExceeded, GrowthOverflow, ModulusTooSmall, NotIndependent,  # noqa: E402
                     ParseError, PreconditionError, VosperError)
from .fourier import DensityFunction, Spectrum, convolve, dft, idft, inner, lp_norm, u2_norm  # noqa: E402
from .growth import GrowthFunction  # noqa: E402
from .decomposition import Decomposition  # noqa: E402
from .partition import CellPartition, PreCharacter, baby_arl, conditional_expectation, uniformize  # noqa: E402
from .torus import GridFunction, TorusHom, TrigPolynomial, fejer_kernel, smooth  # noqa: E402
from .lattice import (IntegerMatrix, RelationVector, bounded_bezout, complete_matrix, find_relation,  # noqa: E402
                      reduce_dimension)
from .arl import final_arl, intermediate_arl  # noqa: E402
from .checks import check_decomposition  # noqa: E402
from .vosper import (ArithmeticProgression, ParameterLedger, ResidueSet, VerificationReport, VerifyConfig,  # noqa: E402
                     ap_cover, ap_fourier_coefficient, bohr_set, build_set_C, parameter_ledger, popular_doubling,
                     popularity_transfer_check, sine_identity_check, sumset, verify_theorem)
