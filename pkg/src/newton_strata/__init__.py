"""Newton strata of sigma-conjugacy classes in loop groups of split classical groups.

Exact arithmetic over F_q((z)) truncated series, root data of GL, SL, Sp and
SO, the poset of Newton points below a coweight, certified Newton points of
matrices, constructive sigma-linear algebra, and seeded sampling experiments.
"""

from .errors import (CertificationFailed, DomainError, InternalError, NewtonStrataError, NoConvergence,
                     NotFound, ParseError, PrecisionExhausted)
from .fields import FFElem, FiniteField, field_for, finite_field
from .series import Precision, TruncatedSeries
from .matrix import SeriesMatrix, elementary, permutation_matrix
from .rootdatum import GroupType, RootDatum, build_root_datum, dominant_sort, kottwitz_class, leq_dominance
from .poset import (NewtonPoint, NewtonPoset, break_points, codimension, defect, delta, enumerate_poset,
                    is_newton_point, leq, make_newton_point, maximal_chains, mazur_nonempty, nu_break_max,
                    pr_compare)
from .sigma import (ExtendedWeylElem, HNData, effective_isogeny, hn_filtration, hn_normalize, hodge_point,
                    kottwitz_point, lang_normalize, newton_point, sigma_conj_solve, sigma_conjugate,
                    weyl_representative)
from .explorer import (CensusReport, PencilResult, SampleConfig, WitnessResult, chain_realization,
                       find_witness, pencil_generic_newton, stratum_census)
from .serialize import parse_matrix_file, serialize_matrix

__version__ = "0.1.0"
