"""spanforge: span programs for read-once boolean formulas.

Construct, compose and numerically verify span programs for AND-OR (and
general small-gate) formulas: witness sizes, adversary bounds with costs,
program-graph norms and spectral certificates.
"""

__version__ = "0.1.0"

from .adversary import (CertificateReport, MinimaxResult, adv_closed_form_andor,
                        adv_formula, adv_minimax, load_certificate,
                        save_certificate, validate_adversary_matrix)
from .checks import (VerificationReport, check_balance_lemma,
                     check_canonical_premise, check_compose_lemma,
                     check_directsum_norm, check_gap_lemma, check_norm_lemma,
                     check_witness_bounds, run_lemma)
from .compose import ComposedProgram, compose_formula, direct_sum_compose
from .corpus import (balanced_andor, family_formula, random_andor, skew_andor,
                     verification_corpus)
from .errors import SpanforgeError
from .formula import (Constant, Formula, FormulaMetrics, GateNode, Leaf,
                      all_inputs, evaluate, expand_fanin2, metrics, normalize,
                      parse)
from .gates import GateRegistry, GateSpec, DEFAULT_REGISTRY
from .graphs import (AbsNorm, ProgramGraph, QueryEstimate, SpectralReport,
                     abs_norm, biadjacency, input_graph, query_estimate,
                     spectral_report, to_dot, zero_witness_exists)
from .nandtree import (CalibrationReport, NandFormula, NandTree,
                       build_nand_tree, calibrate_tree, to_nand_form, y_values)
from .oracles import (full_witness_size_at, max_witness_sizes_tree,
                      witness_size_at)
from .spanprog import (SpanProgram, WitnessResult, eval_span,
                       full_witness_size, make_and, make_or, make_passthrough,
                       max_witness_sizes, witness_report, witness_size)

__all__ = [name for name in dir() if not name.startswith("_")]
