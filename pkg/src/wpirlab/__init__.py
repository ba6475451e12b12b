"""Weakly-private information retrieval lab.

Capacity-achieving PIR base schemes (replicated, MDS-coded, T-collusion),
a time-sharing WPIR wrapper over them, analytic and empirical leakage
calculators, rate-privacy trade-off sweeps, and a client/server harness.
"""

from .core import (AnswerString, FileLibrary, PirSetting, QueryToken,
                   RetrievalTranscript, Tag, Variant, capacity,
                   generate_library, mds, query_class_of, replicated,
                   tcollusion, transcript_download_bits)
from .galois import Field, FieldElement, binary_field, default_field, ff_inv, ff_mul, prime_field
from .leakage import (LeakageReport, analytic_maxl, analytic_mil, base_privacy_check,
                      empirical_class_pmf, empirical_maxl, empirical_mil, leakage_report)
from .tradeoff import (TradeoffPoint, numeric_dist_search, optimal_dist_for_budget,
                       saturation, sweep_curve, theorem_tradeoff)
from .wpir import (MPrimeDistribution, SuperSegmentation, WpirRandomness, point_mass,
                   sample_m_prime, super_segment_map, two_point, wpir_answer,
                   wpir_decode, wpir_query, wpir_rate)

__all__ = [name for name in dir() if not name.startswith("_")]
