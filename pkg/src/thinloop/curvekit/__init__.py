"""Sampled curves: synthesis, arclength, self-overlap and arc decomposition."""
from .curves import (Arc, ArclengthParam, CurveError, CurveSpec, SampledCurve, arclength_table,
                     compose, concat, constant_curve, resample, reverse)
from .decompose import (ArcDecomposition, ResolutionError, StratumInterval, check_invariants,
                        decompose, word_of)
from .overlap import OverlapIndex, self_overlap_bruteforce, self_overlap_index
from .synth import synth_curve
from .io import (CONNECTION_FORMAT, CURVE_FORMAT, SchemaError, curve_from_dict, curve_to_dict, load_connection,
                 load_curve, load_spec, save_connection, save_curve, spec_from_dict, spec_to_dict)
