"""Fault-tolerant cluster-state memories under biased Pauli noise.

Simulates the RHG and bias-tailored XZZX 3D cluster states with
circuit-level and phenomenological biased noise, decodes syndromes with an
exact minimum-weight perfect-matching decoder, and estimates thresholds by
finite-size-scaling fits.
"""

from .pauli import GateRef, PauliFrame, commutes, compose, conjugate_through, frame
from .lattice import (CellCheck, Lattice, LogicalMembrane, QubitSpec, build,
                      build_rhg, build_xzzx, check_operator, schedule)
from .noise import (FaultEvent, NoiseParams, channel_table, enumerate_events,
                    invert_pcz, params_for_total, sample_faults, total_gate_error)
from .propagation import FlipFrame, Syndrome, logical_flips, propagate, syndrome
from .oracle import Tableau, is_stabilizer, prepare_cluster, propagate_exact, verify_chain
from .decoder import (DecodingGraph, InvariantViolationError, MatchingResult,
                      build_graph, decode_trial, match, pair_weights)
from .matching import min_weight_perfect_matching
from .experiment import PointEngine, SweepConfig, SweepRecord, run_point, run_sweep
from .fitting import FitResult, bootstrap_sigma, fit_threshold

__all__ = [
    "GateRef", "PauliFrame", "commutes", "compose", "conjugate_through", "frame",
    "CellCheck", "Lattice", "LogicalMembrane", "QubitSpec", "build", "build_rhg",
    "build_xzzx", "check_operator", "schedule",
    "FaultEvent", "NoiseParams", "channel_table", "enumerate_events", "invert_pcz",
    "params_for_total", "sample_faults", "total_gate_error",
    "FlipFrame", "Syndrome", "logical_flips", "propagate", "syndrome",
    "Tableau", "is_stabilizer", "prepare_cluster", "propagate_exact", "verify_chain",
    "DecodingGraph", "InvariantViolationError", "MatchingResult", "build_graph",
    "decode_trial", "match", "pair_weights",
    "min_weight_perfect_matching",
    "PointEngine", "SweepConfig", "SweepRecord", "run_point", "run_sweep",
    "FitResult", "bootstrap_sigma", "fit_threshold",
]

__version__ = "0.1.0"
