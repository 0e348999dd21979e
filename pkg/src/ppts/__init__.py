"""Privacy-preserving tabu search for distributed graph coloring."""
from .attack import boundary_instance, empirical_adversary, lemma1_probs
from .bench import ExperimentSpec, chromatic_search, run_sweep
from .errors import CryptoError, ParameterError, ProtocolAbort, PPTSError, TranscriptParseError
from .graph import (Coloring, PartitionedGraph, example_graph, generate_partitioned_graph,
                    read_graph, total_conflicts, write_graph)
from .metrics import RunMetrics, verify_cost_model
from .paillier import decrypt, encrypt, keygen
from .protocol import ProtocolConfig, run_ppts
from .secure_conflict import secure_conflict_computation
from .tabu import SolveOutcome, Status, tabucol_solve
from .transcript import ProtocolTranscript, scan_views

__all__ = [
    "Coloring", "CryptoError", "ExperimentSpec", "PPTSError", "ParameterError",
    "PartitionedGraph", "ProtocolAbort", "ProtocolConfig", "ProtocolTranscript", "RunMetrics",
    "SolveOutcome", "Status", "TranscriptParseError", "boundary_instance", "chromatic_search",
    "decrypt", "empirical_adversary", "encrypt", "example_graph", "generate_partitioned_graph",
    "keygen", "lemma1_probs", "read_graph", "run_ppts", "run_sweep", "scan_views",
    "secure_conflict_computation", "tabucol_solve", "total_conflicts", "verify_cost_model",
    "write_graph"
]
