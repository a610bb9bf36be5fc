"""Sign-rank tools for graphs: generators, rank bounds and cutoff-augmented autoencoders."""

from .errors import InvalidArgument, ParseError, SizeLimitError, TrainingDiverged
from .graphs import (
    Graph, SignPattern, chain_of_cycles, cycle_graph, grid_graph, load_graph, read_edge_list,
    save_graph, star_graph, to_dot, write_edge_list,
)
from .lowrank import SweepConfig, sweep_generate, trig_embedding_rank2, trig_embedding_rank3
from .metrics import RunRecord, faithful, log_norm_distance, sign_errors
from .model import ArchitectureSpec, Model, ModelParams, architecture
from .rank import (
    RankCertificate, complex_star_embedding, dimension_lower_bound, largest_induced_star,
    matrix_rank, rank2_realizability_oracle, sign_of, star_rank_lower_bound, verify_embedding,
)
from .train import TrainConfig, train

__version__ = "0.1.0"
