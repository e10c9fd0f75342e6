"""Basketball interaction networks: low-key leader centrality and node2vec link prediction."""

from .centrality import (CentralityTable, PageRankParams, con_pair, con_scores,
                         low_key_leader_strengths, pagerank_adversarial, unity_normalize)
from .embedding import (EmbeddingMatrix, TrainConfig, WalkConfig, concat_features,
                        cosine_similarity, embed_graph, generate_walks, train_skipgram,
                        transition_distribution)
from .glm import FitResult, chi_square_sf, fit_logistic, normal_sf
from .graph import WeightedDigraph, read_edgelist, write_edgelist
from .ingest import (build_adversarial_network, build_blocking_network, build_passing_network,
                     load_records)
from .linkpred import (ExperimentAggregate, LabeledPairSet, build_blocking_dataset,
                       build_matchup_dataset, build_passing_dataset, node_similarity_report,
                       run_experiment)
from .ranking import hypothesis_check, quantile_report, rank_changes
from .synth import PlantedAffinityModel, generate_planted

__version__ = "0.1.0"
