from .bundle import BUNDLE_FORMAT, load_bundle, save_bundle
from .cluster import (ClusterResult, cluster_information_sets,
                      collect_context_vectors, kmeans_labels)
from .oracles import (oracle_decision_tree_depth, oracle_exhaustive_eval,
                      oracle_injective_hint_map, uniform_random_decide)
from .rollout import (EVAL_SEED_BASE, PolicyBundle, Rollout, evaluate,
                      global_key, learner_key)
from .scripted import ScriptedGuessingConvention
from .tables import (Choice, MessageStrategy, NextInfo, QHeads, StepRecord,
                     TdLog, TrainEpisode, select_action, select_message,
                     sync_targets, vdn_td_update)
from .train import (CurvePoint, DirectResult, FullObsResult, LearnerConfig,
                    ShuffleStudy, TrainResult, fine_tune, pretrain_direct,
                    shuffle_embedding_study, train_baseline, train_full_obs,
                    train_icp_rm)

__all__ = [
    "BUNDLE_FORMAT", "load_bundle", "save_bundle",
    "ClusterResult", "cluster_information_sets", "collect_context_vectors",
    "kmeans_labels",
    "oracle_decision_tree_depth", "oracle_exhaustive_eval",
    "oracle_injective_hint_map", "uniform_random_decide",
    "EVAL_SEED_BASE", "PolicyBundle", "Rollout", "evaluate", "global_key",
    "learner_key",
    "ScriptedGuessingConvention",
    "Choice", "MessageStrategy", "NextInfo", "QHeads", "StepRecord", "TdLog",
    "TrainEpisode", "select_action", "select_message", "sync_targets",
    "vdn_td_update",
    "CurvePoint", "DirectResult", "FullObsResult", "LearnerConfig",
    "ShuffleStudy", "TrainResult", "fine_tune", "pretrain_direct",
    "shuffle_embedding_study", "train_baseline", "train_full_obs",
    "train_icp_rm",
]
