"""
Q-Learning Handover Agent
Serving-cell decisions along a known drone route: reward tensor, epsilon-greedy
Q-learning, policy extraction, strongest-cell baseline and an exact DP oracle
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, model_validator

from config.global_config import GlobalConfig, ExplorationMode
from simulator.errors import ArgumentError, DegenerateRouteError
from simulator.services.radio_map import RsrpGrid, ranked_cells
from simulator.services.trajectory import Trajectory

logger = logging.getLogger(__name__)


class HyperParams(BaseModel):
    """Learning and reward parameters for one training run"""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    alpha: float = Field(0.5, gt=0.0, le=1.0, description="Learning rate")
    discount: float = Field(
        0.3, ge=0.0, lt=1.0, validation_alias=AliasChoices("discount", "lambda"),
        description="Discount factor",
    )
    epsilon: float = Field(0.2, ge=0.0, le=1.0, description="Exploration coefficient")
    episodes: int = Field(1000, ge=0, description="Number of training episodes")
    w_ho: float = Field(1.0, ge=0.0, description="Weight of the handover cost")
    w_rsrp: float = Field(1.0, ge=0.0, description="Weight of the serving-cell RSRP")
    k: int = Field(3, ge=1, description="Candidate cells per waypoint")
    exploration: ExplorationMode = Field(ExplorationMode.LITERAL, description="Meaning of epsilon")

    @model_validator(mode="after")
    def _check_weights(self) -> "HyperParams":
        if self.w_ho + self.w_rsrp <= 0:
            raise ValueError("w_ho and w_rsrp must not both be zero")
        return self

    @classmethod
    def default(cls, **overrides: Any) -> "HyperParams":
        values = dict(GlobalConfig.LEARNING_CONFIG)
        values.update(overrides)
        return cls(**values)

    @property
    def conventional_epsilon_greedy(self) -> bool:
        return self.exploration is ExplorationMode.CONVENTIONAL

    def with_weights(self, w_ho: float, w_rsrp: float) -> "HyperParams":
        return HyperParams(**{**self.model_dump(), "w_ho": w_ho, "w_rsrp": w_rsrp})


@dataclass(frozen=True, eq=False)
class CandidateTable:
    """Row i holds the k strongest cells at waypoint i, strongest first"""

    cell_ids: np.ndarray
    norm_rsrp: np.ndarray
    raw_dbm: np.ndarray

    def __post_init__(self):
        for name in ("cell_ids", "norm_rsrp", "raw_dbm"):
            getattr(self, name).setflags(write=False)

    @property
    def num_waypoints(self) -> int:
        return self.cell_ids.shape[0]

    @property
    def k(self) -> int:
        return self.cell_ids.shape[1]


@dataclass(frozen=True, eq=False)
class Policy:
    """Chosen candidate rank per waypoint, resolved to cells when candidates are known"""

    ranks: np.ndarray
    cell_ids: Optional[np.ndarray] = None
    norm_rsrp: Optional[np.ndarray] = None
    raw_dbm: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.ranks.shape[0]

    @property
    def ho_flags(self) -> np.ndarray:
        """True at waypoint i when its cell differs from waypoint i - 1"""
        if self.cell_ids is None:
            raise ArgumentError("Policy was built without a candidate table")
        flags = np.zeros(len(self), dtype=bool)
        flags[1:] = self.cell_ids[1:] != self.cell_ids[:-1]
        return flags

    @property
    def ho_count(self) -> int:
        return int(self.ho_flags.sum())


@dataclass
class TrainingStats:
    """Per-episode bookkeeping of the visited path"""

    episode_returns: np.ndarray
    discounted_returns: np.ndarray
    greedy_choices: int = 0
    random_choices: int = 0
    seconds: float = 0.0

    @property
    def updates(self) -> int:
        return self.greedy_choices + self.random_choices


def build_candidates(grid: RsrpGrid, trajectory: Trajectory, k: int) -> CandidateTable:
    if k < 1 or k > grid.num_cells:
        raise ArgumentError(f"k={k} outside [1, {grid.num_cells}]")
    ids, norms, raws = [], [], []
    for x, y in trajectory.waypoints:
        order, norm, raw = ranked_cells(grid, x, y)
        ids.append(order[:k])
        norms.append(norm[:k])
        raws.append(raw[:k])
    return CandidateTable(np.array(ids, dtype=np.int64), np.array(norms), np.array(raws))


def build_reward(candidates: CandidateTable, w_ho: float, w_rsrp: float) -> Tuple[np.ndarray, np.ndarray]:
    """Reward tensor R[i, p, q] = w_rsrp * RSRP[i+1, q] - w_ho * HO[i, p, q] and the HO indicator"""
    if candidates.num_waypoints < 2:
        raise DegenerateRouteError("A route needs at least two waypoints to take handover decisions")
    current = candidates.cell_ids[:-1, :, None]
    following = candidates.cell_ids[1:, None, :]
    ho = (current != following).astype(np.int8)
    reward = w_rsrp * candidates.norm_rsrp[1:, None, :] - w_ho * ho
    return reward, ho


def _check_table(table: np.ndarray) -> None:
    if table.ndim != 3 or table.shape[1] != table.shape[2] or table.shape[0] < 1:
        raise ArgumentError(f"Expected a (transitions, k, k) table, got shape {table.shape}")


def _updated_value(current: float, reward: float, future: float, alpha: float, discount: float) -> float:
    return (1.0 - alpha) * current + alpha * reward + alpha * discount * future


def q_update(q: np.ndarray, reward: np.ndarray, i: int, j: int, j_new: int, alpha: float, discount: float) -> float:
    """One in-place Q-value update; the last transition has no future term"""
    future = float(q[i + 1, j_new].max()) if i + 1 < q.shape[0] else 0.0
    q[i, j, j_new] = _updated_value(float(q[i, j, j_new]), float(reward[i, j, j_new]), future, alpha, discount)
    return float(q[i, j, j_new])


def run_training(reward: np.ndarray, hp: HyperParams, seed: Optional[int] = None) -> Tuple[np.ndarray, TrainingStats]:
    """Q-table initialised to the reward tensor and refined over hp.episodes passes along the route"""
    _check_table(reward)
    started = time.perf_counter()
    num_transitions, k, _ = reward.shape
    rng = np.random.default_rng(seed)
    alpha, discount, epsilon = hp.alpha, hp.discount, hp.epsilon
    literal = hp.exploration is ExplorationMode.LITERAL

    # nested lists keep the per-step work in plain floats
    q = reward.tolist()
    r = reward.tolist()
    ranks = range(k)
    returns = np.zeros(hp.episodes)
    discounted = np.zeros(hp.episodes)
    greedy_choices = 0

    for episode in range(hp.episodes):
        draws = rng.random(num_transitions).tolist()
        picks = rng.integers(0, k, num_transitions).tolist()
        j = 0
        total = 0.0
        total_discounted = 0.0
        weight = 1.0
        for i in range(num_transitions):
            row = q[i][j]
            greedy = epsilon > draws[i] if literal else draws[i] >= epsilon
            if greedy:
                j_new = max(ranks, key=row.__getitem__)
                greedy_choices += 1
            else:
                j_new = picks[i]
            future = max(q[i + 1][j_new]) if i + 1 < num_transitions else 0.0
            step_reward = r[i][j][j_new]
            row[j_new] = _updated_value(row[j_new], step_reward, future, alpha, discount)
            total += step_reward
            total_discounted += weight * step_reward
            weight *= discount
            j = j_new
        returns[episode] = total
        discounted[episode] = total_discounted

    stats = TrainingStats(
        episode_returns=returns,
        discounted_returns=discounted,
        greedy_choices=greedy_choices,
        random_choices=hp.episodes * num_transitions - greedy_choices,
        seconds=time.perf_counter() - started,
    )
    return np.array(q, dtype=float), stats


def train(reward: np.ndarray, hp: HyperParams, seed: Optional[int] = None) -> np.ndarray:
    q, _ = run_training(reward, hp, seed)
    return q


def greedy_ranks(q: np.ndarray) -> np.ndarray:
    """Start on rank 0 and follow the largest Q-value, ties to the lower rank"""
    _check_table(q)
    ranks = np.zeros(q.shape[0] + 1, dtype=np.int64)
    for i in range(q.shape[0]):
        ranks[i + 1] = int(np.argmax(q[i, ranks[i]]))
    return ranks


def policy_from_ranks(ranks: Sequence[int], candidates: Optional[CandidateTable] = None) -> Policy:
    ranks = np.asarray(ranks, dtype=np.int64)
    if candidates is None:
        return Policy(ranks)
    if ranks.shape[0] != candidates.num_waypoints:
        raise ArgumentError(f"{ranks.shape[0]} ranks for {candidates.num_waypoints} waypoints")
    rows = np.arange(ranks.shape[0])
    return Policy(
        ranks,
        candidates.cell_ids[rows, ranks],
        candidates.norm_rsrp[rows, ranks],
        candidates.raw_dbm[rows, ranks],
    )


def extract_policy(q: np.ndarray, candidates: CandidateTable) -> Policy:
    return policy_from_ranks(greedy_ranks(q), candidates)


def baseline_policy(candidates: CandidateTable) -> Policy:
    """Always the strongest cell"""
    return policy_from_ranks(np.zeros(candidates.num_waypoints, dtype=np.int64), candidates)


def policy_return(reward: np.ndarray, ranks: Sequence[int], discount: float) -> float:
    """Discounted return of following ranks from waypoint 0"""
    _check_table(reward)
    ranks = np.asarray(ranks, dtype=np.int64)
    steps = np.arange(reward.shape[0])
    rewards = reward[steps, ranks[:-1], ranks[1:]]
    return float(np.sum(rewards * discount ** steps))


def fixed_point_q(reward: np.ndarray, discount: float) -> np.ndarray:
    """Q*[i, p, q] = R[i, p, q] + discount * max_v Q*[i + 1, q, v], zero beyond the last transition"""
    _check_table(reward)
    q = np.empty_like(reward, dtype=float)
    future = np.zeros(reward.shape[1])
    for i in reversed(range(reward.shape[0])):
        q[i] = reward[i] + discount * future[None, :]
        future = q[i].max(axis=1)
    return q


def dp_optimal(
    reward: np.ndarray,
    discount: float,
    candidates: Optional[CandidateTable] = None,
) -> Tuple[Policy, float]:
    """Backward induction over the deterministic route; returns the policy and V[0][rank 0]"""
    q_star = fixed_point_q(reward, discount)
    policy = policy_from_ranks(greedy_ranks(q_star), candidates)
    return policy, float(q_star[0, 0].max())


# CSV interfaces

def write_q_table_csv(q: np.ndarray, path: Union[str, Path]) -> Path:
    """transition,from_rank,to_rank,q_value"""
    if q.ndim != 3:
        raise ArgumentError(f"Expected a (transitions, k, k) table, got shape {q.shape}")
    t, p, n = np.meshgrid(*(np.arange(s) for s in q.shape), indexing="ij")
    pd.DataFrame({
        "transition": t.ravel(),
        "from_rank": p.ravel(),
        "to_rank": n.ravel(),
        "q_value": q.ravel(),
    }).to_csv(path, index=False)
    return Path(path)


def write_policy_csv(policy: Policy, trajectory: Trajectory, path: Union[str, Path]) -> Path:
    """waypoint,x_m,y_m,cell_id,rank,norm_rsrp,raw_dbm,ho_flag"""
    pd.DataFrame({
        "waypoint": np.arange(len(policy)),
        "x_m": trajectory.waypoints[:, 0],
        "y_m": trajectory.waypoints[:, 1],
        "cell_id": policy.cell_ids,
        "rank": policy.ranks,
        "norm_rsrp": policy.norm_rsrp,
        "raw_dbm": policy.raw_dbm,
        "ho_flag": policy.ho_flags.astype(int),
    }).to_csv(path, index=False)
    return Path(path)


@dataclass
class HandoverPlan:
    """Everything produced for one route"""

    candidates: CandidateTable
    reward: Optional[np.ndarray]
    ho_indicator: Optional[np.ndarray]
    q_table: Optional[np.ndarray]
    proposed: Policy
    baseline: Policy
    stats: Optional[TrainingStats] = None


class QLearningHandoverAgent:
    """
    Plans serving cells for known routes with tabular Q-learning.

    One agent may plan many routes; each call owns its own Q-table.
    """

    def __init__(self, hp: Optional[HyperParams] = None):
        self.hp = hp or HyperParams.default()
        self.metrics: Dict[str, Any] = {
            "routes_planned": 0,
            "episodes_run": 0,
            "updates_applied": 0,
            "training_seconds": 0.0,
        }
        logger.debug(f"Q-learning agent ready: {self.hp.model_dump()}")

    def fit(self, reward: np.ndarray, seed: Optional[int] = None) -> Tuple[np.ndarray, TrainingStats]:
        q, stats = run_training(reward, self.hp, seed)
        self.metrics["episodes_run"] += self.hp.episodes
        self.metrics["updates_applied"] += stats.updates
        self.metrics["training_seconds"] += stats.seconds
        return q, stats

    def plan(self, grid: RsrpGrid, trajectory: Trajectory, seed: Optional[int] = None) -> HandoverPlan:
        candidates = build_candidates(grid, trajectory, self.hp.k)
        baseline = baseline_policy(candidates)
        self.metrics["routes_planned"] += 1
        if candidates.num_waypoints < 2:
            return HandoverPlan(candidates, None, None, None, baseline, baseline)

        reward, ho = build_reward(candidates, self.hp.w_ho, self.hp.w_rsrp)
        q, stats = self.fit(reward, seed)
        proposed = extract_policy(q, candidates)
        logger.debug(
            f"Planned {candidates.num_waypoints} waypoints in {stats.seconds:.3f}s: "
            f"{proposed.ho_count} HOs vs {baseline.ho_count} baseline"
        )
        return HandoverPlan(candidates, reward, ho, q, proposed, baseline, stats)

    def get_metrics(self) -> Dict[str, Any]:
        return dict(self.metrics)
