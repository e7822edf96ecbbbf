"""The reinforcement-learning environment: reset with a problem, step with
action indices, and a validity mask over the action space.

Action indices 0..n_ops-1 are operators; n_ops+i is the problem's i-th
input.  Input positions past the problem's input count are "None actions":
always masked, and placing one yields an Absent leaf.  Masked actions are
permitted; they always lead to an output of "None" and reward 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import ComputeGraph, StructuralError
from .operators import Registry, default_registry
from .parsing import BpeCodec, Observation, Problem, encode_observation
from .values import ABSENT, EXPRESSION, free_symbols, is_subtype, render


@dataclass
class EnvConfig:
    n_inputs: int = 3
    max_nodes: int = 7
    encoded_observations: bool = False
    max_question_tokens: int = 128
    univariate_differentiate_only: bool = True

    @classmethod
    def from_mapping(cls, mapping: dict) -> "EnvConfig":
        cfg = cls()
        for key, raw in mapping.items():
            if not hasattr(cfg, key):
                raise KeyError(f"unknown environment config key: {key}")
            current = getattr(cfg, key)
            setattr(cfg, key, _coerce(raw, type(current)))
        if cfg.n_inputs < 1 or cfg.max_nodes < 1 or cfg.max_question_tokens < 1:
            raise ValueError("environment config values must be positive")
        return cfg


def _coerce(raw, typ):
    if isinstance(raw, typ):
        return raw
    if typ is bool:
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return typ(raw)


class ProblemRejected(ValueError):
    """Problem cannot be loaded under the current configuration."""


def action_mask(registry: Registry, inputs, n_inputs: int, graph: ComputeGraph) -> np.ndarray:
    """Validity vector for the next action against a graph under
    construction: operators only at the root, then subtype checks against
    the next frontier slot; input positions past the problem's inputs are
    always False."""
    n_ops = registry.n_ops
    mask = np.zeros(n_ops + n_inputs, dtype=bool)
    if not graph.nodes:
        mask[:n_ops] = True
        return mask
    slot_type = graph.next_slot_type()
    if slot_type is None:
        return mask
    for i, spec in enumerate(registry):
        mask[i] = is_subtype(spec.return_type, slot_type)
    for i, value in enumerate(inputs):
        mask[n_ops + i] = is_subtype(value.kind, slot_type)
    return mask


@dataclass
class EpisodeState:
    problem: Problem
    graph: ComputeGraph
    history: list = field(default_factory=list)
    done: bool = False


def is_multivariate_differentiate(problem: Problem) -> bool:
    if problem.module != "calculus__differentiate":
        return False
    for v in problem.inputs:
        if v.kind == EXPRESSION and len(free_symbols(v.payload)) > 1:
            return True
    return False


class Environment:
    """One single-threaded episode at a time; instances share nothing."""

    def __init__(
        self,
        registry: Registry | None = None,
        config: EnvConfig | None = None,
        codec: BpeCodec | None = None,
    ):
        self.registry = registry if registry is not None else default_registry()
        self.config = config if config is not None else EnvConfig()
        self.codec = codec
        if self.config.encoded_observations and codec is None:
            raise ValueError("encoded observations require a BPE codec")
        self._state: EpisodeState | None = None

    @property
    def n_ops(self) -> int:
        return self.registry.n_ops

    @property
    def n_actions(self) -> int:
        return self.registry.n_ops + self.config.n_inputs

    @property
    def state(self) -> EpisodeState | None:
        return self._state

    def _observation(self) -> Observation:
        codec = self.codec if self.config.encoded_observations else None
        return encode_observation(codec, self._state.problem.question, self._state.history)

    def reset(self, problem: Problem) -> Observation:
        if len(problem.inputs) > self.config.n_inputs:
            raise ProblemRejected(
                f"problem has {len(problem.inputs)} inputs, limit is {self.config.n_inputs}"
            )
        if self.config.univariate_differentiate_only and is_multivariate_differentiate(problem):
            raise ProblemRejected("multivariate calculus__differentiate problem filtered out")
        self._state = EpisodeState(problem, ComputeGraph(max_nodes=self.config.max_nodes))
        return self._observation()

    def step(self, action: int):
        """Returns (observation, reward, done, info)."""
        st = self._state
        if st is None:
            raise RuntimeError("call reset() before step()")
        if st.done:
            raise RuntimeError("episode is finished; call reset()")
        action = int(action)
        if not 0 <= action < self.n_actions:
            raise ValueError(f"action {action} outside [0, {self.n_actions})")

        if action < self.n_ops:
            node = self.registry[action]
        else:
            i = action - self.n_ops
            node = st.problem.inputs[i] if i < len(st.problem.inputs) else ABSENT

        reward = 0
        output = None
        try:
            st.graph.add_node(node)
            st.history.append(action)
        except StructuralError:
            # input placed as root: invalid graph, episode over with None
            st.history.append(action)
            st.done = True
            output = ABSENT
        if not st.done:
            if st.graph.is_complete:
                st.done = True
                output = st.graph.evaluate()
                if render(output) == st.problem.answer.strip():
                    reward = 1
            elif len(st.graph) >= self.config.max_nodes:
                st.done = True
                output = ABSENT  # incomplete at the node limit

        info = {
            "question": st.problem.question,
            "graph": st.graph.partial_text(),
            "mask": None if st.done else self.compute_mask(),
        }
        if st.done:
            info["output"] = render(output)
        return self._observation(), reward, st.done, info

    def compute_mask(self) -> np.ndarray:
        """Boolean validity vector over the action space for the next
        action; masked actions may still be taken."""
        st = self._state
        if st is None or st.done:
            raise RuntimeError("mask is only defined for an active episode")
        return action_mask(self.registry, st.problem.inputs, self.config.n_inputs, st.graph)

    def replay(self, problem: Problem, actions) -> tuple:
        """Run a full episode from an action sequence; returns
        (final reward, info of the last step)."""
        self.reset(problem)
        reward, info = 0, {}
        for action in actions:
            _, reward, done, info = self.step(action)
            if done:
                break
        return reward, info
