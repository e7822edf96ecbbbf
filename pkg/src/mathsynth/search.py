"""Search baselines: masked uniform-random rollouts and bounded exhaustive
enumeration of masked action sequences.

Exhaustive search runs iterative deepening (depth 1..max_nodes) with
lexicographic action order inside each depth, so the first solution found
is also a minimal-length one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .environment import Environment, action_mask
from .graph import ComputeGraph, StructuralError
from .parsing import Problem
from .values import render


@dataclass
class Step:
    observation: object
    action: int
    reward: int
    next_observation: object
    done: bool
    next_mask: object  # validity vector at the next state, None if terminal


@dataclass
class EpisodeRecord:
    """One finished episode plus its structured log form."""

    problem: Problem
    actions: list
    reward: int
    steps: list = field(default_factory=list)
    graph_text: str = ""
    output: str = "None"

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "question": self.problem.question,
                "module": self.problem.module,
                "actions": list(self.actions),
                "graph": self.graph_text,
                "output": self.output,
                "reward": self.reward,
            }
        )


def run_episode(env: Environment, problem: Problem, policy) -> EpisodeRecord:
    """Drive one episode with policy(observation, mask) -> action."""
    obs = env.reset(problem)
    actions, steps = [], []
    reward, done = 0, False
    mask = env.compute_mask()
    while not done:
        action = int(policy(obs, mask))
        next_obs, reward, done, info = env.step(action)
        next_mask = info["mask"]
        steps.append(Step(obs, action, reward, next_obs, done, next_mask))
        actions.append(action)
        obs, mask = next_obs, next_mask
    graph = env.state.graph
    try:
        graph_text = graph.serialize()
    except StructuralError:
        graph_text = graph.partial_text()
    return EpisodeRecord(
        problem=problem,
        actions=actions,
        reward=reward,
        steps=steps,
        graph_text=graph_text,
        output=info.get("output", "None"),
    )


def random_rollout(env: Environment, problem: Problem, rng, respect_mask: bool = True) -> EpisodeRecord:
    """Uniform-random episode; with respect_mask, actions are drawn from the
    unmasked set (falling back to all actions if a slot is unfillable)."""
    n_actions = env.n_actions

    def policy(obs, mask):
        if respect_mask and mask is not None and mask.any():
            choices = [i for i in range(n_actions) if mask[i]]
        else:
            choices = range(n_actions)
        return rng.choice(list(choices))

    return run_episode(env, problem, policy)


@dataclass
class SearchResult:
    actions: tuple | None  # first (minimal-length) rewarded sequence
    n_complete: int  # complete masked graphs enumerated
    n_expanded: int  # nodes placed during the search
    budget_exhausted: bool = False


def exhaustive_solve(
    env: Environment,
    problem: Problem,
    max_nodes: int = 4,
    budget: int | None = None,
    count_all: bool = False,
) -> SearchResult:
    """Depth-bounded enumeration of masked action sequences.

    Returns the first rewarded sequence in iterative-deepening lexicographic
    order, or None.  With count_all, keeps enumerating after a solution so
    n_complete covers the whole masked space up to max_nodes.
    """
    registry = env.registry
    n_inputs = env.config.n_inputs
    n_ops = registry.n_ops
    inputs = problem.inputs
    answer = problem.answer.strip()
    state = {"complete": 0, "expanded": 0, "solution": None, "budget_hit": False}

    def node_for(action: int):
        if action < n_ops:
            return registry[action]
        i = action - n_ops
        return inputs[i]  # masked enumeration never picks a None action

    def dfs(graph: ComputeGraph, actions: list, limit: int) -> bool:
        if graph.is_complete:
            state["complete"] += 1
            if state["solution"] is None and render(graph.evaluate()) == answer:
                state["solution"] = tuple(actions)
            return state["solution"] is not None and not count_all
        if len(graph.nodes) >= limit:
            return False
        mask = action_mask(registry, inputs, n_inputs, graph)
        for action in range(n_ops + n_inputs):
            if not mask[action]:
                continue
            if budget is not None and state["expanded"] >= budget:
                state["budget_hit"] = True
                return True
            state["expanded"] += 1
            child = graph.copy()
            child.add_node(node_for(action))
            actions.append(action)
            stop = dfs(child, actions, limit)
            actions.pop()
            if stop:
                return True
        return False

    if count_all:
        dfs(ComputeGraph(max_nodes=max_nodes), [], max_nodes)
    else:
        for limit in range(1, max_nodes + 1):
            if dfs(ComputeGraph(max_nodes=max_nodes), [], limit):
                break
            if state["budget_hit"]:
                break
    return SearchResult(
        actions=state["solution"],
        n_complete=state["complete"],
        n_expanded=state["expanded"],
        budget_exhausted=state["budget_hit"],
    )
