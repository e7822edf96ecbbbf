# Abstracting frequent rewarded subgraphs into new operators.
#
# Graphs that repeatedly differentiate with respect to the same variable
# share the subgraph differentiate_wrt(differentiate_wrt(_, v), v).  The
# miner finds it, unifies the repeated variable leaf into one parameter,
# and registers the template as a fresh action -- after which minimal
# solutions for higher derivatives shrink.

from mathsynth import (
    EnvConfig,
    Environment,
    differentiate_wrt_problems,
    exhaustive_solve,
    full_registry,
    mine,
    register,
)

registry = full_registry()  # all 23 operators, differentiate_wrt included
config = EnvConfig(univariate_differentiate_only=False)
env = Environment(registry, config)

# Collect rewarded second-derivative graphs (multivariate, so the plain
# univariate differentiate operator cannot shortcut them).
corpus = []
for gp in differentiate_wrt_problems(30, 0, registry, order=2, multivariate=True):
    reward, _ = env.replay(gp.problem, gp.truth_graph)
    assert reward == 1
    corpus.append(env.state.graph.copy())

print("example rewarded graph:")
print(" ", corpus[0].serialize())

mined = mine(corpus, min_support=10, min_size=2)
top = mined[0]
print(f"\ntop template : {top.default_name()}({', '.join(f'p{i}' for i in range(top.arity))})"
      f" = {top.text}")
print(f"support      : {top.support} occurrences")
print(f"signature    : params {top.param_types} -> {top.return_type}")

registry2, spec = register(top, registry)
print(f"\nregistered at action index {registry2.index_of(spec.name)}; "
      f"n_ops {registry.n_ops} -> {registry2.n_ops}")

# Compression: a third derivative needs a 7-node chain of differentiate_wrt;
# with the mined operator a 5-node graph suffices.
problem = differentiate_wrt_problems(1, 9, registry, order=3, multivariate=True)[0]
print("\nQ:", problem.problem.question)
before = exhaustive_solve(env, problem.problem, max_nodes=6)
print(f"best graph without the abstraction, depth <= 6: {before.actions}")
reward, _ = env.replay(problem.problem, problem.truth_graph)
print(f"the 7-node chain replays with reward {reward}")

env2 = Environment(registry2, config)
after = exhaustive_solve(env2, problem.problem, max_nodes=6)
print(f"with {spec.name}: solution {after.actions} ({len(after.actions)} nodes)")
