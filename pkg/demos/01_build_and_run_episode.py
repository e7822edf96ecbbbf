# A first episode, step by step.
#
# The environment turns a math question into a program-synthesis task:
# each action appends either an operator or one of the question's parsed
# inputs to a compute graph, filling parameter slots in breadth-first
# order.  Reward is 1 exactly when the finished graph renders the answer.

from mathsynth import Environment, Problem, extract_inputs

question = "What is the first derivative of 6*k**2 - 101*k + 2548?"
answer = "12*k - 101"

# The parser pulls the typed inputs straight out of the text.
inputs = extract_inputs(question)
for i, v in enumerate(inputs):
    print(f"input {i}: {v.kind:<12} {v!r}")

problem = Problem(question, answer, tuple(inputs), "calculus__differentiate")

env = Environment()  # default registry: 15 operators, 3 input slots
print(f"\naction space: {env.n_ops} operators + {env.config.n_inputs} inputs "
      f"= {env.n_actions} actions")

# Action 5 is `differentiate`; action 15 is the first input.
obs = env.reset(problem)
print(f"\nstate  t=0 : {problem.question}; ")
for t, action in enumerate([5, 15]):
    print(f"action t={t} : {action}")
    obs, reward, done, info = env.step(action)
    print(f"state  t={t + 1} : {problem.question}; {', '.join(map(str, obs.history))}")
    print(f"reward t={t + 1} : {reward}")

print(f"\nfinal graph : {info['graph']}")
print(f"output      : {info['output']}")

# An incomplete graph always computes None (reward 0) -- here the episode
# ended because the graph completed and matched the stored answer exactly.
