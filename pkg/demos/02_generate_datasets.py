# Synthetic problem generation, dataset files and splits.
#
# Each supported module has phrasing templates plus a ground-truth action
# sequence (the "truth graph").  Replaying the truth graph through the
# environment is the standing oracle: it must always earn reward 1.

from mathsynth import (
    Environment,
    SUPPORTED_MODULES,
    generate,
    load_dataset_file,
    split,
    write_dataset_file,
)

env = Environment()

print("one sample per module:\n")
for module in SUPPORTED_MODULES:
    gp = generate(module, 1, seed=7)[0]
    reward, _ = env.replay(gp.problem, gp.truth_graph)
    print(f"[{module}]")
    print(f"  Q: {gp.problem.question}")
    print(f"  A: {gp.problem.answer}")
    print(f"  truth actions {list(gp.truth_graph)} -> reward {reward}")

# Dataset files are alternating question/answer lines; loading re-extracts
# the typed inputs from the text, skipping anything it cannot parse.
problems = [gp.problem for gp in generate("numbers__gcd", 100, seed=0)]
write_dataset_file(problems, "/tmp/numbers__gcd.txt")
loaded = load_dataset_file("/tmp/numbers__gcd.txt")
print(f"\nwrote and reloaded {len(loaded)} gcd problems")

# Seeded splits use largest-remainder rounding (the 800k/200k/10k ratio).
train, val, test = split(loaded, (800 / 1010, 200 / 1010, 10 / 1010), seed=0)
print(f"split sizes: train={len(train)} val={len(val)} test={len(test)}")
