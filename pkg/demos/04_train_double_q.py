# Double Q-learning on a single module, desk scale.
#
# The learner is the paper-style loop over a linear value function on
# hashed question/history features: a replay buffer initialized from
# masked random rollouts and kept at a 1:1 positive/zero trajectory
# balance, priority-proportional sampling with post-batch recomputation,
# epsilon-greedy acting (0.4 -> 0.05), and a periodically synced target
# copy for the Double-DQN bootstrap.
#
# Takes about a minute; prints the greedy evaluation curve.

from mathsynth import TrainConfig, train

config = TrainConfig(
    modules=("numbers__div_remainder",),
    seed=0,
    learning_rate=0.05,   # linear model; the transformer default is 5e-5
    batch_size=128,
    target_sync=250,
    init_steps=6000,      # env steps spent filling the balanced buffer
    total_steps=12000,
    eval_interval=1000,
    train_problems_per_module=1000,
    eval_problems_per_module=100,
)

result = train(config)

print(f"{'step':>6}  {'epsilon':>7}  {'loss':>8}  eval")
for record in result.metrics:
    loss = f"{record['loss']:.4f}" if record["loss"] == record["loss"] else "   --"
    evals = "  ".join(f"{m}={r:.2f}" for m, r in record["eval"].items())
    print(f"{record['step']:>6}  {record['epsilon']:>7.3f}  {loss:>8}  {evals}")

final = result.metrics[-1]["eval"]["numbers__div_remainder"]
print(f"\nfinal greedy eval reward: {final:.2f} "
      f"after {result.env_steps} env steps and {result.updates} updates")
