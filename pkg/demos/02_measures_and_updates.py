"""Noisy views: training for different measures, and the two update modes.

The default update solves one view at a time with the others held fixed.
The ``joint`` mode solves all views in one QP. On small problems both can
be compared with training on every admissible constraint.
"""

# %%
import numpy as np

from mvperf import measures as M
from mvperf.oracles import compare_with_full_enumeration
from mvperf.synthetic import GenSpec, generate
from mvperf.trainer import TrainConfig, evaluate, train

# %%
ds = generate(GenSpec(n=80, dims=[4, 3], balance=0.3, margin=1.0, noise=0.7, seed=4))
print("positives:", int(np.sum(ds.labels > 0)), "of", ds.n)

# %% [markdown]
# Train once per target measure and score every model on every measure.

# %%
targets = [M.ERROR_RATE, M.F1, M.PRBEP, M.precision_at(10)]
print("trained for".ljust(12), "".join(t.name.rjust(10) for t in targets))
for target in targets:
    model, state = train(ds, TrainConfig(C1=10.0, C2=0.1, T=100, measure=target))
    row = [evaluate(ds, model, t).loss for t in targets]
    print(target.name.ljust(12), "".join(f"{v:10.3f}" for v in row), f"  ({state.status}, |W|={len(state.working_set)})")

# %% [markdown]
# Small instances: primal objective reached by cutting-plane training
# against training with the full constraint set, for both update modes.

# %%
rng_specs = [GenSpec(n=7, dims=[2, 2], margin=0.5, noise=1.0, seed=s) for s in range(5)]
for spec in rng_specs:
    small = generate(spec)
    line = [f"seed {spec.seed}:"]
    for update in ("per_view", "joint"):
        cp, fe, rel = compare_with_full_enumeration(small, TrainConfig(T=500, update=update))
        line.append(f"{update} {cp:.5f} vs {fe:.5f} (rel {rel:.1e})")
    print("  ".join(line))
