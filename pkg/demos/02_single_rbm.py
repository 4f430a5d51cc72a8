"""One RBM in isolation: conditionals, sampling, and verified gradients.

Small models make the intractable parts tractable: with D + K <= 20 the
exact log-likelihood and its gradient come from enumeration, which is how
the contrastive-divergence estimator is kept honest.
"""

import numpy as np

from crbm import (
    FeatureMatrix,
    Rbm,
    TrainConfig,
    cd_gradient,
    exact_gradient,
    exact_log_likelihood,
    free_energy,
    gibbs_chain,
    hidden_probs,
    train_single,
)

rng = np.random.default_rng(0)

# A toy model: 6 visible units, 2 hidden units.
rbm = Rbm(
    weights=rng.uniform(-1, 1, size=(6, 2)),
    hidden_bias=rng.uniform(-1, 1, size=2),
    visible_bias=rng.uniform(-1, 1, size=6),
)
v = (rng.uniform(size=6) < 0.5).astype(float)
print("hidden conditionals for one frame:", np.round(hidden_probs(rbm, v), 4))
print("free energy of that frame:        ", round(free_energy(rbm, v), 4))

sample, h_probs = gibbs_chain(rbm, v, steps=50, rng=np.random.default_rng(1))
print("visible sample after 50 Gibbs steps:", sample.astype(int))

# The CD estimator against the enumeration oracle.
batch = (rng.uniform(size=(16, 6)) < 0.5).astype(float)
exact = exact_gradient(rbm, batch)
acc = np.zeros_like(exact.d_weights)
n = 2000
for seed in range(n):
    acc += cd_gradient(rbm, batch, steps=1, rng=np.random.default_rng(seed)).d_weights
avg_cd = acc / n
cos = (avg_cd.ravel() @ exact.d_weights.ravel()) / (
    np.linalg.norm(avg_cd) * np.linalg.norm(exact.d_weights)
)
print(f"\ncosine(averaged CD-1, exact gradient) over {n} estimates: {cos:.4f}")

# CD-1 training actually climbs the exact likelihood on easy data.
prototypes = np.array([[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1]], dtype=float)
data = np.tile(prototypes, (30, 1))
x = FeatureMatrix(data=data, fps=1.0, modality="subject")
print("\nexact mean log-likelihood while training (every 10 epochs):")
for epochs in (10, 20, 30, 40, 50):
    cfg = TrainConfig(k_units=2, learning_rate=0.1, minibatch_size=16,
                      epochs=epochs, seed=3)
    trained = train_single(x, cfg, role="subject")
    print(f"  epoch {epochs:3d}: {exact_log_likelihood(trained, data):+.4f}")
print(f"  (uniform model baseline: {-6 * np.log(2):+.4f})")
