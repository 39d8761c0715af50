# Canonical correlation analysis on a toy dataset
# ------------------------------------------------
# CCA finds paired linear projections of two matrices that maximally
# correlate.  Here the second matrix is a one-hot label encoding, so the
# leading projections are exactly the directions that separate the classes
# -- the engine behind every oblique split in the forest.

import numpy as np

from ccfmap.cca import canonical_correlation, one_hot

rng = np.random.default_rng(0)

# Three clusters in 5 dimensions, separated along an oblique direction.
n_per = 20
direction = np.array([1.0, 1.0, 0.0, 0.0, 0.0]) / np.sqrt(2)
x = np.vstack([
    rng.standard_normal((n_per, 5)) * 0.3 + shift * direction
    for shift in (-2.0, 0.0, 2.0)
])
labels = np.repeat([0, 1, 2], n_per)

result = canonical_correlation(x, one_hot(labels, 3), gamma=1e-6)

print("canonical correlations:", np.round(result.correlations, 4))
print("leading projection:    ", np.round(result.projections_x[:, 0], 3))

# The leading correlation is close to 1 and the leading projection points
# along the oblique separating direction (up to scale and sign).
lead = result.projections_x[:, 0]
cosine = abs(lead @ direction) / np.linalg.norm(lead)
print(f"alignment with true direction: {cosine:.4f}")

# A single threshold on the projected coordinate already separates the
# extreme classes:
projected = x @ lead
for cls in range(3):
    vals = projected[labels == cls]
    print(f"class {cls}: projected range [{vals.min():+.2f}, {vals.max():+.2f}]")
