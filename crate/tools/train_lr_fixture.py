"""Regenerates the logistic-regression fixture in crates/analytics/data.

Features are z-scored, the model is fitted with scikit-learn, and the
weights are written in the plain-text model format with the (16, 8)
fixed-point spec.
"""
import numpy as np
from sklearn.datasets import load_breast_cancer
from sklearn.linear_model import LogisticRegression

OUT = "crates/analytics/data"
FRAC = 8

data = load_breast_cancer()
x = data.data
x = (x - x.mean(axis=0)) / x.std(axis=0)
y = data.target

model = LogisticRegression(C=0.1, max_iter=5000).fit(x, y)
q = lambda v: np.round(v * (1 << FRAC)) / (1 << FRAC)

with open(f"{OUT}/wdbc_standardized.csv", "w") as f:
    f.write(",".join(f"x{i}" for i in range(30)) + ",label\n")
    for row, label in zip(x, y):
        f.write(",".join(f"{v:.6f}" for v in row) + f",{label}\n")

with open(f"{OUT}/wdbc_model.txt", "w") as f:
    f.write(f"16 {FRAC}\n")
    f.write(f"{q(model.intercept_[0]):.8f}\n")
    for w in model.coef_[0]:
        f.write(f"{q(w):.8f}\n")

print("train accuracy", model.score(x, y))
print("feature range", x.min(), x.max())
print("weight range", model.coef_.min(), model.coef_.max())
