#!/usr/bin/env python3
"""Dense kernels and finite-difference gradient checking, step by step.

Everything downstream (fusion variants, training) reduces to three tiny
float64 kernels plus one verification tool. This script walks through
each of them on numbers small enough to check by eye.
"""

import numpy as np

from timekge import finite_diff_check, hadamard, matvec_t, sum_pool

# --- transposed matrix-vector product --------------------------------------
# Embeddings are projected into a wider space with M^T x. With the identity
# matrix the projection is a no-op:
x = np.array([1.0, 2.0, 3.0])
print("identity projection:", matvec_t(np.eye(3), x))

# and with an explicit small matrix you can follow the column sums:
m = np.array([[1.0, 2.0],
              [3.0, 4.0]])
print("column-weighted sums:", matvec_t(m, np.array([1.0, 1.0])))  # (4, 6)

# --- elementwise product ----------------------------------------------------
print("hadamard:", hadamard([2.0, 3.0], [4.0, 5.0]))  # (8, 15)

# --- window summation pooling -----------------------------------------------
# sum_pool collapses k adjacent coordinates into one; it is how the widened
# fused vector returns to entity dimension.
wide = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
print("pooled by 2:", sum_pool(wide, 2))   # (3, 7, 11)
print("pooled by 3:", sum_pool(wide, 3))   # (6, 15)
print("pooling preserves totals:", sum_pool(wide, 3).sum() == wide.sum())

# --- gradient checking -------------------------------------------------------
# finite_diff_check probes a scalar loss with central differences and
# compares against gradients you claim are analytic. A quadratic makes the
# comparison essentially exact:
theta = np.array([3.0, -1.5])
params = {"theta": theta}
grads = {"theta": 2.0 * theta.copy()}
report = finite_diff_check(lambda: float((theta ** 2).sum()), params, grads)
print(f"correct gradient: max rel error {report.max_rel_error:.2e} "
      f"over {report.num_checked} coordinates")

# Feed it a wrong gradient and the report names the offender:
bad = {"theta": 3.0 * theta.copy()}
report = finite_diff_check(lambda: float((theta ** 2).sum()), params, bad)
print(f"wrong gradient: max rel error {report.max_rel_error:.3f} "
      f"at {report.worst_param}")
