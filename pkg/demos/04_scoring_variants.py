#!/usr/bin/env python3
"""The five fusion variants and the algebra connecting them.

Every variant projects its inputs into a rank-widened space, combines
them elementwise, pools back down, and dots the result against all
candidate objects. The temporal variants differ only in where the time
embedding enters:

    lowfer  pool(Us . Vp)                     no time
    t       pool(Us . V(p * t))               time reweights the relation
    tnt     pool(Us . V(p_t * t + p_static))  plus a static relation path
    cfb     pool(Us . M^T(Vp . Qt))           inner relation-time fusion
    ftp     Us . Vp . Qt  (rank 1)            three-way product
"""

import numpy as np

from timekge import (
    Model,
    fuse_cfb,
    fuse_ftp,
    fuse_lowfer,
    fuse_t,
    fuse_tnt,
    init_params,
    score_all,
)

rng = np.random.default_rng(42)

# --- the static base case, by hand ---------------------------------------------
# With identity projections and rank 1 the fusion is just an elementwise
# product of subject and relation features:
g = fuse_lowfer([1.0, 2.0], [3.0, 4.0], np.eye(2), np.eye(2), rank=1)
print("lowfer, identity projections:", g)           # (3, 8)
print("scored against two objects:",
      score_all(g, np.array([[1.0, 0.0], [1.0, 1.0]])))

# --- how the variants collapse into each other ----------------------------------
subj, rel, timev = rng.standard_normal((3, 4))
sp, rp = rng.standard_normal((2, 4, 8))
sq, rq, tq = rng.standard_normal((3, 4, 4))

print("\nt with all-ones time == lowfer:",
      np.array_equal(fuse_t(subj, rel, np.ones(4), sp, rp, 2),
                     fuse_lowfer(subj, rel, sp, rp, 2)))
print("tnt with zero static table == t:",
      np.array_equal(fuse_tnt(subj, rel, np.zeros(4), timev, sp, rp, 2),
                     fuse_t(subj, rel, timev, sp, rp, 2)))
print("cfb with identity middle projection, rank 1 == ftp:",
      np.array_equal(fuse_cfb(subj, rel, timev, sq, rq, tq, np.eye(4), 1),
                     fuse_ftp(subj, rel, timev, sq, rq, tq)))

# --- parameter budgets ------------------------------------------------------------
# At equal dimensions the chained variant pays for its middle projection;
# the trilinear variant stays close to the bilinear baseline.
print("\nparameter counts (|E|=1000, |R|=50, |T|=365, d=300):")
for variant, rank in (("lowfer", 32), ("t", 32), ("tnt", 32), ("cfb", 32),
                      ("ftp", 1)):
    params = init_params(variant, num_entities=1000, num_relations=50,
                         rank=rank, dim_entity=300, encoder="ste",
                         num_timestamps=365, rng=rng)
    print(f"  {variant:<7} rank {rank:>2}: {Model(params).count_parameters():>12,}")
