#!/usr/bin/env python3
"""Cycle-aware timestamp decomposition and the two time encoders.

A calendar date sits inside many recurring cycles at once: a position in
its week, month, season, year, and the base-10 digits of the year
itself. The cyclic encoder turns each of those 14 positions into an
embedding-table row and sums them, so dates that share a cycle position
share parameters; the simple encoder gives every timestamp its own
independent row.
"""

import datetime as dt

import numpy as np

from timekge import (
    COMPONENTS,
    CyclicTimeEncoder,
    SimpleTimeEncoder,
    cycle_cardinalities,
    decompose_date,
)

# --- the 14 components --------------------------------------------------------
print("component cardinalities:")
for name, card in cycle_cardinalities().items():
    print(f"  {name:<18} {card}")

# --- decomposing dates -----------------------------------------------------------
for day in (dt.date(2014, 1, 1), dt.date(2014, 9, 30), dt.date(2012, 2, 29)):
    c = decompose_date(day)
    print(f"\n{day}:")
    print(f"  weekday {c.day_of_week} (Monday=0), day {c.day_of_month} of month,"
          f" day {c.day_of_season} of season {c.season_of_year}")
    print(f"  day {c.day_of_year} / week {c.week_of_year} of year;"
          f" year digits {c.year_millennia}{c.year_centuries}"
          f"{c.year_decades}{c.year_units}")

# Dates seven days apart always share the weekday component:
a, b = dt.date(2014, 3, 3), dt.date(2014, 3, 10)
print(f"\n{a} and {b} share weekday index:",
      decompose_date(a).day_of_week == decompose_date(b).day_of_week)

# --- the encoders ---------------------------------------------------------------
dates = [dt.date(2014, 1, 1) + dt.timedelta(days=i) for i in range(30)]
rng = np.random.default_rng(0)
simple = SimpleTimeEncoder.create(len(dates), dim=6, rng=rng)
cyclic = CyclicTimeEncoder.create(dates, dim=6, rng=rng)

print("\nsimple encoder parameters:",
      sum(t.size for t in simple.tensors().values()))
print("cyclic encoder parameters:",
      sum(t.size for t in cyclic.tensors().values()),
      f"(shared across all {len(dates)} timestamps and any future date)")

# The cyclic embedding of a timestamp is literally the sum of its 14 rows:
t = 8
c = decompose_date(dates[t])
manual = sum(cyclic.tables[comp][idx] for comp, idx in zip(COMPONENTS, c))
print("cyclic encoding == sum of component rows:",
      np.allclose(cyclic.encode_batch([t])[0], manual))

# Timestamps a week apart reuse the weekday row, so their encodings
# differ by less than two unrelated timestamps do (in expectation):
e = cyclic.encode_batch([0, 7, 9])
print("|e(t0) - e(t0+7d)| =", round(float(np.linalg.norm(e[0] - e[1])), 3),
      " vs |e(t0) - e(t0+9d)| =", round(float(np.linalg.norm(e[0] - e[2])), 3))
