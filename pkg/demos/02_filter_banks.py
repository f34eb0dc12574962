"""
Littlewood-Paley filter banks
=============================

Three ways to build a bank whose squared responses sum to one at every
character, and what the audit reports about each.
"""

from scatterlab import (
    FrequencySet,
    GroupSpec,
    audit,
    build_ideal_partition_bank,
    build_random_smooth_bank,
    singleton_partition_bank,
)
from scatterlab.filter_frames import FrameError

z12 = GroupSpec((12,))

# ideal indicators: a low-pass set plus disjoint bands that tile the rest
bank = build_ideal_partition_bank(
    z12, FrequencySet.of(z12, [0, 1, -1]),
    [FrequencySet.of(z12, [2, -2, 3, -3, 4, -4]), FrequencySet.of(z12, [5, -5, 6])])
print(audit(bank).summary())

# overlapping bands are refused, with the offending frequencies named
try:
    build_ideal_partition_bank(z12, FrequencySet.of(z12, [0]),
                               [FrequencySet.of(z12, range(1, 8)), FrequencySet.of(z12, range(7, 12))])
except FrameError as err:
    print("rejected:", err)

# one filter per nonzero character: every support has size one
print(audit(singleton_partition_bank(GroupSpec((8,)))).summary())

# smooth random profiles, normalised pointwise; the gap stays filter-free
z16 = GroupSpec((16,))
smooth = build_random_smooth_bank(z16, 3, FrequencySet.of(z16, [0, 1, -1]), seed=7)
a = audit(smooth)
print(a.summary())
print("gap:", a.gap.sorted(), " largest support:", a.max_support)
