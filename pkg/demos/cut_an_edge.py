"""
Removing a communication link
=============================

Three ways to drop edge (2, 3) while keeping the stress certified:

1. directly, when two shared neighbors give a positive scaling;
2. with one relay agent, placed in a region fixed by the sign of the weight;
3. with two relays, when the endpoints share no neighbor at all.
"""
import numpy as np

from affineframe import InadmissibleRegionError, classify_region
from affineframe.catalog import square_framework, square_with_outer_vertex
from affineframe.pruning import (
    admissible_relay_regions,
    delete_edge_direct,
    delete_edge_two_relays,
    delete_edge_with_relay,
    find_deletion_support,
)


def show(title, fw):
    ev = np.linalg.eigvalsh(fw.stress)
    print(f"{title}: n={fw.n}, edges={len(fw.edges)}, has (2,3): {fw.has_edge(2, 3)}, "
          f"eigenvalues {np.round(ev, 3).tolist()}")


# -- 1. direct deletion on the five-agent framework
fw = square_with_outer_vertex()
show("before", fw)
support = find_deletion_support(fw, 2, 3)
print(f"support anchors={support.anchors} q={support.q} scaling={support.s_ed:.6g}")
show("direct", delete_edge_direct(fw, support))

# -- 2. on the bare square no support works, so a relay is needed
sq = square_framework()
print("support on the square:", find_deletion_support(sq, 2, 3))
regions = admissible_relay_regions(sq, 2, 3)
print("weight on (2,3):", sq.weight(2, 3), "-> admissible regions", sorted(r.name for r in regions))
relay = (1.0, -1.0)
print("relay at", relay, "lies in region", classify_region(relay, sq.points((1, 2, 3))).name)
show("one relay", delete_edge_with_relay(sq, 2, 3, anchor=1, relay_point=relay))

# a relay in the wrong region is refused with the admissible set in the message
try:
    delete_edge_with_relay(sq, 2, 3, anchor=1, relay_point=(-0.3, 0.9))
except InadmissibleRegionError as exc:
    print("refused:", exc)

# -- 3. within perception radius 1.41, agents 2 and 4 see no common neighbor
two = delete_edge_two_relays(sq, 2, 4, ((0.0, 0.3), 1), (-0.2, 0.3), d_per=1.41)
print("two relays added:", two.ids[-2:], "edge (2,4) present:", two.has_edge(2, 4))
