"""
Removing agents
===============

An agent with no children is removed by a Schur-complement update. An agent
that others depend on hands its role to one of its children, and the rest of
its children are re-attached.
"""
import numpy as np

from affineframe.catalog import layered_framework
from affineframe.pruning import delete_inner_vertex, delete_outer_vertex


def hierarchy_table(fw):
    for v in fw.ids:
        rec = fw.hierarchy[v]
        parents = ",".join(map(str, rec.parents)) or "-"
        children = ",".join(map(str, sorted(rec.children))) or "-"
        print(f"  v{v}: level {rec.level}  parents {parents:8s} children {children}")


fw = layered_framework()
print("nine agents in two levels")
hierarchy_table(fw)

# outer agent: 9 has three neighbors and no children
outer = delete_outer_vertex(fw, 9)
print("\nwithout v9, eigenvalues:", np.round(np.linalg.eigvalsh(outer.stress), 3).tolist())

# inner agent: 5 has children 6, 7, 8; child 6 has the lowest level number and inherits
inner = delete_inner_vertex(fw, 5)
print("\nwithout v5")
hierarchy_table(inner)
print("eigenvalues:", np.round(np.linalg.eigvalsh(inner.stress), 3).tolist())
