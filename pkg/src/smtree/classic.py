"""Classic insert baseline: radius expansion happens on the way down.

At each internal node the insert prefers a subtree that needs no radius
expansion (closest router among those); otherwise it takes the subtree whose
radius grows the least and expands that radius to the new object's distance
as the object passes.  Nothing is propagated back up except split promotions,
which is why this variant admits no delete: after such an expansion a
router's radius depends on the whole subtree rather than on its immediate
children.
"""

from __future__ import annotations


def descend_insert(tree, pid, parent_router, object_id, vec):
    """Recursive classic insert; returns the promoted pair if ``pid`` split."""
    node = tree._node(pid)
    if node.is_leaf:
        result = tree._leaf_add(pid, node, parent_router, object_id, vec)
        return result if isinstance(result, tuple) else None

    zero_expansion = []
    expansions = []
    for idx, e in enumerate(node.entries):
        d = tree._dist(e.routing_object, vec)
        if d <= e.covering_radius:
            zero_expansion.append((d, idx))
        else:
            expansions.append((d - e.covering_radius, idx, d))
    if zero_expansion:
        _, at = min(zero_expansion)
    else:
        _, at, d = min(expansions)
        node.entries[at].covering_radius = d  # expanded as the object passes
        tree.store.write(pid, node)
    entry = node.entries[at]

    sub = descend_insert(tree, entry.child, entry.routing_object, object_id, vec)
    if sub is None:
        return None
    result = tree._absorb_promotion(pid, node, at, sub, parent_router)
    return result if isinstance(result, tuple) else None
