"""Pure-Python bitmask kernels for the metapath topology.

Edge sets are ints: bit ``i`` stands for the host's ``i``-th edge.  The
compiled module mirrors these signatures for hosts of at most 64 edges.
"""


def interior(mask, basis, full):
    if mask == full:
        return full
    out = 0
    for b in basis:
        if b & ~mask == 0:
            out |= b
    return out


def open_family(basis, full):
    opens = {0, full}
    for b in basis:
        opens |= {s | b for s in opens}
    return sorted(opens)


def implies(a, b, basis, full):
    return interior((full & ~a) | b, basis, full)


def residuation_failures(opens, basis, full):
    """Count triples (a, b, x) where ``a ∧ x ≤ b`` and ``x ≤ (a ⇒ b)`` disagree."""
    bad = 0
    for a in opens:
        for b in opens:
            imp = interior((full & ~a) | b, basis, full)
            for x in opens:
                lhs = interior(a & x, basis, full) & ~b == 0
                rhs = x & ~imp == 0
                if lhs != rhs:
                    bad += 1
    return bad


def implies_max_failures(opens, basis, full):
    """Count pairs (a, b) where ``a ⇒ b`` is not the largest open x with ``a ∧ x ≤ b``."""
    bad = 0
    for a in opens:
        for b in opens:
            best = 0
            for x in opens:
                if interior(a & x, basis, full) & ~b == 0:
                    best |= x
            if best != interior((full & ~a) | b, basis, full):
                bad += 1
    return bad


def lower_preimage(images, o):
    """Sources whose image set meets ``o``."""
    out = 0
    for i, m in enumerate(images):
        if m & o:
            out |= 1 << i
    return out
