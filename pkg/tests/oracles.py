"""Independent brute-force oracles used by module and acceptance tests.

Deliberately naive: plain loops over scalar primitives, no shared code with
the engine's vectorized search paths.
"""

from __future__ import annotations

from itertools import combinations

from complai import heom


def enumerate_hybrids(x, x_nn):
    """Every instance obtainable by copying some nonempty subset of the
    neighbor's differing values into x (2^|delta| - 1 candidates)."""
    delta = [j for j in range(len(x)) if x[j] != x_nn[j]]
    for size in range(1, len(delta) + 1):
        for subset in combinations(delta, size):
            hybrid = list(x)
            for j in subset:
                hybrid[j] = x_nn[j]
            yield tuple(hybrid)


def brute_force_best_hybrid(x, x_nn, model, region, schema, cfg):
    """Exhaustively scan all hybrids; return (best_distance, best_hybrid) over
    the valid ones, or (None, None) if no hybrid's prediction enters the
    region."""
    best_d, best_h = None, None
    for hybrid in enumerate_hybrids(x, x_nn):
        pred = model.predict_batch([hybrid])[0]
        if not region.contains(pred):
            continue
        d = heom(x, hybrid, schema, cfg)
        if best_d is None or d < best_d:
            best_d, best_h = d, hybrid
    return best_d, best_h


def naive_flip_counts(X, attr_cols, outcomes, schema, cfg):
    """All-pairs 1-NN flip counts per subgroup value, protected coordinates
    excluded from the distance by zeroing them out of both instances."""

    def strip(row):
        return tuple("__masked__" if j in attr_cols else v for j, v in enumerate(row))

    groups = {}
    for i, row in enumerate(X.rows):
        groups.setdefault(tuple(row[c] for c in attr_cols), []).append(i)

    counts = {}
    for value, members in groups.items():
        member_set = set(members)
        f_plus = f_minus = 0
        for i in members:
            best_j, best_d = None, None
            for j, other in enumerate(X.rows):
                if j in member_set or tuple(other[c] for c in attr_cols) == value:
                    continue
                d = heom(strip(X.rows[i]), strip(other), schema, cfg)
                if best_d is None or d < best_d:
                    best_j, best_d = j, d
            if best_j is None:
                continue
            if outcomes[i] == 0 and outcomes[best_j] == 1:
                f_plus += 1
            elif outcomes[i] == 1 and outcomes[best_j] == 0:
                f_minus += 1
        counts[value] = (f_plus, f_minus)
    return counts
