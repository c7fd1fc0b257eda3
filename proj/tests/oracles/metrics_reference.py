"""Reference values for tests/fixtures/small_*.csv, computed with scikit-learn's kappa
and plain enumeration.

Run: python3 tests/oracles/metrics_reference.py
"""
import csv
import itertools
import os
from collections import defaultdict

import numpy as np
from sklearn.metrics import cohen_kappa_score

HERE = os.path.dirname(__file__)
FIX = os.path.join(HERE, "..", "fixtures")


def load(name):
    out = defaultdict(lambda: defaultdict(dict))
    with open(os.path.join(FIX, name)) as f:
        for r in csv.DictReader(f):
            key = (r["experiment_id"], r["condition_id"])
            out[key][r["observer_id"]][r["stimulus_id"]] = int(r["predicted_class"] == r["true_class"])
    return out


def rows(cond):
    stimuli = sorted(next(iter(cond.values())).keys())
    return {o: [cond[o][s] for s in stimuli] for o in sorted(cond)}


def kappa(a, b):
    # sklearn returns nan when p_exp == 1
    with np.errstate(all="ignore"):
        k = cohen_kappa_score(a, b, labels=[0, 1])
    return None if np.isnan(k) else float(k)


def mean_defined(vals):
    vals = [v for v in vals if v is not None]
    return sum(vals) / len(vals) if vals else None


def hierarchical(values):
    by_exp = defaultdict(list)
    for (e, _), v in values.items():
        by_exp[e].append(v)
    return sum(sum(v) / len(v) for v in by_exp.values()) / len(by_exp)


def main():
    humans = load("small_trials.csv")
    model = load("small_model_trials.csv")
    ec, acc, ih = {}, {}, {}
    for key in sorted(humans):
        h = rows(humans[key])
        m = rows(model[key])["model"]
        ec[key] = mean_defined([kappa(m, r) for r in h.values()])
        acc[key] = sum(m) / len(m)
        obs = list(h)
        ih[key] = mean_defined([mean_defined([kappa(h[a], h[b]) for b in obs if b != a]) for a in obs])
        print(key, "kappa", repr(ec[key]), "acc", acc[key], "inter-human", repr(ih[key]))
    print("error_consistency", repr(hierarchical(ec)))
    print("ood_accuracy", repr(hierarchical(acc)))
    print("inter_human", repr(hierarchical(ih)))

    # Exhaustive frontier: every joint response vector, hierarchical weights.
    keys = sorted(humans)
    n_exp = len({e for e, _ in keys})
    per_exp = defaultdict(int)
    for e, _ in keys:
        per_exp[e] += 1
    per_condition = []
    for key in keys:
        h = list(rows(humans[key]).values())
        n = len(h[0])
        w = 1.0 / (per_exp[key[0]] * n_exp)
        pts = []
        for s in itertools.product([0, 1], repeat=n):
            k = mean_defined([kappa(list(s), r) for r in h])
            pts.append((w * (k if k is not None else 0.0), w * sum(s) / n))
        per_condition.append(pts)
    best = {}
    for combo in itertools.product(*per_condition):
        k = sum(p[0] for p in combo)
        a = round(sum(p[1] for p in combo), 12)
        best[a] = max(best.get(a, -9), k)
    frontier = []
    for a in sorted(best, reverse=True):
        if not frontier or best[a] > frontier[-1][1] + 1e-12:
            frontier.append((a, best[a]))
    frontier.reverse()
    print("frontier points", len(frontier))
    top = max(frontier, key=lambda p: p[1])
    print("max kappa", repr(top[1]), "at accuracy", repr(top[0]))


if __name__ == "__main__":
    main()
