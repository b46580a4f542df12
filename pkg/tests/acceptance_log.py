"""Shared registry of acceptance outcomes, printed by the terminal-summary hook."""

RESULTS = {}
TITLES = {
    1: "marginal coupling, ball indicators",
    2: "exact-Gaussian linear class",
    3: "multiplier bootstrap, conditional",
    4: "empirical bootstrap, conditional",
    5: "softmax sandwich",
    6: "mollified indicator",
    7: "Gaussian max anti-concentration",
    8: "coupling plus anti-concentration",
    9: "Gaussian comparison",
    10: "rate formulas",
    11: "convex-set probabilities",
    12: "determinism",
}


def record(k, ok, detail):
    RESULTS[k] = (bool(ok), detail)
    print(line(k))
    return ok


def line(k):
    if k not in RESULTS:
        return f"criterion {k:2d} [{TITLES[k]}]: NO RESULT (not run, or errored before recording)"
    ok, detail = RESULTS[k]
    return f"criterion {k:2d} [{TITLES[k]}]: {'PASS' if ok else 'FAIL'}  {detail}"
