"""Show why ordering robots' actions breaks robustness.

A mission that asks robot 2 to photograph right after robot 1 couples the
two robots' clocks. The trace gate finds a pair of words with identical
per-robot views where only one satisfies the mission.
"""
from syncplan import parse_ltl
from syncplan.trace import Distribution, check_trace_closed

PROPS = ["r1P", "Sync", "r2P", "pi"]
DIST = Distribution(({"r1P", "pi", "Sync"}, {"r2P", "pi", "Sync"}))

for formula in ("G F r1P & G F r2P & G F pi & G F Sync",
                "G(r1P -> X r2P) & G F r1P & G F pi & G F Sync"):
    verdict = check_trace_closed(parse_ltl(formula, PROPS), DIST, PROPS)
    print(formula)
    if verdict.closed:
        print("  closed under reordering of independent events\n")
    else:
        print("  not closed; witness:")
        for line in verdict.witness.render().splitlines():
            print("   ", line)
        print()
