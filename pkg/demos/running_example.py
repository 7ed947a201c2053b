"""Walk through the two-robot example: plan, bound, and field behaviour.

Run with ``python demos/running_example.py``.
"""
from importlib import resources

from syncplan import ltl_to_buchi, parse_ltl, plan_robust, simulate
from syncplan.sim import field_cost, skew, verify_field_trace
from syncplan.trace import Distribution
from syncplan.ts import load_ts

DATA = resources.files("syncplan") / "data"
PROPS = ["r1P", "Sync", "r2P", "pi"]
FORMULA = "G F r1P & G F r2P & G F pi & G F Sync"


def main():
    robots = [load_ts((DATA / name).read_text()) for name in ("t1.ts", "t2.ts")]
    dist = Distribution(({"r1P", "pi", "Sync"}, {"r2P", "pi", "Sync"}))
    rp = plan_robust(robots, FORMULA, dist, 0.05, PROPS)
    plan = rp.plan
    print(f"planned cost J = {plan.cost}, suffix duration {plan.suffix_duration}")
    print("pi times:", plan.pi_times(3)[:6])
    for run in plan.robot_runs:
        stops = ", ".join(f"{a.vertex}@{a.time:g}" for a in run.unroll(2))
        print(f"  robot {run.robot + 1}: {stops}")
    print(f"bounds at rho = 0.05: exact {rp.exact:.4g}, conservative {rp.conservative:.4g}")

    B = ltl_to_buchi(parse_ltl(FORMULA, PROPS), PROPS)
    on = simulate(plan, 0.05, 1000, seed=1)
    print(f"\nwith the barrier: field cost {field_cost(on):.4g}, "
          f"monitors ok = {verify_field_trace(on, plan, B, dist).ok}")

    off = simulate(plan, 0.05, 200, seed=1, sync=False,
                   mode=["adversarial-slow", "adversarial-fast"])
    sk = skew(off)
    print(f"without it: field cost {field_cost(off):.4g}, "
          f"skew after 10 cycles {sk[10]:.3g}, after 200 {sk[-1]:.3g}")


if __name__ == "__main__":
    main()
