"""Deterministic control-plane emulation and the strategy comparison.

Runs the full emulator on a shortened desk scenario for all three
strategies, under shared arrival randomness, and prints the headline
comparison: drop rate, response delay, and total control overhead.
"""
import numpy as np

from eunomia.emulator import run_scenario
from eunomia.scenario import build_scenario, desk_config

scn = build_scenario(desk_config(), horizon_s=1200.0)
print(f"{len(scn.slots)} slots over {scn.horizon_s:.0f} s; "
      f"config {scn.config_hash[:12]}; seed 1, gammas 0.5 and 1.0\n")

rows = []
for strategy in ("eunomia", "odc", "greedy"):
    for result in run_scenario(scn, strategy, [0.5, 1.0], [1]):
        requests = sum(s.requests_total for s in result.stats)
        drops = sum(s.requests_dropped for s in result.stats)
        served = requests - drops
        resp = (
            sum(s.resp_mean_s * (s.requests_total - s.requests_dropped) for s in result.stats)
            / served
            if served
            else float("nan")
        )
        w_ctl = float(np.mean([r.w_ctl for r in result.reports]))
        rows.append((strategy, result.gamma, requests, drops / requests, resp, w_ctl,
                     result.migrations))

print(f"{'strategy':8s} {'gamma':>5s} {'requests':>9s} {'drop':>7s} "
      f"{'resp (s)':>9s} {'W_CTL':>7s} {'migr':>5s}")
for strategy, gamma, requests, drop, resp, w_ctl, migrations in rows:
    print(f"{strategy:8s} {gamma:5.2f} {requests:9d} {drop:7.3f} "
          f"{resp:9.4f} {w_ctl:7.3f} {migrations:5d}")

print(
    "\nThe request totals match across strategies at equal gamma: arrivals are\n"
    "drawn once per (slot, seed) and thinned, so differences reflect the\n"
    "partitioning alone. The hierarchical strategies answer in one hop while\n"
    "the centralized baseline pays multi-hop relays and a saturated queue at\n"
    "full load; uncovered polar passes put a floor under every drop rate."
)
