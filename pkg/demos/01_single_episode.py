"""Walk one robot through a bundled scenario and look at what it decided.

Run from the repository root:

    python3 demos/01_single_episode.py

The episode's map snapshots land in ``out/demo_single``.
"""

from collections import Counter
from pathlib import Path

from socnavmap import RunConfig, load_scenario, run_episode
from socnavmap.cli import bundled_suite

scenario = sorted(bundled_suite().glob("*.json"))[3]
spec = load_scenario(scenario)
print(f"scenario {spec.name}: {len(spec.humans)} humans, shortest path {spec.shortest_path:.2f} m")

out_dir = Path("out/demo_single")
outcome = run_episode(spec, RunConfig(), out_dir, trace=True, snapshot_every=25)
r = outcome.result

print(f"success={r.success} after {r.total_steps} steps ({outcome.reason})")
print(f"path {r.path_length:.2f} m, SPL term {r.spl_term:.3f}, personal-space compliance {r.psc:.1%}")
print(f"human contact: {r.collided} ({r.collision_steps} steps)")

# what the agent did, and why
reasons = Counter(d.reason for d in outcome.agent.decisions)
actions = Counter(d.action.value for d in outcome.agent.decisions)
print("decision reasons:", dict(reasons))
print("actions:", dict(actions))

# the robot re-plans every step; the geodesic distance to the target should mostly shrink
d = [x.d_start for x in outcome.agent.decisions if x.d_start is not None]
print(f"planned distance went from {d[0]:.0f} to {d[-1]:.0f} cells")

print(f"per-step agent time: median {1000 * sorted(outcome.step_times)[len(outcome.step_times) // 2]:.1f} ms")
print(f"snapshots and traces in {out_dir}")
