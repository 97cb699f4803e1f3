"""Campaign plots from JSONL trial logs.

Renders the three standard views of a swoop campaign:

* ``xz_trajectories.png`` — side view, one curve per trial
* ``speed_vs_x.png``      — speed along the approach axis per trial
* ``y_deviation.png``     — lateral deviation along the approach axis

The input directory must contain a ``trials.jsonl`` whose records embed
their trajectory logs (``--keep-logs`` on the campaign runner).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GRASP_NEIGHBORHOOD = 0.5  # m around the object used for the min-speed stat


class PlotError(RuntimeError):
    pass


@dataclass(frozen=True)
class CampaignPlots:
    paths: tuple[str, ...]
    trials: int
    min_speed_near_grasp: float


def _load_trials(in_dir):
    path = os.path.join(in_dir, "trials.jsonl")
    if not os.path.exists(path):
        raise PlotError(f"no trials.jsonl in {in_dir!r}")
    trials = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PlotError(f"{path}:{lineno}: corrupt record ({exc})") from None
            trials.append(rec)
    if not trials:
        raise PlotError(f"{path} contains no trials")
    missing = [t["trial_id"] for t in trials if not t.get("log")]
    if missing:
        raise PlotError(
            f"trials {missing[:5]} have no embedded logs; "
            "re-run the campaign with --keep-logs"
        )
    return trials


def _arrays(rec):
    log = rec["log"]
    ts = np.array([row["t"] for row in log])
    pos = np.array([row["pos"] for row in log])
    if all(row.get("vel") is not None for row in log):
        vel = np.array([row["vel"] for row in log])
    else:
        vel = np.gradient(pos, ts, axis=0)
    return ts, pos, vel


def plot_campaign(in_dir, out_dir) -> CampaignPlots:
    trials = _load_trials(in_dir)
    os.makedirs(out_dir, exist_ok=True)
    label = trials[0].get("object", "object")

    min_speed = float("inf")
    fig_xz, ax_xz = plt.subplots(figsize=(7, 4))
    fig_v, ax_v = plt.subplots(figsize=(7, 4))
    fig_y, ax_y = plt.subplots(figsize=(7, 4))
    for rec in trials:
        _, pos, vel = _arrays(rec)
        x = pos[:, 0]
        speed = np.linalg.norm(vel, axis=1)
        ax_xz.plot(x, pos[:, 2], lw=0.6, alpha=0.6)
        ax_v.plot(x, speed, lw=0.6, alpha=0.6)
        ax_y.plot(x, pos[:, 1], lw=0.6, alpha=0.6)
        near = np.abs(x) <= GRASP_NEIGHBORHOOD
        if near.any():
            min_speed = min(min_speed, float(speed[near].min()))

    ax_xz.set_xlabel("x [m]")
    ax_xz.set_ylabel("z [m]")
    ax_xz.set_title(f"Swoop trajectories, {label} ({len(trials)} trials)")
    ax_v.set_xlabel("x [m]")
    ax_v.set_ylabel("speed [m/s]")
    ax_v.set_title(f"Speed along the swoop, {label}")
    ax_v.axvline(0.0, color="k", ls=":", lw=0.8)
    ax_y.set_xlabel("x [m]")
    ax_y.set_ylabel("y [m]")
    ax_y.set_title(f"Lateral deviation, {label}")

    paths = []
    for fig, name in ((fig_xz, "xz_trajectories.png"), (fig_v, "speed_vs_x.png"),
                      (fig_y, "y_deviation.png")):
        path = os.path.join(out_dir, name)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

    return CampaignPlots(
        paths=tuple(paths), trials=len(trials), min_speed_near_grasp=min_speed
    )
