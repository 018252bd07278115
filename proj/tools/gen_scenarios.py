#!/usr/bin/env python3
"""Regenerates fixtures/, scenarios/ and tests/data/fk_oracle.json.

Forward kinematics here is a plain product of 4x4 matrices, written
independently of the C++ library so the frozen values can serve as an oracle.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent

PLANAR2 = {
    "name": "planar2",
    "dof": 2,
    "joints": [
        {"axis": [0, 0, 1], "offset": {"xyz": [0, 0, 0]}},
        {"axis": [0, 0, 1], "offset": {"xyz": [1, 0, 0]}},
    ],
    "joint_limits": [[-math.pi, math.pi], [-math.pi, math.pi]],
    "v_max": [2.0, 2.0],
    "a_max": [15.0, 15.0],
    "control_frequency": 100,
    "ee_offset": {"xyz": [1, 0, 0]},
    "home": [0.0, 0.5],
}

SIX_DOF = {
    "name": "six_dof",
    "dof": 6,
    "joints": [
        {"axis": [0, 0, 1], "offset": {"xyz": [0, 0, 0]}},
        {"axis": [0, 1, 0], "offset": {"xyz": [0, 0, 0.3]}},
        {"axis": [0, 1, 0], "offset": {"xyz": [0, 0, 0.4]}},
        {"axis": [0, 0, 1], "offset": {"xyz": [0, 0, 0.35]}},
        {"axis": [0, 1, 0], "offset": {"xyz": [0, 0, 0]}},
        {"axis": [0, 0, 1], "offset": {"xyz": [0, 0, 0]}},
    ],
    "joint_limits": [[-2.9, 2.9], [-2.0, 2.0], [-2.6, 2.6], [-2.9, 2.9], [-2.2, 2.2], [-3.0, 3.0]],
    "v_max": [2.0, 2.0, 2.0, 2.5, 2.5, 2.5],
    "a_max": [15.0, 15.0, 15.0, 20.0, 20.0, 20.0],
    "control_frequency": 100,
    "ee_offset": {"xyz": [0, 0, 0.1]},
    # Tool pointing straight down: q2 + q3 + q5 = pi.
    "home": [0.0, 0.3, 1.6, 0.0, math.pi - 1.9, 0.0],
}


def rot(axis, angle):
    k = np.asarray(axis, dtype=float)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * kx @ kx


def rpy_matrix(r, p, y):
    return rot([0, 0, 1], y) @ rot([0, 1, 0], p) @ rot([1, 0, 0], r)


def homogeneous(R, t):
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = t
    return T


def offset(spec):
    rpy = spec.get("rpy", [0, 0, 0])
    return homogeneous(rpy_matrix(*rpy), spec.get("xyz", [0, 0, 0]))


def fk(chain, q):
    T = np.eye(4)
    for joint, angle in zip(chain["joints"], q):
        T = T @ offset(joint["offset"]) @ homogeneous(rot(joint["axis"], angle), [0, 0, 0])
    T = T @ offset(chain["ee_offset"])
    R = T[:3, :3]
    pitch = math.asin(max(-1.0, min(1.0, -R[2, 0])))
    if abs(math.cos(pitch)) > 1e-9:
        roll = math.atan2(R[2, 1], R[2, 2])
        yaw = math.atan2(R[1, 0], R[0, 0])
    else:
        roll = 0.0
        yaw = math.atan2(-R[0, 1], R[1, 1])
    return [*T[:3, 3].tolist(), roll, pitch, yaw]


def waypoint(position, rpy, duration):
    return {"pose": [*map(float, position), *map(float, rpy)], "duration": duration}


def draw_line(home_pose):
    start = np.array(home_pose[:3])
    rpy = home_pose[3:]
    step = np.array([0.0, 0.02, 0.0])
    points = [start + k * step for k in range(1, 8)]
    return {
        "name": "draw-line",
        "chain": "../fixtures/six_dof.json",
        "fc": 100,
        "end_time": 4.5,
        "ideal_path": {"type": "polyline", "points": [start.tolist()] + [p.tolist() for p in points]},
        "events": [
            {"t": 0.0, "action": "send_request", "id": "line", "expect": "accepted",
             "waypoints": [waypoint(p, rpy, 0.5) for p in points]},
            {"t": 4.0, "action": "assert", "check": "at_rest"},
            {"t": 4.0, "action": "assert", "check": "ee_near", "position": points[-1].tolist(), "tol": 1e-4},
        ],
    }


def draw_circle(home_pose):
    start = np.array(home_pose[:3])
    rpy = home_pose[3:]
    radius = 0.05
    center = start + np.array([0.0, radius, 0.0])
    # Starts and ends at the home position, which sits at angle -pi/2.
    points = []
    for k in range(1, 19):
        a = -math.pi / 2 + 2 * math.pi * k / 18
        points.append(center + radius * np.array([math.cos(a), math.sin(a), 0.0]))
    return {
        "name": "draw-circle",
        "chain": "../fixtures/six_dof.json",
        "fc": 100,
        "end_time": 10.0,
        "ideal_path": {"type": "circle", "center": center.tolist(), "normal": [0, 0, 1], "radius": radius},
        "events": [
            {"t": 0.0, "action": "send_request", "id": "circle", "expect": "accepted",
             "waypoints": [waypoint(p, rpy, 0.5) for p in points]},
            {"t": 9.5, "action": "assert", "check": "at_rest"},
            {"t": 9.5, "action": "assert", "check": "ee_near", "position": start.tolist(), "tol": 1e-4},
        ],
    }


def chase(home_pose):
    hover = 0.1
    target = np.array(home_pose[:3]) - np.array([0, 0, hover])
    return {
        "name": "chase",
        "chain": "../fixtures/six_dof.json",
        "fc": 100,
        "end_time": 15.0,
        "target": {"position": target.tolist()},
        "chase": {
            "start": 0.0,
            "period": 1.0,
            "duration": 1.5,
            "offset": [0, 0, hover],
            "rpy": list(home_pose[3:]),
            "grasp_threshold": 0.002,
        },
        "events": [
            {"t": 0.0, "action": "move_target", "velocity": [-0.03, 0, 0]},
            {"t": 6.0, "action": "move_target", "velocity": [0.03, 0, 0]},
            {"t": 11.0, "action": "move_target", "velocity": [0, 0, 0]},
            {"t": 14.5, "action": "assert", "check": "at_rest"},
            {"t": 14.5, "action": "assert", "check": "ee_near_target", "tol": 1e-4},
        ],
    }


def teleop_master(home_pose, seconds=6.0, rate=25.0):
    x0, y0, z0 = home_pose[:3]
    rows = []
    for k in range(int(round(seconds * rate)) + 1):
        t = k / rate
        w = 2 * math.pi * 0.25
        rows.append([t,
                     x0 + 0.02 * math.sin(w * t),
                     y0 + 0.015 * (1 - math.cos(w * t)),
                     z0 + 0.01 * math.sin(2 * w * t),
                     *home_pose[3:]])
    return rows


def teleop(_home_pose):
    return {
        "name": "teleop-replay",
        "chain": "../fixtures/six_dof.json",
        "fc": 100,
        "end_time": 6.6,
        "teleop": {"master": "teleop-master.csv", "rate": 25, "buffer": 5, "segment": 0.04, "jitter_ms": 0},
        "events": [
            {"t": 6.5, "action": "assert", "check": "at_rest"},
        ],
    }


def fk_oracle(seed):
    rng = np.random.default_rng(seed)
    cases = []
    for chain in (PLANAR2, SIX_DOF):
        for _ in range(10):
            q = [float(rng.uniform(lo, hi)) for lo, hi in chain["joint_limits"]]
            cases.append({"chain": chain["name"], "q": q, "pose": fk(chain, q)})
    cases.append({"chain": "six_dof", "q": SIX_DOF["home"], "pose": fk(SIX_DOF, SIX_DOF["home"])})
    return cases


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    dump(ROOT / "fixtures/planar2.json", PLANAR2)
    dump(ROOT / "fixtures/six_dof.json", SIX_DOF)
    home_pose = fk(SIX_DOF, SIX_DOF["home"])
    dump(ROOT / "scenarios/draw-line.json", draw_line(home_pose))
    dump(ROOT / "scenarios/draw-circle.json", draw_circle(home_pose))
    dump(ROOT / "scenarios/chase.json", chase(home_pose))
    dump(ROOT / "scenarios/teleop-replay.json", teleop(home_pose))
    with open(ROOT / "scenarios/teleop-master.csv", "w") as f:
        f.write("timestamp,x,y,z,roll,pitch,yaw\n")
        for row in teleop_master(home_pose):
            f.write(",".join(repr(v) for v in row) + "\n")
    dump(ROOT / "tests/data/fk_oracle.json", fk_oracle(args.seed))


if __name__ == "__main__":
    main()
