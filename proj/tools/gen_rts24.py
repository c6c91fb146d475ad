#!/usr/bin/env python3
# Copyright 2026 The psps-planner Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled synthetic 24-bus dataset under data/rts24.

The topology follows the 38 branches of the IEEE RTS 24-bus system. Bus
positions, generator fleet, demand, line risk and history are synthetic and
fully determined by the seed below. Eleven lines carry zero ignition risk.
The day is split into eight three-hour steps.
"""

import argparse
import json
import math
import pathlib

import numpy as np

SEED = 2026
HORIZON = 8
STEP_HOURS = 3.0

BRANCHES = [
    (1, 2), (1, 3), (1, 5), (2, 4), (2, 6), (3, 9), (3, 24), (4, 9), (5, 10),
    (6, 10), (7, 8), (8, 9), (8, 10), (9, 11), (9, 12), (10, 11), (10, 12),
    (11, 13), (11, 14), (12, 13), (12, 23), (13, 23), (14, 16), (15, 16),
    (15, 21), (15, 21), (15, 24), (16, 17), (16, 19), (17, 18), (17, 22),
    (18, 21), (18, 21), (19, 20), (19, 20), (20, 23), (20, 23), (21, 22),
]
ZERO_RISK = {14, 23, 24, 25, 26, 28, 30, 31, 32, 33, 38}
TRANSFORMERS = {7, 14, 15, 16, 17}

POSITIONS = {
    1: (38.00, -122.00), 2: (38.00, -121.60), 3: (38.30, -122.20),
    4: (38.20, -121.50), 5: (38.25, -121.85), 6: (38.20, -121.20),
    7: (38.10, -120.90), 8: (38.30, -121.00), 9: (38.45, -121.70),
    10: (38.45, -121.30), 11: (38.70, -121.60), 12: (38.70, -121.30),
    13: (38.85, -121.10), 14: (38.85, -121.80), 15: (39.20, -122.10),
    16: (39.10, -121.80), 17: (39.35, -121.80), 18: (39.50, -121.70),
    19: (39.05, -121.45), 20: (39.10, -121.20), 21: (39.45, -122.05),
    22: (39.60, -121.90), 23: (38.95, -120.95), 24: (38.60, -122.20),
}

# Peak MW per load bus.
PEAKS = {
    1: 65, 2: 58, 3: 108, 4: 44, 5: 43, 6: 82, 7: 75, 8: 103, 9: 105,
    10: 117, 13: 159, 14: 116, 15: 190, 16: 60, 18: 200, 19: 109, 20: 77,
}
HOURLY_SHAPE = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96,
                0.95, 0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83,
                0.73, 0.63]
SHAPE = [round(sum(HOURLY_SHAPE[3 * t:3 * t + 3]) / 3.0, 4) for t in range(HORIZON)]

# bus, p_min, p_max, ramp per hour, min_up and min_down in hours, cost,
# startup, shutdown, on
GENERATORS = [
    (1, 20, 120, 80, 2, 2, 60.0, 800.0, 100.0, False),
    (2, 20, 120, 80, 2, 2, 65.0, 800.0, 100.0, False),
    (7, 30, 150, 100, 2, 2, 70.0, 900.0, 100.0, False),
    (13, 100, 400, 150, 4, 4, 25.0, 3000.0, 300.0, True),
    (15, 40, 200, 120, 3, 3, 20.0, 1500.0, 200.0, True),
    (16, 30, 150, 100, 3, 3, 22.0, 1200.0, 150.0, False),
    (18, 200, 400, 100, 8, 8, 12.0, 6000.0, 500.0, True),
    (21, 200, 400, 100, 8, 8, 12.0, 6000.0, 500.0, True),
    (22, 0, 300, 300, 1, 1, 5.0, 0.0, 0.0, True),
    (23, 150, 500, 200, 4, 4, 28.0, 4000.0, 400.0, True),
    (23, 20, 150, 100, 2, 2, 45.0, 700.0, 100.0, False),
]

# (upper edge, mean OWIP); the first bin starts at 0.
WLFP_TABLE = [(1e-4, 0.0), (2e-4, 0.01), (4e-4, 0.02), (6e-4, 0.035), (8e-4, 0.05),
              (1e-3, 0.07)]


def network():
    buses = [{"id": b, "name": f"bus{b}", "latitude": POSITIONS[b][0],
              "longitude": POSITIONS[b][1]} for b in range(1, 25)]
    lines = []
    for i, (a, b) in enumerate(BRANCHES, start=1):
        high_voltage = a >= 11 and b >= 11
        cap = 500.0 if high_voltage else (400.0 if i in TRANSFORMERS else 175.0)
        susceptance = 2000.0 if high_voltage else (1200.0 if i in TRANSFORMERS else 700.0)
        lines.append({"id": i, "from_bus": a, "to_bus": b, "susceptance": susceptance,
                      "flow_min": -cap, "flow_max": cap})
    gens = []
    for i, g in enumerate(GENERATORS, start=1):
        bus, pmin, pmax, ramp, up, dn, cost, su, sd, on = g
        ramp = min(float(pmax), ramp * STEP_HOURS)
        gens.append({"id": i, "bus": bus, "p_min": float(pmin), "p_max": float(pmax),
                     "ramp_down": -ramp, "ramp_up": ramp,
                     "min_up": math.ceil(up / STEP_HOURS),
                     "min_down": math.ceil(dn / STEP_HOURS), "marginal_cost": cost, "startup_cost": su,
                     "shutdown_cost": sd, "initially_on": on})
    demands = []
    for i, (bus, peak) in enumerate(sorted(PEAKS.items()), start=1):
        demands.append({"id": i, "bus": bus, "voll": 1000.0,
                        "base_profile": [round(peak * s, 3) for s in SHAPE]})
    return {"horizon": HORIZON, "step_hours": STEP_HOURS, "buses": buses, "lines": lines,
            "generators": gens, "demands": demands}


def line_risk_json(pi_by_line, metric_by_line):
    out = []
    for i in range(1, len(BRANCHES) + 1):
        pi = pi_by_line[i]
        entry = {"line": i, "pi": [pi] * HORIZON, "metric_value": metric_by_line[i],
                 "cells": []}
        if pi > 0.0:
            entry["log_pi"] = [math.log(pi)] * HORIZON
            entry["log_one_minus_pi"] = [math.log1p(-pi)] * HORIZON
        out.append(entry)
    return {"lines": out}


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent
                                             / "data" / "rts24"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    rng = np.random.default_rng(SEED)

    net = network()
    write(out / "network.json", json.dumps(net, indent=2) + "\n")

    # Day-ahead forecast: a narrow band keeps the log-product budget close
    # to a cap on the number of energized risky lines.
    da_pi, rt_pi, wlfp = {}, {}, {}
    for i in range(1, len(BRANCHES) + 1):
        if i in ZERO_RISK:
            da_pi[i] = rt_pi[i] = wlfp[i] = 0.0
            continue
        da_pi[i] = round(float(rng.uniform(0.030, 0.036)), 5)
        rt_pi[i] = round(float(da_pi[i] * rng.uniform(0.5, 2.5)), 5)
        wlfp[i] = round(float(rng.uniform(1.2e-4, 8e-4)), 7)
    write(out / "line_risk_da.json", json.dumps(line_risk_json(da_pi, wlfp), indent=2) + "\n")
    write(out / "line_risk_rt.json", json.dumps(line_risk_json(rt_pi, wlfp), indent=2) + "\n")

    total = np.array([sum(PEAKS.values()) * s for s in SHAPE])
    realized = total * (1.0 + rng.normal(0.0, 0.03, HORIZON))
    write(out / "realized_demand.csv",
          "step,total_demand\n" + "".join(f"{t + 1},{v:.3f}\n" for t, v in enumerate(realized)))

    # Sixty summer days of history.
    demand_rows, risk_rows = ["date,step,total_demand"], []
    risk_header = "date,cumulative_bus_risk," + ",".join(f"line_{i}" for i in
                                                         range(1, len(BRANCHES) + 1))
    for d in range(60):
        month, day = (7, d + 1) if d < 31 else (8, d - 30)
        date = f"2021-{month:02d}-{day:02d}"
        level = rng.normal(1.0, 0.08)
        for t in range(HORIZON):
            v = total[t] * level * (1.0 + rng.normal(0.0, 0.02))
            demand_rows.append(f"{date},{t + 1},{v:.3f}")
        severity = rng.gamma(4.0, 0.25)
        metrics = [0.0 if i in ZERO_RISK else min(1e-3, wlfp[i] * severity)
                   for i in range(1, len(BRANCHES) + 1)]
        risk_rows.append(f"{date},{sum(metrics):.7f}," + ",".join(f"{m:.7f}" for m in metrics))
    write(out / "history_demand.csv", "\n".join(demand_rows) + "\n")
    write(out / "history_risk.csv", risk_header + "\n" + "\n".join(risk_rows) + "\n")

    # Synthetic WLFP reliability table: clearly not a USGS product.
    rows = ["value_lo,value_hi,mean_owip"]
    lo = 0.0
    for hi, owip in WLFP_TABLE:
        rows.append(f"{lo},{hi},{owip}")
        lo = hi
    write(out / "reliability_wlfp.csv", "\n".join(rows) + "\n")

    # Synthetic large-fire records over twenty years in two regions.
    fires = ["date,latitude,longitude,acres"]
    centers = [(39.3, -121.9), (38.2, -121.2)]
    weights = np.array([1, 1, 2, 3, 5, 9, 14, 16, 12, 6, 3, 1], dtype=float)
    weights /= weights.sum()
    for _ in range(300):
        lat, lon = centers[int(rng.integers(0, 2))]
        month = int(rng.choice(12, p=weights)) + 1
        year = 2001 + int(rng.integers(0, 20))
        fires.append(f"{year}-{month:02d}-{int(rng.integers(1, 29)):02d},"
                     f"{lat + rng.normal(0, 0.15):.4f},{lon + rng.normal(0, 0.15):.4f},"
                     f"{float(rng.lognormal(7.0, 1.0)):.1f}")
    write(out / "fires.csv", "\n".join(fires) + "\n")

    # Monthly WIP per bus for two metrics: both follow the fire season, the
    # WLFP-like series with less distortion than the WFPI-like one.
    months = ",".join(f"m{m}" for m in range(1, 13))
    season = weights * 12.0
    wfpi_rows, wlfp_rows = [f"bus,{months}"], [f"bus,{months}"]
    for b in range(1, 25):
        scale = float(rng.uniform(0.8, 1.2)) * 4e-6
        wlfp_series = scale * season * rng.uniform(0.85, 1.15, 12)
        wfpi_series = scale * np.sqrt(season) * rng.uniform(0.6, 1.4, 12)
        wfpi_rows.append(f"{b}," + ",".join(f"{v:.4e}" for v in wfpi_series))
        wlfp_rows.append(f"{b}," + ",".join(f"{v:.4e}" for v in wlfp_series))
    write(out / "wip_wfpi.csv", "\n".join(wfpi_rows) + "\n")
    write(out / "wip_wlfp.csv", "\n".join(wlfp_rows) + "\n")


if __name__ == "__main__":
    main()
