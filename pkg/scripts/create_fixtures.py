#!/usr/bin/env python3
"""
Create demo fixtures: a raw NetFlow CSV, a planted-rule CSV with its ground truth, and a pair of
theory files for trying out diff
"""

import argparse
import os
import sys
from random import Random

# Add the project root to the path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from lawmine.genbench.plant import PlantSpec, plant
from lawmine.genbench.rules import plant_spec_path
from lawmine.language.parser import parse_constraints
from lawmine.language.terms import format_constraint
from lawmine.theory.store import TheoryDocument, save_theory

# Sample hosts per address class
PRIVATE_HOSTS = ["192.168.100.5", "192.168.100.6", "192.168.210.3", "10.0.0.12", "172.16.4.20"]
PUBLIC_HOSTS = ["8.8.8.8", "151.101.1.69", "104.16.132.229", "13.107.42.14"]
SERVICES = [("TCP", 80), ("TCP", 443), ("TCP", 22), ("UDP", 53), ("UDP", 123), ("ICMP", 0)]

NORMAL_THEORY = """
Proto="TCP" -> DstPort!=53 | SrcPort!=80
DstPort=53 -> Proto="UDP"
Bytes >= 20*Packets
"""

UNKNOWN_THEORY = """
DstPort=53 -> Proto="UDP"
Proto="TCP" -> DstPort!=53
DstPort=22 -> Packets <= 3
"""


def netflow_rows(count: int, seed: int):
    rng = Random(seed)
    start = 1_490_000_000
    for i in range(count):
        proto, port = rng.choice(SERVICES)
        packets = rng.randint(1, 40)
        flags = ".AP.SF" if proto == "TCP" else "......"
        yield [
            "2017-03-15 00:%02d:%02d.%03d" % ((i // 60) % 60, i % 60, rng.randint(0, 999)),
            proto,
            rng.choice(PRIVATE_HOSTS),
            rng.choice(PUBLIC_HOSTS + PRIVATE_HOSTS),
            rng.randint(1024, 65535) if proto != "ICMP" else 0,
            port,
            packets,
            packets * rng.randint(40, 1500),
            flags,
        ]


def create_fixtures(out: str, rows: int, seed: int) -> None:
    os.makedirs(out, exist_ok=True)

    print("Creating NetFlow sample...")
    path = os.path.join(out, "netflow.csv")
    with open(path, "w", encoding="utf-8") as f:
        f.write("Timestamp,Proto,SrcIp,DstIp,SrcPort,DstPort,Packets,Bytes,Flags\n")
        for row in netflow_rows(rows, seed):
            f.write(",".join(str(cell) for cell in row) + "\n")
    print(f"Created {path}")

    print("Creating planted-rule dataset...")
    spec = PlantSpec.from_toml(plant_spec_path()).with_overrides(rows=rows, seed=seed)
    d, truth = plant(spec)
    d.to_csv(os.path.join(out, "planted.csv"))
    with open(os.path.join(out, "planted.rules"), "w", encoding="utf-8") as f:
        f.write("\n".join(format_constraint(c) for c in truth) + "\n")
    print(f"Created planted.csv with {d.row_count} rows and {len(truth)} planted constraints")

    print("Creating theory pair for diff...")
    for name, text in (("normal", NORMAL_THEORY), ("unknown", UNKNOWN_THEORY)):
        save_theory(os.path.join(out, f"{name}.lawmine"), TheoryDocument(parse_constraints(text)))
    print("Fixtures complete!")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data")
    parser.add_argument("--rows", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    create_fixtures(args.out, args.rows, args.seed)
