"""Runs each CLI subcommand and validates its JSON artifacts against schemas/."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

RUNS = [
    ("simulate --n 4 --beta 0.5 --kappa 1 --seed 2 --t-end 3 --nu -1,1,1,-1 --x0 -1,-0.5,0.5,1",
     {"run.json": "run", "events.json": "events"}),
    ("simulate --n 4 --beta 2 --kappa 0.5 --order second --seed 3 --t-end 2", {"run.json": "run"}),
    ("predict --n 6 --beta 2 --kappa 0.4 --seed 1", {"predict.json": "predict"}),
    ("predict --n 6 --beta 0.5 --kappa 0.4 --seed 1", {"predict.json": "predict"}),
    ("kappa-critical --n 6 --beta 2 --seed 1", {"kappa_critical.json": "kappa_critical"}),
    ("sweep --n 6 --beta 2 --seed 1 --kappa-grid 0.1,1", {"run.json": "run"}),
    ("verify --n 4 --beta 2 --kappa 1 --seed 5 --t-end 10", {"verify.json": "verify"}),
    ("verify --n 4 --beta 0.5 --kappa 1 --seed 5 --t-end 10", {"verify.json": "verify"}),
    ("verify --n 4 --beta 1 --kappa 1 --seed 5 --t-end 10", {"verify.json": "verify"}),
    ("equilibrium --n 4 --beta 0.5 --kappa 1 --seed 9", {"equilibrium.json": "equilibrium"}),
]

CONFIG_EXAMPLE = {"n": 5, "beta": 2.0, "kappa": 0.4, "seed": 3, "t_end": 2.0, "order": "first"}


def load(schemas: Path, name: str) -> dict:
    return json.loads((schemas / f"{name}.schema.json").read_text())


def main() -> int:
    cli, schemas = sys.argv[1], Path(sys.argv[2])
    failures = 0
    for args, files in RUNS:
        with tempfile.TemporaryDirectory() as tmp:
            proc = subprocess.run([cli, *args.split(), "--out", tmp], capture_output=True, text=True)
            if proc.returncode != 0:
                print(f"FAIL {args}: exit {proc.returncode}: {proc.stderr.strip()}")
                failures += 1
                continue
            for file, schema in files.items():
                try:
                    jsonschema.validate(json.loads((Path(tmp) / file).read_text()), load(schemas, schema))
                    print(f"ok   {args} -> {file}")
                except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as e:
                    print(f"FAIL {args} -> {file}: {e}")
                    failures += 1

    config_schema = load(schemas, "config")
    jsonschema.validate(CONFIG_EXAMPLE, config_schema)
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "config.json"
        cfg.write_text(json.dumps(CONFIG_EXAMPLE))
        proc = subprocess.run([cli, "simulate", "--config", str(cfg), "--out", tmp], capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"FAIL config file run: {proc.stderr.strip()}")
            failures += 1
        else:
            jsonschema.validate(json.loads(proc.stdout), load(schemas, "run"))
            print("ok   simulate --config")
    print(f"{failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
