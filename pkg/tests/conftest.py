import json

import pytest

from aahpump.cli import PRESETS, main as cli_main


@pytest.fixture(scope="session")
def run_preset(tmp_path_factory):
    """Run a named CLI preset once per (name, threads) and cache the outdir."""
    base = tmp_path_factory.mktemp("preset_runs")
    done = {}

    def run(name, threads=1):
        key = (name, threads)
        if key not in done:
            command = PRESETS[name][0]
            outdir = base / f"{name}_t{threads}"
            rc = cli_main([command, "--preset", name,
                           "--outdir", str(outdir),
                           "--threads", str(threads)])
            assert rc == 0, f"preset {name} (threads={threads}) exited {rc}"
            done[key] = outdir
        return done[key]

    return run


@pytest.fixture(scope="session")
def pump_summary(run_preset):
    """Parsed run-summary JSON of a pump preset (threads=1 run)."""

    def get(name):
        outdir = run_preset(name, threads=1)
        with open(outdir / f"{name}_summary.json") as fh:
            return json.load(fh)

    return get
