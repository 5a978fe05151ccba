"""Command-line front end: presets, config parsing, and artifact emission.

Subcommands map onto the library modules: `bands` (Bloch bands or a gap
scan), `phase-diagram` (Chern-number sweep with a resumable cell cache),
`edges` (open-chain spectral flow and winding numbers), `pump` (split-step
pumping runs), and `extract` (tight-binding parameter fits).  Every named
figure experiment has a preset; `--check` reruns a preset and verifies its
reference expectations (exit 4 on mismatch).  Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 check mismatch.

Configuration is a flat `key = value` file and/or `key=value` command-line
overrides (overrides win); unknown keys are rejected.  All outputs go
through deterministic 12-significant-digit formatting, so results are
byte-identical regardless of --threads.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import threading

import numpy as np

from . import __version__
from .edges import FiducialInGapViolation, gap_fiducials, winding_numbers
from .extraction import FitDegenerate, NoBoundMode, extract_parameters, \
    extraction_report
from .ioutil import format_float, write_csv, write_json, write_pgm
from .model import ModulationParams
from .propagation import BoundaryLeakage, GridUnderresolved, IndexModulated, \
    OpticalConstants, SpacingModulated, default_grid, gaussian_input, \
    injection_guide, lz_ratio, run_summary, split_step_propagate
from .spectral import band_grid, gap_scan
from .topology import ChernVector, MeshTooCoarse, Undefined, chern_numbers, \
    phase_diagram

CM_TO_UM = 1e4


class ConfigError(ValueError):
    pass


class CheckFailure(AssertionError):
    pass


def _bool(s):
    if isinstance(s, bool):
        return s
    if str(s).lower() in ("true", "1", "yes"):
        return True
    if str(s).lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _guide(s):
    if isinstance(s, int):
        return s
    if str(s).lower() == "auto":
        return None
    return int(s)


# key -> (caster, default) per subcommand
SCHEMAS = {
    "bands": {
        "nu_od_over_J": (float, 1.0),
        "nu_d_over_J": (float, 0.0),
        "p": (int, 1),
        "q": (int, 3),
        "delta_phi_rad": (float, 0.0),
        "nx": (int, 48),
        "ny": (int, 48),
        "pgm": (_bool, False),
        "scan": (_bool, False),
        "scan_min": (float, 0.0),
        "scan_max": (float, 12.0),
        "scan_step": (float, 0.1),
    },
    "phase-diagram": {
        "nu_od_over_J_min": (float, 0.0),
        "nu_od_over_J_max": (float, 12.0),
        "nu_od_over_J_step": (float, 1.0),
        "nu_d_over_J_min": (float, -4.0),
        "nu_d_over_J_max": (float, 4.0),
        "nu_d_over_J_step": (float, 1.0),
        "p": (int, 1),
        "q": (int, 3),
        "delta_phi_rad": (float, 0.0),
        "nx": (int, 24),
        "ny": (int, 24),
    },
    "edges": {
        "nu_od_over_J": (float, 1.0),
        "nu_d_over_J": (float, 0.0),
        "p": (int, 1),
        "q": (int, 3),
        "delta_phi_rad": (float, 0.0),
        "num_sites": (int, 89),
        "n_ky": (int, 400),
        "edge_sites": (int, 5),
        "edge_threshold": (float, 0.5),
    },
    "pump": {
        "design": (str, "index"),
        "gamma": (float, 9e-4),
        "alpha": (float, 0.5),
        "p": (int, 1),
        "q": (int, 3),
        "ws_um": (float, 10.0),
        "wx_um": (float, 3.0),
        "wm_um": (float, 18.0),
        "phi0_rad": (float, 0.0),
        "Z_cm": (float, 30.0),
        "num_guides": (int, 21),
        "W_um": (float, 3.77),
        "dx_um": (float, 0.15625),
        "dz_um": (float, 1.0),
        "num_slices": (int, 200),
        "injection_guide": (_guide, None),
        "lz_estimate": (_bool, True),
    },
    "extract": {
        "gamma": (float, 9e-4),
        "alpha": (float, 0.5),
        "p": (int, 1),
        "q": (int, 3),
        "ws_um": (float, 10.0),
        "wx_um": (float, 3.0),
        "Z_cm": (float, 30.0),
        "mode_dx_um": (float, 0.05),
    },
}

NUMERICAL_ERRORS = (MeshTooCoarse, BoundaryLeakage, GridUnderresolved,
                    NoBoundMode, FitDegenerate, FiducialInGapViolation,
                    np.linalg.LinAlgError)


def _inclusive_range(lo, hi, step):
    n = int(round((hi - lo) / step))
    if abs(lo + n * step - hi) > 1e-9 * max(1.0, abs(hi)):
        raise ConfigError(f"range [{lo}, {hi}] is not a whole number of "
                          f"steps of {step}")
    return [lo + i * step for i in range(n + 1)]


def _tb_params(cfg) -> ModulationParams:
    return ModulationParams(1.0, cfg["nu_d_over_J"], cfg["nu_od_over_J"],
                            cfg["p"], cfg["q"], cfg["delta_phi_rad"])


def _cell_str(cv: ChernVector) -> list:
    return [("undef" if isinstance(c, Undefined) else c) for c in cv]


# ---------------------------------------------------------------- commands

def cmd_bands(cfg, prefix, threads):
    if cfg["scan"]:
        ratios = _inclusive_range(cfg["scan_min"], cfg["scan_max"],
                                  cfg["scan_step"])
        rows = gap_scan(_tb_params(cfg), ratios, cfg["nx"], cfg["ny"],
                        threads=threads)
        header = ["nu_od_over_J"] + [f"G{n}" for n in range(1, cfg["q"])]
        write_csv(prefix + "_gaps.csv", header, rows)
        return {"scan": rows}
    params = _tb_params(cfg)
    grid = band_grid(params, cfg["nx"], cfg["ny"], threads=threads)
    rows = []
    for n in range(params.q):
        for i, kx in enumerate(grid.kxs):
            for j, ky in enumerate(grid.kys):
                rows.append((kx, ky, n + 1, grid.energies[n, i, j]))
    write_csv(prefix + "_bands.csv", ["kx", "ky", "band", "energy"], rows)
    if cfg["pgm"]:
        for n in range(params.q):
            write_pgm(f"{prefix}_band{n + 1}.pgm", grid.energies[n])
    gaps = tuple(float(grid.energies[n + 1].min() - grid.energies[n].max())
                 for n in range(params.q - 1))
    try:
        cherns = _cell_str(chern_numbers(params, cfg["nx"], cfg["ny"]))
    except MeshTooCoarse:
        cherns = ["undef"] * params.q
    return {"gaps": gaps, "cherns": cherns}


def cmd_phase_diagram(cfg, prefix, threads):
    od = _inclusive_range(cfg["nu_od_over_J_min"], cfg["nu_od_over_J_max"],
                          cfg["nu_od_over_J_step"])
    d = _inclusive_range(cfg["nu_d_over_J_min"], cfg["nu_d_over_J_max"],
                         cfg["nu_d_over_J_step"])
    q = cfg["q"]
    template = ModulationParams(1.0, 0.0, 1.0, cfg["p"], q,
                                cfg["delta_phi_rad"])

    cache_path = prefix + "_cells.cache"
    cache = {}
    if os.path.exists(cache_path):
        with open(cache_path) as fh:
            for line in fh:
                parts = line.split()
                if len(parts) != q + 1:
                    continue
                entries = tuple(
                    Undefined(0.0) if p == "undef" else int(p)
                    for p in parts[1:])
                cache[int(parts[0])] = ChernVector(entries)
    lock = threading.Lock()
    fh = open(cache_path, "a")

    def on_cell(flat, cv):
        with lock:
            fh.write(f"{flat} " + " ".join(str(c) for c in cv) + "\n")
            fh.flush()

    try:
        diagram = phase_diagram(template, od, d, cfg["nx"], cfg["ny"],
                                threads=threads, cell_cache=cache,
                                on_cell=on_cell)
    finally:
        fh.close()
    # rewrite the cache sorted by cell index so reruns are byte-identical
    with open(cache_path, "w") as fh:
        for i in range(len(od)):
            for j in range(len(d)):
                flat = i * len(d) + j
                cv = diagram.cells[i][j]
                fh.write(f"{flat} " + " ".join(str(c) for c in cv) + "\n")

    rows = []
    for i, r_od in enumerate(od):
        for j, r_d in enumerate(d):
            rows.append([r_od, r_d] + _cell_str(diagram.cells[i][j]))
    header = ["nu_od_over_J", "nu_d_over_J"] + \
        [f"C{n}" for n in range(1, q + 1)]
    write_csv(prefix + "_phase_diagram.csv", header, rows)
    for n in range(q):
        img = np.zeros((len(d), len(od)))
        values = [diagram.cells[i][j][n] for i in range(len(od))
                  for j in range(len(d))
                  if isinstance(diagram.cells[i][j][n], int)]
        floor = (min(values) - 1) if values else -1
        for i in range(len(od)):
            for j in range(len(d)):
                c = diagram.cells[i][j][n]
                img[j, i] = c if isinstance(c, int) else floor
        write_pgm(f"{prefix}_C{n + 1}.pgm", img)
    return {"diagram": diagram, "od": od, "d": d}


def cmd_edges(cfg, prefix, threads):
    params = _tb_params(cfg)
    wr = winding_numbers(params, cfg["num_sites"], cfg["n_ky"],
                         cfg["edge_sites"], cfg["edge_threshold"])
    flow = wr.flow
    rows = []
    for t, ky in enumerate(flow.kys):
        for a in range(cfg["num_sites"]):
            rows.append((ky, a + 1, flow.energies[t, a], flow.labels[t, a]))
    write_csv(prefix + "_spectral_flow.csv",
              ["ky", "index", "energy", "label"], rows)
    cherns = _cell_str(chern_numbers(params))
    bounded = (0,) + wr.windings + (0,)
    from_windings = [bounded[n + 1] - bounded[n] for n in range(params.q)]
    report = {
        "num_sites": cfg["num_sites"],
        "fiducial_energies": list(wr.fiducials),
        "gap_windings": list(wr.windings),
        "right_edge_windings": list(wr.right_windings),
        "branch_counts": list(wr.branch_counts),
        "chern_numbers": cherns,
        "chern_from_windings": from_windings,
        "bulk_edge_consistent": from_windings == cherns,
    }
    write_json(prefix + "_windings.json", report)
    return report


def _build_design(cfg):
    Z = cfg["Z_cm"] * CM_TO_UM
    if cfg["design"] == "index":
        return IndexModulated(alpha=cfg["alpha"], p=cfg["p"], q=cfg["q"],
                              ws=cfg["ws_um"], wx=cfg["wx_um"], Z=Z,
                              num_guides=cfg["num_guides"])
    if cfg["design"] == "spacing":
        return SpacingModulated(p=cfg["p"], q=cfg["q"], ws=cfg["ws_um"],
                                wx=cfg["wx_um"], wm=cfg["wm_um"],
                                phi0=cfg["phi0_rad"], Z=Z,
                                num_guides=cfg["num_guides"])
    raise ConfigError(f"design must be 'index' or 'spacing', "
                      f"got {cfg['design']!r}")


def _first_gap(params: ModulationParams) -> float:
    fid, tops, bottoms = gap_fiducials(params)
    return float(bottoms[1] - tops[0])


def cmd_pump(cfg, prefix, threads):
    design = _build_design(cfg)
    constants = OpticalConstants(gamma=cfg["gamma"])
    grid = default_grid(design, cfg["dx_um"], cfg["dz_um"],
                        cfg["num_slices"])
    guide = cfg["injection_guide"]
    if guide is None:
        guide = injection_guide(design)
    psi0 = gaussian_input(design.guide_center(guide, 0.0), cfg["W_um"], grid)
    traj = split_step_propagate(psi0, design, constants, grid)

    G1 = None
    if cfg["lz_estimate"] and isinstance(design, IndexModulated):
        fit = extract_parameters(constants, design)
        G1 = _first_gap(ModulationParams(fit.J, fit.nu_d, fit.nu_od,
                                         design.p, design.q, fit.delta_phi))
    summary = run_summary(traj, design, constants, G1)
    summary.update({
        "injection_guide": guide,
        "input_width_um": cfg["W_um"],
        "dx_um": grid.dx,
        "dz_um": grid.dz,
        "nx": grid.nx,
        "x_min_um": grid.x_min,
        "x_max_um": grid.x_max,
    })
    if G1 is not None:
        summary["first_gap_per_um"] = G1
    write_json(prefix + "_summary.json", summary)

    intensity = traj.intensity()
    header = ["z_um"] + [format_float(x) for x in grid.xs]
    rows = [[z] + list(row) for z, row in zip(traj.zs, intensity)]
    write_csv(prefix + "_intensity.csv", header, rows)
    peaks = intensity.max(axis=1, keepdims=True)
    peaks[peaks == 0] = 1.0
    write_pgm(prefix + "_intensity.pgm", intensity / peaks)
    return summary


def cmd_extract(cfg, prefix, threads):
    design = IndexModulated(alpha=cfg["alpha"], p=cfg["p"], q=cfg["q"],
                            ws=cfg["ws_um"], wx=cfg["wx_um"],
                            Z=cfg["Z_cm"] * CM_TO_UM)
    constants = OpticalConstants(gamma=cfg["gamma"])
    fit = extract_parameters(constants, design, dx=cfg["mode_dx_um"])
    report = extraction_report(constants, design, fit, cfg["mode_dx_um"])
    write_json(prefix + "_extraction.json", report)
    return report


COMMANDS = {
    "bands": cmd_bands,
    "phase-diagram": cmd_phase_diagram,
    "edges": cmd_edges,
    "pump": cmd_pump,
    "extract": cmd_extract,
}


# ----------------------------------------------------------------- presets

def _expect(errors, label, ok):
    if not ok:
        errors.append(label)


def _check_fig2(res, errors):
    od, d, diagram = res["od"], res["d"], res["diagram"]
    def cell(r_od, r_d):
        return tuple(diagram.cells[od.index(r_od)][d.index(r_d)])
    _expect(errors, "cell (1, 0) != (-1, 2, -1)", cell(1.0, 0.0) == (-1, 2, -1))
    _expect(errors, "cell (10, 0) != (2, -4, 2)", cell(10.0, 0.0) == (2, -4, 2))


def _check_fig3a(res, errors):
    rows = res["scan"]
    total = [(r[1] + r[2], r[0]) for r in rows if 3.0 <= r[0] <= 5.0]
    _expect(errors, "scan does not cover the transition window [3, 5]",
            bool(total))
    if total:
        gmin, ratio = min(total)
        _expect(errors, f"gap closure at {ratio}, expected 4.00 +- 0.05",
                abs(ratio - 4.0) <= 0.05)
        _expect(errors, f"min total gap {gmin:.2e} not small", gmin < 2e-3)


def _check_cherns(target):
    def check(res, errors):
        _expect(errors, f"Chern numbers {res['cherns']} != {list(target)}",
                tuple(res["cherns"]) == target)
    return check


def _check_fig3c(res, errors):
    _expect(errors, f"gaps {res['gaps']} not both closed below 1e-3",
            all(g < 1e-3 for g in res["gaps"]))


def _check_edges(windings, branches):
    def check(res, errors):
        _expect(errors, f"windings {res['gap_windings']} != {list(windings)}",
                tuple(res["gap_windings"]) == windings)
        _expect(errors, f"branch counts {res['branch_counts']} != "
                f"{list(branches)}", tuple(res["branch_counts"]) == branches)
        _expect(errors, "bulk-edge correspondence violated",
                res["bulk_edge_consistent"])
    return check


def _check_pump(target):
    def check(res, errors):
        c = res["chern_estimate"]
        _expect(errors, f"C_est {c:.4f} not within 0.05 of {target}",
                abs(c - target) <= 0.05)
        _expect(errors, f"norm drift {res['norm_drift']:.2e} >= 1e-10",
                res["norm_drift"] < 1e-10)
        _expect(errors, f"leakage {res['leakage_max']:.2e} >= 1e-4",
                res["leakage_max"] < 1e-4)
    return check


def _check_extract(J_ref):
    def check(res, errors):
        J, od, d = res["J_per_um"], res["nu_od_per_um"], res["nu_d_per_um"]
        _expect(errors, f"J {J:.3e} not within 30% of {J_ref:.3e}",
                abs(J - J_ref) <= 0.3 * J_ref)
        _expect(errors, f"nu_d {d:.3e} not negative", d < 0)
        _expect(errors, f"|nu_d| {abs(d):.3e} not >> nu_od {od:.3e}",
                abs(d) > 5 * od)
        _expect(errors, f"nu_od {od:.3e} not << J {J:.3e}", od < 0.5 * J)
        _expect(errors, f"delta_phi {res['delta_phi_rad']:.4f} not within "
                "0.3 rad of pi/3",
                abs(res["delta_phi_rad"] - math.pi / 3) <= 0.3)
    return check


PRESETS = {
    "fig2": ("phase-diagram", {}, _check_fig2,
             "Chern phase diagram over the (nu_od, nu_d)/J plane"),
    "fig3a": ("bands", {"scan": True}, _check_fig3a,
              "bulk gaps G1, G2 versus nu_od/J (gap scan)"),
    "fig3b": ("bands", {"nu_od_over_J": 1.0, "pgm": True},
              _check_cherns((-1, 2, -1)),
              "three Bloch bands at nu_od/J = 1, Chern (-1, 2, -1)"),
    "fig3c": ("bands", {"nu_od_over_J": 4.0, "pgm": True}, _check_fig3c,
              "bands at the transition nu_od/J = 4 (both gaps closed)"),
    "fig3d": ("bands", {"nu_od_over_J": 10.0, "pgm": True},
              _check_cherns((2, -4, 2)),
              "three Bloch bands at nu_od/J = 10, Chern (2, -4, 2)"),
    "fig4a": ("edges", {"nu_od_over_J": 1.0, "num_sites": 89},
              _check_edges((-1, 1), (2, 2)),
              "open-chain spectrum, 89 sites, nu_od/J = 1, windings (-1, 1)"),
    "fig4b": ("edges", {"nu_od_over_J": 10.0, "num_sites": 89},
              _check_edges((2, -2), (4, 4)),
              "open-chain spectrum, 89 sites, nu_od/J = 10, windings (2, -2)"),
    "fig5a": ("pump", {"design": "index", "gamma": 9e-4, "Z_cm": 30.0,
                       "W_um": 3.77},
              _check_pump(-0.97),
              "index-modulated pump, gamma = 9e-4, Z = 30 cm, C = -0.97"),
    "fig5b": ("pump", {"design": "index", "gamma": 5e-4, "Z_cm": 10.0,
                       "W_um": 4.47},
              _check_pump(-0.99),
              "index-modulated pump, gamma = 5e-4, Z = 10 cm, C = -0.99"),
    "fig5c": ("pump", {"design": "spacing", "gamma": 5e-4, "Z_cm": 15.0,
                       "ws_um": 20.0, "wm_um": 18.0,
                       "phi0_rad": math.pi / 5, "W_um": 4.3,
                       "injection_guide": -4},
              _check_pump(1.97),
              "spacing-modulated pump, gamma = 5e-4, Z = 15 cm, C = +1.97"),
    "extract-gamma9": ("extract", {"gamma": 9e-4, "Z_cm": 30.0},
                       _check_extract(3.76e-4),
                       "tight-binding fit at gamma = 9e-4"),
    "extract-gamma5": ("extract", {"gamma": 5e-4, "Z_cm": 10.0},
                       _check_extract(5.23e-4),
                       "tight-binding fit at gamma = 5e-4"),
}


# -------------------------------------------------------------- config/argv

def _parse_value(command, key, raw):
    schema = SCHEMAS[command]
    if key not in schema:
        raise ConfigError(f"unknown key {key!r} for command {command!r}; "
                          f"known keys: {', '.join(sorted(schema))}")
    caster = schema[key][0]
    try:
        return caster(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def load_config_file(command, path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in line.split("=", 1))
            out[key] = _parse_value(command, key, raw)
    return out


def build_config(command, preset_overrides, config_path, overrides):
    cfg = {k: default for k, (_, default) in SCHEMAS[command].items()}
    cfg.update(preset_overrides)
    if config_path:
        cfg.update(load_config_file(command, config_path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        cfg[key] = _parse_value(command, key.strip(), raw.strip())
    return cfg


def list_presets(stream=None):
    stream = stream or sys.stdout
    width = max(len(name) for name in PRESETS)
    for name, (command, _, _, description) in PRESETS.items():
        stream.write(f"{name:<{width}}  [{command}]  {description}\n")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(
        prog="aahpump",
        description="Commensurate AAH lattices: bands, Chern numbers, edge "
                    "spectra, and Thouless pumping of light.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--list-presets", action="store_true",
                        help="list all named presets and exit")
    sub = parser.add_subparsers(dest="command")
    for command in COMMANDS:
        keys = ", ".join(sorted(SCHEMAS[command]))
        p = sub.add_parser(command, help=f"keys: {keys}")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="named parameter set")
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--check", action="store_true",
                       help="verify the preset's reference expectations")
        p.add_argument("--outdir", default=".", help="output directory")
        p.add_argument("--out", help="output file prefix (default: preset "
                                     "name or command)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker thread cap (results are identical for "
                            "any value)")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="config overrides (win over --config)")

    if "--list-presets" in argv:
        list_presets()
        return 0
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2

    try:
        preset_overrides, check_fn = {}, None
        if args.preset:
            command, preset_overrides, check_fn, _ = PRESETS[args.preset]
            if command != args.command:
                raise ConfigError(f"preset {args.preset!r} belongs to "
                                  f"command {command!r}")
        if args.check and check_fn is None:
            raise ConfigError("--check requires --preset")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = build_config(args.command, preset_overrides, args.config,
                           args.overrides)
        os.makedirs(args.outdir, exist_ok=True)
        prefix = os.path.join(args.outdir,
                              args.out or args.preset or args.command)
        results = COMMANDS[args.command](cfg, prefix, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3

    if args.check:
        errors = []
        check_fn(results, errors)
        if errors:
            for e in errors:
                print(f"check failed [{args.preset}]: {e}", file=sys.stderr)
            return 4
        print(f"check passed [{args.preset}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
