"""Command line front end.

Subcommands:

* ``run``      one protocol at fixed settings, shots or counts to file
* ``sweep``    estimates across a size, angle, or spacing grid (TSV)
* ``fit``      one-parameter rate fit of a sweep table
* ``mitigate`` invert the readout damping on a counts file
* ``domain``   largest useful region for a given rate and threshold
* ``layout``   write layout and bond files for a named geometry
* ``report``   sweep, fit, and a rendered figure in one directory

Every output file opens with a comment header carrying the resolved
config hash, the seed, and the package version; rerunning a command
with the same inputs reproduces the bytes exactly.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .engine import (DEFAULT_STEP, evolve, fidelity, init_ground, overlap,
                     sample_bitstrings)
from .geometry import (build_chain, build_cnot_layout, build_rect,
                       build_swap_layout, chain_graph, interaction_matrix,
                       write_graph, write_layout)
from .mbqc import (cnot_truth_table, string_parity_estimate, swap_check,
                   teleport_Q, teleport_protocol, run_protocol, write_shots)
from .mitigation import correct_counts, read_counts, write_counts
from .noise import NoiseConfig, domain_size
from .observables import displacement_for_gamma
from .pulses import bell_schedule
from .stats import fit_epsilon

_PROTOCOLS = ("teleport", "bell", "string", "cnot", "swap")
_MODES = ("oracle", "pulsed")

_SCHEMA = {
    "protocol": {"kind": str, "n_atoms": int, "displacement": float, "gamma": float},
    "layout": {"spacing": float, "rows": int, "cols": int},
    "schedule": {"prep_width": float, "measure_width": float,
                 "pulse_width": float, "step": float},
    "noise": {"eps_l": float, "eps_m": float, "eps_damp": float,
              "jitter_um": float, "jitter_mode": str},
    "run": {"shots": int, "seed": int, "mode": str},
}


@dataclass
class Config:
    kind: str = "teleport"
    n_atoms: int = 3
    displacement: float = 0.0
    gamma: float | None = None
    spacing: float = 12.3
    rows: int = 3
    cols: int = 4
    prep_width: float = 0.2
    measure_width: float = 0.5
    pulse_width: float = 0.2
    step: float = DEFAULT_STEP
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    shots: int = 10000
    seed: int = 0
    mode: str = "oracle"


def load_config(path) -> Config:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"config file {path} not found or unreadable")
    cfg = Config()
    noise_kwargs = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValueError(f"{path}: unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ValueError(f"{path}: unknown key {section}.{key}")
            typ = _SCHEMA[section][key]
            try:
                val = raw if typ is str else typ(raw)
            except ValueError:
                raise ValueError(
                    f"{path}: {section}.{key} must be {typ.__name__}, got {raw!r}") from None
            if section == "noise":
                noise_kwargs[key] = val
            elif section == "protocol" and key == "kind":
                cfg.kind = val
            else:
                setattr(cfg, key, val)
    if noise_kwargs:
        cfg.noise = NoiseConfig(**noise_kwargs)
    _validate_config(cfg, origin=str(path))
    return cfg


def _validate_config(cfg: Config, origin: str = "config") -> None:
    if cfg.kind not in _PROTOCOLS:
        raise ValueError(f"{origin}: protocol.kind must be one of {_PROTOCOLS}")
    if cfg.mode not in _MODES:
        raise ValueError(f"{origin}: run.mode must be one of {_MODES}")
    if cfg.shots < 1:
        raise ValueError(f"{origin}: run.shots must be positive")
    if cfg.spacing <= 0:
        raise ValueError(f"{origin}: layout.spacing must be positive")
    if cfg.step <= 0:
        raise ValueError(f"{origin}: schedule.step must be positive")


def config_digest(cfg: Config) -> str:
    """Hash of the fully resolved configuration, override included."""
    pairs = {
        "protocol.kind": cfg.kind,
        "protocol.n_atoms": cfg.n_atoms,
        "protocol.displacement": cfg.displacement,
        "protocol.gamma": cfg.gamma,
        "layout.spacing": cfg.spacing,
        "layout.rows": cfg.rows,
        "layout.cols": cfg.cols,
        "schedule.prep_width": cfg.prep_width,
        "schedule.measure_width": cfg.measure_width,
        "schedule.pulse_width": cfg.pulse_width,
        "schedule.step": cfg.step,
        "noise.eps_l": cfg.noise.eps_l,
        "noise.eps_m": cfg.noise.eps_m,
        "noise.eps_damp": cfg.noise.eps_damp,
        "noise.jitter_um": cfg.noise.jitter_um,
        "noise.jitter_mode": cfg.noise.jitter_mode,
        "run.shots": cfg.shots,
        "run.seed": cfg.seed,
        "run.mode": cfg.mode,
    }
    text = "\n".join(f"{k}={pairs[k]!r}" for k in sorted(pairs))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _header(cfg: Config) -> str:
    return f"# config_sha256={config_digest(cfg)} seed={cfg.seed} version={__version__}"


def _apply_overrides(cfg: Config, args) -> Config:
    for name in ("seed", "shots", "mode"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "protocol", None):
        cfg.kind = args.protocol
    if getattr(args, "eps_m", None) is not None:
        cfg.noise = replace(cfg.noise, eps_m=args.eps_m)
    _validate_config(cfg, origin="arguments")
    return cfg


def _resolve_displacement(cfg: Config) -> float:
    if cfg.gamma is not None:
        return displacement_for_gamma(cfg.spacing, cfg.gamma)
    return cfg.displacement


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _bell_state_and_counts(cfg: Config):
    layout = build_chain(2, cfg.spacing)
    schedule = bell_schedule(cfg.spacing, cfg.prep_width, cfg.measure_width)
    psi = evolve(init_ground(2), schedule, interaction_matrix(layout), step=cfg.step)
    target = np.zeros(4, dtype=complex)
    target[0] = target[3] = 1.0 / math.sqrt(2.0)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    bits = sample_bitstrings(psi, "z", cfg.shots, rng)
    if cfg.noise.eps_damp > 0 or cfg.noise.eps_l > 0:
        from .noise import apply_readout_bias, apply_x_flip
        rng2 = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
        if cfg.noise.eps_l > 0:
            bits = apply_x_flip(bits, cfg.noise.eps_l, rng2)
        if cfg.noise.eps_damp > 0:
            bits = apply_readout_bias(bits, cfg.noise.eps_damp, rng2)
    counts = {}
    for row in bits:
        key = "".join(str(b) for b in row)
        counts[key] = counts.get(key, 0) + 1
    return psi, target, counts


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config) if args.config else Config(), args)
    kind = cfg.kind
    if kind == "teleport":
        dd = _resolve_displacement(cfg)
        est = teleport_Q(cfg.n_atoms, cfg.spacing, dd, mode=cfg.mode,
                         noise=cfg.noise, shots=cfg.shots, seed=cfg.seed,
                         step=cfg.step)
        print(f"teleport n_atoms={cfg.n_atoms} displacement={dd:.6g} "
              f"Q={est.value:.6f} +/- {est.std_error:.6f} "
              f"kept={est.n_used}/{est.n_total}")
        if args.out:
            protocol = teleport_protocol(cfg.n_atoms, cfg.spacing, dd)
            records = run_protocol(protocol, mode=cfg.mode, noise=cfg.noise,
                                   shots=cfg.shots, seed=cfg.seed, step=cfg.step)
            write_shots(records, args.out, header=_header(cfg))
            print(f"wrote {args.out}")
    elif kind == "bell":
        psi, target, counts = _bell_state_and_counts(cfg)
        print(f"bell fidelity={fidelity(psi, target):.6f} "
              f"overlap={overlap(psi, target):.6f} shots={cfg.shots}")
        if args.out:
            write_counts(counts, args.out, header=_header(cfg))
            print(f"wrote {args.out}")
    elif kind == "string":
        n_string = (cfg.n_atoms + 1) // 2
        est = string_parity_estimate(n_string, cfg.spacing, cfg.noise,
                                     cfg.shots, cfg.seed, mode=cfg.mode,
                                     step=cfg.step)
        print(f"string sites={n_string} wire={2 * n_string - 1} "
              f"theta={est.value:.6f} +/- {est.std_error:.6f} shots={est.n_total}")
    elif kind == "cnot":
        dd = _resolve_displacement(cfg)
        table = cnot_truth_table(cfg.spacing, dd, mode=cfg.mode,
                                 shots=cfg.shots, seed=cfg.seed, noise=cfg.noise)
        bad = 0.0
        for (c, t), freqs in sorted(table.items()):
            want = (c ^ t, t)
            ok = freqs.get(want, 0.0)
            bad += 1.0 - ok
            line = " ".join(f"{o[0]}{o[1]}:{f:.4f}" for o, f in sorted(freqs.items()))
            print(f"in {c}{t} -> {line}   expected {want[0]}{want[1]} ({ok:.4f})")
        print(f"total violation fraction {bad / 4:.6f}")
        if args.out:
            lines = [_header(cfg), "c t out_c out_t fraction"]
            for (c, t), freqs in sorted(table.items()):
                for (a, b), f in sorted(freqs.items()):
                    lines.append(f"{c} {t} {a} {b} {f:.9g}")
            _write_lines(args.out, lines)
            print(f"wrote {args.out}")
    elif kind == "swap":
        result = swap_check(cfg.spacing, mode=cfg.mode, shots=cfg.shots,
                            seed=cfg.seed, noise=cfg.noise)
        for labels, acc in sorted(result["rows"].items()):
            print(f"in {labels[0]}{labels[1]} -> swapped fraction {acc:.4f}")
        print(f"overall accuracy {result['accuracy']:.6f}")
    else:
        raise ValueError(f"unknown protocol {kind!r}")
    return 0


_SWEEP_VARIABLES = ("N_chain", "n_string", "gamma", "d")


def _sweep_rows(cfg: Config, variable: str, values):
    rows = []
    for i, val in enumerate(values):
        seed_i = cfg.seed + 1000 * i
        if variable == "N_chain":
            n = int(val)
            est = teleport_Q(n, cfg.spacing, _resolve_displacement(cfg),
                             mode=cfg.mode, noise=cfg.noise, shots=cfg.shots,
                             seed=seed_i, step=cfg.step)
        elif variable == "n_string":
            est = string_parity_estimate(int(val), cfg.spacing, cfg.noise,
                                         cfg.shots, seed_i, mode=cfg.mode,
                                         step=cfg.step)
        elif variable == "gamma":
            dd = displacement_for_gamma(cfg.spacing, float(val))
            est = teleport_Q(cfg.n_atoms, cfg.spacing, dd, mode=cfg.mode,
                             noise=cfg.noise, shots=cfg.shots, seed=seed_i,
                             step=cfg.step)
        elif variable == "d":
            sub = replace(cfg, spacing=float(val))
            psi, target, _ = _bell_state_and_counts(sub)
            rows.append((float(val), fidelity(psi, target), 0.0, 1, 1))
            continue
        else:
            raise ValueError(f"variable must be one of {_SWEEP_VARIABLES}")
        rows.append((float(val), est.value, est.std_error, est.n_used, est.n_total))
    return rows


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config) if args.config else Config(), args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        raise ValueError(f"--values must be a comma list of numbers, got {args.values!r}")
    if not values:
        raise ValueError("--values is empty")
    rows = _sweep_rows(cfg, args.variable, values)
    lines = [_header(cfg), f"{args.variable} estimate se n_used n_total"]
    for val, est, se, used, total in rows:
        lines.append(f"{val:.9g} {est:.9g} {se:.9g} {used} {total}")
    if args.out:
        _write_lines(args.out, lines)
        print(f"wrote {args.out}")
    else:
        print("\n".join(lines))
    return 0


def _read_table(path):
    xs, ys, ses = [], [], []
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                nums = [float(p) for p in parts[:3]]
            except ValueError:
                continue  # column header line
            if len(nums) < 2:
                raise ValueError(f"{path}:{ln}: need at least two numeric columns")
            xs.append(nums[0])
            ys.append(nums[1])
            ses.append(nums[2] if len(nums) > 2 else 0.0)
    if not xs:
        raise ValueError(f"{path}: no data rows found")
    return np.asarray(xs), np.asarray(ys), np.asarray(ses)


def cmd_fit(args) -> int:
    xs, ys, ses = _read_table(args.input)
    if args.x_map == "chain":
        xs = (xs + 1.0) / 2.0
    result = fit_epsilon(xs, ys, ses if np.all(ses > 0) else None, model=args.model)
    summary = (f"model={result.model} eps={result.eps:.6f} "
               f"half_width={result.std_error:.6f} sse={result.sse:.6g} "
               f"points={result.n_points}")
    print(summary)
    if args.out:
        _write_lines(args.out, [f"# version={__version__}", summary])
        print(f"wrote {args.out}")
    return 0


def cmd_mitigate(args) -> int:
    counts = read_counts(args.input)
    corrected, moved = correct_counts(counts, args.eps_m)
    total = sum(counts.values())
    print(f"corrected {len(counts)} -> {len(corrected)} entries, "
          f"moved mass {moved:.6g} of {total:.6g}")
    if args.out:
        write_counts(corrected, args.out,
                     header=f"# eps_m={args.eps_m} version={__version__}")
        print(f"wrote {args.out}")
    return 0


def cmd_domain(args) -> int:
    size = domain_size(args.model, args.eps, args.threshold)
    print("unbounded" if math.isinf(size) else str(int(size)))
    return 0


def cmd_layout(args) -> int:
    kind = args.kind
    if kind == "chain":
        layout = build_chain(args.n_atoms, args.spacing, args.displacement)
        graph = chain_graph(args.n_atoms)
    elif kind == "rect":
        layout, graph = build_rect(args.rows, args.cols, args.spacing)
    elif kind == "cnot":
        layout, graph = build_cnot_layout(args.spacing, args.displacement)
    elif kind == "swap":
        layout, graph = build_swap_layout(args.spacing)
    else:
        raise ValueError(f"unknown layout kind {kind!r}")
    layout_path = Path(str(args.out_prefix) + ".layout.tsv")
    graph_path = Path(str(args.out_prefix) + ".graph.tsv")
    write_layout(layout, layout_path)
    write_graph(graph, graph_path)
    print(f"wrote {layout_path}")
    print(f"wrote {graph_path}")
    return 0


def cmd_report(args) -> int:
    from .report import save_counts_figure, save_sweep_figure

    cfg = _apply_overrides(load_config(args.config) if args.config else Config(), args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    created = []
    if cfg.kind == "bell":
        psi, target, counts = _bell_state_and_counts(cfg)
        corrected, moved = correct_counts(counts, cfg.noise.eps_m) \
            if cfg.noise.eps_m > 0 else (dict(counts), 0.0)
        counts_path = outdir / "counts.tsv"
        write_counts(counts, counts_path, header=_header(cfg))
        created.append(counts_path)
        summary = outdir / "summary.txt"
        _write_lines(summary, [
            _header(cfg),
            f"fidelity={fidelity(psi, target):.6f}",
            f"overlap={overlap(psi, target):.6f}",
            f"moved_mass={moved:.6g}",
        ])
        created.append(summary)
        fig = outdir / "figure.png"
        save_counts_figure(counts, corrected, fig, title="pair readout")
        created.append(fig)
    else:
        if cfg.kind == "string":
            values = list(range(2, 9))
            variable = "n_string"
            xs_map = None
        else:
            values = list(range(3, 15, 2))
            variable = "N_chain"
            xs_map = "chain"
        rows = _sweep_rows(cfg, variable, values)
        sweep_path = outdir / "sweep.tsv"
        lines = [_header(cfg), f"{variable} estimate se n_used n_total"]
        for val, est, se, used, total in rows:
            lines.append(f"{val:.9g} {est:.9g} {se:.9g} {used} {total}")
        _write_lines(sweep_path, lines)
        created.append(sweep_path)
        xs = np.asarray([r[0] for r in rows])
        ys = np.asarray([r[1] for r in rows])
        ses = np.asarray([r[2] for r in rows])
        if xs_map == "chain":
            xs = (xs + 1.0) / 2.0
        fit = fit_epsilon(xs, ys, ses if np.all(ses > 0) else None, model="p_even")
        fit_path = outdir / "fit.txt"
        _write_lines(fit_path, [
            _header(cfg),
            f"model={fit.model} eps={fit.eps:.6f} half_width={fit.std_error:.6f} "
            f"sse={fit.sse:.6g} points={fit.n_points}",
        ])
        created.append(fit_path)
        fig = outdir / "figure.png"
        save_sweep_figure(xs, ys, ses, fig, model="p_even", eps=fit.eps,
                          threshold=2.0 / 3.0, xlabel="string sites",
                          ylabel="even fraction", title=f"{cfg.kind} sweep")
        created.append(fig)
    for p in created:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydgraph",
        description="Parity protocols on globally driven tweezer arrays")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="INI settings file")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--shots", type=int, help="override run.shots")
        p.add_argument("--mode", choices=_MODES, help="override run.mode")
        if out:
            p.add_argument("--out", help="output file path")

    p_run = sub.add_parser("run", help="run one protocol")
    common(p_run)
    p_run.add_argument("--protocol", choices=_PROTOCOLS, help="override protocol.kind")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one variable")
    common(p_sweep)
    p_sweep.add_argument("--variable", choices=_SWEEP_VARIABLES, required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma separated numeric grid, e.g. 3,5,7")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_fit = sub.add_parser("fit", help="fit a rate to a sweep table")
    p_fit.add_argument("--input", required=True, help="TSV with x, value, se columns")
    p_fit.add_argument("--model", choices=("p_even", "trajectory"), default="p_even")
    p_fit.add_argument("--x-map", choices=("none", "chain"), default="none",
                       help="'chain' maps wire length N to its string size (N+1)/2")
    p_fit.add_argument("--out", help="write the fit summary here")
    p_fit.set_defaults(fn=cmd_fit)

    p_mit = sub.add_parser("mitigate", help="invert readout damping on counts")
    p_mit.add_argument("--input", required=True, help="counts file")
    p_mit.add_argument("--eps-m", type=float, required=True, dest="eps_m")
    p_mit.add_argument("--out", help="write corrected counts here")
    p_mit.set_defaults(fn=cmd_mitigate)

    p_dom = sub.add_parser("domain", help="largest useful region size")
    p_dom.add_argument("--model", choices=("ideal", "p_even"), default="ideal")
    p_dom.add_argument("--eps", type=float, required=True)
    p_dom.add_argument("--threshold", type=float, default=2.0 / 3.0)
    p_dom.set_defaults(fn=cmd_domain)

    p_lay = sub.add_parser("layout", help="write layout and bond files")
    p_lay.add_argument("--kind", choices=("chain", "rect", "cnot", "swap"), required=True)
    p_lay.add_argument("--n-atoms", type=int, default=3, dest="n_atoms")
    p_lay.add_argument("--rows", type=int, default=3)
    p_lay.add_argument("--cols", type=int, default=4)
    p_lay.add_argument("--spacing", type=float, default=12.3)
    p_lay.add_argument("--displacement", type=float, default=0.0)
    p_lay.add_argument("--out-prefix", required=True, dest="out_prefix")
    p_lay.set_defaults(fn=cmd_layout)

    p_rep = sub.add_parser("report", help="sweep, fit, and figure in one directory")
    common(p_rep, out=False)
    p_rep.add_argument("--protocol", choices=_PROTOCOLS, help="override protocol.kind")
    p_rep.add_argument("--outdir", required=True)
    p_rep.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
