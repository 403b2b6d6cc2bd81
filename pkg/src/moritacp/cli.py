"""Command-line front end.

Usage::

    moritacp run COMMAND [INSTANCE] [--tol T] [--rank-cutoff R] [--seed S] [--out PATH]
    moritacp gen KIND [--seed S] [--dims ...] [--out PATH]

Commands: ksgns, induce, transfer, verify-sme, verify-cp-sme, gns-sme,
example-gns5, sweep. The report is written to stdout (and ``--out``); the
exit code is 0 exactly when every certificate passes.
"""

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config
from .algebra import Algebra
from .bimodule import trivial_bimodule
from .certificate import merge
from .correspondence import (
    example_gns5,
    gns_correspondence,
    sme_from_cp_witness,
    verify_correspondence_sme,
)
from .cpmap import induce_cp_map, ksgns, transfer_roundtrip, verify_cp_sme
from .errors import InstanceError, MoritaError
from .generate import (
    random_algebra,
    random_bimodule,
    random_cp_map,
    random_module,
    random_projection,
)
from .hilbmod import free_module
from .instance import dumps, encode_array, load_instance
from .representation import SMEWitness, verify_sme_witness

COMMANDS = ("ksgns", "induce", "transfer", "verify-sme", "verify-cp-sme", "gns-sme",
            "example-gns5", "sweep")
ENV_PREFIX = "MORITACP_"
MAX_REP_DIM = 16


def _entry(subject, cert, elapsed=None):
    out = {"subject": subject, **cert.to_dict()}
    if elapsed is not None:
        out["seconds"] = round(elapsed, 6)
    return out


def _pick(table, name, what, inst):
    if name is not None:
        if name not in table:
            raise InstanceError(f"{inst.source}: unknown {what} {name!r}")
        return [name]
    if not table:
        raise InstanceError(f"{inst.source}: instance has no {what}")
    return list(table)


def _plan_steps(inst, command, args):
    steps = [s for s in inst.plan if s.get("command") == command]
    if steps and not any(getattr(args, k, None) for k in ("cp", "bimodule", "target", "witness")):
        return steps
    return [{"cp": args.cp, "bimodule": args.bimodule, "target": args.target, "witness": args.witness}]


def cmd_ksgns(inst, args):
    names = []
    for step in _plan_steps(inst, "ksgns", args):
        names += _pick(inst.cp_maps, step.get("cp"), "cp map", inst)
    out = []
    for name in names:
        psi = inst.cp_maps[name]
        k = ksgns(psi)
        cert = merge("ksgns", [psi.certificate, k.verify()],
                     info={"dim_F_psi": k.module.dim, "rank_p": k.module.rank})
        out.append((name, cert))
    return out


def cmd_induce(inst, args):
    out = []
    for step in _plan_steps(inst, "induce", args):
        psi_name = _pick(inst.cp_maps, step.get("cp"), "cp map", inst)[0]
        Y_name = _pick(inst.bimodules, step.get("bimodule"), "bimodule", inst)[0]
        ind = induce_cp_map(inst.cp_maps[psi_name], inst.bimodules[Y_name])
        out.append((f"{psi_name} along {Y_name}", ind.certificate))
    return out


def cmd_transfer(inst, args):
    out = []
    for step in _plan_steps(inst, "transfer", args):
        psi_name = _pick(inst.cp_maps, step.get("cp"), "cp map", inst)[0]
        Y_name = _pick(inst.bimodules, step.get("bimodule"), "bimodule", inst)[0]
        psi = inst.cp_maps[psi_name]
        Z_name = step.get("target")
        if Z_name is None:
            # without a target the coefficient algebra is kept
            Z_name, Z = "trivial", trivial_bimodule(psi.base)
        elif Z_name in inst.bimodules:
            Z = inst.bimodules[Z_name]
        else:
            raise InstanceError(f"{inst.source}: unknown bimodule {Z_name!r}")
        fwd, back, w = transfer_roundtrip(psi, inst.bimodules[Y_name], Z)
        rt = verify_sme_witness(w)
        rt.name = "roundtrip_witness"
        cert = merge("transfer", [fwd.certificate, back.certificate, rt],
                     info={"result_dim": fwd.result.module.dim})
        out.append((f"{psi_name} along ({Y_name}, {Z_name})", cert))
    return out


def cmd_verify_sme(inst, args):
    names = _pick(inst.witnesses, args.witness, "witness", inst)
    return [(name, verify_sme_witness(inst.witnesses[name])) for name in names]


def cmd_verify_cp_sme(inst, args):
    names = _pick(inst.cp_witnesses, args.witness, "cp witness", inst)
    out = []
    for name in names:
        e = inst.cp_witnesses[name]
        out.append((name, verify_cp_sme(e["phi"], e["psi"], e["bimodule"], e["piY"])))
    return out


def cmd_gns_sme(inst, args):
    names = _pick(inst.correspondences, args.witness, "correspondence", inst)
    out = []
    for name in names:
        e = inst.correspondences[name]
        phi, psi, X, Y = e["phi"], e["psi"], e["X"], e["Y"]
        if "map" in e:
            M = e["map"]
        elif "piY" in e:
            from .correspondence import corner_transport
            k_T, k_psi = ksgns(corner_transport(phi, X)), ksgns(psi)
            M = sme_from_cp_witness(phi, X, SMEWitness(k_T.rep, k_psi.rep, Y, e["piY"]))[0]
        else:
            raise InstanceError(f"correspondences.{name}: needs 'map' or 'piY'")
        cert = verify_correspondence_sme(gns_correspondence(phi), gns_correspondence(psi), Y, X, M)
        out.append((name, cert))
    return out


def cmd_example_gns5(inst, args):
    out = []
    for step in _plan_steps(inst, "example-gns5", args):
        psi_name = _pick(inst.cp_maps, step.get("cp"), "cp map", inst)[0]
        Y_name = _pick(inst.bimodules, step.get("bimodule"), "bimodule", inst)[0]
        cert, _ = example_gns5(inst.cp_maps[psi_name], inst.bimodules[Y_name])
        out.append((f"{psi_name} along {Y_name}", cert))
    return out


def _small_algebra(rng, max_dim=3):
    while True:
        alg = random_algebra(rng, max_blocks=2, max_block=2)
        if alg.d <= max_dim:
            return alg


def random_pipeline_instance(rng):
    """Small random ``(psi, Y, Z)`` used by sweeps: ``psi: D -> B_B(F)``,
    ``Y`` a ``C``-``D`` and ``Z`` a ``B``-``A`` bimodule."""
    B, D = _small_algebra(rng), _small_algebra(rng)
    F = random_module(rng, B, max_n=1)
    psi = random_cp_map(rng, D, F, max_mult=1)
    Y = random_bimodule(rng, D, max_n=1)
    A = Algebra([int(rng.integers(1, 3)) for _ in B.block_dims])
    Z = random_bimodule(rng, A, left_dims=list(B.block_dims))
    return psi, Y, Z


def sweep_one(seed, index, tol, cutoff):
    """Run the full pipeline on the ``index``-th random instance of ``seed``."""
    config.set_defaults(tol, cutoff)
    rng = np.random.default_rng([seed, index])
    psi, Y, Z = random_pipeline_instance(rng)
    k = ksgns(psi)
    kc = k.verify()
    ind = induce_cp_map(psi, Y)
    fwd, back, w = transfer_roundtrip(psi, Y, Z)
    rt = verify_sme_witness(w)
    rt.name = "transfer_roundtrip"
    psi_alg = random_cp_map(rng, psi.source, free_module(psi.base, 1), max_mult=1)
    g5, _ = example_gns5(psi_alg, Y)
    cert = merge(f"instance_{index}", [kc, ind.certificate, fwd.certificate, back.certificate, rt, g5],
                 info={"B": list(psi.base.block_dims), "D": list(psi.source.block_dims),
                       "C": list(Y.left_alg.block_dims), "A": list(Z.right_alg.block_dims)})
    return cert


def cmd_sweep(args):
    seed = 0 if args.seed is None else args.seed
    jobs = max(1, args.jobs)
    work = [(seed, i, config.TOL, config.RANK_CUTOFF) for i in range(args.count)]
    if jobs == 1:
        certs = [sweep_one(*w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            certs = list(pool.map(sweep_one, *zip(*work)))
    return [(f"seed {seed} instance {i}", c) for i, c in enumerate(certs)]


HANDLERS = {
    "ksgns": cmd_ksgns,
    "induce": cmd_induce,
    "transfer": cmd_transfer,
    "verify-sme": cmd_verify_sme,
    "verify-cp-sme": cmd_verify_cp_sme,
    "gns-sme": cmd_gns_sme,
    "example-gns5": cmd_example_gns5,
}


def run(command, instance_path=None, args=None):
    """Execute a command and return the report dictionary."""
    if command not in COMMANDS:
        raise InstanceError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    if args is None:
        args = build_parser().parse_args(["run", command])
    start = time.perf_counter()
    if command == "sweep":
        results = cmd_sweep(args)
        source = None
    else:
        if instance_path is None:
            raise InstanceError(f"command {command!r} needs an instance file")
        inst = load_instance(instance_path)
        results = HANDLERS[command](inst, args)
        source = os.path.basename(str(instance_path))
    report = {
        "command": command,
        "instance": source,
        "seed": args.seed,
        "tol": config.TOL,
        "rank_cutoff": config.RANK_CUTOFF,
        "certificates": [_entry(subject, cert) for subject, cert in results],
    }
    report["pass"] = all(c["pass"] for c in report["certificates"])
    if getattr(args, "timings", False):
        report["seconds"] = round(time.perf_counter() - start, 6)
    return report


def gen_random(kind, seed, dims=None, source_dims=None, n=None):
    """Seeded random instance as a JSON-ready dictionary.

    ``kind`` is ``cp-map`` (``source_dims`` for ``D``, ``dims`` for ``B``),
    ``bimodule`` (``dims`` for ``D``, ``n`` slots) or ``pipeline``.
    """
    rng = np.random.default_rng(seed)
    if kind == "cp-map":
        D = Algebra(source_dims or [2])
        B = Algebra(dims or [1])
        _cap(D, B)
        F = free_module(B, n or 1)
        psi = random_cp_map(rng, D, F)
        return {"seed": seed, "algebras": {"D": list(D.block_dims), "B": list(B.block_dims)},
                "modules": {"F": {"algebra": "B", "p": encode_array(F.p)}},
                "cp_maps": {"psi": {"source": "D", "module": "F", "values": encode_array(psi.table)}},
                "plan": [{"command": "ksgns", "cp": "psi"}]}
    if kind == "bimodule":
        D = Algebra(dims or [2])
        k = n or 1
        _cap(D, Algebra([k * m for m in D.block_dims]))
        ranks = [int(rng.integers(1, k * m + 1)) for m in D.block_dims]
        p, _ = random_projection(rng, D, k, ranks)
        return {"seed": seed, "algebras": {"D": list(D.block_dims)},
                "bimodules": {"Y": {"kind": "corner", "algebra": "D", "p": encode_array(p)}}}
    if kind == "pipeline":
        psi, Y, Z = random_pipeline_instance(rng)
        algs = {"B": psi.base, "D": psi.source, "A": Z.right_alg}
        _cap(*algs.values())
        return {"seed": seed,
                "algebras": {k: list(v.block_dims) for k, v in algs.items()},
                "modules": {"F": {"algebra": "B", "p": encode_array(psi.module.p)}},
                "bimodules": {
                    "Y": {"kind": "corner", "algebra": "D", "p": encode_array(Y.carrier.p)},
                    "Z": {"kind": "corner", "algebra": "A", "p": encode_array(Z.carrier.p)},
                },
                "cp_maps": {"psi": {"source": "D", "module": "F", "values": encode_array(psi.table)}},
                "plan": [{"command": "ksgns", "cp": "psi"},
                         {"command": "induce", "cp": "psi", "bimodule": "Y"},
                         {"command": "transfer", "cp": "psi", "bimodule": "Y", "target": "Z"}]}
    raise InstanceError(f"unknown kind {kind!r}; choose from cp-map, bimodule, pipeline")


def _cap(*algs):
    for a in algs:
        if a.d > MAX_REP_DIM:
            raise InstanceError(f"{a} exceeds the representation dimension cap {MAX_REP_DIM}")


def _env(name, default):
    return os.environ.get(ENV_PREFIX + name, default)


def build_parser():
    parser = argparse.ArgumentParser(prog="moritacp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="action", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=float(_env("TOL", config.TOL)))
    common.add_argument("--rank-cutoff", type=float, default=float(_env("RANK_CUTOFF", config.RANK_CUTOFF)))
    seed = _env("SEED", None)
    common.add_argument("--seed", type=int, default=int(seed) if seed is not None else None)
    common.add_argument("--out", default=_env("OUT", None), help="also write the JSON here")

    r = sub.add_parser("run", parents=[common], help="run a command on an instance")
    r.add_argument("command", choices=COMMANDS)
    r.add_argument("instance", nargs="?")
    r.add_argument("--cp", help="name of the CP map to use")
    r.add_argument("--bimodule", help="name of the C-D bimodule")
    r.add_argument("--target", help="name of the B-A bimodule for transfer")
    r.add_argument("--witness", help="name of the witness entry to verify")
    r.add_argument("--count", type=int, default=20, help="sweep: number of instances")
    r.add_argument("--jobs", type=int, default=int(_env("JOBS", 1)), help="sweep: worker processes")
    r.add_argument("--timings", action="store_true", help="include wall-clock time in the report")

    g = sub.add_parser("gen", parents=[common], help="write a seeded random instance")
    g.add_argument("kind", choices=("cp-map", "bimodule", "pipeline"))
    g.add_argument("--dims", type=int, nargs="+", help="block sizes of the coefficient algebra")
    g.add_argument("--source-dims", type=int, nargs="+", help="block sizes of the source algebra")
    g.add_argument("-n", type=int, help="number of slots")
    return parser


def _emit(text, out):
    sys.stdout.write(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config.set_defaults(args.tol, args.rank_cutoff)
    try:
        if args.action == "gen":
            data = gen_random(args.kind, 0 if args.seed is None else args.seed,
                              args.dims, args.source_dims, args.n)
            _emit(dumps(data), args.out)
            return 0
        report = run(args.command, args.instance, args)
    except (MoritaError, ValueError) as exc:
        _emit(dumps({"error": {"type": type(exc).__name__, "message": str(exc)}, "pass": False}), None)
        return 2
    _emit(dumps(report), args.out)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
