"""JSON instances: encoding of complex arrays and loading of named objects.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of such pairs. An instance file is a JSON object with the optional
sections ``algebras``, ``modules``, ``bimodules``, ``cp_maps``,
``representations``, ``witnesses``, ``cp_witnesses``, ``correspondences``
and ``plan``; see the README for the schema of each entry.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import Algebra
from .bimodule import (
    EquivalenceBimodule,
    bimodule_tensor,
    corner_bimodule,
    dual_bimodule,
    matrix_column_bimodule,
    trivial_bimodule,
)
from .cpmap import CPMap
from .errors import InstanceError, MoritaError
from .hilbmod import ProjectiveModule, free_module
from .representation import Representation, SMEWitness


def encode_array(a):
    """Complex array -> nested lists ending in ``[re, im]`` pairs."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_array(data, where="array"):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{where}: not a rectangular numeric array ({exc})") from None
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise InstanceError(f"{where}: complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass
class Instance:
    """Named, validated objects of an instance file."""

    algebras: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)
    bimodules: dict = field(default_factory=dict)
    cp_maps: dict = field(default_factory=dict)
    representations: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    cp_witnesses: dict = field(default_factory=dict)
    correspondences: dict = field(default_factory=dict)
    plan: list = field(default_factory=list)
    source: str = "<memory>"


def _lookup(table, name, section, where):
    if name not in table:
        raise InstanceError(f"{where}: unknown {section} {name!r}")
    return table[name]


def _build_module(inst, name, entry):
    where = f"modules.{name}"
    B = _lookup(inst.algebras, entry.get("algebra"), "algebra", where)
    if "p" in entry:
        return ProjectiveModule(B, decode_array(entry["p"], where + ".p"))
    return free_module(B, int(entry.get("n", 1)))


def _module_ref(inst, ref, where):
    if isinstance(ref, dict):
        return _build_module(inst, where, ref)
    return _lookup(inst.modules, ref, "module", where)


def _build_bimodule(inst, name, entry):
    where = f"bimodules.{name}"
    kind = entry.get("kind")
    if kind == "trivial":
        return trivial_bimodule(_lookup(inst.algebras, entry.get("algebra"), "algebra", where))
    if kind == "matrix_column":
        B = _lookup(inst.algebras, entry.get("algebra"), "algebra", where)
        return matrix_column_bimodule(B, int(entry.get("n", 1)))
    if kind == "corner":
        D = _lookup(inst.algebras, entry.get("algebra"), "algebra", where)
        return corner_bimodule(D, decode_array(entry["p"], where + ".p"))
    if kind == "dual":
        return dual_bimodule(_lookup(inst.bimodules, entry.get("of"), "bimodule", where))
    if kind == "tensor":
        Y = _lookup(inst.bimodules, entry.get("left"), "bimodule", where)
        W = _lookup(inst.bimodules, entry.get("right"), "bimodule", where)
        return bimodule_tensor(Y, W)
    if kind == "explicit":
        A = _lookup(inst.algebras, entry.get("left"), "algebra", where)
        B = _lookup(inst.algebras, entry.get("right"), "algebra", where)
        E = _module_ref(inst, entry.get("module"), where)
        return EquivalenceBimodule(A, B, E, decode_array(entry["left_action"], where + ".left_action"))
    raise InstanceError(f"{where}: unknown bimodule kind {kind!r}")


def _build_cp_map(inst, name, entry):
    where = f"cp_maps.{name}"
    C = _lookup(inst.algebras, entry.get("source"), "algebra", where)
    F = _module_ref(inst, entry.get("module"), where)
    return CPMap(C, F, decode_array(entry["values"], where + ".values"))


def _build_rep(inst, name, entry):
    where = f"representations.{name}"
    C = _lookup(inst.algebras, entry.get("algebra"), "algebra", where)
    E = _module_ref(inst, entry.get("module"), where)
    return Representation(C, E, decode_array(entry["values"], where + ".values"))


def _build_witness(inst, name, entry):
    where = f"witnesses.{name}"
    left = _lookup(inst.representations, entry.get("left"), "representation", where)
    right = _lookup(inst.representations, entry.get("right"), "representation", where)
    Y = _lookup(inst.bimodules, entry.get("bimodule"), "bimodule", where)
    return SMEWitness(left, right, Y, decode_array(entry["piY"], where + ".piY"))


def _build_cp_witness(inst, name, entry):
    where = f"cp_witnesses.{name}"
    return {
        "phi": _lookup(inst.cp_maps, entry.get("phi"), "cp map", where),
        "psi": _lookup(inst.cp_maps, entry.get("psi"), "cp map", where),
        "bimodule": _lookup(inst.bimodules, entry.get("bimodule"), "bimodule", where),
        "piY": decode_array(entry["piY"], where + ".piY"),
    }


def _build_correspondence(inst, name, entry):
    where = f"correspondences.{name}"
    built = {key: _lookup(inst.cp_maps, entry.get(key), "cp map", where) for key in ("phi", "psi")}
    built.update({key: _lookup(inst.bimodules, entry.get(key), "bimodule", where) for key in ("X", "Y")})
    for key in ("map", "piY"):
        if key in entry:
            built[key] = decode_array(entry[key], f"{where}.{key}")
    return built


def _guard(where, build, *args):
    try:
        return build(*args)
    except InstanceError:
        raise
    except (MoritaError, KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"{where}: {type(exc).__name__}: {exc}") from None


def build_instance(data, source="<memory>"):
    """Build and validate every object of a decoded instance."""
    if not isinstance(data, dict):
        raise InstanceError(f"{source}: instance must be a JSON object")
    inst = Instance(source=source, plan=list(data.get("plan", [])))
    for name, dims in data.get("algebras", {}).items():
        inst.algebras[name] = _guard(f"algebras.{name}", Algebra, dims)
    for name, entry in data.get("modules", {}).items():
        inst.modules[name] = _guard(f"modules.{name}", _build_module, inst, name, entry)
    # bimodules may refer to earlier ones (dual, tensor)
    for name, entry in data.get("bimodules", {}).items():
        inst.bimodules[name] = _guard(f"bimodules.{name}", _build_bimodule, inst, name, entry)
    for name, entry in data.get("cp_maps", {}).items():
        inst.cp_maps[name] = _guard(f"cp_maps.{name}", _build_cp_map, inst, name, entry)
    for name, entry in data.get("representations", {}).items():
        inst.representations[name] = _guard(f"representations.{name}", _build_rep, inst, name, entry)
    for name, entry in data.get("witnesses", {}).items():
        inst.witnesses[name] = _guard(f"witnesses.{name}", _build_witness, inst, name, entry)
    for name, entry in data.get("cp_witnesses", {}).items():
        inst.cp_witnesses[name] = _guard(f"cp_witnesses.{name}", _build_cp_witness, inst, name, entry)
    for name, entry in data.get("correspondences", {}).items():
        inst.correspondences[name] = _guard(f"correspondences.{name}", _build_correspondence,
                                            inst, name, entry)
    return inst


def load_instance(path):
    """Parse and validate an instance file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return build_instance(data, source=str(path))


def dumps(obj):
    """Canonical JSON text used for every report and instance written."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
