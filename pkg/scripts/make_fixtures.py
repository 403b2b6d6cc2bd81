"""Regenerate the JSON fixtures shipped in ``fixtures/``."""

import os

import numpy as np

from moritacp.algebra import Algebra
from moritacp.generate import random_cp_map, random_projection
from moritacp.hilbmod import free_module
from moritacp.instance import dumps, encode_array
from moritacp.representation import Representation, witness_reflexive

HERE = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def trace_instance():
    D = Algebra([2])
    half_trace = np.array([0.5, 0, 0, 0.5]).reshape(4, 1, 1)
    return {
        "algebras": {"M2": [2], "C": [1]},
        "modules": {"line": {"algebra": "C", "n": 1}},
        "cp_maps": {"half_trace": {"source": "M2", "module": "line", "values": encode_array(half_trace)}},
        "bimodules": {"columns": {"kind": "matrix_column", "algebra": "C", "n": 2}},
        "plan": [{"command": "ksgns", "cp": "half_trace"}],
    }


def reflexive_instance():
    C = Algebra([2])
    E = free_module(Algebra([1]), 2)
    rep = Representation(C, E, C.basis_matrices.astype(complex))
    w = witness_reflexive(rep)
    return {
        "algebras": {"M2": [2], "C": [1]},
        "modules": {"C2": {"algebra": "C", "n": 2}},
        "representations": {"defining": {"algebra": "M2", "module": "C2", "values": encode_array(rep.table)}},
        "bimodules": {"self": {"kind": "trivial", "algebra": "M2"}},
        "witnesses": {"reflexive": {"left": "defining", "right": "defining", "bimodule": "self",
                                    "piY": encode_array(w.table)}},
    }


def gns5_instance():
    identity = np.ones((1, 1, 1))
    return {
        "algebras": {"C": [1]},
        "modules": {"line": {"algebra": "C", "n": 1}},
        "cp_maps": {"identity": {"source": "C", "module": "line", "values": encode_array(identity)}},
        "bimodules": {"columns": {"kind": "matrix_column", "algebra": "C", "n": 2}},
        "plan": [{"command": "example-gns5", "cp": "identity", "bimodule": "columns"}],
    }


def pipeline_instance(seed=5):
    rng = np.random.default_rng(seed)
    D = Algebra([2, 1])
    B = Algebra([1, 1])
    psi = random_cp_map(rng, D, free_module(B, 1), max_mult=1)
    p, _ = random_projection(rng, D, 2, [3, 1])
    return {
        "algebras": {"D": [2, 1], "B": [1, 1]},
        "modules": {"B1": {"algebra": "B", "n": 1}},
        "cp_maps": {"psi": {"source": "D", "module": "B1", "values": encode_array(psi.table)}},
        "bimodules": {"Y": {"kind": "corner", "algebra": "D", "p": encode_array(p)}},
        "plan": [{"command": "ksgns", "cp": "psi"},
                 {"command": "induce", "cp": "psi", "bimodule": "Y"},
                 {"command": "example-gns5", "cp": "psi", "bimodule": "Y"}],
    }


def main():
    for name, data in [("example_trace.json", trace_instance()),
                       ("reflexive_witness.json", reflexive_instance()),
                       ("example_gns5.json", gns5_instance()),
                       ("example_pipeline.json", pipeline_instance())]:
        with open(os.path.join(HERE, name), "w") as fh:
            fh.write(dumps(data))


if __name__ == "__main__":
    main()
