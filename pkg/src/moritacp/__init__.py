"""Strong Morita equivalence of completely positive maps on finite-dimensional C*-algebras."""

from .algebra import Algebra
from .bimodule import (
    EquivalenceBimodule,
    bimodule_tensor,
    corner_bimodule,
    dual_bimodule,
    matrix_column_bimodule,
    trivial_bimodule,
)
from .certificate import Certificate
from .correspondence import (
    cp_into_algebra,
    example_gns5,
    gns_correspondence,
    psi_iso,
    phi_iso,
    verify_correspondence_sme,
    witness_from_iso,
)
from .cpmap import (
    CPMap,
    induce_cp_map,
    ksgns,
    ksgns_unitary,
    tensor_cp_map,
    transfer_cp_class,
    transfer_roundtrip,
    verify_cp_sme,
)
from .hilbmod import ModuleMap, ProjectiveModule, free_module, interior_tensor
from .representation import (
    Representation,
    SMEWitness,
    induce_representation,
    verify_sme_witness,
    witness_compose,
    witness_dual,
    witness_reflexive,
    witness_roundtrip,
)

__version__ = "0.1.0"
